#include "mobsynth/meshgrid.hpp"

#include <algorithm>

#include "mobsynth/error.hpp"

namespace mobsynth {

bool is_valid_cell_code(std::string_view digits) noexcept {
  if (digits.empty() || digits.size() > CellCode::kMaxLevel) return false;
  return std::all_of(digits.begin(), digits.end(),
                     [](char c) { return c >= '0' && c <= '9'; });
}

CellCode::CellCode(std::string digits) : digits_(std::move(digits)) {
  if (!is_valid_cell_code(digits_)) {
    throw InputError("invalid cell code '" + digits_ +
                     "': expected 1..11 decimal digits");
  }
}

bool CellCode::contains(const CellCode& other) const noexcept {
  return other.digits_.size() >= digits_.size() &&
         other.digits_.compare(0, digits_.size(), digits_) == 0;
}

CellCode parent(const CellCode& code) {
  if (code.level() < 2) {
    throw InputError("cell code '" + code.str() + "' has no coarser level");
  }
  return CellCode(code.str().substr(0, code.level() - 1));
}

std::vector<CellCode> ancestors(const CellCode& code) {
  std::vector<CellCode> out;
  out.reserve(code.level() - 1);
  for (std::size_t len = code.level() - 1; len >= 1; --len) {
    out.emplace_back(code.str().substr(0, len));
  }
  return out;
}

CellCode synth_code(std::uint32_t x, std::uint32_t y, int levels) {
  if (levels < 1 || levels > static_cast<int>(CellCode::kMaxLevel)) {
    throw InputError("synth_code: levels must be in 1..11");
  }
  const std::uint32_t side = 1u << levels;
  if (x >= side || y >= side) {
    throw InputError("synth_code: (" + std::to_string(x) + ", " +
                     std::to_string(y) + ") outside 2^" +
                     std::to_string(levels) + " grid");
  }
  std::string digits(static_cast<std::size_t>(levels), '0');
  for (int i = 0; i < levels; ++i) {
    const int bit = levels - 1 - i;
    const std::uint32_t xb = (x >> bit) & 1u;
    const std::uint32_t yb = (y >> bit) & 1u;
    digits[static_cast<std::size_t>(i)] = static_cast<char>('0' + xb + 2 * yb);
  }
  return CellCode(std::move(digits));
}

std::pair<std::uint32_t, std::uint32_t> synth_coords(const CellCode& code) {
  std::uint32_t x = 0;
  std::uint32_t y = 0;
  for (char c : code.str()) {
    const int d = c - '0';
    if (d > 3) {
      throw InputError("cell code '" + code.str() + "' is not a quadtree code");
    }
    x = (x << 1) | static_cast<std::uint32_t>(d & 1);
    y = (y << 1) | static_cast<std::uint32_t>(d >> 1);
  }
  return {x, y};
}

}  // namespace mobsynth
