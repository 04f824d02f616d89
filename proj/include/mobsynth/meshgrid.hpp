#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mobsynth {

// Hierarchical grid-cell code: a string of 1..11 decimal digits. Dropping the
// last digit yields the enclosing cell one level up.
class CellCode {
 public:
  static constexpr std::size_t kMaxLevel = 11;

  // The level-1 cell "0".
  CellCode() : digits_("0") {}

  // Throws InputError unless `digits` is 1..11 decimal digits.
  explicit CellCode(std::string digits);

  const std::string& str() const noexcept { return digits_; }
  std::size_t level() const noexcept { return digits_.size(); }

  // True when this code is `other` or one of its ancestors.
  bool contains(const CellCode& other) const noexcept;

  friend auto operator<=>(const CellCode&, const CellCode&) = default;
  friend bool operator==(const CellCode&, const CellCode&) = default;

 private:
  std::string digits_;
};

bool is_valid_cell_code(std::string_view digits) noexcept;

// Code with the last digit masked. Throws InputError("no coarser level") on a
// level-1 code.
CellCode parent(const CellCode& code);

// Strict ancestors, finest first: "1234" -> {"123", "12", "1"}.
std::vector<CellCode> ancestors(const CellCode& code);

// Quadtree code for cell (x, y) on a 2^levels x 2^levels grid. Each digit,
// coarsest first, is xbit + 2*ybit of the corresponding bit plane, so
// parent(synth_code(x, y, L)) == synth_code(x/2, y/2, L-1).
CellCode synth_code(std::uint32_t x, std::uint32_t y, int levels);

// Inverse of synth_code. Throws InputError for digits outside 0..3.
std::pair<std::uint32_t, std::uint32_t> synth_coords(const CellCode& code);

}  // namespace mobsynth

template <>
struct std::hash<mobsynth::CellCode> {
  std::size_t operator()(const mobsynth::CellCode& c) const noexcept {
    return std::hash<std::string>{}(c.str());
  }
};
