#pragma once

// Zoo and 4x4 Sudoku data, the validity checker and stratified folds.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nsl/logic.hpp"

namespace nsl {

inline constexpr std::array<std::string_view, 9> kZooFeatures = {"hair", "feathers", "eggs", "milk", "aquatic",
                                                                  "predator", "fins", "legs", "tail"};
inline constexpr std::array<std::string_view, 7> kZooClasses = {"mammal", "bird", "reptile", "fish",
                                                                 "amphibian", "bug", "invertebrate"};

struct ZooRecord {
  std::string name;
  std::array<int, 9> features{};  // order of kZooFeatures
  std::string label;
};

/// UCI layout: name, 16 attributes, type 1..7. Keeps the 9 attributes of
/// kZooFeatures. Throws ParseError on a wrong column count or a value
/// outside its domain (booleans 0/1, legs in {0,2,4,5,6,8}).
std::vector<ZooRecord> load_zoo(std::istream& source);

struct SudokuBoard {
  std::array<int, 16> cells{};  // row-major, 0 = empty, else 1..4
  bool valid = true;

  int filled() const;
  friend bool operator==(const SudokuBoard&, const SudokuBoard&) = default;
};

/// Cell ids c1..c16, row-major.
std::string cell_name(int index);
bool same_row(int a, int b);
bool same_col(int a, int b);
bool same_block(int a, int b);
/// No two equal values share a row, column or 2x2 block.
bool is_valid(const std::array<int, 16>& cells);

/// same_row / same_col / same_block facts over distinct cells.
LogicProgram sudoku_background();

/// Valid boards keep 4..10 cells of a random complete solution. Invalid
/// boards start from 3..9 cells of a solution and copy one value into an
/// empty cell sharing a row, column or block (kind chosen uniformly).
/// Output: the valid boards, then the invalid ones.
std::vector<SudokuBoard> generate_sudoku_dataset(int n_valid, int n_invalid, std::uint64_t seed);

/// "12..3...........,valid" per line; '#' lines and blank lines skipped.
std::vector<SudokuBoard> read_boards(std::istream& source);
void write_boards(const std::vector<SudokuBoard>& boards, std::ostream& sink);
std::string to_string(const SudokuBoard& board);

/// Stratified k-fold assignment: items of each label are shuffled and dealt
/// round-robin, continuing across labels (labels in first-seen order).
std::vector<int> stratified_folds(const std::vector<std::string>& labels, int folds, std::uint64_t seed);

}  // namespace nsl
