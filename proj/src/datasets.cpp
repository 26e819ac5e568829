#include "nsl/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <random>

#include "nsl/error.hpp"
#include "nsl/rng.hpp"

namespace nsl {

namespace {

// UCI column of each kZooFeatures entry (column 0 is the animal name).
constexpr std::array<int, 9> kZooColumns = {1, 2, 3, 4, 6, 7, 12, 13, 14};

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

}  // namespace

std::vector<ZooRecord> load_zoo(std::istream& source) {
  std::vector<ZooRecord> out;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(source, raw)) {
    ++line;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw.empty() || raw[0] == '#') continue;
    auto fields = split(raw, ',');
    if (fields.size() != 18) throw ParseError("expected 18 columns, got " + std::to_string(fields.size()), line, 1);
    std::array<int, 18> v{};
    for (std::size_t i = 1; i < 18; ++i) {
      auto [ptr, ec] = std::from_chars(fields[i].data(), fields[i].data() + fields[i].size(), v[i]);
      if (ec != std::errc() || ptr != fields[i].data() + fields[i].size()) {
        throw ParseError("non-integer value in column " + std::to_string(i + 1), line, 1);
      }
    }
    ZooRecord r;
    r.name = std::string(fields[0]);
    for (std::size_t f = 0; f < kZooColumns.size(); ++f) {
      const int x = v[static_cast<std::size_t>(kZooColumns[f])];
      const bool ok = kZooFeatures[f] == "legs" ? (x == 0 || x == 2 || x == 4 || x == 5 || x == 6 || x == 8)
                                                 : (x == 0 || x == 1);
      if (!ok) throw ParseError(std::string(kZooFeatures[f]) + " out of range: " + std::to_string(x), line, 1);
      r.features[f] = x;
    }
    if (v[17] < 1 || v[17] > 7) throw ParseError("class type out of range", line, 1);
    r.label = std::string(kZooClasses[static_cast<std::size_t>(v[17] - 1)]);
    out.push_back(std::move(r));
  }
  return out;
}

int SudokuBoard::filled() const {
  return static_cast<int>(std::count_if(cells.begin(), cells.end(), [](int v) { return v != 0; }));
}

std::string cell_name(int index) { return "c" + std::to_string(index + 1); }

bool same_row(int a, int b) { return a != b && a / 4 == b / 4; }
bool same_col(int a, int b) { return a != b && a % 4 == b % 4; }
bool same_block(int a, int b) { return a != b && (a / 8 == b / 8) && ((a % 4) / 2 == (b % 4) / 2); }

bool is_valid(const std::array<int, 16>& cells) {
  for (int g = 0; g < 4; ++g) {
    std::array<int, 3> seen_mask{};  // row, column, block
    for (int i = 0; i < 4; ++i) {
      const int row_cell = g * 4 + i;
      const int col_cell = i * 4 + g;
      const int block_cell = (g / 2) * 8 + (g % 2) * 2 + (i / 2) * 4 + (i % 2);
      const std::array<int, 3> cells_of = {row_cell, col_cell, block_cell};
      for (int k = 0; k < 3; ++k) {
        const int v = cells[static_cast<std::size_t>(cells_of[static_cast<std::size_t>(k)])];
        if (v == 0) continue;
        const int bit = 1 << v;
        if (seen_mask[static_cast<std::size_t>(k)] & bit) return false;
        seen_mask[static_cast<std::size_t>(k)] |= bit;
      }
    }
  }
  return true;
}

LogicProgram sudoku_background() {
  LogicProgram b;
  for (int i = 0; i < 16; ++i) {
    for (int j = 0; j < 16; ++j) {
      auto add = [&](const char* p) {
        b.rules.push_back(Rule{Atom(p, {Term::symbol(cell_name(i)), Term::symbol(cell_name(j))}), {}, {}, {}});
      };
      if (same_row(i, j)) add("same_row");
      if (same_col(i, j)) add("same_col");
      if (same_block(i, j)) add("same_block");
    }
  }
  return b;
}

namespace {

bool fill(std::array<int, 16>& cells, int pos, std::mt19937_64& rng) {
  if (pos == 16) return true;
  std::vector<int> values = {1, 2, 3, 4};
  shuffle(values, rng);
  for (int v : values) {
    cells[static_cast<std::size_t>(pos)] = v;
    if (is_valid(cells) && fill(cells, pos + 1, rng)) return true;
  }
  cells[static_cast<std::size_t>(pos)] = 0;
  return false;
}

std::array<int, 16> random_solution(std::mt19937_64& rng) {
  std::array<int, 16> cells{};
  fill(cells, 0, rng);
  return cells;
}

std::array<int, 16> keep_cells(const std::array<int, 16>& solution, int keep, std::mt19937_64& rng) {
  std::vector<int> order(16);
  for (int i = 0; i < 16; ++i) order[static_cast<std::size_t>(i)] = i;
  shuffle(order, rng);
  std::array<int, 16> out{};
  for (int i = 0; i < keep; ++i) {
    const auto c = static_cast<std::size_t>(order[static_cast<std::size_t>(i)]);
    out[c] = solution[c];
  }
  return out;
}

}  // namespace

std::vector<SudokuBoard> generate_sudoku_dataset(int n_valid, int n_invalid, std::uint64_t seed) {
  if (n_valid < 0 || n_invalid < 0 || n_valid + n_invalid < 1) throw ArgumentError("need at least one board");
  std::mt19937_64 rng(splitmix64(seed));
  std::vector<SudokuBoard> out;
  for (int i = 0; i < n_valid; ++i) {
    const auto solution = random_solution(rng);
    const int keep = 4 + static_cast<int>(uniform_index(rng, 7));
    out.push_back({keep_cells(solution, keep, rng), true});
  }
  for (int i = 0; i < n_invalid;) {
    const auto solution = random_solution(rng);
    const int keep = 3 + static_cast<int>(uniform_index(rng, 7));
    auto cells = keep_cells(solution, keep, rng);
    const int kind = static_cast<int>(uniform_index(rng, 3));
    std::vector<std::pair<int, int>> moves;  // (source, empty peer)
    for (int a = 0; a < 16; ++a) {
      if (!cells[static_cast<std::size_t>(a)]) continue;
      for (int b = 0; b < 16; ++b) {
        if (cells[static_cast<std::size_t>(b)]) continue;
        const bool peer = kind == 0 ? same_row(a, b) : kind == 1 ? same_col(a, b) : same_block(a, b);
        if (peer) moves.emplace_back(a, b);
      }
    }
    if (moves.empty()) continue;
    const auto [a, b] = moves[uniform_index(rng, moves.size())];
    cells[static_cast<std::size_t>(b)] = cells[static_cast<std::size_t>(a)];
    out.push_back({cells, false});
    ++i;
  }
  return out;
}

std::string to_string(const SudokuBoard& board) {
  std::string out;
  for (int v : board.cells) out += v ? static_cast<char>('0' + v) : '.';
  return out + (board.valid ? ",valid" : ",invalid");
}

std::vector<SudokuBoard> read_boards(std::istream& source) {
  std::vector<SudokuBoard> out;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(source, raw)) {
    ++line;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw.empty() || raw[0] == '#') continue;
    auto fields = split(raw, ',');
    if (fields.size() != 2 || fields[0].size() != 16) throw ParseError("expected 16 cells, a comma and a label", line, 1);
    SudokuBoard b;
    for (std::size_t i = 0; i < 16; ++i) {
      const char c = fields[0][i];
      if (c == '.') continue;
      if (c < '1' || c > '4') throw ParseError("cell values must be 1-4 or '.'", line, i + 1);
      b.cells[i] = c - '0';
    }
    if (fields[1] == "valid") {
      b.valid = true;
    } else if (fields[1] == "invalid") {
      b.valid = false;
    } else {
      throw ParseError("label must be valid or invalid", line, 18);
    }
    out.push_back(b);
  }
  return out;
}

void write_boards(const std::vector<SudokuBoard>& boards, std::ostream& sink) {
  for (const auto& b : boards) sink << to_string(b) << '\n';
}

std::vector<int> stratified_folds(const std::vector<std::string>& labels, int folds, std::uint64_t seed) {
  if (folds < 2) throw ArgumentError("need at least 2 folds");
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, fresh] = by_label.try_emplace(labels[i]);
    if (fresh) order.push_back(labels[i]);
    it->second.push_back(i);
  }
  std::mt19937_64 rng(splitmix64(seed ^ 0xF01D5ULL));
  std::vector<int> fold(labels.size(), 0);
  int next = 0;
  for (const auto& l : order) {
    auto& items = by_label[l];
    shuffle(items, rng);
    for (auto i : items) {
      fold[i] = next;
      next = (next + 1) % folds;
    }
  }
  return fold;
}

}  // namespace nsl
