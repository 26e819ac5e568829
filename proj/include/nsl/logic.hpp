#pragma once

// Core value types for the normal-logic-program subset: terms, atoms, rules,
// programs and (ground) interpretations.

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nsl {

/// Process-wide interned symbol id. Interning is thread-safe and ids are
/// stable for the lifetime of the process.
using SymbolId = std::uint32_t;

SymbolId intern(std::string_view name);
std::string_view symbol_name(SymbolId id);

class Term {
 public:
  enum class Kind : std::uint8_t { Integer, Symbol, Variable };

  Term() = default;

  static Term integer(std::int64_t value) { return Term(Kind::Integer, value); }
  static Term symbol(std::string_view name) { return Term(Kind::Symbol, intern(name)); }
  static Term variable(std::string_view name) { return Term(Kind::Variable, intern(name)); }
  /// Symbol for an identifier, integer for a decimal literal.
  static Term constant(std::string_view text);

  Kind kind() const noexcept { return kind_; }
  bool is_variable() const noexcept { return kind_ == Kind::Variable; }
  bool is_integer() const noexcept { return kind_ == Kind::Integer; }
  bool is_symbol() const noexcept { return kind_ == Kind::Symbol; }

  std::int64_t as_integer() const noexcept { return value_; }
  SymbolId id() const noexcept { return static_cast<SymbolId>(value_); }
  std::string_view name() const { return symbol_name(id()); }

  std::string to_string() const;

  std::size_t hash() const noexcept {
    auto v = static_cast<std::uint64_t>(value_) * 0x9E3779B97F4A7C15ULL;
    return static_cast<std::size_t>(v ^ (static_cast<std::uint64_t>(kind_) << 61) ^ (v >> 29));
  }

  friend bool operator==(const Term&, const Term&) = default;

 private:
  Term(Kind kind, std::int64_t value) : kind_(kind), value_(value) {}

  Kind kind_ = Kind::Integer;
  std::int64_t value_ = 0;
};

/// Total order on ground terms: integers numerically, then symbols
/// lexicographically. Variables sort last, by name.
int compare_terms(const Term& a, const Term& b);

struct PredicateKey {
  SymbolId name = 0;
  std::uint32_t arity = 0;

  friend bool operator==(const PredicateKey&, const PredicateKey&) = default;
  friend bool operator<(const PredicateKey& a, const PredicateKey& b) {
    return a.name != b.name ? a.name < b.name : a.arity < b.arity;
  }
};

std::string to_string(const PredicateKey& key);

struct Atom {
  SymbolId predicate = 0;
  std::vector<Term> args;

  Atom() = default;
  Atom(std::string_view pred, std::vector<Term> arguments = {})
      : predicate(intern(pred)), args(std::move(arguments)) {}
  Atom(SymbolId pred, std::vector<Term> arguments) : predicate(pred), args(std::move(arguments)) {}

  std::string_view name() const { return symbol_name(predicate); }
  PredicateKey key() const { return {predicate, static_cast<std::uint32_t>(args.size())}; }
  bool is_ground() const;
  std::string to_string() const;
  std::size_t hash() const noexcept;

  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Deterministic order: predicate name, arity, then arguments by compare_terms.
bool atom_less(const Atom& a, const Atom& b);

struct AtomLess {
  bool operator()(const Atom& a, const Atom& b) const { return atom_less(a, b); }
};

struct AtomHash {
  std::size_t operator()(const Atom& a) const noexcept { return a.hash(); }
};

enum class CmpOp : std::uint8_t { Eq, Ne, Lt, Le, Gt, Ge };

std::string_view to_string(CmpOp op);
bool evaluate(CmpOp op, const Term& lhs, const Term& rhs);

struct Comparison {
  Term lhs;
  CmpOp op = CmpOp::Eq;
  Term rhs;

  std::string to_string() const;
  friend bool operator==(const Comparison&, const Comparison&) = default;
};

struct Rule {
  Atom head;
  std::vector<Atom> body_pos;
  std::vector<Atom> body_neg;
  std::vector<Comparison> comparisons;

  bool is_fact() const { return body_pos.empty() && body_neg.empty() && comparisons.empty(); }
  bool is_ground() const;
  /// Literal count including the head.
  std::size_t length() const { return 1 + body_pos.size() + body_neg.size() + comparisons.size(); }
  std::string to_string() const;

  friend bool operator==(const Rule&, const Rule&) = default;
};

/// Throws SafetyError when a variable of the head, a negative literal or a
/// comparison does not occur in the positive body.
void check_safety(const Rule& rule);

struct LogicProgram {
  std::vector<Rule> rules;

  bool empty() const { return rules.empty(); }
  std::size_t size() const { return rules.size(); }
  /// One statement per line.
  std::string to_string() const;
  /// Statements separated by single spaces (used inside braces).
  std::string to_inline_string() const;

  friend bool operator==(const LogicProgram&, const LogicProgram&) = default;
};

LogicProgram concat(const LogicProgram& a, const LogicProgram& b);

/// Tuples of one predicate, stored row-major with a hash index for membership.
class Relation {
 public:
  explicit Relation(std::uint32_t arity = 0) : arity_(arity) {}

  std::uint32_t arity() const noexcept { return arity_; }
  std::size_t size() const noexcept { return arity_ == 0 ? (present_ ? 1 : 0) : cells_.size() / arity_; }
  std::span<const Term> row(std::size_t i) const { return {cells_.data() + i * arity_, arity_}; }

  bool insert(std::span<const Term> tuple);
  bool contains(std::span<const Term> tuple) const;

 private:
  std::size_t find_slot(std::span<const Term> tuple, std::size_t hash) const;
  void rehash(std::size_t capacity);
  static std::size_t hash_tuple(std::span<const Term> tuple) noexcept;

  std::uint32_t arity_;
  bool present_ = false;  // arity-0 relations
  std::vector<Term> cells_;
  std::vector<std::uint32_t> slots_;  // row index + 1, 0 = empty
};

/// A set of ground atoms.
class Interpretation {
 public:
  Interpretation() = default;
  Interpretation(std::initializer_list<Atom> atoms);

  bool insert(const Atom& atom);
  bool insert(PredicateKey key, std::span<const Term> tuple);
  bool contains(const Atom& atom) const;
  bool contains(PredicateKey key, std::span<const Term> tuple) const;
  void merge(const Interpretation& other);

  std::size_t size() const;
  bool empty() const { return size() == 0; }
  const Relation* relation(PredicateKey key) const;

  /// All atoms in atom_less order.
  std::vector<Atom> atoms() const;
  bool subset_of(const Interpretation& other) const;
  std::string to_string() const;

  friend bool operator==(const Interpretation& a, const Interpretation& b) {
    return a.size() == b.size() && a.subset_of(b);
  }

 private:
  Relation& relation_for(PredicateKey key);

  std::map<PredicateKey, Relation> relations_;
};

/// Ground facts of a program as an interpretation; throws ArgumentError if a
/// rule is not a ground fact.
Interpretation facts_of(const LogicProgram& program);
LogicProgram as_program(const Interpretation& facts);

}  // namespace nsl

template <>
struct std::hash<nsl::Term> {
  std::size_t operator()(const nsl::Term& t) const noexcept { return t.hash(); }
};

template <>
struct std::hash<nsl::Atom> {
  std::size_t operator()(const nsl::Atom& a) const noexcept { return a.hash(); }
};
