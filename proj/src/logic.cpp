#include "nsl/logic.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <unordered_map>

#include "nsl/error.hpp"

namespace nsl {

namespace {

class SymbolTable {
 public:
  SymbolId intern(std::string_view name) {
    {
      std::shared_lock lock(mutex_);
      if (auto it = ids_.find(name); it != ids_.end()) return it->second;
    }
    std::unique_lock lock(mutex_);
    if (auto it = ids_.find(name); it != ids_.end()) return it->second;
    names_.emplace_back(name);
    auto id = static_cast<SymbolId>(names_.size() - 1);
    ids_.emplace(names_.back(), id);
    return id;
  }

  std::string_view name(SymbolId id) const {
    std::shared_lock lock(mutex_);
    return names_.at(id);
  }

 private:
  mutable std::shared_mutex mutex_;
  std::deque<std::string> names_;  // deque keeps string addresses stable
  std::unordered_map<std::string_view, SymbolId> ids_;
};

SymbolTable& symbols() {
  static SymbolTable table;
  return table;
}

void collect_vars(const Term& t, std::vector<Term>& out) {
  if (t.is_variable() && std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
}

void collect_vars(const Atom& a, std::vector<Term>& out) {
  for (const auto& t : a.args) collect_vars(t, out);
}

std::string join_atoms(const std::vector<Atom>& atoms, std::string_view prefix, std::string& out, bool first) {
  for (const auto& a : atoms) {
    if (!first) out += ", ";
    out += prefix;
    out += a.to_string();
    first = false;
  }
  return out;
}

}  // namespace

SymbolId intern(std::string_view name) { return symbols().intern(name); }
std::string_view symbol_name(SymbolId id) { return symbols().name(id); }

Term Term::constant(std::string_view text) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec == std::errc() && ptr == text.data() + text.size()) return integer(value);
  return symbol(text);
}

std::string Term::to_string() const {
  if (kind_ == Kind::Integer) return std::to_string(value_);
  return std::string(name());
}

int compare_terms(const Term& a, const Term& b) {
  if (a.kind() != b.kind()) return a.kind() < b.kind() ? -1 : 1;
  if (a.is_integer()) return a.as_integer() < b.as_integer() ? -1 : (a.as_integer() > b.as_integer() ? 1 : 0);
  if (a.id() == b.id()) return 0;
  return a.name().compare(b.name()) < 0 ? -1 : 1;
}

std::string to_string(const PredicateKey& key) {
  return std::string(symbol_name(key.name)) + "/" + std::to_string(key.arity);
}

bool Atom::is_ground() const {
  return std::none_of(args.begin(), args.end(), [](const Term& t) { return t.is_variable(); });
}

std::string Atom::to_string() const {
  std::string out(name());
  if (!args.empty()) {
    out += '(';
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i) out += ',';
      out += args[i].to_string();
    }
    out += ')';
  }
  return out;
}

std::size_t Atom::hash() const noexcept {
  std::size_t h = predicate * 0x100000001B3ULL + args.size();
  for (const auto& t : args) h = (h ^ t.hash()) * 0x100000001B3ULL;
  return h;
}

bool atom_less(const Atom& a, const Atom& b) {
  if (a.predicate != b.predicate) return a.name() < b.name();
  if (a.args.size() != b.args.size()) return a.args.size() < b.args.size();
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    int c = compare_terms(a.args[i], b.args[i]);
    if (c) return c < 0;
  }
  return false;
}

std::string_view to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "==";
    case CmpOp::Ne: return "!=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
  }
  return "?";
}

bool evaluate(CmpOp op, const Term& lhs, const Term& rhs) {
  int c = compare_terms(lhs, rhs);
  switch (op) {
    case CmpOp::Eq: return c == 0;
    case CmpOp::Ne: return c != 0;
    case CmpOp::Lt: return c < 0;
    case CmpOp::Le: return c <= 0;
    case CmpOp::Gt: return c > 0;
    case CmpOp::Ge: return c >= 0;
  }
  return false;
}

std::string Comparison::to_string() const {
  return lhs.to_string() + " " + std::string(nsl::to_string(op)) + " " + rhs.to_string();
}

bool Rule::is_ground() const {
  auto ground = [](const Atom& a) { return a.is_ground(); };
  return head.is_ground() && std::all_of(body_pos.begin(), body_pos.end(), ground) &&
         std::all_of(body_neg.begin(), body_neg.end(), ground) &&
         std::all_of(comparisons.begin(), comparisons.end(),
                     [](const Comparison& c) { return !c.lhs.is_variable() && !c.rhs.is_variable(); });
}

std::string Rule::to_string() const {
  std::string out = head.to_string();
  if (!is_fact()) {
    out += " :- ";
    join_atoms(body_pos, "", out, true);
    join_atoms(body_neg, "not ", out, body_pos.empty());
    bool first = body_pos.empty() && body_neg.empty();
    for (const auto& c : comparisons) {
      if (!first) out += ", ";
      out += c.to_string();
      first = false;
    }
  }
  out += '.';
  return out;
}

void check_safety(const Rule& rule) {
  std::vector<Term> bound;
  for (const auto& a : rule.body_pos) collect_vars(a, bound);
  std::vector<Term> needed;
  collect_vars(rule.head, needed);
  for (const auto& a : rule.body_neg) collect_vars(a, needed);
  for (const auto& c : rule.comparisons) {
    collect_vars(c.lhs, needed);
    collect_vars(c.rhs, needed);
  }
  for (const auto& v : needed) {
    if (std::find(bound.begin(), bound.end(), v) == bound.end()) {
      throw SafetyError(rule.to_string(), std::string(v.name()));
    }
  }
}

std::string LogicProgram::to_string() const {
  std::string out;
  for (const auto& r : rules) {
    out += r.to_string();
    out += '\n';
  }
  return out;
}

std::string LogicProgram::to_inline_string() const {
  std::string out;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    if (i) out += ' ';
    out += rules[i].to_string();
  }
  return out;
}

LogicProgram concat(const LogicProgram& a, const LogicProgram& b) {
  LogicProgram out = a;
  out.rules.insert(out.rules.end(), b.rules.begin(), b.rules.end());
  return out;
}

// ---------------------------------------------------------------------------
// Relation

std::size_t Relation::hash_tuple(std::span<const Term> tuple) noexcept {
  std::size_t h = 0xCBF29CE484222325ULL;
  for (const auto& t : tuple) h = (h ^ t.hash()) * 0x100000001B3ULL;
  return h ^ (h >> 31);
}

std::size_t Relation::find_slot(std::span<const Term> tuple, std::size_t hash) const {
  const std::size_t mask = slots_.size() - 1;
  for (std::size_t i = hash & mask;; i = (i + 1) & mask) {
    std::uint32_t s = slots_[i];
    if (s == 0) return i;
    auto r = row(s - 1);
    if (std::equal(r.begin(), r.end(), tuple.begin())) return i;
  }
}

void Relation::rehash(std::size_t capacity) {
  slots_.assign(capacity, 0);
  const std::size_t n = size();
  for (std::size_t r = 0; r < n; ++r) {
    auto idx = find_slot(row(r), hash_tuple(row(r)));
    slots_[idx] = static_cast<std::uint32_t>(r + 1);
  }
}

bool Relation::insert(std::span<const Term> tuple) {
  if (arity_ == 0) {
    bool fresh = !present_;
    present_ = true;
    return fresh;
  }
  if (slots_.empty()) rehash(16);
  auto h = hash_tuple(tuple);
  auto idx = find_slot(tuple, h);
  if (slots_[idx] != 0) return false;
  cells_.insert(cells_.end(), tuple.begin(), tuple.end());
  slots_[idx] = static_cast<std::uint32_t>(size());
  if (size() * 2 > slots_.size()) rehash(slots_.size() * 2);
  return true;
}

bool Relation::contains(std::span<const Term> tuple) const {
  if (arity_ == 0) return present_;
  if (slots_.empty()) return false;
  return slots_[find_slot(tuple, hash_tuple(tuple))] != 0;
}

// ---------------------------------------------------------------------------
// Interpretation

Interpretation::Interpretation(std::initializer_list<Atom> atoms) {
  for (const auto& a : atoms) insert(a);
}

Relation& Interpretation::relation_for(PredicateKey key) {
  auto it = relations_.find(key);
  if (it == relations_.end()) it = relations_.emplace(key, Relation(key.arity)).first;
  return it->second;
}

bool Interpretation::insert(const Atom& atom) {
  if (!atom.is_ground()) throw ArgumentError("interpretation atoms must be ground: " + atom.to_string());
  return relation_for(atom.key()).insert(atom.args);
}

bool Interpretation::insert(PredicateKey key, std::span<const Term> tuple) {
  return relation_for(key).insert(tuple);
}

bool Interpretation::contains(const Atom& atom) const { return contains(atom.key(), atom.args); }

bool Interpretation::contains(PredicateKey key, std::span<const Term> tuple) const {
  auto it = relations_.find(key);
  return it != relations_.end() && it->second.contains(tuple);
}

void Interpretation::merge(const Interpretation& other) {
  for (const auto& [key, rel] : other.relations_) {
    auto& mine = relation_for(key);
    for (std::size_t i = 0; i < rel.size(); ++i) mine.insert(rel.row(i));
  }
}

std::size_t Interpretation::size() const {
  std::size_t n = 0;
  for (const auto& [key, rel] : relations_) n += rel.size();
  return n;
}

const Relation* Interpretation::relation(PredicateKey key) const {
  auto it = relations_.find(key);
  return it == relations_.end() ? nullptr : &it->second;
}

std::vector<Atom> Interpretation::atoms() const {
  std::vector<Atom> out;
  out.reserve(size());
  for (const auto& [key, rel] : relations_) {
    for (std::size_t i = 0; i < rel.size(); ++i) {
      auto r = rel.row(i);
      out.emplace_back(key.name, std::vector<Term>(r.begin(), r.end()));
    }
  }
  std::sort(out.begin(), out.end(), atom_less);
  return out;
}

bool Interpretation::subset_of(const Interpretation& other) const {
  for (const auto& [key, rel] : relations_) {
    for (std::size_t i = 0; i < rel.size(); ++i) {
      if (!other.contains(key, rel.row(i))) return false;
    }
  }
  return true;
}

std::string Interpretation::to_string() const {
  std::string out = "{";
  bool first = true;
  for (const auto& a : atoms()) {
    if (!first) out += ", ";
    out += a.to_string();
    first = false;
  }
  return out + "}";
}

Interpretation facts_of(const LogicProgram& program) {
  Interpretation out;
  for (const auto& r : program.rules) {
    if (!r.is_fact() || !r.head.is_ground()) throw ArgumentError("expected a ground fact, got: " + r.to_string());
    out.insert(r.head);
  }
  return out;
}

LogicProgram as_program(const Interpretation& facts) {
  LogicProgram out;
  for (auto& a : facts.atoms()) out.rules.push_back(Rule{std::move(a), {}, {}, {}});
  return out;
}

}  // namespace nsl
