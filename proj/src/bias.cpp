#include "nsl/bias.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_set>

#include "nsl/error.hpp"
#include "nsl/parser.hpp"

namespace nsl {

std::string ModeDecl::to_string() const {
  std::string out = predicate;
  if (args.empty()) return out;
  out += '(';
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ", ";
    out += (args[i].kind == ModeArg::Kind::Var ? "var(" : "const(") + args[i].type + ")";
  }
  return out + ")";
}

std::string LanguageBias::to_string() const {
  std::string out;
  for (const auto& m : head_modes) out += "modeh(" + m.to_string() + ").\n";
  for (const auto& m : body_modes) out += "modeb(" + m.to_string() + ").\n";
  for (const auto& [type, values] : pools) {
    out += "pool(" + type;
    for (const auto& v : values) out += ", " + v.to_string();
    out += ").\n";
  }
  out += "maxv(" + std::to_string(max_variables) + "). maxbody(" + std::to_string(max_body) + "). minbody(" +
         std::to_string(min_body) + ").\n";
  if (allow_negation) out += "allow_negation.\n";
  if (allow_inequality) out += "allow_inequality.\n";
  return out;
}

namespace {

ModeDecl parse_mode(Lexer& lx) {
  ModeDecl m;
  m.predicate = lx.expect(TokenKind::Ident, "predicate name").text;
  if (!lx.at(TokenKind::LParen)) return m;
  lx.next();
  while (true) {
    Token kind = lx.expect(TokenKind::Ident, "var(...) or const(...)");
    ModeArg a;
    if (kind.text == "var") {
      a.kind = ModeArg::Kind::Var;
    } else if (kind.text == "const") {
      a.kind = ModeArg::Kind::Const;
    } else {
      lx.fail("mode argument must be var(type) or const(type), got " + kind.text);
    }
    lx.expect(TokenKind::LParen, "'('");
    a.type = lx.expect(TokenKind::Ident, "type name").text;
    lx.expect(TokenKind::RParen, "')'");
    m.args.push_back(std::move(a));
    if (lx.at(TokenKind::Comma)) {
      lx.next();
      continue;
    }
    lx.expect(TokenKind::RParen, "')'");
    return m;
  }
}

int parse_count(Lexer& lx) {
  lx.expect(TokenKind::LParen, "'('");
  Token t = lx.expect(TokenKind::Integer, "integer");
  lx.expect(TokenKind::RParen, "')'");
  return std::stoi(t.text);
}

}  // namespace

LanguageBias parse_bias(Lexer& lx) {
  LanguageBias b;
  while (!lx.at(TokenKind::End) && !lx.at(TokenKind::RBrace)) {
    Token name = lx.expect(TokenKind::Ident, "bias directive");
    if (name.text == "modeh" || name.text == "modeb") {
      lx.expect(TokenKind::LParen, "'('");
      auto mode = parse_mode(lx);
      lx.expect(TokenKind::RParen, "')'");
      (name.text == "modeh" ? b.head_modes : b.body_modes).push_back(std::move(mode));
    } else if (name.text == "maxv") {
      b.max_variables = parse_count(lx);
    } else if (name.text == "maxbody") {
      b.max_body = parse_count(lx);
    } else if (name.text == "minbody") {
      b.min_body = parse_count(lx);
    } else if (name.text == "pool") {
      lx.expect(TokenKind::LParen, "'('");
      std::string type = lx.expect(TokenKind::Ident, "type name").text;
      auto& values = b.pools[type];
      while (lx.at(TokenKind::Comma)) {
        lx.next();
        Term t = parse_term(lx);
        if (t.is_variable()) lx.fail("pool values must be constants");
        values.push_back(t);
      }
      lx.expect(TokenKind::RParen, "')'");
    } else if (name.text == "allow_negation") {
      b.allow_negation = true;
    } else if (name.text == "allow_inequality") {
      b.allow_inequality = true;
    } else {
      lx.fail("unknown bias directive " + name.text);
    }
    lx.expect(TokenKind::Period, "'.'");
  }
  return b;
}

LanguageBias parse_bias(std::string_view text) {
  Lexer lx(text);
  auto b = parse_bias(lx);
  if (!lx.at(TokenKind::End)) lx.fail("unexpected '}'");
  return b;
}

void validate(const LanguageBias& b) {
  if (b.max_body < 0 || b.min_body < 0 || b.max_variables < 0) throw ArgumentError("bias budgets must be >= 0");
  auto check = [&](const ModeDecl& m, bool head) {
    for (const auto& a : m.args) {
      if (a.type.empty() || std::isdigit(static_cast<unsigned char>(a.type.back()))) {
        throw ArgumentError("type name must not end in a digit: " + a.type);
      }
      if (a.kind == ModeArg::Kind::Const) {
        auto it = b.pools.find(a.type);
        if (it == b.pools.end() || it->second.empty()) throw ArgumentError("no pool for type " + a.type);
      } else if (head) {
        throw ArgumentError("head mode " + m.to_string() + " must be ground (use const(type))");
      }
    }
  };
  for (const auto& m : b.head_modes) check(m, true);
  for (const auto& m : b.body_modes) check(m, false);
}

namespace {

void expand(const ModeDecl& m, const LanguageBias& b, std::size_t i, std::vector<Term>& args, std::vector<Atom>& out) {
  if (i == m.args.size()) {
    out.emplace_back(m.predicate, args);
    return;
  }
  for (const auto& v : b.pools.at(m.args[i].type)) {
    args.push_back(v);
    expand(m, b, i + 1, args, out);
    args.pop_back();
  }
}

}  // namespace

std::vector<Atom> head_atoms(const LanguageBias& bias) {
  validate(bias);
  std::vector<Atom> out;
  for (const auto& m : bias.head_modes) {
    std::vector<Term> args;
    expand(m, bias, 0, args, out);
  }
  return out;
}

std::vector<PredicateKey> head_predicates(const LanguageBias& bias) {
  std::set<PredicateKey> keys;
  for (const auto& m : bias.head_modes) keys.insert({intern(m.predicate), static_cast<std::uint32_t>(m.args.size())});
  return {keys.begin(), keys.end()};
}

void check_opl(const LanguageBias& bias, const LogicProgram& background) {
  auto heads = head_predicates(bias);
  auto is_head = [&](PredicateKey k) { return std::find(heads.begin(), heads.end(), k) != heads.end(); };
  for (const auto& m : bias.body_modes) {
    if (is_head({intern(m.predicate), static_cast<std::uint32_t>(m.args.size())})) {
      throw SemanticError("head predicate " + m.predicate + " appears in a body mode");
    }
  }
  for (const auto& r : background.rules) {
    for (const auto* body : {&r.body_pos, &r.body_neg}) {
      for (const auto& a : *body) {
        if (is_head(a.key())) {
          throw SemanticError("head predicate " + std::string(a.name()) + " appears in the background body of " +
                              r.to_string());
        }
      }
    }
  }
}

namespace {

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

Term renamed(const Term& t, const std::map<SymbolId, Term>& names) {
  if (!t.is_variable()) return t;
  return names.at(t.id());
}

Atom renamed(const Atom& a, const std::map<SymbolId, Term>& names) {
  Atom out(a.predicate, {});
  out.args.reserve(a.args.size());
  for (const auto& t : a.args) out.args.push_back(renamed(t, names));
  return out;
}

struct Rendered {
  std::string text;
  Rule rule;
};

// Sorted body under one renaming; empty text when a literal repeats.
Rendered render(const Rule& r, const std::map<SymbolId, Term>& names) {
  using Keyed = std::pair<std::string, std::size_t>;
  Rendered out;
  out.rule.head = renamed(r.head, names);
  std::vector<Atom> pos, neg;
  std::vector<Comparison> cmps;
  for (const auto& a : r.body_pos) pos.push_back(renamed(a, names));
  for (const auto& a : r.body_neg) neg.push_back(renamed(a, names));
  for (const auto& c : r.comparisons) {
    Comparison k{renamed(c.lhs, names), c.op, renamed(c.rhs, names)};
    if ((k.op == CmpOp::Ne || k.op == CmpOp::Eq) && k.rhs.to_string() < k.lhs.to_string()) std::swap(k.lhs, k.rhs);
    cmps.push_back(k);
  }
  auto sorted = [](auto& items) {
    std::vector<Keyed> keys;
    for (std::size_t i = 0; i < items.size(); ++i) keys.emplace_back(items[i].to_string(), i);
    std::sort(keys.begin(), keys.end());
    return keys;
  };
  auto kp = sorted(pos), kn = sorted(neg), kc = sorted(cmps);
  for (auto* keys : {&kp, &kn, &kc}) {
    for (std::size_t i = 1; i < keys->size(); ++i) {
      if ((*keys)[i].first == (*keys)[i - 1].first) return {};
    }
  }
  for (auto& [s, i] : kp) out.rule.body_pos.push_back(pos[i]);
  for (auto& [s, i] : kn) out.rule.body_neg.push_back(neg[i]);
  for (auto& [s, i] : kc) out.rule.comparisons.push_back(cmps[i]);
  out.text = out.rule.to_string();
  return out;
}

std::map<SymbolId, std::string> infer_types(const Rule& r, const LanguageBias& b) {
  std::map<SymbolId, std::string> types;
  for (const auto* body : {&r.body_pos, &r.body_neg}) {
    for (const auto& a : *body) {
      for (const auto& m : b.body_modes) {
        if (m.predicate != a.name() || m.args.size() != a.args.size()) continue;
        for (std::size_t i = 0; i < a.args.size(); ++i) {
          if (a.args[i].is_variable() && m.args[i].kind == ModeArg::Kind::Var) types.emplace(a.args[i].id(), m.args[i].type);
        }
        break;
      }
    }
  }
  auto note = [&](const Term& t) {
    if (t.is_variable()) types.emplace(t.id(), "var");
  };
  for (const auto& c : r.comparisons) {
    note(c.lhs);
    note(c.rhs);
  }
  for (const auto* body : {&r.body_pos, &r.body_neg}) {
    for (const auto& a : *body) {
      for (const auto& t : a.args) note(t);
    }
  }
  return types;
}

Rendered canonical_render(const Rule& r, const std::map<SymbolId, std::string>& types) {
  std::map<std::string, std::vector<SymbolId>> by_type;
  for (const auto& [v, t] : types) by_type[t].push_back(v);
  std::vector<std::pair<std::string, std::vector<SymbolId>>> groups(by_type.begin(), by_type.end());
  for (auto& [t, vars] : groups) std::sort(vars.begin(), vars.end());

  Rendered best;
  bool first = true;
  std::map<SymbolId, Term> names;
  // odometer over per-type permutations
  std::vector<std::vector<SymbolId>> perms;
  for (auto& [t, vars] : groups) perms.push_back(vars);
  while (true) {
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto cap = capitalize(groups[g].first);
      for (std::size_t i = 0; i < perms[g].size(); ++i) {
        names[perms[g][i]] = Term::variable(cap + std::to_string(i + 1));
      }
    }
    Rendered cur = render(r, names);
    if (cur.text.empty()) return {};
    if (first || cur.text < best.text) {
      best = std::move(cur);
      first = false;
    }
    std::size_t g = 0;
    for (; g < perms.size(); ++g) {
      if (std::next_permutation(perms[g].begin(), perms[g].end())) break;
    }
    if (g == perms.size()) break;
  }
  return best;
}

class Enumerator {
 public:
  Enumerator(const LanguageBias& b, const EnumerateOptions& opt) : b_(b), opt_(opt) {}

  std::vector<CandidateRule> run() {
    heads_ = head_atoms(b_);
    if (b_.max_body < b_.min_body) return {};
    positives(0);
    std::vector<CandidateRule> out;
    out.reserve(bodies_.size() * heads_.size());
    for (const auto& head : heads_) {
      for (const auto& body : bodies_) {
        Rule r = body.rule;
        r.head = head;
        CandidateRule c{r, r.to_string(), static_cast<int>(r.length())};
        out.push_back(std::move(c));
      }
    }
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.text < y.text; });
    return out;
  }

 private:
  int body_size() const { return static_cast<int>(cur_.body_pos.size() + cur_.body_neg.size() + cur_.comparisons.size()); }

  Term new_var(const std::string& type) {
    int& n = per_type_[type];
    ++n;
    types_.emplace(intern(capitalize(type) + std::to_string(n)), type);
    return Term::variable(capitalize(type) + std::to_string(n));
  }
  void drop_var(const std::string& type) {
    int& n = per_type_[type];
    types_.erase(intern(capitalize(type) + std::to_string(n)));
    --n;
  }

  // Assigns arguments of mode m from position i, then calls next().
  template <class Next>
  void instantiate(const ModeDecl& m, std::size_t i, bool allow_new, std::vector<Term>& args, Next&& next) {
    if (i == m.args.size()) {
      next(Atom(m.predicate, args));
      return;
    }
    const auto& a = m.args[i];
    if (a.kind == ModeArg::Kind::Const) {
      for (const auto& v : b_.pools.at(a.type)) {
        args.push_back(v);
        instantiate(m, i + 1, allow_new, args, next);
        args.pop_back();
      }
      return;
    }
    const int existing = per_type_[a.type];
    for (int k = 1; k <= existing; ++k) {
      args.push_back(Term::variable(capitalize(a.type) + std::to_string(k)));
      instantiate(m, i + 1, allow_new, args, next);
      args.pop_back();
    }
    if (allow_new && static_cast<int>(types_.size()) < b_.max_variables) {
      args.push_back(new_var(a.type));
      instantiate(m, i + 1, allow_new, args, next);
      args.pop_back();
      drop_var(a.type);
    }
  }

  void positives(std::size_t start) {
    negatives(0);
    if (body_size() >= b_.max_body) return;
    for (std::size_t mi = start; mi < b_.body_modes.size(); ++mi) {
      std::vector<Term> args;
      instantiate(b_.body_modes[mi], 0, true, args, [&](Atom a) {
        cur_.body_pos.push_back(std::move(a));
        positives(mi);
        cur_.body_pos.pop_back();
      });
    }
  }

  void negatives(std::size_t start) {
    pairs_ = same_type_pairs();
    comparisons_from(0);
    if (!b_.allow_negation || body_size() >= b_.max_body) return;
    for (std::size_t mi = start; mi < b_.body_modes.size(); ++mi) {
      std::vector<Term> args;
      instantiate(b_.body_modes[mi], 0, false, args, [&](Atom a) {
        cur_.body_neg.push_back(std::move(a));
        negatives(mi);
        cur_.body_neg.pop_back();
      });
    }
  }

  void comparisons_from(std::size_t first_pair) {
    emit();
    if (!b_.allow_inequality || body_size() >= b_.max_body) return;
    for (std::size_t p = first_pair; p < pairs_.size(); ++p) {
      cur_.comparisons.push_back(Comparison{pairs_[p].first, CmpOp::Ne, pairs_[p].second});
      comparisons_from(p + 1);
      cur_.comparisons.pop_back();
    }
  }

  std::vector<std::pair<Term, Term>> same_type_pairs() const {
    std::vector<std::pair<Term, Term>> out;
    for (auto i = types_.begin(); i != types_.end(); ++i) {
      for (auto j = std::next(i); j != types_.end(); ++j) {
        if (i->second == j->second) out.emplace_back(Term::variable(symbol_name(i->first)), Term::variable(symbol_name(j->first)));
      }
    }
    return out;
  }

  void emit() {
    if (body_size() < b_.min_body) return;
    std::map<SymbolId, std::string> types;
    for (const auto& [v, t] : types_) types.emplace(v, t);
    Rule body = cur_;
    body.head = Atom("_h");
    auto canon = canonical_render(body, types);
    if (canon.text.empty()) return;
    if (!seen_.insert(canon.text).second) return;
    if (seen_.size() * std::max<std::size_t>(1, heads_.size()) > opt_.max_candidates) {
      throw ResourceError("hypothesis space exceeds " + std::to_string(opt_.max_candidates) +
                          " rules (bounded by maxbody=" + std::to_string(b_.max_body) +
                          ", maxv=" + std::to_string(b_.max_variables) + "); tighten the bias");
    }
    bodies_.push_back({canon.text, std::move(canon.rule)});
  }

  const LanguageBias& b_;
  const EnumerateOptions& opt_;
  std::vector<Atom> heads_;
  Rule cur_;
  std::map<SymbolId, std::string> types_;
  std::map<std::string, int> per_type_;
  std::vector<std::pair<Term, Term>> pairs_;
  std::unordered_set<std::string> seen_;
  std::vector<Rendered> bodies_;
};

}  // namespace

CandidateRule canonicalize(const Rule& rule, const LanguageBias& bias) {
  auto canon = canonical_render(rule, infer_types(rule, bias));
  if (canon.text.empty()) throw ArgumentError("rule has a repeated body literal: " + rule.to_string());
  return {canon.rule, canon.text, static_cast<int>(canon.rule.length())};
}

std::vector<CandidateRule> enumerate_candidates(const LanguageBias& bias, const LogicProgram& background,
                                                const EnumerateOptions& options) {
  validate(bias);
  check_opl(bias, background);
  return Enumerator(bias, options).run();
}

}  // namespace nsl
