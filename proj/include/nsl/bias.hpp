#pragma once

// Mode-declaration language bias and enumeration of the hypothesis space.

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "nsl/logic.hpp"

namespace nsl {

class Lexer;

struct ModeArg {
  enum class Kind { Var, Const } kind = Kind::Var;
  std::string type;

  friend bool operator==(const ModeArg&, const ModeArg&) = default;
};

struct ModeDecl {
  std::string predicate;
  std::vector<ModeArg> args;

  std::string to_string() const;
  friend bool operator==(const ModeDecl&, const ModeDecl&) = default;
};

/// Bias directives, one statement each:
///   modeh(p(const(t), ...)).  modeb(q(var(t), const(u))).
///   maxv(n).  maxbody(n).  minbody(n).  pool(t, v1, ..., vk).
///   allow_negation.  allow_inequality.
/// Head modes must be ground after pool expansion. Comparisons count
/// towards maxbody.
struct LanguageBias {
  std::vector<ModeDecl> head_modes;
  std::vector<ModeDecl> body_modes;
  int max_body = 3;
  int min_body = 1;
  int max_variables = 0;
  bool allow_negation = false;
  bool allow_inequality = false;
  std::map<std::string, std::vector<Term>> pools;

  std::string to_string() const;
  friend bool operator==(const LanguageBias&, const LanguageBias&) = default;
};

/// Statements up to End or a closing brace (not consumed).
LanguageBias parse_bias(Lexer& lexer);
LanguageBias parse_bias(std::string_view text);

/// Throws ArgumentError for missing pools, variable head arguments,
/// negative budgets or type names ending in a digit.
void validate(const LanguageBias& bias);

/// Ground head atoms: every head mode expanded over its pools.
std::vector<Atom> head_atoms(const LanguageBias& bias);
std::vector<PredicateKey> head_predicates(const LanguageBias& bias);

/// Throws SemanticError when a head predicate occurs in a body mode or in
/// any rule body of the background.
void check_opl(const LanguageBias& bias, const LogicProgram& background);

struct CandidateRule {
  Rule rule;
  std::string text;
  int length = 0;
};

/// Minimal rendering over renamings of variables within each type. Variable
/// types come from the body modes; variables are named after their type
/// (Cell1, Cell2, Val1). Bodies are sorted: positive literals, negative
/// literals, comparisons.
CandidateRule canonicalize(const Rule& rule, const LanguageBias& bias);

struct EnumerateOptions {
  std::size_t max_candidates = 100'000;
};

/// Every safe rule allowed by the bias, one per variant class, sorted by
/// canonical text. Bodies with a repeated literal are skipped. Throws
/// ResourceError past the cap.
std::vector<CandidateRule> enumerate_candidates(const LanguageBias& bias, const LogicProgram& background,
                                                const EnumerateOptions& options = {});

}  // namespace nsl
