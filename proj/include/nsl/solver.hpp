#pragma once

// Stratified evaluation of normal logic programs and the independent
// reduct-based answer-set check.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "nsl/logic.hpp"

namespace nsl {

/// A rule compiled to a fixed join order over variable slots. Evaluation
/// reads an interpretation and never modifies it.
class CompiledRule {
 public:
  explicit CompiledRule(const Rule& rule);

  const Rule& rule() const noexcept { return rule_; }
  PredicateKey head_key() const noexcept { return head_.key; }

  /// True iff some substitution satisfies the body in `model` (negation as
  /// absence from `model`).
  bool body_holds(const Interpretation& model) const;
  /// Appends every head instance derivable from `model` to `heads` (flat,
  /// head arity terms per instance).
  void derive(const Interpretation& model, std::vector<Term>& heads) const;

 private:
  struct Arg {
    enum class Mode : std::uint8_t { Constant, Bound, Free } mode = Mode::Constant;
    std::uint32_t slot = 0;
    Term constant;
  };
  struct Literal {
    PredicateKey key;
    std::vector<Arg> args;
    bool all_bound = true;
  };
  struct CmpStep {
    Arg lhs;
    CmpOp op;
    Arg rhs;
  };
  struct Step {
    enum class Kind : std::uint8_t { Positive, Negative, Compare } kind;
    std::uint32_t index;
  };

  template <class Emit>
  bool join(const Interpretation& model, std::size_t step, std::vector<Term>& binding, Emit& emit) const;
  Term value(const Arg& a, const std::vector<Term>& binding) const {
    return a.mode == Arg::Mode::Constant ? a.constant : binding[a.slot];
  }

  Rule rule_;
  Literal head_;
  std::vector<Literal> positive_;
  std::vector<Literal> negative_;
  std::vector<CmpStep> compares_;
  std::vector<Step> plan_;
  std::uint32_t num_vars_ = 0;
};

/// Program prepared for repeated evaluation against different fact sets.
/// Construction stratifies the program and throws SemanticError when
/// recursion passes through negation.
class Solver {
 public:
  explicit Solver(const LogicProgram& program);

  /// The unique answer set of program ∪ facts (stratum-wise least fixpoint).
  Interpretation solve(const Interpretation& facts) const;
  std::size_t num_strata() const noexcept { return strata_.size(); }

 private:
  struct Stratum {
    std::vector<std::size_t> rules;
    bool recursive = false;
  };

  Interpretation static_facts_;
  std::vector<CompiledRule> rules_;
  std::vector<Stratum> strata_;
};

Interpretation answer_set(const LogicProgram& program, const Interpretation& facts);

struct GroundOptions {
  std::size_t max_ground_rules = 1'000'000;
};

/// Instantiates every rule over the atoms that can possibly be derived from
/// program ∪ extra_facts (negation ignored), resolving ground comparisons.
/// The extra facts are emitted as facts. Throws ResourceError past the cap.
LogicProgram ground(const LogicProgram& program, const Interpretation& extra_facts, const GroundOptions& options = {});

/// True iff `candidate` is the minimal model of the reduct of
/// ground(program ∪ facts) with respect to `candidate`.
bool verify_answer_set(const LogicProgram& program, const Interpretation& facts, const Interpretation& candidate,
                       const GroundOptions& options = {});

}  // namespace nsl
