#include <doctest.h>

#include <random>

#include "nsl/error.hpp"
#include "nsl/parser.hpp"
#include "nsl/solver.hpp"
#include "support/program_gen.hpp"

using namespace nsl;

namespace {

std::string cell(int i) { return "c" + std::to_string(i + 1); }

// same_row / same_col / same_block over a 4x4 board, irreflexive.
LogicProgram sudoku_background() {
  LogicProgram b;
  for (int i = 0; i < 16; ++i) {
    for (int j = 0; j < 16; ++j) {
      if (i == j) continue;
      auto add = [&](const char* p) {
        b.rules.push_back(Rule{Atom(p, {Term::symbol(cell(i)), Term::symbol(cell(j))}), {}, {}, {}});
      };
      if (i / 4 == j / 4) add("same_row");
      if (i % 4 == j % 4) add("same_col");
      if ((i / 4) / 2 == (j / 4) / 2 && (i % 4) / 2 == (j % 4) / 2) add("same_block");
    }
  }
  return b;
}

Interpretation digits(std::initializer_list<std::pair<int, int>> cells) {
  Interpretation out;
  for (auto [c, v] : cells) out.insert(Atom("digit", {Term::symbol(cell(c)), Term::integer(v)}));
  return out;
}

const char* kRowRule = "invalid :- digit(C1,V), digit(C2,V), same_row(C1,C2), C1 != C2.";

}  // namespace

TEST_SUITE("parse") {
  TEST_CASE("rule with comparison") {
    auto p = parse_program(kRowRule);
    REQUIRE(p.size() == 1);
    CHECK(p.rules[0].body_pos.size() == 3);
    CHECK(p.rules[0].comparisons.size() == 1);
    CHECK(p.rules[0].comparisons[0].op == CmpOp::Ne);
    CHECK(p.rules[0].head.args.empty());
  }

  TEST_CASE("facts") {
    auto p = parse_program("digit(2). object(cat).");
    REQUIRE(p.size() == 2);
    CHECK(p.rules[0].is_fact());
    CHECK(p.rules[0].head.args[0] == Term::integer(2));
    CHECK(p.rules[1].head.to_string() == "object(cat)");
  }

  TEST_CASE("unsafe variable is reported") {
    try {
      parse_program("p :- not q(X).");
      FAIL("expected SafetyError");
    } catch (const SafetyError& e) {
      CHECK(e.variable() == "X");
    }
    CHECK_THROWS_AS(parse_program("p(X) :- q(Y)."), SafetyError);
    CHECK_THROWS_AS(parse_program("p :- q(Y), X != Y."), SafetyError);
  }

  TEST_CASE("syntax errors carry line and column") {
    try {
      parse_program("a.\nb :- c d.");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(e.column() == 8);
    }
    CHECK_THROWS_AS(parse_program("a :- ."), ParseError);
    CHECK_THROWS_AS(parse_program("a"), ParseError);
    CHECK_THROWS_AS(parse_program("a :- b $ c."), ParseError);
  }

  TEST_CASE("comments and negative integers") {
    auto p = parse_program("% header\nt(-3). % trailing\nu :- t(X), X < 0.");
    REQUIRE(p.size() == 2);
    CHECK(p.rules[0].head.args[0] == Term::integer(-3));
  }

  TEST_CASE("unparse is a fixpoint after one round") {
    const char* text =
        "a.  p(X) :- q(X,Y),not r(Y), X!=Y.\n"
        "s :- not t, p(1), 1 <= 2.\n"
        "u(a,1).";
    auto once = unparse(parse_program(text));
    CHECK(unparse(parse_program(once)) == once);
    CHECK(parse_program(once) == parse_program(text));
    CHECK(once.find("p(X) :- q(X,Y), not r(Y), X != Y.") != std::string::npos);
  }

  TEST_CASE("round trip over generated programs") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
      auto g = testing::random_stratified_program(rng);
      CHECK(parse_program(unparse(g.program)) == g.program);
    }
  }
}

TEST_SUITE("ground") {
  TEST_CASE("empty program, empty facts") { CHECK(ground({}, {}).empty()); }

  TEST_CASE("only substitutions matching positive body facts are instantiated") {
    auto prog = parse_program("digit(c1,2). digit(c2,2). same_row(c1,c2). same_row(c2,c1).");
    auto rule = parse_program(kRowRule);
    auto g = ground(concat(prog, rule), {});
    int rule_instances = 0;
    for (const auto& r : g.rules) {
      CHECK(r.is_ground());
      CHECK(r.comparisons.empty());
      if (!r.is_fact()) ++rule_instances;
    }
    // (C1,C2) in {(c1,c2),(c2,c1)} with V = 2
    CHECK(rule_instances == 2);
  }

  TEST_CASE("false comparisons drop the instance") {
    auto g = ground(parse_program("q(1). q(2). p(X) :- q(X), X > 1."), {});
    int rules = 0;
    for (const auto& r : g.rules) rules += r.is_fact() ? 0 : 1;
    CHECK(rules == 1);
  }

  TEST_CASE("sudoku background size matches direct enumeration") {
    auto background = sudoku_background();
    auto facts = digits({{0, 1}, {1, 1}, {5, 2}, {10, 1}});
    auto g = ground(concat(background, parse_program(kRowRule)), facts);

    // oracle: count (i, j) with i != j sharing a row and equal digit values
    std::vector<std::pair<int, int>> placed = {{0, 1}, {1, 1}, {5, 2}, {10, 1}};
    int expected_rules = 0;
    for (auto [ci, vi] : placed) {
      for (auto [cj, vj] : placed) {
        if (ci != cj && vi == vj && ci / 4 == cj / 4) ++expected_rules;
      }
    }
    const std::size_t expected = background.size() + placed.size() + static_cast<std::size_t>(expected_rules);
    CHECK(expected_rules == 2);
    CHECK(background.size() == 144);
    CHECK(g.size() == expected);
    CHECK(g.size() <= GroundOptions{}.max_ground_rules);
  }

  TEST_CASE("grounding cap") {
    GroundOptions tiny{3};
    CHECK_THROWS_AS(ground(parse_program("q(1). q(2). q(3). q(4). p(X) :- q(X)."), {}, tiny), ResourceError);
  }

  TEST_CASE("herbrand soundness: positive bodies only use known constants") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 100; ++i) {
      auto gp = testing::random_stratified_program(rng);
      auto g = ground(gp.program, gp.facts);
      for (const auto& r : g.rules) {
        for (const auto& a : r.body_pos) {
          for (const auto& t : a.args) CHECK((t == Term::symbol("a") || t == Term::symbol("b")));
        }
      }
    }
  }
}

TEST_SUITE("answer set") {
  TEST_CASE("negation on an absent atom") {
    auto as = answer_set(parse_program("p :- not r."), Interpretation{Atom("q")});
    CHECK(as == Interpretation{Atom("q"), Atom("p")});
  }

  TEST_CASE("facts only") {
    CHECK(answer_set({}, Interpretation{Atom("a"), Atom("b")}) == Interpretation{Atom("a"), Atom("b")});
  }

  TEST_CASE("sudoku row duplicate derives invalid") {
    auto program = concat(sudoku_background(), parse_program(kRowRule));
    auto facts = digits({{0, 2}, {1, 2}});
    auto as = answer_set(program, facts);
    CHECK(as.contains(Atom("invalid")));
    CHECK(verify_answer_set(program, facts, as));

    auto no_dup = digits({{0, 2}, {4, 2}});  // same column, not same row
    auto as2 = answer_set(program, no_dup);
    CHECK_FALSE(as2.contains(Atom("invalid")));
    CHECK(verify_answer_set(program, no_dup, as2));
  }

  TEST_CASE("recursion and strata") {
    auto p = parse_program(
        "edge(a,b). edge(b,c). edge(c,d).\n"
        "reach(X,Y) :- edge(X,Y).\n"
        "reach(X,Z) :- reach(X,Y), edge(Y,Z).\n"
        "node(X) :- edge(X,Y). node(Y) :- edge(X,Y).\n"
        "unreach(X,Y) :- node(X), node(Y), not reach(X,Y).");
    auto as = answer_set(p, {});
    CHECK(as.contains(parse_atom("reach(a,d)")));
    CHECK_FALSE(as.contains(parse_atom("reach(d,a)")));
    CHECK(as.contains(parse_atom("unreach(d,a)")));
    CHECK(verify_answer_set(p, {}, as));
  }

  TEST_CASE("recursion through negation is rejected") {
    CHECK_THROWS_AS(answer_set(parse_program("p :- not q. q :- not p."), {}), SemanticError);
    CHECK_THROWS_AS(answer_set(parse_program("p :- not p."), {}), SemanticError);
  }

  TEST_CASE("monotone in facts for negation-free programs") {
    std::mt19937_64 rng(3);
    int checked = 0;
    for (int i = 0; i < 300; ++i) {
      auto g = testing::random_stratified_program(rng);
      bool has_neg = false;
      for (const auto& r : g.program.rules) has_neg = has_neg || !r.body_neg.empty();
      if (has_neg) continue;
      auto bigger = g.facts;
      auto extra = testing::random_stratified_program(rng).facts;
      bigger.merge(extra);
      CHECK(answer_set(g.program, g.facts).subset_of(answer_set(g.program, bigger)));
      ++checked;
    }
    CHECK(checked > 20);
  }
}

TEST_SUITE("verify answer set") {
  TEST_CASE("reduct examples") {
    auto p = parse_program("p :- not q.");
    CHECK(verify_answer_set(p, {}, Interpretation{Atom("p")}));
    CHECK_FALSE(verify_answer_set(p, {}, Interpretation{Atom("q")}));
    CHECK_FALSE(verify_answer_set(p, {}, Interpretation{}));
    CHECK_FALSE(verify_answer_set(p, {}, Interpretation{Atom("p"), Atom("z")}));
  }

  TEST_CASE("solver output always verifies") {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 300; ++i) {
      auto g = testing::random_stratified_program(rng);
      auto as = answer_set(g.program, g.facts);
      INFO(unparse(g.program));
      CHECK(verify_answer_set(g.program, g.facts, as));
    }
  }
}
