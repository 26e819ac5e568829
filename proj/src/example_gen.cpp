#include "nsl/example_gen.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <iterator>
#include <ostream>
#include <set>

#include "nsl/error.hpp"
#include "nsl/parser.hpp"

namespace nsl {

std::int64_t aggregate(std::span<const double> confidences, const AggregatorConfig& config) {
  if (confidences.empty()) throw ArgumentError("aggregate: empty confidence list");
  if (config.lambda < 1) throw ArgumentError("aggregate: lambda must be >= 1");
  double lowest = 1.0;
  for (double c : confidences) {
    if (!(c >= 0.0 && c <= 1.0)) throw ArgumentError("aggregate: confidence outside [0,1]: " + std::to_string(c));
    lowest = std::min(lowest, c);  // Gödel t-norm, folded left
  }
  auto scaled = static_cast<std::int64_t>(std::floor(static_cast<double>(config.lambda) * lowest));
  return std::max<std::int64_t>(1, scaled);
}

LogicProgram build_context(std::span<const FeaturePrediction> predictions) {
  LogicProgram ctx;
  std::set<std::string> slots;
  for (const auto& p : predictions) {
    if (p.feature.empty()) throw ArgumentError("build_context: empty feature name");
    std::vector<Term> args = p.alpha;
    std::string slot = p.feature + "(";
    for (const auto& a : p.alpha) slot += a.to_string() + ",";
    if (!slots.insert(slot).second) throw ArgumentError("build_context: two predictions for slot " + slot + ")");
    args.push_back(p.value);
    ctx.rules.push_back(Rule{Atom(p.feature, std::move(args)), {}, {}, {}});
  }
  return ctx;
}

std::string LabelMode::to_string() const {
  return kind == Kind::Multiclass ? "multiclass" : "binary(" + positive.to_string() + ")";
}

Wcdpi generate_example(std::string id, std::span<const FeaturePrediction> predictions, const Atom& label,
                       std::span<const Atom> all_labels, const GeneratorConfig& config, const LabelMode& mode) {
  if (predictions.empty()) throw ArgumentError("generate_example: no predictions for " + id);
  if (std::find(all_labels.begin(), all_labels.end(), label) == all_labels.end()) {
    throw ArgumentError("generate_example: label " + label.to_string() + " not in the label set");
  }
  Wcdpi e;
  e.id = std::move(id);

  std::vector<double> confs;
  confs.reserve(predictions.size());
  for (const auto& p : predictions) confs.push_back(p.confidence);
  std::int64_t pen = aggregate(confs, config.aggregator);
  if (config.constant_penalty) {
    if (*config.constant_penalty < 1) throw ArgumentError("constant penalty must be >= 1");
    pen = *config.constant_penalty;
  }
  e.penalty = Penalty(static_cast<std::uint64_t>(pen));
  e.context = build_context(predictions);

  if (mode.kind == LabelMode::Kind::Multiclass) {
    e.pi.inc.push_back(label);
    for (const auto& l : all_labels) {
      if (!(l == label)) e.pi.exc.push_back(l);
    }
  } else if (label == mode.positive) {
    e.pi.inc.push_back(mode.positive);
  } else {
    e.pi.exc.push_back(mode.positive);
  }
  return e;
}

namespace {

void append_atoms(std::string& out, const std::vector<Atom>& atoms) {
  out += '{';
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (i) out += ", ";
    out += atoms[i].to_string();
  }
  out += '}';
}

std::vector<Atom> parse_atom_set(Lexer& lexer) {
  std::vector<Atom> out;
  lexer.expect(TokenKind::LBrace, "'{'");
  if (!lexer.at(TokenKind::RBrace)) {
    out.push_back(parse_atom(lexer));
    while (lexer.at(TokenKind::Comma)) {
      lexer.next();
      out.push_back(parse_atom(lexer));
    }
  }
  lexer.expect(TokenKind::RBrace, "'}'");
  return out;
}

}  // namespace

std::string to_string(const Wcdpi& e) {
  std::string out = "#pos(" + e.id;
  if (!e.penalty.is_infinite()) out += "@" + std::to_string(e.penalty.value());
  out += ", ";
  append_atoms(out, e.pi.inc);
  out += ", ";
  append_atoms(out, e.pi.exc);
  out += ", {" + e.context.to_inline_string() + "}).";
  return out;
}

void write_examples(std::span<const Wcdpi> examples, std::ostream& sink) {
  for (const auto& e : examples) sink << to_string(e) << '\n';
}

Wcdpi parse_example(Lexer& lexer) {
  if (!lexer.at(TokenKind::Directive, "#pos")) lexer.fail("expected #pos");
  lexer.next();
  lexer.expect(TokenKind::LParen, "'('");
  Wcdpi e;
  const Token& id = lexer.peek();
  if (id.kind != TokenKind::Ident && id.kind != TokenKind::Integer && id.kind != TokenKind::Variable) {
    lexer.fail("expected example id");
  }
  e.id = lexer.next().text;
  if (lexer.at(TokenKind::At)) {
    lexer.next();
    if (!lexer.at(TokenKind::Integer)) lexer.fail("expected integer penalty");
    const Token& tok = lexer.peek();
    long long pen = std::stoll(tok.text);
    if (pen < 1) lexer.fail("penalty must be a positive integer");
    lexer.next();
    e.penalty = Penalty(static_cast<std::uint64_t>(pen));
  } else {
    e.penalty = Penalty::infinite();
  }
  lexer.expect(TokenKind::Comma, "','");
  e.pi.inc = parse_atom_set(lexer);
  lexer.expect(TokenKind::Comma, "','");
  e.pi.exc = parse_atom_set(lexer);
  lexer.expect(TokenKind::Comma, "','");
  lexer.expect(TokenKind::LBrace, "'{'");
  e.context = parse_statements(lexer);
  lexer.expect(TokenKind::RBrace, "'}'");
  lexer.expect(TokenKind::RParen, "')'");
  lexer.expect(TokenKind::Period, "'.'");

  for (const auto& a : e.pi.inc) {
    if (std::find(e.pi.exc.begin(), e.pi.exc.end(), a) != e.pi.exc.end()) {
      lexer.fail("atom " + a.to_string() + " in both inclusion and exclusion sets of " + e.id);
    }
  }
  for (const auto& r : e.context.rules) {
    if (!r.is_fact()) lexer.fail("context of " + e.id + " must contain only ground facts");
  }
  return e;
}

std::vector<Wcdpi> parse_examples(std::string_view text) {
  Lexer lexer(text);
  std::vector<Wcdpi> out;
  while (!lexer.at(TokenKind::End)) out.push_back(parse_example(lexer));
  return out;
}

std::vector<Wcdpi> read_examples(std::istream& source) {
  std::string text((std::istreambuf_iterator<char>(source)), std::istreambuf_iterator<char>());
  return parse_examples(text);
}

}  // namespace nsl
