#include <charconv>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "nsl/error.hpp"
#include "nsl/learner.hpp"
#include "nsl/parser.hpp"

namespace nsl {

std::string Gamma::to_string() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

Gamma Gamma::parse(std::string_view text) {
  auto integer = [&](std::string_view s) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
      throw ArgumentError("gamma must be a non-negative integer, decimal or fraction: " + std::string(text));
    }
    return v;
  };
  Gamma g;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    g = {integer(text.substr(0, slash)), integer(text.substr(slash + 1))};
  } else if (auto dot = text.find('.'); dot != std::string_view::npos) {
    auto frac = text.substr(dot + 1);
    if (frac.size() > 6) throw ArgumentError("gamma: at most 6 decimal places");
    std::uint64_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    g = {integer(text.substr(0, dot)) * den + (frac.empty() ? 0 : integer(frac)), den};
  } else {
    g = {integer(text), 1};
  }
  if (g.den == 0 || g.den > 1'000'000) throw ArgumentError("gamma: denominator must be in [1, 10^6]");
  if (g.num > 1'000'000'000) throw ArgumentError("gamma too large");
  const auto d = std::gcd(g.num, g.den);
  if (d > 1) {
    g.num /= d;
    g.den /= d;
  }
  if (g.num == 0) g.den = 1;
  return g;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void optional_period(Lexer& lx) {
  if (lx.at(TokenKind::Period)) lx.next();
}

}  // namespace

LearningTask parse_task(std::string_view text, const std::filesystem::path& base_dir) {
  LearningTask task;
  Lexer lx(text);
  bool have_bias = false;
  while (!lx.at(TokenKind::End)) {
    if (lx.at(TokenKind::Directive, "#pos")) {
      task.examples.push_back(parse_example(lx));
      continue;
    }
    if (!lx.at(TokenKind::Directive)) lx.fail("expected a task directive");
    const std::string directive = lx.next().text;
    if (directive == "#background") {
      lx.expect(TokenKind::LBrace, "'{'");
      auto more = parse_statements(lx);
      lx.expect(TokenKind::RBrace, "'}'");
      task.background = concat(task.background, more);
    } else if (directive == "#bias") {
      if (have_bias) lx.fail("duplicate #bias section");
      lx.expect(TokenKind::LBrace, "'{'");
      task.bias = parse_bias(lx);
      lx.expect(TokenKind::RBrace, "'}'");
      have_bias = true;
    } else if (directive == "#examples") {
      const auto path = base_dir / lx.expect(TokenKind::String, "quoted path").text;
      optional_period(lx);
      auto more = parse_examples(read_file(path));
      task.examples.insert(task.examples.end(), more.begin(), more.end());
    } else if (directive == "#gamma") {
      const Token& t = lx.peek();
      if (t.kind != TokenKind::Integer && t.kind != TokenKind::String) lx.fail("expected gamma value");
      try {
        task.gamma = Gamma::parse(t.text);
      } catch (const ArgumentError& e) {
        lx.fail(e.what());
      }
      lx.next();
      optional_period(lx);
    } else if (directive == "#mode") {
      Token kind = lx.expect(TokenKind::Ident, "multiclass or binary(label)");
      if (kind.text == "multiclass") {
        task.mode = LabelMode::multiclass();
      } else if (kind.text == "binary") {
        lx.expect(TokenKind::LParen, "'('");
        task.mode = LabelMode::binary(parse_atom(lx));
        lx.expect(TokenKind::RParen, "')'");
      } else {
        lx.fail("unknown mode " + kind.text);
      }
      optional_period(lx);
    } else {
      lx.fail("unknown task directive " + directive);
    }
  }
  if (!have_bias) throw ArgumentError("task has no #bias section");
  validate(task.bias);
  if (task.mode.kind == LabelMode::Kind::Binary) {
    auto heads = head_atoms(task.bias);
    if (std::find(heads.begin(), heads.end(), task.mode.positive) == heads.end()) {
      throw ArgumentError("binary label " + task.mode.positive.to_string() + " is not a head of the bias");
    }
  }
  return task;
}

LearningTask load_task(const std::filesystem::path& path) {
  return parse_task(read_file(path), path.parent_path());
}

void write_task(const LearningTask& task, std::ostream& sink) {
  sink << "#mode " << task.mode.to_string() << ".\n";
  if (task.gamma.den == 1) {
    sink << "#gamma " << task.gamma.num << ".\n";
  } else {
    sink << "#gamma \"" << task.gamma.to_string() << "\".\n";
  }
  sink << "#background {\n";
  for (const auto& r : task.background.rules) sink << "  " << r.to_string() << '\n';
  sink << "}\n#bias {\n";
  std::istringstream bias(task.bias.to_string());
  for (std::string line; std::getline(bias, line);) sink << "  " << line << '\n';
  sink << "}\n";
  write_examples(task.examples, sink);
}

}  // namespace nsl
