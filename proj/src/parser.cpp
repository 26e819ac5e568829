#include "nsl/parser.hpp"

#include <cctype>

#include "nsl/error.hpp"

namespace nsl {

namespace {

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

CmpOp cmp_from(const std::string& text) {
  if (text == "==") return CmpOp::Eq;
  if (text == "!=") return CmpOp::Ne;
  if (text == "<") return CmpOp::Lt;
  if (text == "<=") return CmpOp::Le;
  if (text == ">") return CmpOp::Gt;
  return CmpOp::Ge;
}

}  // namespace

void Lexer::advance() {
  current_ = scan();
  token_offset_ = next_offset_;
}

Token Lexer::peek_next() const {
  Lexer copy = *this;
  return copy.next();
}

Token Lexer::next() {
  Token t = current_;
  advance();
  return t;
}

Token Lexer::expect(TokenKind kind, std::string_view what) {
  if (current_.kind != kind) {
    fail("expected " + std::string(what) + ", found " +
         (current_.kind == TokenKind::End ? std::string("end of input") : "'" + current_.text + "'"));
  }
  return next();
}

void Lexer::fail(const std::string& message) const { throw ParseError(message, current_.line, current_.column); }

Token Lexer::scan() {
  // skip whitespace and comments
  while (pos_ < text_.size()) {
    char c = text_[pos_];
    if (c == '%') {
      while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_, ++column_;
    } else if (c == '\n') {
      ++pos_;
      ++line_;
      column_ = 1;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos_;
      ++column_;
    } else {
      break;
    }
  }
  Token t;
  t.line = line_;
  t.column = column_;
  next_offset_ = pos_;
  if (pos_ >= text_.size()) return t;

  const std::size_t start = pos_;
  auto take = [&](std::size_t n, TokenKind kind) {
    t.kind = kind;
    t.text = std::string(text_.substr(start, n));
    pos_ += n;
    column_ += n;
    return t;
  };
  char c = text_[pos_];
  char d = pos_ + 1 < text_.size() ? text_[pos_ + 1] : '\0';

  if (std::islower(static_cast<unsigned char>(c)) || std::isupper(static_cast<unsigned char>(c))) {
    std::size_t n = 1;
    while (start + n < text_.size() && ident_char(text_[start + n])) ++n;
    return take(n, std::isupper(static_cast<unsigned char>(c)) ? TokenKind::Variable : TokenKind::Ident);
  }
  if (std::isdigit(static_cast<unsigned char>(c)) || (c == '-' && std::isdigit(static_cast<unsigned char>(d)))) {
    std::size_t n = 1;
    while (start + n < text_.size() && std::isdigit(static_cast<unsigned char>(text_[start + n]))) ++n;
    return take(n, TokenKind::Integer);
  }
  if (c == '#') {
    std::size_t n = 1;
    while (start + n < text_.size() && ident_char(text_[start + n])) ++n;
    if (n == 1) throw ParseError("empty directive name", t.line, t.column);
    return take(n, TokenKind::Directive);
  }
  if (c == '"') {
    std::size_t n = 1;
    while (start + n < text_.size() && text_[start + n] != '"' && text_[start + n] != '\n') ++n;
    if (start + n >= text_.size() || text_[start + n] != '"') throw ParseError("unterminated string", t.line, t.column);
    take(n + 1, TokenKind::String);
    t.text = t.text.substr(1, t.text.size() - 2);
    return t;
  }
  switch (c) {
    case '(': return take(1, TokenKind::LParen);
    case ')': return take(1, TokenKind::RParen);
    case '{': return take(1, TokenKind::LBrace);
    case '}': return take(1, TokenKind::RBrace);
    case ',': return take(1, TokenKind::Comma);
    case '.': return take(1, TokenKind::Period);
    case '@': return take(1, TokenKind::At);
    case ':':
      if (d == '-') return take(2, TokenKind::If);
      return take(1, TokenKind::Colon);
    case '=':
      if (d == '=') return take(2, TokenKind::Cmp);
      break;
    case '!':
      if (d == '=') return take(2, TokenKind::Cmp);
      break;
    case '<':
    case '>':
      return take(d == '=' ? 2 : 1, TokenKind::Cmp);
    default:
      break;
  }
  throw ParseError(std::string("unexpected character '") + c + "'", t.line, t.column);
}

Term parse_term(Lexer& lexer) {
  const Token& t = lexer.peek();
  switch (t.kind) {
    case TokenKind::Ident: return Term::symbol(lexer.next().text);
    case TokenKind::Variable: return Term::variable(lexer.next().text);
    case TokenKind::Integer: return Term::integer(std::stoll(lexer.next().text));
    default: lexer.fail("expected a term");
  }
}

Atom parse_atom(Lexer& lexer) {
  Token name = lexer.expect(TokenKind::Ident, "predicate name");
  std::vector<Term> args;
  if (lexer.at(TokenKind::LParen)) {
    lexer.next();
    args.push_back(parse_term(lexer));
    while (lexer.at(TokenKind::Comma)) {
      lexer.next();
      args.push_back(parse_term(lexer));
    }
    lexer.expect(TokenKind::RParen, "')'");
  }
  return Atom(name.text, std::move(args));
}

Rule parse_rule(Lexer& lexer) {
  const Token start = lexer.peek();
  Rule rule;
  rule.head = parse_atom(lexer);
  if (lexer.at(TokenKind::If)) {
    lexer.next();
    while (true) {
      if (lexer.at(TokenKind::Ident, "not") && lexer.peek_next().kind == TokenKind::Ident) {
        lexer.next();
        rule.body_neg.push_back(parse_atom(lexer));
      } else if (lexer.at(TokenKind::Ident) && lexer.peek_next().kind != TokenKind::Cmp) {
        rule.body_pos.push_back(parse_atom(lexer));
      } else {
        Comparison c;
        c.lhs = parse_term(lexer);
        if (!lexer.at(TokenKind::Cmp)) lexer.fail("expected comparison operator");
        c.op = cmp_from(lexer.next().text);
        c.rhs = parse_term(lexer);
        rule.comparisons.push_back(c);
      }
      if (!lexer.at(TokenKind::Comma)) break;
      lexer.next();
    }
  }
  lexer.expect(TokenKind::Period, "'.'");
  try {
    check_safety(rule);
  } catch (const SafetyError& e) {
    throw SafetyError(rule.to_string() + " (line " + std::to_string(start.line) + ")", e.variable());
  }
  return rule;
}

LogicProgram parse_statements(Lexer& lexer) {
  LogicProgram program;
  while (!lexer.at(TokenKind::End) && !lexer.at(TokenKind::RBrace)) program.rules.push_back(parse_rule(lexer));
  return program;
}

LogicProgram parse_program(std::string_view text) {
  Lexer lexer(text);
  LogicProgram program = parse_statements(lexer);
  if (!lexer.at(TokenKind::End)) lexer.fail("unexpected '" + lexer.peek().text + "'");
  return program;
}

Atom parse_atom(std::string_view text) {
  Lexer lexer(text);
  Atom a = parse_atom(lexer);
  if (!lexer.at(TokenKind::End)) lexer.fail("trailing input after atom");
  return a;
}

}  // namespace nsl
