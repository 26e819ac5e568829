#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "nsl/logic.hpp"

namespace nsl {

enum class TokenKind {
  End,
  Ident,     // [a-z][A-Za-z0-9_]*
  Variable,  // [A-Z][A-Za-z0-9_]*
  Integer,
  String,    // "..." (quotes stripped)
  Directive, // #name
  LParen,
  RParen,
  LBrace,
  RBrace,
  Comma,
  Period,
  If,        // :-
  At,
  Colon,
  Cmp,
};

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;
  std::size_t line = 1;
  std::size_t column = 1;
};

/// Tokenizer shared by the program, example, task and bias readers. '%'
/// starts a comment that runs to the end of the line.
class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) { advance(); }

  const Token& peek() const { return current_; }
  /// Token after the current one, without consuming anything.
  Token peek_next() const;
  Token next();
  bool at(TokenKind kind) const { return current_.kind == kind; }
  bool at(TokenKind kind, std::string_view text) const { return current_.kind == kind && current_.text == text; }
  Token expect(TokenKind kind, std::string_view what);
  [[noreturn]] void fail(const std::string& message) const;

  /// Raw access used by readers that need to skip to a matching brace.
  std::size_t offset() const { return token_offset_; }

 private:
  void advance();
  Token scan();

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
  std::size_t token_offset_ = 0;
  std::size_t next_offset_ = 0;
  Token current_;
};

Term parse_term(Lexer& lexer);
Atom parse_atom(Lexer& lexer);
/// Parses one `rule "."` statement; checks safety.
Rule parse_rule(Lexer& lexer);
/// Statements until End or a closing brace (not consumed).
LogicProgram parse_statements(Lexer& lexer);

/// Parses a whole program text. Throws ParseError (with position) or
/// SafetyError.
LogicProgram parse_program(std::string_view text);
Atom parse_atom(std::string_view text);

/// Canonical text; parse_program(unparse(p)) == p.
inline std::string unparse(const LogicProgram& program) { return program.to_string(); }

}  // namespace nsl
