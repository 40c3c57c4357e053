#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bxl/ast.hpp"
#include "bxl/scalar.hpp"

namespace bxl {

/// Raised by the lexer and parser; offset is a byte position into the source.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string message, std::size_t offset)
      : std::runtime_error(std::move(message)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

enum class TokenKind : std::uint8_t {
  Number,
  Text,
  Boolean,
  ErrorLiteral,
  Identifier,
  CellRef,
  Operator,
  Punct,
  TableRefPart,
  End,
};

struct Token {
  TokenKind kind = TokenKind::End;
  std::string lexeme;  // exact source slice
  Span span;
  double number = 0;       // Number tokens
  std::string text;        // Text tokens (unescaped) and quoted Identifiers
  bool boolean = false;    // Boolean tokens
  ErrorCode error = ErrorCode::Value;  // ErrorLiteral tokens
};

struct Comment {
  std::string text;  // without the // or /* */ delimiters
  Span span;
};

struct LexResult {
  std::vector<Token> tokens;  // terminated by an End token
  std::vector<Comment> comments;
};

namespace lex_detail {

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_ascii_letter(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}
// Multi-byte UTF-8 sequences count as letters, which admits λ and other
// non-ASCII name characters without decoding code points.
inline bool is_letter_byte(char c) { return is_ascii_letter(c) || static_cast<unsigned char>(c) >= 0x80; }
inline bool is_ident_start(char c) { return is_letter_byte(c) || c == '_'; }
inline bool is_ident_continue(char c) {
  return is_letter_byte(c) || is_digit(c) || c == '_' || c == '.';
}

inline int column_number(std::string_view letters) {
  int n = 0;
  for (char c : letters) n = n * 26 + (ascii_lower(c) - 'a' + 1);
  return n;
}

constexpr int kMaxColumn = 16384;    // XFD
constexpr int kMaxRow = 1048576;

}  // namespace lex_detail

class Lexer {
 public:
  explicit Lexer(std::string_view source, bool allow_comments = false)
      : src_(source), allow_comments_(allow_comments) {}

  LexResult run() {
    LexResult out;
    while (true) {
      skip_space_and_comments(out.comments);
      if (pos_ >= src_.size()) break;
      lex_one(out.tokens);
    }
    Token end;
    end.kind = TokenKind::End;
    end.span = {src_.size(), src_.size()};
    out.tokens.push_back(std::move(end));
    return out;
  }

 private:
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void skip_space_and_comments(std::vector<Comment>& comments) {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        ++pos_;
        continue;
      }
      if (allow_comments_ && c == '/' && peek(1) == '/') {
        const std::size_t start = pos_;
        pos_ += 2;
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
        comments.push_back({std::string(src_.substr(start + 2, pos_ - start - 2)),
                            {start, pos_}});
        continue;
      }
      if (allow_comments_ && c == '/' && peek(1) == '*') {
        const std::size_t start = pos_;
        const std::size_t close = src_.find("*/", pos_ + 2);
        if (close == std::string_view::npos)
          throw ParseError("unterminated block comment", start);
        comments.push_back({std::string(src_.substr(start + 2, close - start - 2)),
                            {start, close + 2}});
        pos_ = close + 2;
        continue;
      }
      break;
    }
  }

  void push(std::vector<Token>& out, TokenKind kind, std::size_t start, Token token = {}) {
    token.kind = kind;
    token.span = {start, pos_};
    token.lexeme = std::string(src_.substr(start, pos_ - start));
    out.push_back(std::move(token));
  }

  void lex_one(std::vector<Token>& out) {
    const std::size_t start = pos_;
    const char c = src_[pos_];

    if (lex_detail::is_digit(c) || (c == '.' && lex_detail::is_digit(peek(1)))) {
      lex_number(out);
      return;
    }
    if (c == '"') {
      lex_text(out);
      return;
    }
    if (c == '\'') {
      lex_quoted_name(out);
      return;
    }
    if (c == '#') {
      if (lex_error_literal(out)) return;
      ++pos_;
      push(out, TokenKind::Punct, start);
      return;
    }
    if (c == '$' || lex_detail::is_ident_start(c)) {
      lex_word(out);
      return;
    }

    switch (c) {
      case '+': case '-': case '*': case '/': case '^': case '&': case '%':
      case '=':
        ++pos_;
        push(out, TokenKind::Operator, start);
        return;
      case '<':
        ++pos_;
        if (peek() == '=' || peek() == '>') ++pos_;
        push(out, TokenKind::Operator, start);
        return;
      case '>':
        ++pos_;
        if (peek() == '=') ++pos_;
        push(out, TokenKind::Operator, start);
        return;
      case '(': case ')': case '{': case '}': case '[': case ']':
      case ',': case ';': case ':': case '!':
        ++pos_;
        push(out, TokenKind::Punct, start);
        return;
      default:
        throw ParseError("unexpected character '" + std::string(1, c) + "'", start);
    }
  }

  void lex_number(std::vector<Token>& out) {
    const std::size_t start = pos_;
    while (lex_detail::is_digit(peek())) ++pos_;
    if (peek() == '.') {
      ++pos_;
      while (lex_detail::is_digit(peek())) ++pos_;
    }
    if ((peek() == 'e' || peek() == 'E') &&
        (lex_detail::is_digit(peek(1)) ||
         ((peek(1) == '+' || peek(1) == '-') && lex_detail::is_digit(peek(2))))) {
      pos_ += 2;
      while (lex_detail::is_digit(peek())) ++pos_;
    }
    Token t;
    t.number = std::stod(std::string(src_.substr(start, pos_ - start)));
    push(out, TokenKind::Number, start, std::move(t));
  }

  void lex_text(std::vector<Token>& out) {
    const std::size_t start = pos_;
    ++pos_;  // opening quote
    std::string value;
    while (true) {
      if (pos_ >= src_.size()) throw ParseError("unterminated text literal", start);
      const char c = src_[pos_];
      if (c == '"') {
        if (peek(1) == '"') {  // doubled quote escapes itself
          value.push_back('"');
          pos_ += 2;
          continue;
        }
        ++pos_;
        break;
      }
      value.push_back(c);
      ++pos_;
    }
    Token t;
    t.text = std::move(value);
    push(out, TokenKind::Text, start, std::move(t));
  }

  // 'Rpt Summary' ahead of a '!' sheet separator. Doubled '' escapes a quote.
  void lex_quoted_name(std::vector<Token>& out) {
    const std::size_t start = pos_;
    ++pos_;
    std::string value;
    while (true) {
      if (pos_ >= src_.size()) throw ParseError("unterminated quoted name", start);
      const char c = src_[pos_];
      if (c == '\'') {
        if (peek(1) == '\'') {
          value.push_back('\'');
          pos_ += 2;
          continue;
        }
        ++pos_;
        break;
      }
      value.push_back(c);
      ++pos_;
    }
    Token t;
    t.text = std::move(value);
    push(out, TokenKind::Identifier, start, std::move(t));
  }

  bool lex_error_literal(std::vector<Token>& out) {
    static constexpr std::string_view kCodes[] = {
        "#VALUE!", "#N/A", "#REF!", "#NAME?", "#NUM!", "#CALC!", "#SPILL!", "#DIV/0!",
    };
    const std::size_t start = pos_;
    for (std::string_view code : kCodes) {
      if (pos_ + code.size() > src_.size()) continue;
      if (!ci_equal(src_.substr(pos_, code.size()), code)) continue;
      pos_ += code.size();
      Token t;
      t.error = *parse_error_code(code);
      push(out, TokenKind::ErrorLiteral, start, std::move(t));
      return true;
    }
    return false;
  }

  // Identifiers and A1-style references share a prefix; a word is a cell
  // reference only when it matches [$]letters[$]digits with the letters and
  // digits inside the grid bounds, otherwise it is an identifier.
  void lex_word(std::vector<Token>& out) {
    const std::size_t start = pos_;
    bool abs_col = false;
    if (peek() == '$') {
      abs_col = true;
      ++pos_;
    }
    std::size_t letters_begin = pos_;
    while (lex_detail::is_ascii_letter(peek())) ++pos_;
    const std::size_t letters_len = pos_ - letters_begin;

    const bool dollar_row = peek() == '$';
    if ((dollar_row || lex_detail::is_digit(peek())) && letters_len >= 1 && letters_len <= 3) {
      std::size_t probe = pos_ + (dollar_row ? 1 : 0);
      std::size_t digits_begin = probe;
      while (probe < src_.size() && lex_detail::is_digit(src_[probe])) ++probe;
      const std::size_t digits_len = probe - digits_begin;
      const bool bounded =
          probe >= src_.size() || !lex_detail::is_ident_continue(src_[probe]);
      if (digits_len >= 1 && digits_len <= 7 && bounded) {
        const int col = lex_detail::column_number(src_.substr(letters_begin, letters_len));
        long row = std::stol(std::string(src_.substr(digits_begin, digits_len)));
        if (col <= lex_detail::kMaxColumn && row >= 1 && row <= lex_detail::kMaxRow) {
          pos_ = probe;
          push(out, TokenKind::CellRef, start);
          maybe_enter_bracket_mode(out);
          return;
        }
      }
    }

    if (abs_col)
      throw ParseError("'$' must begin a cell reference", start);

    if (!lex_detail::is_ident_start(peek()) && pos_ == letters_begin)
      throw ParseError("expected a name", start);
    while (lex_detail::is_ident_continue(peek())) ++pos_;
    push(out, TokenKind::Identifier, start);

    Token& word = out.back();
    if (ci_equal(word.lexeme, "TRUE") || ci_equal(word.lexeme, "FALSE")) {
      word.kind = TokenKind::Boolean;
      word.boolean = ci_equal(word.lexeme, "TRUE");
      return;
    }
    maybe_enter_bracket_mode(out);
  }

  // An identifier directly followed by '[' opens a structured reference:
  //   tblBI[First Date]          -> part "tblBI", [, part "First Date", ]
  //   tblBI[[ID]:[Expense ...]]  -> part "tblBI", [, [, part "ID", ], :, ...
  // The table name token is retagged as a table-ref-part and the bracketed
  // pieces are emitted as punct / table-ref-part tokens.
  void maybe_enter_bracket_mode(std::vector<Token>& out) {
    if (peek() != '[') return;
    Token& name = out.back();
    if (name.kind != TokenKind::Identifier) return;  // A1[ ... ] is not a table
    name.kind = TokenKind::TableRefPart;

    punct_here(out);  // outer '['
    if (peek() == '[') {
      punct_here(out);
      column_part(out);
      expect_punct(']', out);
      expect_punct(':', out);
      expect_punct('[', out);
      column_part(out);
      expect_punct(']', out);
      expect_punct(']', out);
    } else {
      column_part(out);
      expect_punct(']', out);
    }
  }

  void punct_here(std::vector<Token>& out) {
    const std::size_t start = pos_;
    ++pos_;
    push(out, TokenKind::Punct, start);
  }

  void expect_punct(char c, std::vector<Token>& out) {
    if (peek() != c)
      throw ParseError("expected '" + std::string(1, c) + "' in structured reference", pos_);
    punct_here(out);
  }

  // Column names run to the closing bracket and may contain spaces and dots.
  void column_part(std::vector<Token>& out) {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && src_[pos_] != ']' && src_[pos_] != '[') ++pos_;
    if (pos_ >= src_.size())
      throw ParseError("unterminated structured reference", start);
    if (pos_ == start)
      throw ParseError("empty column name in structured reference", start);
    push(out, TokenKind::TableRefPart, start);
  }

  std::string_view src_;
  bool allow_comments_;
  std::size_t pos_ = 0;
};

/// Formula-mode tokenization; comments are not recognized.
inline std::vector<Token> tokenize(std::string_view source) {
  return Lexer(source).run().tokens;
}

/// Module-mode tokenization; // and /* */ comments are collected alongside
/// the token stream. Block comments do not nest: the first */ closes.
inline LexResult tokenize_module(std::string_view source) {
  return Lexer(source, true).run();
}

}  // namespace bxl
