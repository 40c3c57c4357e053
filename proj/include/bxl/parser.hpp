#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "bxl/ast.hpp"
#include "bxl/lexer.hpp"

namespace bxl {

namespace parse_detail {
constexpr std::size_t kMaxNesting = 2000;
constexpr std::size_t kMaxParams = 253;
}  // namespace parse_detail

/// Recursive-descent parser over a token stream. Binding strength, loosest
/// to tightest: comparisons, &, + -, * /, ^, unary +/-, postfix %.
class Parser {
 public:
  Parser(std::vector<Token> tokens, std::string_view source)
      : tokens_(std::move(tokens)), source_(source) {}

  ExprPtr parse_formula() {
    if (at_operator("=")) advance();
    ExprPtr e = parse_expr();
    expect_end();
    return e;
  }

  /// Parses one expression and stops, leaving the cursor after it; used by
  /// the module-file parser which handles its own ';' separators.
  ExprPtr parse_one_expression() { return parse_expr(); }

  const Token& current() const { return tokens_[pos_]; }
  void expect_end() const {
    if (current().kind != TokenKind::End)
      throw ParseError("unexpected '" + current().lexeme + "' after expression",
                       current().span.begin);
  }

 protected:
  struct NestingGuard {
    explicit NestingGuard(Parser& p) : p_(p) {
      if (++p_.depth_ > parse_detail::kMaxNesting)
        throw ParseError("expression nests too deeply", p_.current().span.begin);
    }
    ~NestingGuard() { --p_.depth_; }
    Parser& p_;
  };

  const Token& peek(std::size_t ahead = 0) const {
    const std::size_t i = pos_ + ahead;
    return i < tokens_.size() ? tokens_[i] : tokens_.back();
  }
  const Token& advance() { return tokens_[pos_++]; }

  bool at_operator(std::string_view text) const {
    return current().kind == TokenKind::Operator && current().lexeme == text;
  }
  bool at_punct(char c) const {
    return current().kind == TokenKind::Punct && current().lexeme.size() == 1 &&
           current().lexeme[0] == c;
  }
  void expect_punct(char c, std::string_view what) {
    if (!at_punct(c))
      throw ParseError("expected '" + std::string(1, c) + "' " + std::string(what),
                       current().span.begin);
    advance();
  }

  static Span join(Span a, Span b) { return {a.begin, b.end}; }
  Span span_from(std::size_t start_pos) const {
    return {tokens_[start_pos].span.begin, tokens_[pos_ ? pos_ - 1 : 0].span.end};
  }

  ExprPtr parse_expr() {
    NestingGuard guard(*this);
    return parse_comparison();
  }

  ExprPtr parse_comparison() {
    ExprPtr lhs = parse_concat();
    while (current().kind == TokenKind::Operator) {
      BinOp op;
      const std::string& t = current().lexeme;
      if (t == "=") op = BinOp::Eq;
      else if (t == "<>") op = BinOp::Ne;
      else if (t == "<") op = BinOp::Lt;
      else if (t == "<=") op = BinOp::Le;
      else if (t == ">") op = BinOp::Gt;
      else if (t == ">=") op = BinOp::Ge;
      else break;
      advance();
      ExprPtr rhs = parse_concat();
      lhs = make_expr(Binary{op, lhs, rhs}, join(lhs->span, rhs->span));
    }
    return lhs;
  }

  ExprPtr parse_concat() {
    ExprPtr lhs = parse_additive();
    while (at_operator("&")) {
      advance();
      ExprPtr rhs = parse_additive();
      lhs = make_expr(Binary{BinOp::Concat, lhs, rhs}, join(lhs->span, rhs->span));
    }
    return lhs;
  }

  ExprPtr parse_additive() {
    ExprPtr lhs = parse_multiplicative();
    while (at_operator("+") || at_operator("-")) {
      const BinOp op = current().lexeme == "+" ? BinOp::Add : BinOp::Sub;
      advance();
      ExprPtr rhs = parse_multiplicative();
      lhs = make_expr(Binary{op, lhs, rhs}, join(lhs->span, rhs->span));
    }
    return lhs;
  }

  ExprPtr parse_multiplicative() {
    ExprPtr lhs = parse_power();
    while (at_operator("*") || at_operator("/")) {
      const BinOp op = current().lexeme == "*" ? BinOp::Mul : BinOp::Div;
      advance();
      ExprPtr rhs = parse_power();
      lhs = make_expr(Binary{op, lhs, rhs}, join(lhs->span, rhs->span));
    }
    return lhs;
  }

  ExprPtr parse_power() {
    ExprPtr lhs = parse_unary();
    while (at_operator("^")) {
      advance();
      ExprPtr rhs = parse_unary();
      lhs = make_expr(Binary{BinOp::Pow, lhs, rhs}, join(lhs->span, rhs->span));
    }
    return lhs;
  }

  ExprPtr parse_unary() {
    NestingGuard guard(*this);
    if (at_operator("-") || at_operator("+")) {
      const Token& op = advance();
      ExprPtr operand = parse_unary();
      return make_expr(Unary{op.lexeme == "-" ? UnOp::Neg : UnOp::Plus, operand},
                       join(op.span, operand->span));
    }
    return parse_postfix();
  }

  ExprPtr parse_postfix() {
    ExprPtr e = parse_primary();
    while (true) {
      if (at_operator("%")) {
        const Token& op = advance();
        e = make_expr(Unary{UnOp::Percent, e}, join(e->span, op.span));
        continue;
      }
      if (at_punct('(')) {
        std::vector<ExprPtr> args = parse_args();
        e = make_expr(Invoke{e, std::move(args)}, span_join_prev(e->span));
        continue;
      }
      break;
    }
    return e;
  }

  Span span_join_prev(Span start) const {
    return {start.begin, tokens_[pos_ - 1].span.end};
  }

  // '(' already current. Empty slots between commas and a trailing comma
  // produce omitted-argument placeholders.
  std::vector<ExprPtr> parse_args() {
    expect_punct('(', "to open arguments");
    std::vector<ExprPtr> args;
    if (at_punct(')')) {
      advance();
      return args;
    }
    while (true) {
      if (at_punct(',')) {
        args.push_back(make_expr(OmittedArg{}, {current().span.begin, current().span.begin}));
      } else {
        args.push_back(parse_expr());
      }
      if (at_punct(',')) {
        advance();
        if (at_punct(')')) {
          args.push_back(make_expr(OmittedArg{}, {current().span.begin, current().span.begin}));
          advance();
          return args;
        }
        continue;
      }
      expect_punct(')', "to close arguments");
      return args;
    }
  }

  ExprPtr parse_primary() {
    NestingGuard guard(*this);
    const Token& t = current();
    switch (t.kind) {
      case TokenKind::Number: {
        advance();
        return make_expr(NumberLit{t.number}, t.span);
      }
      case TokenKind::Text: {
        advance();
        return make_expr(TextLit{t.text}, t.span);
      }
      case TokenKind::Boolean: {
        advance();
        return make_expr(BoolLit{t.boolean}, t.span);
      }
      case TokenKind::ErrorLiteral: {
        advance();
        return make_expr(ErrorLit{t.error}, t.span);
      }
      case TokenKind::CellRef:
        return parse_reference("");
      case TokenKind::Identifier:
        return parse_identifier();
      case TokenKind::TableRefPart:
        return parse_structured_ref();
      case TokenKind::Punct:
        if (t.lexeme == "(") {
          advance();
          ExprPtr inner = parse_expr();
          expect_punct(')', "to close group");
          return inner;
        }
        if (t.lexeme == "{") return parse_array_literal();
        break;
      default:
        break;
    }
    throw ParseError("unexpected '" + (t.kind == TokenKind::End ? std::string("end of formula") : t.lexeme) + "'",
                     t.span.begin);
  }

  ExprPtr parse_array_literal() {
    const Span open = current().span;
    advance();  // '{'
    std::vector<ExprPtr> elements;
    std::vector<std::size_t> row_lengths;
    std::size_t row_len = 0;
    while (true) {
      elements.push_back(parse_expr());
      ++row_len;
      if (at_punct(',')) {
        advance();
        continue;
      }
      if (at_punct(';')) {
        advance();
        row_lengths.push_back(row_len);
        row_len = 0;
        continue;
      }
      break;
    }
    row_lengths.push_back(row_len);
    const Span close = current().span;
    expect_punct('}', "to close array literal");
    for (std::size_t len : row_lengths)
      if (len != row_lengths[0])
        throw ParseError("array literal rows differ in length", open.begin);
    ArrayLit lit;
    lit.rows = row_lengths.size();
    lit.cols = row_lengths[0];
    lit.elements = std::move(elements);
    return make_expr(std::move(lit), join(open, close));
  }

  // Decodes a cell-ref token's lexeme ([$]AA[$]123) into coordinates.
  static CellRef decode_cell_token(const Token& t, std::string sheet) {
    CellRef ref;
    ref.sheet = std::move(sheet);
    std::string_view s = t.lexeme;
    std::size_t i = 0;
    if (s[i] == '$') {
      ref.abs_col = true;
      ++i;
    }
    int col = 0;
    while (i < s.size() && lex_detail::is_ascii_letter(s[i])) {
      col = col * 26 + (ascii_lower(s[i]) - 'a' + 1);
      ++i;
    }
    ref.col = col - 1;
    if (i < s.size() && s[i] == '$') {
      ref.abs_row = true;
      ++i;
    }
    long row = 0;
    while (i < s.size()) {
      row = row * 10 + (s[i] - '0');
      ++i;
    }
    ref.row = static_cast<int>(row - 1);
    return ref;
  }

  // A cell reference, optionally extended to a range and/or a spill suffix.
  // `sheet` carries an already-consumed sheet qualifier.
  ExprPtr parse_reference(std::string sheet) {
    const Token& first_tok = current();
    const Span start = first_tok.span;
    advance();
    CellRef first = decode_cell_token(first_tok, sheet);

    if (at_punct(':')) {
      advance();
      std::string last_sheet;
      if (current().kind == TokenKind::Identifier && peek(1).kind == TokenKind::Punct &&
          peek(1).lexeme == "!") {
        last_sheet = sheet_name_of(current());
        advance();
        advance();
      }
      if (current().kind != TokenKind::CellRef)
        throw ParseError("expected a cell reference after ':'", current().span.begin);
      const Token& last_tok = advance();
      CellRef last = decode_cell_token(last_tok, last_sheet);
      if (!last_sheet.empty() && !ci_equal(last_sheet, first.sheet.empty() ? "" : first.sheet))
        throw ParseError("range endpoints name different sheets", last_tok.span.begin);
      last.sheet.clear();
      return make_expr(RangeRef{first, last}, {start.begin, last_tok.span.end});
    }

    if (at_punct('#')) {
      const Token& hash = advance();
      return make_expr(SpillRef{first}, {start.begin, hash.span.end});
    }
    return make_expr(CellRef{first}, start);
  }

  static std::string sheet_name_of(const Token& t) {
    return t.lexeme[0] == '\'' ? t.text : t.lexeme;
  }

  ExprPtr parse_identifier() {
    const Token& name_tok = current();

    if (peek(1).kind == TokenKind::Punct && peek(1).lexeme == "!") {
      advance();  // sheet name
      advance();  // '!'
      if (current().kind != TokenKind::CellRef)
        throw ParseError("expected a cell reference after '!'", current().span.begin);
      return parse_reference(sheet_name_of(name_tok));
    }

    if (peek(1).kind == TokenKind::Punct && peek(1).lexeme == "(") {
      if (ci_equal(name_tok.lexeme, "LAMBDA")) return parse_lambda();
      if (ci_equal(name_tok.lexeme, "LET")) return parse_let();
      advance();
      std::vector<ExprPtr> args = parse_args();
      return make_expr(FuncCall{name_tok.lexeme, std::move(args)},
                       span_join_prev(name_tok.span));
    }

    advance();
    return make_expr(NameRef{name_tok.lexeme}, name_tok.span);
  }

  // LAMBDA(p1, [p2], ..., body). Optional parameters are bracketed and must
  // follow all required ones.
  ExprPtr parse_lambda() {
    const Span start = current().span;
    advance();  // LAMBDA
    expect_punct('(', "after LAMBDA");
    std::vector<Param> params;
    bool seen_optional = false;
    while (true) {
      if (at_punct('[')) {
        advance();
        if (current().kind != TokenKind::Identifier)
          throw ParseError("expected a parameter name after '['", current().span.begin);
        const Token& p = advance();
        expect_punct(']', "to close optional parameter");
        params.push_back({p.lexeme, true});
        seen_optional = true;
        expect_punct(',', "after parameter");
        continue;
      }
      if (current().kind == TokenKind::Identifier && at_punct_ahead(1, ',')) {
        const Token& p = advance();
        if (seen_optional)
          throw ParseError("required parameter after an optional one", p.span.begin);
        params.push_back({p.lexeme, false});
        advance();  // ','
        continue;
      }
      break;
    }
    if (params.size() > parse_detail::kMaxParams)
      throw ParseError("too many parameters (253 maximum)", start.begin);
    for (std::size_t i = 0; i < params.size(); ++i)
      for (std::size_t j = i + 1; j < params.size(); ++j)
        if (ci_equal(params[i].name, params[j].name))
          throw ParseError("duplicate parameter name '" + params[j].name + "'", start.begin);
    ExprPtr body = parse_expr();
    expect_punct(')', "to close LAMBDA");
    return make_expr(LambdaExpr{std::move(params), body}, span_join_prev(start));
  }

  bool at_punct_ahead(std::size_t ahead, char c) const {
    const Token& t = peek(ahead);
    return t.kind == TokenKind::Punct && t.lexeme.size() == 1 && t.lexeme[0] == c;
  }

  // LET(n1, v1, ..., nk, vk, body) with at least one binding; names are
  // unique and each value may use the bindings before it.
  ExprPtr parse_let() {
    const Span start = current().span;
    advance();  // LET
    expect_punct('(', "after LET");
    std::vector<LetBinding> bindings;
    while (true) {
      if (current().kind != TokenKind::Identifier)
        throw ParseError("expected a binding name in LET", current().span.begin);
      const Token& name = advance();
      for (const LetBinding& b : bindings)
        if (ci_equal(b.name, name.lexeme))
          throw ParseError("duplicate LET binding '" + name.lexeme + "'", name.span.begin);
      expect_punct(',', "after LET binding name");
      ExprPtr value = parse_expr();
      bindings.push_back({name.lexeme, value});
      expect_punct(',', "after LET binding value");
      const bool next_is_binding =
          current().kind == TokenKind::Identifier && at_punct_ahead(1, ',');
      if (!next_is_binding) break;
    }
    ExprPtr body = parse_expr();
    expect_punct(')', "to close LET");
    return make_expr(LetExpr{std::move(bindings), body}, span_join_prev(start));
  }

  ExprPtr parse_structured_ref() {
    const Token& table = current();
    const Span start = table.span;
    advance();
    expect_punct('[', "after table name");
    StructuredRef ref;
    ref.table = table.lexeme;
    if (at_punct('[')) {
      advance();
      ref.first_column = take_part();
      expect_punct(']', "after column name");
      expect_punct(':', "between column names");
      expect_punct('[', "before column name");
      ref.last_column = take_part();
      expect_punct(']', "after column name");
    } else {
      ref.first_column = take_part();
    }
    const Token& close = current();
    expect_punct(']', "to close structured reference");
    return make_expr(std::move(ref), {start.begin, close.span.end});
  }

  std::string take_part() {
    if (current().kind != TokenKind::TableRefPart)
      throw ParseError("expected a column name", current().span.begin);
    return advance().lexeme;
  }

  std::vector<Token> tokens_;
  std::string_view source_;
  std::size_t pos_ = 0;
  std::size_t depth_ = 0;
};

/// Parses a formula (with or without a leading '='). Throws ParseError with
/// a byte offset on malformed input.
inline ExprPtr parse_formula(std::string_view source) {
  Parser p(tokenize(source), source);
  return p.parse_formula();
}

}  // namespace bxl
