#pragma once

#include <charconv>
#include <string>

#include "bxl/ast.hpp"
#include "bxl/lexer.hpp"

namespace bxl {

/// Shortest decimal text that round-trips the double (123, 0.1, 1e+30).
inline std::string format_number(double v) {
  char buf[40];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, end);
}

/// Column number (0-based) to letters: 0 -> A, 27 -> AB.
inline std::string column_letters(int col) {
  std::string out;
  int n = col + 1;
  while (n > 0) {
    const int r = (n - 1) % 26;
    out.insert(out.begin(), static_cast<char>('A' + r));
    n = (n - 1) / 26;
  }
  return out;
}

namespace format_detail {

// Binding strength used to decide where parentheses are required to
// reproduce the tree exactly.
inline int level_of_bin(BinOp op) {
  switch (op) {
    case BinOp::Eq: case BinOp::Ne: case BinOp::Lt:
    case BinOp::Le: case BinOp::Gt: case BinOp::Ge:
      return 1;
    case BinOp::Concat: return 2;
    case BinOp::Add: case BinOp::Sub: return 3;
    case BinOp::Mul: case BinOp::Div: return 4;
    case BinOp::Pow: return 5;
  }
  return 1;
}

inline int level_of(const Expr& e) {
  if (const auto* b = e.as<Binary>()) return level_of_bin(b->op);
  if (const auto* u = e.as<Unary>())
    return u->op == UnOp::Percent ? 7 : 6;
  return 8;
}

inline bool sheet_needs_quotes(const std::string& sheet) {
  try {
    const auto tokens = tokenize(sheet);
    return !(tokens.size() == 2 && tokens[0].kind == TokenKind::Identifier &&
             tokens[0].lexeme.size() == sheet.size());
  } catch (const ParseError&) {
    return true;
  }
}

inline std::string sheet_prefix(const std::string& sheet) {
  if (sheet.empty()) return "";
  if (!sheet_needs_quotes(sheet)) return sheet + "!";
  std::string quoted = "'";
  for (char c : sheet) {
    if (c == '\'') quoted += "''";
    else quoted += c;
  }
  quoted += "'!";
  return quoted;
}

inline std::string cell_text(const CellRef& ref, bool with_sheet = true) {
  std::string out = with_sheet ? sheet_prefix(ref.sheet) : "";
  if (ref.abs_col) out += '$';
  out += column_letters(ref.col);
  if (ref.abs_row) out += '$';
  out += std::to_string(ref.row + 1);
  return out;
}

}  // namespace format_detail

/// Canonical formatter: operators carry no surrounding spaces, arguments are
/// comma-separated without spaces, and parentheses appear exactly where the
/// tree shape demands them. Formatting is a fixed point: formatting the
/// parse of formatted text reproduces it byte for byte.
inline std::string format_expr(const Expr& e);

inline std::string format_expr(const ExprPtr& e) { return format_expr(*e); }

namespace format_detail {

inline std::string child(const Expr& c, int parent_level, bool is_right) {
  const int cl = level_of(c);
  const bool parens = cl < parent_level || (cl == parent_level && is_right);
  std::string s = format_expr(c);
  return parens ? "(" + s + ")" : s;
}

inline std::string args_text(const std::vector<ExprPtr>& args) {
  std::string out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ',';
    if (!args[i]->is<OmittedArg>()) out += format_expr(args[i]);
  }
  return out;
}

}  // namespace format_detail

inline std::string format_expr(const Expr& e) {
  using namespace format_detail;
  return std::visit(
      [&](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, NumberLit>) {
          return format_number(n.value);
        } else if constexpr (std::is_same_v<T, TextLit>) {
          std::string out = "\"";
          for (char c : n.value) {
            if (c == '"') out += "\"\"";
            else out += c;
          }
          out += '"';
          return out;
        } else if constexpr (std::is_same_v<T, BoolLit>) {
          return n.value ? "TRUE" : "FALSE";
        } else if constexpr (std::is_same_v<T, ErrorLit>) {
          return std::string(error_code_text(n.code));
        } else if constexpr (std::is_same_v<T, ArrayLit>) {
          std::string out = "{";
          for (std::size_t r = 0; r < n.rows; ++r) {
            if (r) out += ';';
            for (std::size_t c = 0; c < n.cols; ++c) {
              if (c) out += ',';
              out += format_expr(n.elements[r * n.cols + c]);
            }
          }
          out += '}';
          return out;
        } else if constexpr (std::is_same_v<T, CellRef>) {
          return cell_text(n);
        } else if constexpr (std::is_same_v<T, RangeRef>) {
          return cell_text(n.first) + ":" + cell_text(n.last, false);
        } else if constexpr (std::is_same_v<T, SpillRef>) {
          return cell_text(n.anchor) + "#";
        } else if constexpr (std::is_same_v<T, NameRef>) {
          return n.name;
        } else if constexpr (std::is_same_v<T, StructuredRef>) {
          if (n.last_column.empty()) return n.table + "[" + n.first_column + "]";
          return n.table + "[[" + n.first_column + "]:[" + n.last_column + "]]";
        } else if constexpr (std::is_same_v<T, OmittedArg>) {
          return "";
        } else if constexpr (std::is_same_v<T, FuncCall>) {
          return n.name + "(" + args_text(n.args) + ")";
        } else if constexpr (std::is_same_v<T, Invoke>) {
          const int cl = level_of(*n.callee);
          std::string callee = format_expr(n.callee);
          if (cl < 8) callee = "(" + callee + ")";
          return callee + "(" + args_text(n.args) + ")";
        } else if constexpr (std::is_same_v<T, Binary>) {
          const int lv = level_of_bin(n.op);
          return child(*n.lhs, lv, false) + std::string(bin_op_text(n.op)) +
                 child(*n.rhs, lv, true);
        } else if constexpr (std::is_same_v<T, Unary>) {
          if (n.op == UnOp::Percent) return child(*n.operand, 7, false) + "%";
          return std::string(n.op == UnOp::Neg ? "-" : "+") + child(*n.operand, 6, false);
        } else if constexpr (std::is_same_v<T, LetExpr>) {
          std::string out = "LET(";
          for (const LetBinding& b : n.bindings) {
            out += b.name;
            out += ',';
            out += format_expr(b.value);
            out += ',';
          }
          out += format_expr(n.body);
          out += ')';
          return out;
        } else if constexpr (std::is_same_v<T, LambdaExpr>) {
          std::string out = "LAMBDA(";
          for (const Param& p : n.params) {
            if (p.optional) out += "[" + p.name + "]";
            else out += p.name;
            out += ',';
          }
          out += format_expr(n.body);
          out += ')';
          return out;
        }
      },
      e.node);
}

}  // namespace bxl
