#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "bxl/scalar.hpp"

namespace bxl {

/// Half-open byte range into the source a node or token came from.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const Span&) const = default;
};

enum class BinOp : std::uint8_t {
  Add, Sub, Mul, Div, Pow, Concat,
  Eq, Ne, Lt, Le, Gt, Ge,
};

enum class UnOp : std::uint8_t { Neg, Plus, Percent };

inline std::string_view bin_op_text(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Pow: return "^";
    case BinOp::Concat: return "&";
    case BinOp::Eq: return "=";
    case BinOp::Ne: return "<>";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
  }
  return "?";
}

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct NumberLit { double value = 0; };
struct TextLit { std::string value; };
struct BoolLit { bool value = false; };
struct ErrorLit { ErrorCode code = ErrorCode::Value; };

/// Rectangular literal {1,2;3,4}: elements row-major, rows*cols of them.
struct ArrayLit {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<ExprPtr> elements;
};

/// A1-style reference. Row and column are 0-based internally; the absolute
/// flags only affect formatting and relocation, not evaluation.
struct CellRef {
  std::string sheet;  // empty means the formula's own sheet
  int col = 0;
  int row = 0;
  bool abs_col = false;
  bool abs_row = false;
};

struct RangeRef {
  CellRef first;
  CellRef last;
};

/// `ref#`: the spill region anchored at a cell.
struct SpillRef { CellRef anchor; };

/// Bare identifier: LET binding, lambda parameter, defined name, or imported
/// component, resolved at evaluation time.
struct NameRef { std::string name; };

/// tbl[Col] or tbl[[First]:[Last]]; last_column is empty for the single form.
struct StructuredRef {
  std::string table;
  std::string first_column;
  std::string last_column;
};

/// Placeholder for an argument skipped between commas, as in f(a,,b).
struct OmittedArg {};

struct FuncCall {
  std::string name;
  std::vector<ExprPtr> args;
};

/// Calling the result of an expression: LAMBDA(x, x+1)(41).
struct Invoke {
  ExprPtr callee;
  std::vector<ExprPtr> args;
};

struct Binary {
  BinOp op = BinOp::Add;
  ExprPtr lhs;
  ExprPtr rhs;
};

struct Unary {
  UnOp op = UnOp::Neg;
  ExprPtr operand;
};

struct LetBinding {
  std::string name;
  ExprPtr value;
};

struct LetExpr {
  std::vector<LetBinding> bindings;
  ExprPtr body;
};

struct Param {
  std::string name;
  bool optional = false;
};

struct LambdaExpr {
  std::vector<Param> params;
  ExprPtr body;
};

struct Expr {
  using Node = std::variant<NumberLit, TextLit, BoolLit, ErrorLit, ArrayLit,
                            CellRef, RangeRef, SpillRef, NameRef, StructuredRef,
                            OmittedArg, FuncCall, Invoke, Binary, Unary,
                            LetExpr, LambdaExpr>;
  Node node;
  Span span;

  template <typename T>
  const T* as() const { return std::get_if<T>(&node); }
  template <typename T>
  bool is() const { return std::holds_alternative<T>(node); }
};

template <typename T>
ExprPtr make_expr(T node, Span span) {
  auto e = std::make_shared<Expr>();
  e->node = std::move(node);
  e->span = span;
  return e;
}

/// Structural equality; spans are ignored and names compare exactly.
inline bool expr_equal(const Expr& a, const Expr& b);

inline bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return expr_equal(*a, *b);
}

inline bool expr_list_equal(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!expr_equal(a[i], b[i])) return false;
  return true;
}

inline bool expr_equal(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const T& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, NumberLit>) {
          return x.value == y.value;
        } else if constexpr (std::is_same_v<T, TextLit>) {
          return x.value == y.value;
        } else if constexpr (std::is_same_v<T, BoolLit>) {
          return x.value == y.value;
        } else if constexpr (std::is_same_v<T, ErrorLit>) {
          return x.code == y.code;
        } else if constexpr (std::is_same_v<T, ArrayLit>) {
          return x.rows == y.rows && x.cols == y.cols &&
                 expr_list_equal(x.elements, y.elements);
        } else if constexpr (std::is_same_v<T, CellRef>) {
          return x.sheet == y.sheet && x.col == y.col && x.row == y.row &&
                 x.abs_col == y.abs_col && x.abs_row == y.abs_row;
        } else if constexpr (std::is_same_v<T, RangeRef>) {
          const Expr fa{Expr::Node{x.first}, {}}, fb{Expr::Node{y.first}, {}};
          const Expr la{Expr::Node{x.last}, {}}, lb{Expr::Node{y.last}, {}};
          return expr_equal(fa, fb) && expr_equal(la, lb);
        } else if constexpr (std::is_same_v<T, SpillRef>) {
          const Expr aa{Expr::Node{x.anchor}, {}}, ab{Expr::Node{y.anchor}, {}};
          return expr_equal(aa, ab);
        } else if constexpr (std::is_same_v<T, NameRef>) {
          return x.name == y.name;
        } else if constexpr (std::is_same_v<T, StructuredRef>) {
          return x.table == y.table && x.first_column == y.first_column &&
                 x.last_column == y.last_column;
        } else if constexpr (std::is_same_v<T, OmittedArg>) {
          return true;
        } else if constexpr (std::is_same_v<T, FuncCall>) {
          return x.name == y.name && expr_list_equal(x.args, y.args);
        } else if constexpr (std::is_same_v<T, Invoke>) {
          return expr_equal(x.callee, y.callee) && expr_list_equal(x.args, y.args);
        } else if constexpr (std::is_same_v<T, Binary>) {
          return x.op == y.op && expr_equal(x.lhs, y.lhs) && expr_equal(x.rhs, y.rhs);
        } else if constexpr (std::is_same_v<T, Unary>) {
          return x.op == y.op && expr_equal(x.operand, y.operand);
        } else if constexpr (std::is_same_v<T, LetExpr>) {
          if (x.bindings.size() != y.bindings.size()) return false;
          for (std::size_t i = 0; i < x.bindings.size(); ++i) {
            if (x.bindings[i].name != y.bindings[i].name) return false;
            if (!expr_equal(x.bindings[i].value, y.bindings[i].value)) return false;
          }
          return expr_equal(x.body, y.body);
        } else if constexpr (std::is_same_v<T, LambdaExpr>) {
          if (x.params.size() != y.params.size()) return false;
          for (std::size_t i = 0; i < x.params.size(); ++i) {
            if (x.params[i].name != y.params[i].name) return false;
            if (x.params[i].optional != y.params[i].optional) return false;
          }
          return expr_equal(x.body, y.body);
        }
      },
      a.node);
}

}  // namespace bxl
