#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "bxl/ast.hpp"
#include "bxl/parser.hpp"
#include "bxl/value.hpp"

namespace bxl {

struct EvalSettings {
  int recursion_limit = 1024;
};

/// Where references and free names resolve. The evaluator owns scoping and
/// builtins; everything grid- or workbook-shaped comes through here.
/// Implementations return error scalars (never throw) for missing targets.
class Resolver {
 public:
  virtual ~Resolver() = default;

  virtual std::string default_sheet() const = 0;

  /// A single cell's stored or computed value; Blank for empty cells.
  virtual Value cell(const std::string& sheet, int row, int col) = 0;

  /// Rectangular block as an array (corners already normalized).
  virtual Value range(const std::string& sheet, int row1, int col1, int row2,
                      int col2) = 0;

  /// The spill region anchored at a cell, or #REF! if nothing spills there.
  virtual Value spill(const std::string& sheet, int row, int col) = 0;

  /// Table column block; last_column empty means the single-column form.
  virtual Value table_columns(const std::string& table,
                              const std::string& first_column,
                              const std::string& last_column) = 0;

  /// Defined names and prefix-qualified imported components. nullopt means
  /// the name does not exist (distinct from a name bound to an error).
  virtual std::optional<Value> name(const std::string& name) = 0;

  /// Bare sibling lookup inside an imported module's definitions.
  virtual std::optional<Value> module_member(const ImportRecord* record,
                                             const std::string& name) = 0;
};

/// Resolver for formulas evaluated without a workbook: the grid is empty,
/// and only builtins exist.
class EmptyResolver : public Resolver {
 public:
  std::string default_sheet() const override { return "Sheet1"; }
  Value cell(const std::string&, int, int) override { return Scalar(Blank{}); }
  Value range(const std::string&, int row1, int col1, int row2, int col2) override {
    Array a(static_cast<std::size_t>(row2 - row1 + 1),
            static_cast<std::size_t>(col2 - col1 + 1));
    return a;
  }
  Value spill(const std::string&, int, int) override {
    return error_value(ErrorCode::Ref);
  }
  Value table_columns(const std::string&, const std::string&,
                      const std::string&) override {
    return error_value(ErrorCode::Name);
  }
  std::optional<Value> name(const std::string&) override { return std::nullopt; }
  std::optional<Value> module_member(const ImportRecord*, const std::string&) override {
    return std::nullopt;
  }
};

// Broadcasting ----------------------------------------------------------

struct ArrayView {
  const Array* array = nullptr;  // null means the scalar below
  Scalar scalar;

  std::size_t rows() const { return array ? array->rows() : 1; }
  std::size_t cols() const { return array ? array->cols() : 1; }

  /// Cell under broadcast: size-1 dimensions repeat; positions beyond a
  /// larger-than-1 dimension read as #N/A.
  Scalar at(std::size_t r, std::size_t c) const {
    const std::size_t nr = rows();
    const std::size_t nc = cols();
    if (nr == 1) r = 0;
    else if (r >= nr) return Scalar(ErrorCode::NA);
    if (nc == 1) c = 0;
    else if (c >= nc) return Scalar(ErrorCode::NA);
    return array ? array->at(r, c) : scalar;
  }
};

/// Scalar-or-array view of a value; closures have no view.
inline std::optional<ArrayView> view_of(const Value& v) {
  if (const Array* a = std::get_if<Array>(&v)) return ArrayView{a, Scalar()};
  if (const Scalar* s = std::get_if<Scalar>(&v)) return ArrayView{nullptr, *s};
  return std::nullopt;
}

/// Broadcast combine over N views: result extent is the maximum extent per
/// axis. Returns a plain scalar when every input was scalar.
template <typename Fn>
Value broadcast(const std::vector<ArrayView>& views, Fn&& cell_fn) {
  std::size_t rows = 1, cols = 1;
  bool any_array = false;
  for (const ArrayView& v : views) {
    rows = std::max(rows, v.rows());
    cols = std::max(cols, v.cols());
    any_array |= v.array != nullptr;
  }
  std::vector<Scalar> cells(views.size());
  if (!any_array) {
    for (std::size_t i = 0; i < views.size(); ++i) cells[i] = views[i].scalar;
    return Value(Scalar(cell_fn(cells)));
  }
  if (!Array::size_ok(rows, cols)) return error_value(ErrorCode::Num);
  Array out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      for (std::size_t i = 0; i < views.size(); ++i) cells[i] = views[i].at(r, c);
      out.at(r, c) = cell_fn(cells);
    }
  }
  return normalized(std::move(out));
}

/// Elementwise map over one scalar-or-array value.
template <typename Fn>
Value elementwise(const Value& v, Fn&& fn) {
  auto view = view_of(v);
  if (!view) return error_value(ErrorCode::Calc);
  if (!view->array) return Value(Scalar(fn(view->scalar)));
  Array out(view->rows(), view->cols());
  for (std::size_t i = 0; i < out.size(); ++i) out.flat(i) = fn(view->array->flat(i));
  return normalized(std::move(out));
}

// Scalar operator kernels ------------------------------------------------

namespace op_detail {

inline Scalar numeric2(const Scalar& a, const Scalar& b, double (*fn)(double, double)) {
  if (a.is_error()) return a;
  if (b.is_error()) return b;
  const NumberOrError x = to_number(a);
  if (x.error) return Scalar(*x.error);
  const NumberOrError y = to_number(b);
  if (y.error) return Scalar(*y.error);
  return Scalar::number(fn(x.value, y.value));
}

inline Scalar scalar_binary(BinOp op, const Scalar& a, const Scalar& b) {
  switch (op) {
    case BinOp::Add: return numeric2(a, b, [](double x, double y) { return x + y; });
    case BinOp::Sub: return numeric2(a, b, [](double x, double y) { return x - y; });
    case BinOp::Mul: return numeric2(a, b, [](double x, double y) { return x * y; });
    case BinOp::Div: {
      if (a.is_error()) return a;
      if (b.is_error()) return b;
      const NumberOrError x = to_number(a);
      if (x.error) return Scalar(*x.error);
      const NumberOrError y = to_number(b);
      if (y.error) return Scalar(*y.error);
      if (y.value == 0) return Scalar(ErrorCode::Div0);
      return Scalar::number(x.value / y.value);
    }
    case BinOp::Pow: {
      if (a.is_error()) return a;
      if (b.is_error()) return b;
      const NumberOrError x = to_number(a);
      if (x.error) return Scalar(*x.error);
      const NumberOrError y = to_number(b);
      if (y.error) return Scalar(*y.error);
      if (x.value == 0 && y.value == 0) return Scalar(ErrorCode::Num);
      if (x.value == 0 && y.value < 0) return Scalar(ErrorCode::Div0);
      return Scalar::number(std::pow(x.value, y.value));
    }
    case BinOp::Concat: {
      if (a.is_error()) return a;
      if (b.is_error()) return b;
      auto x = to_text(a);
      auto y = to_text(b);
      if (!x || !y) return Scalar(ErrorCode::Value);
      return Scalar(*x + *y);
    }
    case BinOp::Eq:
    case BinOp::Ne: {
      if (a.is_error()) return a;
      if (b.is_error()) return b;
      const bool eq = compare_scalars(a, b) == 0;
      return Scalar(op == BinOp::Eq ? eq : !eq);
    }
    case BinOp::Lt:
    case BinOp::Le:
    case BinOp::Gt:
    case BinOp::Ge: {
      if (a.is_error()) return a;
      if (b.is_error()) return b;
      const int c = compare_scalars(a, b);
      switch (op) {
        case BinOp::Lt: return Scalar(c < 0);
        case BinOp::Le: return Scalar(c <= 0);
        case BinOp::Gt: return Scalar(c > 0);
        default: return Scalar(c >= 0);
      }
    }
  }
  return Scalar(ErrorCode::Value);
}

inline Scalar scalar_unary(UnOp op, const Scalar& s) {
  if (s.is_error()) return s;
  switch (op) {
    case UnOp::Neg: {
      const NumberOrError x = to_number(s);
      if (x.error) return Scalar(*x.error);
      return Scalar::number(-x.value);
    }
    case UnOp::Percent: {
      const NumberOrError x = to_number(s);
      if (x.error) return Scalar(*x.error);
      return Scalar::number(x.value / 100.0);
    }
    case UnOp::Plus:
      return s;
  }
  return s;
}

}  // namespace op_detail

class Evaluator;

/// Catalog entry for an eagerly-evaluated builtin.
struct BuiltinSpec {
  std::string name;
  int min_args = 0;
  int max_args = -1;  // -1: unbounded
  Value (*fn)(Evaluator&, std::vector<Value>&) = nullptr;
};

const std::unordered_map<std::string, BuiltinSpec>& builtin_catalog();

/// True for every callable reserved word: the eager catalog plus the
/// special forms LAMBDA, LET, IF, IFERROR, CHOOSE.
bool is_builtin_name(std::string_view name);

class Evaluator {
 public:
  explicit Evaluator(Resolver& resolver, EvalSettings settings = {})
      : resolver_(resolver), settings_(settings) {}

  Resolver& resolver() { return resolver_; }
  const EvalSettings& settings() const { return settings_; }

  /// Evaluates with an empty environment (cell formulas, defined names).
  Value evaluate(const Expr& e) { return evaluate(e, nullptr); }

  Value evaluate(const Expr& e, const EnvPtr& env);

  /// Calls a closure value with already-evaluated arguments. Counts one
  /// level against the recursion limit.
  Value invoke_value(const Value& callee, std::vector<Value> args);

  /// The sheet unqualified references resolve against.
  const std::string& current_sheet() const {
    if (!sheet_.empty()) return sheet_;
    if (default_sheet_.empty()) default_sheet_ = resolver_.default_sheet();
    return default_sheet_;
  }
  void set_current_sheet(std::string sheet) { sheet_ = std::move(sheet); }

  int depth() const { return depth_; }

 private:
  Value invoke_with_exprs(const Value& callee, const std::vector<ExprPtr>& args,
                          const EnvPtr& env);
  Value eval_call(const FuncCall& call, const EnvPtr& env);
  Value eval_if(const std::vector<ExprPtr>& args, const EnvPtr& env);
  Value eval_iferror(const std::vector<ExprPtr>& args, const EnvPtr& env);
  Value eval_choose(const std::vector<ExprPtr>& args, const EnvPtr& env);
  std::vector<Value> eval_args(const std::vector<ExprPtr>& args, const EnvPtr& env);
  std::optional<Value> resolve_name(const std::string& name, const EnvPtr& env);
  Value invoke_closure(const ClosurePtr& closure, std::vector<Value>& args);

  struct DepthGuard {
    DepthGuard(Evaluator& e, bool& exceeded) : e_(e) {
      exceeded = ++e_.depth_ > e_.settings_.recursion_limit;
    }
    ~DepthGuard() { --e_.depth_; }
    Evaluator& e_;
  };

  Resolver& resolver_;
  EvalSettings settings_;
  std::string sheet_;
  mutable std::string default_sheet_;
  int depth_ = 0;
};

inline Value Evaluator::evaluate(const Expr& e, const EnvPtr& env) {
  return std::visit(
      [&](const auto& n) -> Value {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, NumberLit>) {
          return Scalar::number(n.value);
        } else if constexpr (std::is_same_v<T, TextLit>) {
          return Scalar(n.value);
        } else if constexpr (std::is_same_v<T, BoolLit>) {
          return Scalar(n.value);
        } else if constexpr (std::is_same_v<T, ErrorLit>) {
          return Scalar(n.code);
        } else if constexpr (std::is_same_v<T, ArrayLit>) {
          if (!Array::size_ok(n.rows, n.cols)) return error_value(ErrorCode::Num);
          Array out(n.rows, n.cols);
          for (std::size_t i = 0; i < n.elements.size(); ++i) {
            Value v = normalized(evaluate(*n.elements[i], env));
            if (const Scalar* s = std::get_if<Scalar>(&v)) out.flat(i) = *s;
            else if (is_array(v)) out.flat(i) = Scalar(ErrorCode::Value);
            else out.flat(i) = Scalar(ErrorCode::Calc);
          }
          return normalized(std::move(out));
        } else if constexpr (std::is_same_v<T, CellRef>) {
          const std::string& sheet = n.sheet.empty() ? current_sheet() : n.sheet;
          return resolver_.cell(sheet, n.row, n.col);
        } else if constexpr (std::is_same_v<T, RangeRef>) {
          const std::string& sheet =
              n.first.sheet.empty() ? current_sheet() : n.first.sheet;
          const int r1 = std::min(n.first.row, n.last.row);
          const int r2 = std::max(n.first.row, n.last.row);
          const int c1 = std::min(n.first.col, n.last.col);
          const int c2 = std::max(n.first.col, n.last.col);
          return resolver_.range(sheet, r1, c1, r2, c2);
        } else if constexpr (std::is_same_v<T, SpillRef>) {
          const std::string& sheet =
              n.anchor.sheet.empty() ? current_sheet() : n.anchor.sheet;
          return resolver_.spill(sheet, n.anchor.row, n.anchor.col);
        } else if constexpr (std::is_same_v<T, StructuredRef>) {
          return resolver_.table_columns(n.table, n.first_column, n.last_column);
        } else if constexpr (std::is_same_v<T, NameRef>) {
          if (auto v = resolve_name(n.name, env)) return *v;
          return error_value(ErrorCode::Name);
        } else if constexpr (std::is_same_v<T, OmittedArg>) {
          return Value(Scalar(Omitted{}));
        } else if constexpr (std::is_same_v<T, FuncCall>) {
          return eval_call(n, env);
        } else if constexpr (std::is_same_v<T, Invoke>) {
          Value callee = evaluate(*n.callee, env);
          return invoke_with_exprs(callee, n.args, env);
        } else if constexpr (std::is_same_v<T, Binary>) {
          Value l = evaluate(*n.lhs, env);
          Value r = evaluate(*n.rhs, env);
          if (is_closure(l) || is_closure(r)) return error_value(ErrorCode::Calc);
          auto lv = view_of(l);
          auto rv = view_of(r);
          return broadcast({*lv, *rv}, [&](const std::vector<Scalar>& c) {
            return op_detail::scalar_binary(n.op, c[0], c[1]);
          });
        } else if constexpr (std::is_same_v<T, Unary>) {
          Value v = evaluate(*n.operand, env);
          if (n.op == UnOp::Plus) return v;
          if (is_closure(v)) return error_value(ErrorCode::Calc);
          return elementwise(v, [&](const Scalar& s) {
            return op_detail::scalar_unary(n.op, s);
          });
        } else if constexpr (std::is_same_v<T, LetExpr>) {
          EnvPtr scope = env;
          for (const LetBinding& b : n.bindings) {
            Value v = evaluate(*b.value, scope);
            scope = Environment::with_binding(scope, b.name, std::move(v));
          }
          return evaluate(*n.body, scope);
        } else if constexpr (std::is_same_v<T, LambdaExpr>) {
          auto closure = std::make_shared<Closure>();
          closure->params = n.params;
          closure->body = n.body;
          closure->env = env;
          return Value(ClosurePtr(std::move(closure)));
        }
      },
      e.node);
}

inline Value Evaluator::invoke_with_exprs(const Value& callee,
                                          const std::vector<ExprPtr>& args,
                                          const EnvPtr& env) {
  return invoke_value(callee, eval_args(args, env));
}

inline std::vector<Value> Evaluator::eval_args(const std::vector<ExprPtr>& args,
                                               const EnvPtr& env) {
  std::vector<Value> out;
  out.reserve(args.size());
  for (const ExprPtr& a : args) out.push_back(evaluate(*a, env));
  return out;
}

inline std::optional<Value> Evaluator::resolve_name(const std::string& name,
                                                    const EnvPtr& env) {
  const std::string folded = ci_fold(name);
  for (const Environment* frame = env.get(); frame; frame = frame->parent.get()) {
    if (const Value* v = frame->find_local(folded)) return *v;
    if (frame->module) {
      if (auto v = resolver_.module_member(frame->module, name)) return v;
    }
  }
  return resolver_.name(name);
}

inline Value Evaluator::invoke_value(const Value& callee, std::vector<Value> args) {
  if (auto err = error_of(callee)) return error_value(*err);
  const ClosurePtr* closure = std::get_if<ClosurePtr>(&callee);
  if (!closure) return error_value(ErrorCode::Calc);
  return invoke_closure(*closure, args);
}

inline Value Evaluator::invoke_closure(const ClosurePtr& closure,
                                       std::vector<Value>& args) {
  const std::vector<Param>& params = closure->params;
  if (args.size() > params.size()) return error_value(ErrorCode::Value);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const bool provided =
        i < args.size() && !(is_scalar(args[i]) && std::get<Scalar>(args[i]).is_omitted());
    if (!provided && !params[i].optional) return error_value(ErrorCode::Value);
  }

  bool exceeded = false;
  DepthGuard guard(*this, exceeded);
  if (exceeded) return error_value(ErrorCode::Num);

  auto frame = std::make_shared<Environment>();
  frame->parent = closure->env;
  if (!closure->self_name.empty())
    frame->vars.emplace(ci_fold(closure->self_name), Value(closure));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Value v = i < args.size() ? std::move(args[i]) : Value(Scalar(Omitted{}));
    frame->vars[ci_fold(params[i].name)] = std::move(v);
  }
  return evaluate(*closure->body, frame);
}

inline Value Evaluator::eval_call(const FuncCall& call, const EnvPtr& env) {
  const std::string folded = ci_fold(call.name);
  if (folded == "if") return eval_if(call.args, env);
  if (folded == "iferror") return eval_iferror(call.args, env);
  if (folded == "choose") return eval_choose(call.args, env);

  // Scoped bindings win over the catalog, so LET-bound and imported
  // helpers can reuse builtin-looking names.
  if (auto bound = resolve_name(call.name, env)) {
    return invoke_with_exprs(*bound, call.args, env);
  }

  const auto& catalog = builtin_catalog();
  const auto it = catalog.find(folded);
  if (it == catalog.end()) return error_value(ErrorCode::Name);
  const BuiltinSpec& spec = it->second;

  const int given = static_cast<int>(call.args.size());
  if (given < spec.min_args || (spec.max_args >= 0 && given > spec.max_args))
    return error_value(ErrorCode::Value);

  std::vector<Value> args = eval_args(call.args, env);
  return spec.fn(*this, args);
}

inline Value Evaluator::eval_if(const std::vector<ExprPtr>& args, const EnvPtr& env) {
  if (args.size() < 2 || args.size() > 3) return error_value(ErrorCode::Value);
  const Expr* then_expr = args[1]->is<OmittedArg>() ? nullptr : args[1].get();
  const Expr* else_expr =
      args.size() == 3 && !args[2]->is<OmittedArg>() ? args[2].get() : nullptr;

  Value cond = evaluate(*args[0], env);
  if (is_closure(cond)) return error_value(ErrorCode::Calc);

  if (const Scalar* s = std::get_if<Scalar>(&cond)) {
    if (s->is_error()) return cond;
    const auto picked = to_condition(*s);
    if (!picked) return error_value(ErrorCode::Value);
    if (*picked) return then_expr ? evaluate(*then_expr, env) : Value(Scalar(0.0));
    return else_expr ? evaluate(*else_expr, env) : Value(Scalar(false));
  }

  // Array condition: both branches evaluate once, then cells are selected
  // per position; errors in unselected cells are discarded.
  Value then_v = then_expr ? evaluate(*then_expr, env) : Value(Scalar(0.0));
  Value else_v = else_expr ? evaluate(*else_expr, env) : Value(Scalar(false));
  if (is_closure(then_v) || is_closure(else_v)) return error_value(ErrorCode::Calc);
  auto cv = view_of(cond);
  auto tv = view_of(then_v);
  auto ev = view_of(else_v);
  return broadcast({*cv, *tv, *ev}, [](const std::vector<Scalar>& c) -> Scalar {
    if (c[0].is_error()) return c[0];
    const auto picked = to_condition(c[0]);
    if (!picked) return Scalar(ErrorCode::Value);
    return *picked ? c[1] : c[2];
  });
}

inline Value Evaluator::eval_iferror(const std::vector<ExprPtr>& args,
                                     const EnvPtr& env) {
  if (args.size() != 2) return error_value(ErrorCode::Value);
  Value attempt = evaluate(*args[0], env);
  if (const Scalar* s = std::get_if<Scalar>(&attempt)) {
    if (!s->is_error()) return attempt;
    return evaluate(*args[1], env);
  }
  if (is_closure(attempt)) return attempt;
  const Array& a = std::get<Array>(attempt);
  bool any_error = false;
  for (std::size_t i = 0; i < a.size(); ++i) any_error |= a.flat(i).is_error();
  if (!any_error) return attempt;

  Value fallback = evaluate(*args[1], env);
  if (is_closure(fallback)) return error_value(ErrorCode::Calc);
  auto av = view_of(attempt);
  auto fv = view_of(fallback);
  return broadcast({*av, *fv}, [](const std::vector<Scalar>& c) {
    return c[0].is_error() ? c[1] : c[0];
  });
}

inline Value Evaluator::eval_choose(const std::vector<ExprPtr>& args,
                                    const EnvPtr& env) {
  if (args.size() < 2) return error_value(ErrorCode::Value);
  const int branch_count = static_cast<int>(args.size()) - 1;
  Value index = evaluate(*args[0], env);
  if (is_closure(index)) return error_value(ErrorCode::Calc);

  if (const Scalar* s = std::get_if<Scalar>(&index)) {
    if (s->is_error()) return index;
    const NumberOrError k = to_number(*s);
    if (k.error) return error_value(*k.error);
    const int picked = static_cast<int>(std::trunc(k.value));
    if (picked < 1 || picked > branch_count) return error_value(ErrorCode::Value);
    return evaluate(*args[picked], env);
  }

  std::vector<Value> branches;
  branches.reserve(args.size() - 1);
  for (std::size_t i = 1; i < args.size(); ++i) {
    branches.push_back(evaluate(*args[i], env));
    if (is_closure(branches.back())) return error_value(ErrorCode::Calc);
  }
  std::vector<ArrayView> views;
  views.push_back(*view_of(index));
  for (const Value& b : branches) views.push_back(*view_of(b));
  return broadcast(views, [&](const std::vector<Scalar>& c) -> Scalar {
    if (c[0].is_error()) return c[0];
    const NumberOrError k = to_number(c[0]);
    if (k.error) return Scalar(*k.error);
    const int picked = static_cast<int>(std::trunc(k.value));
    if (picked < 1 || picked > branch_count) return Scalar(ErrorCode::Value);
    return c[static_cast<std::size_t>(picked)];
  });
}

}  // namespace bxl

#include "bxl/builtins.hpp"  // defines builtin_catalog(); needs Evaluator above

namespace bxl {

/// Convenience for evaluating a standalone formula against an empty grid.
inline Value evaluate_formula(std::string_view text, EvalSettings settings = {}) {
  EmptyResolver resolver;
  Evaluator eval(resolver, settings);
  return eval.evaluate(*parse_formula(text));
}

}  // namespace bxl
