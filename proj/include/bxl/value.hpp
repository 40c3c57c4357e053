#pragma once

#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "bxl/ast.hpp"
#include "bxl/scalar.hpp"

namespace bxl {

namespace limits {
// Ceiling on cells in any computed array (SEQUENCE, MAKEARRAY, broadcasts).
constexpr std::size_t kMaxArrayCells = 10'000'000;
}  // namespace limits

/// Rectangular block of scalars, row-major, at least 1x1. A 1x1 array and a
/// lone scalar are interchangeable everywhere.
class Array {
 public:
  Array() : rows_(1), cols_(1), cells_(1) {}
  Array(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), cells_(rows * cols) {}

  static bool size_ok(std::size_t rows, std::size_t cols) {
    return rows >= 1 && cols >= 1 && rows <= limits::kMaxArrayCells &&
           cols <= limits::kMaxArrayCells &&
           rows * cols <= limits::kMaxArrayCells;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return cells_.size(); }

  const Scalar& at(std::size_t r, std::size_t c) const { return cells_[r * cols_ + c]; }
  Scalar& at(std::size_t r, std::size_t c) { return cells_[r * cols_ + c]; }
  const Scalar& flat(std::size_t i) const { return cells_[i]; }
  Scalar& flat(std::size_t i) { return cells_[i]; }

  bool operator==(const Array&) const = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<Scalar> cells_;
};

struct Environment;
using EnvPtr = std::shared_ptr<const Environment>;

struct ImportRecord;

/// A lambda value: parameter list, body, and the environment the LAMBDA
/// expression was evaluated in. self_name lets a closure bound to a defined
/// name or module definition call itself even though the binding frame it
/// came from is not part of its captured chain.
struct Closure {
  std::vector<Param> params;
  ExprPtr body;
  EnvPtr env;
  std::string self_name;

  std::size_t required_count() const {
    std::size_t n = 0;
    for (const Param& p : params)
      if (!p.optional) ++n;
    return n;
  }
};

using ClosurePtr = std::shared_ptr<const Closure>;

using Value = std::variant<Scalar, Array, ClosurePtr>;

inline bool is_scalar(const Value& v) { return std::holds_alternative<Scalar>(v); }
inline bool is_array(const Value& v) { return std::holds_alternative<Array>(v); }
inline bool is_closure(const Value& v) { return std::holds_alternative<ClosurePtr>(v); }

inline Value error_value(ErrorCode c) { return Scalar(c); }

/// Collapses 1x1 arrays to their single scalar.
inline Value normalized(Value v) {
  if (const Array* a = std::get_if<Array>(&v))
    if (a->rows() == 1 && a->cols() == 1) return a->at(0, 0);
  return v;
}

/// If the value is an error scalar, returns its code.
inline std::optional<ErrorCode> error_of(const Value& v) {
  if (const Scalar* s = std::get_if<Scalar>(&v))
    if (s->is_error()) return s->error();
  return std::nullopt;
}

/// Lexical scope frame. Chains are immutable once built; LET introduces one
/// frame per binding so later bindings are invisible to earlier values.
/// A frame may designate an imported module whose sibling definitions
/// resolve by bare name (the evaluator materializes those lazily).
struct Environment {
  EnvPtr parent;
  std::unordered_map<std::string, Value> vars;  // keys ASCII-folded
  const ImportRecord* module = nullptr;

  static EnvPtr with_binding(EnvPtr parent, std::string_view name, Value v) {
    auto env = std::make_shared<Environment>();
    env->parent = std::move(parent);
    env->vars.emplace(ci_fold(name), std::move(v));
    return env;
  }

  const Value* find_local(std::string_view folded_name) const {
    auto it = vars.find(std::string(folded_name));
    return it == vars.end() ? nullptr : &it->second;
  }
};

/// Coercion result: a double or the error that explains why not.
struct NumberOrError {
  double value = 0;
  std::optional<ErrorCode> error;
  static NumberOrError ok(double v) { return {v, std::nullopt}; }
  static NumberOrError fail(ErrorCode c) { return {0, c}; }
};

/// Whole-string numeric parse with surrounding spaces tolerated. Empty or
/// non-numeric text does not coerce.
inline std::optional<double> parse_number_text(const std::string& s) {
  const char* p = s.c_str();
  while (*p == ' ') ++p;
  if (*p == '\0') return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(p, &end);
  if (end == p) return std::nullopt;
  while (*end == ' ') ++end;
  if (*end != '\0') return std::nullopt;
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

/// Scalar to number under the arithmetic coercion rules: blanks are 0,
/// booleans 1/0, numeric text parses, all other text fails.
inline NumberOrError to_number(const Scalar& s) {
  if (s.is_error()) return NumberOrError::fail(s.error());
  if (s.is_number()) return NumberOrError::ok(s.number());
  if (s.is_bool()) return NumberOrError::ok(s.boolean() ? 1.0 : 0.0);
  if (s.is_blank_like()) return NumberOrError::ok(0.0);
  if (auto v = parse_number_text(s.text())) return NumberOrError::ok(*v);
  return NumberOrError::fail(ErrorCode::Value);
}

/// Display form of a number: up to 15 significant digits, trailing noise
/// dropped, so 0.1+0.2 reads "0.3". Negative zero displays as 0.
inline std::string display_number(double v) {
  if (v == 0) v = 0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return std::string(buf);
}

/// Scalar to text under the concatenation rules: blanks are empty, booleans
/// spell TRUE/FALSE, errors do not coerce.
inline std::optional<std::string> to_text(const Scalar& s) {
  if (s.is_error()) return std::nullopt;
  if (s.is_text()) return s.text();
  if (s.is_number()) return display_number(s.number());
  if (s.is_bool()) return std::string(s.boolean() ? "TRUE" : "FALSE");
  return std::string();
}

/// Scalar to condition: numbers test nonzero, text never coerces.
inline std::optional<bool> to_condition(const Scalar& s) {
  if (s.is_bool()) return s.boolean();
  if (s.is_number()) return s.number() != 0;
  if (s.is_blank_like()) return false;
  return std::nullopt;
}

namespace compare_detail {
inline int type_rank(const Scalar& s) {
  if (s.is_number()) return 0;
  if (s.is_text()) return 1;
  return 2;  // booleans order above text
}
}  // namespace compare_detail

/// Three-way comparison for = <> < <= > >=. Blanks adopt the other side's
/// type (0, "", or FALSE); mixed types never compare equal and order as
/// number < text < boolean; text compares ASCII-case-insensitively.
/// Errors must be screened out by the caller first.
inline int compare_scalars(const Scalar& lhs, const Scalar& rhs) {
  Scalar a = lhs, b = rhs;
  if (a.is_blank_like() && b.is_blank_like()) return 0;
  if (a.is_blank_like()) {
    if (b.is_number()) a = Scalar(0.0);
    else if (b.is_text()) a = Scalar(std::string());
    else a = Scalar(false);
  } else if (b.is_blank_like()) {
    if (a.is_number()) b = Scalar(0.0);
    else if (a.is_text()) b = Scalar(std::string());
    else b = Scalar(false);
  }
  const int ra = compare_detail::type_rank(a);
  const int rb = compare_detail::type_rank(b);
  if (ra != rb) return ra < rb ? -1 : 1;
  if (a.is_number()) {
    if (a.number() < b.number()) return -1;
    return a.number() > b.number() ? 1 : 0;
  }
  if (a.is_text()) {
    const std::string fa = ci_fold(a.text());
    const std::string fb = ci_fold(b.text());
    return fa < fb ? -1 : (fa > fb ? 1 : 0);
  }
  const int ba = a.boolean() ? 1 : 0;
  const int bb = b.boolean() ? 1 : 0;
  return ba - bb;
}

/// Equality as the = operator sees it (used by UNIQUE, XMATCH, SORT ties).
inline bool scalars_equal(const Scalar& a, const Scalar& b) {
  if (a.is_error() || b.is_error())
    return a.is_error() && b.is_error() && a.error() == b.error();
  return compare_scalars(a, b) == 0;
}

}  // namespace bxl
