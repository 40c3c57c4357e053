#pragma once

// Builtin function catalog. Include "bxl/eval.hpp" rather than this header;
// the two are a pair and either entry point works, but the Evaluator class
// must be visible before the handlers below.

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bxl/dates.hpp"
#include "bxl/eval.hpp"

namespace bxl {
namespace builtin_detail {

constexpr std::int64_t kMaxDateSerial = dates::serial_from_civil(9999, 12, 31);

/// An argument counts as absent when missing or explicitly omitted.
inline bool present(const std::vector<Value>& args, std::size_t i) {
  if (i >= args.size()) return false;
  const Scalar* s = std::get_if<Scalar>(&args[i]);
  return !(s && s->is_omitted());
}

struct NumArg {
  double value = 0;
  std::optional<ErrorCode> error;
};

/// Scalar numeric argument with a default for absent positions. Arrays in a
/// scalar-only position fail with #VALUE!.
inline NumArg num_arg(const std::vector<Value>& args, std::size_t i, double def) {
  if (!present(args, i)) return {def, std::nullopt};
  const Scalar* s = std::get_if<Scalar>(&args[i]);
  if (!s) return {0, ErrorCode::Value};
  if (s->is_error()) return {0, s->error()};
  const NumberOrError n = to_number(*s);
  if (n.error) return {0, *n.error};
  return {n.value, std::nullopt};
}

inline NumArg int_arg(const std::vector<Value>& args, std::size_t i, double def) {
  NumArg a = num_arg(args, i, def);
  a.value = std::trunc(a.value);
  return a;
}

struct BoolArg {
  bool value = false;
  std::optional<ErrorCode> error;
};

inline BoolArg bool_arg(const std::vector<Value>& args, std::size_t i, bool def) {
  if (!present(args, i)) return {def, std::nullopt};
  const Scalar* s = std::get_if<Scalar>(&args[i]);
  if (!s) return {false, ErrorCode::Value};
  if (s->is_error()) return {false, s->error()};
  const auto b = to_condition(*s);
  if (!b) return {false, ErrorCode::Value};
  return {*b, std::nullopt};
}

struct TextArg {
  std::string value;
  std::optional<ErrorCode> error;
};

inline TextArg text_arg(const std::vector<Value>& args, std::size_t i) {
  if (!present(args, i)) return {std::string(), ErrorCode::Value};
  const Scalar* s = std::get_if<Scalar>(&args[i]);
  if (!s) return {std::string(), ErrorCode::Value};
  if (s->is_error()) return {std::string(), s->error()};
  const auto t = to_text(*s);
  if (!t) return {std::string(), ErrorCode::Value};
  return {*t, std::nullopt};
}

/// Flattens every argument into the visitor row-major, returning the first
/// error cell. Closure arguments abort with #CALC!.
template <typename CellFn>
std::optional<ErrorCode> visit_cells(const std::vector<Value>& args, CellFn&& fn) {
  for (const Value& arg : args) {
    if (is_closure(arg)) return ErrorCode::Calc;
    if (const Scalar* s = std::get_if<Scalar>(&arg)) {
      if (s->is_error()) return s->error();
      fn(*s, /*direct=*/true);
    } else {
      const Array& a = std::get<Array>(arg);
      for (std::size_t i = 0; i < a.size(); ++i) {
        const Scalar& c = a.flat(i);
        if (c.is_error()) return c.error();
        fn(c, /*direct=*/false);
      }
    }
  }
  return std::nullopt;
}

/// Normalizes a lambda-produced value to one scalar; nested arrays and
/// closures collapse to #CALC!.
inline Scalar scalar_result(Value v) {
  v = normalized(std::move(v));
  if (const Scalar* s = std::get_if<Scalar>(&v)) return *s;
  return Scalar(ErrorCode::Calc);
}

inline Array materialize(const ArrayView& view) {
  Array out(view.rows(), view.cols());
  for (std::size_t r = 0; r < view.rows(); ++r)
    for (std::size_t c = 0; c < view.cols(); ++c) out.at(r, c) = view.at(r, c);
  return out;
}

inline Array transposed(const ArrayView& view) {
  Array out(view.cols(), view.rows());
  for (std::size_t r = 0; r < view.rows(); ++r)
    for (std::size_t c = 0; c < view.cols(); ++c) out.at(c, r) = view.at(r, c);
  return out;
}

struct SerialOrError {
  std::int64_t value = 0;
  std::optional<ErrorCode> error;
};

/// Date coercion: serial numbers pass through truncated, date text parses in
/// the two supported layouts, everything else fails. Blank coerces to serial
/// zero, which lands in the rejected pre-1900-03-01 window.
inline SerialOrError serial_from_scalar(const Scalar& s) {
  if (s.is_error()) return {0, s.error()};
  if (s.is_text()) {
    if (auto v = dates::parse_date_text(s.text())) return {*v, std::nullopt};
    return {0, ErrorCode::Value};
  }
  if (s.is_bool()) return {0, ErrorCode::Value};
  const NumberOrError n = to_number(s);
  if (n.error) return {0, *n.error};
  const double t = std::trunc(n.value);
  if (t < dates::kMinSerial || t > static_cast<double>(kMaxDateSerial))
    return {0, ErrorCode::Num};
  return {static_cast<std::int64_t>(t), std::nullopt};
}

// Aggregates -------------------------------------------------------------

inline Value fn_sum(Evaluator&, std::vector<Value>& args) {
  double total = 0;
  std::optional<ErrorCode> first_problem;
  const auto err = visit_cells(args, [&](const Scalar& c, bool direct) {
    if (direct) {
      const NumberOrError n = to_number(c);
      if (n.error) {
        if (!first_problem) first_problem = n.error;
        return;
      }
      total += n.value;
    } else if (c.is_number()) {
      total += c.number();
    }
  });
  if (err) return error_value(*err);
  if (first_problem) return error_value(*first_problem);
  return Scalar::number(total);
}

inline Value fold_extreme(std::vector<Value>& args, bool want_max) {
  double best = 0;
  bool seen = false;
  std::optional<ErrorCode> first_problem;
  const auto consider = [&](double v) {
    if (!seen || (want_max ? v > best : v < best)) best = v;
    seen = true;
  };
  const auto err = visit_cells(args, [&](const Scalar& c, bool direct) {
    if (direct) {
      const NumberOrError n = to_number(c);
      if (n.error) {
        if (!first_problem) first_problem = n.error;
        return;
      }
      consider(n.value);
    } else if (c.is_number()) {
      consider(c.number());
    }
  });
  if (err) return error_value(*err);
  if (first_problem) return error_value(*first_problem);
  return Scalar::number(seen ? best : 0);
}

inline Value fn_max(Evaluator&, std::vector<Value>& args) {
  return fold_extreme(args, true);
}

inline Value fn_min(Evaluator&, std::vector<Value>& args) {
  return fold_extreme(args, false);
}

// Elementwise numerics ---------------------------------------------------

template <double (*Fn)(double)>
Value numeric1(std::vector<Value>& args) {
  if (is_closure(args[0])) return error_value(ErrorCode::Calc);
  return elementwise(args[0], [](const Scalar& s) -> Scalar {
    if (s.is_error()) return s;
    const NumberOrError n = to_number(s);
    if (n.error) return Scalar(*n.error);
    return Scalar::number(Fn(n.value));
  });
}

inline double abs_impl(double v) { return std::fabs(v); }
inline double int_impl(double v) { return std::floor(v); }

inline Value fn_abs(Evaluator&, std::vector<Value>& args) {
  return numeric1<abs_impl>(args);
}

inline Value fn_int(Evaluator&, std::vector<Value>& args) {
  return numeric1<int_impl>(args);
}

inline Value fn_mod(Evaluator&, std::vector<Value>& args) {
  if (is_closure(args[0]) || is_closure(args[1])) return error_value(ErrorCode::Calc);
  auto a = view_of(args[0]);
  auto b = view_of(args[1]);
  return broadcast({*a, *b}, [](const std::vector<Scalar>& c) -> Scalar {
    if (c[0].is_error()) return c[0];
    if (c[1].is_error()) return c[1];
    const NumberOrError n = to_number(c[0]);
    if (n.error) return Scalar(*n.error);
    const NumberOrError d = to_number(c[1]);
    if (d.error) return Scalar(*d.error);
    if (d.value == 0) return Scalar(ErrorCode::Div0);
    return Scalar::number(n.value - d.value * std::floor(n.value / d.value));
  });
}

inline Value fn_round(Evaluator&, std::vector<Value>& args) {
  if (is_closure(args[0]) || is_closure(args[1])) return error_value(ErrorCode::Calc);
  auto a = view_of(args[0]);
  auto b = view_of(args[1]);
  return broadcast({*a, *b}, [](const std::vector<Scalar>& c) -> Scalar {
    if (c[0].is_error()) return c[0];
    if (c[1].is_error()) return c[1];
    const NumberOrError n = to_number(c[0]);
    if (n.error) return Scalar(*n.error);
    const NumberOrError d = to_number(c[1]);
    if (d.error) return Scalar(*d.error);
    const double digits = std::trunc(d.value);
    if (digits < -300 || digits > 300) return Scalar(ErrorCode::Num);
    const double scale = std::pow(10.0, digits);
    return Scalar::number(std::round(n.value * scale) / scale);
  });
}

// Logic ------------------------------------------------------------------

inline Value fold_logic(std::vector<Value>& args, bool want_all) {
  bool acc = want_all;
  bool counted = false;
  std::optional<ErrorCode> first_problem;
  const auto err = visit_cells(args, [&](const Scalar& c, bool direct) {
    if (c.is_blank_like()) return;
    if (c.is_text()) {
      if (!direct) return;  // text cells inside arrays are ignored
      const auto v = parse_number_text(c.text());
      if (!v) {
        if (!first_problem) first_problem = ErrorCode::Value;
        return;
      }
      counted = true;
      acc = want_all ? (acc && *v != 0) : (acc || *v != 0);
      return;
    }
    const auto b = to_condition(c);
    counted = true;
    acc = want_all ? (acc && *b) : (acc || *b);
  });
  if (err) return error_value(*err);
  if (first_problem) return error_value(*first_problem);
  if (!counted) return error_value(ErrorCode::Value);
  return Scalar(acc);
}

inline Value fn_and(Evaluator&, std::vector<Value>& args) {
  return fold_logic(args, true);
}

inline Value fn_or(Evaluator&, std::vector<Value>& args) {
  return fold_logic(args, false);
}

inline Value fn_not(Evaluator&, std::vector<Value>& args) {
  if (is_closure(args[0])) return error_value(ErrorCode::Calc);
  return elementwise(args[0], [](const Scalar& s) -> Scalar {
    if (s.is_error()) return s;
    const auto b = to_condition(s);
    if (!b) return Scalar(ErrorCode::Value);
    return Scalar(!*b);
  });
}

// Inspection -------------------------------------------------------------

inline Value fn_isomitted(Evaluator&, std::vector<Value>& args) {
  const Scalar* s = std::get_if<Scalar>(&args[0]);
  return Scalar(s != nullptr && s->is_omitted());
}

inline Value fn_iserror(Evaluator&, std::vector<Value>& args) {
  if (is_closure(args[0])) return Scalar(false);
  return elementwise(args[0], [](const Scalar& s) { return Scalar(s.is_error()); });
}

inline Value fn_isblank(Evaluator&, std::vector<Value>& args) {
  if (is_closure(args[0])) return Scalar(false);
  return elementwise(args[0], [](const Scalar& s) { return Scalar(s.is_blank_like()); });
}

// Text -------------------------------------------------------------------

inline Value fn_trim(Evaluator&, std::vector<Value>& args) {
  if (is_closure(args[0])) return error_value(ErrorCode::Calc);
  return elementwise(args[0], [](const Scalar& s) -> Scalar {
    if (s.is_error()) return s;
    const auto t = to_text(s);
    if (!t) return Scalar(ErrorCode::Value);
    std::string out;
    out.reserve(t->size());
    bool pending_space = false;
    for (char ch : *t) {
      if (ch == ' ') {
        pending_space = !out.empty();
        continue;
      }
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(ch);
    }
    return Scalar(out);
  });
}

namespace text_format {

constexpr const char* kShortMonths[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                        "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
constexpr const char* kFullMonths[] = {"January",   "February", "March",    "April",
                                       "May",       "June",     "July",     "August",
                                       "September", "October",  "November", "December"};
constexpr const char* kShortDays[] = {"Sun", "Mon", "Tue", "Wed", "Thu", "Fri", "Sat"};
constexpr const char* kFullDays[] = {"Sunday",   "Monday", "Tuesday", "Wednesday",
                                     "Thursday", "Friday", "Saturday"};

inline bool has_date_tokens(const std::string& fmt) {
  bool quoted = false;
  for (char ch : fmt) {
    if (ch == '"') {
      quoted = !quoted;
      continue;
    }
    if (quoted) continue;
    const char low = ascii_lower(ch);
    if (low == 'y' || low == 'm' || low == 'd') return true;
  }
  return false;
}

inline std::string pad2(int v) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02d", v);
  return std::string(buf);
}

inline std::optional<std::string> format_date(std::int64_t serial,
                                              const std::string& fmt) {
  const dates::Civil c = dates::civil_from_serial(serial);
  const int wd = dates::weekday_sun1(serial);
  std::string out;
  std::size_t i = 0;
  while (i < fmt.size()) {
    const char ch = fmt[i];
    if (ch == '"') {
      const std::size_t close = fmt.find('"', i + 1);
      if (close == std::string::npos) return std::nullopt;
      out.append(fmt, i + 1, close - i - 1);
      i = close + 1;
      continue;
    }
    const char low = ascii_lower(ch);
    if (low == 'y' || low == 'm' || low == 'd') {
      std::size_t run = 1;
      while (i + run < fmt.size() && ascii_lower(fmt[i + run]) == low) ++run;
      if (low == 'y') {
        if (run >= 3) out += std::to_string(c.year);
        else out += pad2(c.year % 100);
      } else if (low == 'm') {
        if (run >= 4) out += kFullMonths[c.month - 1];
        else if (run == 3) out += kShortMonths[c.month - 1];
        else if (run == 2) out += pad2(c.month);
        else out += std::to_string(c.month);
      } else {
        if (run >= 4) out += kFullDays[wd - 1];
        else if (run == 3) out += kShortDays[wd - 1];
        else if (run == 2) out += pad2(c.day);
        else out += std::to_string(c.day);
      }
      i += run;
      continue;
    }
    out.push_back(ch);
    ++i;
  }
  return out;
}

inline std::string group_thousands(std::string digits) {
  std::string out;
  int count = 0;
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
    if (count > 0 && count % 3 == 0) out.push_back(',');
    out.push_back(*it);
    ++count;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

inline std::optional<std::string> format_numeric(double v, const std::string& fmt) {
  std::string f = ci_fold(fmt);
  if (f == "general") return display_number(v);

  bool percent = false;
  if (!f.empty() && f.back() == '%') {
    percent = true;
    f.pop_back();
    v *= 100.0;
  }
  bool grouped = false;
  if (f.rfind("#,##", 0) == 0) {
    grouped = true;
    f.erase(0, 4);
  }
  if (f.empty() || f[0] != '0') return std::nullopt;
  int decimals = 0;
  if (f.size() > 1) {
    if (f[1] != '.') return std::nullopt;
    for (std::size_t i = 2; i < f.size(); ++i) {
      if (f[i] != '0') return std::nullopt;
      ++decimals;
    }
    if (decimals == 0) return std::nullopt;
  }

  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string text(buf);
  if (grouped) {
    std::size_t start = text[0] == '-' ? 1 : 0;
    const std::size_t dot = text.find('.');
    const std::size_t end = dot == std::string::npos ? text.size() : dot;
    text = text.substr(0, start) + group_thousands(text.substr(start, end - start)) +
           text.substr(end);
  }
  if (percent) text.push_back('%');
  return text;
}

}  // namespace text_format

inline Value fn_text(Evaluator&, std::vector<Value>& args) {
  if (is_closure(args[0])) return error_value(ErrorCode::Calc);
  const TextArg fmt = text_arg(args, 1);
  if (fmt.error) return error_value(*fmt.error);
  const bool date_format = text_format::has_date_tokens(fmt.value);
  return elementwise(args[0], [&](const Scalar& s) -> Scalar {
    if (s.is_error()) return s;
    if (date_format) {
      const SerialOrError serial = serial_from_scalar(s);
      if (serial.error) {
        // Unconvertible text passes through unchanged.
        if (s.is_text() && !parse_number_text(s.text())) return s;
        return Scalar(*serial.error);
      }
      const auto out = text_format::format_date(serial.value, fmt.value);
      if (!out) return Scalar(ErrorCode::Value);
      return Scalar(*out);
    }
    if (s.is_text() && !parse_number_text(s.text())) return s;
    if (s.is_bool()) return Scalar(std::string(s.boolean() ? "TRUE" : "FALSE"));
    const NumberOrError n = to_number(s);
    if (n.error) return Scalar(*n.error);
    const auto out = text_format::format_numeric(n.value, fmt.value);
    if (!out) return Scalar(ErrorCode::Value);
    return Scalar(*out);
  });
}

inline Value fn_textjoin(Evaluator&, std::vector<Value>& args) {
  const TextArg delim = text_arg(args, 0);
  if (delim.error) return error_value(*delim.error);
  const BoolArg ignore_empty = bool_arg(args, 1, false);
  if (ignore_empty.error) return error_value(*ignore_empty.error);

  std::string out;
  bool first = true;
  std::optional<ErrorCode> problem;
  std::vector<Value> values(args.begin() + 2, args.end());
  const auto err = visit_cells(values, [&](const Scalar& c, bool) {
    if (problem) return;
    const auto t = to_text(c);
    if (!t) {
      problem = ErrorCode::Value;
      return;
    }
    if (ignore_empty.value && t->empty()) return;
    if (!first) out += delim.value;
    out += *t;
    first = false;
  });
  if (err) return error_value(*err);
  if (problem) return error_value(*problem);
  return Scalar(out);
}

namespace split_detail {

inline std::vector<std::string> split(const std::string& text, const std::string& delim,
                                      bool case_insensitive) {
  std::vector<std::string> out;
  if (delim.empty()) {
    out.push_back(text);
    return out;
  }
  const std::string hay = case_insensitive ? ci_fold(text) : text;
  const std::string needle = case_insensitive ? ci_fold(delim) : delim;
  std::size_t pos = 0;
  while (true) {
    const std::size_t hit = hay.find(needle, pos);
    if (hit == std::string::npos) {
      out.push_back(text.substr(pos));
      return out;
    }
    out.push_back(text.substr(pos, hit - pos));
    pos = hit + needle.size();
  }
}

}  // namespace split_detail

inline Value fn_textsplit(Evaluator&, std::vector<Value>& args) {
  const Scalar* input = std::get_if<Scalar>(&args[0]);
  if (!input) return error_value(ErrorCode::Value);
  if (input->is_error()) return error_value(input->error());
  const auto text = to_text(*input);
  if (!text) return error_value(ErrorCode::Value);

  const bool have_col = present(args, 1);
  const bool have_row = present(args, 2);
  if (!have_col && !have_row) return error_value(ErrorCode::Value);
  std::string col_delim, row_delim;
  if (have_col) {
    const TextArg t = text_arg(args, 1);
    if (t.error) return error_value(*t.error);
    if (t.value.empty()) return error_value(ErrorCode::Value);
    col_delim = t.value;
  }
  if (have_row) {
    const TextArg t = text_arg(args, 2);
    if (t.error) return error_value(*t.error);
    if (t.value.empty()) return error_value(ErrorCode::Value);
    row_delim = t.value;
  }
  const BoolArg ignore_empty = bool_arg(args, 3, false);
  if (ignore_empty.error) return error_value(*ignore_empty.error);
  const NumArg match_mode = int_arg(args, 4, 0);
  if (match_mode.error) return error_value(*match_mode.error);
  if (match_mode.value != 0 && match_mode.value != 1)
    return error_value(ErrorCode::Value);
  const bool ci = match_mode.value == 1;
  Scalar pad(ErrorCode::NA);
  if (present(args, 5)) {
    const Scalar* p = std::get_if<Scalar>(&args[5]);
    if (!p) return error_value(ErrorCode::Value);
    pad = *p;
  }

  std::vector<std::string> row_texts =
      have_row ? split_detail::split(*text, row_delim, ci)
               : std::vector<std::string>{*text};
  std::vector<std::vector<std::string>> grid;
  for (const std::string& row_text : row_texts) {
    std::vector<std::string> cells =
        have_col ? split_detail::split(row_text, col_delim, ci)
                 : std::vector<std::string>{row_text};
    if (ignore_empty.value) {
      cells.erase(std::remove(cells.begin(), cells.end(), std::string()), cells.end());
      if (cells.empty()) continue;
    }
    grid.push_back(std::move(cells));
  }
  if (grid.empty()) return error_value(ErrorCode::Calc);

  std::size_t width = 0;
  for (const auto& row : grid) width = std::max(width, row.size());
  if (!Array::size_ok(grid.size(), width)) return error_value(ErrorCode::Num);
  Array out(grid.size(), width);
  for (std::size_t r = 0; r < grid.size(); ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      out.at(r, c) = c < grid[r].size() ? Scalar(grid[r][c]) : pad;
    }
  }
  return normalized(std::move(out));
}

// Shaping ----------------------------------------------------------------

inline Value stack_values(std::vector<Value>& args, bool horizontal) {
  std::vector<ArrayView> blocks;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (is_closure(args[i])) return error_value(ErrorCode::Calc);
    if (!present(args, i)) {
      blocks.push_back(ArrayView{nullptr, Scalar(ErrorCode::NA)});
      continue;
    }
    blocks.push_back(*view_of(args[i]));
  }
  std::size_t rows = 0, cols = 0;
  for (const ArrayView& b : blocks) {
    if (horizontal) {
      rows = std::max(rows, b.rows());
      cols += b.cols();
    } else {
      rows += b.rows();
      cols = std::max(cols, b.cols());
    }
  }
  if (!Array::size_ok(rows, cols)) return error_value(ErrorCode::Num);
  Array out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out.at(r, c) = Scalar(ErrorCode::NA);
  std::size_t offset = 0;
  for (const ArrayView& b : blocks) {
    for (std::size_t r = 0; r < b.rows(); ++r) {
      for (std::size_t c = 0; c < b.cols(); ++c) {
        if (horizontal) out.at(r, offset + c) = b.at(r, c);
        else out.at(offset + r, c) = b.at(r, c);
      }
    }
    offset += horizontal ? b.cols() : b.rows();
  }
  return normalized(std::move(out));
}

inline Value fn_hstack(Evaluator&, std::vector<Value>& args) {
  return stack_values(args, true);
}

inline Value fn_vstack(Evaluator&, std::vector<Value>& args) {
  return stack_values(args, false);
}

inline Value fn_index(Evaluator&, std::vector<Value>& args) {
  if (is_closure(args[0])) return error_value(ErrorCode::Calc);
  const ArrayView source = *view_of(args[0]);
  const bool col_given = present(args, 2);

  const bool gather = (present(args, 1) && is_array(args[1])) ||
                      (col_given && is_array(args[2]));
  if (gather) {
    ArrayView rv = present(args, 1) ? *view_of(args[1]) : ArrayView{nullptr, Scalar(1.0)};
    ArrayView cv;
    if (col_given) {
      cv = *view_of(args[2]);
    } else if (source.rows() == 1) {
      cv = rv;  // vector convention: the one index walks the row
      rv = ArrayView{nullptr, Scalar(1.0)};
    } else {
      cv = ArrayView{nullptr, Scalar(1.0)};
    }
    return broadcast({rv, cv}, [&](const std::vector<Scalar>& idx) -> Scalar {
      if (idx[0].is_error()) return idx[0];
      if (idx[1].is_error()) return idx[1];
      const NumberOrError rn = to_number(idx[0]);
      if (rn.error) return Scalar(*rn.error);
      const NumberOrError cn = to_number(idx[1]);
      if (cn.error) return Scalar(*cn.error);
      const long r = static_cast<long>(std::trunc(rn.value));
      const long c = static_cast<long>(std::trunc(cn.value));
      if (r < 1 || c < 1) return Scalar(ErrorCode::Value);
      if (r > static_cast<long>(source.rows()) || c > static_cast<long>(source.cols()))
        return Scalar(ErrorCode::Ref);
      return source.at(static_cast<std::size_t>(r - 1), static_cast<std::size_t>(c - 1));
    });
  }

  NumArg rn = int_arg(args, 1, 0);
  if (rn.error) return error_value(*rn.error);
  NumArg cn = int_arg(args, 2, 0);
  if (cn.error) return error_value(*cn.error);
  long r = static_cast<long>(rn.value);
  long c = static_cast<long>(cn.value);
  if (r < 0 || c < 0) return error_value(ErrorCode::Value);
  if (source.rows() == 1 && !col_given && r > 0) {
    c = r;  // vector convention: INDEX({1,2,3}, 2) is the second element
    r = 1;
  }
  if (r > static_cast<long>(source.rows()) || c > static_cast<long>(source.cols()))
    return error_value(ErrorCode::Ref);

  const std::size_t r1 = r == 0 ? 0 : static_cast<std::size_t>(r - 1);
  const std::size_t r2 = r == 0 ? source.rows() - 1 : static_cast<std::size_t>(r - 1);
  const std::size_t c1 = c == 0 ? 0 : static_cast<std::size_t>(c - 1);
  const std::size_t c2 = c == 0 ? source.cols() - 1 : static_cast<std::size_t>(c - 1);
  Array out(r2 - r1 + 1, c2 - c1 + 1);
  for (std::size_t rr = r1; rr <= r2; ++rr)
    for (std::size_t cc = c1; cc <= c2; ++cc) out.at(rr - r1, cc - c1) = source.at(rr, cc);
  return normalized(std::move(out));
}

inline Value fn_rows(Evaluator&, std::vector<Value>& args) {
  if (is_closure(args[0])) return error_value(ErrorCode::Calc);
  if (auto err = error_of(args[0])) return error_value(*err);
  return Scalar::number(static_cast<double>(view_of(args[0])->rows()));
}

inline Value fn_columns(Evaluator&, std::vector<Value>& args) {
  if (is_closure(args[0])) return error_value(ErrorCode::Calc);
  if (auto err = error_of(args[0])) return error_value(*err);
  return Scalar::number(static_cast<double>(view_of(args[0])->cols()));
}

inline Value fn_sequence(Evaluator&, std::vector<Value>& args) {
  const NumArg rows = int_arg(args, 0, 1);
  if (rows.error) return error_value(*rows.error);
  const NumArg cols = int_arg(args, 1, 1);
  if (cols.error) return error_value(*cols.error);
  const NumArg start = num_arg(args, 2, 1);
  if (start.error) return error_value(*start.error);
  const NumArg step = num_arg(args, 3, 1);
  if (step.error) return error_value(*step.error);
  if (rows.value < 1 || cols.value < 1) return error_value(ErrorCode::Calc);
  const auto nr = static_cast<std::size_t>(rows.value);
  const auto nc = static_cast<std::size_t>(cols.value);
  if (!Array::size_ok(nr, nc)) return error_value(ErrorCode::Num);
  Array out(nr, nc);
  for (std::size_t i = 0; i < out.size(); ++i)
    out.flat(i) = Scalar::number(start.value + static_cast<double>(i) * step.value);
  return normalized(std::move(out));
}

inline Value fn_transpose(Evaluator&, std::vector<Value>& args) {
  if (is_closure(args[0])) return error_value(ErrorCode::Calc);
  return normalized(transposed(*view_of(args[0])));
}

inline Value fn_unique(Evaluator&, std::vector<Value>& args) {
  if (is_closure(args[0])) return error_value(ErrorCode::Calc);
  const BoolArg by_col = bool_arg(args, 1, false);
  if (by_col.error) return error_value(*by_col.error);
  const BoolArg exactly_once = bool_arg(args, 2, false);
  if (exactly_once.error) return error_value(*exactly_once.error);

  Array data = by_col.value ? transposed(*view_of(args[0])) : materialize(*view_of(args[0]));
  const std::size_t n = data.rows();
  const std::size_t width = data.cols();
  const auto rows_equal = [&](std::size_t i, std::size_t j) {
    for (std::size_t c = 0; c < width; ++c)
      if (!scalars_equal(data.at(i, c), data.at(j, c))) return false;
    return true;
  };

  std::vector<std::size_t> keep;
  std::vector<std::size_t> counts;
  for (std::size_t i = 0; i < n; ++i) {
    bool found = false;
    for (std::size_t k = 0; k < keep.size(); ++k) {
      if (rows_equal(i, keep[k])) {
        ++counts[k];
        found = true;
        break;
      }
    }
    if (!found) {
      keep.push_back(i);
      counts.push_back(1);
    }
  }
  std::vector<std::size_t> rows;
  for (std::size_t k = 0; k < keep.size(); ++k)
    if (!exactly_once.value || counts[k] == 1) rows.push_back(keep[k]);
  if (rows.empty()) return error_value(ErrorCode::Calc);

  Array out(rows.size(), width);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < width; ++c) out.at(r, c) = data.at(rows[r], c);
  if (by_col.value) return normalized(Value(transposed(ArrayView{&out, Scalar()})));
  return normalized(std::move(out));
}

inline Value fn_sort(Evaluator&, std::vector<Value>& args) {
  if (is_closure(args[0])) return error_value(ErrorCode::Calc);
  const NumArg index = int_arg(args, 1, 1);
  if (index.error) return error_value(*index.error);
  const NumArg order = int_arg(args, 2, 1);
  if (order.error) return error_value(*order.error);
  if (order.value != 1 && order.value != -1) return error_value(ErrorCode::Value);
  const BoolArg by_col = bool_arg(args, 3, false);
  if (by_col.error) return error_value(*by_col.error);

  Array data = by_col.value ? transposed(*view_of(args[0])) : materialize(*view_of(args[0]));
  if (index.value < 1 || index.value > static_cast<double>(data.cols()))
    return error_value(ErrorCode::Value);
  const auto key_col = static_cast<std::size_t>(index.value - 1);
  const int direction = static_cast<int>(order.value);

  // Blanks and errors sort to the end in both directions.
  const auto key_class = [](const Scalar& s) {
    if (s.is_blank_like()) return 2;
    return s.is_error() ? 1 : 0;
  };
  std::vector<std::size_t> perm(data.rows());
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
    const Scalar& ka = data.at(a, key_col);
    const Scalar& kb = data.at(b, key_col);
    const int ca = key_class(ka);
    const int cb = key_class(kb);
    if (ca != cb) return ca < cb;
    if (ca != 0) return false;
    return direction * compare_scalars(ka, kb) < 0;
  });

  Array out(data.rows(), data.cols());
  for (std::size_t r = 0; r < perm.size(); ++r)
    for (std::size_t c = 0; c < data.cols(); ++c) out.at(r, c) = data.at(perm[r], c);
  if (by_col.value) return normalized(Value(transposed(ArrayView{&out, Scalar()})));
  return normalized(std::move(out));
}

inline Value fn_filter(Evaluator&, std::vector<Value>& args) {
  if (is_closure(args[0]) || is_closure(args[1])) return error_value(ErrorCode::Calc);
  const ArrayView source = *view_of(args[0]);
  const ArrayView include = *view_of(args[1]);

  const bool row_mode = include.cols() == 1 && include.rows() == source.rows();
  const bool col_mode = !row_mode && include.rows() == 1 && include.cols() == source.cols();
  if (!row_mode && !col_mode) return error_value(ErrorCode::Value);

  const std::size_t lanes = row_mode ? source.rows() : source.cols();
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < lanes; ++i) {
    const Scalar& flag = row_mode ? include.at(i, 0) : include.at(0, i);
    if (flag.is_error()) return flag;
    const auto b = to_condition(flag);
    if (!b) return error_value(ErrorCode::Value);
    if (*b) kept.push_back(i);
  }
  if (kept.empty()) {
    if (present(args, 2)) return args[2];
    return error_value(ErrorCode::Calc);
  }

  Array out(row_mode ? kept.size() : source.rows(),
            row_mode ? source.cols() : kept.size());
  for (std::size_t k = 0; k < kept.size(); ++k) {
    if (row_mode) {
      for (std::size_t c = 0; c < source.cols(); ++c) out.at(k, c) = source.at(kept[k], c);
    } else {
      for (std::size_t r = 0; r < source.rows(); ++r) out.at(r, k) = source.at(r, kept[k]);
    }
  }
  return normalized(std::move(out));
}

inline Value fn_xmatch(Evaluator&, std::vector<Value>& args) {
  if (is_closure(args[0]) || is_closure(args[1])) return error_value(ErrorCode::Calc);
  const ArrayView haystack = *view_of(args[1]);
  if (haystack.rows() != 1 && haystack.cols() != 1) return error_value(ErrorCode::Value);
  const NumArg match_mode = int_arg(args, 2, 0);
  if (match_mode.error) return error_value(*match_mode.error);
  if (match_mode.value != 0) return error_value(ErrorCode::Value);
  const NumArg search_mode = int_arg(args, 3, 1);
  if (search_mode.error) return error_value(*search_mode.error);
  if (search_mode.value != 1 && search_mode.value != -1)
    return error_value(ErrorCode::Value);
  const bool reverse = search_mode.value == -1;

  const std::size_t n = haystack.rows() * haystack.cols();
  const auto item = [&](std::size_t i) -> const Scalar {
    return haystack.rows() == 1 ? haystack.at(0, i) : haystack.at(i, 0);
  };
  return elementwise(args[0], [&](const Scalar& needle) -> Scalar {
    if (needle.is_error()) return needle;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t i = reverse ? n - 1 - k : k;
      if (scalars_equal(needle, item(i)))
        return Scalar::number(static_cast<double>(i + 1));
    }
    return Scalar(ErrorCode::NA);
  });
}

// Lambda helpers ---------------------------------------------------------

inline const ClosurePtr* closure_arg(const std::vector<Value>& args, std::size_t i) {
  if (i >= args.size()) return nullptr;
  return std::get_if<ClosurePtr>(&args[i]);
}

inline Value fn_byrow(Evaluator& eval, std::vector<Value>& args) {
  if (is_closure(args[0])) return error_value(ErrorCode::Calc);
  const ClosurePtr* fn = closure_arg(args, 1);
  if (!fn) return error_value(ErrorCode::Value);
  const ArrayView source = *view_of(args[0]);
  Array out(source.rows(), 1);
  for (std::size_t r = 0; r < source.rows(); ++r) {
    Value row;
    if (source.cols() == 1) {
      row = source.at(r, 0);
    } else {
      Array block(1, source.cols());
      for (std::size_t c = 0; c < source.cols(); ++c) block.at(0, c) = source.at(r, c);
      row = std::move(block);
    }
    out.at(r, 0) = scalar_result(eval.invoke_value(Value(*fn), {std::move(row)}));
  }
  return normalized(std::move(out));
}

inline Value fn_bycol(Evaluator& eval, std::vector<Value>& args) {
  if (is_closure(args[0])) return error_value(ErrorCode::Calc);
  const ClosurePtr* fn = closure_arg(args, 1);
  if (!fn) return error_value(ErrorCode::Value);
  const ArrayView source = *view_of(args[0]);
  Array out(1, source.cols());
  for (std::size_t c = 0; c < source.cols(); ++c) {
    Value col;
    if (source.rows() == 1) {
      col = source.at(0, c);
    } else {
      Array block(source.rows(), 1);
      for (std::size_t r = 0; r < source.rows(); ++r) block.at(r, 0) = source.at(r, c);
      col = std::move(block);
    }
    out.at(0, c) = scalar_result(eval.invoke_value(Value(*fn), {std::move(col)}));
  }
  return normalized(std::move(out));
}

inline Value fn_map(Evaluator& eval, std::vector<Value>& args) {
  const ClosurePtr* fn = closure_arg(args, args.size() - 1);
  if (!fn) return error_value(ErrorCode::Value);
  std::vector<ArrayView> views;
  for (std::size_t i = 0; i + 1 < args.size(); ++i) {
    if (is_closure(args[i])) return error_value(ErrorCode::Calc);
    views.push_back(*view_of(args[i]));
  }
  return broadcast(views, [&](const std::vector<Scalar>& cells) -> Scalar {
    std::vector<Value> call_args(cells.begin(), cells.end());
    return scalar_result(eval.invoke_value(Value(*fn), std::move(call_args)));
  });
}

inline Value fn_reduce(Evaluator& eval, std::vector<Value>& args) {
  const ClosurePtr* fn = closure_arg(args, 2);
  if (!fn) return error_value(ErrorCode::Value);
  if (is_closure(args[1])) return error_value(ErrorCode::Calc);
  Value acc = present(args, 0) ? args[0] : Value(Scalar(Blank{}));
  const ArrayView source = *view_of(args[1]);
  for (std::size_t r = 0; r < source.rows(); ++r) {
    for (std::size_t c = 0; c < source.cols(); ++c) {
      std::vector<Value> step;
      step.reserve(2);
      step.push_back(std::move(acc));
      step.push_back(Value(source.at(r, c)));
      acc = eval.invoke_value(Value(*fn), std::move(step));
      if (is_closure(acc)) return error_value(ErrorCode::Calc);
    }
  }
  return acc;
}

inline Value fn_scan(Evaluator& eval, std::vector<Value>& args) {
  const ClosurePtr* fn = closure_arg(args, 2);
  if (!fn) return error_value(ErrorCode::Value);
  if (is_closure(args[1])) return error_value(ErrorCode::Calc);
  Value acc = present(args, 0) ? args[0] : Value(Scalar(Blank{}));
  const ArrayView source = *view_of(args[1]);
  Array out(source.rows(), source.cols());
  for (std::size_t r = 0; r < source.rows(); ++r) {
    for (std::size_t c = 0; c < source.cols(); ++c) {
      std::vector<Value> step;
      step.reserve(2);
      step.push_back(std::move(acc));
      step.push_back(Value(source.at(r, c)));
      acc = normalized(eval.invoke_value(Value(*fn), std::move(step)));
      if (!is_scalar(acc)) return error_value(ErrorCode::Calc);
      out.at(r, c) = std::get<Scalar>(acc);
    }
  }
  return normalized(std::move(out));
}

inline Value fn_makearray(Evaluator& eval, std::vector<Value>& args) {
  const NumArg rows = int_arg(args, 0, 0);
  if (rows.error) return error_value(*rows.error);
  const NumArg cols = int_arg(args, 1, 0);
  if (cols.error) return error_value(*cols.error);
  const ClosurePtr* fn = closure_arg(args, 2);
  if (!fn) return error_value(ErrorCode::Value);
  if (rows.value < 1 || cols.value < 1) return error_value(ErrorCode::Calc);
  const auto nr = static_cast<std::size_t>(rows.value);
  const auto nc = static_cast<std::size_t>(cols.value);
  if (!Array::size_ok(nr, nc)) return error_value(ErrorCode::Num);
  Array out(nr, nc);
  for (std::size_t r = 0; r < nr; ++r) {
    for (std::size_t c = 0; c < nc; ++c) {
      out.at(r, c) = scalar_result(eval.invoke_value(
          Value(*fn), {Value(Scalar::number(static_cast<double>(r + 1))),
                       Value(Scalar::number(static_cast<double>(c + 1)))}));
    }
  }
  return normalized(std::move(out));
}

// Dates ------------------------------------------------------------------

inline Value fn_date(Evaluator&, std::vector<Value>& args) {
  for (const Value& a : args)
    if (is_closure(a)) return error_value(ErrorCode::Calc);
  auto yv = view_of(args[0]);
  auto mv = view_of(args[1]);
  auto dv = view_of(args[2]);
  return broadcast({*yv, *mv, *dv}, [](const std::vector<Scalar>& c) -> Scalar {
    for (const Scalar& s : c)
      if (s.is_error()) return s;
    const NumberOrError yn = to_number(c[0]);
    if (yn.error) return Scalar(*yn.error);
    const NumberOrError mn = to_number(c[1]);
    if (mn.error) return Scalar(*mn.error);
    const NumberOrError dn = to_number(c[2]);
    if (dn.error) return Scalar(*dn.error);
    int y = static_cast<int>(std::trunc(yn.value));
    const double mt = std::trunc(mn.value);
    const double dt = std::trunc(dn.value);
    if (y >= 0 && y <= 1899) y += 1900;  // two-digit-era year convention
    if (y < 1900 || y > 9999) return Scalar(ErrorCode::Num);
    if (mt < -120000 || mt > 120000 || dt < -4000000 || dt > 4000000)
      return Scalar(ErrorCode::Num);
    const std::int64_t serial = dates::serial_from_normalized(
        y, static_cast<int>(mt), static_cast<int>(dt));
    if (serial < dates::kMinSerial || serial > kMaxDateSerial)
      return Scalar(ErrorCode::Num);
    return Scalar::number(static_cast<double>(serial));
  });
}

template <int (*Fn)(const dates::Civil&)>
Value civil_part(std::vector<Value>& args) {
  if (is_closure(args[0])) return error_value(ErrorCode::Calc);
  return elementwise(args[0], [](const Scalar& s) -> Scalar {
    const SerialOrError serial = serial_from_scalar(s);
    if (serial.error) return Scalar(*serial.error);
    return Scalar::number(Fn(dates::civil_from_serial(serial.value)));
  });
}

inline int year_part(const dates::Civil& c) { return c.year; }
inline int month_part(const dates::Civil& c) { return c.month; }
inline int day_part(const dates::Civil& c) { return c.day; }

inline Value fn_year(Evaluator&, std::vector<Value>& args) {
  return civil_part<year_part>(args);
}

inline Value fn_month(Evaluator&, std::vector<Value>& args) {
  return civil_part<month_part>(args);
}

inline Value fn_day(Evaluator&, std::vector<Value>& args) {
  return civil_part<day_part>(args);
}

inline Value fn_weekday(Evaluator&, std::vector<Value>& args) {
  if (is_closure(args[0])) return error_value(ErrorCode::Calc);
  const NumArg type = int_arg(args, 1, 1);
  if (type.error) return error_value(*type.error);
  if (type.value != 1 && type.value != 2 && type.value != 3)
    return error_value(ErrorCode::Num);
  const int mode = static_cast<int>(type.value);
  return elementwise(args[0], [mode](const Scalar& s) -> Scalar {
    const SerialOrError serial = serial_from_scalar(s);
    if (serial.error) return Scalar(*serial.error);
    const int sun1 = dates::weekday_sun1(serial.value);
    if (mode == 1) return Scalar::number(sun1);
    const int mon1 = (sun1 + 5) % 7 + 1;
    return Scalar::number(mode == 2 ? mon1 : mon1 - 1);
  });
}

inline Value month_shift(std::vector<Value>& args,
                         std::int64_t (*shift)(std::int64_t, int)) {
  if (is_closure(args[0]) || is_closure(args[1])) return error_value(ErrorCode::Calc);
  auto sv = view_of(args[0]);
  auto mv = view_of(args[1]);
  return broadcast({*sv, *mv}, [shift](const std::vector<Scalar>& c) -> Scalar {
    const SerialOrError start = serial_from_scalar(c[0]);
    if (start.error) return Scalar(*start.error);
    if (c[1].is_error()) return c[1];
    const NumberOrError mn = to_number(c[1]);
    if (mn.error) return Scalar(*mn.error);
    const double months = std::trunc(mn.value);
    if (months < -120000 || months > 120000) return Scalar(ErrorCode::Num);
    const std::int64_t serial = shift(start.value, static_cast<int>(months));
    if (serial < dates::kMinSerial || serial > kMaxDateSerial)
      return Scalar(ErrorCode::Num);
    return Scalar::number(static_cast<double>(serial));
  });
}

inline Value fn_edate(Evaluator&, std::vector<Value>& args) {
  return month_shift(args, [](std::int64_t s, int m) {
    return dates::add_months_clamped(s, m);
  });
}

inline Value fn_eomonth(Evaluator&, std::vector<Value>& args) {
  return month_shift(args, [](std::int64_t s, int m) {
    return dates::end_of_month(s, m);
  });
}

}  // namespace builtin_detail

inline const std::unordered_map<std::string, BuiltinSpec>& builtin_catalog() {
  static const std::unordered_map<std::string, BuiltinSpec> catalog = [] {
    namespace b = builtin_detail;
    std::unordered_map<std::string, BuiltinSpec> m;
    const auto add = [&m](const char* name, int min_args, int max_args,
                          Value (*fn)(Evaluator&, std::vector<Value>&)) {
      m.emplace(ci_fold(name), BuiltinSpec{name, min_args, max_args, fn});
    };
    add("SUM", 1, -1, b::fn_sum);
    add("MAX", 1, -1, b::fn_max);
    add("MIN", 1, -1, b::fn_min);
    add("ABS", 1, 1, b::fn_abs);
    add("INT", 1, 1, b::fn_int);
    add("MOD", 2, 2, b::fn_mod);
    add("ROUND", 2, 2, b::fn_round);
    add("AND", 1, -1, b::fn_and);
    add("OR", 1, -1, b::fn_or);
    add("NOT", 1, 1, b::fn_not);
    add("ISOMITTED", 1, 1, b::fn_isomitted);
    add("ISERROR", 1, 1, b::fn_iserror);
    add("ISBLANK", 1, 1, b::fn_isblank);
    add("TRIM", 1, 1, b::fn_trim);
    add("TEXT", 2, 2, b::fn_text);
    add("TEXTJOIN", 3, -1, b::fn_textjoin);
    add("TEXTSPLIT", 2, 6, b::fn_textsplit);
    add("HSTACK", 1, -1, b::fn_hstack);
    add("VSTACK", 1, -1, b::fn_vstack);
    add("INDEX", 2, 3, b::fn_index);
    add("ROWS", 1, 1, b::fn_rows);
    add("COLUMNS", 1, 1, b::fn_columns);
    add("SEQUENCE", 1, 4, b::fn_sequence);
    add("TRANSPOSE", 1, 1, b::fn_transpose);
    add("UNIQUE", 1, 3, b::fn_unique);
    add("SORT", 1, 4, b::fn_sort);
    add("FILTER", 2, 3, b::fn_filter);
    add("XMATCH", 2, 4, b::fn_xmatch);
    add("BYROW", 2, 2, b::fn_byrow);
    add("BYCOL", 2, 2, b::fn_bycol);
    add("MAP", 2, -1, b::fn_map);
    add("REDUCE", 3, 3, b::fn_reduce);
    add("SCAN", 3, 3, b::fn_scan);
    add("MAKEARRAY", 3, 3, b::fn_makearray);
    add("DATE", 3, 3, b::fn_date);
    add("YEAR", 1, 1, b::fn_year);
    add("MONTH", 1, 1, b::fn_month);
    add("DAY", 1, 1, b::fn_day);
    add("WEEKDAY", 1, 2, b::fn_weekday);
    add("EDATE", 2, 2, b::fn_edate);
    add("EOMONTH", 2, 2, b::fn_eomonth);
    return m;
  }();
  return catalog;
}

inline bool is_builtin_name(std::string_view name) {
  const std::string folded = ci_fold(name);
  if (folded == "lambda" || folded == "let" || folded == "if" ||
      folded == "iferror" || folded == "choose")
    return true;
  return builtin_catalog().count(folded) > 0;
}

}  // namespace bxl
