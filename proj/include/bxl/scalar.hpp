#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace bxl {

/// Spreadsheet error codes. Error scalars carry one of these and propagate
/// through arithmetic instead of aborting evaluation.
enum class ErrorCode : std::uint8_t {
  Value,     // #VALUE!
  NA,        // #N/A
  Ref,       // #REF!
  Name,      // #NAME?
  Num,       // #NUM!
  Calc,      // #CALC!
  Spill,     // #SPILL!
  Div0,      // #DIV/0!
};

inline std::string_view error_code_text(ErrorCode c) {
  switch (c) {
    case ErrorCode::Value: return "#VALUE!";
    case ErrorCode::NA: return "#N/A";
    case ErrorCode::Ref: return "#REF!";
    case ErrorCode::Name: return "#NAME?";
    case ErrorCode::Num: return "#NUM!";
    case ErrorCode::Calc: return "#CALC!";
    case ErrorCode::Spill: return "#SPILL!";
    case ErrorCode::Div0: return "#DIV/0!";
  }
  return "#VALUE!";
}

inline char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

/// ASCII-case-insensitive equality. Non-ASCII bytes compare exactly, so
/// names differing only in lambda glyphs stay distinct.
inline bool ci_equal(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (ascii_lower(a[i]) != ascii_lower(b[i])) return false;
  return true;
}

inline std::string ci_fold(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = ascii_lower(c);
  return out;
}

/// Recognizes an error literal, case-insensitively ("#Value!" lexes like
/// "#VALUE!").
inline std::optional<ErrorCode> parse_error_code(std::string_view text) {
  struct Entry { std::string_view name; ErrorCode code; };
  static constexpr Entry kCodes[] = {
      {"#VALUE!", ErrorCode::Value}, {"#N/A", ErrorCode::NA},
      {"#REF!", ErrorCode::Ref},     {"#NAME?", ErrorCode::Name},
      {"#NUM!", ErrorCode::Num},     {"#CALC!", ErrorCode::Calc},
      {"#SPILL!", ErrorCode::Spill}, {"#DIV/0!", ErrorCode::Div0},
  };
  for (const auto& e : kCodes)
    if (ci_equal(e.name, text)) return e.code;
  return std::nullopt;
}

struct Blank {
  bool operator==(const Blank&) const = default;
};

/// Marker bound to an optional lambda parameter the caller left out.
/// Observable only through ISOMITTED; everywhere else it behaves as Blank.
struct Omitted {
  bool operator==(const Omitted&) const = default;
};

/// One grid cell's worth of data: a number (dates are 1900-system serials),
/// text, a boolean, an error, or nothing.
class Scalar {
 public:
  using Rep = std::variant<Blank, double, std::string, bool, ErrorCode, Omitted>;

  Scalar() : rep_(Blank{}) {}
  Scalar(double v) : rep_(v) {}
  Scalar(std::string v) : rep_(std::move(v)) {}
  Scalar(std::string_view v) : rep_(std::string(v)) {}
  Scalar(const char* v) : rep_(std::string(v)) {}
  Scalar(bool v) : rep_(v) {}
  Scalar(ErrorCode v) : rep_(v) {}
  Scalar(Blank) : rep_(Blank{}) {}
  Scalar(Omitted) : rep_(Omitted{}) {}

  static Scalar number(double v) {
    if (!std::isfinite(v)) return Scalar(ErrorCode::Num);
    return Scalar(v);
  }

  bool is_blank() const { return std::holds_alternative<Blank>(rep_); }
  bool is_omitted() const { return std::holds_alternative<Omitted>(rep_); }
  bool is_blank_like() const { return is_blank() || is_omitted(); }
  bool is_number() const { return std::holds_alternative<double>(rep_); }
  bool is_text() const { return std::holds_alternative<std::string>(rep_); }
  bool is_bool() const { return std::holds_alternative<bool>(rep_); }
  bool is_error() const { return std::holds_alternative<ErrorCode>(rep_); }

  double number() const { return std::get<double>(rep_); }
  const std::string& text() const { return std::get<std::string>(rep_); }
  bool boolean() const { return std::get<bool>(rep_); }
  ErrorCode error() const { return std::get<ErrorCode>(rep_); }

  const Rep& rep() const { return rep_; }

  bool operator==(const Scalar& other) const = default;

 private:
  Rep rep_;
};

}  // namespace bxl
