#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace bxl {

/// Calendar support for the 1900 date system. A date is an integer count of
/// days since 1899-12-30, which puts 1900-03-01 at 61 in agreement with the
/// usual spreadsheet numbering from there on. Serials below 61 fall inside
/// the system's phantom-leap-day window and are rejected wherever a date is
/// constructed, so every representable date maps to exactly one civil date.
namespace dates {

struct Civil {
  int year = 0;
  int month = 0;  // 1..12
  int day = 0;    // 1..31
  bool operator==(const Civil&) const = default;
};

constexpr int kMinSerial = 61;  // 1900-03-01

// Days from 1970-01-01 for the proleptic Gregorian calendar
// (Howard Hinnant's civil-days algorithm).
constexpr std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

constexpr Civil civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return Civil{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

constexpr std::int64_t kEpochShift = days_from_civil(1899, 12, 30);

constexpr std::int64_t serial_from_civil(int y, int m, int d) {
  return days_from_civil(y, m, d) - kEpochShift;
}

constexpr Civil civil_from_serial(std::int64_t serial) {
  return civil_from_days(serial + kEpochShift);
}

constexpr bool is_leap(int y) {
  return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

constexpr int days_in_month(int y, int m) {
  constexpr int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return (m == 2 && is_leap(y)) ? 29 : lengths[m - 1];
}

constexpr bool valid_serial(std::int64_t serial) { return serial >= kMinSerial; }

/// DATE-style construction: out-of-range month and day roll over into
/// adjacent months/years (month 13 is January next year, day 0 is the last
/// day of the previous month).
constexpr std::int64_t serial_from_normalized(int y, int m, int d) {
  const int ym = y * 12 + (m - 1);
  const int ny = (ym >= 0 ? ym : ym - 11) / 12;
  const int nm = ym - ny * 12 + 1;
  return serial_from_civil(ny, nm, 1) + (d - 1);
}

/// Shifts a serial by whole months, clamping the day to the target month's
/// length (Jan-31 plus one month is Feb-28/29).
constexpr std::int64_t add_months_clamped(std::int64_t serial, int months) {
  const Civil c = civil_from_serial(serial);
  const int ym = c.year * 12 + (c.month - 1) + months;
  const int y = (ym >= 0 ? ym : ym - 11) / 12;
  const int m = ym - y * 12 + 1;
  const int d = c.day < days_in_month(y, m) ? c.day : days_in_month(y, m);
  return serial_from_civil(y, m, d);
}

/// Last day of the month `months` after the serial's month.
constexpr std::int64_t end_of_month(std::int64_t serial, int months) {
  const Civil c = civil_from_serial(serial);
  const int ym = c.year * 12 + (c.month - 1) + months;
  const int y = (ym >= 0 ? ym : ym - 11) / 12;
  const int m = ym - y * 12 + 1;
  return serial_from_civil(y, m, days_in_month(y, m));
}

/// Weekday with Sunday=1 .. Saturday=7.
constexpr int weekday_sun1(std::int64_t serial) {
  const int r = static_cast<int>(serial % 7);
  return r == 0 ? 7 : r;
}

/// Whole-month difference ignoring days: months(b) - months(a).
constexpr int month_span(std::int64_t a, std::int64_t b) {
  const Civil ca = civil_from_serial(a);
  const Civil cb = civil_from_serial(b);
  return (cb.year - ca.year) * 12 + (cb.month - ca.month);
}

namespace detail {
inline bool consume_int(std::string_view& s, int max_digits, int& out) {
  int n = 0;
  int digits = 0;
  while (!s.empty() && s.front() >= '0' && s.front() <= '9' && digits < max_digits) {
    n = n * 10 + (s.front() - '0');
    s.remove_prefix(1);
    ++digits;
  }
  if (digits == 0) return false;
  out = n;
  return true;
}
}  // namespace detail

/// Parses date text in exactly two layouts: ISO "2023-07-01" and US
/// "7/1/2023". Anything else (including two-digit years) is rejected so
/// text that happens to look date-ish never silently becomes a date.
inline std::optional<std::int64_t> parse_date_text(std::string_view s) {
  // Trim outer spaces; interior spaces are not tolerated.
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) return std::nullopt;

  int a = 0, b = 0, c = 0;
  std::string_view rest = s;
  if (!detail::consume_int(rest, 4, a)) return std::nullopt;
  if (rest.empty()) return std::nullopt;
  const char sep = rest.front();
  if (sep != '-' && sep != '/') return std::nullopt;
  rest.remove_prefix(1);
  if (!detail::consume_int(rest, 2, b)) return std::nullopt;
  if (rest.empty() || rest.front() != sep) return std::nullopt;
  rest.remove_prefix(1);
  if (!detail::consume_int(rest, 4, c)) return std::nullopt;
  if (!rest.empty()) return std::nullopt;

  int y, m, d;
  if (sep == '-') {
    y = a; m = b; d = c;
    if (c > 31) return std::nullopt;  // 2023-07-1999 is not a date
  } else {
    m = a; d = b; y = c;
    if (a > 12 || c < 100) return std::nullopt;
  }
  if (m < 1 || m > 12 || d < 1) return std::nullopt;
  if (y < 1899 || y > 9999) return std::nullopt;
  if (d > days_in_month(y, m)) return std::nullopt;
  const std::int64_t serial = serial_from_civil(y, m, d);
  if (!valid_serial(serial)) return std::nullopt;
  return serial;
}

/// Formats a serial as ISO yyyy-mm-dd (used for cache metadata; formula-level
/// formatting goes through TEXT).
inline std::string iso_text(std::int64_t serial) {
  const Civil c = civil_from_serial(serial);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", c.year, c.month, c.day);
  return std::string(buf);
}

}  // namespace dates
}  // namespace bxl
