#include <catch2/catch_amalgamated.hpp>

#include "bxl/dates.hpp"

using namespace bxl::dates;

TEST_CASE("serial anchors") {
  // 1900-03-01 is the first representable date.
  CHECK(serial_from_civil(1900, 3, 1) == 61);
  CHECK(kMinSerial == 61);
  // 1970-01-01 sits at the well-known offset.
  CHECK(serial_from_civil(1970, 1, 1) == 25569);
  CHECK(serial_from_civil(2023, 7, 1) == 45108);
  CHECK(serial_from_civil(2024, 6, 30) == 45473);
}

TEST_CASE("serial round trip across three centuries") {
  for (std::int64_t s = kMinSerial; s < kMinSerial + 120000; s += 7) {
    const Civil c = civil_from_serial(s);
    CHECK(serial_from_civil(c.year, c.month, c.day) == s);
    CHECK(c.day >= 1);
    CHECK(c.day <= days_in_month(c.year, c.month));
  }
}

TEST_CASE("serials are contiguous over month and year boundaries") {
  CHECK(serial_from_civil(1900, 2, 28) + 1 == serial_from_civil(1900, 3, 1) - 0);
  CHECK(civil_from_serial(serial_from_civil(2023, 12, 31) + 1) == Civil{2024, 1, 1});
  CHECK(civil_from_serial(serial_from_civil(2024, 2, 28) + 1) == Civil{2024, 2, 29});
  CHECK(civil_from_serial(serial_from_civil(2100, 2, 28) + 1) == Civil{2100, 3, 1});
}

TEST_CASE("normalized construction rolls over months and days") {
  CHECK(serial_from_normalized(2023, 13, 5) == serial_from_civil(2024, 1, 5));
  CHECK(serial_from_normalized(2023, 0, 5) == serial_from_civil(2022, 12, 5));
  CHECK(serial_from_normalized(2023, 2, 30) == serial_from_civil(2023, 3, 2));
  CHECK(serial_from_normalized(2023, 1, 0) == serial_from_civil(2022, 12, 31));
  CHECK(serial_from_normalized(2023, -10, 1) == serial_from_civil(2022, 2, 1));
}

TEST_CASE("month shifts clamp the day") {
  const auto jan31 = serial_from_civil(2023, 1, 31);
  CHECK(civil_from_serial(add_months_clamped(jan31, 1)) == Civil{2023, 2, 28});
  CHECK(civil_from_serial(add_months_clamped(jan31, 13)) == Civil{2024, 2, 29});
  CHECK(civil_from_serial(add_months_clamped(jan31, 2)) == Civil{2023, 3, 31});
  const auto jul1 = serial_from_civil(2023, 7, 1);
  CHECK(civil_from_serial(add_months_clamped(jul1, -12)) == Civil{2022, 7, 1});
}

TEST_CASE("end of month") {
  const auto mid = serial_from_civil(2023, 7, 14);
  CHECK(civil_from_serial(end_of_month(mid, 0)) == Civil{2023, 7, 31});
  CHECK(civil_from_serial(end_of_month(mid, -5)) == Civil{2023, 2, 28});
  CHECK(civil_from_serial(end_of_month(mid, 7)) == Civil{2024, 2, 29});
}

TEST_CASE("weekday") {
  // 1900-03-01 was a Thursday, 2023-07-01 a Saturday, 2023-07-02 a Sunday.
  CHECK(weekday_sun1(serial_from_civil(1900, 3, 1)) == 5);
  CHECK(weekday_sun1(serial_from_civil(2023, 7, 1)) == 7);
  CHECK(weekday_sun1(serial_from_civil(2023, 7, 2)) == 1);
  CHECK(weekday_sun1(serial_from_civil(2026, 8, 21)) == 6);
}

TEST_CASE("month span ignores days") {
  CHECK(month_span(serial_from_civil(2023, 1, 31), serial_from_civil(2023, 2, 1)) == 1);
  CHECK(month_span(serial_from_civil(2023, 7, 1), serial_from_civil(2024, 6, 30)) == 11);
  CHECK(month_span(serial_from_civil(2023, 7, 1), serial_from_civil(2023, 7, 31)) == 0);
}

TEST_CASE("date text parses ISO and US forms only") {
  CHECK(parse_date_text("2023-07-01") == serial_from_civil(2023, 7, 1));
  CHECK(parse_date_text("7/1/2023") == serial_from_civil(2023, 7, 1));
  CHECK(parse_date_text("07/01/2022") == serial_from_civil(2022, 7, 1));
  CHECK(parse_date_text("12/31/2023") == serial_from_civil(2023, 12, 31));
  CHECK(parse_date_text(" 2023-07-01 ") == serial_from_civil(2023, 7, 1));

  CHECK(!parse_date_text(""));
  CHECK(!parse_date_text("hello"));
  CHECK(!parse_date_text("2023/07/01"));     // slashes demand the US order
  CHECK(!parse_date_text("01-07-2023"));     // dashes demand ISO order
  CHECK(!parse_date_text("7/1/23"));         // two-digit years are ambiguous
  CHECK(!parse_date_text("13/1/2023"));
  CHECK(!parse_date_text("2023-02-29"));
  CHECK(!parse_date_text("2023-07-01x"));
  CHECK(!parse_date_text("1900-01-15"));     // below the representable floor
  CHECK(parse_date_text("1900-03-01") == 61);
}

TEST_CASE("iso text") {
  CHECK(iso_text(serial_from_civil(2023, 7, 1)) == "2023-07-01");
  CHECK(iso_text(61) == "1900-03-01");
}
