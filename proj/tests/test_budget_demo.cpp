#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bxl/budget_demo.hpp"
#include "bxl/recalc.hpp"
#include "oracles.hpp"

#include "catch2/catch_amalgamated.hpp"

using namespace bxl;

namespace {

std::int64_t serial(int y, int m, int d) { return dates::serial_from_civil(y, m, d); }

const std::int64_t kYearStart = dates::serial_from_civil(2023, 7, 1);
const std::int64_t kYearEnd = dates::serial_from_civil(2024, 6, 30);

const Workbook& demo() {
  static const Workbook wb = budget_demo_workbook();
  return wb;
}

Recalculator& engine() {
  static Recalculator* shared = [] {
    static Recalculator inner(demo());
    inner.run();
    return &inner;
  }();
  return *shared;
}

const RecalcResult& result() { return engine().result(); }

const Array& grid(const Value& v) {
  const Array* a = std::get_if<Array>(&v);
  REQUIRE(a != nullptr);
  return *a;
}

Scalar cell(const Value& v, std::size_t row, std::size_t col) {
  const Array& a = grid(v);
  REQUIRE(row < a.rows());
  REQUIRE(col < a.cols());
  return a.at(row, col);
}

const Array& named(const std::string& name) {
  const Value* v = result().name_value(name);
  REQUIRE(v != nullptr);
  return grid(*v);
}

double named_num(const std::string& name) {
  const Value* v = result().name_value(name);
  REQUIRE(v != nullptr);
  const Scalar* s = std::get_if<Scalar>(v);
  REQUIRE(s != nullptr);
  REQUIRE(s->is_number());
  return s->number();
}

double num_at(const Array& a, std::size_t row, std::size_t col) {
  REQUIRE(row < a.rows());
  REQUIRE(col < a.cols());
  const Scalar s = a.at(row, col);
  REQUIRE(s.is_number());
  return s.number();
}

bool close(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

/// Occurrence totals per budget item over the demo fiscal year, recomputed
/// day by day outside the engine.
std::vector<std::vector<double>> item_month_totals() {
  const auto items = demo_detail::budget_items();
  std::vector<std::vector<double>> buckets(items.size(), std::vector<double>(12, 0.0));
  for (std::size_t i = 0; i < items.size(); ++i) {
    std::optional<std::int64_t> last;
    if (items[i].last_date != 0) last = items[i].last_date;
    for (std::int64_t day = kYearStart; day <= kYearEnd; ++day) {
      if (!oracle::is_occurrence(day, items[i].first_date, last, items[i].schedule[0]))
        continue;
      const auto civil = dates::civil_from_serial(day);
      const int month_index = (civil.year - 2023) * 12 + civil.month - 7;
      buckets[i][std::size_t(month_index)] += items[i].ext_amount;
    }
  }
  return buckets;
}

std::vector<double> item_totals() {
  std::vector<double> totals;
  for (const auto& row : item_month_totals()) {
    double total = 0;
    for (double v : row) total += v;
    totals.push_back(total);
  }
  return totals;
}

}  // namespace

TEST_CASE("demo workbook recalculates cleanly") {
  REQUIRE(result().converged);
  CHECK(result().passes <= 4);

  for (const auto& [key, scalar] : result().grid) {
    if (!scalar.is_error()) continue;
    INFO(result().sheet_names[std::size_t(key.sheet)]
         << "!" << a1_text(key.row, key.col) << " shows "
         << error_code_text(scalar.error()));
    CHECK(!scalar.is_error());
  }
}

TEST_CASE("demo timeline spans the fiscal year day by day") {
  const Array& dates = named("Dates");
  REQUIRE(dates.rows() == 1);
  REQUIRE(dates.cols() == 366);
  CHECK(num_at(dates, 0, 0) == double(kYearStart));
  CHECK(num_at(dates, 0, 365) == double(kYearEnd));

  const Array& starts = named("PeriodStarts");
  REQUIRE(starts.rows() == 1);
  REQUIRE(starts.cols() == 12);
  for (int m = 0; m < 12; ++m) {
    const int year = m < 6 ? 2023 : 2024;
    const int month = m < 6 ? 7 + m : m - 5;
    CHECK(num_at(starts, 0, std::size_t(m)) == double(serial(year, month, 1)));
  }

  const Array& ends = named("PeriodEnds");
  REQUIRE(ends.cols() == 12);
  CHECK(num_at(ends, 0, 0) == double(serial(2023, 7, 31)));
  CHECK(num_at(ends, 0, 7) == double(serial(2024, 2, 29)));
  CHECK(num_at(ends, 0, 11) == double(kYearEnd));
  for (int m = 0; m + 1 < 12; ++m)
    CHECK(num_at(ends, 0, std::size_t(m)) + 1 == num_at(starts, 0, std::size_t(m) + 1));

  const Array& labels = named("PeriodLabels");
  REQUIRE(labels.cols() == 12);
  CHECK(labels.at(0, 0) == Scalar("2023-Jul"));
  CHECK(labels.at(0, 5) == Scalar("2023-Dec"));
  CHECK(labels.at(0, 11) == Scalar("2024-Jun"));
}

TEST_CASE("demo item schedule matches a day by day recomputation") {
  const Array& schedule = named("ItemSchedule");
  REQUIRE(schedule.rows() == 21);
  REQUIRE(schedule.cols() == 366);

  const auto items = demo_detail::budget_items();
  const Array& dates = named("Dates");
  for (std::size_t i = 0; i < items.size(); ++i) {
    std::optional<std::int64_t> last;
    if (items[i].last_date != 0) last = items[i].last_date;
    for (std::size_t d = 0; d < 366; ++d) {
      const auto day = std::int64_t(num_at(dates, 0, d));
      const bool hit = oracle::is_occurrence(day, items[i].first_date, last,
                                             items[i].schedule[0]);
      const double expected = hit ? items[i].ext_amount : 0.0;
      if (num_at(schedule, i, d) != expected) {
        INFO("item " << items[i].id << " day " << day);
        REQUIRE(num_at(schedule, i, d) == expected);
      }
    }
  }
}

TEST_CASE("demo fiscal year totals per item") {
  const std::vector<double> totals = item_totals();
  REQUIRE(totals.size() == 21);

  const std::vector<double> pinned = {312000, 0,   2400, 103913.04, 1500, 450, 530,
                                      10000,  18000, 13465.44, 200, 500, 125, 200,
                                      150,    150, 50,   150,  150, 100, 2500};
  REQUIRE(pinned.size() == 21);
  for (std::size_t i = 0; i < pinned.size(); ++i) {
    INFO("item " << i + 1);
    CHECK(close(totals[i], pinned[i]));
  }

  const CellResult* sums = result().anchor_at("ItemSchedule", 6, 4);
  REQUIRE(sums != nullptr);
  const Array& rows = grid(sums->value);
  REQUIRE(rows.rows() == 21);
  REQUIRE(rows.cols() == 1);
  for (std::size_t i = 0; i < 21; ++i) {
    INFO("item " << i + 1);
    CHECK(close(num_at(rows, i, 0), pinned[i]));
  }
}

TEST_CASE("demo monthly buckets match a day by day recomputation") {
  const Array& summary = named("ItemSummary");
  REQUIRE(summary.rows() == 21);
  REQUIRE(summary.cols() == 12);

  const auto expected = item_month_totals();
  for (std::size_t i = 0; i < 21; ++i)
    for (std::size_t m = 0; m < 12; ++m) {
      INFO("item " << i + 1 << " month " << m);
      CHECK(close(num_at(summary, i, m), expected[i][m]));
    }
}

TEST_CASE("demo pay schedule shows two three payday months") {
  const Array& summary = named("ItemSummary");
  int heavy = 0;
  for (std::size_t m = 0; m < 12; ++m) {
    const double wages = num_at(summary, 0, m);
    CHECK((wages == 24000.0 || wages == 36000.0));
    if (wages == 36000.0) ++heavy;
  }
  CHECK(heavy == 2);
  CHECK(num_at(summary, 0, 5) == 36000.0);
  CHECK(num_at(summary, 0, 10) == 36000.0);
}

TEST_CASE("demo annual items land once in the first month") {
  const Array& summary = named("ItemSummary");
  const auto check_annual = [&](std::size_t item_row, double amount) {
    CHECK(num_at(summary, item_row, 0) == amount);
    for (std::size_t m = 1; m < 12; ++m) CHECK(num_at(summary, item_row, m) == 0.0);
  };
  check_annual(4, 1500.0);
  check_annual(5, 450.0);
}

TEST_CASE("demo weekly fuel follows the Saturday count") {
  const Array& summary = named("ItemSummary");
  const std::vector<double> saturdays = {5, 4, 5, 4, 4, 5, 4, 4, 5, 4, 4, 5};
  for (std::size_t m = 0; m < 12; ++m)
    CHECK(num_at(summary, 6, m) == 10.0 * saturdays[m]);
}

TEST_CASE("demo rollups conserve the grand total") {
  const double grand = named_num("GrandTotal");
  CHECK(close(grand, 466533.48));

  const auto check_zero = [&](const std::string& formula) {
    const Value v = engine().evaluate_on(formula, "Inputs");
    const Scalar* s = std::get_if<Scalar>(&v);
    REQUIRE(s != nullptr);
    REQUIRE(s->is_number());
    INFO(formula);
    CHECK(std::abs(s->number()) <= 1e-9 * std::max(1.0, grand));
  };
  check_zero("=SUM(ItemSchedule) - SUM(ItemSummary)");
  check_zero("=SUM(ItemSummary) - SUM(BudgetSummary)");
  check_zero("=SUM(ItemSchedule) - GrandTotal");
}

TEST_CASE("demo accounts list is ascending and labeled") {
  const Array& accounts = named("Accounts");
  REQUIRE(accounts.rows() == 11);
  REQUIRE(accounts.cols() == 1);
  const std::vector<double> expected = {510000, 514000, 520000, 550100,
                                        550300, 551540, 551550, 552300,
                                        552320, 554210, 554220};
  for (std::size_t g = 0; g < expected.size(); ++g)
    CHECK(num_at(accounts, g, 0) == expected[g]);

  const Array& labels = named("AccountNames");
  REQUIRE(labels.rows() == 11);
  const std::vector<std::string> names = {
      "SALARIES",        "OVERTIME",
      "FRINGE EXPENSE",  "PRINT & OFFICE SUPPLIES",
      "POSTAGE",         "VEHICLE FUEL",
      "EQUIPMENT REPAIR", "TELEPHONE",
      "TELEPHONE STIPEND", "DUES AND MEMBERSHIP",
      "TRAVEL"};
  for (std::size_t g = 0; g < names.size(); ++g)
    CHECK(labels.at(g, 0) == Scalar(names[g]));
}

TEST_CASE("demo account buckets sum their items") {
  const Array& budget = named("BudgetSummary");
  REQUIRE(budget.rows() == 11);
  REQUIRE(budget.cols() == 12);

  const auto items = demo_detail::budget_items();
  const auto buckets = item_month_totals();
  const Array& accounts = named("Accounts");
  for (std::size_t g = 0; g < 11; ++g)
    for (std::size_t m = 0; m < 12; ++m) {
      double expected = 0;
      for (std::size_t i = 0; i < items.size(); ++i)
        if (double(items[i].account) == num_at(accounts, g, 0)) expected += buckets[i][m];
      INFO("account row " << g << " month " << m);
      CHECK(close(num_at(budget, g, m), expected));
    }
}

TEST_CASE("demo actuals ledger stays inside the fiscal year") {
  const Table* table = demo().find_table("tblActuals");
  REQUIRE(table != nullptr);
  REQUIRE(table->columns == std::vector<std::string>{"Account", "Date", "Amount"});
  REQUIRE(!table->rows.empty());

  std::set<double> seen;
  for (const auto& row : table->rows) {
    REQUIRE(row.size() == 3);
    REQUIRE(row[0].is_number());
    REQUIRE(row[1].is_number());
    REQUIRE(row[2].is_number());
    seen.insert(row[0].number());
    CHECK(row[1].number() >= double(kYearStart));
    CHECK(row[1].number() <= double(kYearEnd));
    CHECK(row[2].number() > 0.0);
  }
  CHECK(seen.size() == 11);
}

TEST_CASE("demo spending buckets match a direct recomputation") {
  const Table* table = demo().find_table("tblActuals");
  REQUIRE(table != nullptr);
  std::vector<Scalar> keys;
  std::vector<std::int64_t> dates;
  std::vector<double> amounts;
  double ledger_total = 0;
  for (const auto& row : table->rows) {
    keys.push_back(row[0]);
    dates.push_back(std::int64_t(row[1].number()));
    amounts.push_back(row[2].number());
    ledger_total += row[2].number();
  }
  std::vector<std::int64_t> starts, ends;
  for (int m = 0; m < 12; ++m) {
    const Array& s = named("PeriodStarts");
    const Array& e = named("PeriodEnds");
    starts.push_back(std::int64_t(num_at(s, 0, std::size_t(m))));
    ends.push_back(std::int64_t(num_at(e, 0, std::size_t(m))));
  }
  const auto expected = oracle::sum_groups_periods(keys, dates, amounts, starts, ends);

  const Array& actuals = named("ActualsSummary");
  REQUIRE(actuals.rows() == 11);
  REQUIRE(actuals.cols() == 12);
  double bucket_total = 0;
  for (std::size_t g = 0; g < 11; ++g)
    for (std::size_t m = 0; m < 12; ++m) {
      INFO("account row " << g << " month " << m);
      CHECK(close(num_at(actuals, g, m), expected[g][m]));
      bucket_total += num_at(actuals, g, m);
    }
  CHECK(close(bucket_total, ledger_total));
}

TEST_CASE("demo balances equal budget less spending") {
  const Array& budget = named("BudgetSummary");
  const Array& actuals = named("ActualsSummary");
  const Array& balances = named("BalancesSummary");
  REQUIRE(balances.rows() == 11);
  REQUIRE(balances.cols() == 12);
  for (std::size_t g = 0; g < 11; ++g)
    for (std::size_t m = 0; m < 12; ++m)
      CHECK(close(num_at(balances, g, m),
                  num_at(budget, g, m) - num_at(actuals, g, m)));
}

TEST_CASE("demo summary report lays out three rows per account") {
  const CellResult* anchor = result().anchor_at("Rpt Summary", 0, 0);
  REQUIRE(anchor != nullptr);
  const Array& report = grid(anchor->value);
  REQUIRE(report.rows() == 34);
  REQUIRE(report.cols() == 15);

  const Array& labels = named("PeriodLabels");
  CHECK(report.at(0, 0) == Scalar("Accounts"));
  CHECK(report.at(0, 1) == Scalar(""));
  for (std::size_t m = 0; m < 12; ++m) CHECK(report.at(0, 2 + m) == labels.at(0, m));
  CHECK(report.at(0, 14) == Scalar("Total"));

  CHECK(report.at(1, 0) == Scalar("510000 SALARIES"));
  CHECK(report.at(31, 0) == Scalar("554220 TRAVEL"));

  const Array& budget = named("BudgetSummary");
  const Array& actuals = named("ActualsSummary");
  for (std::size_t g = 0; g < 11; ++g) {
    const std::size_t base = 1 + 3 * g;
    CHECK(report.at(base, 1) == Scalar("Budgeted"));
    CHECK(report.at(base + 1, 1) == Scalar("Less Expense"));
    CHECK(report.at(base + 2, 1) == Scalar("Subtotal"));
    double budget_total = 0;
    double spent_total = 0;
    for (std::size_t m = 0; m < 12; ++m) {
      const double b = num_at(budget, g, m);
      const double a = num_at(actuals, g, m);
      budget_total += b;
      spent_total += a;
      CHECK(close(num_at(report, base, 2 + m), b));
      CHECK(close(num_at(report, base + 1, 2 + m), -a));
      CHECK(close(num_at(report, base + 2, 2 + m), b - a));
    }
    CHECK(close(num_at(report, base, 14), budget_total));
    CHECK(close(num_at(report, base + 1, 14), -spent_total));
    CHECK(close(num_at(report, base + 2, 14), budget_total - spent_total));
  }
}

TEST_CASE("demo detail report walks items then account summaries") {
  const CellResult* anchor = result().anchor_at("Rpt Detail", 0, 0);
  REQUIRE(anchor != nullptr);
  const Array& report = grid(anchor->value);
  REQUIRE(report.rows() == 66);
  REQUIRE(report.cols() == 15);

  CHECK(report.at(0, 0) == Scalar("Account"));
  CHECK(report.at(0, 1) == Scalar("Description"));
  CHECK(report.at(0, 14) == Scalar("Total"));

  const auto items = demo_detail::budget_items();
  const Array& summary = named("ItemSummary");
  const Array& accounts = named("Accounts");
  const Array& actuals = named("ActualsSummary");

  std::size_t row = 1;
  std::size_t item = 0;
  for (std::size_t g = 0; g < 11; ++g) {
    const double account = num_at(accounts, g, 0);
    std::vector<double> group_budget(12, 0.0);
    while (item < items.size() && double(items[item].account) == account) {
      CHECK(report.at(row, 0) == Scalar(account));
      CHECK(report.at(row, 1) == Scalar(std::string(items[item].expense)));
      double total = 0;
      for (std::size_t m = 0; m < 12; ++m) {
        const double v = num_at(summary, item, m);
        group_budget[m] += v;
        total += v;
        CHECK(close(num_at(report, row, 2 + m), v));
      }
      CHECK(close(num_at(report, row, 14), total));
      ++item;
      ++row;
    }

    CHECK(report.at(row, 1) == Scalar("Budgeted Subtotal"));
    CHECK(report.at(row + 1, 1) == Scalar("Less Spent"));
    CHECK(report.at(row + 2, 1) == Scalar("Accounts Subtotal"));
    CHECK(report.at(row + 3, 1) == Scalar("Cumulative Total"));

    double running = 0;
    double budget_total = 0;
    double spent_total = 0;
    for (std::size_t m = 0; m < 12; ++m) {
      const double b = group_budget[m];
      const double a = num_at(actuals, g, m);
      budget_total += b;
      spent_total += a;
      running += b - a;
      CHECK(close(num_at(report, row, 2 + m), b));
      CHECK(close(num_at(report, row + 1, 2 + m), -a));
      CHECK(close(num_at(report, row + 2, 2 + m), b - a));
      CHECK(close(num_at(report, row + 3, 2 + m), running));
    }
    CHECK(close(num_at(report, row + 3, 14), budget_total - spent_total));
    row += 4;
  }
  CHECK(item == 21);
  CHECK(row == 66);
}

TEST_CASE("demo item listing spills id through description") {
  const CellResult* anchor = result().anchor_at("ItemSchedule", 6, 0);
  REQUIRE(anchor != nullptr);
  const Array& listing = grid(anchor->value);
  REQUIRE(listing.rows() == 21);
  REQUIRE(listing.cols() == 4);
  CHECK(listing.at(0, 0) == Scalar(1.0));
  CHECK(listing.at(0, 3) == Scalar("Staff Wages"));
  CHECK(listing.at(20, 1) == Scalar(554220.0));
  CHECK(listing.at(20, 3) == Scalar("MS Training"));
}

TEST_CASE("demo budget scales linearly with item amounts") {
  Workbook doubled = budget_demo_workbook();
  Table* table = nullptr;
  for (Table& t : doubled.tables)
    if (ci_equal(t.name, "tblBI")) table = &t;
  REQUIRE(table != nullptr);
  const int ext = table->column_index("Ext.Amt.");
  REQUIRE(ext >= 0);
  for (auto& row : table->rows) {
    REQUIRE(row[std::size_t(ext)].is_number());
    row[std::size_t(ext)] = Scalar(row[std::size_t(ext)].number() * 2.0);
  }

  Recalculator scaled(doubled);
  const RecalcResult& outcome = scaled.run();
  REQUIRE(outcome.converged);
  const Value* grand = outcome.name_value("GrandTotal");
  REQUIRE(grand != nullptr);
  const Scalar* s = std::get_if<Scalar>(grand);
  REQUIRE(s != nullptr);
  REQUIRE(s->is_number());
  CHECK(close(s->number(), 2.0 * named_num("GrandTotal")));
}
