#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bxl/dates.hpp"
#include "bxl/stdlib_bx.hpp"
#include "bxl/workbook.hpp"

/// Demo workbook shipped with the bxl tool: a small town IT department
/// budget that exercises the BXD and BXR component libraries end to end.
/// Budget line items fan out to a daily occurrence schedule, roll up into
/// monthly buckets per item and per account, meet a synthetic actuals
/// ledger, and land in two formatted reports.

namespace bxl {

namespace demo_detail {

inline void put_formula(Sheet& sheet, const char* addr, std::string formula) {
  sheet.cells[*parse_a1(addr)] = CellContent{std::move(formula), Scalar()};
}

inline void put_text(Sheet& sheet, const char* addr, std::string text) {
  sheet.cells[*parse_a1(addr)] = CellContent{"", Scalar(std::move(text))};
}

inline void put_number(Sheet& sheet, const char* addr, double value) {
  sheet.cells[*parse_a1(addr)] = CellContent{"", Scalar(value)};
}

/// One budget line item. A last date of zero means the item never expires.
struct BudgetItem {
  int id;
  int account;
  const char* account_name;
  const char* expense;
  double unit_price;
  double qty;
  const char* uqm;
  double ext_amount;
  const char* schedule;
  std::int64_t first_date;
  std::int64_t last_date;
};

inline std::vector<BudgetItem> budget_items() {
  const auto day = [](int y, int m, int d) {
    return dates::serial_from_civil(y, m, d);
  };
  return {
      {1, 510000, "SALARIES", "Staff Wages", 12000, 1, "Bi-Wk", 12000, "B",
       day(2022, 7, 1), 0},
      {2, 510000, "SALARIES", "Summer Intern", 20, 4, "Hrs/Day", 80, "X",
       day(2023, 5, 1), day(2023, 8, 30)},
      {3, 514000, "OVERTIME", "OVERTIME", 200, 1, "Ea", 200, "M",
       day(2022, 7, 1), 0},
      {4, 520000, "FRINGE EXPENSE", "FRINGE EXPENSE", 8659.42, 1, "Ea",
       8659.42, "M", day(2022, 7, 1), 0},
      {5, 550100, "PRINT & OFFICE SUPPLIES", "PRINT & OFFICE SUPPLIES", 1500,
       1, "Yr", 1500, "A", day(2020, 7, 1), 0},
      {6, 550300, "POSTAGE", "POSTAGE", 450, 1, "Yr", 450, "A",
       day(2020, 7, 1), 0},
      {7, 551540, "VEHICLE FUEL", "Town owned vehicle fuel", 10, 1, "Ea", 10,
       "W", day(2023, 7, 1), 0},
      {8, 551550, "EQUIPMENT REPAIR", "EQUIPMENT REPAIR", 10000, 1, "Yr",
       10000, "A", day(2020, 7, 1), 0},
      {9, 552300, "TELEPHONE", "Town owned cellphone", 125, 12, "M", 1500,
       "M", day(2022, 7, 1), 0},
      {10, 552320, "TELEPHONE STIPEND",
       "Staff member's personal phone reimbursement", 93.51, 12, "M",
       1122.12, "M", day(2020, 7, 1), 0},
      {11, 554210, "DUES AND MEMBERSHIP", "Virginia Local Gov IT Conference",
       200, 1, "Yr", 200, "A", day(2020, 7, 1), 0},
      {12, 554210, "DUES AND MEMBERSHIP",
       "Roanoke Blacksburg Technology Council", 500, 1, "Yr", 500, "A",
       day(2020, 7, 1), 0},
      {13, 554210, "DUES AND MEMBERSHIP", "COV Security", 125, 1, "Yr", 125,
       "A", day(2020, 7, 1), 0},
      {14, 554210, "DUES AND MEMBERSHIP", "NCLGISA-GMIS", 200, 1, "Yr", 200,
       "A", day(2020, 7, 1), 0},
      {15, 554220, "TRAVEL", "Training and Certification - NCLGISA", 150, 1,
       "Yr", 150, "A", day(2020, 7, 1), 0},
      {16, 554220, "TRAVEL", "Training and Certification - NCLGISA", 150, 1,
       "Yr", 150, "A", day(2020, 7, 1), 0},
      {17, 554220, "TRAVEL", "Virginia Local Gov IT Conference", 50, 1, "Yr",
       50, "A", day(2020, 7, 1), 0},
      {18, 554220, "TRAVEL", "COV Security", 150, 1, "Yr", 150, "A",
       day(2020, 7, 1), 0},
      {19, 554220, "TRAVEL", "Roanoke Blacksburg Technology Council", 150, 1,
       "Yr", 150, "A", day(2020, 7, 1), 0},
      {20, 554220, "TRAVEL", "NCLGISA-GMIS", 100, 1, "Yr", 100, "A",
       day(2020, 7, 1), 0},
      {21, 554220, "TRAVEL", "MS Training", 2500, 1, "Yr", 2500, "A",
       day(2020, 7, 1), 0},
  };
}

inline Table budget_items_table() {
  Table table;
  table.name = "tblBI";
  table.sheet = "Inputs";
  table.origin_row = 1;
  table.origin_col = 4;
  table.columns = {"ID",        "Account",  "Account Description",
                   "Expense Description", "Unit Price", "Qty",
                   "UQM",       "Ext.Amt.", "Schedule",
                   "First Date", "Last Date"};
  for (const BudgetItem& item : budget_items()) {
    std::vector<Scalar> row;
    row.emplace_back(double(item.id));
    row.emplace_back(double(item.account));
    row.emplace_back(std::string(item.account_name));
    row.emplace_back(std::string(item.expense));
    row.emplace_back(item.unit_price);
    row.emplace_back(item.qty);
    row.emplace_back(std::string(item.uqm));
    row.emplace_back(item.ext_amount);
    row.emplace_back(std::string(item.schedule));
    row.emplace_back(double(item.first_date));
    row.push_back(item.last_date == 0 ? Scalar() : Scalar(double(item.last_date)));
    table.rows.push_back(std::move(row));
  }
  return table;
}

inline std::uint64_t demo_pick(std::uint64_t& state, std::uint64_t range) {
  state = state * 6364136223846793005ULL + 1442695040888963407ULL;
  return (state >> 33) % range;
}

/// Synthetic spending ledger for the demo fiscal year. Every budget account
/// gets one to eight transactions, dated inside the year and sized against
/// the account's per occurrence amounts, from a fixed seed so the demo is
/// identical on every run.
inline Table actuals_table() {
  const std::int64_t year_start = dates::serial_from_civil(2023, 7, 1);
  struct Txn {
    double account;
    double date;
    double amount;
  };
  std::vector<Txn> txns;
  std::uint64_t state = 20230701;
  const std::vector<BudgetItem> items = budget_items();
  std::size_t i = 0;
  while (i < items.size()) {
    const int account = items[i].account;
    double scale = 0;
    while (i < items.size() && items[i].account == account) {
      scale += items[i].ext_amount;
      ++i;
    }
    const std::uint64_t count = 1 + demo_pick(state, 8);
    for (std::uint64_t t = 0; t < count; ++t) {
      const double date = double(year_start + std::int64_t(demo_pick(state, 366)));
      const double pct = double(10 + demo_pick(state, 90));
      const double cents = std::floor(scale * pct + 0.5);
      txns.push_back(Txn{double(account), date, cents / 100.0});
    }
  }
  std::sort(txns.begin(), txns.end(), [](const Txn& a, const Txn& b) {
    if (a.account != b.account) return a.account < b.account;
    if (a.date != b.date) return a.date < b.date;
    return a.amount < b.amount;
  });

  Table table;
  table.name = "tblActuals";
  table.sheet = "Actuals";
  table.origin_row = 1;
  table.origin_col = 0;
  table.columns = {"Account", "Date", "Amount"};
  for (const Txn& txn : txns)
    table.rows.push_back({Scalar(txn.account), Scalar(txn.date), Scalar(txn.amount)});
  return table;
}

}  // namespace demo_detail

/// Builds the budget demo workbook. Nine sheets walk the data from inputs
/// to reports; every cross sheet handoff goes through a defined name.
inline Workbook budget_demo_workbook() {
  using demo_detail::put_formula;
  using demo_detail::put_number;
  using demo_detail::put_text;

  Workbook wb;
  import_standard_library(wb);

  Sheet& inputs = wb.ensure_sheet("Inputs");
  put_text(inputs, "A1", "Model Properties");
  put_text(inputs, "A2", "Name");
  put_text(inputs, "B2", "Value");
  put_text(inputs, "C2", "UOM");
  put_text(inputs, "A3", "Start");
  put_number(inputs, "B3", double(dates::serial_from_civil(2023, 7, 1)));
  put_text(inputs, "C3", "mm/dd/yyyy");
  put_text(inputs, "A4", "End");
  put_text(inputs, "C4", "mm/dd/yyyy");
  put_text(inputs, "A5", "Interval");
  put_text(inputs, "B5", "Months");
  put_text(inputs, "E1", "Budget Items");
  wb.tables.push_back(demo_detail::budget_items_table());

  Sheet& schedule = wb.ensure_sheet("ItemSchedule");
  put_text(schedule, "A4", "Grand Total");
  put_formula(schedule, "A5", "=SUM(ItemSchedule)");
  put_text(schedule, "E6", "Item Totals");
  put_formula(schedule, "A7", "=tblBI[[ID]:[Expense Description]]");
  put_formula(schedule, "E7", "=BXR.SumRowsλ(ItemSchedule)");
  put_formula(schedule, "F6", "=BXD.CreateStartDatesλ(Start, \"D\")");
  put_formula(schedule, "F7",
              "=BXD.IsOccurrenceDateλ(Dates, tblBI[First Date], "
              "tblBI[Last Date], tblBI[Schedule]) * tblBI[Ext.Amt.]");

  Sheet& by_period = wb.ensure_sheet("ItemsByPrd");
  put_text(by_period, "A4", "Grand Total");
  put_formula(by_period, "A5", "=SUM(ItemSummary)");
  put_formula(by_period, "A7", "=tblBI[[ID]:[Expense Description]]");
  put_text(by_period, "E3", "Totals");
  put_formula(by_period, "F3", "=BXR.SumColumnsλ(ItemSummary)");
  put_text(by_period, "E4", "Labels");
  put_formula(by_period, "F4", "=BXD.PeriodLabelλ(PeriodStarts, Interval)");
  put_text(by_period, "E5", "Starts");
  put_formula(by_period, "F5", "=BXD.CreateStartDatesλ(Start, End, Interval)");
  put_text(by_period, "E6", "Ends");
  put_formula(by_period, "F6", "=BXD.CreateEndDatesλ(PeriodStarts)");
  put_formula(by_period, "E7", "=BXR.SumRowsλ(ItemSummary)");
  put_formula(by_period, "F7",
              "=TRANSPOSE(BXR.SumGroupsλ(TRANSPOSE(MAP(Dates, "
              "LAMBDA(TheDate, SUM((PeriodStarts <= TheDate) * 1)))), "
              "TRANSPOSE(ItemSchedule)))");

  Sheet& budget = wb.ensure_sheet("BudgetByAcctPrd");
  put_text(budget, "A4", "Grand Total");
  put_formula(budget, "A5", "=SUM(BudgetSummary)");
  put_text(budget, "A6", "Account");
  put_formula(budget, "A7", "=SORT(UNIQUE(tblBI[Account]))");
  put_text(budget, "B6", "Description");
  put_formula(budget, "B7",
              "=MAP(Accounts, LAMBDA(TheKey, "
              "INDEX(tblBI[Account Description], "
              "XMATCH(TheKey, tblBI[Account]), 1)))");
  put_text(budget, "E3", "Totals");
  put_formula(budget, "F3", "=BXR.SumColumnsλ(BudgetSummary)");
  put_text(budget, "E4", "Labels");
  put_formula(budget, "F4", "=PeriodLabels");
  put_text(budget, "E5", "Starts");
  put_formula(budget, "F5", "=PeriodStarts");
  put_text(budget, "E6", "Ends");
  put_formula(budget, "F6", "=PeriodEnds");
  put_formula(budget, "E7", "=BXR.SumRowsλ(BudgetSummary)");
  put_formula(budget, "F7", "=BXR.SumGroupsλ(tblBI[Account], ItemSummary)");

  Sheet& actuals = wb.ensure_sheet("Actuals");
  put_text(actuals, "A1", "Actual Expenditures");
  wb.tables.push_back(demo_detail::actuals_table());

  Sheet& spent = wb.ensure_sheet("ActualsByAcctPrd");
  put_text(spent, "A4", "Grand Total");
  put_formula(spent, "A5", "=SUM(ActualsSummary)");
  put_text(spent, "A6", "Account");
  put_formula(spent, "A7", "=SORT(UNIQUE(tblActuals[Account]))");
  put_text(spent, "B6", "Description");
  put_formula(spent, "B7", "=AccountNames");
  put_text(spent, "E3", "Totals");
  put_formula(spent, "F3", "=BXR.SumColumnsλ(ActualsSummary)");
  put_text(spent, "E4", "Labels");
  put_formula(spent, "F4", "=PeriodLabels");
  put_formula(spent, "E7", "=BXR.SumRowsλ(ActualsSummary)");
  put_formula(spent, "F7",
              "=BXR.SumGroupsAndPeriodsλ(tblActuals[Account], "
              "tblActuals[Date], tblActuals[Amount], PeriodStarts, "
              "PeriodEnds)");

  Sheet& balances = wb.ensure_sheet("BalancesByAcctPrd");
  put_text(balances, "A4", "Grand Total");
  put_formula(balances, "A5", "=SUM(BalancesSummary)");
  put_text(balances, "A6", "Account");
  put_formula(balances, "A7", "=Accounts");
  put_text(balances, "B6", "Description");
  put_formula(balances, "B7", "=AccountNames");
  put_text(balances, "E3", "Totals");
  put_formula(balances, "F3", "=BXR.SumColumnsλ(BalancesSummary)");
  put_text(balances, "E4", "Labels");
  put_formula(balances, "F4", "=PeriodLabels");
  put_formula(balances, "E7", "=BXR.SumRowsλ(BalancesSummary)");
  put_formula(balances, "F7", "=BudgetSummary - ActualsSummary");

  Sheet& summary_report = wb.ensure_sheet("Rpt Summary");
  put_formula(summary_report, "A1",
              "=BXR.ReportGroupSummaryλ(Accounts, AccountNames, "
              "BudgetSummary, ActualsSummary, PeriodLabels)");

  Sheet& detail_report = wb.ensure_sheet("Rpt Detail");
  put_formula(detail_report, "A1",
              "=BXR.ReportGroupDetailOffsetλ(tblBI[Account], "
              "tblBI[Expense Description], ItemSummary, ActualsSummary, "
              "PeriodLabels)");

  wb.names = {
      {"Start", "=Inputs!B3"},
      {"End", "=Inputs!B4"},
      {"Interval", "=Inputs!B5"},
      {"Dates", "=ItemSchedule!F6#"},
      {"ItemSchedule", "=ItemSchedule!F7#"},
      {"GrandTotal", "=ItemSchedule!A5"},
      {"PeriodLabels", "=ItemsByPrd!F4#"},
      {"PeriodStarts", "=ItemsByPrd!F5#"},
      {"PeriodEnds", "=ItemsByPrd!F6#"},
      {"ItemSummary", "=ItemsByPrd!F7#"},
      {"Accounts", "=BudgetByAcctPrd!A7#"},
      {"AccountNames", "=BudgetByAcctPrd!B7#"},
      {"BudgetSummary", "=BudgetByAcctPrd!F7#"},
      {"ActualsSummary", "=ActualsByAcctPrd!F7#"},
      {"BalancesSummary", "=BalancesByAcctPrd!F7#"},
  };
  return wb;
}

}  // namespace bxl
