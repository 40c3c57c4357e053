#pragma once

// Independent reimplementations of the component library contracts. The
// equivalence tests evaluate each shipped formula over randomized inputs and
// require the results to match these loop-based versions.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "bxl/dates.hpp"
#include "bxl/scalar.hpp"
#include "bxl/value.hpp"

namespace oracle {

using Grid = std::vector<std::vector<bxl::Scalar>>;

inline int periods(std::int64_t first, std::int64_t last, char code) {
  const auto a = bxl::dates::civil_from_serial(first);
  const auto b = bxl::dates::civil_from_serial(last);
  const int months =
      (b.year - a.year) * 12 + (b.month - a.month) + 1 - (b.day < a.day ? 1 : 0);
  switch (code) {
    case 'D': return static_cast<int>(last - first) + 1;
    case 'W': return static_cast<int>((last - first) / 7) + 1;
    case 'M': return months;
    case 'Q': return (months + 2) / 3;
    case 'Y': return (months + 11) / 12;
  }
  return 0;
}

inline std::vector<std::int64_t> start_dates(std::int64_t first, std::int64_t last,
                                             char code) {
  std::vector<std::int64_t> out;
  const int count = periods(first, last, code);
  for (int k = 0; k < count; ++k) {
    switch (code) {
      case 'D': out.push_back(first + k); break;
      case 'W': out.push_back(first + 7 * k); break;
      case 'M': out.push_back(bxl::dates::add_months_clamped(first, k)); break;
      case 'Q': out.push_back(bxl::dates::add_months_clamped(first, 3 * k)); break;
      case 'Y': out.push_back(bxl::dates::add_months_clamped(first, 12 * k)); break;
    }
  }
  return out;
}

inline std::vector<std::int64_t> end_dates(const std::vector<std::int64_t>& starts,
                                           std::optional<std::int64_t> final_end) {
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i + 1 < starts.size(); ++i) out.push_back(starts[i + 1] - 1);
  if (final_end) {
    out.push_back(*final_end);
    return out;
  }
  const std::int64_t last = starts.back();
  const std::int64_t prev = starts[starts.size() - 2];
  const int gap = bxl::dates::month_span(prev, last);
  if (gap > 0 && bxl::dates::add_months_clamped(prev, gap) == last)
    out.push_back(bxl::dates::add_months_clamped(last, gap) - 1);
  else
    out.push_back(last + (last - prev) - 1);
  return out;
}

inline bool is_occurrence(std::int64_t day, std::int64_t first,
                          std::optional<std::int64_t> last, char code) {
  if (day < first) return false;
  if (last && day > *last) return false;
  const auto cf = bxl::dates::civil_from_serial(first);
  const auto cd = bxl::dates::civil_from_serial(day);
  const int month_diff = (cd.year - cf.year) * 12 + (cd.month - cf.month);
  const int clamp_day = std::min(cf.day, bxl::dates::days_in_month(cd.year, cd.month));
  const bool on_day = cd.day == clamp_day;
  switch (code) {
    case 'D': return true;
    case 'W': return (day - first) % 7 == 0;
    case 'B': return (day - first) % 14 == 0;
    case 'M': return on_day;
    case 'Q': return on_day && month_diff % 3 == 0;
    case 'S': return on_day && month_diff % 6 == 0;
    case 'A': return on_day && month_diff % 12 == 0;
    case 'X': return day == first;
  }
  return false;
}

inline double overlap_days(std::int64_t start_a, std::int64_t end_a,
                           std::int64_t start_b, std::int64_t end_b) {
  const std::int64_t width = std::min(end_a, end_b) - std::max(start_a, start_b) + 1;
  return width > 0 ? static_cast<double>(width) : 0.0;
}

inline int count_month_dow(std::int64_t serial, int dow) {
  const auto c = bxl::dates::civil_from_serial(serial);
  int count = 0;
  for (int day = 1; day <= bxl::dates::days_in_month(c.year, c.month); ++day)
    if (bxl::dates::weekday_sun1(bxl::dates::serial_from_civil(c.year, c.month, day)) == dow)
      ++count;
  return count;
}

inline std::vector<double> running_total(const std::vector<double>& values) {
  std::vector<double> out;
  double sum = 0;
  for (double v : values) out.push_back(sum += v);
  return out;
}

inline std::string period_label(std::int64_t serial, char code) {
  static constexpr const char* kMonths[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                            "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
  const auto c = bxl::dates::civil_from_serial(serial);
  char buf[16];
  switch (code) {
    case 'M':
      return std::to_string(c.year) + "-" + kMonths[c.month - 1];
    case 'D':
    case 'W':
      std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", c.year, c.month, c.day);
      return buf;
    case 'Q':
      return std::to_string(c.year) + "-Q" + std::to_string((c.month + 2) / 3);
    case 'Y':
      return std::to_string(c.year);
  }
  return {};
}

inline std::vector<double> sum_rows(const std::vector<std::vector<double>>& grid) {
  std::vector<double> out;
  for (const auto& row : grid) {
    double sum = 0;
    for (double v : row) sum += v;
    out.push_back(sum);
  }
  return out;
}

inline std::vector<double> sum_columns(const std::vector<std::vector<double>>& grid) {
  std::vector<double> out(grid.empty() ? 0 : grid[0].size(), 0.0);
  for (const auto& row : grid)
    for (std::size_t j = 0; j < row.size(); ++j) out[j] += row[j];
  return out;
}

/// Ordering used by SORT over a uniformly typed key column: numbers by value,
/// text case-insensitively.
inline bool key_less(const bxl::Scalar& a, const bxl::Scalar& b) {
  if (a.is_number() && b.is_number()) return a.number() < b.number();
  return bxl::ci_fold(a.text()) < bxl::ci_fold(b.text());
}

inline std::vector<bxl::Scalar> sorted_unique(const std::vector<bxl::Scalar>& keys) {
  std::vector<bxl::Scalar> out;
  for (const auto& k : keys) {
    bool seen = false;
    for (const auto& have : out)
      if (have == k) seen = true;
    if (!seen) out.push_back(k);
  }
  std::sort(out.begin(), out.end(), key_less);
  return out;
}

inline std::vector<std::vector<double>> sum_groups(
    const std::vector<bxl::Scalar>& keys,
    const std::vector<std::vector<double>>& values) {
  const auto groups = sorted_unique(keys);
  std::vector<std::vector<double>> out(
      groups.size(), std::vector<double>(values.empty() ? 0 : values[0].size(), 0.0));
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (std::size_t i = 0; i < keys.size(); ++i)
      if (keys[i] == groups[g])
        for (std::size_t j = 0; j < values[i].size(); ++j) out[g][j] += values[i][j];
  return out;
}

inline std::vector<std::vector<double>> sum_groups_periods(
    const std::vector<bxl::Scalar>& keys, const std::vector<std::int64_t>& dates,
    const std::vector<double>& amounts, const std::vector<std::int64_t>& period_starts,
    const std::vector<std::int64_t>& period_ends) {
  const auto groups = sorted_unique(keys);
  std::vector<std::vector<double>> out(groups.size(),
                                       std::vector<double>(period_starts.size(), 0.0));
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (std::size_t j = 0; j < period_starts.size(); ++j)
      for (std::size_t i = 0; i < keys.size(); ++i)
        if (keys[i] == groups[g] && dates[i] >= period_starts[j] &&
            dates[i] <= period_ends[j])
          out[g][j] += amounts[i];
  return out;
}

inline Grid report_group_summary(const std::vector<bxl::Scalar>& keys,
                                 const std::vector<std::string>& labels,
                                 const std::vector<std::vector<double>>& budget,
                                 const std::vector<std::vector<double>>& actuals,
                                 const std::vector<std::string>& period_labels) {
  const std::size_t periods = period_labels.size();
  Grid out;
  std::vector<bxl::Scalar> header{std::string("Accounts"), std::string("")};
  for (const auto& p : period_labels) header.emplace_back(p);
  header.emplace_back(std::string("Total"));
  out.push_back(header);
  for (std::size_t g = 0; g < keys.size(); ++g) {
    double budget_total = 0, actual_total = 0;
    for (double v : budget[g]) budget_total += v;
    for (double v : actuals[g]) actual_total += v;
    std::string title = (keys[g].is_number() ? bxl::display_number(keys[g].number())
                                             : keys[g].text()) +
                        " " + labels[g];
    std::vector<bxl::Scalar> budgeted{title, std::string("Budgeted")};
    std::vector<bxl::Scalar> expense{std::string(""), std::string("Less Expense")};
    std::vector<bxl::Scalar> subtotal{std::string(""), std::string("Subtotal")};
    for (std::size_t j = 0; j < periods; ++j) {
      budgeted.emplace_back(budget[g][j]);
      expense.emplace_back(-actuals[g][j]);
      subtotal.emplace_back(budget[g][j] - actuals[g][j]);
    }
    budgeted.emplace_back(budget_total);
    expense.emplace_back(-actual_total);
    subtotal.emplace_back(budget_total - actual_total);
    out.push_back(budgeted);
    out.push_back(expense);
    out.push_back(subtotal);
  }
  return out;
}

inline Grid report_group_detail_offset(const std::vector<bxl::Scalar>& item_keys,
                                       const std::vector<std::string>& item_labels,
                                       const std::vector<std::vector<double>>& item_budget,
                                       const std::vector<std::vector<double>>& group_actuals,
                                       const std::vector<std::string>& period_labels) {
  const std::size_t periods = period_labels.size();
  const auto groups = sorted_unique(item_keys);
  Grid out;
  std::vector<bxl::Scalar> header{std::string("Account"), std::string("Description")};
  for (const auto& p : period_labels) header.emplace_back(p);
  header.emplace_back(std::string("Total"));
  out.push_back(header);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::vector<double> budget_sum(periods, 0.0);
    for (std::size_t i = 0; i < item_keys.size(); ++i) {
      if (!(item_keys[i] == groups[g])) continue;
      std::vector<bxl::Scalar> row{item_keys[i], bxl::Scalar(item_labels[i])};
      double total = 0;
      for (std::size_t j = 0; j < periods; ++j) {
        row.emplace_back(item_budget[i][j]);
        budget_sum[j] += item_budget[i][j];
        total += item_budget[i][j];
      }
      row.emplace_back(total);
      out.push_back(row);
    }
    double budget_total = 0, spent_total = 0;
    for (std::size_t j = 0; j < periods; ++j) {
      budget_total += budget_sum[j];
      spent_total += group_actuals[g][j];
    }
    std::vector<bxl::Scalar> budgeted{std::string(""), std::string("Budgeted Subtotal")};
    std::vector<bxl::Scalar> spent{std::string(""), std::string("Less Spent")};
    std::vector<bxl::Scalar> net{std::string(""), std::string("Accounts Subtotal")};
    std::vector<bxl::Scalar> running{std::string(""), std::string("Cumulative Total")};
    double cumulative = 0;
    for (std::size_t j = 0; j < periods; ++j) {
      budgeted.emplace_back(budget_sum[j]);
      spent.emplace_back(-group_actuals[g][j]);
      net.emplace_back(budget_sum[j] - group_actuals[g][j]);
      cumulative += budget_sum[j] - group_actuals[g][j];
      running.emplace_back(cumulative);
    }
    budgeted.emplace_back(budget_total);
    spent.emplace_back(-spent_total);
    net.emplace_back(budget_total - spent_total);
    running.emplace_back(budget_total - spent_total);
    out.push_back(budgeted);
    out.push_back(spent);
    out.push_back(net);
    out.push_back(running);
  }
  return out;
}

}  // namespace oracle
