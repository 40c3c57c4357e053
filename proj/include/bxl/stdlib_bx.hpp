#pragma once

#include <string_view>

#include "bxl/module.hpp"
#include "bxl/registry.hpp"
#include "bxl/workbook.hpp"

/// Embedded copies of the component libraries shipped under modules/, so a
/// host program can install them without touching the filesystem. The text
/// here is byte for byte identical to the module files.

namespace bxl {

/// Source text of the BXD date and schedule module (modules/bxd.bxl).
inline constexpr std::string_view kBxdSource = R"bxl(// BXD: date and schedule components for building budget timelines.
// Import under the prefix BXD. Call any component with no arguments for help.

Aboutλ = LAMBDA(
// Procedure
LET(Help, TRIM(TEXTSPLIT(
"DESCRIPTION: →Produces this table¶" &
"VERSION: →Apr 10 2023¶" &
"PARAMETERS:→¶" &
"→¶" &
"EXAMPLES:→¶" &
"Result →Formula¶" &
"Component listing →=Aboutλ()",
"→", "¶" )
),
// Return Result
VSTACK(
HSTACK("About", "Date and schedule components for building budget timelines"),
HSTACK("Version", "Apr 10 2023"),
HSTACK("Source", "modules/bxd.bxl"),
HSTACK("Function", "Description"),
HSTACK("Aboutλ", "Produces this table"),
HSTACK("Periodsλ", "Determine the number of periods from date1 to date2 inclusive"),
HSTACK("CreateStartDatesλ", "Creates a horizontal timeline of period start dates"),
HSTACK("CreateEndDatesλ", "Creates a horizontal list of end dates for a timeline"),
HSTACK("IsOccurrenceDateλ", "Marks timeline dates that are schedule occurrences"),
HSTACK("ScheduleValuesλ", "Schedules values in a timeline from occurrence rules"),
HSTACK("IsBetweenλ", "Determine if a value is between a lower and upper limit"),
HSTACK("CountMonthDOWλ", "Count instances in a month for a specific day of the week"),
HSTACK("OverLapDaysλ", "Return how many days overlap two period ranges"),
HSTACK("RunningTotalλ", "Creates a running total for a vector array"),
HSTACK("PeriodLabelλ", "Creates a label for a date based on period interval")))
);

Periodsλ = LAMBDA(
// Parameter Declarations
[Date1], [Date2], [Interval],
// Procedure
LET(Help, TRIM(TEXTSPLIT(
"DESCRIPTION: →Determine the number of periods from date1 to date2 inclusive¶" &
"VERSION: →Apr 10 2023¶" &
"PARAMETERS:→¶" &
"Date1 →(Required) First date of the span.¶" &
"Date2 →(Required) Last date of the span. Must not precede Date1.¶" &
"Interval →(Optional) Period length code D, W, M, Q, or Y, or the words Days, Weeks, Months, Quarters, or Years. Defaults to M.¶" &
"→¶" &
"EXAMPLES:→¶" &
"Result →Formula¶" &
"12 →=Periodsλ(""7/1/2023"", ""6/30/2024"")",
"→", "¶" )
),
IF(ISOMITTED(Date1), Help,
// Check inputs
LET(
FromDate, DATE(YEAR(Date1), MONTH(Date1), DAY(Date1)),
ToDate, DATE(YEAR(Date2), MONTH(Date2), DAY(Date2)),
RawCode, IF(ISOMITTED(Interval), "M", IF(Interval = "", "M", Interval)),
Code, IF(RawCode = "Days", "D", IF(RawCode = "Weeks", "W", IF(RawCode = "Months", "M",
  IF(RawCode = "Quarters", "Q", IF(RawCode = "Years", "Y", RawCode))))),
MonthSpan, (YEAR(ToDate) - YEAR(FromDate)) * 12 + MONTH(ToDate) - MONTH(FromDate)
  + 1 - IF(DAY(ToDate) < DAY(FromDate), 1, 0),
// Return Result
IF(ISERROR(FromDate + ToDate), #VALUE!,
IF(ToDate < FromDate, #NUM!,
IF(Code = "D", ToDate - FromDate + 1,
IF(Code = "W", INT((ToDate - FromDate) / 7) + 1,
IF(Code = "M", MonthSpan,
IF(Code = "Q", INT((MonthSpan + 2) / 3),
IF(Code = "Y", INT((MonthSpan + 11) / 12),
#VALUE!))))))))))
);

CreateStartDatesλ = LAMBDA(
// Parameter Declarations
[StartDate], [EndDate], [Interval],
// Procedure
LET(Help, TRIM(TEXTSPLIT(
"DESCRIPTION: →Creates a horizontal timeline of period start dates¶" &
"VERSION: →Apr 10 2023¶" &
"PARAMETERS:→¶" &
"StartDate →(Required) First date of the timeline.¶" &
"EndDate →(Optional) Last date covered, or an interval code. Defaults to one year after StartDate, less a day.¶" &
"Interval →(Optional) Period length code D, W, M, Q, or Y, or the words Days, Weeks, Months, Quarters, or Years. Defaults to M.¶" &
"→¶" &
"EXAMPLES:→¶" &
"Result →Formula¶" &
"12 monthly starts →=CreateStartDatesλ(""1/1/2023"")",
"→", "¶" )
),
IF(ISOMITTED(StartDate), Help,
// Check inputs
LET(
Anchor, DATE(YEAR(StartDate), MONTH(StartDate), DAY(StartDate)),
SlotCode, IF(ISOMITTED(EndDate), "",
  IF(EndDate = "Days", "D", IF(EndDate = "Weeks", "W", IF(EndDate = "Months", "M",
  IF(EndDate = "Quarters", "Q", IF(EndDate = "Years", "Y", EndDate)))))),
CodeInSlot, OR(SlotCode = "D", SlotCode = "W", SlotCode = "M", SlotCode = "Q", SlotCode = "Y"),
RawCode, IF(CodeInSlot, SlotCode, IF(ISOMITTED(Interval), "M", IF(Interval = "", "M", Interval))),
Code, IF(RawCode = "Days", "D", IF(RawCode = "Weeks", "W", IF(RawCode = "Months", "M",
  IF(RawCode = "Quarters", "Q", IF(RawCode = "Years", "Y", RawCode))))),
Final, IF(OR(CodeInSlot, ISOMITTED(EndDate), EndDate = ""), EDATE(Anchor, 12) - 1,
  DATE(YEAR(EndDate), MONTH(EndDate), DAY(EndDate))),
MonthSpan, (YEAR(Final) - YEAR(Anchor)) * 12 + MONTH(Final) - MONTH(Anchor)
  + 1 - IF(DAY(Final) < DAY(Anchor), 1, 0),
// Return Result
IF(ISERROR(Anchor + Final), #VALUE!,
IF(Final < Anchor, #NUM!,
IF(Code = "D", SEQUENCE(1, Final - Anchor + 1, Anchor, 1),
IF(Code = "W", SEQUENCE(1, INT((Final - Anchor) / 7) + 1, Anchor, 7),
IF(Code = "M", EDATE(Anchor, SEQUENCE(1, MonthSpan, 0, 1)),
IF(Code = "Q", EDATE(Anchor, 3 * SEQUENCE(1, INT((MonthSpan + 2) / 3), 0, 1)),
IF(Code = "Y", EDATE(Anchor, 12 * SEQUENCE(1, INT((MonthSpan + 11) / 12), 0, 1)),
#VALUE!))))))))))
);

CreateEndDatesλ = LAMBDA(
// Parameter Declarations
[StartDates], [FinalEnd],
// Procedure
LET(Help, TRIM(TEXTSPLIT(
"DESCRIPTION: →Creates a horizontal list of end dates for a timeline¶" &
"VERSION: →Apr 10 2023¶" &
"PARAMETERS:→¶" &
"StartDates →(Required) Row of period start dates.¶" &
"FinalEnd →(Optional) End date of the last period. Inferred from the start spacing when omitted.¶" &
"→¶" &
"EXAMPLES:→¶" &
"Result →Formula¶" &
"Monthly period ends →=CreateEndDatesλ(CreateStartDatesλ(""1/1/2023""))",
"→", "¶" )
),
IF(ISOMITTED(StartDates), Help,
LET(
Starts, DATE(YEAR(StartDates), MONTH(StartDates), DAY(StartDates)),
Count, COLUMNS(StartDates),
LastStart, INDEX(Starts, 1, Count),
PrevStart, INDEX(Starts, 1, IF(Count > 1, Count - 1, 1)),
MonthGap, (YEAR(LastStart) - YEAR(PrevStart)) * 12 + MONTH(LastStart) - MONTH(PrevStart),
LastEnd, IF(NOT(OR(ISOMITTED(FinalEnd), FinalEnd = "")),
  DATE(YEAR(FinalEnd), MONTH(FinalEnd), DAY(FinalEnd)),
IF(Count = 1, #VALUE!,
IF(AND(MonthGap > 0, EDATE(PrevStart, MonthGap) = LastStart),
  EDATE(LastStart, MonthGap) - 1,
  LastStart + (LastStart - PrevStart) - 1))),
// Return Result
IF(ROWS(StartDates) > 1, #VALUE!,
IF(ISERROR(SUM(Starts) + LastEnd), #VALUE!,
MAKEARRAY(1, Count, LAMBDA(MkRow, MkCol,
  IF(MkCol < Count, INDEX(Starts, 1, MkCol + 1) - 1, LastEnd))))))))
);

IsOccurrenceDateλ = LAMBDA(
// Parameter Declarations
[Dates], [FirstDates], [LastDates], [Schedules],
// Procedure
LET(Help, TRIM(TEXTSPLIT(
"DESCRIPTION: →Marks timeline dates that are schedule occurrences¶" &
"VERSION: →Apr 10 2023¶" &
"PARAMETERS:→¶" &
"Dates →(Required) Row of timeline dates to test.¶" &
"FirstDates →(Required) Column of first occurrence dates, one per item.¶" &
"LastDates →(Optional) Column of last occurrence dates. Blank cells never expire.¶" &
"Schedules →(Optional) Column of schedule codes D, W, B, M, Q, S, A, or X. Blank cells mean X.¶" &
"→¶" &
"EXAMPLES:→¶" &
"Result →Formula¶" &
"TRUE on each payday →=IsOccurrenceDateλ(Timeline, ""7/1/2023"", , ""B"")",
"→", "¶" )
),
IF(ISOMITTED(Dates), Help,
LET(
TheDates, DATE(YEAR(Dates), MONTH(Dates), DAY(Dates)),
Firsts, DATE(YEAR(FirstDates), MONTH(FirstDates), DAY(FirstDates)),
Lasts, IF(ISOMITTED(LastDates), DATE(9999, 12, 31),
  IF(LastDates = "", DATE(9999, 12, 31),
  DATE(YEAR(LastDates), MONTH(LastDates), DAY(LastDates)))),
Codes, IF(ISOMITTED(Schedules), "X", IF(Schedules = "", "X", Schedules)),
InWindow, (TheDates >= Firsts) * (TheDates <= Lasts),
MonthDiff, (YEAR(TheDates) - YEAR(Firsts)) * 12 + MONTH(TheDates) - MONTH(Firsts),
ClampDay, IF(DAY(Firsts) > DAY(EOMONTH(TheDates, 0)), DAY(EOMONTH(TheDates, 0)), DAY(Firsts)),
OnMonthDay, (MonthDiff >= 0) * (DAY(TheDates) = ClampDay),
Hit, (Codes = "D") * 1
  + (Codes = "W") * (MOD(TheDates - Firsts, 7) = 0)
  + (Codes = "B") * (MOD(TheDates - Firsts, 14) = 0)
  + (Codes = "M") * OnMonthDay
  + (Codes = "Q") * OnMonthDay * (MOD(MonthDiff, 3) = 0)
  + (Codes = "S") * OnMonthDay * (MOD(MonthDiff, 6) = 0)
  + (Codes = "A") * OnMonthDay * (MOD(MonthDiff, 12) = 0)
  + (Codes = "X") * (TheDates = Firsts),
Known, (Codes = "D") + (Codes = "W") + (Codes = "B") + (Codes = "M")
  + (Codes = "Q") + (Codes = "S") + (Codes = "A") + (Codes = "X"),
// Return Result
IF(Known = 0, #VALUE!, (InWindow * Hit) > 0))))
);

ScheduleValuesλ = LAMBDA(
// Parameter Declarations
[Dates], [FirstDates], [LastDates], [Schedules], [Amounts],
// Procedure
LET(Help, TRIM(TEXTSPLIT(
"DESCRIPTION: →Schedules values in a timeline from occurrence rules¶" &
"VERSION: →Apr 10 2023¶" &
"PARAMETERS:→¶" &
"Dates →(Required) Row of timeline dates.¶" &
"FirstDates →(Required) Column of first occurrence dates, one per item.¶" &
"LastDates →(Optional) Column of last occurrence dates. Blank cells never expire.¶" &
"Schedules →(Optional) Column of schedule codes D, W, B, M, Q, S, A, or X. Blank cells mean X.¶" &
"Amounts →(Required) Column of amounts applied on each occurrence.¶" &
"→¶" &
"EXAMPLES:→¶" &
"Result →Formula¶" &
"Amounts on paydays →=ScheduleValuesλ(Timeline, ""7/1/2023"", , ""B"", 1200)",
"→", "¶" )
),
// Return Result
IF(ISOMITTED(Dates), Help,
IsOccurrenceDateλ(Dates, FirstDates, LastDates, Schedules) * Amounts))
);

IsBetweenλ = LAMBDA(
// Parameter Declarations
[Value], [Lower], [Upper],
// Procedure
LET(Help, TRIM(TEXTSPLIT(
"DESCRIPTION: →Determine if a value is between a lower and upper limit¶" &
"VERSION: →Apr 10 2023¶" &
"PARAMETERS:→¶" &
"Value →(Required) Value or array of values to test.¶" &
"Lower →(Required) Smallest value accepted.¶" &
"Upper →(Required) Largest value accepted.¶" &
"→¶" &
"EXAMPLES:→¶" &
"Result →Formula¶" &
"TRUE →=IsBetweenλ(5, 1, 10)",
"→", "¶" )
),
// Return Result
IF(ISOMITTED(Value), Help,
((Value >= Lower) * (Value <= Upper)) > 0))
);

CountMonthDOWλ = LAMBDA(
// Parameter Declarations
[TheDate], [DayOfWeek],
// Procedure
LET(Help, TRIM(TEXTSPLIT(
"DESCRIPTION: →Count instances in a month for a specific day of the week¶" &
"VERSION: →Apr 10 2023¶" &
"PARAMETERS:→¶" &
"TheDate →(Required) Any date inside the month to count.¶" &
"DayOfWeek →(Required) Weekday number 1 through 7, Sunday is 1.¶" &
"→¶" &
"EXAMPLES:→¶" &
"Result →Formula¶" &
"4 →=CountMonthDOWλ(""7/1/2023"", 6)",
"→", "¶" )
),
IF(ISOMITTED(TheDate), Help,
LET(
Anchor, DATE(YEAR(TheDate), MONTH(TheDate), DAY(TheDate)),
WeekdayIndex, INT(DayOfWeek),
MonthStart, DATE(YEAR(Anchor), MONTH(Anchor), 1),
MonthEnd, EOMONTH(Anchor, 0),
FirstHit, MonthStart + MOD(WeekdayIndex - WEEKDAY(MonthStart), 7),
// Return Result
IF(ISERROR(Anchor), #VALUE!,
IF(OR(WeekdayIndex < 1, WeekdayIndex > 7), #NUM!,
INT((MonthEnd - FirstHit) / 7) + 1)))))
);

OverLapDaysλ = LAMBDA(
// Parameter Declarations
[StartDateA], [EndDateA], [StartDateB], [EndDateB],
// Procedure
LET(Help, TRIM(TEXTSPLIT(
"DESCRIPTION: →Return how many days overlap two period ranges¶" &
"VERSION: →Apr 10 2023¶" &
"PARAMETERS:→¶" &
"StartDateA →(Required) First day of the first range.¶" &
"EndDateA →(Required) Last day of the first range.¶" &
"StartDateB →(Required) First day of the second range.¶" &
"EndDateB →(Required) Last day of the second range.¶" &
"→¶" &
"EXAMPLES:→¶" &
"Result →Formula¶" &
"17 →=OverLapDaysλ(""1/1/2023"", ""1/31/2023"", ""1/15/2023"", ""2/15/2023"")",
"→", "¶" )
),
IF(ISOMITTED(StartDateA), Help,
LET(
BeginA, DATE(YEAR(StartDateA), MONTH(StartDateA), DAY(StartDateA)),
CloseA, DATE(YEAR(EndDateA), MONTH(EndDateA), DAY(EndDateA)),
BeginB, DATE(YEAR(StartDateB), MONTH(StartDateB), DAY(StartDateB)),
CloseB, DATE(YEAR(EndDateB), MONTH(EndDateB), DAY(EndDateB)),
// Return Result
IF(ISERROR(BeginA + CloseA + BeginB + CloseB), #VALUE!,
IF(OR(CloseA < BeginA, CloseB < BeginB), #NUM!,
MAX(0, MIN(CloseA, CloseB) - MAX(BeginA, BeginB) + 1))))))
);

RunningTotalλ = LAMBDA(
// Parameter Declarations
[Vector],
// Procedure
LET(Help, TRIM(TEXTSPLIT(
"DESCRIPTION: →Creates a running total for a vector array¶" &
"VERSION: →Apr 10 2023¶" &
"PARAMETERS:→¶" &
"Vector →(Required) A single row or single column of numbers.¶" &
"→¶" &
"EXAMPLES:→¶" &
"Result →Formula¶" &
"1,3,6 →=RunningTotalλ({1,2,3})",
"→", "¶" )
),
// Return Result
IF(ISOMITTED(Vector), Help,
IF(AND(ROWS(Vector) > 1, COLUMNS(Vector) > 1), #VALUE!,
SCAN(0, Vector, LAMBDA(RunningSum, NextValue, RunningSum + NextValue)))))
);

PeriodLabelλ = LAMBDA(
// Parameter Declarations
[Dates], [Interval],
// Procedure
LET(Help, TRIM(TEXTSPLIT(
"DESCRIPTION: →Creates a label for a date based on period interval¶" &
"VERSION: →Apr 10 2023¶" &
"PARAMETERS:→¶" &
"Dates →(Required) Date or row of dates to label.¶" &
"Interval →(Optional) Period length code D, W, M, Q, or Y, or the words Days, Weeks, Months, Quarters, or Years. Defaults to M.¶" &
"→¶" &
"EXAMPLES:→¶" &
"Result →Formula¶" &
"2023-Jul →=PeriodLabelλ(""7/1/2023"")",
"→", "¶" )
),
IF(ISOMITTED(Dates), Help,
LET(
TheDates, DATE(YEAR(Dates), MONTH(Dates), DAY(Dates)),
RawCode, IF(ISOMITTED(Interval), "M", IF(Interval = "", "M", Interval)),
Code, IF(RawCode = "Days", "D", IF(RawCode = "Weeks", "W", IF(RawCode = "Months", "M",
  IF(RawCode = "Quarters", "Q", IF(RawCode = "Years", "Y", RawCode))))),
// Return Result
IF(ISERROR(SUM(TheDates)), #VALUE!,
IF(Code = "M", TEXT(TheDates, "yyyy-mmm"),
IF(OR(Code = "D", Code = "W"), TEXT(TheDates, "yyyy-mm-dd"),
IF(Code = "Q", YEAR(TheDates) & "-Q" & INT((MONTH(TheDates) + 2) / 3),
IF(Code = "Y", TEXT(TheDates, "yyyy"),
#VALUE!))))))))
);
)bxl";

/// Source text of the BXR reporting module (modules/bxr.bxl).
inline constexpr std::string_view kBxrSource = R"bxl(// BXR: reporting components that total, pivot, and lay out budget figures.
// Import under the prefix BXR. Call any component with no arguments for help.

Aboutλ = LAMBDA(
// Procedure
LET(Help, TRIM(TEXTSPLIT(
"DESCRIPTION: →Produces this table¶" &
"VERSION: →Apr 10 2023¶" &
"PARAMETERS:→¶" &
"→¶" &
"EXAMPLES:→¶" &
"Result →Formula¶" &
"Component listing →=Aboutλ()",
"→", "¶" )
),
// Return Result
VSTACK(
HSTACK("About", "Reporting components that total, pivot, and lay out budget figures"),
HSTACK("Version", "Apr 10 2023"),
HSTACK("Source", "modules/bxr.bxl"),
HSTACK("Function", "Description"),
HSTACK("Aboutλ", "Produces this table"),
HSTACK("SumRowsλ", "Creates totals for each row in an array"),
HSTACK("SumColumnsλ", "Creates totals for each column in an array."),
HSTACK("SumGroupsλ", "Totals value columns grouped by key"),
HSTACK("SumGroupsAndPeriodsλ", "Totals transaction amounts by group and period"),
HSTACK("ReportGroupSummaryλ", "Builds a period summary report with group subtotals"),
HSTACK("ReportGroupDetailOffsetλ", "Builds a detail report with subtotals and a running balance per group")))
);

SumRowsλ = LAMBDA(
// Parameter Declarations
[Array],
// Procedure
LET(Help, TRIM(TEXTSPLIT(
"DESCRIPTION: →Creates totals for each row in an array¶" &
"VERSION: →Apr 10 2023¶" &
"PARAMETERS:→¶" &
"Array →(Required) A two dimensional array of values.¶" &
"→¶" &
"EXAMPLES:→¶" &
"Result →Formula¶" &
"10;26 →=SumRowsλ({1,2,3,4;5,6,7,8})",
"→", "¶" )
),
// Return Result
IF(ISOMITTED(Array), Help,
BYROW(Array, LAMBDA(TheRow, SUM(TheRow)))))
);

SumColumnsλ = LAMBDA(
// Parameter Declarations
[Array],
// Procedure
LET(Help, TRIM(TEXTSPLIT(
"DESCRIPTION: →Creates totals for each column in an array.¶" &
"VERSION: →Apr 10 2023¶" &
"PARAMETERS:→¶" &
"Array →(Required) A two dimensional array of values.¶" &
"→¶" &
"EXAMPLES:→¶" &
"Result →Formula¶" &
"15,25,35,45 →=SumColumnsλ({1,2,3,4;4,3,2,1;10,20,30,40})" ,
"→", "¶" )
),
// Check inputs
Array, IF(OR(ISOMITTED(Array), Array=""), #Value!, Array),
// Procedure
Result, BYCOL(Array, LAMBDA(Column, SUM(Column))),
// Handle Error
Error, MAX(IsError(Result)+1),
// Return Result
Choose(Error, Result, Help)
)
);

SumGroupsλ = LAMBDA(
// Parameter Declarations
[Keys], [Values],
// Procedure
LET(Help, TRIM(TEXTSPLIT(
"DESCRIPTION: →Totals value columns grouped by key¶" &
"VERSION: →Apr 10 2023¶" &
"PARAMETERS:→¶" &
"Keys →(Required) Column of group keys, one per value row.¶" &
"Values →(Required) Array of values with one row per key.¶" &
"→¶" &
"EXAMPLES:→¶" &
"Result →Formula¶" &
"6,8;3,4 →=SumGroupsλ({""A"";""B"";""A""}, {1,2;3,4;5,6})",
"→", "¶" )
),
IF(ISOMITTED(Keys), Help,
IF(ROWS(Keys) <> ROWS(Values), #VALUE!,
LET(
Groups, SORT(UNIQUE(Keys)),
// Return Result
MAKEARRAY(ROWS(Groups), COLUMNS(Values), LAMBDA(GroupRow, ValueCol,
SUM((Keys = INDEX(Groups, GroupRow, 1)) * INDEX(Values, 0, ValueCol))))))))
);

SumGroupsAndPeriodsλ = LAMBDA(
// Parameter Declarations
[Keys], [TranDates], [Amounts], [PeriodStarts], [PeriodEnds],
// Procedure
LET(Help, TRIM(TEXTSPLIT(
"DESCRIPTION: →Totals transaction amounts by group and period¶" &
"VERSION: →Apr 10 2023¶" &
"PARAMETERS:→¶" &
"Keys →(Required) Column of group keys, one per transaction.¶" &
"TranDates →(Required) Column of transaction dates.¶" &
"Amounts →(Required) Column of transaction amounts.¶" &
"PeriodStarts →(Required) Row of period start dates.¶" &
"PeriodEnds →(Optional) Row of period end dates. Inferred from the start spacing when omitted.¶" &
"→¶" &
"EXAMPLES:→¶" &
"Result →Formula¶" &
"Group by period totals →=SumGroupsAndPeriodsλ(Keys, Dates, Amounts, PeriodStarts)",
"→", "¶" )
),
IF(ISOMITTED(Keys), Help,
IF(OR(ROWS(TranDates) <> ROWS(Keys), ROWS(Amounts) <> ROWS(Keys)), #VALUE!,
LET(
Dated, DATE(YEAR(TranDates), MONTH(TranDates), DAY(TranDates)),
Starts, DATE(YEAR(PeriodStarts), MONTH(PeriodStarts), DAY(PeriodStarts)),
Count, COLUMNS(PeriodStarts),
LastStart, INDEX(Starts, 1, Count),
PrevStart, INDEX(Starts, 1, IF(Count > 1, Count - 1, 1)),
MonthGap, (YEAR(LastStart) - YEAR(PrevStart)) * 12 + MONTH(LastStart) - MONTH(PrevStart),
InferredEnd, IF(Count = 1, #VALUE!,
IF(AND(MonthGap > 0, EDATE(PrevStart, MonthGap) = LastStart),
  EDATE(LastStart, MonthGap) - 1,
  LastStart + (LastStart - PrevStart) - 1)),
Ends, IF(OR(ISOMITTED(PeriodEnds), PeriodEnds = ""),
  MAKEARRAY(1, Count, LAMBDA(MkRow, MkCol,
    IF(MkCol < Count, INDEX(Starts, 1, MkCol + 1) - 1, InferredEnd))),
  DATE(YEAR(PeriodEnds), MONTH(PeriodEnds), DAY(PeriodEnds))),
Groups, SORT(UNIQUE(Keys)),
// Return Result
MAKEARRAY(ROWS(Groups), Count, LAMBDA(GroupRow, PeriodCol,
SUM((Keys = INDEX(Groups, GroupRow, 1))
  * (Dated >= INDEX(Starts, 1, PeriodCol))
  * (Dated <= INDEX(Ends, 1, PeriodCol))
  * Amounts)))))))
);

ReportGroupSummaryλ = LAMBDA(
// Parameter Declarations
[GroupKeys], [GroupLabels], [Budget], [Actuals], [PeriodLabels],
// Procedure
LET(Help, TRIM(TEXTSPLIT(
"DESCRIPTION: →Builds a period summary report with group subtotals¶" &
"VERSION: →Apr 10 2023¶" &
"PARAMETERS:→¶" &
"GroupKeys →(Required) Column of group keys, one per report group.¶" &
"GroupLabels →(Required) Column of group display labels.¶" &
"Budget →(Required) Array of budgeted amounts, one row per group and one column per period.¶" &
"Actuals →(Required) Array of actual amounts with the same shape as Budget.¶" &
"PeriodLabels →(Required) Row of period labels for the header.¶" &
"→¶" &
"EXAMPLES:→¶" &
"Result →Formula¶" &
"Summary report →=ReportGroupSummaryλ(Keys, Labels, Budget, Actuals, PeriodLabels)",
"→", "¶" )
),
IF(ISOMITTED(GroupKeys), Help,
IF(OR(ROWS(Budget) <> ROWS(GroupKeys), ROWS(Actuals) <> ROWS(GroupKeys),
  COLUMNS(Actuals) <> COLUMNS(Budget)), #VALUE!,
LET(
GroupCount, ROWS(GroupKeys),
PeriodCount, COLUMNS(Budget),
// Return Result
MAKEARRAY(1 + 3 * GroupCount, PeriodCount + 3, LAMBDA(ReportRow, ReportCol,
IF(ReportRow = 1,
IF(ReportCol = 1, "Accounts",
IF(ReportCol = 2, "",
IF(ReportCol = PeriodCount + 3, "Total", INDEX(PeriodLabels, 1, ReportCol - 2)))),
LET(
GroupRow, INT((ReportRow - 2) / 3) + 1,
Kind, MOD(ReportRow - 2, 3) + 1,
BudgetRow, INDEX(Budget, GroupRow, 0),
ActualRow, INDEX(Actuals, GroupRow, 0),
IF(ReportCol = 1,
  IF(Kind = 1, INDEX(GroupKeys, GroupRow, 1) & " " & INDEX(GroupLabels, GroupRow, 1), ""),
IF(ReportCol = 2, CHOOSE(Kind, "Budgeted", "Less Expense", "Subtotal"),
IF(ReportCol = PeriodCount + 3,
  CHOOSE(Kind, SUM(BudgetRow), -SUM(ActualRow), SUM(BudgetRow) - SUM(ActualRow)),
  CHOOSE(Kind,
    INDEX(Budget, GroupRow, ReportCol - 2),
    -INDEX(Actuals, GroupRow, ReportCol - 2),
    INDEX(Budget, GroupRow, ReportCol - 2) - INDEX(Actuals, GroupRow, ReportCol - 2)))))))))))))
);

ReportGroupDetailOffsetλ = LAMBDA(
// Parameter Declarations
[ItemKeys], [ItemLabels], [ItemBudget], [GroupActuals], [PeriodLabels],
// Procedure
LET(Help, TRIM(TEXTSPLIT(
"DESCRIPTION: →Builds a detail report with subtotals and a running balance per group¶" &
"VERSION: →Apr 10 2023¶" &
"PARAMETERS:→¶" &
"ItemKeys →(Required) Column of account keys, one per budget item, grouped in ascending order.¶" &
"ItemLabels →(Required) Column of budget item descriptions.¶" &
"ItemBudget →(Required) Array of budgeted amounts, one row per item and one column per period.¶" &
"GroupActuals →(Required) Array of actual amounts, one row per distinct key in ascending order.¶" &
"PeriodLabels →(Required) Row of period labels for the header.¶" &
"→¶" &
"EXAMPLES:→¶" &
"Result →Formula¶" &
"Detail report →=ReportGroupDetailOffsetλ(Keys, Labels, Budget, Actuals, PeriodLabels)",
"→", "¶" )
),
IF(ISOMITTED(ItemKeys), Help,
LET(
Groups, SORT(UNIQUE(ItemKeys)),
GroupCount, ROWS(Groups),
ItemCount, ROWS(ItemKeys),
PeriodCount, COLUMNS(ItemBudget),
IF(OR(ROWS(ItemLabels) <> ItemCount, ROWS(ItemBudget) <> ItemCount,
  ROWS(GroupActuals) <> GroupCount, COLUMNS(GroupActuals) <> PeriodCount), #VALUE!,
LET(
GroupSizes, MAKEARRAY(GroupCount, 1, LAMBDA(SizeRow, SizeCol,
  SUM((ItemKeys = INDEX(Groups, SizeRow, 1)) * 1))),
BlockEnds, SCAN(0, GroupSizes + 4, LAMBDA(RunningSum, NextValue, RunningSum + NextValue)),
// Return Result
MAKEARRAY(1 + ItemCount + 4 * GroupCount, PeriodCount + 3, LAMBDA(ReportRow, ReportCol,
IF(ReportRow = 1,
IF(ReportCol = 1, "Account",
IF(ReportCol = 2, "Description",
IF(ReportCol = PeriodCount + 3, "Total", INDEX(PeriodLabels, 1, ReportCol - 2)))),
LET(
BodyRow, ReportRow - 1,
GroupRow, SUM((BlockEnds < BodyRow) * 1) + 1,
BlockStart, IF(GroupRow = 1, 0, INDEX(BlockEnds, GroupRow - 1, 1)),
Offset, BodyRow - BlockStart,
GroupKey, INDEX(Groups, GroupRow, 1),
SizeHere, INDEX(GroupSizes, GroupRow, 1),
InGroup, (ItemKeys = GroupKey) * 1,
DataCol, ReportCol - 2,
IF(Offset <= SizeHere,
LET(ItemIndex, BlockStart - 4 * (GroupRow - 1) + Offset,
IF(ReportCol = 1, INDEX(ItemKeys, ItemIndex, 1),
IF(ReportCol = 2, INDEX(ItemLabels, ItemIndex, 1),
IF(ReportCol = PeriodCount + 3, SUM(INDEX(ItemBudget, ItemIndex, 0)),
INDEX(ItemBudget, ItemIndex, DataCol))))),
LET(
Kind, Offset - SizeHere,
BudgetTotal, SUM(InGroup * ItemBudget),
SpentTotal, SUM(INDEX(GroupActuals, GroupRow, 0)),
IF(ReportCol = 1, "",
IF(ReportCol = 2,
  CHOOSE(Kind, "Budgeted Subtotal", "Less Spent", "Accounts Subtotal", "Cumulative Total"),
IF(ReportCol = PeriodCount + 3,
  CHOOSE(Kind, BudgetTotal, -SpentTotal, BudgetTotal - SpentTotal, BudgetTotal - SpentTotal),
  CHOOSE(Kind,
    SUM(InGroup * INDEX(ItemBudget, 0, DataCol)),
    -INDEX(GroupActuals, GroupRow, DataCol),
    SUM(InGroup * INDEX(ItemBudget, 0, DataCol)) - INDEX(GroupActuals, GroupRow, DataCol),
    SUM(InGroup * ItemBudget * ((SEQUENCE(1, PeriodCount) <= DataCol) * 1))
      - SUM(INDEX(GroupActuals, GroupRow, 0) * ((SEQUENCE(1, PeriodCount) <= DataCol) * 1)))))))))))))))))
);
)bxl";

/// Parsed BXD module, shared across callers.
inline const Module& bxd_module() {
  static const Module mod = parse_module(kBxdSource);
  return mod;
}

/// Parsed BXR module, shared across callers.
inline const Module& bxr_module() {
  static const Module mod = parse_module(kBxrSource);
  return mod;
}

/// Imports BXD and BXR into a workbook under their conventional prefixes.
inline void import_standard_library(Workbook& wb) {
  ModuleSource bxd_from{"modules/bxd.bxl", sha256_hex(kBxdSource), ""};
  ModuleSource bxr_from{"modules/bxr.bxl", sha256_hex(kBxrSource), ""};
  import_module(wb, bxd_module(), "BXD", bxd_from);
  import_module(wb, bxr_module(), "BXR", bxr_from);
}

}  // namespace bxl
