#include <catch2/catch_amalgamated.hpp>

#include "bxl/lint.hpp"
#include "bxl/recalc.hpp"

using namespace bxl;

namespace {

std::vector<Finding> errors_r1_to_r3(const Module& m) {
  std::vector<Finding> out;
  for (const Definition& d : m.definitions)
    for (Finding& f : check_self_contained(m, d)) out.push_back(std::move(f));
  return out;
}

const char* kHelpListing = R"bxl(
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
)bxl";

}  // namespace

TEST_CASE("a body that touches only its parameters is self-contained") {
  const Module m = parse_module("Add\xce\xbb = LAMBDA(Parm1,Parm2, Parm1 + Parm2);");
  CHECK(errors_r1_to_r3(m).empty());
  CHECK(lint_module(m, "add", {LintRule::SelfContainedBody,
                               LintRule::WrappedHelpers, LintRule::PureLet})
            .compliant());
}

TEST_CASE("direct cell references in the body are flagged per reference") {
  const Module m = parse_module("Add\xce\xbb = LAMBDA(Parm1,Parm2, A2 + B2);");
  const auto findings = errors_r1_to_r3(m);
  REQUIRE(findings.size() == 2);
  CHECK(findings[0].rule == LintRule::SelfContainedBody);
  CHECK(findings[0].fragment == "A2");
  CHECK(findings[1].rule == LintRule::SelfContainedBody);
  CHECK(findings[1].fragment == "B2");
  CHECK(findings[0].span.begin < findings[1].span.begin);
  CHECK_FALSE(lint_module(m, "add").compliant());
}

TEST_CASE("a helper function reading the grid needs a wrapping lambda") {
  const Module bad = parse_module(
      "Join\xce\xbb = LAMBDA(BYROW(A2:B4, LAMBDA(Row, TEXTJOIN(\",\", TRUE, Row))));");
  const auto findings = errors_r1_to_r3(bad);
  REQUIRE(findings.size() == 1);
  CHECK(findings[0].rule == LintRule::WrappedHelpers);
  CHECK(findings[0].fragment == "A2:B4");

  const Module good = parse_module(
      "Join\xce\xbb = LAMBDA(Array, BYROW(Array, LAMBDA(Row, TEXTJOIN(\",\", TRUE, Row))));");
  CHECK(errors_r1_to_r3(good).empty());
}

TEST_CASE("grid references inside LET bindings are flagged per reference") {
  const Module bad = parse_module(
      "Sums\xce\xbb = LAMBDA(LET(Array, HSTACK(A2#,B2#),"
      " BYROW(Array, LAMBDA(Row, SUM(Row)))));");
  const auto findings = errors_r1_to_r3(bad);
  REQUIRE(findings.size() == 2);
  CHECK(findings[0].rule == LintRule::PureLet);
  CHECK(findings[0].fragment == "A2#");
  CHECK(findings[1].rule == LintRule::PureLet);
  CHECK(findings[1].fragment == "B2#");
  CHECK(findings[0].message.find("Array") != std::string::npos);

  const Module good = parse_module(
      "Sums\xce\xbb = LAMBDA(Column1,Column2, LET(Array,HSTACK(Column1, Column2),"
      " BYROW(Array, LAMBDA(Row,SUM(Row)))));");
  CHECK(errors_r1_to_r3(good).empty());
}

TEST_CASE("classification follows the nearest enclosing construct") {
  SECTION("a reference in a LET body belongs to the calculation") {
    const Module m = parse_module("F\xce\xbb = LAMBDA(LET(x, 1, x + A2));");
    const auto findings = errors_r1_to_r3(m);
    REQUIRE(findings.size() == 1);
    CHECK(findings[0].rule == LintRule::SelfContainedBody);
  }
  SECTION("a reference inside a helper's inner lambda is a wrapping issue") {
    const Module m = parse_module(
        "F\xce\xbb = LAMBDA(Arr, BYROW(Arr, LAMBDA(Row, SUM(Row)+A2)));");
    const auto findings = errors_r1_to_r3(m);
    REQUIRE(findings.size() == 1);
    CHECK(findings[0].rule == LintRule::WrappedHelpers);
  }
  SECTION("a LET binding nested inside a helper wins the classification") {
    const Module m = parse_module(
        "F\xce\xbb = LAMBDA(Arr, BYROW(Arr, LAMBDA(Row, LET(t, A2, SUM(Row)+t))));");
    const auto findings = errors_r1_to_r3(m);
    REQUIRE(findings.size() == 1);
    CHECK(findings[0].rule == LintRule::PureLet);
  }
  SECTION("a structured reference is a grid dependence") {
    const Module m = parse_module("F\xce\xbb = LAMBDA(SUM(tbl[Amt]));");
    const auto findings = errors_r1_to_r3(m);
    REQUIRE(findings.size() == 1);
    CHECK(findings[0].rule == LintRule::SelfContainedBody);
    CHECK(findings[0].fragment == "tbl[Amt]");
  }
}

TEST_CASE("names resolve to parameters, bindings, builtins, or siblings") {
  SECTION("sibling and self calls are sanctioned") {
    const Module m = parse_module(
        "A\xce\xbb = LAMBDA(x, B\xce\xbb(x)+1);\n"
        "B\xce\xbb = LAMBDA(n, IF(n<2, 1, B\xce\xbb(n-1)));");
    CHECK(errors_r1_to_r3(m).empty());
  }
  SECTION("an external name is a hidden dependence") {
    const Module m = parse_module("F\xce\xbb = LAMBDA(x, x + Fact(1));");
    const auto findings = errors_r1_to_r3(m);
    REQUIRE(findings.size() == 1);
    CHECK(findings[0].rule == LintRule::SelfContainedBody);
    CHECK(findings[0].fragment == "Fact");
  }
  SECTION("a bare external name is flagged too") {
    const Module m = parse_module("F\xce\xbb = LAMBDA(x, SomeName);");
    REQUIRE(errors_r1_to_r3(m).size() == 1);
  }
  SECTION("LET-bound lambdas may be called by their binding name") {
    const Module m = parse_module(
        "F\xce\xbb = LAMBDA(x, LET(double, LAMBDA(v, v*2), double(x)));");
    CHECK(errors_r1_to_r3(m).empty());
  }
  SECTION("a binding name is not in scope inside its own value") {
    const Module m = parse_module("F\xce\xbb = LAMBDA(LET(x, x+1, x));");
    REQUIRE(errors_r1_to_r3(m).size() == 1);
  }
}

TEST_CASE("documentation rules accept the fully annotated exemplar") {
  const Module m = parse_module(kHelpListing);
  REQUIRE(m.definitions.size() == 1);
  const auto findings = check_documentation(m.definitions[0]);
  CHECK(findings.empty());
  const LintReport report = lint_module(m, "sum_columns");
  CHECK(report.compliant());
  CHECK(report.findings.empty());
}

TEST_CASE("an undocumented definition collects one finding per gap") {
  const Module m = parse_module("Id\xce\xbb = LAMBDA(x, x);");
  const auto findings = check_documentation(m.definitions[0]);
  std::size_t r4 = 0, r5 = 0;
  for (const Finding& f : findings) {
    if (f.rule == LintRule::Documentation) ++r4;
    if (f.rule == LintRule::InlineHelp) ++r5;
  }
  CHECK(r4 == 3);
  CHECK(r5 == 1);
  CHECK_FALSE(lint_module(m, "id").compliant());
}

TEST_CASE("optional-input definitions are exempt from the inline help rule") {
  const Module m = parse_module("Id\xce\xbb = LAMBDA([x], x);");
  for (const Finding& f : check_documentation(m.definitions[0]))
    CHECK(f.rule != LintRule::InlineHelp);
}

TEST_CASE("the help path needs the binding, the guard, and the return route") {
  SECTION("guard without Help binding") {
    const Module m = parse_module(
        "F\xce\xbb = LAMBDA(x, IF(ISOMITTED(x), #VALUE!, x));");
    const auto findings = check_documentation(m.definitions[0]);
    CHECK(std::any_of(findings.begin(), findings.end(), [](const Finding& f) {
      return f.rule == LintRule::InlineHelp;
    }));
  }
  SECTION("Help binding that is never returned") {
    const Module m = parse_module(
        "F\xce\xbb = LAMBDA(x, LET(Help, \"usage\","
        " v, IF(ISOMITTED(x), 0, x), v*2));");
    const auto findings = check_documentation(m.definitions[0]);
    CHECK(std::any_of(findings.begin(), findings.end(), [](const Finding& f) {
      return f.rule == LintRule::InlineHelp;
    }));
  }
  SECTION("complete idiom") {
    const Module m = parse_module(
        "F\xce\xbb = LAMBDA(x, LET(Help, \"usage\","
        " v, IF(ISOMITTED(x), #VALUE!, x),"
        " e, MAX(ISERROR(v)+1),"
        " CHOOSE(e, v*2, Help)));");
    for (const Finding& f : check_documentation(m.definitions[0]))
      CHECK(f.rule != LintRule::InlineHelp);
  }
}

TEST_CASE("naming style warns without affecting the verdict") {
  const Module m = parse_module("AddUp = LAMBDA(Parm1,Parm2, Parm1+Parm2);");
  const auto findings = check_naming_style(m.definitions[0]);
  REQUIRE(findings.size() == 1);
  CHECK(findings[0].rule == LintRule::NamingStyle);
  CHECK(rule_severity(findings[0].rule) == LintSeverity::Warning);

  const LintReport report =
      lint_module(m, "addup", {LintRule::SelfContainedBody, LintRule::PureLet,
                               LintRule::WrappedHelpers, LintRule::NamingStyle});
  REQUIRE(report.findings.size() == 1);
  CHECK(report.compliant());

  const Module suffixed = parse_module("Add\xce\xbb = LAMBDA(x, x);");
  CHECK(check_naming_style(suffixed.definitions[0]).empty());
}

TEST_CASE("interface revisions may only append optional parameters") {
  const auto compat = [](const char* old_src, const char* new_src) {
    return check_version_compat(parse_module(old_src), parse_module(new_src));
  };
  CHECK(compat("f = LAMBDA(a,[b], a);", "f = LAMBDA(a,[b],[c], a);").empty());
  CHECK(compat("f = LAMBDA(a,b, a);", "f = LAMBDA(a,[b], a);").empty());

  SECTION("renaming a position") {
    const auto findings = compat("f = LAMBDA(a,b, a);", "f = LAMBDA(b,a, a);");
    REQUIRE_FALSE(findings.empty());
    CHECK(findings[0].rule == LintRule::VersionCompat);
    CHECK(findings[0].message.find("parameter 1 renamed") != std::string::npos);
  }
  SECTION("tightening optional to required") {
    const auto findings = compat("f = LAMBDA(a,[b], a);", "f = LAMBDA(a,b, a);");
    REQUIRE(findings.size() == 1);
    CHECK(findings[0].message.find("tightened") != std::string::npos);
  }
  SECTION("removing a definition") {
    const auto findings = compat("f = LAMBDA(a, a);\ng = LAMBDA(a, a);",
                                 "f = LAMBDA(a, a);");
    REQUIRE(findings.size() == 1);
    CHECK(findings[0].definition == "g");
    CHECK(findings[0].message.find("removed") != std::string::npos);
  }
  SECTION("dropping a parameter") {
    const auto findings = compat("f = LAMBDA(a,b, a);", "f = LAMBDA(a, a);");
    REQUIRE(findings.size() == 1);
    CHECK(findings[0].message.find("removed") != std::string::npos);
  }
  SECTION("appending a required parameter") {
    const auto findings = compat("f = LAMBDA(a, a);", "f = LAMBDA(a,b, a);");
    REQUIRE(findings.size() == 1);
    CHECK(findings[0].message.find("must be optional") != std::string::npos);
  }
  SECTION("case-insensitive parameter matching") {
    CHECK(compat("f = LAMBDA(Amt, Amt);", "f = LAMBDA(AMT, AMT);").empty());
  }
}

TEST_CASE("reports serialize to aligned text and to JSON") {
  const Module m = parse_module("Add\xce\xbb = LAMBDA(Parm1,Parm2, A2 + B2);");
  const LintReport report =
      lint_module(m, "table_fixture",
                  {LintRule::SelfContainedBody, LintRule::WrappedHelpers,
                   LintRule::PureLet});

  const std::string text = report_text(report);
  CHECK(text.find("R1-self-contained-body  Add\xce\xbb  [") == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') ==
        static_cast<long>(report.findings.size()));

  const auto doc = nlohmann::json::parse(report_json(report));
  CHECK(doc.at("module") == "table_fixture");
  CHECK(doc.at("verdict") == "non-compliant");
  REQUIRE(doc.at("findings").size() == report.findings.size());
  const auto& first = doc.at("findings").at(0);
  CHECK(first.at("rule") == "R1-self-contained-body");
  CHECK(first.at("fragment") == "A2");
  REQUIRE(first.at("span").size() == 2);
  CHECK(first.at("span").at(0).get<std::size_t>() <
        first.at("span").at(1).get<std::size_t>());
}

TEST_CASE("linting is deterministic over repeated runs") {
  const Module m = parse_module(
      "A\xce\xbb = LAMBDA(x, A1 + tbl[c] + LET(v, B2#, v));\n"
      "B = LAMBDA(y, y);");
  const std::string once = report_json(lint_module(m, "m"));
  const std::string twice = report_json(lint_module(m, "m"));
  CHECK(once == twice);
}

TEST_CASE("finding spans stay inside their definition's source slice") {
  const Module m = parse_module(
      "First\xce\xbb = LAMBDA(x, x);\n"
      "Second\xce\xbb = LAMBDA(x, A1 + x);\n"
      "Third\xce\xbb = LAMBDA(y, LET(q, Z9#, q));");
  for (const Definition& d : m.definitions)
    for (const Finding& f : check_self_contained(m, d)) {
      CHECK(f.span.begin >= d.span.begin);
      CHECK(f.span.end <= d.span.end);
      CHECK(m.source_text.substr(f.span.begin, f.span.end - f.span.begin) ==
            f.fragment);
    }
}

TEST_CASE("self-contained definitions ignore the host grid, dependent ones do not") {
  const Workbook host_a = workbook_from_json(R"json({
    "sheets": [{"name": "S", "cells": {"A2": {"v": 1}}}],
    "imports": [{"prefix": "M",
                 "module": "Goodλ = LAMBDA(x, x + 1);\nBadλ = LAMBDA(x, x + A2);"}]
  })json");
  Workbook host_b = host_a;
  host_b.sheets[0].cells[{1, 0}].literal = Scalar(50.0);

  const Module m = parse_module(host_a.imports[0]->module.source_text);
  CHECK(errors_r1_to_r3(parse_module("Goodλ = LAMBDA(x, x + 1);")).empty());
  REQUIRE(m.definitions.size() == 2);
  CHECK(check_self_contained(m, m.definitions[0]).empty());
  CHECK_FALSE(check_self_contained(m, m.definitions[1]).empty());

  Recalculator engine_a(host_a);
  Recalculator engine_b(host_b);
  const auto num = [](Value v) { return std::get<Scalar>(v).number(); };
  CHECK(num(engine_a.evaluate("=M.Good\xce\xbb(5)")) ==
        num(engine_b.evaluate("=M.Good\xce\xbb(5)")));
  CHECK(num(engine_a.evaluate("=M.Bad\xce\xbb(5)")) == 6.0);
  CHECK(num(engine_b.evaluate("=M.Bad\xce\xbb(5)")) == 55.0);
}
