#include <catch2/catch_amalgamated.hpp>

#include "bxl/lexer.hpp"

using namespace bxl;

namespace {

std::vector<Token> lex(std::string_view s) {
  auto tokens = tokenize(s);
  REQUIRE(!tokens.empty());
  REQUIRE(tokens.back().kind == TokenKind::End);
  tokens.pop_back();
  return tokens;
}

std::vector<std::string> lexemes(std::string_view s) {
  std::vector<std::string> out;
  for (const auto& t : lex(s)) out.push_back(t.lexeme);
  return out;
}

std::vector<TokenKind> kinds(std::string_view s) {
  std::vector<TokenKind> out;
  for (const auto& t : lex(s)) out.push_back(t.kind);
  return out;
}

}  // namespace

TEST_CASE("simple arithmetic") {
  auto ts = lex("=1+2");
  REQUIRE(ts.size() == 4);
  CHECK(ts[0].kind == TokenKind::Operator);
  CHECK(ts[1].kind == TokenKind::Number);
  CHECK(ts[1].number == 1.0);
  CHECK(ts[2].kind == TokenKind::Operator);
  CHECK(ts[3].number == 2.0);
}

TEST_CASE("numbers") {
  CHECK(lex("1.5")[0].number == 1.5);
  CHECK(lex(".25")[0].number == 0.25);
  CHECK(lex("1e3")[0].number == 1000.0);
  CHECK(lex("2.5E-2")[0].number == 0.025);
  CHECK(lex("10.")[0].number == 10.0);
}

TEST_CASE("text literals unescape doubled quotes") {
  auto ts = lex("\"a\"\"b\"");
  REQUIRE(ts.size() == 1);
  CHECK(ts[0].kind == TokenKind::Text);
  CHECK(ts[0].text == "a\"b");
  CHECK_THROWS_AS(tokenize("\"open"), ParseError);
}

TEST_CASE("booleans are their own kind") {
  auto ts = lex("TRUE+false");
  CHECK(ts[0].kind == TokenKind::Boolean);
  CHECK(ts[0].boolean);
  CHECK(ts[2].kind == TokenKind::Boolean);
  CHECK(!ts[2].boolean);
  // TRUEX is a name, not a boolean with a suffix.
  CHECK(kinds("TRUEX") == std::vector{TokenKind::Identifier});
}

TEST_CASE("error literals match case-insensitively") {
  auto ts = lex("#Value!");
  REQUIRE(ts.size() == 1);
  CHECK(ts[0].kind == TokenKind::ErrorLiteral);
  CHECK(ts[0].error == ErrorCode::Value);
  CHECK(lex("#DIV/0!")[0].error == ErrorCode::Div0);
  CHECK(lex("#n/a")[0].error == ErrorCode::NA);
  CHECK(lex("#SPILL!")[0].error == ErrorCode::Spill);
  CHECK(lex("#NAME?")[0].error == ErrorCode::Name);
}

TEST_CASE("cell references versus identifiers") {
  CHECK(kinds("A2") == std::vector{TokenKind::CellRef});
  CHECK(kinds("$F$6") == std::vector{TokenKind::CellRef});
  CHECK(kinds("XFD1048576") == std::vector{TokenKind::CellRef});
  // One past either grid bound falls back to a name.
  CHECK(kinds("XFE1") == std::vector{TokenKind::Identifier});
  CHECK(kinds("A1048577") == std::vector{TokenKind::Identifier});
  CHECK(kinds("A0") == std::vector{TokenKind::Identifier});
  CHECK(kinds("Parm1") == std::vector{TokenKind::Identifier});
  CHECK(kinds("Row") == std::vector{TokenKind::Identifier});
  // A trailing name character absorbs the whole word into an identifier.
  CHECK(kinds("A2x") == std::vector{TokenKind::Identifier});
  CHECK(kinds("A2.b") == std::vector{TokenKind::Identifier});
}

TEST_CASE("identifiers admit lambda glyphs dots and underscores") {
  CHECK(lexemes("BXD.CreateStartDatesλ") ==
        std::vector<std::string>{"BXD.CreateStartDatesλ"});
  CHECK(kinds("SumColumnsλ") == std::vector{TokenKind::Identifier});
  CHECK(kinds("_tmp") == std::vector{TokenKind::Identifier});
  CHECK(kinds("λx") == std::vector{TokenKind::Identifier});
}

TEST_CASE("call with text and identifier arguments") {
  auto ts = lex("BXD.CreateStartDatesλ(Start, \"D\")");
  REQUIRE(ts.size() == 6);
  CHECK(ts[0].kind == TokenKind::Identifier);
  CHECK(ts[1].lexeme == "(");
  CHECK(ts[2].kind == TokenKind::Identifier);
  CHECK(ts[2].lexeme == "Start");
  CHECK(ts[3].lexeme == ",");
  CHECK(ts[4].kind == TokenKind::Text);
  CHECK(ts[4].text == "D");
  CHECK(ts[5].lexeme == ")");
}

TEST_CASE("structured reference single column") {
  auto ts = lex("tblBI[First Date]");
  REQUIRE(ts.size() == 4);
  CHECK(ts[0].kind == TokenKind::TableRefPart);
  CHECK(ts[0].lexeme == "tblBI");
  CHECK(ts[1].lexeme == "[");
  CHECK(ts[2].kind == TokenKind::TableRefPart);
  CHECK(ts[2].lexeme == "First Date");
  CHECK(ts[3].lexeme == "]");
}

TEST_CASE("structured reference column span") {
  auto ts = lex("tblBI[[ID]:[Expense Description]]");
  REQUIRE(ts.size() == 10);
  CHECK(ts[0].kind == TokenKind::TableRefPart);
  CHECK(ts[1].lexeme == "[");
  CHECK(ts[2].lexeme == "[");
  CHECK(ts[3].lexeme == "ID");
  CHECK(ts[3].kind == TokenKind::TableRefPart);
  CHECK(ts[4].lexeme == "]");
  CHECK(ts[5].lexeme == ":");
  CHECK(ts[6].lexeme == "[");
  CHECK(ts[7].lexeme == "Expense Description");
  CHECK(ts[8].lexeme == "]");
  CHECK(ts[9].lexeme == "]");
}

TEST_CASE("bracket after space is not a structured reference") {
  // LAMBDA optional parameters: [x] stands alone.
  auto ts = lex("LAMBDA( [x], 1)");
  CHECK(ts[0].kind == TokenKind::Identifier);
  CHECK(ts[2].lexeme == "[");
  CHECK(ts[3].kind == TokenKind::Identifier);
  CHECK(ts[4].lexeme == "]");
}

TEST_CASE("spill suffix lexes as punct") {
  auto ts = lex("$F$6#");
  REQUIRE(ts.size() == 2);
  CHECK(ts[0].kind == TokenKind::CellRef);
  CHECK(ts[1].kind == TokenKind::Punct);
  CHECK(ts[1].lexeme == "#");
}

TEST_CASE("quoted sheet names") {
  auto ts = lex("'Rpt Summary'!A5");
  REQUIRE(ts.size() == 3);
  CHECK(ts[0].kind == TokenKind::Identifier);
  CHECK(ts[0].text == "Rpt Summary");
  CHECK(ts[1].lexeme == "!");
  CHECK(ts[2].kind == TokenKind::CellRef);
  CHECK(lex("'It''s'!B2")[0].text == "It's");
}

TEST_CASE("compound comparison operators") {
  CHECK(lexemes("a<=b<>c>=d") ==
        std::vector<std::string>{"a", "<=", "b", "<>", "c", ">=", "d"});
}

TEST_CASE("token spans cover the source without whitespace") {
  const std::string src = "= SUM( A1:B2 , 3.5 ) & \"x\"";
  for (const auto& t : lex(src)) {
    CHECK(t.span.end > t.span.begin);
    CHECK(src.substr(t.span.begin, t.span.end - t.span.begin) == t.lexeme);
  }
  std::string no_space;
  for (char c : src)
    if (c != ' ') no_space += c;
  std::string joined;
  for (const auto& t : lex(src)) joined += t.lexeme;
  CHECK(joined == no_space);
}

TEST_CASE("lex errors carry offsets") {
  try {
    tokenize("1 + ~2");
    FAIL("expected a lex error");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 4);
  }
}

TEST_CASE("formula mode does not recognize comments, module mode collects them") {
  // In a formula, /* is just a division and a multiplication.
  auto ts = lex("1 /* hi */ + 2");
  CHECK(ts[1].lexeme == "/");
  CHECK(ts[2].lexeme == "*");

  auto res = tokenize_module("// note\nx = 1; /* block */ y = 2;");
  REQUIRE(res.comments.size() == 2);
  CHECK(res.comments[0].text == " note");
  CHECK(res.comments[1].text == " block ");
}

TEST_CASE("block comments do not nest") {
  // The first */ closes the comment; the rest is tokenized.
  auto res = tokenize_module("/* a /* b */ x = 1;");
  REQUIRE(res.comments.size() == 1);
  CHECK(res.comments[0].text == " a /* b ");
  CHECK(res.tokens[0].lexeme == "x");
}
