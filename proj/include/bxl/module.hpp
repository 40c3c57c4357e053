#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bxl/dates.hpp"
#include "bxl/parser.hpp"

namespace bxl {

/// One row of a REVISIONS table: | date | author | note.
struct Revision {
  std::string date_text;
  std::string author;
  std::string note;
};

struct DocParam {
  std::string name;
  bool required = true;
  std::string constraint;
};

struct DocExample {
  std::string result;
  std::string formula;
};

/// Structured documentation for a definition, assembled from its leading
/// comment block and/or the help text embedded in its body. Fields mirror
/// the help-block layout: description, version, parameter constraints,
/// examples, requisites.
struct DocBlock {
  std::string description;
  std::string version;
  std::string requisites;
  std::vector<DocParam> params;
  std::vector<DocExample> examples;
  std::vector<Revision> revisions;

  const DocParam* find_param(std::string_view name) const {
    for (const DocParam& p : params)
      if (ci_equal(p.name, name)) return &p;
    return nullptr;
  }

  bool empty() const {
    return description.empty() && version.empty() && requisites.empty() &&
           params.empty() && examples.empty() && revisions.empty();
  }

  /// Field-wise union; existing non-empty fields win, lists merge by key.
  void absorb(const DocBlock& other) {
    if (description.empty()) description = other.description;
    if (version.empty()) version = other.version;
    if (requisites.empty()) requisites = other.requisites;
    for (const DocParam& p : other.params)
      if (!find_param(p.name)) params.push_back(p);
    for (const DocExample& e : other.examples) {
      const bool present = std::any_of(examples.begin(), examples.end(),
                                       [&](const DocExample& x) { return x.formula == e.formula; });
      if (!present) examples.push_back(e);
    }
    for (const Revision& r : other.revisions) {
      const bool present = std::any_of(revisions.begin(), revisions.end(),
                                       [&](const Revision& x) {
                                         return x.date_text == r.date_text && x.note == r.note;
                                       });
      if (!present) revisions.push_back(r);
    }
  }
};

/// A named lambda inside a module file.
struct Definition {
  std::string name;
  ExprPtr lambda;       // always a LambdaExpr
  DocBlock doc;         // from the comment block above the definition
  Span span;            // name through closing ';'
  Span expr_span;       // just the lambda text
  std::string source;   // module-text slice of the whole definition

  const LambdaExpr& lambda_node() const { return *lambda->as<LambdaExpr>(); }
};

struct Module {
  std::string source_text;
  std::vector<Definition> definitions;
  std::string version;  // explicit VERSION text or the latest revision date

  const Definition* find(std::string_view name) const {
    for (const Definition& d : definitions)
      if (ci_equal(d.name, name)) return &d;
    return nullptr;
  }
};

namespace doc_detail {

inline std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return std::string(s);
}

/// Splits help text into rows (newlines or ¶) of cells (→ separators).
inline std::vector<std::vector<std::string>> help_rows(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  std::size_t i = 0;
  auto end_cell = [&] {
    row.push_back(trim(cell));
    cell.clear();
  };
  auto end_row = [&] {
    end_cell();
    while (!row.empty() && row.back().empty()) row.pop_back();
    if (!row.empty()) rows.push_back(row);
    row.clear();
  };
  while (i < text.size()) {
    if (text[i] == '\n') {
      end_row();
      ++i;
      continue;
    }
    if (text.compare(i, 2, "\xc2\xb6") == 0) {  // ¶
      end_row();
      i += 2;
      continue;
    }
    if (text.compare(i, 3, "\xe2\x86\x92") == 0) {  // →
      end_cell();
      i += 3;
      continue;
    }
    cell.push_back(text[i]);
    ++i;
  }
  end_row();
  return rows;
}

/// "DESCRIPTION:/**text*/" and "DESCRIPTION: text" both yield "text".
inline std::string strip_doc_markers(std::string s) {
  std::string t = trim(s);
  if (t.rfind("/**", 0) == 0) t = t.substr(3);
  else if (t.rfind("/*", 0) == 0) t = t.substr(2);
  if (t.size() >= 2 && t.compare(t.size() - 2, 2, "*/") == 0) t = t.substr(0, t.size() - 2);
  return trim(t);
}

struct SectionTag {
  std::string_view keyword;
  int id;
};

// Section ids: 0 plain field, 1 parameters, 2 examples, 3 revisions.
inline const SectionTag* match_section(std::string_view cell0, std::string& rest) {
  static const SectionTag kTags[] = {
      {"FUNCTION NAME:", 0}, {"DESCRIPTION:", 0}, {"VERSION:", 0},
      {"AUTHOR:", 0},        {"GIST URL:", 0},    {"REQUISITES:", 0},
      {"NOTES:", 0},         {"PARAMETERS:", 1},  {"EXAMPLES:", 2},
      {"REVISIONS:", 3},
  };
  for (const SectionTag& tag : kTags) {
    if (cell0.size() >= tag.keyword.size() &&
        ci_equal(cell0.substr(0, tag.keyword.size()), tag.keyword)) {
      rest = trim(cell0.substr(tag.keyword.size()));
      return &tag;
    }
  }
  return nullptr;
}

/// Dates in revision rows and VERSION lines: the strict forms plus
/// "Mar 28 2023".
inline std::optional<std::int64_t> parse_loose_date(std::string_view text) {
  if (auto s = dates::parse_date_text(text)) return s;
  static constexpr std::string_view kMonths[] = {
      "jan", "feb", "mar", "apr", "may", "jun",
      "jul", "aug", "sep", "oct", "nov", "dec"};
  std::string t = doc_detail::trim(text);
  if (t.size() < 8) return std::nullopt;
  int month = 0;
  for (int m = 0; m < 12; ++m) {
    if (ci_equal(t.substr(0, 3), kMonths[m])) {
      month = m + 1;
      break;
    }
  }
  if (month == 0) return std::nullopt;
  std::size_t i = 3;
  while (i < t.size() && !(t[i] >= '0' && t[i] <= '9')) ++i;
  int day = 0;
  while (i < t.size() && t[i] >= '0' && t[i] <= '9') day = day * 10 + (t[i++] - '0');
  while (i < t.size() && !(t[i] >= '0' && t[i] <= '9')) ++i;
  int year = 0;
  while (i < t.size() && t[i] >= '0' && t[i] <= '9') year = year * 10 + (t[i++] - '0');
  if (day < 1 || day > 31 || year < 1900 || year > 9999) return std::nullopt;
  if (month < 1 || day > dates::days_in_month(year, month)) return std::nullopt;
  const auto serial = dates::serial_from_civil(year, month, day);
  if (!dates::valid_serial(serial)) return std::nullopt;
  return serial;
}

}  // namespace doc_detail

/// Parses help-block layout text (from a doc comment or an embedded Help
/// string) into a DocBlock. Unrecognized lines outside a section are
/// ignored, so free-form comments are fine.
inline DocBlock parse_help_layout(std::string_view text) {
  using namespace doc_detail;
  DocBlock doc;
  int section = -1;  // -1 none, 1 parameters, 2 examples, 3 revisions,
                     // 4 open /** description block
  for (const auto& row : help_rows(text)) {
    if (section == 4) {
      std::string joined = row[0];
      for (std::size_t i = 1; i < row.size(); ++i) joined += " " + row[i];
      const std::size_t close = joined.find("*/");
      doc.description += " " + trim(joined.substr(0, close == std::string::npos
                                                         ? joined.size()
                                                         : close));
      if (close != std::string::npos) section = -1;
      continue;
    }
    std::string rest;
    const SectionTag* tag = match_section(row[0], rest);
    if (tag) {
      section = tag->id;
      std::string value = rest;
      if (value.empty() && row.size() > 1) value = row[1];
      if (tag->keyword == "DESCRIPTION:") {
        const bool open_block = value.rfind("/*", 0) == 0 &&
                                value.find("*/") == std::string::npos;
        doc.description = strip_doc_markers(value);
        section = open_block ? 4 : -1;
      } else if (tag->keyword == "VERSION:") {
        doc.version = strip_doc_markers(value);
        section = -1;
      } else if (tag->keyword == "REQUISITES:") {
        doc.requisites = strip_doc_markers(value);
        section = -1;
      } else if (tag->id == 0) {
        section = -1;
      }
      continue;
    }
    if (section == 1) {
      // name -> (Required)/(Optional) constraint text
      DocParam p;
      p.name = row[0];
      std::string detail = row.size() > 1 ? row[1] : std::string();
      for (std::size_t i = 2; i < row.size(); ++i) detail += " " + row[i];
      const std::string folded = ci_fold(detail);
      if (folded.find("(optional") != std::string::npos) p.required = false;
      else if (folded.find("(required") != std::string::npos) p.required = true;
      const std::size_t close = detail.find(')');
      p.constraint = trim(close != std::string::npos &&
                          (folded.find("(optional") == 0 || folded.find("(required") == 0)
                              ? detail.substr(close + 1)
                              : detail);
      if (!p.name.empty()) doc.params.push_back(std::move(p));
      continue;
    }
    if (section == 2) {
      if (ci_equal(row[0], "Result")) continue;  // column headers
      DocExample e;
      e.result = row[0];
      if (row.size() > 1) e.formula = row[1];
      doc.examples.push_back(std::move(e));
      continue;
    }
    if (section == 3) {
      // | date | author | note  (a leading | splits into pipe cells)
      std::string line = row[0];
      for (std::size_t i = 1; i < row.size(); ++i) line += " " + row[i];
      if (line.empty() || line[0] != '|') continue;
      std::vector<std::string> cells;
      std::size_t start = 1;
      while (start <= line.size()) {
        std::size_t bar = line.find('|', start);
        if (bar == std::string::npos) bar = line.size();
        cells.push_back(trim(std::string_view(line).substr(start, bar - start)));
        start = bar + 1;
      }
      while (!cells.empty() && cells.back().empty()) cells.pop_back();
      if (cells.empty()) continue;
      if (ci_equal(cells[0], "date")) continue;  // header row
      Revision r;
      r.date_text = cells[0];
      if (cells.size() > 1) r.author = cells[1];
      if (cells.size() > 2) r.note = cells[2];
      doc.revisions.push_back(std::move(r));
      continue;
    }
  }
  return doc;
}

/// Finds the LET binding named Help (if any) in a definition body and
/// recovers its literal text by folding string literals and concatenations.
/// Returns the longest string found under the binding's value.
inline std::optional<std::string> embedded_help_text(const Definition& def) {
  const LambdaExpr& lam = def.lambda_node();
  const LetExpr* let = lam.body->as<LetExpr>();
  if (!let) return std::nullopt;
  const ExprPtr* help_value = nullptr;
  for (const LetBinding& b : let->bindings)
    if (ci_equal(b.name, "Help")) help_value = &b.value;
  if (!help_value) return std::nullopt;

  std::string best;
  struct Walk {
    std::string* best;
    std::optional<std::string> fold(const Expr& e) const {
      if (const auto* t = e.as<TextLit>()) return t->value;
      if (const auto* b = e.as<Binary>(); b && b->op == BinOp::Concat) {
        auto l = fold(*b->lhs);
        auto r = fold(*b->rhs);
        if (l && r) return *l + *r;
      }
      return std::nullopt;
    }
    void visit(const Expr& e) const {
      if (auto folded = fold(e)) {
        if (folded->size() > best->size()) *best = *folded;
        return;
      }
      std::visit(
          [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, FuncCall>) {
              for (const auto& a : n.args) visit(*a);
            } else if constexpr (std::is_same_v<T, Invoke>) {
              visit(*n.callee);
              for (const auto& a : n.args) visit(*a);
            } else if constexpr (std::is_same_v<T, Binary>) {
              visit(*n.lhs);
              visit(*n.rhs);
            } else if constexpr (std::is_same_v<T, Unary>) {
              visit(*n.operand);
            } else if constexpr (std::is_same_v<T, LetExpr>) {
              for (const auto& b : n.bindings) visit(*b.value);
              visit(*n.body);
            } else if constexpr (std::is_same_v<T, LambdaExpr>) {
              visit(*n.body);
            } else if constexpr (std::is_same_v<T, ArrayLit>) {
              for (const auto& el : n.elements) visit(*el);
            }
          },
          e.node);
    }
  };
  Walk w{&best};
  w.visit(**help_value);
  if (best.empty()) return std::nullopt;
  return best;
}

/// Comment-derived plus embedded documentation for a definition.
inline DocBlock full_documentation(const Definition& def) {
  DocBlock doc = def.doc;
  if (auto help = embedded_help_text(def)) doc.absorb(parse_help_layout(*help));
  return doc;
}

class ModuleParser : Parser {
 public:
  ModuleParser(LexResult lexed, std::string_view source)
      : Parser(std::move(lexed.tokens), source),
        comments_(std::move(lexed.comments)),
        source_(source) {}

  Module run() {
    Module mod;
    mod.source_text = std::string(source_);
    std::size_t prev_end = 0;
    while (current().kind != TokenKind::End) {
      Definition def = parse_definition(prev_end);
      prev_end = def.span.end;
      for (const Definition& d : mod.definitions)
        if (ci_equal(d.name, def.name))
          throw ParseError("duplicate definition '" + def.name + "'", def.span.begin);
      mod.definitions.push_back(std::move(def));
    }
    mod.version = module_version(mod);
    return mod;
  }

 private:
  Definition parse_definition(std::size_t prev_end) {
    if (current().kind != TokenKind::Identifier)
      throw ParseError("expected a definition name", current().span.begin);
    const Token name = current();
    advance();
    if (!(current().kind == TokenKind::Operator && current().lexeme == "="))
      throw ParseError("expected '=' after definition name", current().span.begin);
    advance();

    const Span expr_begin = current().span;
    ExprPtr expr = parse_one_expression();
    if (!expr->is<LambdaExpr>())
      throw ParseError("definition '" + name.lexeme + "' must be a LAMBDA",
                       expr_begin.begin);
    if (!at_punct(';'))
      throw ParseError("expected ';' after definition", current().span.begin);
    const Token semi = current();
    advance();

    Definition def;
    def.name = name.lexeme;
    def.lambda = std::move(expr);
    def.span = {name.span.begin, semi.span.end};
    def.expr_span = {expr_begin.begin, semi.span.begin};
    def.source = std::string(source_.substr(def.span.begin, def.span.end - def.span.begin));
    def.doc = leading_doc(prev_end, name.span.begin);
    return def;
  }

  // Every comment between the previous definition and this one documents
  // this definition.
  DocBlock leading_doc(std::size_t from, std::size_t to) {
    std::string text;
    for (const Comment& c : comments_) {
      if (c.span.begin < from || c.span.begin >= to) continue;
      if (!text.empty()) text += '\n';
      text += c.text;
    }
    if (text.empty()) return {};
    return parse_help_layout(text);
  }

  static std::string module_version(const Module& mod) {
    std::string best_text;
    std::int64_t best_serial = -1;
    auto consider = [&](const std::string& text) {
      if (text.empty()) return;
      const auto serial = doc_detail::parse_loose_date(text);
      if (!serial) {
        if (best_serial < 0 && best_text.empty()) best_text = text;
        return;
      }
      if (*serial > best_serial) {
        best_serial = *serial;
        best_text = text;
      }
    };
    for (const Definition& d : mod.definitions) {
      DocBlock doc = full_documentation(d);
      consider(doc.version);
      for (const Revision& r : doc.revisions) consider(r.date_text);
    }
    return best_text;
  }

  std::vector<Comment> comments_;
  std::string_view source_;
};

/// Parses a .bxl module file: `name = LAMBDA(...);` definitions with //
/// and /* */ comments, where a comment block immediately above a definition
/// documents it. Throws ParseError on malformed input.
inline Module parse_module(std::string_view source) {
  return ModuleParser(tokenize_module(source), source).run();
}

/// Component directory: name and description per definition.
struct ComponentInfo {
  std::string name;
  std::string description;
};

inline std::vector<ComponentInfo> list_components(const Module& mod) {
  std::vector<ComponentInfo> out;
  for (const Definition& d : mod.definitions)
    out.push_back({d.name, full_documentation(d).description});
  return out;
}

}  // namespace bxl
