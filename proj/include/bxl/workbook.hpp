#pragma once

#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bxl/eval.hpp"
#include "bxl/format.hpp"
#include "bxl/module.hpp"
#include "bxl/value.hpp"

#include "../../vendor/json.hpp"

namespace bxl {

/// Where an imported module came from: the locator handed to fetch, the
/// content digest, and the retrieval timestamp.
struct ModuleSource {
  std::string locator;
  std::string sha256;
  std::string retrieved_at;
};

/// One imported module registered under a prefix. The full source rides
/// along so a workbook is self-contained. Environments reference records by
/// address, so records live behind shared_ptr and never move.
struct ImportRecord {
  std::string prefix;
  Module module;
  ModuleSource source;
};

struct CellContent {
  std::string formula;  // leading '='; empty means the literal below
  Scalar literal;

  bool is_formula() const { return !formula.empty(); }
};

struct Sheet {
  std::string name;
  std::map<std::pair<int, int>, CellContent> cells;  // (row, col), 0-based
};

struct DefinedName {
  std::string name;
  std::string refers_to;
};

struct Table {
  std::string name;
  std::string sheet;
  int origin_row = 0;
  int origin_col = 0;
  std::vector<std::string> columns;
  std::vector<std::vector<Scalar>> rows;

  int column_index(std::string_view col) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (ci_equal(columns[i], col)) return static_cast<int>(i);
    return -1;
  }
};

struct Workbook {
  std::vector<Sheet> sheets;
  std::vector<DefinedName> names;
  std::vector<Table> tables;
  std::vector<std::shared_ptr<ImportRecord>> imports;
  EvalSettings settings;

  Sheet* find_sheet(std::string_view name) {
    for (Sheet& s : sheets)
      if (ci_equal(s.name, name)) return &s;
    return nullptr;
  }
  const Sheet* find_sheet(std::string_view name) const {
    return const_cast<Workbook*>(this)->find_sheet(name);
  }
  int sheet_index(std::string_view name) const {
    for (std::size_t i = 0; i < sheets.size(); ++i)
      if (ci_equal(sheets[i].name, name)) return static_cast<int>(i);
    return -1;
  }
  Sheet& ensure_sheet(const std::string& name) {
    if (Sheet* s = find_sheet(name)) return *s;
    sheets.push_back(Sheet{name, {}});
    return sheets.back();
  }

  const DefinedName* find_name(std::string_view name) const {
    for (const DefinedName& n : names)
      if (ci_equal(n.name, name)) return &n;
    return nullptr;
  }

  const Table* find_table(std::string_view name) const {
    for (const Table& t : tables)
      if (ci_equal(t.name, name)) return &t;
    return nullptr;
  }

  const ImportRecord* find_import(std::string_view prefix) const {
    for (const auto& r : imports)
      if (ci_equal(r->prefix, prefix)) return r.get();
    return nullptr;
  }
};

class WorkbookError : public std::runtime_error {
 public:
  explicit WorkbookError(const std::string& message)
      : std::runtime_error(message) {}
};

// A1 address codec -------------------------------------------------------

/// "AB12" -> (row 11, col 27). Rejects absolute markers and sheet prefixes;
/// workbook cell keys are plain relative addresses.
inline std::optional<std::pair<int, int>> parse_a1(std::string_view text) {
  std::size_t i = 0;
  long col = 0;
  while (i < text.size() && ((text[i] >= 'A' && text[i] <= 'Z') ||
                             (text[i] >= 'a' && text[i] <= 'z'))) {
    const char c = static_cast<char>(text[i] | 0x20);
    col = col * 26 + (c - 'a' + 1);
    if (col > 16384 * 32) return std::nullopt;
    ++i;
  }
  if (i == 0 || col == 0 || i >= text.size()) return std::nullopt;
  long row = 0;
  for (; i < text.size(); ++i) {
    if (text[i] < '0' || text[i] > '9') return std::nullopt;
    row = row * 10 + (text[i] - '0');
    if (row > 100'000'000) return std::nullopt;
  }
  if (row == 0) return std::nullopt;
  return std::make_pair(static_cast<int>(row - 1), static_cast<int>(col - 1));
}

inline std::string a1_text(int row, int col) {
  return column_letters(col) + std::to_string(row + 1);
}

// JSON codec --------------------------------------------------------------

namespace wbk_detail {

using json = nlohmann::json;

inline Scalar scalar_from_json(const json& v) {
  if (v.is_null()) return Scalar(Blank{});
  if (v.is_boolean()) return Scalar(v.get<bool>());
  if (v.is_number()) return Scalar(v.get<double>());
  if (v.is_string()) return Scalar(v.get<std::string>());
  throw WorkbookError{"cell literal must be null, boolean, number, or string"};
}

inline json scalar_to_json(const Scalar& s) {
  if (s.is_blank_like()) return nullptr;
  if (s.is_bool()) return s.boolean();
  if (s.is_number()) return s.number();
  if (s.is_text()) return s.text();
  return std::string(error_code_text(s.error()));
}

inline const json* get_field(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

inline std::string require_string(const json& obj, const char* key,
                                  const char* where) {
  const json* f = get_field(obj, key);
  if (!f || !f->is_string())
    throw WorkbookError{std::string(where) + " needs a string \"" + key + "\""};
  return f->get<std::string>();
}

}  // namespace wbk_detail

inline Workbook workbook_from_json(const std::string& text) {
  using wbk_detail::get_field;
  using wbk_detail::require_string;
  using json = nlohmann::json;

  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw WorkbookError{"workbook is not valid JSON"};
  if (!doc.is_object()) throw WorkbookError{"workbook root must be an object"};

  Workbook wb;
  if (const json* sheets = get_field(doc, "sheets")) {
    if (!sheets->is_array()) throw WorkbookError{"\"sheets\" must be an array"};
    for (const json& js : *sheets) {
      Sheet sheet;
      sheet.name = require_string(js, "name", "sheet");
      if (wb.find_sheet(sheet.name))
        throw WorkbookError{"duplicate sheet '" + sheet.name + "'"};
      if (const json* cells = get_field(js, "cells")) {
        if (!cells->is_object())
          throw WorkbookError{"sheet \"cells\" must be an object"};
        for (const auto& [addr, cj] : cells->items()) {
          const auto rc = parse_a1(addr);
          if (!rc)
            throw WorkbookError{"bad cell address '" + addr + "' on sheet '" +
                                sheet.name + "'"};
          CellContent content;
          if (cj.is_object()) {
            if (const json* f = get_field(cj, "f")) {
              if (!f->is_string())
                throw WorkbookError{"cell \"f\" must be a string at " + addr};
              content.formula = f->get<std::string>();
              if (content.formula.empty() || content.formula[0] != '=')
                throw WorkbookError{"formula at " + addr + " must start with '='"};
            } else if (const json* v = get_field(cj, "v")) {
              content.literal = wbk_detail::scalar_from_json(*v);
            } else {
              throw WorkbookError{"cell at " + addr + " needs \"f\" or \"v\""};
            }
          } else {
            content.literal = wbk_detail::scalar_from_json(cj);
          }
          sheet.cells[{rc->first, rc->second}] = std::move(content);
        }
      }
      wb.sheets.push_back(std::move(sheet));
    }
  }

  if (const json* names = get_field(doc, "names")) {
    if (!names->is_array()) throw WorkbookError{"\"names\" must be an array"};
    for (const json& jn : *names) {
      DefinedName dn;
      dn.name = require_string(jn, "name", "defined name");
      dn.refers_to = require_string(jn, "refers_to", "defined name");
      if (wb.find_name(dn.name))
        throw WorkbookError{"duplicate defined name '" + dn.name + "'"};
      wb.names.push_back(std::move(dn));
    }
  }

  if (const json* tables = get_field(doc, "tables")) {
    if (!tables->is_array()) throw WorkbookError{"\"tables\" must be an array"};
    for (const json& jt : *tables) {
      Table t;
      t.name = require_string(jt, "name", "table");
      t.sheet = require_string(jt, "sheet", "table");
      const std::string origin = require_string(jt, "origin", "table");
      const auto rc = parse_a1(origin);
      if (!rc) throw WorkbookError{"bad table origin '" + origin + "'"};
      t.origin_row = rc->first;
      t.origin_col = rc->second;
      const json* cols = get_field(jt, "columns");
      if (!cols || !cols->is_array() || cols->empty())
        throw WorkbookError{"table '" + t.name + "' needs \"columns\""};
      for (const json& c : *cols) {
        if (!c.is_string())
          throw WorkbookError{"table column names must be strings"};
        t.columns.push_back(c.get<std::string>());
      }
      if (const json* rows = get_field(jt, "rows")) {
        if (!rows->is_array())
          throw WorkbookError{"table \"rows\" must be an array"};
        for (const json& jr : *rows) {
          if (!jr.is_array() || jr.size() != t.columns.size())
            throw WorkbookError{"table '" + t.name +
                                "' row width differs from its column count"};
          std::vector<Scalar> row;
          for (const json& cell : jr)
            row.push_back(wbk_detail::scalar_from_json(cell));
          t.rows.push_back(std::move(row));
        }
      }
      if (wb.find_table(t.name))
        throw WorkbookError{"duplicate table '" + t.name + "'"};
      wb.tables.push_back(std::move(t));
    }
  }

  if (const json* imports = get_field(doc, "imports")) {
    if (!imports->is_array()) throw WorkbookError{"\"imports\" must be an array"};
    for (const json& ji : *imports) {
      auto rec = std::make_shared<ImportRecord>();
      rec->prefix = require_string(ji, "prefix", "import");
      if (wb.find_import(rec->prefix))
        throw WorkbookError{"duplicate import prefix '" + rec->prefix + "'"};
      const std::string source = require_string(ji, "module", "import");
      try {
        rec->module = parse_module(source);
      } catch (const ParseError& e) {
        throw WorkbookError{"import '" + rec->prefix +
                            "' has an unparseable module: " + e.what()};
      }
      if (const json* src = get_field(ji, "source")) {
        if (!src->is_object())
          throw WorkbookError{"import \"source\" must be an object"};
        if (const json* f = get_field(*src, "locator"))
          rec->source.locator = f->get<std::string>();
        if (const json* f = get_field(*src, "sha256"))
          rec->source.sha256 = f->get<std::string>();
        if (const json* f = get_field(*src, "retrieved_at"))
          rec->source.retrieved_at = f->get<std::string>();
      }
      wb.imports.push_back(std::move(rec));
    }
  }

  if (const json* settings = get_field(doc, "settings")) {
    if (!settings->is_object())
      throw WorkbookError{"\"settings\" must be an object"};
    if (const json* limit = get_field(*settings, "recursion_limit")) {
      if (!limit->is_number_integer() || limit->get<int>() < 1)
        throw WorkbookError{"recursion_limit must be a positive integer"};
      wb.settings.recursion_limit = limit->get<int>();
    }
  }

  return wb;
}

inline std::string workbook_to_json(const Workbook& wb) {
  using json = nlohmann::json;
  json doc = json::object();

  json sheets = json::array();
  for (const Sheet& s : wb.sheets) {
    json js = json::object();
    js["name"] = s.name;
    json cells = json::object();
    for (const auto& [rc, content] : s.cells) {
      const std::string addr = a1_text(rc.first, rc.second);
      if (content.is_formula())
        cells[addr] = json{{"f", content.formula}};
      else
        cells[addr] = json{{"v", wbk_detail::scalar_to_json(content.literal)}};
    }
    js["cells"] = std::move(cells);
    sheets.push_back(std::move(js));
  }
  doc["sheets"] = std::move(sheets);

  json names = json::array();
  for (const DefinedName& n : wb.names)
    names.push_back(json{{"name", n.name}, {"refers_to", n.refers_to}});
  doc["names"] = std::move(names);

  json tables = json::array();
  for (const Table& t : wb.tables) {
    json jt = json::object();
    jt["name"] = t.name;
    jt["sheet"] = t.sheet;
    jt["origin"] = a1_text(t.origin_row, t.origin_col);
    jt["columns"] = t.columns;
    json rows = json::array();
    for (const auto& row : t.rows) {
      json jr = json::array();
      for (const Scalar& cell : row) jr.push_back(wbk_detail::scalar_to_json(cell));
      rows.push_back(std::move(jr));
    }
    jt["rows"] = std::move(rows);
    tables.push_back(std::move(jt));
  }
  doc["tables"] = std::move(tables);

  json imports = json::array();
  for (const auto& rec : wb.imports) {
    json ji = json::object();
    ji["prefix"] = rec->prefix;
    ji["module"] = rec->module.source_text;
    ji["source"] = json{{"locator", rec->source.locator},
                        {"sha256", rec->source.sha256},
                        {"retrieved_at", rec->source.retrieved_at}};
    imports.push_back(std::move(ji));
  }
  doc["imports"] = std::move(imports);

  doc["settings"] = json{{"recursion_limit", wb.settings.recursion_limit}};
  return doc.dump(2) + "\n";
}

inline Workbook load_workbook(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WorkbookError{"cannot open workbook '" + path + "'"};
  std::ostringstream buf;
  buf << in.rdbuf();
  return workbook_from_json(buf.str());
}

inline void save_workbook(const Workbook& wb, const std::string& path) {
  const std::string text = workbook_to_json(wb);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw WorkbookError{"cannot write workbook '" + path + "'"};
  out << text;
  if (!out) throw WorkbookError{"short write on workbook '" + path + "'"};
}

}  // namespace bxl
