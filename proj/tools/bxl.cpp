#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bxl/budget_demo.hpp"
#include "bxl/lint.hpp"
#include "bxl/recalc.hpp"
#include "bxl/registry.hpp"
#include "bxl/stdlib_bx.hpp"
#include "bxl/workbook.hpp"

#include "CLI11.hpp"

namespace {

using namespace bxl;

std::string scalar_display(const Scalar& s) {
  if (s.is_error()) return std::string(error_code_text(s.error()));
  const std::optional<std::string> text = to_text(s);
  return text ? *text : "";
}

void print_value(const Value& v) {
  if (const Scalar* s = std::get_if<Scalar>(&v)) {
    std::cout << scalar_display(*s) << "\n";
    return;
  }
  const Array& a = std::get<Array>(v);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) {
      if (c > 0) std::cout << "\t";
      std::cout << scalar_display(a.at(r, c));
    }
    std::cout << "\n";
  }
}

/// Workbook arguments accept the literal `demo` for the built in budget
/// workbook, or a path to a workbook JSON file.
Workbook load_workbook_arg(const std::string& spec) {
  if (spec == "demo") return budget_demo_workbook();
  return load_workbook(spec);
}

std::optional<LintRule> rule_from_token(const std::string& token) {
  for (const LintRule rule : all_lint_rules()) {
    const std::string_view id = rule_id_text(rule);
    const std::string_view shorthand = id.substr(0, id.find('-'));
    if (ci_equal(token, id) || ci_equal(token, shorthand)) return rule;
  }
  return std::nullopt;
}

int cmd_lint(const std::string& path, const std::string& rules_csv,
             const std::string& format, bool strict) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "cannot open '" << path << "'\n";
    return 2;
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();

  std::vector<LintRule> rules = all_lint_rules();
  if (!rules_csv.empty()) {
    rules.clear();
    std::stringstream csv(rules_csv);
    std::string token;
    while (std::getline(csv, token, ',')) {
      const auto rule = rule_from_token(token);
      if (!rule) {
        std::cerr << "unknown rule '" << token << "'\n";
        return 2;
      }
      rules.push_back(*rule);
    }
  }

  Module mod;
  try {
    mod = parse_module(buffer.str());
  } catch (const ParseError& e) {
    std::cerr << path << ": parse error at offset " << e.offset() << ": "
              << e.what() << "\n";
    return 2;
  }

  const std::string module_name = std::filesystem::path(path).stem().string();
  const LintReport report = lint_module(mod, module_name, rules);
  if (format == "json")
    std::cout << report_json(report);
  else
    std::cout << report_text(report);
  if (strict) return report.findings.empty() ? 0 : 1;
  return report.compliant() ? 0 : 1;
}

int cmd_eval(const std::string& formula, const std::string& workbook_spec) {
  Workbook wb;
  if (!workbook_spec.empty()) wb = load_workbook_arg(workbook_spec);
  Recalculator engine(wb);
  const Value v = engine.evaluate(formula);
  print_value(v);
  return 0;
}

struct AllowedRange {
  std::string sheet;
  int top = 0;
  int left = 0;
  int bottom = 0;
  int right = 0;
};

std::optional<AllowedRange> parse_allowed_range(const std::string& text) {
  const std::size_t bang = text.find('!');
  if (bang == std::string::npos || bang == 0) return std::nullopt;
  AllowedRange range;
  range.sheet = text.substr(0, bang);
  const std::string cells = text.substr(bang + 1);
  const std::size_t colon = cells.find(':');
  const auto first = parse_a1(colon == std::string::npos ? cells : cells.substr(0, colon));
  if (!first) return std::nullopt;
  range.top = range.bottom = first->first;
  range.left = range.right = first->second;
  if (colon != std::string::npos) {
    const auto second = parse_a1(cells.substr(colon + 1));
    if (!second) return std::nullopt;
    range.bottom = std::max(range.bottom, second->first);
    range.right = std::max(range.right, second->second);
    range.top = std::min(range.top, second->first);
    range.left = std::min(range.left, second->second);
  }
  return range;
}

void print_sheet(const RecalcResult& result, const std::string& sheet) {
  const auto box = result.extent(sheet);
  for (int r = 0; r < box.first; ++r) {
    for (int c = 0; c < box.second; ++c) {
      if (c > 0) std::cout << "\t";
      std::cout << scalar_display(result.at(sheet, r, c));
    }
    std::cout << "\n";
  }
}

int cmd_run(const std::string& workbook_spec,
            const std::vector<std::string>& dumps,
            const std::vector<std::string>& asserts,
            const std::vector<std::string>& allow_specs) {
  std::vector<AllowedRange> allowed;
  for (const std::string& spec : allow_specs) {
    const auto range = parse_allowed_range(spec);
    if (!range) {
      std::cerr << "bad range '" << spec << "' (expected Sheet!A1:C5)\n";
      return 2;
    }
    allowed.push_back(*range);
  }

  const Workbook wb = load_workbook_arg(workbook_spec);
  Recalculator engine(wb);
  const RecalcResult& result = engine.run();

  for (const std::string& sheet : dumps) {
    if (result.sheet_index(sheet) < 0) {
      std::cerr << "unknown sheet '" << sheet << "'\n";
      return 2;
    }
    print_sheet(result, sheet);
  }

  int exit_code = 0;
  if (!result.converged) {
    std::cout << "did not converge after " << result.passes << " passes\n";
    exit_code = 1;
  }

  for (const auto& [key, scalar] : result.grid) {
    if (!scalar.is_error()) continue;
    const std::string& sheet = result.sheet_names[std::size_t(key.sheet)];
    const bool exempt = std::any_of(
        allowed.begin(), allowed.end(), [&](const AllowedRange& range) {
          return ci_equal(range.sheet, sheet) && key.row >= range.top &&
                 key.row <= range.bottom && key.col >= range.left &&
                 key.col <= range.right;
        });
    if (exempt) continue;
    std::cout << "error " << error_code_text(scalar.error()) << " at " << sheet
              << "!" << a1_text(key.row, key.col) << "\n";
    exit_code = 1;
  }

  for (const std::string& spec : asserts) {
    const std::size_t eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::cerr << "bad assert '" << spec << "' (expected name=number)\n";
      return 2;
    }
    const std::string name = spec.substr(0, eq);
    const std::string literal = spec.substr(eq + 1);
    char* end = nullptr;
    const double expected = std::strtod(literal.c_str(), &end);
    if (end == literal.c_str() || *end != '\0') {
      std::cerr << "bad assert value '" << literal << "'\n";
      return 2;
    }

    const Value* v = result.name_value(name);
    if (!v) {
      std::cout << "assert " << name << " failed: name is not defined\n";
      exit_code = 1;
      continue;
    }
    std::optional<double> actual;
    std::string trouble;
    if (const Scalar* s = std::get_if<Scalar>(v)) {
      if (s->is_number())
        actual = s->number();
      else
        trouble = "value is " + scalar_display(*s);
    } else {
      double total = 0;
      const Array& a = std::get<Array>(*v);
      for (std::size_t r = 0; r < a.rows() && trouble.empty(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) {
          const Scalar s = a.at(r, c);
          if (s.is_error()) {
            trouble = "array contains " + scalar_display(s);
            break;
          }
          if (s.is_number()) total += s.number();
        }
      if (trouble.empty()) actual = total;
    }

    if (!actual) {
      std::cout << "assert " << name << " failed: " << trouble << "\n";
      exit_code = 1;
      continue;
    }
    const double scale = std::max({1.0, std::abs(expected), std::abs(*actual)});
    if (std::abs(*actual - expected) <= 1e-9 * scale) {
      std::cout << "assert " << name << " ok: " << display_number(*actual)
                << "\n";
    } else {
      std::cout << "assert " << name << " failed: expected "
                << display_number(expected) << ", got "
                << display_number(*actual) << "\n";
      exit_code = 1;
    }
  }

  if (dumps.empty() && asserts.empty() && exit_code == 0)
    std::cout << "recalculated " << result.sheet_names.size() << " sheets, "
              << result.grid.size() << " cells, " << result.passes
              << " passes\n";
  return exit_code;
}

int cmd_import(const std::string& locator, const std::string& prefix,
               const std::string& workbook_path, const std::string& cache,
               bool strict, bool in_place) {
  Workbook wb = load_workbook(workbook_path);

  FetchResult fetched;
  try {
    Registry registry(cache.empty() ? Registry::default_cache_dir()
                                    : std::filesystem::path(cache));
    fetched = registry.fetch(locator);
  } catch (const RegistryError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  Module mod;
  try {
    mod = parse_module(fetched.text);
  } catch (const ParseError& e) {
    std::cerr << locator << ": parse error at offset " << e.offset() << ": "
              << e.what() << "\n";
    return 2;
  }

  try {
    if (const ImportRecord* existing = wb.find_import(prefix)) {
      if (existing->module.source_text == mod.source_text) {
        std::cerr << "prefix '" << prefix
                  << "' is already imported with identical content\n";
        return 1;
      }
      const UpdateResult update =
          update_module(wb, prefix, std::move(mod), fetched.source, strict);
      if (!update.findings.empty()) {
        LintReport compat;
        compat.module_name = prefix;
        compat.findings = update.findings;
        std::cout << report_text(compat);
      }
      if (!update.applied) {
        std::cerr << "update of '" << prefix
                  << "' refused under --strict; workbook unchanged\n";
        return 1;
      }
    } else {
      import_module(wb, std::move(mod), prefix, fetched.source);
    }
  } catch (const RegistryError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }

  for (const std::string& name : imported_names(*wb.find_import(prefix)))
    std::cout << name << "\n";

  const std::string out_path = in_place ? workbook_path : workbook_path + ".new";
  save_workbook(wb, out_path);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_about(const std::string& workbook_spec, const std::string& prefix) {
  const Workbook wb = load_workbook_arg(workbook_spec);
  const ImportRecord* record = wb.find_import(prefix);
  if (!record) {
    std::cerr << "prefix '" << prefix << "' is not imported\n";
    return 1;
  }
  for (const ComponentInfo& component : list_components(record->module))
    std::cout << component.name << "\t" << component.description << "\n";
  return 0;
}

int cmd_demo(const std::string& out_path) {
  save_workbook(budget_demo_workbook(), out_path);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bxl: spreadsheet formula engine and component toolchain"};
  app.require_subcommand(1);

  std::string lint_path, lint_rules, lint_format = "text";
  bool lint_strict = false;
  CLI::App* lint = app.add_subcommand("lint", "Check a module against the component rules");
  lint->add_option("path", lint_path, "Module file (.bxl)")->required();
  lint->add_option("--rules", lint_rules, "Comma separated rule list (default all)");
  lint->add_option("--format", lint_format, "Report format")
      ->check(CLI::IsMember({"text", "json"}));
  lint->add_flag("--strict", lint_strict, "Fail on warnings too");

  std::string eval_formula, eval_workbook;
  CLI::App* eval = app.add_subcommand("eval", "Evaluate a formula");
  eval->add_option("formula", eval_formula, "Formula text, leading = optional")
      ->required();
  eval->add_option("--workbook", eval_workbook,
                   "Workbook JSON file, or demo for the built in workbook");

  std::string run_workbook;
  std::vector<std::string> run_dumps, run_asserts, run_allowed;
  CLI::App* run = app.add_subcommand("run", "Recalculate a workbook");
  run->add_option("workbook", run_workbook,
                  "Workbook JSON file, or demo for the built in workbook")
      ->required();
  run->add_option("--dump", run_dumps, "Print a sheet's computed grid");
  run->add_option("--assert", run_asserts,
                  "Check a defined name against a number (name=value)");
  run->add_option("--allow-errors", run_allowed,
                  "Tolerate errors inside a range (Sheet!A1:C5)");

  std::string import_locator, import_prefix, import_workbook, import_cache;
  bool import_strict = false, import_in_place = false;
  CLI::App* import_cmd = app.add_subcommand("import", "Import a module into a workbook");
  import_cmd->add_option("locator", import_locator, "Module path or URL")->required();
  import_cmd->add_option("--prefix", import_prefix, "Import prefix")->required();
  import_cmd->add_option("--workbook", import_workbook, "Workbook JSON file")
      ->required();
  import_cmd->add_option("--cache", import_cache,
                         "Cache directory (default from BXL_CACHE)");
  import_cmd->add_flag("--strict", import_strict,
                       "Refuse an update with any compatibility finding");
  import_cmd->add_flag("--in-place", import_in_place,
                       "Overwrite the workbook instead of writing a .new file");

  std::string about_workbook, about_prefix;
  CLI::App* about = app.add_subcommand("about", "List a module's components");
  about->add_option("workbook", about_workbook,
                    "Workbook JSON file, or demo for the built in workbook")
      ->required();
  about->add_option("prefix", about_prefix, "Import prefix")->required();

  std::string demo_out = "demo.wbk.json";
  CLI::App* demo = app.add_subcommand("demo", "Write the demo workbook");
  demo->add_option("--out", demo_out, "Output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (lint->parsed())
      return cmd_lint(lint_path, lint_rules, lint_format, lint_strict);
    if (eval->parsed()) return cmd_eval(eval_formula, eval_workbook);
    if (run->parsed())
      return cmd_run(run_workbook, run_dumps, run_asserts, run_allowed);
    if (import_cmd->parsed())
      return cmd_import(import_locator, import_prefix, import_workbook,
                        import_cache, import_strict, import_in_place);
    if (about->parsed()) return cmd_about(about_workbook, about_prefix);
    if (demo->parsed()) return cmd_demo(demo_out);
  } catch (const ParseError& e) {
    std::cerr << "parse error at offset " << e.offset() << ": " << e.what()
              << "\n";
    return 2;
  } catch (const WorkbookError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return 2;
}
