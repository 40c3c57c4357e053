#pragma once

// Static compliance checks for module definitions: self-containment of the
// calculation section (R1-R3), documentation completeness (R4-R5), interface
// stability between revisions (R6), and naming style (R7).

#include <algorithm>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "bxl/eval.hpp"
#include "bxl/module.hpp"

#include "../../vendor/json.hpp"

namespace bxl {

enum class LintRule : std::uint8_t {
  SelfContainedBody,
  WrappedHelpers,
  PureLet,
  Documentation,
  InlineHelp,
  VersionCompat,
  NamingStyle,
};

enum class LintSeverity : std::uint8_t { Error, Warning };

inline std::string_view rule_id_text(LintRule rule) {
  switch (rule) {
    case LintRule::SelfContainedBody: return "R1-self-contained-body";
    case LintRule::WrappedHelpers: return "R2-wrapped-helpers";
    case LintRule::PureLet: return "R3-pure-let";
    case LintRule::Documentation: return "R4-documentation";
    case LintRule::InlineHelp: return "R5-inline-help";
    case LintRule::VersionCompat: return "R6-version-compat";
    case LintRule::NamingStyle: return "R7-naming-style";
  }
  return "";
}

inline LintSeverity rule_severity(LintRule rule) {
  return rule == LintRule::NamingStyle ? LintSeverity::Warning
                                       : LintSeverity::Error;
}

inline const std::vector<LintRule>& all_lint_rules() {
  static const std::vector<LintRule> rules = {
      LintRule::SelfContainedBody, LintRule::WrappedHelpers,
      LintRule::PureLet,           LintRule::Documentation,
      LintRule::InlineHelp,        LintRule::VersionCompat,
      LintRule::NamingStyle,
  };
  return rules;
}

struct Finding {
  LintRule rule = LintRule::SelfContainedBody;
  std::string definition;
  Span span;
  std::string fragment;
  std::string message;
};

struct LintReport {
  std::string module_name;
  std::vector<Finding> findings;

  bool compliant() const {
    return std::none_of(findings.begin(), findings.end(), [](const Finding& f) {
      return rule_severity(f.rule) == LintSeverity::Error;
    });
  }
  std::string_view verdict() const {
    return compliant() ? "compliant" : "non-compliant";
  }
};

namespace lint_detail {

inline bool is_helper_function(std::string_view name) {
  const std::string folded = ci_fold(name);
  return folded == "byrow" || folded == "bycol" || folded == "map" ||
         folded == "reduce" || folded == "scan" || folded == "makearray";
}

/// Classification context for a grid reference: the nearest enclosing
/// construct decides which rule the finding lands under.
struct RefContext {
  enum Kind { Body, HelperCall, LetBinding } kind = Body;
  std::string label;  // helper function or LET binding name
};

struct BodyWalker {
  const Module& module;
  const Definition& def;
  std::vector<Finding>* out;

  std::string fragment_of(const Span& span) const {
    if (span.end <= module.source_text.size() && span.begin < span.end)
      return module.source_text.substr(span.begin, span.end - span.begin);
    return "";
  }

  void emit(LintRule rule, const Span& span, std::string message) const {
    out->push_back({rule, def.name, span, fragment_of(span), std::move(message)});
  }

  LintRule rule_for(const RefContext& ctx) const {
    switch (ctx.kind) {
      case RefContext::LetBinding: return LintRule::PureLet;
      case RefContext::HelperCall: return LintRule::WrappedHelpers;
      case RefContext::Body: return LintRule::SelfContainedBody;
    }
    return LintRule::SelfContainedBody;
  }

  void report_grid_ref(const Expr& e, const RefContext& ctx,
                       std::string_view what) const {
    const std::string frag = fragment_of(e.span);
    std::string msg;
    switch (ctx.kind) {
      case RefContext::LetBinding:
        msg = "LET binding '" + ctx.label + "' reads " + std::string(what) +
              " " + frag + " from the grid";
        break;
      case RefContext::HelperCall:
        msg = std::string(what) + " " + frag + " reaches " + ctx.label +
              " from the grid; pass it through the enclosing LAMBDA's parameters";
        break;
      case RefContext::Body:
        msg = "calculation references " + std::string(what) + " " + frag +
              " directly";
        break;
    }
    emit(rule_for(ctx), e.span, std::move(msg));
  }

  bool name_in_scope(const std::unordered_set<std::string>& scope,
                     std::string_view name) const {
    if (scope.count(ci_fold(name))) return true;
    if (is_builtin_name(name)) return true;
    return module.find(name) != nullptr;
  }

  void report_external_name(const Expr& e, std::string_view name) const {
    Span span = e.span;
    if (e.is<FuncCall>()) span.end = span.begin + name.size();
    std::string frag = fragment_of(span);
    if (frag.empty()) frag = std::string(name);
    emit(LintRule::SelfContainedBody, span,
         "references '" + frag + "', which is not a parameter, LET binding, "
         "builtin, or sibling in this module");
  }

  void walk(const ExprPtr& e, const RefContext& ctx,
            std::unordered_set<std::string> scope) const {
    if (!e) return;
    if (e->is<CellRef>()) {
      report_grid_ref(*e, ctx, "cell");
    } else if (e->is<RangeRef>()) {
      report_grid_ref(*e, ctx, "range");
    } else if (e->is<SpillRef>()) {
      report_grid_ref(*e, ctx, "spill region");
    } else if (e->is<StructuredRef>()) {
      report_grid_ref(*e, ctx, "table reference");
    } else if (const auto* n = e->as<NameRef>()) {
      if (!name_in_scope(scope, n->name)) report_external_name(*e, n->name);
    } else if (const auto* n = e->as<FuncCall>()) {
      if (!name_in_scope(scope, n->name)) report_external_name(*e, n->name);
      RefContext inner = ctx;
      if (is_helper_function(n->name))
        inner = {RefContext::HelperCall, ci_fold(n->name)};
      for (const ExprPtr& arg : n->args) walk(arg, inner, scope);
    } else if (const auto* n = e->as<Invoke>()) {
      walk(n->callee, ctx, scope);
      for (const ExprPtr& arg : n->args) walk(arg, ctx, scope);
    } else if (const auto* n = e->as<Binary>()) {
      walk(n->lhs, ctx, scope);
      walk(n->rhs, ctx, scope);
    } else if (const auto* n = e->as<Unary>()) {
      walk(n->operand, ctx, scope);
    } else if (const auto* n = e->as<ArrayLit>()) {
      for (const ExprPtr& el : n->elements) walk(el, ctx, scope);
    } else if (const auto* n = e->as<LetExpr>()) {
      for (const LetBinding& b : n->bindings) {
        walk(b.value, {RefContext::LetBinding, b.name}, scope);
        scope.insert(ci_fold(b.name));
      }
      walk(n->body, ctx, scope);
    } else if (const auto* n = e->as<LambdaExpr>()) {
      for (const Param& p : n->params) scope.insert(ci_fold(p.name));
      walk(n->body, ctx, scope);
    }
  }

  void run() const {
    const LambdaExpr& lam = def.lambda_node();
    std::unordered_set<std::string> scope;
    for (const Param& p : lam.params) scope.insert(ci_fold(p.name));
    walk(lam.body, {RefContext::Body, ""}, std::move(scope));
  }
};

inline Span name_span(const Definition& def) {
  return {def.span.begin, def.span.begin + def.name.size()};
}

inline bool contains_node(const ExprPtr& e, bool (*pred)(const Expr&)) {
  if (!e) return false;
  if (pred(*e)) return true;
  bool hit = false;
  auto visit_children = [&](const auto& node) {
    using T = std::decay_t<decltype(node)>;
    if constexpr (std::is_same_v<T, ArrayLit>) {
      for (const auto& el : node.elements) hit = hit || contains_node(el, pred);
    } else if constexpr (std::is_same_v<T, FuncCall>) {
      for (const auto& a : node.args) hit = hit || contains_node(a, pred);
    } else if constexpr (std::is_same_v<T, Invoke>) {
      hit = contains_node(node.callee, pred);
      for (const auto& a : node.args) hit = hit || contains_node(a, pred);
    } else if constexpr (std::is_same_v<T, Binary>) {
      hit = contains_node(node.lhs, pred) || contains_node(node.rhs, pred);
    } else if constexpr (std::is_same_v<T, Unary>) {
      hit = contains_node(node.operand, pred);
    } else if constexpr (std::is_same_v<T, LetExpr>) {
      for (const auto& b : node.bindings) hit = hit || contains_node(b.value, pred);
      hit = hit || contains_node(node.body, pred);
    } else if constexpr (std::is_same_v<T, LambdaExpr>) {
      hit = contains_node(node.body, pred);
    }
  };
  std::visit(visit_children, e->node);
  return hit;
}

inline bool has_omitted_guard(const ExprPtr& e) {
  return contains_node(e, [](const Expr& x) {
    if (const auto* call = x.as<FuncCall>())
      return ci_fold(call->name) == "isomitted";
    if (const auto* bin = x.as<Binary>()) {
      if (bin->op != BinOp::Eq && bin->op != BinOp::Ne) return false;
      const auto empty_text = [](const ExprPtr& side) {
        const auto* t = side ? side->as<TextLit>() : nullptr;
        return t && t->value.empty();
      };
      return empty_text(bin->lhs) || empty_text(bin->rhs);
    }
    return false;
  });
}

inline bool references_help(const ExprPtr& e) {
  return contains_node(e, [](const Expr& x) {
    const auto* n = x.as<NameRef>();
    return n && ci_fold(n->name) == "help";
  });
}

/// The inline-help idiom: a LET whose early "Help" binding builds the help
/// text, an omitted/blank-input guard on the real parameters, and a result
/// path that can still return the Help value.
inline bool has_inline_help_path(const Definition& def) {
  const auto* let = def.lambda_node().body->as<LetExpr>();
  if (!let) return false;
  std::size_t help_at = let->bindings.size();
  for (std::size_t i = 0; i < let->bindings.size(); ++i) {
    if (ci_fold(let->bindings[i].name) == "help") {
      help_at = i;
      break;
    }
  }
  if (help_at == let->bindings.size()) return false;
  if (!has_omitted_guard(def.lambda)) return false;
  for (std::size_t i = help_at + 1; i < let->bindings.size(); ++i)
    if (references_help(let->bindings[i].value)) return true;
  return references_help(let->body);
}

}  // namespace lint_detail

/// Rules R1-R3: the calculation section may touch the grid only through
/// parameters. Findings classify by the nearest enclosing construct.
inline std::vector<Finding> check_self_contained(const Module& m,
                                                 const Definition& d) {
  std::vector<Finding> findings;
  lint_detail::BodyWalker{m, d, &findings}.run();
  std::stable_sort(findings.begin(), findings.end(),
                   [](const Finding& a, const Finding& b) {
                     return a.span.begin < b.span.begin;
                   });
  return findings;
}

/// Rules R4-R5: the component specification must describe the service, each
/// parameter's constraints, and the output; definitions that demand input
/// must still offer the inline help path.
inline std::vector<Finding> check_documentation(const Definition& d) {
  using lint_detail::name_span;
  std::vector<Finding> findings;
  const DocBlock doc = full_documentation(d);
  const Span at = name_span(d);

  if (doc.description.empty())
    findings.push_back({LintRule::Documentation, d.name, at, d.name,
                        "missing description of the service provided"});
  for (const Param& p : d.lambda_node().params) {
    const DocParam* dp = doc.find_param(p.name);
    if (!dp || dp->constraint.empty())
      findings.push_back({LintRule::Documentation, d.name, at, p.name,
                          "parameter '" + p.name +
                              "' has no documented constraints"});
  }
  const bool has_output_doc =
      std::any_of(doc.examples.begin(), doc.examples.end(),
                  [](const DocExample& e) { return !e.result.empty(); });
  if (!has_output_doc)
    findings.push_back({LintRule::Documentation, d.name, at, d.name,
                        "missing description of the output (no example results)"});

  std::size_t required = 0;
  for (const Param& p : d.lambda_node().params)
    if (!p.optional) ++required;
  if (required > 0 && !lint_detail::has_inline_help_path(d))
    findings.push_back({LintRule::InlineHelp, d.name, at, d.name,
                        "no inline help path: required input cannot be omitted "
                        "to show usage"});
  return findings;
}

/// Rule R7: component names carry the lambda suffix by convention.
inline std::vector<Finding> check_naming_style(const Definition& d) {
  static const std::string suffix = "\xce\xbb";
  std::vector<Finding> findings;
  if (d.name.size() < suffix.size() ||
      d.name.compare(d.name.size() - suffix.size(), suffix.size(), suffix) != 0)
    findings.push_back({LintRule::NamingStyle, d.name,
                        lint_detail::name_span(d), d.name,
                        "definition name lacks the \xce\xbb suffix"});
  return findings;
}

/// Rule R6: a revision may only extend the interface. Existing parameters
/// keep their name, position, and optionality; new ones go at the end and
/// must be optional.
inline std::vector<Finding> check_version_compat(const Module& old_mod,
                                                 const Module& new_mod) {
  using lint_detail::name_span;
  std::vector<Finding> findings;
  const auto emit = [&](const Definition& anchor, std::string message) {
    findings.push_back({LintRule::VersionCompat, anchor.name, name_span(anchor),
                        anchor.name, std::move(message)});
  };
  for (const Definition& old_def : old_mod.definitions) {
    const Definition* new_def = new_mod.find(old_def.name);
    if (!new_def) {
      emit(old_def, "definition removed from the new revision");
      continue;
    }
    const auto& old_params = old_def.lambda_node().params;
    const auto& new_params = new_def->lambda_node().params;
    for (std::size_t i = 0; i < old_params.size(); ++i) {
      const std::string pos = std::to_string(i + 1);
      if (i >= new_params.size()) {
        emit(*new_def, "parameter " + pos + " ('" + old_params[i].name +
                           "') removed");
        break;
      }
      if (!ci_equal(old_params[i].name, new_params[i].name)) {
        emit(*new_def, "parameter " + pos + " renamed from '" +
                           old_params[i].name + "' to '" + new_params[i].name +
                           "'");
        continue;
      }
      if (old_params[i].optional && !new_params[i].optional)
        emit(*new_def, "parameter " + pos + " ('" + old_params[i].name +
                           "') tightened from optional to required");
    }
    for (std::size_t i = old_params.size(); i < new_params.size(); ++i) {
      if (!new_params[i].optional)
        emit(*new_def, "added parameter " + std::to_string(i + 1) + " ('" +
                           new_params[i].name + "') must be optional");
    }
  }
  return findings;
}

inline LintReport lint_module(const Module& m, std::string module_name = "",
                              const std::vector<LintRule>& rules = all_lint_rules()) {
  const auto wants = [&](LintRule r) {
    return std::find(rules.begin(), rules.end(), r) != rules.end();
  };
  LintReport report;
  report.module_name = std::move(module_name);
  for (const Definition& d : m.definitions) {
    std::vector<Finding> here;
    if (wants(LintRule::SelfContainedBody) || wants(LintRule::WrappedHelpers) ||
        wants(LintRule::PureLet)) {
      for (Finding& f : check_self_contained(m, d))
        if (wants(f.rule)) here.push_back(std::move(f));
    }
    if (wants(LintRule::Documentation) || wants(LintRule::InlineHelp)) {
      for (Finding& f : check_documentation(d))
        if (wants(f.rule)) here.push_back(std::move(f));
    }
    if (wants(LintRule::NamingStyle))
      for (Finding& f : check_naming_style(d)) here.push_back(std::move(f));
    std::stable_sort(here.begin(), here.end(),
                     [](const Finding& a, const Finding& b) {
                       return a.span.begin < b.span.begin;
                     });
    for (Finding& f : here) report.findings.push_back(std::move(f));
  }
  return report;
}

inline std::string report_text(const LintReport& report) {
  std::string out;
  for (const Finding& f : report.findings) {
    out += rule_id_text(f.rule);
    out += "  ";
    out += f.definition;
    out += "  [";
    out += std::to_string(f.span.begin);
    out += ",";
    out += std::to_string(f.span.end);
    out += ")  ";
    out += f.message;
    out += "\n";
  }
  return out;
}

inline std::string report_json(const LintReport& report) {
  nlohmann::json doc;
  doc["module"] = report.module_name;
  doc["verdict"] = std::string(report.verdict());
  nlohmann::json list = nlohmann::json::array();
  for (const Finding& f : report.findings) {
    nlohmann::json item;
    item["rule"] = std::string(rule_id_text(f.rule));
    item["definition"] = f.definition;
    item["span"] = {f.span.begin, f.span.end};
    item["fragment"] = f.fragment;
    item["message"] = f.message;
    list.push_back(std::move(item));
  }
  doc["findings"] = std::move(list);
  return doc.dump(2) + "\n";
}

}  // namespace bxl
