#pragma once

#include <algorithm>
#include <compare>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "bxl/eval.hpp"
#include "bxl/workbook.hpp"

namespace bxl {

struct CellKey {
  int sheet = 0;
  int row = 0;
  int col = 0;

  auto operator<=>(const CellKey&) const = default;
};

struct SpillRect {
  int row1 = 0;
  int col1 = 0;
  int row2 = 0;
  int col2 = 0;

  bool contains(int r, int c) const {
    return r >= row1 && r <= row2 && c >= col1 && c <= col2;
  }
  auto operator<=>(const SpillRect&) const = default;
};

/// Outcome at one formula cell: the anchor's full value, the rectangle it
/// spilled over (absent for scalars, 1x1 results, and blocked spills), and
/// the error code when the anchor shows an error.
struct CellResult {
  Value value;
  std::optional<SpillRect> region;
  std::optional<ErrorCode> error;
};

struct RecalcResult {
  std::vector<std::string> sheet_names;
  std::map<CellKey, CellResult> anchors;
  std::map<CellKey, Scalar> grid;  // every non-blank computed cell
  std::map<std::string, Value> names;  // folded defined name -> value
  int passes = 0;
  bool converged = true;

  int sheet_index(std::string_view name) const {
    for (std::size_t i = 0; i < sheet_names.size(); ++i)
      if (ci_equal(sheet_names[i], name)) return static_cast<int>(i);
    return -1;
  }

  Scalar at(std::string_view sheet, int row, int col) const {
    const int s = sheet_index(sheet);
    if (s < 0) return Scalar(ErrorCode::Ref);
    const auto it = grid.find(CellKey{s, row, col});
    return it == grid.end() ? Scalar(Blank{}) : it->second;
  }

  const CellResult* anchor_at(std::string_view sheet, int row, int col) const {
    const int s = sheet_index(sheet);
    if (s < 0) return nullptr;
    const auto it = anchors.find(CellKey{s, row, col});
    return it == anchors.end() ? nullptr : &it->second;
  }

  const Value* name_value(std::string_view name) const {
    const auto it = names.find(ci_fold(name));
    return it == names.end() ? nullptr : &it->second;
  }

  /// Smallest (rows, cols) box holding every non-blank cell of a sheet.
  std::pair<int, int> extent(std::string_view sheet) const {
    const int s = sheet_index(sheet);
    std::pair<int, int> box{0, 0};
    if (s < 0) return box;
    for (const auto& [key, cell] : grid) {
      if (key.sheet != s) continue;
      box.first = std::max(box.first, key.row + 1);
      box.second = std::max(box.second, key.col + 1);
    }
    return box;
  }
};

namespace recalc_detail {

/// Collects the static cell dependencies of an expression: direct
/// references, references reached through defined names and imported
/// definitions, and references inside lambda bodies (a call may execute
/// them). Shadowed identifiers contribute nothing; visited names break
/// recursive expansion.
class DepWalker {
 public:
  DepWalker(const Workbook& wb, std::set<CellKey>& out)
      : wb_(wb), out_(out) {}

  void walk(const Expr& e, int sheet, const ImportRecord* mod,
            const std::set<std::string>& shadow) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, CellRef>) {
            add_cell(n, sheet);
          } else if constexpr (std::is_same_v<T, RangeRef>) {
            add_range(n, sheet);
          } else if constexpr (std::is_same_v<T, SpillRef>) {
            add_cell(n.anchor, sheet);
          } else if constexpr (std::is_same_v<T, NameRef>) {
            expand_name(n.name, sheet, mod, shadow);
          } else if constexpr (std::is_same_v<T, FuncCall>) {
            expand_name(n.name, sheet, mod, shadow);
            for (const ExprPtr& a : n.args) walk(*a, sheet, mod, shadow);
          } else if constexpr (std::is_same_v<T, Invoke>) {
            walk(*n.callee, sheet, mod, shadow);
            for (const ExprPtr& a : n.args) walk(*a, sheet, mod, shadow);
          } else if constexpr (std::is_same_v<T, Binary>) {
            walk(*n.lhs, sheet, mod, shadow);
            walk(*n.rhs, sheet, mod, shadow);
          } else if constexpr (std::is_same_v<T, Unary>) {
            walk(*n.operand, sheet, mod, shadow);
          } else if constexpr (std::is_same_v<T, ArrayLit>) {
            for (const ExprPtr& el : n.elements) walk(*el, sheet, mod, shadow);
          } else if constexpr (std::is_same_v<T, LetExpr>) {
            std::set<std::string> inner = shadow;
            for (const LetBinding& b : n.bindings) {
              walk(*b.value, sheet, mod, inner);
              inner.insert(ci_fold(b.name));
            }
            walk(*n.body, sheet, mod, inner);
          } else if constexpr (std::is_same_v<T, LambdaExpr>) {
            std::set<std::string> inner = shadow;
            for (const Param& p : n.params) inner.insert(ci_fold(p.name));
            walk(*n.body, sheet, mod, inner);
          }
        },
        e.node);
  }

 private:
  void add_cell(const CellRef& ref, int sheet) {
    const int s = ref.sheet.empty() ? sheet : wb_.sheet_index(ref.sheet);
    if (s >= 0) out_.insert(CellKey{s, ref.row, ref.col});
  }

  void add_range(const RangeRef& ref, int sheet) {
    const int s =
        ref.first.sheet.empty() ? sheet : wb_.sheet_index(ref.first.sheet);
    if (s < 0) return;
    const int r1 = std::min(ref.first.row, ref.last.row);
    const int r2 = std::max(ref.first.row, ref.last.row);
    const int c1 = std::min(ref.first.col, ref.last.col);
    const int c2 = std::max(ref.first.col, ref.last.col);
    const long long cells = static_cast<long long>(r2 - r1 + 1) * (c2 - c1 + 1);
    if (cells > 1'000'000) return;
    for (int r = r1; r <= r2; ++r)
      for (int c = c1; c <= c2; ++c) out_.insert(CellKey{s, r, c});
  }

  void expand_name(const std::string& name, int sheet, const ImportRecord* mod,
                   const std::set<std::string>& shadow) {
    const std::string folded = ci_fold(name);
    if (shadow.count(folded)) return;
    if (mod) {
      if (const Definition* def = mod->module.find(name)) {
        if (!visited_.insert(ci_fold(mod->prefix) + "." + folded).second) return;
        walk_definition(*def, sheet, mod);
        return;
      }
    }
    if (const DefinedName* dn = wb_.find_name(name)) {
      if (!visited_.insert(folded).second) return;
      try {
        const ExprPtr expr = parse_formula(dn->refers_to);
        walk(*expr, sheet, nullptr, {});
      } catch (const ParseError&) {
      }
      return;
    }
    const std::size_t dot = name.find('.');
    if (dot == std::string::npos || dot == 0) return;
    const ImportRecord* rec = wb_.find_import(name.substr(0, dot));
    if (!rec) return;
    const Definition* def = rec->module.find(name.substr(dot + 1));
    if (!def) return;
    if (!visited_.insert(ci_fold(rec->prefix) + "." + ci_fold(def->name)).second)
      return;
    walk_definition(*def, sheet, rec);
  }

  void walk_definition(const Definition& def, int sheet,
                       const ImportRecord* rec) {
    const LambdaExpr& lam = def.lambda_node();
    std::set<std::string> shadow;
    for (const Param& p : lam.params) shadow.insert(ci_fold(p.name));
    walk(*lam.body, sheet, rec, shadow);
  }

  const Workbook& wb_;
  std::set<CellKey>& out_;
  std::set<std::string> visited_;
};

struct FormulaCell {
  CellKey key;
  std::string sheet_name;
  ExprPtr expr;  // null when the text failed to parse
  std::set<CellKey> deps;
  bool cyclic = false;
};

}  // namespace recalc_detail

/// Full workbook recalculation: parses every formula, orders cells by their
/// static dependency graph (strongly connected components become #REF!
/// circularity errors), then evaluates in passes until the grid reaches a
/// fixed point, placing array spills right-and-down and blocking them on
/// occupied cells. Also answers reference lookups for formulas evaluated
/// against the computed state.
class Recalculator : public Resolver {
 public:
  explicit Recalculator(const Workbook& wb) : wb_(wb) {
    for (const Sheet& s : wb_.sheets) result_.sheet_names.push_back(s.name);
    build_base();
    build_formulas();
    order_formulas();
  }

  const RecalcResult& run() {
    static constexpr int kMaxPasses = 8;
    prev_.clear();
    anchors_prev_.clear();
    result_.passes = 0;
    result_.converged = false;
    for (int pass = 0; pass < kMaxPasses; ++pass) {
      run_pass();
      ++result_.passes;
      if (cur_ == prev_) {
        result_.converged = true;
        break;
      }
      prev_ = cur_;
      anchors_prev_ = anchors_cur_;
    }
    result_.grid = cur_;
    result_.anchors = anchors_cur_;
    result_.names.clear();
    for (const DefinedName& dn : wb_.names) {
      if (auto v = name(dn.name)) result_.names[ci_fold(dn.name)] = *v;
    }
    ran_ = true;
    return result_;
  }

  const RecalcResult& result() const { return result_; }

  /// Evaluates a formula against the recalculated workbook, on the given
  /// sheet (default: the first sheet).
  Value evaluate_on(const std::string& formula, const std::string& sheet) {
    if (!ran_) run();
    const ExprPtr expr = parse_formula(formula);
    evaluator_.set_current_sheet(sheet.empty() ? default_sheet() : sheet);
    return evaluator_.evaluate(*expr);
  }
  Value evaluate(const std::string& formula) { return evaluate_on(formula, ""); }

  Evaluator& evaluator() { return evaluator_; }

  // Resolver ------------------------------------------------------------

  std::string default_sheet() const override {
    return wb_.sheets.empty() ? "Sheet1" : wb_.sheets.front().name;
  }

  Value cell(const std::string& sheet, int row, int col) override {
    const int s = wb_.sheet_index(sheet);
    if (s < 0) return error_value(ErrorCode::Ref);
    return Value(cell_scalar(CellKey{s, row, col}));
  }

  Value range(const std::string& sheet, int row1, int col1, int row2,
              int col2) override {
    const int s = wb_.sheet_index(sheet);
    if (s < 0) return error_value(ErrorCode::Ref);
    const std::size_t rows = static_cast<std::size_t>(row2 - row1 + 1);
    const std::size_t cols = static_cast<std::size_t>(col2 - col1 + 1);
    if (!Array::size_ok(rows, cols)) return error_value(ErrorCode::Num);
    Array out(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c)
        out.at(r, c) = cell_scalar(CellKey{s, row1 + static_cast<int>(r),
                                           col1 + static_cast<int>(c)});
    return normalized(std::move(out));
  }

  Value spill(const std::string& sheet, int row, int col) override {
    const int s = wb_.sheet_index(sheet);
    if (s < 0) return error_value(ErrorCode::Ref);
    const CellKey key{s, row, col};
    if (const auto it = anchors_cur_.find(key); it != anchors_cur_.end())
      return it->second.value;
    if (const auto it = anchors_prev_.find(key); it != anchors_prev_.end())
      return it->second.value;
    return error_value(ErrorCode::Ref);
  }

  Value table_columns(const std::string& table, const std::string& first_column,
                      const std::string& last_column) override {
    const Table* t = wb_.find_table(table);
    if (!t) return error_value(ErrorCode::Name);
    const int c1 = t->column_index(first_column);
    const int c2 = last_column.empty() ? c1 : t->column_index(last_column);
    if (c1 < 0 || c2 < 0 || c2 < c1) return error_value(ErrorCode::Ref);
    if (t->rows.empty()) return error_value(ErrorCode::Calc);
    Array out(t->rows.size(), static_cast<std::size_t>(c2 - c1 + 1));
    for (std::size_t r = 0; r < t->rows.size(); ++r)
      for (int c = c1; c <= c2; ++c)
        out.at(r, static_cast<std::size_t>(c - c1)) = t->rows[r][c];
    return normalized(std::move(out));
  }

  std::optional<Value> name(const std::string& name) override {
    if (const DefinedName* dn = wb_.find_name(name)) {
      const std::string folded = ci_fold(dn->name);
      if (const auto it = name_memo_.find(folded); it != name_memo_.end())
        return it->second;
      if (!names_in_progress_.insert(folded).second)
        return error_value(ErrorCode::Ref);
      Value v = evaluate_name(*dn);
      names_in_progress_.erase(folded);
      name_memo_.emplace(folded, v);
      return v;
    }
    const std::size_t dot = name.find('.');
    if (dot == std::string::npos || dot == 0) return std::nullopt;
    const ImportRecord* rec = wb_.find_import(name.substr(0, dot));
    if (!rec) return std::nullopt;
    return module_member(rec, name.substr(dot + 1));
  }

  std::optional<Value> module_member(const ImportRecord* record,
                                     const std::string& name) override {
    if (!record) return std::nullopt;
    const Definition* def = record->module.find(name);
    if (!def) return std::nullopt;
    auto& memo = member_memo_[record];
    const std::string folded = ci_fold(def->name);
    if (const auto it = memo.find(folded); it != memo.end()) return it->second;
    auto env = std::make_shared<Environment>();
    env->module = record;
    Value v = evaluator_.evaluate(*def->lambda, env);
    if (const ClosurePtr* c = std::get_if<ClosurePtr>(&v)) {
      auto named = std::make_shared<Closure>(**c);
      named->self_name = def->name;
      v = Value(ClosurePtr(std::move(named)));
    }
    memo.emplace(folded, v);
    return v;
  }

 private:
  void build_base() {
    for (const Table& t : wb_.tables) {
      const int s = wb_.sheet_index(t.sheet);
      if (s < 0) continue;
      for (std::size_t c = 0; c < t.columns.size(); ++c)
        base_[CellKey{s, t.origin_row, t.origin_col + static_cast<int>(c)}] =
            Scalar(t.columns[c]);
      for (std::size_t r = 0; r < t.rows.size(); ++r)
        for (std::size_t c = 0; c < t.columns.size(); ++c)
          base_[CellKey{s, t.origin_row + 1 + static_cast<int>(r),
                        t.origin_col + static_cast<int>(c)}] = t.rows[r][c];
    }
    for (std::size_t s = 0; s < wb_.sheets.size(); ++s) {
      for (const auto& [rc, content] : wb_.sheets[s].cells) {
        const CellKey key{static_cast<int>(s), rc.first, rc.second};
        if (content.is_formula()) {
          base_.erase(key);
        } else if (!content.literal.is_blank_like()) {
          base_[key] = content.literal;
        }
      }
    }
    for (const auto& [key, value] : base_) occupied_.insert(key);
  }

  void build_formulas() {
    for (std::size_t s = 0; s < wb_.sheets.size(); ++s) {
      for (const auto& [rc, content] : wb_.sheets[s].cells) {
        if (!content.is_formula()) continue;
        recalc_detail::FormulaCell f;
        f.key = CellKey{static_cast<int>(s), rc.first, rc.second};
        f.sheet_name = wb_.sheets[s].name;
        try {
          f.expr = parse_formula(content.formula);
        } catch (const ParseError&) {
          f.expr = nullptr;
        }
        if (f.expr) {
          recalc_detail::DepWalker walker(wb_, f.deps);
          walker.walk(*f.expr, f.key.sheet, nullptr, {});
        }
        occupied_.insert(f.key);
        formula_index_[f.key] = formulas_.size();
        formulas_.push_back(std::move(f));
      }
    }
  }

  /// Tarjan over "depends on" edges; components pop dependencies-first,
  /// which is exactly evaluation order. Multi-cell components and self-loops
  /// are circular.
  void order_formulas() {
    const std::size_t n = formulas_.size();
    std::vector<std::vector<std::size_t>> edges(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (const CellKey& dep : formulas_[i].deps) {
        const auto it = formula_index_.find(dep);
        if (it != formula_index_.end()) edges[i].push_back(it->second);
      }
    }

    std::vector<int> index(n, -1), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    int counter = 0;

    struct Frame {
      std::size_t node;
      std::size_t next_edge;
    };
    for (std::size_t root = 0; root < n; ++root) {
      if (index[root] >= 0) continue;
      std::vector<Frame> call;
      call.push_back({root, 0});
      index[root] = low[root] = counter++;
      stack.push_back(root);
      on_stack[root] = true;
      while (!call.empty()) {
        Frame& frame = call.back();
        const std::size_t v = frame.node;
        if (frame.next_edge < edges[v].size()) {
          const std::size_t w = edges[v][frame.next_edge++];
          if (index[w] < 0) {
            index[w] = low[w] = counter++;
            stack.push_back(w);
            on_stack[w] = true;
            call.push_back({w, 0});
          } else if (on_stack[w]) {
            low[v] = std::min(low[v], index[w]);
          }
          continue;
        }
        if (low[v] == index[v]) {
          std::vector<std::size_t> component;
          while (true) {
            const std::size_t w = stack.back();
            stack.pop_back();
            on_stack[w] = false;
            component.push_back(w);
            if (w == v) break;
          }
          std::sort(component.begin(), component.end());
          const bool self_loop =
              component.size() == 1 &&
              formulas_[component[0]].deps.count(formulas_[component[0]].key);
          if (component.size() > 1 || self_loop)
            for (const std::size_t w : component) formulas_[w].cyclic = true;
          for (const std::size_t w : component) topo_order_.push_back(w);
        }
        call.pop_back();
        if (!call.empty())
          low[call.back().node] = std::min(low[call.back().node], low[v]);
      }
    }
  }

  Scalar cell_scalar(const CellKey& key) const {
    if (const auto it = cur_.find(key); it != cur_.end()) return it->second;
    if (cleared_.count(key)) return Scalar(Blank{});
    if (const auto it = prev_.find(key); it != prev_.end()) return it->second;
    return Scalar(Blank{});
  }

  Value evaluate_name(const DefinedName& dn) {
    ExprPtr expr;
    try {
      expr = parse_formula(dn.refers_to);
    } catch (const ParseError&) {
      return error_value(ErrorCode::Ref);
    }
    return evaluator_.evaluate(*expr);
  }

  void store_scalar(const CellKey& key, const Scalar& s) {
    if (s.is_blank_like()) {
      cur_.erase(key);
      cleared_.insert(key);
    } else {
      cur_[key] = s;
      cleared_.erase(key);
    }
  }

  void run_pass() {
    cur_ = base_;
    cleared_.clear();
    anchors_cur_.clear();
    spill_owner_.clear();
    name_memo_.clear();
    names_in_progress_.clear();

    for (const std::size_t i : topo_order_) {
      recalc_detail::FormulaCell& f = formulas_[i];
      CellResult res;
      if (f.cyclic) {
        res.value = error_value(ErrorCode::Ref);
      } else if (!f.expr) {
        res.value = error_value(ErrorCode::Value);
      } else {
        evaluator_.set_current_sheet(f.sheet_name);
        res.value = normalized(evaluator_.evaluate(*f.expr));
        if (is_closure(res.value)) res.value = error_value(ErrorCode::Calc);
        if (const Scalar* s = std::get_if<Scalar>(&res.value);
            s && s->is_omitted())
          res.value = Scalar(Blank{});
      }
      place(f, res);
      if (const Scalar* s = std::get_if<Scalar>(&res.value))
        if (s->is_error()) res.error = s->error();
      anchors_cur_[f.key] = std::move(res);
    }
  }

  void place(const recalc_detail::FormulaCell& f, CellResult& res) {
    const auto prev_anchor = anchors_prev_.find(f.key);
    const std::optional<SpillRect> prev_region =
        prev_anchor == anchors_prev_.end() ? std::nullopt
                                           : prev_anchor->second.region;

    if (const Array* a = std::get_if<Array>(&res.value)) {
      SpillRect region{f.key.row, f.key.col,
                       f.key.row + static_cast<int>(a->rows()) - 1,
                       f.key.col + static_cast<int>(a->cols()) - 1};
      bool blocked = false;
      for (int r = region.row1; r <= region.row2 && !blocked; ++r) {
        for (int c = region.col1; c <= region.col2; ++c) {
          const CellKey target{f.key.sheet, r, c};
          if (target == f.key) continue;
          if (occupied_.count(target) || spill_owner_.count(target)) {
            blocked = true;
            break;
          }
        }
      }
      if (blocked) {
        res.value = error_value(ErrorCode::Spill);
      } else {
        for (std::size_t r = 0; r < a->rows(); ++r) {
          for (std::size_t c = 0; c < a->cols(); ++c) {
            const CellKey target{f.key.sheet,
                                 f.key.row + static_cast<int>(r),
                                 f.key.col + static_cast<int>(c)};
            store_scalar(target, a->at(r, c));
            if (target != f.key) spill_owner_[target] = f.key;
          }
        }
        res.region = region;
      }
    }

    if (!res.region) {
      if (const Scalar* s = std::get_if<Scalar>(&res.value))
        store_scalar(f.key, *s);
    }

    if (prev_region) {
      for (int r = prev_region->row1; r <= prev_region->row2; ++r) {
        for (int c = prev_region->col1; c <= prev_region->col2; ++c) {
          const CellKey target{f.key.sheet, r, c};
          if (res.region && res.region->contains(r, c)) continue;
          if (target == f.key) continue;
          if (spill_owner_.count(target) || occupied_.count(target)) continue;
          cur_.erase(target);
          cleared_.insert(target);
        }
      }
    }
  }

  const Workbook& wb_;
  Evaluator evaluator_{*this, wb_.settings};
  RecalcResult result_;
  bool ran_ = false;

  std::map<CellKey, Scalar> base_;
  std::set<CellKey> occupied_;
  std::vector<recalc_detail::FormulaCell> formulas_;
  std::map<CellKey, std::size_t> formula_index_;
  std::vector<std::size_t> topo_order_;

  std::map<CellKey, Scalar> cur_;
  std::map<CellKey, Scalar> prev_;
  std::set<CellKey> cleared_;
  std::map<CellKey, CellResult> anchors_cur_;
  std::map<CellKey, CellResult> anchors_prev_;
  std::map<CellKey, CellKey> spill_owner_;
  std::map<std::string, Value> name_memo_;
  std::set<std::string> names_in_progress_;
  std::map<const ImportRecord*, std::map<std::string, Value>> member_memo_;
};

inline RecalcResult recalculate(const Workbook& wb) {
  Recalculator engine(wb);
  engine.run();
  return engine.result();
}

}  // namespace bxl
