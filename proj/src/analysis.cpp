#include "colorfm/analysis.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <memory>

#include "colorfm/error.hpp"
#include "colorfm/propagation.hpp"

namespace colorfm {

std::vector<RuleViolation> validate_complete(const FeatureModel& model,
                                             const Assignment& assignment) {
  auto value = [&](const std::string& label) {
    auto it = assignment.find(label);
    if (it == assignment.end()) {
      throw Error(ErrorCode::UnknownLabel, "assignment has no value for label '" + label + "'",
                  {label});
    }
    return it->second;
  };
  for (const Box& b : model.boxes()) value(b.label);

  std::vector<RuleViolation> out;
  const Box& root = model.box(model.root());
  if (!value(root.label)) out.push_back({"root", root.id, "root '" + root.label + "' is false"});

  for (const Box& b : model.boxes()) {
    const bool on = value(b.label);
    if (on && b.parent && !value(model.box(*b.parent).label)) {
      out.push_back({"parent", b.id,
                     "'" + b.label + "' is true but its parent '" +
                         model.box(*b.parent).label + "' is false"});
    }
    if (!on) {
      for (BoxId c : b.children) {
        if (value(model.box(c).label)) {
          out.push_back({"discard-cascade", c,
                         "'" + model.box(c).label + "' is true below discarded '" + b.label +
                             "'"});
        }
      }
      continue;
    }
    std::size_t true_children = 0;
    for (BoxId c : b.children) {
      const Box& child = model.box(c);
      const bool child_on = value(child.label);
      if (child_on) ++true_children;
      if (child.mandatory && !child_on) {
        out.push_back({"mandatory", c,
                       "mandatory '" + child.label + "' is false under true '" + b.label + "'"});
      }
    }
    if (needs_one_child(b.group) && true_children == 0) {
      out.push_back({"or", b.id, "no child of '" + b.label + "' is true"});
    }
    if (allows_one_child(b.group) && true_children > 1) {
      out.push_back({"mutex", b.id,
                     std::to_string(true_children) + " children of '" + b.label + "' are true"});
    }
  }
  return out;
}

Assignment SolutionSet::at(std::size_t i) const {
  Assignment a;
  for (std::size_t k = 0; k < labels.size(); ++k) a.emplace(labels[k], rows.at(i)[k]);
  return a;
}

std::set<Assignment> SolutionSet::project(const std::vector<std::string>& keep) const {
  std::vector<std::size_t> cols;
  for (const std::string& label : keep) {
    auto it = std::lower_bound(labels.begin(), labels.end(), label);
    if (it == labels.end() || *it != label) {
      throw Error(ErrorCode::UnknownLabel, "cannot project onto unknown label '" + label + "'",
                  {label});
    }
    cols.push_back(static_cast<std::size_t>(it - labels.begin()));
  }
  std::set<Assignment> out;
  for (const auto& row : rows) {
    Assignment a;
    for (std::size_t k = 0; k < keep.size(); ++k) a.emplace(keep[k], row[cols[k]]);
    out.insert(std::move(a));
  }
  return out;
}

namespace {

// Clause-style restatement of the validate_complete rules over label
// positions, so partial assignments can be rejected as soon as a check's
// labels are all assigned.
struct Check {
  enum class Kind { Require, Imply, AtLeastOne, AtMostOne } kind;
  std::size_t head = 0;  // Require: label; Imply: premise; groups: parent
  std::size_t target = 0;  // Imply: conclusion
  std::vector<std::size_t> members;  // groups: children
};

class Enumerator {
 public:
  Enumerator(const FeatureModel& model, const Assignment& fixed, std::size_t cap)
      : model_(model) {
    const std::size_t features = model.feature_labels().size();
    if (features > cap) {
      throw Error(ErrorCode::CapExceeded,
                  "model has " + std::to_string(features) + " feature labels, cap is " +
                      std::to_string(cap),
                  {std::to_string(features)});
    }
    // Search order: first occurrence in box order. Gadget labels are created
    // after their operands, so their checks fire right after assignment.
    for (const Box& b : model.boxes()) {
      if (pos_.emplace(b.label, order_.size()).second) order_.push_back(b.label);
    }
    fixed_.assign(order_.size(), -1);
    for (const auto& [label, v] : fixed) {
      auto it = pos_.find(label);
      if (it == pos_.end()) {
        throw Error(ErrorCode::UnknownLabel, "unknown label '" + label + "'", {label});
      }
      fixed_[it->second] = v ? 1 : 0;
    }
    build_checks();
  }

  SolutionSet run() {
    std::vector<std::vector<bool>> found;
    values_.assign(order_.size(), 0);
    search(0, [&] { found.emplace_back(values_.begin(), values_.end()); });

    SolutionSet out;
    out.labels = order_;
    std::sort(out.labels.begin(), out.labels.end());
    out.fingerprint = model_fingerprint(model_);
    std::vector<std::size_t> perm;
    for (const std::string& label : out.labels) perm.push_back(pos_.at(label));
    out.rows.reserve(found.size());
    for (const auto& raw : found) {
      std::vector<bool> row(perm.size());
      for (std::size_t k = 0; k < perm.size(); ++k) row[k] = raw[perm[k]];
      out.rows.push_back(std::move(row));
    }
    std::sort(out.rows.begin(), out.rows.end());
    return out;
  }

  SolutionStats stats() {
    SolutionStats out;
    std::vector<std::size_t> cols;
    const auto features = model_.feature_labels();
    for (const std::string& label : features) cols.push_back(pos_.at(label));
    std::vector<std::uint64_t> hits(cols.size(), 0);
    values_.assign(order_.size(), 0);
    search(0, [&] {
      ++out.count;
      for (std::size_t k = 0; k < cols.size(); ++k) hits[k] += values_[cols[k]];
    });
    for (std::size_t k = 0; k < cols.size(); ++k) out.selected.emplace(features[k], hits[k]);
    return out;
  }

 private:
  void add(Check c) {
    std::size_t last = c.head;
    if (c.kind == Check::Kind::Imply) last = std::max(last, c.target);
    for (std::size_t m : c.members) last = std::max(last, m);
    if (c.kind == Check::Kind::AtMostOne && c.members.size() < 2) return;
    by_last_[last].push_back(std::move(c));
  }

  void build_checks() {
    by_last_.assign(order_.size(), {});
    auto p = [&](BoxId id) { return pos_.at(model_.box(id).label); };
    add({Check::Kind::Require, p(model_.root()), 0, {}});
    for (const Box& b : model_.boxes()) {
      if (b.parent) add({Check::Kind::Imply, p(b.id), p(*b.parent), {}});
      std::vector<std::size_t> kids;
      for (BoxId c : b.children) {
        kids.push_back(p(c));
        if (model_.box(c).mandatory) add({Check::Kind::Imply, p(b.id), p(c), {}});
      }
      if (needs_one_child(b.group)) add({Check::Kind::AtLeastOne, p(b.id), 0, kids});
      if (allows_one_child(b.group)) add({Check::Kind::AtMostOne, p(b.id), 0, kids});
    }
  }

  bool holds(const Check& c) const {
    switch (c.kind) {
      case Check::Kind::Require: return values_[c.head];
      case Check::Kind::Imply: return !values_[c.head] || values_[c.target];
      case Check::Kind::AtLeastOne:
        if (!values_[c.head]) return true;
        return std::any_of(c.members.begin(), c.members.end(),
                           [&](std::size_t m) { return values_[m] != 0; });
      case Check::Kind::AtMostOne: {
        if (!values_[c.head]) return true;
        std::size_t n = 0;
        for (std::size_t m : c.members) n += values_[m];
        return n <= 1;
      }
    }
    return true;
  }

  template <class Leaf>
  void search(std::size_t i, Leaf&& leaf) {
    if (i == order_.size()) {
      leaf();
      return;
    }
    for (int v = 0; v <= 1; ++v) {
      if (fixed_[i] >= 0 && fixed_[i] != v) continue;
      values_[i] = static_cast<char>(v);
      const auto& checks = by_last_[i];
      if (std::all_of(checks.begin(), checks.end(), [&](const Check& c) { return holds(c); })) {
        search(i + 1, leaf);
      }
    }
    values_[i] = 0;
  }

  const FeatureModel& model_;
  std::vector<std::string> order_;
  std::map<std::string, std::size_t, std::less<>> pos_;
  std::vector<int> fixed_;
  std::vector<std::vector<Check>> by_last_;
  std::vector<char> values_;
};

}  // namespace

SolutionSet enumerate(const FeatureModel& model, std::size_t label_cap) {
  return Enumerator(model, {}, label_cap).run();
}

SolutionSet enumerate_completions(const FeatureModel& model, const Assignment& fixed,
                                  std::size_t label_cap) {
  return Enumerator(model, fixed, label_cap).run();
}

SolutionSet enumerate_unpruned(const FeatureModel& model, std::size_t label_cap) {
  SolutionSet out;
  out.labels = model.labels();
  out.fingerprint = model_fingerprint(model);
  const std::size_t n = out.labels.size();
  if (n > label_cap || n >= 63) {
    throw Error(ErrorCode::CapExceeded,
                "model has " + std::to_string(n) + " labels, cap is " + std::to_string(label_cap),
                {std::to_string(n)});
  }
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
    Assignment a;
    std::vector<bool> row(n);
    for (std::size_t k = 0; k < n; ++k) {
      // First label is the most significant bit, so rows come out sorted.
      row[k] = (bits >> (n - 1 - k)) & 1U;
      a.emplace(out.labels[k], row[k]);
    }
    if (validate_complete(model, a).empty()) out.rows.push_back(std::move(row));
  }
  return out;
}

SolutionStats solution_stats(const FeatureModel& model, std::size_t label_cap) {
  return Enumerator(model, {}, label_cap).stats();
}

std::uint64_t count(const FeatureModel& model, std::size_t label_cap) {
  return solution_stats(model, label_cap).count;
}

namespace {

SolutionStats stats_of(const SolutionSet& s, const FeatureModel& model) {
  SolutionStats out;
  out.count = s.size();
  for (const std::string& label : model.feature_labels()) {
    auto it = std::lower_bound(s.labels.begin(), s.labels.end(), label);
    if (it == s.labels.end() || *it != label) {
      throw Error(ErrorCode::ModelMismatch, "solution set does not cover label '" + label + "'");
    }
    const auto col = static_cast<std::size_t>(it - s.labels.begin());
    out.selected[label] = static_cast<std::uint64_t>(
        std::count_if(s.rows.begin(), s.rows.end(), [&](const std::vector<bool>& r) { return r[col]; }));
  }
  return out;
}

}  // namespace

std::set<std::string> dead_features(const SolutionStats& stats, const FeatureModel& model) {
  std::set<std::string> out;
  for (const std::string& label : model.feature_labels()) {
    if (stats.selected.at(label) == 0) out.insert(label);
  }
  return out;
}

std::set<std::string> dead_features(const SolutionSet& solutions, const FeatureModel& model) {
  return dead_features(stats_of(solutions, model), model);
}

std::set<std::string> dead_features(const FeatureModel& model, std::size_t label_cap) {
  return dead_features(solution_stats(model, label_cap), model);
}

std::set<std::string> false_optional(const SolutionStats& stats, const FeatureModel& model) {
  std::set<std::string> out;
  if (stats.count == 0) return out;
  const std::string& root_label = model.box(model.root()).label;
  for (const std::string& label : model.feature_labels()) {
    if (label == root_label) continue;
    bool mandatory = false;
    for (BoxId id : model.boxes_with_label(label)) {
      if (!model.in_constraints_branch(id) && model.box(id).mandatory) mandatory = true;
    }
    if (!mandatory && stats.selected.at(label) == stats.count) out.insert(label);
  }
  return out;
}

std::set<std::string> false_optional(const SolutionSet& solutions, const FeatureModel& model) {
  return false_optional(stats_of(solutions, model), model);
}

std::set<std::string> false_optional(const FeatureModel& model, std::size_t label_cap) {
  return false_optional(solution_stats(model, label_cap), model);
}

CycleReport detect_cycles(const FeatureModel& model) {
  CycleReport report;
  auto shared = std::make_shared<const FeatureModel>(model);
  std::optional<ConfigState> start;
  try {
    start = initial_state(shared);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::VoidModel) return report;
    throw;
  }

  const std::vector<std::string> labels = model.feature_labels();
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < labels.size(); ++i) index[labels[i]] = i;

  std::vector<std::vector<std::size_t>> edges(labels.size());
  for (std::size_t u = 0; u < labels.size(); ++u) {
    if (start->label_state(labels[u]) != BoxState::Open) continue;
    DecideResult probe = decide(*start, std::string_view(labels[u]), Action::Select);
    if (!probe.report.accepted) continue;
    for (std::size_t v = 0; v < labels.size(); ++v) {
      if (v == u) continue;
      if (start->label_state(labels[v]) != BoxState::Selected &&
          probe.state.label_state(labels[v]) == BoxState::Selected) {
        edges[u].push_back(v);
      }
    }
  }

  // Tarjan's SCC.
  const std::size_t n = labels.size();
  std::vector<int> idx(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  int counter = 0;
  std::function<void(std::size_t)> strong = [&](std::size_t v) {
    idx[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (std::size_t w : edges[v]) {
      if (idx[w] < 0) {
        strong(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], idx[w]);
      }
    }
    if (low[v] == idx[v]) {
      std::vector<std::string> comp;
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp.push_back(labels[w]);
      } while (w != v);
      if (comp.size() >= 2) {
        std::sort(comp.begin(), comp.end());
        report.components.push_back(std::move(comp));
      }
    }
  };
  for (std::size_t v = 0; v < n; ++v) {
    if (idx[v] < 0) strong(v);
  }
  std::sort(report.components.begin(), report.components.end());
  return report;
}

}  // namespace colorfm
