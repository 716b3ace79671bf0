#include "colorfm/feature_graph.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <set>

#include "colorfm/error.hpp"

namespace colorfm {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Syntax: return "syntax-error";
    case ErrorCode::EmptyInput: return "empty-input";
    case ErrorCode::UnknownLabel: return "unknown-label";
    case ErrorCode::UnknownBox: return "unknown-box";
    case ErrorCode::SameLabel: return "same-label";
    case ErrorCode::FreshLabelCollision: return "fresh-label-collision";
    case ErrorCode::InvalidModel: return "invalid-model";
    case ErrorCode::ModelMismatch: return "model-mismatch";
    case ErrorCode::InvalidDecision: return "invalid-decision";
    case ErrorCode::NothingToUndo: return "nothing-to-undo";
    case ErrorCode::VoidModel: return "void-model";
    case ErrorCode::CapExceeded: return "cap-exceeded";
    case ErrorCode::DnfTooLarge: return "dnf-too-large";
    case ErrorCode::ReplayDivergence: return "replay-divergence";
    case ErrorCode::Io: return "io-error";
  }
  return "error";
}

std::optional<BoxId> parse_box_id(std::string_view text) {
  if (text.size() < 2 || text.front() != 'b') return std::nullopt;
  std::uint32_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data() + 1, text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return BoxId{v};
}

std::string_view group_name(Group g) {
  switch (g) {
    case Group::Free: return "free";
    case Group::Or: return "or";
    case Group::Mutex: return "mutex";
    case Group::Xor: return "xor";
  }
  return "free";
}

std::optional<Group> parse_group(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "free") return Group::Free;
  if (lower == "or") return Group::Or;
  if (lower == "mutex") return Group::Mutex;
  if (lower == "xor") return Group::Xor;
  return std::nullopt;
}

std::string_view state_name(BoxState s) {
  switch (s) {
    case BoxState::Open: return "OPEN";
    case BoxState::Selected: return "SELECTED";
    case BoxState::Discarded: return "DISCARDED";
  }
  return "OPEN";
}

// ---------------------------------------------------------------------------

FeatureModel::FeatureModel(std::string name, std::vector<Box> boxes, BoxId root,
                           std::optional<BoxId> constraints_root)
    : name_(std::move(name)),
      boxes_(std::move(boxes)),
      root_(root),
      constraints_root_(constraints_root),
      in_constraints_(boxes_.size(), false) {
  for (const Box& b : boxes_) by_label_[b.label].push_back(b.id);

  if (constraints_root_ && contains(*constraints_root_)) {
    std::vector<BoxId> stack{*constraints_root_};
    while (!stack.empty()) {
      BoxId cur = stack.back();
      stack.pop_back();
      if (!contains(cur) || in_constraints_[cur.value]) continue;
      in_constraints_[cur.value] = true;
      for (BoxId c : boxes_[cur.value].children) stack.push_back(c);
    }
  }
}

const Box& FeatureModel::box(BoxId id) const {
  if (!contains(id)) throw Error(ErrorCode::UnknownBox, "unknown box " + id.str());
  return boxes_[id.value];
}

std::span<const BoxId> FeatureModel::boxes_with_label(std::string_view label) const {
  auto it = by_label_.find(label);
  if (it == by_label_.end()) return {};
  return it->second;
}

bool FeatureModel::has_label(std::string_view label) const {
  return by_label_.find(label) != by_label_.end();
}

std::vector<std::string> FeatureModel::labels() const {
  std::vector<std::string> out;
  out.reserve(by_label_.size());
  for (const auto& [label, ids] : by_label_) out.push_back(label);
  return out;
}

std::vector<std::string> FeatureModel::feature_labels() const {
  std::vector<std::string> out;
  for (const auto& [label, ids] : by_label_) {
    if (is_feature_label(label)) out.push_back(label);
  }
  return out;
}

bool FeatureModel::is_feature_label(std::string_view label) const {
  for (BoxId id : boxes_with_label(label)) {
    if (!in_constraints_branch(id)) return true;
  }
  return false;
}

bool FeatureModel::in_constraints_branch(BoxId id) const {
  return contains(id) && in_constraints_[id.value];
}

// ---------------------------------------------------------------------------

ModelBuilder::ModelBuilder(std::string name, std::string root_label)
    : name_(std::move(name)), root_{0} {
  Box root;
  root.id = root_;
  root.label = std::move(root_label);
  root.mandatory = true;
  boxes_.push_back(std::move(root));
}

ModelBuilder::ModelBuilder(const FeatureModel& base)
    : name_(base.name()),
      boxes_(base.boxes().begin(), base.boxes().end()),
      root_(base.root()),
      constraints_root_(base.constraints_root()) {}

BoxId ModelBuilder::add(BoxId parent, std::string label, bool mandatory, Group group) {
  BoxId id{static_cast<std::uint32_t>(boxes_.size())};
  Box b;
  b.id = id;
  b.label = std::move(label);
  b.parent = parent;
  b.mandatory = mandatory;
  b.group = group;
  at(parent).children.push_back(id);
  boxes_.push_back(std::move(b));
  return id;
}

Box& ModelBuilder::at(BoxId id) {
  if (id.value >= boxes_.size()) throw Error(ErrorCode::UnknownBox, "unknown box " + id.str());
  return boxes_[id.value];
}

const Box& ModelBuilder::at(BoxId id) const {
  if (id.value >= boxes_.size()) throw Error(ErrorCode::UnknownBox, "unknown box " + id.str());
  return boxes_[id.value];
}

BoxId ModelBuilder::ensure_constraints_root() {
  if (!constraints_root_) {
    constraints_root_ = add(root_, std::string(kConstraintsLabel), true, Group::Free);
  }
  return *constraints_root_;
}

FeatureModel ModelBuilder::build() const {
  return FeatureModel(name_, boxes_, root_, constraints_root_);
}

// ---------------------------------------------------------------------------

bool ValidationReport::has(std::string_view rule) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.rule == rule; });
}

ValidationReport validate_model(const FeatureModel& model) {
  ValidationReport report;
  auto add = [&](std::string rule, std::vector<BoxId> boxes, std::string message) {
    report.violations.push_back({std::move(rule), std::move(boxes), std::move(message)});
  };

  if (!model.contains(model.root())) {
    add("root-missing", {}, "root box does not exist");
    return report;
  }
  const Box& root = model.box(model.root());
  if (root.parent) add("root-has-parent", {root.id}, "root box must not have a parent");
  if (!root.mandatory) add("root-mandatory", {root.id}, "root box must be mandatory");

  for (const Box& b : model.boxes()) {
    if (b.label.empty()) add("empty-label", {b.id}, "box " + b.id.str() + " has an empty label");
    if (b.group != Group::Free && b.children.empty()) {
      add("group-needs-children", {b.id},
          "box '" + b.label + "' has group " + std::string(group_name(b.group)) +
              " but no children");
    }
    if (b.id == model.root()) continue;
    if (!b.parent || !model.contains(*b.parent)) {
      add("parent-link", {b.id}, "box '" + b.label + "' has no valid parent");
      continue;
    }
    const auto& siblings = model.box(*b.parent).children;
    if (std::count(siblings.begin(), siblings.end(), b.id) != 1) {
      add("parent-link", {b.id, *b.parent},
          "box '" + b.label + "' is not listed exactly once by its parent");
    }
  }
  for (const Box& b : model.boxes()) {
    for (BoxId c : b.children) {
      if (!model.contains(c) || model.box(c).parent != b.id) {
        add("parent-link", {b.id, c}, "child link of '" + b.label + "' is not mirrored");
      }
    }
  }

  // Reachability doubles as the acyclicity check: each box has one parent, so
  // an unreachable box is either orphaned or sits on a parent cycle.
  std::vector<bool> seen(model.size(), false);
  std::vector<BoxId> stack{model.root()};
  while (!stack.empty()) {
    BoxId cur = stack.back();
    stack.pop_back();
    if (!model.contains(cur) || seen[cur.value]) continue;
    seen[cur.value] = true;
    for (BoxId c : model.box(cur).children) stack.push_back(c);
  }
  for (const Box& b : model.boxes()) {
    if (!seen[b.id.value]) {
      add("unreachable", {b.id}, "box '" + b.label + "' is not reachable from the root");
    }
  }

  if (auto croot = model.constraints_root()) {
    if (!model.contains(*croot) || model.box(*croot).parent != model.root()) {
      add("constraints-placement", {*croot}, "constraints branch must be a child of the root");
    } else if (!model.box(*croot).mandatory) {
      add("constraints-placement", {*croot}, "constraints branch must be mandatory");
    }
  }
  for (const Box& b : model.boxes()) {
    if (b.label == kConstraintsLabel && b.id != model.constraints_root()) {
      add("reserved-label", {b.id},
          "label '" + std::string(kConstraintsLabel) + "' is reserved for the constraints branch");
    }
  }
  return report;
}

// ---------------------------------------------------------------------------

std::string_view color_name(StructuralColor c) {
  switch (c) {
    case StructuralColor::White: return "white";
    case StructuralColor::Blue: return "blue";
    case StructuralColor::Red: return "red";
  }
  return "white";
}

std::string_view color_name(StateColor c) {
  switch (c) {
    case StateColor::None: return "none";
    case StateColor::Green: return "green";
    case StateColor::Gray: return "gray";
  }
  return "none";
}

StructuralColor structural_color(const FeatureModel& model, BoxId id) {
  const Box& b = model.box(id);
  if (b.parent && allows_one_child(model.box(*b.parent).group)) return StructuralColor::Red;
  if (b.mandatory || needs_one_child(b.group)) return StructuralColor::Blue;
  return StructuralColor::White;
}

ColorView render_colors(const FeatureModel& model) {
  ColorView view;
  view.structural.reserve(model.size());
  for (const Box& b : model.boxes()) view.structural.push_back(structural_color(model, b.id));
  return view;
}

ColorView render_colors(const FeatureModel& model, std::span<const BoxState> states) {
  if (states.size() != model.size()) {
    throw Error(ErrorCode::ModelMismatch,
                "configuration covers " + std::to_string(states.size()) + " boxes, model has " +
                    std::to_string(model.size()));
  }
  ColorView view = render_colors(model);
  std::vector<StateColor> colors;
  colors.reserve(states.size());
  for (BoxState s : states) {
    colors.push_back(s == BoxState::Selected    ? StateColor::Green
                     : s == BoxState::Discarded ? StateColor::Gray
                                                : StateColor::None);
  }
  view.state = std::move(colors);
  return view;
}

std::map<std::string, std::vector<BoxId>> shared_label_groups(const FeatureModel& model) {
  std::map<std::string, std::vector<BoxId>> groups;
  for (const Box& b : model.boxes()) groups[b.label].push_back(b.id);
  return groups;
}

namespace {

struct Fnv1a {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  void bytes(std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  }
  void field(std::string_view s) {
    bytes(s);
    bytes(std::string_view("\x1f", 1));
  }
};

}  // namespace

std::uint64_t model_fingerprint(const FeatureModel& model) {
  Fnv1a f;
  f.field(model.name());
  f.field(std::to_string(model.root().value));
  f.field(model.constraints_root() ? std::to_string(model.constraints_root()->value) : "-");
  for (const Box& b : model.boxes()) {
    f.field(b.label);
    f.field(b.parent ? std::to_string(b.parent->value) : "-");
    f.field(b.mandatory ? "m" : "o");
    f.field(group_name(b.group));
    for (BoxId c : b.children) f.field(std::to_string(c.value));
    f.bytes("\n");
  }
  return f.h;
}

std::string fingerprint_hex(std::uint64_t fp) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fp));
  return buf;
}

}  // namespace colorfm
