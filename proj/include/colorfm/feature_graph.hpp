#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace colorfm {

/// Index of a box inside its model. Box ids are dense: 0..size()-1.
struct BoxId {
  std::uint32_t value = 0;

  auto operator<=>(const BoxId&) const = default;
  std::string str() const { return "b" + std::to_string(value); }
};

std::optional<BoxId> parse_box_id(std::string_view text);

/// How a box constrains its children once it is selected.
enum class Group : std::uint8_t {
  Free,   // no constraint
  Or,     // at least one child
  Mutex,  // at most one child
  Xor,    // exactly one child
};

std::string_view group_name(Group g);
std::optional<Group> parse_group(std::string_view text);

constexpr bool needs_one_child(Group g) { return g == Group::Or || g == Group::Xor; }
constexpr bool allows_one_child(Group g) { return g == Group::Mutex || g == Group::Xor; }

enum class BoxState : std::uint8_t { Open, Selected, Discarded };

std::string_view state_name(BoxState s);

struct Box {
  BoxId id;
  std::string label;
  std::optional<BoxId> parent;
  std::vector<BoxId> children;
  bool mandatory = false;
  Group group = Group::Free;
};

/// Label of the branch that holds compiled cross-tree constraints.
inline constexpr std::string_view kConstraintsLabel = "constraints";

/// A feature diagram: a tree of boxes whose labels may repeat. Boxes that
/// share a label denote the same feature, so the feature-level graph is a DAG.
///
/// Immutable once built; use ModelBuilder to derive a modified copy.
class FeatureModel {
 public:
  FeatureModel(std::string name, std::vector<Box> boxes, BoxId root,
               std::optional<BoxId> constraints_root = std::nullopt);

  const std::string& name() const noexcept { return name_; }
  std::span<const Box> boxes() const noexcept { return boxes_; }
  std::size_t size() const noexcept { return boxes_.size(); }
  bool contains(BoxId id) const noexcept { return id.value < boxes_.size(); }
  const Box& box(BoxId id) const;
  BoxId root() const noexcept { return root_; }
  std::optional<BoxId> constraints_root() const noexcept { return constraints_root_; }

  /// Boxes carrying `label`, in id order. Empty if the label is unknown.
  std::span<const BoxId> boxes_with_label(std::string_view label) const;
  bool has_label(std::string_view label) const;
  /// All distinct labels, sorted.
  std::vector<std::string> labels() const;
  /// Labels used by at least one box outside the constraints branch, sorted.
  std::vector<std::string> feature_labels() const;
  bool is_feature_label(std::string_view label) const;

  bool in_constraints_branch(BoxId id) const;

 private:
  std::string name_;
  std::vector<Box> boxes_;
  BoxId root_;
  std::optional<BoxId> constraints_root_;
  std::map<std::string, std::vector<BoxId>, std::less<>> by_label_;
  std::vector<bool> in_constraints_;
};

/// Incrementally assembles a model. Performs no validation; call
/// validate_model on the result.
class ModelBuilder {
 public:
  ModelBuilder(std::string name, std::string root_label);
  explicit ModelBuilder(const FeatureModel& base);

  BoxId root() const noexcept { return root_; }
  BoxId add(BoxId parent, std::string label, bool mandatory = false, Group group = Group::Free);
  Box& at(BoxId id);
  const Box& at(BoxId id) const;
  std::size_t size() const noexcept { return boxes_.size(); }

  /// Returns the constraints branch head, creating it as a mandatory child of
  /// the root when absent.
  BoxId ensure_constraints_root();
  std::optional<BoxId> constraints_root() const noexcept { return constraints_root_; }
  void set_constraints_root(std::optional<BoxId> id) { constraints_root_ = id; }

  FeatureModel build() const;

 private:
  std::string name_;
  std::vector<Box> boxes_;
  BoxId root_;
  std::optional<BoxId> constraints_root_;
};

struct Violation {
  std::string rule;
  std::vector<BoxId> boxes;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  bool has(std::string_view rule) const;
};

/// Structural checks. Rule names:
///   root-mandatory, root-has-parent, parent-link, unreachable,
///   empty-label, group-needs-children, constraints-placement, reserved-label
ValidationReport validate_model(const FeatureModel& model);

enum class StructuralColor : std::uint8_t { White, Blue, Red };
enum class StateColor : std::uint8_t { None, Green, Gray };

std::string_view color_name(StructuralColor c);
std::string_view color_name(StateColor c);

struct ColorView {
  std::vector<StructuralColor> structural;
  std::optional<std::vector<StateColor>> state;
};

StructuralColor structural_color(const FeatureModel& model, BoxId id);
ColorView render_colors(const FeatureModel& model);
/// Throws ModelMismatch when `states` does not cover exactly the model's boxes.
ColorView render_colors(const FeatureModel& model, std::span<const BoxState> states);

std::map<std::string, std::vector<BoxId>> shared_label_groups(const FeatureModel& model);

/// Stable 64-bit digest of the full box structure.
std::uint64_t model_fingerprint(const FeatureModel& model);
std::string fingerprint_hex(std::uint64_t fp);

}  // namespace colorfm
