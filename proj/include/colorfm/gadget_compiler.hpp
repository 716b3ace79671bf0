#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "colorfm/feature_graph.hpp"
#include "colorfm/formula.hpp"

namespace colorfm {

/// A cross-tree constraint as written by the modeller.
struct ConstraintDecl {
  enum class Kind : std::uint8_t { Requires, Excludes, Formula };

  Kind kind = Kind::Requires;
  std::string a;  // Requires / Excludes
  std::string b;
  std::optional<colorfm::Formula> formula;  // Formula
  std::string name;

  static ConstraintDecl requires_(std::string a, std::string b);
  static ConstraintDecl excludes(std::string a, std::string b);
  static ConstraintDecl constraint(std::string name, colorfm::Formula f);

  /// Source line in the model document syntax.
  std::string to_source() const;

  friend bool operator==(const ConstraintDecl&, const ConstraintDecl&) = default;
};

/// Names for gadget heads: prefix followed by a running counter.
struct FreshLabelPolicy {
  std::string prefix = "_c";
  std::uint64_t counter = 0;

  /// A policy whose next label is past every `<prefix><n>` already in `model`.
  static FreshLabelPolicy after(const FeatureModel& model, std::string prefix = "_c");

  /// Next label; throws FreshLabelCollision if `model` already uses it.
  std::string next(const FeatureModel& model);
};

enum class Encoding : std::uint8_t {
  Structural,  // one gadget per subformula
  ViaDnf,      // to_dnf first, then one gadget per clause
};

/// A requires B: a box labelled B under the constraints branch with a single
/// child labelled A. Selecting A anywhere selects B as A's parent.
FeatureModel compile_requires(const FeatureModel& model, const std::string& a,
                              const std::string& b);

/// A excludes B: a fresh-labelled XOR head under the constraints branch over
/// children labelled A and B.
FeatureModel compile_excludes(const FeatureModel& model, const std::string& a,
                              const std::string& b, FreshLabelPolicy& policy);
FeatureModel compile_excludes(const FeatureModel& model, const std::string& a,
                              const std::string& b);

struct CompiledFormula {
  FeatureModel model;
  /// Canonical text of each encoded subformula -> label that carries its value.
  std::map<std::string, std::string> labels;
  /// Boxes added under the constraints branch (including the branch head when
  /// it had to be created).
  std::size_t boxes_added = 0;
  /// Label carrying the whole (lowered) formula; an atom's own label, or
  /// empty when the formula folded to a constant.
  std::string top;
};

/// Lowers `f` into gadgets:
///   NOT g        mandatory XOR head over {g, n}; n carries !g
///   OR g1..gk    optional OR head h over {g1..gk}; h carries the disjunction
///   AND g1..gk   !(OR(!g1..!gk)), built from the two gadgets above
/// The label carrying the whole formula is then forced true.
CompiledFormula compile_formula(const FeatureModel& model, const Formula& f,
                                FreshLabelPolicy& policy, Encoding encoding = Encoding::Structural);

/// Like compile_formula without forcing the result: `top` is a label equal to
/// `f` in every valid configuration, and the model's products are unchanged.
CompiledFormula define_formula(const FeatureModel& model, const Formula& f,
                               FreshLabelPolicy& policy, Encoding encoding = Encoding::Structural);

/// Applies `decls` in order with one shared fresh-label policy. A failing
/// declaration is rethrown as "constraint #<n>" (1-based) with a
/// `declaration=<i>` detail (0-based).
FeatureModel compile_all(const FeatureModel& model, std::span<const ConstraintDecl> decls,
                         Encoding encoding = Encoding::Structural);

}  // namespace colorfm
