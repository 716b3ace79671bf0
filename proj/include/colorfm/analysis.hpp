#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "colorfm/feature_graph.hpp"
#include "colorfm/formula.hpp"

namespace colorfm {

struct RuleViolation {
  std::string rule;  // root, parent, discard-cascade, mandatory, or, mutex
  BoxId box;
  std::string message;
};

/// Checks a complete label assignment against the diagram semantics directly,
/// box by box. Shares no code with the propagation engine.
/// Throws UnknownLabel if `assignment` misses a model label.
std::vector<RuleViolation> validate_complete(const FeatureModel& model,
                                             const Assignment& assignment);

inline constexpr std::size_t kDefaultLabelCap = 20;

/// Valid complete configurations. Labels are sorted; rows follow binary
/// counter order over that label order (first label most significant).
struct SolutionSet {
  std::vector<std::string> labels;
  std::vector<std::vector<bool>> rows;
  std::uint64_t fingerprint = 0;

  std::size_t size() const noexcept { return rows.size(); }
  bool empty() const noexcept { return rows.empty(); }
  Assignment at(std::size_t i) const;
  /// Distinct projections of the rows onto `keep`, as assignments.
  std::set<Assignment> project(const std::vector<std::string>& keep) const;
};

/// Depth-first search with early rule checks. `label_cap` bounds the number
/// of feature labels (labels outside the constraints branch); labels minted by
/// the gadget compiler are functions of those and do not count against it.
SolutionSet enumerate(const FeatureModel& model, std::size_t label_cap = kDefaultLabelCap);

/// Like enumerate, restricted to assignments agreeing with `fixed`.
SolutionSet enumerate_completions(const FeatureModel& model, const Assignment& fixed,
                                  std::size_t label_cap = kDefaultLabelCap);

/// Reference enumerator: all 2^n assignments filtered by validate_complete.
/// `label_cap` here bounds all labels.
SolutionSet enumerate_unpruned(const FeatureModel& model, std::size_t label_cap = 16);

/// Same search as enumerate, without storing rows: the solution count and,
/// per feature label, the number of solutions selecting it.
struct SolutionStats {
  std::uint64_t count = 0;
  std::map<std::string, std::uint64_t> selected;
};

SolutionStats solution_stats(const FeatureModel& model,
                             std::size_t label_cap = kDefaultLabelCap);

std::uint64_t count(const FeatureModel& model, std::size_t label_cap = kDefaultLabelCap);

/// Feature labels false in every solution.
std::set<std::string> dead_features(const SolutionSet& solutions, const FeatureModel& model);
std::set<std::string> dead_features(const SolutionStats& stats, const FeatureModel& model);
std::set<std::string> dead_features(const FeatureModel& model,
                                    std::size_t label_cap = kDefaultLabelCap);

/// Non-root feature labels with no mandatory box that are true in every solution.
std::set<std::string> false_optional(const SolutionSet& solutions, const FeatureModel& model);
std::set<std::string> false_optional(const SolutionStats& stats, const FeatureModel& model);
std::set<std::string> false_optional(const FeatureModel& model,
                                     std::size_t label_cap = kDefaultLabelCap);

struct CycleReport {
  /// Each entry is a sorted set of feature labels that force one another.
  std::vector<std::vector<std::string>> components;
  bool empty() const noexcept { return components.empty(); }
};

/// Builds the forced-selection digraph over feature labels (u -> v when
/// selecting u in the initial state forces v) and reports its strongly
/// connected components of size >= 2.
CycleReport detect_cycles(const FeatureModel& model);

}  // namespace colorfm
