#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "colorfm/analysis.hpp"
#include "colorfm/gadget_compiler.hpp"
#include "colorfm/io_formats.hpp"
#include "colorfm/propagation.hpp"

namespace colorfm::testing {

std::filesystem::path fixture_path(std::string_view name);
std::string fixture_text(std::string_view name);
LoadedModel load_fixture(std::string_view name, Encoding encoding = Encoding::Structural);
/// Fixtures that load without error.
std::vector<std::string> loadable_fixtures();

std::shared_ptr<const FeatureModel> share(FeatureModel m);

/// Same trees up to box numbering: labels, attributes and child order.
bool same_tree(const FeatureModel& a, const FeatureModel& b);

/// Root plus `n` optional leaves L1..Ln.
FeatureModel leaves_model(std::size_t n);
/// Root with one mandatory XOR head over `k` children X1..Xk.
FeatureModel xor_model(std::size_t k);

struct RandomModelOptions {
  std::size_t min_labels = 3;
  std::size_t max_labels = 8;  // feature labels including the root
  double p_mandatory = 0.2;
  double p_group = 0.35;
  double p_shared = 0.1;
  std::size_t max_constraints = 2;
  double p_formula = 0.3;
};

/// Random diagram, possibly with shared labels and compiled constraints.
/// Always passes validate_model; may be void.
FeatureModel random_model(std::mt19937_64& rng, const RandomModelOptions& options = {});

/// Random formula over `labels`, depth <= `depth`.
Formula random_formula(std::mt19937_64& rng, const std::vector<std::string>& labels, int depth);

/// Label -> bool for every label of the state's model. Requires every box
/// decided.
Assignment final_assignment(const ConfigState& state);

/// Every satisfying assignment of `f` over `labels` by brute force.
std::set<Assignment> truth_table(const Formula& f, const std::vector<std::string>& labels);

/// Random decisions on OPEN boxes until COMPLETE. A box whose both actions
/// are rejected ends the walk with nullopt. `on_step` sees each accepted
/// transition (before, after, box, action).
using StepHook = std::function<void(const ConfigState&, const ConfigState&, BoxId, Action)>;
std::optional<ConfigState> random_walk(ConfigState start, std::mt19937_64& rng,
                                       const StepHook& on_step = {});

}  // namespace colorfm::testing
