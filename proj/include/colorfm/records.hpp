#pragma once

#include <string>

#include <json.hpp>

#include "colorfm/analysis.hpp"
#include "colorfm/asset_catalog.hpp"
#include "colorfm/error.hpp"
#include "colorfm/propagation.hpp"

// Machine-readable and human-readable renderings shared by the CLI and the
// HTTP service.

namespace colorfm {

using Json = nlohmann::json;

Json error_record(const Error& e);
Json error_record(std::string_view code, const std::string& message,
                  const std::vector<std::string>& details = {});

Json decision_record(const FeatureModel& model, const Decision& d);
Json chain_record(const FeatureModel& model, const std::vector<ChainStep>& chain);
Json conflict_record(const FeatureModel& model, const Conflict& c);
Json report_record(const FeatureModel& model, const PropagationReport& r);
Json filter_record(const Catalog& catalog, const FilterResult& r);
Json cycle_record(const CycleReport& r);

/// Per-box view: id, label, colors, state, reason and legal moves.
Json boxes_record(const ConfigState& state, const LookaheadResult& probe);

/// "Gasoline DISCARDED by R5 mutex from b2 (Diesel)"
std::string describe(const FeatureModel& model, const Decision& d);
/// Two indented chains, newest step first.
std::string describe(const FeatureModel& model, const Conflict& c);

}  // namespace colorfm
