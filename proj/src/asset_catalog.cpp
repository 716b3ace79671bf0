#include "colorfm/asset_catalog.hpp"

#include <algorithm>
#include <set>

#include "colorfm/error.hpp"
#include "colorfm/propagation.hpp"

namespace colorfm {

std::string_view asset_kind_name(AssetKind k) {
  switch (k) {
    case AssetKind::Part: return "part";
    case AssetKind::Software: return "software";
    case AssetKind::Model: return "model";
    case AssetKind::Spec: return "spec";
    case AssetKind::Procedure: return "procedure";
    case AssetKind::Tool: return "tool";
    case AssetKind::Other: return "other";
  }
  return "other";
}

std::optional<AssetKind> parse_asset_kind(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (AssetKind k : {AssetKind::Part, AssetKind::Software, AssetKind::Model, AssetKind::Spec,
                      AssetKind::Procedure, AssetKind::Tool, AssetKind::Other}) {
    if (asset_kind_name(k) == lower) return k;
  }
  return std::nullopt;
}

std::string_view asset_status_name(AssetStatus s) {
  switch (s) {
    case AssetStatus::Included: return "included";
    case AssetStatus::Excluded: return "excluded";
    case AssetStatus::Undecided: return "undecided";
  }
  return "undecided";
}

Catalog::Catalog(std::vector<Asset> assets) : assets_(std::move(assets)) {
  std::set<std::string_view> seen;
  for (const Asset& a : assets_) {
    if (a.id.empty()) throw Error(ErrorCode::InvalidModel, "asset with empty id");
    if (!seen.insert(a.id).second) {
      throw Error(ErrorCode::InvalidModel, "duplicate asset id '" + a.id + "'", {a.id});
    }
  }
}

const Asset* Catalog::find(std::string_view id) const {
  auto it = std::find_if(assets_.begin(), assets_.end(), [&](const Asset& a) { return a.id == id; });
  return it == assets_.end() ? nullptr : &*it;
}

ValidationReport bind_catalog(const Catalog& catalog, const FeatureModel& model) {
  ValidationReport report;
  for (const Asset& a : catalog.assets()) {
    if (a.always()) continue;
    for (const std::string& label : atoms(*a.criterion)) {
      if (!model.is_feature_label(label)) {
        report.violations.push_back(
            {"unknown-label", {}, "asset '" + a.id + "' refers to unknown label '" + label + "'"});
      }
    }
  }
  return report;
}

namespace {

void push(FilterResult& r, const std::string& id, AssetStatus s) {
  switch (s) {
    case AssetStatus::Included: r.included.push_back(id); break;
    case AssetStatus::Excluded: r.excluded.push_back(id); break;
    case AssetStatus::Undecided: r.undecided.push_back(id); break;
  }
  r.rows.emplace_back(id, s);
}

}  // namespace

FilterResult filter_complete(const Catalog& catalog, const Assignment& assignment,
                             UnknownPolicy policy) {
  FilterResult r;
  for (const Asset& a : catalog.assets()) {
    const bool in = a.always() || evaluate(*a.criterion, assignment, policy);
    push(r, a.id, in ? AssetStatus::Included : AssetStatus::Excluded);
  }
  return r;
}

Assignment decided_labels(const ConfigState& state) {
  Assignment out;
  for (const std::string& label : state.model().labels()) {
    const BoxState s = state.label_state(label);
    if (s != BoxState::Open) out.emplace(label, s == BoxState::Selected);
  }
  return out;
}

FilterResult filter_partial(const Catalog& catalog, const ConfigState& state) {
  const FeatureModel& model = state.model();
  PartialAssignment partial;
  for (const std::string& label : model.labels()) {
    const BoxState s = state.label_state(label);
    partial.emplace(label, s == BoxState::Selected    ? TriValue::True
                           : s == BoxState::Discarded ? TriValue::False
                                                      : TriValue::Unknown);
  }
  FilterResult r;
  for (const Asset& a : catalog.assets()) {
    if (a.always()) {
      push(r, a.id, AssetStatus::Included);
      continue;
    }
    for (const std::string& label : atoms(*a.criterion)) {
      if (!model.has_label(label)) {
        throw Error(ErrorCode::ModelMismatch,
                    "asset '" + a.id + "' refers to label '" + label + "' missing from the model",
                    {label});
      }
    }
    const TriValue v = evaluate3(*a.criterion, partial);
    push(r, a.id,
         v == TriValue::True    ? AssetStatus::Included
         : v == TriValue::False ? AssetStatus::Excluded
                                : AssetStatus::Undecided);
  }
  return r;
}

namespace {

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string filter_csv(const Catalog& catalog, const FilterResult& result) {
  std::string out = "id,name,kind,status\n";
  for (const auto& [id, status] : result.rows) {
    const Asset* a = catalog.find(id);
    out += csv_field(id);
    out += ',';
    out += csv_field(a ? a->name : "");
    out += ',';
    out += a ? asset_kind_name(a->kind) : "other";
    out += ',';
    out += asset_status_name(status);
    out += '\n';
  }
  return out;
}

}  // namespace colorfm
