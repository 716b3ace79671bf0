#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "colorfm/feature_graph.hpp"
#include "colorfm/formula.hpp"

namespace colorfm {

class ConfigState;

enum class AssetKind : std::uint8_t { Part, Software, Model, Spec, Procedure, Tool, Other };

std::string_view asset_kind_name(AssetKind k);
std::optional<AssetKind> parse_asset_kind(std::string_view text);

/// One row of the 150% asset list. A missing criterion means ALWAYS: the
/// asset belongs to the invariant backbone of every product.
struct Asset {
  std::string id;
  std::string name;
  AssetKind kind = AssetKind::Other;
  std::optional<Formula> criterion;

  bool always() const noexcept { return !criterion.has_value(); }
  friend bool operator==(const Asset&, const Asset&) = default;
};

class Catalog {
 public:
  Catalog() = default;
  /// Throws InvalidModel on duplicate asset ids.
  explicit Catalog(std::vector<Asset> assets);

  std::span<const Asset> assets() const noexcept { return assets_; }
  std::size_t size() const noexcept { return assets_.size(); }
  bool empty() const noexcept { return assets_.empty(); }
  const Asset* find(std::string_view id) const;

  friend bool operator==(const Catalog&, const Catalog&) = default;

 private:
  std::vector<Asset> assets_;
};

/// One violation per criterion atom that is not a model label.
ValidationReport bind_catalog(const Catalog& catalog, const FeatureModel& model);

enum class AssetStatus : std::uint8_t { Included, Excluded, Undecided };

std::string_view asset_status_name(AssetStatus s);

struct FilterResult {
  std::vector<std::string> included;
  std::vector<std::string> excluded;
  std::vector<std::string> undecided;

  /// Status per asset, in catalog order.
  std::vector<std::pair<std::string, AssetStatus>> rows;

  friend bool operator==(const FilterResult&, const FilterResult&) = default;
};

/// 100% list for a complete assignment. With UnknownPolicy::Strict a criterion
/// atom missing from the assignment is an UnknownLabel error.
FilterResult filter_complete(const Catalog& catalog, const Assignment& assignment,
                             UnknownPolicy policy = UnknownPolicy::Strict);

/// Three-valued preview: SELECTED -> TRUE, DISCARDED -> FALSE, OPEN -> UNKNOWN.
/// Throws ModelMismatch when a criterion names a label the state's model lacks.
FilterResult filter_partial(const Catalog& catalog, const ConfigState& state);

/// Assignment induced by a state: every label whose boxes are decided.
Assignment decided_labels(const ConfigState& state);

/// RFC 4180 CSV with header `id,name,kind,status`.
std::string filter_csv(const Catalog& catalog, const FilterResult& result);

}  // namespace colorfm
