#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "colorfm/asset_catalog.hpp"
#include "colorfm/feature_graph.hpp"
#include "colorfm/gadget_compiler.hpp"
#include "colorfm/propagation.hpp"

namespace colorfm {

/// Syntax-level content of a `.fm` file, before validation and compilation.
struct Document {
  FeatureModel base;  // main tree only
  std::vector<ConstraintDecl> constraints;
  Catalog catalog;
};

/// Document syntax:
///
///   model "<name>"
///   feature <label> [mandatory] [group=or|xor|mutex] [{ feature ... }]
///   requires <label> <label>
///   excludes <label> <label>
///   constraint "<name>" <formula to end of line>
///   asset "<id>" "<name>" kind=<kind> when <formula|always>
///
/// One root feature; constraint lines follow it, asset lines come last.
/// `#` starts a comment. The root is always mandatory.
Document parse_document(std::string_view text);

struct LoadOptions {
  Encoding encoding = Encoding::Structural;
  /// Asset criteria must only name feature labels.
  bool strict_assets = true;
};

struct LoadedModel {
  std::shared_ptr<const FeatureModel> model;  // with constraints compiled
  FeatureModel base;
  std::vector<ConstraintDecl> constraints;
  Catalog catalog;
};

/// parse_document, then validate_model (InvalidModel with one detail per
/// violation), compile_all, and bind_catalog when strict.
LoadedModel parse_model(std::string_view text, const LoadOptions& options = {});

/// Canonical text. Boxes under the constraints branch are not written; the
/// declarations that produced them are.
std::string serialize_model(const FeatureModel& model, std::span<const ConstraintDecl> decls,
                            const Catalog& catalog);

/// Graphviz description with the structural fill colors and, when a state is
/// given, a green/gray border per decided box.
std::string export_dot(const FeatureModel& model, const ConfigState* state = nullptr);

/// JSON record: model name and fingerprint, per-feature-label state, and the journal
/// of non-propagated decisions in order.
std::string export_config(const ConfigState& state);

struct ImportedConfig {
  ConfigState state;
  std::vector<std::string> warnings;
};

/// Replays the journal through decide and checks the per-label states.
/// Fingerprint drift is a warning; a diverging replay is ReplayDivergence.
ImportedConfig import_config(std::shared_ptr<const FeatureModel> model, std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace colorfm
