#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "colorfm/feature_graph.hpp"

namespace colorfm {

enum class Action : std::uint8_t { Select, Discard };

std::string_view action_name(Action a);
std::optional<Action> parse_action(std::string_view text);
constexpr BoxState target_state(Action a) {
  return a == Action::Select ? BoxState::Selected : BoxState::Discarded;
}

/// Why a box received its state. R1..R7 are the core coherency rules; R8 and
/// R9 are their contrapositives (mandatory child discarded, OR/XOR group left
/// without candidates).
enum class Rule : std::uint8_t {
  User,
  Root,
  ChildParent,     // R1
  DiscardCascade,  // R2
  LabelLink,       // R3
  Mandatory,       // R4
  Mutex,           // R5
  OrUnit,          // R6
  OrViolation,     // R7
  MandatoryUp,     // R8
  OrEmpty,         // R9
  Lookahead,
};

std::string_view rule_id(Rule r);
std::string_view rule_name(Rule r);

struct Decision {
  BoxId box;
  Action action;
  Rule rule = Rule::User;
  std::optional<BoxId> from;

  bool is_user() const noexcept { return rule == Rule::User; }
  friend bool operator==(const Decision&, const Decision&) = default;
};

struct ChainStep {
  BoxId box;
  BoxState state;
  Rule rule;
  std::optional<BoxId> from;
};

/// A box that would have to be both SELECTED and DISCARDED, with the two
/// derivations (newest step first).
struct Conflict {
  BoxId box;
  std::vector<ChainStep> selected_chain;
  std::vector<ChainStep> discarded_chain;
};

struct PropagationReport {
  bool accepted = false;
  std::vector<Decision> forced;
  std::optional<Conflict> conflict;
};

/// Per-box decision map plus the journal that produced it.
class ConfigState {
 public:
  const FeatureModel& model() const noexcept { return *model_; }
  const std::shared_ptr<const FeatureModel>& model_ptr() const noexcept { return model_; }

  BoxState state(BoxId id) const;
  std::span<const BoxState> states() const noexcept { return states_; }
  /// State shared by every box with `label`; throws UnknownLabel.
  BoxState label_state(std::string_view label) const;

  /// Decision that gave `id` its current state, or nullptr when OPEN.
  const Decision* cause(BoxId id) const;
  std::span<const Decision> journal() const noexcept { return journal_; }
  std::vector<Decision> user_decisions() const;
  std::size_t undo_depth() const noexcept { return undo_stack_.size(); }

  /// Stable digest of states, causes and journal.
  std::uint64_t digest() const;

  friend bool operator==(const ConfigState& a, const ConfigState& b);

 private:
  friend class Transaction;
  friend ConfigState initial_state(std::shared_ptr<const FeatureModel> model);
  friend ConfigState undo(const ConfigState& state);

  struct Snapshot {
    std::vector<BoxState> states;
    std::vector<std::int32_t> causes;
    std::size_t journal_size = 0;
    friend bool operator==(const Snapshot&, const Snapshot&) = default;
  };

  std::shared_ptr<const FeatureModel> model_;
  std::vector<BoxState> states_;
  std::vector<std::int32_t> causes_;  // journal index, -1 when OPEN
  std::vector<Decision> journal_;
  std::vector<Snapshot> undo_stack_;
};

/// Root selected and propagated. Throws VoidModel if that already contradicts.
ConfigState initial_state(std::shared_ptr<const FeatureModel> model);

struct DecideResult {
  ConfigState state;
  PropagationReport report;
};

/// One transaction: apply the decision and propagate to fixpoint. A REJECTED
/// result returns the input state unchanged. Throws InvalidDecision when the
/// box is not OPEN and UnknownBox when it does not exist.
///
/// `origin` is User for interactive choices (undoable) or Lookahead for moves
/// applied on behalf of the user after probing.
DecideResult decide(const ConfigState& state, BoxId box, Action action,
                    Rule origin = Rule::User);

/// Same, addressing the feature by label (any box of the label).
DecideResult decide(const ConfigState& state, std::string_view label, Action action);

/// Reverts the latest USER decision and everything propagated after it.
ConfigState undo(const ConfigState& state);

struct Status {
  std::size_t open_count = 0;
  bool complete() const noexcept { return open_count == 0; }
};

Status status(const ConfigState& state);

enum class Move : std::uint8_t { Free, SelectForbidden, DiscardForbidden, ForcedApplied };

std::string_view move_name(Move m);

struct LookaheadResult {
  /// Entries for boxes that were OPEN when probing started.
  std::map<BoxId, Move> moves;
  /// Some OPEN box can neither be selected nor discarded.
  bool dead_end = false;
  std::vector<BoxId> dead_boxes;
  /// In auto mode, the state after applying every single-direction move.
  std::optional<ConfigState> applied;
};

enum class LookaheadMode { Report, Auto };

/// Failed-literal probing: tries both actions on every OPEN box in a sandbox.
LookaheadResult lookahead(const ConfigState& state, LookaheadMode mode = LookaheadMode::Report);

ColorView render_colors(const ConfigState& state);

}  // namespace colorfm
