#include "colorfm/propagation.hpp"

#include <algorithm>
#include <deque>
#include <string>

#include "colorfm/error.hpp"

namespace colorfm {

std::string_view action_name(Action a) { return a == Action::Select ? "select" : "discard"; }

std::optional<Action> parse_action(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "select") return Action::Select;
  if (lower == "discard") return Action::Discard;
  return std::nullopt;
}

std::string_view rule_id(Rule r) {
  switch (r) {
    case Rule::User: return "USER";
    case Rule::Root: return "ROOT";
    case Rule::ChildParent: return "R1";
    case Rule::DiscardCascade: return "R2";
    case Rule::LabelLink: return "R3";
    case Rule::Mandatory: return "R4";
    case Rule::Mutex: return "R5";
    case Rule::OrUnit: return "R6";
    case Rule::OrViolation: return "R7";
    case Rule::MandatoryUp: return "R8";
    case Rule::OrEmpty: return "R9";
    case Rule::Lookahead: return "LOOKAHEAD";
  }
  return "?";
}

std::string_view rule_name(Rule r) {
  switch (r) {
    case Rule::User: return "user decision";
    case Rule::Root: return "root";
    case Rule::ChildParent: return "child-parent";
    case Rule::DiscardCascade: return "discard-cascade";
    case Rule::LabelLink: return "label-link";
    case Rule::Mandatory: return "mandatory";
    case Rule::Mutex: return "mutex";
    case Rule::OrUnit: return "or-unit";
    case Rule::OrViolation: return "or-violation";
    case Rule::MandatoryUp: return "mandatory-up";
    case Rule::OrEmpty: return "or-empty";
    case Rule::Lookahead: return "lookahead";
  }
  return "?";
}

std::string_view move_name(Move m) {
  switch (m) {
    case Move::Free: return "FREE";
    case Move::SelectForbidden: return "SELECT_FORBIDDEN";
    case Move::DiscardForbidden: return "DISCARD_FORBIDDEN";
    case Move::ForcedApplied: return "FORCED_APPLIED";
  }
  return "FREE";
}

// ---------------------------------------------------------------------------

BoxState ConfigState::state(BoxId id) const {
  if (!model_->contains(id)) throw Error(ErrorCode::UnknownBox, "unknown box " + id.str());
  return states_[id.value];
}

BoxState ConfigState::label_state(std::string_view label) const {
  auto ids = model_->boxes_with_label(label);
  if (ids.empty()) {
    throw Error(ErrorCode::UnknownLabel, "unknown label '" + std::string(label) + "'",
                {std::string(label)});
  }
  return states_[ids.front().value];
}

const Decision* ConfigState::cause(BoxId id) const {
  if (!model_->contains(id)) throw Error(ErrorCode::UnknownBox, "unknown box " + id.str());
  const std::int32_t idx = causes_[id.value];
  return idx < 0 ? nullptr : &journal_[static_cast<std::size_t>(idx)];
}

std::vector<Decision> ConfigState::user_decisions() const {
  std::vector<Decision> out;
  for (const Decision& d : journal_) {
    if (d.is_user()) out.push_back(d);
  }
  return out;
}

std::uint64_t ConfigState::digest() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (i * 8)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  mix(model_fingerprint(*model_));
  for (std::size_t i = 0; i < states_.size(); ++i) {
    mix(static_cast<std::uint64_t>(states_[i]));
    mix(static_cast<std::uint64_t>(static_cast<std::int64_t>(causes_[i])));
  }
  for (const Decision& d : journal_) {
    mix(d.box.value);
    mix(static_cast<std::uint64_t>(d.action));
    mix(static_cast<std::uint64_t>(d.rule));
    mix(d.from ? d.from->value + 1ULL : 0ULL);
  }
  mix(undo_stack_.size());
  return h;
}

bool operator==(const ConfigState& a, const ConfigState& b) {
  return a.model_ == b.model_ && a.states_ == b.states_ && a.causes_ == b.causes_ &&
         a.journal_ == b.journal_ && a.undo_stack_ == b.undo_stack_;
}

// ---------------------------------------------------------------------------

/// Mutates a private copy of a state; the caller commits it only on success.
class Transaction {
 public:
  explicit Transaction(ConfigState state)
      : state_(std::move(state)), model_(*state_.model_), start_(state_.journal_.size()) {}

  bool assign(BoxId box, BoxState value, Rule rule, std::optional<BoxId> from) {
    const BoxState current = state_.states_[box.value];
    if (current == value) return true;
    if (current != BoxState::Open) {
      conflict_ = make_conflict(box, value, rule, from);
      return false;
    }
    state_.states_[box.value] = value;
    state_.journal_.push_back(Decision{
        box, value == BoxState::Selected ? Action::Select : Action::Discard, rule, from});
    state_.causes_[box.value] = static_cast<std::int32_t>(state_.journal_.size() - 1);
    queue_.push_back(box);
    return true;
  }

  bool run() {
    while (!queue_.empty()) {
      const BoxId box = queue_.front();
      queue_.pop_front();
      if (!fire(box)) return false;
    }
    return true;
  }

  ConfigState& state() { return state_; }

  void remember(const ConfigState& before) {
    state_.undo_stack_.push_back(
        ConfigState::Snapshot{before.states_, before.causes_, before.journal_.size()});
  }
  std::optional<Conflict>& conflict() { return conflict_; }

  std::vector<Decision> forced() const {
    std::vector<Decision> out;
    for (std::size_t i = start_; i < state_.journal_.size(); ++i) {
      if (!state_.journal_[i].is_user()) out.push_back(state_.journal_[i]);
    }
    return out;
  }

 private:
  BoxState st(BoxId id) const { return state_.states_[id.value]; }

  bool fire(BoxId id) {
    const Box& box = model_.box(id);
    const BoxState value = st(id);

    for (BoxId twin : model_.boxes_with_label(box.label)) {
      if (twin != id && !assign(twin, value, Rule::LabelLink, id)) return false;
    }

    if (value == BoxState::Selected) {
      if (box.parent && !assign(*box.parent, BoxState::Selected, Rule::ChildParent, id)) {
        return false;
      }
      for (BoxId c : box.children) {
        if (model_.box(c).mandatory && !assign(c, BoxState::Selected, Rule::Mandatory, id)) {
          return false;
        }
      }
      if (box.parent && allows_one_child(model_.box(*box.parent).group)) {
        for (BoxId sib : model_.box(*box.parent).children) {
          if (sib != id && !assign(sib, BoxState::Discarded, Rule::Mutex, id)) return false;
        }
      }
      return check_group(id, id);
    }

    for (BoxId c : box.children) {
      if (!assign(c, BoxState::Discarded, Rule::DiscardCascade, id)) return false;
    }
    if (box.parent) {
      if (box.mandatory && !assign(*box.parent, BoxState::Discarded, Rule::MandatoryUp, id)) {
        return false;
      }
      return check_group(*box.parent, id);
    }
    return true;
  }

  // R6, R7 and R9 for an OR/XOR box after one of its inputs changed.
  bool check_group(BoxId head, BoxId trigger) {
    const Box& box = model_.box(head);
    if (!needs_one_child(box.group)) return true;
    std::size_t open = 0;
    BoxId last_open{};
    for (BoxId c : box.children) {
      const BoxState s = st(c);
      if (s == BoxState::Selected) return true;
      if (s == BoxState::Open) {
        ++open;
        last_open = c;
      }
    }
    const BoxState hs = st(head);
    if (hs == BoxState::Selected) {
      if (open == 0) {
        conflict_ = make_conflict(head, BoxState::Discarded, Rule::OrViolation,
                                  trigger == head ? std::optional<BoxId>{box.children.back()}
                                                  : std::optional<BoxId>{trigger});
        return false;
      }
      if (open == 1) return assign(last_open, BoxState::Selected, Rule::OrUnit, head);
    } else if (hs == BoxState::Open && open == 0) {
      return assign(head, BoxState::Discarded, Rule::OrEmpty, trigger);
    }
    return true;
  }

  std::vector<ChainStep> chain(BoxId start) const {
    std::vector<ChainStep> out;
    std::optional<BoxId> cur = start;
    std::vector<bool> seen(model_.size(), false);
    while (cur && !seen[cur->value]) {
      seen[cur->value] = true;
      const std::int32_t idx = state_.causes_[cur->value];
      if (idx < 0) break;
      const Decision& d = state_.journal_[static_cast<std::size_t>(idx)];
      out.push_back(ChainStep{d.box, target_state(d.action), d.rule, d.from});
      cur = d.from;
    }
    return out;
  }

  Conflict make_conflict(BoxId box, BoxState attempted, Rule rule,
                         std::optional<BoxId> from) const {
    std::vector<ChainStep> existing = chain(box);
    std::vector<ChainStep> other{ChainStep{box, attempted, rule, from}};
    if (from) {
      auto rest = chain(*from);
      other.insert(other.end(), rest.begin(), rest.end());
    }
    Conflict c{box, {}, {}};
    if (attempted == BoxState::Selected) {
      c.selected_chain = std::move(other);
      c.discarded_chain = std::move(existing);
    } else {
      c.selected_chain = std::move(existing);
      c.discarded_chain = std::move(other);
    }
    return c;
  }

  ConfigState state_;
  const FeatureModel& model_;
  std::size_t start_;
  std::deque<BoxId> queue_;
  std::optional<Conflict> conflict_;
};

namespace {

struct Outcome {
  std::optional<ConfigState> state;
  PropagationReport report;
};

Outcome transact(const ConfigState& base, BoxId box, Action action, Rule origin) {
  Transaction tx(base);
  const bool ok = tx.assign(box, target_state(action), origin, std::nullopt) && tx.run();
  Outcome out;
  if (!ok) {
    out.report.accepted = false;
    out.report.conflict = std::move(tx.conflict());
    return out;
  }
  out.report.accepted = true;
  out.report.forced = tx.forced();
  if (origin == Rule::User) tx.remember(base);
  out.state = std::move(tx.state());
  return out;
}

}  // namespace

ConfigState initial_state(std::shared_ptr<const FeatureModel> model) {
  if (!model) throw std::invalid_argument("initial_state needs a model");
  ConfigState s;
  s.model_ = std::move(model);
  s.states_.assign(s.model_->size(), BoxState::Open);
  s.causes_.assign(s.model_->size(), -1);
  Transaction tx(std::move(s));
  if (!tx.assign(tx.state().model().root(), BoxState::Selected, Rule::Root, std::nullopt) ||
      !tx.run()) {
    const Conflict& c = *tx.conflict();
    throw Error(ErrorCode::VoidModel,
                "model has no valid configuration: box '" + tx.state().model().box(c.box).label +
                    "' is forced both selected and discarded");
  }
  return std::move(tx.state());
}

DecideResult decide(const ConfigState& state, BoxId box, Action action, Rule origin) {
  if (origin != Rule::User && origin != Rule::Lookahead) {
    throw std::invalid_argument("decide origin must be User or Lookahead");
  }
  const BoxState current = state.state(box);
  if (current != BoxState::Open) {
    throw Error(ErrorCode::InvalidDecision,
                "box '" + state.model().box(box).label + "' (" + box.str() + ") is already " +
                    std::string(state_name(current)),
                {state.model().box(box).label});
  }
  Outcome out = transact(state, box, action, origin);
  if (!out.state) return DecideResult{state, std::move(out.report)};
  return DecideResult{std::move(*out.state), std::move(out.report)};
}

DecideResult decide(const ConfigState& state, std::string_view label, Action action) {
  auto ids = state.model().boxes_with_label(label);
  if (ids.empty()) {
    throw Error(ErrorCode::UnknownLabel, "unknown label '" + std::string(label) + "'",
                {std::string(label)});
  }
  return decide(state, ids.front(), action);
}

ConfigState undo(const ConfigState& state) {
  if (state.undo_stack_.empty()) {
    throw Error(ErrorCode::NothingToUndo, "no user decision to undo");
  }
  ConfigState out = state;
  ConfigState::Snapshot snap = std::move(out.undo_stack_.back());
  out.undo_stack_.pop_back();
  out.states_ = std::move(snap.states);
  out.causes_ = std::move(snap.causes);
  out.journal_.resize(snap.journal_size);
  return out;
}

Status status(const ConfigState& state) {
  Status s;
  for (BoxState b : state.states()) {
    if (b == BoxState::Open) ++s.open_count;
  }
  return s;
}

namespace {

struct Probe {
  bool select_ok;
  bool discard_ok;
};

Probe probe(const ConfigState& state, BoxId box) {
  return Probe{transact(state, box, Action::Select, Rule::Lookahead).report.accepted,
               transact(state, box, Action::Discard, Rule::Lookahead).report.accepted};
}

}  // namespace

LookaheadResult lookahead(const ConfigState& state, LookaheadMode mode) {
  LookaheadResult result;
  ConfigState current = state;
  std::vector<BoxId> initially_open;
  for (const Box& b : state.model().boxes()) {
    if (state.state(b.id) == BoxState::Open) initially_open.push_back(b.id);
  }

  bool changed = true;
  while (changed) {
    changed = false;
    result.dead_end = false;
    result.dead_boxes.clear();
    for (BoxId id : initially_open) {
      if (current.state(id) != BoxState::Open) {
        result.moves.try_emplace(id, Move::ForcedApplied);
        continue;
      }
      const Probe p = probe(current, id);
      Move m = Move::Free;
      if (!p.select_ok && !p.discard_ok) {
        result.dead_end = true;
        result.dead_boxes.push_back(id);
      } else if (!p.select_ok) {
        m = Move::SelectForbidden;
      } else if (!p.discard_ok) {
        m = Move::DiscardForbidden;
      }
      result.moves[id] = m;

      if (mode == LookaheadMode::Auto && !result.dead_end &&
          (m == Move::SelectForbidden || m == Move::DiscardForbidden)) {
        const Action forced = m == Move::SelectForbidden ? Action::Discard : Action::Select;
        Outcome out = transact(current, id, forced, Rule::Lookahead);
        if (out.state) {
          current = std::move(*out.state);
          result.moves[id] = Move::ForcedApplied;
          changed = true;
        }
      }
    }
    if (result.dead_end) break;
  }
  if (mode == LookaheadMode::Auto) {
    // Boxes that became decided as a side effect of an applied move.
    for (auto& [id, m] : result.moves) {
      if (current.state(id) != BoxState::Open) m = Move::ForcedApplied;
    }
    result.applied = std::move(current);
  }
  return result;
}

ColorView render_colors(const ConfigState& state) {
  return render_colors(state.model(), state.states());
}

}  // namespace colorfm
