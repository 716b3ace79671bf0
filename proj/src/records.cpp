#include "colorfm/records.hpp"

#include <sstream>

namespace colorfm {

namespace {

std::string box_ref(const FeatureModel& model, BoxId id) {
  return id.str() + " (" + model.box(id).label + ")";
}

Json moves_for(BoxState s, std::optional<Move> m) {
  Json out = Json::array();
  if (s != BoxState::Open) return out;
  const Move move = m.value_or(Move::Free);
  if (move != Move::SelectForbidden) out.push_back("select");
  if (move != Move::DiscardForbidden) out.push_back("discard");
  return out;
}

}  // namespace

Json error_record(const Error& e) {
  return error_record(error_code_name(e.code()), e.what(), e.details());
}

Json error_record(std::string_view code, const std::string& message,
                  const std::vector<std::string>& details) {
  return Json{{"code", std::string(code)}, {"message", message}, {"details", details}};
}

Json decision_record(const FeatureModel& model, const Decision& d) {
  Json j{{"id", d.box.str()},
         {"label", model.box(d.box).label},
         {"state", std::string(state_name(target_state(d.action)))},
         {"rule", std::string(rule_id(d.rule))},
         {"reason", std::string(rule_name(d.rule))}};
  j["from"] = d.from ? Json(d.from->str()) : Json(nullptr);
  return j;
}

Json chain_record(const FeatureModel& model, const std::vector<ChainStep>& chain) {
  Json out = Json::array();
  for (const ChainStep& s : chain) {
    Json j{{"id", s.box.str()},
           {"label", model.box(s.box).label},
           {"state", std::string(state_name(s.state))},
           {"rule", std::string(rule_id(s.rule))},
           {"reason", std::string(rule_name(s.rule))}};
    j["from"] = s.from ? Json(s.from->str()) : Json(nullptr);
    out.push_back(std::move(j));
  }
  return out;
}

Json conflict_record(const FeatureModel& model, const Conflict& c) {
  return Json{{"id", c.box.str()},
              {"label", model.box(c.box).label},
              {"selected_chain", chain_record(model, c.selected_chain)},
              {"discarded_chain", chain_record(model, c.discarded_chain)}};
}

Json report_record(const FeatureModel& model, const PropagationReport& r) {
  Json j{{"accepted", r.accepted}};
  Json forced = Json::array();
  for (const Decision& d : r.forced) forced.push_back(decision_record(model, d));
  j["forced"] = std::move(forced);
  if (r.conflict) j["conflict"] = conflict_record(model, *r.conflict);
  return j;
}

Json filter_record(const Catalog& catalog, const FilterResult& r) {
  Json rows = Json::array();
  for (const auto& [id, status] : r.rows) {
    const Asset* a = catalog.find(id);
    rows.push_back(Json{{"id", id},
                        {"name", a ? a->name : std::string()},
                        {"kind", a ? std::string(asset_kind_name(a->kind)) : std::string()},
                        {"status", std::string(asset_status_name(status))}});
  }
  return Json{{"included", r.included},
              {"excluded", r.excluded},
              {"undecided", r.undecided},
              {"rows", std::move(rows)}};
}

Json cycle_record(const CycleReport& r) {
  Json out = Json::array();
  for (const auto& c : r.components) out.push_back(c);
  return out;
}

Json boxes_record(const ConfigState& state, const LookaheadResult& probe) {
  const FeatureModel& model = state.model();
  const ColorView colors = render_colors(state);
  Json out = Json::array();
  for (const Box& b : model.boxes()) {
    const BoxState s = state.state(b.id);
    std::optional<Move> move;
    if (auto it = probe.moves.find(b.id); it != probe.moves.end()) move = it->second;
    Json j{{"id", b.id.str()},
           {"label", b.label},
           {"mandatory", b.mandatory},
           {"group", std::string(group_name(b.group))},
           {"constraint", model.in_constraints_branch(b.id)},
           {"structural_color", std::string(color_name(colors.structural[b.id.value]))},
           {"state_color", std::string(color_name((*colors.state)[b.id.value]))},
           {"state", std::string(state_name(s))},
           {"moves", moves_for(s, move)}};
    j["parent"] = b.parent ? Json(b.parent->str()) : Json(nullptr);
    if (const Decision* d = state.cause(b.id)) {
      j["reason"] = Json{{"rule", std::string(rule_id(d->rule))},
                         {"text", std::string(rule_name(d->rule))}};
      j["reason"]["from"] = d->from ? Json(d->from->str()) : Json(nullptr);
    } else {
      j["reason"] = nullptr;
    }
    out.push_back(std::move(j));
  }
  return out;
}

std::string describe(const FeatureModel& model, const Decision& d) {
  std::ostringstream os;
  os << model.box(d.box).label << ' ' << state_name(target_state(d.action)) << " by "
     << rule_id(d.rule) << ' ' << rule_name(d.rule);
  if (d.from) os << " from " << box_ref(model, *d.from);
  return os.str();
}

std::string describe(const FeatureModel& model, const Conflict& c) {
  std::ostringstream os;
  os << box_ref(model, c.box) << " would be both SELECTED and DISCARDED\n";
  auto chain = [&](std::string_view title, const std::vector<ChainStep>& steps) {
    os << "  " << title << ":\n";
    for (const ChainStep& s : steps) {
      os << "    " << box_ref(model, s.box) << ' ' << state_name(s.state) << " by "
         << rule_id(s.rule) << ' ' << rule_name(s.rule);
      if (s.from) os << " from " << box_ref(model, *s.from);
      os << '\n';
    }
  };
  chain("selected because", c.selected_chain);
  chain("discarded because", c.discarded_chain);
  return os.str();
}

}  // namespace colorfm
