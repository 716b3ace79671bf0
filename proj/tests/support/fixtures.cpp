#include "support.hpp"

namespace colorfm::testing {

std::filesystem::path fixture_path(std::string_view name) {
  return std::filesystem::path(COLORFM_FIXTURE_DIR) / std::string(name);
}

std::string fixture_text(std::string_view name) { return read_text_file(fixture_path(name)); }

LoadedModel load_fixture(std::string_view name, Encoding encoding) {
  LoadOptions opts;
  opts.encoding = encoding;
  return parse_model(fixture_text(name), opts);
}

std::vector<std::string> loadable_fixtures() {
  std::vector<std::string> out;
  for (const auto& entry : std::filesystem::directory_iterator(COLORFM_FIXTURE_DIR)) {
    if (entry.path().extension() != ".fm") continue;
    try {
      parse_model(read_text_file(entry.path()));
      out.push_back(entry.path().filename().string());
    } catch (const Error&) {
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::shared_ptr<const FeatureModel> share(FeatureModel m) {
  return std::make_shared<const FeatureModel>(std::move(m));
}

namespace {

bool same_subtree(const FeatureModel& a, BoxId x, const FeatureModel& b, BoxId y) {
  const Box& p = a.box(x);
  const Box& q = b.box(y);
  if (p.label != q.label || p.mandatory != q.mandatory || p.group != q.group ||
      p.children.size() != q.children.size())
    return false;
  for (std::size_t i = 0; i < p.children.size(); ++i)
    if (!same_subtree(a, p.children[i], b, q.children[i])) return false;
  return true;
}

}  // namespace

bool same_tree(const FeatureModel& a, const FeatureModel& b) {
  return a.name() == b.name() && a.size() == b.size() &&
         same_subtree(a, a.root(), b, b.root());
}

FeatureModel leaves_model(std::size_t n) {
  ModelBuilder b("Leaves", "Root");
  for (std::size_t i = 1; i <= n; ++i) b.add(b.root(), "L" + std::to_string(i));
  return b.build();
}

FeatureModel xor_model(std::size_t k) {
  ModelBuilder b("Xor", "Root");
  const BoxId head = b.add(b.root(), "Head", true, Group::Xor);
  for (std::size_t i = 1; i <= k; ++i) b.add(head, "X" + std::to_string(i));
  return b.build();
}

Assignment final_assignment(const ConfigState& state) {
  Assignment a;
  for (const std::string& label : state.model().labels())
    a[label] = state.label_state(label) == BoxState::Selected;
  return a;
}

std::set<Assignment> truth_table(const Formula& f, const std::vector<std::string>& labels) {
  std::set<Assignment> out;
  const std::size_t n = labels.size();
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
    Assignment a;
    for (std::size_t i = 0; i < n; ++i) a[labels[i]] = (bits >> i) & 1U;
    if (evaluate(f, a, UnknownPolicy::DefaultFalse)) out.insert(std::move(a));
  }
  return out;
}

}  // namespace colorfm::testing
