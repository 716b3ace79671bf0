#include "colorfm/gadget_compiler.hpp"

#include <algorithm>
#include <charconv>

#include "colorfm/error.hpp"

namespace colorfm {

ConstraintDecl ConstraintDecl::requires_(std::string a, std::string b) {
  ConstraintDecl d;
  d.kind = Kind::Requires;
  d.a = std::move(a);
  d.b = std::move(b);
  return d;
}

ConstraintDecl ConstraintDecl::excludes(std::string a, std::string b) {
  ConstraintDecl d;
  d.kind = Kind::Excludes;
  d.a = std::move(a);
  d.b = std::move(b);
  return d;
}

ConstraintDecl ConstraintDecl::constraint(std::string name, colorfm::Formula f) {
  ConstraintDecl d;
  d.kind = Kind::Formula;
  d.name = std::move(name);
  d.formula = std::move(f);
  return d;
}

std::string ConstraintDecl::to_source() const {
  switch (kind) {
    case Kind::Requires:
      return "requires " + quote_label_if_needed(a) + " " + quote_label_if_needed(b);
    case Kind::Excludes:
      return "excludes " + quote_label_if_needed(a) + " " + quote_label_if_needed(b);
    case Kind::Formula: return "constraint " + quote_string(name) + " " + formula->to_string();
  }
  return {};
}

FreshLabelPolicy FreshLabelPolicy::after(const FeatureModel& model, std::string prefix) {
  FreshLabelPolicy policy{std::move(prefix), 0};
  for (const std::string& label : model.labels()) {
    if (label.size() <= policy.prefix.size() || label.rfind(policy.prefix, 0) != 0) continue;
    std::uint64_t n = 0;
    const char* first = label.data() + policy.prefix.size();
    const char* last = label.data() + label.size();
    auto [ptr, ec] = std::from_chars(first, last, n);
    if (ec == std::errc{} && ptr == last) policy.counter = std::max(policy.counter, n + 1);
  }
  return policy;
}

std::string FreshLabelPolicy::next(const FeatureModel& model) {
  std::string label = prefix + std::to_string(counter++);
  if (model.has_label(label)) {
    throw Error(ErrorCode::FreshLabelCollision,
                "generated label '" + label + "' already exists in the model", {label});
  }
  return label;
}

namespace {

void require_feature_label(const FeatureModel& model, const std::string& label) {
  if (!model.is_feature_label(label)) {
    throw Error(ErrorCode::UnknownLabel, "unknown feature label '" + label + "'", {label});
  }
}

void require_pair(const FeatureModel& model, const std::string& a, const std::string& b) {
  require_feature_label(model, a);
  require_feature_label(model, b);
  if (a == b) {
    throw Error(ErrorCode::SameLabel, "constraint relates '" + a + "' to itself", {a});
  }
}

// Removes IMPLIES/IFF, folds constants, flattens nested AND/OR and cancels
// double negation. The result is TRUE, FALSE, or constant-free.
Formula lower(const Formula& f) {
  switch (f.kind()) {
    case FormulaKind::Atom:
    case FormulaKind::True:
    case FormulaKind::False: return f;
    case FormulaKind::Not: {
      Formula g = lower(f.operands()[0]);
      if (g.kind() == FormulaKind::True) return Formula::falsity();
      if (g.kind() == FormulaKind::False) return Formula::truth();
      if (g.kind() == FormulaKind::Not) return g.operands()[0];
      return Formula::negate(g);
    }
    case FormulaKind::And:
    case FormulaKind::Or: {
      const bool is_and = f.kind() == FormulaKind::And;
      const FormulaKind absorbing = is_and ? FormulaKind::False : FormulaKind::True;
      const FormulaKind neutral = is_and ? FormulaKind::True : FormulaKind::False;
      std::vector<Formula> ops;
      for (const Formula& op : f.operands()) {
        Formula g = lower(op);
        if (g.kind() == absorbing) return g;
        if (g.kind() == neutral) continue;
        if (g.kind() == f.kind()) {
          ops.insert(ops.end(), g.operands().begin(), g.operands().end());
        } else {
          ops.push_back(g);
        }
      }
      return is_and ? make_and(std::move(ops)) : make_or(std::move(ops));
    }
    case FormulaKind::Implies:
      return lower(Formula::disj({Formula::negate(f.operands()[0]), f.operands()[1]}));
    case FormulaKind::Iff: {
      const Formula& a = f.operands()[0];
      const Formula& b = f.operands()[1];
      return lower(Formula::disj({Formula::conj({a, b}),
                                  Formula::conj({Formula::negate(a), Formula::negate(b)})}));
    }
  }
  return f;
}

Formula negated(const Formula& f) {
  return f.kind() == FormulaKind::Not ? f.operands()[0] : Formula::negate(f);
}

class GadgetEncoder {
 public:
  GadgetEncoder(const FeatureModel& base, FreshLabelPolicy& policy)
      : base_(base), builder_(base), policy_(policy) {}

  // Label whose value equals `f` in every valid configuration.
  std::string encode(const Formula& f) {
    if (f.kind() == FormulaKind::Atom) return f.label();
    const std::string key = f.to_string();
    if (auto it = labels_.find(key); it != labels_.end()) return it->second;

    std::string label;
    switch (f.kind()) {
      case FormulaKind::Not: label = encode_not(encode(f.operands()[0])); break;
      case FormulaKind::Or: {
        std::vector<std::string> ops;
        for (const Formula& op : f.operands()) ops.push_back(encode(op));
        label = encode_or(ops);
        break;
      }
      case FormulaKind::And: {
        std::vector<Formula> negs;
        for (const Formula& op : f.operands()) negs.push_back(negated(op));
        label = encode(Formula::negate(make_or(std::move(negs))));
        break;
      }
      default: throw std::logic_error("gadget encoder expects a lowered formula");
    }
    labels_.emplace(key, label);
    return label;
  }

  void force_true(const std::string& label) {
    if (auto it = defining_box_.find(label); it != defining_box_.end()) {
      builder_.at(it->second).mandatory = true;
    } else {
      builder_.add(croot(), label, true);
    }
  }

  void force_void() {
    const BoxId head = builder_.add(croot(), fresh(), true, Group::Xor);
    builder_.add(head, fresh(), true);
    builder_.add(head, fresh(), true);
  }

  FeatureModel build() const { return builder_.build(); }
  std::map<std::string, std::string> labels() const { return labels_; }

 private:
  BoxId croot() { return builder_.ensure_constraints_root(); }

  // Labels minted here are distinct by counter, so only the base can collide.
  std::string fresh() { return policy_.next(base_); }

  std::string encode_not(const std::string& operand) {
    const BoxId head = builder_.add(croot(), fresh(), true, Group::Xor);
    builder_.add(head, operand);
    const std::string neg = fresh();
    defining_box_[neg] = builder_.add(head, neg);
    return neg;
  }

  std::string encode_or(const std::vector<std::string>& operands) {
    const std::string label = fresh();
    const BoxId head = builder_.add(croot(), label, false, Group::Or);
    for (const std::string& op : operands) builder_.add(head, op);
    defining_box_[label] = head;
    return label;
  }

  const FeatureModel& base_;
  ModelBuilder builder_;
  FreshLabelPolicy& policy_;
  std::map<std::string, std::string> labels_;
  std::map<std::string, BoxId> defining_box_;
};

}  // namespace

FeatureModel compile_requires(const FeatureModel& model, const std::string& a,
                              const std::string& b) {
  require_pair(model, a, b);
  ModelBuilder builder(model);
  const BoxId head = builder.add(builder.ensure_constraints_root(), b);
  builder.add(head, a);
  return builder.build();
}

FeatureModel compile_excludes(const FeatureModel& model, const std::string& a,
                              const std::string& b, FreshLabelPolicy& policy) {
  require_pair(model, a, b);
  const std::string label = policy.next(model);
  ModelBuilder builder(model);
  const BoxId head = builder.add(builder.ensure_constraints_root(), label, false, Group::Xor);
  builder.add(head, a);
  builder.add(head, b);
  return builder.build();
}

FeatureModel compile_excludes(const FeatureModel& model, const std::string& a,
                              const std::string& b) {
  FreshLabelPolicy policy = FreshLabelPolicy::after(model);
  return compile_excludes(model, a, b, policy);
}

namespace {

CompiledFormula compile_impl(const FeatureModel& model, const Formula& f, FreshLabelPolicy& policy,
                             Encoding encoding, bool force) {
  for (const std::string& label : atoms(f)) require_feature_label(model, label);

  const Formula source = encoding == Encoding::ViaDnf ? to_dnf(f) : f;
  const Formula lowered = lower(source);
  const bool constant =
      lowered.kind() == FormulaKind::True || lowered.kind() == FormulaKind::False;
  if (lowered.kind() == FormulaKind::True || (constant && !force))
    return CompiledFormula{model, {}, 0, {}};

  GadgetEncoder encoder(model, policy);
  std::string top;
  if (lowered.kind() == FormulaKind::False) {
    encoder.force_void();
  } else {
    top = encoder.encode(lowered);
    if (force) encoder.force_true(top);
  }
  FeatureModel out = encoder.build();
  const std::size_t added = out.size() - model.size();
  return CompiledFormula{std::move(out), encoder.labels(), added, std::move(top)};
}

}  // namespace

CompiledFormula compile_formula(const FeatureModel& model, const Formula& f,
                                FreshLabelPolicy& policy, Encoding encoding) {
  return compile_impl(model, f, policy, encoding, true);
}

CompiledFormula define_formula(const FeatureModel& model, const Formula& f,
                               FreshLabelPolicy& policy, Encoding encoding) {
  return compile_impl(model, f, policy, encoding, false);
}

FeatureModel compile_all(const FeatureModel& model, std::span<const ConstraintDecl> decls,
                         Encoding encoding) {
  FreshLabelPolicy policy = FreshLabelPolicy::after(model);
  FeatureModel current = model;
  for (std::size_t i = 0; i < decls.size(); ++i) {
    const ConstraintDecl& d = decls[i];
    try {
      switch (d.kind) {
        case ConstraintDecl::Kind::Requires: current = compile_requires(current, d.a, d.b); break;
        case ConstraintDecl::Kind::Excludes:
          current = compile_excludes(current, d.a, d.b, policy);
          break;
        case ConstraintDecl::Kind::Formula:
          current = compile_formula(current, *d.formula, policy, encoding).model;
          break;
      }
    } catch (const Error& e) {
      std::vector<std::string> details = e.details();
      details.push_back("declaration=" + std::to_string(i));
      throw Error(e.code(), "constraint #" + std::to_string(i + 1) + " (" + d.to_source() +
                                "): " + e.what(),
                  std::move(details));
    }
  }
  return current;
}

}  // namespace colorfm
