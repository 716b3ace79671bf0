#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "colorfm/error.hpp"

namespace colorfm {

enum class FormulaKind : std::uint8_t { Atom, True, False, Not, And, Or, Implies, Iff };

/// Immutable Boolean expression over feature labels. Copies share structure.
class Formula {
 public:
  static Formula atom(std::string label);
  static Formula truth();
  static Formula falsity();
  static Formula negate(Formula operand);
  /// Requires at least two operands.
  static Formula conj(std::vector<Formula> operands);
  static Formula disj(std::vector<Formula> operands);
  static Formula implies(Formula lhs, Formula rhs);
  static Formula iff(Formula lhs, Formula rhs);

  FormulaKind kind() const noexcept;
  /// Atom label; empty for other kinds.
  const std::string& label() const noexcept;
  std::span<const Formula> operands() const noexcept;

  /// Canonical text; parse_formula(f.to_string()) == f.
  std::string to_string() const;

  friend bool operator==(const Formula& a, const Formula& b);

 private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Builders that accept any operand count: zero operands yield the neutral
/// constant, one operand is returned as is.
Formula make_and(std::vector<Formula> operands);
Formula make_or(std::vector<Formula> operands);

/// Grammar, lowest precedence first:
///   iff  := imp ("<=>" imp)*          left-assoc
///   imp  := or ("=>" or)*             right-assoc
///   or   := and (("OR"|"|") and)*
///   and  := not (("AND"|"&") not)*
///   not  := ("NOT"|"!") not | atom
///   atom := identifier | "quoted" | "(" iff ")" | TRUE | FALSE
/// `origin` is the position of text[0] inside an enclosing document.
Formula parse_formula(std::string_view text, SourcePos origin = {});

bool is_identifier(std::string_view text);
/// Identifier as is, otherwise double-quoted with backslash escapes.
std::string quote_label_if_needed(std::string_view label);
std::string quote_string(std::string_view text);

using Assignment = std::map<std::string, bool, std::less<>>;

enum class UnknownPolicy { Strict, DefaultFalse };

bool evaluate(const Formula& f, const Assignment& assignment,
              UnknownPolicy policy = UnknownPolicy::Strict);

enum class TriValue : std::uint8_t { False, Unknown, True };

std::string_view trivalue_name(TriValue v);

using PartialAssignment = std::map<std::string, TriValue, std::less<>>;

/// Strong Kleene semantics; labels absent from `partial` are Unknown.
TriValue evaluate3(const Formula& f, const PartialAssignment& partial);

std::set<std::string> atoms(const Formula& f);

/// Negation normal form over AND/OR/NOT-of-atom; IMPLIES and IFF removed.
Formula to_nnf(const Formula& f);

inline constexpr std::size_t kDefaultDnfClauseCap = 4096;

/// OR of ANDs of literals, equivalent to `f`. Contradictory and duplicate
/// clauses are dropped. Throws DnfTooLarge once more than `clause_cap`
/// distinct clauses would be needed.
Formula to_dnf(const Formula& f, std::size_t clause_cap = kDefaultDnfClauseCap);

}  // namespace colorfm
