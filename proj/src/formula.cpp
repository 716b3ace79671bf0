#include "colorfm/formula.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

namespace colorfm {

struct Formula::Node {
  FormulaKind kind;
  std::string label;
  std::vector<Formula> operands;
};

Formula Formula::atom(std::string label) {
  if (label.empty()) throw Error(ErrorCode::EmptyInput, "formula atom needs a non-empty label");
  return Formula(std::make_shared<const Node>(Node{FormulaKind::Atom, std::move(label), {}}));
}

Formula Formula::truth() {
  static const Formula t(std::make_shared<const Node>(Node{FormulaKind::True, {}, {}}));
  return t;
}

Formula Formula::falsity() {
  static const Formula f(std::make_shared<const Node>(Node{FormulaKind::False, {}, {}}));
  return f;
}

Formula Formula::negate(Formula operand) {
  return Formula(std::make_shared<const Node>(Node{FormulaKind::Not, {}, {std::move(operand)}}));
}

Formula Formula::conj(std::vector<Formula> operands) {
  if (operands.size() < 2) throw std::invalid_argument("AND needs at least two operands");
  return Formula(std::make_shared<const Node>(Node{FormulaKind::And, {}, std::move(operands)}));
}

Formula Formula::disj(std::vector<Formula> operands) {
  if (operands.size() < 2) throw std::invalid_argument("OR needs at least two operands");
  return Formula(std::make_shared<const Node>(Node{FormulaKind::Or, {}, std::move(operands)}));
}

Formula Formula::implies(Formula lhs, Formula rhs) {
  return Formula(std::make_shared<const Node>(
      Node{FormulaKind::Implies, {}, {std::move(lhs), std::move(rhs)}}));
}

Formula Formula::iff(Formula lhs, Formula rhs) {
  return Formula(
      std::make_shared<const Node>(Node{FormulaKind::Iff, {}, {std::move(lhs), std::move(rhs)}}));
}

FormulaKind Formula::kind() const noexcept { return node_->kind; }
const std::string& Formula::label() const noexcept { return node_->label; }
std::span<const Formula> Formula::operands() const noexcept { return node_->operands; }

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind() || a.label() != b.label()) return false;
  auto ao = a.operands();
  auto bo = b.operands();
  return std::equal(ao.begin(), ao.end(), bo.begin(), bo.end());
}

Formula make_and(std::vector<Formula> operands) {
  if (operands.empty()) return Formula::truth();
  if (operands.size() == 1) return operands.front();
  return Formula::conj(std::move(operands));
}

Formula make_or(std::vector<Formula> operands) {
  if (operands.empty()) return Formula::falsity();
  if (operands.size() == 1) return operands.front();
  return Formula::disj(std::move(operands));
}

// ---------------------------------------------------------------------------
// Printing

namespace {

bool is_ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c == '-' || c >= 0x80; }
bool is_ident_char(unsigned char c) { return is_ident_start(c) || std::isdigit(c); }

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_reserved_word(std::string_view word) {
  static const std::set<std::string, std::less<>> reserved{
      "and", "or", "not", "true", "false", "always",
      // document keywords, quoted so labels never read as syntax
      "feature", "mandatory", "model", "requires", "excludes", "constraint", "asset", "when"};
  return reserved.count(lower(word)) > 0;
}

int precedence(FormulaKind k) {
  switch (k) {
    case FormulaKind::Iff: return 1;
    case FormulaKind::Implies: return 2;
    case FormulaKind::Or: return 3;
    case FormulaKind::And: return 4;
    case FormulaKind::Not: return 5;
    default: return 6;
  }
}

void print(const Formula& f, std::string& out);

void print_wrapped(const Formula& f, bool wrap, std::string& out) {
  if (wrap) out += '(';
  print(f, out);
  if (wrap) out += ')';
}

void print(const Formula& f, std::string& out) {
  const int p = precedence(f.kind());
  switch (f.kind()) {
    case FormulaKind::Atom: out += quote_label_if_needed(f.label()); return;
    case FormulaKind::True: out += "TRUE"; return;
    case FormulaKind::False: out += "FALSE"; return;
    case FormulaKind::Not:
      out += '!';
      print_wrapped(f.operands()[0], precedence(f.operands()[0].kind()) < p, out);
      return;
    case FormulaKind::And:
    case FormulaKind::Or: {
      const char* sep = f.kind() == FormulaKind::And ? " & " : " | ";
      bool first = true;
      for (const Formula& op : f.operands()) {
        if (!first) out += sep;
        first = false;
        print_wrapped(op, precedence(op.kind()) <= p, out);
      }
      return;
    }
    case FormulaKind::Implies:
      print_wrapped(f.operands()[0], precedence(f.operands()[0].kind()) <= p, out);
      out += " => ";
      print_wrapped(f.operands()[1], precedence(f.operands()[1].kind()) < p, out);
      return;
    case FormulaKind::Iff:
      print_wrapped(f.operands()[0], precedence(f.operands()[0].kind()) < p, out);
      out += " <=> ";
      print_wrapped(f.operands()[1], precedence(f.operands()[1].kind()) <= p, out);
      return;
  }
}

}  // namespace

std::string Formula::to_string() const {
  std::string out;
  print(*this, out);
  return out;
}

bool is_identifier(std::string_view text) {
  if (text.empty() || !is_ident_start(static_cast<unsigned char>(text.front()))) return false;
  return std::all_of(text.begin(), text.end(),
                     [](char c) { return is_ident_char(static_cast<unsigned char>(c)); });
}

std::string quote_string(std::string_view text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

std::string quote_label_if_needed(std::string_view label) {
  if (is_identifier(label) && !is_reserved_word(label)) return std::string(label);
  return quote_string(label);
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

enum class Tok { Ident, Quoted, LParen, RParen, And, Or, Not, Implies, Iff, True, False, End };

struct Token {
  Tok kind;
  std::string text;
  SourcePos pos;
};

class Lexer {
 public:
  Lexer(std::string_view text, SourcePos origin) : text_(text), pos_(origin) {}

  Token next() {
    skip_space();
    SourcePos start = pos_;
    if (i_ >= text_.size()) return {Tok::End, "", start};
    const char c = text_[i_];
    auto single = [&](Tok k) {
      advance();
      return Token{k, std::string(1, c), start};
    };
    switch (c) {
      case '(': return single(Tok::LParen);
      case ')': return single(Tok::RParen);
      case '&': return single(Tok::And);
      case '|': return single(Tok::Or);
      case '!': return single(Tok::Not);
      default: break;
    }
    if (text_.substr(i_, 3) == "<=>") {
      advance(3);
      return {Tok::Iff, "<=>", start};
    }
    if (text_.substr(i_, 2) == "=>") {
      advance(2);
      return {Tok::Implies, "=>", start};
    }
    if (c == '"') return quoted(start);
    if (is_ident_start(static_cast<unsigned char>(c))) {
      std::size_t j = i_;
      while (j < text_.size() && is_ident_char(static_cast<unsigned char>(text_[j]))) ++j;
      std::string word(text_.substr(i_, j - i_));
      advance(j - i_);
      const std::string kw = lower(word);
      if (kw == "and") return {Tok::And, word, start};
      if (kw == "or") return {Tok::Or, word, start};
      if (kw == "not") return {Tok::Not, word, start};
      if (kw == "true") return {Tok::True, word, start};
      if (kw == "false") return {Tok::False, word, start};
      return {Tok::Ident, word, start};
    }
    throw SyntaxError(start, "unexpected character '" + std::string(1, c) + "'");
  }

 private:
  void advance(std::size_t n = 1) {
    for (std::size_t k = 0; k < n && i_ < text_.size(); ++k, ++i_) {
      if (text_[i_] == '\n') {
        ++pos_.line;
        pos_.column = 1;
      } else {
        ++pos_.column;
      }
    }
  }

  void skip_space() {
    while (i_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[i_]))) advance();
  }

  Token quoted(SourcePos start) {
    advance();
    std::string value;
    while (true) {
      if (i_ >= text_.size()) throw SyntaxError(start, "unterminated quoted label");
      char c = text_[i_];
      if (c == '"') {
        advance();
        break;
      }
      if (c == '\\') {
        advance();
        if (i_ >= text_.size()) throw SyntaxError(start, "unterminated quoted label");
        c = text_[i_];
      }
      value += c;
      advance();
    }
    if (value.empty()) throw SyntaxError(start, "empty quoted label");
    return {Tok::Quoted, value, start};
  }

  std::string_view text_;
  std::size_t i_ = 0;
  SourcePos pos_;
};

std::string describe(const Token& t) {
  if (t.kind == Tok::End) return "end of input";
  if (t.kind == Tok::Quoted) return quote_string(t.text);
  return "'" + t.text + "'";
}

class Parser {
 public:
  Parser(std::string_view text, SourcePos origin) : lex_(text, origin) { cur_ = lex_.next(); }

  Formula parse() {
    if (cur_.kind == Tok::End) throw Error(ErrorCode::EmptyInput, "empty formula");
    Formula f = iff();
    if (cur_.kind != Tok::End) throw SyntaxError(cur_.pos, "unexpected " + describe(cur_));
    return f;
  }

 private:
  Token take() {
    Token t = std::move(cur_);
    cur_ = lex_.next();
    return t;
  }

  Formula iff() {
    Formula lhs = imp();
    while (cur_.kind == Tok::Iff) {
      take();
      lhs = Formula::iff(lhs, imp());
    }
    return lhs;
  }

  Formula imp() {
    Formula lhs = disj();
    if (cur_.kind != Tok::Implies) return lhs;
    take();
    return Formula::implies(lhs, imp());
  }

  Formula disj() {
    std::vector<Formula> ops{conj()};
    while (cur_.kind == Tok::Or) {
      take();
      ops.push_back(conj());
    }
    return make_or(std::move(ops));
  }

  Formula conj() {
    std::vector<Formula> ops{negation()};
    while (cur_.kind == Tok::And) {
      take();
      ops.push_back(negation());
    }
    return make_and(std::move(ops));
  }

  Formula negation() {
    if (cur_.kind == Tok::Not) {
      take();
      return Formula::negate(negation());
    }
    return primary();
  }

  Formula primary() {
    switch (cur_.kind) {
      case Tok::Ident:
      case Tok::Quoted: return Formula::atom(take().text);
      case Tok::True: take(); return Formula::truth();
      case Tok::False: take(); return Formula::falsity();
      case Tok::LParen: {
        Token open = take();
        Formula inner = iff();
        if (cur_.kind != Tok::RParen) {
          throw SyntaxError(cur_.pos, "expected ')' to close '(' at column " +
                                          std::to_string(open.pos.column) + ", found " +
                                          describe(cur_));
        }
        take();
        return inner;
      }
      default: throw SyntaxError(cur_.pos, "unexpected " + describe(cur_));
    }
  }

  Lexer lex_;
  Token cur_;
};

}  // namespace

Formula parse_formula(std::string_view text, SourcePos origin) {
  return Parser(text, origin).parse();
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

bool eval(const Formula& f, const Assignment& assignment) {
  switch (f.kind()) {
    case FormulaKind::Atom: {
      auto it = assignment.find(f.label());
      return it != assignment.end() && it->second;
    }
    case FormulaKind::True: return true;
    case FormulaKind::False: return false;
    case FormulaKind::Not: return !eval(f.operands()[0], assignment);
    case FormulaKind::And: {
      for (const Formula& op : f.operands())
        if (!eval(op, assignment)) return false;
      return true;
    }
    case FormulaKind::Or: {
      for (const Formula& op : f.operands())
        if (eval(op, assignment)) return true;
      return false;
    }
    case FormulaKind::Implies: {
      const bool a = eval(f.operands()[0], assignment);
      const bool b = eval(f.operands()[1], assignment);
      return !a || b;
    }
    case FormulaKind::Iff:
      return eval(f.operands()[0], assignment) == eval(f.operands()[1], assignment);
  }
  return false;
}

}  // namespace

bool evaluate(const Formula& f, const Assignment& assignment, UnknownPolicy policy) {
  if (policy == UnknownPolicy::Strict) {
    std::vector<std::string> missing;
    for (const std::string& a : atoms(f))
      if (!assignment.count(a)) missing.push_back(a);
    if (!missing.empty()) {
      std::string msg = "unknown label";
      msg += missing.size() > 1 ? "s " : " ";
      for (std::size_t i = 0; i < missing.size(); ++i) msg += (i ? ", '" : "'") + missing[i] + "'";
      throw Error(ErrorCode::UnknownLabel, msg, std::move(missing));
    }
  }
  return eval(f, assignment);
}

std::string_view trivalue_name(TriValue v) {
  switch (v) {
    case TriValue::False: return "FALSE";
    case TriValue::Unknown: return "UNKNOWN";
    case TriValue::True: return "TRUE";
  }
  return "UNKNOWN";
}

namespace {

TriValue tri_not(TriValue v) {
  if (v == TriValue::True) return TriValue::False;
  if (v == TriValue::False) return TriValue::True;
  return TriValue::Unknown;
}

// With False < Unknown < True, Kleene AND is min and OR is max.
TriValue tri_and(TriValue a, TriValue b) { return std::min(a, b); }
TriValue tri_or(TriValue a, TriValue b) { return std::max(a, b); }

}  // namespace

TriValue evaluate3(const Formula& f, const PartialAssignment& partial) {
  switch (f.kind()) {
    case FormulaKind::Atom: {
      auto it = partial.find(f.label());
      return it == partial.end() ? TriValue::Unknown : it->second;
    }
    case FormulaKind::True: return TriValue::True;
    case FormulaKind::False: return TriValue::False;
    case FormulaKind::Not: return tri_not(evaluate3(f.operands()[0], partial));
    case FormulaKind::And: {
      TriValue v = TriValue::True;
      for (const Formula& op : f.operands()) v = tri_and(v, evaluate3(op, partial));
      return v;
    }
    case FormulaKind::Or: {
      TriValue v = TriValue::False;
      for (const Formula& op : f.operands()) v = tri_or(v, evaluate3(op, partial));
      return v;
    }
    case FormulaKind::Implies:
      return tri_or(tri_not(evaluate3(f.operands()[0], partial)),
                    evaluate3(f.operands()[1], partial));
    case FormulaKind::Iff: {
      const TriValue a = evaluate3(f.operands()[0], partial);
      const TriValue b = evaluate3(f.operands()[1], partial);
      return tri_or(tri_and(a, b), tri_and(tri_not(a), tri_not(b)));
    }
  }
  return TriValue::Unknown;
}

std::set<std::string> atoms(const Formula& f) {
  std::set<std::string> out;
  std::vector<Formula> stack{f};
  while (!stack.empty()) {
    Formula cur = stack.back();
    stack.pop_back();
    if (cur.kind() == FormulaKind::Atom) out.insert(cur.label());
    for (const Formula& op : cur.operands()) stack.push_back(op);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Normal forms

namespace {

Formula nnf(const Formula& f, bool negated) {
  switch (f.kind()) {
    case FormulaKind::Atom: return negated ? Formula::negate(f) : f;
    case FormulaKind::True: return negated ? Formula::falsity() : f;
    case FormulaKind::False: return negated ? Formula::truth() : f;
    case FormulaKind::Not: return nnf(f.operands()[0], !negated);
    case FormulaKind::And:
    case FormulaKind::Or: {
      std::vector<Formula> ops;
      for (const Formula& op : f.operands()) ops.push_back(nnf(op, negated));
      const bool as_and = (f.kind() == FormulaKind::And) != negated;
      return as_and ? Formula::conj(std::move(ops)) : Formula::disj(std::move(ops));
    }
    case FormulaKind::Implies: {
      // a => b  ==  !a | b
      Formula rewritten = Formula::disj({Formula::negate(f.operands()[0]), f.operands()[1]});
      return nnf(rewritten, negated);
    }
    case FormulaKind::Iff: {
      const Formula& a = f.operands()[0];
      const Formula& b = f.operands()[1];
      if (!negated) {
        return Formula::disj({Formula::conj({nnf(a, false), nnf(b, false)}),
                              Formula::conj({nnf(a, true), nnf(b, true)})});
      }
      return Formula::disj({Formula::conj({nnf(a, false), nnf(b, true)}),
                            Formula::conj({nnf(a, true), nnf(b, false)})});
    }
  }
  return f;
}

struct Literal {
  std::string label;
  bool positive;

  auto operator<=>(const Literal&) const = default;
};

using Clause = std::vector<Literal>;

class ClauseSet {
 public:
  explicit ClauseSet(std::size_t cap) : cap_(cap) {}

  void add(Clause clause) {
    std::vector<Literal> key = clause;
    std::sort(key.begin(), key.end());
    if (!keys_.insert(std::move(key)).second) return;
    clauses_.push_back(std::move(clause));
    if (clauses_.size() > cap_) {
      throw Error(ErrorCode::DnfTooLarge,
                  "DNF exceeds the clause limit of " + std::to_string(cap_));
    }
  }

  std::vector<Clause> take() { return std::move(clauses_); }

 private:
  std::size_t cap_;
  std::set<std::vector<Literal>> keys_;
  std::vector<Clause> clauses_;
};

// Returns nullopt when the merged clause is contradictory.
std::optional<Clause> merge(const Clause& a, const Clause& b) {
  Clause out = a;
  for (const Literal& lit : b) {
    bool dup = false;
    for (const Literal& existing : out) {
      if (existing.label != lit.label) continue;
      if (existing.positive != lit.positive) return std::nullopt;
      dup = true;
    }
    if (!dup) out.push_back(lit);
  }
  return out;
}

std::vector<Clause> dnf_clauses(const Formula& f, std::size_t cap) {
  switch (f.kind()) {
    case FormulaKind::Atom: return {{Literal{f.label(), true}}};
    case FormulaKind::Not: return {{Literal{f.operands()[0].label(), false}}};
    case FormulaKind::True: return {{}};
    case FormulaKind::False: return {};
    case FormulaKind::Or: {
      ClauseSet set(cap);
      for (const Formula& op : f.operands()) {
        for (Clause& c : dnf_clauses(op, cap)) set.add(std::move(c));
      }
      return set.take();
    }
    case FormulaKind::And: {
      std::vector<Clause> acc{{}};
      for (const Formula& op : f.operands()) {
        const std::vector<Clause> rhs = dnf_clauses(op, cap);
        ClauseSet set(cap);
        for (const Clause& l : acc) {
          for (const Clause& r : rhs) {
            if (auto merged = merge(l, r)) set.add(std::move(*merged));
          }
        }
        acc = set.take();
        if (acc.empty()) break;
      }
      return acc;
    }
    default: break;
  }
  throw std::logic_error("dnf input must be in negation normal form");
}

Formula literal_formula(const Literal& lit) {
  Formula a = Formula::atom(lit.label);
  return lit.positive ? a : Formula::negate(a);
}

}  // namespace

Formula to_nnf(const Formula& f) { return nnf(f, false); }

Formula to_dnf(const Formula& f, std::size_t clause_cap) {
  const std::vector<Clause> clauses = dnf_clauses(to_nnf(f), clause_cap);
  std::vector<Formula> terms;
  for (const Clause& c : clauses) {
    if (c.empty()) return Formula::truth();
    std::vector<Formula> lits;
    for (const Literal& lit : c) lits.push_back(literal_formula(lit));
    terms.push_back(make_and(std::move(lits)));
  }
  return make_or(std::move(terms));
}

}  // namespace colorfm
