#pragma once

// Parsers and serializers for the three input languages:
//
//   .tss  transition system specifications
//   .aut  labelled transition systems (Aldebaran format)
//   .hml  modal formulas
//
// All three are UTF-8 with '#' line comments.
//
// The .tss grammar:
//
//   actions a b ...                  observable actions (tau is implicit)
//   xactions iota @o ...             extra actions of transformed systems
//   order a < b, a < tau, ...        strict partial order (closed transitively)
//   op name arity [infix] [lambda(i)] [aleph(i)] ...
//   rule [forall m in Act :] premises |- literal
//
//   premises    empty, or comma-separated literals / premise families
//   literal     term -label-> term   |   term -label-/>
//   family      { term -m-/> forall m > label }
//               { term -m-/> forall m in Act }
//
// Schema metavariables range over the declared action set plus tau; families
// expand over the declared order or over Act. Identifiers match
// [a-zA-Z_][a-zA-Z0-9_']*; declared infix operators are written between their
// arguments and use punctuation names such as ; | +. Oracle labels carry the
// reserved '@' prefix; 'tau' and 'iota' are reserved label names.

#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sosforge/formula.hpp"
#include "sosforge/lts.hpp"
#include "sosforge/term.hpp"
#include "sosforge/tss.hpp"

namespace sosforge {

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(const std::string& msg, int line_, int col_)
      : std::runtime_error("parse error at " + std::to_string(line_) + ":" +
                           std::to_string(col_) + ": " + msg),
        line(line_),
        col(col_) {}
};

namespace detail {

inline bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}
inline bool opname_char(char c) {
  return c == ';' || c == '|' || c == '+' || c == '*' || c == '.' || c == '&';
}

class Cursor {
 public:
  explicit Cursor(const std::string& text) : text_(&text) {}

  void skip_ws() {
    while (pos_ < text_->size()) {
      char c = (*text_)[pos_];
      if (c == '#') {
        while (pos_ < text_->size() && (*text_)[pos_] != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else {
        break;
      }
    }
  }

  bool eof() {
    skip_ws();
    return pos_ >= text_->size();
  }
  char peek() {
    skip_ws();
    return pos_ < text_->size() ? (*text_)[pos_] : '\0';
  }
  char peek_raw(size_t ahead = 0) const {
    return pos_ + ahead < text_->size() ? (*text_)[pos_ + ahead] : '\0';
  }
  void advance() {
    if (pos_ < text_->size()) {
      if ((*text_)[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, col_); }

  bool try_punct(const std::string& p) {
    skip_ws();
    if (text_->compare(pos_, p.size(), p) == 0) {
      for (size_t i = 0; i < p.size(); ++i) advance();
      return true;
    }
    return false;
  }
  void expect_punct(const std::string& p) {
    if (!try_punct(p)) fail("expected '" + p + "'");
  }

  std::optional<std::string> try_ident() {
    skip_ws();
    if (pos_ >= text_->size() || !ident_start((*text_)[pos_])) return std::nullopt;
    std::string s;
    while (pos_ < text_->size() && ident_char((*text_)[pos_])) {
      s += (*text_)[pos_];
      advance();
    }
    return s;
  }
  std::string expect_ident(const std::string& what) {
    auto s = try_ident();
    if (!s) fail("expected " + what);
    return *s;
  }

  // Operator-symbol name: a run of punctuation characters. '|' immediately
  // followed by '-' belongs to the turnstile, not to an operator name.
  std::optional<std::string> try_opname() {
    skip_ws();
    if (pos_ >= text_->size() || !opname_char((*text_)[pos_])) return std::nullopt;
    if ((*text_)[pos_] == '|' && peek_raw(1) == '-') return std::nullopt;
    std::string s;
    while (pos_ < text_->size() && opname_char((*text_)[pos_])) {
      if ((*text_)[pos_] == '|' && peek_raw(1) == '-') break;
      s += (*text_)[pos_];
      advance();
    }
    return s;
  }

  // A label: an identifier, or an oracle name starting with '@'.
  std::optional<std::string> try_label() {
    skip_ws();
    if (pos_ < text_->size() && (*text_)[pos_] == '@') {
      std::string s = "@";
      advance();
      while (pos_ < text_->size() && ident_char((*text_)[pos_])) {
        s += (*text_)[pos_];
        advance();
      }
      if (s.size() == 1) fail("empty oracle label");
      return s;
    }
    return try_ident();
  }

  std::optional<int> try_nat() {
    skip_ws();
    if (pos_ >= text_->size() || !std::isdigit(static_cast<unsigned char>((*text_)[pos_]))) {
      return std::nullopt;
    }
    int v = 0;
    while (pos_ < text_->size() && std::isdigit(static_cast<unsigned char>((*text_)[pos_]))) {
      v = v * 10 + ((*text_)[pos_] - '0');
      advance();
    }
    return v;
  }

  int line() const { return line_; }
  int col() const { return col_; }

 private:
  const std::string* text_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// The .tss language.

// A strict partial order on A_tau, kept transitively closed.
class ActionOrder {
 public:
  void add(const std::string& lo, const std::string& hi) { pairs_.emplace(lo, hi); }
  bool less(const std::string& lo, const std::string& hi) const {
    return pairs_.count({lo, hi}) != 0;
  }
  const std::set<std::pair<std::string, std::string>>& pairs() const { return pairs_; }
  bool empty() const { return pairs_.empty(); }

  // Transitive closure; returns false if the closure is reflexive.
  bool close() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& [a, b] : std::set<std::pair<std::string, std::string>>(pairs_))
        for (const auto& [c, d] : std::set<std::pair<std::string, std::string>>(pairs_))
          if (b == c && pairs_.emplace(a, d).second) changed = true;
    }
    for (const auto& [a, b] : pairs_)
      if (a == b) return false;
    return true;
  }
  std::vector<std::string> greater_than(const std::string& a) const {
    std::vector<std::string> out;
    for (const auto& [lo, hi] : pairs_)
      if (lo == a) out.push_back(hi);
    return out;
  }

 private:
  std::set<std::pair<std::string, std::string>> pairs_;
};

struct TssDocument {
  Tss tss;            // schemas expanded, rules canonically sorted
  ActionOrder order;  // declared priority order, transitively closed
  int schema_count = 0;
};

namespace detail {

inline Term parse_term_at(Cursor& cur, const Signature& sig);

inline Term parse_primary_at(Cursor& cur, const Signature& sig) {
  if (cur.try_punct("(")) {
    Term t = parse_term_at(cur, sig);
    cur.expect_punct(")");
    return t;
  }
  std::string id = cur.expect_ident("term");
  if (sig.contains(id)) {
    const auto& sym = sig.at(id);
    std::vector<Term> args;
    if (cur.peek() == '(') {
      cur.expect_punct("(");
      if (!cur.try_punct(")")) {
        do args.push_back(parse_term_at(cur, sig));
        while (cur.try_punct(","));
        cur.expect_punct(")");
      }
    }
    if (static_cast<int>(args.size()) != sym.arity)
      cur.fail("arity mismatch: " + id + " expects " + std::to_string(sym.arity) +
               " arguments, got " + std::to_string(args.size()));
    return Term::app(id, std::move(args));
  }
  return Term::var(id);
}

inline Term parse_term_at(Cursor& cur, const Signature& sig) {
  Term lhs = parse_primary_at(cur, sig);
  Cursor probe = cur;
  if (auto op = probe.try_opname()) {
    if (!sig.contains(*op) || !sig.at(*op).infix)
      cur.fail("undeclared infix operator '" + *op + "'");
    cur = probe;
    Term rhs = parse_primary_at(cur, sig);
    return Term::app(*op, {lhs, rhs});
  }
  return lhs;
}

struct PremiseFamily {
  Term source;
  std::string metavar;
  bool over_order = false;  // true: { t -m-/> forall m > bound }, else over Act
  std::string bound;        // label or rule metavariable when over_order
};

struct RuleSchema {
  std::optional<std::string> metavar;  // rule-level action metavariable
  std::vector<Literal> literals;       // labels may mention the metavariable
  std::vector<PremiseFamily> families;
  Literal conclusion;
};

class TssParser {
 public:
  explicit TssParser(const std::string& text) : cur_(text) {}

  static bool is_keyword(const std::string& s) {
    return s == "actions" || s == "xactions" || s == "order" || s == "op" || s == "rule";
  }

  TssDocument parse() {
    while (!cur_.eof()) {
      std::string kw = cur_.expect_ident("declaration keyword");
      if (kw == "actions") parse_actions();
      else if (kw == "xactions") parse_xactions();
      else if (kw == "order") parse_order();
      else if (kw == "op") parse_op();
      else if (kw == "rule") parse_rule();
      else cur_.fail("unknown declaration '" + kw + "'");
    }
    if (!doc_.order.close()) cur_.fail("action order is not irreflexive after closure");
    expand();
    finish();
    return doc_;
  }

 private:
  // The next label of an action list, stopping before statement keywords.
  std::optional<std::string> try_list_label() {
    Cursor probe = cur_;
    auto a = probe.try_label();
    if (!a || is_keyword(*a)) return std::nullopt;
    cur_ = probe;
    return a;
  }

  void parse_actions() {
    bool any = false;
    while (auto a = try_list_label()) {
      if (*a == kTau || *a == kIota) cur_.fail("'" + *a + "' is a reserved label name");
      if (is_oracle_label(*a)) cur_.fail("oracle labels belong in xactions");
      doc_.tss.actions.insert(*a);
      any = true;
    }
    if (!any) cur_.fail("expected action names");
  }
  void parse_xactions() {
    bool any = false;
    while (auto a = try_list_label()) {
      if (*a == kTau) cur_.fail("tau is implicit");
      doc_.tss.extra_actions.insert(*a);
      any = true;
    }
    if (!any) cur_.fail("expected extra action names");
  }

  void parse_order() {
    do {
      auto lo = cur_.try_label();
      if (!lo) cur_.fail("expected action in order declaration");
      cur_.expect_punct("<");
      auto hi = cur_.try_label();
      if (!hi) cur_.fail("expected action in order declaration");
      check_action(*lo);
      check_action(*hi);
      doc_.order.add(*lo, *hi);
    } while (cur_.try_punct(","));
  }

  void check_action(const std::string& a) {
    if (a == kTau) return;
    if (!doc_.tss.actions.count(a) && !doc_.tss.extra_actions.count(a))
      cur_.fail("undeclared action '" + a + "'");
  }

  void parse_op() {
    std::string name;
    if (auto id = cur_.try_ident()) name = *id;
    else if (auto op = cur_.try_opname()) name = *op;
    else cur_.fail("expected operator name");
    auto arity = cur_.try_nat();
    if (!arity) cur_.fail("expected arity for op " + name);
    FunctionSymbol sym{name, *arity, false};
    for (;;) {
      auto save_markings = [&](ArgPredicate& pred) {
        cur_.expect_punct("(");
        auto i = cur_.try_nat();
        if (!i || *i < 1 || *i > *arity) cur_.fail("argument index out of range for " + name);
        pred.add(name, *i);
        cur_.expect_punct(")");
      };
      // lookahead on keywords
      Cursor probe = cur_;
      auto kw = probe.try_ident();
      if (kw == std::optional<std::string>("infix")) {
        cur_ = probe;
        if (*arity != 2) cur_.fail("infix requires arity 2");
        sym.infix = true;
      } else if (kw == std::optional<std::string>("lambda")) {
        cur_ = probe;
        save_markings(doc_.tss.lambda);
      } else if (kw == std::optional<std::string>("aleph")) {
        cur_ = probe;
        save_markings(doc_.tss.aleph);
      } else {
        break;
      }
    }
    doc_.tss.signature.add(sym);
  }

  Term parse_term() { return parse_term_at(cur_, doc_.tss.signature); }

  // Parses "-label->" returning (label, positive) or "-label-/>".
  std::pair<std::string, bool> parse_arrow() {
    cur_.expect_punct("-");
    auto label = cur_.try_label();
    if (!label) cur_.fail("expected transition label");
    if (cur_.try_punct("->")) return {*label, true};
    if (cur_.try_punct("-/>")) return {*label, false};
    cur_.fail("expected '->' or '-/>'");
  }

  void parse_rule() {
    RuleSchema schema;
    Cursor probe = cur_;
    if (probe.try_ident() == std::optional<std::string>("forall")) {
      cur_ = probe;
      schema.metavar = cur_.expect_ident("metavariable");
      if (cur_.expect_ident("'in'") != "in") cur_.fail("expected 'in'");
      if (cur_.expect_ident("'Act'") != "Act") cur_.fail("expected 'Act'");
      cur_.expect_punct(":");
    }
    if (!cur_.try_punct("|-")) {
      do {
        if (cur_.try_punct("{")) {
          PremiseFamily fam;
          fam.source = parse_term();
          auto [label, positive] = parse_arrow();
          if (positive) cur_.fail("premise families must be negative");
          fam.metavar = label;
          if (cur_.expect_ident("'forall'") != "forall") cur_.fail("expected 'forall'");
          std::string mv = cur_.expect_ident("family metavariable");
          if (mv != fam.metavar) cur_.fail("family metavariable mismatch");
          if (cur_.try_punct(">")) {
            fam.over_order = true;
            auto bound = cur_.try_label();
            if (!bound) cur_.fail("expected order bound");
            fam.bound = *bound;
          } else {
            if (cur_.expect_ident("'in'") != "in") cur_.fail("expected 'in' or '>'");
            if (cur_.expect_ident("'Act'") != "Act") cur_.fail("expected 'Act'");
          }
          cur_.expect_punct("}");
          schema.families.push_back(std::move(fam));
        } else {
          Term src = parse_term();
          auto [label, positive] = parse_arrow();
          if (positive) {
            Term dst = parse_term();
            schema.literals.push_back(Literal::pos(src, label, dst));
          } else {
            schema.literals.push_back(Literal::neg(src, label));
          }
        }
      } while (cur_.try_punct(","));
      cur_.expect_punct("|-");
    }
    Term src = parse_term();
    auto [label, positive] = parse_arrow();
    if (positive) {
      Term dst = parse_term();
      schema.conclusion = Literal::pos(src, label, dst);
    } else {
      schema.conclusion = Literal::neg(src, label);
    }
    schemas_.push_back(std::move(schema));
  }

  bool is_concrete_label(const std::string& l) const {
    return l == kTau || doc_.tss.actions.count(l) || doc_.tss.extra_actions.count(l);
  }

  void expand() {
    std::set<std::string> acts = doc_.tss.tau_actions();
    for (const auto& schema : schemas_) {
      ++doc_.schema_count;
      std::vector<std::map<std::string, std::string>> bindings;
      if (schema.metavar) {
        if (is_concrete_label(*schema.metavar))
          cur_.fail("metavariable '" + *schema.metavar + "' collides with an action");
        for (const auto& a : acts) bindings.push_back({{*schema.metavar, a}});
      } else {
        bindings.push_back({});
      }
      for (const auto& bind : bindings) {
        auto resolve = [&](const std::string& l) -> std::string {
          auto it = bind.find(l);
          if (it != bind.end()) return it->second;
          if (!is_concrete_label(l)) cur_.fail("undeclared label '" + l + "'");
          return l;
        };
        std::vector<Literal> premises;
        for (const auto& lit : schema.literals) {
          Literal out = lit;
          out.label = resolve(lit.label);
          premises.push_back(out);
        }
        for (const auto& fam : schema.families) {
          std::vector<std::string> range;
          if (fam.over_order) {
            std::string bound = fam.bound;
            auto it = bind.find(bound);
            if (it != bind.end()) bound = it->second;
            else if (!is_concrete_label(bound)) cur_.fail("undeclared label '" + bound + "'");
            for (const auto& b : doc_.order.greater_than(bound)) range.push_back(b);
          } else {
            range.assign(acts.begin(), acts.end());
          }
          for (const auto& b : range) premises.push_back(Literal::neg(fam.source, b));
        }
        Literal concl = schema.conclusion;
        concl.label = resolve(concl.label);
        doc_.tss.rules.emplace_back(std::move(premises), std::move(concl));
      }
    }
  }

  void finish() {
    for (const auto& r : doc_.tss.rules) {
      check_arities(r.conclusion.source, doc_.tss.signature);
      if (r.conclusion.positive) check_arities(r.conclusion.target, doc_.tss.signature);
      for (const auto& p : r.premises) {
        check_arities(p.source, doc_.tss.signature);
        if (p.positive) check_arities(p.target, doc_.tss.signature);
      }
    }
    doc_.tss.sort_rules();
  }

  Cursor cur_;
  TssDocument doc_;
  std::vector<RuleSchema> schemas_;
};

}  // namespace detail

inline TssDocument parse_tss(const std::string& text) { return detail::TssParser(text).parse(); }

inline std::string emit_tss(const Tss& tss, const ActionOrder* order = nullptr) {
  std::ostringstream out;
  if (!tss.actions.empty()) {
    out << "actions";
    for (const auto& a : tss.actions) out << ' ' << a;
    out << '\n';
  }
  if (!tss.extra_actions.empty()) {
    out << "xactions";
    for (const auto& a : tss.extra_actions) out << ' ' << a;
    out << '\n';
  }
  if (order && !order->empty()) {
    out << "order ";
    bool first = true;
    for (const auto& [lo, hi] : order->pairs()) {
      if (!first) out << ", ";
      first = false;
      out << lo << " < " << hi;
    }
    out << '\n';
  }
  for (const auto& [name, sym] : tss.signature.symbols()) {
    out << "op " << name << ' ' << sym.arity;
    if (sym.infix) out << " infix";
    for (const auto& [f, i] : tss.lambda.positions())
      if (f == name) out << " lambda(" << i << ")";
    for (const auto& [f, i] : tss.aleph.positions())
      if (f == name) out << " aleph(" << i << ")";
    out << '\n';
  }
  Tss sorted = tss;
  sorted.sort_rules();
  for (const auto& r : sorted.rules) out << "rule " << r.str(&tss.signature) << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// The Aldebaran (.aut) format.

inline Lts parse_lts(const std::string& text) {
  detail::Cursor cur(text);
  auto des = cur.try_ident();
  if (des != std::optional<std::string>("des")) cur.fail("expected 'des' header");
  cur.expect_punct("(");
  auto init = cur.try_nat();
  cur.expect_punct(",");
  auto ntrans = cur.try_nat();
  cur.expect_punct(",");
  auto nstates = cur.try_nat();
  if (!init || !ntrans || !nstates) cur.fail("malformed des header");
  cur.expect_punct(")");
  if (*init >= *nstates && !(*nstates == 0 && *init == 0)) cur.fail("initial state out of range");
  Lts lts(*nstates);
  lts.initial_states.push_back(*init);
  for (int i = 0; i < *ntrans; ++i) {
    cur.expect_punct("(");
    auto src = cur.try_nat();
    if (!src) cur.fail("expected source state");
    cur.expect_punct(",");
    std::string label;
    if (cur.try_punct("\"")) {
      while (cur.peek_raw() && cur.peek_raw() != '"') {
        label += cur.peek_raw();
        cur.advance();
      }
      cur.expect_punct("\"");
    } else {
      auto l = cur.try_label();
      if (!l) cur.fail("expected transition label");
      label = *l;
    }
    if (label.empty()) cur.fail("empty transition label");
    cur.expect_punct(",");
    auto dst = cur.try_nat();
    if (!dst) cur.fail("expected destination state");
    cur.expect_punct(")");
    if (*src >= *nstates || *dst >= *nstates) cur.fail("state index out of range");
    lts.add_transition(*src, label, *dst);
  }
  if (!cur.eof()) cur.fail("trailing input after transitions");
  return lts;
}

inline std::string emit_lts(const Lts& lts) {
  std::ostringstream out;
  int init = lts.initial_states.empty() ? 0 : lts.initial_states.front();
  const auto& trs = lts.transitions();  // canonically sorted
  out << "des (" << init << ", " << trs.size() << ", " << lts.n_states() << ")\n";
  for (const auto& t : trs)
    out << '(' << t.src << ",\"" << lts.label(t.label) << "\"," << t.dst << ")\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// The .hml formula language.

namespace detail {

inline Formula parse_formula_rec(Cursor& cur) {
  if (cur.try_punct("(")) {
    Formula f = parse_formula_rec(cur);
    cur.expect_punct(")");
    return f;
  }
  if (cur.try_punct("~")) return Formula::neg(parse_formula_rec(cur));
  if (cur.try_punct("/\\")) {
    cur.expect_punct("{");
    std::vector<Formula> fs;
    if (!cur.try_punct("}")) {
      do fs.push_back(parse_formula_rec(cur));
      while (cur.try_punct(","));
      cur.expect_punct("}");
    }
    return Formula::conj(std::move(fs));
  }
  if (cur.try_punct("<")) {
    auto label = cur.try_label();
    if (!label) cur.fail("expected modality label");
    cur.expect_punct(">");
    Formula body = parse_formula_rec(cur);
    if (*label == "eps") return Formula::eps(std::move(body));
    if (*label == "that") return Formula::tauhat(std::move(body));
    return Formula::diam(*label, std::move(body));
  }
  auto id = cur.try_ident();
  if (!id) cur.fail("expected formula");
  if (*id == "T") return Formula::top();
  if (*id == "D") return Formula::delta(parse_formula_rec(cur));
  cur.fail("unexpected token '" + *id + "' in formula");
}

}  // namespace detail

inline Formula parse_formula(const std::string& text) {
  detail::Cursor cur(text);
  Formula f = detail::parse_formula_rec(cur);
  if (!cur.eof()) cur.fail("trailing input after formula");
  return f;
}

inline std::string emit_formula(const Formula& f) { return f.str(); }

// A single term in the concrete syntax, against a known signature.
inline Term parse_term_text(const std::string& text, const Signature& sig) {
  detail::Cursor cur(text);
  Term t = detail::parse_term_at(cur, sig);
  if (!cur.eof()) cur.fail("trailing input after term");
  return t;
}

}  // namespace sosforge
