#pragma once

// Rules, literals, transition system specifications, and the syntactic
// classifications defined on them: ntytt/ntyft/ntyxt/nxytt shapes, decency,
// lookahead, liquid/frozen occurrences and patience rules.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sosforge/term.hpp"

namespace sosforge {

inline const std::string kTau = "tau";
inline const std::string kIota = "iota";

inline bool is_oracle_label(const std::string& l) { return !l.empty() && l[0] == '@'; }

// A positive literal t -a-> u or a negative literal t -a-/>.
struct Literal {
  bool positive = true;
  Term source;
  std::string label;
  Term target;  // meaningful only when positive

  static Literal pos(Term src, std::string label, Term dst) {
    return Literal{true, std::move(src), std::move(label), std::move(dst)};
  }
  static Literal neg(Term src, std::string label) {
    return Literal{false, std::move(src), std::move(label), Term::constant("_none")};
  }

  // Two literals deny each other iff same source and label, opposite polarity.
  bool denies(const Literal& other) const {
    return positive != other.positive && label == other.label && source == other.source;
  }

  int compare(const Literal& o) const {
    if (positive != o.positive) return positive ? 1 : -1;  // negatives first
    if (int c = label.compare(o.label); c != 0) return c;
    if (int c = source.compare(o.source); c != 0) return c;
    if (!positive) return 0;
    return target.compare(o.target);
  }
  friend bool operator<(const Literal& a, const Literal& b) { return a.compare(b) < 0; }
  friend bool operator==(const Literal& a, const Literal& b) { return a.compare(b) == 0; }

  std::string str(const Signature* sig = nullptr) const {
    std::string s = sig ? source.str(*sig) : source.str();
    s += positive ? " -" + label + "-> " : " -" + label + "-/>";
    if (positive) s += sig ? target.str(*sig) : target.str();
    return s;
  }
};

// A transition rule H / conclusion. Premises are kept as a canonically
// ordered, duplicate-free set.
struct Rule {
  std::vector<Literal> premises;
  Literal conclusion;

  Rule() = default;
  Rule(std::vector<Literal> prem, Literal concl)
      : premises(std::move(prem)), conclusion(std::move(concl)) {
    normalize_premises();
  }

  void normalize_premises() {
    std::sort(premises.begin(), premises.end());
    premises.erase(std::unique(premises.begin(), premises.end()), premises.end());
  }

  bool standard() const { return conclusion.positive; }
  const Term& source() const { return conclusion.source; }
  const Term& target() const { return conclusion.target; }

  std::set<std::string> all_variables() const {
    std::set<std::string> vs = variables(conclusion.source);
    if (conclusion.positive) collect_variables(conclusion.target, vs);
    for (const auto& p : premises) {
      collect_variables(p.source, vs);
      if (p.positive) collect_variables(p.target, vs);
    }
    return vs;
  }

  int compare(const Rule& o) const {
    if (int c = conclusion.compare(o.conclusion); c != 0) return c;
    if (premises.size() != o.premises.size()) return premises.size() < o.premises.size() ? -1 : 1;
    for (size_t i = 0; i < premises.size(); ++i)
      if (int c = premises[i].compare(o.premises[i]); c != 0) return c;
    return 0;
  }
  friend bool operator<(const Rule& a, const Rule& b) { return a.compare(b) < 0; }
  friend bool operator==(const Rule& a, const Rule& b) { return a.compare(b) == 0; }

  std::string str(const Signature* sig = nullptr) const {
    std::string s;
    for (size_t i = 0; i < premises.size(); ++i) {
      if (i) s += ", ";
      s += premises[i].str(sig);
    }
    s += s.empty() ? "|- " : " |- ";
    s += conclusion.str(sig);
    return s;
  }
};

// Renames every variable of r to a canonical x0,x1,... numbering determined
// by first occurrence in (source, sorted premises, target). Used to compare
// and dedupe rules up to renaming.
inline Rule canonical_rule(const Rule& r) {
  Substitution ren;
  int next = 0;
  auto walk = [&](const Term& t, auto&& self) -> void {
    if (t.is_var()) {
      if (!ren.bound(t.head())) ren.bind(t.head(), Term::var("x" + std::to_string(next++)));
      return;
    }
    for (const auto& a : t.args()) self(a, self);
  };
  walk(r.conclusion.source, walk);
  for (const auto& p : r.premises) {
    walk(p.source, walk);
    if (p.positive) walk(p.target, walk);
  }
  if (r.conclusion.positive) walk(r.conclusion.target, walk);
  std::vector<Literal> prem;
  for (const auto& p : r.premises) {
    Literal q = p;
    q.source = ren.apply(p.source);
    if (p.positive) q.target = ren.apply(p.target);
    prem.push_back(q);
  }
  Literal concl = r.conclusion;
  concl.source = ren.apply(concl.source);
  if (concl.positive) concl.target = ren.apply(concl.target);
  return Rule(std::move(prem), std::move(concl));
}

// A predicate on argument positions of function symbols, e.g. Lambda, Aleph
// or their intersection Gamma.
class ArgPredicate {
 public:
  ArgPredicate() = default;
  ArgPredicate(std::initializer_list<std::pair<std::string, int>> init) {
    for (auto& [f, i] : init) set_.emplace(f, i);
  }
  void add(const std::string& f, int arg) { set_.emplace(f, arg); }  // arg is 1-based
  bool liquid(const std::string& f, int arg) const { return set_.count({f, arg}) != 0; }
  const std::set<std::pair<std::string, int>>& positions() const { return set_; }
  bool empty() const { return set_.empty(); }

  static ArgPredicate intersect(const ArgPredicate& a, const ArgPredicate& b) {
    ArgPredicate out;
    for (const auto& p : a.set_)
      if (b.set_.count(p)) out.set_.insert(p);
    return out;
  }
  static ArgPredicate universal(const Signature& sig) {
    ArgPredicate out;
    for (const auto& [name, sym] : sig.symbols())
      for (int i = 1; i <= sym.arity; ++i) out.add(name, i);
    return out;
  }
  friend bool operator==(const ArgPredicate& a, const ArgPredicate& b) { return a.set_ == b.set_; }
  friend bool operator<(const ArgPredicate& a, const ArgPredicate& b) { return a.set_ < b.set_; }

  std::string str() const {
    std::string s = "{";
    bool first = true;
    for (const auto& [f, i] : set_) {
      if (!first) s += ", ";
      first = false;
      s += "(" + f + "," + std::to_string(i) + ")";
    }
    return s + "}";
  }

 private:
  std::set<std::pair<std::string, int>> set_;
};

// A transition system specification (Sigma, A_tau, R) plus the Lambda/Aleph
// argument predicates. actions() holds the observable actions; tau (and, for
// transformed systems, iota and oracle actions) are tracked separately.
struct Tss {
  Signature signature;
  std::set<std::string> actions;         // observable actions, tau excluded
  std::set<std::string> extra_actions;   // iota / oracle actions of transformed systems
  std::vector<Rule> rules;
  ArgPredicate lambda;
  ArgPredicate aleph;

  ArgPredicate gamma() const { return ArgPredicate::intersect(lambda, aleph); }

  std::set<std::string> all_actions() const {
    std::set<std::string> out = actions;
    out.insert(kTau);
    out.insert(extra_actions.begin(), extra_actions.end());
    return out;
  }
  // A_tau: the observable actions plus tau (without iota/oracle actions).
  std::set<std::string> tau_actions() const {
    std::set<std::string> out = actions;
    out.insert(kTau);
    return out;
  }

  void sort_rules() {
    std::sort(rules.begin(), rules.end());
    rules.erase(std::unique(rules.begin(), rules.end()), rules.end());
  }
};

// ---------------------------------------------------------------------------
// Rule shape classification.

enum class RuleFlag {
  ntytt,
  ntyft,
  ntyxt,
  nxytt,
  decent,
  standard,
  lookahead_free,
};

struct RuleClass {
  bool ntytt = false;
  bool ntyft = false;
  bool ntyxt = false;
  bool nxytt = false;
  bool decent = false;
  bool standard = false;
  bool lookahead_free = false;
  bool has_free_variables = false;
};

inline RuleClass classify_rule(const Rule& r) {
  RuleClass c;
  c.standard = r.conclusion.positive;

  // ntytt: right-hand sides of positive premises are variables, all
  // distinct, and none occurs in the source.
  std::set<std::string> source_vars = variables(r.source());
  std::set<std::string> rhs_vars;
  bool rhs_ok = true;
  for (const auto& p : r.premises) {
    if (!p.positive) continue;
    if (!p.target.is_var()) {
      rhs_ok = false;
      break;
    }
    if (!rhs_vars.insert(p.target.head()).second || source_vars.count(p.target.head())) {
      rhs_ok = false;
      break;
    }
  }
  c.ntytt = rhs_ok;

  // lookahead: a variable occurring in a premise right-hand side and in a
  // premise left-hand side.
  std::set<std::string> lhs_vars;
  for (const auto& p : r.premises) collect_variables(p.source, lhs_vars);
  bool lookahead = false;
  for (const auto& p : r.premises) {
    if (!p.positive) continue;
    std::set<std::string> tv = variables(p.target);
    for (const auto& v : tv)
      if (lhs_vars.count(v)) lookahead = true;
  }
  c.lookahead_free = !lookahead;

  // free variables: in neither the source nor a premise right-hand side.
  for (const auto& v : r.all_variables())
    if (!source_vars.count(v) && !rhs_vars.count(v)) c.has_free_variables = true;
  c.decent = c.lookahead_free && !c.has_free_variables;

  if (c.ntytt) {
    const Term& src = r.source();
    if (src.is_var()) c.ntyxt = true;
    if (src.is_app()) {
      bool distinct_vars = true;
      std::set<std::string> seen;
      for (const auto& a : src.args())
        if (!a.is_var() || !seen.insert(a.head()).second) distinct_vars = false;
      c.ntyft = distinct_vars;
    }
    bool lhs_all_vars = true;
    for (const auto& p : r.premises)
      if (!p.source.is_var()) lhs_all_vars = false;
    c.nxytt = lhs_all_vars;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Liquid and frozen occurrences.

// An occurrence path: the sequence of (1-based) argument positions from the
// root of the term to the occurrence.
using OccurrencePath = std::vector<int>;

struct OccurrencePartition {
  std::vector<OccurrencePath> liquid;
  std::vector<OccurrencePath> frozen;
  size_t total() const { return liquid.size() + frozen.size(); }
};

inline void occurrences_rec(const ArgPredicate& pred, const std::string& x, const Term& t,
                            OccurrencePath& path, bool live, OccurrencePartition& out) {
  if (t.is_var()) {
    if (t.head() == x) (live ? out.liquid : out.frozen).push_back(path);
    return;
  }
  for (size_t i = 0; i < t.args().size(); ++i) {
    path.push_back(static_cast<int>(i + 1));
    occurrences_rec(pred, x, t.args()[i], path,
                    live && pred.liquid(t.head(), static_cast<int>(i + 1)), out);
    path.pop_back();
  }
}

// Partitions all occurrences of x in t into liquid and frozen ones. The
// occurrence t = x itself is liquid.
inline OccurrencePartition liquid_occurrences(const ArgPredicate& pred, const std::string& x,
                                              const Term& t) {
  OccurrencePartition out;
  OccurrencePath path;
  occurrences_rec(pred, x, t, path, true, out);
  return out;
}

inline size_t count_liquid(const ArgPredicate& pred, const std::string& x, const Term& t) {
  return liquid_occurrences(pred, x, t).liquid.size();
}
inline bool occurs_liquid(const ArgPredicate& pred, const std::string& x, const Term& t) {
  return count_liquid(pred, x, t) > 0;
}
inline bool occurs_only_liquid(const ArgPredicate& pred, const std::string& x, const Term& t) {
  return liquid_occurrences(pred, x, t).frozen.empty();
}
inline bool occurs_only_frozen(const ArgPredicate& pred, const std::string& x, const Term& t) {
  return liquid_occurrences(pred, x, t).liquid.empty();
}

// ---------------------------------------------------------------------------
// Patience rules.

// A Gamma-patience rule: x_i -tau-> y |- f(x1..xn) -tau-> f(x1..y..xn) with
// Gamma(f, i).
inline bool is_patience_rule(const Rule& r, const ArgPredicate& gamma) {
  if (!r.conclusion.positive || r.conclusion.label != kTau) return false;
  if (r.premises.size() != 1) return false;
  const Literal& p = r.premises[0];
  if (!p.positive || p.label != kTau || !p.source.is_var() || !p.target.is_var()) return false;
  const Term& src = r.source();
  const Term& dst = r.target();
  if (!src.is_app() || !dst.is_app() || src.head() != dst.head()) return false;
  std::set<std::string> seen;
  for (const auto& a : src.args())
    if (!a.is_var() || !seen.insert(a.head()).second) return false;
  // Exactly one argument changes: x_i into the premise target.
  int changed = -1;
  for (size_t i = 0; i < src.args().size(); ++i) {
    if (src.args()[i] == dst.args()[i]) continue;
    if (changed != -1) return false;
    changed = static_cast<int>(i);
  }
  if (changed == -1) return false;
  if (!(src.args()[changed] == p.source)) return false;
  if (!(dst.args()[changed] == p.target)) return false;
  if (seen.count(p.target.head())) return false;  // premise rhs must be fresh
  return gamma.liquid(src.head(), changed + 1);
}

// The argument position a patience rule belongs to, if it is one for some
// predicate (i.e. patience-shaped).
inline std::optional<std::pair<std::string, int>> patience_position(const Rule& r) {
  ArgPredicate all;
  if (!r.conclusion.positive || !r.source().is_app()) return std::nullopt;
  const std::string& f = r.source().head();
  for (size_t i = 1; i <= r.source().args().size(); ++i) all.add(f, static_cast<int>(i));
  if (!is_patience_rule(r, all)) return std::nullopt;
  for (size_t i = 0; i < r.source().args().size(); ++i)
    if (!(r.source().args()[i] == r.target().args()[i]))
      return std::make_pair(f, static_cast<int>(i + 1));
  return std::nullopt;
}

// Positions (f, i) for which a patience rule is present in the TSS.
inline ArgPredicate patience_positions(const Tss& tss) {
  ArgPredicate out;
  for (const auto& r : tss.rules)
    if (auto pos = patience_position(r)) out.add(pos->first, pos->second);
  return out;
}

struct PatienceReport {
  bool patient = true;
  std::vector<std::pair<std::string, int>> missing;  // liquid args without a patience rule
};

// A TSS is Gamma-patient if it contains all Gamma-patience rules.
inline PatienceReport is_gamma_patient_tss(const Tss& tss, const ArgPredicate& gamma) {
  PatienceReport rep;
  ArgPredicate have = patience_positions(tss);
  for (const auto& [f, i] : gamma.positions()) {
    if (!have.liquid(f, i)) {
      rep.patient = false;
      rep.missing.emplace_back(f, i);
    }
  }
  return rep;
}

// A standard ntytt rule is Gamma-patient if it is irredundantly provable from
// the Gamma-patience rules alone. The proof search below enumerates the
// possible hypothesis sets of such proofs; the rule qualifies iff its premise
// set is among them.
inline void patience_hypothesis_sets(const Literal& goal, const ArgPredicate& gamma,
                                     std::set<std::vector<Literal>>& out) {
  // Option 1: the goal is itself a hypothesis leaf.
  out.insert({goal});
  if (!goal.positive || goal.label != kTau) return;
  const Term& src = goal.source;
  const Term& dst = goal.target;
  if (!src.is_app() || !dst.is_app() || src.head() != dst.head() ||
      src.args().size() != dst.args().size())
    return;
  // Option 2: the bottom node is an instance of the patience rule for a
  // liquid argument i; all other arguments must agree.
  for (size_t i = 0; i < src.args().size(); ++i) {
    if (!gamma.liquid(src.head(), static_cast<int>(i + 1))) continue;
    bool rest_equal = true;
    for (size_t j = 0; j < src.args().size(); ++j)
      if (j != i && !(src.args()[j] == dst.args()[j])) rest_equal = false;
    if (!rest_equal) continue;
    patience_hypothesis_sets(Literal::pos(src.args()[i], kTau, dst.args()[i]), gamma, out);
  }
}

inline bool is_gamma_patient_rule(const Rule& r, const ArgPredicate& gamma) {
  if (!r.conclusion.positive || r.conclusion.label != kTau) return false;
  std::set<std::vector<Literal>> sets;
  patience_hypothesis_sets(r.conclusion, gamma, sets);
  std::vector<Literal> premises = r.premises;  // already sorted/deduped
  return sets.count(premises) != 0;
}

}  // namespace sosforge
