#pragma once

// The P+ construction and P-ruloid enumeration: decent nxytt rules that
// characterise the provable transitions of open terms, obtained by backward
// proof search through P+, plus the ruloid safety check.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sosforge/format.hpp"
#include "sosforge/term.hpp"
#include "sosforge/tss.hpp"

namespace sosforge {

// ---------------------------------------------------------------------------
// Conversion to decent ntyft format: ntyxt sources are instantiated per
// function symbol; rules with free variables are instantiated over a finite
// universe of closed terms when one is supplied, and rejected otherwise.

inline Tss to_decent_ntyft(const Tss& tss,
                           const std::vector<Term>& free_var_universe = {}) {
  ReadySimReport rs = check_ready_simulation(tss);
  if (!rs.pass)
    throw StructuralError("to_decent_ntyft requires the ready simulation format");
  Tss out = tss;
  out.rules.clear();
  for (const auto& r : tss.rules) {
    std::vector<Rule> expanded;
    RuleClass c = classify_rule(r);
    if (c.ntyxt) {
      const std::string& xname = r.source().head();
      for (const auto& [fname, sym] : tss.signature.symbols()) {
        std::vector<Term> args;
        for (int i = 0; i < sym.arity; ++i) args.push_back(Term::var(fresh_var_name()));
        Substitution sub;
        sub.bind(xname, Term::app(fname, args));
        std::vector<Literal> prem;
        for (const auto& p : r.premises) {
          Literal q = p;
          q.source = sub.apply(p.source);
          if (p.positive) q.target = sub.apply(p.target);
          prem.push_back(q);
        }
        Literal concl = r.conclusion;
        concl.source = sub.apply(concl.source);
        if (concl.positive) concl.target = sub.apply(concl.target);
        expanded.emplace_back(std::move(prem), std::move(concl));
      }
    } else {
      expanded.push_back(r);
    }
    for (const auto& er : expanded) {
      RuleClass ec = classify_rule(er);
      if (!ec.has_free_variables) {
        out.rules.push_back(er);
        continue;
      }
      if (free_var_universe.empty())
        throw StructuralError("rule with free variables needs an instantiation universe: " +
                              er.str());
      std::set<std::string> src_vars = variables(er.source());
      std::set<std::string> rhs_vars;
      for (const auto& p : er.premises)
        if (p.positive) rhs_vars.insert(p.target.head());
      std::vector<std::string> free;
      for (const auto& v : er.all_variables())
        if (!src_vars.count(v) && !rhs_vars.count(v)) free.push_back(v);
      std::vector<size_t> idx(free.size(), 0);
      for (;;) {
        Substitution sub;
        for (size_t i = 0; i < free.size(); ++i) sub.bind(free[i], free_var_universe[idx[i]]);
        std::vector<Literal> prem;
        for (const auto& p : er.premises) {
          Literal q = p;
          q.source = sub.apply(p.source);
          if (p.positive) q.target = sub.apply(p.target);
          prem.push_back(q);
        }
        Literal concl = er.conclusion;
        concl.source = sub.apply(concl.source);
        if (concl.positive) concl.target = sub.apply(concl.target);
        out.rules.emplace_back(std::move(prem), std::move(concl));
        size_t k = 0;
        while (k < idx.size() && ++idx[k] == free_var_universe.size()) idx[k++] = 0;
        if (k == idx.size()) break;
      }
    }
  }
  out.sort_rules();
  return out;
}

// ---------------------------------------------------------------------------
// P+: for every function symbol f and label alpha, non-standard rules
// f(x1..xn) -alpha-/> are added, one per choice function picking a premise
// from each standard (f, alpha)-rule; the denials of the picked premises
// become the premises. A premise-free (f, alpha)-rule kills the product; no
// (f, alpha)-rules at all yield the premise-free negative rule.

// Premise sets containing a literal and its denial can never be satisfied;
// rules carrying them are dropped, which leaves ws-derivability and the
// ruloid transition correspondence untouched.
inline bool has_denying_premises(const std::vector<Literal>& premises) {
  for (size_t i = 0; i < premises.size(); ++i)
    for (size_t j = i + 1; j < premises.size(); ++j)
      if (premises[i].denies(premises[j])) return true;
  return false;
}

inline Tss build_p_plus(const Tss& tss) {
  for (const auto& r : tss.rules)
    if (!classify_rule(r).ntyft || !classify_rule(r).decent || !r.standard())
      throw StructuralError("P+ construction requires a standard TSS in decent ntyft format");

  Tss out = tss;
  for (const auto& [fname, sym] : tss.signature.symbols()) {
    std::vector<Term> args;
    for (int i = 0; i < sym.arity; ++i) args.push_back(Term::var("x" + std::to_string(i + 1)));
    Term source = Term::app(fname, args);
    for (const auto& alpha : tss.all_actions()) {
      // Premise sets of the (f, alpha)-rules, rebased to the canonical
      // source variables.
      std::vector<std::vector<Literal>> premise_sets;
      bool premise_free_rule = false;
      for (const auto& r : tss.rules) {
        if (r.conclusion.label != alpha || !(r.source().head() == fname) ||
            r.source().is_var())
          continue;
        Substitution rebase;
        for (size_t i = 0; i < r.source().args().size(); ++i)
          rebase.bind(r.source().args()[i].head(), args[i]);
        for (const auto& v : r.all_variables())
          if (!rebase.bound(v)) rebase.bind(v, Term::var(fresh_var_name()));
        if (r.premises.empty()) premise_free_rule = true;
        std::vector<Literal> prem;
        for (const auto& p : r.premises) {
          Literal q = p;
          q.source = rebase.apply(p.source);
          if (p.positive) q.target = rebase.apply(p.target);
          prem.push_back(q);
        }
        premise_sets.push_back(std::move(prem));
      }
      if (premise_free_rule) continue;  // empty product: no negative rule
      // Choice-function product; the empty product (no rules) produces the
      // premise-free negative rule.
      std::vector<std::vector<Literal>> chosen{{}};
      for (const auto& prem : premise_sets) {
        std::vector<std::vector<Literal>> next;
        for (const auto& base : chosen)
          for (const auto& pick : prem) {
            std::vector<Literal> ext = base;
            Literal denial = pick.positive
                                 ? Literal::neg(pick.source, pick.label)
                                 : Literal::pos(pick.source, pick.label,
                                                Term::var(fresh_var_name()));
            ext.push_back(denial);
            next.push_back(std::move(ext));
          }
        chosen = std::move(next);
        if (chosen.empty()) break;
      }
      for (auto& prem : chosen) {
        if (has_denying_premises(prem)) continue;
        out.rules.emplace_back(std::move(prem), Literal::neg(source, alpha));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ruloid enumeration by backward proof search.

struct RuloidSet {
  Term source;
  std::string label;
  bool positive = true;
  std::vector<Rule> ruloids;  // deduped, canonical variable numbering
  bool complete = true;       // false iff the depth bound was hit
};

namespace detail {

struct PartialRuloid {
  std::vector<Literal> hypotheses;
  Term target;           // meaningful for positive goals
  Substitution binding;  // premise right-hand sides to sub-ruloid targets
};

class RuloidSearch {
 public:
  explicit RuloidSearch(const Tss& pplus) : pplus_(pplus) {}

  std::vector<PartialRuloid> search(const Term& t, const std::string& label, bool positive,
                                    int depth) {
    if (t.is_var()) {
      // Hypothesis leaf; the induction basis of irredundant proofs.
      if (positive) {
        Term y = Term::var(fresh_var_name());
        return {PartialRuloid{{Literal::pos(t, label, y)}, y, {}}};
      }
      return {PartialRuloid{{Literal::neg(t, label)}, Term::constant("_none"), {}}};
    }
    if (depth <= 0) {
      complete = false;
      return {};
    }
    std::vector<PartialRuloid> out;
    for (const auto& rule : pplus_.rules) {
      if (rule.conclusion.positive != positive || rule.conclusion.label != label) continue;
      if (rule.source().is_var() || rule.source().head() != t.head()) continue;
      // Rebase the rule: source variables to t's arguments.
      Substitution sub;
      for (size_t i = 0; i < rule.source().args().size(); ++i)
        sub.bind(rule.source().args()[i].head(), t.args()[i]);
      std::vector<PartialRuloid> partial{PartialRuloid{{}, Term(), {}}};
      for (const auto& prem : rule.premises) {
        Term src = sub.apply(prem.source);
        std::vector<PartialRuloid> sub_results = search(src, prem.label, prem.positive, depth - 1);
        std::vector<PartialRuloid> next;
        for (const auto& base : partial) {
          for (const auto& sr : sub_results) {
            PartialRuloid ext = base;
            ext.hypotheses.insert(ext.hypotheses.end(), sr.hypotheses.begin(),
                                  sr.hypotheses.end());
            if (prem.positive) ext.binding.bind(prem.target.head(), sr.target);
            next.push_back(std::move(ext));
          }
        }
        partial = std::move(next);
        if (partial.empty()) break;
      }
      for (auto& pr : partial) {
        Term target = Term();
        if (positive) {
          Substitution full = sub;
          for (const auto& [var, bound] : pr.binding.map()) full.bind(var, bound);
          target = full.apply(rule.target());
        }
        out.push_back(
            PartialRuloid{std::move(pr.hypotheses), positive ? target : Term::constant("_none"),
                          {}});
      }
    }
    return out;
  }

  bool complete = true;

 private:
  const Tss& pplus_;
};

// Canonical form of a ruloid: the source term's variables stay fixed, all
// other variables are renumbered y0, y1, ... in premise order.
inline Rule canonical_ruloid(const Rule& r, const std::set<std::string>& keep) {
  Substitution ren;
  int next = 0;
  auto visit = [&](const Term& t, auto&& self) -> void {
    if (t.is_var()) {
      if (!keep.count(t.head()) && !ren.bound(t.head()))
        ren.bind(t.head(), Term::var("y" + std::to_string(next++)));
      return;
    }
    for (const auto& a : t.args()) self(a, self);
  };
  std::vector<Literal> sorted = r.premises;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& p : sorted) {
    visit(p.source, visit);
    if (p.positive) visit(p.target, visit);
  }
  if (r.conclusion.positive) visit(r.conclusion.target, visit);
  std::vector<Literal> prem;
  for (const auto& p : sorted) {
    Literal q = p;
    q.source = ren.apply(p.source);
    if (p.positive) q.target = ren.apply(p.target);
    prem.push_back(q);
  }
  Literal concl = r.conclusion;
  if (concl.positive) concl.target = ren.apply(concl.target);
  return Rule(std::move(prem), std::move(concl));
}

}  // namespace detail

// Enumerates the P-ruloids with the given source term, label and polarity.
// `pplus` must come from build_p_plus. The completeness flag is false iff a
// search branch hit the depth bound, in which case the set may be partial.
inline RuloidSet ruloids(const Tss& pplus, const Term& t, const std::string& label,
                         bool positive, int depth = 8) {
  RuloidSet out;
  out.source = t;
  out.label = label;
  out.positive = positive;
  detail::RuloidSearch search(pplus);
  std::set<std::string> keep = variables(t);
  std::set<std::string> seen;
  for (const auto& pr : search.search(t, label, positive, depth)) {
    if (has_denying_premises(pr.hypotheses)) continue;
    Literal concl = positive ? Literal::pos(t, label, pr.target) : Literal::neg(t, label);
    Rule r = detail::canonical_ruloid(Rule(pr.hypotheses, concl), keep);
    if (seen.insert(r.str()).second) out.ruloids.push_back(std::move(r));
  }
  out.complete = search.complete;
  std::sort(out.ruloids.begin(), out.ruloids.end());
  return out;
}

// ---------------------------------------------------------------------------
// Ruloid safety: every enumerated ruloid of a format-conforming TSS must be
// rooted stability-respecting branching bisimulation safe w.r.t. the same
// predicates.

struct RuloidSafetyReport {
  bool pass = true;
  bool complete = true;
  std::vector<std::pair<Rule, RuleSafetyReport>> violations;
  size_t checked = 0;
};

inline RuloidSafetyReport check_ruloid_safety(const Tss& pplus,
                                              const std::vector<Term>& terms,
                                              const ArgPredicate& aleph,
                                              const ArgPredicate& lambda, int depth = 8) {
  RuloidSafetyReport rep;
  std::set<std::string> labels;
  {
    std::set<std::string> all = pplus.all_actions();
    labels.insert(all.begin(), all.end());
  }
  for (const auto& t : terms) {
    for (const auto& label : labels) {
      for (bool positive : {true, false}) {
        RuloidSet rs = ruloids(pplus, t, label, positive, depth);
        rep.complete = rep.complete && rs.complete;
        for (const auto& r : rs.ruloids) {
          ++rep.checked;
          RuleSafetyReport sr = check_rsbb_safe(r, aleph, lambda);
          if (!sr.pass) {
            rep.pass = false;
            rep.violations.emplace_back(r, sr);
          }
        }
      }
    }
  }
  return rep;
}

}  // namespace sosforge
