#pragma once

// Congruence format membership: ready simulation, the (rooted) branching
// bisimulation formats and the (rooted) stability-respecting branching
// bisimulation formats, with per-rule per-condition reports and predicate
// search.

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sosforge/tss.hpp"

namespace sosforge {

enum class Format { bb, rbb, sbb, rsbb };

inline const char* format_name(Format f) {
  switch (f) {
    case Format::bb: return "bb";
    case Format::rbb: return "rbb";
    case Format::sbb: return "sbb";
    case Format::rsbb: return "rsbb";
  }
  return "?";
}

inline std::optional<Format> parse_format(const std::string& s) {
  if (s == "bb") return Format::bb;
  if (s == "rbb") return Format::rbb;
  if (s == "sbb") return Format::sbb;
  if (s == "rsbb") return Format::rsbb;
  return std::nullopt;
}

inline bool format_rooted(Format f) { return f == Format::rbb || f == Format::rsbb; }
inline bool format_stability(Format f) { return f == Format::sbb || f == Format::rsbb; }

// ---------------------------------------------------------------------------
// Ready simulation format: ntyft/ntyxt rules without lookahead.

struct ReadySimReport {
  bool pass = true;
  std::vector<std::pair<size_t, std::string>> violations;  // rule index, reason
};

inline ReadySimReport check_ready_simulation(const Tss& tss) {
  ReadySimReport rep;
  for (size_t i = 0; i < tss.rules.size(); ++i) {
    RuleClass c = classify_rule(tss.rules[i]);
    if (!c.ntyft && !c.ntyxt) {
      rep.pass = false;
      rep.violations.emplace_back(i, "not an ntyft or ntyxt rule");
    }
    if (!c.lookahead_free) {
      rep.pass = false;
      rep.violations.emplace_back(i, "has lookahead");
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Per-rule safety conditions.

struct ConditionOutcome {
  bool pass = true;
  std::string witness;  // variable / premise explaining a failure
};

struct RuleSafetyReport {
  bool pass = true;
  // Conditions 1-3, 4a, 4b of the rooted stability-respecting branching
  // bisimulation safety definition (4 for the rooted-branching variant).
  std::map<std::string, ConditionOutcome> conditions;

  void fail(const std::string& cond, const std::string& witness) {
    pass = false;
    auto& c = conditions[cond];
    c.pass = false;
    if (c.witness.empty()) c.witness = witness;
  }
};

namespace detail {

inline bool occurs_liquid_in_premise_sources(const ArgPredicate& pred, const std::string& x,
                                             const Rule& r, bool positives, bool negatives,
                                             size_t* count = nullptr) {
  size_t n = 0;
  for (const auto& p : r.premises) {
    if (p.positive && !positives) continue;
    if (!p.positive && !negatives) continue;
    n += count_liquid(pred, x, p.source);
  }
  if (count) *count = n;
  return n > 0;
}

}  // namespace detail

// Conditions 1-3 shared by both safety notions; non-standard rules are
// subject to conditions 2 and 3 only.
inline void check_common_conditions(const Rule& r, const ArgPredicate& aleph,
                                    const ArgPredicate& lambda, RuleSafetyReport& rep) {
  const Term& t = r.source();
  bool standard = r.standard();

  if (standard) {
    // 1: right-hand sides of positive premises occur only Lambda-liquid in
    // the target.
    for (const auto& p : r.premises) {
      if (!p.positive) continue;
      const std::string& y = p.target.head();
      if (!occurs_only_liquid(lambda, y, r.target()))
        rep.fail("1", "rhs variable " + y + " has a Lambda-frozen occurrence in the target");
    }
  }

  for (const auto& x : variables(t)) {
    // 2: x occurring only Lambda-liquid in t occurs only Lambda-liquid in r.
    if (occurs_only_liquid(lambda, x, t)) {
      bool ok = true;
      for (const auto& p : r.premises) {
        if (!occurs_only_liquid(lambda, x, p.source)) ok = false;
        if (p.positive && !occurs_only_liquid(lambda, x, p.target)) ok = false;
      }
      if (standard && !occurs_only_liquid(lambda, x, r.target())) ok = false;
      if (!ok) rep.fail("2", "variable " + x + " has a Lambda-frozen occurrence in the rule");
    }
    // 3: x occurring only Aleph-frozen in t occurs only Aleph-frozen in H.
    if (occurs_only_frozen(aleph, x, t)) {
      for (const auto& p : r.premises) {
        if (occurs_liquid(aleph, x, p.source) ||
            (p.positive && occurs_liquid(aleph, x, p.target)))
          rep.fail("3", "variable " + x + " occurs Aleph-liquid in premise " + p.str());
      }
    }
  }
}

// Rooted stability-respecting branching bisimulation safety. Non-ntytt rules
// are a structural error. Non-standard rules satisfy conditions 2 and 3.
inline RuleSafetyReport check_rsbb_safe(const Rule& r, const ArgPredicate& aleph,
                                        const ArgPredicate& lambda) {
  if (!classify_rule(r).ntytt) throw StructuralError("safety check requires an ntytt rule");
  RuleSafetyReport rep;
  check_common_conditions(r, aleph, lambda, rep);
  if (!r.standard()) return rep;

  ArgPredicate gamma = ArgPredicate::intersect(aleph, lambda);
  const Term& t = r.source();
  for (const auto& x : variables(t)) {
    auto occ = liquid_occurrences(aleph, x, t);
    if (occ.liquid.size() != 1) continue;
    // The unique Aleph-liquid occurrence must also be Lambda-liquid.
    auto locc = liquid_occurrences(lambda, x, t);
    bool also_lambda = false;
    for (const auto& path : locc.liquid)
      if (path == occ.liquid.front()) also_lambda = true;
    if (!also_lambda) continue;

    size_t pos_liquid = 0;
    detail::occurs_liquid_in_premise_sources(aleph, x, r, true, false, &pos_liquid);
    bool neg_liquid = detail::occurs_liquid_in_premise_sources(aleph, x, r, false, true);
    // 4a: liquid occurrence in a negative premise, or more than one in the
    // positive premises, requires a premise v -tau-/> with x Aleph-liquid in v.
    if (neg_liquid || pos_liquid > 1) {
      bool have_tau_neg = false;
      for (const auto& p : r.premises)
        if (!p.positive && p.label == kTau && occurs_liquid(aleph, x, p.source))
          have_tau_neg = true;
      if (!have_tau_neg)
        rep.fail("4a", "variable " + x + " lacks a covering negative tau-premise");
    }
    // 4b: a positive tau-premise with x Aleph-liquid in its source forces the
    // rule to be Gamma-patient.
    for (const auto& p : r.premises) {
      if (p.positive && p.label == kTau && occurs_liquid(aleph, x, p.source)) {
        if (!is_gamma_patient_rule(r, gamma))
          rep.fail("4b", "positive tau-premise " + p.str() + " in a Gamma-impatient rule");
      }
    }
  }
  return rep;
}

// Rooted branching bisimulation safety: the stricter condition 4.
inline RuleSafetyReport check_rbb_safe(const Rule& r, const ArgPredicate& aleph,
                                       const ArgPredicate& lambda) {
  if (!classify_rule(r).ntytt) throw StructuralError("safety check requires an ntytt rule");
  RuleSafetyReport rep;
  check_common_conditions(r, aleph, lambda, rep);
  if (!r.standard()) return rep;

  ArgPredicate gamma = ArgPredicate::intersect(aleph, lambda);
  const Term& t = r.source();
  for (const auto& x : variables(t)) {
    auto occ = liquid_occurrences(aleph, x, t);
    if (occ.liquid.size() != 1) continue;
    auto locc = liquid_occurrences(lambda, x, t);
    bool also_lambda = false;
    for (const auto& path : locc.liquid)
      if (path == occ.liquid.front()) also_lambda = true;
    if (!also_lambda) continue;

    // 4: at most one Aleph-liquid occurrence in H, in a positive premise.
    size_t pos_liquid = 0;
    detail::occurs_liquid_in_premise_sources(aleph, x, r, true, false, &pos_liquid);
    bool neg_liquid = detail::occurs_liquid_in_premise_sources(aleph, x, r, false, true);
    if (neg_liquid)
      rep.fail("4", "variable " + x + " occurs Aleph-liquid in a negative premise");
    else if (pos_liquid > 1)
      rep.fail("4", "variable " + x + " has several Aleph-liquid premise occurrences");
    for (const auto& p : r.premises) {
      if (p.positive && p.label == kTau && occurs_liquid(aleph, x, p.source)) {
        if (!is_gamma_patient_rule(r, ArgPredicate::intersect(aleph, lambda)))
          rep.fail("4", "positive tau-premise " + p.str() + " in a Gamma-impatient rule");
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Whole-TSS format verdicts.

struct FormatVerdict {
  bool pass = false;
  bool search_aborted = false;
  ArgPredicate aleph, lambda;                 // witness on pass
  std::vector<std::string> reasons;           // failure explanations
  std::map<size_t, RuleSafetyReport> rule_reports;

  std::string str(const Tss& tss, Format fmt) const {
    std::ostringstream out;
    out << "format = " << format_name(fmt) << "\n";
    out << "verdict = " << (search_aborted ? "search aborted" : pass ? "pass" : "fail") << "\n";
    if (pass) {
      out << "witness.aleph = " << aleph.str() << "\n";
      out << "witness.lambda = " << lambda.str() << "\n";
    }
    for (const auto& r : reasons) out << "reason = " << r << "\n";
    for (const auto& [idx, rep] : rule_reports) {
      for (const auto& [cond, oc] : rep.conditions) {
        out << "rule[" << idx << "].condition[" << cond << "] = "
            << (oc.pass ? "pass" : "fail");
        if (!oc.pass) out << " (" << oc.witness << ")";
        out << "  # " << tss.rules[idx].str(&tss.signature) << "\n";
      }
    }
    return out.str();
  }
};

namespace detail {

inline FormatVerdict check_format_with(const Tss& tss, Format fmt, const ArgPredicate& aleph,
                                       const ArgPredicate& lambda) {
  FormatVerdict v;
  v.aleph = aleph;
  v.lambda = lambda;
  ReadySimReport rs = check_ready_simulation(tss);
  if (!rs.pass) {
    for (const auto& [idx, why] : rs.violations)
      v.reasons.push_back("rule " + std::to_string(idx) + ": " + why);
    return v;
  }
  if (!format_rooted(fmt)) {
    // Unrooted formats require Lambda universal.
    if (!(lambda == ArgPredicate::universal(tss.signature))) {
      v.reasons.push_back("Lambda is not universal");
      return v;
    }
  }
  ArgPredicate gamma = ArgPredicate::intersect(aleph, lambda);
  PatienceReport pat = is_gamma_patient_tss(tss, gamma);
  if (!pat.patient) {
    for (const auto& [f, i] : pat.missing)
      v.reasons.push_back("missing patience rule for (" + f + "," + std::to_string(i) + ")");
    return v;
  }
  bool all = true;
  for (size_t i = 0; i < tss.rules.size(); ++i) {
    RuleSafetyReport rep = format_stability(fmt) ? check_rsbb_safe(tss.rules[i], aleph, lambda)
                                                 : check_rbb_safe(tss.rules[i], aleph, lambda);
    if (!rep.pass) {
      all = false;
      v.rule_reports.emplace(i, std::move(rep));
    }
  }
  v.pass = all;
  return v;
}

}  // namespace detail

// Format check. With explicit predicates, checks them; otherwise searches.
// The search space is pruned by two forced constraints: Gamma = Aleph and
// Lambda intersected must equal exactly the argument positions that have
// patience rules (patience plus conditions 1 and 3 force both inclusions),
// and condition 1 forces Lambda-liquidity of every position on the path to a
// premise right-hand-side occurrence in a target.
inline FormatVerdict check_format(const Tss& tss, Format fmt,
                                  const std::optional<ArgPredicate>& aleph_opt = std::nullopt,
                                  const std::optional<ArgPredicate>& lambda_opt = std::nullopt,
                                  size_t search_cap = 1 << 16) {
  if (aleph_opt && lambda_opt) return detail::check_format_with(tss, fmt, *aleph_opt, *lambda_opt);

  ReadySimReport rs = check_ready_simulation(tss);
  if (!rs.pass) {
    FormatVerdict v;
    for (const auto& [idx, why] : rs.violations)
      v.reasons.push_back("rule " + std::to_string(idx) + ": " + why);
    return v;
  }

  ArgPredicate gamma = patience_positions(tss);

  // Condition 1 forces Lambda at every position along the path of each
  // premise right-hand side occurrence in a rule target.
  ArgPredicate lambda_forced = gamma;
  for (const auto& r : tss.rules) {
    if (!r.standard()) continue;
    for (const auto& p : r.premises) {
      if (!p.positive) continue;
      ArgPredicate universal = ArgPredicate::universal(tss.signature);
      for (const auto& path : liquid_occurrences(universal, p.target.head(), r.target()).liquid) {
        const Term* at = &r.target();
        for (int step : path) {
          lambda_forced.add(at->head(), step);
          at = &at->args()[step - 1];
        }
      }
    }
  }

  // Enumerate candidate positions not already decided.
  std::vector<std::pair<std::string, int>> all_pos;
  for (const auto& [name, sym] : tss.signature.symbols())
    for (int i = 1; i <= sym.arity; ++i) all_pos.emplace_back(name, i);

  std::vector<std::pair<std::string, int>> lambda_free, aleph_free;
  for (const auto& pos : all_pos) {
    bool in_gamma = gamma.liquid(pos.first, pos.second);
    if (!in_gamma && !lambda_forced.liquid(pos.first, pos.second)) lambda_free.push_back(pos);
    if (!in_gamma) aleph_free.push_back(pos);
  }
  if (!format_rooted(fmt)) lambda_free.clear();  // Lambda is universal

  size_t combos = 1;
  for (size_t i = 0; i < lambda_free.size() + aleph_free.size(); ++i) {
    combos *= 2;
    if (combos > search_cap) {
      FormatVerdict v;
      v.search_aborted = true;
      v.reasons.push_back("predicate search space exceeds cap");
      return v;
    }
  }

  FormatVerdict last;
  for (size_t lm = 0; lm < (size_t{1} << lambda_free.size()); ++lm) {
    for (size_t am = 0; am < (size_t{1} << aleph_free.size()); ++am) {
      ArgPredicate lambda = format_rooted(fmt) ? lambda_forced
                                               : ArgPredicate::universal(tss.signature);
      for (size_t i = 0; i < lambda_free.size(); ++i)
        if (lm & (size_t{1} << i)) lambda.add(lambda_free[i].first, lambda_free[i].second);
      ArgPredicate aleph = gamma;
      for (size_t i = 0; i < aleph_free.size(); ++i)
        if (am & (size_t{1} << i)) aleph.add(aleph_free[i].first, aleph_free[i].second);
      // Keep Gamma = the forced patience positions exactly: an
      // Aleph-and-Lambda-liquid position without a patience rule cannot
      // satisfy the patience requirement.
      if (!(ArgPredicate::intersect(aleph, lambda) == gamma)) continue;
      FormatVerdict v = detail::check_format_with(tss, fmt, aleph, lambda);
      if (v.pass) return v;
      last = std::move(v);
    }
  }
  if (last.reasons.empty() && last.rule_reports.empty())
    last.reasons.push_back("no admissible predicate assignment exists");
  last.reasons.push_back("search exhausted all candidate predicates");
  return last;
}

}  // namespace sosforge
