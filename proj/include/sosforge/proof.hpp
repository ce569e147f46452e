#pragma once

// Well-supported provability over a bounded closed-term universe, computed
// as the alternating (well-founded semantics) fixpoint, plus LTS generation
// from complete specifications.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sosforge/lts.hpp"
#include "sosforge/term.hpp"
#include "sosforge/tss.hpp"

namespace sosforge {

struct GroundFact {
  Term src;
  std::string label;
  Term dst;
  friend bool operator<(const GroundFact& a, const GroundFact& b) {
    if (int c = a.src.compare(b.src); c != 0) return c < 0;
    if (int c = a.label.compare(b.label); c != 0) return c < 0;
    return a.dst.compare(b.dst) < 0;
  }
  friend bool operator==(const GroundFact& a, const GroundFact& b) {
    return a.src == b.src && a.label == b.label && a.dst == b.dst;
  }
};

using FactSet = std::set<GroundFact>;

namespace detail {

inline bool has_fact(const FactSet& facts, const Term& src, const std::string& label) {
  auto it = facts.lower_bound(GroundFact{src, label, Term::var("")});
  return it != facts.end() && it->src == src && it->label == label;
}

// Orders premises so that the variables of every premise source are bound by
// the rule source or by right-hand sides of earlier positive premises. Rules
// with lookahead need this; decent rules are unaffected.
inline std::vector<Literal> dependency_order(const Rule& r) {
  std::set<std::string> bound = variables(r.source());
  std::vector<Literal> pending = r.premises;
  std::vector<Literal> ordered;
  while (!pending.empty()) {
    bool progressed = false;
    for (auto it = pending.begin(); it != pending.end();) {
      std::set<std::string> need = variables(it->source);
      bool ready = true;
      for (const auto& v : need)
        if (!bound.count(v)) ready = false;
      if (ready) {
        if (it->positive) bound.insert(it->target.head());
        ordered.push_back(*it);
        it = pending.erase(it);
        progressed = true;
      } else {
        ++it;
      }
    }
    if (!progressed)
      throw StructuralError("rule premises cannot be ordered: unbound variables in " +
                            pending.front().str());
  }
  return ordered;
}

}  // namespace detail

// The three-valued truth assignment produced by the alternating fixpoint:
// certain facts, possible facts, and the flags raised on the way.
struct TruthAssignment {
  FactSet certain;    // ws-provable positive literals
  FactSet possible;   // not refutable; ambiguous = possible \ certain
  bool universe_escape = false;  // some rule instance left the universe

  bool pos_true(const Term& p, const std::string& label, const Term& q) const {
    return certain.count(GroundFact{p, label, q}) != 0;
  }
  bool neg_true(const Term& p, const std::string& label) const {
    return !detail::has_fact(possible, p, label);
  }
  std::vector<std::pair<Term, std::string>> ambiguous_literals(
      const std::set<Term>& universe, const std::set<std::string>& labels) const {
    std::vector<std::pair<Term, std::string>> out;
    for (const auto& p : universe)
      for (const auto& a : labels)
        if (!detail::has_fact(certain, p, a) && detail::has_fact(possible, p, a))
          out.emplace_back(p, a);
    return out;
  }
};

namespace detail {

// One positive-program fixpoint: derive facts treating a negative premise
// (w -g-/>) as satisfied iff `refuted` has no (w, g, _) member. Instances
// whose premise sources or conclusion targets fall outside the universe are
// inapplicable and raise the escape flag.
inline FactSet positive_fixpoint(const Tss& tss, const std::set<Term>& universe,
                                 const FactSet& refuted_against, bool* escape) {
  FactSet facts;
  std::vector<std::pair<Rule, std::vector<Literal>>> rules;
  for (const auto& r : tss.rules) {
    if (!r.standard()) continue;
    rules.emplace_back(r, dependency_order(r));
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [rule, ordered] : rules) {
      for (const auto& p : universe) {
        auto seed = match(rule.source(), p);
        if (!seed) continue;
        std::vector<Substitution> partial{*seed};
        for (const auto& prem : ordered) {
          std::vector<Substitution> next;
          for (const auto& sub : partial) {
            Term src = sub.apply(prem.source);
            if (!src.closed()) continue;
            if (!universe.count(src)) {
              if (escape) *escape = true;
              continue;
            }
            if (prem.positive) {
              for (const auto& f : facts) {
                if (!(f.src == src) || f.label != prem.label) continue;
                Substitution ext = sub;
                ext.bind(prem.target.head(), f.dst);
                next.push_back(std::move(ext));
              }
            } else {
              if (!has_fact(refuted_against, src, prem.label)) next.push_back(sub);
            }
          }
          partial = std::move(next);
          if (partial.empty()) break;
        }
        for (const auto& sub : partial) {
          Term dst = sub.apply(rule.target());
          if (!dst.closed())
            throw StructuralError("rule instance has unbound target: " + rule.str());
          if (!universe.count(dst)) {
            if (escape) *escape = true;
            continue;
          }
          if (facts.insert(GroundFact{p, rule.conclusion.label, dst}).second) changed = true;
        }
      }
    }
  }
  return facts;
}

}  // namespace detail

// The alternating fixpoint: certain facts are derived against the complement
// of an over-approximation, possible facts against the complement of the
// certain set, iterated until both stabilize. A positive literal is true iff
// it ends up certain; a negative literal p -a-/> is true iff no (p, a, _)
// remains possible.
inline TruthAssignment well_founded_model(const Tss& tss, const std::set<Term>& universe) {
  TruthAssignment out;
  FactSet certain;
  // Initial over-approximation: refuting against the empty set makes every
  // negative premise hold, so this derives everything possibly derivable.
  FactSet possible = detail::positive_fixpoint(tss, universe, {}, &out.universe_escape);
  for (;;) {
    FactSet next_certain =
        detail::positive_fixpoint(tss, universe, possible, &out.universe_escape);
    FactSet next_possible =
        detail::positive_fixpoint(tss, universe, next_certain, &out.universe_escape);
    if (next_certain == certain && next_possible == possible) break;
    certain = std::move(next_certain);
    possible = std::move(next_possible);
  }
  out.certain = std::move(certain);
  out.possible = std::move(possible);
  return out;
}

// ---------------------------------------------------------------------------
// Proof witnesses. A well-founded tree whose non-hypothesis nodes are closed
// substitution instances of rules with their children as the instantiated
// premises; negative literals appear as leaves marked "hypothesis" and are
// justified by the model (their denials are refuted).

struct ProofTree {
  Literal literal;
  bool hypothesis = false;
  std::vector<ProofTree> children;
};

namespace detail {

// Derivation rounds of the certain facts: a fact of round k has a rule
// instance whose positive premises are settled in strictly earlier rounds
// and whose negative premises hold in the model. Guarantees well-founded
// reconstruction.
inline std::map<GroundFact, int> derivation_rounds(const Tss& tss, const std::set<Term>& universe,
                                                   const TruthAssignment& model) {
  std::map<GroundFact, int> round;
  int k = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    ++k;
    for (const auto& rule : tss.rules) {
      if (!rule.standard()) continue;
      auto ordered = dependency_order(rule);
      for (const auto& p : universe) {
        auto seed = match(rule.source(), p);
        if (!seed) continue;
        std::vector<Substitution> partial{*seed};
        for (const auto& prem : ordered) {
          std::vector<Substitution> next;
          for (const auto& sub : partial) {
            Term src = sub.apply(prem.source);
            if (!src.closed() || !universe.count(src)) continue;
            if (prem.positive) {
              for (const auto& [fact, r] : round) {
                if (!(fact.src == src) || fact.label != prem.label || r >= k) continue;
                Substitution ext = sub;
                ext.bind(prem.target.head(), fact.dst);
                next.push_back(std::move(ext));
              }
            } else if (model.neg_true(src, prem.label)) {
              next.push_back(sub);
            }
          }
          partial = std::move(next);
          if (partial.empty()) break;
        }
        for (const auto& sub : partial) {
          Term dst = sub.apply(rule.target());
          if (!dst.closed() || !universe.count(dst)) continue;
          GroundFact f{p, rule.conclusion.label, dst};
          if (!round.count(f)) {
            round.emplace(f, k);
            changed = true;
          }
        }
      }
    }
  }
  return round;
}

}  // namespace detail

struct ProofReconstructionError : std::runtime_error {
  explicit ProofReconstructionError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline ProofTree reconstruct_rec(const Tss& tss, const std::set<Term>& universe,
                                 const TruthAssignment& model,
                                 const std::map<GroundFact, int>& rounds,
                                 const GroundFact& goal) {
  auto it = rounds.find(goal);
  if (it == rounds.end())
    throw ProofReconstructionError("no derivation for " + goal.src.str() + " -" + goal.label +
                                   "-> " + goal.dst.str());
  int bound = it->second;

  for (const auto& rule : tss.rules) {
    if (!rule.standard() || rule.conclusion.label != goal.label) continue;
    auto seed = match(rule.source(), goal.src);
    if (!seed) continue;
    auto ordered = dependency_order(rule);
    // Extend the substitution premise by premise, keeping only extensions
    // whose positive premises were settled in strictly earlier rounds.
    struct State {
      Substitution sub;
      std::vector<ProofTree> children;
    };
    std::vector<State> partial{{*seed, {}}};
    for (const auto& prem : ordered) {
      std::vector<State> next;
      for (const auto& st : partial) {
        Term src = st.sub.apply(prem.source);
        if (!src.closed() || !universe.count(src)) continue;
        if (prem.positive) {
          for (const auto& [fact, r] : rounds) {
            if (!(fact.src == src) || fact.label != prem.label || r >= bound) continue;
            State ext = st;
            ext.sub.bind(prem.target.head(), fact.dst);
            ext.children.push_back(reconstruct_rec(tss, universe, model, rounds, fact));
            next.push_back(std::move(ext));
          }
        } else if (model.neg_true(src, prem.label)) {
          State ext = st;
          ext.children.push_back(ProofTree{Literal::neg(src, prem.label), true, {}});
          next.push_back(std::move(ext));
        }
      }
      partial = std::move(next);
      if (partial.empty()) break;
    }
    for (const auto& st : partial) {
      if (st.sub.apply(rule.target()) == goal.dst)
        return ProofTree{Literal::pos(goal.src, goal.label, goal.dst), false, st.children};
    }
  }
  throw ProofReconstructionError("no rule instance reconstructs " + goal.src.str() + " -" +
                                 goal.label + "->");
}

}  // namespace detail

// Builds a proof witness for a certain positive fact; replays under the
// rule-instance clause with the model discharging negative leaves.
inline ProofTree reconstruct_proof(const Tss& tss, const std::set<Term>& universe,
                                   const TruthAssignment& model, const GroundFact& goal) {
  auto rounds = detail::derivation_rounds(tss, universe, model);
  return detail::reconstruct_rec(tss, universe, model, rounds, goal);
}

struct CompletenessReport {
  bool complete = true;
  bool universe_escape = false;
  std::vector<std::pair<Term, std::string>> ambiguous;
};

inline CompletenessReport is_complete(const Tss& tss, const std::set<Term>& universe) {
  TruthAssignment model = well_founded_model(tss, universe);
  CompletenessReport rep;
  rep.universe_escape = model.universe_escape;
  rep.ambiguous = model.ambiguous_literals(universe, tss.all_actions());
  rep.complete = rep.ambiguous.empty();
  return rep;
}

// ---------------------------------------------------------------------------
// Universe construction: seeds plus terms reached within `depth` rounds of
// optimistic rule firing (negative premises assumed true while exploring).

struct GroundUniverse {
  std::set<Term> terms;
  bool truncated = false;  // depth cap hit with growth still pending
};

inline GroundUniverse ground_universe(const Tss& tss, const std::vector<Term>& seeds, int depth) {
  GroundUniverse out;
  for (const auto& s : seeds) {
    if (!s.closed()) throw StructuralError("universe seed is not closed: " + s.str());
    out.terms.insert(s);
  }
  std::vector<std::pair<Rule, std::vector<Literal>>> rules;
  for (const auto& r : tss.rules)
    if (r.standard()) rules.emplace_back(r, detail::dependency_order(r));

  for (int round = 0; round < depth + 1; ++round) {
    // Optimistic transition relation over the current universe.
    FactSet facts;
    bool grew_facts = true;
    std::set<Term> found = out.terms;
    while (grew_facts) {
      grew_facts = false;
      for (const auto& [rule, ordered] : rules) {
        for (const auto& p : out.terms) {
          auto seed = match(rule.source(), p);
          if (!seed) continue;
          std::vector<Substitution> partial{*seed};
          for (const auto& prem : ordered) {
            std::vector<Substitution> next;
            for (const auto& sub : partial) {
              Term src = sub.apply(prem.source);
              if (!src.closed()) continue;
              found.insert(src);
              if (prem.positive) {
                for (const auto& f : facts) {
                  if (!(f.src == src) || f.label != prem.label) continue;
                  Substitution ext = sub;
                  ext.bind(prem.target.head(), f.dst);
                  next.push_back(std::move(ext));
                }
              } else {
                next.push_back(sub);  // negatives assumed true while exploring
              }
            }
            partial = std::move(next);
            if (partial.empty()) break;
          }
          for (const auto& sub : partial) {
            Term dst = sub.apply(rule.target());
            if (!dst.closed()) continue;
            found.insert(dst);
            if (out.terms.count(sub.apply(rule.source())) &&
                facts.insert(GroundFact{p, rule.conclusion.label, dst}).second)
              grew_facts = true;
          }
        }
      }
    }
    if (found == out.terms) return out;  // closed, no truncation
    if (round == depth) {
      out.truncated = true;
      return out;
    }
    out.terms = std::move(found);
  }
  return out;
}

// ---------------------------------------------------------------------------
// LTS generation. States are the universe terms in canonical order; state
// names are their pretty-printed forms.

struct IncompleteTssError : std::runtime_error {
  explicit IncompleteTssError(const std::string& what) : std::runtime_error(what) {}
};

struct GeneratedLts {
  Lts lts;
  std::vector<Term> state_terms;
  std::map<Term, int> state_of;
  bool universe_escape = false;

  int state(const Term& t) const {
    auto it = state_of.find(t);
    if (it == state_of.end()) throw StructuralError("term outside generated LTS: " + t.str());
    return it->second;
  }
};

inline GeneratedLts lts_from_model(const Tss& tss, const std::set<Term>& universe,
                                   const TruthAssignment& model,
                                   const std::vector<Term>& seeds) {
  GeneratedLts out;
  out.universe_escape = model.universe_escape;
  out.lts = Lts(static_cast<int>(universe.size()));
  int idx = 0;
  for (const auto& t : universe) {
    out.state_terms.push_back(t);
    out.state_of.emplace(t, idx);
    out.lts.set_name(idx, t.str(tss.signature));
    ++idx;
  }
  out.lts.label_id(kTau);  // keep tau's id stable even in tau-free systems
  for (const auto& f : model.certain)
    out.lts.add_transition(out.state_of.at(f.src), f.label, out.state_of.at(f.dst));
  for (const auto& s : seeds) out.lts.initial_states.push_back(out.state_of.at(s));
  return out;
}

// Generates the LTS associated with a complete TSS, bounded by the universe
// grown from the seeds. Refuses incomplete TSSs; no LTS is associated with
// those.
inline GeneratedLts generate_lts(const Tss& tss, const std::vector<Term>& seeds, int depth) {
  GroundUniverse uni = ground_universe(tss, seeds, depth);
  TruthAssignment model = well_founded_model(tss, uni.terms);
  auto ambiguous = model.ambiguous_literals(uni.terms, tss.all_actions());
  if (!ambiguous.empty()) {
    std::string msg = "incomplete TSS; ambiguous literals:";
    for (const auto& [p, a] : ambiguous) msg += " (" + p.str(tss.signature) + "," + a + ")";
    throw IncompleteTssError(msg);
  }
  GeneratedLts out = lts_from_model(tss, uni.terms, model, seeds);
  out.universe_escape = out.universe_escape || uni.truncated;
  return out;
}

}  // namespace sosforge
