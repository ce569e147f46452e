#pragma once

// The decomposition function t^{-1}(phi): finite sets of decomposition
// mappings assigning a formula to each variable of t such that joint
// satisfaction of the images characterises satisfaction of phi by closed
// instances of t. Includes exhaustive verifiers for the decomposition
// theorem and for class preservation.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "sosforge/formula.hpp"
#include "sosforge/proof.hpp"
#include "sosforge/ruloid.hpp"

namespace sosforge {

struct DecompositionError : std::runtime_error {
  explicit DecompositionError(const std::string& what) : std::runtime_error(what) {}
};

// A finite mapping variable -> formula; T outside the explicit domain.
class DecompositionMapping {
 public:
  Formula at(const std::string& var) const {
    auto it = map_.find(var);
    return it == map_.end() ? Formula::top() : it->second;
  }
  void set(const std::string& var, Formula f) {
    Formula n = normalize(f);
    if (n.is_top()) {
      map_.erase(var);
    } else {
      map_.insert_or_assign(var, std::move(n));
    }
  }
  const std::map<std::string, Formula>& explicit_map() const { return map_; }

  friend bool operator<(const DecompositionMapping& a, const DecompositionMapping& b) {
    auto ia = a.map_.begin();
    auto ib = b.map_.begin();
    for (; ia != a.map_.end() && ib != b.map_.end(); ++ia, ++ib) {
      if (ia->first != ib->first) return ia->first < ib->first;
      if (int c = ia->second.compare(ib->second); c != 0) return c < 0;
    }
    return ib != b.map_.end();
  }
  friend bool operator==(const DecompositionMapping& a, const DecompositionMapping& b) {
    return !(a < b) && !(b < a);
  }

  std::string str() const {
    if (map_.empty()) return "(all T)";
    std::string s;
    for (const auto& [v, f] : map_) {
      if (!s.empty()) s += "; ";
      s += v + " := " + f.str();
    }
    return s;
  }

 private:
  std::map<std::string, Formula> map_;
};

struct DecomposeOptions {
  int ruloid_depth = 8;
  size_t set_cap = 64;        // cap on |t^{-1}(phi)| fed into clause 2
  size_t function_cap = 1 << 16;  // cap on the clause-2 function enumeration
  int eps_guard = 16;         // recursion guard for the <eps>/<that> clauses
};

class Decomposer {
 public:
  Decomposer(const Tss& tss, ArgPredicate gamma, DecomposeOptions opts = {})
      : gamma_(std::move(gamma)), opts_(opts) {
    Tss decent = to_decent_ntyft(tss);
    PatienceReport pat = is_gamma_patient_tss(decent, gamma_);
    if (!pat.patient)
      throw DecompositionError("decomposition requires a Gamma-patient TSS");
    pplus_ = build_p_plus(decent);
  }

  std::vector<DecompositionMapping> decompose(const Term& t, const Formula& phi) {
    if (phi.contains_delta())
      throw DecompositionError("the divergence modality cannot be decomposed");
    return decompose_any(t, normalize(phi), 0);
  }

 private:
  using MappingSet = std::vector<DecompositionMapping>;

  // Mappings with a component that normalizes to ~T can never be jointly
  // satisfied; they arise from clause-2 functions that send a mapping to a
  // variable outside its explicit domain. Dropping them preserves both
  // directions of the decomposition theorem: they are vacuous on the
  // right-to-left side, and the left-to-right side always has a satisfied
  // (hence bottom-free) witness.
  static void dedup(MappingSet& set) {
    set.erase(std::remove_if(set.begin(), set.end(),
                             [](const DecompositionMapping& m) {
                               for (const auto& [v, f] : m.explicit_map())
                                 if (f == Formula::bottom()) return true;
                               return false;
                             }),
              set.end());
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
  }

  // Entry point handling non-univariate terms through clause 6.
  MappingSet decompose_any(const Term& t, const Formula& phi, int guard) {
    std::map<std::string, int> counts;
    std::set<std::string> vars = variables(t);
    bool univariate = true;
    {
      std::vector<std::string> occs;
      count_occurrences(t, occs);
      for (const auto& v : occs)
        if (++counts[v] > 1) univariate = false;
    }
    if (univariate) return decompose_univariate(t, phi, guard);

    // Clause 6: t = sigma(t_u) for a univariate t_u; each occurrence gets a
    // fresh variable.
    std::vector<std::pair<std::string, std::string>> renaming;  // fresh -> original
    Term tu = univariate_copy(t, renaming);
    MappingSet base = decompose_univariate(tu, phi, guard);
    MappingSet out;
    for (const auto& chi : base) {
      DecompositionMapping psi;
      for (const auto& v : vars) {
        std::vector<Formula> parts;
        for (const auto& [fresh, orig] : renaming)
          if (orig == v) parts.push_back(chi.at(fresh));
        psi.set(v, Formula::conj(std::move(parts)));
      }
      out.push_back(std::move(psi));
    }
    dedup(out);
    return out;
  }

  static void count_occurrences(const Term& t, std::vector<std::string>& occs) {
    if (t.is_var()) {
      occs.push_back(t.head());
      return;
    }
    for (const auto& a : t.args()) count_occurrences(a, occs);
  }

  static Term univariate_copy(const Term& t,
                              std::vector<std::pair<std::string, std::string>>& renaming) {
    if (t.is_var()) {
      std::string fresh = fresh_var_name();
      renaming.emplace_back(fresh, t.head());
      return Term::var(fresh);
    }
    std::vector<Term> args;
    for (const auto& a : t.args()) args.push_back(univariate_copy(a, renaming));
    return Term::app(t.head(), std::move(args));
  }

  MappingSet decompose_univariate(const Term& t, const Formula& phi, int guard) {
    // Memoisation on the canonically renamed pair; cycles through the
    // <eps>-clauses are a hard error rather than a silent truncation.
    Substitution to_canon, from_canon;
    int next = 0;
    canon_renaming(t, to_canon, from_canon, next);
    Term tc = to_canon.apply(t);
    std::string key = tc.str() + " | " + phi.str();
    if (auto it = memo_.find(key); it != memo_.end()) return rename_set(*it, from_canon);
    if (in_progress_.count(key) || guard > opts_.eps_guard)
      throw DecompositionError("decomposition recursion guard hit at " + key);
    in_progress_.insert(key);
    MappingSet canon_result = compute(tc, phi, guard);
    in_progress_.erase(key);
    dedup(canon_result);
    auto stored = memo_.emplace(key, std::move(canon_result)).first;
    return rename_set(*stored, from_canon);
  }

  static void canon_renaming(const Term& t, Substitution& to, Substitution& from, int& next) {
    if (t.is_var()) {
      if (!to.bound(t.head())) {
        std::string c = "v" + std::to_string(next++);
        to.bind(t.head(), Term::var(c));
        from.bind(c, Term::var(t.head()));
      }
      return;
    }
    for (const auto& a : t.args()) canon_renaming(a, to, from, next);
  }

  static MappingSet rename_set(const std::pair<const std::string, MappingSet>& stored,
                               const Substitution& from_canon) {
    MappingSet out;
    for (const auto& m : stored.second) {
      DecompositionMapping r;
      for (const auto& [v, f] : m.explicit_map()) {
        const Term* orig = from_canon.lookup(v);
        r.set(orig ? orig->head() : v, f);
      }
      out.push_back(std::move(r));
    }
    return out;
  }

  MappingSet compute(const Term& t, const Formula& phi, int guard) {
    switch (phi.kind()) {
      case FormulaKind::Conj: {
        // Clause 1: pointwise conjunctions of one mapping per conjunct.
        MappingSet acc{DecompositionMapping{}};
        for (const auto& sub : phi.children()) {
          MappingSet subset = decompose_any(t, sub, guard);
          MappingSet next;
          for (const auto& base : acc)
            for (const auto& m : subset) {
              DecompositionMapping merged = base;
              for (const auto& v : variables(t))
                merged.set(v, Formula::conj({base.at(v), m.at(v)}));
              next.push_back(std::move(merged));
            }
          acc = std::move(next);
          dedup(acc);
        }
        return acc;
      }
      case FormulaKind::Neg: {
        // Clause 2: one mapping per function h from t^{-1}(phi') to var(t).
        MappingSet subset = decompose_any(t, phi.child(), guard);
        if (subset.size() > opts_.set_cap)
          throw DecompositionError("clause-2 set size " + std::to_string(subset.size()) +
                                   " exceeds the cap");
        std::vector<std::string> vars;
        for (const auto& v : variables(t)) vars.push_back(v);
        if (vars.empty()) return subset.empty() ? MappingSet{DecompositionMapping{}} : MappingSet{};
        double combos = 1;
        for (size_t i = 0; i < subset.size(); ++i) {
          combos *= static_cast<double>(vars.size());
          if (combos > static_cast<double>(opts_.function_cap))
            throw DecompositionError("clause-2 function enumeration exceeds the cap");
        }
        MappingSet out;
        std::vector<size_t> h(subset.size(), 0);
        for (;;) {
          DecompositionMapping psi;
          for (const auto& v : vars) {
            std::vector<Formula> parts;
            for (size_t i = 0; i < subset.size(); ++i)
              if (vars[h[i]] == v) parts.push_back(Formula::neg(subset[i].at(v)));
            psi.set(v, Formula::conj(std::move(parts)));
          }
          out.push_back(std::move(psi));
          size_t k = 0;
          while (k < h.size() && ++h[k] == vars.size()) h[k++] = 0;
          if (k == h.size() || h.empty()) break;
        }
        dedup(out);
        return out;
      }
      case FormulaKind::Diam: {
        // Clause 3.
        MappingSet out;
        for (const auto& [ruloid, chi] : ruloid_choices(t, phi.action(), phi.child(), guard))
          out.push_back(clause3_mapping(t, ruloid, chi, /*wrap_eps=*/false));
        dedup(out);
        return out;
      }
      case FormulaKind::EpsDiam: {
        MappingSet out;
        // Clause 4a.
        for (const auto& chi : decompose_any(t, phi.child(), guard)) {
          DecompositionMapping psi;
          for (const auto& v : variables(t))
            psi.set(v, occurs_liquid(gamma_, v, t) ? Formula::eps(chi.at(v)) : chi.at(v));
          out.push_back(std::move(psi));
        }
        // Clause 4b: Gamma-impatient tau-ruloids, recursing on <eps>phi'.
        for (const auto& [ruloid, chi] : impatient_tau_choices(t, phi, guard + 1))
          out.push_back(clause3_mapping(t, ruloid, chi, /*wrap_eps=*/true));
        dedup(out);
        return out;
      }
      case FormulaKind::TauHatDiam: {
        MappingSet out;
        // Clause 5a.
        for (const auto& m : decompose_any(t, phi.child(), guard)) out.push_back(m);
        // Clause 5b.
        for (const auto& x0 : variables(t)) {
          if (!occurs_liquid(gamma_, x0, t)) continue;
          for (const auto& chi : decompose_any(t, phi.child(), guard)) {
            DecompositionMapping psi = chi;
            psi.set(x0, Formula::tauhat(chi.at(x0)));
            out.push_back(std::move(psi));
          }
        }
        // Clause 5c: Gamma-impatient tau-ruloids on the plain child.
        for (const auto& [ruloid, chi] : impatient_tau_choices(t, phi.child(), guard + 1))
          out.push_back(clause3_mapping(t, ruloid, chi, /*wrap_eps=*/false));
        dedup(out);
        return out;
      }
      case FormulaKind::Delta:
        throw DecompositionError("the divergence modality cannot be decomposed");
    }
    return {};
  }

  // Pairs (ruloid, chi) for clause 3: ruloids t -alpha-> u and mappings in
  // u^{-1}(phi').
  std::vector<std::pair<Rule, DecompositionMapping>> ruloid_choices(const Term& t,
                                                                    const std::string& alpha,
                                                                    const Formula& sub,
                                                                    int guard) {
    RuloidSet rs = ruloids(pplus_, t, alpha, true, opts_.ruloid_depth);
    if (!rs.complete)
      throw DecompositionError("ruloid enumeration incomplete for " + t.str());
    std::vector<std::pair<Rule, DecompositionMapping>> out;
    for (const auto& r : rs.ruloids)
      for (const auto& chi : decompose_any(r.target(), sub, guard))
        out.emplace_back(r, chi);
    return out;
  }

  std::vector<std::pair<Rule, DecompositionMapping>> impatient_tau_choices(const Term& t,
                                                                           const Formula& sub,
                                                                           int guard) {
    RuloidSet rs = ruloids(pplus_, t, kTau, true, opts_.ruloid_depth);
    if (!rs.complete)
      throw DecompositionError("ruloid enumeration incomplete for " + t.str());
    std::vector<std::pair<Rule, DecompositionMapping>> out;
    for (const auto& r : rs.ruloids) {
      if (is_gamma_patient_rule(r, gamma_)) continue;
      for (const auto& chi : decompose_any(r.target(), sub, guard))
        out.emplace_back(r, chi);
    }
    return out;
  }

  // The shared formula shape of clauses 3, 4b and 5c: chi at the variable,
  // diamonds for its positive premises, negated diamonds for its negative
  // premises; under 4b the whole conjunction sits under <eps> for liquid
  // occurrences.
  DecompositionMapping clause3_mapping(const Term& t, const Rule& ruloid,
                                       const DecompositionMapping& chi, bool wrap_eps) {
    DecompositionMapping psi;
    for (const auto& v : variables(t)) {
      std::vector<Formula> parts{chi.at(v)};
      for (const auto& p : ruloid.premises) {
        if (!(p.source == Term::var(v))) continue;
        if (p.positive)
          parts.push_back(Formula::diam(p.label, chi.at(p.target.head())));
        else
          parts.push_back(Formula::neg(Formula::diam(p.label, Formula::top())));
      }
      Formula body = Formula::conj(std::move(parts));
      if (wrap_eps && occurs_liquid(gamma_, v, t)) body = Formula::eps(body);
      psi.set(v, body);
    }
    return psi;
  }

  ArgPredicate gamma_;
  DecomposeOptions opts_;
  Tss pplus_;
  std::map<std::string, MappingSet> memo_;
  std::set<std::string> in_progress_;
};

// ---------------------------------------------------------------------------
// Exhaustive verification of the decomposition theorem over a finite
// universe of closed terms: for every substitution rho into the universe,
//   rho(t) |= phi  iff  some psi in t^{-1}(phi) has rho(x) |= psi(x) for all x.

struct DecompositionCounterexample {
  Substitution rho;
  bool lhs = false;  // rho(t) |= phi
  std::string detail;
};

struct DecompositionTheoremReport {
  bool ok = true;
  size_t substitutions_checked = 0;
  std::vector<DecompositionCounterexample> counterexamples;
};

inline DecompositionTheoremReport verify_decomposition_theorem(
    const Tss& tss, const ArgPredicate& gamma, const Term& t, const Formula& phi,
    const std::vector<Term>& universe, int depth = 8, DecomposeOptions opts = {}) {
  Decomposer dec(tss, gamma, opts);
  std::vector<DecompositionMapping> mappings = dec.decompose(t, phi);

  std::vector<std::string> vars;
  for (const auto& v : variables(t)) vars.push_back(v);
  std::vector<Term> seeds = universe;
  std::vector<Substitution> rhos;
  std::vector<size_t> idx(vars.size(), 0);
  for (;;) {
    Substitution rho;
    for (size_t i = 0; i < vars.size(); ++i) rho.bind(vars[i], universe[idx[i]]);
    rhos.push_back(rho);
    seeds.push_back(rho.apply(t));
    size_t k = 0;
    while (k < idx.size() && ++idx[k] == universe.size()) idx[k++] = 0;
    if (k == idx.size() || idx.empty()) break;
  }

  GeneratedLts g = generate_lts(tss, seeds, depth);
  if (g.universe_escape)
    throw DecompositionError("verification universe is not transition-closed");
  ModelChecker mc(g.lts);

  DecompositionTheoremReport rep;
  for (const auto& rho : rhos) {
    ++rep.substitutions_checked;
    bool lhs = mc.satisfies(g.state(rho.apply(t)), phi);
    bool rhs = false;
    for (const auto& psi : mappings) {
      bool all = true;
      for (const auto& v : vars)
        if (!mc.satisfies(g.state(rho.apply(Term::var(v))), psi.at(v))) all = false;
      if (all) rhs = true;
    }
    if (lhs != rhs) {
      rep.ok = false;
      std::string d = "rho = {";
      for (const auto& v : vars) d += v + " -> " + rho.apply(Term::var(v)).str() + " ";
      d += "}";
      rep.counterexamples.push_back({rho, lhs, d});
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Class preservation: the three claims relating the class of phi to the
// class of every psi(x).

struct ClassPreservationViolation {
  int claim = 0;
  std::string variable;
  Formula phi;
  Formula psi_x;
};

struct ClassPreservationReport {
  bool ok = true;
  size_t checked = 0;
  std::vector<ClassPreservationViolation> violations;
};

inline ClassPreservationReport verify_class_preservation(const Tss& tss,
                                                         const ArgPredicate& aleph,
                                                         const ArgPredicate& lambda,
                                                         const Term& t, const Formula& phi,
                                                         DecomposeOptions opts = {}) {
  ArgPredicate gamma = ArgPredicate::intersect(aleph, lambda);
  Decomposer dec(tss, gamma, opts);
  std::vector<DecompositionMapping> mappings = dec.decompose(t, phi);
  ClassPreservationReport rep;

  bool phi_obs = class_membership(phi, FormulaClass::Obs);
  bool phi_orbs = class_membership(phi, FormulaClass::Orbs);
  for (const auto& psi : mappings) {
    for (const auto& x : variables(t)) {
      Formula img = normalize(psi.at(x));
      bool only_lambda = occurs_only_liquid(lambda, x, t);
      bool aleph_frozen = occurs_only_frozen(aleph, x, t);
      // Claim 1: phi in Obs, x only Lambda-liquid in t -> psi(x) in Obs.
      if (phi_obs && only_lambda) {
        ++rep.checked;
        if (!class_membership(img, FormulaClass::Obs)) {
          rep.ok = false;
          rep.violations.push_back({1, x, phi, img});
        }
      }
      // Claim 2: phi in Orbs -> psi(x) in Orbs, for every x.
      if (phi_orbs) {
        ++rep.checked;
        if (!class_membership(img, FormulaClass::Orbs)) {
          rep.ok = false;
          rep.violations.push_back({2, x, phi, img});
        }
      }
      // Claim 3: phi in Orbs, x only Lambda-liquid and Aleph-frozen in t ->
      // psi(x) in Obs.
      if (phi_orbs && only_lambda && aleph_frozen) {
        ++rep.checked;
        if (!class_membership(img, FormulaClass::Obs)) {
          rep.ok = false;
          rep.violations.push_back({3, x, phi, img});
        }
      }
    }
  }
  return rep;
}

}  // namespace sosforge
