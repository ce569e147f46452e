#pragma once

// The abstraction-free-oracle conversion: rewrites a TSS so that only
// patience rules (and premise-free rules between constants) conclude with
// tau, freezes every closed term of a finite universe into a fresh constant
// with oracle transitions exposing semantic information, and decodes the
// transformed processes back through the LTS K. Together these lift a
// congruence format for a stability-respecting semantics to its
// divergence-preserving counterparts.

#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "sosforge/decompose.hpp"
#include "sosforge/equiv.hpp"
#include "sosforge/format.hpp"
#include "sosforge/proof.hpp"
#include "sosforge/tss.hpp"

namespace sosforge {

inline const std::string kTick = "_tick";
inline const std::string kDivergenceOracle = "@dT";

enum class OracleKind { divergence, class_naming };

struct OracleSpec {
  OracleKind kind = OracleKind::divergence;
  std::set<std::string> labels;       // O; disjoint from A_tau and iota
  std::map<Term, std::string> zeta;   // partial map universe term -> label
};

struct AfoError : std::runtime_error {
  explicit AfoError(const std::string& what) : std::runtime_error(what) {}
};

struct AfoResult {
  Tss transformed;
  ArgPredicate gamma;
  OracleSpec oracle;
  std::vector<Term> universe;     // canonical order; index i names hat i
  std::map<Term, Term> hat_of;    // p -> the constant p-hat
  std::map<Term, Term> unhat;     // p-hat -> p
  Lts g;                          // disjoint copy of the LTS generated by P
  Lts h;                          // g plus oracle transitions into the tick state
  int h_tick_state = -1;
  std::map<Term, int> hat_state;  // hat constant -> state of g/h
};

namespace detail {

inline std::string hat_name(size_t index) { return "_hat" + std::to_string(index); }

}  // namespace detail

// The divergence oracle marks divergent states with a single fresh label;
// the class-naming oracle gives every divergence-preserving equivalence
// class of the generated LTS a unique name. Labels and the partial map zeta
// are filled in by afo_transform once the universe LTS is known.
inline OracleSpec make_oracle(OracleKind kind) {
  OracleSpec spec;
  spec.kind = kind;
  if (kind == OracleKind::divergence) spec.labels.insert(kDivergenceOracle);
  return spec;
}

// The conversion. P must be a complete standard TSS in decent ntyft format
// and Gamma-patient; steps 4 and 5 range over the supplied finite universe
// (closed under the transitions they mention) rather than all closed terms.
inline AfoResult afo_transform(const Tss& tss, const ArgPredicate& gamma, OracleKind kind,
                               const std::vector<Term>& universe, int depth = 8) {
  for (const auto& r : tss.rules) {
    RuleClass c = classify_rule(r);
    if (!r.standard() || !c.ntyft || !c.decent)
      throw AfoError("afo_transform requires a standard TSS in decent ntyft format");
  }
  if (!is_gamma_patient_tss(tss, gamma).patient)
    throw AfoError("afo_transform requires a Gamma-patient TSS");

  AfoResult out;
  out.gamma = gamma;

  // The LTS generated by P over the universe; also the completeness gate.
  GeneratedLts gen = generate_lts(tss, universe, depth);
  if (gen.universe_escape)
    throw AfoError("universe is not closed under the transitions it generates");
  out.universe = gen.state_terms;

  // G: the disjoint hat-copy of the generated LTS.
  out.g = Lts(static_cast<int>(out.universe.size()));
  for (size_t i = 0; i < out.universe.size(); ++i) {
    out.g.set_name(static_cast<int>(i), detail::hat_name(i));
    Term hat = Term::constant(detail::hat_name(i));
    out.hat_of.emplace(out.universe[i], hat);
    out.unhat.emplace(hat, out.universe[i]);
    out.hat_state.emplace(hat, static_cast<int>(i));
  }
  for (const auto& tr : gen.lts.transitions())
    out.g.add_transition(tr.src, gen.lts.label(tr.label), tr.dst);
  out.g.label_id(kTau);

  // The oracle.
  out.oracle = make_oracle(kind);
  if (kind == OracleKind::divergence) {
    std::set<int> div = out.g.divergent_states();
    for (int s : div) out.oracle.zeta.emplace(out.universe[s], kDivergenceOracle);
  } else {
    Partition classes = coarsest(out.g, EquivKind::db);
    for (size_t i = 0; i < out.universe.size(); ++i) {
      std::string label = "@c" + std::to_string(classes.block[i]);
      out.oracle.labels.insert(label);
      out.oracle.zeta.emplace(out.universe[i], label);
    }
  }

  // H: G extended with the oracle transitions into the fresh tick state.
  out.h = out.g;
  out.h_tick_state = out.h.add_state(kTick);
  for (size_t i = 0; i < out.universe.size(); ++i) {
    auto it = out.oracle.zeta.find(out.universe[i]);
    if (it != out.oracle.zeta.end())
      out.h.add_transition(static_cast<int>(i), it->second, out.h_tick_state);
  }

  // The transformed TSS over the enriched signature.
  Tss& t = out.transformed;
  t.signature = tss.signature;
  t.actions = tss.actions;
  t.extra_actions = tss.extra_actions;
  t.extra_actions.insert(kIota);
  for (const auto& o : out.oracle.labels) t.extra_actions.insert(o);
  t.lambda = tss.lambda;
  t.aleph = tss.aleph;
  t.signature.add({kTick, 0, false});
  for (size_t i = 0; i < out.universe.size(); ++i) t.signature.add({detail::hat_name(i), 0, false});

  // Step 1: for each nonempty subset S of positive tau-premises, a copy with
  // the premise labels in S renamed to iota.
  std::vector<Rule> r1;
  for (const auto& r : tss.rules) {
    r1.push_back(r);
    std::vector<size_t> tau_premises;
    for (size_t i = 0; i < r.premises.size(); ++i)
      if (r.premises[i].positive && r.premises[i].label == kTau) tau_premises.push_back(i);
    for (size_t mask = 1; mask < (size_t{1} << tau_premises.size()); ++mask) {
      std::vector<Literal> prem = r.premises;
      for (size_t b = 0; b < tau_premises.size(); ++b)
        if (mask & (size_t{1} << b)) prem[tau_premises[b]].label = kIota;
      r1.emplace_back(std::move(prem), r.conclusion);
    }
  }
  // Step 2: tau-conclusions of non-patience rules become iota.
  std::vector<Rule> r2;
  for (auto r : r1) {
    if (r.conclusion.label == kTau && !is_patience_rule(r, gamma)) r.conclusion.label = kIota;
    r2.push_back(std::move(r));
  }
  // Step 3: each negative tau-premise gains an iota companion.
  std::vector<Rule> r3;
  for (const auto& r : r2) {
    std::vector<Literal> prem = r.premises;
    for (const auto& p : r.premises)
      if (!p.positive && p.label == kTau) prem.push_back(Literal::neg(p.source, kIota));
    r3.emplace_back(std::move(prem), r.conclusion);
  }
  t.rules = std::move(r3);
  // Step 4: the transitions of the universe, frozen between hat constants.
  for (const auto& tr : gen.lts.transitions())
    t.rules.emplace_back(std::vector<Literal>{},
                         Literal::pos(out.hat_of.at(out.universe[tr.src]),
                                      gen.lts.label(tr.label),
                                      out.hat_of.at(out.universe[tr.dst])));
  // Step 5: oracle transitions.
  for (const auto& [p, omega] : out.oracle.zeta)
    t.rules.emplace_back(std::vector<Literal>{},
                         Literal::pos(out.hat_of.at(p), omega, Term::constant(kTick)));
  // Step 6: oracle inheritance through Gamma-liquid arguments.
  for (const auto& [fname, sym] : tss.signature.symbols()) {
    for (int k = 1; k <= sym.arity; ++k) {
      if (!gamma.liquid(fname, k)) continue;
      for (const auto& omega : out.oracle.labels) {
        std::vector<Term> args;
        for (int i = 0; i < sym.arity; ++i) args.push_back(Term::var("x" + std::to_string(i + 1)));
        Term y = Term::var("y");
        std::vector<Literal> prem{Literal::pos(args[k - 1], omega, y)};
        t.rules.emplace_back(std::move(prem), Literal::pos(Term::app(fname, args), omega, y));
      }
    }
  }
  t.sort_rules();
  return out;
}

// Abstraction-freeness w.r.t. Gamma in the relaxed sense: every rule whose
// conclusion carries tau is a Gamma-patience rule, or premise-free with
// constant source and target.
inline bool is_abstraction_free(const Tss& tss, const ArgPredicate& gamma) {
  for (const auto& r : tss.rules) {
    if (!r.standard() || r.conclusion.label != kTau) continue;
    if (is_patience_rule(r, gamma)) continue;
    bool constant_axiom = r.premises.empty() && r.source().is_app() &&
                          r.source().args().empty() && r.target().is_app() &&
                          r.target().args().empty();
    if (!constant_axiom) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// The decoding K: erase oracle transitions and rename iota back to tau.

struct DecLts {
  Lts lts;
  std::map<Term, int> state_of;  // AFO-terms to dec(...) states

  int state(const Term& t) const {
    auto it = state_of.find(t);
    if (it == state_of.end()) throw StructuralError("term outside K: " + t.str());
    return it->second;
  }
};

inline DecLts dec_lts(const AfoResult& afo, const std::vector<Term>& seeds, int depth = 8) {
  GeneratedLts gen = generate_lts(afo.transformed, seeds, depth);
  if (gen.universe_escape) throw AfoError("dec universe is not transition-closed");
  DecLts out;
  out.lts = Lts(gen.lts.n_states());
  for (int s = 0; s < gen.lts.n_states(); ++s)
    out.lts.set_name(s, "dec(" + gen.lts.name(s) + ")");
  out.lts.label_id(kTau);
  for (const auto& tr : gen.lts.transitions()) {
    const std::string& label = gen.lts.label(tr.label);
    if (is_oracle_label(label)) continue;
    out.lts.add_transition(tr.src, label == kIota ? kTau : label, tr.dst);
  }
  out.state_of = gen.state_of;
  out.lts.initial_states = gen.lts.initial_states;
  return out;
}

// The intermediate TSS G(P): only step 4 applied, for comparing provability
// in P, G(P) and AFO(P) literal by literal.
inline Tss g_intermediate_tss(const Tss& tss, const std::vector<Term>& universe, int depth = 8) {
  GeneratedLts gen = generate_lts(tss, universe, depth);
  if (gen.universe_escape) throw AfoError("universe is not transition-closed");
  Tss out = tss;
  out.signature.add({kTick, 0, false});
  for (size_t i = 0; i < gen.state_terms.size(); ++i)
    out.signature.add({detail::hat_name(i), 0, false});
  for (const auto& tr : gen.lts.transitions())
    out.rules.emplace_back(std::vector<Literal>{},
                           Literal::pos(Term::constant(detail::hat_name(tr.src)),
                                        gen.lts.label(tr.label),
                                        Term::constant(detail::hat_name(tr.dst))));
  out.sort_rules();
  return out;
}

// ---------------------------------------------------------------------------
// The lifting harness: the six requirements, checked computationally on
// generated finite fragments for one of the four kind pairs.

struct KindPair {
  EquivKind fine;    // wdb, rwdb, db or rdb
  EquivKind coarse;  // sb or rsb
  Format format;     // sbb or rsbb
  OracleKind oracle;
};

inline std::optional<KindPair> kind_pair_for(EquivKind fine) {
  switch (fine) {
    case EquivKind::wdb: return KindPair{fine, EquivKind::sb, Format::sbb, OracleKind::divergence};
    case EquivKind::rwdb:
      return KindPair{fine, EquivKind::rsb, Format::rsbb, OracleKind::divergence};
    case EquivKind::db: return KindPair{fine, EquivKind::sb, Format::sbb, OracleKind::class_naming};
    case EquivKind::rdb:
      return KindPair{fine, EquivKind::rsb, Format::rsbb, OracleKind::class_naming};
    default: return std::nullopt;
  }
}

struct AfoRequirementsReport {
  bool pass = true;
  std::map<int, std::string> failures;  // requirement number -> detail
  AfoResult afo;

  void fail(int req, const std::string& why) {
    pass = false;
    failures.emplace(req, why);
  }
};

namespace detail {

// All operator images f(h1,...,hn) with arguments drawn from `args`, for
// every non-constant symbol of the signature, capped deterministically.
inline std::vector<Term> operator_images(const Signature& sig, const std::vector<Term>& args,
                                         size_t cap = 128) {
  std::vector<Term> out;
  for (const auto& [fname, sym] : sig.symbols()) {
    if (sym.arity == 0) continue;
    std::vector<size_t> idx(sym.arity, 0);
    for (;;) {
      std::vector<Term> tuple;
      for (int i = 0; i < sym.arity; ++i) tuple.push_back(args[idx[i]]);
      out.push_back(Term::app(fname, tuple));
      if (out.size() >= cap) return out;
      size_t k = 0;
      while (k < idx.size() && ++idx[k] == args.size()) idx[k++] = 0;
      if (k == idx.size()) break;
    }
  }
  return out;
}

}  // namespace detail

inline AfoRequirementsReport verify_afo_requirements(const Tss& tss, EquivKind fine,
                                                     const std::vector<Term>& universe,
                                                     int depth = 8) {
  auto pair = kind_pair_for(fine);
  if (!pair) throw AfoError("no kind pair defined for this equivalence");
  AfoRequirementsReport rep;
  ArgPredicate gamma = patience_positions(tss);
  rep.afo = afo_transform(tss, gamma, pair->oracle, universe, depth);
  const AfoResult& afo = rep.afo;

  // The fragment of T(Sigma-hat) everything is checked on: the hat
  // constants, the tick, and all operator images of hats.
  std::vector<Term> hats;
  for (const auto& p : afo.universe) hats.push_back(afo.hat_of.at(p));
  std::vector<Term> images = detail::operator_images(tss.signature, hats);
  std::vector<Term> fragment_seeds = hats;
  fragment_seeds.push_back(Term::constant(kTick));
  fragment_seeds.insert(fragment_seeds.end(), images.begin(), images.end());

  // Requirement 1: AFO(P) is a complete standard TSS.
  GroundUniverse afo_uni = ground_universe(afo.transformed, fragment_seeds, depth);
  if (afo_uni.truncated) throw AfoError("AFO fragment is not transition-closed");
  CompletenessReport comp = is_complete(afo.transformed, afo_uni.terms);
  if (!comp.complete) rep.fail(1, "transformed TSS incomplete on the fragment");
  if (!is_abstraction_free(afo.transformed, gamma))
    rep.fail(1, "transformed TSS is not abstraction-free");

  // Requirement 2: if P is in the format, then so is AFO(P). Vacuous for
  // specifications outside the format.
  if (check_format(tss, pair->format).pass) {
    FormatVerdict fmt = check_format(afo.transformed, pair->format);
    if (!fmt.pass) rep.fail(2, "transformed TSS leaves the format");
  }

  // The generated AFO fragment LTS and its two partitions.
  GeneratedLts afo_lts = lts_from_model(
      afo.transformed, afo_uni.terms, well_founded_model(afo.transformed, afo_uni.terms),
      fragment_seeds);
  Partition fine_afo = coarsest(afo_lts.lts, fine);
  Partition coarse_afo = coarsest(afo_lts.lts, pair->coarse);

  // Requirement 3: p ~ q in P implies hat p ~ hat q in AFO(P).
  Partition fine_p = coarsest(afo.g, fine);  // g is the hat copy of P's LTS
  for (size_t i = 0; i < afo.universe.size(); ++i)
    for (size_t j = i + 1; j < afo.universe.size(); ++j) {
      if (!fine_p.same(static_cast<int>(i), static_cast<int>(j))) continue;
      int si = afo_lts.state(hats[i]);
      int sj = afo_lts.state(hats[j]);
      if (!fine_afo.same(si, sj)) {
        rep.fail(3, "hat pair for " + afo.universe[i].str() + " / " + afo.universe[j].str() +
                        " lost equivalence");
      }
    }

  // Requirement 4: the fine and coarse equivalences coincide on AFO(P).
  if (!(fine_afo == coarse_afo)) rep.fail(4, "fine and coarse partitions differ on the fragment");

  // Requirement 5: equivalence survives decoding into K.
  DecLts k = dec_lts(afo, fragment_seeds, depth);
  Partition fine_k = coarsest(k.lts, fine);
  for (const auto& [t1, s1] : afo_lts.state_of)
    for (const auto& [t2, s2] : afo_lts.state_of) {
      if (s1 >= s2) continue;
      if (fine_afo.same(s1, s2) && !fine_k.same(k.state(t1), k.state(t2)))
        rep.fail(5, "dec broke equivalence of " + t1.str() + " / " + t2.str());
    }

  // Requirement 6: f(p...) in P + K is strongly bisimilar to dec(f(hats)).
  {
    std::vector<Term> p_seeds = universe;
    std::vector<Term> p_images = detail::operator_images(tss.signature, universe);
    p_seeds.insert(p_seeds.end(), p_images.begin(), p_images.end());
    GeneratedLts p_lts = generate_lts(tss, p_seeds, depth);
    Lts joint = disjoint_union(p_lts.lts, k.lts);
    Partition strong = coarsest(joint, EquivKind::strong);
    int offset = p_lts.lts.n_states();
    // Build the hat image matching each original image.
    std::map<Term, Term> hat_term;
    for (size_t i = 0; i < afo.universe.size(); ++i)
      hat_term.emplace(afo.universe[i], hats[i]);
    for (const auto& img : p_images) {
      std::vector<Term> hat_args;
      bool all = true;
      for (const auto& a : img.args()) {
        auto it = hat_term.find(a);
        if (it == hat_term.end()) all = false;
        else hat_args.push_back(it->second);
      }
      if (!all) continue;
      Term hat_img = Term::app(img.head(), hat_args);
      int sp = p_lts.state(img);
      int sk = k.state(hat_img) + offset;
      if (!strong.same(sp, sk))
        rep.fail(6, img.str() + " is not strongly bisimilar to its decoded image");
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Congruence harness: sample argument tuples equivalent under `kind` and
// check that the operator images remain equivalent.

struct CongruenceViolation {
  std::vector<Term> left, right;
  Term left_image, right_image;
};

struct CongruenceReport {
  bool pass = true;
  size_t checked = 0;
  std::vector<CongruenceViolation> violations;
};

inline CongruenceReport congruence_harness(const Tss& tss, EquivKind kind,
                                           const std::string& op,
                                           const std::vector<Term>& universe, size_t samples,
                                           uint64_t seed, int depth = 8) {
  const FunctionSymbol& sym = tss.signature.at(op);
  std::vector<Term> seeds = universe;
  std::vector<Term> images = detail::operator_images(tss.signature, universe, 4096);
  for (const auto& img : images)
    if (img.head() == op) seeds.push_back(img);
  GeneratedLts g = generate_lts(tss, seeds, depth);
  Partition part = coarsest(g.lts, kind);

  // Equivalent pairs per universe position.
  std::vector<std::pair<Term, Term>> pairs;
  for (const auto& p : universe)
    for (const auto& q : universe)
      if (part.same(g.state(p), g.state(q))) pairs.emplace_back(p, q);

  CongruenceReport rep;
  if (pairs.empty()) return rep;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<size_t> pick(0, pairs.size() - 1);
  for (size_t s = 0; s < samples; ++s) {
    std::vector<Term> left, right;
    for (int i = 0; i < sym.arity; ++i) {
      const auto& [p, q] = pairs[pick(rng)];
      left.push_back(p);
      right.push_back(q);
    }
    Term li = Term::app(op, left);
    Term ri = Term::app(op, right);
    ++rep.checked;
    if (!part.same(g.state(li), g.state(ri))) {
      rep.pass = false;
      rep.violations.push_back({left, right, li, ri});
    }
  }
  return rep;
}

}  // namespace sosforge
