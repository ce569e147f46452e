#include <catch2/catch_amalgamated.hpp>

#include "sosforge/proof.hpp"
#include "sosforge/syntax.hpp"
#include "test_util.hpp"
#include "ws_oracle.hpp"

using namespace sosforge;
using sosforge::testutil::corpus_path;
using sosforge::testutil::read_file;
using sosforge::testutil::WsOracle;

namespace {

Term c(const std::string& n) { return Term::constant(n); }
Term seq(Term a, Term b) { return Term::app(";", {std::move(a), std::move(b)}); }

Tss sequencing() { return parse_tss(read_file(corpus_path("sequencing.tss"))).tss; }

// Priority with a base state enabling both a and b, for the negative-premise
// evaluation example.
const char* kPriorityBothEnabled = R"(
actions a b
order a < b, a < tau
op Theta 1
op s 0
op s1 0
op s2 0
rule |- s -a-> s1
rule |- s -b-> s2
rule forall alpha in Act : x -alpha-> y, { x -beta-/> forall beta > alpha } |- Theta(x) -alpha-> Theta(y)
)";

// The classic incomplete one-rule system: c -a-> c' iff c -a-/>.
const char* kSelfRefuting = R"(
actions a
op c 0
op c' 0
rule c -a-/> |- c -a-> c'
)";

}  // namespace

TEST_CASE("ground universe") {
  Tss tss = sequencing();
  SECTION("seeds only at depth zero when already closed") {
    GroundUniverse u = ground_universe(tss, {c("q")}, 0);
    REQUIRE(u.terms == std::set<Term>{c("q")});
    REQUIRE(!u.truncated);
  }
  SECTION("sequencing from p;r reaches the expected closure") {
    GroundUniverse u = ground_universe(tss, {seq(c("p"), c("r"))}, 3);
    REQUIRE(!u.truncated);
    REQUIRE(u.terms.count(seq(c("p"), c("r"))));
    REQUIRE(u.terms.count(c("p")));
    REQUIRE(u.terms.count(c("r")));
    REQUIRE(u.terms.count(c("nil")));
    // Closed: growing depth adds nothing.
    REQUIRE(ground_universe(tss, {seq(c("p"), c("r"))}, 8).terms == u.terms);
  }
  SECTION("depth cap raises the truncation flag") {
    GroundUniverse u = ground_universe(tss, {seq(c("p"), c("r"))}, 0);
    REQUIRE(u.truncated);
  }
}

TEST_CASE("well-founded model") {
  SECTION("positive-only fragment equals naive least-fixpoint reachability") {
    Tss tss = parse_tss(
        "actions a\nop c0 0\nop c1 0\nop c2 0\n"
        "rule |- c0 -a-> c1\nrule |- c1 -tau-> c2\nrule |- c2 -a-> c0\n").tss;
    std::set<Term> uni{c("c0"), c("c1"), c("c2")};
    TruthAssignment m = well_founded_model(tss, uni);
    FactSet expect{{c("c0"), "a", c("c1")}, {c("c1"), kTau, c("c2")}, {c("c2"), "a", c("c0")}};
    REQUIRE(m.certain == expect);
    REQUIRE(m.possible == expect);
  }
  SECTION("priority blocks a lower-priority action") {
    Tss tss = parse_tss(kPriorityBothEnabled).tss;
    Term ts = Term::app("Theta", {c("s")});
    GroundUniverse u = ground_universe(tss, {ts}, 4);
    REQUIRE(!u.truncated);
    TruthAssignment m = well_founded_model(tss, u.terms);
    // Theta(s) -a-> is refuted by the enabled b; Theta(s) -a-/> holds.
    REQUIRE(!m.pos_true(ts, "a", Term::app("Theta", {c("s1")})));
    REQUIRE(m.neg_true(ts, "a"));
    REQUIRE(m.pos_true(ts, "b", Term::app("Theta", {c("s2")})));
  }
  SECTION("self-refuting rule is ambiguous") {
    Tss tss = parse_tss(kSelfRefuting).tss;
    std::set<Term> uni{c("c"), c("c'")};
    TruthAssignment m = well_founded_model(tss, uni);
    GroundFact f{c("c"), "a", c("c'")};
    REQUIRE(!m.certain.count(f));
    REQUIRE(m.possible.count(f));
    REQUIRE(!m.neg_true(c("c"), "a"));
  }
  SECTION("consistency: certain facts are possible") {
    Tss tss = sequencing();
    GroundUniverse u = ground_universe(tss, {seq(c("p"), c("r")), seq(c("q"), c("r"))}, 4);
    TruthAssignment m = well_founded_model(tss, u.terms);
    for (const auto& f : m.certain) REQUIRE(m.possible.count(f));
  }
}

TEST_CASE("completeness") {
  SECTION("priority fixture is complete") {
    Tss tss = parse_tss(kPriorityBothEnabled).tss;
    GroundUniverse u = ground_universe(tss, {Term::app("Theta", {c("s")})}, 4);
    CompletenessReport rep = is_complete(tss, u.terms);
    REQUIRE(rep.complete);
    REQUIRE(!rep.universe_escape);
  }
  SECTION("self-refuting fixture is incomplete") {
    Tss tss = parse_tss(kSelfRefuting).tss;
    CompletenessReport rep = is_complete(tss, {c("c"), c("c'")});
    REQUIRE(!rep.complete);
    REQUIRE(rep.ambiguous ==
            std::vector<std::pair<Term, std::string>>{{c("c"), "a"}});
  }
  SECTION("premise-free TSS is complete") {
    Tss tss = parse_tss("actions a\nop c 0\nop d 0\nrule |- c -a-> d\n").tss;
    REQUIRE(is_complete(tss, {c("c"), c("d")}).complete);
  }
}

TEST_CASE("LTS generation") {
  Tss tss = sequencing();
  SECTION("p;r behaves like the tau-loop p") {
    GeneratedLts g = generate_lts(tss, {seq(c("p"), c("r"))}, 4);
    REQUIRE(!g.universe_escape);
    int pr = g.state(seq(c("p"), c("r")));
    REQUIRE(g.lts.has_transition(pr, g.lts.tau(), pr));
    for (auto [l, d] : g.lts.out(pr)) REQUIRE(l == g.lts.tau());
  }
  SECTION("q;r runs r: one a-step to nil") {
    GeneratedLts g = generate_lts(tss, {seq(c("q"), c("r"))}, 4);
    int qr = g.state(seq(c("q"), c("r")));
    REQUIRE(g.lts.has_transition(qr, g.lts.find_label("a"), g.state(c("nil"))));
    REQUIRE(g.lts.out(qr).size() == 1);
  }
  SECTION("deadlocked seeds with no axioms give an edgeless LTS") {
    Tss t2 = parse_tss("actions a\nop c 0\n").tss;
    GeneratedLts g = generate_lts(t2, {c("c")}, 0);
    REQUIRE(g.lts.n_states() == 1);
    REQUIRE(g.lts.transitions().empty());
  }
  SECTION("incomplete TSSs are refused") {
    Tss t2 = parse_tss(kSelfRefuting).tss;
    REQUIRE_THROWS_AS(generate_lts(t2, {c("c")}, 2), IncompleteTssError);
  }
}

TEST_CASE("alternating fixpoint agrees with the direct well-supported oracle") {
  SECTION("priority") {
    Tss tss = parse_tss(kPriorityBothEnabled).tss;
    GroundUniverse u = ground_universe(tss, {Term::app("Theta", {c("s")})}, 4);
    TruthAssignment m = well_founded_model(tss, u.terms);
    WsOracle oracle(tss, u.terms);
    for (const auto& p : u.terms)
      for (const auto& a : tss.all_actions()) {
        INFO(p.str() << " label " << a);
        REQUIRE(m.neg_true(p, a) == oracle.neg_provable(p, a));
        for (const auto& q : u.terms)
          REQUIRE(m.pos_true(p, a, q) == oracle.pos_provable(GroundFact{p, a, q}));
      }
  }
  SECTION("sequencing") {
    Tss tss = sequencing();
    GroundUniverse u = ground_universe(tss, {seq(c("p"), c("r")), seq(c("q"), c("r"))}, 4);
    TruthAssignment m = well_founded_model(tss, u.terms);
    WsOracle oracle(tss, u.terms);
    for (const auto& p : u.terms)
      for (const auto& a : tss.all_actions()) {
        REQUIRE(m.neg_true(p, a) == oracle.neg_provable(p, a));
        for (const auto& q : u.terms)
          REQUIRE(m.pos_true(p, a, q) == oracle.pos_provable(GroundFact{p, a, q}));
      }
  }
  SECTION("self-refuting rule: neither the literal nor its denial provable") {
    Tss tss = parse_tss(kSelfRefuting).tss;
    std::set<Term> uni{c("c"), c("c'")};
    WsOracle oracle(tss, uni);
    REQUIRE(!oracle.pos_provable(GroundFact{c("c"), "a", c("c'")}));
    REQUIRE(!oracle.neg_provable(c("c"), "a"));
  }
}

namespace {

// Replays a proof tree: every non-hypothesis node must be a closed instance
// of some rule whose instantiated premises are exactly the children.
bool replays(const Tss& tss, const TruthAssignment& model, const ProofTree& tree) {
  if (tree.hypothesis) return !tree.literal.positive && model.neg_true(tree.literal.source,
                                                                       tree.literal.label);
  if (!tree.literal.positive) return false;
  std::vector<Literal> kids;
  for (const auto& ch : tree.children) {
    if (!replays(tss, model, ch)) return false;
    kids.push_back(ch.literal);
  }
  std::sort(kids.begin(), kids.end());
  for (const auto& rule : tss.rules) {
    if (!rule.standard()) continue;
    auto sub = match(rule.source(), tree.literal.source);
    if (!sub || rule.conclusion.label != tree.literal.label) continue;
    // Bind premise targets from the children to close the substitution.
    Substitution full = *sub;
    bool consistent = true;
    for (const auto& prem : detail::dependency_order(rule)) {
      Term src = full.apply(prem.source);
      bool matched = false;
      for (const auto& k : kids) {
        if (k.positive != prem.positive || k.label != prem.label || !(k.source == src)) continue;
        if (prem.positive) full.bind(prem.target.head(), k.target);
        matched = true;
        break;
      }
      if (!matched) consistent = false;
    }
    if (!consistent) continue;
    std::vector<Literal> inst;
    for (const auto& prem : rule.premises) {
      Literal l = prem;
      l.source = full.apply(prem.source);
      if (prem.positive) l.target = full.apply(prem.target);
      inst.push_back(l);
    }
    std::sort(inst.begin(), inst.end());
    inst.erase(std::unique(inst.begin(), inst.end()), inst.end());
    if (inst == kids && full.apply(rule.target()) == tree.literal.target) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("certain facts have replayable proof witnesses") {
  for (const char* name : {"sequencing.tss", "priority.tss"}) {
    INFO(name);
    Tss tss = parse_tss(read_file(corpus_path(name))).tss;
    std::vector<Term> seeds;
    if (std::string(name) == "sequencing.tss")
      seeds = {seq(c("p"), c("r")), seq(c("q"), c("r"))};
    else
      seeds = {Term::app("Theta", {c("pp")}), Term::app("Theta", {c("qq")})};
    GroundUniverse u = ground_universe(tss, seeds, 6);
    TruthAssignment m = well_founded_model(tss, u.terms);
    for (const auto& f : m.certain) {
      ProofTree tree = reconstruct_proof(tss, u.terms, m, f);
      INFO(f.src.str() << " -" << f.label << "-> " << f.dst.str());
      REQUIRE(replays(tss, m, tree));
    }
  }
}

TEST_CASE("lookahead rules evaluate through chained premises") {
  Tss tss = parse_tss(read_file(corpus_path("lookahead.tss"))).tss;
  Term ab = Term::app("pre_a", {Term::app("pre_b", {c("nil")})});
  Term atb = Term::app("pre_a", {Term::app("pre_tau", {Term::app("pre_b", {c("nil")})})});
  GeneratedLts g = generate_lts(tss, {Term::app("f", {ab}), Term::app("f", {atb})}, 5);
  int fab = g.state(Term::app("f", {ab}));
  int fatb = g.state(Term::app("f", {atb}));
  // f(ab nil) -c-> nil, while f(a tau b nil) is stuck.
  REQUIRE(g.lts.has_transition(fab, g.lts.find_label("c"), g.state(c("nil"))));
  REQUIRE(g.lts.out(fatb).empty());
}
