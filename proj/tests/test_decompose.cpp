#include <catch2/catch_amalgamated.hpp>

#include "sosforge/decompose.hpp"
#include "sosforge/syntax.hpp"
#include "test_util.hpp"

using namespace sosforge;
using sosforge::testutil::corpus_path;
using sosforge::testutil::read_file;

namespace {

Term v(const std::string& n) { return Term::var(n); }
Term c(const std::string& n) { return Term::constant(n); }
Term seq(Term a, Term b) { return Term::app(";", {std::move(a), std::move(b)}); }

Tss load(const std::string& name) { return parse_tss(read_file(corpus_path(name))).tss; }

Formula diam_a(Formula f) { return Formula::diam("a", std::move(f)); }
Formula neg_diam(const std::string& l) {
  return Formula::neg(Formula::diam(l, Formula::top()));
}

const ArgPredicate kSeqGamma{{";", 1}};
const ArgPredicate kPrioGamma{{"Theta", 1}};

}  // namespace

TEST_CASE("single-variable source decomposes through the axiom ruloid") {
  Decomposer dec(load("sequencing.tss"), kSeqGamma);
  auto set = dec.decompose(v("x"), diam_a(Formula::top()));
  REQUIRE(set.size() == 1);
  REQUIRE(set[0].at("x") == diam_a(Formula::top()));
}

TEST_CASE("sequencing decomposition of <a>T, simplified by hand") {
  Decomposer dec(load("sequencing.tss"), kSeqGamma);
  auto set = dec.decompose(seq(v("x"), v("y")), diam_a(Formula::top()));
  REQUIRE(set.size() == 2);

  DecompositionMapping left;
  left.set("x", diam_a(Formula::top()));
  DecompositionMapping right;
  right.set("x", Formula::conj({neg_diam("a"), neg_diam(kTau)}));
  right.set("y", diam_a(Formula::top()));
  REQUIRE(std::count(set.begin(), set.end(), left) == 1);
  REQUIRE(std::count(set.begin(), set.end(), right) == 1);
}

TEST_CASE("top decomposes to the all-top mapping") {
  Decomposer dec(load("sequencing.tss"), kSeqGamma);
  auto set = dec.decompose(seq(v("x"), v("y")), Formula::top());
  REQUIRE(set.size() == 1);
  REQUIRE(set[0].explicit_map().empty());
}

TEST_CASE("priority: stability formulas decompose into the stability class") {
  Decomposer dec(load("priority.tss"), kPrioGamma);
  Formula phi = Formula::eps(Formula::conj({neg_diam(kTau), diam_a(Formula::top())}));
  auto set = dec.decompose(Term::app("Theta", {v("x")}), phi);
  REQUIRE(!set.empty());
  for (const auto& psi : set) {
    INFO(psi.str());
    REQUIRE(class_membership(psi.at("x"), FormulaClass::Obs));
  }
}

TEST_CASE("decomposition theorem holds exhaustively") {
  std::vector<Term> universe{c("p"), c("q"), c("r"), c("nil")};
  Tss tss = load("sequencing.tss");

  SECTION("sequencing, x;y, <a>T: all 16 substitutions") {
    auto rep = verify_decomposition_theorem(tss, kSeqGamma, seq(v("x"), v("y")),
                                            diam_a(Formula::top()), universe);
    REQUIRE(rep.substitutions_checked == 16);
    REQUIRE(rep.ok);
  }
  SECTION("closed term reduces to plain satisfaction equality") {
    auto rep = verify_decomposition_theorem(tss, kSeqGamma, seq(c("p"), c("r")),
                                            diam_a(Formula::top()), universe);
    REQUIRE(rep.substitutions_checked == 1);
    REQUIRE(rep.ok);
  }
  SECTION("priority, Theta(x), <eps>(T /\\ <a>T) over a 3-term universe") {
    Tss prio = load("priority.tss");
    auto rep = verify_decomposition_theorem(
        prio, kPrioGamma, Term::app("Theta", {v("x")}),
        Formula::eps(Formula::conj({Formula::top(), diam_a(Formula::top())})),
        {c("pp"), c("qq"), c("nil")});
    REQUIRE(rep.ok);
  }
}

TEST_CASE("soundness half on sampled substitutions") {
  // If some psi satisfies all variables, the instantiated term satisfies phi.
  Tss tss = load("sequencing.tss");
  std::vector<Term> universe{c("p"), c("q"), c("r"), c("nil")};
  std::vector<Formula> phis = {
      diam_a(Formula::top()),
      Formula::eps(diam_a(Formula::top())),
      Formula::tauhat(Formula::top()),
      Formula::neg(diam_a(Formula::top())),
  };
  Decomposer dec(tss, kSeqGamma);
  Term t = seq(v("x"), v("y"));
  std::vector<Term> seeds = universe;
  for (const auto& p : universe)
    for (const auto& q : universe) seeds.push_back(seq(p, q));
  GeneratedLts g = generate_lts(tss, seeds, 8);
  ModelChecker mc(g.lts);
  for (const auto& phi : phis) {
    auto set = dec.decompose(t, phi);
    for (const auto& p : universe)
      for (const auto& q : universe) {
        for (const auto& psi : set) {
          bool all = mc.satisfies(g.state(p), psi.at("x")) &&
                     mc.satisfies(g.state(q), psi.at("y"));
          if (all) {
            INFO(phi.str() << " via " << psi.str());
            REQUIRE(mc.satisfies(g.state(seq(p, q)), phi));
          }
        }
      }
  }
}

TEST_CASE("clause-6 coherence for non-injective substitutions") {
  Decomposer dec(load("sequencing.tss"), kSeqGamma);
  Formula phi = diam_a(Formula::top());
  // sigma maps both variables of x;y to z.
  auto direct = dec.decompose(seq(v("z"), v("z")), phi);
  auto base = dec.decompose(seq(v("x"), v("y")), phi);
  std::vector<DecompositionMapping> image;
  for (const auto& chi : base) {
    DecompositionMapping psi;
    psi.set("z", Formula::conj({chi.at("x"), chi.at("y")}));
    // Unsatisfiable images are pruned from decomposition sets.
    if (psi.at("z") == Formula::bottom()) continue;
    image.push_back(psi);
  }
  std::sort(image.begin(), image.end());
  image.erase(std::unique(image.begin(), image.end()), image.end());
  REQUIRE(direct == image);
}

TEST_CASE("decomposition is invariant under renaming of the source variables") {
  Decomposer dec(load("sequencing.tss"), kSeqGamma);
  Formula phi = Formula::eps(diam_a(Formula::top()));
  auto set1 = dec.decompose(seq(v("x"), v("y")), phi);
  auto set2 = dec.decompose(seq(v("u"), v("w")), phi);
  REQUIRE(set1.size() == set2.size());
  for (size_t i = 0; i < set1.size(); ++i) {
    REQUIRE(set1[i].at("x") == set2[i].at("u"));
    REQUIRE(set1[i].at("y") == set2[i].at("w"));
  }
}

TEST_CASE("delta formulas are rejected") {
  Decomposer dec(load("sequencing.tss"), kSeqGamma);
  REQUIRE_THROWS_AS(dec.decompose(v("x"), Formula::delta(Formula::top())),
                    DecompositionError);
}

TEST_CASE("class preservation claims") {
  Tss stss = load("sequencing.tss");
  ArgPredicate seq_aleph{{";", 1}, {";", 2}}, seq_lambda{{";", 1}};
  std::vector<Formula> orbs_battery = {
      diam_a(Formula::top()),
      Formula::diam(kTau, Formula::top()),
      Formula::eps(Formula::conj({neg_diam(kTau), diam_a(Formula::top())})),
      Formula::neg(diam_a(Formula::top())),
      Formula::eps(Formula::conj({Formula::top(), Formula::tauhat(Formula::top())})),
  };
  SECTION("sequencing under claim 2: images stay in Orbs") {
    for (const auto& phi : orbs_battery) {
      if (!class_membership(phi, FormulaClass::Orbs)) continue;
      auto rep = verify_class_preservation(stss, seq_aleph, seq_lambda,
                                           seq(v("x"), v("y")), phi);
      INFO(phi.str());
      REQUIRE(rep.checked > 0);
      REQUIRE(rep.ok);
    }
  }
  SECTION("priority under claim 1: Lambda universal keeps Obs") {
    Tss ptss = load("priority.tss");
    ArgPredicate aleph{{"Theta", 1}};
    ArgPredicate lambda = ArgPredicate::universal(ptss.signature);
    for (const auto& phi : orbs_battery) {
      if (!class_membership(phi, FormulaClass::Obs)) continue;
      auto rep = verify_class_preservation(ptss, aleph, lambda,
                                           Term::app("Theta", {v("x")}), phi);
      INFO(phi.str());
      REQUIRE(rep.ok);
    }
  }
  SECTION("top decomposes to top mappings under every claim") {
    auto rep = verify_class_preservation(stss, seq_aleph, seq_lambda,
                                         seq(v("x"), v("y")), Formula::top());
    REQUIRE(rep.ok);
  }
}
