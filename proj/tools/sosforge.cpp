// Command-line workbench: parse the input languages, check congruence
// formats, generate and compare labelled transition systems, model-check and
// decompose modal formulas, and run the abstraction-free-oracle pipeline.
//
// Exit codes: 0 success / related / pass, 1 negative verdict, 2 usage or
// input error, 3 internal consistency failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "sosforge/afo.hpp"
#include "sosforge/decompose.hpp"
#include "sosforge/equiv.hpp"
#include "sosforge/format.hpp"
#include "sosforge/formula.hpp"
#include "sosforge/proof.hpp"
#include "sosforge/ruloid.hpp"
#include "sosforge/syntax.hpp"

using namespace sosforge;

namespace {

bool use_color() {
  const char* v = std::getenv("SOSFORGE_COLOR");
  return v && std::string(v) != "0" && std::string(v) != "off";
}

std::string verdict(bool pass) {
  if (!use_color()) return pass ? "pass" : "fail";
  return pass ? "\x1b[32mpass\x1b[0m" : "\x1b[31mfail\x1b[0m";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

TssDocument load_tss(const std::string& path) { return parse_tss(read_file(path)); }

std::vector<Term> parse_terms(const std::vector<std::string>& texts, const Signature& sig) {
  std::vector<Term> out;
  for (const auto& t : texts) out.push_back(parse_term_text(t, sig));
  return out;
}

ArgPredicate parse_predicate(const std::vector<std::string>& entries) {
  // Entries of the form symbol:index.
  ArgPredicate pred;
  for (const auto& e : entries) {
    auto colon = e.rfind(':');
    if (colon == std::string::npos)
      throw std::runtime_error("predicate entry must be symbol:index, got " + e);
    pred.add(e.substr(0, colon), std::stoi(e.substr(colon + 1)));
  }
  return pred;
}

int cmd_parse(const std::string& file) {
  if (file.size() >= 4 && file.substr(file.size() - 4) == ".aut") {
    std::cout << emit_lts(parse_lts(read_file(file)));
  } else if (file.size() >= 4 && file.substr(file.size() - 4) == ".hml") {
    std::cout << emit_formula(parse_formula(read_file(file))) << "\n";
  } else {
    TssDocument doc = load_tss(file);
    std::cout << emit_tss(doc.tss, &doc.order);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"workbench for operational semantics, behavioural equivalences and formats"};
  app.require_subcommand(1);
  uint64_t seed = 0;
  app.add_option("--seed", seed, "seed for all randomized subcommands");

  // parse
  std::string parse_file;
  auto* sc_parse = app.add_subcommand("parse", "parse a .tss/.aut/.hml file, print canonically");
  sc_parse->add_option("file", parse_file)->required();

  // check-format
  std::string cf_file, cf_format = "rsbb";
  std::vector<std::string> cf_aleph, cf_lambda;
  bool cf_search = false;
  auto* sc_cf = app.add_subcommand("check-format", "decide congruence format membership");
  sc_cf->add_option("file", cf_file)->required();
  sc_cf->add_option("--format", cf_format, "bb, rbb, sbb or rsbb")->required();
  sc_cf->add_flag("--search", cf_search, "search for witness predicates");
  sc_cf->add_option("--aleph", cf_aleph, "aleph positions symbol:index");
  sc_cf->add_option("--lambda", cf_lambda, "lambda positions symbol:index");

  // lts
  std::string lts_file, lts_out;
  std::vector<std::string> lts_seeds;
  int lts_depth = 8;
  auto* sc_lts = app.add_subcommand("lts", "generate the LTS of a complete TSS");
  sc_lts->add_option("file", lts_file)->required();
  sc_lts->add_option("--seeds", lts_seeds, "closed seed terms")->required();
  sc_lts->add_option("--depth", lts_depth, "universe growth rounds");
  sc_lts->add_option("-o,--output", lts_out, "output .aut file (stdout otherwise)");

  // equiv
  std::string eq_file, eq_rel = "b";
  int eq_s1 = -1, eq_s2 = -1;
  bool eq_partition = false;
  auto* sc_eq = app.add_subcommand("equiv", "behavioural equivalence queries on a .aut file");
  sc_eq->add_option("file", eq_file)->required();
  sc_eq->add_option("--rel", eq_rel, "strong, b, sb, wdb, db, rb, rsb, rwdb or rdb");
  sc_eq->add_flag("--partition", eq_partition, "dump the partition instead of a pair query");
  sc_eq->add_option("s1", eq_s1, "first state");
  sc_eq->add_option("s2", eq_s2, "second state");

  // check
  std::string chk_lts, chk_formula;
  auto* sc_chk = app.add_subcommand("check", "model-check a formula on every state");
  sc_chk->add_option("file", chk_lts, ".aut file")->required();
  sc_chk->add_option("formula", chk_formula, ".hml file or inline formula")->required();

  // distinguish
  std::string dist_file, dist_class = "Obs";
  int dist_s1 = -1, dist_s2 = -1;
  auto* sc_dist = app.add_subcommand("distinguish", "construct a distinguishing formula");
  sc_dist->add_option("file", dist_file)->required();
  sc_dist->add_option("--class", dist_class, "O, Ob, Orb, Obs or Orbs");
  sc_dist->add_option("s1", dist_s1)->required();
  sc_dist->add_option("s2", dist_s2)->required();

  // ruloids
  std::string rul_file, rul_term, rul_label;
  bool rul_negative = false;
  int rul_depth = 8;
  auto* sc_rul = app.add_subcommand("ruloids", "enumerate ruloids for an open term");
  sc_rul->add_option("file", rul_file)->required();
  sc_rul->add_option("--term", rul_term)->required();
  sc_rul->add_option("--label", rul_label)->required();
  sc_rul->add_flag("--negative", rul_negative, "negative-conclusion ruloids");
  sc_rul->add_option("--depth", rul_depth);

  // decompose
  std::string dec_file, dec_term, dec_formula;
  bool dec_verify = false;
  std::vector<std::string> dec_universe;
  int dec_depth = 8;
  auto* sc_dec = app.add_subcommand("decompose", "decompose a modal formula over an open term");
  sc_dec->add_option("file", dec_file)->required();
  sc_dec->add_option("--term", dec_term)->required();
  sc_dec->add_option("--formula", dec_formula)->required();
  sc_dec->add_flag("--verify", dec_verify, "check the decomposition theorem exhaustively");
  sc_dec->add_option("--universe", dec_universe, "closed terms for --verify");
  sc_dec->add_option("--depth", dec_depth);

  // afo
  std::string afo_file, afo_oracle = "divergence", afo_out, afo_g, afo_h;
  std::vector<std::string> afo_universe;
  int afo_depth = 8;
  auto* sc_afo = app.add_subcommand("afo", "apply the abstraction-free-oracle conversion");
  sc_afo->add_option("file", afo_file)->required();
  sc_afo->add_option("--universe", afo_universe, "closed terms frozen into hat constants")
      ->required();
  sc_afo->add_option("--oracle", afo_oracle, "divergence or classes");
  sc_afo->add_option("-o,--output", afo_out, "output .tss (stdout otherwise)");
  sc_afo->add_option("--emit-g", afo_g, "write the auxiliary LTS G");
  sc_afo->add_option("--emit-h", afo_h, "write the auxiliary LTS H");
  sc_afo->add_option("--depth", afo_depth);

  // verify-afo
  std::string vafo_file, vafo_kind = "wdb";
  std::vector<std::string> vafo_universe;
  int vafo_depth = 8;
  auto* sc_vafo = app.add_subcommand("verify-afo", "check the six lifting requirements");
  sc_vafo->add_option("file", vafo_file)->required();
  sc_vafo->add_option("--kind", vafo_kind, "wdb, rwdb, db or rdb");
  sc_vafo->add_option("--universe", vafo_universe)->required();
  sc_vafo->add_option("--depth", vafo_depth);

  // congruence
  std::string cong_file, cong_kind = "rsb", cong_op;
  std::vector<std::string> cong_universe;
  size_t cong_samples = 200;
  int cong_depth = 8;
  auto* sc_cong = app.add_subcommand("congruence", "sample argument pairs and check images");
  sc_cong->add_option("file", cong_file)->required();
  sc_cong->add_option("--kind", cong_kind);
  sc_cong->add_option("--op", cong_op)->required();
  sc_cong->add_option("--universe", cong_universe)->required();
  sc_cong->add_option("--samples", cong_samples);
  sc_cong->add_option("--depth", cong_depth);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sc_parse->parsed()) return cmd_parse(parse_file);

    if (sc_cf->parsed()) {
      TssDocument doc = load_tss(cf_file);
      auto fmt = parse_format(cf_format);
      if (!fmt) throw std::runtime_error("unknown format " + cf_format);
      std::optional<ArgPredicate> aleph, lambda;
      if (!cf_aleph.empty() || !cf_lambda.empty()) {
        aleph = parse_predicate(cf_aleph);
        lambda = parse_predicate(cf_lambda);
      }
      FormatVerdict v = check_format(doc.tss, *fmt, aleph, lambda);
      std::cout << v.str(doc.tss, *fmt);
      return v.pass ? 0 : 1;
    }

    if (sc_lts->parsed()) {
      TssDocument doc = load_tss(lts_file);
      GeneratedLts g =
          generate_lts(doc.tss, parse_terms(lts_seeds, doc.tss.signature), lts_depth);
      if (g.universe_escape)
        std::cerr << "warning: universe escape or truncation; the LTS is partial\n";
      std::string aut = emit_lts(g.lts);
      if (lts_out.empty()) {
        std::cout << aut;
        for (int s = 0; s < g.lts.n_states(); ++s)
          std::cout << "# state " << s << " = " << g.lts.name(s) << "\n";
      } else {
        write_file(lts_out, aut);
      }
      return 0;
    }

    if (sc_eq->parsed()) {
      Lts l = parse_lts(read_file(eq_file));
      auto kind = parse_equiv_kind(eq_rel);
      if (!kind) throw std::runtime_error("unknown equivalence " + eq_rel);
      Partition p = coarsest(l, *kind);
      if (eq_partition) {
        for (int s = 0; s < l.n_states(); ++s)
          std::cout << s << "\t" << p.block[s] << "\n";
        return 0;
      }
      if (eq_s1 < 0 || eq_s2 < 0) throw std::runtime_error("pair query needs two states");
      if (eq_s1 >= l.n_states() || eq_s2 >= l.n_states())
        throw std::runtime_error("state index out of range");
      bool rel = p.same(eq_s1, eq_s2);
      std::cout << eq_s1 << " and " << eq_s2 << " are " << (rel ? "" : "not ")
                << equiv_kind_name(*kind) << "-equivalent\n";
      return rel ? 0 : 1;
    }

    if (sc_chk->parsed()) {
      Lts l = parse_lts(read_file(chk_lts));
      std::string text = chk_formula;
      if (text.size() >= 4 && text.substr(text.size() - 4) == ".hml") text = read_file(text);
      Formula f = parse_formula(text);
      ModelChecker mc(l);
      for (int s = 0; s < l.n_states(); ++s)
        std::cout << s << "\t" << (mc.satisfies(s, f) ? "satisfied" : "violated") << "\n";
      return 0;
    }

    if (sc_dist->parsed()) {
      Lts l = parse_lts(read_file(dist_file));
      auto cls = parse_formula_class(dist_class);
      if (!cls) throw std::runtime_error("unknown formula class " + dist_class);
      auto f = distinguish(l, dist_s1, dist_s2, *cls);
      if (!f) {
        std::cout << "none found\n";
        return 1;
      }
      std::cout << emit_formula(*f) << "\n";
      return 0;
    }

    if (sc_rul->parsed()) {
      TssDocument doc = load_tss(rul_file);
      Tss pplus = build_p_plus(to_decent_ntyft(doc.tss));
      Term t = parse_term_text(rul_term, doc.tss.signature);
      RuloidSet rs = ruloids(pplus, t, rul_label, !rul_negative, rul_depth);
      if (!rs.complete) std::cerr << "warning: depth bound hit; the set may be partial\n";
      for (const auto& r : rs.ruloids)
        std::cout << "rule " << r.str(&doc.tss.signature) << "\n";
      return 0;
    }

    if (sc_dec->parsed()) {
      TssDocument doc = load_tss(dec_file);
      Term t = parse_term_text(dec_term, doc.tss.signature);
      Formula phi = parse_formula(dec_formula);
      ArgPredicate gamma = patience_positions(doc.tss);
      Decomposer dec(doc.tss, gamma);
      auto mappings = dec.decompose(t, phi);
      for (size_t i = 0; i < mappings.size(); ++i) {
        std::cout << "mapping " << i << ":\n";
        for (const auto& x : variables(t))
          std::cout << "  " << x << " := " << emit_formula(mappings[i].at(x)) << "\n";
      }
      if (dec_verify) {
        if (dec_universe.empty())
          throw std::runtime_error("--verify needs --universe");
        auto rep = verify_decomposition_theorem(doc.tss, gamma, t, phi,
                                                parse_terms(dec_universe, doc.tss.signature),
                                                dec_depth);
        std::cout << "decomposition theorem: " << verdict(rep.ok) << " ("
                  << rep.substitutions_checked << " substitutions)\n";
        for (const auto& ce : rep.counterexamples)
          std::cout << "counterexample: " << ce.detail << "\n";
        return rep.ok ? 0 : 1;
      }
      return 0;
    }

    if (sc_afo->parsed()) {
      TssDocument doc = load_tss(afo_file);
      OracleKind kind;
      if (afo_oracle == "divergence") kind = OracleKind::divergence;
      else if (afo_oracle == "classes") kind = OracleKind::class_naming;
      else throw std::runtime_error("unknown oracle kind " + afo_oracle);
      ArgPredicate gamma = patience_positions(doc.tss);
      AfoResult afo = afo_transform(doc.tss, gamma, kind,
                                    parse_terms(afo_universe, doc.tss.signature), afo_depth);
      std::string out = emit_tss(afo.transformed, &doc.order);
      if (afo_out.empty()) std::cout << out;
      else write_file(afo_out, out);
      if (!afo_g.empty()) write_file(afo_g, emit_lts(afo.g));
      if (!afo_h.empty()) write_file(afo_h, emit_lts(afo.h));
      return 0;
    }

    if (sc_vafo->parsed()) {
      TssDocument doc = load_tss(vafo_file);
      auto kind = parse_equiv_kind(vafo_kind);
      if (!kind || !kind_pair_for(*kind))
        throw std::runtime_error("kind must be wdb, rwdb, db or rdb");
      AfoRequirementsReport rep = verify_afo_requirements(
          doc.tss, *kind, parse_terms(vafo_universe, doc.tss.signature), vafo_depth);
      for (int req = 1; req <= 6; ++req) {
        auto it = rep.failures.find(req);
        std::cout << "requirement " << req << ": " << verdict(it == rep.failures.end());
        if (it != rep.failures.end()) std::cout << "  (" << it->second << ")";
        std::cout << "\n";
      }
      return rep.pass ? 0 : 1;
    }

    if (sc_cong->parsed()) {
      TssDocument doc = load_tss(cong_file);
      auto kind = parse_equiv_kind(cong_kind);
      if (!kind) throw std::runtime_error("unknown equivalence " + cong_kind);
      CongruenceReport rep = congruence_harness(doc.tss, *kind, cong_op,
                                                parse_terms(cong_universe, doc.tss.signature),
                                                cong_samples, seed, cong_depth);
      std::cout << "congruence: " << verdict(rep.pass) << " (" << rep.checked
                << " sampled pairs)\n";
      for (const auto& viol : rep.violations) {
        std::cout << "violation: " << viol.left_image.str(doc.tss.signature) << " vs "
                  << viol.right_image.str(doc.tss.signature) << "\n";
      }
      return rep.pass ? 0 : 1;
    }
  } catch (const InternalConsistencyError& e) {
    std::cerr << "internal consistency failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
