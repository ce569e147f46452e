#pragma once

// Test-only ground-truth for well-supported provability, computed directly
// from the definition: clause 1 fires rule instances whose premises are
// already provable; clause 2 proves a negative literal once every set N of
// negative hypotheses irredundantly supporting a denying positive literal
// contains a member whose denial is provable. Independent of the alternating
// fixpoint in sosforge/proof.hpp; meant for universes of at most a few dozen
// ground literals.

#include <map>
#include <set>
#include <vector>

#include "sosforge/proof.hpp"
#include "sosforge/term.hpp"
#include "sosforge/tss.hpp"

namespace sosforge::testutil {

struct GroundNeg {
  Term src;
  std::string label;
  friend bool operator<(const GroundNeg& a, const GroundNeg& b) {
    if (int c = a.src.compare(b.src); c != 0) return c < 0;
    return a.label < b.label;
  }
  friend bool operator==(const GroundNeg& a, const GroundNeg& b) {
    return a.src == b.src && a.label == b.label;
  }
};

struct GroundInstance {
  std::vector<GroundFact> pos_premises;
  std::vector<GroundNeg> neg_premises;
  GroundFact conclusion;
};

class WsOracle {
 public:
  WsOracle(const Tss& tss, const std::set<Term>& universe) : universe_(universe) {
    instantiate(tss);
    compute_supports();
    compute_ws();
  }

  bool pos_provable(const GroundFact& f) const { return ws_pos_.count(f) != 0; }
  bool neg_provable(const Term& p, const std::string& label) const {
    return ws_neg_.count(GroundNeg{p, label}) != 0;
  }

 private:
  void instantiate(const Tss& tss) {
    std::vector<Term> terms(universe_.begin(), universe_.end());
    for (const auto& rule : tss.rules) {
      if (!rule.standard()) continue;
      std::vector<std::string> vars;
      for (const auto& v : rule.all_variables()) vars.push_back(v);
      std::vector<size_t> idx(vars.size(), 0);
      for (;;) {
        Substitution sub;
        for (size_t i = 0; i < vars.size(); ++i) sub.bind(vars[i], terms[idx[i]]);
        bool in_universe = true;
        GroundInstance inst;
        auto keep = [&](const Term& t) {
          if (!universe_.count(t)) in_universe = false;
        };
        keep(sub.apply(rule.source()));
        keep(sub.apply(rule.target()));
        for (const auto& p : rule.premises) {
          keep(sub.apply(p.source));
          if (p.positive) {
            keep(sub.apply(p.target));
            inst.pos_premises.push_back(
                GroundFact{sub.apply(p.source), p.label, sub.apply(p.target)});
          } else {
            inst.neg_premises.push_back(GroundNeg{sub.apply(p.source), p.label});
          }
        }
        inst.conclusion =
            GroundFact{sub.apply(rule.source()), rule.conclusion.label, sub.apply(rule.target())};
        if (in_universe) instances_.push_back(std::move(inst));
        // next tuple
        size_t k = 0;
        while (k < idx.size() && ++idx[k] == terms.size()) idx[k++] = 0;
        if (k == idx.size() || idx.empty()) break;
      }
    }
  }

  // Minimal sets N of negative literals with N / fact irredundantly provable.
  void compute_supports() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& inst : instances_) {
        // Choose one support per positive premise; the instance's negative
        // premises join every combination.
        std::vector<std::set<GroundNeg>> partial{{inst.neg_premises.begin(),
                                                  inst.neg_premises.end()}};
        bool feasible = true;
        for (const auto& pp : inst.pos_premises) {
          auto it = supports_.find(pp);
          if (it == supports_.end() || it->second.empty()) {
            feasible = false;
            break;
          }
          std::vector<std::set<GroundNeg>> next;
          for (const auto& base : partial)
            for (const auto& sup : it->second) {
              std::set<GroundNeg> merged = base;
              merged.insert(sup.begin(), sup.end());
              next.push_back(std::move(merged));
            }
          partial = std::move(next);
        }
        if (!feasible) continue;
        auto& sets = supports_[inst.conclusion];
        for (auto& n : partial)
          if (insert_minimal(sets, n)) changed = true;
      }
    }
  }

  static bool insert_minimal(std::vector<std::set<GroundNeg>>& sets, const std::set<GroundNeg>& n) {
    for (const auto& have : sets) {
      if (std::includes(n.begin(), n.end(), have.begin(), have.end())) return false;
    }
    bool inserted = false;
    std::vector<std::set<GroundNeg>> kept;
    for (auto& have : sets)
      if (!std::includes(have.begin(), have.end(), n.begin(), n.end())) kept.push_back(have);
    kept.push_back(n);
    inserted = true;
    sets = std::move(kept);
    return inserted;
  }

  void compute_ws() {
    bool changed = true;
    while (changed) {
      changed = false;
      // Clause 1: positive literals via rule instances over proven premises.
      for (const auto& inst : instances_) {
        if (ws_pos_.count(inst.conclusion)) continue;
        bool ok = true;
        for (const auto& pp : inst.pos_premises)
          if (!ws_pos_.count(pp)) ok = false;
        for (const auto& np : inst.neg_premises)
          if (!ws_neg_.count(np)) ok = false;
        if (ok) {
          ws_pos_.insert(inst.conclusion);
          changed = true;
        }
      }
      // Clause 2: a negative literal is provable when every minimal support
      // of every denying positive literal contains a hypothesis whose denial
      // is already proven.
      for (const auto& p : universe_) {
        for (const auto& label : labels()) {
          GroundNeg neg{p, label};
          if (ws_neg_.count(neg)) continue;
          bool ok = true;
          for (const auto& [fact, sets] : supports_) {
            if (!(fact.src == p) || fact.label != label) continue;
            for (const auto& n : sets) {
              bool denied = false;
              for (const auto& hyp : n) {
                for (const auto& proven : ws_pos_)
                  if (proven.src == hyp.src && proven.label == hyp.label) denied = true;
              }
              if (!denied) ok = false;
            }
          }
          if (ok) {
            ws_neg_.insert(neg);
            changed = true;
          }
        }
      }
    }
  }

  std::set<std::string> labels() const {
    std::set<std::string> out;
    for (const auto& inst : instances_) {
      out.insert(inst.conclusion.label);
      for (const auto& pp : inst.pos_premises) out.insert(pp.label);
      for (const auto& np : inst.neg_premises) out.insert(np.label);
    }
    return out;
  }

  std::set<Term> universe_;
  std::vector<GroundInstance> instances_;
  std::map<GroundFact, std::vector<std::set<GroundNeg>>> supports_;
  std::set<GroundFact> ws_pos_;
  std::set<GroundNeg> ws_neg_;
};

}  // namespace sosforge::testutil
