#pragma once

// Finite labelled transition systems and the reachability, stability and
// divergence primitives shared by the equivalence algorithms.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sosforge/tss.hpp"

namespace sosforge {

struct LtsTransition {
  int src = 0;
  int label = 0;
  int dst = 0;
  friend bool operator<(const LtsTransition& a, const LtsTransition& b) {
    return std::tie(a.src, a.label, a.dst) < std::tie(b.src, b.label, b.dst);
  }
  friend bool operator==(const LtsTransition& a, const LtsTransition& b) {
    return a.src == b.src && a.label == b.label && a.dst == b.dst;
  }
};

class Lts {
 public:
  Lts() = default;
  explicit Lts(int n_states) : n_states_(n_states) {}

  int n_states() const { return n_states_; }
  int add_state(const std::string& name = "") {
    if (!name.empty()) {
      if (static_cast<int>(names_.size()) < n_states_) names_.resize(n_states_);
      names_.resize(n_states_ + 1);
      names_[n_states_] = name;
    }
    sorted_ = false;
    return n_states_++;
  }
  void set_name(int s, const std::string& name) {
    if (static_cast<int>(names_.size()) < n_states_) names_.resize(n_states_);
    names_[s] = name;
  }
  const std::string& name(int s) const {
    static const std::string empty;
    return s < static_cast<int>(names_.size()) ? names_[s] : empty;
  }
  std::string display(int s) const {
    return name(s).empty() ? std::to_string(s) : name(s);
  }

  int label_id(const std::string& label) {
    auto it = label_ids_.find(label);
    if (it != label_ids_.end()) return it->second;
    int id = static_cast<int>(labels_.size());
    labels_.push_back(label);
    label_ids_.emplace(label, id);
    return id;
  }
  const std::string& label(int id) const { return labels_[id]; }
  int find_label(const std::string& label) const {
    auto it = label_ids_.find(label);
    return it == label_ids_.end() ? -1 : it->second;
  }
  int n_labels() const { return static_cast<int>(labels_.size()); }
  int tau() const { return find_label(kTau); }

  void add_transition(int src, const std::string& label, int dst) {
    transitions_.push_back({src, label_id(label), dst});
    sorted_ = false;
  }
  void add_transition(int src, int label, int dst) {
    transitions_.push_back({src, label, dst});
    sorted_ = false;
  }

  const std::vector<LtsTransition>& transitions() const {
    canonicalize();
    return transitions_;
  }

  // Outgoing transitions of s as (label, dst) pairs.
  const std::vector<std::pair<int, int>>& out(int s) const {
    canonicalize();
    return out_[s];
  }

  std::vector<int> initial_states;

  bool has_transition(int s, int label, int dst) const {
    for (auto [l, d] : out(s))
      if (l == label && d == dst) return true;
    return false;
  }
  bool has_label_out(int s, int label) const {
    for (auto [l, d] : out(s))
      if (l == label) return true;
    return false;
  }

  // eps_closure: states reachable by zero or more tau-steps.
  std::set<int> eps_closure(int s) const {
    int t = tau();
    std::set<int> seen{s};
    std::vector<int> stack{s};
    while (!stack.empty()) {
      int cur = stack.back();
      stack.pop_back();
      if (t < 0) continue;
      for (auto [l, d] : out(cur))
        if (l == t && seen.insert(d).second) stack.push_back(d);
    }
    return seen;
  }

  bool is_stable(int s) const {
    int t = tau();
    return t < 0 || !has_label_out(s, t);
  }

  // True iff an infinite tau-path starting at s exists with every state on
  // the path (including s) inside `allowed`; on a finite LTS this means s can
  // reach a tau-cycle within the induced subgraph.
  bool divergent_within(int s, const std::set<int>& allowed) const {
    if (!allowed.count(s)) return false;
    int t = tau();
    if (t < 0) return false;
    // Iteratively strip states with no tau-successor inside the live set.
    std::set<int> live = allowed;
    bool changed = true;
    while (changed) {
      changed = false;
      for (auto it = live.begin(); it != live.end();) {
        bool has_succ = false;
        for (auto [l, d] : out(*it))
          if (l == t && live.count(d)) has_succ = true;
        if (!has_succ) {
          it = live.erase(it);
          changed = true;
        } else {
          ++it;
        }
      }
    }
    return live.count(s) != 0;
  }

  std::set<int> divergent_states() const {
    std::set<int> all;
    for (int s = 0; s < n_states_; ++s) all.insert(s);
    std::set<int> out_set;
    for (int s = 0; s < n_states_; ++s)
      if (divergent_within(s, all)) out_set.insert(s);
    return out_set;
  }

  std::set<std::string> label_set() const {
    return std::set<std::string>(labels_.begin(), labels_.end());
  }

 private:
  void canonicalize() const {
    if (sorted_) return;
    std::sort(transitions_.begin(), transitions_.end());
    transitions_.erase(std::unique(transitions_.begin(), transitions_.end()), transitions_.end());
    out_.assign(n_states_, {});
    for (const auto& tr : transitions_) out_[tr.src].emplace_back(tr.label, tr.dst);
    sorted_ = true;
  }

  int n_states_ = 0;
  std::vector<std::string> labels_;
  std::map<std::string, int> label_ids_;
  std::vector<std::string> names_;
  mutable std::vector<LtsTransition> transitions_;
  mutable std::vector<std::vector<std::pair<int, int>>> out_;
  mutable bool sorted_ = false;
};

// G ⊎ H: disjoint union; states of `b` are shifted by a.n_states().
inline Lts disjoint_union(const Lts& a, const Lts& b) {
  Lts u(a.n_states() + b.n_states());
  for (int s = 0; s < a.n_states(); ++s)
    if (!a.name(s).empty()) u.set_name(s, a.name(s));
  for (int s = 0; s < b.n_states(); ++s)
    if (!b.name(s).empty()) u.set_name(a.n_states() + s, b.name(s));
  for (const auto& tr : a.transitions()) u.add_transition(tr.src, a.label(tr.label), tr.dst);
  for (const auto& tr : b.transitions())
    u.add_transition(a.n_states() + tr.src, b.label(tr.label), a.n_states() + tr.dst);
  for (int s : a.initial_states) u.initial_states.push_back(s);
  for (int s : b.initial_states) u.initial_states.push_back(a.n_states() + s);
  return u;
}

}  // namespace sosforge
