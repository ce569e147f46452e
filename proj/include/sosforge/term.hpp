#pragma once

// Terms, signatures and substitutions: the syntactic substrate for rules,
// transition system specifications and everything built on top of them.
//
// Terms are immutable values with structural equality; nodes are shared and
// carry a cached hash, so copies are cheap and terms can be used freely as
// map keys.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace sosforge {

struct StructuralError : std::runtime_error {
  explicit StructuralError(const std::string& what) : std::runtime_error(what) {}
};

struct FunctionSymbol {
  std::string name;
  int arity = 0;
  bool infix = false;  // printed as (l name r); requires arity 2

  friend bool operator<(const FunctionSymbol& a, const FunctionSymbol& b) {
    return a.name < b.name;
  }
};

class Signature {
 public:
  void add(FunctionSymbol sym) {
    if (sym.arity < 0) throw StructuralError("negative arity for " + sym.name);
    auto [it, fresh] = symbols_.emplace(sym.name, sym);
    if (!fresh && it->second.arity != sym.arity)
      throw StructuralError("symbol " + sym.name + " redeclared with different arity");
  }
  bool contains(const std::string& name) const { return symbols_.count(name) != 0; }
  const FunctionSymbol& at(const std::string& name) const {
    auto it = symbols_.find(name);
    if (it == symbols_.end()) throw StructuralError("unknown symbol " + name);
    return it->second;
  }
  const std::map<std::string, FunctionSymbol>& symbols() const { return symbols_; }

 private:
  std::map<std::string, FunctionSymbol> symbols_;
};

class Term {
 public:
  Term() : Term(var("_")) {}

  static Term var(const std::string& name) {
    return Term(std::make_shared<Node>(Node{true, name, {}, 0}));
  }
  static Term app(const std::string& sym, std::vector<Term> args = {}) {
    return Term(std::make_shared<Node>(Node{false, sym, std::move(args), 0}));
  }
  static Term constant(const std::string& sym) { return app(sym, {}); }

  bool is_var() const { return node_->is_var; }
  bool is_app() const { return !node_->is_var; }
  const std::string& head() const { return node_->head; }
  const std::vector<Term>& args() const { return node_->args; }

  bool closed() const {
    if (is_var()) return false;
    for (const auto& a : args())
      if (!a.closed()) return false;
    return true;
  }

  size_t hash() const {
    if (node_->hash == 0) {
      size_t h = std::hash<std::string>()(node_->head) * 2 + (node_->is_var ? 1 : 0);
      for (const auto& a : node_->args) h = h * 1000003u ^ a.hash();
      if (h == 0) h = 1;
      node_->hash = h;
    }
    return node_->hash;
  }

  friend bool operator==(const Term& a, const Term& b) {
    if (a.node_ == b.node_) return true;
    if (a.hash() != b.hash()) return false;
    if (a.node_->is_var != b.node_->is_var || a.node_->head != b.node_->head) return false;
    if (a.node_->args.size() != b.node_->args.size()) return false;
    for (size_t i = 0; i < a.node_->args.size(); ++i)
      if (!(a.node_->args[i] == b.node_->args[i])) return false;
    return true;
  }
  friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }
  friend bool operator<(const Term& a, const Term& b) { return a.compare(b) < 0; }

  // Structural ordering: variables before applications, then by head and args.
  int compare(const Term& b) const {
    if (node_ == b.node_) return 0;
    if (is_var() != b.is_var()) return is_var() ? -1 : 1;
    if (int c = head().compare(b.head()); c != 0) return c < 0 ? -1 : 1;
    size_t n = std::min(args().size(), b.args().size());
    for (size_t i = 0; i < n; ++i)
      if (int c = args()[i].compare(b.args()[i]); c != 0) return c;
    if (args().size() != b.args().size()) return args().size() < b.args().size() ? -1 : 1;
    return 0;
  }

  std::string str() const {
    std::string out;
    print(out, nullptr);
    return out;
  }
  // Pretty-print honouring infix declarations from `sig` (may be null).
  std::string str(const Signature& sig) const {
    std::string out;
    print(out, &sig);
    return out;
  }

 private:
  struct Node {
    bool is_var;
    std::string head;
    std::vector<Term> args;
    mutable size_t hash;
  };
  explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  void print(std::string& out, const Signature* sig) const {
    if (is_var()) {
      out += head();
      return;
    }
    bool infix = sig && sig->contains(head()) && sig->at(head()).infix && args().size() == 2;
    if (infix) {
      out += '(';
      args()[0].print(out, sig);
      out += ' ';
      out += head();
      out += ' ';
      args()[1].print(out, sig);
      out += ')';
      return;
    }
    out += head();
    if (!args().empty()) {
      out += '(';
      for (size_t i = 0; i < args().size(); ++i) {
        if (i) out += ',';
        args()[i].print(out, sig);
      }
      out += ')';
    }
  }

  std::shared_ptr<const Node> node_;
};

struct TermHash {
  size_t operator()(const Term& t) const { return t.hash(); }
};

inline void collect_variables(const Term& t, std::set<std::string>& out) {
  if (t.is_var()) {
    out.insert(t.head());
    return;
  }
  for (const auto& a : t.args()) collect_variables(a, out);
}

// var(t): the set of variables occurring in t.
inline std::set<std::string> variables(const Term& t) {
  std::set<std::string> out;
  collect_variables(t, out);
  return out;
}

inline void check_arities(const Term& t, const Signature& sig) {
  if (t.is_var()) return;
  const auto& sym = sig.at(t.head());
  if (static_cast<int>(t.args().size()) != sym.arity)
    throw StructuralError("arity mismatch for " + t.head() + ": expected " +
                          std::to_string(sym.arity) + ", got " + std::to_string(t.args().size()));
  for (const auto& a : t.args()) check_arities(a, sig);
}

// A substitution: a partial map from variable names to terms. Variables
// outside the domain are left unchanged by apply().
class Substitution {
 public:
  Substitution() = default;
  Substitution(std::initializer_list<std::pair<const std::string, Term>> init) : map_(init) {}

  void bind(const std::string& var, Term t) { map_.insert_or_assign(var, std::move(t)); }
  bool bound(const std::string& var) const { return map_.count(var) != 0; }
  const Term* lookup(const std::string& var) const {
    auto it = map_.find(var);
    return it == map_.end() ? nullptr : &it->second;
  }
  const std::map<std::string, Term>& map() const { return map_; }
  bool empty() const { return map_.empty(); }

  Term apply(const Term& t) const {
    if (t.is_var()) {
      if (const Term* r = lookup(t.head())) return *r;
      return t;
    }
    if (t.args().empty()) return t;
    std::vector<Term> args;
    args.reserve(t.args().size());
    for (const auto& a : t.args()) args.push_back(apply(a));
    return Term::app(t.head(), std::move(args));
  }

  // compose(s1, s2): apply(compose(s1,s2), t) == apply(s2, apply(s1, t)).
  static Substitution compose(const Substitution& s1, const Substitution& s2) {
    Substitution out;
    for (const auto& [v, t] : s1.map_) out.bind(v, s2.apply(t));
    for (const auto& [v, t] : s2.map_)
      if (!out.bound(v)) out.bind(v, t);
    return out;
  }

 private:
  std::map<std::string, Term> map_;
};

// First-order matching: find s with s(pattern) == target and dom(s) = var(pattern).
// The target is treated as ground data, so no occurs-check is involved.
inline bool match_into(const Term& pattern, const Term& target, Substitution& s) {
  if (pattern.is_var()) {
    if (const Term* bound = s.lookup(pattern.head())) return *bound == target;
    s.bind(pattern.head(), target);
    return true;
  }
  if (target.is_var() || pattern.head() != target.head() ||
      pattern.args().size() != target.args().size())
    return false;
  for (size_t i = 0; i < pattern.args().size(); ++i)
    if (!match_into(pattern.args()[i], target.args()[i], s)) return false;
  return true;
}

inline std::optional<Substitution> match(const Term& pattern, const Term& target) {
  Substitution s;
  if (match_into(pattern, target, s)) return s;
  return std::nullopt;
}

// Fresh variable names use the '$' prefix, which no parser accepts, so they
// can never collide with user-written variables.
inline std::string fresh_var_name() {
  static std::atomic<uint64_t> counter{0};
  return "$" + std::to_string(++counter);
}

inline bool is_fresh_name(const std::string& name) { return !name.empty() && name[0] == '$'; }

}  // namespace sosforge
