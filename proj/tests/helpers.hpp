#pragma once

#include <algorithm>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sortref/dataset.hpp"
#include "sortref/eval.hpp"
#include "sortref/ilp.hpp"
#include "sortref/refine.hpp"
#include "sortref/rule.hpp"

namespace testutil {

using namespace sortref;

// Rebuilds the first-seen subject and property indexes from the triples.
inline void finalize(Dataset& d) {
  d.subjects.clear();
  d.properties.clear();
  for (const Triple& t : d.triples) {
    if (std::find(d.subjects.begin(), d.subjects.end(), t.subject) ==
        d.subjects.end())
      d.subjects.push_back(t.subject);
    if (std::find(d.properties.begin(), d.properties.end(), t.predicate) ==
        d.properties.end())
      d.properties.push_back(t.predicate);
  }
}

// A view with `n_subjects` random rows over `n_props` columns. Rows that
// come out all-zero get one random bit set so every subject survives.
inline StructureView random_view(std::mt19937& rng, int n_subjects,
                                 int n_props) {
  Dataset d;
  std::uniform_int_distribution<int> bit(0, 1);
  std::uniform_int_distribution<int> col(0, n_props - 1);
  for (int s = 0; s < n_subjects; ++s) {
    std::string subj = "urn:s" + std::to_string(s + 1);
    bool any = false;
    for (int p = 0; p < n_props; ++p) {
      if (bit(rng)) {
        d.triples.push_back({subj, "urn:p" + std::to_string(p + 1), "\"v\""});
        any = true;
      }
    }
    if (!any)
      d.triples.push_back(
          {subj, "urn:p" + std::to_string(col(rng) + 1), "\"v\""});
  }
  finalize(d);
  return build_view(d);
}

// Random well-formed rule with at most `max_vars` antecedent variables.
inline Rule random_rule(std::mt19937& rng, int max_vars) {
  std::uniform_int_distribution<int> nvars(1, max_vars);
  int n = nvars(rng);
  std::vector<std::string> vars;
  for (int i = 0; i < n; ++i) vars.push_back("c" + std::to_string(i + 1));

  std::uniform_int_distribution<int> pick_var(0, n - 1);
  std::uniform_int_distribution<int> pick_prop(1, 4);
  std::uniform_int_distribution<int> pick_subj(1, 6);
  std::uniform_int_distribution<int> pick_atom(0, 6);
  std::uniform_int_distribution<int> pick_bit(0, 1);

  auto atom = [&]() -> FormulaPtr {
    Atom a;
    a.var1 = vars[pick_var(rng)];
    switch (pick_atom(rng)) {
      case 0:
        a.kind = AtomKind::ValConst;
        a.value = pick_bit(rng);
        break;
      case 1:
        a.kind = AtomKind::PropConst;
        a.iri = "urn:p" + std::to_string(pick_prop(rng));
        break;
      case 2:
        a.kind = AtomKind::SubjConst;
        a.iri = "urn:s" + std::to_string(pick_subj(rng));
        break;
      case 3:
        a.kind = AtomKind::CellEq;
        a.var2 = vars[pick_var(rng)];
        break;
      case 4:
        a.kind = AtomKind::ValEq;
        a.var2 = vars[pick_var(rng)];
        break;
      case 5:
        a.kind = AtomKind::PropEq;
        a.var2 = vars[pick_var(rng)];
        break;
      default:
        a.kind = AtomKind::SubjEq;
        a.var2 = vars[pick_var(rng)];
        break;
    }
    return make_atom(a);
  };

  std::uniform_int_distribution<int> pick_node(0, 3);
  std::function<FormulaPtr(int)> gen = [&](int depth) -> FormulaPtr {
    if (depth == 0) return atom();
    switch (pick_node(rng)) {
      case 0:
        return make_not(gen(depth - 1));
      case 1:
        return make_and(gen(depth - 1), gen(depth - 1));
      case 2:
        return make_or(gen(depth - 1), gen(depth - 1));
      default:
        return atom();
    }
  };

  // The antecedent must mention every variable so that the arity is
  // exactly n; AND the generated formula with one atom per variable.
  FormulaPtr ant = gen(2);
  for (const std::string& v : vars) {
    Atom a;
    a.kind = AtomKind::CellEq;
    a.var1 = v;
    a.var2 = v;
    ant = make_and(ant, make_atom(a));
  }
  FormulaPtr cons = gen(2);
  // Rebind consequent variables into the antecedent's variable set: the
  // generator only ever uses vars[0..n), so this already holds.
  return make_rule(ant, cons, "random");
}

// Reference decision procedure: try every assignment of signatures to at
// most k sorts and test each nonempty sort's sigma directly.
inline bool exhaustive_feasible(const StructureView& view, const Rule& rule,
                                int k, const Rational& theta) {
  int m = static_cast<int>(view.signatures.size());
  std::vector<int> sort_of(m, 0);
  while (true) {
    bool ok = true;
    for (int i = 0; i < k && ok; ++i) {
      std::vector<bool> chosen(m, false);
      bool any = false;
      for (int s = 0; s < m; ++s)
        if (sort_of[s] == i) chosen[s] = any = true;
      if (!any) continue;
      StructureView sub = materialize_subview(view, chosen);
      Sigma sig = sigma_fast(sub, rule);
      if (sig.value() < theta) ok = false;
    }
    if (ok) return true;
    int pos = 0;
    while (pos < m && sort_of[pos] == k - 1) sort_of[pos++] = 0;
    if (pos == m) return false;
    ++sort_of[pos];
  }
}

inline bool brute_force_3colorable(const UndirectedGraph& g) {
  std::vector<int> color(g.n + 1, 0);
  std::function<bool(int)> go = [&](int v) -> bool {
    if (v > g.n) return true;
    for (int c = 1; c <= 3; ++c) {
      bool ok = true;
      for (const auto& [a, b] : g.edges) {
        int other = a == v ? b : b == v ? a : 0;
        if (other && other < v && color[other] == c) ok = false;
      }
      if (ok) {
        color[v] = c;
        if (go(v + 1)) return true;
        color[v] = 0;
      }
    }
    return false;
  };
  return go(1);
}

// The running two-signature example: N-1 subjects carrying only p and a
// single subject carrying both p and q.
inline StructureView make_d2(int n) {
  Dataset d;
  for (int i = 1; i < n; ++i)
    d.triples.push_back({"urn:s" + std::to_string(i), "urn:p", "\"v\""});
  d.triples.push_back({"urn:s" + std::to_string(n), "urn:p", "\"v\""});
  d.triples.push_back({"urn:s" + std::to_string(n), "urn:q", "\"v\""});
  finalize(d);
  return build_view(d);
}

// All-ones N x M view.
inline StructureView make_uniform(int n_subjects, int n_props) {
  Dataset d;
  for (int s = 1; s <= n_subjects; ++s)
    for (int p = 1; p <= n_props; ++p)
      d.triples.push_back({"urn:s" + std::to_string(s),
                           "urn:p" + std::to_string(p), "\"v\""});
  finalize(d);
  return build_view(d);
}

inline StructureView view_from_rows(const std::vector<std::string>& rows) {
  Dataset d;
  for (std::size_t s = 0; s < rows.size(); ++s)
    for (std::size_t p = 0; p < rows[s].size(); ++p)
      if (rows[s][p] == '1')
        d.triples.push_back({"urn:s" + std::to_string(s + 1),
                             "urn:p" + std::to_string(p + 1), "\"v\""});
  finalize(d);
  return build_view(d);
}

}  // namespace testutil
