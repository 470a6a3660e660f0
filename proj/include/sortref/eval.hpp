#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "sortref/dataset.hpp"
#include "sortref/rational.hpp"
#include "sortref/rule.hpp"

namespace sortref {

// The view with every signature expanded back to individual subjects.
// Copy 0 of a signature keeps the sample subject's name; clones get
// deterministic names "<sample>#<copy>". subj(c)=<iri> atoms resolve
// against these names.
struct ExpandedView {
  const StructureView* view = nullptr;
  std::vector<int> sig_of_subject;  // expanded subject index -> signature
  std::vector<std::string> subject_names;

  std::size_t subject_count() const { return sig_of_subject.size(); }
  std::size_t property_count() const { return view->properties.size(); }
  bool cell(int subject, int property) const {
    return view->signatures[sig_of_subject[subject]].bits[property];
  }
};

ExpandedView expand_view(const StructureView& view);

struct Cell {
  int subject;
  int property;
  friend bool operator==(const Cell&, const Cell&) = default;
};

using Assignment = std::map<std::string, Cell>;

// The nine satisfaction clauses, evaluated literally on the expanded matrix.
bool satisfies(const ExpandedView& m, const Assignment& rho, const Formula& f);

struct Sigma {
  BigInt favorable = 0;
  BigInt total = 0;
  Rational value() const {
    return total == 0 ? Rational(1) : Rational(favorable, total);
  }
};

struct EvalLimits {
  // sigma_naive refuses when (|S|*|P|)^n exceeds this
  double naive_assignment_guard = 1e8;
  // build_count_table aborts past either of these
  std::size_t max_table_entries = 2'000'000;
  std::size_t max_search_nodes = 200'000'000;
};

// Small-instance oracle: full enumeration of all (|S|*|P|)^n assignments.
Sigma sigma_naive(const StructureView& view, const Rule& rule,
                  const EvalLimits& limits = {});

// One (signature index, property index) pair per rule variable, in the
// order of Rule::variables.
using RoughAssignment = std::vector<std::pair<int, int>>;

struct CountEntry {
  RoughAssignment tau;
  BigInt count_antecedent;  // count(phi1, tau, M)
  BigInt count_both;        // count(phi1 && phi2, tau, M)
};

struct CountTable {
  std::size_t arity = 0;  // n = |var(phi1)|
  std::vector<CountEntry> entries;

  BigInt sum_antecedent() const;
  BigInt sum_both() const;
};

// Exact number of assignments compatible with tau that satisfy `f`.
BigInt count_for_tau(const StructureView& view, const Rule& rule,
                     const Formula& f, const RoughAssignment& tau);

// All tau with count(phi1, tau, M) > 0, in lexicographic (signature,
// property) order over the rule's variable order.
CountTable build_count_table(const StructureView& view, const Rule& rule,
                             const EvalLimits& limits = {});

Sigma sigma_fast(const StructureView& view, const Rule& rule,
                 const EvalLimits& limits = {});

// sigma_r restricted to the implicit sort made of the chosen signatures;
// equals sigma_fast on the materialized sub-view.
Sigma sigma_subset(const CountTable& table, const StructureView& view,
                   const std::vector<bool>& chosen);

// The sub-view induced by the chosen signatures: columns restricted to
// properties actually used, signatures re-canonicalized.
StructureView materialize_subview(const StructureView& view,
                                  const std::vector<bool>& chosen);

// Debug TSV: tau<TAB>count_antecedent<TAB>count_both.
void dump_count_table(const CountTable& table, std::ostream& out);

}  // namespace sortref
