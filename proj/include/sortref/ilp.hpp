#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sortref/eval.hpp"
#include "sortref/rational.hpp"

namespace sortref {

struct IlpVariable {
  enum class Kind { X, U, T } kind;
  int sort;   // 1-based implicit sort index
  int index;  // signature / property / count-table entry index
  std::string name;
};

struct IlpConstraint {
  enum class Rel { Le, Ge, Eq } rel;
  std::vector<std::pair<int, BigInt>> terms;  // (variable index, coefficient)
  BigInt rhs;
  std::string name;
};

// The 0-1 feasibility system for ExistsSortRefinement: X assignment rows,
// U support links, T rough-assignment links and per-sort thresholds.
struct IlpModel {
  std::vector<IlpVariable> variables;
  std::vector<IlpConstraint> constraints;
  int k = 0;
  Rational theta;
  std::string rule_name;
  std::size_t n_signatures = 0;
  std::size_t n_properties = 0;
  std::size_t n_taus = 0;

  int x_index(int sort, int sig) const;   // sort is 1-based
  int u_index(int sort, int prop) const;
  int t_index(int sort, int tau) const;
};

IlpModel build_model(const StructureView& view, const CountTable& table,
                     const Rule& rule, int k, const Rational& theta,
                     std::size_t variable_cap = 10'000'000);

// hash(i) <= hash(i+1) ordering constraints; exponents are taken modulo
// exponent_cap, which bounds coefficients at the cost of hash collisions.
void add_symmetry_breaking(IlpModel& model, int exponent_cap = 63);

// CPLEX LP text: zero objective, constraints in model order, Binary section.
std::string export_lp(const IlpModel& model);

struct IlpSolution {
  std::vector<int> values;  // by variable index, each 0 or 1
};

// Exact, solver-independent constraint check.
bool verify_solution(const IlpModel& model, const IlpSolution& sol);

enum class Outcome { Feasible, Infeasible, Unknown };

struct SolveOptions {
  double time_limit_seconds = 0;  // 0 = unlimited
  bool symmetry = true;           // first-occurrence sort labeling
  // Optional side constraint on placements. Called before a signature is
  // tried in a sort with the signature index, the candidate sort, and the
  // partial assignment (-1 = unassigned); returning false prunes the branch.
  // Must be invariant under sort relabeling or symmetry breaking is unsound.
  std::function<bool(std::size_t sig, int sort, const std::vector<int>&)>
      placement_filter;
};

struct SortInfo {
  std::vector<int> signature_indices;
  Sigma sigma;
};

struct SortRefinement {
  int k_used = 0;
  Rational threshold;
  std::vector<SortInfo> sorts;  // nonempty sorts only
};

struct SolveResult {
  Outcome outcome = Outcome::Unknown;
  std::optional<SortRefinement> refinement;
  std::optional<std::vector<int>> sort_of_signature;  // 0-based sorts
};

// Exact branch and bound over X only; U and T are functionally determined.
SolveResult solve_native(const StructureView& view, const CountTable& table,
                         int k, const Rational& theta,
                         const SolveOptions& opts = {});

// Extends a signature->sort map to the full X/U/T vector (U = OR of member
// supports, T = 1 exactly for rough assignments valid in the sort).
IlpSolution solution_from_assignment(const IlpModel& model,
                                     const StructureView& view,
                                     const CountTable& table,
                                     const std::vector<int>& sort_of_signature);

}  // namespace sortref
