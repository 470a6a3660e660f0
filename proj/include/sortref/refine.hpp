#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "sortref/dataset.hpp"
#include "sortref/eval.hpp"
#include "sortref/ilp.hpp"

namespace sortref {

struct Probe {
  int k;
  Rational theta;
  Outcome outcome;
  double seconds = 0;
};

struct SearchReport {
  std::string mode;  // "highest-theta" or "lowest-k"
  std::vector<Probe> probes;
  std::optional<SortRefinement> best;
  Sigma base_sigma;  // sigma_r of the whole view
};

struct SearchOptions {
  double time_limit_seconds = 0;  // per probe
  bool symmetry = true;
  EvalLimits limits;
};

// Sequential sweep from theta = sigma_r(D) upward in `step` increments,
// clamped at 1; stops at the first infeasible or unknown probe.
SearchReport search_highest_theta(const StructureView& view, const Rule& rule,
                                  int k, const Rational& step = Rational(1, 100),
                                  const SearchOptions& opts = {});

enum class SearchDirection { Up, Down };

// Up: probe k = 1, 2, ... until feasible. Down: probe k = |Lambda|, ...
// until infeasible, keeping the last feasible refinement.
SearchReport search_lowest_k(const StructureView& view, const Rule& rule,
                             const Rational& theta, SearchDirection direction,
                             const SearchOptions& opts = {});

// One JSON object per line; wall times are included only when `timings`
// is set so that default output is byte-deterministic.
void write_report_jsonl(const SearchReport& report, std::ostream& out,
                        bool timings = false);

struct UndirectedGraph {
  int n = 0;                                  // nodes are 1..n
  std::vector<std::pair<int, int>> edges;     // i < j, no self-loops

  bool adjacent(int a, int b) const;
};

// Graph file: first non-comment line `n`, then `u v` edge lines.
UndirectedGraph parse_graph(std::istream& in);

inline constexpr const char* kGadgetPrefix = "urn:gadget:";

// The (4n) x (2n+3) block-matrix dataset used by the 3-coloring reduction.
// Subjects r0..r{4n-1}, properties sp1, sp2, idp, L1..Ln, R1..Rn.
Dataset build_coloring_gadget(const UndirectedGraph& g);

// Feasibility of (gadget view, r0, k = 3, theta = 1).
Outcome decide_3colorable_via_refinement(const UndirectedGraph& g,
                                         const SearchOptions& opts = {});

}  // namespace sortref
