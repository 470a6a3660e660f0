#include "sortref/refine.hpp"

#include <chrono>
#include <set>
#include <sstream>
#include <stdexcept>

#include "sortref/rule.hpp"

namespace sortref {

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

Probe run_probe(const StructureView& view, const CountTable& table, int k,
                const Rational& theta, const SearchOptions& opts,
                SolveResult& result) {
  SolveOptions so;
  so.time_limit_seconds = opts.time_limit_seconds;
  so.symmetry = opts.symmetry;
  double start = now_seconds();
  result = solve_native(view, table, k, theta, so);
  Probe p;
  p.k = k;
  p.theta = theta;
  p.outcome = result.outcome;
  p.seconds = now_seconds() - start;
  return p;
}

}  // namespace

SearchReport search_highest_theta(const StructureView& view, const Rule& rule,
                                  int k, const Rational& step,
                                  const SearchOptions& opts) {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  if (step <= 0) throw std::invalid_argument("step must be positive");
  CountTable table = build_count_table(view, rule, opts.limits);
  SearchReport report;
  report.mode = "highest-theta";
  report.base_sigma.favorable = table.sum_both();
  report.base_sigma.total = table.sum_antecedent();

  Rational theta = report.base_sigma.value();
  bool clamped = false;
  while (true) {
    if (theta >= 1) {
      theta = 1;
      clamped = true;
    }
    SolveResult result;
    report.probes.push_back(run_probe(view, table, k, theta, opts, result));
    if (result.outcome != Outcome::Feasible) break;
    report.best = result.refinement;
    if (clamped) break;
    theta += step;
  }
  return report;
}

SearchReport search_lowest_k(const StructureView& view, const Rule& rule,
                             const Rational& theta, SearchDirection direction,
                             const SearchOptions& opts) {
  if (theta < 0 || theta > 1)
    throw std::invalid_argument("theta must lie in [0, 1]");
  CountTable table = build_count_table(view, rule, opts.limits);
  SearchReport report;
  report.mode = "lowest-k";
  report.base_sigma.favorable = table.sum_both();
  report.base_sigma.total = table.sum_antecedent();

  int max_k = static_cast<int>(view.signatures.size());
  if (direction == SearchDirection::Up) {
    for (int k = 1; k <= max_k; ++k) {
      SolveResult result;
      report.probes.push_back(run_probe(view, table, k, theta, opts, result));
      if (result.outcome == Outcome::Unknown) break;
      if (result.outcome == Outcome::Feasible) {
        report.best = result.refinement;
        break;
      }
    }
  } else {
    for (int k = max_k; k >= 1; --k) {
      SolveResult result;
      report.probes.push_back(run_probe(view, table, k, theta, opts, result));
      if (result.outcome != Outcome::Feasible) break;
      report.best = result.refinement;
    }
  }
  return report;
}

namespace {

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Feasible:
      return "feasible";
    case Outcome::Infeasible:
      return "infeasible";
    default:
      return "unknown";
  }
}

}  // namespace

void write_report_jsonl(const SearchReport& report, std::ostream& out,
                        bool timings) {
  out << "{\"mode\":\"" << json_escape(report.mode) << "\",\"base_sigma\":\""
      << format_fraction(report.base_sigma.value()) << "\"}\n";
  for (const Probe& p : report.probes) {
    out << "{\"k\":" << p.k << ",\"theta\":\"" << format_fraction(p.theta)
        << "\",\"outcome\":\"" << outcome_name(p.outcome) << '"';
    if (timings) out << ",\"seconds\":" << p.seconds;
    out << "}\n";
  }
  if (report.best) {
    out << "{\"best\":{\"k_used\":" << report.best->k_used
        << ",\"threshold\":\"" << format_fraction(report.best->threshold)
        << "\",\"sorts\":[";
    for (std::size_t i = 0; i < report.best->sorts.size(); ++i) {
      if (i) out << ',';
      const SortInfo& s = report.best->sorts[i];
      out << "{\"signatures\":[";
      for (std::size_t j = 0; j < s.signature_indices.size(); ++j) {
        if (j) out << ',';
        out << s.signature_indices[j];
      }
      out << "],\"sigma\":\"" << format_fraction(s.sigma.value()) << "\"}";
    }
    out << "]}}\n";
  } else {
    out << "{\"best\":null}\n";
  }
}

bool UndirectedGraph::adjacent(int a, int b) const {
  for (const auto& [u, v] : edges)
    if ((u == a && v == b) || (u == b && v == a)) return true;
  return false;
}

UndirectedGraph parse_graph(std::istream& in) {
  UndirectedGraph g;
  std::string line;
  int lineno = 0;
  bool have_n = false;
  std::set<std::pair<int, int>> seen;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    if (!have_n) {
      if (!(ls >> g.n)) continue;  // blank or comment-only line
      if (g.n < 1) throw ParseError("node count must be positive", lineno);
      have_n = true;
      continue;
    }
    int u, v;
    if (!(ls >> u)) continue;
    if (!(ls >> v)) throw ParseError("edge line needs two endpoints", lineno);
    if (u < 1 || u > g.n || v < 1 || v > g.n)
      throw ParseError("edge endpoint out of range", lineno);
    if (u == v) throw ParseError("self-loops are not allowed", lineno);
    if (u > v) std::swap(u, v);
    if (seen.insert({u, v}).second) g.edges.emplace_back(u, v);
  }
  if (!have_n) throw ParseError("missing node count header", 0);
  return g;
}

Dataset build_coloring_gadget(const UndirectedGraph& g) {
  if (g.n < 1) throw std::invalid_argument("graph must have at least one node");
  for (const auto& [u, v] : g.edges)
    if (u == v) throw std::invalid_argument("self-loops are not allowed");

  const std::string pre = kGadgetPrefix;
  int n = g.n;
  std::vector<std::string> props;
  props.push_back(pre + "sp1");
  props.push_back(pre + "sp2");
  props.push_back(pre + "idp");
  for (int j = 1; j <= n; ++j) props.push_back(pre + "L" + std::to_string(j));
  for (int j = 1; j <= n; ++j) props.push_back(pre + "R" + std::to_string(j));

  Dataset d;
  auto add = [&](int row, int col) {
    d.triples.push_back(
        {pre + "r" + std::to_string(row), props[col], "\"1\""});
  };
  for (int row = 0; row < 4 * n; ++row) {
    int section = row / n;
    int i = row % n;
    bool sp1 = section >= 2;
    bool sp2 = section == 1 || section == 3;
    bool idp = section != 3;
    if (sp1) add(row, 0);
    if (sp2) add(row, 1);
    if (idp) add(row, 2);
    add(row, 3 + i);  // left column set: identity in every section
    if (section < 3) {
      add(row, 3 + n + i);
    } else {
      for (int j = 0; j < n; ++j)
        if (!g.adjacent(i + 1, j + 1)) add(row, 3 + n + j);
    }
  }
  for (const Triple& t : d.triples) {
    if (d.subjects.empty() || d.subjects.back() != t.subject)
      d.subjects.push_back(t.subject);
  }
  d.properties = props;
  return d;
}

Outcome decide_3colorable_via_refinement(const UndirectedGraph& g,
                                         const SearchOptions& opts) {
  Dataset d = build_coloring_gadget(g);
  StructureView view = build_view(d);
  Rule r0 = gadget_rule_r0(kGadgetPrefix);
  CountTable table = build_count_table(view, r0, opts.limits);
  SolveOptions so;
  so.time_limit_seconds = opts.time_limit_seconds;
  so.symmetry = opts.symmetry;

  // The solve is restricted to anchored partitions: a sort that contains the
  // lower-section row of node w must also contain one of w's auxiliary rows.
  // Without this side condition the split "all upper rows / all lower rows"
  // satisfies every per-sort threshold vacuously (neither part admits any
  // assignment of the antecedent, so sigma is 1 on both), which would make
  // every graph look 3-colorable. With anchoring, every node represented in a
  // sort is checked by r0 against every other represented node, so a sort has
  // sigma 1 exactly when its lower rows form an independent set, and
  // feasibility coincides with 3-colorability in both directions.
  std::size_t n_sigs = view.signatures.size();
  auto prop_index = [&](const std::string& name) {
    for (std::size_t p = 0; p < view.properties.size(); ++p)
      if (view.properties[p] == std::string(kGadgetPrefix) + name)
        return static_cast<int>(p);
    throw std::logic_error("gadget property missing: " + name);
  };
  int sp1 = prop_index("sp1");
  int sp2 = prop_index("sp2");
  std::vector<bool> is_lower(n_sigs);
  std::vector<int> node_of(n_sigs, -1);
  std::size_t first_lower = n_sigs;
  for (std::size_t s = 0; s < n_sigs; ++s) {
    const auto& bits = view.signatures[s].bits;
    is_lower[s] = bits[sp1] && bits[sp2];
    for (int j = 1; j <= g.n; ++j)
      if (bits[prop_index("L" + std::to_string(j))]) node_of[s] = j;
    if (is_lower[s] && first_lower == n_sigs) first_lower = s;
  }
  // Canonical signature order puts the sp1=sp2=1 lower rows last, so every
  // auxiliary row is already placed when a lower row is tried; the filter can
  // therefore decide anchoring from the partial assignment alone.
  for (std::size_t s = first_lower; s < n_sigs; ++s)
    if (!is_lower[s])
      throw std::logic_error("gadget signatures are not ordered aux-first");
  so.placement_filter = [&is_lower, &node_of, n_sigs](
                            std::size_t sig, int sort,
                            const std::vector<int>& sort_of) {
    if (!is_lower[sig]) return true;
    for (std::size_t q = 0; q < n_sigs; ++q)
      if (!is_lower[q] && node_of[q] == node_of[sig] && sort_of[q] == sort)
        return true;
    return false;
  };

  SolveResult result = solve_native(view, table, 3, Rational(1), so);
  return result.outcome;
}

}  // namespace sortref
