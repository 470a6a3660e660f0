#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sortref/dataset.hpp"
#include "sortref/eval.hpp"
#include "sortref/ilp.hpp"
#include "sortref/rational.hpp"
#include "sortref/refine.hpp"
#include "sortref/render.hpp"
#include "sortref/rule.hpp"

namespace {

constexpr int kExitFeasible = 0;
constexpr int kExitInfeasible = 1;
constexpr int kExitUnknown = 2;
constexpr int kExitUsage = 64;
constexpr int kExitIo = 65;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shared options most subcommands need.
struct CommonOpts {
  std::string input;
  std::string sort_iri;
  std::vector<std::string> builtins;
  std::string rule_file;
};

// Accepts either an N-Triples file or a SIGV1 signature cache.
sortref::StructureView load_input(const CommonOpts& c) {
  std::ifstream in(c.input);
  if (!in) throw IoError("cannot open input file: " + c.input);
  std::string head;
  in >> head;
  in.seekg(0);
  if (head == "SIGV1") {
    if (!c.sort_iri.empty())
      throw IoError("--sort requires raw triples, not a signature cache");
    return sortref::load_view(in);
  }
  sortref::Dataset d = sortref::parse_ntriples(in);
  if (!c.sort_iri.empty()) d = sortref::filter_by_sort(d, c.sort_iri);
  return sortref::build_view(d, &std::cerr);
}

std::vector<sortref::Rule> load_rules(const CommonOpts& c) {
  std::vector<sortref::Rule> rules;
  for (const std::string& spec : c.builtins)
    rules.push_back(sortref::builtin_rule_from_spec(spec));
  if (!c.rule_file.empty())
    rules.push_back(sortref::parse_rule_file(c.rule_file));
  if (rules.empty())
    throw CLI::ValidationError("need at least one --builtin or --rule-file");
  return rules;
}

std::string sigma_string(const sortref::Rational& v) {
  return sortref::format_fraction(v) + " (" + sortref::format_decimal(v, 2) +
         ")";
}

sortref::Rational parse_theta(const std::string& text) {
  auto v = sortref::parse_rational(text);
  if (!v) throw CLI::ValidationError("cannot parse theta: " + text);
  if (*v < 0 || *v > 1)
    throw CLI::ValidationError("theta must lie in [0, 1]");
  return *v;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open output file: " + path);
  return out;
}

void add_common(CLI::App* cmd, CommonOpts& c, bool with_rules = true) {
  cmd->add_option("--input", c.input, "N-Triples file or SIGV1 cache")
      ->required();
  cmd->add_option("--sort", c.sort_iri, "restrict to subjects typed with IRI");
  if (with_rules) {
    cmd->add_option("--builtin", c.builtins,
                    "cov | sim | dep:<p1>,<p2> | symdep:<p1>,<p2> | "
                    "depdisj:<p1>,<p2> (repeatable)");
    cmd->add_option("--rule-file", c.rule_file, "custom rule file");
  }
}

int cmd_profile(const CommonOpts& c) {
  sortref::StructureView view = load_input(c);
  std::uint64_t cells = 0;
  for (const auto& sig : view.signatures)
    for (bool b : sig.bits) cells += b ? sig.multiplicity : 0;
  std::cout << "subjects=" << view.total_subjects
            << " properties=" << view.properties.size()
            << " signatures=" << view.signatures.size() << " cells=" << cells
            << "\n";
  for (const sortref::Rule& rule : load_rules(c)) {
    sortref::Sigma s = sortref::sigma_fast(view, rule);
    std::cout << rule.name << "=" << sigma_string(s.value()) << "\n";
  }
  return kExitFeasible;
}

int cmd_dep_table(const CommonOpts& c, std::vector<std::string> props,
                  bool all_pairs) {
  sortref::StructureView view = load_input(c);
  if (all_pairs) {
    props = view.properties;
  } else if (props.empty()) {
    throw CLI::ValidationError("list properties with --props or --all-pairs");
  }
  for (const std::string& p : props)
    if (view.property_index(p) < 0 && !all_pairs)
      throw IoError("property not in view: " + p);

  std::cout << "# sigma_Dep(p1, p2) by row p1, column p2\n";
  for (const std::string& p1 : props) {
    std::cout << p1;
    for (const std::string& p2 : props) {
      // Dep(p, p) is 1: every holder of p holds p, vacuously so if nobody
      // does.
      sortref::Rational v = 1;
      if (p1 != p2) {
        sortref::Rule r = sortref::builtin_rule(sortref::BuiltinKind::Dep, p1, p2);
        v = sortref::sigma_fast(view, r).value();
      }
      std::cout << '\t' << sortref::format_decimal(v, 2);
    }
    std::cout << '\n';
  }

  std::cout << "# sigma_SymDep ranking, best first\n";
  std::vector<std::pair<sortref::Rational, std::pair<std::string, std::string>>>
      ranked;
  for (std::size_t i = 0; i < props.size(); ++i)
    for (std::size_t j = i + 1; j < props.size(); ++j) {
      sortref::Rule r = sortref::builtin_rule(sortref::BuiltinKind::SymDep,
                                              props[i], props[j]);
      ranked.push_back(
          {sortref::sigma_fast(view, r).value(), {props[i], props[j]}});
    }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (const auto& [v, pq] : ranked)
    std::cout << pq.first << '\t' << pq.second << '\t' << sigma_string(v)
              << '\n';
  return kExitFeasible;
}

void dump_refinement(const sortref::StructureView& view,
                     const sortref::SortRefinement& ref, std::ostream& out) {
  out << "k_used=" << ref.k_used
      << " threshold=" << sortref::format_fraction(ref.threshold) << "\n";
  for (std::size_t i = 0; i < ref.sorts.size(); ++i) {
    const sortref::SortInfo& s = ref.sorts[i];
    out << "sort " << i + 1 << " sigma=" << sigma_string(s.sigma.value())
        << "\n";
    for (int sig : s.signature_indices) {
      const sortref::SignatureRow& row = view.signatures[sig];
      out << "  " << sortref::signature_bitstring(row) << " x"
          << row.multiplicity << " " << row.sample_subject << "\n";
    }
  }
}

int cmd_refine(const CommonOpts& c, const std::string& mode, int k,
               const std::string& theta_text, const std::string& direction,
               double time_limit, const std::string& out_path, bool timings) {
  sortref::StructureView view = load_input(c);
  std::vector<sortref::Rule> rules = load_rules(c);
  if (rules.size() != 1)
    throw CLI::ValidationError("refine takes exactly one rule");
  sortref::SearchOptions opts;
  opts.time_limit_seconds = time_limit;

  sortref::SearchReport report;
  if (mode == "highest-theta") {
    report = sortref::search_highest_theta(view, rules[0], k,
                                           sortref::Rational(1, 100), opts);
  } else if (mode == "lowest-k") {
    sortref::Rational theta = parse_theta(theta_text);
    auto dir = direction == "down" ? sortref::SearchDirection::Down
                                   : sortref::SearchDirection::Up;
    report = sortref::search_lowest_k(view, rules[0], theta, dir, opts);
  } else if (mode == "fixed") {
    sortref::Rational theta = parse_theta(theta_text);
    sortref::CountTable table =
        sortref::build_count_table(view, rules[0], opts.limits);
    sortref::SolveOptions so;
    so.time_limit_seconds = time_limit;
    sortref::SolveResult result =
        sortref::solve_native(view, table, k, theta, so);
    report.mode = "fixed";
    report.base_sigma.favorable = table.sum_both();
    report.base_sigma.total = table.sum_antecedent();
    report.probes.push_back({k, theta, result.outcome, 0});
    if (result.refinement) report.best = result.refinement;
  } else {
    throw CLI::ValidationError("mode must be highest-theta, lowest-k or fixed");
  }

  if (!out_path.empty()) {
    auto out = open_out(out_path);
    sortref::write_report_jsonl(report, out, timings);
  }
  std::cout << "base sigma " << sigma_string(report.base_sigma.value()) << "\n";
  for (const sortref::Probe& p : report.probes) {
    std::cout << "probe k=" << p.k
              << " theta=" << sortref::format_fraction(p.theta) << " -> "
              << (p.outcome == sortref::Outcome::Feasible     ? "feasible"
                  : p.outcome == sortref::Outcome::Infeasible ? "infeasible"
                                                              : "unknown");
    if (timings) std::cout << " (" << p.seconds << "s)";
    std::cout << "\n";
  }
  if (report.best) {
    dump_refinement(view, *report.best, std::cout);
    return kExitFeasible;
  }
  bool timed_out = !report.probes.empty() &&
                   report.probes.back().outcome == sortref::Outcome::Unknown;
  return timed_out ? kExitUnknown : kExitInfeasible;
}

int cmd_export_lp(const CommonOpts& c, int k, const std::string& theta_text,
                  bool no_symmetry, int exponent_cap,
                  const std::string& out_path) {
  sortref::StructureView view = load_input(c);
  std::vector<sortref::Rule> rules = load_rules(c);
  if (rules.size() != 1)
    throw CLI::ValidationError("export-lp takes exactly one rule");
  sortref::Rational theta = parse_theta(theta_text);
  sortref::CountTable table = sortref::build_count_table(view, rules[0]);
  sortref::IlpModel model =
      sortref::build_model(view, table, rules[0], k, theta);
  if (!no_symmetry) sortref::add_symmetry_breaking(model, exponent_cap);
  auto out = open_out(out_path);
  out << sortref::export_lp(model);
  std::cout << "variables=" << model.variables.size()
            << " constraints=" << model.constraints.size() << "\n";
  return kExitFeasible;
}

int cmd_render(const CommonOpts& c, const std::string& out_path,
               const std::string& format, bool log_scale, int cell_width,
               int k, const std::string& theta_text) {
  sortref::StructureView view = load_input(c);
  sortref::RenderOptions opts;
  opts.format =
      format == "svg" ? sortref::ImageFormat::Svg : sortref::ImageFormat::Pgm;
  opts.log_scale = log_scale;
  opts.cell_width = cell_width;

  if (k <= 0) {
    auto out = open_out(out_path);
    sortref::render_view(view, opts, out);
    return kExitFeasible;
  }

  // Per-sort images of a refinement at the given k and theta.
  std::vector<sortref::Rule> rules = load_rules(c);
  if (rules.size() != 1)
    throw CLI::ValidationError("per-sort render takes exactly one rule");
  sortref::Rational theta = parse_theta(theta_text);
  sortref::CountTable table = sortref::build_count_table(view, rules[0]);
  sortref::SolveResult result =
      sortref::solve_native(view, table, k, theta);
  if (result.outcome != sortref::Outcome::Feasible) {
    std::cerr << "no refinement to render\n";
    return result.outcome == sortref::Outcome::Infeasible ? kExitInfeasible
                                                          : kExitUnknown;
  }
  auto dot = out_path.rfind('.');
  std::string stem = dot == std::string::npos ? out_path : out_path.substr(0, dot);
  std::string ext = dot == std::string::npos
                        ? "." + sortref::format_extension(opts.format)
                        : out_path.substr(dot);
  int index = 0;
  for (const sortref::SortInfo& s : result.refinement->sorts) {
    std::vector<bool> chosen(view.signatures.size(), false);
    for (int sig : s.signature_indices) chosen[sig] = true;
    sortref::StructureView sub = sortref::materialize_subview(view, chosen);
    auto out = open_out(stem + ".sort" + std::to_string(++index) + ext);
    sortref::render_view(sub, opts, out);
  }
  std::cout << "wrote " << index << " sort images\n";
  return kExitFeasible;
}

int cmd_gadget(const std::string& graph_path, const std::string& out_path,
               const std::string& rule_out) {
  std::ifstream in(graph_path);
  if (!in) throw IoError("cannot open graph file: " + graph_path);
  sortref::UndirectedGraph g = sortref::parse_graph(in);
  sortref::Dataset d = sortref::build_coloring_gadget(g);
  auto out = open_out(out_path);
  sortref::write_ntriples(d, out);
  std::cout << "subjects=" << d.subjects.size()
            << " properties=" << d.properties.size()
            << " triples=" << d.triples.size() << "\n";
  if (!rule_out.empty()) {
    auto rout = open_out(rule_out);
    rout << "# coloring gadget rule\n"
         << sortref::print_rule(sortref::gadget_rule_r0()) << "\n";
  }
  return kExitFeasible;
}

int cmd_cache(const CommonOpts& c, const std::string& out_path) {
  sortref::StructureView view = load_input(c);
  auto out = open_out(out_path);
  sortref::save_view(view, out);
  std::cout << "cached " << view.signatures.size() << " signatures over "
            << view.properties.size() << " properties\n";
  return kExitFeasible;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structuredness profiling and sort refinement for RDF data"};
  app.require_subcommand(1);

  CommonOpts profile_opts;
  auto* profile = app.add_subcommand("profile", "dataset metrics and sigma");
  add_common(profile, profile_opts);

  CommonOpts dep_opts;
  std::vector<std::string> dep_props;
  bool dep_all = false;
  auto* dep = app.add_subcommand("dep-table", "Dep/SymDep tables");
  add_common(dep, dep_opts, false);
  dep->add_option("--props", dep_props, "property IRIs to tabulate");
  dep->add_flag("--all-pairs", dep_all, "tabulate every property pair");

  CommonOpts refine_opts;
  std::string mode = "fixed", theta_text = "1", direction = "up",
              refine_out;
  int k = 1;
  double time_limit = 0;
  bool timings = false;
  auto* refine = app.add_subcommand("refine", "search for sort refinements");
  add_common(refine, refine_opts);
  refine->add_option("--mode", mode, "fixed | highest-theta | lowest-k");
  refine->add_option("--k", k, "sort budget");
  refine->add_option("--theta", theta_text, "threshold, fraction or decimal");
  refine->add_option("--direction", direction, "lowest-k sweep: up | down");
  refine->add_option("--time-limit", time_limit, "seconds per probe");
  refine->add_option("--out", refine_out, "JSON-lines report path");
  refine->add_flag("--timings", timings, "include wall times in output");

  CommonOpts lp_opts;
  std::string lp_theta = "1", lp_out;
  int lp_k = 1, exponent_cap = 63;
  bool no_symmetry = false;
  auto* lp = app.add_subcommand("export-lp", "write the 0-1 model as LP text");
  add_common(lp, lp_opts);
  lp->add_option("--k", lp_k, "sort budget");
  lp->add_option("--theta", lp_theta, "threshold");
  lp->add_option("--out", lp_out, "LP file path")->required();
  lp->add_flag("--no-symmetry", no_symmetry, "omit hash ordering constraints");
  lp->add_option("--exponent-cap", exponent_cap, "hash exponent modulus");

  CommonOpts render_opts;
  std::string render_out, render_format = "pgm", render_theta = "1";
  bool log_scale = false;
  int cell_width = 1, render_k = 0;
  auto* render = app.add_subcommand("render", "matrix raster (PGM or SVG)");
  add_common(render, render_opts);
  render->add_option("--out", render_out, "image path")->required();
  render->add_option("--format", render_format, "pgm | svg");
  render->add_flag("--log-scale", log_scale, "log2 band heights");
  render->add_option("--cell-width", cell_width, "pixels per column");
  render->add_option("--k", render_k, "also render each sort of a refinement");
  render->add_option("--theta", render_theta, "threshold for --k");

  std::string graph_path, gadget_out, gadget_rule_out;
  auto* gadget = app.add_subcommand("gadget", "3-coloring gadget dataset");
  gadget->add_option("--graph", graph_path, "edge-list graph file")->required();
  gadget->add_option("--out", gadget_out, "N-Triples output path")->required();
  gadget->add_option("--rule-out", gadget_rule_out, "write the gadget rule");

  CommonOpts cache_opts;
  std::string cache_out;
  auto* cache = app.add_subcommand("cache", "save the signature view");
  add_common(cache, cache_opts, false);
  cache->add_option("--out", cache_out, "SIGV1 cache path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (profile->parsed()) return cmd_profile(profile_opts);
    if (dep->parsed()) return cmd_dep_table(dep_opts, dep_props, dep_all);
    if (refine->parsed())
      return cmd_refine(refine_opts, mode, k, theta_text, direction,
                        time_limit, refine_out, timings);
    if (lp->parsed())
      return cmd_export_lp(lp_opts, lp_k, lp_theta, no_symmetry, exponent_cap,
                           lp_out);
    if (render->parsed())
      return cmd_render(render_opts, render_out, render_format, log_scale,
                        cell_width, render_k, render_theta);
    if (gadget->parsed())
      return cmd_gadget(graph_path, gadget_out, gadget_rule_out);
    if (cache->parsed()) return cmd_cache(cache_opts, cache_out);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}
