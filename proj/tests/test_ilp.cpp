#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "helpers.hpp"
#include "sortref/ilp.hpp"

using namespace sortref;
using testutil::exhaustive_feasible;
using testutil::make_d2;
using testutil::random_view;

namespace {

IlpModel example_model(int k = 2, Rational theta = Rational(1)) {
  StructureView v = make_d2(3);
  Rule cov = builtin_rule(BuiltinKind::Cov);
  CountTable t = build_count_table(v, cov);
  return build_model(v, t, cov, k, theta);
}

int count_kind(const IlpModel& m, IlpVariable::Kind kind) {
  int n = 0;
  for (const auto& v : m.variables)
    if (v.kind == kind) ++n;
  return n;
}

int count_prefix(const IlpModel& m, const std::string& prefix) {
  int n = 0;
  for (const auto& c : m.constraints)
    if (c.name.rfind(prefix, 0) == 0) ++n;
  return n;
}

}  // namespace

TEST_CASE("model shape for the two-signature example") {
  IlpModel m = example_model();
  // 2 signatures, 2 properties, 4 stored taus, k = 2
  CHECK(count_kind(m, IlpVariable::Kind::X) == 4);
  CHECK(count_kind(m, IlpVariable::Kind::U) == 4);
  CHECK(count_kind(m, IlpVariable::Kind::T) == 8);
  CHECK(count_prefix(m, "assign_") == 2);
  CHECK(count_prefix(m, "tlo_") == 8);
  CHECK(count_prefix(m, "thi_") == 8);
  CHECK(count_prefix(m, "threshold_") == 2);
  // one support link per (sort, property, supporting signature):
  // supp(10)={p}, supp(11)={p,q} -> 3 per sort
  CHECK(count_prefix(m, "supp_") == 6);
  CHECK(count_prefix(m, "use_") == 4);
}

TEST_CASE("assignment constraints are equalities summing to one") {
  IlpModel m = example_model();
  int eq = 0;
  for (const auto& c : m.constraints)
    if (c.rel == IlpConstraint::Rel::Eq) {
      ++eq;
      CHECK(c.rhs == 1);
      CHECK(c.terms.size() == 2);  // k = 2 sorts
    }
  CHECK(eq == 2);
}

TEST_CASE("symmetry breaking adds k minus one constraints") {
  IlpModel m = example_model();
  std::size_t before = m.constraints.size();
  add_symmetry_breaking(m);
  CHECK(m.constraints.size() == before + 1);

  IlpModel m1 = example_model(1);
  std::size_t b1 = m1.constraints.size();
  add_symmetry_breaking(m1);
  CHECK(m1.constraints.size() == b1);  // k=1: nothing to order
}

TEST_CASE("symmetry exponents respect the cap") {
  IlpModel m = example_model(3);
  add_symmetry_breaking(m, 1);  // every exponent collapses to 2^0
  const IlpConstraint& c = m.constraints.back();
  for (const auto& [idx, coef] : c.terms) CHECK(abs(coef) == 1);
}

TEST_CASE("export_lp is deterministic and well formed") {
  IlpModel m = example_model();
  add_symmetry_breaking(m);
  std::string a = export_lp(m);
  std::string b = export_lp(m);
  CHECK(a == b);
  CHECK(a.find("Minimize") == 0);
  CHECK(a.find("Subject To") != std::string::npos);
  CHECK(a.find("Binary") != std::string::npos);
  CHECK(a.rfind("End\n") == a.size() - 4);
  CHECK(a.find("X_1_0") != std::string::npos);
  CHECK(a.find("U_2_1") != std::string::npos);
  CHECK(a.find("T_1_t0") != std::string::npos);
}

TEST_CASE("feasible witnesses verify and perturbations fail") {
  StructureView v = make_d2(3);
  Rule cov = builtin_rule(BuiltinKind::Cov);
  CountTable t = build_count_table(v, cov);
  IlpModel m = build_model(v, t, cov, 2, Rational(1));
  SolveResult res = solve_native(v, t, 2, Rational(1));
  REQUIRE(res.outcome == Outcome::Feasible);
  REQUIRE(res.sort_of_signature.has_value());
  IlpSolution sol = solution_from_assignment(m, v, t, *res.sort_of_signature);
  CHECK(verify_solution(m, sol));
  // flipping any X variable breaks the assignment equalities
  for (std::size_t i = 0; i < m.variables.size(); ++i) {
    if (m.variables[i].kind != IlpVariable::Kind::X) continue;
    IlpSolution bad = sol;
    bad.values[i] ^= 1;
    CHECK(!verify_solution(m, bad));
  }
  // non-binary values are rejected
  IlpSolution frac = sol;
  frac.values[0] = 2;
  CHECK(!verify_solution(m, frac));
}

TEST_CASE("k=1 feasibility is exactly the sigma threshold test") {
  StructureView v = make_d2(3);
  Rule cov = builtin_rule(BuiltinKind::Cov);
  CountTable t = build_count_table(v, cov);
  Rational s = sigma_fast(v, cov).value();  // 2/3
  CHECK(solve_native(v, t, 1, s).outcome == Outcome::Feasible);
  CHECK(solve_native(v, t, 1, s + Rational(1, 1000)).outcome ==
        Outcome::Infeasible);
  CHECK(solve_native(v, t, 1, Rational(0)).outcome == Outcome::Feasible);
}

TEST_CASE("native solver agrees with exhaustive enumeration") {
  std::mt19937 rng(99);
  std::vector<Rule> rules = {builtin_rule(BuiltinKind::Cov),
                             builtin_rule(BuiltinKind::Sim)};
  std::vector<Rational> thetas = {Rational(0), Rational(1, 4), Rational(1, 2),
                                  Rational(3, 4), Rational(1)};
  std::uniform_int_distribution<int> ns(1, 6), np(1, 4);
  for (int i = 0; i < 25; ++i) {
    StructureView v = random_view(rng, ns(rng), np(rng));
    if (v.signatures.size() > 5) continue;
    for (const Rule& r : rules) {
      CountTable t = build_count_table(v, r);
      for (int k = 1; k <= 3; ++k) {
        for (const Rational& theta : thetas) {
          SolveResult res = solve_native(v, t, k, theta);
          bool expect = exhaustive_feasible(v, r, k, theta);
          CHECK(res.outcome ==
                (expect ? Outcome::Feasible : Outcome::Infeasible));
          if (res.outcome == Outcome::Feasible) {
            // the witness must verify against the full ILP model
            IlpModel m = build_model(v, t, r, k, theta);
            IlpSolution sol =
                solution_from_assignment(m, v, t, *res.sort_of_signature);
            CHECK(verify_solution(m, sol));
            // and every reported sort must meet the threshold
            for (const SortInfo& s : res.refinement->sorts)
              CHECK(s.sigma.value() >= theta);
          }
        }
      }
    }
  }
}

TEST_CASE("solver outcome is unchanged by symmetry breaking") {
  std::mt19937 rng(7);
  std::vector<Rule> rules = {builtin_rule(BuiltinKind::Cov),
                             builtin_rule(BuiltinKind::Sim)};
  std::uniform_int_distribution<int> ns(1, 6), np(1, 4);
  for (int i = 0; i < 15; ++i) {
    StructureView v = random_view(rng, ns(rng), np(rng));
    for (const Rule& r : rules) {
      CountTable t = build_count_table(v, r);
      for (int k = 1; k <= 3; ++k) {
        SolveOptions with, without;
        without.symmetry = false;
        SolveResult a = solve_native(v, t, k, Rational(3, 4), with);
        SolveResult b = solve_native(v, t, k, Rational(3, 4), without);
        CHECK(a.outcome == b.outcome);
      }
    }
  }
}

TEST_CASE("time limit yields unknown") {
  // a gadget instance large enough that a microscopic budget expires
  UndirectedGraph g;
  g.n = 5;
  g.edges = {{1, 2}, {2, 3}, {3, 4}, {4, 5}, {1, 5}};
  Dataset d = build_coloring_gadget(g);
  StructureView v = build_view(d);
  Rule r0 = gadget_rule_r0();
  CountTable t = build_count_table(v, r0);
  SolveOptions opts;
  opts.time_limit_seconds = 1e-9;
  SolveResult res = solve_native(v, t, 3, Rational(1), opts);
  CHECK(res.outcome == Outcome::Unknown);
}

TEST_CASE("variable cap") {
  StructureView v = make_d2(3);
  Rule cov = builtin_rule(BuiltinKind::Cov);
  CountTable t = build_count_table(v, cov);
  CHECK_THROWS(build_model(v, t, cov, 2, Rational(1), 4));
}
