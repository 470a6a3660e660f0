#include "sortref/ilp.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>
#include <stdexcept>

namespace sortref {

int IlpModel::x_index(int sort, int sig) const {
  return (sort - 1) * static_cast<int>(n_signatures) + sig;
}

int IlpModel::u_index(int sort, int prop) const {
  return static_cast<int>(k * n_signatures) +
         (sort - 1) * static_cast<int>(n_properties) + prop;
}

int IlpModel::t_index(int sort, int tau) const {
  return static_cast<int>(k * (n_signatures + n_properties)) +
         (sort - 1) * static_cast<int>(n_taus) + tau;
}

IlpModel build_model(const StructureView& view, const CountTable& table,
                     const Rule& rule, int k, const Rational& theta,
                     std::size_t variable_cap) {
  if (k < 1) throw std::runtime_error("k must be >= 1");
  if (theta < 0 || theta > 1)
    throw std::runtime_error("theta must be in [0, 1]");

  IlpModel m;
  m.k = k;
  m.theta = theta;
  m.rule_name = rule.name;
  m.n_signatures = view.signatures.size();
  m.n_properties = view.properties.size();
  m.n_taus = table.entries.size();

  std::size_t n_vars =
      static_cast<std::size_t>(k) * (m.n_signatures + m.n_properties + m.n_taus);
  if (n_vars > variable_cap)
    throw std::runtime_error("ILP model exceeds configured variable cap");

  for (int i = 1; i <= k; ++i)
    for (std::size_t s = 0; s < m.n_signatures; ++s)
      m.variables.push_back({IlpVariable::Kind::X, i, static_cast<int>(s),
                             "X_" + std::to_string(i) + "_" + std::to_string(s)});
  for (int i = 1; i <= k; ++i)
    for (std::size_t p = 0; p < m.n_properties; ++p)
      m.variables.push_back({IlpVariable::Kind::U, i, static_cast<int>(p),
                             "U_" + std::to_string(i) + "_" + std::to_string(p)});
  for (int i = 1; i <= k; ++i)
    for (std::size_t t = 0; t < m.n_taus; ++t)
      m.variables.push_back({IlpVariable::Kind::T, i, static_cast<int>(t),
                             "T_" + std::to_string(i) + "_t" + std::to_string(t)});

  // each signature in exactly one implicit sort
  for (std::size_t s = 0; s < m.n_signatures; ++s) {
    IlpConstraint c;
    c.rel = IlpConstraint::Rel::Eq;
    c.rhs = 1;
    c.name = "assign_" + std::to_string(s);
    for (int i = 1; i <= k; ++i) c.terms.push_back({m.x_index(i, s), 1});
    m.constraints.push_back(std::move(c));
  }

  // U_{i,p} is the OR of the member signatures' support bits
  for (int i = 1; i <= k; ++i) {
    for (std::size_t p = 0; p < m.n_properties; ++p) {
      for (std::size_t s = 0; s < m.n_signatures; ++s) {
        if (!view.signatures[s].bits[p]) continue;
        IlpConstraint c;
        c.rel = IlpConstraint::Rel::Le;
        c.rhs = 0;
        c.name = "supp_" + std::to_string(i) + "_" + std::to_string(p) + "_" +
                 std::to_string(s);
        c.terms.push_back({m.x_index(i, static_cast<int>(s)), 1});
        c.terms.push_back({m.u_index(i, static_cast<int>(p)), -1});
        m.constraints.push_back(std::move(c));
      }
      IlpConstraint upper;
      upper.rel = IlpConstraint::Rel::Le;
      upper.rhs = 0;
      upper.name = "use_" + std::to_string(i) + "_" + std::to_string(p);
      upper.terms.push_back({m.u_index(i, static_cast<int>(p)), 1});
      for (std::size_t s = 0; s < m.n_signatures; ++s)
        if (view.signatures[s].bits[p])
          upper.terms.push_back({m.x_index(i, static_cast<int>(s)), -1});
      m.constraints.push_back(std::move(upper));
    }
  }

  // T_{i,tau} = 1 iff every signature and property of tau is in sort i
  const int n = static_cast<int>(table.arity);
  for (int i = 1; i <= k; ++i) {
    for (std::size_t t = 0; t < m.n_taus; ++t) {
      const RoughAssignment& tau = table.entries[t].tau;
      IlpConstraint lo;  // sum(X+U) <= T + 2n - 1
      lo.rel = IlpConstraint::Rel::Le;
      lo.rhs = 2 * n - 1;
      lo.name = "tlo_" + std::to_string(i) + "_" + std::to_string(t);
      IlpConstraint hi;  // 2n T <= sum(X+U)
      hi.rel = IlpConstraint::Rel::Le;
      hi.rhs = 0;
      hi.name = "thi_" + std::to_string(i) + "_" + std::to_string(t);
      for (auto [sig, p] : tau) {
        lo.terms.push_back({m.x_index(i, sig), 1});
        lo.terms.push_back({m.u_index(i, p), 1});
        hi.terms.push_back({m.x_index(i, sig), -1});
        hi.terms.push_back({m.u_index(i, p), -1});
      }
      lo.terms.push_back({m.t_index(i, static_cast<int>(t)), -1});
      hi.terms.push_back({m.t_index(i, static_cast<int>(t)), 2 * n});
      m.constraints.push_back(std::move(lo));
      m.constraints.push_back(std::move(hi));
    }
  }

  // theta2 * favorable >= theta1 * total, per sort
  const BigInt theta1 = boost::multiprecision::numerator(theta);
  const BigInt theta2 = boost::multiprecision::denominator(theta);
  for (int i = 1; i <= k; ++i) {
    IlpConstraint c;
    c.rel = IlpConstraint::Rel::Ge;
    c.rhs = 0;
    c.name = "threshold_" + std::to_string(i);
    for (std::size_t t = 0; t < m.n_taus; ++t) {
      BigInt coeff = theta2 * table.entries[t].count_both -
                     theta1 * table.entries[t].count_antecedent;
      if (coeff != 0)
        c.terms.push_back({m.t_index(i, static_cast<int>(t)), coeff});
    }
    m.constraints.push_back(std::move(c));
  }
  return m;
}

void add_symmetry_breaking(IlpModel& model, int exponent_cap) {
  if (exponent_cap < 1) throw std::runtime_error("exponent cap must be >= 1");
  for (int i = 1; i < model.k; ++i) {
    IlpConstraint c;
    c.rel = IlpConstraint::Rel::Le;
    c.rhs = 0;
    c.name = "hash_" + std::to_string(i);
    for (std::size_t s = 0; s < model.n_signatures; ++s) {
      BigInt coeff = BigInt(1) << (s % static_cast<std::size_t>(exponent_cap));
      c.terms.push_back({model.x_index(i, static_cast<int>(s)), coeff});
      c.terms.push_back({model.x_index(i + 1, static_cast<int>(s)), -coeff});
    }
    model.constraints.push_back(std::move(c));
  }
}

std::string export_lp(const IlpModel& model) {
  std::ostringstream out;
  out << "Minimize\n obj: 0\nSubject To\n";
  for (const IlpConstraint& c : model.constraints) {
    out << " " << c.name << ":";
    for (auto& [var, coeff] : c.terms) {
      if (coeff >= 0)
        out << " + " << coeff;
      else
        out << " - " << -coeff;
      out << " " << model.variables[var].name;
    }
    switch (c.rel) {
      case IlpConstraint::Rel::Le: out << " <= "; break;
      case IlpConstraint::Rel::Ge: out << " >= "; break;
      case IlpConstraint::Rel::Eq: out << " = "; break;
    }
    out << c.rhs << "\n";
  }
  out << "Binary\n";
  for (const IlpVariable& v : model.variables) out << " " << v.name << "\n";
  out << "End\n";
  return out.str();
}

bool verify_solution(const IlpModel& model, const IlpSolution& sol) {
  if (sol.values.size() != model.variables.size()) return false;
  for (int v : sol.values)
    if (v != 0 && v != 1) return false;
  for (const IlpConstraint& c : model.constraints) {
    BigInt lhs = 0;
    for (auto& [var, coeff] : c.terms) lhs += coeff * sol.values[var];
    switch (c.rel) {
      case IlpConstraint::Rel::Le:
        if (lhs > c.rhs) return false;
        break;
      case IlpConstraint::Rel::Ge:
        if (lhs < c.rhs) return false;
        break;
      case IlpConstraint::Rel::Eq:
        if (lhs != c.rhs) return false;
        break;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Native solver: depth-first search over signature->sort assignments in
// canonical signature order. U and T are functionally determined by X, so
// per-sort favorable/total counts are maintained incrementally. Pruning
// bound per sort: future rough assignments can add at most B (all still
// uncounted favorable weight) to both sides, and (F + B)/(T + B) is the
// best reachable value, so theta2*B_all < theta1*(T_i + B_all - F_i)
// proves the sort can never reach theta. At theta = 1 this is F_i < T_i.

namespace {

struct SortState {
  std::vector<bool> members;
  int member_count = 0;
  std::vector<int> prop_use;  // per property, count of member supports
  BigInt favorable = 0;       // sum of count_both over valid taus
  BigInt total = 0;           // sum of count_antecedent over valid taus
};

class NativeSolver {
 public:
  NativeSolver(const StructureView& view, const CountTable& table, int k,
               const Rational& theta, const SolveOptions& opts)
      : view_(view),
        table_(table),
        k_(k),
        theta1_(boost::multiprecision::numerator(theta)),
        theta2_(boost::multiprecision::denominator(theta)),
        opts_(opts) {
    for (const CountEntry& e : table.entries) b_all_ += e.count_both;
    sorts_.assign(k, SortState{});
    for (SortState& s : sorts_) {
      s.members.assign(view.signatures.size(), false);
      s.prop_use.assign(view.properties.size(), 0);
    }
    tau_valid_.assign(k, std::vector<bool>(table.entries.size(), false));
    assignment_.assign(view.signatures.size(), -1);
    deadline_valid_ = opts.time_limit_seconds > 0;
    deadline_ = std::chrono::steady_clock::now() +
                std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                    std::chrono::duration<double>(opts.time_limit_seconds));
  }

  SolveResult run() {
    SolveResult result;
    if (deadline_valid_ && std::chrono::steady_clock::now() > deadline_)
      return result;  // Unknown: the budget was spent before the search began
    try {
      if (search(0)) {
        result.outcome = Outcome::Feasible;
        result.sort_of_signature = assignment_;
        result.refinement = build_refinement();
      } else {
        result.outcome = Outcome::Infeasible;
      }
    } catch (const TimeoutError&) {
      result.outcome = Outcome::Unknown;
    }
    return result;
  }

 private:
  struct TimeoutError {};

  void check_time() {
    if (deadline_valid_ && (++ticks_ & 0x3ff) == 0 &&
        std::chrono::steady_clock::now() > deadline_)
      throw TimeoutError{};
  }

  bool sort_can_reach_theta(const SortState& s) const {
    // theta2 * (F + B_rem) >= theta1 * (T + B_rem), B_rem = B_all - F
    return theta2_ * b_all_ >= theta1_ * (s.total + b_all_ - s.favorable);
  }

  bool sort_meets_theta(const SortState& s) const {
    return theta2_ * s.favorable >= theta1_ * s.total;
  }

  bool search(std::size_t sig) {
    check_time();
    if (sig == view_.signatures.size()) {
      for (const SortState& s : sorts_)
        if (!sort_meets_theta(s)) return false;
      return true;
    }
    int max_sort = k_ - 1;
    if (opts_.symmetry) {
      int used = 0;
      while (used < k_ && sorts_[used].member_count > 0) ++used;
      // sorts are opened in order, so the first empty one is the frontier
      max_sort = std::min(k_ - 1, used);
    }
    for (int i = 0; i <= max_sort; ++i) {
      if (opts_.placement_filter && !opts_.placement_filter(sig, i, assignment_))
        continue;
      std::vector<int> newly_valid = add_to_sort(i, static_cast<int>(sig));
      assignment_[sig] = i;
      if (sort_can_reach_theta(sorts_[i]) && search(sig + 1)) return true;
      assignment_[sig] = -1;
      remove_from_sort(i, static_cast<int>(sig), newly_valid);
    }
    return false;
  }

  std::vector<int> add_to_sort(int i, int sig) {
    SortState& s = sorts_[i];
    s.members[sig] = true;
    ++s.member_count;
    for (std::size_t p = 0; p < view_.properties.size(); ++p)
      if (view_.signatures[sig].bits[p]) ++s.prop_use[p];
    std::vector<int> newly_valid;
    for (std::size_t t = 0; t < table_.entries.size(); ++t) {
      if (tau_valid_[i][t]) continue;
      const RoughAssignment& tau = table_.entries[t].tau;
      bool valid = true;
      for (auto [ts, tp] : tau)
        if (!s.members[ts] || s.prop_use[tp] == 0) {
          valid = false;
          break;
        }
      if (!valid) continue;
      tau_valid_[i][t] = true;
      s.favorable += table_.entries[t].count_both;
      s.total += table_.entries[t].count_antecedent;
      newly_valid.push_back(static_cast<int>(t));
    }
    return newly_valid;
  }

  void remove_from_sort(int i, int sig, const std::vector<int>& newly_valid) {
    SortState& s = sorts_[i];
    s.members[sig] = false;
    --s.member_count;
    for (std::size_t p = 0; p < view_.properties.size(); ++p)
      if (view_.signatures[sig].bits[p]) --s.prop_use[p];
    for (int t : newly_valid) {
      tau_valid_[i][t] = false;
      s.favorable -= table_.entries[t].count_both;
      s.total -= table_.entries[t].count_antecedent;
    }
  }

  SortRefinement build_refinement() const {
    SortRefinement r;
    r.threshold = Rational(theta1_, theta2_);
    for (int i = 0; i < k_; ++i) {
      SortInfo info;
      for (std::size_t sig = 0; sig < assignment_.size(); ++sig)
        if (assignment_[sig] == i)
          info.signature_indices.push_back(static_cast<int>(sig));
      if (info.signature_indices.empty()) continue;
      info.sigma.favorable = sorts_[i].favorable;
      info.sigma.total = sorts_[i].total;
      r.sorts.push_back(std::move(info));
    }
    r.k_used = static_cast<int>(r.sorts.size());
    return r;
  }

  const StructureView& view_;
  const CountTable& table_;
  int k_;
  BigInt theta1_, theta2_;
  SolveOptions opts_;
  BigInt b_all_ = 0;
  std::vector<SortState> sorts_;
  std::vector<std::vector<bool>> tau_valid_;
  std::vector<int> assignment_;
  bool deadline_valid_ = false;
  std::chrono::steady_clock::time_point deadline_;
  std::uint64_t ticks_ = 0;
};

}  // namespace

SolveResult solve_native(const StructureView& view, const CountTable& table,
                         int k, const Rational& theta,
                         const SolveOptions& opts) {
  if (k < 1) throw std::runtime_error("k must be >= 1");
  if (theta < 0 || theta > 1)
    throw std::runtime_error("theta must be in [0, 1]");
  return NativeSolver(view, table, k, theta, opts).run();
}

IlpSolution solution_from_assignment(const IlpModel& model,
                                     const StructureView& view,
                                     const CountTable& table,
                                     const std::vector<int>& sort_of_signature) {
  IlpSolution sol;
  sol.values.assign(model.variables.size(), 0);
  for (std::size_t sig = 0; sig < sort_of_signature.size(); ++sig)
    sol.values[model.x_index(sort_of_signature[sig] + 1,
                             static_cast<int>(sig))] = 1;
  for (int i = 1; i <= model.k; ++i) {
    for (std::size_t p = 0; p < model.n_properties; ++p) {
      bool used = false;
      for (std::size_t sig = 0; sig < sort_of_signature.size(); ++sig)
        if (sort_of_signature[sig] + 1 == i && view.signatures[sig].bits[p])
          used = true;
      if (used) sol.values[model.u_index(i, static_cast<int>(p))] = 1;
    }
    for (std::size_t t = 0; t < model.n_taus; ++t) {
      bool valid = true;
      for (auto [sig, p] : table.entries[t].tau) {
        if (sort_of_signature[sig] + 1 != i ||
            sol.values[model.u_index(i, p)] == 0) {
          valid = false;
          break;
        }
      }
      if (valid) sol.values[model.t_index(i, static_cast<int>(t))] = 1;
    }
  }
  return sol;
}

}  // namespace sortref
