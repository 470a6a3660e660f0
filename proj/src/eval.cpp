#include "sortref/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace sortref {

ExpandedView expand_view(const StructureView& view) {
  ExpandedView e;
  e.view = &view;
  for (size_t si = 0; si < view.signatures.size(); ++si) {
    const SignatureRow& sig = view.signatures[si];
    for (std::uint64_t copy = 0; copy < sig.multiplicity; ++copy) {
      e.sig_of_subject.push_back(static_cast<int>(si));
      e.subject_names.push_back(copy == 0 ? sig.sample_subject
                                          : sig.sample_subject + "#" +
                                                std::to_string(copy));
    }
  }
  return e;
}

namespace {

Cell lookup(const Assignment& rho, const std::string& var) {
  auto it = rho.find(var);
  if (it == rho.end())
    throw std::runtime_error("unbound variable in assignment: $" + var);
  return it->second;
}

}  // namespace

bool satisfies(const ExpandedView& m, const Assignment& rho, const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::Not:
      return !satisfies(m, rho, *f.left);
    case Formula::Kind::And:
      return satisfies(m, rho, *f.left) && satisfies(m, rho, *f.right);
    case Formula::Kind::Or:
      return satisfies(m, rho, *f.left) || satisfies(m, rho, *f.right);
    case Formula::Kind::Atom:
      break;
  }
  const Atom& a = f.atom;
  switch (a.kind) {
    case AtomKind::ValConst: {
      Cell c = lookup(rho, a.var1);
      return m.cell(c.subject, c.property) == (a.value == 1);
    }
    case AtomKind::PropConst: {
      Cell c = lookup(rho, a.var1);
      return m.view->properties[c.property] == a.iri;
    }
    case AtomKind::SubjConst: {
      Cell c = lookup(rho, a.var1);
      return m.subject_names[c.subject] == a.iri;
    }
    case AtomKind::CellEq:
      return lookup(rho, a.var1) == lookup(rho, a.var2);
    case AtomKind::ValEq: {
      Cell c1 = lookup(rho, a.var1);
      Cell c2 = lookup(rho, a.var2);
      return m.cell(c1.subject, c1.property) == m.cell(c2.subject, c2.property);
    }
    case AtomKind::PropEq:
      return lookup(rho, a.var1).property == lookup(rho, a.var2).property;
    case AtomKind::SubjEq:
      return lookup(rho, a.var1).subject == lookup(rho, a.var2).subject;
  }
  return false;
}

Sigma sigma_naive(const StructureView& view, const Rule& rule,
                  const EvalLimits& limits) {
  ExpandedView m = expand_view(view);
  const size_t cells = m.subject_count() * m.property_count();
  const size_t n = rule.variables.size();
  if (std::pow(static_cast<double>(cells), static_cast<double>(n)) >
      limits.naive_assignment_guard)
    throw std::runtime_error("sigma_naive: assignment space exceeds guard");

  Sigma sigma;
  std::vector<size_t> odo(n, 0);
  Assignment rho;
  const size_t n_props = m.property_count();
  while (true) {
    for (size_t i = 0; i < n; ++i)
      rho[rule.variables[i]] = Cell{static_cast<int>(odo[i] / n_props),
                                    static_cast<int>(odo[i] % n_props)};
    if (satisfies(m, rho, *rule.antecedent)) {
      sigma.total += 1;
      if (satisfies(m, rho, *rule.consequent)) sigma.favorable += 1;
    }
    size_t i = 0;
    while (i < n && ++odo[i] == cells) odo[i++] = 0;
    if (i == n || n == 0) break;
  }
  return sigma;
}

// ---------------------------------------------------------------------------
// Rough-assignment counting.
//
// An entry of the count table fixes each rule variable to a (signature,
// property) pair, so the only remaining freedom in a concrete assignment is
// which subject each variable denotes. Assignments are grouped by the
// subject-equality pattern they induce on the variables (a set partition;
// variables sharing a block share a subject, distinct blocks denote distinct
// subjects). Under a fixed partition every atom is decided except
// subj(c)=<iri> pins, which are resolved by a per-block case split over the
// mentioned constants. Each decided case contributes a product of falling
// factorials: blocks with signature mu pick distinct subjects from the
// mu-signature set, minus the pinned constants.

namespace {

enum class Tri : unsigned char { False, True, Unknown };

Tri tri_not(Tri t) {
  if (t == Tri::Unknown) return Tri::Unknown;
  return t == Tri::True ? Tri::False : Tri::True;
}

struct Op {
  enum class Kind : unsigned char { Atom, Not, And, Or } kind;
  // atom payload
  AtomKind akind = AtomKind::ValConst;
  int v1 = -1, v2 = -1;   // rule variable indices
  int value = 0;          // ValConst
  int prop = -1;          // PropConst: column index, -1 if absent
  int const_id = -1;      // SubjConst: index into Compiled::constants, -1 if
                          // the IRI names no subject of the view
};

// A subj(c)=<iri> constant resolved to a concrete expanded subject.
struct PinConstant {
  std::string iri;
  int sig = -1;
};

struct Compiled {
  std::vector<Op> code;  // postfix
  std::vector<PinConstant> constants;
};

// Resolves an IRI against expanded subject names: the sample subject of a
// signature, or "<sample>#<copy>" for copy in [1, multiplicity).
int resolve_subject_sig(const StructureView& view, const std::string& iri) {
  std::string base = iri;
  std::uint64_t copy = 0;
  auto hash = iri.find_last_of('#');
  if (hash != std::string::npos && hash + 1 < iri.size()) {
    std::string suffix = iri.substr(hash + 1);
    bool digits = !suffix.empty() &&
                  std::all_of(suffix.begin(), suffix.end(), [](char c) {
                    return std::isdigit(static_cast<unsigned char>(c));
                  });
    if (digits) {
      // might be a clone name; try both readings
      std::uint64_t k = 0;
      try {
        k = std::stoull(suffix);
      } catch (const std::exception&) {
        k = 0;
      }
      for (size_t si = 0; si < view.signatures.size(); ++si) {
        const SignatureRow& sig = view.signatures[si];
        if (sig.sample_subject == iri.substr(0, hash) && k >= 1 &&
            k < sig.multiplicity)
          return static_cast<int>(si);
      }
    }
  }
  for (size_t si = 0; si < view.signatures.size(); ++si)
    if (view.signatures[si].sample_subject == base)
      return static_cast<int>(si);
  return -1;
}

class Compiler {
 public:
  Compiler(const StructureView& view, const std::vector<std::string>& vars)
      : view_(view) {
    for (size_t i = 0; i < vars.size(); ++i)
      var_index_[vars[i]] = static_cast<int>(i);
  }

  void compile(const Formula& f, Compiled& out) {
    switch (f.kind) {
      case Formula::Kind::Not:
        compile(*f.left, out);
        out.code.push_back({Op::Kind::Not});
        return;
      case Formula::Kind::And:
        compile(*f.left, out);
        compile(*f.right, out);
        out.code.push_back({Op::Kind::And});
        return;
      case Formula::Kind::Or:
        compile(*f.left, out);
        compile(*f.right, out);
        out.code.push_back({Op::Kind::Or});
        return;
      case Formula::Kind::Atom:
        break;
    }
    Op op{Op::Kind::Atom};
    const Atom& a = f.atom;
    op.akind = a.kind;
    op.v1 = var_of(a.var1);
    if (!a.var2.empty()) op.v2 = var_of(a.var2);
    op.value = a.value;
    if (a.kind == AtomKind::PropConst) op.prop = view_.property_index(a.iri);
    if (a.kind == AtomKind::SubjConst) {
      int sig = resolve_subject_sig(view_, a.iri);
      if (sig >= 0) {
        op.const_id = intern_constant(a.iri, sig);
      }
    }
    out.code.push_back(op);
  }

  int intern_constant(const std::string& iri, int sig) {
    for (size_t i = 0; i < constants_.size(); ++i)
      if (constants_[i].iri == iri) return static_cast<int>(i);
    constants_.push_back({iri, sig});
    return static_cast<int>(constants_.size() - 1);
  }

  const std::vector<PinConstant>& constants() const { return constants_; }

 private:
  int var_of(const std::string& name) const {
    auto it = var_index_.find(name);
    if (it == var_index_.end())
      throw std::runtime_error("formula uses variable not in rule: $" + name);
    return it->second;
  }

  const StructureView& view_;
  std::unordered_map<std::string, int> var_index_;
  std::vector<PinConstant> constants_;
};

template <typename AtomFn>
Tri eval_code(const std::vector<Op>& code, AtomFn&& atom_fn) {
  // fixed-size stack; formulas here are small
  Tri stack[256];
  int top = 0;
  for (const Op& op : code) {
    switch (op.kind) {
      case Op::Kind::Atom:
        stack[top++] = atom_fn(op);
        break;
      case Op::Kind::Not:
        stack[top - 1] = tri_not(stack[top - 1]);
        break;
      case Op::Kind::And: {
        Tri b = stack[--top];
        Tri a = stack[top - 1];
        stack[top - 1] = (a == Tri::False || b == Tri::False) ? Tri::False
                         : (a == Tri::True && b == Tri::True) ? Tri::True
                                                              : Tri::Unknown;
        break;
      }
      case Op::Kind::Or: {
        Tri b = stack[--top];
        Tri a = stack[top - 1];
        stack[top - 1] = (a == Tri::True || b == Tri::True) ? Tri::True
                         : (a == Tri::False && b == Tri::False)
                             ? Tri::False
                             : Tri::Unknown;
        break;
      }
    }
  }
  return stack[0];
}

// Shared state for tau enumeration and partition counting.
struct CountingContext {
  const StructureView* view;
  size_t n = 0;                      // rule arity
  std::vector<std::pair<int, int>> tau;  // per variable (sig, prop)
  std::vector<bool> tau_set;

  // partition state
  std::vector<int> block_of;   // per variable, -1 unplaced
  std::vector<int> block_sig;  // per block
  int n_blocks = 0;

  // pin state (leaf enumeration)
  std::vector<int> pin_of_block;  // -1 undecided, -2 generic, else const id
  bool pins_active = false;

  Tri atom(const Op& op) const {
    const bool a1 = tau_set[op.v1];
    const bool a2 = op.v2 >= 0 && tau_set[op.v2];
    switch (op.akind) {
      case AtomKind::ValConst: {
        if (!a1) return Tri::Unknown;
        auto [sig, p] = tau[op.v1];
        return view->signatures[sig].bits[p] == (op.value == 1) ? Tri::True
                                                                : Tri::False;
      }
      case AtomKind::PropConst:
        if (op.prop < 0) return Tri::False;
        if (!a1) return Tri::Unknown;
        return tau[op.v1].second == op.prop ? Tri::True : Tri::False;
      case AtomKind::SubjConst: {
        if (op.const_id < 0) return Tri::False;
        if (a1 && tau[op.v1].first != pinned_sig(op.const_id))
          return Tri::False;
        if (!pins_active || block_of[op.v1] < 0) return Tri::Unknown;
        int pin = pin_of_block[block_of[op.v1]];
        if (pin == -1) return Tri::Unknown;
        return pin == op.const_id ? Tri::True : Tri::False;
      }
      case AtomKind::CellEq: {
        if (op.v1 == op.v2) return Tri::True;
        if (a1 && a2) {
          if (tau[op.v1].second != tau[op.v2].second) return Tri::False;
          if (tau[op.v1].first != tau[op.v2].first) return Tri::False;
          return same_subject(op.v1, op.v2);
        }
        return Tri::Unknown;
      }
      case AtomKind::ValEq: {
        if (op.v1 == op.v2) return Tri::True;
        if (!a1 || !a2) return Tri::Unknown;
        auto [s1, p1] = tau[op.v1];
        auto [s2, p2] = tau[op.v2];
        return view->signatures[s1].bits[p1] == view->signatures[s2].bits[p2]
                   ? Tri::True
                   : Tri::False;
      }
      case AtomKind::PropEq:
        if (op.v1 == op.v2) return Tri::True;
        if (!a1 || !a2) return Tri::Unknown;
        return tau[op.v1].second == tau[op.v2].second ? Tri::True : Tri::False;
      case AtomKind::SubjEq: {
        if (op.v1 == op.v2) return Tri::True;
        if (a1 && a2 && tau[op.v1].first != tau[op.v2].first)
          return Tri::False;
        return same_subject(op.v1, op.v2);
      }
    }
    return Tri::Unknown;
  }

  const std::vector<PinConstant>* constants = nullptr;
  int pinned_sig(int const_id) const { return (*constants)[const_id].sig; }

  Tri same_subject(int v1, int v2) const {
    if (block_of[v1] < 0 || block_of[v2] < 0) return Tri::Unknown;
    return block_of[v1] == block_of[v2] ? Tri::True : Tri::False;
  }
};

// Orders variables so that constrained ones (constant atoms, links to
// already-ordered variables) come first; this is what keeps the search
// spaces of high-arity rules small.
std::vector<int> variable_order(const Compiled& phi1, size_t n) {
  std::vector<int> const_score(n, 0);
  std::vector<std::vector<int>> links(n);
  for (const Op& op : phi1.code) {
    if (op.kind != Op::Kind::Atom) continue;
    switch (op.akind) {
      case AtomKind::ValConst:
      case AtomKind::PropConst:
      case AtomKind::SubjConst:
        const_score[op.v1] += 2;
        break;
      default:
        if (op.v2 >= 0 && op.v1 != op.v2) {
          links[op.v1].push_back(op.v2);
          links[op.v2].push_back(op.v1);
        }
    }
  }
  std::vector<int> order;
  std::vector<bool> chosen(n, false);
  for (size_t step = 0; step < n; ++step) {
    int best = -1;
    int best_score = -1;
    for (size_t v = 0; v < n; ++v) {
      if (chosen[v]) continue;
      int link_score = 0;
      for (int w : links[v])
        if (chosen[w]) link_score += 4;
      int score = link_score + const_score[v] + (step == 0 ? const_score[v] : 0);
      if (score > best_score) {
        best_score = score;
        best = static_cast<int>(v);
      }
    }
    chosen[best] = true;
    order.push_back(best);
  }
  return order;
}

class PairCounter {
 public:
  PairCounter(const StructureView& view, const Compiled& phi1,
              const Compiled& both, const std::vector<PinConstant>& constants,
              const std::vector<int>& order)
      : phi1_(phi1), both_(both), order_(order) {
    ctx_.view = &view;
    ctx_.n = order.size();
    ctx_.constants = &constants;
    constants_per_sig_.assign(view.signatures.size(), 0);
    for (const PinConstant& c : constants) ++constants_per_sig_[c.sig];
  }

  // counts for a fully determined tau; tau indexed by rule variable
  void count(const RoughAssignment& tau, BigInt& ant, BigInt& both) {
    ctx_.tau = tau;
    ctx_.tau_set.assign(ctx_.n, true);
    ctx_.block_of.assign(ctx_.n, -1);
    ctx_.block_sig.clear();
    ctx_.n_blocks = 0;
    ctx_.pins_active = false;
    ant_ = 0;
    both_sum_ = 0;
    partitions(0);
    ant = ant_;
    both = both_sum_;
  }

 private:
  void partitions(size_t level) {
    if (level == ctx_.n) {
      leaf();
      return;
    }
    int v = order_[level];
    int v_sig = ctx_.tau[v].first;
    for (int b = 0; b <= ctx_.n_blocks; ++b) {
      bool fresh = b == ctx_.n_blocks;
      if (!fresh && ctx_.block_sig[b] != v_sig) continue;
      ctx_.block_of[v] = b;
      if (fresh) {
        ctx_.block_sig.push_back(v_sig);
        ++ctx_.n_blocks;
      }
      if (eval_code(phi1_.code, [this](const Op& op) { return ctx_.atom(op); }) !=
          Tri::False)
        partitions(level + 1);
      if (fresh) {
        ctx_.block_sig.pop_back();
        --ctx_.n_blocks;
      }
      ctx_.block_of[v] = -1;
    }
  }

  void leaf() {
    ctx_.pins_active = true;
    ctx_.pin_of_block.assign(ctx_.n_blocks, -1);
    used_constant_.assign(ctx_.constants->size(), false);
    pin_cases(0);
    ctx_.pins_active = false;
  }

  // Case split: each block's subject is either one of the pinned constants
  // (injectively) or a "generic" subject distinct from all of them.
  void pin_cases(int block) {
    if (block == ctx_.n_blocks) {
      Tri a = eval_code(phi1_.code,
                        [this](const Op& op) { return ctx_.atom(op); });
      if (a != Tri::True) return;
      BigInt weight = generic_weight();
      if (weight == 0) return;
      ant_ += weight;
      if (eval_code(both_.code, [this](const Op& op) {
            return ctx_.atom(op);
          }) == Tri::True)
        both_sum_ += weight;
      return;
    }
    ctx_.pin_of_block[block] = -2;  // generic
    pin_cases(block + 1);
    for (size_t c = 0; c < ctx_.constants->size(); ++c) {
      if (used_constant_[c]) continue;
      if ((*ctx_.constants)[c].sig != ctx_.block_sig[block]) continue;
      used_constant_[c] = true;
      ctx_.pin_of_block[block] = static_cast<int>(c);
      pin_cases(block + 1);
      used_constant_[c] = false;
    }
    ctx_.pin_of_block[block] = -1;
  }

  BigInt generic_weight() const {
    std::vector<int> generic_blocks(ctx_.view->signatures.size(), 0);
    for (int b = 0; b < ctx_.n_blocks; ++b)
      if (ctx_.pin_of_block[b] == -2) ++generic_blocks[ctx_.block_sig[b]];
    BigInt weight = 1;
    for (size_t sig = 0; sig < generic_blocks.size(); ++sig) {
      if (generic_blocks[sig] == 0) continue;
      BigInt pool = BigInt(ctx_.view->signatures[sig].multiplicity) -
                    constants_per_sig_[sig];
      weight *= falling_factorial(pool, generic_blocks[sig]);
      if (weight == 0) break;
    }
    return weight;
  }

  const Compiled& phi1_;
  const Compiled& both_;
  const std::vector<int>& order_;
  CountingContext ctx_;
  std::vector<int> constants_per_sig_;
  std::vector<bool> used_constant_;
  BigInt ant_;
  BigInt both_sum_;
};

struct CompiledRule {
  Compiled phi1;
  Compiled both;  // phi1 && phi2, as one postfix program
  std::vector<PinConstant> constants;
  std::vector<int> order;
};

CompiledRule compile_rule(const StructureView& view, const Rule& rule) {
  CompiledRule cr;
  Compiler compiler(view, rule.variables);
  compiler.compile(*rule.antecedent, cr.phi1);
  cr.both.code = cr.phi1.code;
  compiler.compile(*rule.consequent, cr.both);
  cr.both.code.push_back({Op::Kind::And});
  cr.constants = compiler.constants();
  cr.order = variable_order(cr.phi1, rule.variables.size());
  return cr;
}

}  // namespace

BigInt CountTable::sum_antecedent() const {
  BigInt s = 0;
  for (const CountEntry& e : entries) s += e.count_antecedent;
  return s;
}

BigInt CountTable::sum_both() const {
  BigInt s = 0;
  for (const CountEntry& e : entries) s += e.count_both;
  return s;
}

BigInt count_for_tau(const StructureView& view, const Rule& rule,
                     const Formula& f, const RoughAssignment& tau) {
  if (tau.size() != rule.variables.size())
    throw std::runtime_error("rough assignment arity mismatch");
  Compiler compiler(view, rule.variables);
  Compiled phi;
  compiler.compile(f, phi);
  Compiled trivially_true;  // empty second formula: count only phi
  trivially_true.code = phi.code;
  std::vector<int> order = variable_order(phi, rule.variables.size());
  PairCounter counter(view, phi, trivially_true, compiler.constants(), order);
  BigInt ant = 0, both = 0;
  counter.count(tau, ant, both);
  return ant;
}

CountTable build_count_table(const StructureView& view, const Rule& rule,
                             const EvalLimits& limits) {
  CountTable table;
  table.arity = rule.variables.size();
  const size_t n = table.arity;
  CompiledRule cr = compile_rule(view, rule);
  PairCounter counter(view, cr.phi1, cr.both, cr.constants, cr.order);

  CountingContext ctx;
  ctx.view = &view;
  ctx.n = n;
  ctx.constants = &cr.constants;
  ctx.tau.assign(n, {0, 0});
  ctx.tau_set.assign(n, false);
  ctx.block_of.assign(n, -1);  // no partition info during tau search

  const size_t n_sigs = view.signatures.size();
  const size_t n_props = view.properties.size();
  size_t nodes = 0;

  auto dfs = [&](auto&& self, size_t level) -> void {
    if (level == n) {
      RoughAssignment tau = ctx.tau;
      BigInt ant = 0, both = 0;
      counter.count(tau, ant, both);
      if (ant > 0) {
        if (table.entries.size() >= limits.max_table_entries)
          throw std::runtime_error("count table exceeds configured size cap");
        table.entries.push_back({std::move(tau), std::move(ant), std::move(both)});
      }
      return;
    }
    int v = cr.order[level];
    for (size_t sig = 0; sig < n_sigs; ++sig) {
      for (size_t p = 0; p < n_props; ++p) {
        if (++nodes > limits.max_search_nodes)
          throw std::runtime_error(
              "count table search exceeds configured node cap");
        ctx.tau[v] = {static_cast<int>(sig), static_cast<int>(p)};
        ctx.tau_set[v] = true;
        if (eval_code(cr.phi1.code,
                      [&ctx](const Op& op) { return ctx.atom(op); }) !=
            Tri::False)
          self(self, level + 1);
        ctx.tau_set[v] = false;
      }
    }
  };
  dfs(dfs, 0);

  std::sort(table.entries.begin(), table.entries.end(),
            [](const CountEntry& a, const CountEntry& b) {
              return a.tau < b.tau;
            });
  return table;
}

Sigma sigma_fast(const StructureView& view, const Rule& rule,
                 const EvalLimits& limits) {
  CountTable table = build_count_table(view, rule, limits);
  Sigma sigma;
  sigma.total = table.sum_antecedent();
  sigma.favorable = table.sum_both();
  return sigma;
}

Sigma sigma_subset(const CountTable& table, const StructureView& view,
                   const std::vector<bool>& chosen) {
  if (std::find(chosen.begin(), chosen.end(), true) == chosen.end())
    throw std::runtime_error("sigma_subset: empty signature selection");
  std::vector<bool> used(view.properties.size(), false);
  for (size_t sig = 0; sig < chosen.size(); ++sig)
    if (chosen[sig])
      for (size_t p = 0; p < view.properties.size(); ++p)
        if (view.signatures[sig].bits[p]) used[p] = true;
  Sigma sigma;
  for (const CountEntry& e : table.entries) {
    bool valid = true;
    for (auto [sig, p] : e.tau)
      if (!chosen[sig] || !used[p]) {
        valid = false;
        break;
      }
    if (!valid) continue;
    sigma.total += e.count_antecedent;
    sigma.favorable += e.count_both;
  }
  return sigma;
}

StructureView materialize_subview(const StructureView& view,
                                  const std::vector<bool>& chosen) {
  StructureView sub;
  std::vector<int> col_map(view.properties.size(), -1);
  for (size_t p = 0; p < view.properties.size(); ++p) {
    bool used = false;
    for (size_t sig = 0; sig < chosen.size(); ++sig)
      if (chosen[sig] && view.signatures[sig].bits[p]) used = true;
    if (used) {
      col_map[p] = static_cast<int>(sub.properties.size());
      sub.properties.push_back(view.properties[p]);
    }
  }
  for (size_t sig = 0; sig < chosen.size(); ++sig) {
    if (!chosen[sig]) continue;
    const SignatureRow& src = view.signatures[sig];
    SignatureRow row;
    row.bits.assign(sub.properties.size(), false);
    for (size_t p = 0; p < view.properties.size(); ++p)
      if (src.bits[p]) row.bits[col_map[p]] = true;
    row.multiplicity = src.multiplicity;
    row.sample_subject = src.sample_subject;
    sub.signatures.push_back(std::move(row));
    sub.total_subjects += src.multiplicity;
  }
  std::sort(sub.signatures.begin(), sub.signatures.end(),
            [](const SignatureRow& a, const SignatureRow& b) {
              if (a.multiplicity != b.multiplicity)
                return a.multiplicity > b.multiplicity;
              return signature_bitstring(a) < signature_bitstring(b);
            });
  return sub;
}

void dump_count_table(const CountTable& table, std::ostream& out) {
  for (const CountEntry& e : table.entries) {
    for (auto [sig, p] : e.tau) out << "(" << sig << ":" << p << ")";
    out << "\t" << e.count_antecedent << "\t" << e.count_both << "\n";
  }
}

}  // namespace sortref
