#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

namespace sortref {

// The eight atom forms. Cell variables are strings; u is an IRI.
enum class AtomKind {
  ValConst,   // val(c) = 0|1
  PropConst,  // prop(c) = u
  SubjConst,  // subj(c) = u
  CellEq,     // c1 = c2
  ValEq,      // val(c1) = val(c2)
  PropEq,     // prop(c1) = prop(c2)
  SubjEq,     // subj(c1) = subj(c2)
};

struct Atom {
  AtomKind kind;
  std::string var1;
  std::string var2;  // for the three *Eq pairs and CellEq
  std::string iri;   // for PropConst / SubjConst
  int value = 0;     // for ValConst

  friend bool operator==(const Atom&, const Atom&) = default;
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  enum class Kind { Atom, Not, And, Or };
  Kind kind;
  Atom atom;         // Kind::Atom
  FormulaPtr left;   // Not / And / Or
  FormulaPtr right;  // And / Or
};

FormulaPtr make_atom(Atom a);
FormulaPtr make_not(FormulaPtr f);
FormulaPtr make_and(FormulaPtr a, FormulaPtr b);
FormulaPtr make_or(FormulaPtr a, FormulaPtr b);

bool formula_equal(const Formula& a, const Formula& b);
std::set<std::string> formula_vars(const Formula& f);

struct Rule {
  FormulaPtr antecedent;
  FormulaPtr consequent;
  std::string name;

  // Variables of the antecedent in order of first appearance. This order
  // fixes the layout of rough assignments everywhere downstream.
  std::vector<std::string> variables;
};

class RuleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Validates var(consequent) ⊆ var(antecedent) and |var(antecedent)| ≥ 1.
Rule make_rule(FormulaPtr antecedent, FormulaPtr consequent, std::string name);

// Concrete grammar: variables `$name`, IRIs `<...>`, atoms
// `val($c)=0|1`, `prop($c)=<iri>`, `subj($c)=<iri>`, `$a=$b`,
// `val($a)=val($b)`, `prop($a)=prop($b)`, `subj($a)=subj($b)`;
// `!`, `&&`, `||`, parentheses, `!=` sugar; rule arrow `->`.
Rule parse_rule(const std::string& text, const std::string& name = "rule");

// Rule file: UTF-8, `#` comments, the rule text may span lines.
Rule parse_rule_file(const std::string& path);

std::string print_formula(const Formula& f);
std::string print_rule(const Rule& r);

enum class BuiltinKind { Cov, Sim, Dep, SymDep, DepDisj };

Rule builtin_rule(BuiltinKind kind, const std::string& p1 = "",
                  const std::string& p2 = "");

// Parses "cov", "sim", "dep:<p1>,<p2>", "symdep:<p1>,<p2>",
// "depdisj:<p1>,<p2>".
Rule builtin_rule_from_spec(const std::string& spec);

// The 11-variable coloring-gadget rule; sp1/sp2/idp live under `prefix`.
Rule gadget_rule_r0(const std::string& prefix = "urn:gadget:");

}  // namespace sortref
