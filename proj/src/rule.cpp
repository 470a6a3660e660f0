#include "sortref/rule.hpp"

#include <fstream>
#include <sstream>

namespace sortref {

FormulaPtr make_atom(Atom a) {
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::Atom;
  f->atom = std::move(a);
  return f;
}

FormulaPtr make_not(FormulaPtr inner) {
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::Not;
  f->left = std::move(inner);
  return f;
}

FormulaPtr make_and(FormulaPtr a, FormulaPtr b) {
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::And;
  f->left = std::move(a);
  f->right = std::move(b);
  return f;
}

FormulaPtr make_or(FormulaPtr a, FormulaPtr b) {
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::Or;
  f->left = std::move(a);
  f->right = std::move(b);
  return f;
}

bool formula_equal(const Formula& a, const Formula& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Formula::Kind::Atom:
      return a.atom == b.atom;
    case Formula::Kind::Not:
      return formula_equal(*a.left, *b.left);
    case Formula::Kind::And:
    case Formula::Kind::Or:
      return formula_equal(*a.left, *b.left) &&
             formula_equal(*a.right, *b.right);
  }
  return false;
}

namespace {

void collect_vars_ordered(const Formula& f, std::vector<std::string>& out,
                          std::set<std::string>& seen) {
  switch (f.kind) {
    case Formula::Kind::Atom:
      if (seen.insert(f.atom.var1).second) out.push_back(f.atom.var1);
      if (!f.atom.var2.empty() && seen.insert(f.atom.var2).second)
        out.push_back(f.atom.var2);
      break;
    case Formula::Kind::Not:
      collect_vars_ordered(*f.left, out, seen);
      break;
    case Formula::Kind::And:
    case Formula::Kind::Or:
      collect_vars_ordered(*f.left, out, seen);
      collect_vars_ordered(*f.right, out, seen);
      break;
  }
}

}  // namespace

std::set<std::string> formula_vars(const Formula& f) {
  std::vector<std::string> ordered;
  std::set<std::string> seen;
  collect_vars_ordered(f, ordered, seen);
  return seen;
}

Rule make_rule(FormulaPtr antecedent, FormulaPtr consequent, std::string name) {
  Rule r;
  r.antecedent = std::move(antecedent);
  r.consequent = std::move(consequent);
  r.name = std::move(name);
  std::set<std::string> seen;
  collect_vars_ordered(*r.antecedent, r.variables, seen);
  if (r.variables.empty())
    throw RuleError("rule antecedent must mention at least one variable");
  for (const std::string& v : formula_vars(*r.consequent))
    if (!seen.count(v))
      throw RuleError("consequent uses variable not in antecedent: $" + v);
  return r;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

struct Lexer {
  const std::string& text;
  size_t pos = 0;

  explicit Lexer(const std::string& t) : text(t) {}

  void skip_ws() {
    while (pos < text.size() &&
           std::isspace(static_cast<unsigned char>(text[pos])))
      ++pos;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw RuleError("syntax error at position " + std::to_string(pos) + ": " +
                    msg);
  }

  bool eat(const std::string& token) {
    skip_ws();
    if (text.compare(pos, token.size(), token) == 0) {
      pos += token.size();
      return true;
    }
    return false;
  }

  bool peek(const std::string& token) {
    skip_ws();
    return text.compare(pos, token.size(), token) == 0;
  }

  void expect(const std::string& token) {
    if (!eat(token)) fail("expected '" + token + "'");
  }

  std::string variable() {
    skip_ws();
    if (pos >= text.size() || text[pos] != '$') fail("expected variable");
    size_t start = ++pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) ||
            text[pos] == '_'))
      ++pos;
    if (pos == start) fail("empty variable name");
    return text.substr(start, pos - start);
  }

  std::string iri() {
    skip_ws();
    if (pos >= text.size() || text[pos] != '<') fail("expected IRI");
    size_t end = text.find('>', pos);
    if (end == std::string::npos) fail("unterminated IRI");
    std::string value = text.substr(pos + 1, end - pos - 1);
    pos = end + 1;
    return value;
  }
};

class Parser {
 public:
  explicit Parser(const std::string& text) : lex_(text) {}

  Rule parse(const std::string& name) {
    FormulaPtr ante = parse_or();
    lex_.expect("->");
    FormulaPtr cons = parse_or();
    lex_.skip_ws();
    if (lex_.pos != lex_.text.size()) lex_.fail("unexpected trailing input");
    return make_rule(std::move(ante), std::move(cons), name);
  }

  FormulaPtr parse_formula_only() {
    FormulaPtr f = parse_or();
    lex_.skip_ws();
    if (lex_.pos != lex_.text.size()) lex_.fail("unexpected trailing input");
    return f;
  }

 private:
  Lexer lex_;

  FormulaPtr parse_or() {
    FormulaPtr f = parse_and();
    while (lex_.eat("||")) f = make_or(std::move(f), parse_and());
    return f;
  }

  FormulaPtr parse_and() {
    FormulaPtr f = parse_unary();
    while (lex_.eat("&&")) f = make_and(std::move(f), parse_unary());
    return f;
  }

  FormulaPtr parse_unary() {
    lex_.skip_ws();
    // `!` prefix, but not the start of a `!=` (which never begins a formula)
    if (lex_.peek("!") && !lex_.peek("!=")) {
      lex_.expect("!");
      return make_not(parse_unary());
    }
    if (lex_.eat("(")) {
      FormulaPtr f = parse_or();
      lex_.expect(")");
      return f;
    }
    return parse_atom();
  }

  // `=` or `!=`; the latter wraps the atom in a negation.
  FormulaPtr finish(Atom a, bool negated) {
    FormulaPtr f = make_atom(std::move(a));
    return negated ? make_not(std::move(f)) : std::move(f);
  }

  bool eq_or_neq() {
    if (lex_.eat("!=")) return true;
    lex_.expect("=");
    return false;
  }

  FormulaPtr parse_atom() {
    lex_.skip_ws();
    if (lex_.eat("val")) {
      lex_.expect("(");
      std::string v = lex_.variable();
      lex_.expect(")");
      bool neg = eq_or_neq();
      lex_.skip_ws();
      if (lex_.eat("val")) {
        lex_.expect("(");
        std::string w = lex_.variable();
        lex_.expect(")");
        return finish({AtomKind::ValEq, v, w, "", 0}, neg);
      }
      if (lex_.eat("0")) return finish({AtomKind::ValConst, v, "", "", 0}, neg);
      if (lex_.eat("1")) return finish({AtomKind::ValConst, v, "", "", 1}, neg);
      lex_.fail("expected 0, 1 or val(...)");
    }
    if (lex_.eat("prop")) {
      lex_.expect("(");
      std::string v = lex_.variable();
      lex_.expect(")");
      bool neg = eq_or_neq();
      lex_.skip_ws();
      if (lex_.eat("prop")) {
        lex_.expect("(");
        std::string w = lex_.variable();
        lex_.expect(")");
        return finish({AtomKind::PropEq, v, w, "", 0}, neg);
      }
      return finish({AtomKind::PropConst, v, "", lex_.iri(), 0}, neg);
    }
    if (lex_.eat("subj")) {
      lex_.expect("(");
      std::string v = lex_.variable();
      lex_.expect(")");
      bool neg = eq_or_neq();
      lex_.skip_ws();
      if (lex_.eat("subj")) {
        lex_.expect("(");
        std::string w = lex_.variable();
        lex_.expect(")");
        return finish({AtomKind::SubjEq, v, w, "", 0}, neg);
      }
      return finish({AtomKind::SubjConst, v, "", lex_.iri(), 0}, neg);
    }
    if (lex_.peek("$")) {
      std::string v = lex_.variable();
      bool neg = eq_or_neq();
      std::string w = lex_.variable();
      return finish({AtomKind::CellEq, v, w, "", 0}, neg);
    }
    lex_.fail("expected atom");
  }
};

}  // namespace

Rule parse_rule(const std::string& text, const std::string& name) {
  return Parser(text).parse(name);
}

Rule parse_rule_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open rule file: " + path);
  std::ostringstream text;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    text << line << "\n";
  }
  std::string name = path;
  auto slash = name.find_last_of('/');
  if (slash != std::string::npos) name.erase(0, slash + 1);
  return parse_rule(text.str(), name);
}

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string print_atom(const Atom& a) {
  switch (a.kind) {
    case AtomKind::ValConst:
      return "val($" + a.var1 + ") = " + std::to_string(a.value);
    case AtomKind::PropConst:
      return "prop($" + a.var1 + ") = <" + a.iri + ">";
    case AtomKind::SubjConst:
      return "subj($" + a.var1 + ") = <" + a.iri + ">";
    case AtomKind::CellEq:
      return "$" + a.var1 + " = $" + a.var2;
    case AtomKind::ValEq:
      return "val($" + a.var1 + ") = val($" + a.var2 + ")";
    case AtomKind::PropEq:
      return "prop($" + a.var1 + ") = prop($" + a.var2 + ")";
    case AtomKind::SubjEq:
      return "subj($" + a.var1 + ") = subj($" + a.var2 + ")";
  }
  return "";
}

// precedence: atom/not bind tighter than &&, which binds tighter than ||
void print_rec(const Formula& f, std::string& out, int parent_level) {
  int level = f.kind == Formula::Kind::Or    ? 0
              : f.kind == Formula::Kind::And ? 1
                                             : 2;
  bool parens = level < parent_level;
  if (parens) out += "(";
  switch (f.kind) {
    case Formula::Kind::Atom:
      out += print_atom(f.atom);
      break;
    case Formula::Kind::Not:
      out += "!(";
      print_rec(*f.left, out, 0);
      out += ")";
      break;
    case Formula::Kind::And:
      // the parser is left-associative, so a right-nested operand of the
      // same level needs parentheses for the round trip to preserve shape
      print_rec(*f.left, out, 1);
      out += " && ";
      print_rec(*f.right, out, 2);
      break;
    case Formula::Kind::Or:
      print_rec(*f.left, out, 0);
      out += " || ";
      print_rec(*f.right, out, 1);
      break;
  }
  if (parens) out += ")";
}

}  // namespace

std::string print_formula(const Formula& f) {
  std::string out;
  print_rec(f, out, 0);
  return out;
}

std::string print_rule(const Rule& r) {
  return print_formula(*r.antecedent) + " -> " + print_formula(*r.consequent);
}

// ---------------------------------------------------------------------------
// Built-in rules

namespace {

FormulaPtr conj(std::vector<FormulaPtr> parts) {
  FormulaPtr f = std::move(parts.front());
  for (size_t i = 1; i < parts.size(); ++i)
    f = make_and(std::move(f), std::move(parts[i]));
  return f;
}

FormulaPtr val_is(const std::string& v, int value) {
  return make_atom({AtomKind::ValConst, v, "", "", value});
}
FormulaPtr prop_is(const std::string& v, const std::string& iri) {
  return make_atom({AtomKind::PropConst, v, "", iri, 0});
}
FormulaPtr prop_isnt(const std::string& v, const std::string& iri) {
  return make_not(prop_is(v, iri));
}
FormulaPtr subj_eq(const std::string& a, const std::string& b) {
  return make_atom({AtomKind::SubjEq, a, b, "", 0});
}
FormulaPtr prop_eq(const std::string& a, const std::string& b) {
  return make_atom({AtomKind::PropEq, a, b, "", 0});
}
FormulaPtr cell_eq(const std::string& a, const std::string& b) {
  return make_atom({AtomKind::CellEq, a, b, "", 0});
}
FormulaPtr cell_neq(const std::string& a, const std::string& b) {
  return make_not(cell_eq(a, b));
}

}  // namespace

Rule builtin_rule(BuiltinKind kind, const std::string& p1,
                  const std::string& p2) {
  switch (kind) {
    case BuiltinKind::Cov:
      return make_rule(cell_eq("c", "c"), val_is("c", 1), "cov");
    case BuiltinKind::Sim:
      return make_rule(
          conj({cell_neq("c1", "c2"), prop_eq("c1", "c2"), val_is("c1", 1)}),
          val_is("c2", 1), "sim");
    default:
      break;
  }
  if (p1.empty() || p2.empty())
    throw RuleError("dependency rules need two property IRIs");
  if (p1 == p2) throw RuleError("dependency rules require p1 != p2");
  FormulaPtr base = conj({subj_eq("c1", "c2"), prop_is("c1", p1),
                          prop_is("c2", p2)});
  switch (kind) {
    case BuiltinKind::Dep:
      return make_rule(make_and(std::move(base), val_is("c1", 1)),
                       val_is("c2", 1), "dep");
    case BuiltinKind::SymDep:
      return make_rule(
          make_and(std::move(base),
                   make_or(val_is("c1", 1), val_is("c2", 1))),
          make_and(val_is("c1", 1), val_is("c2", 1)), "symdep");
    case BuiltinKind::DepDisj:
      return make_rule(std::move(base),
                       make_or(val_is("c1", 0), val_is("c2", 1)), "depdisj");
    default:
      throw RuleError("unknown builtin rule kind");
  }
}

Rule builtin_rule_from_spec(const std::string& spec) {
  auto colon = spec.find(':');
  std::string kind = spec.substr(0, colon);
  std::string p1, p2;
  if (colon != std::string::npos) {
    std::string args = spec.substr(colon + 1);
    auto comma = args.find(',');
    if (comma == std::string::npos)
      throw RuleError("builtin spec needs two comma-separated IRIs: " + spec);
    p1 = args.substr(0, comma);
    p2 = args.substr(comma + 1);
  }
  if (kind == "cov") return builtin_rule(BuiltinKind::Cov);
  if (kind == "sim") return builtin_rule(BuiltinKind::Sim);
  if (kind == "dep") return builtin_rule(BuiltinKind::Dep, p1, p2);
  if (kind == "symdep") return builtin_rule(BuiltinKind::SymDep, p1, p2);
  if (kind == "depdisj") return builtin_rule(BuiltinKind::DepDisj, p1, p2);
  throw RuleError("unknown builtin rule: " + spec);
}

Rule gadget_rule_r0(const std::string& prefix) {
  const std::string sp1 = prefix + "sp1";
  const std::string sp2 = prefix + "sp2";
  const std::string idp = prefix + "idp";

  std::vector<FormulaPtr> ante;
  for (const char* v : {"c1", "c2", "d1", "d2", "e", "f1", "f2"}) {
    ante.push_back(prop_isnt(v, sp1));
    ante.push_back(prop_isnt(v, sp2));
  }
  ante.push_back(prop_is("x", idp));
  ante.push_back(val_is("x", 1));
  ante.push_back(cell_neq("c1", "x"));
  ante.push_back(subj_eq("c1", "x"));
  ante.push_back(val_is("c1", 1));
  ante.push_back(cell_neq("c2", "x"));
  ante.push_back(subj_eq("c2", "x"));
  ante.push_back(val_is("c2", 1));
  ante.push_back(cell_neq("c1", "c2"));
  ante.push_back(prop_is("y", idp));
  ante.push_back(val_is("y", 0));
  ante.push_back(subj_eq("d1", "y"));
  ante.push_back(prop_eq("d1", "c1"));
  ante.push_back(subj_eq("d2", "y"));
  ante.push_back(prop_eq("d2", "c2"));
  ante.push_back(prop_is("z", idp));
  ante.push_back(subj_eq("z", "e"));
  ante.push_back(prop_eq("e", "c1"));
  ante.push_back(cell_neq("e", "c1"));
  ante.push_back(val_is("e", 1));
  ante.push_back(prop_is("u", idp));
  ante.push_back(val_is("u", 0));
  ante.push_back(subj_eq("u", "f1"));
  ante.push_back(prop_eq("f1", "c1"));
  ante.push_back(subj_eq("u", "f2"));
  ante.push_back(prop_eq("f2", "c2"));
  ante.push_back(val_is("f1", 1));
  ante.push_back(val_is("f2", 1));

  FormulaPtr cons = make_and(make_or(val_is("d1", 1), val_is("d2", 1)),
                             val_is("z", 0));
  return make_rule(conj(std::move(ante)), std::move(cons), "r0");
}

}  // namespace sortref
