#include "sortref/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace sortref {

namespace {

void skip_ws(const std::string& line, size_t& pos) {
  while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
}

// IRI `<...>` or blank node label `_:x`; returns the token without brackets.
std::string read_resource(const std::string& line, size_t& pos, int lineno,
                          const char* what) {
  skip_ws(line, pos);
  if (pos >= line.size())
    throw ParseError(std::string("expected ") + what, lineno);
  if (line[pos] == '<') {
    size_t end = line.find('>', pos);
    if (end == std::string::npos)
      throw ParseError("unterminated IRI", lineno);
    std::string iri = line.substr(pos + 1, end - pos - 1);
    if (iri.empty()) throw ParseError("empty IRI", lineno);
    pos = end + 1;
    return iri;
  }
  if (line[pos] == '_' && pos + 1 < line.size() && line[pos + 1] == ':') {
    size_t end = pos;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
    std::string label = line.substr(pos, end - pos);
    pos = end;
    return label;
  }
  throw ParseError(std::string("expected ") + what, lineno);
}

std::string read_object(const std::string& line, size_t& pos, int lineno) {
  skip_ws(line, pos);
  if (pos >= line.size()) throw ParseError("expected object", lineno);
  if (line[pos] == '"') {
    size_t end = pos + 1;
    while (end < line.size()) {
      if (line[end] == '\\') {
        end += 2;
        continue;
      }
      if (line[end] == '"') break;
      ++end;
    }
    if (end >= line.size()) throw ParseError("unterminated literal", lineno);
    // keep trailing lang tag / datatype attached to the token
    size_t tail = end + 1;
    while (tail < line.size() && line[tail] != ' ' && line[tail] != '\t') ++tail;
    std::string object = line.substr(pos, tail - pos);
    pos = tail;
    return object;
  }
  return read_resource(line, pos, lineno, "object");
}

}  // namespace

Dataset parse_ntriples(std::istream& input) {
  Dataset d;
  std::unordered_set<std::string> seen;
  std::unordered_set<std::string> subject_set;
  std::unordered_set<std::string> property_set;
  std::string line;
  int lineno = 0;
  while (std::getline(input, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t pos = 0;
    skip_ws(line, pos);
    if (pos >= line.size() || line[pos] == '#') continue;
    Triple t;
    t.subject = read_resource(line, pos, lineno, "subject");
    t.predicate = read_resource(line, pos, lineno, "predicate");
    t.object = read_object(line, pos, lineno);
    skip_ws(line, pos);
    if (pos >= line.size() || line[pos] != '.')
      throw ParseError("expected '.' terminator", lineno);
    ++pos;
    skip_ws(line, pos);
    if (pos < line.size() && line[pos] != '#')
      throw ParseError("trailing content after '.'", lineno);

    std::string key = t.subject + "\x01" + t.predicate + "\x01" + t.object;
    if (!seen.insert(key).second) continue;
    if (subject_set.insert(t.subject).second) d.subjects.push_back(t.subject);
    if (property_set.insert(t.predicate).second)
      d.properties.push_back(t.predicate);
    d.triples.push_back(std::move(t));
  }
  return d;
}

Dataset parse_ntriples_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open input file: " + path);
  return parse_ntriples(in);
}

Dataset filter_by_sort(const Dataset& d, const std::string& sort_iri) {
  std::unordered_set<std::string> typed;
  for (const Triple& t : d.triples)
    if (t.predicate == kTypeIri && t.object == sort_iri) typed.insert(t.subject);
  Dataset out;
  std::unordered_set<std::string> subject_set;
  std::unordered_set<std::string> property_set;
  for (const Triple& t : d.triples) {
    if (!typed.count(t.subject)) continue;
    if (subject_set.insert(t.subject).second) out.subjects.push_back(t.subject);
    if (property_set.insert(t.predicate).second)
      out.properties.push_back(t.predicate);
    out.triples.push_back(t);
  }
  return out;
}

void write_ntriples(const Dataset& d, std::ostream& out) {
  for (const Triple& t : d.triples) {
    out << "<" << t.subject << "> <" << t.predicate << "> ";
    if (!t.object.empty() && (t.object[0] == '"' || t.object.rfind("_:", 0) == 0))
      out << t.object;
    else
      out << "<" << t.object << ">";
    out << " .\n";
  }
}

int StructureView::property_index(const std::string& iri) const {
  for (size_t i = 0; i < properties.size(); ++i)
    if (properties[i] == iri) return static_cast<int>(i);
  return -1;
}

std::string signature_bitstring(const SignatureRow& sig) {
  std::string s(sig.bits.size(), '0');
  for (size_t i = 0; i < sig.bits.size(); ++i)
    if (sig.bits[i]) s[i] = '1';
  return s;
}

StructureView build_view(const Dataset& d, std::ostream* warnings) {
  StructureView view;
  for (const std::string& p : d.properties)
    if (p != kTypeIri) view.properties.push_back(p);

  std::unordered_map<std::string, int> prop_index;
  for (size_t i = 0; i < view.properties.size(); ++i)
    prop_index[view.properties[i]] = static_cast<int>(i);

  std::unordered_map<std::string, std::vector<bool>> row_of_subject;
  for (const std::string& s : d.subjects)
    row_of_subject[s] = std::vector<bool>(view.properties.size(), false);
  for (const Triple& t : d.triples) {
    auto it = prop_index.find(t.predicate);
    if (it != prop_index.end()) row_of_subject[t.subject][it->second] = true;
  }

  struct Group {
    std::uint64_t count = 0;
    std::string sample;
  };
  std::map<std::vector<bool>, Group> groups;
  for (const std::string& s : d.subjects) {
    const std::vector<bool>& row = row_of_subject[s];
    bool any = std::find(row.begin(), row.end(), true) != row.end();
    if (!any) {
      if (warnings)
        *warnings << "warning: subject <" << s
                  << "> has no properties besides rdf:type; dropped\n";
      continue;
    }
    Group& g = groups[row];
    if (g.count == 0) g.sample = s;
    ++g.count;
  }
  if (groups.empty())
    throw std::runtime_error(
        "dataset has no subjects after excluding the type predicate");

  for (auto& [bits, group] : groups) {
    SignatureRow sig;
    sig.bits = bits;
    sig.multiplicity = group.count;
    sig.sample_subject = group.sample;
    view.signatures.push_back(std::move(sig));
    view.total_subjects += group.count;
  }
  std::sort(view.signatures.begin(), view.signatures.end(),
            [](const SignatureRow& a, const SignatureRow& b) {
              if (a.multiplicity != b.multiplicity)
                return a.multiplicity > b.multiplicity;
              return signature_bitstring(a) < signature_bitstring(b);
            });
  return view;
}

void save_view(const StructureView& view, std::ostream& out) {
  out << "SIGV1 " << view.properties.size() << " " << view.signatures.size()
      << "\n";
  for (size_t i = 0; i < view.properties.size(); ++i) {
    if (i) out << "\t";
    out << view.properties[i];
  }
  out << "\n";
  for (const SignatureRow& sig : view.signatures)
    out << signature_bitstring(sig) << "\t" << sig.multiplicity << "\t"
        << sig.sample_subject << "\n";
}

StructureView load_view(std::istream& in) {
  std::string header;
  if (!std::getline(in, header))
    throw std::runtime_error("malformed view cache: empty file");
  std::istringstream hs(header);
  std::string magic;
  size_t n_props = 0, n_sigs = 0;
  if (!(hs >> magic >> n_props >> n_sigs) || magic != "SIGV1")
    throw std::runtime_error("malformed view cache: bad header");

  StructureView view;
  std::string props_line;
  if (!std::getline(in, props_line))
    throw std::runtime_error("malformed view cache: missing property line");
  if (!props_line.empty()) {
    size_t start = 0;
    while (true) {
      size_t tab = props_line.find('\t', start);
      view.properties.push_back(props_line.substr(
          start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
  }
  if (view.properties.size() != n_props)
    throw std::runtime_error("malformed view cache: property count mismatch");

  for (size_t i = 0; i < n_sigs; ++i) {
    std::string line;
    if (!std::getline(in, line))
      throw std::runtime_error("malformed view cache: truncated file");
    size_t t1 = line.find('\t');
    size_t t2 = t1 == std::string::npos ? std::string::npos
                                        : line.find('\t', t1 + 1);
    if (t2 == std::string::npos)
      throw std::runtime_error("malformed view cache: bad signature line");
    std::string bits = line.substr(0, t1);
    std::string mult = line.substr(t1 + 1, t2 - t1 - 1);
    SignatureRow sig;
    sig.sample_subject = line.substr(t2 + 1);
    if (bits.size() != n_props)
      throw std::runtime_error("malformed view cache: bitstring width");
    sig.bits.resize(n_props);
    for (size_t j = 0; j < n_props; ++j) {
      if (bits[j] != '0' && bits[j] != '1')
        throw std::runtime_error("malformed view cache: bad bitstring");
      sig.bits[j] = bits[j] == '1';
    }
    try {
      sig.multiplicity = std::stoull(mult);
    } catch (const std::exception&) {
      throw std::runtime_error("malformed view cache: bad multiplicity");
    }
    if (sig.multiplicity == 0)
      throw std::runtime_error("malformed view cache: zero multiplicity");
    view.total_subjects += sig.multiplicity;
    view.signatures.push_back(std::move(sig));
  }
  return view;
}

void save_view_file(const StructureView& view, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  save_view(view, out);
}

StructureView load_view_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open view cache: " + path);
  return load_view(in);
}

}  // namespace sortref
