#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sortref {

inline constexpr const char* kTypeIri =
    "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

struct Triple {
  std::string subject;
  std::string predicate;
  std::string object;  // IRI or literal, kept opaque

  friend bool operator==(const Triple&, const Triple&) = default;
};

// Deduplicated triples plus the derived subject/property index.
// subjects and properties are in first-seen order.
struct Dataset {
  std::vector<Triple> triples;
  std::vector<std::string> subjects;
  std::vector<std::string> properties;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, int line)
      : std::runtime_error(message + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// N-Triples subset: `<iri> <iri> (<iri>|"literal") .` per line, `#` comments
// and blank lines allowed. Blank node labels (_:x) are accepted as subjects.
Dataset parse_ntriples(std::istream& input);
Dataset parse_ntriples_file(const std::string& path);

// All triples whose subject is declared `type sort_iri`.
Dataset filter_by_sort(const Dataset& d, const std::string& sort_iri);

void write_ntriples(const Dataset& d, std::ostream& out);

// One signature per distinct row of the property-structure matrix.
struct SignatureRow {
  std::vector<bool> bits;  // over StructureView::properties
  std::uint64_t multiplicity = 0;
  std::string sample_subject;

  friend bool operator==(const SignatureRow&, const SignatureRow&) = default;
};

// Signature-compressed property-structure view. Columns exclude the rdf
// type predicate. Signatures are in canonical order: descending
// multiplicity, ties by bitstring (most significant bit = first column).
struct StructureView {
  std::vector<std::string> properties;
  std::vector<SignatureRow> signatures;
  std::uint64_t total_subjects = 0;

  int property_index(const std::string& iri) const;  // -1 when absent

  friend bool operator==(const StructureView&, const StructureView&) = default;
};

// Subjects that carry only a type triple have an empty signature; they are
// dropped with a warning on the given stream (nullptr silences it).
StructureView build_view(const Dataset& d, std::ostream* warnings = nullptr);

// SIGV1 text cache, bit-exact round trip.
void save_view(const StructureView& view, std::ostream& out);
StructureView load_view(std::istream& in);
void save_view_file(const StructureView& view, const std::string& path);
StructureView load_view_file(const std::string& path);

std::string signature_bitstring(const SignatureRow& sig);

}  // namespace sortref
