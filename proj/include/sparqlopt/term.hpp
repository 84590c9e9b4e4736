#pragma once

#include <compare>
#include <optional>
#include <string>
#include <vector>

namespace sparqlopt {

/// Kind of an RDF term. The order here is only for structural comparison;
/// ORDER BY uses order_compare() which sorts unbound < blank < iri < literal.
enum class TermKind { Iri, Blank, Literal, Variable };

/// One term out of U (IRIs), B (blank nodes), L (literals) or V (variables).
/// Literals may carry a datatype IRI or a language tag (not both).
struct RDFTerm {
    TermKind kind = TermKind::Iri;
    std::string lexical;   // IRI string, blank label, literal value, or variable name (no '?')
    std::string datatype;  // literals only; empty when plain
    std::string language;  // literals only; empty when untagged

    auto operator<=>(const RDFTerm&) const = default;

    static RDFTerm iri(std::string value);
    static RDFTerm blank(std::string label);
    static RDFTerm literal(std::string value, std::string datatype = "", std::string language = "");
    static RDFTerm variable(std::string name);

    bool is_iri() const { return kind == TermKind::Iri; }
    bool is_blank() const { return kind == TermKind::Blank; }
    bool is_literal() const { return kind == TermKind::Literal; }
    bool is_variable() const { return kind == TermKind::Variable; }
    bool is_ground() const { return kind != TermKind::Variable; }
};

/// Sequence path: an ordered chain of predicate terms joined by '/'.
/// A single step is a plain triple-pattern predicate.
struct PathExpr {
    std::vector<RDFTerm> steps;

    auto operator<=>(const PathExpr&) const = default;

    static PathExpr single(RDFTerm predicate) { return PathExpr{{std::move(predicate)}}; }
    bool is_single() const { return steps.size() == 1; }
    /// All steps are constant IRIs (required for graph localization and merging).
    bool all_iri() const;
};

/// Triple pattern: subject in U∪B∪V, predicate a path over U∪V, object in U∪B∪L∪V.
struct TriplePattern {
    RDFTerm subject;
    PathExpr predicate;
    RDFTerm object;

    auto operator<=>(const TriplePattern&) const = default;

    TriplePattern() = default;
    TriplePattern(RDFTerm s, PathExpr p, RDFTerm o)
        : subject(std::move(s)), predicate(std::move(p)), object(std::move(o)) {}
    TriplePattern(RDFTerm s, RDFTerm p, RDFTerm o)
        : subject(std::move(s)), predicate(PathExpr::single(std::move(p))), object(std::move(o)) {}
};

/// Ground RDF triple: (s,p,o) in (U∪B) × U × (U∪B∪L).
struct Triple {
    RDFTerm subject;
    RDFTerm predicate;
    RDFTerm object;

    auto operator<=>(const Triple&) const = default;
};

/// IRI string looks absolute (has a scheme).
bool is_absolute_iri(const std::string& iri);

/// Total order used by ORDER BY: unbound slots sort before everything,
/// then blank < iri < literal; literals compare by datatype then lexical.
/// Returns <0, 0, >0.
int order_compare(const std::optional<RDFTerm>& a, const std::optional<RDFTerm>& b);

/// Literal with a numeric XSD datatype whose lexical form parses as a number.
bool is_numeric_literal(const RDFTerm& t);
/// Numeric value of a numeric literal; no checking.
double numeric_value(const RDFTerm& t);

/// N-Triples style rendering, used in diagnostics and probe texts.
std::string to_string(const RDFTerm& t);

namespace iris {
inline const std::string rdf_type = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
inline const std::string rdf_first = "http://www.w3.org/1999/02/22-rdf-syntax-ns#first";
inline const std::string rdf_rest = "http://www.w3.org/1999/02/22-rdf-syntax-ns#rest";
inline const std::string rdf_nil = "http://www.w3.org/1999/02/22-rdf-syntax-ns#nil";
inline const std::string xsd_integer = "http://www.w3.org/2001/XMLSchema#integer";
inline const std::string xsd_decimal = "http://www.w3.org/2001/XMLSchema#decimal";
inline const std::string xsd_double = "http://www.w3.org/2001/XMLSchema#double";
inline const std::string xsd_boolean = "http://www.w3.org/2001/XMLSchema#boolean";
inline const std::string xsd_string = "http://www.w3.org/2001/XMLSchema#string";
}  // namespace iris

}  // namespace sparqlopt
