#pragma once

#include <optional>
#include <string>

#include "sparqlopt/algebra.hpp"

namespace sparqlopt {

/// application/sparql-results+json for SELECT and ASK results.
std::string results_to_json(const QueryResult& result);

/// N-Triples body for CONSTRUCT results.
std::string triples_to_ntriples(const std::vector<Triple>& triples);

/// Decode a SPARQL JSON results document. Returns the boolean for ASK
/// documents; for SELECT documents returns the decoded solution sequence.
/// Throws std::runtime_error on malformed documents.
struct DecodedResults {
    std::optional<bool> boolean;
    SolutionSequence solutions;
};
DecodedResults decode_results_json(const std::string& body);

}  // namespace sparqlopt
