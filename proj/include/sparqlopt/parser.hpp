#pragma once

#include <stdexcept>
#include <string>

#include "sparqlopt/query.hpp"

namespace sparqlopt {

/// Syntax or validation error with source position.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, int line, int column, std::string token = "");

    int line() const { return line_; }
    int column() const { return column_; }
    const std::string& token() const { return token_; }

private:
    int line_;
    int column_;
    std::string token_;
};

/// Parse a query in the supported SPARQL fragment: SELECT/ASK/CONSTRUCT,
/// '.'-conjunction, OPTIONAL, UNION, FILTER, GRAPH, VALUES (BINDINGS accepted
/// as an alias), MINUS, '/' sequence paths, GROUP BY, aggregates, ORDER BY,
/// LIMIT, OFFSET, and sub-selects. Prefixed names are expanded; blank node
/// labels are renamed apart (b0, b1, ... in first-occurrence order).
Query parse_query(const std::string& text, const std::string& base = "");

}  // namespace sparqlopt
