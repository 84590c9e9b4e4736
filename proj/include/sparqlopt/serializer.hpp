#pragma once

#include <string>

#include "sparqlopt/query.hpp"

namespace sparqlopt {

struct SerializeOptions {
    /// Emit the legacy BINDINGS keyword instead of VALUES.
    bool use_bindings_keyword = false;
};

/// Deterministic canonical text. parse_query(serialize_query(q)) is
/// structurally equal to q (modulo the prefix map).
std::string serialize_query(const Query& q, const SerializeOptions& opts = {});

/// Term in canonical query syntax, shortened against the prefix map
/// (longest-IRI match) when the remainder is a safe local name.
std::string serialize_term(const RDFTerm& t,
                           const std::map<std::string, std::string>& prefixes = {});

std::string serialize_condition(const Condition& c,
                                const std::map<std::string, std::string>& prefixes = {});

/// Pattern body as it would appear inside a group (no surrounding braces).
std::string serialize_pattern(const GraphPattern& p,
                              const std::map<std::string, std::string>& prefixes = {});

}  // namespace sparqlopt
