#pragma once

#include <map>
#include <string>
#include <vector>

#include "sparqlopt/term.hpp"

namespace sparqlopt {

/// Query text with zero or more [UPPERCASE_NAME] placeholders.
struct QueryTemplate {
    std::string text;
};

/// Placeholder names present in the template, in order of first occurrence.
/// Occurrences inside IRIs, string literals and comments are not placeholders.
std::vector<std::string> template_placeholders(const QueryTemplate& t);

/// Substitute every placeholder with the serialized term. Throws
/// std::runtime_error naming the placeholder when a binding is missing.
/// The caller is expected to parse the result; parse errors propagate there.
std::string instantiate_template(const QueryTemplate& t,
                                 const std::map<std::string, RDFTerm>& bindings);

/// Inverse convenience: replace whole-token occurrences of a variable with a
/// [NAME] placeholder, skipping IRIs, literals and comments.
std::string templatize(const std::string& query_text, const std::string& var_name,
                       const std::string& placeholder_name);

}  // namespace sparqlopt
