#include "sparqlopt/protocol.hpp"

#include <json.hpp>

namespace sparqlopt {

namespace {

nlohmann::json term_to_json(const RDFTerm& t) {
    nlohmann::json out;
    switch (t.kind) {
        case TermKind::Iri:
            out["type"] = "uri";
            out["value"] = t.lexical;
            break;
        case TermKind::Blank:
            out["type"] = "bnode";
            out["value"] = t.lexical;
            break;
        default:
            out["type"] = "literal";
            out["value"] = t.lexical;
            if (!t.language.empty()) out["xml:lang"] = t.language;
            if (!t.datatype.empty()) out["datatype"] = t.datatype;
            break;
    }
    return out;
}

RDFTerm term_from_json(const nlohmann::json& j) {
    std::string type = j.at("type").get<std::string>();
    std::string value = j.at("value").get<std::string>();
    if (type == "uri") return RDFTerm::iri(value);
    if (type == "bnode") return RDFTerm::blank(value);
    if (type == "literal" || type == "typed-literal")
        return RDFTerm::literal(value, j.value("datatype", ""), j.value("xml:lang", ""));
    throw std::runtime_error("unknown term type '" + type + "' in results JSON");
}

}  // namespace

std::string results_to_json(const QueryResult& result) {
    nlohmann::json doc;
    if (const bool* b = std::get_if<bool>(&result)) {
        doc["head"] = nlohmann::json::object();
        doc["boolean"] = *b;
        return doc.dump();
    }
    const auto& seq = std::get<SolutionSequence>(result);
    doc["head"]["vars"] = seq.variables;
    nlohmann::json bindings = nlohmann::json::array();
    for (const auto& row : seq.rows) {
        nlohmann::json binding = nlohmann::json::object();
        for (size_t i = 0; i < seq.variables.size(); ++i)
            if (row[i]) binding[seq.variables[i]] = term_to_json(*row[i]);
        bindings.push_back(std::move(binding));
    }
    doc["results"]["bindings"] = std::move(bindings);
    return doc.dump();
}

std::string triples_to_ntriples(const std::vector<Triple>& triples) {
    std::string out;
    for (const auto& t : triples)
        out += to_string(t.subject) + " " + to_string(t.predicate) + " " + to_string(t.object) +
               " .\n";
    return out;
}

DecodedResults decode_results_json(const std::string& body) {
    nlohmann::json doc = nlohmann::json::parse(body);
    DecodedResults out;
    if (doc.contains("boolean")) {
        out.boolean = doc.at("boolean").get<bool>();
        return out;
    }
    if (!doc.contains("results"))
        throw std::runtime_error("results JSON has neither 'boolean' nor 'results'");
    for (const auto& v : doc.at("head").at("vars"))
        out.solutions.variables.push_back(v.get<std::string>());
    for (const auto& binding : doc.at("results").at("bindings")) {
        std::vector<std::optional<RDFTerm>> row;
        for (const auto& var : out.solutions.variables) {
            if (binding.contains(var))
                row.emplace_back(term_from_json(binding.at(var)));
            else
                row.emplace_back(std::nullopt);
        }
        out.solutions.rows.push_back(std::move(row));
    }
    return out;
}

}  // namespace sparqlopt
