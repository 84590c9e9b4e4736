#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparqlopt/term.hpp"

namespace sparqlopt {

class LoadError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class RdfFormat { NTriples, NQuads };

struct LoadSpec {
    std::string path;
    RdfFormat format = RdfFormat::NTriples;
    std::string graph;  // graph IRI for ntriples files; ignored for nquads
};

enum class ScopeKind { Default, Named, Any };

/// Which triples a match runs against.
struct Scope {
    ScopeKind kind = ScopeKind::Default;
    std::string graph;  // Named only

    static Scope def() { return {}; }
    static Scope named(std::string iri) { return Scope{ScopeKind::Named, std::move(iri)}; }
    static Scope any() { return Scope{ScopeKind::Any, ""}; }
};

struct TripleMatch {
    // Bindings for the pattern's variable positions, in (s, p, o) order.
    std::vector<std::pair<std::string, RDFTerm>> bindings;
    std::string graph;  // source graph (empty for the default view)
};

/// Predicate-to-graph assignment justifying GRAPH localization.
struct ProvenanceMap {
    std::map<std::string, std::string> predicate_to_graph;
    std::vector<std::pair<std::string, std::vector<std::string>>> spanning;  // omitted predicates

    /// Graph for a predicate, or empty.
    std::string graph_of(const std::string& predicate_iri) const;
};

/// Immutable in-memory RDF dataset with named graphs. The default graph is
/// the union of all named graphs plus explicit default-graph quads, unless
/// configured otherwise. Loading is single-writer; reads need no locking.
class Dataset {
public:
    Dataset() = default;

    /// Bulk-load N-Triples / N-Quads files. Blank labels are scoped per file.
    static Dataset load(const std::vector<LoadSpec>& files, bool default_is_union = true);
    /// Load from a JSON manifest file (see README for the schema).
    static Dataset load_manifest(const std::string& manifest_path);

    void add(const Triple& t, const std::string& graph);
    /// Call once after the last add(); builds the default view and indexes.
    void seal();

    /// All mappings for a triple pattern within the scope. Variables in the
    /// pattern are the only non-ground positions; blank nodes act as
    /// wildcards and produce no binding. Results follow insertion order.
    std::vector<TripleMatch> match(const Scope& scope, const RDFTerm& s, const RDFTerm& p,
                                   const RDFTerm& o) const;

    std::vector<std::string> graph_names() const;
    size_t graph_size(const std::string& graph) const;  // "" = default view
    size_t total_triples() const;
    const std::vector<Triple>& graph_triples(const std::string& graph) const;
    bool default_is_union() const { return default_is_union_; }

    /// Predicates occurring in exactly one named graph map to it; predicates
    /// spanning graphs are omitted and reported.
    ProvenanceMap infer_provenance() const;

    /// True when every triple whose predicate is mapped occurs only in the
    /// mapped graph; violations name the predicate and the offending graph.
    bool validate_provenance(const ProvenanceMap& map, std::vector<std::string>* violations) const;

    /// Subjects with rdf:type == type_iri in the default view, sorted.
    std::vector<RDFTerm> subjects_of_type(const std::string& type_iri) const;

private:
    struct Graph {
        std::vector<Triple> triples;            // insertion order
        std::set<Triple> present;               // dedupe
        std::map<RDFTerm, std::vector<size_t>> by_subject;
        std::map<RDFTerm, std::vector<size_t>> by_predicate;

        bool insert(const Triple& t);
        void build_index();
    };

    std::map<std::string, Graph> named_;
    std::vector<std::string> graph_order_;
    Graph explicit_default_;
    Graph default_view_;
    bool default_is_union_ = true;
    bool sealed_ = false;

    const Graph* find_graph(const Scope& scope) const;
    static void match_into(const Graph& g, const RDFTerm& s, const RDFTerm& p, const RDFTerm& o,
                           const std::string& graph_name, std::vector<TripleMatch>& out);
};

/// Parse a manifest JSON document (paths resolved against base_dir).
std::pair<std::vector<LoadSpec>, bool> parse_manifest(const std::string& json_text,
                                                      const std::string& base_dir);

}  // namespace sparqlopt
