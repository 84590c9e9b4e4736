#pragma once

#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparqlopt/dataset.hpp"
#include "sparqlopt/query.hpp"

namespace sparqlopt {

class RewriteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One named information element of a view: a triple-pattern chain hanging
/// off the resource node.
struct ViewElement {
    std::string name;
    std::vector<TriplePattern> chain;
};

/// Application view template: resource type, elements, and the non-empty
/// core subset guaranteed present for every defined instance.
struct ViewSpec {
    std::string resource_type;  // IRI
    std::string resource_var;   // variable the chains originate from
    std::vector<ViewElement> elements;
    std::set<std::string> core;
    std::map<std::string, std::string> prefixes;

    static ViewSpec from_json(const std::string& json_text);
    static ViewSpec load(const std::string& path);
    /// core non-empty, names unique and resolvable, every chain starts at the
    /// resource node; throws RewriteError otherwise.
    void validate() const;

    GraphPattern full_pattern() const;   // conjunction of every element chain
    GraphPattern core_pattern() const;   // conjunction of core element chains
    /// SELECT * with every element conjoined (the baseline).
    Query initial_query() const;
    /// SELECT * with one OPTIONAL block per non-core element.
    Query naive_optional_query() const;
};

/// Boolean ASK capability with a canonical-text keyed cache.
class AskProbe {
public:
    using Executor = std::function<bool(const Query&)>;

    explicit AskProbe(Executor executor) : executor_(std::move(executor)) {}
    /// Probe answered by the built-in evaluator over a local dataset.
    static AskProbe local(const Dataset& dataset);

    bool ask(const Query& ask_query);
    int issued() const { return issued_; }      // probe requests
    int executed() const { return executed_; }  // cache misses

private:
    Executor executor_;
    std::map<std::string, bool> cache_;
    int issued_ = 0;
    int executed_ = 0;
};

struct MinimizeReport {
    int probes_issued = 0;
    int probes_executed = 0;
    size_t required_patterns = 0;
    size_t optional_groups = 0;
};

/// Data-driven OPTIONAL minimization. `conjunction` uses only AND over triple
/// patterns; `core` is a sub-conjunction of it. Probes decide, per non-core
/// pattern in document order, whether it joins the required block, opens an
/// OPTIONAL group, extends a group, or nests inside one. Emits
/// SELECT * WHERE { required . OPTIONAL{...} ... }. Throws RewriteError when
/// a full pass moves nothing (unconnected patterns remain).
Query minimize_optionals(const GraphPattern& conjunction, const GraphPattern& core,
                         AskProbe& probe, MinimizeReport* report = nullptr);

struct LocalizeReport {
    std::vector<std::string> unlocalized;  // serialized patterns left outside GRAPH
    size_t blocks_added = 0;
};

/// Wrap constant-predicate patterns in GRAPH blocks per the provenance map,
/// merging adjacent same-graph patterns; OPTIONAL boundaries are preserved.
Query localize_graphs(const Query& q, const ProvenanceMap& prov,
                      LocalizeReport* report = nullptr);

struct MergeReport {
    size_t merged_chains = 0;
    std::vector<std::string> blocked;  // candidate chains with the blocking reason
};

/// Merge conjoined patterns (s,p,v) . (v,q,o) into (s, p/q, o) when the
/// intermediate variable occurs nowhere else, is not projected, and appears
/// in no filter, order, group or construct clause. Chains may extend.
Query merge_sequence_paths(const Query& q, MergeReport* report = nullptr);

/// Replace each aggregated variable's projection with GROUP_CONCAT and group
/// by the remaining projected variables; with an ORDER BY present, the
/// aggregation moves into a sub-select and ordering stays outermost.
Query reduce_cartesian(const Query& q, const std::set<std::string>& aggregated,
                       const std::string& separator);

enum class AlternativesTarget { Union, Filter, Values };

struct AlternativesReport {
    std::string subject_var;  // hole variable ("" for union output)
    size_t constants = 0;
    std::vector<std::string> warnings;
};

/// Convert between the three ways of naming alternative URIs: UNION branches,
/// a FILTER equality disjunction, and a VALUES block. Throws RewriteError
/// when the query does not match any recognized shape.
Query rewrite_alternatives(const Query& q, AlternativesTarget target,
                           AlternativesReport* report = nullptr);

struct PaginationPlan {
    Query page_query;  // SELECT DISTINCT item (+ order vars), ordered, paged
    Query fill_query;  // CONSTRUCT over the pattern with an empty VALUES block
    std::string item_var;
};

/// Two-step paginated view: identify the page's item URIs, then fetch their
/// attributes with a CONSTRUCT query restricted by VALUES.
PaginationPlan generate_pagination(const Query& q, uint64_t page_size, uint64_t page_index,
                                   const std::vector<OrderKey>& order);

/// Copy of the fill query with the page's item URIs in its VALUES block.
Query with_page_items(const Query& fill_query, const std::string& item_var,
                      const std::vector<RDFTerm>& items);

/// rdf:first/rdf:rest list skeleton for a page, as ground triples.
std::vector<Triple> page_skeleton(const std::vector<RDFTerm>& items);

}  // namespace sparqlopt
