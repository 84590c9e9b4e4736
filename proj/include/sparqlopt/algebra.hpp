#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <variant>
#include <vector>

#include "sparqlopt/dataset.hpp"
#include "sparqlopt/query.hpp"

namespace sparqlopt {

/// Partial function from variable names to ground terms.
struct Mapping {
    std::map<std::string, RDFTerm> bindings;

    auto operator<=>(const Mapping&) const = default;

    bool binds(const std::string& var) const { return bindings.count(var) != 0; }
    const RDFTerm* get(const std::string& var) const;
};

bool compatible(const Mapping& a, const Mapping& b);
Mapping merge(const Mapping& a, const Mapping& b);  // precondition: compatible
bool domains_intersect(const Mapping& a, const Mapping& b);

/// Set of mappings with deterministic insertion order. Under set semantics
/// duplicates are dropped; bag mode keeps them. Equality is order-blind.
class MappingSet {
public:
    explicit MappingSet(bool bag = false) : bag_(bag) {}

    void insert(Mapping m);
    const std::vector<Mapping>& rows() const { return rows_; }
    size_t size() const { return rows_.size(); }
    bool empty() const { return rows_.empty(); }
    bool bag_mode() const { return bag_; }

    bool set_equal(const MappingSet& other) const;

private:
    std::vector<Mapping> rows_;
    std::set<Mapping> seen_;
    bool bag_ = false;
};

MappingSet join(const MappingSet& a, const MappingSet& b);
MappingSet set_union(const MappingSet& a, const MappingSet& b);
/// The paper's set difference: mappings of a incompatible with every b.
MappingSet difference(const MappingSet& a, const MappingSet& b);
/// join(a,b) ∪ difference(a,b).
MappingSet left_outer_join(const MappingSet& a, const MappingSet& b);
/// SPARQL 1.1 MINUS: drop mappings of a that have a compatible counterpart
/// in b sharing at least one domain variable.
MappingSet minus(const MappingSet& a, const MappingSet& b);

enum class Ternary { True, False, Error };

/// Three-valued condition evaluation; unbound operands in comparisons and
/// type predicates yield Error, bound() never does.
Ternary evaluate_condition(const Condition& condition, const Mapping& mapping);

class EvalTimeout : public std::runtime_error {
public:
    EvalTimeout() : std::runtime_error("evaluation timed out") {}
};

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EvalOptions {
    bool bag_semantics = false;
    std::string group_concat_separator = ", ";  // used when the query gives none
    std::optional<std::chrono::steady_clock::time_point> deadline;
};

/// Recursive pattern evaluation per the formal semantics; GRAPH, VALUES,
/// MINUS, aggregates and sub-selects follow SPARQL 1.1.
MappingSet evaluate(const GraphPattern& pattern, const Dataset& dataset,
                    const Scope& active = Scope::def(), const EvalOptions& opts = {});

/// Ordered, projected result rows.
struct SolutionSequence {
    std::vector<std::string> variables;
    std::vector<std::vector<std::optional<RDFTerm>>> rows;
};

using QueryResult = std::variant<SolutionSequence, bool, std::vector<Triple>>;

/// Full query evaluation: pattern, grouping/aggregates, projection, DISTINCT,
/// ORDER BY, OFFSET, LIMIT; ASK niceness; CONSTRUCT instantiation.
QueryResult evaluate_query(const Query& q, const Dataset& dataset, const EvalOptions& opts = {});

}  // namespace sparqlopt
