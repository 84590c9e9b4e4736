#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sparqlopt/term.hpp"

namespace sparqlopt {

/// Built-in condition tree for FILTER.
struct Condition {
    enum class Kind { Compare, Bound, IsBlank, IsIri, Not, And, Or };
    enum class Cmp { Eq, Ne, Lt, Gt, Le, Ge };

    Kind kind = Kind::Bound;
    Cmp cmp = Cmp::Eq;                 // Compare only
    RDFTerm lhs;                       // Compare / Bound / IsBlank / IsIri operand
    RDFTerm rhs;                       // Compare only
    std::vector<Condition> children;   // Not: 1, And/Or: 2

    auto operator<=>(const Condition&) const = default;

    static Condition compare(Cmp op, RDFTerm lhs, RDFTerm rhs);
    static Condition bound(RDFTerm var);
    static Condition is_blank(RDFTerm operand);
    static Condition is_iri(RDFTerm operand);
    static Condition negate(Condition inner);
    static Condition conj(Condition a, Condition b);
    static Condition disj(Condition a, Condition b);
};

/// Inline data block. Zero vars with one empty row is the join identity,
/// which the parser uses for groups that start with OPTIONAL or MINUS.
struct ValuesBlock {
    std::vector<RDFTerm> vars;
    std::vector<std::vector<std::optional<RDFTerm>>> rows;  // row arity == |vars|

    auto operator<=>(const ValuesBlock&) const = default;
};

struct Query;

/// Recursive graph pattern node.
struct GraphPattern {
    enum class Kind { Triple, And, Opt, Union, Filter, Graph, Values, Minus, SubSelect };

    Kind kind = Kind::Triple;
    TriplePattern triple;                 // Triple
    std::vector<GraphPattern> children;   // And/Opt/Union/Minus: 2, Filter/Graph: 1
    Condition condition;                  // Filter
    RDFTerm graph;                        // Graph name (iri or variable)
    ValuesBlock values;                   // Values
    std::shared_ptr<Query> subquery;      // SubSelect

    const GraphPattern& left() const { return children[0]; }
    const GraphPattern& right() const { return children[1]; }
    const GraphPattern& inner() const { return children[0]; }
    GraphPattern& left() { return children[0]; }
    GraphPattern& right() { return children[1]; }
    GraphPattern& inner() { return children[0]; }

    static GraphPattern triple_pattern(TriplePattern t);
    static GraphPattern conj(GraphPattern l, GraphPattern r);
    static GraphPattern optional(GraphPattern l, GraphPattern r);
    static GraphPattern alternative(GraphPattern l, GraphPattern r);
    static GraphPattern filter(GraphPattern inner, Condition c);
    static GraphPattern named_graph(RDFTerm name, GraphPattern inner);
    static GraphPattern inline_values(ValuesBlock v);
    static GraphPattern minus(GraphPattern l, GraphPattern r);
    static GraphPattern subselect(Query q);
    /// Left-assoc conjunction of a non-empty list.
    static GraphPattern conj_all(std::vector<GraphPattern> elems);
};

bool operator==(const GraphPattern& a, const GraphPattern& b);
inline bool operator!=(const GraphPattern& a, const GraphPattern& b) { return !(a == b); }

enum class QueryForm { Select, Ask, Construct };

enum class AggregateFn { None, Count, Sum, Min, Max, Avg, Sample, GroupConcat };

/// One SELECT clause entry: a plain variable or (AGG(arg) AS var).
struct ProjectionItem {
    RDFTerm var;                         // projected name
    AggregateFn aggregate = AggregateFn::None;
    bool distinct = false;               // COUNT(DISTINCT ...)
    bool star = false;                   // COUNT(*) argument
    RDFTerm argument;                    // aggregate argument variable
    std::optional<std::string> separator;  // GROUP_CONCAT SEPARATOR

    auto operator<=>(const ProjectionItem&) const = default;
    static ProjectionItem plain(RDFTerm var);
    static ProjectionItem agg(AggregateFn fn, RDFTerm argument, RDFTerm as);
};

struct OrderKey {
    RDFTerm var;
    bool descending = false;

    auto operator<=>(const OrderKey&) const = default;
};

/// A full query in the supported fragment.
struct Query {
    QueryForm form = QueryForm::Select;
    bool distinct = false;
    bool select_all = false;                    // SELECT *
    std::vector<ProjectionItem> projection;
    std::vector<TriplePattern> construct_template;  // construct only; single-step predicates
    GraphPattern pattern;
    std::vector<RDFTerm> group_by;
    std::vector<OrderKey> order_by;
    std::optional<uint64_t> limit;
    std::optional<uint64_t> offset;
    std::map<std::string, std::string> prefixes;  // kept for serialization only

    bool has_aggregates() const;
    /// Non-aggregated projected variable names.
    std::vector<RDFTerm> plain_projected() const;
};

/// Structural equality modulo the prefix map.
bool structural_equal(const Query& a, const Query& b);

/// Variables visible to SELECT * (excludes FILTER-only vars, MINUS right sides
/// and sub-select internals), in first-mention document order.
std::vector<RDFTerm> visible_vars(const GraphPattern& p);

/// Flatten the left spine of an And chain into document-ordered elements.
std::vector<const GraphPattern*> and_chain(const GraphPattern& p);

/// All triple patterns in the tree, document order (does not enter sub-selects).
std::vector<const TriplePattern*> all_triples(const GraphPattern& p);

/// Count of Opt nodes in the tree.
size_t count_optionals(const GraphPattern& p);

}  // namespace sparqlopt
