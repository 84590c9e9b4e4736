#include "sparqlopt/query.hpp"

namespace sparqlopt {

Condition Condition::compare(Cmp op, RDFTerm lhs, RDFTerm rhs) {
    Condition c;
    c.kind = Kind::Compare;
    c.cmp = op;
    c.lhs = std::move(lhs);
    c.rhs = std::move(rhs);
    return c;
}

Condition Condition::bound(RDFTerm var) {
    Condition c;
    c.kind = Kind::Bound;
    c.lhs = std::move(var);
    return c;
}

Condition Condition::is_blank(RDFTerm operand) {
    Condition c;
    c.kind = Kind::IsBlank;
    c.lhs = std::move(operand);
    return c;
}

Condition Condition::is_iri(RDFTerm operand) {
    Condition c;
    c.kind = Kind::IsIri;
    c.lhs = std::move(operand);
    return c;
}

Condition Condition::negate(Condition inner) {
    Condition c;
    c.kind = Kind::Not;
    c.children.push_back(std::move(inner));
    return c;
}

Condition Condition::conj(Condition a, Condition b) {
    Condition c;
    c.kind = Kind::And;
    c.children.push_back(std::move(a));
    c.children.push_back(std::move(b));
    return c;
}

Condition Condition::disj(Condition a, Condition b) {
    Condition c;
    c.kind = Kind::Or;
    c.children.push_back(std::move(a));
    c.children.push_back(std::move(b));
    return c;
}

GraphPattern GraphPattern::triple_pattern(TriplePattern t) {
    GraphPattern p;
    p.kind = Kind::Triple;
    p.triple = std::move(t);
    return p;
}

static GraphPattern binary(GraphPattern::Kind k, GraphPattern l, GraphPattern r) {
    GraphPattern p;
    p.kind = k;
    p.children.push_back(std::move(l));
    p.children.push_back(std::move(r));
    return p;
}

GraphPattern GraphPattern::conj(GraphPattern l, GraphPattern r) {
    return binary(Kind::And, std::move(l), std::move(r));
}

GraphPattern GraphPattern::optional(GraphPattern l, GraphPattern r) {
    return binary(Kind::Opt, std::move(l), std::move(r));
}

GraphPattern GraphPattern::alternative(GraphPattern l, GraphPattern r) {
    return binary(Kind::Union, std::move(l), std::move(r));
}

GraphPattern GraphPattern::minus(GraphPattern l, GraphPattern r) {
    return binary(Kind::Minus, std::move(l), std::move(r));
}

GraphPattern GraphPattern::filter(GraphPattern inner, Condition c) {
    GraphPattern p;
    p.kind = Kind::Filter;
    p.children.push_back(std::move(inner));
    p.condition = std::move(c);
    return p;
}

GraphPattern GraphPattern::named_graph(RDFTerm name, GraphPattern inner) {
    GraphPattern p;
    p.kind = Kind::Graph;
    p.graph = std::move(name);
    p.children.push_back(std::move(inner));
    return p;
}

GraphPattern GraphPattern::inline_values(ValuesBlock v) {
    GraphPattern p;
    p.kind = Kind::Values;
    p.values = std::move(v);
    return p;
}

GraphPattern GraphPattern::subselect(Query q) {
    GraphPattern p;
    p.kind = Kind::SubSelect;
    p.subquery = std::make_shared<Query>(std::move(q));
    return p;
}

GraphPattern GraphPattern::conj_all(std::vector<GraphPattern> elems) {
    GraphPattern acc = std::move(elems.front());
    for (size_t i = 1; i < elems.size(); ++i) acc = conj(std::move(acc), std::move(elems[i]));
    return acc;
}

bool operator==(const GraphPattern& a, const GraphPattern& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case GraphPattern::Kind::Triple:
            return a.triple == b.triple;
        case GraphPattern::Kind::Filter:
            if (a.condition != b.condition) return false;
            break;
        case GraphPattern::Kind::Graph:
            if (a.graph != b.graph) return false;
            break;
        case GraphPattern::Kind::Values:
            return a.values == b.values;
        case GraphPattern::Kind::SubSelect:
            return structural_equal(*a.subquery, *b.subquery);
        default:
            break;
    }
    if (a.children.size() != b.children.size()) return false;
    for (size_t i = 0; i < a.children.size(); ++i)
        if (!(a.children[i] == b.children[i])) return false;
    return true;
}

ProjectionItem ProjectionItem::plain(RDFTerm var) {
    ProjectionItem item;
    item.var = std::move(var);
    return item;
}

ProjectionItem ProjectionItem::agg(AggregateFn fn, RDFTerm argument, RDFTerm as) {
    ProjectionItem item;
    item.var = std::move(as);
    item.aggregate = fn;
    item.argument = std::move(argument);
    return item;
}

bool Query::has_aggregates() const {
    for (const auto& item : projection)
        if (item.aggregate != AggregateFn::None) return true;
    return false;
}

std::vector<RDFTerm> Query::plain_projected() const {
    std::vector<RDFTerm> out;
    for (const auto& item : projection)
        if (item.aggregate == AggregateFn::None) out.push_back(item.var);
    return out;
}

bool structural_equal(const Query& a, const Query& b) {
    return a.form == b.form && a.distinct == b.distinct && a.select_all == b.select_all &&
           a.projection == b.projection && a.construct_template == b.construct_template &&
           a.pattern == b.pattern && a.group_by == b.group_by && a.order_by == b.order_by &&
           a.limit == b.limit && a.offset == b.offset;
}

static void visible_vars_rec(const GraphPattern& p, std::vector<RDFTerm>& out,
                             std::set<std::string>& seen) {
    auto add = [&](const RDFTerm& t) {
        if (t.is_variable() && seen.insert(t.lexical).second) out.push_back(t);
    };
    switch (p.kind) {
        case GraphPattern::Kind::Triple:
            add(p.triple.subject);
            for (const auto& s : p.triple.predicate.steps) add(s);
            add(p.triple.object);
            break;
        case GraphPattern::Kind::Filter:
            visible_vars_rec(p.inner(), out, seen);
            break;
        case GraphPattern::Kind::Graph:
            add(p.graph);
            visible_vars_rec(p.inner(), out, seen);
            break;
        case GraphPattern::Kind::Values:
            for (const auto& v : p.values.vars) add(v);
            break;
        case GraphPattern::Kind::SubSelect: {
            const Query& q = *p.subquery;
            if (q.select_all) {
                for (const auto& v : visible_vars(q.pattern)) add(v);
            } else {
                for (const auto& item : q.projection) add(item.var);
            }
            break;
        }
        case GraphPattern::Kind::Minus:
            visible_vars_rec(p.left(), out, seen);  // right side is out of scope
            break;
        default:
            for (const auto& c : p.children) visible_vars_rec(c, out, seen);
            break;
    }
}

std::vector<RDFTerm> visible_vars(const GraphPattern& p) {
    std::vector<RDFTerm> out;
    std::set<std::string> seen;
    visible_vars_rec(p, out, seen);
    return out;
}

std::vector<const GraphPattern*> and_chain(const GraphPattern& p) {
    std::vector<const GraphPattern*> out;
    const GraphPattern* node = &p;
    while (node->kind == GraphPattern::Kind::And) {
        out.push_back(&node->right());
        node = &node->left();
    }
    out.push_back(node);
    std::reverse(out.begin(), out.end());
    return out;
}

static void all_triples_rec(const GraphPattern& p, std::vector<const TriplePattern*>& out) {
    if (p.kind == GraphPattern::Kind::Triple) {
        out.push_back(&p.triple);
        return;
    }
    for (const auto& c : p.children) all_triples_rec(c, out);
}

std::vector<const TriplePattern*> all_triples(const GraphPattern& p) {
    std::vector<const TriplePattern*> out;
    all_triples_rec(p, out);
    return out;
}

size_t count_optionals(const GraphPattern& p) {
    size_t n = p.kind == GraphPattern::Kind::Opt ? 1 : 0;
    for (const auto& c : p.children) n += count_optionals(c);
    if (p.kind == GraphPattern::Kind::SubSelect) n += count_optionals(p.subquery->pattern);
    return n;
}

}  // namespace sparqlopt
