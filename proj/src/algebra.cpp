#include "sparqlopt/algebra.hpp"

#include <algorithm>
#include <cstdio>

namespace sparqlopt {

const RDFTerm* Mapping::get(const std::string& var) const {
    auto it = bindings.find(var);
    return it == bindings.end() ? nullptr : &it->second;
}

bool compatible(const Mapping& a, const Mapping& b) {
    const Mapping& small = a.bindings.size() <= b.bindings.size() ? a : b;
    const Mapping& large = a.bindings.size() <= b.bindings.size() ? b : a;
    for (const auto& [var, term] : small.bindings) {
        auto it = large.bindings.find(var);
        if (it != large.bindings.end() && it->second != term) return false;
    }
    return true;
}

Mapping merge(const Mapping& a, const Mapping& b) {
    Mapping out = a;
    out.bindings.insert(b.bindings.begin(), b.bindings.end());
    return out;
}

bool domains_intersect(const Mapping& a, const Mapping& b) {
    const Mapping& small = a.bindings.size() <= b.bindings.size() ? a : b;
    const Mapping& large = a.bindings.size() <= b.bindings.size() ? b : a;
    for (const auto& [var, term] : small.bindings)
        if (large.bindings.count(var)) return true;
    return false;
}

void MappingSet::insert(Mapping m) {
    if (!bag_ && !seen_.insert(m).second) return;
    rows_.push_back(std::move(m));
}

bool MappingSet::set_equal(const MappingSet& other) const {
    std::multiset<Mapping> a(rows_.begin(), rows_.end());
    std::multiset<Mapping> b(other.rows_.begin(), other.rows_.end());
    if (!bag_ && !other.bag_) {
        return std::set<Mapping>(rows_.begin(), rows_.end()) ==
               std::set<Mapping>(other.rows_.begin(), other.rows_.end());
    }
    return a == b;
}

MappingSet join(const MappingSet& a, const MappingSet& b) {
    MappingSet out(a.bag_mode() || b.bag_mode());
    for (const auto& m1 : a.rows())
        for (const auto& m2 : b.rows())
            if (compatible(m1, m2)) out.insert(merge(m1, m2));
    return out;
}

MappingSet set_union(const MappingSet& a, const MappingSet& b) {
    MappingSet out(a.bag_mode() || b.bag_mode());
    for (const auto& m : a.rows()) out.insert(m);
    for (const auto& m : b.rows()) out.insert(m);
    return out;
}

MappingSet difference(const MappingSet& a, const MappingSet& b) {
    MappingSet out(a.bag_mode() || b.bag_mode());
    for (const auto& m1 : a.rows()) {
        bool any_compatible = false;
        for (const auto& m2 : b.rows())
            if (compatible(m1, m2)) {
                any_compatible = true;
                break;
            }
        if (!any_compatible) out.insert(m1);
    }
    return out;
}

MappingSet left_outer_join(const MappingSet& a, const MappingSet& b) {
    return set_union(join(a, b), difference(a, b));
}

MappingSet minus(const MappingSet& a, const MappingSet& b) {
    MappingSet out(a.bag_mode() || b.bag_mode());
    for (const auto& m1 : a.rows()) {
        bool removed = false;
        for (const auto& m2 : b.rows())
            if (compatible(m1, m2) && domains_intersect(m1, m2)) {
                removed = true;
                break;
            }
        if (!removed) out.insert(m1);
    }
    return out;
}

// --- conditions -----------------------------------------------------------

namespace {

Ternary tern(bool b) { return b ? Ternary::True : Ternary::False; }

Ternary ternary_not(Ternary t) {
    if (t == Ternary::Error) return Ternary::Error;
    return t == Ternary::True ? Ternary::False : Ternary::True;
}

Ternary ternary_and(Ternary a, Ternary b) {
    if (a == Ternary::False || b == Ternary::False) return Ternary::False;
    if (a == Ternary::Error || b == Ternary::Error) return Ternary::Error;
    return Ternary::True;
}

Ternary ternary_or(Ternary a, Ternary b) {
    if (a == Ternary::True || b == Ternary::True) return Ternary::True;
    if (a == Ternary::Error || b == Ternary::Error) return Ternary::Error;
    return Ternary::False;
}

/// Resolve a condition leaf against the mapping; nullptr = unbound variable.
const RDFTerm* resolve(const RDFTerm& t, const Mapping& m, RDFTerm& storage) {
    if (!t.is_variable()) {
        storage = t;
        return &storage;
    }
    return m.get(t.lexical);
}

bool plain_string(const RDFTerm& t) {
    return t.is_literal() && t.language.empty() &&
           (t.datatype.empty() || t.datatype == iris::xsd_string);
}

Ternary compare_terms(Condition::Cmp cmp, const RDFTerm& a, const RDFTerm& b) {
    if (cmp == Condition::Cmp::Eq || cmp == Condition::Cmp::Ne) {
        bool eq;
        if (is_numeric_literal(a) && is_numeric_literal(b))
            eq = numeric_value(a) == numeric_value(b);
        else
            eq = a == b;
        return tern(cmp == Condition::Cmp::Eq ? eq : !eq);
    }
    int sign;
    if (is_numeric_literal(a) && is_numeric_literal(b)) {
        double x = numeric_value(a), y = numeric_value(b);
        sign = x < y ? -1 : (x > y ? 1 : 0);
    } else if (plain_string(a) && plain_string(b)) {
        sign = a.lexical.compare(b.lexical);
    } else {
        return Ternary::Error;  // order undefined across kinds
    }
    switch (cmp) {
        case Condition::Cmp::Lt: return tern(sign < 0);
        case Condition::Cmp::Gt: return tern(sign > 0);
        case Condition::Cmp::Le: return tern(sign <= 0);
        case Condition::Cmp::Ge: return tern(sign >= 0);
        default: return Ternary::Error;
    }
}

}  // namespace

Ternary evaluate_condition(const Condition& c, const Mapping& m) {
    switch (c.kind) {
        case Condition::Kind::Bound:
            return tern(m.binds(c.lhs.lexical));
        case Condition::Kind::IsBlank:
        case Condition::Kind::IsIri: {
            RDFTerm storage;
            const RDFTerm* t = resolve(c.lhs, m, storage);
            if (!t) return Ternary::Error;
            return tern(c.kind == Condition::Kind::IsBlank ? t->is_blank() : t->is_iri());
        }
        case Condition::Kind::Compare: {
            RDFTerm ls, rs;
            const RDFTerm* l = resolve(c.lhs, m, ls);
            const RDFTerm* r = resolve(c.rhs, m, rs);
            if (!l || !r) return Ternary::Error;
            return compare_terms(c.cmp, *l, *r);
        }
        case Condition::Kind::Not:
            return ternary_not(evaluate_condition(c.children[0], m));
        case Condition::Kind::And:
            return ternary_and(evaluate_condition(c.children[0], m),
                               evaluate_condition(c.children[1], m));
        case Condition::Kind::Or:
            return ternary_or(evaluate_condition(c.children[0], m),
                              evaluate_condition(c.children[1], m));
    }
    return Ternary::Error;
}

// --- pattern evaluation -----------------------------------------------------

namespace {

struct EvalContext {
    const Dataset& dataset;
    const EvalOptions& opts;
    int fresh_counter = 0;

    void check_deadline() const {
        if (opts.deadline && std::chrono::steady_clock::now() > *opts.deadline)
            throw EvalTimeout();
    }

    MappingSet make_set() const { return MappingSet(opts.bag_semantics); }
};

QueryResult evaluate_query_scoped(const Query& q, EvalContext& ctx, const Scope& active);

/// Internal variables carry a reserved prefix so they can be projected away.
bool internal_var(const std::string& name) { return name.rfind("__sq_", 0) == 0; }

Mapping strip_internal(const Mapping& m) {
    Mapping out;
    for (const auto& [var, term] : m.bindings)
        if (!internal_var(var)) out.bindings.emplace(var, term);
    return out;
}

MappingSet eval_triple(const TriplePattern& t, EvalContext& ctx, const Scope& active) {
    ctx.check_deadline();
    MappingSet out = ctx.make_set();
    // Pattern blanks act as internal variables so one label co-refers across
    // the pattern; the bindings are stripped from the public result.
    auto blank_as_var = [](const RDFTerm& term) {
        return term.is_blank() ? RDFTerm::variable("__sq_b" + term.lexical) : term;
    };
    RDFTerm subject = blank_as_var(t.subject);
    RDFTerm object = blank_as_var(t.object);
    const auto& steps = t.predicate.steps;
    if (steps.size() == 1) {
        for (const auto& m : ctx.dataset.match(active, subject, steps[0], object)) {
            Mapping mapping;
            for (const auto& [var, term] : m.bindings) mapping.bindings.emplace(var, term);
            out.insert(std::move(mapping));
        }
        return out;
    }
    // Sequence path: expand to a chain joined on fresh internal variables,
    // then project the internals away.
    std::vector<RDFTerm> nodes;
    nodes.push_back(subject);
    for (size_t i = 0; i + 1 < steps.size(); ++i)
        nodes.push_back(RDFTerm::variable("__sq_p" + std::to_string(ctx.fresh_counter++)));
    nodes.push_back(object);
    MappingSet acc = ctx.make_set();
    bool first = true;
    for (size_t i = 0; i < steps.size(); ++i) {
        MappingSet step = eval_triple(TriplePattern(nodes[i], steps[i], nodes[i + 1]), ctx, active);
        acc = first ? std::move(step) : join(acc, step);
        first = false;
        ctx.check_deadline();
    }
    for (const auto& m : acc.rows()) out.insert(strip_internal(m));
    return out;
}

MappingSet eval_values(const ValuesBlock& v, EvalContext& ctx) {
    MappingSet out = ctx.make_set();
    for (const auto& row : v.rows) {
        Mapping m;
        for (size_t i = 0; i < v.vars.size(); ++i)
            if (row[i]) m.bindings.emplace(v.vars[i].lexical, *row[i]);
        out.insert(std::move(m));
    }
    return out;
}

MappingSet eval_pattern(const GraphPattern& p, EvalContext& ctx, const Scope& active) {
    ctx.check_deadline();
    switch (p.kind) {
        case GraphPattern::Kind::Triple:
            return eval_triple(p.triple, ctx, active);
        case GraphPattern::Kind::And:
            return join(eval_pattern(p.left(), ctx, active), eval_pattern(p.right(), ctx, active));
        case GraphPattern::Kind::Opt:
            return left_outer_join(eval_pattern(p.left(), ctx, active),
                                   eval_pattern(p.right(), ctx, active));
        case GraphPattern::Kind::Union:
            return set_union(eval_pattern(p.left(), ctx, active),
                             eval_pattern(p.right(), ctx, active));
        case GraphPattern::Kind::Minus:
            return minus(eval_pattern(p.left(), ctx, active),
                         eval_pattern(p.right(), ctx, active));
        case GraphPattern::Kind::Filter: {
            MappingSet inner = eval_pattern(p.inner(), ctx, active);
            MappingSet out = ctx.make_set();
            for (const auto& m : inner.rows())
                if (evaluate_condition(p.condition, m) == Ternary::True) out.insert(m);
            return out;
        }
        case GraphPattern::Kind::Graph: {
            if (p.graph.is_iri())
                return eval_pattern(p.inner(), ctx, Scope::named(p.graph.lexical));
            // Variable graph name: iterate named graphs, binding the name.
            MappingSet out = ctx.make_set();
            for (const auto& name : ctx.dataset.graph_names()) {
                MappingSet inner = eval_pattern(p.inner(), ctx, Scope::named(name));
                Mapping g;
                g.bindings.emplace(p.graph.lexical, RDFTerm::iri(name));
                for (const auto& m : inner.rows())
                    if (compatible(m, g)) out.insert(merge(m, g));
            }
            return out;
        }
        case GraphPattern::Kind::Values:
            return eval_values(p.values, ctx);
        case GraphPattern::Kind::SubSelect: {
            QueryResult r = evaluate_query_scoped(*p.subquery, ctx, active);
            const auto& seq = std::get<SolutionSequence>(r);
            MappingSet out = ctx.make_set();
            for (const auto& row : seq.rows) {
                Mapping m;
                for (size_t i = 0; i < seq.variables.size(); ++i)
                    if (row[i]) m.bindings.emplace(seq.variables[i], *row[i]);
                out.insert(std::move(m));
            }
            return out;
        }
    }
    return ctx.make_set();
}

// --- query-level evaluation -------------------------------------------------

std::string format_number(double v) {
    if (v == static_cast<long long>(v)) return std::to_string(static_cast<long long>(v));
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

RDFTerm integer_literal(size_t n) {
    return RDFTerm::literal(std::to_string(n), iris::xsd_integer);
}

std::optional<RDFTerm> eval_aggregate(const ProjectionItem& item,
                                      const std::vector<const Mapping*>& group,
                                      const EvalOptions& opts) {
    std::vector<RDFTerm> args;
    if (!item.star) {
        for (const auto* m : group)
            if (const RDFTerm* t = m->get(item.argument.lexical)) args.push_back(*t);
        if (item.distinct) {
            std::vector<RDFTerm> uniq;
            std::set<RDFTerm> seen;
            for (auto& a : args)
                if (seen.insert(a).second) uniq.push_back(a);
            args = std::move(uniq);
        }
    }
    switch (item.aggregate) {
        case AggregateFn::Count: {
            if (!item.star) return integer_literal(args.size());
            if (!item.distinct) return integer_literal(group.size());
            std::set<Mapping> uniq;
            for (const auto* m : group) uniq.insert(*m);
            return integer_literal(uniq.size());
        }
        case AggregateFn::Sum:
        case AggregateFn::Avg: {
            double total = 0;
            size_t n = 0;
            for (const auto& a : args)
                if (is_numeric_literal(a)) {
                    total += numeric_value(a);
                    ++n;
                }
            if (item.aggregate == AggregateFn::Sum)
                return RDFTerm::literal(format_number(total), iris::xsd_decimal);
            if (n == 0) return std::nullopt;
            return RDFTerm::literal(format_number(total / n), iris::xsd_decimal);
        }
        case AggregateFn::Min:
        case AggregateFn::Max: {
            if (args.empty()) return std::nullopt;
            const RDFTerm* best = &args[0];
            for (const auto& a : args) {
                int cmp = order_compare(a, *best);
                if (item.aggregate == AggregateFn::Min ? cmp < 0 : cmp > 0) best = &a;
            }
            return *best;
        }
        case AggregateFn::Sample:
            if (args.empty()) return std::nullopt;
            return args[0];
        case AggregateFn::GroupConcat: {
            std::string sep = item.separator ? *item.separator : opts.group_concat_separator;
            std::string joined;
            for (size_t i = 0; i < args.size(); ++i) {
                if (i) joined += sep;
                joined += args[i].lexical;
            }
            return RDFTerm::literal(joined);
        }
        default:
            return std::nullopt;
    }
}

std::vector<std::vector<std::optional<RDFTerm>>> project_groups(
    const Query& q, const MappingSet& mappings, const EvalOptions& opts) {
    // Group keys follow GROUP BY; with aggregates but no GROUP BY there is a
    // single group over everything.
    std::vector<std::vector<std::optional<RDFTerm>>> rows;
    using Key = std::vector<std::optional<RDFTerm>>;
    std::vector<Key> key_order;
    std::map<Key, std::vector<const Mapping*>> groups;
    for (const auto& m : mappings.rows()) {
        Key key;
        for (const auto& v : q.group_by) {
            const RDFTerm* t = m.get(v.lexical);
            key.push_back(t ? std::optional<RDFTerm>(*t) : std::nullopt);
        }
        auto [it, fresh] = groups.try_emplace(key);
        if (fresh) key_order.push_back(key);
        it->second.push_back(&m);
    }
    if (groups.empty() && q.group_by.empty()) {
        // Aggregates over an empty solution set still yield one group.
        key_order.push_back({});
        groups[{}] = {};
    }
    for (const auto& key : key_order) {
        const auto& group = groups[key];
        std::vector<std::optional<RDFTerm>> row;
        for (const auto& item : q.projection) {
            if (item.aggregate == AggregateFn::None) {
                // Grouped variable: same value across the group by construction.
                size_t idx = 0;
                bool found = false;
                for (; idx < q.group_by.size(); ++idx)
                    if (q.group_by[idx] == item.var) {
                        found = true;
                        break;
                    }
                if (found)
                    row.push_back(key[idx]);
                else
                    row.push_back(std::nullopt);
            } else {
                row.push_back(eval_aggregate(item, group, opts));
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

QueryResult evaluate_query_scoped(const Query& q, EvalContext& ctx, const Scope& active) {
    MappingSet mappings = eval_pattern(q.pattern, ctx, active);

    if (q.form == QueryForm::Ask) return QueryResult(!mappings.empty());

    if (q.form == QueryForm::Construct) {
        std::vector<Triple> out;
        std::set<Triple> seen;
        int blank_round = 0;
        for (const auto& m : mappings.rows()) {
            for (const auto& t : q.construct_template) {
                auto resolve = [&](const RDFTerm& term) -> std::optional<RDFTerm> {
                    if (term.is_variable()) {
                        const RDFTerm* bound = m.get(term.lexical);
                        if (!bound) return std::nullopt;
                        return *bound;
                    }
                    if (term.is_blank())  // fresh blank per solution
                        return RDFTerm::blank(term.lexical + "_s" + std::to_string(blank_round));
                    return term;
                };
                auto s = resolve(t.subject);
                auto p = resolve(t.predicate.steps[0]);
                auto o = resolve(t.object);
                if (!s || !p || !o) continue;  // incomplete triples are dropped
                if (s->is_literal() || !p->is_iri()) continue;
                Triple triple{*s, *p, *o};
                if (seen.insert(triple).second) out.push_back(std::move(triple));
            }
            ++blank_round;
        }
        return QueryResult(std::move(out));
    }

    // SELECT
    SolutionSequence seq;
    bool aggregated = q.has_aggregates() || !q.group_by.empty();
    if (aggregated) {
        if (q.select_all) throw EvalError("SELECT * cannot be combined with aggregation");
        for (const auto& item : q.projection) {
            if (item.aggregate == AggregateFn::None) {
                bool grouped = std::find(q.group_by.begin(), q.group_by.end(), item.var) !=
                               q.group_by.end();
                if (!grouped)
                    throw EvalError("variable ?" + item.var.lexical +
                                    " is projected but neither aggregated nor grouped");
            }
            seq.variables.push_back(item.var.lexical);
        }
        seq.rows = project_groups(q, mappings, ctx.opts);
    } else {
        std::vector<RDFTerm> proj =
            q.select_all ? visible_vars(q.pattern) : q.plain_projected();
        for (const auto& v : proj) seq.variables.push_back(v.lexical);
        for (const auto& m : mappings.rows()) {
            std::vector<std::optional<RDFTerm>> row;
            for (const auto& v : proj) {
                const RDFTerm* t = m.get(v.lexical);
                row.push_back(t ? std::optional<RDFTerm>(*t) : std::nullopt);
            }
            seq.rows.push_back(std::move(row));
        }
    }

    if (q.distinct) {
        std::vector<std::vector<std::optional<RDFTerm>>> uniq;
        std::set<std::vector<std::optional<RDFTerm>>> seen;
        for (auto& row : seq.rows)
            if (seen.insert(row).second) uniq.push_back(std::move(row));
        seq.rows = std::move(uniq);
    }

    if (!q.order_by.empty()) {
        std::vector<int> key_index;
        for (const auto& key : q.order_by) {
            int idx = -1;
            for (size_t i = 0; i < seq.variables.size(); ++i)
                if (seq.variables[i] == key.var.lexical) idx = static_cast<int>(i);
            key_index.push_back(idx);
        }
        std::stable_sort(seq.rows.begin(), seq.rows.end(), [&](const auto& a, const auto& b) {
            for (size_t k = 0; k < q.order_by.size(); ++k) {
                int idx = key_index[k];
                if (idx < 0) continue;
                int cmp = order_compare(a[idx], b[idx]);
                if (cmp != 0) return q.order_by[k].descending ? cmp > 0 : cmp < 0;
            }
            return false;
        });
    }

    if (q.offset && *q.offset > 0) {
        if (*q.offset >= seq.rows.size())
            seq.rows.clear();
        else
            seq.rows.erase(seq.rows.begin(), seq.rows.begin() + static_cast<long>(*q.offset));
    }
    if (q.limit && seq.rows.size() > *q.limit) seq.rows.resize(*q.limit);

    return QueryResult(std::move(seq));
}

}  // namespace

MappingSet evaluate(const GraphPattern& pattern, const Dataset& dataset, const Scope& active,
                    const EvalOptions& opts) {
    EvalContext ctx{dataset, opts};
    MappingSet raw = eval_pattern(pattern, ctx, active);
    MappingSet out(opts.bag_semantics);
    for (const auto& m : raw.rows()) out.insert(strip_internal(m));
    return out;
}

QueryResult evaluate_query(const Query& q, const Dataset& dataset, const EvalOptions& opts) {
    EvalContext ctx{dataset, opts};
    return evaluate_query_scoped(q, ctx, Scope::def());
}

}  // namespace sparqlopt
