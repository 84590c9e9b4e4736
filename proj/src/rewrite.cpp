#include "sparqlopt/rewrite.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sparqlopt/algebra.hpp"
#include "sparqlopt/analysis.hpp"
#include "sparqlopt/parser.hpp"
#include "sparqlopt/serializer.hpp"

namespace sparqlopt {

// --- ViewSpec ---------------------------------------------------------------

ViewSpec ViewSpec::from_json(const std::string& json_text) {
    nlohmann::json doc = nlohmann::json::parse(json_text);
    ViewSpec spec;
    spec.resource_type = doc.value("resource_type", "");
    spec.resource_var = doc.value("resource_var", "resource");
    nlohmann::json prefixes = doc.value("prefixes", nlohmann::json::object());
    for (const auto& [name, iri] : prefixes.items())
        spec.prefixes[name] = iri.get<std::string>();
    std::string prologue;
    for (const auto& [name, iri] : spec.prefixes)
        prologue += "PREFIX " + name + ": <" + iri + ">\n";
    for (const auto& e : doc.at("elements")) {
        ViewElement elem;
        elem.name = e.at("name").get<std::string>();
        std::string body;
        for (const auto& line : e.at("patterns")) body += line.get<std::string>() + " . ";
        Query wrapper = parse_query(prologue + "SELECT * WHERE { " + body + "}");
        for (const auto* t : all_triples(wrapper.pattern)) elem.chain.push_back(*t);
        spec.elements.push_back(std::move(elem));
    }
    for (const auto& name : doc.at("core")) spec.core.insert(name.get<std::string>());
    spec.validate();
    return spec;
}

ViewSpec ViewSpec::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw RewriteError("cannot open view spec " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

void ViewSpec::validate() const {
    if (core.empty()) throw RewriteError("view spec: core must be non-empty");
    std::set<std::string> names;
    for (const auto& e : elements) {
        if (!names.insert(e.name).second)
            throw RewriteError("view spec: duplicate element name '" + e.name + "'");
        if (e.chain.empty())
            throw RewriteError("view spec: element '" + e.name + "' has no patterns");
        // The chain must originate at the resource node and stay connected.
        std::set<std::string> reachable{resource_var};
        for (const auto& t : e.chain) {
            if (!connected(vars_of(t), reachable))
                throw RewriteError("view spec: element '" + e.name +
                                   "' does not chain from ?" + resource_var);
            auto vars = vars_of(t);
            reachable.insert(vars.begin(), vars.end());
        }
        if (!e.chain.front().subject.is_variable() ||
            e.chain.front().subject.lexical != resource_var)
            throw RewriteError("view spec: element '" + e.name + "' must start at ?" +
                               resource_var);
    }
    for (const auto& name : core)
        if (!names.count(name))
            throw RewriteError("view spec: core names unknown element '" + name + "'");
}

GraphPattern ViewSpec::full_pattern() const {
    std::vector<GraphPattern> elems;
    for (const auto& e : elements)
        for (const auto& t : e.chain) elems.push_back(GraphPattern::triple_pattern(t));
    return GraphPattern::conj_all(std::move(elems));
}

GraphPattern ViewSpec::core_pattern() const {
    std::vector<GraphPattern> elems;
    for (const auto& e : elements) {
        if (!core.count(e.name)) continue;
        for (const auto& t : e.chain) elems.push_back(GraphPattern::triple_pattern(t));
    }
    return GraphPattern::conj_all(std::move(elems));
}

Query ViewSpec::initial_query() const {
    Query q;
    q.form = QueryForm::Select;
    q.select_all = true;
    q.pattern = full_pattern();
    q.prefixes = prefixes;
    return q;
}

Query ViewSpec::naive_optional_query() const {
    Query q;
    q.form = QueryForm::Select;
    q.select_all = true;
    GraphPattern acc = core_pattern();
    for (const auto& e : elements) {
        if (core.count(e.name)) continue;
        std::vector<GraphPattern> chain;
        for (const auto& t : e.chain) chain.push_back(GraphPattern::triple_pattern(t));
        acc = GraphPattern::optional(std::move(acc), GraphPattern::conj_all(std::move(chain)));
    }
    q.pattern = std::move(acc);
    q.prefixes = prefixes;
    return q;
}

// --- AskProbe ---------------------------------------------------------------

AskProbe AskProbe::local(const Dataset& dataset) {
    return AskProbe([&dataset](const Query& q) {
        return std::get<bool>(evaluate_query(q, dataset));
    });
}

bool AskProbe::ask(const Query& ask_query) {
    ++issued_;
    std::string key = serialize_query(ask_query);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    ++executed_;
    bool answer = executor_(ask_query);
    cache_.emplace(std::move(key), answer);
    return answer;
}

// --- Algorithm 1: minimize_optionals -----------------------------------------

namespace {

Query make_ask(GraphPattern pattern) {
    Query q;
    q.form = QueryForm::Ask;
    q.pattern = std::move(pattern);
    return q;
}

Query probe_query(const GraphPattern& group, const TriplePattern& candidate) {
    return make_ask(GraphPattern::minus(group, GraphPattern::triple_pattern(candidate)));
}

}  // namespace

Query minimize_optionals(const GraphPattern& conjunction, const GraphPattern& core,
                         AskProbe& probe, MinimizeReport* report) {
    for (const auto* elem : and_chain(conjunction))
        if (elem->kind != GraphPattern::Kind::Triple)
            throw RewriteError("minimize_optionals: input must be a conjunction of triple patterns");

    std::vector<TriplePattern> all;
    for (const auto* t : all_triples(conjunction)) all.push_back(*t);
    std::vector<TriplePattern> required;
    for (const auto* t : all_triples(core)) required.push_back(*t);

    // queue = conjunction \ core, in document order
    std::vector<TriplePattern> queue;
    {
        std::vector<TriplePattern> core_left = required;
        for (const auto& t : all) {
            auto it = std::find(core_left.begin(), core_left.end(), t);
            if (it != core_left.end())
                core_left.erase(it);
            else
                queue.push_back(t);
        }
        if (!core_left.empty())
            throw RewriteError("minimize_optionals: core is not a sub-pattern of the input");
    }

    auto vars_of_group = [](const std::vector<TriplePattern>& ts) {
        std::set<std::string> out;
        for (const auto& t : ts) {
            auto v = vars_of(t);
            out.insert(v.begin(), v.end());
        }
        return out;
    };

    std::vector<GraphPattern> optional_groups;
    auto required_pattern = [&]() {
        std::vector<GraphPattern> elems;
        for (const auto& t : required) elems.push_back(GraphPattern::triple_pattern(t));
        return GraphPattern::conj_all(std::move(elems));
    };

    while (!queue.empty()) {
        bool moved = false;
        std::vector<TriplePattern> pass = queue;
        for (const auto& t : pass) {
            auto in_queue = std::find(queue.begin(), queue.end(), t);
            if (in_queue == queue.end()) continue;
            std::set<std::string> t_vars = vars_of(t);
            if (connected(t_vars, vars_of_group(required))) {
                queue.erase(in_queue);
                moved = true;
                if (probe.ask(probe_query(required_pattern(), t)))
                    optional_groups.push_back(GraphPattern::triple_pattern(t));
                else
                    required.push_back(t);
                continue;
            }
            for (auto& group : optional_groups) {
                if (!connected(t_vars, vars_of(group))) continue;
                queue.erase(std::find(queue.begin(), queue.end(), t));
                moved = true;
                if (probe.ask(probe_query(group, t)))
                    group = GraphPattern::optional(std::move(group),
                                                   GraphPattern::triple_pattern(t));
                else
                    group = GraphPattern::conj(std::move(group),
                                               GraphPattern::triple_pattern(t));
                break;
            }
        }
        if (!moved) {
            std::string listing;
            for (const auto& t : queue) {
                if (!listing.empty()) listing += "; ";
                listing += serialize_pattern(GraphPattern::triple_pattern(t));
            }
            throw RewriteError("minimize_optionals: no progress, unconnected patterns remain: " +
                               listing);
        }
    }

    GraphPattern out = required_pattern();
    for (auto& group : optional_groups)
        out = GraphPattern::optional(std::move(out), std::move(group));

    if (report) {
        report->probes_issued = probe.issued();
        report->probes_executed = probe.executed();
        report->required_patterns = required.size();
        report->optional_groups = optional_groups.size();
    }

    Query q;
    q.form = QueryForm::Select;
    q.select_all = true;
    q.pattern = std::move(out);
    return q;
}

// --- localize_graphs ----------------------------------------------------------

namespace {

/// Graph for a triple pattern: all path steps constant and mapped to the same
/// graph. Empty when not localizable.
std::string triple_graph(const TriplePattern& t, const ProvenanceMap& prov) {
    if (!t.predicate.all_iri()) return "";
    std::string graph;
    for (const auto& step : t.predicate.steps) {
        std::string g = prov.graph_of(step.lexical);
        if (g.empty()) return "";
        if (graph.empty()) graph = g;
        if (g != graph) return "";
    }
    return graph;
}

GraphPattern localize_pattern(const GraphPattern& p, const ProvenanceMap& prov,
                              LocalizeReport* report);

GraphPattern localize_chain(const std::vector<const GraphPattern*>& elems,
                            const ProvenanceMap& prov, LocalizeReport* report) {
    // Tag each element with a target graph, then merge adjacent runs.
    std::vector<std::pair<GraphPattern, std::string>> tagged;
    for (const auto* elem : elems) {
        if (elem->kind == GraphPattern::Kind::Triple) {
            std::string g = triple_graph(elem->triple, prov);
            if (g.empty() && report)
                report->unlocalized.push_back(serialize_pattern(*elem));
            tagged.emplace_back(*elem, g);
        } else {
            tagged.emplace_back(localize_pattern(*elem, prov, report), "");
        }
    }
    std::vector<GraphPattern> rebuilt;
    size_t i = 0;
    while (i < tagged.size()) {
        if (tagged[i].second.empty()) {
            rebuilt.push_back(std::move(tagged[i].first));
            ++i;
            continue;
        }
        std::string graph = tagged[i].second;
        std::vector<GraphPattern> run;
        while (i < tagged.size() && tagged[i].second == graph) {
            run.push_back(std::move(tagged[i].first));
            ++i;
        }
        rebuilt.push_back(GraphPattern::named_graph(RDFTerm::iri(graph),
                                                    GraphPattern::conj_all(std::move(run))));
        if (report) ++report->blocks_added;
    }
    return GraphPattern::conj_all(std::move(rebuilt));
}

GraphPattern localize_pattern(const GraphPattern& p, const ProvenanceMap& prov,
                              LocalizeReport* report) {
    switch (p.kind) {
        case GraphPattern::Kind::Triple:
        case GraphPattern::Kind::And:
            return localize_chain(and_chain(p), prov, report);
        case GraphPattern::Kind::Opt:
            return GraphPattern::optional(localize_pattern(p.left(), prov, report),
                                          localize_pattern(p.right(), prov, report));
        case GraphPattern::Kind::Minus:
            return GraphPattern::minus(localize_pattern(p.left(), prov, report),
                                       localize_pattern(p.right(), prov, report));
        case GraphPattern::Kind::Union:
            return GraphPattern::alternative(localize_pattern(p.left(), prov, report),
                                             localize_pattern(p.right(), prov, report));
        case GraphPattern::Kind::Filter:
            return GraphPattern::filter(localize_pattern(p.inner(), prov, report), p.condition);
        default:
            return p;  // GRAPH already scoped; VALUES / sub-selects untouched
    }
}

}  // namespace

Query localize_graphs(const Query& q, const ProvenanceMap& prov, LocalizeReport* report) {
    Query out = q;
    out.pattern = localize_pattern(q.pattern, prov, report);
    return out;
}

// --- merge_sequence_paths -------------------------------------------------------

namespace {

/// How often a variable occurs across the whole query: slot-level count over
/// triple patterns plus a flag for any non-triple occurrence.
struct VarOccurrence {
    size_t triple_slots = 0;
    bool elsewhere = false;  // filter, values, graph name, construct, modifiers
};

void census_triple(const TriplePattern& t, std::map<std::string, VarOccurrence>& out) {
    if (t.subject.is_variable()) ++out[t.subject.lexical].triple_slots;
    for (const auto& s : t.predicate.steps)
        if (s.is_variable()) ++out[s.lexical].triple_slots;
    if (t.object.is_variable()) ++out[t.object.lexical].triple_slots;
}

void census_pattern(const GraphPattern& p, std::map<std::string, VarOccurrence>& out) {
    switch (p.kind) {
        case GraphPattern::Kind::Triple:
            census_triple(p.triple, out);
            break;
        case GraphPattern::Kind::Filter:
            census_pattern(p.inner(), out);
            for (const auto& v : vars_of(p.condition)) out[v].elsewhere = true;
            break;
        case GraphPattern::Kind::Graph:
            if (p.graph.is_variable()) out[p.graph.lexical].elsewhere = true;
            census_pattern(p.inner(), out);
            break;
        case GraphPattern::Kind::Values:
            for (const auto& v : p.values.vars) out[v.lexical].elsewhere = true;
            break;
        case GraphPattern::Kind::SubSelect:
            for (const auto& v : visible_vars(p)) out[v.lexical].elsewhere = true;
            break;
        default:
            for (const auto& c : p.children) census_pattern(c, out);
            break;
    }
}

std::map<std::string, VarOccurrence> census_query(const Query& q) {
    std::map<std::string, VarOccurrence> out;
    census_pattern(q.pattern, out);
    for (const auto& t : q.construct_template)
        for (const auto& v : vars_of(t)) out[v].elsewhere = true;
    for (const auto& item : q.projection) {
        if (item.aggregate != AggregateFn::None && item.argument.is_variable())
            out[item.argument.lexical].elsewhere = true;
    }
    for (const auto& v : q.group_by) out[v.lexical].elsewhere = true;
    for (const auto& key : q.order_by) out[key.var.lexical].elsewhere = true;
    return out;
}

bool var_projected(const Query& q, const std::string& var) {
    if (q.select_all) return true;
    for (const auto& item : q.projection)
        if (item.aggregate == AggregateFn::None && item.var.lexical == var) return true;
    return false;
}

/// The variable occupies exactly one slot of the triple, the given one.
bool sole_slot(const TriplePattern& t, const std::string& var, bool as_object) {
    size_t slots = 0;
    if (t.subject.is_variable() && t.subject.lexical == var) ++slots;
    for (const auto& s : t.predicate.steps)
        if (s.is_variable() && s.lexical == var) ++slots;
    if (t.object.is_variable() && t.object.lexical == var) ++slots;
    if (slots != 1) return false;
    return as_object ? t.object.is_variable() && t.object.lexical == var
                     : t.subject.is_variable() && t.subject.lexical == var;
}

struct MergeContext {
    const Query& query;
    std::map<std::string, VarOccurrence> occurrences;
    MergeReport* report;
    size_t merges = 0;

    void blocked(const TriplePattern& a, const TriplePattern& b, const std::string& why) {
        if (!report) return;
        std::string msg = serialize_term(a.object) + ": " + why;
        (void)b;
        for (const auto& existing : report->blocked)
            if (existing == msg) return;
        report->blocked.push_back(std::move(msg));
    }
};

GraphPattern merge_in_pattern(const GraphPattern& p, MergeContext& ctx);

GraphPattern merge_in_chain(const std::vector<const GraphPattern*>& elems, MergeContext& ctx) {
    std::vector<GraphPattern> items;
    for (const auto* e : elems) items.push_back(merge_in_pattern(*e, ctx));

    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t i = 0; i < items.size() && !changed; ++i) {
            if (items[i].kind != GraphPattern::Kind::Triple) continue;
            const TriplePattern ti = items[i].triple;
            if (!ti.object.is_variable()) continue;
            for (size_t j = 0; j < items.size() && !changed; ++j) {
                if (i == j || items[j].kind != GraphPattern::Kind::Triple) continue;
                const TriplePattern tj = items[j].triple;
                if (!(tj.subject == ti.object)) continue;
                const std::string& v = ti.object.lexical;
                if (!ti.predicate.all_iri() || !tj.predicate.all_iri()) {
                    ctx.blocked(ti, tj, "variable predicate");
                    continue;
                }
                const auto& occ = ctx.occurrences.at(v);
                // (a) the variable links exactly these two patterns
                if (occ.elsewhere || occ.triple_slots != 2 || !sole_slot(ti, v, true) ||
                    !sole_slot(tj, v, false)) {
                    ctx.blocked(ti, tj, "intermediate variable used elsewhere");
                    continue;
                }
                // (b) not projected
                if (var_projected(ctx.query, v)) {
                    ctx.blocked(ti, tj, ctx.query.select_all ? "projected (SELECT *)"
                                                             : "projected");
                    continue;
                }
                TriplePattern merged;
                merged.subject = ti.subject;
                merged.predicate.steps = ti.predicate.steps;
                merged.predicate.steps.insert(merged.predicate.steps.end(),
                                              tj.predicate.steps.begin(),
                                              tj.predicate.steps.end());
                merged.object = tj.object;
                // Both slots of v are gone; every other variable keeps its
                // slots inside the merged pattern.
                ctx.occurrences.erase(v);
                items[i] = GraphPattern::triple_pattern(std::move(merged));
                items.erase(items.begin() + static_cast<long>(j));
                ++ctx.merges;
                changed = true;
            }
        }
    }
    return GraphPattern::conj_all(std::move(items));
}

GraphPattern merge_in_pattern(const GraphPattern& p, MergeContext& ctx) {
    switch (p.kind) {
        case GraphPattern::Kind::And:
            return merge_in_chain(and_chain(p), ctx);
        case GraphPattern::Kind::Opt:
            return GraphPattern::optional(merge_in_pattern(p.left(), ctx),
                                          merge_in_pattern(p.right(), ctx));
        case GraphPattern::Kind::Minus:
            return GraphPattern::minus(merge_in_pattern(p.left(), ctx),
                                       merge_in_pattern(p.right(), ctx));
        case GraphPattern::Kind::Union:
            return GraphPattern::alternative(merge_in_pattern(p.left(), ctx),
                                             merge_in_pattern(p.right(), ctx));
        case GraphPattern::Kind::Filter:
            return GraphPattern::filter(merge_in_pattern(p.inner(), ctx), p.condition);
        case GraphPattern::Kind::Graph:
            return GraphPattern::named_graph(p.graph, merge_in_pattern(p.inner(), ctx));
        default:
            return p;
    }
}

}  // namespace

Query merge_sequence_paths(const Query& q, MergeReport* report) {
    MergeContext ctx{q, census_query(q), report};
    Query out = q;
    out.pattern = merge_in_pattern(q.pattern, ctx);
    if (report) report->merged_chains = ctx.merges;
    return out;
}

// --- reduce_cartesian -----------------------------------------------------------

Query reduce_cartesian(const Query& q, const std::set<std::string>& aggregated,
                       const std::string& separator) {
    if (aggregated.empty()) return q;
    if (q.has_aggregates())
        throw RewriteError("reduce_cartesian: query already aggregates");
    Query base = q;
    if (base.select_all) {
        base.select_all = false;
        base.projection.clear();
        for (const auto& v : visible_vars(base.pattern))
            base.projection.push_back(ProjectionItem::plain(v));
    }
    for (const auto& v : aggregated) {
        bool projected = false;
        for (const auto& item : base.projection)
            if (item.var.lexical == v) projected = true;
        if (!projected)
            throw RewriteError("reduce_cartesian: ?" + v + " is not projected");
        for (const auto& key : base.order_by)
            if (key.var.lexical == v)
                throw RewriteError("reduce_cartesian: ?" + v +
                                   " appears in ORDER BY; refusing to reorder");
    }

    Query agg = base;
    agg.projection.clear();
    agg.group_by.clear();
    agg.order_by.clear();
    agg.limit.reset();
    agg.offset.reset();
    agg.distinct = false;
    for (const auto& item : base.projection) {
        if (aggregated.count(item.var.lexical)) {
            ProjectionItem g = ProjectionItem::agg(AggregateFn::GroupConcat, item.var, item.var);
            g.separator = separator;
            agg.projection.push_back(std::move(g));
        } else {
            agg.projection.push_back(item);
            agg.group_by.push_back(item.var);
        }
    }

    if (base.order_by.empty()) {
        agg.distinct = base.distinct;
        agg.order_by = base.order_by;
        agg.limit = base.limit;
        agg.offset = base.offset;
        return agg;
    }

    // Sorting an aggregate sequence: sub-select computes the groups, the
    // outermost query orders the whole sequence.
    Query outer;
    outer.form = QueryForm::Select;
    outer.distinct = base.distinct;
    outer.prefixes = base.prefixes;
    for (const auto& item : base.projection)
        outer.projection.push_back(ProjectionItem::plain(item.var));
    agg.prefixes.clear();
    outer.pattern = GraphPattern::subselect(std::move(agg));
    outer.order_by = base.order_by;
    outer.limit = base.limit;
    outer.offset = base.offset;
    return outer;
}

// --- rewrite_alternatives ----------------------------------------------------------

namespace {

struct AltShape {
    GraphPattern skeleton;            // contains the hole variable
    std::string hole_var;             // "" when derived from a UNION with constants inline
    std::vector<RDFTerm> constants;   // the alternative URIs, in document order
};

void replace_term(GraphPattern& p, const RDFTerm& from, const RDFTerm& to) {
    if (p.kind == GraphPattern::Kind::Triple) {
        if (p.triple.subject == from) p.triple.subject = to;
        for (auto& s : p.triple.predicate.steps)
            if (s == from) s = to;
        if (p.triple.object == from) p.triple.object = to;
    }
    for (auto& c : p.children) replace_term(c, from, to);
}

/// Lockstep structural walk collecting term mismatches between two branches.
bool collect_mismatches(const GraphPattern& a, const GraphPattern& b,
                        std::vector<std::pair<RDFTerm, RDFTerm>>& out) {
    if (a.kind != b.kind) return false;
    if (a.kind == GraphPattern::Kind::Triple) {
        if (a.triple.predicate != b.triple.predicate) return false;
        if (!(a.triple.subject == b.triple.subject))
            out.emplace_back(a.triple.subject, b.triple.subject);
        if (!(a.triple.object == b.triple.object))
            out.emplace_back(a.triple.object, b.triple.object);
        return true;
    }
    if (a.kind == GraphPattern::Kind::Filter && !(a.condition == b.condition)) return false;
    if (a.kind == GraphPattern::Kind::Graph && !(a.graph == b.graph)) return false;
    if (a.kind == GraphPattern::Kind::Values && !(a.values == b.values)) return false;
    if (a.children.size() != b.children.size()) return false;
    for (size_t i = 0; i < a.children.size(); ++i)
        if (!collect_mismatches(a.children[i], b.children[i], out)) return false;
    return true;
}

std::optional<AltShape> detect_union(const Query& q) {
    if (q.pattern.kind != GraphPattern::Kind::Union) return std::nullopt;
    std::vector<const GraphPattern*> branches;
    const GraphPattern* node = &q.pattern;
    while (node->kind == GraphPattern::Kind::Union) {
        branches.push_back(&node->right());
        node = &node->left();
    }
    branches.push_back(node);
    std::reverse(branches.begin(), branches.end());

    const GraphPattern& ref = *branches[0];
    RDFTerm ref_const;  // the alternating constant within the reference branch
    std::vector<RDFTerm> constants;
    for (size_t k = 1; k < branches.size(); ++k) {
        std::vector<std::pair<RDFTerm, RDFTerm>> mismatches;
        if (!collect_mismatches(ref, *branches[k], mismatches) || mismatches.empty())
            return std::nullopt;
        const RDFTerm& a = mismatches[0].first;
        const RDFTerm& b = mismatches[0].second;
        if (!a.is_iri() || !b.is_iri()) return std::nullopt;
        for (const auto& [x, y] : mismatches)
            if (!(x == a) || !(y == b)) return std::nullopt;  // one constant per branch
        if (k == 1) {
            ref_const = a;
            constants.push_back(a);
        } else if (!(a == ref_const)) {
            return std::nullopt;
        }
        constants.push_back(b);
    }
    AltShape shape;
    shape.skeleton = ref;
    shape.constants = std::move(constants);
    // Carve the hole: the reference constant becomes a variable later.
    shape.hole_var = "";
    replace_term(shape.skeleton, ref_const, RDFTerm::variable("__hole"));
    return shape;
}

bool equality_disjunction(const Condition& c, std::string& var, std::vector<RDFTerm>& constants) {
    if (c.kind == Condition::Kind::Or)
        return equality_disjunction(c.children[0], var, constants) &&
               equality_disjunction(c.children[1], var, constants);
    if (c.kind != Condition::Kind::Compare || c.cmp != Condition::Cmp::Eq) return false;
    const RDFTerm* v = nullptr;
    const RDFTerm* constant = nullptr;
    if (c.lhs.is_variable() && c.rhs.is_iri()) {
        v = &c.lhs;
        constant = &c.rhs;
    } else if (c.rhs.is_variable() && c.lhs.is_iri()) {
        v = &c.rhs;
        constant = &c.lhs;
    } else {
        return false;
    }
    if (var.empty()) var = v->lexical;
    if (var != v->lexical) return false;
    constants.push_back(*constant);
    return true;
}

std::optional<AltShape> detect_filter(const Query& q) {
    if (q.pattern.kind != GraphPattern::Kind::Filter) return std::nullopt;
    AltShape shape;
    std::string var;
    if (!equality_disjunction(q.pattern.condition, var, shape.constants)) return std::nullopt;
    if (!vars_of(q.pattern.inner()).count(var)) return std::nullopt;
    shape.skeleton = q.pattern.inner();
    shape.hole_var = var;
    replace_term(shape.skeleton, RDFTerm::variable(var), RDFTerm::variable("__hole"));
    return shape;
}

std::optional<AltShape> detect_values(const Query& q) {
    auto elems = and_chain(q.pattern);
    int values_at = -1;
    for (size_t i = 0; i < elems.size(); ++i) {
        if (elems[i]->kind != GraphPattern::Kind::Values) continue;
        if (values_at >= 0) return std::nullopt;  // more than one block
        values_at = static_cast<int>(i);
    }
    if (values_at < 0) return std::nullopt;
    const ValuesBlock& block = elems[static_cast<size_t>(values_at)]->values;
    if (block.vars.size() != 1) return std::nullopt;
    AltShape shape;
    shape.hole_var = block.vars[0].lexical;
    for (const auto& row : block.rows) {
        if (!row[0] || !row[0]->is_iri()) return std::nullopt;
        shape.constants.push_back(*row[0]);
    }
    std::vector<GraphPattern> rest;
    for (size_t i = 0; i < elems.size(); ++i)
        if (static_cast<int>(i) != values_at) rest.push_back(*elems[i]);
    if (rest.empty()) return std::nullopt;
    shape.skeleton = GraphPattern::conj_all(std::move(rest));
    if (!vars_of(shape.skeleton).count(shape.hole_var)) return std::nullopt;
    replace_term(shape.skeleton, RDFTerm::variable(shape.hole_var),
                 RDFTerm::variable("__hole"));
    return shape;
}

std::string pick_subject_var(const Query& q, const AltShape& shape) {
    if (!shape.hole_var.empty() && shape.hole_var != "__hole") return shape.hole_var;
    std::set<std::string> taken = vars_of(shape.skeleton);
    for (const auto& item : q.projection) taken.insert(item.var.lexical);
    if (!taken.count("s")) return "s";
    for (int i = 0;; ++i) {
        std::string name = "s" + std::to_string(i);
        if (!taken.count(name)) return name;
    }
}

}  // namespace

Query rewrite_alternatives(const Query& q, AlternativesTarget target,
                           AlternativesReport* report) {
    std::optional<AltShape> shape = detect_union(q);
    if (!shape) shape = detect_filter(q);
    if (!shape) shape = detect_values(q);
    if (!shape)
        throw RewriteError(
            "rewrite_alternatives: query does not match the alternative-URI shape "
            "(UNION of near-identical branches, FILTER equality disjunction, or a "
            "single-variable VALUES block)");

    Query out = q;
    if (target == AlternativesTarget::Union) {
        std::vector<GraphPattern> branches;
        for (const auto& c : shape->constants) {
            GraphPattern branch = shape->skeleton;
            replace_term(branch, RDFTerm::variable("__hole"), c);
            branches.push_back(std::move(branch));
        }
        GraphPattern acc = std::move(branches.front());
        for (size_t i = 1; i < branches.size(); ++i)
            acc = GraphPattern::alternative(std::move(acc), std::move(branches[i]));
        out.pattern = std::move(acc);
        if (!shape->hole_var.empty()) {
            // The provenance variable disappears; drop it from the projection.
            bool was_projected = false;
            std::vector<ProjectionItem> kept;
            for (const auto& item : out.projection) {
                if (item.aggregate == AggregateFn::None &&
                    item.var.lexical == shape->hole_var) {
                    was_projected = true;
                    continue;
                }
                kept.push_back(item);
            }
            out.projection = std::move(kept);
            if (report) {
                report->warnings.push_back(
                    "UNION form discards the provenance of results (variable ?" +
                    shape->hole_var + (was_projected ? " removed from projection)" : " lost)"));
            }
        }
        if (report) {
            report->subject_var = "";
            report->constants = shape->constants.size();
        }
        return out;
    }

    std::string var = pick_subject_var(q, *shape);
    GraphPattern skeleton = shape->skeleton;
    replace_term(skeleton, RDFTerm::variable("__hole"), RDFTerm::variable(var));
    if (target == AlternativesTarget::Filter) {
        std::optional<Condition> disjunction;
        for (const auto& c : shape->constants) {
            Condition eq = Condition::compare(Condition::Cmp::Eq, RDFTerm::variable(var), c);
            disjunction = disjunction ? Condition::disj(std::move(*disjunction), std::move(eq))
                                      : std::move(eq);
        }
        out.pattern = GraphPattern::filter(std::move(skeleton), std::move(*disjunction));
    } else {
        ValuesBlock block;
        block.vars.push_back(RDFTerm::variable(var));
        for (const auto& c : shape->constants) block.rows.push_back({c});
        out.pattern = GraphPattern::conj(GraphPattern::inline_values(std::move(block)),
                                         std::move(skeleton));
    }
    if (report) {
        report->subject_var = var;
        report->constants = shape->constants.size();
    }
    return out;
}

// --- generate_pagination -------------------------------------------------------------

PaginationPlan generate_pagination(const Query& q, uint64_t page_size, uint64_t page_index,
                                   const std::vector<OrderKey>& order) {
    if (q.form != QueryForm::Select)
        throw RewriteError("generate_pagination: input must be a SELECT query");
    if (q.select_all || q.projection.empty() ||
        q.projection.front().aggregate != AggregateFn::None)
        throw RewriteError("generate_pagination: missing item variable (first projected "
                           "variable identifies the items)");
    const RDFTerm item = q.projection.front().var;
    std::set<std::string> pattern_vars = vars_of(q.pattern);
    for (const auto& key : order)
        if (!pattern_vars.count(key.var.lexical))
            throw RewriteError("generate_pagination: ORDER BY variable ?" + key.var.lexical +
                               " is not bindable by the pattern");

    PaginationPlan plan;
    plan.item_var = item.lexical;

    Query page;
    page.form = QueryForm::Select;
    page.distinct = true;
    page.prefixes = q.prefixes;
    page.projection.push_back(ProjectionItem::plain(item));
    for (const auto& key : order)
        if (!(key.var == item)) page.projection.push_back(ProjectionItem::plain(key.var));
    if (q.has_aggregates()) {
        // Aggregates force the sort to the outermost level via a sub-select.
        Query inner = q;
        inner.order_by.clear();
        inner.limit.reset();
        inner.offset.reset();
        inner.prefixes.clear();
        page.pattern = GraphPattern::subselect(std::move(inner));
    } else {
        page.pattern = q.pattern;
    }
    page.order_by = order;
    page.limit = page_size;
    page.offset = page_index * page_size;
    plan.page_query = std::move(page);

    Query fill;
    fill.form = QueryForm::Construct;
    fill.prefixes = q.prefixes;
    for (const auto* t : all_triples(q.pattern))
        if (t->predicate.is_single()) fill.construct_template.push_back(*t);
    ValuesBlock block;
    block.vars.push_back(item);
    fill.pattern = GraphPattern::conj(GraphPattern::inline_values(std::move(block)), q.pattern);
    plan.fill_query = std::move(fill);
    return plan;
}

Query with_page_items(const Query& fill_query, const std::string& item_var,
                      const std::vector<RDFTerm>& items) {
    Query out = fill_query;
    auto elems = and_chain(out.pattern);
    // Find the VALUES block for the item variable and fill the rows.
    std::vector<GraphPattern> rebuilt;
    bool filled = false;
    for (const auto* e : elems) {
        GraphPattern copy = *e;
        if (!filled && copy.kind == GraphPattern::Kind::Values &&
            copy.values.vars.size() == 1 && copy.values.vars[0].lexical == item_var) {
            copy.values.rows.clear();
            for (const auto& item : items) copy.values.rows.push_back({item});
            filled = true;
        }
        rebuilt.push_back(std::move(copy));
    }
    if (!filled)
        throw RewriteError("with_page_items: fill query has no VALUES block for ?" + item_var);
    out.pattern = GraphPattern::conj_all(std::move(rebuilt));
    return out;
}

std::vector<Triple> page_skeleton(const std::vector<RDFTerm>& items) {
    std::vector<Triple> out;
    for (size_t i = 0; i < items.size(); ++i) {
        RDFTerm node = RDFTerm::blank("page" + std::to_string(i));
        out.push_back(Triple{node, RDFTerm::iri(iris::rdf_first), items[i]});
        RDFTerm rest = i + 1 < items.size() ? RDFTerm::blank("page" + std::to_string(i + 1))
                                            : RDFTerm::iri(iris::rdf_nil);
        out.push_back(Triple{node, RDFTerm::iri(iris::rdf_rest), rest});
    }
    return out;
}

}  // namespace sparqlopt
