#include "sparqlopt/analysis.hpp"

#include <algorithm>

namespace sparqlopt {

namespace {

void collect_condition_vars(const Condition& c, std::set<std::string>& out) {
    switch (c.kind) {
        case Condition::Kind::Compare:
            if (c.lhs.is_variable()) out.insert(c.lhs.lexical);
            if (c.rhs.is_variable()) out.insert(c.rhs.lexical);
            break;
        case Condition::Kind::Bound:
        case Condition::Kind::IsBlank:
        case Condition::Kind::IsIri:
            if (c.lhs.is_variable()) out.insert(c.lhs.lexical);
            break;
        default:
            for (const auto& child : c.children) collect_condition_vars(child, out);
            break;
    }
}

void collect_pattern_vars(const GraphPattern& p, std::set<std::string>& out) {
    switch (p.kind) {
        case GraphPattern::Kind::Triple: {
            if (p.triple.subject.is_variable()) out.insert(p.triple.subject.lexical);
            for (const auto& s : p.triple.predicate.steps)
                if (s.is_variable()) out.insert(s.lexical);
            if (p.triple.object.is_variable()) out.insert(p.triple.object.lexical);
            break;
        }
        case GraphPattern::Kind::Filter:
            collect_pattern_vars(p.inner(), out);
            collect_condition_vars(p.condition, out);
            break;
        case GraphPattern::Kind::Graph:
            if (p.graph.is_variable()) out.insert(p.graph.lexical);
            collect_pattern_vars(p.inner(), out);
            break;
        case GraphPattern::Kind::Values:
            for (const auto& v : p.values.vars) out.insert(v.lexical);
            break;
        case GraphPattern::Kind::SubSelect:
            for (const auto& v : visible_vars(p)) out.insert(v.lexical);
            break;
        default:
            for (const auto& c : p.children) collect_pattern_vars(c, out);
            break;
    }
}

}  // namespace

std::set<std::string> vars_of(const GraphPattern& p) {
    std::set<std::string> out;
    collect_pattern_vars(p, out);
    return out;
}

std::set<std::string> vars_of(const TriplePattern& t) {
    std::set<std::string> out;
    if (t.subject.is_variable()) out.insert(t.subject.lexical);
    for (const auto& s : t.predicate.steps)
        if (s.is_variable()) out.insert(s.lexical);
    if (t.object.is_variable()) out.insert(t.object.lexical);
    return out;
}

std::set<std::string> vars_of(const Condition& c) {
    std::set<std::string> out;
    collect_condition_vars(c, out);
    return out;
}

bool connected(const std::set<std::string>& a, const std::set<std::string>& b) {
    const auto& small = a.size() <= b.size() ? a : b;
    const auto& large = a.size() <= b.size() ? b : a;
    return std::any_of(small.begin(), small.end(),
                       [&](const std::string& v) { return large.count(v) != 0; });
}

bool connected(const TriplePattern& a, const TriplePattern& b) {
    return connected(vars_of(a), vars_of(b));
}

// --- well-designedness ------------------------------------------------------

namespace {

std::set<std::string> set_minus(const std::set<std::string>& a, const std::set<std::string>& b) {
    std::set<std::string> out;
    for (const auto& v : a)
        if (!b.count(v)) out.insert(v);
    return out;
}

std::set<std::string> set_and(const std::set<std::string>& a, const std::set<std::string>& b) {
    std::set<std::string> out;
    for (const auto& v : a)
        if (b.count(v)) out.insert(v);
    return out;
}

void check_rec(const GraphPattern& p, const std::set<std::string>& outside,
               const std::string& path, WellDesignedReport& report) {
    switch (p.kind) {
        case GraphPattern::Kind::Filter: {
            std::set<std::string> cond_vars = vars_of(p.condition);
            std::set<std::string> inner_vars = vars_of(p.inner());
            std::set<std::string> unsafe = set_minus(cond_vars, inner_vars);
            if (!unsafe.empty())
                report.filter_violations.push_back({path, std::move(unsafe)});
            std::set<std::string> inner_outside = outside;
            inner_outside.insert(cond_vars.begin(), cond_vars.end());
            check_rec(p.inner(), inner_outside, path + ".filter", report);
            break;
        }
        case GraphPattern::Kind::Opt: {
            std::set<std::string> left_vars = vars_of(p.left());
            std::set<std::string> right_vars = vars_of(p.right());
            std::set<std::string> leaking = set_minus(set_and(right_vars, outside), left_vars);
            if (!leaking.empty())
                report.opt_violations.push_back({path, std::move(leaking)});
            std::set<std::string> left_outside = outside;
            left_outside.insert(right_vars.begin(), right_vars.end());
            std::set<std::string> right_outside = outside;
            right_outside.insert(left_vars.begin(), left_vars.end());
            check_rec(p.left(), left_outside, path + ".left", report);
            check_rec(p.right(), right_outside, path + ".right", report);
            break;
        }
        case GraphPattern::Kind::Union:
            // Branches are alternative scopes: the sibling does not count as
            // an outside occurrence.
            check_rec(p.left(), outside, path + ".union[0]", report);
            check_rec(p.right(), outside, path + ".union[1]", report);
            break;
        case GraphPattern::Kind::And:
        case GraphPattern::Kind::Minus: {
            std::set<std::string> left_vars = vars_of(p.left());
            std::set<std::string> right_vars = vars_of(p.right());
            std::set<std::string> left_outside = outside;
            left_outside.insert(right_vars.begin(), right_vars.end());
            std::set<std::string> right_outside = outside;
            right_outside.insert(left_vars.begin(), left_vars.end());
            check_rec(p.left(), left_outside, path + ".left", report);
            check_rec(p.right(), right_outside, path + ".right", report);
            break;
        }
        case GraphPattern::Kind::Graph:
            check_rec(p.inner(), outside, path + ".graph", report);
            break;
        default:
            break;
    }
}

}  // namespace

WellDesignedReport check_well_designed(const GraphPattern& p) {
    WellDesignedReport report;
    check_rec(p, {}, "where", report);
    report.well_designed = report.filter_violations.empty() && report.opt_violations.empty();
    return report;
}

WellDesignedReport check_well_designed(const Query& q) {
    return check_well_designed(q.pattern);
}

// --- UNION normal form -------------------------------------------------------

namespace {

bool unf_rec(const GraphPattern& p, bool under_operator) {
    switch (p.kind) {
        case GraphPattern::Kind::Union:
            if (under_operator) return false;
            return unf_rec(p.left(), false) && unf_rec(p.right(), false);
        case GraphPattern::Kind::Triple:
        case GraphPattern::Kind::Values:
            return true;
        case GraphPattern::Kind::SubSelect:
            return true;  // opaque leaf
        default: {
            for (const auto& c : p.children)
                if (!unf_rec(c, true)) return false;
            return true;
        }
    }
}

std::vector<GraphPattern> unf_branches(const GraphPattern& p, std::vector<std::string>* notes);

bool contains_union(const GraphPattern& p) {
    if (p.kind == GraphPattern::Kind::Union) return true;
    for (const auto& c : p.children)
        if (contains_union(c)) return true;
    if (p.kind == GraphPattern::Kind::SubSelect) return contains_union(p.subquery->pattern);
    return false;
}

GraphPattern rebuild_union(std::vector<GraphPattern> branches) {
    GraphPattern acc = std::move(branches.front());
    for (size_t i = 1; i < branches.size(); ++i)
        acc = GraphPattern::alternative(std::move(acc), std::move(branches[i]));
    return acc;
}

std::vector<GraphPattern> unf_branches(const GraphPattern& p, std::vector<std::string>* notes) {
    switch (p.kind) {
        case GraphPattern::Kind::Union: {
            auto left = unf_branches(p.left(), notes);
            auto right = unf_branches(p.right(), notes);
            left.insert(left.end(), std::make_move_iterator(right.begin()),
                        std::make_move_iterator(right.end()));
            return left;
        }
        case GraphPattern::Kind::And: {
            auto left = unf_branches(p.left(), notes);
            auto right = unf_branches(p.right(), notes);
            std::vector<GraphPattern> out;
            for (const auto& l : left)
                for (const auto& r : right) out.push_back(GraphPattern::conj(l, r));
            return out;
        }
        case GraphPattern::Kind::Filter: {
            auto inner = unf_branches(p.inner(), notes);
            std::vector<GraphPattern> out;
            for (auto& b : inner)
                out.push_back(GraphPattern::filter(std::move(b), p.condition));
            return out;
        }
        case GraphPattern::Kind::Opt: {
            // Distribution is sound over the left operand only; the right
            // operand is normalized in place and kept as one unit.
            auto left = unf_branches(p.left(), notes);
            GraphPattern right = to_union_normal_form(p.right(), notes);
            if (right.kind == GraphPattern::Kind::Union && notes)
                notes->push_back("UNION kept inside an OPT right operand (no sound distribution)");
            std::vector<GraphPattern> out;
            for (auto& b : left)
                out.push_back(GraphPattern::optional(std::move(b), right));
            return out;
        }
        case GraphPattern::Kind::Minus: {
            auto left = unf_branches(p.left(), notes);
            GraphPattern right = to_union_normal_form(p.right(), notes);
            if (right.kind == GraphPattern::Kind::Union && notes)
                notes->push_back("UNION kept inside a MINUS right operand");
            std::vector<GraphPattern> out;
            for (auto& b : left)
                out.push_back(GraphPattern::minus(std::move(b), right));
            return out;
        }
        case GraphPattern::Kind::Graph:
        case GraphPattern::Kind::SubSelect:
            if (notes && contains_union(p))
                notes->push_back("opaque leaf kept as-is with UNION inside: " +
                                 std::string(p.kind == GraphPattern::Kind::Graph ? "GRAPH"
                                                                                 : "sub-select"));
            return {p};
        case GraphPattern::Kind::Values:
        case GraphPattern::Kind::Triple:
            return {p};
    }
    return {p};
}

}  // namespace

bool is_union_normal_form(const GraphPattern& p) { return unf_rec(p, false); }

GraphPattern to_union_normal_form(const GraphPattern& p, std::vector<std::string>* notes) {
    return rebuild_union(unf_branches(p, notes));
}

// --- complexity classification ------------------------------------------------

namespace {

void operators_used_rec(const GraphPattern& p, std::set<std::string>& out) {
    switch (p.kind) {
        case GraphPattern::Kind::And: out.insert("AND"); break;
        case GraphPattern::Kind::Opt: out.insert("OPT"); break;
        case GraphPattern::Kind::Union: out.insert("UNION"); break;
        case GraphPattern::Kind::Filter: out.insert("FILTER"); break;
        default: break;
    }
    for (const auto& c : p.children) operators_used_rec(c, out);
}

}  // namespace

std::string to_string(ComplexityClass c) {
    switch (c) {
        case ComplexityClass::PTime: return "PTIME";
        case ComplexityClass::NPComplete: return "NP-complete";
        case ComplexityClass::CoNPCompleteWdUnf: return "coNP-complete-wd-UNF";
        case ComplexityClass::PSpaceComplete: return "PSPACE-complete";
    }
    return "";
}

FragmentLabel classify_fragment(const GraphPattern& p, const WellDesignedReport& wd) {
    FragmentLabel out;
    operators_used_rec(p, out.operators_used);
    bool has_opt = out.operators_used.count("OPT") != 0;
    bool has_union = out.operators_used.count("UNION") != 0;
    if (has_opt) {
        if (is_union_normal_form(p) && wd.well_designed)
            out.label = ComplexityClass::CoNPCompleteWdUnf;
        else
            out.label = ComplexityClass::PSpaceComplete;
    } else if (has_union) {
        out.label = is_union_normal_form(p) ? ComplexityClass::PTime
                                            : ComplexityClass::NPComplete;
    } else {
        out.label = ComplexityClass::PTime;
    }
    return out;
}

}  // namespace sparqlopt
