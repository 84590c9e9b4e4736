#pragma once

#include <set>
#include <string>
#include <vector>

#include "sparqlopt/query.hpp"

namespace sparqlopt {

/// All variable names occurring in the node, including FILTER conditions and
/// GRAPH names; sub-selects contribute their projected variables.
std::set<std::string> vars_of(const GraphPattern& p);
std::set<std::string> vars_of(const TriplePattern& t);
std::set<std::string> vars_of(const Condition& c);

/// Two fragments are connected iff they share at least one variable.
bool connected(const std::set<std::string>& a, const std::set<std::string>& b);
bool connected(const TriplePattern& a, const TriplePattern& b);

struct WellDesignedReport {
    struct FilterViolation {
        std::string location;           // path into the pattern tree
        std::set<std::string> vars;     // vars(R) \ vars(P)
    };
    struct OptViolation {
        std::string location;
        std::set<std::string> vars;     // vars in P2 and outside P' missing from P1
    };
    bool well_designed = true;
    std::vector<FilterViolation> filter_violations;
    std::vector<OptViolation> opt_violations;
};

/// The two syntactic conditions: safe filters (var(R) ⊆ var(P)) and OPT
/// variable scoping. UNION branches are checked as separate scopes.
WellDesignedReport check_well_designed(const Query& q);
WellDesignedReport check_well_designed(const GraphPattern& p);

/// No Union strictly beneath And/Opt/Filter/Minus (a lone branch is UNF).
bool is_union_normal_form(const GraphPattern& p);

/// Rewrite into a top-level Union of Union-free branches using the sound
/// distribution laws: And over Union (both sides), Opt over Union (left
/// operand), Filter pushed into branches, Minus over Union (left operand).
/// GRAPH/VALUES/SubSelect nodes and OPT right operands are boundaries;
/// anything left un-normalized behind them is listed in `notes`.
GraphPattern to_union_normal_form(const GraphPattern& p,
                                  std::vector<std::string>* notes = nullptr);

enum class ComplexityClass { PTime, NPComplete, CoNPCompleteWdUnf, PSpaceComplete };

struct FragmentLabel {
    std::set<std::string> operators_used;  // subset of AND, FILTER, UNION, OPT
    ComplexityClass label = ComplexityClass::PTime;
};

std::string to_string(ComplexityClass c);

/// Label per the complexity results: AND/FILTER only is PTIME; adding UNION
/// is NP-complete unless the pattern is in UNION normal form (then PTIME);
/// any OPT is PSPACE-complete unless the pattern is in UNF and well-designed
/// (then coNP-complete).
FragmentLabel classify_fragment(const GraphPattern& p, const WellDesignedReport& wd);

}  // namespace sparqlopt
