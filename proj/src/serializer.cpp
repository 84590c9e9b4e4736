#include "sparqlopt/serializer.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace sparqlopt {

namespace {

bool safe_local_name(const std::string& s) {
    if (s.empty()) return true;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
    return true;
}

class Writer {
public:
    Writer(const std::map<std::string, std::string>& prefixes, const SerializeOptions& opts)
        : prefixes_(prefixes), opts_(opts) {}

    std::string query(const Query& q) {
        for (const auto& [name, iri] : prefixes_)
            out_ << "PREFIX " << name << ": <" << iri << ">\n";
        switch (q.form) {
            case QueryForm::Select: select_header(q); break;
            case QueryForm::Ask: out_ << "ASK"; break;
            case QueryForm::Construct: construct_header(q); break;
        }
        out_ << (q.form == QueryForm::Ask ? " {\n" : "\nWHERE {\n");
        group(q.pattern, 1);
        out_ << "}";
        modifiers(q);
        out_ << "\n";
        return out_.str();
    }

    std::string term(const RDFTerm& t) const {
        switch (t.kind) {
            case TermKind::Variable:
                return "?" + t.lexical;
            case TermKind::Blank:
                return "_:" + t.lexical;
            case TermKind::Iri:
                return iri(t.lexical);
            case TermKind::Literal: {
                std::ostringstream s;
                s << '"';
                for (char c : t.lexical) {
                    switch (c) {
                        case '"': s << "\\\""; break;
                        case '\\': s << "\\\\"; break;
                        case '\n': s << "\\n"; break;
                        case '\r': s << "\\r"; break;
                        case '\t': s << "\\t"; break;
                        default: s << c;
                    }
                }
                s << '"';
                if (!t.language.empty())
                    s << '@' << t.language;
                else if (!t.datatype.empty())
                    s << "^^" << iri(t.datatype);
                return s.str();
            }
        }
        return {};
    }

    std::string condition(const Condition& c) const { return cond(c, nullptr); }

    void group_into(const GraphPattern& p, int indent) { group(p, indent); }

    std::string str() { return out_.str(); }

private:
    const std::map<std::string, std::string>& prefixes_;
    SerializeOptions opts_;
    std::ostringstream out_;

    std::string iri(const std::string& full) const {
        // Longest declared prefix IRI that is a proper prefix of the value.
        const std::string* best_name = nullptr;
        size_t best_len = 0;
        for (const auto& [name, base] : prefixes_) {
            if (base.size() > best_len && full.size() > base.size() &&
                full.compare(0, base.size(), base) == 0 &&
                safe_local_name(full.substr(base.size()))) {
                best_name = &name;
                best_len = base.size();
            }
        }
        if (best_name) return *best_name + ":" + full.substr(best_len);
        return "<" + full + ">";
    }

    void select_header(const Query& q) {
        out_ << "SELECT";
        if (q.distinct) out_ << " DISTINCT";
        if (q.select_all) {
            out_ << " *";
            return;
        }
        for (const auto& item : q.projection) {
            out_ << " ";
            if (item.aggregate == AggregateFn::None) {
                out_ << term(item.var);
                continue;
            }
            out_ << "(" << agg_name(item.aggregate) << "(";
            if (item.distinct) out_ << "DISTINCT ";
            out_ << (item.star ? "*" : term(item.argument));
            if (item.separator) {
                out_ << " ; SEPARATOR=\"";
                for (char c : *item.separator) {
                    if (c == '"' || c == '\\') out_ << '\\';
                    out_ << c;
                }
                out_ << "\"";
            }
            out_ << ") AS " << term(item.var) << ")";
        }
    }

    void construct_header(const Query& q) {
        out_ << "CONSTRUCT {\n";
        for (const auto& t : q.construct_template)
            out_ << "  " << term(t.subject) << " " << path(t.predicate) << " " << term(t.object)
                 << " .\n";
        out_ << "}";
    }

    static const char* agg_name(AggregateFn fn) {
        switch (fn) {
            case AggregateFn::Count: return "COUNT";
            case AggregateFn::Sum: return "SUM";
            case AggregateFn::Min: return "MIN";
            case AggregateFn::Max: return "MAX";
            case AggregateFn::Avg: return "AVG";
            case AggregateFn::Sample: return "SAMPLE";
            case AggregateFn::GroupConcat: return "GROUP_CONCAT";
            default: return "";
        }
    }

    void modifiers(const Query& q) {
        if (!q.group_by.empty()) {
            out_ << "\nGROUP BY";
            for (const auto& v : q.group_by) out_ << " " << term(v);
        }
        if (!q.order_by.empty()) {
            out_ << "\nORDER BY";
            for (const auto& key : q.order_by) {
                if (key.descending)
                    out_ << " DESC(" << term(key.var) << ")";
                else
                    out_ << " " << term(key.var);
            }
        }
        if (q.limit) out_ << "\nLIMIT " << *q.limit;
        if (q.offset) out_ << "\nOFFSET " << *q.offset;
    }

    std::string path(const PathExpr& p) const {
        std::string s;
        for (size_t i = 0; i < p.steps.size(); ++i) {
            if (i) s += "/";
            s += term(p.steps[i]);
        }
        return s;
    }

    void pad(int indent) {
        for (int i = 0; i < indent; ++i) out_ << "  ";
    }

    /// Group body: strip the node's own FILTER wrappers, print the joined
    /// left spine, then the FILTER lines (reparse rebuilds the same tree).
    void group(const GraphPattern& p, int indent) {
        std::vector<const Condition*> conds;
        const GraphPattern* core = &p;
        while (core->kind == GraphPattern::Kind::Filter) {
            conds.push_back(&core->condition);
            core = &core->inner();
        }
        std::reverse(conds.begin(), conds.end());
        spine(*core, indent);
        for (const auto* c : conds) {
            pad(indent);
            out_ << "FILTER (" << cond(*c, nullptr) << ")\n";
        }
    }

    /// The left spine of And/Opt/Minus prints flat; everything else prints as
    /// a chain element.
    void spine(const GraphPattern& p, int indent) {
        switch (p.kind) {
            case GraphPattern::Kind::And:
                spine(p.left(), indent);
                element(p.right(), indent);
                return;
            case GraphPattern::Kind::Opt:
                spine(p.left(), indent);
                pad(indent);
                out_ << "OPTIONAL {\n";
                group(p.right(), indent + 1);
                pad(indent);
                out_ << "}\n";
                return;
            case GraphPattern::Kind::Minus:
                spine(p.left(), indent);
                pad(indent);
                out_ << "MINUS {\n";
                group(p.right(), indent + 1);
                pad(indent);
                out_ << "}\n";
                return;
            default:
                element(p, indent);
                return;
        }
    }

    /// One element of a conjunction. Subtrees whose operators would rebind to
    /// the surrounding group (Filter always; And/Opt/Minus in non-head
    /// position) are braced.
    void element(const GraphPattern& p, int indent) {
        switch (p.kind) {
            case GraphPattern::Kind::Triple:
                pad(indent);
                out_ << term(p.triple.subject) << " " << path(p.triple.predicate) << " "
                     << term(p.triple.object) << " .\n";
                return;
            case GraphPattern::Kind::Values:
                values(p.values, indent);
                return;
            case GraphPattern::Kind::Graph:
                pad(indent);
                out_ << "GRAPH " << term(p.graph) << " {\n";
                group(p.inner(), indent + 1);
                pad(indent);
                out_ << "}\n";
                return;
            case GraphPattern::Kind::Union:
                union_chain(p, indent);
                return;
            case GraphPattern::Kind::SubSelect: {
                // Sub-selects reuse the outer prefix map for shortening;
                // prefixes are declared once at the top only.
                pad(indent);
                out_ << "{\n";
                subquery_text(*p.subquery, indent + 1);
                pad(indent);
                out_ << "}\n";
                return;
            }
            default:
                pad(indent);
                out_ << "{\n";
                group(p, indent + 1);
                pad(indent);
                out_ << "}\n";
                return;
        }
    }

    void subquery_text(const Query& q, int indent) {
        pad(indent);
        select_header(q);
        out_ << "\n";
        pad(indent);
        out_ << "WHERE {\n";
        group(q.pattern, indent + 1);
        pad(indent);
        out_ << "}";
        modifiers_indented(q, indent);
        out_ << "\n";
    }

    void modifiers_indented(const Query& q, int indent) {
        if (!q.group_by.empty()) {
            out_ << "\n";
            pad(indent);
            out_ << "GROUP BY";
            for (const auto& v : q.group_by) out_ << " " << term(v);
        }
        if (!q.order_by.empty()) {
            out_ << "\n";
            pad(indent);
            out_ << "ORDER BY";
            for (const auto& key : q.order_by) {
                if (key.descending)
                    out_ << " DESC(" << term(key.var) << ")";
                else
                    out_ << " " << term(key.var);
            }
        }
        if (q.limit) {
            out_ << "\n";
            pad(indent);
            out_ << "LIMIT " << *q.limit;
        }
        if (q.offset) {
            out_ << "\n";
            pad(indent);
            out_ << "OFFSET " << *q.offset;
        }
    }

    /// Flatten the left spine of a Union; a right-child Union is braced as a
    /// single branch so reparsing rebuilds the identical tree.
    void union_chain(const GraphPattern& p, int indent) {
        std::vector<const GraphPattern*> branches;
        const GraphPattern* node = &p;
        while (node->kind == GraphPattern::Kind::Union) {
            branches.push_back(&node->right());
            node = &node->left();
        }
        branches.push_back(node);
        std::reverse(branches.begin(), branches.end());
        for (size_t i = 0; i < branches.size(); ++i) {
            pad(indent);
            if (i) out_ << "UNION ";
            out_ << "{\n";
            group(*branches[i], indent + 1);
            pad(indent);
            out_ << "}\n";
        }
    }

    void values(const ValuesBlock& v, int indent) {
        pad(indent);
        out_ << (opts_.use_bindings_keyword ? "BINDINGS" : "VALUES") << " ";
        bool single = v.vars.size() == 1;
        if (single) {
            out_ << term(v.vars[0]) << " {";
            for (const auto& row : v.rows)
                out_ << " " << (row[0] ? term(*row[0]) : "UNDEF");
            out_ << " }\n";
            return;
        }
        out_ << "(";
        for (size_t i = 0; i < v.vars.size(); ++i) out_ << (i ? " " : "") << term(v.vars[i]);
        out_ << ") {";
        for (const auto& row : v.rows) {
            out_ << " (";
            for (size_t i = 0; i < row.size(); ++i) {
                if (i) out_ << " ";
                out_ << (row[i] ? term(*row[i]) : "UNDEF");
            }
            out_ << ")";
        }
        out_ << " }\n";
    }

    /// parent: nullptr at top. Left child of the same connective prints flat
    /// (left-assoc); any other connective child is parenthesized, so the
    /// reparse reconstructs the exact tree.
    std::string cond(const Condition& c, const Condition* /*parent*/) const {
        switch (c.kind) {
            case Condition::Kind::Compare:
                return term(c.lhs) + " " + cmp_name(c.cmp) + " " + term(c.rhs);
            case Condition::Kind::Bound: return "bound(" + term(c.lhs) + ")";
            case Condition::Kind::IsBlank: return "isBlank(" + term(c.lhs) + ")";
            case Condition::Kind::IsIri: return "isIRI(" + term(c.lhs) + ")";
            case Condition::Kind::Not: {
                const Condition& inner = c.children[0];
                if (inner.kind == Condition::Kind::And || inner.kind == Condition::Kind::Or)
                    return "!(" + cond(inner, nullptr) + ")";
                return "!" + cond(inner, &c);
            }
            case Condition::Kind::And:
            case Condition::Kind::Or: {
                const char* op = c.kind == Condition::Kind::And ? " && " : " || ";
                std::string left = connective_child(c.children[0], c, true);
                std::string right = connective_child(c.children[1], c, false);
                return left + op + right;
            }
        }
        return {};
    }

    std::string connective_child(const Condition& child, const Condition& parent,
                                 bool is_left) const {
        bool child_conn =
            child.kind == Condition::Kind::And || child.kind == Condition::Kind::Or;
        if (!child_conn) return cond(child, &parent);
        if (is_left && child.kind == parent.kind) return cond(child, &parent);
        return "(" + cond(child, nullptr) + ")";
    }

    static const char* cmp_name(Condition::Cmp cmp) {
        switch (cmp) {
            case Condition::Cmp::Eq: return "=";
            case Condition::Cmp::Ne: return "!=";
            case Condition::Cmp::Lt: return "<";
            case Condition::Cmp::Gt: return ">";
            case Condition::Cmp::Le: return "<=";
            case Condition::Cmp::Ge: return ">=";
        }
        return "=";
    }
};

}  // namespace

std::string serialize_query(const Query& q, const SerializeOptions& opts) {
    Writer w(q.prefixes, opts);
    return w.query(q);
}

std::string serialize_term(const RDFTerm& t, const std::map<std::string, std::string>& prefixes) {
    Writer w(prefixes, {});
    return w.term(t);
}

std::string serialize_condition(const Condition& c,
                                const std::map<std::string, std::string>& prefixes) {
    Writer w(prefixes, {});
    return w.condition(c);
}

std::string serialize_pattern(const GraphPattern& p,
                              const std::map<std::string, std::string>& prefixes) {
    Writer w(prefixes, {});
    w.group_into(p, 0);
    return w.str();
}

}  // namespace sparqlopt
