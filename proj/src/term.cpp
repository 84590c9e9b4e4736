#include "sparqlopt/term.hpp"

#include <cctype>
#include <cstdlib>
#include <sstream>

namespace sparqlopt {

RDFTerm RDFTerm::iri(std::string value) {
    return RDFTerm{TermKind::Iri, std::move(value), "", ""};
}

RDFTerm RDFTerm::blank(std::string label) {
    return RDFTerm{TermKind::Blank, std::move(label), "", ""};
}

RDFTerm RDFTerm::literal(std::string value, std::string datatype, std::string language) {
    return RDFTerm{TermKind::Literal, std::move(value), std::move(datatype), std::move(language)};
}

RDFTerm RDFTerm::variable(std::string name) {
    return RDFTerm{TermKind::Variable, std::move(name), "", ""};
}

bool PathExpr::all_iri() const {
    for (const auto& s : steps)
        if (!s.is_iri()) return false;
    return !steps.empty();
}

bool is_absolute_iri(const std::string& iri) {
    if (iri.empty() || !std::isalpha(static_cast<unsigned char>(iri[0]))) return false;
    for (size_t i = 1; i < iri.size(); ++i) {
        char c = iri[i];
        if (c == ':') return i + 1 < iri.size() || true;
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '-' && c != '.')
            return false;
    }
    return false;
}

static int kind_rank(const RDFTerm& t) {
    switch (t.kind) {
        case TermKind::Blank: return 0;
        case TermKind::Iri: return 1;
        case TermKind::Literal: return 2;
        case TermKind::Variable: return 3;
    }
    return 3;
}

int order_compare(const std::optional<RDFTerm>& a, const std::optional<RDFTerm>& b) {
    if (!a && !b) return 0;
    if (!a) return -1;
    if (!b) return 1;
    if (int k = kind_rank(*a) - kind_rank(*b); k != 0) return k;
    if (a->is_literal()) {
        if (int d = a->datatype.compare(b->datatype); d != 0) return d;
        if (int l = a->lexical.compare(b->lexical); l != 0) return l;
        return a->language.compare(b->language);
    }
    return a->lexical.compare(b->lexical);
}

bool is_numeric_literal(const RDFTerm& t) {
    if (!t.is_literal()) return false;
    if (t.datatype != iris::xsd_integer && t.datatype != iris::xsd_decimal &&
        t.datatype != iris::xsd_double)
        return false;
    if (t.lexical.empty()) return false;
    char* end = nullptr;
    std::strtod(t.lexical.c_str(), &end);
    return end && *end == '\0';
}

double numeric_value(const RDFTerm& t) {
    return std::strtod(t.lexical.c_str(), nullptr);
}

std::string to_string(const RDFTerm& t) {
    switch (t.kind) {
        case TermKind::Iri: return "<" + t.lexical + ">";
        case TermKind::Blank: return "_:" + t.lexical;
        case TermKind::Variable: return "?" + t.lexical;
        case TermKind::Literal: {
            std::ostringstream out;
            out << '"';
            for (char c : t.lexical) {
                switch (c) {
                    case '"': out << "\\\""; break;
                    case '\\': out << "\\\\"; break;
                    case '\n': out << "\\n"; break;
                    case '\r': out << "\\r"; break;
                    case '\t': out << "\\t"; break;
                    default: out << c;
                }
            }
            out << '"';
            if (!t.language.empty())
                out << '@' << t.language;
            else if (!t.datatype.empty())
                out << "^^<" << t.datatype << ">";
            return out.str();
        }
    }
    return {};
}

}  // namespace sparqlopt
