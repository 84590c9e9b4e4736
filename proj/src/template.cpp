#include "sparqlopt/template.hpp"

#include <cctype>
#include <stdexcept>

namespace sparqlopt {

namespace {

/// Walk query text, invoking `on_code(pos)` only at positions outside IRIs,
/// string literals and comments. The callback returns the number of input
/// characters it consumed (0 = not interested).
template <typename Fn>
void scan_code(const std::string& text, Fn on_code, std::string* out) {
    size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c == '<') {
            // IRIREF if it closes before whitespace
            size_t j = i + 1;
            while (j < text.size() && text[j] != '>' && !std::isspace(static_cast<unsigned char>(text[j])))
                ++j;
            if (j < text.size() && text[j] == '>') {
                if (out) out->append(text, i, j - i + 1);
                i = j + 1;
                continue;
            }
        }
        if (c == '"' || c == '\'') {
            size_t j = i + 1;
            while (j < text.size() && text[j] != c) {
                if (text[j] == '\\' && j + 1 < text.size()) ++j;
                ++j;
            }
            if (j < text.size()) ++j;  // closing quote
            if (out) out->append(text, i, j - i);
            i = j;
            continue;
        }
        if (c == '#') {
            size_t j = i;
            while (j < text.size() && text[j] != '\n') ++j;
            if (out) out->append(text, i, j - i);
            i = j;
            continue;
        }
        size_t consumed = on_code(i);
        if (consumed == 0) {
            if (out) out->push_back(c);
            ++i;
        } else {
            i += consumed;
        }
    }
}

bool placeholder_at(const std::string& text, size_t i, std::string* name) {
    if (text[i] != '[') return false;
    size_t j = i + 1;
    std::string n;
    while (j < text.size() && (std::isupper(static_cast<unsigned char>(text[j])) ||
                               std::isdigit(static_cast<unsigned char>(text[j])) ||
                               text[j] == '_')) {
        n.push_back(text[j]);
        ++j;
    }
    if (n.empty() || j >= text.size() || text[j] != ']') return false;
    *name = n;
    return true;
}

}  // namespace

std::vector<std::string> template_placeholders(const QueryTemplate& t) {
    std::vector<std::string> names;
    scan_code(
        t.text,
        [&](size_t i) -> size_t {
            std::string name;
            if (!placeholder_at(t.text, i, &name)) return 0;
            bool known = false;
            for (const auto& n : names) known = known || n == name;
            if (!known) names.push_back(name);
            return name.size() + 2;
        },
        nullptr);
    return names;
}

std::string instantiate_template(const QueryTemplate& t,
                                 const std::map<std::string, RDFTerm>& bindings) {
    std::string out;
    out.reserve(t.text.size());
    scan_code(
        t.text,
        [&](size_t i) -> size_t {
            std::string name;
            if (!placeholder_at(t.text, i, &name)) return 0;
            auto it = bindings.find(name);
            if (it == bindings.end())
                throw std::runtime_error("no binding for placeholder [" + name + "]");
            out += to_string(it->second);
            return name.size() + 2;
        },
        &out);
    return out;
}

std::string templatize(const std::string& query_text, const std::string& var_name,
                       const std::string& placeholder_name) {
    std::string needle = "?" + var_name;
    std::string out;
    scan_code(
        query_text,
        [&](size_t i) -> size_t {
            if (query_text.compare(i, needle.size(), needle) != 0) return 0;
            size_t after = i + needle.size();
            if (after < query_text.size()) {
                char c = query_text[after];
                if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') return 0;
            }
            out += "[" + placeholder_name + "]";
            return needle.size();
        },
        &out);
    return out;
}

}  // namespace sparqlopt
