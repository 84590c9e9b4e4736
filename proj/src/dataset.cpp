#include "sparqlopt/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sparqlopt {

namespace {

struct LineParser {
    const std::string& line;
    const std::string& file;
    int lineno;
    size_t pos = 0;
    int file_index;

    [[noreturn]] void fail(const std::string& msg) const {
        throw LoadError(file + ":" + std::to_string(lineno) + ": " + msg);
    }

    void skip_ws() {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    }

    bool at_end() {
        skip_ws();
        return pos >= line.size();
    }

    char peek() const { return pos < line.size() ? line[pos] : '\0'; }

    std::string parse_iri() {
        if (peek() != '<') fail("expected IRI");
        ++pos;
        std::string out;
        while (pos < line.size() && line[pos] != '>') out.push_back(line[pos++]);
        if (pos >= line.size()) fail("unterminated IRI");
        ++pos;
        return out;
    }

    RDFTerm parse_term() {
        skip_ws();
        char c = peek();
        if (c == '<') return RDFTerm::iri(parse_iri());
        if (c == '_') {
            if (pos + 1 >= line.size() || line[pos + 1] != ':') fail("malformed blank node");
            pos += 2;
            std::string label;
            while (pos < line.size() && (std::isalnum(static_cast<unsigned char>(line[pos])) ||
                                         line[pos] == '_' || line[pos] == '-'))
                label.push_back(line[pos++]);
            if (label.empty()) fail("empty blank node label");
            // Blank labels never join across load files.
            return RDFTerm::blank("f" + std::to_string(file_index) + "_" + label);
        }
        if (c == '"') {
            ++pos;
            std::string value;
            while (pos < line.size() && line[pos] != '"') {
                if (line[pos] == '\\' && pos + 1 < line.size()) {
                    ++pos;
                    switch (line[pos]) {
                        case 'n': value.push_back('\n'); break;
                        case 't': value.push_back('\t'); break;
                        case 'r': value.push_back('\r'); break;
                        case '"': value.push_back('"'); break;
                        case '\\': value.push_back('\\'); break;
                        case 'u': case 'U': {
                            int width = line[pos] == 'u' ? 4 : 8;
                            if (pos + width >= line.size()) fail("bad unicode escape");
                            unsigned long cp = std::stoul(line.substr(pos + 1, width), nullptr, 16);
                            pos += width;
                            // UTF-8 encode
                            if (cp < 0x80) {
                                value.push_back(static_cast<char>(cp));
                            } else if (cp < 0x800) {
                                value.push_back(static_cast<char>(0xC0 | (cp >> 6)));
                                value.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
                            } else if (cp < 0x10000) {
                                value.push_back(static_cast<char>(0xE0 | (cp >> 12)));
                                value.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
                                value.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
                            } else {
                                value.push_back(static_cast<char>(0xF0 | (cp >> 18)));
                                value.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
                                value.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
                                value.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
                            }
                            break;
                        }
                        default: value.push_back(line[pos]); break;
                    }
                    ++pos;
                } else {
                    value.push_back(line[pos++]);
                }
            }
            if (pos >= line.size()) fail("unterminated literal");
            ++pos;  // closing quote
            if (peek() == '@') {
                ++pos;
                std::string tag;
                while (pos < line.size() && (std::isalnum(static_cast<unsigned char>(line[pos])) ||
                                             line[pos] == '-'))
                    tag.push_back(line[pos++]);
                return RDFTerm::literal(value, "", tag);
            }
            if (pos + 1 < line.size() && line[pos] == '^' && line[pos + 1] == '^') {
                pos += 2;
                return RDFTerm::literal(value, parse_iri());
            }
            return RDFTerm::literal(value);
        }
        fail("expected RDF term");
    }
};

}  // namespace

std::string ProvenanceMap::graph_of(const std::string& predicate_iri) const {
    auto it = predicate_to_graph.find(predicate_iri);
    return it == predicate_to_graph.end() ? "" : it->second;
}

bool Dataset::Graph::insert(const Triple& t) {
    if (!present.insert(t).second) return false;
    triples.push_back(t);
    return true;
}

void Dataset::Graph::build_index() {
    by_subject.clear();
    by_predicate.clear();
    for (size_t i = 0; i < triples.size(); ++i) {
        by_subject[triples[i].subject].push_back(i);
        by_predicate[triples[i].predicate].push_back(i);
    }
}

Dataset Dataset::load(const std::vector<LoadSpec>& files, bool default_is_union) {
    Dataset d;
    d.default_is_union_ = default_is_union;
    int file_index = 0;
    for (const auto& spec : files) {
        std::ifstream in(spec.path);
        if (!in) throw LoadError("cannot open " + spec.path);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            LineParser p{line, spec.path, lineno, 0, file_index};
            if (p.at_end() || p.peek() == '#') continue;
            RDFTerm s = p.parse_term();
            RDFTerm pr = p.parse_term();
            RDFTerm o = p.parse_term();
            std::string graph = spec.graph;
            if (spec.format == RdfFormat::NQuads) {
                p.skip_ws();
                if (p.peek() == '<') graph = p.parse_iri();
            }
            p.skip_ws();
            if (p.peek() != '.') p.fail("expected terminating '.'");
            if (s.is_literal()) p.fail("literal in subject position");
            if (!pr.is_iri()) p.fail("predicate must be an IRI");
            d.add(Triple{std::move(s), std::move(pr), std::move(o)}, graph);
        }
        ++file_index;
    }
    d.seal();
    return d;
}

std::pair<std::vector<LoadSpec>, bool> parse_manifest(const std::string& json_text,
                                                      const std::string& base_dir) {
    nlohmann::json doc = nlohmann::json::parse(json_text);
    std::vector<LoadSpec> specs;
    for (const auto& f : doc.at("files")) {
        LoadSpec spec;
        std::filesystem::path p = f.at("path").get<std::string>();
        if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
        spec.path = p.string();
        std::string fmt = f.value("format", "ntriples");
        if (fmt == "ntriples") spec.format = RdfFormat::NTriples;
        else if (fmt == "nquads") spec.format = RdfFormat::NQuads;
        else throw LoadError("unknown format '" + fmt + "' in manifest");
        spec.graph = f.value("graph", "");
        if (spec.format == RdfFormat::NTriples && spec.graph.empty())
            throw LoadError("ntriples entry needs a \"graph\" IRI: " + spec.path);
        specs.push_back(std::move(spec));
    }
    bool is_union = doc.value("default_is_union", true);
    return {specs, is_union};
}

Dataset Dataset::load_manifest(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw LoadError("cannot open manifest " + manifest_path);
    std::stringstream buf;
    buf << in.rdbuf();
    auto dir = std::filesystem::path(manifest_path).parent_path().string();
    auto [specs, is_union] = parse_manifest(buf.str(), dir);
    return load(specs, is_union);
}

void Dataset::add(const Triple& t, const std::string& graph) {
    sealed_ = false;
    if (graph.empty()) {
        explicit_default_.insert(t);
        return;
    }
    auto [it, fresh] = named_.try_emplace(graph);
    if (fresh) graph_order_.push_back(graph);
    it->second.insert(t);
}

void Dataset::seal() {
    default_view_ = Graph{};
    for (const auto& t : explicit_default_.triples) default_view_.insert(t);
    if (default_is_union_) {
        for (const auto& name : graph_order_)
            for (const auto& t : named_.at(name).triples) default_view_.insert(t);
    }
    explicit_default_.build_index();
    default_view_.build_index();
    for (auto& [name, g] : named_) g.build_index();
    sealed_ = true;
}

const Dataset::Graph* Dataset::find_graph(const Scope& scope) const {
    if (scope.kind == ScopeKind::Default) return &default_view_;
    if (scope.kind == ScopeKind::Named) {
        auto it = named_.find(scope.graph);
        return it == named_.end() ? nullptr : &it->second;
    }
    return nullptr;
}

void Dataset::match_into(const Graph& g, const RDFTerm& s, const RDFTerm& p, const RDFTerm& o,
                         const std::string& graph_name, std::vector<TripleMatch>& out) {
    auto position_ok = [](const RDFTerm& pattern, const RDFTerm& value) {
        if (pattern.is_variable() || pattern.is_blank()) return true;  // blank = wildcard
        return pattern == value;
    };
    auto scan = [&](const std::vector<size_t>* idx) {
        auto consider = [&](const Triple& t) {
            if (!position_ok(s, t.subject) || !position_ok(p, t.predicate) ||
                !position_ok(o, t.object))
                return;
            TripleMatch m;
            m.graph = graph_name;
            auto bind = [&](const RDFTerm& pattern, const RDFTerm& value) -> bool {
                if (!pattern.is_variable()) return true;
                for (const auto& [name, bound] : m.bindings)
                    if (name == pattern.lexical) return bound == value;  // repeated var
                m.bindings.emplace_back(pattern.lexical, value);
                return true;
            };
            if (!bind(s, t.subject) || !bind(p, t.predicate) || !bind(o, t.object)) return;
            out.push_back(std::move(m));
        };
        if (idx) {
            for (size_t i : *idx) consider(g.triples[i]);
        } else {
            for (const auto& t : g.triples) consider(t);
        }
    };
    // Blank patterns are wildcards, so only constant IRIs use an index.
    if (s.is_iri()) {
        auto it = g.by_subject.find(s);
        if (it != g.by_subject.end()) scan(&it->second);
        return;
    }
    if (p.is_iri()) {
        auto it = g.by_predicate.find(p);
        if (it != g.by_predicate.end()) scan(&it->second);
        return;
    }
    scan(nullptr);
}

std::vector<TripleMatch> Dataset::match(const Scope& scope, const RDFTerm& s, const RDFTerm& p,
                                        const RDFTerm& o) const {
    std::vector<TripleMatch> out;
    if (scope.kind == ScopeKind::Any) {
        for (const auto& name : graph_order_) match_into(named_.at(name), s, p, o, name, out);
        return out;
    }
    const Graph* g = find_graph(scope);
    if (!g) return out;  // unknown graph: empty, not an error
    match_into(*g, s, p, o, scope.kind == ScopeKind::Named ? scope.graph : "", out);
    return out;
}

std::vector<std::string> Dataset::graph_names() const { return graph_order_; }

size_t Dataset::graph_size(const std::string& graph) const {
    if (graph.empty()) return default_view_.triples.size();
    auto it = named_.find(graph);
    return it == named_.end() ? 0 : it->second.triples.size();
}

size_t Dataset::total_triples() const {
    size_t n = explicit_default_.triples.size();
    for (const auto& [name, g] : named_) n += g.triples.size();
    return n;
}

const std::vector<Triple>& Dataset::graph_triples(const std::string& graph) const {
    if (graph.empty()) return default_view_.triples;
    static const std::vector<Triple> empty;
    auto it = named_.find(graph);
    return it == named_.end() ? empty : it->second.triples;
}

ProvenanceMap Dataset::infer_provenance() const {
    std::map<std::string, std::set<std::string>> census;
    for (const auto& name : graph_order_)
        for (const auto& t : named_.at(name).triples) census[t.predicate.lexical].insert(name);
    ProvenanceMap out;
    for (const auto& [pred, graphs] : census) {
        if (graphs.size() == 1)
            out.predicate_to_graph[pred] = *graphs.begin();
        else
            out.spanning.emplace_back(pred, std::vector<std::string>(graphs.begin(), graphs.end()));
    }
    return out;
}

bool Dataset::validate_provenance(const ProvenanceMap& map,
                                  std::vector<std::string>* violations) const {
    bool ok = true;
    for (const auto& name : graph_order_) {
        for (const auto& t : named_.at(name).triples) {
            auto it = map.predicate_to_graph.find(t.predicate.lexical);
            if (it != map.predicate_to_graph.end() && it->second != name) {
                ok = false;
                if (violations)
                    violations->push_back("predicate <" + t.predicate.lexical + "> mapped to <" +
                                          it->second + "> but occurs in <" + name + ">");
            }
        }
    }
    return ok;
}

std::vector<RDFTerm> Dataset::subjects_of_type(const std::string& type_iri) const {
    std::set<RDFTerm> subjects;
    for (const auto& m :
         match(Scope::def(), RDFTerm::variable("s"), RDFTerm::iri(iris::rdf_type),
               RDFTerm::iri(type_iri)))
        subjects.insert(m.bindings.at(0).second);
    return {subjects.begin(), subjects.end()};
}

}  // namespace sparqlopt
