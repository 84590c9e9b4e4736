#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "sparqlopt/analysis.hpp"
#include "sparqlopt/parser.hpp"
#include "sparqlopt/serializer.hpp"
#include "sparqlopt/template.hpp"

using namespace sparqlopt;

namespace {

std::string fixture(const std::string& rel) {
    std::ifstream in(std::string(FIXTURES_DIR) + "/" + rel);
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const char* kUnionQuery = R"(PREFIX ex: <http://www.example.org#>
PREFIX rdfs: <http://www.w3.org/2000/01/rdf-schema#>
SELECT ?label WHERE {
  {ex:123 rdfs:label ?label}
  UNION
  {ex:456 rdfs:label ?label}
})";

}  // namespace

TEST_CASE("union query parses to a Union of two triple branches") {
    Query q = parse_query(kUnionQuery);
    REQUIRE(q.form == QueryForm::Select);
    REQUIRE(q.projection.size() == 1);
    CHECK(q.projection[0].var.lexical == "label");
    REQUIRE(q.pattern.kind == GraphPattern::Kind::Union);
    const auto& l = q.pattern.left();
    const auto& r = q.pattern.right();
    REQUIRE(l.kind == GraphPattern::Kind::Triple);
    REQUIRE(r.kind == GraphPattern::Kind::Triple);
    CHECK(l.triple.subject == RDFTerm::iri("http://www.example.org#123"));
    CHECK(l.triple.predicate.steps[0] ==
          RDFTerm::iri("http://www.w3.org/2000/01/rdf-schema#label"));
    CHECK(l.triple.object == RDFTerm::variable("label"));
    CHECK(r.triple.subject == RDFTerm::iri("http://www.example.org#456"));
}

TEST_CASE("minimal star query") {
    Query q = parse_query("SELECT * WHERE { ?s ?p ?o }");
    CHECK(q.select_all);
    REQUIRE(q.pattern.kind == GraphPattern::Kind::Triple);
    CHECK(vars_of(q.pattern) == std::set<std::string>{"s", "p", "o"});
}

TEST_CASE("sequence path query has a two-step path") {
    std::string text = fixture("queries/target_seqpath.rq");
    std::string inst = instantiate_template(
        {text}, {{"RESOURCE", RDFTerm::iri("http://ex.org/t1")}});
    Query q = parse_query(inst);
    auto triples = all_triples(q.pattern);
    REQUIRE(!triples.empty());
    const TriplePattern& first = *triples[0];
    REQUIRE(first.predicate.steps.size() == 2);
    CHECK(first.predicate.steps[0] ==
          RDFTerm::iri("http://www.w3.org/2004/02/skos/core#exactMatch"));
    CHECK(first.predicate.steps[1] ==
          RDFTerm::iri("http://www.w3.org/2000/01/rdf-schema#label"));
}

TEST_CASE("VALUES and BINDINGS both parse; VALUES emitted by default") {
    std::string values = fixture("queries/alt_values.rq");
    Query q = parse_query(values);
    std::string canonical = serialize_query(q);
    CHECK(canonical.find("VALUES ?s { ex:123 ex:456 }") != std::string::npos);

    std::string bindings = values;
    size_t at = bindings.find("VALUES");
    REQUIRE(at != std::string::npos);
    bindings.replace(at, 6, "BINDINGS");
    Query q2 = parse_query(bindings);
    CHECK(structural_equal(q, q2));

    SerializeOptions legacy;
    legacy.use_bindings_keyword = true;
    CHECK(serialize_query(q, legacy).find("BINDINGS ?s {") != std::string::npos);
}

TEST_CASE("round-trip: parse . serialize . parse is structurally stable") {
    const char* files[] = {
        "queries/group_concat.rq", "queries/alt_union.rq",   "queries/alt_filter.rq",
        "queries/alt_values.rq",   "queries/warmup.rq",      "queries/target_original.rq",
        "queries/target_seqpath.rq",
    };
    for (const char* f : files) {
        CAPTURE(f);
        std::string text = fixture(f);
        // Placeholders are instantiated before parsing.
        QueryTemplate t{text};
        std::map<std::string, RDFTerm> bindings;
        for (const auto& name : template_placeholders(t))
            bindings[name] = RDFTerm::iri("http://ex.org/r1");
        Query q = parse_query(instantiate_template(t, bindings));
        std::string once = serialize_query(q);
        Query q2 = parse_query(once);
        CHECK(structural_equal(q, q2));
        std::string twice = serialize_query(q2);
        CHECK(once == twice);
        CHECK(vars_of(q.pattern) == vars_of(q2.pattern));
    }
}

TEST_CASE("round-trip oddly shaped trees") {
    // Right-nested unions, nested filters, OPTIONAL in non-head position,
    // MINUS and sub-selects keep their exact structure.
    const char* texts[] = {
        "SELECT * WHERE { { ?a <http://p> ?b } UNION { { ?a <http://q> ?b } UNION { ?a "
        "<http://r> ?b } } }",
        "SELECT * WHERE { ?a <http://p> ?b . { ?a <http://q> ?c OPTIONAL { ?c <http://r> ?d } } "
        "}",
        "SELECT * WHERE { { ?a <http://p> ?b FILTER (?b = 1) } . ?a <http://q> ?c }",
        "SELECT * WHERE { ?a <http://p> ?b MINUS { ?a <http://q> ?b } }",
        "SELECT ?a WHERE { { SELECT ?a (COUNT(?b) AS ?n) WHERE { ?a <http://p> ?b } GROUP BY ?a "
        "} FILTER (?n > 1) } ORDER BY ?a LIMIT 5 OFFSET 2",
        "ASK { ?a <http://p> ?b FILTER (!(bound(?c) || isIRI(?a)) && ?b != 3) }",
        "SELECT * WHERE { GRAPH ?g { ?a <http://p> ?b } GRAPH <http://g2> { ?a <http://q> ?c } "
        "}",
        "SELECT * WHERE { VALUES (?a ?b) { (<http://x> 1) (UNDEF 2) } ?a <http://p> ?b }",
        "CONSTRUCT { ?a <http://p> ?b } WHERE { ?a <http://q> ?b } LIMIT 3",
    };
    for (const char* text : texts) {
        CAPTURE(text);
        Query q = parse_query(text);
        std::string once = serialize_query(q);
        CAPTURE(once);
        Query q2 = parse_query(once);
        CHECK(structural_equal(q, q2));
        CHECK(serialize_query(q2) == once);
    }
}

TEST_CASE("parse errors carry position and token") {
    try {
        parse_query("SELECT ?x WHERE { ?x <http://p> }");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() >= 1);
        CHECK(std::string(e.what()).find("expected") != std::string::npos);
    }

    CHECK_THROWS_AS(parse_query("SELECT ?x WHERE { ?x ex:p ?y }"), ParseError);  // unknown prefix

    try {
        parse_query("SELECT * WHERE { [RESOURCE] <http://p> ?y }");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("RESOURCE") != std::string::npos);
        CHECK(std::string(e.what()).find("instantiate") != std::string::npos);
    }
}

TEST_CASE("aggregation rule: non-grouped projected variable rejected") {
    CHECK_THROWS_AS(
        parse_query("SELECT ?s (COUNT(?o) AS ?n) WHERE { ?s ?p ?o }"), ParseError);
    CHECK_NOTHROW(
        parse_query("SELECT ?s (COUNT(?o) AS ?n) WHERE { ?s ?p ?o } GROUP BY ?s"));
}

TEST_CASE("ask queries reject solution modifiers") {
    CHECK_THROWS_AS(parse_query("ASK { ?s ?p ?o } LIMIT 3"), ParseError);
}

TEST_CASE("blank node labels are renamed apart deterministically") {
    Query q = parse_query("SELECT * WHERE { _:x <http://p> _:y . _:x <http://q> ?v }");
    auto triples = all_triples(q.pattern);
    REQUIRE(triples.size() == 2);
    CHECK(triples[0]->subject == RDFTerm::blank("b0"));
    CHECK(triples[0]->object == RDFTerm::blank("b1"));
    CHECK(triples[1]->subject == RDFTerm::blank("b0"));

    Query again = parse_query("SELECT * WHERE { _:z <http://p> _:w . _:z <http://q> ?v }");
    CHECK(structural_equal(q, again));
}

TEST_CASE("template instantiation") {
    QueryTemplate t{fixture("queries/target_seqpath.rq")};
    auto names = template_placeholders(t);
    REQUIRE(names == std::vector<std::string>{"RESOURCE"});

    SUBCASE("missing binding names the placeholder") {
        try {
            instantiate_template(t, {});
            FAIL("expected error");
        } catch (const std::exception& e) {
            CHECK(std::string(e.what()).find("RESOURCE") != std::string::npos);
        }
    }

    SUBCASE("substituted text parses") {
        std::string text =
            instantiate_template(t, {{"RESOURCE", RDFTerm::iri("http://ex.org/t1")}});
        CHECK(text.find("<http://ex.org/t1> skos:exactMatch/rdfs:label ?synonym") !=
              std::string::npos);
        CHECK_NOTHROW(parse_query(text));
    }

    SUBCASE("zero placeholders leave text unchanged") {
        QueryTemplate plain{"SELECT * WHERE { ?s ?p ?o }"};
        CHECK(instantiate_template(plain, {}) == plain.text);
    }

    SUBCASE("two distinct placeholders both substituted, verified by reparse") {
        QueryTemplate two{"SELECT * WHERE { [A] <http://p> [B] }"};
        std::string text = instantiate_template(
            two, {{"A", RDFTerm::iri("http://ex.org/a")}, {"B", RDFTerm::literal("v")}});
        Query q = parse_query(text);
        auto triples = all_triples(q.pattern);
        REQUIRE(triples.size() == 1);
        CHECK(triples[0]->subject == RDFTerm::iri("http://ex.org/a"));
        CHECK(triples[0]->object == RDFTerm::literal("v"));
    }
}

TEST_CASE("placeholder soundness: no substitution inside IRIs, literals, comments") {
    QueryTemplate t{"# [NOTE] stays\nSELECT * WHERE { <http://ex.org/[X]> <http://p> \"[X]\" . "
                    "[X] <http://q> ?v }"};
    auto names = template_placeholders(t);
    CHECK(names == std::vector<std::string>{"X"});
    std::string text = instantiate_template(t, {{"X", RDFTerm::iri("http://ex.org/sub")}});
    CHECK(text.find("<http://ex.org/[X]>") != std::string::npos);
    CHECK(text.find("\"[X]\"") != std::string::npos);
    CHECK(text.find("# [NOTE] stays") != std::string::npos);
    CHECK(text.find("<http://ex.org/sub> <http://q> ?v") != std::string::npos);
}

TEST_CASE("templatize is the tokenizer-aware inverse") {
    std::string text = "SELECT * WHERE { ?resource <http://p> \"?resource\" . ?resource2 "
                       "<http://q> ?v }";
    std::string out = templatize(text, "resource", "RESOURCE");
    CHECK(out.find("[RESOURCE] <http://p>") != std::string::npos);
    CHECK(out.find("\"?resource\"") != std::string::npos);
    CHECK(out.find("?resource2") != std::string::npos);
}
