#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "sparqlopt/algebra.hpp"
#include "sparqlopt/analysis.hpp"
#include "sparqlopt/bench.hpp"
#include "sparqlopt/endpoint.hpp"
#include "sparqlopt/parser.hpp"
#include "sparqlopt/protocol.hpp"
#include "sparqlopt/rewrite.hpp"
#include "sparqlopt/serializer.hpp"
#include "sparqlopt/template.hpp"

namespace {

using namespace sparqlopt;

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

// --- parse ----------------------------------------------------------------

int cmd_parse(const std::string& file, bool canonical) {
    Query q = parse_query(slurp(file));
    if (canonical) {
        std::cout << serialize_query(q);
    } else {
        std::cout << "ok: " << file << "\n";
    }
    return 0;
}

// --- analyze --------------------------------------------------------------

nlohmann::json wd_to_json(const WellDesignedReport& wd) {
    nlohmann::json out;
    out["well_designed"] = wd.well_designed;
    out["filter_violations"] = nlohmann::json::array();
    for (const auto& v : wd.filter_violations) {
        nlohmann::json j;
        j["location"] = v.location;
        j["vars"] = v.vars;
        out["filter_violations"].push_back(j);
    }
    out["opt_violations"] = nlohmann::json::array();
    for (const auto& v : wd.opt_violations) {
        nlohmann::json j;
        j["location"] = v.location;
        j["vars"] = v.vars;
        out["opt_violations"].push_back(j);
    }
    return out;
}

int cmd_analyze(const std::string& file, bool want_unf, bool as_json) {
    Query q = parse_query(slurp(file));
    WellDesignedReport wd = check_well_designed(q);
    FragmentLabel label = classify_fragment(q.pattern, wd);
    std::vector<std::string> unf_notes;
    std::optional<std::string> unf_text;
    if (want_unf) {
        Query unf_query = q;
        unf_query.pattern = to_union_normal_form(q.pattern, &unf_notes);
        unf_text = serialize_query(unf_query);
    }
    if (as_json) {
        nlohmann::json doc;
        doc["well_designedness"] = wd_to_json(wd);
        doc["fragment"]["operators"] = label.operators_used;
        doc["fragment"]["label"] = to_string(label.label);
        doc["union_normal_form_input"] = is_union_normal_form(q.pattern);
        if (unf_text) {
            doc["unf_query"] = *unf_text;
            doc["unf_notes"] = unf_notes;
        }
        std::cout << doc.dump(2) << "\n";
        return 0;
    }
    std::cout << "well-designed: " << (wd.well_designed ? "yes" : "no") << "\n";
    for (const auto& v : wd.filter_violations) {
        std::cout << "  unsafe FILTER at " << v.location << ":";
        for (const auto& var : v.vars) std::cout << " ?" << var;
        std::cout << "\n";
    }
    for (const auto& v : wd.opt_violations) {
        std::cout << "  OPT scope violation at " << v.location << ":";
        for (const auto& var : v.vars) std::cout << " ?" << var;
        std::cout << "\n";
    }
    std::cout << "operators:";
    for (const auto& op : label.operators_used) std::cout << " " << op;
    std::cout << "\nfragment: " << to_string(label.label) << "\n";
    std::cout << "union normal form: " << (is_union_normal_form(q.pattern) ? "yes" : "no")
              << "\n";
    if (unf_text) {
        std::cout << "---- UNF ----\n" << *unf_text;
        for (const auto& n : unf_notes) std::cout << "note: " << n << "\n";
    }
    return 0;
}

// --- rewrite ----------------------------------------------------------------

struct ProbeSetup {
    std::optional<Dataset> dataset;  // local probes / provenance validation
    std::optional<AskProbe> probe;
};

ProbeSetup make_probe(const std::string& spec) {
    ProbeSetup out;
    if (spec.empty()) return out;
    if (spec.rfind("local:", 0) == 0) {
        out.dataset = Dataset::load_manifest(spec.substr(6));
        out.probe = AskProbe::local(*out.dataset);
        return out;
    }
    if (spec.rfind("remote:", 0) == 0) {
        std::string url = spec.substr(7);
        out.probe = AskProbe([url](const Query& q) {
            // One-shot client per probe run; probes are sequential.
            std::string rest = url;
            if (rest.rfind("http://", 0) != 0)
                throw RewriteError("remote probe URL must start with http://");
            rest = rest.substr(7);
            size_t slash = rest.find('/');
            std::string hostport = slash == std::string::npos ? rest : rest.substr(0, slash);
            std::string path = slash == std::string::npos ? "/sparql" : rest.substr(slash);
            size_t colon = hostport.find(':');
            std::string host = colon == std::string::npos ? hostport : hostport.substr(0, colon);
            int port = colon == std::string::npos ? 80 : std::stoi(hostport.substr(colon + 1));
            httplib::Client client(host, port);
            httplib::Params params{{"query", serialize_query(q)}};
            auto res = client.Post(path, httplib::Headers{}, params);
            if (!res || res->status != 200)
                throw RewriteError("probe transport failure against " + url);
            auto decoded = decode_results_json(res->body);
            if (!decoded.boolean) throw RewriteError("probe answer is not boolean");
            return *decoded.boolean;
        });
        return out;
    }
    throw RewriteError("--probe must be local:<manifest> or remote:<url>");
}

ProvenanceMap load_provenance(const std::string& spec, ProbeSetup& probes) {
    ProvenanceMap prov;
    if (spec.rfind("infer:", 0) == 0) {
        Dataset d = Dataset::load_manifest(spec.substr(6));
        prov = d.infer_provenance();
        if (!probes.dataset) probes.dataset = std::move(d);
        return prov;
    }
    nlohmann::json doc = nlohmann::json::parse(slurp(spec));
    for (const auto& [pred, graph] : doc.at("predicate_to_graph").items())
        prov.predicate_to_graph[pred] = graph.get<std::string>();
    return prov;
}

int cmd_rewrite(const std::string& file, std::vector<std::string> heuristics,
                bool heuristics_explicit, const std::string& view_path,
                const std::string& probe_spec, const std::string& provenance_spec,
                const std::string& target_name, std::vector<std::string> aggregate_vars,
                const std::string& separator, const std::string& report_path) {
    Query q = parse_query(slurp(file));
    nlohmann::json report;
    report["heuristics"] = nlohmann::json::array();

    ProbeSetup probes = make_probe(probe_spec);

    if (heuristics.size() == 1 && heuristics[0] == "none") heuristics.clear();
    if (!heuristics_explicit) {
        // Default order keeps only the heuristics whose inputs were supplied.
        std::vector<std::string> applicable;
        for (const auto& h : heuristics) {
            if (h == "minimize-optionals" && (view_path.empty() || !probes.probe)) continue;
            if (h == "localize-graphs" && provenance_spec.empty()) continue;
            if (h == "alternatives" && target_name.empty()) continue;
            if (h == "aggregate" && aggregate_vars.empty()) continue;
            applicable.push_back(h);
        }
        heuristics = std::move(applicable);
    }
    for (const auto& h : heuristics) {
        nlohmann::json entry;
        entry["name"] = h;
        if (h == "minimize-optionals") {
            if (view_path.empty() || !probes.probe)
                throw RewriteError("minimize-optionals needs --view and --probe");
            ViewSpec view = ViewSpec::load(view_path);
            MinimizeReport mr;
            Query minimized =
                minimize_optionals(view.full_pattern(), view.core_pattern(), *probes.probe, &mr);
            // Graft the minimized pattern, keeping the input query's
            // projection and modifiers.
            q.pattern = minimized.pattern;
            entry["probes_issued"] = mr.probes_issued;
            entry["probes_executed"] = mr.probes_executed;
            entry["required_patterns"] = mr.required_patterns;
            entry["optional_groups"] = mr.optional_groups;
        } else if (h == "localize-graphs") {
            if (provenance_spec.empty())
                throw RewriteError("localize-graphs needs --provenance");
            ProvenanceMap prov = load_provenance(provenance_spec, probes);
            if (probes.dataset) {
                std::vector<std::string> violations;
                if (!probes.dataset->validate_provenance(prov, &violations)) {
                    std::string msg = "provenance map invalid for dataset:";
                    for (const auto& v : violations) msg += "\n  " + v;
                    throw RewriteError(msg);
                }
                entry["provenance_validated"] = true;
            }
            LocalizeReport lr;
            q = localize_graphs(q, prov, &lr);
            entry["graph_blocks_added"] = lr.blocks_added;
            entry["unlocalized"] = lr.unlocalized;
        } else if (h == "seqpath") {
            MergeReport mr;
            q = merge_sequence_paths(q, &mr);
            entry["merged_chains"] = mr.merged_chains;
            entry["blocked"] = mr.blocked;
        } else if (h == "alternatives") {
            AlternativesTarget target;
            if (target_name == "union") target = AlternativesTarget::Union;
            else if (target_name == "filter") target = AlternativesTarget::Filter;
            else if (target_name == "values") target = AlternativesTarget::Values;
            else throw RewriteError("--target must be union, filter or values");
            AlternativesReport ar;
            q = rewrite_alternatives(q, target, &ar);
            entry["constants"] = ar.constants;
            if (!ar.subject_var.empty()) entry["subject_var"] = ar.subject_var;
            entry["warnings"] = ar.warnings;
        } else if (h == "aggregate") {
            std::set<std::string> vars;
            for (auto name : aggregate_vars) {
                if (!name.empty() && name[0] == '?') name.erase(0, 1);
                vars.insert(name);
            }
            q = reduce_cartesian(q, vars, separator);
            entry["aggregated"] = vars;
        } else {
            throw RewriteError("unknown heuristic '" + h + "'");
        }
        report["heuristics"].push_back(std::move(entry));
    }

    std::cout << serialize_query(q);
    if (!report_path.empty())
        spit(report_path, report.dump(2) + "\n");
    else
        std::cerr << report.dump(2) << "\n";
    return 0;
}

// --- bench ---------------------------------------------------------------------

int cmd_bench(const std::string& plan_path, const std::string& out_dir,
              const std::string& baseline) {
    BenchPlan plan = BenchPlan::load(plan_path);
    BenchReport report = run_benchmark(plan);

    std::filesystem::create_directories(out_dir);
    spit(out_dir + "/report.json", report.to_json());
    spit(out_dir + "/samples.csv", report.to_csv());
    spit(out_dir + "/errorbars.dat", report.to_errorbars());

    std::cout << "endpoint: " << report.endpoint_url << "\n";
    for (const auto& v : report.variants) {
        const auto& s = v.summary;
        std::cout << v.name << ": n=" << s.ok;
        if (s.ok > 0)
            std::cout << " mean=" << s.mean << "ms min=" << s.min << "ms max=" << s.max
                      << "ms median=" << s.median << "ms stddev=" << s.stddev << "ms";
        if (s.timeouts) std::cout << " timeouts=" << s.timeouts;
        if (s.errors) std::cout << " errors=" << s.errors;
        std::cout << "\n";
    }
    std::string base = baseline.empty() && !plan.variants.empty() ? plan.variants[0].name
                                                                  : baseline;
    if (!base.empty() && !report.partial) {
        std::cout << "speedup vs '" << base << "':\n";
        for (const auto& c : compare_variants(report, base)) {
            std::cout << "  " << c.name << ": mean x" << c.mean_ratio << " max x" << c.max_ratio;
            if (c.regression) std::cout << " (regression)";
            std::cout << "\n";
        }
    }
    if (report.partial) {
        std::cerr << "bench aborted: " << report.abort_reason << "\n";
        return 1;
    }
    return 0;
}

// --- serve -----------------------------------------------------------------------

int cmd_serve(const std::string& config_path) {
    EndpointConfig cfg = EndpointConfig::load(config_path);
    Dataset dataset = Dataset::load_manifest(cfg.manifest_path);
    std::cerr << "loaded " << dataset.total_triples() << " triples";
    for (const auto& g : dataset.graph_names())
        std::cerr << " [" << g << ": " << dataset.graph_size(g) << "]";
    std::cerr << "\nserving on " << cfg.bind_address << ":" << cfg.port << "\n";
    Endpoint endpoint(cfg, std::move(dataset));
    endpoint.run();
    return 0;
}

// --- sample ------------------------------------------------------------------------

int cmd_sample(const std::string& manifest, const std::string& type_iri, size_t count,
               uint64_t seed) {
    Dataset d = Dataset::load_manifest(manifest);
    std::vector<RDFTerm> population = d.subjects_of_type(type_iri);
    if (count > population.size()) {
        std::cerr << "warning: requested " << count << " but only " << population.size()
                  << " instances of <" << type_iri << ">\n";
        count = population.size();
    }
    // Hand-rolled Fisher-Yates: identical output for a seed on any platform.
    std::mt19937_64 rng(seed);
    for (size_t i = population.size(); i > 1; --i)
        std::swap(population[i - 1], population[rng() % i]);
    for (size_t i = 0; i < count; ++i) std::cout << population[i].lexical << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SPARQL query analysis, rewriting and benchmarking toolkit"};
    app.require_subcommand(1);

    std::string file, view_path, probe_spec, provenance_spec, report_path;
    std::string target_name;
    std::string separator = ", ";
    std::vector<std::string> heuristics{"minimize-optionals", "localize-graphs", "seqpath",
                                        "alternatives", "aggregate"};
    std::vector<std::string> aggregate_vars;
    bool canonical = false, want_unf = false, as_json = false;

    auto* parse_cmd = app.add_subcommand("parse", "parse a query file");
    parse_cmd->add_option("file", file)->required();
    parse_cmd->add_flag("--canonical", canonical, "print the canonical serialization");

    auto* analyze_cmd = app.add_subcommand("analyze", "well-designedness and complexity");
    analyze_cmd->add_option("file", file)->required();
    analyze_cmd->add_flag("--unf", want_unf, "also print the UNION normal form");
    analyze_cmd->add_flag("--json", as_json, "machine-readable output");

    auto* rewrite_cmd = app.add_subcommand("rewrite", "apply performance heuristics");
    rewrite_cmd->add_option("file", file)->required();
    rewrite_cmd->add_option("--heuristics", heuristics,
                            "ordered list: minimize-optionals localize-graphs seqpath "
                            "alternatives aggregate (or none)")
        ->delimiter(',');
    rewrite_cmd->add_option("--view", view_path, "view spec JSON (minimize-optionals)");
    rewrite_cmd->add_option("--probe", probe_spec, "local:<manifest> or remote:<url>");
    rewrite_cmd->add_option("--provenance", provenance_spec,
                            "provenance map JSON or infer:<manifest>");
    rewrite_cmd->add_option("--target", target_name, "alternatives target: union|filter|values");
    rewrite_cmd->add_option("--aggregate", aggregate_vars, "variables to GROUP_CONCAT")
        ->delimiter(',');
    rewrite_cmd->add_option("--separator", separator, "GROUP_CONCAT separator");
    rewrite_cmd->add_option("--report", report_path, "write the JSON report here");

    std::string plan_path, out_dir = "bench-out", baseline;
    auto* bench_cmd = app.add_subcommand("bench", "run a benchmark plan");
    bench_cmd->add_option("plan", plan_path)->required();
    bench_cmd->add_option("--out", out_dir, "output directory");
    bench_cmd->add_option("--baseline", baseline, "comparison baseline (default: first variant)");

    std::string config_path;
    auto* serve_cmd = app.add_subcommand("serve", "serve a dataset over the SPARQL protocol");
    serve_cmd->add_option("config", config_path)->required();

    std::string manifest, type_iri;
    size_t count = 0;
    uint64_t seed = 0;
    auto* sample_cmd = app.add_subcommand("sample", "sample resources of a type");
    sample_cmd->add_option("manifest", manifest)->required();
    sample_cmd->add_option("--type", type_iri, "rdf:type IRI")->required();
    sample_cmd->add_option("--count", count)->required();
    sample_cmd->add_option("--seed", seed, "RNG seed (default 0)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (parse_cmd->parsed()) return cmd_parse(file, canonical);
        if (analyze_cmd->parsed()) return cmd_analyze(file, want_unf, as_json);
        if (rewrite_cmd->parsed())
            return cmd_rewrite(file, heuristics, rewrite_cmd->count("--heuristics") > 0,
                               view_path, probe_spec, provenance_spec, target_name,
                               aggregate_vars, separator, report_path);
        if (bench_cmd->parsed()) return cmd_bench(plan_path, out_dir, baseline);
        if (serve_cmd->parsed()) return cmd_serve(config_path);
        if (sample_cmd->parsed()) return cmd_sample(manifest, type_iri, count, seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
