#include "sparqlopt/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "sparqlopt/protocol.hpp"

namespace sparqlopt {

const char* const kWarmupQuery =
    "SELECT ( COUNT ( DISTINCT * ) AS ?count )\n"
    "WHERE {\n"
    "?s ?p ?o\n"
    "}";

// --- plan ---------------------------------------------------------------------

BenchPlan BenchPlan::from_json(const std::string& json_text, const std::string& base_dir) {
    nlohmann::json doc = nlohmann::json::parse(json_text);
    BenchPlan plan;
    plan.endpoint_url = doc.at("endpoint").get<std::string>();
    for (const auto& v : doc.at("variants")) {
        BenchVariant variant;
        variant.name = v.at("name").get<std::string>();
        if (v.contains("template")) {
            variant.query.text = v.at("template").get<std::string>();
        } else {
            std::filesystem::path p = v.at("template_file").get<std::string>();
            if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
            std::ifstream in(p);
            if (!in) throw BenchError("cannot open template file " + p.string());
            std::stringstream buf;
            buf << in.rdbuf();
            variant.query.text = buf.str();
        }
        plan.variants.push_back(std::move(variant));
    }
    for (const auto& r : doc.at("resources"))
        plan.resources.push_back(RDFTerm::iri(r.get<std::string>()));
    for (const auto& s : doc.value("alt_set_sizes", std::vector<size_t>{}))
        plan.alt_set_sizes.push_back(s);
    plan.warmup = doc.value("warmup", true);
    plan.timeout_ms = doc.value("timeout_ms", 30L * 60L * 1000L);
    plan.repetitions = doc.value("repetitions", 1);
    plan.validate();
    return plan;
}

BenchPlan BenchPlan::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BenchError("cannot open bench plan " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str(), std::filesystem::path(path).parent_path().string());
}

void BenchPlan::validate() const {
    if (timeout_ms <= 0) throw BenchError("plan timeout must be positive");
    if (variants.empty()) throw BenchError("plan has no variants");
    if (repetitions < 1) throw BenchError("repetitions must be at least 1");
    for (const auto& r : resources)
        if (!r.is_iri() || !is_absolute_iri(r.lexical))
            throw BenchError("resource is not an absolute IRI: " + r.lexical);
}

std::string BenchPlan::canonical_hash() const {
    // FNV-1a over a canonical rendering; stable across runs and platforms.
    std::string text = endpoint_url + "|" + std::to_string(timeout_ms) + "|" +
                       std::to_string(repetitions) + "|" + (warmup ? "w" : "-");
    for (const auto& v : variants) text += "|" + v.name + "=" + v.query.text;
    for (const auto& r : resources) text += "|" + r.lexical;
    for (size_t s : alt_set_sizes) text += "|" + std::to_string(s);
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// --- statistics ------------------------------------------------------------------

SummaryStats summarize(const std::vector<double>& elapsed_ok) {
    SummaryStats s;
    s.ok = elapsed_ok.size();
    if (elapsed_ok.empty()) return s;
    std::vector<double> sorted = elapsed_ok;
    std::sort(sorted.begin(), sorted.end());
    s.min = sorted.front();
    s.max = sorted.back();
    double sum = 0;
    for (double v : sorted) sum += v;
    s.mean = sum / static_cast<double>(sorted.size());
    double var = 0;
    for (double v : sorted) var += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(var / static_cast<double>(sorted.size()));
    size_t mid = sorted.size() / 2;
    s.median = sorted.size() % 2 ? sorted[mid] : (sorted[mid - 1] + sorted[mid]) / 2.0;
    return s;
}

SummaryStats summarize_samples(const std::vector<BenchSample>& samples) {
    std::vector<double> ok;
    size_t timeouts = 0, errors = 0;
    for (const auto& s : samples) {
        switch (s.status) {
            case SampleStatus::Ok: ok.push_back(s.elapsed_ms); break;
            case SampleStatus::Timeout: ++timeouts; break;
            case SampleStatus::Error: ++errors; break;
        }
    }
    SummaryStats out = summarize(ok);
    out.timeouts = timeouts;
    out.errors = errors;
    return out;
}

// --- HTTP client -------------------------------------------------------------------

namespace {

struct ParsedUrl {
    std::string host;
    int port = 80;
    std::string path = "/sparql";
};

ParsedUrl parse_url(const std::string& url) {
    ParsedUrl out;
    std::string rest = url;
    if (rest.rfind("http://", 0) == 0) rest = rest.substr(7);
    else throw BenchError("endpoint URL must start with http://: " + url);
    size_t slash = rest.find('/');
    std::string hostport = slash == std::string::npos ? rest : rest.substr(0, slash);
    out.path = slash == std::string::npos ? "/sparql" : rest.substr(slash);
    size_t colon = hostport.find(':');
    if (colon == std::string::npos) {
        out.host = hostport;
    } else {
        out.host = hostport.substr(0, colon);
        out.port = std::stoi(hostport.substr(colon + 1));
    }
    if (out.host.empty()) throw BenchError("endpoint URL has no host: " + url);
    return out;
}

std::string iso_timestamp() {
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

const char* status_name(SampleStatus s) {
    switch (s) {
        case SampleStatus::Ok: return "ok";
        case SampleStatus::Timeout: return "timeout";
        case SampleStatus::Error: return "error";
    }
    return "error";
}

struct RequestOutcome {
    SampleStatus status = SampleStatus::Ok;
    double elapsed_ms = 0;
    std::string detail;
    bool connection_failed = false;
};

RequestOutcome timed_request(httplib::Client& client, const ParsedUrl& url,
                             const std::string& query, long timeout_ms, bool expect_results) {
    RequestOutcome out;
    httplib::Params params{{"query", query}};
    httplib::Headers headers{{"Accept", "application/sparql-results+json"}};
    auto start = std::chrono::steady_clock::now();
    httplib::Result res = client.Post(url.path, headers, params);
    auto stop = std::chrono::steady_clock::now();
    out.elapsed_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    if (!res) {
        if (out.elapsed_ms >= static_cast<double>(timeout_ms)) {
            out.status = SampleStatus::Timeout;
            out.detail = "client timeout";
        } else {
            out.status = SampleStatus::Error;
            out.detail = "transport error " + httplib::to_string(res.error());
            out.connection_failed = res.error() == httplib::Error::Connection;
        }
        return out;
    }
    if (res->status != 200) {
        out.status = SampleStatus::Error;
        out.detail = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200);
        return out;
    }
    if (expect_results && res->get_header_value("Content-Type")
                                  .rfind("application/sparql-results+json", 0) == 0) {
        try {
            decode_results_json(res->body);
        } catch (const std::exception& e) {
            out.status = SampleStatus::Error;
            out.detail = std::string("malformed response: ") + e.what();
        }
    }
    return out;
}

}  // namespace

BenchReport run_benchmark(const BenchPlan& plan) {
    plan.validate();
    ParsedUrl url = parse_url(plan.endpoint_url);
    httplib::Client client(url.host, url.port);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(plan.timeout_ms / 1000, (plan.timeout_ms % 1000) * 1000);
    client.set_write_timeout(10, 0);

    BenchReport report;
    report.endpoint_url = plan.endpoint_url;
    report.plan_hash = plan.canonical_hash();
    report.timestamp = iso_timestamp();

    auto abort_run = [&](const std::string& why) {
        report.partial = true;
        report.abort_reason = why;
    };

    if (plan.warmup) {
        RequestOutcome warm = timed_request(client, url, kWarmupQuery, plan.timeout_ms, true);
        if (warm.connection_failed) {
            abort_run("endpoint unreachable during warm-up: " + warm.detail);
            return report;
        }
    }

    // Sequential by design: one in-flight query, mirroring per-query response
    // time measurement.
    for (const auto& variant : plan.variants) {
        VariantResult result;
        result.name = variant.name;
        auto placeholders = template_placeholders(variant.query);
        bool wants_sets = std::find(placeholders.begin(), placeholders.end(), "RESOURCES") !=
                          placeholders.end();

        struct Work {
            std::string label;
            std::string text;
        };
        std::vector<Work> work;
        if (wants_sets) {
            std::vector<size_t> sizes = plan.alt_set_sizes.empty()
                                            ? std::vector<size_t>{plan.resources.size()}
                                            : plan.alt_set_sizes;
            for (size_t size : sizes) {
                for (size_t start = 0; start + size <= plan.resources.size(); start += size) {
                    std::string list;
                    for (size_t i = start; i < start + size; ++i) {
                        if (!list.empty()) list += " ";
                        list += to_string(plan.resources[i]);
                    }
                    QueryTemplate t = variant.query;
                    // RESOURCES expands to a space-separated IRI list.
                    std::string text = t.text;
                    size_t at;
                    while ((at = text.find("[RESOURCES]")) != std::string::npos)
                        text.replace(at, 11, list);
                    work.push_back({"set" + std::to_string(size) + "#" +
                                        std::to_string(start / size),
                                    text});
                }
            }
        } else {
            for (const auto& r : plan.resources) {
                std::map<std::string, RDFTerm> bindings;
                for (const auto& name : placeholders) bindings[name] = r;
                work.push_back({r.lexical, instantiate_template(variant.query, bindings)});
            }
            if (placeholders.empty() && plan.resources.empty())
                work.push_back({"-", variant.query.text});
        }

        bool aborted = false;
        for (const auto& job : work) {
            for (int rep = 0; rep < plan.repetitions; ++rep) {
                RequestOutcome outcome =
                    timed_request(client, url, job.text, plan.timeout_ms, false);
                BenchSample sample;
                sample.variant = variant.name;
                sample.resource = job.label;
                sample.elapsed_ms = outcome.elapsed_ms;
                sample.status = outcome.status;
                sample.detail = outcome.detail;
                result.samples.push_back(std::move(sample));
                if (outcome.connection_failed) {
                    abort_run("endpoint unreachable: " + outcome.detail);
                    aborted = true;
                    break;
                }
            }
            if (aborted) break;
        }
        result.summary = summarize_samples(result.samples);
        report.variants.push_back(std::move(result));
        if (report.partial) break;
    }
    return report;
}

std::vector<VariantComparison> compare_variants(const BenchReport& report,
                                                const std::string& baseline) {
    const VariantResult* base = nullptr;
    for (const auto& v : report.variants)
        if (v.name == baseline) base = &v;
    if (!base) throw BenchError("unknown baseline variant '" + baseline + "'");
    std::vector<VariantComparison> out;
    for (const auto& v : report.variants) {
        VariantComparison c;
        c.name = v.name;
        c.mean_ratio = v.summary.mean > 0 ? base->summary.mean / v.summary.mean : 0;
        c.max_ratio = v.summary.max > 0 ? base->summary.max / v.summary.max : 0;
        c.regression = c.mean_ratio < 1.0;
        out.push_back(std::move(c));
    }
    return out;
}

// --- report output -------------------------------------------------------------------

namespace {

std::string fmt_ms(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

nlohmann::json summary_json(const SummaryStats& s) {
    nlohmann::json out;
    out["ok"] = s.ok;
    out["timeouts"] = s.timeouts;
    out["errors"] = s.errors;
    if (s.ok > 0) {
        out["mean_ms"] = s.mean;
        out["min_ms"] = s.min;
        out["max_ms"] = s.max;
        out["stddev_ms"] = s.stddev;
        out["median_ms"] = s.median;
    }
    return out;
}

}  // namespace

std::string BenchReport::to_json() const {
    nlohmann::json doc;
    doc["endpoint"] = endpoint_url;
    doc["plan_hash"] = plan_hash;
    doc["timestamp"] = timestamp;
    doc["partial"] = partial;
    if (partial) doc["abort_reason"] = abort_reason;
    nlohmann::json vs = nlohmann::json::array();
    for (const auto& v : variants) {
        nlohmann::json vj;
        vj["name"] = v.name;
        vj["summary"] = summary_json(v.summary);
        nlohmann::json samples = nlohmann::json::array();
        for (const auto& s : v.samples) {
            nlohmann::json sj;
            sj["resource"] = s.resource;
            sj["elapsed_ms"] = s.elapsed_ms;
            sj["status"] = status_name(s.status);
            if (!s.detail.empty()) sj["detail"] = s.detail;
            samples.push_back(std::move(sj));
        }
        vj["samples"] = std::move(samples);
        vs.push_back(std::move(vj));
    }
    doc["variants"] = std::move(vs);
    return doc.dump(2) + "\n";
}

std::string BenchReport::to_csv() const {
    std::string out = "variant,resource,elapsed_ms,status\n";
    for (const auto& v : variants)
        for (const auto& s : v.samples)
            out += "\"" + s.variant + "\",\"" + s.resource + "\"," + fmt_ms(s.elapsed_ms) + "," +
                   status_name(s.status) + "\n";
    return out;
}

std::string BenchReport::to_errorbars() const {
    std::string out = "# variant mean_ms min_ms max_ms\n";
    for (const auto& v : variants) {
        if (v.summary.ok == 0) continue;
        out += "\"" + v.name + "\" " + fmt_ms(v.summary.mean) + " " + fmt_ms(v.summary.min) +
               " " + fmt_ms(v.summary.max) + "\n";
    }
    return out;
}

}  // namespace sparqlopt
