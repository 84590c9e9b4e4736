#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparqlopt/template.hpp"

namespace sparqlopt {

class BenchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BenchVariant {
    std::string name;
    QueryTemplate query;  // [RESOURCE] marks the sampled resource slot
};

struct BenchPlan {
    std::string endpoint_url;
    std::vector<BenchVariant> variants;
    std::vector<RDFTerm> resources;         // IRIs substituted for [RESOURCE]
    std::vector<size_t> alt_set_sizes;      // chunk sizes for [RESOURCES] lists
    bool warmup = true;
    long timeout_ms = 30 * 60 * 1000;       // 30 minutes
    int repetitions = 1;

    static BenchPlan from_json(const std::string& json_text, const std::string& base_dir);
    static BenchPlan load(const std::string& path);
    void validate() const;
    std::string canonical_hash() const;
};

enum class SampleStatus { Ok, Timeout, Error };

struct BenchSample {
    std::string variant;
    std::string resource;
    double elapsed_ms = 0;
    SampleStatus status = SampleStatus::Ok;
    std::string detail;  // error text when status != Ok
};

struct SummaryStats {
    size_t ok = 0;
    size_t timeouts = 0;
    size_t errors = 0;
    double mean = 0;
    double min = 0;
    double max = 0;
    double stddev = 0;
    double median = 0;
};

struct VariantResult {
    std::string name;
    std::vector<BenchSample> samples;
    SummaryStats summary;
};

struct BenchReport {
    std::string endpoint_url;
    std::string plan_hash;
    std::string timestamp;  // ISO-8601; excluded from determinism comparisons
    bool partial = false;   // endpoint became unreachable mid-run
    std::string abort_reason;
    std::vector<VariantResult> variants;

    std::string to_json() const;
    std::string to_csv() const;  // variant,resource,elapsed_ms,status
    /// One `variant mean min max` row per variant, for error-bar plots.
    std::string to_errorbars() const;
};

/// mean/min/max/stddev/median over the ok samples only.
SummaryStats summarize(const std::vector<double>& elapsed_ok);
SummaryStats summarize_samples(const std::vector<BenchSample>& samples);

/// The §-style protocol: optional warm-up, then one variant at a time,
/// sequentially, timing each instantiated query from request start to full
/// response body over the SPARQL HTTP protocol.
BenchReport run_benchmark(const BenchPlan& plan);

struct VariantComparison {
    std::string name;
    double mean_ratio = 0;  // baseline mean / variant mean (>1 = faster)
    double max_ratio = 0;
    bool regression = false;
};

/// Speedups of every variant against the named baseline.
std::vector<VariantComparison> compare_variants(const BenchReport& report,
                                                const std::string& baseline);

/// The exact warm-up query text.
extern const char* const kWarmupQuery;

}  // namespace sparqlopt
