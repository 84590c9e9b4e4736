#pragma once

#include <memory>
#include <string>

#include "sparqlopt/dataset.hpp"

namespace sparqlopt {

struct EndpointConfig {
    std::string bind_address = "127.0.0.1";
    int port = 8089;                  // 0 = pick a free port
    std::string manifest_path;
    bool bag_semantics = false;
    int request_timeout_ms = 30000;

    static EndpointConfig from_json(const std::string& json_text, const std::string& base_dir);
    static EndpointConfig load(const std::string& path);
};

/// Minimal read-only SPARQL protocol endpoint over one immutable dataset.
/// GET with ?query= and POST (form-encoded or application/sparql-query);
/// SELECT/ASK answer as sparql-results+json, CONSTRUCT as N-Triples.
class Endpoint {
public:
    Endpoint(const EndpointConfig& cfg, Dataset dataset);
    ~Endpoint();

    Endpoint(const Endpoint&) = delete;
    Endpoint& operator=(const Endpoint&) = delete;

    /// Start serving on a background thread; returns the bound port.
    int start();
    /// Serve on the calling thread until stop() or process exit.
    void run();
    void stop();

    const Dataset& dataset() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace sparqlopt
