#include "sparqlopt/endpoint.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "sparqlopt/algebra.hpp"
#include "sparqlopt/parser.hpp"
#include "sparqlopt/protocol.hpp"

namespace sparqlopt {

EndpointConfig EndpointConfig::from_json(const std::string& json_text,
                                         const std::string& base_dir) {
    nlohmann::json doc = nlohmann::json::parse(json_text);
    EndpointConfig cfg;
    cfg.bind_address = doc.value("bind", "127.0.0.1");
    cfg.port = doc.value("port", 8089);
    std::filesystem::path manifest = doc.at("manifest").get<std::string>();
    if (manifest.is_relative() && !base_dir.empty())
        manifest = std::filesystem::path(base_dir) / manifest;
    cfg.manifest_path = manifest.string();
    cfg.bag_semantics = doc.value("semantics", "set") == "bag";
    cfg.request_timeout_ms = doc.value("request_timeout_ms", 30000);
    return cfg;
}

EndpointConfig EndpointConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open endpoint config " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str(), std::filesystem::path(path).parent_path().string());
}

struct Endpoint::Impl {
    EndpointConfig cfg;
    Dataset dataset;
    httplib::Server server;
    std::thread worker;

    Impl(EndpointConfig c, Dataset d) : cfg(std::move(c)), dataset(std::move(d)) {
        server.Get("/sparql", [this](const httplib::Request& req, httplib::Response& res) {
            handle(req.get_param_value("query"), res);
        });
        auto post = [this](const httplib::Request& req, httplib::Response& res) {
            std::string query;
            if (req.has_param("query"))
                query = req.get_param_value("query");
            else
                query = req.body;
            handle(query, res);
        };
        server.Post("/sparql", post);
        server.Get("/", [this](const httplib::Request& req, httplib::Response& res) {
            handle(req.get_param_value("query"), res);
        });
        server.Post("/", post);
    }

    void handle(const std::string& text, httplib::Response& res) {
        if (text.empty()) {
            res.status = 400;
            res.set_content("missing query parameter", "text/plain");
            return;
        }
        Query q;
        try {
            q = parse_query(text);
        } catch (const ParseError& e) {
            res.status = 400;
            res.set_content(std::string("parse error: ") + e.what(), "text/plain");
            return;
        }
        EvalOptions opts;
        opts.bag_semantics = cfg.bag_semantics;
        opts.deadline = std::chrono::steady_clock::now() +
                        std::chrono::milliseconds(cfg.request_timeout_ms);
        try {
            QueryResult result = evaluate_query(q, dataset, opts);
            if (const auto* triples = std::get_if<std::vector<Triple>>(&result)) {
                res.set_content(triples_to_ntriples(*triples), "application/n-triples");
            } else {
                res.set_content(results_to_json(result), "application/sparql-results+json");
            }
        } catch (const EvalTimeout&) {
            res.status = 408;
            res.set_content("query evaluation exceeded the request timeout", "text/plain");
        } catch (const std::exception& e) {
            res.status = 500;
            res.set_content(std::string("evaluation error: ") + e.what(), "text/plain");
        }
    }
};

Endpoint::Endpoint(const EndpointConfig& cfg, Dataset dataset)
    : impl_(std::make_unique<Impl>(cfg, std::move(dataset))) {}

Endpoint::~Endpoint() { stop(); }

int Endpoint::start() {
    int port = impl_->cfg.port;
    if (port == 0) {
        port = impl_->server.bind_to_any_port(impl_->cfg.bind_address);
        if (port <= 0) throw std::runtime_error("endpoint: cannot bind to any port");
    } else {
        if (!impl_->server.bind_to_port(impl_->cfg.bind_address, port))
            throw std::runtime_error("endpoint: cannot bind to port " + std::to_string(port));
    }
    impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return port;
}

void Endpoint::run() {
    if (!impl_->server.listen(impl_->cfg.bind_address, impl_->cfg.port))
        throw std::runtime_error("endpoint: cannot listen on " + impl_->cfg.bind_address + ":" +
                                 std::to_string(impl_->cfg.port));
}

void Endpoint::stop() {
    if (impl_->server.is_running()) impl_->server.stop();
    if (impl_->worker.joinable()) impl_->worker.join();
}

const Dataset& Endpoint::dataset() const { return impl_->dataset; }

}  // namespace sparqlopt
