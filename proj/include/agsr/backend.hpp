#pragma once

#include "agsr/attributes.hpp"
#include "agsr/dataset.hpp"
#include "agsr/io.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace agsr {

enum class BackendKind { http, fixture, oracle };

std::string_view to_string(BackendKind k);
std::optional<BackendKind> backend_kind_from_string(std::string_view name);

struct SamplingParams {
    double temperature = 0.0;
    int max_tokens = 512;

    bool operator==(const SamplingParams&) const = default;
};

// Per-attribute salience flip probabilities plus affect corruption. All
// randomness is a counter-based keyed stream, so responses are pure
// functions of (seed, artwork, role).
struct OracleConfig {
    std::map<AttributeId, double> flip_probability; // absent attribute -> 0
    double corrupt_probability = 0.0;
    std::string explanation_template = "Grounded in the marked cues.";
    std::optional<std::uint64_t> seed; // unset -> the run seed

    double flip_for(AttributeId a) const {
        auto it = flip_probability.find(a);
        return it == flip_probability.end() ? 0.0 : it->second;
    }
};

struct BackendSpec {
    BackendKind kind = BackendKind::fixture;
    std::string model_id = "fixture";
    // http
    std::string base_url;                 // falls back to AGSR_API_BASE
    std::string auth_env = "AGSR_API_KEY"; // bearer token env var name
    int timeout_ms = 30000;
    int max_retries = 3;
    int backoff_base_ms = 500;
    int backoff_cap_ms = 30000;
    int requests_per_minute = 0; // 0 = unthrottled
    SamplingParams sampling;
    // fixture
    std::filesystem::path fixture_path;
    // oracle
    OracleConfig oracle;

    void validate() const; // throws ConfigError on kind-specific gaps
};

BackendSpec backend_spec_from_json(const json& raw, const std::string& key_path);

struct QueryRole {
    enum class Kind { attribute_agent, final_agent, baseline };
    Kind kind = Kind::final_agent;
    std::optional<AttributeId> attribute; // attribute_agent only
    std::string method;                   // baseline only ("base", "cot", ...)

    static QueryRole attribute_agent(AttributeId a) { return {Kind::attribute_agent, a, {}}; }
    static QueryRole final_agent() { return {Kind::final_agent, {}, {}}; }
    static QueryRole baseline(std::string method) { return {Kind::baseline, {}, std::move(method)}; }

    std::string serialized() const; // "attribute:color", "final", "baseline:cot"
    static std::optional<QueryRole> parse(std::string_view text);
};

struct QueryRequest {
    std::string request_id;
    std::string artwork_id;
    std::string image_ref;
    std::string prompt;
    QueryRole role;
    SamplingParams sampling;
};

struct TokenUsage {
    int prompt_tokens = 0;
    int completion_tokens = 0;
};

struct QueryResponse {
    std::string text;
    std::optional<TokenUsage> usage;
    std::int64_t latency_ms = 0;
    std::string model_id;
    bool cache_hit = false;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual QueryResponse query(const QueryRequest& req) = 0;
    virtual const BackendSpec& spec() const = 0;
};

// Canned responses keyed by (artwork_id, role). Missing keys raise
// FixtureMiss.
class FixtureBackend : public Backend {
public:
    explicit FixtureBackend(BackendSpec spec);

    QueryResponse query(const QueryRequest& req) override;
    const BackendSpec& spec() const override { return spec_; }

private:
    BackendSpec spec_;
    std::map<std::pair<std::string, std::string>, std::string> responses_;
};

// Emits gold-derived responses with seeded corruption; deterministic for
// identical (spec, request, seed).
class OracleBackend : public Backend {
public:
    OracleBackend(BackendSpec spec, std::shared_ptr<const Dataset> gold);

    QueryResponse query(const QueryRequest& req) override;
    const BackendSpec& spec() const override { return spec_; }

private:
    BackendSpec spec_;
    std::shared_ptr<const Dataset> gold_;
};

std::string oracle_respond(const OracleConfig& cfg, const QueryRequest& req, const Dataset& gold);

// JSON-over-HTTP chat-completion backend. Retries 429/5xx/transport
// failures with exponential backoff and jitter; other 4xx fail immediately.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(BackendSpec spec);

    QueryResponse query(const QueryRequest& req) override;
    const BackendSpec& spec() const override { return spec_; }

    json build_request_body(const QueryRequest& req) const;

private:
    void throttle();

    BackendSpec spec_;
    std::mutex throttle_mutex_;
    std::chrono::steady_clock::time_point next_slot_{};
};

// gold is required only for oracle backends.
std::unique_ptr<Backend> make_backend(const BackendSpec& spec,
                                      std::shared_ptr<const Dataset> gold = nullptr);

} // namespace agsr
