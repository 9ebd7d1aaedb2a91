#include "agsr/backend.hpp"

#include "agsr/errors.hpp"
#include "agsr/parse.hpp"
#include "agsr/rng.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <set>
#include <thread>

namespace agsr {

std::string_view to_string(BackendKind k) {
    switch (k) {
        case BackendKind::http: return "http";
        case BackendKind::fixture: return "fixture";
        case BackendKind::oracle: return "oracle";
    }
    return "fixture";
}

std::optional<BackendKind> backend_kind_from_string(std::string_view name) {
    if (name == "http") return BackendKind::http;
    if (name == "fixture") return BackendKind::fixture;
    if (name == "oracle") return BackendKind::oracle;
    return std::nullopt;
}

void BackendSpec::validate() const {
    if (timeout_ms <= 0) throw ConfigError("backend timeout_ms must be > 0");
    if (max_retries < 0) throw ConfigError("backend max_retries must be >= 0");
    if (kind == BackendKind::fixture && fixture_path.empty()) {
        throw ConfigError("fixture backend needs fixture_path");
    }
    if (kind == BackendKind::oracle) {
        for (const auto& [a, p] : oracle.flip_probability) {
            if (p < 0.0 || p > 1.0) {
                throw ConfigError("oracle flip probability for " + std::string(to_string(a)) +
                                  " must be in [0,1]");
            }
        }
        if (oracle.corrupt_probability < 0.0 || oracle.corrupt_probability > 1.0) {
            throw ConfigError("oracle corrupt_probability must be in [0,1]");
        }
    }
}

BackendSpec backend_spec_from_json(const json& raw, const std::string& key_path) {
    if (!raw.is_object()) throw ConfigError(key_path + ": backend spec must be an object");
    static const std::set<std::string> known = {
        "kind", "model_id", "base_url", "auth_env", "timeout_ms", "max_retries",
        "backoff_base_ms", "backoff_cap_ms", "requests_per_minute",
        "temperature", "max_tokens", "fixture_path", "oracle"};
    for (auto it = raw.begin(); it != raw.end(); ++it) {
        if (!known.count(it.key())) throw ConfigError(key_path + "." + it.key() + ": unknown key");
    }
    BackendSpec spec;
    const std::string kind_name = raw.value("kind", std::string("fixture"));
    auto kind = backend_kind_from_string(kind_name);
    if (!kind) throw ConfigError(key_path + ".kind: unknown backend kind \"" + kind_name + "\"");
    spec.kind = *kind;
    spec.model_id = raw.value("model_id", kind_name);
    spec.base_url = raw.value("base_url", std::string());
    spec.auth_env = raw.value("auth_env", std::string("AGSR_API_KEY"));
    spec.timeout_ms = raw.value("timeout_ms", 30000);
    spec.max_retries = raw.value("max_retries", 3);
    spec.backoff_base_ms = raw.value("backoff_base_ms", 500);
    spec.backoff_cap_ms = raw.value("backoff_cap_ms", 30000);
    spec.requests_per_minute = raw.value("requests_per_minute", 0);
    spec.sampling.temperature = raw.value("temperature", 0.0);
    spec.sampling.max_tokens = raw.value("max_tokens", 512);
    if (raw.contains("fixture_path")) spec.fixture_path = raw["fixture_path"].get<std::string>();
    if (raw.contains("oracle")) {
        const json& oc = raw["oracle"];
        static const std::set<std::string> known_oracle = {
            "flip_probability", "corrupt_probability", "explanation_template", "seed"};
        for (auto it = oc.begin(); it != oc.end(); ++it) {
            if (!known_oracle.count(it.key())) {
                throw ConfigError(key_path + ".oracle." + it.key() + ": unknown key");
            }
        }
        if (oc.contains("flip_probability")) {
            if (oc["flip_probability"].is_number()) {
                for (auto a : all_attributes()) {
                    spec.oracle.flip_probability[a] = oc["flip_probability"].get<double>();
                }
            } else if (oc["flip_probability"].is_object()) {
                for (auto it = oc["flip_probability"].begin(); it != oc["flip_probability"].end(); ++it) {
                    auto a = attribute_from_string(it.key());
                    if (!a) {
                        throw ConfigError(key_path + ".oracle.flip_probability." + it.key() +
                                          ": unknown attribute");
                    }
                    spec.oracle.flip_probability[*a] = it.value().get<double>();
                }
            } else {
                throw ConfigError(key_path + ".oracle.flip_probability: number or object expected");
            }
        }
        spec.oracle.corrupt_probability = oc.value("corrupt_probability", 0.0);
        if (oc.contains("explanation_template")) {
            spec.oracle.explanation_template = oc["explanation_template"].get<std::string>();
        }
        if (oc.contains("seed")) spec.oracle.seed = oc["seed"].get<std::uint64_t>();
    }
    spec.validate();
    return spec;
}

std::string QueryRole::serialized() const {
    switch (kind) {
        case Kind::attribute_agent:
            return "attribute:" + std::string(to_string(attribute.value_or(AttributeId::color)));
        case Kind::final_agent:
            return "final";
        case Kind::baseline:
            return "baseline:" + method;
    }
    return "final";
}

std::optional<QueryRole> QueryRole::parse(std::string_view text) {
    if (text == "final") return final_agent();
    constexpr std::string_view attr_prefix = "attribute:";
    constexpr std::string_view base_prefix = "baseline:";
    if (text.substr(0, attr_prefix.size()) == attr_prefix) {
        auto a = attribute_from_string(text.substr(attr_prefix.size()));
        if (!a) return std::nullopt;
        return attribute_agent(*a);
    }
    if (text.substr(0, base_prefix.size()) == base_prefix) {
        return baseline(std::string(text.substr(base_prefix.size())));
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Fixture backend

FixtureBackend::FixtureBackend(BackendSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    for (const auto& rec : read_jsonl(spec_.fixture_path)) {
        if (!rec.value.contains("artwork_id") || !rec.value.contains("role") ||
            !rec.value.contains("text")) {
            throw SchemaError("fixture row needs artwork_id, role, text", rec.line);
        }
        responses_[{rec.value["artwork_id"].get<std::string>(),
                    rec.value["role"].get<std::string>()}] =
            rec.value["text"].get<std::string>();
    }
}

QueryResponse FixtureBackend::query(const QueryRequest& req) {
    auto it = responses_.find({req.artwork_id, req.role.serialized()});
    if (it == responses_.end()) {
        throw FixtureMiss("no fixture for (" + req.artwork_id + ", " + req.role.serialized() + ")");
    }
    QueryResponse resp;
    resp.text = it->second;
    resp.latency_ms = 0;
    resp.model_id = spec_.model_id;
    return resp;
}

// ---------------------------------------------------------------------------
// Oracle backend

namespace {

std::string corrupt_or_keep(KeyedRng& rng, double q, const std::string& truth,
                            const std::vector<std::string>& pool) {
    const bool corrupt = rng.bernoulli(q);
    if (!corrupt || pool.size() < 2) return truth;
    // Uniformly chosen wrong label.
    std::vector<std::string> wrong;
    for (const auto& l : pool) {
        if (l != truth) wrong.push_back(l);
    }
    return wrong[static_cast<std::size_t>(rng.next_below(wrong.size()))];
}

} // namespace

std::string oracle_respond(const OracleConfig& cfg, const QueryRequest& req, const Dataset& gold) {
    const ArtworkRecord* artwork = gold.find(req.artwork_id);
    if (artwork == nullptr) {
        throw UnknownArtwork("artwork \"" + req.artwork_id + "\" not in gold source");
    }

    if (req.role.kind == QueryRole::Kind::attribute_agent) {
        const AttributeId attr = req.role.attribute.value();
        auto it = gold.gold_salience.find(req.artwork_id);
        if (it == gold.gold_salience.end()) {
            throw UnknownArtwork("artwork \"" + req.artwork_id + "\" has no gold salience");
        }
        bool salient = it->second.get(attr);
        KeyedRng rng(cfg.seed.value_or(0), "salience:" + req.artwork_id + ":" + std::string(to_string(attr)));
        if (rng.bernoulli(cfg.flip_for(attr))) salient = !salient;
        SalienceDecision d;
        d.attribute = attr;
        d.salient = salient;
        return serialize_salience_decision(d);
    }

    // Final/baseline role: canonical final JSON around the gold affect.
    if (!artwork->gold_affect) {
        throw UnknownArtwork("artwork \"" + req.artwork_id + "\" has no gold affect labels");
    }
    const AffectLabels& affect = *artwork->gold_affect;
    const double q = cfg.corrupt_probability;

    FinalPrediction p;
    {
        KeyedRng rng(cfg.seed.value_or(0), "emotion:" + req.artwork_id);
        p.emotion = corrupt_or_keep(rng, q, affect.emotion, gold.vocabulary.labels());
    }
    {
        KeyedRng rng(cfg.seed.value_or(0), "arousal:" + req.artwork_id);
        p.arousal = corrupt_or_keep(rng, q, affect.arousal, {"high", "low"});
    }
    {
        KeyedRng rng(cfg.seed.value_or(0), "valence:" + req.artwork_id);
        p.valence = corrupt_or_keep(rng, q, affect.valence, {"positive", "negative"});
    }
    p.explanation = cfg.explanation_template;
    if (req.role.kind == QueryRole::Kind::baseline) {
        auto it = gold.gold_salience.find(req.artwork_id);
        if (it != gold.gold_salience.end()) p.cited_attributes = it->second.support();
    }
    return serialize_final_prediction(p);
}

OracleBackend::OracleBackend(BackendSpec spec, std::shared_ptr<const Dataset> gold)
    : spec_(std::move(spec)), gold_(std::move(gold)) {
    spec_.validate();
    if (!gold_) throw ConfigError("oracle backend needs a gold dataset");
}

QueryResponse OracleBackend::query(const QueryRequest& req) {
    QueryResponse resp;
    resp.text = oracle_respond(spec_.oracle, req, *gold_);
    resp.latency_ms = 0;
    resp.model_id = spec_.model_id;
    return resp;
}

// ---------------------------------------------------------------------------
// HTTP backend

namespace {

struct SplitUrl {
    std::string host; // scheme://authority
    std::string path_prefix;
};

SplitUrl split_base_url(const std::string& base_url) {
    const std::size_t scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("base_url must include a scheme: " + base_url);
    }
    const std::size_t path_start = base_url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {base_url, ""};
    std::string prefix = base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {base_url.substr(0, path_start), prefix};
}

bool retryable_status(int status) {
    return status == 429 || status >= 500;
}

} // namespace

HttpBackend::HttpBackend(BackendSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    if (spec_.base_url.empty()) {
        if (const char* base = std::getenv("AGSR_API_BASE")) spec_.base_url = base;
    }
    if (spec_.base_url.empty()) {
        throw ConfigError("http backend needs base_url or AGSR_API_BASE");
    }
}

json HttpBackend::build_request_body(const QueryRequest& req) const {
    json content = json::array();
    content.push_back({{"type", "text"}, {"text", req.prompt}});
    if (!req.image_ref.empty()) {
        content.push_back({{"type", "image_url"}, {"image_url", {{"url", req.image_ref}}}});
    }
    json body;
    body["model"] = spec_.model_id;
    body["messages"] = json::array({json{{"role", "user"}, {"content", std::move(content)}}});
    body["temperature"] = req.sampling.temperature;
    body["max_tokens"] = req.sampling.max_tokens;
    return body;
}

void HttpBackend::throttle() {
    if (spec_.requests_per_minute <= 0) return;
    const auto interval =
        std::chrono::milliseconds(60000 / std::max(1, spec_.requests_per_minute));
    std::chrono::steady_clock::time_point wait_until;
    {
        std::lock_guard<std::mutex> lock(throttle_mutex_);
        const auto now = std::chrono::steady_clock::now();
        wait_until = std::max(next_slot_, now);
        next_slot_ = wait_until + interval;
    }
    std::this_thread::sleep_until(wait_until);
}

QueryResponse HttpBackend::query(const QueryRequest& req) {
    const char* token = std::getenv(spec_.auth_env.c_str());
    if (token == nullptr || *token == '\0') {
        throw AuthError("bearer token env var " + spec_.auth_env + " is not set");
    }

    const SplitUrl url = split_base_url(spec_.base_url);
    const std::string path = url.path_prefix + "/chat/completions";
    const std::string body = build_request_body(req).dump();

    httplib::Client client(url.host);
    client.set_connection_timeout(std::chrono::milliseconds(spec_.timeout_ms));
    client.set_read_timeout(std::chrono::milliseconds(spec_.timeout_ms));
    client.set_write_timeout(std::chrono::milliseconds(spec_.timeout_ms));
    client.set_default_headers({{"Authorization", std::string("Bearer ") + token}});

    KeyedRng jitter(fnv1a64(req.request_id), "backoff");
    const auto start = std::chrono::steady_clock::now();
    std::string last_error;
    for (int attempt = 0; attempt <= spec_.max_retries; ++attempt) {
        if (attempt > 0) {
            // Exponential backoff with jitter, capped.
            const double base = static_cast<double>(spec_.backoff_base_ms) *
                                static_cast<double>(1LL << std::min(attempt - 1, 20));
            const double capped = std::min(base, static_cast<double>(spec_.backoff_cap_ms));
            const double jittered = capped * (0.5 + jitter.next_double() * 0.5);
            std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<std::int64_t>(jittered)));
        }
        throttle();

        auto res = client.Post(path, body, "application/json");
        if (!res) {
            last_error = "transport failure: " + httplib::to_string(res.error());
            continue; // retryable
        }
        if (res->status == 401 || res->status == 403) {
            throw AuthError("upstream rejected credentials (status " + std::to_string(res->status) + ")");
        }
        if (retryable_status(res->status)) {
            last_error = "status " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw TransportError("upstream status " + std::to_string(res->status) + ": " + res->body);
        }

        json payload = json::parse(res->body, nullptr, false);
        if (payload.is_discarded() || !payload.contains("choices") || payload["choices"].empty() ||
            !payload["choices"][0].contains("message") ||
            !payload["choices"][0]["message"].contains("content")) {
            throw MalformedUpstream("wire payload does not match chat-completion shape");
        }
        QueryResponse resp;
        resp.text = payload["choices"][0]["message"]["content"].get<std::string>();
        if (payload.contains("usage") && payload["usage"].is_object()) {
            TokenUsage usage;
            usage.prompt_tokens = payload["usage"].value("prompt_tokens", 0);
            usage.completion_tokens = payload["usage"].value("completion_tokens", 0);
            resp.usage = usage;
        }
        resp.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::steady_clock::now() - start)
                              .count();
        resp.model_id = payload.value("model", spec_.model_id);
        return resp;
    }
    if (last_error.rfind("status 429", 0) == 0) {
        throw RateLimitedError("rate limited after " + std::to_string(spec_.max_retries + 1) +
                               " attempts");
    }
    throw TransportError("request failed after " + std::to_string(spec_.max_retries + 1) +
                         " attempts: " + last_error);
}

std::unique_ptr<Backend> make_backend(const BackendSpec& spec, std::shared_ptr<const Dataset> gold) {
    switch (spec.kind) {
        case BackendKind::fixture: return std::make_unique<FixtureBackend>(spec);
        case BackendKind::oracle: return std::make_unique<OracleBackend>(spec, std::move(gold));
        case BackendKind::http: return std::make_unique<HttpBackend>(spec);
    }
    throw ConfigError("unknown backend kind");
}

} // namespace agsr
