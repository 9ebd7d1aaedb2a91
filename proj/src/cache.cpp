#include "agsr/cache.hpp"

#include "agsr/errors.hpp"
#include "agsr/io.hpp"

#include <sstream>

namespace agsr {

std::string cache_key(const std::string& model_id, const QueryRole& role,
                      const std::string& image_ref, const std::string& prompt,
                      const SamplingParams& sampling) {
    std::ostringstream material;
    material << model_id << '\x1f' << role.serialized() << '\x1f' << fnv1a64_hex(image_ref)
             << '\x1f' << prompt << '\x1f' << sampling.temperature << '\x1f'
             << sampling.max_tokens;
    return fnv1a64_hex(material.str()) + fnv1a64_hex("v2:" + material.str());
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create cache directory " + dir_.string() + ": " + ec.message());
}

std::filesystem::path ResponseCache::entry_path(const std::string& key) const {
    return dir_ / (key + ".json");
}

namespace {

std::string entry_checksum(const json& entry) {
    return fnv1a64_hex(entry.value("key", std::string()) + "\x1f" +
                       entry.value("text", std::string()) + "\x1f" +
                       entry.value("model_id", std::string()));
}

} // namespace

std::optional<QueryResponse> ResponseCache::get(const std::string& key) const {
    const auto path = entry_path(key);
    if (!std::filesystem::exists(path)) return std::nullopt;

    json entry = json::parse(read_file(path), nullptr, false);
    const bool intact = !entry.is_discarded() && entry.is_object() &&
                        entry.value("key", std::string()) == key &&
                        entry.value("checksum", std::string()) == entry_checksum(entry);
    if (!intact) {
        // Checksum mismatch: treat as a miss and quarantine the entry.
        std::error_code ec;
        std::filesystem::rename(path, path.string() + ".corrupt", ec);
        return std::nullopt;
    }

    QueryResponse resp;
    resp.text = entry["text"].get<std::string>();
    resp.model_id = entry.value("model_id", std::string());
    if (entry.contains("usage") && entry["usage"].is_object()) {
        TokenUsage usage;
        usage.prompt_tokens = entry["usage"].value("prompt_tokens", 0);
        usage.completion_tokens = entry["usage"].value("completion_tokens", 0);
        resp.usage = usage;
    }
    resp.latency_ms = 0;
    resp.cache_hit = true;
    return resp;
}

void ResponseCache::put(const std::string& key, const QueryResponse& resp) const {
    json entry;
    entry["key"] = key;
    entry["text"] = resp.text;
    entry["model_id"] = resp.model_id;
    if (resp.usage) {
        entry["usage"] = {{"prompt_tokens", resp.usage->prompt_tokens},
                          {"completion_tokens", resp.usage->completion_tokens}};
    }
    entry["checksum"] = entry_checksum(entry);
    atomic_write_file(entry_path(key), entry.dump());
}

CachingBackend::CachingBackend(std::unique_ptr<Backend> inner, std::shared_ptr<ResponseCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

QueryResponse CachingBackend::query(const QueryRequest& req) {
    const std::string key =
        cache_key(inner_->spec().model_id, req.role, req.image_ref, req.prompt, req.sampling);
    if (auto cached = cache_->get(key)) return *cached;
    QueryResponse resp = inner_->query(req);
    cache_->put(key, resp);
    return resp;
}

} // namespace agsr
