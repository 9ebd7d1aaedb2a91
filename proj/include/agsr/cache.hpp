#pragma once

#include "agsr/backend.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace agsr {

// Stable content key: hash of (model_id, role, image_ref digest, prompt,
// sampling params). Editing the prompt or sampling invalidates the entry.
std::string cache_key(const std::string& model_id, const QueryRole& role,
                      const std::string& image_ref, const std::string& prompt,
                      const SamplingParams& sampling);

// Content-addressed files, one JSON document per entry with a checksum
// field. Writes are atomic (write-temp-then-rename); concurrent readers are
// safe and last-writer-wins on identical keys.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    std::optional<QueryResponse> get(const std::string& key) const;
    void put(const std::string& key, const QueryResponse& resp) const;

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path entry_path(const std::string& key) const;
    std::filesystem::path dir_;
};

// Wraps a backend with read-through caching.
class CachingBackend : public Backend {
public:
    CachingBackend(std::unique_ptr<Backend> inner, std::shared_ptr<ResponseCache> cache);

    QueryResponse query(const QueryRequest& req) override;
    const BackendSpec& spec() const override { return inner_->spec(); }

private:
    std::unique_ptr<Backend> inner_;
    std::shared_ptr<ResponseCache> cache_;
};

} // namespace agsr
