#pragma once

#include "agsr/backend.hpp"
#include "agsr/cache.hpp"
#include "agsr/dataset.hpp"
#include "agsr/parse.hpp"
#include "agsr/prompts.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace agsr {

enum class Condition { base, cot, one_shot, cot_sft_backend, fabg };

std::string_view to_string(Condition c);
std::optional<Condition> condition_from_string(std::string_view name);
bool is_baseline(Condition c);
// Baseline template/method token, e.g. cot_sft_backend -> "cot_sft".
std::string baseline_method(Condition c);

enum class SalienceSource { predicted, gold };

struct RunConfig {
    std::filesystem::path dataset_manifest;
    Condition condition = Condition::fabg;
    SalienceSource salience_source = SalienceSource::predicted;
    std::map<std::string, BackendSpec> backends; // roles: final, attribute, attribute_<name>
    std::optional<std::filesystem::path> prompt_dir;
    int concurrency = 1;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir;
    std::optional<std::filesystem::path> cache_dir; // falls back to AGSR_CACHE_DIR

    json source; // config file content, echoed into the run manifest

    void validate() const;
};

// Strict parse: unknown keys are reported with their full key path.
RunConfig run_config_from_json(const json& raw, const std::filesystem::path& config_dir);
RunConfig load_run_config(const std::filesystem::path& path);

struct AttributeOutcome {
    std::string raw;
    std::optional<SalienceDecision> decision;
    std::optional<ParseFailure> failure;
    std::optional<std::string> error; // backend-level failure for this query
    bool cache_hit = false;
};

struct PredictionRecord {
    std::string artwork_id;
    Condition condition = Condition::fabg;
    std::map<AttributeId, AttributeOutcome> attributes; // fabg predicted mode only
    SalienceVector salience; // fabg: bottleneck; baselines: cited attributes
    std::string final_prompt;
    std::string final_raw;
    std::optional<FinalPrediction> final_prediction;
    std::optional<ParseFailure> final_failure;
    std::size_t final_token_count = 0;
    std::int64_t latency_ms = 0; // 0 for fixture/oracle backends
    int cache_hits = 0;
    std::optional<std::string> error; // backend-level per-artwork failure

    AttrSet predicted_attributes() const;
};

json record_to_json(const PredictionRecord& rec);
PredictionRecord record_from_json(const json& raw, int line = 0);

struct RunArtifact {
    json manifest;
    std::vector<PredictionRecord> records;
    bool complete = false;

    std::string config_digest() const { return manifest.value("config_digest", std::string()); }
    std::string dataset_digest() const;
};

RunArtifact load_run_artifact(const std::filesystem::path& dir);

struct AttributeStageResult {
    SalienceVector salience;
    std::map<AttributeId, AttributeOutcome> outcomes;
    std::int64_t latency_ms = 0;
    int cache_hits = 0;
    int backend_failures = 0;
};

// Five independent salience queries, each using its backend's sampling
// params; a parse failure maps to salient=false and stays on the record.
// All five failing at the transport level raises ArtworkStageError.
AttributeStageResult run_attribute_stage(const ArtworkRecord& artwork,
                                         const PromptTemplateSet& templates,
                                         const std::map<AttributeId, Backend*>& backends,
                                         const std::string& request_tag);

struct SparsityDiagnostics {
    double mean_l0 = 0.0;
    std::array<std::size_t, kNumAttributes + 1> distribution{}; // counts for l0 = 0..5
    double flooding_fraction = 0.0;                             // fraction with l0 = 5
    std::size_t n_records = 0;
};

SparsityDiagnostics sparsity_regime_check(const RunArtifact& run);

// Executes a configured run end to end. Resumable: artworks with a completed
// record are skipped on restart; record order follows dataset order.
class Runner {
public:
    explicit Runner(RunConfig config);

    RunArtifact run(bool resume = false);
    // Renders every prompt without issuing queries; writes prompts.jsonl.
    void dry_run();

    const Dataset& dataset() const { return *dataset_; }
    const PromptTemplateSet& templates() const { return templates_; }

private:
    struct RoleBackends {
        std::map<AttributeId, Backend*> attribute;
        Backend* final_agent = nullptr;
    };

    PredictionRecord process_artwork(const ArtworkRecord& artwork, const RoleBackends& roles);
    json build_manifest() const;

    RunConfig config_;
    std::shared_ptr<const Dataset> dataset_;
    PromptTemplateSet templates_;
    std::vector<std::unique_ptr<Backend>> owned_backends_;
    std::shared_ptr<ResponseCache> cache_;
};

} // namespace agsr
