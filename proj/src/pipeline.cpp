#include "agsr/pipeline.hpp"

#include "agsr/errors.hpp"
#include "agsr/metrics.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

namespace agsr {

std::string_view to_string(Condition c) {
    switch (c) {
        case Condition::base: return "base";
        case Condition::cot: return "cot";
        case Condition::one_shot: return "one_shot";
        case Condition::cot_sft_backend: return "cot_sft_backend";
        case Condition::fabg: return "fabg";
    }
    return "fabg";
}

std::optional<Condition> condition_from_string(std::string_view name) {
    for (auto c : {Condition::base, Condition::cot, Condition::one_shot,
                   Condition::cot_sft_backend, Condition::fabg}) {
        if (to_string(c) == name) return c;
    }
    return std::nullopt;
}

bool is_baseline(Condition c) {
    return c != Condition::fabg;
}

std::string baseline_method(Condition c) {
    switch (c) {
        case Condition::base: return "base";
        case Condition::cot: return "cot";
        case Condition::one_shot: return "one_shot";
        case Condition::cot_sft_backend: return "cot_sft";
        case Condition::fabg: break;
    }
    throw ConfigError("fabg is not a baseline condition");
}

void RunConfig::validate() const {
    if (concurrency < 1) throw ConfigError("limits.concurrency must be >= 1");
    if (salience_source == SalienceSource::gold && condition != Condition::fabg) {
        throw ConfigError("condition.salience_source: gold salience is only usable with fabg");
    }
    if (!backends.count("final")) throw ConfigError("backends.final: required role missing");
    if (condition == Condition::fabg && salience_source == SalienceSource::predicted) {
        for (auto a : all_attributes()) {
            const std::string key = "attribute_" + std::string(to_string(a));
            if (!backends.count(key) && !backends.count("attribute")) {
                throw ConfigError("backends.attribute: fabg needs an attribute-role backend");
            }
        }
    }
}

RunConfig run_config_from_json(const json& raw, const std::filesystem::path& config_dir) {
    if (!raw.is_object()) throw ConfigError("run config must be a JSON object");
    static const std::set<std::string> known_top = {"dataset",  "condition", "backends", "prompts",
                                                    "limits",   "seed",      "cache_dir",
                                                    "output_dir"};
    for (auto it = raw.begin(); it != raw.end(); ++it) {
        if (!known_top.count(it.key())) throw ConfigError(it.key() + ": unknown key");
    }
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_absolute() ? path : config_dir / path;
    };

    RunConfig cfg;
    cfg.source = raw;

    if (!raw.contains("dataset") || !raw["dataset"].is_object() ||
        !raw["dataset"].contains("manifest")) {
        throw ConfigError("dataset.manifest: required key missing");
    }
    for (auto it = raw["dataset"].begin(); it != raw["dataset"].end(); ++it) {
        if (it.key() != "manifest") throw ConfigError("dataset." + it.key() + ": unknown key");
    }
    cfg.dataset_manifest = resolve(raw["dataset"]["manifest"].get<std::string>());

    if (!raw.contains("condition") || !raw["condition"].is_object() ||
        !raw["condition"].contains("name")) {
        throw ConfigError("condition.name: required key missing");
    }
    for (auto it = raw["condition"].begin(); it != raw["condition"].end(); ++it) {
        if (it.key() != "name" && it.key() != "salience_source") {
            throw ConfigError("condition." + it.key() + ": unknown key");
        }
    }
    const std::string cname = raw["condition"]["name"].get<std::string>();
    auto condition = condition_from_string(cname);
    if (!condition) throw ConfigError("condition.name: unknown condition \"" + cname + "\"");
    cfg.condition = *condition;
    const std::string source_name =
        raw["condition"].value("salience_source", std::string("predicted"));
    if (source_name == "predicted") {
        cfg.salience_source = SalienceSource::predicted;
    } else if (source_name == "gold") {
        cfg.salience_source = SalienceSource::gold;
    } else {
        throw ConfigError("condition.salience_source: expected predicted|gold");
    }

    if (!raw.contains("backends") || !raw["backends"].is_object()) {
        throw ConfigError("backends: required section missing");
    }
    for (auto it = raw["backends"].begin(); it != raw["backends"].end(); ++it) {
        const std::string& role = it.key();
        const bool known_role = role == "final" || role == "attribute" ||
                                (role.rfind("attribute_", 0) == 0 &&
                                 attribute_from_string(role.substr(std::string("attribute_").size())));
        if (!known_role) throw ConfigError("backends." + role + ": unknown role");
        BackendSpec spec = backend_spec_from_json(it.value(), "backends." + role);
        if (!spec.fixture_path.empty() && spec.fixture_path.is_relative()) {
            spec.fixture_path = config_dir / spec.fixture_path;
        }
        cfg.backends[role] = std::move(spec);
    }

    if (raw.contains("prompts")) {
        for (auto it = raw["prompts"].begin(); it != raw["prompts"].end(); ++it) {
            if (it.key() != "dir") throw ConfigError("prompts." + it.key() + ": unknown key");
        }
        if (raw["prompts"].contains("dir")) {
            cfg.prompt_dir = resolve(raw["prompts"]["dir"].get<std::string>());
        }
    }
    if (raw.contains("limits")) {
        for (auto it = raw["limits"].begin(); it != raw["limits"].end(); ++it) {
            if (it.key() != "concurrency") throw ConfigError("limits." + it.key() + ": unknown key");
        }
        cfg.concurrency = raw["limits"].value("concurrency", 1);
    }
    cfg.seed = raw.value("seed", 0ULL);
    if (raw.contains("cache_dir")) cfg.cache_dir = resolve(raw["cache_dir"].get<std::string>());
    if (raw.contains("output_dir")) cfg.output_dir = resolve(raw["output_dir"].get<std::string>());
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    json raw = json::parse(read_file(path), nullptr, false);
    if (raw.is_discarded()) throw ConfigError("invalid JSON in " + path.string());
    return run_config_from_json(raw, path.parent_path());
}

AttrSet PredictionRecord::predicted_attributes() const {
    return salience.support();
}

json record_to_json(const PredictionRecord& rec) {
    json j;
    j["artwork_id"] = rec.artwork_id;
    j["condition"] = std::string(to_string(rec.condition));
    if (!rec.attributes.empty()) {
        json attrs = json::object();
        for (const auto& [a, outcome] : rec.attributes) {
            json o;
            o["raw"] = outcome.raw;
            if (outcome.decision) {
                o["salient"] = outcome.decision->salient;
                o["parse_path"] = std::string(to_string(outcome.decision->parse_path));
            } else if (outcome.failure) {
                o["failure"] = std::string(to_string(outcome.failure->kind));
            }
            if (outcome.error) o["error"] = *outcome.error;
            if (outcome.cache_hit) o["cache_hit"] = true;
            attrs[std::string(to_string(a))] = std::move(o);
        }
        j["attributes"] = std::move(attrs);
    }
    j["salience"] = salience_to_json(rec.salience);
    j["final_prompt"] = rec.final_prompt;
    json fin;
    fin["raw"] = rec.final_raw;
    if (rec.final_prediction) {
        fin["emotion"] = rec.final_prediction->emotion;
        fin["arousal"] = rec.final_prediction->arousal;
        fin["valence"] = rec.final_prediction->valence;
        fin["explanation"] = rec.final_prediction->explanation;
        fin["parse_path"] = std::string(to_string(rec.final_prediction->parse_path));
        if (rec.final_prediction->cited_attributes) {
            json arr = json::array();
            for (auto a : rec.final_prediction->cited_attributes->members()) {
                arr.push_back(std::string(to_string(a)));
            }
            fin["cited_attributes"] = std::move(arr);
        }
    } else if (rec.final_failure) {
        fin["failure"] = std::string(to_string(rec.final_failure->kind));
    }
    j["final"] = std::move(fin);
    j["final_token_count"] = rec.final_token_count;
    j["latency_ms"] = rec.latency_ms;
    j["cache_hits"] = rec.cache_hits;
    if (rec.error) j["error"] = *rec.error;
    return j;
}

PredictionRecord record_from_json(const json& raw, int line) {
    if (!raw.is_object() || !raw.contains("artwork_id")) {
        throw SchemaError("prediction record needs artwork_id", line);
    }
    PredictionRecord rec;
    rec.artwork_id = raw["artwork_id"].get<std::string>();
    auto condition = condition_from_string(raw.value("condition", std::string("fabg")));
    if (!condition) throw SchemaError("unknown condition in record", line);
    rec.condition = *condition;
    if (raw.contains("attributes")) {
        for (auto it = raw["attributes"].begin(); it != raw["attributes"].end(); ++it) {
            auto a = attribute_from_string(it.key());
            if (!a) throw SchemaError("unknown attribute key in record", line);
            AttributeOutcome outcome;
            outcome.raw = it.value().value("raw", std::string());
            if (it.value().contains("salient")) {
                SalienceDecision d;
                d.attribute = *a;
                d.salient = it.value()["salient"].get<bool>();
                d.parse_path = it.value().value("parse_path", std::string("canonical_json")) ==
                                       "fallback_keyword"
                                   ? ParsePath::fallback_keyword
                                   : ParsePath::canonical_json;
                d.raw_excerpt = outcome.raw;
                outcome.decision = std::move(d);
            } else if (it.value().contains("failure")) {
                ParseFailure f;
                f.raw = outcome.raw;
                f.role = "attribute_agent";
                const std::string kind = it.value()["failure"].get<std::string>();
                for (auto k : {ParseFailureKind::NoJsonFound, ParseFailureKind::SchemaMismatch,
                               ParseFailureKind::UnknownLabel, ParseFailureKind::Ambiguous,
                               ParseFailureKind::Empty}) {
                    if (to_string(k) == kind) f.kind = k;
                }
                outcome.failure = std::move(f);
            }
            if (it.value().contains("error")) outcome.error = it.value()["error"].get<std::string>();
            outcome.cache_hit = it.value().value("cache_hit", false);
            rec.attributes[*a] = std::move(outcome);
        }
    }
    if (raw.contains("salience")) rec.salience = salience_from_json(raw["salience"], line);
    rec.final_prompt = raw.value("final_prompt", std::string());
    if (raw.contains("final")) {
        const json& fin = raw["final"];
        rec.final_raw = fin.value("raw", std::string());
        if (fin.contains("emotion")) {
            FinalPrediction p;
            p.emotion = fin["emotion"].get<std::string>();
            p.arousal = fin.value("arousal", std::string());
            p.valence = fin.value("valence", std::string());
            p.explanation = fin.value("explanation", std::string());
            p.parse_path = fin.value("parse_path", std::string("canonical_json")) == "fallback_keyword"
                               ? ParsePath::fallback_keyword
                               : ParsePath::canonical_json;
            if (fin.contains("cited_attributes")) {
                AttrSet cited;
                for (const auto& v : fin["cited_attributes"]) {
                    if (auto a = attribute_from_string(v.get<std::string>())) cited.insert(*a);
                }
                p.cited_attributes = cited;
            }
            rec.final_prediction = std::move(p);
        } else if (fin.contains("failure")) {
            ParseFailure f;
            f.raw = rec.final_raw;
            f.role = "final_agent";
            const std::string kind = fin["failure"].get<std::string>();
            for (auto k : {ParseFailureKind::NoJsonFound, ParseFailureKind::SchemaMismatch,
                           ParseFailureKind::UnknownLabel, ParseFailureKind::Ambiguous,
                           ParseFailureKind::Empty}) {
                if (to_string(k) == kind) f.kind = k;
            }
            rec.final_failure = std::move(f);
        }
    }
    rec.final_token_count = raw.value("final_token_count", 0ULL);
    rec.latency_ms = raw.value("latency_ms", 0LL);
    rec.cache_hits = raw.value("cache_hits", 0);
    if (raw.contains("error")) rec.error = raw["error"].get<std::string>();
    return rec;
}

std::string RunArtifact::dataset_digest() const {
    if (manifest.contains("dataset") && manifest["dataset"].is_object()) {
        return manifest["dataset"].value("digest", std::string());
    }
    return {};
}

RunArtifact load_run_artifact(const std::filesystem::path& dir) {
    RunArtifact artifact;
    const auto manifest_path = dir / "manifest.json";
    artifact.manifest = json::parse(read_file(manifest_path), nullptr, false);
    if (artifact.manifest.is_discarded()) {
        throw SchemaError("invalid JSON in " + manifest_path.string());
    }
    const auto records_path = dir / "records.jsonl";
    if (std::filesystem::exists(records_path)) {
        for (const auto& rec : read_jsonl(records_path)) {
            artifact.records.push_back(record_from_json(rec.value, rec.line));
        }
    }
    artifact.complete = std::filesystem::exists(dir / "done.marker");
    return artifact;
}

AttributeStageResult run_attribute_stage(const ArtworkRecord& artwork,
                                         const PromptTemplateSet& templates,
                                         const std::map<AttributeId, Backend*>& backends,
                                         const std::string& request_tag) {
    AttributeStageResult result;
    for (auto a : all_attributes()) {
        Backend* backend = backends.at(a);
        QueryRequest req;
        req.artwork_id = artwork.id;
        req.image_ref = artwork.image_ref;
        req.prompt = render_salience_prompt(templates, a);
        req.role = QueryRole::attribute_agent(a);
        req.request_id = request_tag + ":" + artwork.id + ":" + req.role.serialized();
        req.sampling = backend->spec().sampling;

        AttributeOutcome outcome;
        try {
            QueryResponse resp = backend->query(req);
            outcome.raw = resp.text;
            outcome.cache_hit = resp.cache_hit;
            result.latency_ms += resp.latency_ms;
            if (resp.cache_hit) result.cache_hits += 1;
            SalienceParseResult parsed = parse_salience_response(resp.text, a);
            if (auto* decision = std::get_if<SalienceDecision>(&parsed)) {
                outcome.decision = *decision;
                result.salience.set(a, decision->salient);
            } else {
                // Conservative failure policy: unusable response means the
                // attribute is not admitted into the bottleneck.
                outcome.failure = std::get<ParseFailure>(parsed);
                result.salience.set(a, false);
            }
        } catch (const BackendError& e) {
            outcome.error = e.what();
            result.salience.set(a, false);
            result.backend_failures += 1;
        }
        result.outcomes[a] = std::move(outcome);
    }
    if (result.backend_failures == static_cast<int>(kNumAttributes)) {
        throw ArtworkStageError("all five attribute queries failed for \"" + artwork.id + "\"");
    }
    return result;
}

SparsityDiagnostics sparsity_regime_check(const RunArtifact& run) {
    if (run.records.empty()) throw EmptyRun("run has no records");
    SparsityDiagnostics diag;
    diag.n_records = run.records.size();
    double total = 0.0;
    for (const auto& rec : run.records) {
        const std::size_t l0 = rec.salience.sparsity();
        diag.distribution[l0] += 1;
        total += static_cast<double>(l0);
    }
    diag.mean_l0 = total / static_cast<double>(run.records.size());
    diag.flooding_fraction = static_cast<double>(diag.distribution[kNumAttributes]) /
                             static_cast<double>(run.records.size());
    return diag;
}

// ---------------------------------------------------------------------------
// Runner

Runner::Runner(RunConfig config) : config_(std::move(config)) {
    config_.validate();
    dataset_ = std::make_shared<const Dataset>(load_dataset(config_.dataset_manifest));
    templates_ = config_.prompt_dir ? PromptTemplateSet::load_dir(*config_.prompt_dir)
                                    : PromptTemplateSet::defaults();

    if (config_.salience_source == SalienceSource::gold && !dataset_->has_gold_salience()) {
        throw ConfigError("condition.salience_source: dataset has no gold salience");
    }

    std::optional<std::filesystem::path> cache_dir = config_.cache_dir;
    if (!cache_dir) {
        if (const char* env = std::getenv("AGSR_CACHE_DIR"); env != nullptr && *env != '\0') {
            cache_dir = std::filesystem::path(env);
        }
    }
    if (cache_dir) cache_ = std::make_shared<ResponseCache>(*cache_dir);
}

namespace {

std::string run_request_tag(const json& config_source) {
    return fnv1a64_hex(config_source.dump()).substr(0, 8);
}

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

} // namespace

json Runner::build_manifest() const {
    json m;
    m["harness_version"] = "0.1.0";
    m["config"] = config_.source;
    m["config_digest"] = fnv1a64_hex(config_.source.dump());
    m["dataset"] = {{"manifest", config_.dataset_manifest.string()},
                    {"digest", dataset_->digest()},
                    {"n_artworks", dataset_->artworks.size()}};
    m["condition"] = std::string(to_string(config_.condition));
    m["salience_source"] =
        config_.salience_source == SalienceSource::gold ? "gold" : "predicted";
    m["seed"] = config_.seed;
    m["tokenizer"] = std::string(kTokenizerName);
    m["templates"] = templates_.digests();
    json backends = json::object();
    for (const auto& [role, spec] : config_.backends) {
        backends[role] = {{"kind", std::string(to_string(spec.kind))},
                          {"model_id", spec.model_id},
                          {"temperature", spec.sampling.temperature},
                          {"max_tokens", spec.sampling.max_tokens}};
    }
    m["backends"] = std::move(backends);
    m["started_at"] = iso_timestamp();
    return m;
}

PredictionRecord Runner::process_artwork(const ArtworkRecord& artwork, const RoleBackends& roles) {
    PredictionRecord rec;
    rec.artwork_id = artwork.id;
    rec.condition = config_.condition;
    const std::string tag = run_request_tag(config_.source);

    try {
        std::string prompt;
        QueryRole role = QueryRole::final_agent();
        if (config_.condition == Condition::fabg) {
            if (config_.salience_source == SalienceSource::gold) {
                auto it = dataset_->gold_salience.find(artwork.id);
                if (it == dataset_->gold_salience.end()) {
                    throw ArtworkStageError("no gold salience for \"" + artwork.id + "\"");
                }
                rec.salience = it->second;
            } else {
                AttributeStageResult stage =
                    run_attribute_stage(artwork, templates_, roles.attribute, tag);
                rec.salience = stage.salience;
                rec.attributes = std::move(stage.outcomes);
                rec.latency_ms += stage.latency_ms;
                rec.cache_hits += stage.cache_hits;
            }
            prompt = build_bottleneck_prompt(rec.salience.support(), templates_,
                                             dataset_->vocabulary);
        } else {
            const std::string method = baseline_method(config_.condition);
            prompt = render_baseline_prompt(templates_, method, dataset_->vocabulary);
            role = QueryRole::baseline(method);
        }
        rec.final_prompt = prompt;

        QueryRequest req;
        req.artwork_id = artwork.id;
        req.image_ref = artwork.image_ref;
        req.prompt = prompt;
        req.role = role;
        req.request_id = tag + ":" + artwork.id + ":" + role.serialized();
        req.sampling = roles.final_agent->spec().sampling;

        QueryResponse resp = roles.final_agent->query(req);
        rec.final_raw = resp.text;
        rec.latency_ms += resp.latency_ms;
        if (resp.cache_hit) rec.cache_hits += 1;
        // Compactness counts the delivered final message (labels plus
        // explanation); stage-1 messages are excluded.
        rec.final_token_count = token_count(resp.text);

        FinalParseResult parsed = parse_final_response(resp.text, dataset_->vocabulary);
        if (auto* prediction = std::get_if<FinalPrediction>(&parsed)) {
            rec.final_prediction = *prediction;
            if (is_baseline(config_.condition)) {
                if (prediction->cited_attributes) {
                    rec.salience = SalienceVector(*prediction->cited_attributes);
                }
            }
        } else {
            rec.final_failure = std::get<ParseFailure>(parsed);
            if (is_baseline(config_.condition)) rec.salience = SalienceVector();
        }
    } catch (const ArtworkStageError& e) {
        rec.error = e.what();
    } catch (const BackendError& e) {
        rec.error = e.what();
    }
    return rec;
}

RunArtifact Runner::run(bool resume) {
    std::filesystem::create_directories(config_.output_dir);
    const auto records_path = config_.output_dir / "records.jsonl";
    const auto manifest_path = config_.output_dir / "manifest.json";
    const auto marker_path = config_.output_dir / "done.marker";
    const std::string config_digest = fnv1a64_hex(config_.source.dump());

    // Resume: keep the valid record prefix; otherwise start clean.
    std::vector<PredictionRecord> existing;
    if (resume && std::filesystem::exists(records_path)) {
        if (std::filesystem::exists(manifest_path)) {
            json old = json::parse(read_file(manifest_path), nullptr, false);
            if (!old.is_discarded() && old.value("config_digest", std::string()) != config_digest) {
                throw ConfigError("cannot resume: run directory belongs to a different config");
            }
        }
        std::ifstream in(records_path, std::ios::binary);
        std::string line;
        std::string valid_prefix;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            json value = json::parse(line, nullptr, false);
            if (value.is_discarded()) break; // partial trailing write
            PredictionRecord rec = record_from_json(value, lineno);
            const std::size_t idx = existing.size();
            if (idx >= dataset_->artworks.size() || dataset_->artworks[idx].id != rec.artwork_id) {
                throw SchemaError("records.jsonl does not match dataset order", lineno);
            }
            existing.push_back(std::move(rec));
            valid_prefix += line;
            valid_prefix += '\n';
        }
        atomic_write_file(records_path, valid_prefix);
    } else {
        std::error_code ec;
        std::filesystem::remove(records_path, ec);
        std::filesystem::remove(marker_path, ec);
    }

    // Manifest goes down before the first record.
    json manifest = build_manifest();
    atomic_write_file(manifest_path, manifest.dump(2) + "\n");

    // Instantiate one backend per distinct role key; the five attribute
    // slots share the generic "attribute" backend unless overridden.
    RoleBackends roles;
    std::map<std::string, Backend*> by_role;
    auto instantiate = [&](const std::string& role_key) -> Backend* {
        auto found = by_role.find(role_key);
        if (found != by_role.end()) return found->second;
        auto it = config_.backends.find(role_key);
        if (it == config_.backends.end()) return nullptr;
        BackendSpec spec = it->second;
        // Oracle streams default to the run seed when the spec leaves it open.
        if (spec.kind == BackendKind::oracle && !spec.oracle.seed) {
            spec.oracle.seed = config_.seed;
        }
        std::unique_ptr<Backend> backend = make_backend(spec, dataset_);
        if (cache_) {
            backend = std::make_unique<CachingBackend>(std::move(backend), cache_);
        }
        Backend* raw = backend.get();
        owned_backends_.push_back(std::move(backend));
        by_role[role_key] = raw;
        return raw;
    };
    roles.final_agent = instantiate("final");
    if (config_.condition == Condition::fabg &&
        config_.salience_source == SalienceSource::predicted) {
        for (auto a : all_attributes()) {
            Backend* specific = instantiate("attribute_" + std::string(to_string(a)));
            roles.attribute[a] = specific ? specific : instantiate("attribute");
        }
    }

    const std::size_t n = dataset_->artworks.size();
    const std::size_t start = existing.size();

    std::ofstream out(records_path, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot open " + records_path.string());

    std::mutex mu;
    std::map<std::size_t, PredictionRecord> ready;
    std::size_t flush_next = start;
    std::atomic<std::size_t> next{start};
    std::exception_ptr first_error;
    std::vector<PredictionRecord> written = std::move(existing);

    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) break;
            PredictionRecord rec;
            try {
                rec = process_artwork(dataset_->artworks[i], roles);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!first_error) first_error = std::current_exception();
                next.store(n);
                break;
            }
            std::lock_guard<std::mutex> lock(mu);
            ready.emplace(i, std::move(rec));
            while (true) {
                auto it = ready.find(flush_next);
                if (it == ready.end()) break;
                out << record_to_json(it->second).dump() << '\n';
                out.flush();
                if (!out) {
                    if (!first_error) {
                        first_error = std::make_exception_ptr(
                            IoError("write failed: " + records_path.string()));
                    }
                    next.store(n);
                    break;
                }
                written.push_back(std::move(it->second));
                ready.erase(it);
                ++flush_next;
            }
        }
    };

    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(config_.concurrency), std::max<std::size_t>(n - start, 1));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);

    out.close();
    // Completion marker is written last.
    atomic_write_file(marker_path, "");

    RunArtifact artifact;
    artifact.manifest = std::move(manifest);
    artifact.records = std::move(written);
    artifact.complete = true;
    return artifact;
}

void Runner::dry_run() {
    std::filesystem::create_directories(config_.output_dir);
    const auto prompts_path = config_.output_dir / "prompts.jsonl";
    std::string content;
    for (const auto& artwork : dataset_->artworks) {
        if (config_.condition == Condition::fabg) {
            for (auto a : all_attributes()) {
                json line;
                line["artwork_id"] = artwork.id;
                line["role"] = QueryRole::attribute_agent(a).serialized();
                line["prompt"] = render_salience_prompt(templates_, a);
                content += line.dump();
                content += '\n';
            }
            // Without queries the bottleneck is unknown; audit the prompt the
            // gold support would produce, or the no-cue variant otherwise.
            auto it = dataset_->gold_salience.find(artwork.id);
            const AttrSet support =
                it != dataset_->gold_salience.end() ? it->second.support() : AttrSet{};
            json line;
            line["artwork_id"] = artwork.id;
            line["role"] = "final";
            json support_arr = json::array();
            for (auto a : support.members()) support_arr.push_back(std::string(to_string(a)));
            line["support"] = std::move(support_arr);
            line["support_source"] = it != dataset_->gold_salience.end() ? "gold" : "empty";
            line["prompt"] = build_bottleneck_prompt(support, templates_, dataset_->vocabulary);
            content += line.dump();
            content += '\n';
        } else {
            const std::string method = baseline_method(config_.condition);
            json line;
            line["artwork_id"] = artwork.id;
            line["role"] = QueryRole::baseline(method).serialized();
            line["prompt"] = render_baseline_prompt(templates_, method, dataset_->vocabulary);
            content += line.dump();
            content += '\n';
        }
    }
    atomic_write_file(prompts_path, content);
}

} // namespace agsr
