#pragma once

#include "agsr/attributes.hpp"
#include "agsr/io.hpp"
#include "agsr/vocab.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace agsr {

enum class ArtworkSource { emoart, abstract_art, artemis, wikiart, other };

std::string_view to_string(ArtworkSource s);
std::optional<ArtworkSource> source_from_string(std::string_view name);

struct ArtworkRecord {
    std::string id;
    std::string image_ref; // opaque path or URI, forwarded to backends
    ArtworkSource source = ArtworkSource::other;
    std::optional<std::string> style;
    std::optional<std::string> content;
    std::map<AttributeId, std::string> attribute_descriptions;
    std::optional<AffectLabels> gold_affect;
};

struct SalienceAnnotation {
    std::string artwork_id;
    std::string annotator_id;
    SalienceVector salience;
};

struct ValidationViolation {
    std::string field;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationViolation> violations;
    bool ok() const { return violations.empty(); }
};

// Immutable after construction; safe to share across threads.
struct Dataset {
    std::string name;
    ArtworkSource source = ArtworkSource::other;
    EmotionVocabulary vocabulary;
    std::vector<ArtworkRecord> artworks;
    std::map<std::string, SalienceVector> gold_salience;
    std::optional<LabelMapping> mapping;

    const ArtworkRecord* find(const std::string& id) const;
    bool has_gold_salience() const { return !gold_salience.empty(); }

    // Digest of the loaded content, used to tie reports to their gold data.
    std::string digest() const;
};

// Manifest: JSON with {name, source?, vocabulary, aliases?, records,
// salience?, mapping?}. Paths are resolved relative to the manifest file.
Dataset load_dataset(const std::filesystem::path& manifest_path);

// Writes manifest.json, records.jsonl and (when gold salience exists)
// salience.jsonl into dir; load_dataset(dir / "manifest.json") round-trips.
void write_dataset(const Dataset& ds, const std::filesystem::path& dir);

// Violations are data, not faults: unknown emotion, bad arousal/valence
// token, missing/empty required fields, bad salience keys.
ValidationReport validate_record(const json& raw, const EmotionVocabulary& vocab);

enum class ConsensusRule {
    // Salient iff strictly more than half of annotators marked it; ties
    // resolve to non-salient.
    strict_majority,
};

SalienceVector consensus_salience(const std::vector<SalienceAnnotation>& annotations,
                                  ConsensusRule rule = ConsensusRule::strict_majority);

// Deterministic seeded partition. Ratios must be positive and sum to 1
// within 1e-9; sizes follow largest-remainder rounding.
std::vector<Dataset> split_dataset(const Dataset& dataset, const std::vector<double>& ratios,
                                   std::uint64_t seed);

json record_to_json(const ArtworkRecord& rec);
ArtworkRecord record_from_json(const json& raw, const EmotionVocabulary& vocab, int line = 0);

json salience_to_json(const SalienceVector& s);
SalienceVector salience_from_json(const json& raw, int line = 0);

} // namespace agsr
