#include "agsr/dataset.hpp"

#include "agsr/errors.hpp"
#include "agsr/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace agsr {

std::string_view to_string(ArtworkSource s) {
    switch (s) {
        case ArtworkSource::emoart: return "emoart";
        case ArtworkSource::abstract_art: return "abstract";
        case ArtworkSource::artemis: return "artemis";
        case ArtworkSource::wikiart: return "wikiart";
        case ArtworkSource::other: return "other";
    }
    return "other";
}

std::optional<ArtworkSource> source_from_string(std::string_view name) {
    for (auto s : {ArtworkSource::emoart, ArtworkSource::abstract_art, ArtworkSource::artemis,
                   ArtworkSource::wikiart, ArtworkSource::other}) {
        if (to_string(s) == name) return s;
    }
    return std::nullopt;
}

const ArtworkRecord* Dataset::find(const std::string& id) const {
    for (const auto& a : artworks) {
        if (a.id == id) return &a;
    }
    return nullptr;
}

std::string Dataset::digest() const {
    json j;
    j["name"] = name;
    j["source"] = std::string(to_string(source));
    j["vocabulary"] = vocabulary.labels();
    json recs = json::array();
    for (const auto& a : artworks) recs.push_back(record_to_json(a));
    j["records"] = std::move(recs);
    json sal = json::object();
    for (const auto& [id, v] : gold_salience) sal[id] = salience_to_json(v);
    j["salience"] = std::move(sal);
    return fnv1a64_hex(j.dump());
}

namespace {

std::optional<std::string> normalize_binary_token(const json& v, const char* lo, const char* hi) {
    if (!v.is_string()) return std::nullopt;
    const std::string folded = fold_label(v.get<std::string>());
    if (folded == lo) return std::string(lo);
    if (folded == hi) return std::string(hi);
    return std::nullopt;
}

} // namespace

ValidationReport validate_record(const json& raw, const EmotionVocabulary& vocab) {
    ValidationReport report;
    auto violation = [&](const std::string& field, const std::string& msg) {
        report.violations.push_back({field, msg});
    };

    if (!raw.is_object()) {
        violation("", "record must be a JSON object");
        return report;
    }
    if (!raw.contains("id") || !raw["id"].is_string() || raw["id"].get<std::string>().empty()) {
        violation("id", "missing or empty id");
    }
    if (!raw.contains("image_ref") || !raw["image_ref"].is_string()) {
        violation("image_ref", "missing image_ref");
    }
    if (raw.contains("source")) {
        if (!raw["source"].is_string() || !source_from_string(raw["source"].get<std::string>())) {
            violation("source", "source must be one of emoart|abstract|artemis|wikiart|other");
        }
    }
    if (raw.contains("attribute_descriptions")) {
        const auto& descs = raw["attribute_descriptions"];
        if (!descs.is_object()) {
            violation("attribute_descriptions", "must be an object keyed by attribute name");
        } else {
            for (auto it = descs.begin(); it != descs.end(); ++it) {
                if (!attribute_from_string(it.key())) {
                    violation("attribute_descriptions", "unknown attribute key \"" + it.key() + "\"");
                }
            }
        }
    }

    const bool has_emotion = raw.contains("emotion");
    const bool has_arousal = raw.contains("arousal");
    const bool has_valence = raw.contains("valence");
    if (has_emotion || has_arousal || has_valence) {
        if (!has_emotion) violation("emotion", "affect labels present but emotion missing");
        if (!has_arousal) violation("arousal", "affect labels present but arousal missing");
        if (!has_valence) violation("valence", "affect labels present but valence missing");
    }
    if (has_emotion) {
        if (!raw["emotion"].is_string()) {
            violation("emotion", "emotion must be a string");
        } else if (!vocab.empty() && !vocab.normalize(raw["emotion"].get<std::string>())) {
            violation("emotion", "unknown emotion \"" + raw["emotion"].get<std::string>() + "\"");
        }
    }
    if (has_arousal && !normalize_binary_token(raw["arousal"], "low", "high")) {
        violation("arousal", "arousal must be high|low");
    }
    if (has_valence && !normalize_binary_token(raw["valence"], "negative", "positive")) {
        violation("valence", "valence must be positive|negative");
    }
    return report;
}

ArtworkRecord record_from_json(const json& raw, const EmotionVocabulary& vocab, int line) {
    ValidationReport report = validate_record(raw, vocab);
    if (!report.ok()) {
        const auto& v = report.violations.front();
        throw SchemaError("record field \"" + v.field + "\": " + v.message, line);
    }
    ArtworkRecord rec;
    rec.id = raw["id"].get<std::string>();
    rec.image_ref = raw["image_ref"].get<std::string>();
    if (raw.contains("source")) {
        rec.source = *source_from_string(raw["source"].get<std::string>());
    }
    if (raw.contains("style") && raw["style"].is_string()) rec.style = raw["style"].get<std::string>();
    if (raw.contains("content") && raw["content"].is_string()) rec.content = raw["content"].get<std::string>();
    if (raw.contains("attribute_descriptions")) {
        for (auto it = raw["attribute_descriptions"].begin(); it != raw["attribute_descriptions"].end(); ++it) {
            rec.attribute_descriptions[*attribute_from_string(it.key())] = it.value().get<std::string>();
        }
    }
    if (raw.contains("emotion")) {
        AffectLabels affect;
        affect.emotion = vocab.empty() ? raw["emotion"].get<std::string>()
                                       : *vocab.normalize(raw["emotion"].get<std::string>());
        affect.arousal = *normalize_binary_token(raw["arousal"], "low", "high");
        affect.valence = *normalize_binary_token(raw["valence"], "negative", "positive");
        rec.gold_affect = std::move(affect);
    }
    return rec;
}

json record_to_json(const ArtworkRecord& rec) {
    json j;
    j["id"] = rec.id;
    j["image_ref"] = rec.image_ref;
    j["source"] = std::string(to_string(rec.source));
    if (rec.style) j["style"] = *rec.style;
    if (rec.content) j["content"] = *rec.content;
    if (!rec.attribute_descriptions.empty()) {
        json descs = json::object();
        for (const auto& [a, text] : rec.attribute_descriptions) descs[std::string(to_string(a))] = text;
        j["attribute_descriptions"] = std::move(descs);
    }
    if (rec.gold_affect) {
        j["emotion"] = rec.gold_affect->emotion;
        j["arousal"] = rec.gold_affect->arousal;
        j["valence"] = rec.gold_affect->valence;
    }
    return j;
}

json salience_to_json(const SalienceVector& s) {
    json j = json::object();
    for (auto a : all_attributes()) j[std::string(to_string(a))] = s.get(a);
    return j;
}

SalienceVector salience_from_json(const json& raw, int line) {
    if (!raw.is_object()) throw SchemaError("salience must be an object", line);
    SalienceVector v;
    for (auto a : all_attributes()) {
        const std::string key(to_string(a));
        if (!raw.contains(key) || !raw[key].is_boolean()) {
            throw SchemaError("salience missing boolean key \"" + key + "\"", line);
        }
        v.set(a, raw[key].get<bool>());
    }
    return v;
}

namespace {

EmotionVocabulary vocabulary_from_manifest(const json& manifest) {
    EmotionVocabulary vocab;
    if (manifest.contains("vocabulary")) {
        if (!manifest["vocabulary"].is_array()) throw SchemaError("manifest vocabulary must be an array");
        for (const auto& l : manifest["vocabulary"]) vocab.add_label(l.get<std::string>());
    }
    if (manifest.contains("aliases")) {
        for (auto it = manifest["aliases"].begin(); it != manifest["aliases"].end(); ++it) {
            for (const auto& alias : it.value()) {
                vocab.add_alias(it.key(), alias.get<std::string>());
            }
        }
    }
    return vocab;
}

LabelMapping mapping_from_file(const std::filesystem::path& path) {
    json raw = json::parse(read_file(path), nullptr, false);
    if (raw.is_discarded()) throw SchemaError("invalid JSON in " + path.string());
    LabelMapping mapping(raw.value("source_vocabulary", std::string()));
    if (!raw.contains("map") || !raw["map"].is_object()) {
        throw SchemaError("mapping file needs a \"map\" object");
    }
    for (auto it = raw["map"].begin(); it != raw["map"].end(); ++it) {
        if (it.value().is_null()) {
            mapping.add(it.key(), std::nullopt); // explicit UNMAPPED
        } else {
            mapping.add(it.key(), it.value().get<std::string>());
        }
    }
    return mapping;
}

} // namespace

Dataset load_dataset(const std::filesystem::path& manifest_path) {
    json manifest = json::parse(read_file(manifest_path), nullptr, false);
    if (manifest.is_discarded()) throw SchemaError("invalid JSON in " + manifest_path.string());
    if (!manifest.is_object()) throw SchemaError("manifest must be a JSON object");
    if (!manifest.contains("records")) throw SchemaError("manifest missing \"records\" path");

    const auto base = manifest_path.parent_path();
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_absolute() ? path : base / path;
    };

    Dataset ds;
    ds.name = manifest.value("name", std::string("dataset"));
    if (manifest.contains("source")) {
        auto src = source_from_string(manifest["source"].get<std::string>());
        if (!src) throw SchemaError("unknown manifest source \"" + manifest["source"].get<std::string>() + "\"");
        ds.source = *src;
    }
    ds.vocabulary = vocabulary_from_manifest(manifest);

    // With a label mapping, gold emotions live in the mapping's external
    // domain; the manifest vocabulary is the aligned space for predictions.
    if (manifest.contains("mapping")) {
        ds.mapping = mapping_from_file(resolve(manifest["mapping"].get<std::string>()));
        for (const auto& [external, target] : ds.mapping->entries()) {
            (void)external;
            if (target && !ds.vocabulary.empty() && !ds.vocabulary.normalize(*target)) {
                throw SchemaError("mapping target \"" + *target + "\" is not in the vocabulary");
            }
        }
    }

    std::set<std::string> seen_ids;
    const EmotionVocabulary record_vocab = ds.mapping ? EmotionVocabulary{} : ds.vocabulary;
    for (const auto& rec : read_jsonl(resolve(manifest["records"].get<std::string>()))) {
        ArtworkRecord artwork = record_from_json(rec.value, record_vocab, rec.line);
        if (!rec.value.contains("source")) artwork.source = ds.source;
        if (ds.mapping && artwork.gold_affect) {
            // Throws UnknownExternalLabel when the gold label is unmapped.
            (void)ds.mapping->map(artwork.gold_affect->emotion);
        }
        if (!seen_ids.insert(artwork.id).second) throw DuplicateIdError(artwork.id);
        ds.artworks.push_back(std::move(artwork));
    }

    if (manifest.contains("salience")) {
        // Per-annotator annotations grouped per artwork; gold salience is the
        // consensus vector.
        std::map<std::string, std::vector<SalienceAnnotation>> grouped;
        std::set<std::pair<std::string, std::string>> seen_pairs;
        for (const auto& rec : read_jsonl(resolve(manifest["salience"].get<std::string>()))) {
            if (!rec.value.contains("artwork_id") || !rec.value.contains("salience")) {
                throw SchemaError("salience row needs artwork_id and salience", rec.line);
            }
            SalienceAnnotation ann;
            ann.artwork_id = rec.value["artwork_id"].get<std::string>();
            ann.annotator_id = rec.value.value("annotator_id", std::string("annotator"));
            ann.salience = salience_from_json(rec.value["salience"], rec.line);
            if (!seen_pairs.insert({ann.artwork_id, ann.annotator_id}).second) {
                throw DuplicateIdError(ann.artwork_id + "/" + ann.annotator_id);
            }
            if (!seen_ids.count(ann.artwork_id)) {
                throw SchemaError("salience references unknown artwork \"" + ann.artwork_id + "\"", rec.line);
            }
            grouped[ann.artwork_id].push_back(std::move(ann));
        }
        for (auto& [id, anns] : grouped) {
            ds.gold_salience[id] = consensus_salience(anns);
        }
    }

    return ds;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    json manifest;
    manifest["name"] = ds.name;
    manifest["source"] = std::string(to_string(ds.source));
    manifest["vocabulary"] = ds.vocabulary.labels();
    manifest["records"] = "records.jsonl";
    if (!ds.gold_salience.empty()) manifest["salience"] = "salience.jsonl";
    atomic_write_file(dir / "manifest.json", manifest.dump(2) + "\n");

    std::string records;
    for (const auto& rec : ds.artworks) {
        records += record_to_json(rec).dump();
        records += '\n';
    }
    atomic_write_file(dir / "records.jsonl", records);

    if (!ds.gold_salience.empty()) {
        std::string salience;
        for (const auto& rec : ds.artworks) {
            auto it = ds.gold_salience.find(rec.id);
            if (it == ds.gold_salience.end()) continue;
            json row;
            row["artwork_id"] = rec.id;
            row["annotator_id"] = "gold";
            row["salience"] = salience_to_json(it->second);
            salience += row.dump();
            salience += '\n';
        }
        atomic_write_file(dir / "salience.jsonl", salience);
    }
}

SalienceVector consensus_salience(const std::vector<SalienceAnnotation>& annotations,
                                  ConsensusRule rule) {
    (void)rule; // single rule today
    if (annotations.empty()) throw EmptyAnnotationSet("no annotations to aggregate");
    const std::string& artwork_id = annotations.front().artwork_id;
    for (const auto& ann : annotations) {
        if (ann.artwork_id != artwork_id) {
            throw MixedArtworkIds("annotations mix \"" + artwork_id + "\" and \"" + ann.artwork_id + "\"");
        }
    }
    SalienceVector out;
    const std::size_t n = annotations.size();
    for (auto a : all_attributes()) {
        std::size_t votes = 0;
        for (const auto& ann : annotations) {
            if (ann.salience.get(a)) ++votes;
        }
        // Strictly more than half; ties resolve to non-salient.
        out.set(a, 2 * votes > n);
    }
    return out;
}

std::vector<Dataset> split_dataset(const Dataset& dataset, const std::vector<double>& ratios,
                                   std::uint64_t seed) {
    if (ratios.empty()) throw BadRatios("no ratios given");
    double sum = 0.0;
    for (double r : ratios) {
        if (r <= 0.0) throw BadRatios("ratios must be positive");
        sum += r;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw BadRatios("ratios must sum to 1");

    const std::size_t n = dataset.artworks.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    // Hand-rolled Fisher-Yates: std::shuffle is not reproducible across
    // standard library implementations.
    KeyedRng rng(seed, "split:" + dataset.name);
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(order[i - 1], order[j]);
    }

    // Largest-remainder apportionment of n over the ratios.
    std::vector<std::size_t> sizes(ratios.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < ratios.size(); ++k) {
        const double exact = ratios[k] * static_cast<double>(n);
        sizes[k] = static_cast<std::size_t>(std::floor(exact));
        assigned += sizes[k];
        remainders.push_back({exact - std::floor(exact), k});
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; assigned < n; ++k, ++assigned) {
        sizes[remainders[k % remainders.size()].second] += 1;
    }

    std::vector<Dataset> out;
    std::size_t cursor = 0;
    for (std::size_t k = 0; k < ratios.size(); ++k) {
        Dataset part;
        part.name = dataset.name + "/" + std::to_string(k);
        part.source = dataset.source;
        part.vocabulary = dataset.vocabulary;
        part.mapping = dataset.mapping;
        std::vector<std::size_t> picked(order.begin() + static_cast<std::ptrdiff_t>(cursor),
                                        order.begin() + static_cast<std::ptrdiff_t>(cursor + sizes[k]));
        // Keep original record order inside each split.
        std::sort(picked.begin(), picked.end());
        for (std::size_t idx : picked) {
            const ArtworkRecord& rec = dataset.artworks[idx];
            part.artworks.push_back(rec);
            auto it = dataset.gold_salience.find(rec.id);
            if (it != dataset.gold_salience.end()) part.gold_salience[rec.id] = it->second;
        }
        cursor += sizes[k];
        out.push_back(std::move(part));
    }
    return out;
}

} // namespace agsr
