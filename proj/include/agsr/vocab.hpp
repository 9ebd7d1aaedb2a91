#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace agsr {

// Ordered list of distinct emotion labels plus per-label aliases.
// Lookup is case-insensitive; labels keep their declared display form.
class EmotionVocabulary {
public:
    EmotionVocabulary() = default;
    explicit EmotionVocabulary(std::vector<std::string> labels);

    void add_label(const std::string& label);
    void add_alias(const std::string& label, const std::string& alias);

    const std::vector<std::string>& labels() const { return labels_; }
    std::size_t size() const { return labels_.size(); }
    bool empty() const { return labels_.empty(); }

    bool has_label(std::string_view label) const;

    // Trim, case-fold, strip surrounding punctuation, then exact match
    // against labels and aliases. No fuzzy matching.
    std::optional<std::string> normalize(std::string_view raw) const;

    // Comma-separated display list, e.g. for prompt rendering.
    std::string joined(std::string_view sep = ", ") const;

private:
    std::vector<std::string> labels_;
    std::map<std::string, std::string> lookup_; // folded token -> display label
};

std::string fold_label(std::string_view raw);

struct AffectLabels {
    std::string emotion;
    std::string arousal; // "high" | "low"
    std::string valence; // "positive" | "negative"

    bool operator==(const AffectLabels&) const = default;
};

// Maps labels of an external vocabulary into the internal emotion space.
// A target of std::nullopt is the explicit UNMAPPED marker.
class LabelMapping {
public:
    struct Unmapped {};
    using MapResult = std::optional<std::string>; // nullopt == Unmapped outcome

    LabelMapping() = default;
    explicit LabelMapping(std::string source_vocabulary)
        : source_vocabulary_(std::move(source_vocabulary)) {}

    void add(const std::string& external, std::optional<std::string> internal);

    const std::string& source_vocabulary() const { return source_vocabulary_; }
    bool empty() const { return map_.empty(); }

    // Throws UnknownExternalLabel when the label is absent from the table.
    MapResult map(std::string_view external) const;

    const std::map<std::string, std::optional<std::string>>& entries() const { return map_; }

private:
    std::string source_vocabulary_;
    std::map<std::string, std::optional<std::string>> map_; // folded external -> target
};

} // namespace agsr
