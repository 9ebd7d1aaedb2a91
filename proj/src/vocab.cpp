#include "agsr/vocab.hpp"

#include "agsr/errors.hpp"

#include <cctype>

namespace agsr {

namespace {

bool is_edge_punct(unsigned char c) {
    return std::ispunct(c) != 0;
}

} // namespace

std::string fold_label(std::string_view raw) {
    // Strip surrounding whitespace and punctuation (quotes, list markup,
    // trailing periods) in one pass; interior characters stay untouched.
    auto is_edge = [](unsigned char c) {
        return std::isspace(c) != 0 || is_edge_punct(c);
    };
    std::size_t b = 0;
    std::size_t e = raw.size();
    while (b < e && is_edge(static_cast<unsigned char>(raw[b]))) ++b;
    while (e > b && is_edge(static_cast<unsigned char>(raw[e - 1]))) --e;

    std::string out;
    out.reserve(e - b);
    for (std::size_t i = b; i < e; ++i) {
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(raw[i]))));
    }
    return out;
}

EmotionVocabulary::EmotionVocabulary(std::vector<std::string> labels) {
    for (auto& l : labels) add_label(l);
}

void EmotionVocabulary::add_label(const std::string& label) {
    const std::string key = fold_label(label);
    if (key.empty()) throw SchemaError("empty emotion label");
    auto [it, inserted] = lookup_.emplace(key, label);
    if (!inserted) throw DuplicateIdError(label);
    labels_.push_back(label);
}

void EmotionVocabulary::add_alias(const std::string& label, const std::string& alias) {
    if (!has_label(label)) throw SchemaError("alias target \"" + label + "\" is not a vocabulary label");
    const std::string key = fold_label(alias);
    auto it = lookup_.find(key);
    if (it != lookup_.end() && it->second != lookup_.at(fold_label(label))) {
        throw SchemaError("alias \"" + alias + "\" already maps to \"" + it->second + "\"");
    }
    lookup_[key] = lookup_.at(fold_label(label));
}

bool EmotionVocabulary::has_label(std::string_view label) const {
    auto it = lookup_.find(fold_label(label));
    return it != lookup_.end();
}

std::optional<std::string> EmotionVocabulary::normalize(std::string_view raw) const {
    auto it = lookup_.find(fold_label(raw));
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

std::string EmotionVocabulary::joined(std::string_view sep) const {
    std::string out;
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (i > 0) out += sep;
        out += labels_[i];
    }
    return out;
}

void LabelMapping::add(const std::string& external, std::optional<std::string> internal) {
    const std::string key = fold_label(external);
    auto [it, inserted] = map_.emplace(key, std::move(internal));
    if (!inserted) throw DuplicateIdError(external);
}

LabelMapping::MapResult LabelMapping::map(std::string_view external) const {
    auto it = map_.find(fold_label(external));
    if (it == map_.end()) {
        throw UnknownExternalLabel("external label \"" + std::string(external) + "\" not in mapping");
    }
    return it->second;
}

} // namespace agsr
