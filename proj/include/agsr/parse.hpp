#pragma once

#include "agsr/attributes.hpp"
#include "agsr/vocab.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace agsr {

enum class ParsePath { canonical_json, fallback_keyword };

std::string_view to_string(ParsePath p);

struct SalienceDecision {
    AttributeId attribute = AttributeId::color;
    bool salient = false;
    ParsePath parse_path = ParsePath::canonical_json;
    std::string raw_excerpt;
};

enum class ParseFailureKind { NoJsonFound, SchemaMismatch, UnknownLabel, Ambiguous, Empty };

std::string_view to_string(ParseFailureKind k);

struct ParseFailure {
    ParseFailureKind kind = ParseFailureKind::Empty;
    std::string raw; // verbatim, for audit
    std::string role;
};

struct FinalPrediction {
    std::string emotion;           // normalized vocabulary label
    std::string arousal;           // "high" | "low"
    std::string valence;           // "positive" | "negative"
    std::string explanation;
    std::optional<AttrSet> cited_attributes; // machine-readable salient_attributes list, when emitted
    ParsePath parse_path = ParsePath::canonical_json;
};

using SalienceParseResult = std::variant<SalienceDecision, ParseFailure>;
using FinalParseResult = std::variant<FinalPrediction, ParseFailure>;

// First balanced JSON object in the text, tolerant of surrounding prose and
// code fences. Empty when none found or the candidate does not parse.
std::optional<std::string> extract_first_json_object(std::string_view text);

// Layered: (1) first JSON object with boolean "salient"; (2) case-insensitive
// leading-token rule (yes/salient/true vs no/not salient/false). Both or
// neither cue -> Ambiguous. Never throws on arbitrary bytes.
SalienceParseResult parse_salience_response(std::string_view text, AttributeId attribute);

// Layered: (1) canonical JSON {emotion, arousal, valence, explanation};
// (2) labeled-line scan ("Emotion:", "Arousal:", "Valence:"). Missing any of
// the three labels -> SchemaMismatch; emotion outside the vocabulary ->
// UnknownLabel.
FinalParseResult parse_final_response(std::string_view text, const EmotionVocabulary& vocab);

// Trim, case-fold, strip surrounding punctuation, exact label/alias match.
std::optional<std::string> normalize_emotion(std::string_view raw, const EmotionVocabulary& vocab);

// Canonical serializations; round-trip through the parsers.
std::string serialize_salience_decision(const SalienceDecision& d);
std::string serialize_final_prediction(const FinalPrediction& p);

} // namespace agsr
