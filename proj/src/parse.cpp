#include "agsr/parse.hpp"

#include "agsr/io.hpp"

#include <algorithm>
#include <cctype>

namespace agsr {

std::string_view to_string(ParsePath p) {
    switch (p) {
        case ParsePath::canonical_json: return "canonical_json";
        case ParsePath::fallback_keyword: return "fallback_keyword";
    }
    return "canonical_json";
}

std::string_view to_string(ParseFailureKind k) {
    switch (k) {
        case ParseFailureKind::NoJsonFound: return "NoJsonFound";
        case ParseFailureKind::SchemaMismatch: return "SchemaMismatch";
        case ParseFailureKind::UnknownLabel: return "UnknownLabel";
        case ParseFailureKind::Ambiguous: return "Ambiguous";
        case ParseFailureKind::Empty: return "Empty";
    }
    return "Empty";
}

std::optional<std::string> extract_first_json_object(std::string_view text) {
    std::size_t start = text.find('{');
    while (start != std::string_view::npos) {
        int depth = 0;
        bool in_string = false;
        bool escape = false;
        for (std::size_t i = start; i < text.size(); ++i) {
            const char c = text[i];
            if (escape) {
                escape = false;
                continue;
            }
            if (in_string) {
                if (c == '\\') escape = true;
                else if (c == '"') in_string = false;
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}') {
                --depth;
                if (depth == 0) {
                    std::string candidate(text.substr(start, i - start + 1));
                    json parsed = json::parse(candidate, nullptr, false);
                    if (!parsed.is_discarded() && parsed.is_object()) return candidate;
                    break; // balanced but unparseable; try the next '{'
                }
            }
        }
        start = text.find('{', start + 1);
    }
    return std::nullopt;
}

namespace {

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view trim_view(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool is_blank(std::string_view s) {
    return trim_view(s).empty();
}

bool starts_with_token(std::string_view lowered, std::string_view token) {
    if (lowered.substr(0, token.size()) != token) return false;
    if (lowered.size() == token.size()) return true;
    const unsigned char next = static_cast<unsigned char>(lowered[token.size()]);
    return !std::isalnum(next);
}

// Leading-token fallback over prose. The leading affirmative/negative cue
// decides; seeing both polarities with neither leading, or neither cue at
// all, is ambiguous.
std::optional<bool> keyword_salience(std::string_view text) {
    const std::string lowered = lowercase(trim_view(text));
    if (lowered.empty()) return std::nullopt;
    // Skip leading punctuation such as quotes or list dashes.
    std::size_t b = 0;
    while (b < lowered.size() && !std::isalnum(static_cast<unsigned char>(lowered[b]))) ++b;
    const std::string_view head = std::string_view(lowered).substr(b);
    for (std::string_view cue : {"yes", "salient", "true"}) {
        if (starts_with_token(head, cue)) return true;
    }
    for (std::string_view cue : {"no", "not salient", "non-salient", "false"}) {
        if (starts_with_token(head, cue)) return false;
    }
    return std::nullopt;
}

std::optional<std::string> normalize_arousal(std::string_view raw) {
    const std::string folded = fold_label(raw);
    if (folded == "high" || folded == "low") return folded;
    return std::nullopt;
}

std::optional<std::string> normalize_valence(std::string_view raw) {
    const std::string folded = fold_label(raw);
    if (folded == "positive" || folded == "negative") return folded;
    return std::nullopt;
}

std::optional<AttrSet> attrs_from_json_array(const json& arr) {
    if (!arr.is_array()) return std::nullopt;
    AttrSet set;
    for (const auto& v : arr) {
        if (!v.is_string()) return std::nullopt;
        auto a = attribute_from_string(fold_label(v.get<std::string>()));
        if (!a) continue; // tolerate stray entries; only known attributes count
        set.insert(*a);
    }
    return set;
}

struct LabeledLines {
    std::optional<std::string> emotion;
    std::optional<std::string> arousal;
    std::optional<std::string> valence;
    std::optional<std::string> attributes;
    std::string remainder; // non-label prose, used as the explanation
};

LabeledLines scan_labeled_lines(std::string_view text) {
    LabeledLines out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;

        // Labels must lead the line, allowing list markup such as "- " or "**".
        std::size_t lead = 0;
        while (lead < line.size() && !std::isalnum(static_cast<unsigned char>(line[lead]))) ++lead;
        const std::string lowered = lowercase(line.substr(lead));
        auto match = [&](std::string_view label) -> std::optional<std::string> {
            if (lowered.substr(0, label.size()) != label) return std::nullopt;
            return std::string(trim_view(line.substr(lead + label.size())));
        };
        if (auto v = match("emotion:")) {
            out.emotion = *v;
        } else if (auto v2 = match("arousal:")) {
            out.arousal = *v2;
        } else if (auto v3 = match("valence:")) {
            out.valence = *v3;
        } else if (auto v4 = match("salient attributes:")) {
            out.attributes = *v4;
        } else if (!is_blank(line)) {
            if (!out.remainder.empty()) out.remainder += '\n';
            out.remainder += std::string(trim_view(line));
        }
    }
    return out;
}

AttrSet attrs_from_name_list(std::string_view text) {
    AttrSet set;
    std::string token;
    auto flush = [&]() {
        if (token.empty()) return;
        if (auto a = attribute_from_string(fold_label(token))) set.insert(*a);
        token.clear();
    };
    for (char c : text) {
        if (c == ',' || c == ';' || c == '[' || c == ']') {
            flush();
        } else {
            token.push_back(c);
        }
    }
    flush();
    return set;
}

} // namespace

SalienceParseResult parse_salience_response(std::string_view text, AttributeId attribute) {
    if (is_blank(text)) {
        return ParseFailure{ParseFailureKind::Empty, std::string(text), "attribute_agent"};
    }
    if (auto obj = extract_first_json_object(text)) {
        json parsed = json::parse(*obj, nullptr, false);
        if (parsed.contains("salient") && parsed["salient"].is_boolean()) {
            SalienceDecision d;
            d.attribute = attribute;
            d.salient = parsed["salient"].get<bool>();
            d.parse_path = ParsePath::canonical_json;
            d.raw_excerpt = *obj;
            return d;
        }
        // Tolerated drift: a string "true"/"false"/"yes"/"no" in the field.
        if (parsed.contains("salient") && parsed["salient"].is_string()) {
            if (auto kw = keyword_salience(parsed["salient"].get<std::string>())) {
                SalienceDecision d;
                d.attribute = attribute;
                d.salient = *kw;
                d.parse_path = ParsePath::canonical_json;
                d.raw_excerpt = *obj;
                return d;
            }
        }
        return ParseFailure{ParseFailureKind::SchemaMismatch, std::string(text), "attribute_agent"};
    }
    if (auto kw = keyword_salience(text)) {
        SalienceDecision d;
        d.attribute = attribute;
        d.salient = *kw;
        d.parse_path = ParsePath::fallback_keyword;
        d.raw_excerpt = std::string(trim_view(text).substr(0, 64));
        return d;
    }
    return ParseFailure{ParseFailureKind::Ambiguous, std::string(text), "attribute_agent"};
}

FinalParseResult parse_final_response(std::string_view text, const EmotionVocabulary& vocab) {
    if (is_blank(text)) {
        return ParseFailure{ParseFailureKind::Empty, std::string(text), "final_agent"};
    }

    if (auto obj = extract_first_json_object(text)) {
        json parsed = json::parse(*obj, nullptr, false);
        const bool has_all = parsed.contains("emotion") && parsed["emotion"].is_string() &&
                             parsed.contains("arousal") && parsed["arousal"].is_string() &&
                             parsed.contains("valence") && parsed["valence"].is_string();
        if (!has_all) {
            return ParseFailure{ParseFailureKind::SchemaMismatch, std::string(text), "final_agent"};
        }
        auto emotion = normalize_emotion(parsed["emotion"].get<std::string>(), vocab);
        if (!emotion) {
            return ParseFailure{ParseFailureKind::UnknownLabel, std::string(text), "final_agent"};
        }
        auto arousal = normalize_arousal(parsed["arousal"].get<std::string>());
        auto valence = normalize_valence(parsed["valence"].get<std::string>());
        if (!arousal || !valence) {
            return ParseFailure{ParseFailureKind::SchemaMismatch, std::string(text), "final_agent"};
        }
        FinalPrediction p;
        p.emotion = *emotion;
        p.arousal = *arousal;
        p.valence = *valence;
        p.explanation = parsed.contains("explanation") && parsed["explanation"].is_string()
                            ? parsed["explanation"].get<std::string>()
                            : std::string();
        if (parsed.contains("salient_attributes")) {
            p.cited_attributes = attrs_from_json_array(parsed["salient_attributes"]);
        }
        p.parse_path = ParsePath::canonical_json;
        return p;
    }

    // Fallback: labeled-line scan.
    LabeledLines lines = scan_labeled_lines(text);
    if (!lines.emotion || !lines.arousal || !lines.valence) {
        const bool any = lines.emotion || lines.arousal || lines.valence;
        return ParseFailure{any ? ParseFailureKind::SchemaMismatch : ParseFailureKind::NoJsonFound,
                            std::string(text), "final_agent"};
    }
    auto emotion = normalize_emotion(*lines.emotion, vocab);
    if (!emotion) {
        return ParseFailure{ParseFailureKind::UnknownLabel, std::string(text), "final_agent"};
    }
    auto arousal = normalize_arousal(*lines.arousal);
    auto valence = normalize_valence(*lines.valence);
    if (!arousal || !valence) {
        return ParseFailure{ParseFailureKind::SchemaMismatch, std::string(text), "final_agent"};
    }
    FinalPrediction p;
    p.emotion = *emotion;
    p.arousal = *arousal;
    p.valence = *valence;
    p.explanation = lines.remainder;
    if (lines.attributes) p.cited_attributes = attrs_from_name_list(*lines.attributes);
    p.parse_path = ParsePath::fallback_keyword;
    return p;
}

std::optional<std::string> normalize_emotion(std::string_view raw, const EmotionVocabulary& vocab) {
    return vocab.normalize(raw);
}

std::string serialize_salience_decision(const SalienceDecision& d) {
    json j;
    j["salient"] = d.salient;
    return j.dump();
}

std::string serialize_final_prediction(const FinalPrediction& p) {
    json j;
    j["emotion"] = p.emotion;
    j["arousal"] = p.arousal;
    j["valence"] = p.valence;
    j["explanation"] = p.explanation;
    if (p.cited_attributes) {
        json arr = json::array();
        for (auto a : p.cited_attributes->members()) arr.push_back(std::string(to_string(a)));
        j["salient_attributes"] = std::move(arr);
    }
    return j.dump();
}

} // namespace agsr
