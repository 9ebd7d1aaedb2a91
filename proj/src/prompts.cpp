#include "agsr/prompts.hpp"

#include "agsr/errors.hpp"

#include <cctype>

namespace agsr {

std::string_view attribute_definition(AttributeId a) {
    switch (a) {
        case AttributeId::color:
            return "the palette, hue relationships, saturation, and warmth or coolness";
        case AttributeId::composition:
            return "the arrangement and balance of pictorial elements within the frame";
        case AttributeId::line:
            return "the character of contours and the direction of drawn strokes";
        case AttributeId::light:
            return "the illumination, its intensity, and the handling of shadow";
        case AttributeId::brushstroke:
            return "the visible mark-making, texture, and rhythm of paint application";
    }
    return "";
}

std::string PromptTemplate::digest() const {
    return fnv1a64_hex(text);
}

std::string render_template(const std::string& text,
                            const std::map<std::string, std::string>& bindings) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] != '{') {
            out.push_back(text[i]);
            ++i;
            continue;
        }
        // A placeholder is {lowercase_identifier}; everything else (JSON
        // braces and such) is literal text.
        std::size_t j = i + 1;
        while (j < text.size() &&
               (std::islower(static_cast<unsigned char>(text[j])) || text[j] == '_')) {
            ++j;
        }
        if (j > i + 1 && j < text.size() && text[j] == '}') {
            const std::string name = text.substr(i + 1, j - i - 1);
            auto it = bindings.find(name);
            if (it == bindings.end()) {
                throw TemplateError("unbound placeholder {" + name + "}");
            }
            out += it->second;
            i = j + 1;
        } else {
            out.push_back(text[i]);
            ++i;
        }
    }
    return out;
}

namespace {

constexpr std::string_view kSalienceTemplate =
    "You are judging one formal dimension of an artwork image.\n"
    "Dimension: {attribute_name} ({attribute_definition}).\n"
    "Decide whether this dimension is an emotionally operative carrier of the artwork's "
    "effect, not merely present in it.\n"
    "Reply with a single JSON object: {\"salient\": true} or {\"salient\": false}\n";

constexpr std::string_view kFinalTemplate =
    "You are judging the emotional effect of an artwork image.\n"
    "The cues below were marked as emotionally operative for this artwork.\n"
    "\n"
    "{salient_attributes}\n"
    "\n"
    "Ground your judgment in exactly these cues and no others; do not discuss any other "
    "formal dimension.\n"
    "Reply with a single JSON object:\n"
    "{\"emotion\": \"<one of: {emotion_vocab}>\", \"arousal\": \"high\" or \"low\", "
    "\"valence\": \"positive\" or \"negative\", \"explanation\": \"<one or two short "
    "sentences grounded in the cues above>\"}\n";

constexpr std::string_view kFinalEmptyTemplate =
    "You are judging the emotional effect of an artwork image.\n"
    "No single formal cue was marked as dominant for this artwork; judge it holistically.\n"
    "Reply with a single JSON object:\n"
    "{\"emotion\": \"<one of: {emotion_vocab}>\", \"arousal\": \"high\" or \"low\", "
    "\"valence\": \"positive\" or \"negative\", \"explanation\": \"<one or two short "
    "sentences>\"}\n";

constexpr std::string_view kBaseTemplate =
    "Analyze the emotional effect of this artwork image.\n"
    "Reply with a single JSON object:\n"
    "{\"emotion\": \"<one of: {emotion_vocab}>\", \"arousal\": \"high\" or \"low\", "
    "\"valence\": \"positive\" or \"negative\", \"explanation\": \"<one or two short "
    "sentences>\"}\n";

constexpr std::string_view kCotTemplate =
    "Analyze the emotional effect of this artwork image.\n"
    "First work through each major formal attribute of the painting - color, composition, "
    "line, light, and brushstroke - and decide which of them actually carry the emotional "
    "effect.\n"
    "Then reply with a single JSON object:\n"
    "{\"emotion\": \"<one of: {emotion_vocab}>\", \"arousal\": \"high\" or \"low\", "
    "\"valence\": \"positive\" or \"negative\", \"salient_attributes\": [<the attributes "
    "that carry the effect>], \"explanation\": \"<one or two short sentences>\"}\n";

constexpr std::string_view kOneShotTemplate =
    "Analyze the emotional effect of an artwork image by selecting the formal attributes "
    "that carry it.\n"
    "\n"
    "Example:\n"
    "Input: an artwork image.\n"
    "Output: {\"emotion\": \"Calm\", \"arousal\": \"low\", \"valence\": \"positive\", "
    "\"salient_attributes\": [\"color\", \"light\"], \"explanation\": \"A muted palette "
    "and soft illumination settle the scene.\"}\n"
    "\n"
    "Now analyze the given artwork image the same way.\n"
    "Reply with a single JSON object:\n"
    "{\"emotion\": \"<one of: {emotion_vocab}>\", \"arousal\": \"high\" or \"low\", "
    "\"valence\": \"positive\" or \"negative\", \"salient_attributes\": [<the attributes "
    "that carry the effect>], \"explanation\": \"<one or two short sentences>\"}\n";

} // namespace

PromptTemplateSet PromptTemplateSet::defaults() {
    PromptTemplateSet set;
    for (auto a : all_attributes()) {
        set.salience[a] = {"default:attribute_" + std::string(to_string(a)),
                           std::string(kSalienceTemplate)};
    }
    set.final_agent = {"default:final", std::string(kFinalTemplate)};
    set.final_agent_empty = {"default:final_empty", std::string(kFinalEmptyTemplate)};
    set.base = {"default:base", std::string(kBaseTemplate)};
    set.cot = {"default:cot", std::string(kCotTemplate)};
    set.one_shot = {"default:one_shot", std::string(kOneShotTemplate)};
    return set;
}

PromptTemplateSet PromptTemplateSet::load_dir(const std::filesystem::path& dir) {
    PromptTemplateSet set = defaults();
    auto maybe_load = [&](const std::string& stem, PromptTemplate& slot) {
        const auto path = dir / (stem + ".txt");
        if (std::filesystem::exists(path)) {
            slot = {stem, read_file(path)};
        }
    };
    for (auto a : all_attributes()) {
        maybe_load("attribute_" + std::string(to_string(a)), set.salience[a]);
    }
    maybe_load("final", set.final_agent);
    maybe_load("final_empty", set.final_agent_empty);
    maybe_load("base", set.base);
    maybe_load("cot", set.cot);
    maybe_load("one_shot", set.one_shot);
    return set;
}

json PromptTemplateSet::digests() const {
    json out = json::object();
    for (const auto& [a, t] : salience) {
        out["attribute_" + std::string(to_string(a))] = json{{"id", t.id}, {"digest", t.digest()}};
    }
    auto add = [&](const char* name, const PromptTemplate& t) {
        out[name] = json{{"id", t.id}, {"digest", t.digest()}};
    };
    add("final", final_agent);
    add("final_empty", final_agent_empty);
    add("base", base);
    add("cot", cot);
    add("one_shot", one_shot);
    return out;
}

std::string render_salience_prompt(const PromptTemplateSet& templates, AttributeId attribute) {
    return render_template(templates.salience.at(attribute).text,
                           {{"attribute_name", std::string(to_string(attribute))},
                            {"attribute_definition", std::string(attribute_definition(attribute))}});
}

std::string build_bottleneck_prompt(AttrSet support, const PromptTemplateSet& templates,
                                    const EmotionVocabulary& vocab) {
    if (support.empty()) {
        return render_template(templates.final_agent_empty.text,
                               {{"emotion_vocab", vocab.joined()}});
    }
    std::string cues;
    for (auto a : support.members()) {
        cues += "- " + std::string(to_string(a)) + ": " + std::string(attribute_definition(a)) + "\n";
    }
    while (!cues.empty() && cues.back() == '\n') cues.pop_back();
    return render_template(templates.final_agent.text,
                           {{"salient_attributes", cues}, {"emotion_vocab", vocab.joined()}});
}

std::string render_baseline_prompt(const PromptTemplateSet& templates, const std::string& method,
                                   const EmotionVocabulary& vocab) {
    const PromptTemplate* tpl = nullptr;
    if (method == "base") tpl = &templates.base;
    else if (method == "cot" || method == "cot_sft") tpl = &templates.cot;
    else if (method == "one_shot") tpl = &templates.one_shot;
    if (tpl == nullptr) throw ConfigError("unknown baseline method \"" + method + "\"");
    return render_template(tpl->text, {{"emotion_vocab", vocab.joined()}});
}

} // namespace agsr
