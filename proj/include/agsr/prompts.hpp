#pragma once

#include "agsr/attributes.hpp"
#include "agsr/io.hpp"
#include "agsr/vocab.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace agsr {

// One-line cue definitions. Each definition mentions only its own attribute,
// so a rendered bottleneck prompt never names a cue outside the support.
std::string_view attribute_definition(AttributeId a);

struct PromptTemplate {
    std::string id;
    std::string text;
    std::string digest() const;
};

// Substitutes {lowercase_identifier} placeholders; other brace content (for
// example JSON snippets) passes through verbatim. Unbound placeholders raise
// TemplateError.
std::string render_template(const std::string& text,
                            const std::map<std::string, std::string>& bindings);

struct PromptTemplateSet {
    std::map<AttributeId, PromptTemplate> salience;
    PromptTemplate final_agent;
    PromptTemplate final_agent_empty; // no-salient-cue variant
    PromptTemplate base;
    PromptTemplate cot;
    PromptTemplate one_shot;

    static PromptTemplateSet defaults();
    // Overrides defaults with any of attribute_<name>.txt, final.txt,
    // final_empty.txt, base.txt, cot.txt, one_shot.txt present in dir.
    static PromptTemplateSet load_dir(const std::filesystem::path& dir);

    json digests() const;
};

std::string render_salience_prompt(const PromptTemplateSet& templates, AttributeId attribute);

// Names and defines ONLY the attributes in the support; empty support
// renders the documented no-salient-cue variant.
std::string build_bottleneck_prompt(AttrSet support, const PromptTemplateSet& templates,
                                    const EmotionVocabulary& vocab);

std::string render_baseline_prompt(const PromptTemplateSet& templates, const std::string& method,
                                   const EmotionVocabulary& vocab);

} // namespace agsr
