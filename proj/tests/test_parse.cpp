#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "agsr/io.hpp"
#include "agsr/parse.hpp"

#include <filesystem>
#include <random>
#include <string>
#include <variant>

using namespace agsr;

namespace {

const std::filesystem::path kFixtures = AGSR_FIXTURES_DIR;

EmotionVocabulary test_vocab() {
    EmotionVocabulary vocab({"Calm", "Excited", "Contentment", "Awe", "Melancholy", "Serenity",
                             "Joy", "Sadness", "Fear", "Anger", "Nostalgia", "Tension"});
    vocab.add_alias("Contentment", "content");
    vocab.add_alias("Calm", "calmness");
    vocab.add_alias("Sadness", "sorrow");
    return vocab;
}

} // namespace

TEST_CASE("first JSON object extraction") {
    CHECK(extract_first_json_object(R"({"salient": true})") == R"({"salient": true})");
    CHECK(extract_first_json_object("prose before {\"a\": 1} prose after") == "{\"a\": 1}");
    CHECK(extract_first_json_object("```json\n{\"a\": {\"b\": 2}}\n```") == "{\"a\": {\"b\": 2}}");
    CHECK(extract_first_json_object(R"(text with a "{" quote {"a": "}"} end)") == R"({"a": "}"})");
    CHECK_FALSE(extract_first_json_object("no json here").has_value());
    CHECK_FALSE(extract_first_json_object("{broken").has_value());
    // Unparseable balanced braces fall through to the next candidate.
    CHECK(extract_first_json_object("{not json} {\"ok\": 1}") == "{\"ok\": 1}");
}

TEST_CASE("salience parsing examples") {
    SUBCASE("canonical JSON") {
        auto r = parse_salience_response(R"({"salient": true})", AttributeId::color);
        auto& d = std::get<SalienceDecision>(r);
        CHECK(d.salient);
        CHECK(d.parse_path == ParsePath::canonical_json);
        CHECK(d.attribute == AttributeId::color);
    }
    SUBCASE("leading-token fallback") {
        auto r = parse_salience_response("Yes - the color palette drives the melancholy.",
                                         AttributeId::color);
        auto& d = std::get<SalienceDecision>(r);
        CHECK(d.salient);
        CHECK(d.parse_path == ParsePath::fallback_keyword);
    }
    SUBCASE("ambiguity is a typed failure") {
        auto r = parse_salience_response("It is hard to say.", AttributeId::line);
        auto& f = std::get<ParseFailure>(r);
        CHECK(f.kind == ParseFailureKind::Ambiguous);
        CHECK(f.raw == "It is hard to say.");
    }
    SUBCASE("empty input") {
        auto r = parse_salience_response("   \n ", AttributeId::light);
        CHECK(std::get<ParseFailure>(r).kind == ParseFailureKind::Empty);
    }
}

TEST_CASE("final parsing examples") {
    const EmotionVocabulary vocab = test_vocab();
    SUBCASE("canonical JSON") {
        auto r = parse_final_response(
            R"({"emotion":"Calm","arousal":"low","valence":"positive","explanation":"Muted palette."})",
            vocab);
        auto& p = std::get<FinalPrediction>(r);
        CHECK(p.emotion == "Calm");
        CHECK(p.arousal == "low");
        CHECK(p.valence == "positive");
        CHECK(p.explanation == "Muted palette.");
        CHECK(p.parse_path == ParsePath::canonical_json);
    }
    SUBCASE("labeled-line fallback with alias normalization") {
        auto r = parse_final_response(
            "Emotion: contentment\nArousal: Low\nValence: Positive\nThe soft glow rests evenly.",
            vocab);
        auto& p = std::get<FinalPrediction>(r);
        CHECK(p.emotion == "Contentment");
        CHECK(p.arousal == "low");
        CHECK(p.valence == "positive");
        CHECK(p.explanation == "The soft glow rests evenly.");
        CHECK(p.parse_path == ParsePath::fallback_keyword);
    }
    SUBCASE("unknown emotion label") {
        auto r = parse_final_response(
            R"({"emotion":"serene-ish","arousal":"low","valence":"positive","explanation":"x"})",
            vocab);
        CHECK(std::get<ParseFailure>(r).kind == ParseFailureKind::UnknownLabel);
    }
    SUBCASE("missing labels") {
        auto r = parse_final_response("Emotion: Calm\nNothing else follows.", vocab);
        CHECK(std::get<ParseFailure>(r).kind == ParseFailureKind::SchemaMismatch);
        auto r2 = parse_final_response("Just some prose about the painting.", vocab);
        CHECK(std::get<ParseFailure>(r2).kind == ParseFailureKind::NoJsonFound);
    }
    SUBCASE("bad arousal token") {
        auto r = parse_final_response(
            R"({"emotion":"Calm","arousal":"medium","valence":"positive","explanation":"x"})",
            vocab);
        CHECK(std::get<ParseFailure>(r).kind == ParseFailureKind::SchemaMismatch);
    }
    SUBCASE("cited attribute list") {
        auto r = parse_final_response(
            R"({"emotion":"Tension","arousal":"high","valence":"negative","salient_attributes":["line","composition"],"explanation":"x"})",
            vocab);
        auto& p = std::get<FinalPrediction>(r);
        REQUIRE(p.cited_attributes.has_value());
        CHECK(*p.cited_attributes == AttrSet{AttributeId::composition, AttributeId::line});
    }
}

TEST_CASE("normalize_emotion") {
    const EmotionVocabulary vocab = test_vocab();
    CHECK(normalize_emotion(" CALM.", vocab) == std::optional<std::string>("Calm"));
    CHECK(normalize_emotion("content", vocab) == std::optional<std::string>("Contentment"));
    CHECK_FALSE(normalize_emotion("blue-ish mood", vocab).has_value());
}

TEST_CASE("canonical serializations round-trip") {
    const EmotionVocabulary vocab = test_vocab();
    SUBCASE("salience decisions, exhaustively") {
        for (auto a : all_attributes()) {
            for (bool salient : {false, true}) {
                SalienceDecision d;
                d.attribute = a;
                d.salient = salient;
                auto r = parse_salience_response(serialize_salience_decision(d), a);
                auto& back = std::get<SalienceDecision>(r);
                CHECK(back.attribute == a);
                CHECK(back.salient == salient);
                CHECK(back.parse_path == ParsePath::canonical_json);
            }
        }
    }
    SUBCASE("final predictions") {
        FinalPrediction p;
        p.emotion = "Melancholy";
        p.arousal = "low";
        p.valence = "negative";
        p.explanation = "Thin late glow on the wall.";
        p.cited_attributes = AttrSet{AttributeId::light};
        auto r = parse_final_response(serialize_final_prediction(p), vocab);
        auto& back = std::get<FinalPrediction>(r);
        CHECK(back.emotion == p.emotion);
        CHECK(back.arousal == p.arousal);
        CHECK(back.valence == p.valence);
        CHECK(back.explanation == p.explanation);
        CHECK(back.cited_attributes == p.cited_attributes);
    }
}

TEST_CASE("shipped response corpus parses at >= 95% with typed failures") {
    const EmotionVocabulary vocab = test_vocab();
    std::size_t total = 0;
    std::size_t ok = 0;
    for (const auto& rec : read_jsonl(kFixtures / "parser_corpus.jsonl")) {
        ++total;
        const json& expect = rec.value["expect"];
        const std::string text = rec.value["text"].get<std::string>();
        if (rec.value["kind"] == "salience") {
            const AttributeId attr =
                *attribute_from_string(rec.value.value("attribute", std::string("color")));
            auto r = parse_salience_response(text, attr);
            if (expect["ok"].get<bool>()) {
                INFO("corpus id ", rec.value["id"].get<int>(), ": ", text);
                REQUIRE(std::holds_alternative<SalienceDecision>(r));
                auto& d = std::get<SalienceDecision>(r);
                CHECK(d.salient == expect["salient"].get<bool>());
                CHECK(to_string(d.parse_path) == expect["path"].get<std::string>());
                ++ok;
            } else {
                REQUIRE(std::holds_alternative<ParseFailure>(r));
                auto& f = std::get<ParseFailure>(r);
                CHECK(to_string(f.kind) == expect["failure"].get<std::string>());
                CHECK(f.raw == text); // verbatim raw text preserved
            }
        } else {
            auto r = parse_final_response(text, vocab);
            if (expect["ok"].get<bool>()) {
                INFO("corpus id ", rec.value["id"].get<int>(), ": ", text);
                REQUIRE(std::holds_alternative<FinalPrediction>(r));
                auto& p = std::get<FinalPrediction>(r);
                CHECK(p.emotion == expect["emotion"].get<std::string>());
                CHECK(p.arousal == expect["arousal"].get<std::string>());
                CHECK(p.valence == expect["valence"].get<std::string>());
                if (expect.contains("cited")) {
                    AttrSet cited;
                    for (const auto& name : expect["cited"]) {
                        cited.insert(*attribute_from_string(name.get<std::string>()));
                    }
                    REQUIRE(p.cited_attributes.has_value());
                    CHECK(*p.cited_attributes == cited);
                }
                ++ok;
            } else {
                REQUIRE(std::holds_alternative<ParseFailure>(r));
                auto& f = std::get<ParseFailure>(r);
                CHECK(to_string(f.kind) == expect["failure"].get<std::string>());
                CHECK(f.raw == text);
            }
        }
    }
    CHECK(total >= 60);
    CHECK(static_cast<double>(ok) / static_cast<double>(total) >= 0.95);
}

TEST_CASE("parsers never throw on arbitrary byte strings") {
    const EmotionVocabulary vocab = test_vocab();
    std::mt19937 rng(0xF00D);
    for (int i = 0; i < 10000; ++i) {
        const std::size_t len = rng() % 120;
        std::string bytes;
        bytes.reserve(len);
        for (std::size_t j = 0; j < len; ++j) {
            bytes.push_back(static_cast<char>(rng() % 256));
        }
        CHECK_NOTHROW((void)parse_salience_response(bytes, AttributeId::color));
        CHECK_NOTHROW((void)parse_final_response(bytes, vocab));
    }
}
