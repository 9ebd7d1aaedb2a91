#include "agsr/synthetic.hpp"

#include "agsr/rng.hpp"

#include <cstdio>

namespace agsr {

Dataset make_synthetic_dataset(std::size_t n, std::uint64_t seed) {
    Dataset ds;
    ds.name = "synthetic-" + std::to_string(n) + "-" + std::to_string(seed);
    ds.source = ArtworkSource::other;
    ds.vocabulary = EmotionVocabulary({"Calm", "Excited", "Contentment", "Awe", "Melancholy",
                                       "Serenity", "Joy", "Sadness", "Fear", "Anger", "Nostalgia",
                                       "Tension"});
    const auto& labels = ds.vocabulary.labels();
    for (std::size_t i = 0; i < n; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "syn%05zu", i);
        ArtworkRecord rec;
        rec.id = buf;
        rec.image_ref = "synthetic://" + rec.id;
        KeyedRng rng(seed, "synthetic:" + rec.id);
        AffectLabels affect;
        affect.emotion = labels[static_cast<std::size_t>(rng.next_below(labels.size()))];
        affect.arousal = rng.bernoulli(0.5) ? "high" : "low";
        affect.valence = rng.bernoulli(0.5) ? "positive" : "negative";
        rec.gold_affect = std::move(affect);
        ds.gold_salience[rec.id] =
            SalienceVector(AttrSet::from_bits(static_cast<std::uint8_t>(rng.next_below(32))));
        ds.artworks.push_back(std::move(rec));
    }
    return ds;
}

} // namespace agsr
