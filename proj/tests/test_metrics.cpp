#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "agsr/errors.hpp"
#include "agsr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace agsr;

namespace {

// Independent brute force over explicit membership arrays; no AttrSet bit
// tricks. Kept deliberately separate from the implementation path.
struct BoolSet {
    bool member[5] = {false, false, false, false, false};

    static BoolSet from_mask(unsigned mask) {
        BoolSet s;
        for (int i = 0; i < 5; ++i) s.member[i] = (mask >> i) & 1u;
        return s;
    }
    int count() const {
        int n = 0;
        for (bool b : member) n += b ? 1 : 0;
        return n;
    }
};

double brute_dice(const BoolSet& p, const BoolSet& g) {
    int inter = 0, psz = 0, gsz = 0;
    for (int i = 0; i < 5; ++i) {
        if (p.member[i] && g.member[i]) ++inter;
        if (p.member[i]) ++psz;
        if (g.member[i]) ++gsz;
    }
    if (psz + gsz == 0) return 1.0;
    return 2.0 * inter / (psz + gsz);
}

double brute_tversky(const BoolSet& p, const BoolSet& g, double alpha, double beta) {
    int inter = 0, ponly = 0, gonly = 0;
    for (int i = 0; i < 5; ++i) {
        if (p.member[i] && g.member[i]) ++inter;
        else if (p.member[i]) ++ponly;
        else if (g.member[i]) ++gonly;
    }
    if (inter + ponly + gonly == 0) return 1.0;
    const double denom = inter + alpha * ponly + beta * gonly;
    if (denom == 0.0) return 0.0;
    return inter / denom;
}

AttrSet set_from_mask(unsigned mask) {
    return AttrSet::from_bits(static_cast<std::uint8_t>(mask));
}

} // namespace

TEST_CASE("dice worked examples") {
    const AttrSet cc{AttributeId::color, AttributeId::composition};
    CHECK(dice(cc, cc) == doctest::Approx(1.0));
    CHECK(dice({AttributeId::color, AttributeId::line}, cc) == doctest::Approx(0.5));
    CHECK(dice({}, {AttributeId::light}) == doctest::Approx(0.0));
    CHECK(dice({}, {}) == doctest::Approx(1.0));
}

TEST_CASE("tversky worked examples") {
    const TverskyParams paper{0.8, 0.2};
    CHECK(tversky({AttributeId::color, AttributeId::line}, {AttributeId::color}, paper) ==
          doctest::Approx(1.0 / 1.8).epsilon(1e-12));
    CHECK(tversky({AttributeId::color}, {AttributeId::color, AttributeId::line}, paper) ==
          doctest::Approx(1.0 / 1.2).epsilon(1e-12));
    CHECK(tversky({}, {}, paper) == doctest::Approx(1.0));
    for (unsigned mask = 0; mask < 32; ++mask) {
        const AttrSet s = set_from_mask(mask);
        CHECK(tversky(s, s, paper) == doctest::Approx(1.0));
    }
}

TEST_CASE("dice and tversky match the brute-force oracle on all 1024 pairs") {
    const std::vector<TverskyParams> params = {{0.8, 0.2}, {0.5, 0.5}, {0.2, 0.8}};
    for (unsigned pm = 0; pm < 32; ++pm) {
        for (unsigned gm = 0; gm < 32; ++gm) {
            const AttrSet p = set_from_mask(pm);
            const AttrSet g = set_from_mask(gm);
            const BoolSet bp = BoolSet::from_mask(pm);
            const BoolSet bg = BoolSet::from_mask(gm);
            CHECK(std::abs(dice(p, g) - brute_dice(bp, bg)) < 1e-12);
            for (const auto& tp : params) {
                CHECK(std::abs(tversky(p, g, tp) - brute_tversky(bp, bg, tp.alpha, tp.beta)) <
                      1e-12);
            }
        }
    }
}

TEST_CASE("overlap metric algebra") {
    SUBCASE("dice is symmetric") {
        for (unsigned pm = 0; pm < 32; ++pm) {
            for (unsigned gm = 0; gm < 32; ++gm) {
                CHECK(dice(set_from_mask(pm), set_from_mask(gm)) ==
                      doctest::Approx(dice(set_from_mask(gm), set_from_mask(pm))).epsilon(1e-12));
            }
        }
    }
    SUBCASE("tversky(P,G,a,b) == tversky(G,P,b,a)") {
        std::mt19937 rng(42);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int trial = 0; trial < 10; ++trial) {
            const TverskyParams tp{unit(rng), unit(rng)};
            const TverskyParams swapped{tp.beta, tp.alpha};
            for (unsigned pm = 0; pm < 32; ++pm) {
                for (unsigned gm = 0; gm < 32; ++gm) {
                    CHECK(std::abs(tversky(set_from_mask(pm), set_from_mask(gm), tp) -
                                   tversky(set_from_mask(gm), set_from_mask(pm), swapped)) < 1e-12);
                }
            }
        }
    }
    SUBCASE("tversky with alpha=beta=0.5 equals dice") {
        const TverskyParams half{0.5, 0.5};
        for (unsigned pm = 0; pm < 32; ++pm) {
            for (unsigned gm = 0; gm < 32; ++gm) {
                CHECK(std::abs(tversky(set_from_mask(pm), set_from_mask(gm), half) -
                               dice(set_from_mask(pm), set_from_mask(gm))) < 1e-12);
            }
        }
    }
    SUBCASE("scores live in [0,1] and hit 1 iff P == G") {
        const TverskyParams paper{0.8, 0.2};
        for (unsigned pm = 0; pm < 32; ++pm) {
            for (unsigned gm = 0; gm < 32; ++gm) {
                const double d = dice(set_from_mask(pm), set_from_mask(gm));
                const double t = tversky(set_from_mask(pm), set_from_mask(gm), paper);
                CHECK(d >= 0.0);
                CHECK(d <= 1.0);
                CHECK(t >= 0.0);
                CHECK(t <= 1.0);
                if (pm == gm) {
                    CHECK(d == doctest::Approx(1.0));
                    CHECK(t == doctest::Approx(1.0));
                } else {
                    CHECK(d < 1.0);
                    CHECK(t < 1.0);
                }
            }
        }
    }
    SUBCASE("false positives cost more than false negatives at alpha=0.8") {
        // Needs |G| >= 2: dropping the only gold member leaves P empty with
        // no true positives, which scores 0 for any beta.
        const TverskyParams paper{0.8, 0.2};
        for (unsigned gm = 1; gm < 32; ++gm) {
            const AttrSet g = set_from_mask(gm);
            if (g.size() < 2) continue;
            for (auto add : all_attributes()) {
                if (g.contains(add)) continue;
                AttrSet with_fp = g;
                with_fp.insert(add);
                for (auto drop : g.members()) {
                    AttrSet with_fn = g;
                    with_fn.erase(drop);
                    CHECK(tversky(with_fp, g, paper) < tversky(with_fn, g, paper));
                }
            }
        }
    }
}

TEST_CASE("sample-wise alignment") {
    const TverskyParams paper{0.8, 0.2};
    SUBCASE("identical pairs give 1.0") {
        std::vector<AlignmentPair> pairs(4, {AttrSet{AttributeId::line}, AttrSet{AttributeId::line}});
        auto [d, t] = sample_wise_alignment(pairs, paper);
        CHECK(d == doctest::Approx(1.0));
        CHECK(t == doctest::Approx(1.0));
    }
    SUBCASE("mixed example averages per-sample dice") {
        std::vector<AlignmentPair> pairs = {
            {AttrSet{AttributeId::color, AttributeId::line},
             AttrSet{AttributeId::color, AttributeId::composition}},
            {AttrSet{}, AttrSet{}},
        };
        auto [d, t] = sample_wise_alignment(pairs, paper);
        CHECK(d == doctest::Approx(0.75).epsilon(1e-12));
        (void)t;
    }
    SUBCASE("single pair equals per-pair score") {
        std::vector<AlignmentPair> pairs = {
            {AttrSet{AttributeId::color}, AttrSet{AttributeId::color, AttributeId::line}}};
        auto [d, t] = sample_wise_alignment(pairs, paper);
        CHECK(d == doctest::Approx(dice(pairs[0].first, pairs[0].second)).epsilon(1e-12));
        CHECK(t == doctest::Approx(tversky(pairs[0].first, pairs[0].second, paper)).epsilon(1e-12));
    }
    SUBCASE("empty input throws") {
        std::vector<AlignmentPair> pairs;
        CHECK_THROWS_AS((void)sample_wise_alignment(pairs, paper), EmptyInput);
    }
    SUBCASE("permutation invariance") {
        std::vector<AlignmentPair> pairs;
        std::mt19937 rng(7);
        for (int i = 0; i < 20; ++i) {
            pairs.push_back({set_from_mask(rng() % 32), set_from_mask(rng() % 32)});
        }
        auto [d1, t1] = sample_wise_alignment(pairs, paper);
        std::shuffle(pairs.begin(), pairs.end(), rng);
        auto [d2, t2] = sample_wise_alignment(pairs, paper);
        CHECK(d1 == doctest::Approx(d2).epsilon(1e-12));
        CHECK(t1 == doctest::Approx(t2).epsilon(1e-12));
    }
}

TEST_CASE("attribute-wise alignment uses index sets over samples") {
    const TverskyParams paper{0.8, 0.2};
    SUBCASE("perfect predictions score 1.0 everywhere") {
        std::vector<AlignmentPair> pairs;
        for (unsigned m = 0; m < 8; ++m) pairs.push_back({set_from_mask(m), set_from_mask(m)});
        auto result = attribute_wise_alignment(pairs, paper);
        for (auto a : all_attributes()) {
            CHECK(result.per_attribute.at(a).dice == doctest::Approx(1.0));
            CHECK(result.per_attribute.at(a).tversky == doctest::Approx(1.0));
        }
        CHECK(result.mean_dice == doctest::Approx(1.0));
    }
    SUBCASE("never-predicted attribute present in gold scores 0.0") {
        // Mirrors the cross-dataset behavior where one cue never transfers.
        std::vector<AlignmentPair> pairs = {
            {AttrSet{AttributeId::color}, AttrSet{AttributeId::color, AttributeId::light}},
            {AttrSet{AttributeId::composition}, AttrSet{AttributeId::composition, AttributeId::light}},
        };
        auto result = attribute_wise_alignment(pairs, paper);
        CHECK(result.per_attribute.at(AttributeId::light).dice == doctest::Approx(0.0));
        CHECK(result.per_attribute.at(AttributeId::light).tversky == doctest::Approx(0.0));
    }
    SUBCASE("hand-built three-sample case matches an index-set oracle") {
        // Sample 0: P={color},       G={color, line}
        // Sample 1: P={color, line}, G={line}
        // Sample 2: P={light},       G={color}
        std::vector<AlignmentPair> pairs = {
            {AttrSet{AttributeId::color}, AttrSet{AttributeId::color, AttributeId::line}},
            {AttrSet{AttributeId::color, AttributeId::line}, AttrSet{AttributeId::line}},
            {AttrSet{AttributeId::light}, AttrSet{AttributeId::color}},
        };
        // color: P_a={0,1}, G_a={0,2} -> |inter|=1 -> dice 2/4, tversky 1/(1+.8+.2)
        // line:  P_a={1},   G_a={0,1} -> dice 2/3, tversky 1/(1+.2)
        // light: P_a={2},   G_a={}    -> dice 0, tversky 0
        // composition, brushstroke: both empty -> 1.0
        auto result = attribute_wise_alignment(pairs, paper);
        CHECK(result.per_attribute.at(AttributeId::color).dice == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(result.per_attribute.at(AttributeId::color).tversky ==
              doctest::Approx(0.5).epsilon(1e-12));
        CHECK(result.per_attribute.at(AttributeId::line).dice ==
              doctest::Approx(2.0 / 3.0).epsilon(1e-12));
        CHECK(result.per_attribute.at(AttributeId::line).tversky ==
              doctest::Approx(1.0 / 1.2).epsilon(1e-12));
        CHECK(result.per_attribute.at(AttributeId::light).dice == doctest::Approx(0.0));
        CHECK(result.per_attribute.at(AttributeId::composition).dice == doctest::Approx(1.0));
        CHECK(result.per_attribute.at(AttributeId::brushstroke).dice == doctest::Approx(1.0));
        const double mean = (0.5 + 2.0 / 3.0 + 0.0 + 1.0 + 1.0) / 5.0;
        CHECK(result.mean_dice == doctest::Approx(mean).epsilon(1e-12));
    }
    SUBCASE("attribute-wise mean equals unweighted mean of the five scores") {
        std::mt19937 rng(11);
        std::vector<AlignmentPair> pairs;
        for (int i = 0; i < 40; ++i) {
            pairs.push_back({set_from_mask(rng() % 32), set_from_mask(rng() % 32)});
        }
        auto summary = alignment_summary(pairs, paper);
        double dsum = 0.0, tsum = 0.0;
        for (auto a : all_attributes()) {
            dsum += summary.per_attribute.at(a).dice;
            tsum += summary.per_attribute.at(a).tversky;
        }
        CHECK(summary.attribute_wise_mean_dice == doctest::Approx(dsum / 5.0).epsilon(1e-12));
        CHECK(summary.attribute_wise_mean_tversky == doctest::Approx(tsum / 5.0).epsilon(1e-12));
        CHECK(summary.n_samples == pairs.size());
    }
}

TEST_CASE("accuracy") {
    const std::vector<std::string> a = {"Calm", "Calm", "Excited"};
    const std::vector<std::string> b = {"Calm", "Excited", "Excited"};
    CHECK(accuracy(a, a) == doctest::Approx(1.0));
    CHECK(accuracy(a, b) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    const std::vector<std::string> shorter = {"Calm"};
    CHECK_THROWS_AS((void)accuracy(a, shorter), LengthMismatch);
    const std::vector<std::string> empty;
    CHECK_THROWS_AS((void)accuracy(empty, empty), EmptyInput);
}

TEST_CASE("average accuracy replicates the published main-results arithmetic") {
    struct Row {
        const char* model;
        const char* setting;
        double emotion, arousal, valence, average;
    };
    // All 14 model/setting rows with their published per-axis accuracies and
    // the published unweighted average, in percent.
    const Row rows[] = {
        {"Qwen3-VL", "base", 29.33, 56.67, 80.00, 55.33},
        {"Qwen3-VL", "cot", 29.33, 64.67, 85.33, 59.78},
        {"Qwen3-VL", "one_shot_cot", 37.33, 80.00, 85.33, 67.55},
        {"Qwen3-VL", "cot_sft", 48.67, 78.00, 88.00, 71.56},
        {"Qwen3-VL", "fabg", 50.00, 82.00, 90.00, 74.00},
        {"Kimi-VL", "base", 26.00, 62.00, 87.33, 58.44},
        {"Kimi-VL", "cot", 32.67, 70.67, 89.33, 64.22},
        {"Kimi-VL", "one_shot", 30.67, 80.67, 85.33, 65.56},
        {"Qwen2.5-VL", "base", 18.67, 68.67, 82.67, 56.67},
        {"Qwen2.5-VL", "cot", 36.00, 76.67, 85.33, 66.00},
        {"Qwen2.5-VL", "one_shot", 26.67, 73.33, 82.00, 60.67},
        {"MiniCPM-o-2.6", "base", 29.33, 74.67, 77.33, 60.44},
        {"MiniCPM-o-2.6", "cot", 35.33, 78.00, 75.33, 62.89},
        {"MiniCPM-o-2.6", "one_shot", 31.33, 76.00, 77.33, 61.55},
    };
    for (const auto& row : rows) {
        INFO(row.model, " / ", row.setting);
        CHECK(std::abs(average_accuracy(row.emotion, row.arousal, row.valence) - row.average) <
              0.01);
    }
    CHECK(average_accuracy(0, 0, 0) == doctest::Approx(0.0));
}

TEST_CASE("flooding count") {
    CHECK(flooding_count({AttributeId::color, AttributeId::line, AttributeId::light},
                         {AttributeId::color}) == 2);
    CHECK(flooding_count({AttributeId::color}, {AttributeId::color, AttributeId::line}) == 0);
    CHECK(flooding_count(AttrSet::full(), {}) == 5);
    SUBCASE("identity |P| - |P inter G| and zero iff subset") {
        for (unsigned pm = 0; pm < 32; ++pm) {
            for (unsigned gm = 0; gm < 32; ++gm) {
                const AttrSet p = set_from_mask(pm);
                const AttrSet g = set_from_mask(gm);
                CHECK(flooding_count(p, g) == p.size() - (p & g).size());
                CHECK((flooding_count(p, g) == 0) == p.subset_of(g));
            }
        }
    }
}

TEST_CASE("sparsity") {
    SalienceVector v;
    CHECK(sparsity(v) == 0);
    v.set(AttributeId::color, true);
    v.set(AttributeId::composition, true);
    CHECK(sparsity(v) == 2);
    CHECK(sparsity(SalienceVector(AttrSet::full())) == 5);
}

TEST_CASE("token count") {
    CHECK(token_count("") == 0);
    CHECK(token_count("A calm scene.") == 3);
    CHECK(token_count("  muted   palette ") == 2);
    CHECK(token_count(" \t\n ") == 0);
    CHECK(token_count("one\ntwo\tthree four") == 4);
}

TEST_CASE("compactness summary") {
    SUBCASE("constant case") {
        std::vector<CompactnessRecord> recs(3, {10, true, true, true});
        auto s = compactness_summary(recs);
        CHECK(s.overall_mean == doctest::Approx(10.0));
        CHECK(*s.emotion_correct_mean == doctest::Approx(10.0));
        CHECK(*s.arousal_correct_mean == doctest::Approx(10.0));
        CHECK(*s.valence_correct_mean == doctest::Approx(10.0));
    }
    SUBCASE("conditional means restrict to correct subsets") {
        std::vector<CompactnessRecord> recs = {{10, true, true, false}, {20, false, true, false}};
        auto s = compactness_summary(recs);
        CHECK(s.overall_mean == doctest::Approx(15.0));
        CHECK(*s.emotion_correct_mean == doctest::Approx(10.0));
        CHECK(*s.arousal_correct_mean == doctest::Approx(15.0));
        CHECK_FALSE(s.valence_correct_mean.has_value());
    }
    SUBCASE("empty input throws") {
        std::vector<CompactnessRecord> recs;
        CHECK_THROWS_AS((void)compactness_summary(recs), EmptyInput);
    }
}
