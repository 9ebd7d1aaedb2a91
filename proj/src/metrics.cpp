#include "agsr/metrics.hpp"

#include "agsr/errors.hpp"

#include <cctype>

namespace agsr {

namespace {

// Shared overlap forms in terms of true positives / false positives /
// false negatives, used both for attribute sets and for index sets.
double dice_from_counts(double tp, double fp, double fn) {
    const double denom = 2.0 * tp + fp + fn;
    if (denom == 0.0) return 1.0; // both sets empty
    return 2.0 * tp / denom;
}

double tversky_from_counts(double tp, double fp, double fn, TverskyParams params) {
    const double denom = tp + params.alpha * fp + params.beta * fn;
    if (tp == 0.0 && fp == 0.0 && fn == 0.0) return 1.0; // both sets empty
    if (denom == 0.0) return 0.0; // alpha=beta=0 with no overlap
    return tp / denom;
}

} // namespace

double dice(AttrSet p, AttrSet g) {
    const double tp = static_cast<double>((p & g).size());
    const double fp = static_cast<double>((p - g).size());
    const double fn = static_cast<double>((g - p).size());
    return dice_from_counts(tp, fp, fn);
}

double tversky(AttrSet p, AttrSet g, TverskyParams params) {
    const double tp = static_cast<double>((p & g).size());
    const double fp = static_cast<double>((p - g).size());
    const double fn = static_cast<double>((g - p).size());
    return tversky_from_counts(tp, fp, fn, params);
}

std::pair<double, double> sample_wise_alignment(std::span<const AlignmentPair> pairs,
                                                TverskyParams params) {
    if (pairs.empty()) throw EmptyInput("sample_wise_alignment: empty input");
    double d = 0.0;
    double t = 0.0;
    for (const auto& [p, g] : pairs) {
        d += dice(p, g);
        t += tversky(p, g, params);
    }
    const double n = static_cast<double>(pairs.size());
    return {d / n, t / n};
}

AttributeWiseResult attribute_wise_alignment(std::span<const AlignmentPair> pairs,
                                             TverskyParams params) {
    if (pairs.empty()) throw EmptyInput("attribute_wise_alignment: empty input");
    AttributeWiseResult out;
    double dsum = 0.0;
    double tsum = 0.0;
    for (auto a : all_attributes()) {
        // Index sets over samples: P_a = {i : a in P_i}, G_a = {i : a in G_i}.
        double tp = 0.0;
        double fp = 0.0;
        double fn = 0.0;
        for (const auto& [p, g] : pairs) {
            const bool in_p = p.contains(a);
            const bool in_g = g.contains(a);
            if (in_p && in_g) tp += 1.0;
            else if (in_p) fp += 1.0;
            else if (in_g) fn += 1.0;
        }
        AttrPairScore score;
        score.dice = dice_from_counts(tp, fp, fn);
        score.tversky = tversky_from_counts(tp, fp, fn, params);
        out.per_attribute[a] = score;
        dsum += score.dice;
        tsum += score.tversky;
    }
    out.mean_dice = dsum / static_cast<double>(kNumAttributes);
    out.mean_tversky = tsum / static_cast<double>(kNumAttributes);
    return out;
}

AlignmentSummary alignment_summary(std::span<const AlignmentPair> pairs, TverskyParams params) {
    AlignmentSummary s;
    auto [sd, st] = sample_wise_alignment(pairs, params);
    s.sample_wise_mean_dice = sd;
    s.sample_wise_mean_tversky = st;
    auto aw = attribute_wise_alignment(pairs, params);
    s.attribute_wise_mean_dice = aw.mean_dice;
    s.attribute_wise_mean_tversky = aw.mean_tversky;
    s.per_attribute = std::move(aw.per_attribute);
    s.n_samples = pairs.size();
    return s;
}

double accuracy(std::span<const std::string> preds, std::span<const std::string> gold) {
    if (preds.size() != gold.size()) throw LengthMismatch("accuracy: prediction/gold length mismatch");
    if (preds.empty()) throw EmptyInput("accuracy: empty input");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i] == gold[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(preds.size());
}

double average_accuracy(double emotion, double arousal, double valence) {
    return (emotion + arousal + valence) / 3.0;
}

std::size_t flooding_count(AttrSet p, AttrSet g) {
    return (p - g).size();
}

std::size_t sparsity(const SalienceVector& s) {
    return s.sparsity();
}

std::size_t token_count(std::string_view text) {
    std::size_t n = 0;
    bool in_token = false;
    for (char c : text) {
        const bool ws = std::isspace(static_cast<unsigned char>(c)) != 0;
        if (!ws && !in_token) {
            ++n;
            in_token = true;
        } else if (ws) {
            in_token = false;
        }
    }
    return n;
}

CompactnessSummary compactness_summary(std::span<const CompactnessRecord> records) {
    if (records.empty()) throw EmptyInput("compactness_summary: empty input");
    CompactnessSummary s;
    s.n = records.size();
    double total = 0.0;
    double emo_sum = 0.0, aro_sum = 0.0, val_sum = 0.0;
    std::size_t emo_n = 0, aro_n = 0, val_n = 0;
    for (const auto& r : records) {
        const double tok = static_cast<double>(r.tokens);
        total += tok;
        if (r.emotion_correct) { emo_sum += tok; ++emo_n; }
        if (r.arousal_correct) { aro_sum += tok; ++aro_n; }
        if (r.valence_correct) { val_sum += tok; ++val_n; }
    }
    s.overall_mean = total / static_cast<double>(records.size());
    if (emo_n > 0) s.emotion_correct_mean = emo_sum / static_cast<double>(emo_n);
    if (aro_n > 0) s.arousal_correct_mean = aro_sum / static_cast<double>(aro_n);
    if (val_n > 0) s.valence_correct_mean = val_sum / static_cast<double>(val_n);
    return s;
}

} // namespace agsr
