#pragma once

#include "agsr/attributes.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace agsr {

// Asymmetric overlap penalties: alpha weighs false positives, beta false
// negatives. The reference configuration is alpha=0.8, beta=0.2.
struct TverskyParams {
    double alpha = 0.8;
    double beta = 0.2;
};

// Dice(P,G) = 2|P∩G| / (|P|+|G|). Both-empty scores 1.0: agreement that
// nothing is salient is perfect agreement.
double dice(AttrSet p, AttrSet g);

// Tversky(P,G) = |P∩G| / (|P∩G| + alpha|P\G| + beta|G\P|); both-empty -> 1.0.
double tversky(AttrSet p, AttrSet g, TverskyParams params);

struct AttrPairScore {
    double dice = 0.0;
    double tversky = 0.0;
};

struct AlignmentSummary {
    double sample_wise_mean_dice = 0.0;
    double sample_wise_mean_tversky = 0.0;
    double attribute_wise_mean_dice = 0.0;
    double attribute_wise_mean_tversky = 0.0;
    std::map<AttributeId, AttrPairScore> per_attribute;
    std::size_t n_samples = 0;
};

using AlignmentPair = std::pair<AttrSet, AttrSet>; // (predicted, gold)

// Unweighted mean over samples of per-sample dice/tversky.
std::pair<double, double> sample_wise_alignment(std::span<const AlignmentPair> pairs,
                                                TverskyParams params);

// Per attribute a, score dice/tversky of the index sets
// P_a = {i : a in P_i} vs G_a = {i : a in G_i}; the attribute-wise mean is
// the unweighted mean of the five per-attribute scores.
struct AttributeWiseResult {
    std::map<AttributeId, AttrPairScore> per_attribute;
    double mean_dice = 0.0;
    double mean_tversky = 0.0;
};
AttributeWiseResult attribute_wise_alignment(std::span<const AlignmentPair> pairs,
                                             TverskyParams params);

AlignmentSummary alignment_summary(std::span<const AlignmentPair> pairs, TverskyParams params);

// Fraction of exact matches. Labels are compared verbatim; callers normalize
// beforehand and exclude unmapped samples.
double accuracy(std::span<const std::string> preds, std::span<const std::string> gold);

// Unweighted mean of the three accuracy columns.
double average_accuracy(double emotion, double arousal, double valence);

// |P \ G|: number of false-positive attributes admitted into the reasoning.
std::size_t flooding_count(AttrSet p, AttrSet g);

// l0 norm of a salience vector.
std::size_t sparsity(const SalienceVector& s);

// Count of maximal whitespace-delimited units. The report layer records the
// tokenizer name because length comparisons depend on it.
std::size_t token_count(std::string_view text);
inline constexpr std::string_view kTokenizerName = "whitespace";

struct CompactnessRecord {
    std::size_t tokens = 0;
    bool emotion_correct = false;
    bool arousal_correct = false;
    bool valence_correct = false;
};

// Mean token counts: overall plus conditioned on each prediction being
// correct. Empty conditional subsets are reported as absent, not 0.
struct CompactnessSummary {
    double overall_mean = 0.0;
    std::optional<double> emotion_correct_mean;
    std::optional<double> arousal_correct_mean;
    std::optional<double> valence_correct_mean;
    std::size_t n = 0;
};
CompactnessSummary compactness_summary(std::span<const CompactnessRecord> records);

} // namespace agsr
