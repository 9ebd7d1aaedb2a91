#pragma once

#include "agsr/agreement.hpp"
#include "agsr/dataset.hpp"
#include "agsr/metrics.hpp"
#include "agsr/pipeline.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace agsr {

struct Accuracies {
    double emotion = 0.0;
    double arousal = 0.0;
    double valence = 0.0;
    double average = 0.0; // unweighted mean of the three
};

struct FloodingStats {
    double mean_flooding = 0.0;
    double flooding_regime_fraction = 0.0; // fraction of records citing all five
    double mean_sparsity = 0.0;
    std::size_t n = 0;
};

// Fractions internally; rendered as percents only at report time. Absent
// sections are omitted, never zeroed.
struct EvaluationReport {
    std::string run_ref;
    std::string manifest_digest;
    std::string gold_digest;
    std::string condition;
    std::string model_id;
    std::string tokenizer{kTokenizerName};
    TverskyParams params;
    std::size_t n_records = 0;
    std::size_t n_samples = 0;  // included in accuracies
    std::size_t n_excluded = 0; // unmapped gold labels
    std::optional<Accuracies> accuracies;
    std::optional<AlignmentSummary> alignment;
    std::optional<FloodingStats> flooding;
    std::optional<CompactnessSummary> compactness;
    std::map<std::string, std::size_t> parse_failures; // "stage1:Kind" / "final:Kind"
    std::size_t backend_errors = 0;
};

EvaluationReport score_run(const RunArtifact& run, const Dataset& gold, TverskyParams params);

json report_to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const json& raw);
EvaluationReport load_report(const std::filesystem::path& path);

std::string render_markdown(const EvaluationReport& report);
std::string render_csv(const EvaluationReport& report);

enum class ReportFormat { markdown, csv, json_format };

// Writes report.json / report.md / report.csv into out_dir.
void render(const EvaluationReport& report, const std::filesystem::path& out_dir);

struct RunComparison {
    std::string ref_a;
    std::string ref_b;
    std::map<std::string, double> deltas; // metric -> b - a
    std::map<AttributeId, AttrPairScore> attribute_deltas;
};

// Signed deltas b - a; both reports must be scored against the same gold.
RunComparison compare_runs(const EvaluationReport& a, const EvaluationReport& b);
std::string render_comparison(const RunComparison& cmp);

struct AgreementRow {
    std::string section;
    double true_proportion = 0.0; // mean item-level proportion of "true"
    double percent_agreement = 0.0;
    double ac1 = 0.0;
    std::size_t n_items = 0;
};

// Ratings file: JSONL {item_id, rater_id, value, section?}.
std::map<std::string, RatingMatrix> load_ratings(const std::filesystem::path& path);
std::vector<AgreementRow> agreement_report(const std::map<std::string, RatingMatrix>& sections);
std::string render_agreement(const std::vector<AgreementRow>& rows);

} // namespace agsr
