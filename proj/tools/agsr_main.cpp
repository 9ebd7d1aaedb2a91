#include "agsr/dataset.hpp"
#include "agsr/errors.hpp"
#include "agsr/pipeline.hpp"
#include "agsr/report.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <set>

namespace {

using namespace agsr;

constexpr int kExitOk = 0;
constexpr int kExitDataError = 1;
constexpr int kExitUsageError = 2;
constexpr int kExitBackendError = 3;

int cmd_validate(const std::filesystem::path& manifest_path) {
    json manifest = json::parse(read_file(manifest_path), nullptr, false);
    if (manifest.is_discarded() || !manifest.is_object()) {
        std::cerr << "error: manifest is not a JSON object: " << manifest_path << "\n";
        return kExitDataError;
    }
    if (!manifest.contains("records")) {
        std::cerr << "error: manifest missing \"records\" path\n";
        return kExitDataError;
    }
    const auto base = manifest_path.parent_path();
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_absolute() ? path : base / path;
    };

    EmotionVocabulary vocab;
    if (manifest.contains("vocabulary")) {
        for (const auto& l : manifest["vocabulary"]) vocab.add_label(l.get<std::string>());
    }
    if (manifest.contains("aliases")) {
        for (auto it = manifest["aliases"].begin(); it != manifest["aliases"].end(); ++it) {
            for (const auto& alias : it.value()) vocab.add_alias(it.key(), alias.get<std::string>());
        }
    }

    std::size_t n_violations = 0;
    std::set<std::string> ids;
    for (const auto& rec : read_jsonl(resolve(manifest["records"].get<std::string>()))) {
        ValidationReport report = validate_record(rec.value, vocab);
        for (const auto& v : report.violations) {
            std::cerr << "line " << rec.line << ": " << v.field << ": " << v.message << "\n";
            ++n_violations;
        }
        if (rec.value.contains("id") && rec.value["id"].is_string()) {
            const std::string id = rec.value["id"].get<std::string>();
            if (!ids.insert(id).second) {
                std::cerr << "line " << rec.line << ": id: duplicate id \"" << id << "\"\n";
                ++n_violations;
            }
        }
    }
    if (manifest.contains("salience")) {
        for (const auto& rec : read_jsonl(resolve(manifest["salience"].get<std::string>()))) {
            try {
                if (!rec.value.contains("artwork_id")) {
                    throw SchemaError("salience row missing artwork_id", rec.line);
                }
                salience_from_json(rec.value.value("salience", json::object()), rec.line);
                const std::string id = rec.value["artwork_id"].get<std::string>();
                if (!ids.count(id)) {
                    throw SchemaError("salience references unknown artwork \"" + id + "\"",
                                      rec.line);
                }
            } catch (const SchemaError& e) {
                std::cerr << e.what() << "\n";
                ++n_violations;
            }
        }
    }
    if (n_violations == 0) {
        std::cout << "ok: dataset valid\n";
        return kExitOk;
    }
    std::cerr << n_violations << " violation(s)\n";
    return kExitDataError;
}

int cmd_run(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
            bool resume, bool dry, std::optional<std::uint64_t> seed) {
    RunConfig config = load_run_config(config_path);
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (config.output_dir.empty()) throw ConfigError("output_dir: pass --out or set it in the config");
    if (seed) {
        config.seed = *seed;
        config.source["seed"] = *seed;
    }
    Runner runner(std::move(config));
    if (dry) {
        runner.dry_run();
        std::cout << "prompts written (dry run, no queries issued)\n";
        return kExitOk;
    }
    RunArtifact artifact = runner.run(resume);
    std::cout << "run complete: " << artifact.records.size() << " records\n";
    return kExitOk;
}

int cmd_score(const std::filesystem::path& run_dir, const std::filesystem::path& gold_path,
              double alpha, double beta, const std::filesystem::path& out_dir) {
    RunArtifact run = load_run_artifact(run_dir);
    Dataset gold = load_dataset(gold_path);
    EvaluationReport report = score_run(run, gold, TverskyParams{alpha, beta});
    render(report, out_dir);
    std::cout << "report written to " << out_dir.string() << "\n";
    return kExitOk;
}

int cmd_report(const std::filesystem::path& report_path, const std::filesystem::path& out_dir) {
    EvaluationReport report = load_report(report_path);
    render(report, out_dir);
    std::cout << "report re-rendered to " << out_dir.string() << "\n";
    return kExitOk;
}

std::filesystem::path resolve_report_path(const std::filesystem::path& p) {
    if (std::filesystem::is_directory(p)) return p / "report.json";
    return p;
}

int cmd_compare(const std::filesystem::path& a_path, const std::filesystem::path& b_path,
                const std::filesystem::path& out_path) {
    EvaluationReport a = load_report(resolve_report_path(a_path));
    EvaluationReport b = load_report(resolve_report_path(b_path));
    RunComparison cmp = compare_runs(a, b);
    atomic_write_file(out_path, render_comparison(cmp));
    std::cout << "comparison written to " << out_path.string() << "\n";
    return kExitOk;
}

int cmd_agreement(const std::filesystem::path& ratings_path) {
    auto sections = load_ratings(ratings_path);
    auto rows = agreement_report(sections);
    std::cout << render_agreement(rows);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"AGSR evaluation harness: two-stage attribute-grounded affect runs and scoring"};
    app.require_subcommand(1);

    std::filesystem::path manifest_path;
    auto* validate = app.add_subcommand("validate", "Validate a dataset manifest and its files");
    validate->add_option("--manifest", manifest_path, "Dataset manifest path")->required();

    std::filesystem::path config_path, run_out;
    bool resume = false;
    bool dry = false;
    std::optional<std::uint64_t> seed;
    auto* run = app.add_subcommand("run", "Execute a configured evaluation run");
    run->add_option("--config", config_path, "Run config (JSON)")->required();
    run->add_option("--out", run_out, "Output directory");
    run->add_flag("--resume", resume, "Skip artworks with a completed record");
    run->add_flag("--dry-run", dry, "Render all prompts without issuing queries");
    run->add_option("--seed", seed, "Override the config seed");

    std::filesystem::path score_run_dir, gold_path, score_out;
    double alpha = 0.8;
    double beta = 0.2;
    auto* score = app.add_subcommand("score", "Score a completed run against gold data");
    score->add_option("--run", score_run_dir, "Run directory")->required();
    score->add_option("--gold", gold_path, "Gold dataset manifest")->required();
    score->add_option("--alpha", alpha, "Tversky false-positive weight");
    score->add_option("--beta", beta, "Tversky false-negative weight");
    score->add_option("--out", score_out, "Report output directory")->required();

    std::filesystem::path report_in, report_out;
    auto* report = app.add_subcommand("report", "Re-render an existing report.json");
    report->add_option("--in", report_in, "report.json path")->required();
    report->add_option("--out", report_out, "Output directory")->required();

    std::filesystem::path cmp_a, cmp_b, cmp_out = "comparison.md";
    auto* compare = app.add_subcommand("compare", "Compare two scored reports (B - A)");
    compare->add_option("--a", cmp_a, "Report A (dir or report.json)")->required();
    compare->add_option("--b", cmp_b, "Report B (dir or report.json)")->required();
    compare->add_option("--out", cmp_out, "Output markdown path");

    std::filesystem::path ratings_path;
    auto* agreement = app.add_subcommand("agreement", "Inter-annotator agreement table");
    agreement->add_option("--ratings", ratings_path, "Ratings JSONL path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help and friends
        app.exit(e);
        return kExitUsageError;
    }

    try {
        if (validate->parsed()) return cmd_validate(manifest_path);
        if (run->parsed()) return cmd_run(config_path, run_out, resume, dry, seed);
        if (score->parsed()) return cmd_score(score_run_dir, gold_path, alpha, beta, score_out);
        if (report->parsed()) return cmd_report(report_in, report_out);
        if (compare->parsed()) return cmd_compare(cmp_a, cmp_b, cmp_out);
        if (agreement->parsed()) return cmd_agreement(ratings_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsageError;
    } catch (const BackendError& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return kExitBackendError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDataError;
    }
    return kExitUsageError;
}
