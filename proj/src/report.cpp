#include "agsr/report.hpp"

#include "agsr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace agsr {

namespace {

std::string fmt(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

std::string pct(double fraction) {
    return fmt(fraction * 100.0, 2) + "%";
}

// Digest of the run manifest minus its volatile fields (wall-clock start,
// resolved filesystem paths), so rescoring and resumed runs hash alike.
std::string stable_manifest_digest(json manifest) {
    manifest.erase("started_at");
    if (manifest.contains("dataset") && manifest["dataset"].is_object()) {
        manifest["dataset"].erase("manifest");
    }
    return fnv1a64_hex(manifest.dump());
}

} // namespace

EvaluationReport score_run(const RunArtifact& run, const Dataset& gold, TverskyParams params) {
    if (!run.complete) throw RunIncomplete("run has no completion marker");
    if (run.records.empty()) throw EmptyRun("run has no records");

    EvaluationReport report;
    report.run_ref = run.manifest.value("config_digest", std::string());
    report.manifest_digest = stable_manifest_digest(run.manifest);
    report.gold_digest = gold.digest();
    report.condition = run.manifest.value("condition", std::string());
    report.tokenizer = run.manifest.value("tokenizer", std::string(kTokenizerName));
    if (run.manifest.contains("backends") && run.manifest["backends"].contains("final")) {
        report.model_id = run.manifest["backends"]["final"].value("model_id", std::string());
    }
    report.params = params;
    report.n_records = run.records.size();

    std::map<std::string, const ArtworkRecord*> gold_by_id;
    for (const auto& artwork : gold.artworks) gold_by_id[artwork.id] = &artwork;

    const auto condition = condition_from_string(report.condition);
    const bool predicts_attributes =
        !condition || *condition != Condition::base; // base has no attribute channel

    std::vector<std::string> pred_emotion, gold_emotion;
    std::vector<std::string> pred_arousal, gold_arousal;
    std::vector<std::string> pred_valence, gold_valence;
    std::vector<CompactnessRecord> compactness;
    std::vector<AlignmentPair> pairs;
    double flood_sum = 0.0;
    double sparsity_sum = 0.0;
    std::size_t flood_all = 0;

    for (const auto& rec : run.records) {
        auto found = gold_by_id.find(rec.artwork_id);
        if (found == gold_by_id.end()) {
            throw MissingGold("artwork \"" + rec.artwork_id + "\" not in gold dataset");
        }
        const ArtworkRecord& gold_artwork = *found->second;

        for (const auto& [a, outcome] : rec.attributes) {
            if (outcome.failure) {
                report.parse_failures["stage1:" + std::string(to_string(outcome.failure->kind))] += 1;
            }
            if (outcome.error) report.backend_errors += 1;
        }
        if (rec.final_failure) {
            report.parse_failures["final:" + std::string(to_string(rec.final_failure->kind))] += 1;
        }
        if (rec.error) report.backend_errors += 1;

        // Affect accuracy. Unmapped or missing gold labels exclude the sample.
        std::optional<AffectLabels> gold_affect = gold_artwork.gold_affect;
        bool excluded = !gold_affect.has_value();
        if (gold_affect && gold.mapping) {
            auto mapped = gold.mapping->map(gold_affect->emotion);
            if (mapped) {
                gold_affect->emotion = *mapped;
            } else {
                excluded = true;
            }
        }
        if (excluded) {
            report.n_excluded += 1;
        } else {
            report.n_samples += 1;
            const bool usable = rec.final_prediction.has_value() && !rec.error;
            const std::string pe = usable ? rec.final_prediction->emotion : std::string();
            const std::string pa = usable ? rec.final_prediction->arousal : std::string();
            const std::string pv = usable ? rec.final_prediction->valence : std::string();
            pred_emotion.push_back(pe);
            gold_emotion.push_back(gold_affect->emotion);
            pred_arousal.push_back(pa);
            gold_arousal.push_back(gold_affect->arousal);
            pred_valence.push_back(pv);
            gold_valence.push_back(gold_affect->valence);

            CompactnessRecord c;
            c.tokens = rec.final_token_count;
            c.emotion_correct = pe == gold_affect->emotion;
            c.arousal_correct = pa == gold_affect->arousal;
            c.valence_correct = pv == gold_affect->valence;
            compactness.push_back(c);
        }

        // Evidence alignment, only where gold salience exists.
        if (predicts_attributes) {
            auto gs = gold.gold_salience.find(rec.artwork_id);
            if (gs != gold.gold_salience.end()) {
                const AttrSet p = rec.predicted_attributes();
                const AttrSet g = gs->second.support();
                pairs.push_back({p, g});
                flood_sum += static_cast<double>(flooding_count(p, g));
                sparsity_sum += static_cast<double>(p.size());
                if (p.size() == kNumAttributes) flood_all += 1;
            }
        }
    }

    if (report.n_samples > 0) {
        Accuracies acc;
        acc.emotion = accuracy(pred_emotion, gold_emotion);
        acc.arousal = accuracy(pred_arousal, gold_arousal);
        acc.valence = accuracy(pred_valence, gold_valence);
        acc.average = average_accuracy(acc.emotion, acc.arousal, acc.valence);
        report.accuracies = acc;
        report.compactness = compactness_summary(compactness);
    }
    if (!pairs.empty()) {
        report.alignment = alignment_summary(pairs, params);
        FloodingStats flooding;
        flooding.n = pairs.size();
        flooding.mean_flooding = flood_sum / static_cast<double>(pairs.size());
        flooding.flooding_regime_fraction =
            static_cast<double>(flood_all) / static_cast<double>(pairs.size());
        flooding.mean_sparsity = sparsity_sum / static_cast<double>(pairs.size());
        report.flooding = flooding;
    }
    if (!report.accuracies && !report.alignment) {
        throw MissingGold("gold dataset has neither affect labels nor salience to score against");
    }
    return report;
}

json report_to_json(const EvaluationReport& report) {
    json j;
    j["run_ref"] = report.run_ref;
    j["manifest_digest"] = report.manifest_digest;
    j["gold_digest"] = report.gold_digest;
    j["condition"] = report.condition;
    j["model_id"] = report.model_id;
    j["tokenizer"] = report.tokenizer;
    j["tversky"] = {{"alpha", report.params.alpha}, {"beta", report.params.beta}};
    j["n_records"] = report.n_records;
    j["n_samples"] = report.n_samples;
    j["n_excluded"] = report.n_excluded;
    if (report.accuracies) {
        j["accuracies"] = {{"emotion", report.accuracies->emotion},
                           {"arousal", report.accuracies->arousal},
                           {"valence", report.accuracies->valence},
                           {"average", report.accuracies->average}};
    }
    if (report.alignment) {
        json alignment;
        alignment["sample_wise_mean_dice"] = report.alignment->sample_wise_mean_dice;
        alignment["sample_wise_mean_tversky"] = report.alignment->sample_wise_mean_tversky;
        alignment["attribute_wise_mean_dice"] = report.alignment->attribute_wise_mean_dice;
        alignment["attribute_wise_mean_tversky"] = report.alignment->attribute_wise_mean_tversky;
        json per = json::object();
        for (const auto& [a, score] : report.alignment->per_attribute) {
            per[std::string(to_string(a))] = {{"dice", score.dice}, {"tversky", score.tversky}};
        }
        alignment["per_attribute"] = std::move(per);
        alignment["n_samples"] = report.alignment->n_samples;
        j["alignment"] = std::move(alignment);
    }
    if (report.flooding) {
        j["flooding"] = {{"mean_flooding", report.flooding->mean_flooding},
                         {"flooding_regime_fraction", report.flooding->flooding_regime_fraction},
                         {"mean_sparsity", report.flooding->mean_sparsity},
                         {"n", report.flooding->n}};
    }
    if (report.compactness) {
        json c;
        c["overall_mean"] = report.compactness->overall_mean;
        if (report.compactness->emotion_correct_mean) {
            c["emotion_correct_mean"] = *report.compactness->emotion_correct_mean;
        }
        if (report.compactness->arousal_correct_mean) {
            c["arousal_correct_mean"] = *report.compactness->arousal_correct_mean;
        }
        if (report.compactness->valence_correct_mean) {
            c["valence_correct_mean"] = *report.compactness->valence_correct_mean;
        }
        c["n"] = report.compactness->n;
        j["compactness"] = std::move(c);
    }
    if (!report.parse_failures.empty()) {
        json failures = json::object();
        for (const auto& [key, count] : report.parse_failures) failures[key] = count;
        j["parse_failures"] = std::move(failures);
    }
    j["backend_errors"] = report.backend_errors;
    return j;
}

EvaluationReport report_from_json(const json& raw) {
    EvaluationReport report;
    report.run_ref = raw.value("run_ref", std::string());
    report.manifest_digest = raw.value("manifest_digest", std::string());
    report.gold_digest = raw.value("gold_digest", std::string());
    report.condition = raw.value("condition", std::string());
    report.model_id = raw.value("model_id", std::string());
    report.tokenizer = raw.value("tokenizer", std::string(kTokenizerName));
    if (raw.contains("tversky")) {
        report.params.alpha = raw["tversky"].value("alpha", 0.8);
        report.params.beta = raw["tversky"].value("beta", 0.2);
    }
    report.n_records = raw.value("n_records", 0ULL);
    report.n_samples = raw.value("n_samples", 0ULL);
    report.n_excluded = raw.value("n_excluded", 0ULL);
    if (raw.contains("accuracies")) {
        Accuracies acc;
        acc.emotion = raw["accuracies"].value("emotion", 0.0);
        acc.arousal = raw["accuracies"].value("arousal", 0.0);
        acc.valence = raw["accuracies"].value("valence", 0.0);
        acc.average = raw["accuracies"].value("average", 0.0);
        report.accuracies = acc;
    }
    if (raw.contains("alignment")) {
        const json& alignment = raw["alignment"];
        AlignmentSummary s;
        s.sample_wise_mean_dice = alignment.value("sample_wise_mean_dice", 0.0);
        s.sample_wise_mean_tversky = alignment.value("sample_wise_mean_tversky", 0.0);
        s.attribute_wise_mean_dice = alignment.value("attribute_wise_mean_dice", 0.0);
        s.attribute_wise_mean_tversky = alignment.value("attribute_wise_mean_tversky", 0.0);
        if (alignment.contains("per_attribute")) {
            for (auto it = alignment["per_attribute"].begin(); it != alignment["per_attribute"].end();
                 ++it) {
                if (auto a = attribute_from_string(it.key())) {
                    s.per_attribute[*a] = {it.value().value("dice", 0.0),
                                           it.value().value("tversky", 0.0)};
                }
            }
        }
        s.n_samples = alignment.value("n_samples", 0ULL);
        report.alignment = std::move(s);
    }
    if (raw.contains("flooding")) {
        FloodingStats flooding;
        flooding.mean_flooding = raw["flooding"].value("mean_flooding", 0.0);
        flooding.flooding_regime_fraction = raw["flooding"].value("flooding_regime_fraction", 0.0);
        flooding.mean_sparsity = raw["flooding"].value("mean_sparsity", 0.0);
        flooding.n = raw["flooding"].value("n", 0ULL);
        report.flooding = flooding;
    }
    if (raw.contains("compactness")) {
        CompactnessSummary c;
        c.overall_mean = raw["compactness"].value("overall_mean", 0.0);
        if (raw["compactness"].contains("emotion_correct_mean")) {
            c.emotion_correct_mean = raw["compactness"]["emotion_correct_mean"].get<double>();
        }
        if (raw["compactness"].contains("arousal_correct_mean")) {
            c.arousal_correct_mean = raw["compactness"]["arousal_correct_mean"].get<double>();
        }
        if (raw["compactness"].contains("valence_correct_mean")) {
            c.valence_correct_mean = raw["compactness"]["valence_correct_mean"].get<double>();
        }
        c.n = raw["compactness"].value("n", 0ULL);
        report.compactness = c;
    }
    if (raw.contains("parse_failures")) {
        for (auto it = raw["parse_failures"].begin(); it != raw["parse_failures"].end(); ++it) {
            report.parse_failures[it.key()] = it.value().get<std::size_t>();
        }
    }
    report.backend_errors = raw.value("backend_errors", 0ULL);
    return report;
}

EvaluationReport load_report(const std::filesystem::path& path) {
    json raw = json::parse(read_file(path), nullptr, false);
    if (raw.is_discarded()) throw SchemaError("invalid JSON in " + path.string());
    return report_from_json(raw);
}

std::string render_markdown(const EvaluationReport& report) {
    std::ostringstream md;
    md << "# Evaluation report\n\n";
    md << "- run: `" << report.run_ref << "` (" << report.condition << ", model `"
       << report.model_id << "`)\n";
    md << "- gold digest: `" << report.gold_digest << "`\n";
    md << "- tokenizer: " << report.tokenizer << "; tversky alpha=" << fmt(report.params.alpha, 2)
       << " beta=" << fmt(report.params.beta, 2) << "\n";
    md << "- records: " << report.n_records << ", scored: " << report.n_samples
       << ", excluded (unmapped): " << report.n_excluded << "\n\n";

    if (report.accuracies) {
        // Render-time cross-check of the average-accuracy invariant.
        const double recomputed = average_accuracy(
            report.accuracies->emotion, report.accuracies->arousal, report.accuracies->valence);
        if (std::abs(recomputed - report.accuracies->average) > 1e-9) {
            throw Error("average accuracy inconsistent with its three components");
        }
        md << "## Main results\n\n";
        md << "| Model | Setting | Emotion Acc. | Arousal Acc. | Valence Acc. | Avg. Acc. |\n";
        md << "|---|---|---|---|---|---|\n";
        md << "| " << report.model_id << " | " << report.condition << " | "
           << pct(report.accuracies->emotion) << " | " << pct(report.accuracies->arousal) << " | "
           << pct(report.accuracies->valence) << " | " << pct(report.accuracies->average)
           << " |\n\n";
    }

    if (report.alignment) {
        md << "## Reasoning quality (Dice / Tversky)\n\n";
        md << "| Sample Mean | Attr. Mean | Color | Comp. | Line | Light | Brush. |\n";
        md << "|---|---|---|---|---|---|---|\n";
        auto cell = [&](double d, double t) {
            return fmt(d, 4) + " / " + fmt(t, 4);
        };
        md << "| " << cell(report.alignment->sample_wise_mean_dice,
                           report.alignment->sample_wise_mean_tversky)
           << " | "
           << cell(report.alignment->attribute_wise_mean_dice,
                   report.alignment->attribute_wise_mean_tversky);
        for (auto a : all_attributes()) {
            const auto& score = report.alignment->per_attribute.at(a);
            md << " | " << cell(score.dice, score.tversky);
        }
        md << " |\n\n";
    }

    if (report.flooding) {
        md << "## Sparsity and flooding\n\n";
        md << "- mean flooding count: " << fmt(report.flooding->mean_flooding, 4) << "\n";
        md << "- flooding-regime fraction (all five cited): "
           << fmt(report.flooding->flooding_regime_fraction, 4) << "\n";
        md << "- mean predicted sparsity (l0): " << fmt(report.flooding->mean_sparsity, 4)
           << "\n\n";
    }

    if (report.compactness) {
        md << "## Compactness (" << report.tokenizer << " tokens)\n\n";
        md << "| Avg. Tokens | Emotion Correct | Arousal Correct | Valence Correct |\n";
        md << "|---|---|---|---|\n";
        auto opt_cell = [&](const std::optional<double>& v) {
            return v ? fmt(*v, 2) : std::string("---");
        };
        md << "| " << fmt(report.compactness->overall_mean, 2) << " | "
           << opt_cell(report.compactness->emotion_correct_mean) << " | "
           << opt_cell(report.compactness->arousal_correct_mean) << " | "
           << opt_cell(report.compactness->valence_correct_mean) << " |\n\n";
    }

    if (!report.parse_failures.empty() || report.backend_errors > 0) {
        md << "## Failures\n\n";
        for (const auto& [key, count] : report.parse_failures) {
            md << "- " << key << ": " << count << "\n";
        }
        if (report.backend_errors > 0) md << "- backend errors: " << report.backend_errors << "\n";
        md << "\n";
    }
    return md.str();
}

std::string render_csv(const EvaluationReport& report) {
    std::ostringstream csv;
    csv << "model,condition,n_records,n_samples,n_excluded,"
           "emotion_acc,arousal_acc,valence_acc,avg_acc,"
           "sample_dice,sample_tversky,attr_dice,attr_tversky,";
    for (auto a : all_attributes()) {
        csv << to_string(a) << "_dice," << to_string(a) << "_tversky,";
    }
    csv << "mean_flooding,flooding_regime_fraction,mean_sparsity,"
           "avg_tokens,emotion_correct_tokens,arousal_correct_tokens,valence_correct_tokens\n";

    auto num = [&](double v, int decimals) { return fmt(v, decimals); };
    csv << report.model_id << ',' << report.condition << ',' << report.n_records << ','
        << report.n_samples << ',' << report.n_excluded << ',';
    if (report.accuracies) {
        csv << num(report.accuracies->emotion * 100.0, 2) << ','
            << num(report.accuracies->arousal * 100.0, 2) << ','
            << num(report.accuracies->valence * 100.0, 2) << ','
            << num(report.accuracies->average * 100.0, 2) << ',';
    } else {
        csv << ",,,,";
    }
    if (report.alignment) {
        csv << num(report.alignment->sample_wise_mean_dice, 4) << ','
            << num(report.alignment->sample_wise_mean_tversky, 4) << ','
            << num(report.alignment->attribute_wise_mean_dice, 4) << ','
            << num(report.alignment->attribute_wise_mean_tversky, 4) << ',';
        for (auto a : all_attributes()) {
            const auto& score = report.alignment->per_attribute.at(a);
            csv << num(score.dice, 4) << ',' << num(score.tversky, 4) << ',';
        }
    } else {
        csv << ",,,,";
        for (std::size_t i = 0; i < kNumAttributes; ++i) csv << ",,";
    }
    if (report.flooding) {
        csv << num(report.flooding->mean_flooding, 4) << ','
            << num(report.flooding->flooding_regime_fraction, 4) << ','
            << num(report.flooding->mean_sparsity, 4) << ',';
    } else {
        csv << ",,,";
    }
    if (report.compactness) {
        auto opt_cell = [&](const std::optional<double>& v) {
            return v ? fmt(*v, 2) : std::string();
        };
        csv << num(report.compactness->overall_mean, 2) << ','
            << opt_cell(report.compactness->emotion_correct_mean) << ','
            << opt_cell(report.compactness->arousal_correct_mean) << ','
            << opt_cell(report.compactness->valence_correct_mean);
    } else {
        csv << ",,,";
    }
    csv << '\n';
    return csv.str();
}

void render(const EvaluationReport& report, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    atomic_write_file(out_dir / "report.json", report_to_json(report).dump(2) + "\n");
    atomic_write_file(out_dir / "report.md", render_markdown(report));
    atomic_write_file(out_dir / "report.csv", render_csv(report));
}

RunComparison compare_runs(const EvaluationReport& a, const EvaluationReport& b) {
    if (a.gold_digest != b.gold_digest) {
        throw GoldMismatch("reports were scored against different gold data");
    }
    RunComparison cmp;
    cmp.ref_a = a.run_ref.empty() ? a.condition : a.run_ref;
    cmp.ref_b = b.run_ref.empty() ? b.condition : b.run_ref;
    if (a.accuracies && b.accuracies) {
        cmp.deltas["emotion_acc"] = b.accuracies->emotion - a.accuracies->emotion;
        cmp.deltas["arousal_acc"] = b.accuracies->arousal - a.accuracies->arousal;
        cmp.deltas["valence_acc"] = b.accuracies->valence - a.accuracies->valence;
        cmp.deltas["avg_acc"] = b.accuracies->average - a.accuracies->average;
    }
    if (a.alignment && b.alignment) {
        cmp.deltas["sample_dice"] =
            b.alignment->sample_wise_mean_dice - a.alignment->sample_wise_mean_dice;
        cmp.deltas["sample_tversky"] =
            b.alignment->sample_wise_mean_tversky - a.alignment->sample_wise_mean_tversky;
        cmp.deltas["attr_dice"] =
            b.alignment->attribute_wise_mean_dice - a.alignment->attribute_wise_mean_dice;
        cmp.deltas["attr_tversky"] =
            b.alignment->attribute_wise_mean_tversky - a.alignment->attribute_wise_mean_tversky;
        for (auto attr : all_attributes()) {
            auto ita = a.alignment->per_attribute.find(attr);
            auto itb = b.alignment->per_attribute.find(attr);
            if (ita != a.alignment->per_attribute.end() && itb != b.alignment->per_attribute.end()) {
                cmp.attribute_deltas[attr] = {itb->second.dice - ita->second.dice,
                                              itb->second.tversky - ita->second.tversky};
            }
        }
    }
    if (a.flooding && b.flooding) {
        cmp.deltas["mean_flooding"] = b.flooding->mean_flooding - a.flooding->mean_flooding;
    }
    if (a.compactness && b.compactness) {
        cmp.deltas["avg_tokens"] = b.compactness->overall_mean - a.compactness->overall_mean;
    }
    return cmp;
}

std::string render_comparison(const RunComparison& cmp) {
    std::ostringstream md;
    md << "# Run comparison\n\n";
    md << "Delta = B - A, where A = `" << cmp.ref_a << "` and B = `" << cmp.ref_b << "`.\n\n";
    md << "| Metric | Delta |\n|---|---|\n";
    auto signed_fmt = [&](double v, int decimals) {
        return (v >= 0 ? "+" : "") + fmt(v, decimals);
    };
    for (const auto& [metric, delta] : cmp.deltas) {
        const bool is_acc = metric.find("_acc") != std::string::npos;
        const bool is_tokens = metric == "avg_tokens";
        if (is_acc) {
            md << "| " << metric << " | " << signed_fmt(delta * 100.0, 2) << " |\n";
        } else if (is_tokens) {
            md << "| " << metric << " | " << signed_fmt(delta, 2) << " |\n";
        } else {
            md << "| " << metric << " | " << signed_fmt(delta, 4) << " |\n";
        }
    }
    if (!cmp.attribute_deltas.empty()) {
        md << "\n| Attribute | Dice Delta | Tversky Delta |\n|---|---|---|\n";
        for (const auto& [a, score] : cmp.attribute_deltas) {
            md << "| " << to_string(a) << " | " << signed_fmt(score.dice, 4) << " | "
               << signed_fmt(score.tversky, 4) << " |\n";
        }
    }
    return md.str();
}

std::map<std::string, RatingMatrix> load_ratings(const std::filesystem::path& path) {
    std::map<std::string, RatingMatrix> sections;
    for (const auto& rec : read_jsonl(path)) {
        if (!rec.value.contains("item_id") || !rec.value.contains("rater_id") ||
            !rec.value.contains("value") || !rec.value["value"].is_boolean()) {
            throw SchemaError("rating row needs item_id, rater_id and boolean value", rec.line);
        }
        const std::string section = rec.value.value("section", std::string("ratings"));
        RatingMatrix& m = sections[section];
        m.add_rating(rec.value["item_id"].get<std::string>(), rec.value["value"].get<bool>());
        m.declare_category("true");
        m.declare_category("false");
    }
    if (sections.empty()) throw EmptyInput("ratings file has no rows");
    return sections;
}

std::vector<AgreementRow> agreement_report(const std::map<std::string, RatingMatrix>& sections) {
    std::vector<AgreementRow> rows;
    for (const auto& [name, matrix] : sections) {
        AgreementRow row;
        row.section = name;
        row.true_proportion = matrix.mean_proportion("true");
        row.percent_agreement = percent_agreement(matrix);
        row.ac1 = gwet_ac1(matrix);
        row.n_items = matrix.n_items();
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string render_agreement(const std::vector<AgreementRow>& rows) {
    std::ostringstream md;
    md << "| Section | True Prop. | Percent Agree. | Gwet's AC1 | Sample Size |\n";
    md << "|---|---|---|---|---|\n";
    for (const auto& row : rows) {
        md << "| " << row.section << " | " << pct(row.true_proportion) << " | "
           << pct(row.percent_agreement) << " | " << fmt(row.ac1, 3) << " | " << row.n_items
           << " |\n";
    }
    return md.str();
}

} // namespace agsr
