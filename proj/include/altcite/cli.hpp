#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "altcite/experiments.hpp"
#include "altcite/generator.hpp"
#include "altcite/linear.hpp"

namespace altcite::cli {

struct GlobalOptions {
    std::uint64_t seed_split = 42, seed_tune = 43, seed_model = 44;
    std::string format = "csv"; // csv | json | md
    std::string out_dir = ".";
    bool error_json = false;
    bool verbose = false;
};

namespace cli_detail {

inline void log(const GlobalOptions& g, const std::string& msg) {
    if (g.verbose) std::cerr << "[altcite] " << msg << "\n";
}

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) fail(Errc::io_error, "cannot write " + path);
    out << content;
}

inline std::string slug(std::string s) {
    for (auto& c : s) {
        if (c == ' ' || c == '(' || c == ')' || c == '/') c = '_';
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return s;
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::io_error, "cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        fail(Errc::parse_error, std::string("invalid JSON in ") + path + ": " + e.what());
    }
    return j;
}

inline std::string stats_table(const DescriptiveStats& stats, const std::string& format) {
    if (format == "json") {
        nlohmann::json j;
        j["std_is_sample"] = stats.std_is_sample;
        j["quantile_convention"] = stats.quantile_convention;
        for (const auto& f : stats.features)
            j["features"].push_back({{"name", f.name}, {"mean", f.mean}, {"std", f.std},
                                     {"min", f.min}, {"q25", f.q25}, {"q50", f.q50},
                                     {"q75", f.q75}, {"max", f.max}});
        return j.dump(2) + "\n";
    }
    if (format == "md") {
        std::string out = "| Feature | mean | std | min | 25% | 50% | 75% | max |\n"
                          "|---|---|---|---|---|---|---|---|\n";
        for (const auto& f : stats.features)
            out += "| " + f.name + " | " + fmt3(f.mean) + " | " + fmt3(f.std) + " | " +
                   fmt_g(f.min) + " | " + fmt_g(f.q25) + " | " + fmt_g(f.q50) + " | " +
                   fmt_g(f.q75) + " | " + fmt_g(f.max) + " |\n";
        return out;
    }
    std::string out = "feature,mean,std,min,q25,q50,q75,max\n";
    for (const auto& f : stats.features)
        out += f.name + "," + fmt_g(f.mean) + "," + fmt_g(f.std) + "," + fmt_g(f.min) + "," +
               fmt_g(f.q25) + "," + fmt_g(f.q50) + "," + fmt_g(f.q75) + "," + fmt_g(f.max) + "\n";
    return out;
}

inline void write_experiment_outputs(const ExperimentResult& result, const GlobalOptions& g) {
    namespace fs = std::filesystem;
    fs::create_directories(g.out_dir);
    const std::string base = g.out_dir + "/";
    write_text(base + "report.csv", result.report.to_csv());
    write_text(base + "report.md", result.report.to_md());
    write_text(base + "report.json", result.report.to_json().dump(2) + "\n");
    write_text(base + "split.json", result.split.to_json().dump(2) + "\n");
    for (const auto& [model, iv] : result.importances)
        write_text(base + "importance_" + slug(model) + ".csv",
                   importance_csv(result.feature_names, iv));
    if (!result.importances.empty()) {
        auto ranking = importance_ranking(result.importances, result.feature_names);
        write_text(base + "importance_ranking.csv", ranking.to_csv());
    }
    if (result.ols_model)
        write_text(base + "coefficients.csv", ols_coefficients_csv(*result.ols_model));
    if (!result.tuned_params.empty()) {
        nlohmann::json tj = nlohmann::json::object();
        for (const auto& [model, params] : result.tuned_params) tj[model] = params;
        write_text(base + "tuned_params.json", tj.dump(2) + "\n");
    }
}

} // namespace cli_detail

// ---- subcommand bodies (exit code semantics: 0 ok, 1 structured error) ----

inline int cmd_ingest(const GlobalOptions& g, const std::string& input,
                      const std::string& citations_path, int year, const std::string& output,
                      const std::string& join_report_path) {
    Dataset ds = load_dataset(input);
    cli_detail::log(g, "loaded " + std::to_string(ds.size()) + " records from " + input);
    if (!citations_path.empty()) {
        auto rows = load_citation_table(citations_path);
        if (year != 0) {
            std::vector<CitationRow> filtered;
            for (const auto& r : rows)
                if (r.year == year) filtered.push_back(r);
            rows = std::move(filtered);
        }
        auto joined = join_citations(ds, rows);
        cli_detail::log(g, "joined: kept " + std::to_string(joined.dataset.size()) + ", dropped " +
                               std::to_string(joined.dropped_dois.size()) + ", unmatched " +
                               std::to_string(joined.unmatched_citation_dois.size()));
        if (!join_report_path.empty()) {
            nlohmann::json rep{{"kept", joined.dataset.size()},
                               {"dropped_dois", joined.dropped_dois},
                               {"unmatched_citation_dois", joined.unmatched_citation_dois}};
            cli_detail::write_text(join_report_path, rep.dump(2) + "\n");
        }
        ds = std::move(joined.dataset);
    }
    write_dataset_csv(ds, output);
    return 0;
}

inline int cmd_stats(const GlobalOptions& g, const std::string& input, const std::string& output) {
    Dataset ds = load_dataset(input);
    auto table = cli_detail::stats_table(describe(ds), g.format);
    if (output.empty())
        std::cout << table;
    else
        cli_detail::write_text(output, table);
    return 0;
}

inline int cmd_synth(const GlobalOptions& g, std::size_t n, std::uint64_t seed,
                     const std::string& profile_path, const std::string& output) {
    GeneratorProfile profile;
    if (profile_path.empty() || profile_path == "paper")
        profile = paper_default_profile();
    else
        profile = GeneratorProfile::from_json(cli_detail::read_json_file(profile_path));
    Dataset ds = generate(profile, n, seed);
    write_dataset_csv(ds, output);
    cli_detail::log(g, "wrote " + std::to_string(n) + " synthetic records to " + output);
    return 0;
}

inline int cmd_fit_profile(const GlobalOptions& g, const std::string& input,
                           const std::string& output) {
    Dataset ds = load_dataset(input);
    auto profile = fit_profile(ds);
    cli_detail::write_text(output, profile.to_json().dump() + "\n");
    cli_detail::log(g, "profile written to " + output);
    return 0;
}

inline int cmd_tune(const GlobalOptions& g, const std::string& input, const std::string& exp,
                    int year, const std::string& model_kind, const std::string& mode,
                    const std::string& space_path, std::size_t n_iter, std::size_t folds,
                    std::string metric, const std::string& output) {
    Dataset ds = load_dataset(input);
    auto kind = ExperimentConfig::kind_from_name(exp);
    bool regression = kind == ExperimentConfig::Kind::exp3_regression;
    auto citations = ds.citations(year);

    auto pruned = prune_collinear(make_numeric_matrix(ds), 0.85);
    FeatureMatrix numeric = pruned.matrix;
    if (regression) {
        std::vector<std::string> to_log;
        for (const auto& name : numeric.feature_names)
            if (is_log_transformed_predictor(name)) to_log.push_back(name);
        numeric = log1p_features(numeric, to_log);
    }
    auto cats = exp_detail::cat_columns(ds);

    std::vector<int> y_cls;
    std::vector<double> y_reg;
    if (kind == ExperimentConfig::Kind::exp1_nonzero)
        y_cls = label_nonzero(citations).as_binary();
    else if (kind == ExperimentConfig::Kind::exp2_median)
        y_cls = label_above_median(citations).labels.as_binary();
    else
        y_reg = label_log_citations(citations).values;

    if (metric.empty()) metric = regression ? "neg_mse" : "accuracy";
    ModelSpec spec;
    spec.name = model_kind;
    spec.kind = model_kind;
    spec.tune = true;
    spec.tuning = {{"mode", mode}, {"n_iter", n_iter}, {"metric", metric}};
    if (!space_path.empty())
        spec.tuning["space"] = cli_detail::read_json_file(space_path);

    std::size_t k = std::min<std::size_t>(folds, ds.size());
    auto outcome = exp_detail::tune_model(spec, regression, numeric, cats,
                                          regression ? nullptr : &y_cls,
                                          regression ? &y_reg : nullptr, k, g.seed_tune,
                                          mix64(g.seed_model, 0));
    std::string best = outcome.best_params.dump(2) + "\n";
    if (output.empty())
        std::cout << best;
    else
        cli_detail::write_text(output, best);
    return 0;
}

inline int cmd_experiment(const GlobalOptions& g, const std::string& input, std::size_t synth_n,
                          std::uint64_t synth_seed, const std::string& exp, int year,
                          const std::string& config_path, bool strict_median, bool tune,
                          bool horizons) {
    Dataset ds;
    if (!input.empty()) {
        ds = load_dataset(input);
    } else if (synth_n > 0) {
        ds = generate(paper_default_profile(), synth_n, synth_seed);
    } else {
        fail(Errc::bad_argument, "experiment needs --input or --synth");
    }

    ExperimentConfig config;
    if (!config_path.empty())
        config = ExperimentConfig::from_json(cli_detail::read_json_file(config_path));
    if (!exp.empty()) config.experiment = ExperimentConfig::kind_from_name(exp);
    if (year != 0) config.year = year;
    config.seed_split = g.seed_split;
    config.seed_tune = g.seed_tune;
    config.seed_model = g.seed_model;
    if (strict_median) config.strict_median = true;
    if (tune) {
        // tuned model set: the ensembles the reference setup tuned per experiment
        if (config.models.empty())
            config.models = config.experiment == ExperimentConfig::Kind::exp3_regression
                                ? default_regression_models()
                                : default_classification_models();
        for (auto& spec : config.models)
            if (spec.kind == "random_forest" || spec.kind == "decision_tree" ||
                spec.kind == "gradient_boosting" || spec.kind == "random_forest_regressor" ||
                spec.kind == "decision_tree_regressor")
                spec.tune = true;
    }

    if (horizons) {
        auto cmp = compare_horizons(ds, config);
        namespace fs = std::filesystem;
        fs::create_directories(g.out_dir);
        GlobalOptions g17 = g;
        g17.out_dir = g.out_dir + "/2017";
        cli_detail::write_experiment_outputs(cmp.short_term, g17);
        GlobalOptions g20 = g;
        g20.out_dir = g.out_dir + "/2020";
        cli_detail::write_experiment_outputs(cmp.long_term, g20);
        cli_detail::write_text(g.out_dir + "/horizon_delta.csv", cmp.to_csv());
        std::cerr << "wall clock: " << fmt3(cmp.short_term.report.wall_clock_seconds +
                                            cmp.long_term.report.wall_clock_seconds)
                  << "s\n";
        return 0;
    }

    auto result = run_experiment(ds, config);
    cli_detail::write_experiment_outputs(result, g);
    std::cerr << "wall clock: " << fmt3(result.report.wall_clock_seconds) << "s\n";
    return 0;
}

inline int cmd_score(const GlobalOptions& g, const std::string& input, int year,
                     const std::string& output) {
    Dataset ds = load_dataset(input);
    std::string out = "doi,log_prediction,count_estimate,categorical_approximation\n";
    for (const auto& r : ds.records) {
        auto pred = paper_model_predict(r, year);
        out += r.doi + "," + fmt_g(pred.log_prediction) + "," + fmt_g(pred.count_estimate) + "," +
               (pred.categorical_approximation ? "1" : "0") + "\n";
    }
    if (output.empty())
        std::cout << out;
    else
        cli_detail::write_text(output, out);
    return 0;
}

inline int cmd_check_paper(const GlobalOptions& g) {
    auto report = check_paper_consistency();
    if (g.format == "json") {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& r : report.rows)
            rows.push_back({{"year", r.year},
                            {"term", r.term},
                            {"status", r.status == ConsistencyRow::Status::pass     ? "PASS"
                                       : r.status == ConsistencyRow::Status::fail   ? "FAIL"
                                                                                    : "SKIPPED"},
                            {"reason", r.reason}});
        std::cout << nlohmann::json{{"all_passed", report.all_passed}, {"rows", rows}}.dump(2)
                  << "\n";
    } else {
        for (const auto& r : report.rows) {
            const char* status = r.status == ConsistencyRow::Status::pass     ? "PASS"
                                 : r.status == ConsistencyRow::Status::fail   ? "FAIL"
                                                                              : "SKIPPED";
            std::cout << r.year << " " << r.term << " " << status;
            if (!r.reason.empty()) std::cout << " (" << r.reason << ")";
            std::cout << "\n";
        }
    }
    return report.all_passed ? 0 : 1;
}

// ---- argument wiring ----

inline int run(const std::vector<std::string>& args) {
    CLI::App app{"altcite: citation-count prediction from altmetric signals"};
    app.require_subcommand(1);
    GlobalOptions g;
    app.add_option("--seed-split", g.seed_split, "Seed for train/test splits");
    app.add_option("--seed-tune", g.seed_tune, "Seed for cross-validation and searches");
    app.add_option("--seed-model", g.seed_model, "Seed for model fitting");
    app.add_option("--format", g.format, "Output format: csv, json or md")
        ->check(CLI::IsMember({"csv", "json", "md"}));
    app.add_option("--out", g.out_dir, "Output directory for experiment artifacts");
    app.add_flag("--error-json", g.error_json, "Emit machine-readable errors on stderr");
    app.add_flag("-v,--verbose", g.verbose, "Log progress to stderr");

    std::string input, output, citations_path, join_report, profile_path = "paper";
    std::string exp, model_kind, mode = "random", space_path, metric, config_path;
    int year = 0;
    std::size_t n = 0, n_iter = 20, folds = 10, synth_n = 0;
    std::uint64_t synth_seed = 7;
    bool strict_median = false, tune = false, horizons = false;

    auto* ingest = app.add_subcommand("ingest", "Load, validate and normalize a dataset");
    ingest->add_option("-i,--input", input, "Input CSV or JSON file")->required();
    ingest->add_option("-o,--output", output, "Normalized CSV output")->required();
    ingest->add_option("--citations", citations_path, "Citation table (doi,year,count)");
    ingest->add_option("--year", year, "Restrict the citation join to one year");
    ingest->add_option("--join-report", join_report, "Write the join drop report to this file");

    auto* stats = app.add_subcommand("stats", "Descriptive statistics of a dataset");
    stats->add_option("-i,--input", input, "Input CSV or JSON file")->required();
    stats->add_option("-o,--output", output, "Write the table here instead of stdout");

    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
    synth->add_option("--n", n, "Number of records")->required();
    synth->add_option("--seed", synth_seed, "Generation seed");
    synth->add_option("--profile", profile_path, "'paper' or a fitted profile JSON file");
    synth->add_option("-o,--output", output, "Output CSV")->required();

    auto* fitprof = app.add_subcommand("fit-profile", "Fit a generator profile to a dataset");
    fitprof->add_option("-i,--input", input, "Input CSV or JSON file")->required();
    fitprof->add_option("-o,--output", output, "Profile JSON output")->required();

    auto* tune_cmd = app.add_subcommand("tune", "Hyperparameter search with k-fold CV");
    tune_cmd->add_option("-i,--input", input, "Input dataset with citation columns")->required();
    tune_cmd->add_option("--exp", exp, "Experiment: 1, 2 or 3")->required();
    tune_cmd->add_option("--year", year, "Citation year: 2017 or 2020")->default_val(2017);
    tune_cmd->add_option("--model", model_kind, "Model kind, e.g. random_forest")->required();
    tune_cmd->add_option("--mode", mode, "grid or random")->check(CLI::IsMember({"grid", "random"}));
    tune_cmd->add_option("--space", space_path, "Search space JSON file");
    tune_cmd->add_option("--n-iter", n_iter, "Randomized-search draws");
    tune_cmd->add_option("--folds", folds, "Cross-validation folds");
    tune_cmd->add_option("--metric", metric, "accuracy, f1, precision, recall, neg_mse, neg_mae, r2");
    tune_cmd->add_option("-o,--output", output, "Write best parameters here instead of stdout");

    auto* exp_cmd = app.add_subcommand("experiment", "Run an end-to-end experiment");
    exp_cmd->add_option("-i,--input", input, "Input dataset with citation columns");
    exp_cmd->add_option("--synth", synth_n, "Generate this many synthetic records instead");
    exp_cmd->add_option("--synth-seed", synth_seed, "Seed for --synth");
    exp_cmd->add_option("--exp", exp, "Experiment: 1, 2 or 3");
    exp_cmd->add_option("--year", year, "Citation year: 2017 or 2020");
    exp_cmd->add_option("--config", config_path, "Experiment config JSON");
    exp_cmd->add_flag("--strict-median", strict_median, "Median label threshold from train split only");
    exp_cmd->add_flag("--tune", tune, "Tune the tree-ensemble models before fitting");
    exp_cmd->add_flag("--compare-horizons", horizons, "Run 2017 and 2020 and tabulate deltas");

    auto* score = app.add_subcommand("score", "Score records with the bundled reference model");
    score->add_option("-i,--input", input, "Input CSV or JSON file")->required();
    score->add_option("--year", year, "Model horizon: 2017 or 2020")->default_val(2017);
    score->add_option("-o,--output", output, "Write scores here instead of stdout");

    auto* check = app.add_subcommand("check-paper", "Verify the bundled coefficient tables");
    (void)check;

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(ingest))
            return cmd_ingest(g, input, citations_path, year, output, join_report);
        if (app.got_subcommand(stats)) return cmd_stats(g, input, output);
        if (app.got_subcommand(synth)) return cmd_synth(g, n, synth_seed, profile_path, output);
        if (app.got_subcommand(fitprof)) return cmd_fit_profile(g, input, output);
        if (app.got_subcommand(tune_cmd))
            return cmd_tune(g, input, exp, year, model_kind, mode, space_path, n_iter, folds,
                            metric, output);
        if (app.got_subcommand(exp_cmd))
            return cmd_experiment(g, input, synth_n, synth_seed, exp, year, config_path,
                                  strict_median, tune, horizons);
        if (app.got_subcommand(score)) return cmd_score(g, input, year, output);
        if (app.got_subcommand(check)) return cmd_check_paper(g);
    } catch (const Error& e) {
        if (g.error_json)
            std::cerr << nlohmann::json{{"error", errc_name(e.code())}, {"message", e.what()}}.dump()
                      << "\n";
        else
            std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

inline int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

} // namespace altcite::cli
