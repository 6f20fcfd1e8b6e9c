#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "altcite/classic.hpp"
#include "altcite/common.hpp"
#include "altcite/dataset.hpp"
#include "altcite/generator.hpp"
#include "altcite/linear.hpp"
#include "altcite/metrics.hpp"
#include "altcite/neural.hpp"
#include "altcite/preprocess.hpp"
#include "altcite/tree.hpp"
#include "altcite/tuning.hpp"

namespace altcite {

// ---- configuration ----

struct ModelSpec {
    std::string name;
    std::string kind;
    nlohmann::json params = nlohmann::json::object();
    bool tune = false;
    nlohmann::json tuning = nlohmann::json::object(); // {"mode","n_iter","metric","space"}

    nlohmann::json to_json() const {
        return {{"name", name}, {"kind", kind}, {"params", params}, {"tune", tune},
                {"tuning", tuning}};
    }
    static ModelSpec from_json(const nlohmann::json& j) {
        ModelSpec s;
        s.name = j.at("name").get<std::string>();
        s.kind = j.at("kind").get<std::string>();
        s.params = j.value("params", nlohmann::json::object());
        s.tune = j.value("tune", false);
        s.tuning = j.value("tuning", nlohmann::json::object());
        return s;
    }
};

struct ExperimentConfig {
    enum class Kind { exp1_nonzero, exp2_median, exp3_regression };
    Kind experiment = Kind::exp1_nonzero;
    int year = 2017;
    double holdout_ratio = 0.8;
    double prune_threshold = 0.85;
    std::size_t cv_folds = 10;
    std::uint64_t seed_split = 42, seed_tune = 43, seed_model = 44;
    bool strict_median = false; // exp2: median from the training split only
    std::vector<ModelSpec> models;

    static const char* kind_name(Kind k) {
        switch (k) {
        case Kind::exp1_nonzero: return "exp1_nonzero";
        case Kind::exp2_median: return "exp2_median";
        case Kind::exp3_regression: return "exp3_regression";
        }
        return "?";
    }
    static Kind kind_from_name(const std::string& s) {
        if (s == "exp1_nonzero" || s == "1") return Kind::exp1_nonzero;
        if (s == "exp2_median" || s == "2") return Kind::exp2_median;
        if (s == "exp3_regression" || s == "3") return Kind::exp3_regression;
        fail(Errc::bad_argument, "unknown experiment '" + s + "'");
    }

    nlohmann::json to_json() const {
        nlohmann::json models_json = nlohmann::json::array();
        for (const auto& m : models) models_json.push_back(m.to_json());
        return {{"experiment", kind_name(experiment)},
                {"year", year},
                {"holdout_ratio", holdout_ratio},
                {"prune_threshold", prune_threshold},
                {"cv_folds", cv_folds},
                {"seeds", {{"split", seed_split}, {"tune", seed_tune}, {"model", seed_model}}},
                {"strict_median", strict_median},
                {"models", models_json}};
    }
    static ExperimentConfig from_json(const nlohmann::json& j) {
        ExperimentConfig c;
        c.experiment = kind_from_name(j.at("experiment").get<std::string>());
        c.year = j.value("year", 2017);
        c.holdout_ratio = j.value("holdout_ratio", 0.8);
        c.prune_threshold = j.value("prune_threshold", 0.85);
        c.cv_folds = j.value("cv_folds", std::size_t{10});
        if (j.contains("seeds")) {
            c.seed_split = j.at("seeds").value("split", std::uint64_t{42});
            c.seed_tune = j.at("seeds").value("tune", std::uint64_t{43});
            c.seed_model = j.at("seeds").value("model", std::uint64_t{44});
        }
        c.strict_median = j.value("strict_median", false);
        if (j.contains("models"))
            for (const auto& mj : j.at("models")) c.models.push_back(ModelSpec::from_json(mj));
        return c;
    }
};

inline std::vector<ModelSpec> default_classification_models() {
    return {{"Random Forest", "random_forest"},
            {"Decision Tree", "decision_tree"},
            {"Gradient Boosting", "gradient_boosting"},
            {"AdaBoost", "adaboost"},
            {"Bernoulli Naive Bayes", "bernoulli_nb"},
            {"KNN", "knn"},
            {"Neural Network", "neural_network"},
            {"SVM", "svm"}};
}

inline std::vector<ModelSpec> default_regression_models() {
    return {{"Random Forest", "random_forest_regressor"},
            {"Decision Tree", "decision_tree_regressor"},
            {"Multiple Linear Model", "ols"},
            {"Neural Network (non-paper variant)", "mlp_regressor"}};
}

// ---- parameter parsing ----

namespace exp_detail {

inline CountOrFraction cof_from_json(const nlohmann::json& v) {
    if (v.is_object()) return CountOrFraction::from_json(v);
    if (v.is_number_integer()) return CountOrFraction::count(v.get<std::size_t>());
    return CountOrFraction::fraction(v.get<double>());
}

inline TreeParams tree_params_from_json(TreeParams base, const nlohmann::json& j,
                                        std::uint64_t seed) {
    base.random_state = seed;
    if (j.contains("criterion")) base.criterion = criterion_from_name(j.at("criterion"));
    if (j.contains("max_depth")) base.max_depth = j.at("max_depth").get<std::size_t>();
    if (j.contains("min_samples_split"))
        base.min_samples_split = cof_from_json(j.at("min_samples_split"));
    if (j.contains("min_samples_leaf"))
        base.min_samples_leaf = cof_from_json(j.at("min_samples_leaf"));
    if (j.contains("max_features")) base.max_features = j.at("max_features").get<std::size_t>();
    if (j.contains("random_state")) base.random_state = j.at("random_state").get<std::uint64_t>();
    return base;
}

inline EnsembleParams ensemble_params_from_json(EnsembleParams base, const nlohmann::json& j,
                                                std::uint64_t seed) {
    base.base = tree_params_from_json(base.base, j, seed);
    if (j.contains("num_estimators")) base.num_estimators = j.at("num_estimators").get<std::size_t>();
    if (j.contains("learning_rate")) base.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("bootstrap")) base.bootstrap = j.at("bootstrap").get<bool>();
    return base;
}

inline MLPParams mlp_params_from_json(const nlohmann::json& j, std::uint64_t seed) {
    MLPParams p;
    p.seed = seed;
    if (j.contains("hidden_sizes")) p.hidden_sizes = j.at("hidden_sizes").get<std::vector<std::size_t>>();
    if (j.contains("epochs")) p.epochs = j.at("epochs").get<std::size_t>();
    if (j.contains("batch_size")) p.batch_size = j.at("batch_size").get<std::size_t>();
    if (j.contains("learning_rate")) p.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("rmsprop_decay")) p.rmsprop_decay = j.at("rmsprop_decay").get<double>();
    if (j.contains("rmsprop_epsilon")) p.rmsprop_epsilon = j.at("rmsprop_epsilon").get<double>();
    if (j.contains("seed")) p.seed = j.at("seed").get<std::uint64_t>();
    return p;
}

inline SVMParams svm_params_from_json(const nlohmann::json& j) {
    SVMParams p; // paper settings: sigmoid kernel, degree 3, tol 1e-3, gamma 0.045
    if (j.contains("C")) p.C = j.at("C").get<double>();
    if (j.contains("gamma")) p.gamma = j.at("gamma").get<double>();
    if (j.contains("coef0")) p.coef0 = j.at("coef0").get<double>();
    if (j.contains("degree")) p.degree = j.at("degree").get<int>();
    if (j.contains("tolerance")) p.tolerance = j.at("tolerance").get<double>();
    if (j.contains("max_iterations")) p.max_iterations = j.at("max_iterations").get<std::size_t>();
    return p;
}

inline bool needs_standardized(const std::string& kind) {
    return kind == "knn" || kind == "svm" || kind == "neural_network" || kind == "mlp_regressor";
}

inline bool tree_family(const std::string& kind) {
    return kind == "decision_tree" || kind == "random_forest" || kind == "gradient_boosting" ||
           kind == "adaboost" || kind == "decision_tree_regressor" ||
           kind == "random_forest_regressor";
}

// ---- classifier factory ----

struct FittedClassifier {
    std::function<std::vector<int>(const FeatureMatrix&)> predict;
    std::optional<ImportanceVector> importances;
};

inline FittedClassifier fit_classifier(const std::string& kind, const nlohmann::json& params,
                                       const FeatureMatrix& Xtr, const std::vector<int>& ytr,
                                       std::uint64_t seed) {
    FittedClassifier out;
    std::size_t p = Xtr.p();

    if (needs_standardized(kind)) {
        auto stats = fit_scaler(Xtr);
        FeatureMatrix Xs = standardize(Xtr, stats);
        if (kind == "knn") {
            std::size_t k = params.value("k", std::size_t{5});
            auto model = fit_knn(Xs.values, ytr, k);
            out.predict = [model, stats](const FeatureMatrix& X) {
                return predict_labels(model, standardize(X, stats).values);
            };
        } else if (kind == "svm") {
            auto model = fit_svm_smo(Xs.values, ytr, svm_params_from_json(params));
            out.predict = [model, stats](const FeatureMatrix& X) {
                return predict_labels(model, standardize(X, stats).values);
            };
        } else if (kind == "neural_network") {
            auto model = train_mlp(Xs.values, ytr, mlp_params_from_json(params, seed));
            out.predict = [model, stats](const FeatureMatrix& X) {
                return predict_labels(model, standardize(X, stats).values);
            };
        } else {
            fail(Errc::bad_argument, "unknown classifier kind '" + kind + "'");
        }
        return out;
    }

    if (kind == "decision_tree") {
        TreeParams defaults;
        auto model = fit_classification_tree(Xtr.values, ytr, tree_params_from_json(defaults, params, seed));
        out.importances = feature_importances(model);
        out.predict = [model](const FeatureMatrix& X) { return predict_labels(model, X.values); };
    } else if (kind == "random_forest") {
        EnsembleParams defaults;
        defaults.num_estimators = 100;
        defaults.bootstrap = true;
        defaults.base.max_features = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(p)))));
        auto model = fit_random_forest(Xtr.values, ytr, ensemble_params_from_json(defaults, params, seed));
        out.importances = feature_importances(model);
        out.predict = [model](const FeatureMatrix& X) { return predict_labels(model, X.values); };
    } else if (kind == "gradient_boosting") {
        EnsembleParams defaults;
        defaults.num_estimators = 100;
        defaults.learning_rate = 0.1;
        defaults.base.criterion = SplitCriterion::friedman_mse;
        defaults.base.max_depth = 3;
        auto model = fit_gradient_boosting_classifier(Xtr.values, ytr,
                                                      ensemble_params_from_json(defaults, params, seed));
        out.importances = feature_importances(model);
        out.predict = [model](const FeatureMatrix& X) { return predict_labels(model, X.values); };
    } else if (kind == "adaboost") {
        EnsembleParams defaults; // 50 depth-1 stumps, learning rate 1
        defaults.num_estimators = 50;
        defaults.learning_rate = 1.0;
        defaults.base.criterion = SplitCriterion::gini;
        auto model = fit_adaboost(Xtr.values, ytr, ensemble_params_from_json(defaults, params, seed));
        out.importances = feature_importances(model);
        out.predict = [model](const FeatureMatrix& X) { return predict_labels(model, X.values); };
    } else if (kind == "bernoulli_nb") {
        double alpha = params.value("alpha", 1.0);
        double binarize = params.value("binarize", 0.0);
        auto model = fit_bernoulli_nb(Xtr.values, ytr, alpha, binarize);
        out.predict = [model](const FeatureMatrix& X) { return predict_labels(model, X.values); };
    } else if (kind == "majority") {
        std::size_t ones = 0;
        for (int v : ytr) ones += (v == 1);
        int cls = (2 * ones > ytr.size()) ? 1 : 0;
        out.predict = [cls](const FeatureMatrix& X) { return std::vector<int>(X.n(), cls); };
    } else {
        fail(Errc::bad_argument, "unknown classifier kind '" + kind + "'");
    }
    return out;
}

// ---- regressor factory ----

struct FittedRegressor {
    std::function<std::vector<double>(const FeatureMatrix&)> predict;
    std::optional<ImportanceVector> importances;
    std::optional<OLSModel> ols;
};

inline Matrix with_intercept(const Matrix& X) {
    Matrix out(X.rows(), X.cols() + 1);
    for (std::size_t i = 0; i < X.rows(); ++i) {
        out(i, 0) = 1.0;
        for (std::size_t j = 0; j < X.cols(); ++j) out(i, j + 1) = X(i, j);
    }
    return out;
}

inline FittedRegressor fit_regressor(const std::string& kind, const nlohmann::json& params,
                                     const FeatureMatrix& Xtr, const std::vector<double>& ytr,
                                     std::uint64_t seed) {
    FittedRegressor out;
    if (kind == "decision_tree_regressor") {
        TreeParams defaults;
        defaults.criterion = SplitCriterion::mse;
        auto model = fit_regression_tree(Xtr.values, ytr, tree_params_from_json(defaults, params, seed));
        out.importances = feature_importances(model);
        out.predict = [model](const FeatureMatrix& X) { return predict_values(model, X.values); };
    } else if (kind == "random_forest_regressor") {
        EnsembleParams defaults;
        defaults.num_estimators = 100;
        defaults.bootstrap = true;
        defaults.base.criterion = SplitCriterion::mse;
        auto model = fit_random_forest_regressor(Xtr.values, ytr,
                                                 ensemble_params_from_json(defaults, params, seed));
        out.importances = feature_importances(model);
        out.predict = [model](const FeatureMatrix& X) { return predict_values(model, X.values); };
    } else if (kind == "gradient_boosting_regressor") {
        EnsembleParams defaults;
        defaults.num_estimators = 100;
        defaults.learning_rate = 0.1;
        defaults.base.criterion = SplitCriterion::friedman_mse;
        defaults.base.max_depth = 3;
        auto model = fit_gradient_boosting_regressor(Xtr.values, ytr,
                                                     ensemble_params_from_json(defaults, params, seed));
        out.importances = feature_importances(model);
        out.predict = [model](const FeatureMatrix& X) { return predict_values(model, X.values); };
    } else if (kind == "ols") {
        std::vector<std::string> names{"constant"};
        for (const auto& f : Xtr.feature_names) names.push_back(f);
        auto model = fit_ols(with_intercept(Xtr.values), ytr, names);
        out.ols = model;
        out.predict = [model](const FeatureMatrix& X) {
            return predict_ols(model, with_intercept(X.values));
        };
    } else if (kind == "mlp_regressor") {
        auto stats = fit_scaler(Xtr);
        FeatureMatrix Xs = standardize(Xtr, stats);
        auto model = train_mlp_regressor(Xs.values, ytr, mlp_params_from_json(params, seed));
        out.predict = [model, stats](const FeatureMatrix& X) {
            return predict_values(model, standardize(X, stats).values);
        };
    } else {
        fail(Errc::bad_argument, "unknown regressor kind '" + kind + "'");
    }
    return out;
}

inline double classification_metric(const std::string& name, const std::vector<int>& y_true,
                                    const std::vector<int>& y_pred) {
    auto r = classification_report(y_true, y_pred);
    if (name == "accuracy") return r.accuracy;
    if (name == "precision") return r.precision;
    if (name == "recall") return r.recall;
    if (name == "f1") return r.f1;
    fail(Errc::bad_argument, "unknown classification metric '" + name + "'");
}

inline double regression_metric(const std::string& name, const std::vector<double>& y_true,
                                const std::vector<double>& y_pred) {
    auto r = regression_report(y_true, y_pred);
    if (name == "neg_mse") return -r.mse;
    if (name == "neg_mae") return -r.mae;
    if (name == "r2") return r.r2;
    fail(Errc::bad_argument, "unknown regression metric '" + name + "'");
}

inline nlohmann::json merge_params(nlohmann::json base, const nlohmann::json& overrides) {
    for (const auto& [key, value] : overrides.items()) base[key] = value;
    return base;
}

} // namespace exp_detail

// ---- report tables ----

struct ReportRow {
    std::string model;
    std::optional<ClassificationReport> cls;
    std::optional<RegressionReport> reg;
    std::string error;
};

struct ReportTable {
    std::string title;
    bool classification = true;
    std::vector<ReportRow> rows;
    nlohmann::json config_echo;
    double wall_clock_seconds = 0; // intentionally never serialized: reports replay byte-identically

    std::string to_csv() const {
        bool any_error = std::any_of(rows.begin(), rows.end(),
                                     [](const ReportRow& r) { return !r.error.empty(); });
        std::string out = classification ? "model,accuracy,precision,recall,f1"
                                         : "model,mse,mae,r2";
        if (any_error) out += ",error";
        out += "\n";
        for (const auto& r : rows) {
            if (!r.error.empty()) {
                out += r.model + (classification ? ",,,," : ",,,");
                std::string msg = r.error;
                for (auto& ch : msg)
                    if (ch == ',' || ch == '\n') ch = ';';
                out += "," + msg + "\n";
                continue;
            }
            out += classification ? classification_csv_row(r.model, *r.cls)
                                  : regression_csv_row(r.model, *r.reg);
            if (any_error) out += ",";
            out += "\n";
        }
        return out;
    }

    std::string to_md() const {
        std::string out = "# " + title + "\n\n";
        out += classification ? "| Model | Accuracy | Precision | Recall | F-1 |\n|---|---|---|---|---|\n"
                              : "| Model | MSE | MAE | R-squared |\n|---|---|---|---|\n";
        for (const auto& r : rows) {
            if (!r.error.empty()) {
                out += "| " + r.model + " | error: " + r.error +
                       (classification ? " | | | |\n" : " | | |\n");
                continue;
            }
            if (classification)
                out += "| " + r.model + " | " + fmt3(r.cls->accuracy) + " | " + fmt3(r.cls->precision) +
                       " | " + fmt3(r.cls->recall) + " | " + fmt3(r.cls->f1) + " |\n";
            else
                out += "| " + r.model + " | " + fmt3(r.reg->mse) + " | " + fmt3(r.reg->mae) + " | " +
                       fmt3(r.reg->r2) + " |\n";
        }
        out += "\n```json\n" + config_echo.dump(2) + "\n```\n";
        return out;
    }

    nlohmann::json to_json() const {
        nlohmann::json rows_json = nlohmann::json::array();
        for (const auto& r : rows) {
            nlohmann::json rj{{"model", r.model}};
            if (!r.error.empty()) {
                rj["error"] = r.error;
            } else if (classification) {
                rj["accuracy"] = r.cls->accuracy;
                rj["precision"] = r.cls->precision;
                rj["recall"] = r.cls->recall;
                rj["f1"] = r.cls->f1;
                if (r.cls->precision_undefined) rj["precision_undefined"] = true;
                if (r.cls->recall_undefined) rj["recall_undefined"] = true;
            } else {
                rj["mse"] = r.reg->mse;
                rj["mae"] = r.reg->mae;
                rj["r2"] = r.reg->r2;
                if (r.reg->r2_undefined) rj["r2_undefined"] = true;
            }
            rows_json.push_back(std::move(rj));
        }
        return {{"title", title},
                {"task", classification ? "classification" : "regression"},
                {"rows", rows_json},
                {"config", config_echo}};
    }
};

// ---- importances ----

struct ImportanceRanking {
    std::vector<std::string> features;
    std::vector<std::string> models;
    Matrix ranks; // features x models, 1-based
    std::vector<double> average_rank;
    std::vector<std::size_t> order; // feature indices by ascending average rank

    std::string to_csv() const {
        std::string out = "feature";
        for (const auto& m : models) out += "," + m;
        out += ",average_rank\n";
        for (std::size_t idx : order) {
            out += features[idx];
            for (std::size_t m = 0; m < models.size(); ++m)
                out += "," + std::to_string(static_cast<long long>(ranks(idx, m)));
            out += "," + fmt3(average_rank[idx]) + "\n";
        }
        return out;
    }
};

/// Descending importance per model; ties resolve toward the earlier feature in
/// the supplied (canonical) order.
inline ImportanceRanking importance_ranking(
    const std::vector<std::pair<std::string, ImportanceVector>>& importances,
    const std::vector<std::string>& feature_names) {
    ImportanceRanking out;
    out.features = feature_names;
    std::size_t p = feature_names.size();
    out.ranks = Matrix(p, importances.size());
    out.average_rank.assign(p, 0.0);
    for (std::size_t m = 0; m < importances.size(); ++m) {
        const auto& [name, iv] = importances[m];
        out.models.push_back(name);
        if (iv.values.size() != p) fail(Errc::length_mismatch, "importance vector for " + name);
        std::vector<std::size_t> idx(p);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return iv.values[a] > iv.values[b] || (iv.values[a] == iv.values[b] && a < b);
        });
        for (std::size_t pos = 0; pos < p; ++pos) out.ranks(idx[pos], m) = static_cast<double>(pos + 1);
    }
    for (std::size_t f = 0; f < p; ++f) {
        double s = 0;
        for (std::size_t m = 0; m < importances.size(); ++m) s += out.ranks(f, m);
        out.average_rank[f] = importances.empty() ? 0.0 : s / static_cast<double>(importances.size());
    }
    out.order.resize(p);
    std::iota(out.order.begin(), out.order.end(), std::size_t{0});
    std::sort(out.order.begin(), out.order.end(), [&](std::size_t a, std::size_t b) {
        return out.average_rank[a] < out.average_rank[b] ||
               (out.average_rank[a] == out.average_rank[b] && a < b);
    });
    return out;
}

inline std::string importance_csv(const std::vector<std::string>& features,
                                  const ImportanceVector& iv) {
    std::vector<std::size_t> idx(features.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return iv.values[a] > iv.values[b] || (iv.values[a] == iv.values[b] && a < b);
    });
    std::string out = "feature,importance,rank\n";
    for (std::size_t pos = 0; pos < idx.size(); ++pos)
        out += features[idx[pos]] + "," + fmt_g(iv.values[idx[pos]]) + "," +
               std::to_string(pos + 1) + "\n";
    return out;
}

// ---- experiment driver ----

struct ExperimentResult {
    ReportTable report;
    std::vector<std::pair<std::string, ImportanceVector>> importances;
    std::vector<std::string> feature_names;
    std::vector<std::string> dropped_features;
    bool has_median = false;
    double label_median = 0.0;
    std::optional<OLSModel> ols_model;
    SplitPlan split;
    std::vector<std::pair<std::string, nlohmann::json>> tuned_params;
};

namespace exp_detail {

/// Raw categorical columns carried alongside the numeric matrix so encodings
/// can be refit wherever the training boundary lies (outer split or CV fold).
struct CatColumns {
    std::vector<std::string> names;
    std::vector<std::vector<std::string>> values; // values[col][row]

    std::size_t n() const { return names.empty() ? 0 : values.front().size(); }

    CatColumns select(const std::vector<std::size_t>& idx) const {
        CatColumns out;
        out.names = names;
        out.values.resize(values.size());
        for (std::size_t c = 0; c < values.size(); ++c) {
            out.values[c].reserve(idx.size());
            for (auto i : idx) out.values[c].push_back(values[c][i]);
        }
        return out;
    }
};

inline CatColumns cat_columns(const Dataset& ds) {
    CatColumns out;
    for (auto f : schema::kCategorical) {
        out.names.emplace_back(f);
        std::vector<std::string> col;
        col.reserve(ds.size());
        for (const auto& r : ds.records) col.push_back(categorical_field(r, std::string(f)));
        out.values.push_back(std::move(col));
    }
    return out;
}

inline CategoricalVocab vocab_of(const CatColumns& cats) {
    CategoricalVocab vocab;
    for (std::size_t c = 0; c < cats.names.size(); ++c) {
        auto& lv = vocab.levels[cats.names[c]];
        std::set<std::string> seen;
        for (const auto& v : cats.values[c])
            if (seen.insert(v).second) lv.push_back(v);
    }
    return vocab;
}

inline FeatureMatrix assemble(const FeatureMatrix& numeric, const CatColumns& cats,
                              const CategoricalVocab& vocab) {
    FeatureMatrix out = numeric;
    for (std::size_t c = 0; c < cats.names.size(); ++c) {
        std::vector<double> col(cats.values[c].size());
        for (std::size_t i = 0; i < col.size(); ++i)
            col[i] = static_cast<double>(vocab.code(cats.names[c], cats.values[c][i]));
        out.append_column(cats.names[c], col);
    }
    return out;
}

template <class Y>
inline std::vector<Y> take(const std::vector<Y>& v, const std::vector<std::size_t>& idx) {
    std::vector<Y> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(v[i]);
    return out;
}

struct TuningOutcome {
    nlohmann::json best_params;
    bool ran = false;
};

/// Randomized or grid search with k-fold CV over the training rows only.
/// Encoders and scalers are refit inside every fold.
inline TuningOutcome tune_model(const ModelSpec& spec, bool regression,
                                const FeatureMatrix& Xtr_numeric, const CatColumns& cats_tr,
                                const std::vector<int>* ytr_cls, const std::vector<double>* ytr_reg,
                                std::size_t cv_folds, std::uint64_t seed_tune,
                                std::uint64_t model_seed) {
    TuningOutcome out;
    if (!spec.tune) return out;
    std::string mode = spec.tuning.value("mode", std::string("random"));
    std::string metric =
        spec.tuning.value("metric", std::string(regression ? "neg_mse" : "accuracy"));
    std::size_t total_p = Xtr_numeric.p() + cats_tr.names.size();
    SearchSpace space = spec.tuning.contains("space")
                            ? SearchSpace::from_json(spec.tuning.at("space"))
                            : default_tree_search_space(total_p, regression);
    std::size_t folds = std::min<std::size_t>(cv_folds, Xtr_numeric.n());

    CandidateEvaluator evaluate = [&](const nlohmann::json& candidate,
                                      const std::vector<std::size_t>& tr,
                                      const std::vector<std::size_t>& te) {
        nlohmann::json params = merge_params(spec.params, candidate);
        auto cats_i = cats_tr.select(tr);
        auto vocab_i = vocab_of(cats_i);
        FeatureMatrix Xi = assemble(Xtr_numeric.select_rows(tr), cats_i, vocab_i);
        FeatureMatrix Xo = assemble(Xtr_numeric.select_rows(te), cats_tr.select(te), vocab_i);
        if (regression) {
            auto yi = take(*ytr_reg, tr);
            auto yo = take(*ytr_reg, te);
            auto fitted = fit_regressor(spec.kind, params, Xi, yi, model_seed);
            return regression_metric(metric, yo, fitted.predict(Xo));
        }
        auto yi = take(*ytr_cls, tr);
        auto yo = take(*ytr_cls, te);
        auto fitted = fit_classifier(spec.kind, params, Xi, yi, model_seed);
        return classification_metric(metric, yo, fitted.predict(Xo));
    };

    SearchResult sr;
    if (mode == "grid") {
        if (!spec.tuning.contains("space"))
            fail(Errc::bad_argument, "grid tuning for '" + spec.name + "' needs an explicit space");
        sr = grid_search(space, evaluate, Xtr_numeric.n(), folds, seed_tune, metric);
    } else {
        std::size_t n_iter = spec.tuning.value("n_iter", std::size_t{20});
        std::uint64_t search_seed = mix64(seed_tune, 0x7e57);
        sr = random_search(space, n_iter, search_seed, evaluate, Xtr_numeric.n(), folds, seed_tune,
                           metric);
    }
    out.best_params = sr.best_params;
    out.ran = true;
    return out;
}

} // namespace exp_detail

inline ExperimentResult run_classification_experiment(const Dataset& ds,
                                                      const ExperimentConfig& config) {
    auto t0 = std::chrono::steady_clock::now();
    if (config.experiment == ExperimentConfig::Kind::exp3_regression)
        fail(Errc::bad_argument, "run_classification_experiment wants exp1 or exp2");
    auto citations = ds.citations(config.year);

    ExperimentResult result;
    auto pruned = prune_collinear(make_numeric_matrix(ds), config.prune_threshold);
    result.dropped_features = pruned.dropped;
    result.split = holdout_split(ds.size(), config.holdout_ratio, config.seed_split);

    LabelVector labels;
    if (config.experiment == ExperimentConfig::Kind::exp1_nonzero) {
        labels = label_nonzero(citations);
    } else if (!config.strict_median) {
        auto ml = label_above_median(citations);
        labels = std::move(ml.labels);
        result.label_median = ml.median;
        result.has_median = true;
    } else {
        auto train_counts = exp_detail::take(citations, result.split.train_indices);
        auto ml = label_above_median(train_counts);
        result.label_median = ml.median;
        result.has_median = true;
        labels.task = LabelVector::Task::binary;
        labels.positive_label_meaning = ">median citations (train median)";
        for (long long c : citations)
            labels.values.push_back(static_cast<double>(c) > ml.median ? 1.0 : 0.0);
    }
    auto y = labels.as_binary();

    auto cats = exp_detail::cat_columns(ds);
    auto cats_tr = cats.select(result.split.train_indices);
    auto vocab = exp_detail::vocab_of(cats_tr);
    FeatureMatrix Xtr_numeric = pruned.matrix.select_rows(result.split.train_indices);
    FeatureMatrix Xtr = exp_detail::assemble(Xtr_numeric, cats_tr, vocab);
    FeatureMatrix Xte = exp_detail::assemble(pruned.matrix.select_rows(result.split.test_indices),
                                             cats.select(result.split.test_indices), vocab);
    result.feature_names = Xtr.feature_names;
    auto ytr = exp_detail::take(y, result.split.train_indices);
    auto yte = exp_detail::take(y, result.split.test_indices);

    auto models = config.models.empty() ? default_classification_models() : config.models;
    bool has_majority = std::any_of(models.begin(), models.end(),
                                    [](const ModelSpec& m) { return m.kind == "majority"; });
    if (!has_majority) models.push_back({"Majority baseline", "majority"});

    result.report.classification = true;
    result.report.title = std::string("Experiment ") +
                          (config.experiment == ExperimentConfig::Kind::exp1_nonzero ? "1" : "2") +
                          " (" + std::to_string(config.year) + " citations)";
    for (std::size_t m = 0; m < models.size(); ++m) {
        const auto& spec = models[m];
        ReportRow row;
        row.model = spec.name;
        std::uint64_t model_seed = mix64(config.seed_model, m);
        try {
            nlohmann::json params = spec.params;
            auto tuned = exp_detail::tune_model(spec, false, Xtr_numeric, cats_tr, &ytr, nullptr,
                                                config.cv_folds, config.seed_tune, model_seed);
            if (tuned.ran) {
                params = exp_detail::merge_params(params, tuned.best_params);
                result.tuned_params.emplace_back(spec.name, tuned.best_params);
            }
            auto fitted = exp_detail::fit_classifier(spec.kind, params, Xtr, ytr, model_seed);
            row.cls = classification_report(yte, fitted.predict(Xte));
            if (fitted.importances && !fitted.importances->undefined)
                result.importances.emplace_back(spec.name, *fitted.importances);
        } catch (const Error& e) {
            row.error = e.what();
        }
        result.report.rows.push_back(std::move(row));
    }

    nlohmann::json echo = config.to_json();
    echo["resolved"] = {
        {"n", ds.size()},
        {"train_size", result.split.train_indices.size()},
        {"test_size", result.split.test_indices.size()},
        {"dropped_features", result.dropped_features},
        {"feature_names", result.feature_names},
        {"scaling", "knn/svm/neural_network standardized (population std, train stats); others raw"},
        {"encoder", "integer codes, train-fit, first-seen order; unseen level -> vocabulary size"},
    };
    if (result.has_median) {
        echo["resolved"]["label_median"] = result.label_median;
        echo["resolved"]["median_scope"] =
            config.strict_median ? "train_split" : "full_dataset (default; leaks one scalar)";
    }
    result.report.config_echo = std::move(echo);
    result.report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

inline ExperimentResult run_regression_experiment(const Dataset& ds,
                                                  const ExperimentConfig& config) {
    auto t0 = std::chrono::steady_clock::now();
    auto citations = ds.citations(config.year);

    ExperimentResult result;
    auto pruned = prune_collinear(make_numeric_matrix(ds), config.prune_threshold);
    result.dropped_features = pruned.dropped;
    result.split = holdout_split(ds.size(), config.holdout_ratio, config.seed_split);

    std::vector<std::string> to_log;
    for (const auto& name : pruned.matrix.feature_names)
        if (is_log_transformed_predictor(name)) to_log.push_back(name);
    FeatureMatrix fm = log1p_features(pruned.matrix, to_log);

    auto target = label_log_citations(citations);
    const auto& y = target.values;

    auto cats = exp_detail::cat_columns(ds);
    auto cats_tr = cats.select(result.split.train_indices);
    auto vocab = exp_detail::vocab_of(cats_tr);
    FeatureMatrix Xtr_numeric = fm.select_rows(result.split.train_indices);
    FeatureMatrix Xtr = exp_detail::assemble(Xtr_numeric, cats_tr, vocab);
    FeatureMatrix Xte = exp_detail::assemble(fm.select_rows(result.split.test_indices),
                                             cats.select(result.split.test_indices), vocab);
    result.feature_names = Xtr.feature_names;
    auto ytr = exp_detail::take(y, result.split.train_indices);
    auto yte = exp_detail::take(y, result.split.test_indices);

    auto models = config.models.empty() ? default_regression_models() : config.models;
    result.report.classification = false;
    result.report.title = "Experiment 3 (" + std::to_string(config.year) + " citations)";
    for (std::size_t m = 0; m < models.size(); ++m) {
        const auto& spec = models[m];
        ReportRow row;
        row.model = spec.name;
        std::uint64_t model_seed = mix64(config.seed_model, m);
        try {
            nlohmann::json params = spec.params;
            auto tuned = exp_detail::tune_model(spec, true, Xtr_numeric, cats_tr, nullptr, &ytr,
                                                config.cv_folds, config.seed_tune, model_seed);
            if (tuned.ran) {
                params = exp_detail::merge_params(params, tuned.best_params);
                result.tuned_params.emplace_back(spec.name, tuned.best_params);
            }
            auto fitted = exp_detail::fit_regressor(spec.kind, params, Xtr, ytr, model_seed);
            row.reg = regression_report(yte, fitted.predict(Xte));
            if (fitted.importances && !fitted.importances->undefined)
                result.importances.emplace_back(spec.name, *fitted.importances);
            if (fitted.ols) result.ols_model = fitted.ols;
        } catch (const Error& e) {
            row.error = e.what();
        }
        result.report.rows.push_back(std::move(row));
    }

    nlohmann::json echo = config.to_json();
    echo["resolved"] = {
        {"n", ds.size()},
        {"train_size", result.split.train_indices.size()},
        {"test_size", result.split.test_indices.size()},
        {"dropped_features", result.dropped_features},
        {"feature_names", result.feature_names},
        {"target", "ln(1+citations)"},
        {"log_transformed_predictors", to_log},
    };
    result.report.config_echo = std::move(echo);
    result.report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

inline ExperimentResult run_experiment(const Dataset& ds, const ExperimentConfig& config) {
    return config.experiment == ExperimentConfig::Kind::exp3_regression
               ? run_regression_experiment(ds, config)
               : run_classification_experiment(ds, config);
}

// ---- horizon comparison ----

struct HorizonComparison {
    ExperimentResult short_term; // 2017
    ExperimentResult long_term;  // 2020
    struct Delta {
        std::string model;
        std::map<std::string, double> metric_delta; // short minus long
    };
    std::vector<Delta> deltas;

    std::string to_csv() const {
        bool cls = short_term.report.classification;
        std::string out = cls ? "model,d_accuracy,d_precision,d_recall,d_f1\n"
                              : "model,d_mse,d_mae,d_r2\n";
        for (const auto& d : deltas) {
            out += d.model;
            if (cls)
                for (const char* k : {"accuracy", "precision", "recall", "f1"})
                    out += "," + (d.metric_delta.count(k) ? fmt3(d.metric_delta.at(k)) : std::string());
            else
                for (const char* k : {"mse", "mae", "r2"})
                    out += "," + (d.metric_delta.count(k) ? fmt3(d.metric_delta.at(k)) : std::string());
            out += "\n";
        }
        return out;
    }
};

inline HorizonComparison compare_horizons(const Dataset& ds, ExperimentConfig config) {
    if (!ds.has_citations(2017) || !ds.has_citations(2020))
        fail(Errc::missing_column, "compare_horizons needs citations_2017 and citations_2020");
    HorizonComparison out;
    config.year = 2017;
    out.short_term = run_experiment(ds, config);
    config.year = 2020;
    out.long_term = run_experiment(ds, config);
    for (const auto& row : out.short_term.report.rows) {
        const ReportRow* other = nullptr;
        for (const auto& lr : out.long_term.report.rows)
            if (lr.model == row.model) other = &lr;
        if (!other || !row.error.empty() || !other->error.empty()) continue;
        HorizonComparison::Delta d;
        d.model = row.model;
        if (row.cls && other->cls) {
            d.metric_delta["accuracy"] = row.cls->accuracy - other->cls->accuracy;
            d.metric_delta["precision"] = row.cls->precision - other->cls->precision;
            d.metric_delta["recall"] = row.cls->recall - other->cls->recall;
            d.metric_delta["f1"] = row.cls->f1 - other->cls->f1;
        } else if (row.reg && other->reg) {
            d.metric_delta["mse"] = row.reg->mse - other->reg->mse;
            d.metric_delta["mae"] = row.reg->mae - other->reg->mae;
            d.metric_delta["r2"] = row.reg->r2 - other->reg->r2;
        }
        out.deltas.push_back(std::move(d));
    }
    return out;
}

} // namespace altcite
