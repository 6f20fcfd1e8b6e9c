#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "altcite/common.hpp"
#include "altcite/dataset.hpp"

namespace altcite {

struct ScalerStats {
    std::vector<double> mean;
    std::vector<double> std; // population standard deviation
};

/// Column-ordered dense view of a dataset, plus per-feature transform state.
struct FeatureMatrix {
    Matrix values;
    std::vector<std::string> feature_names;
    std::vector<bool> transform_log;           // ln(1+x) applied?
    std::optional<ScalerStats> standardized;   // set once z-scored

    std::size_t n() const { return values.rows(); }
    std::size_t p() const { return values.cols(); }

    std::size_t index_of(const std::string& name) const {
        for (std::size_t j = 0; j < feature_names.size(); ++j)
            if (feature_names[j] == name) return j;
        fail(Errc::unknown_feature, name);
    }

    bool has_feature(const std::string& name) const {
        for (const auto& f : feature_names)
            if (f == name) return true;
        return false;
    }

    FeatureMatrix select_rows(const std::vector<std::size_t>& idx) const {
        FeatureMatrix out;
        out.feature_names = feature_names;
        out.transform_log = transform_log;
        out.standardized = standardized;
        out.values = Matrix(idx.size(), p());
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t j = 0; j < p(); ++j)
                out.values(i, j) = values(idx[i], j);
        return out;
    }

    FeatureMatrix drop_columns(const std::set<std::size_t>& cols) const {
        FeatureMatrix out;
        out.standardized = std::nullopt;
        std::vector<std::size_t> keep;
        for (std::size_t j = 0; j < p(); ++j)
            if (!cols.count(j)) keep.push_back(j);
        out.values = Matrix(n(), keep.size());
        for (std::size_t j = 0; j < keep.size(); ++j) {
            out.feature_names.push_back(feature_names[keep[j]]);
            out.transform_log.push_back(transform_log[keep[j]]);
            for (std::size_t i = 0; i < n(); ++i) out.values(i, j) = values(i, keep[j]);
        }
        return out;
    }

    void append_column(const std::string& name, const std::vector<double>& col,
                       bool log_flag = false) {
        if (!values.data().empty() && col.size() != n())
            fail(Errc::length_mismatch, "column " + name);
        Matrix next(col.size(), p() + 1);
        for (std::size_t i = 0; i < col.size(); ++i) {
            for (std::size_t j = 0; j < p(); ++j) next(i, j) = values(i, j);
            next(i, p()) = col[i];
        }
        values = std::move(next);
        feature_names.push_back(name);
        transform_log.push_back(log_flag);
        standardized.reset();
    }

    void check_finite() const {
        for (double v : values.data())
            if (!std::isfinite(v)) fail(Errc::bad_argument, "non-finite entry in feature matrix");
    }
};

inline FeatureMatrix make_feature_matrix(const Dataset& ds,
                                         const std::vector<std::string>& columns) {
    FeatureMatrix m;
    m.feature_names = columns;
    m.transform_log.assign(columns.size(), false);
    m.values = Matrix(ds.size(), columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
        auto col = ds.column(columns[j]);
        for (std::size_t i = 0; i < col.size(); ++i) m.values(i, j) = col[i];
    }
    return m;
}

/// Numeric part of the canonical schema (no categoricals, no citations).
inline FeatureMatrix make_numeric_matrix(const Dataset& ds) {
    return make_feature_matrix(ds, schema::numeric_feature_names());
}

// ---- correlation ----

struct CorrelationMatrix {
    Matrix r;
    std::vector<bool> zero_variance; // flagged columns: correlations defined as 0
    std::vector<std::string> feature_names;
};

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) fail(Errc::length_mismatch, "pearson");
    std::size_t n = x.size();
    double mx = mean_of(x), my = mean_of(y);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0; // zero-variance convention
    return sxy / std::sqrt(sxx * syy);
}

inline CorrelationMatrix pearson_matrix(const FeatureMatrix& m) {
    if (m.n() < 2) fail(Errc::too_few_rows, "pearson_matrix requires n >= 2");
    std::size_t p = m.p();
    CorrelationMatrix out;
    out.feature_names = m.feature_names;
    out.r = Matrix(p, p);
    out.zero_variance.assign(p, false);
    std::vector<std::vector<double>> cols(p);
    for (std::size_t j = 0; j < p; ++j) {
        cols[j] = m.values.column(j);
        double s = 0, mu = mean_of(cols[j]);
        for (double v : cols[j]) s += (v - mu) * (v - mu);
        out.zero_variance[j] = (s == 0.0);
    }
    for (std::size_t a = 0; a < p; ++a) {
        out.r(a, a) = out.zero_variance[a] ? 0.0 : 1.0;
        for (std::size_t b = a + 1; b < p; ++b) {
            double v = (out.zero_variance[a] || out.zero_variance[b]) ? 0.0
                                                                      : pearson(cols[a], cols[b]);
            out.r(a, b) = v;
            out.r(b, a) = v;
        }
    }
    return out;
}

// ---- collinearity pruning ----

struct PruneResult {
    FeatureMatrix matrix;
    std::vector<std::string> dropped;
};

/// Repeatedly take the most correlated pair at or above the threshold and drop
/// the member with the larger mean absolute correlation to all other features
/// (tie: the later feature in the current canonical order).
inline PruneResult prune_collinear(const FeatureMatrix& m, double threshold) {
    if (threshold <= 0.0 || threshold >= 1.0)
        fail(Errc::bad_argument, "prune threshold must be in (0,1)");
    PruneResult out;
    out.matrix = m;
    while (out.matrix.p() >= 2) {
        auto corr = pearson_matrix(out.matrix);
        std::size_t p = out.matrix.p();
        double best = -1.0;
        std::size_t ba = 0, bb = 0;
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = a + 1; b < p; ++b) {
                double v = std::fabs(corr.r(a, b));
                if (v >= threshold && v > best) {
                    best = v;
                    ba = a;
                    bb = b;
                }
            }
        if (best < 0.0) break;
        auto mean_abs = [&](std::size_t j) {
            double s = 0;
            for (std::size_t k = 0; k < p; ++k)
                if (k != j) s += std::fabs(corr.r(j, k));
            return s / static_cast<double>(p - 1);
        };
        double sa = mean_abs(ba), sb = mean_abs(bb);
        std::size_t drop = (sa > sb) ? ba : (sb > sa) ? bb : bb; // tie: later column
        out.dropped.push_back(out.matrix.feature_names[drop]);
        out.matrix = out.matrix.drop_columns({drop});
    }
    return out;
}

// ---- categorical encoding ----

struct CategoricalVocab {
    // level list per feature, in first-seen order; code = position,
    // unseen-at-apply values map to levels.size()
    std::map<std::string, std::vector<std::string>> levels;

    long long code(const std::string& feature, const std::string& value) const {
        auto it = levels.find(feature);
        if (it == levels.end()) fail(Errc::unknown_feature, feature);
        for (std::size_t i = 0; i < it->second.size(); ++i)
            if (it->second[i] == value) return static_cast<long long>(i);
        return static_cast<long long>(it->second.size());
    }
};

struct EncodeResult {
    std::vector<std::string> feature_names;
    Matrix columns; // n x (#categorical features), integer codes as doubles
    CategoricalVocab vocab;
};

inline EncodeResult encode_categoricals(const Dataset& ds,
                                        const CategoricalVocab* vocab = nullptr) {
    EncodeResult out;
    for (auto f : schema::kCategorical) out.feature_names.emplace_back(f);
    if (vocab)
        out.vocab = *vocab;
    else
        for (const auto& f : out.feature_names) {
            auto& lv = out.vocab.levels[f];
            std::set<std::string> seen;
            for (const auto& r : ds.records) {
                const auto& v = categorical_field(r, f);
                if (seen.insert(v).second) lv.push_back(v);
            }
        }
    out.columns = Matrix(ds.size(), out.feature_names.size());
    for (std::size_t j = 0; j < out.feature_names.size(); ++j)
        for (std::size_t i = 0; i < ds.size(); ++i)
            out.columns(i, j) = static_cast<double>(
                out.vocab.code(out.feature_names[j], categorical_field(ds.records[i], out.feature_names[j])));
    return out;
}

// ---- transforms ----

inline FeatureMatrix log1p_features(const FeatureMatrix& m,
                                    const std::vector<std::string>& features) {
    FeatureMatrix out = m;
    for (const auto& name : features) {
        std::size_t j = out.index_of(name);
        for (std::size_t i = 0; i < out.n(); ++i) {
            double v = out.values(i, j);
            if (v < 0) fail(Errc::bad_argument, "log1p on negative value in " + name);
            out.values(i, j) = std::log1p(v);
        }
        out.transform_log[j] = true;
    }
    out.standardized.reset();
    return out;
}

inline ScalerStats fit_scaler(const FeatureMatrix& m) {
    ScalerStats s;
    s.mean.resize(m.p());
    s.std.resize(m.p());
    for (std::size_t j = 0; j < m.p(); ++j) {
        auto col = m.values.column(j);
        s.mean[j] = mean_of(col);
        s.std[j] = population_std(col);
    }
    return s;
}

inline FeatureMatrix standardize(const FeatureMatrix& m, const ScalerStats& stats) {
    if (stats.mean.size() != m.p()) fail(Errc::feature_count_mismatch, "scaler stats");
    FeatureMatrix out = m;
    for (std::size_t j = 0; j < m.p(); ++j)
        for (std::size_t i = 0; i < m.n(); ++i)
            out.values(i, j) = stats.std[j] == 0.0
                                   ? 0.0
                                   : (m.values(i, j) - stats.mean[j]) / stats.std[j];
    out.standardized = stats;
    return out;
}

inline FeatureMatrix standardize(const FeatureMatrix& m) { return standardize(m, fit_scaler(m)); }

// ---- labeling ----

struct LabelVector {
    enum class Task { binary, continuous };
    Task task = Task::binary;
    std::vector<double> values;
    std::string positive_label_meaning;

    std::size_t size() const { return values.size(); }

    std::vector<int> as_binary() const {
        if (task != Task::binary) fail(Errc::bad_argument, "labels are not binary");
        std::vector<int> out(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (values[i] != 0.0 && values[i] != 1.0)
                fail(Errc::bad_argument, "binary label not in {0,1}");
            out[i] = static_cast<int>(values[i]);
        }
        return out;
    }
};

inline LabelVector label_nonzero(const std::vector<long long>& citations) {
    LabelVector out;
    out.task = LabelVector::Task::binary;
    out.positive_label_meaning = ">=1 citation";
    out.values.reserve(citations.size());
    for (long long c : citations) {
        if (c < 0) fail(Errc::negative_value, "citation count");
        out.values.push_back(c >= 1 ? 1.0 : 0.0);
    }
    return out;
}

struct MedianLabelResult {
    LabelVector labels;
    double median = 0.0;
};

inline MedianLabelResult label_above_median(const std::vector<long long>& citations) {
    if (citations.empty()) fail(Errc::empty_data, "label_above_median");
    std::vector<double> sorted;
    sorted.reserve(citations.size());
    for (long long c : citations) {
        if (c < 0) fail(Errc::negative_value, "citation count");
        sorted.push_back(static_cast<double>(c));
    }
    std::sort(sorted.begin(), sorted.end());
    MedianLabelResult out;
    out.median = quantile_sorted(sorted, 0.5);
    out.labels.task = LabelVector::Task::binary;
    out.labels.positive_label_meaning = ">median citations";
    for (long long c : citations)
        out.labels.values.push_back(static_cast<double>(c) > out.median ? 1.0 : 0.0);
    return out;
}

inline LabelVector label_log_citations(const std::vector<long long>& citations) {
    LabelVector out;
    out.task = LabelVector::Task::continuous;
    out.positive_label_meaning = "ln(1+citations)";
    for (long long c : citations) {
        if (c < 0) fail(Errc::negative_value, "citation count");
        out.values.push_back(std::log1p(static_cast<double>(c)));
    }
    return out;
}

// ---- splits ----

struct SplitPlan {
    enum class Kind { holdout, kfold };
    Kind kind = Kind::holdout;
    std::uint64_t seed = 0;
    double ratio = 0.0;                           // holdout only
    std::size_t k = 0;                            // kfold only
    std::vector<std::size_t> train_indices;       // holdout
    std::vector<std::size_t> test_indices;        // holdout
    std::vector<std::vector<std::size_t>> folds;  // kfold

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["seed"] = seed;
        if (kind == Kind::holdout) {
            j["kind"] = "holdout";
            j["ratio"] = ratio;
            j["indices"] = {{"train", train_indices}, {"test", test_indices}};
        } else {
            j["kind"] = "kfold";
            j["k"] = k;
            j["indices"] = folds;
        }
        return j;
    }

    static SplitPlan from_json(const nlohmann::json& j) {
        SplitPlan p;
        p.seed = j.at("seed").get<std::uint64_t>();
        if (j.at("kind") == "holdout") {
            p.kind = Kind::holdout;
            p.ratio = j.at("ratio").get<double>();
            p.train_indices = j.at("indices").at("train").get<std::vector<std::size_t>>();
            p.test_indices = j.at("indices").at("test").get<std::vector<std::size_t>>();
        } else {
            p.kind = Kind::kfold;
            p.k = j.at("k").get<std::size_t>();
            p.folds = j.at("indices").get<std::vector<std::vector<std::size_t>>>();
        }
        return p;
    }
};

inline SplitPlan holdout_split(std::size_t n, double ratio, std::uint64_t seed) {
    if (n < 2) fail(Errc::too_few_rows, "holdout_split requires n >= 2");
    if (ratio <= 0.0 || ratio >= 1.0) fail(Errc::bad_argument, "holdout ratio must be in (0,1)");
    std::size_t train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n)));
    if (train == 0 || train == n)
        fail(Errc::degenerate_split, "holdout leaves an empty side (n=" + std::to_string(n) + ")");
    Rng rng(mix64(seed, 0x501d0u));
    auto perm = rng.permutation(n);
    SplitPlan plan;
    plan.kind = SplitPlan::Kind::holdout;
    plan.seed = seed;
    plan.ratio = ratio;
    plan.train_indices.assign(perm.begin(), perm.begin() + train);
    plan.test_indices.assign(perm.begin() + train, perm.end());
    return plan;
}

inline SplitPlan kfold(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k < 2 || k > n) fail(Errc::bad_k, "kfold requires 2 <= k <= n");
    Rng rng(mix64(seed, 0xf01d5));
    auto perm = rng.permutation(n);
    SplitPlan plan;
    plan.kind = SplitPlan::Kind::kfold;
    plan.seed = seed;
    plan.k = k;
    plan.folds.resize(k);
    std::size_t base = n / k, extra = n % k, pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
        std::size_t len = base + (f < extra ? 1 : 0);
        plan.folds[f].assign(perm.begin() + pos, perm.begin() + pos + len);
        pos += len;
    }
    return plan;
}

} // namespace altcite
