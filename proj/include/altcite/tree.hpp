#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "altcite/common.hpp"

namespace altcite {

enum class SplitCriterion { gini, entropy, mse, mae, friedman_mse };

inline const char* criterion_name(SplitCriterion c) {
    switch (c) {
    case SplitCriterion::gini: return "gini";
    case SplitCriterion::entropy: return "entropy";
    case SplitCriterion::mse: return "mse";
    case SplitCriterion::mae: return "mae";
    case SplitCriterion::friedman_mse: return "friedman_mse";
    }
    return "?";
}

inline SplitCriterion criterion_from_name(const std::string& s) {
    if (s == "gini") return SplitCriterion::gini;
    if (s == "entropy") return SplitCriterion::entropy;
    if (s == "mse") return SplitCriterion::mse;
    if (s == "mae") return SplitCriterion::mae;
    if (s == "friedman_mse") return SplitCriterion::friedman_mse;
    fail(Errc::bad_argument, "unknown criterion '" + s + "'");
}

inline bool is_classification_criterion(SplitCriterion c) {
    return c == SplitCriterion::gini || c == SplitCriterion::entropy;
}

/// min_samples_split / min_samples_leaf accept an absolute count or a fraction
/// of the training size. Fractions resolve as ceil(fraction*n); a resolved
/// min_samples_split below 2 clamps to 2.
struct CountOrFraction {
    double raw = 1.0;
    bool is_fraction = false;

    static CountOrFraction count(std::size_t c) { return {static_cast<double>(c), false}; }
    static CountOrFraction fraction(double f) { return {f, true}; }

    std::size_t resolve(std::size_t n) const {
        if (is_fraction) {
            if (raw <= 0.0 || raw > 1.0) fail(Errc::bad_argument, "fraction must be in (0,1]");
            return static_cast<std::size_t>(std::ceil(raw * static_cast<double>(n)));
        }
        if (raw < 1.0) fail(Errc::bad_argument, "count must be >= 1");
        return static_cast<std::size_t>(raw);
    }

    nlohmann::json to_json() const {
        return is_fraction ? nlohmann::json{{"fraction", raw}} : nlohmann::json{{"count", raw}};
    }
    static CountOrFraction from_json(const nlohmann::json& j) {
        if (j.contains("fraction")) return fraction(j.at("fraction").get<double>());
        return count(j.at("count").get<std::size_t>());
    }
};

struct TreeParams {
    SplitCriterion criterion = SplitCriterion::gini;
    std::size_t max_depth = 0; // 0 = unlimited
    CountOrFraction min_samples_split = CountOrFraction::count(2);
    CountOrFraction min_samples_leaf = CountOrFraction::count(1);
    std::size_t max_features = 0; // 0 = all features
    std::uint64_t random_state = 0;

    nlohmann::json to_json() const {
        return {{"criterion", criterion_name(criterion)},
                {"max_depth", max_depth},
                {"min_samples_split", min_samples_split.to_json()},
                {"min_samples_leaf", min_samples_leaf.to_json()},
                {"max_features", max_features},
                {"random_state", random_state}};
    }
    static TreeParams from_json(const nlohmann::json& j) {
        TreeParams p;
        p.criterion = criterion_from_name(j.at("criterion").get<std::string>());
        p.max_depth = j.at("max_depth").get<std::size_t>();
        p.min_samples_split = CountOrFraction::from_json(j.at("min_samples_split"));
        p.min_samples_leaf = CountOrFraction::from_json(j.at("min_samples_leaf"));
        p.max_features = j.at("max_features").get<std::size_t>();
        p.random_state = j.at("random_state").get<std::uint64_t>();
        return p;
    }
};

struct EnsembleParams {
    std::size_t num_estimators = 100;
    double learning_rate = 0.1; // boosting only
    TreeParams base;
    bool bootstrap = true; // forest only

    nlohmann::json to_json() const {
        return {{"num_estimators", num_estimators},
                {"learning_rate", learning_rate},
                {"base", base.to_json()},
                {"bootstrap", bootstrap}};
    }
    static EnsembleParams from_json(const nlohmann::json& j) {
        EnsembleParams p;
        p.num_estimators = j.at("num_estimators").get<std::size_t>();
        p.learning_rate = j.at("learning_rate").get<double>();
        p.base = TreeParams::from_json(j.at("base"));
        p.bootstrap = j.at("bootstrap").get<bool>();
        return p;
    }
};

struct TreeNode {
    int feature = -1; // -1: leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    double p1 = 0.0;    // classification leaf: weighted P(class 1)
    double value = 0.0; // regression leaf
    std::size_t n_samples = 0;
};

struct TreeModel {
    TreeParams params;
    bool is_classifier = true;
    std::size_t n_features = 0;
    std::vector<TreeNode> nodes;
    std::vector<double> importance_raw; // summed weighted impurity decreases

    bool single_leaf() const { return nodes.size() == 1; }
};

namespace tree_detail {

struct Targets {
    bool classification = true;
    const std::vector<int>* labels = nullptr;
    const std::vector<double>* values = nullptr;
    const std::vector<double>* weights = nullptr; // null = uniform
    double weight(std::size_t i) const { return weights ? (*weights)[i] : 1.0; }
};

inline double class_impurity(double w1, double w, SplitCriterion c) {
    if (w <= 0) return 0.0;
    double p1 = w1 / w, p0 = 1.0 - p1;
    if (c == SplitCriterion::gini) return 1.0 - p1 * p1 - p0 * p0;
    double h = 0.0;
    if (p1 > 0) h -= p1 * std::log2(p1);
    if (p0 > 0) h -= p0 * std::log2(p0);
    return h;
}

inline double variance_from_sums(double w, double wy, double wyy) {
    if (w <= 0) return 0.0;
    double m = wy / w;
    double v = wyy / w - m * m;
    return v > 0 ? v : 0.0;
}

/// Weighted median and weighted mean absolute deviation about it.
inline std::pair<double, double> weighted_median_mad(std::vector<std::pair<double, double>>& yw) {
    double total = 0;
    for (auto& [y, w] : yw) total += w;
    std::sort(yw.begin(), yw.end());
    double acc = 0, median = yw.back().first;
    for (auto& [y, w] : yw) {
        acc += w;
        if (acc >= total / 2.0) {
            median = y;
            break;
        }
    }
    double mad = 0;
    for (auto& [y, w] : yw) mad += w * std::fabs(y - median);
    return {median, mad / total};
}

struct NodeStats {
    double w = 0, w1 = 0;      // classification
    double wy = 0, wyy = 0;    // regression
    std::size_t n = 0;
};

inline NodeStats stats_of(const std::vector<std::size_t>& idx, const Targets& t) {
    NodeStats s;
    s.n = idx.size();
    for (auto i : idx) {
        double w = t.weight(i);
        s.w += w;
        if (t.classification) {
            if ((*t.labels)[i] == 1) s.w1 += w;
        } else {
            double y = (*t.values)[i];
            s.wy += w * y;
            s.wyy += w * y * y;
        }
    }
    return s;
}

inline double node_impurity(const std::vector<std::size_t>& idx, const NodeStats& s,
                            const Targets& t, SplitCriterion c) {
    if (t.classification) return class_impurity(s.w1, s.w, c);
    if (c == SplitCriterion::mae) {
        std::vector<std::pair<double, double>> yw;
        yw.reserve(idx.size());
        for (auto i : idx) yw.emplace_back((*t.values)[i], t.weight(i));
        return weighted_median_mad(yw).second;
    }
    return variance_from_sums(s.w, s.wy, s.wyy); // mse and friedman_mse
}

struct Builder {
    const Matrix& X;
    Targets targets;
    TreeParams params;
    std::size_t min_split, min_leaf;
    Rng rng;
    TreeModel* model;
    double total_weight;

    Builder(const Matrix& x, Targets t, const TreeParams& p, TreeModel* m)
        : X(x), targets(t), params(p),
          min_split(std::max<std::size_t>(2, p.min_samples_split.resolve(x.rows()))),
          min_leaf(std::max<std::size_t>(1, p.min_samples_leaf.resolve(x.rows()))),
          rng(mix64(p.random_state, 0x7233)), model(m), total_weight(0) {
        for (std::size_t i = 0; i < X.rows(); ++i) total_weight += targets.weight(i);
    }

    std::vector<std::size_t> candidate_features() {
        std::size_t p = X.cols();
        std::size_t m = (params.max_features == 0) ? p : std::min(params.max_features, p);
        std::vector<std::size_t> all(p);
        std::iota(all.begin(), all.end(), std::size_t{0});
        if (m >= p) return all;
        // partial Fisher-Yates, then ascending order for deterministic tie-breaks
        for (std::size_t i = 0; i < m; ++i)
            std::swap(all[i], all[i + rng.below(p - i)]);
        all.resize(m);
        std::sort(all.begin(), all.end());
        return all;
    }

    struct Split {
        bool found = false;
        std::size_t feature = 0;
        double threshold = 0;
        double gain = 0;             // criterion gain used for selection
        double impurity_decrease = 0; // per-sample impurity decrease for importances
    };

    Split best_split(const std::vector<std::size_t>& idx, const NodeStats& ns, double node_imp,
                     const std::vector<std::size_t>& features) {
        Split best;
        std::vector<std::pair<double, std::size_t>> order(idx.size());
        for (std::size_t f : features) {
            for (std::size_t i = 0; i < idx.size(); ++i)
                order[i] = {X(idx[i], f), idx[i]};
            std::sort(order.begin(), order.end());
            double wl = 0, wl1 = 0, wly = 0, wlyy = 0;
            for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                std::size_t row = order[i].second;
                double w = targets.weight(row);
                wl += w;
                if (targets.classification) {
                    if ((*targets.labels)[row] == 1) wl1 += w;
                } else {
                    double y = (*targets.values)[row];
                    wly += w * y;
                    wlyy += w * y * y;
                }
                double a = order[i].first, b = order[i + 1].first;
                if (a == b) continue; // threshold only between distinct values
                double mid = 0.5 * (a + b);
                if (!(mid > a && mid < b)) continue;
                std::size_t nl = i + 1, nr = order.size() - nl;
                if (nl < min_leaf || nr < min_leaf) continue;
                double wr = ns.w - wl;
                if (wl <= 0 || wr <= 0) continue;

                double gain = 0, decrease = 0;
                if (targets.classification) {
                    double il = class_impurity(wl1, wl, params.criterion);
                    double ir = class_impurity(ns.w1 - wl1, wr, params.criterion);
                    decrease = node_imp - (wl / ns.w) * il - (wr / ns.w) * ir;
                    gain = decrease;
                } else if (params.criterion == SplitCriterion::friedman_mse) {
                    double ml = wly / wl, mr = (ns.wy - wly) / wr;
                    double d = ml - mr;
                    gain = (wl * wr) / (wl + wr) * d * d;
                    decrease = gain / ns.w;
                } else if (params.criterion == SplitCriterion::mse) {
                    double il = variance_from_sums(wl, wly, wlyy);
                    double ir = variance_from_sums(wr, ns.wy - wly, ns.wyy - wlyy);
                    decrease = node_imp - (wl / ns.w) * il - (wr / ns.w) * ir;
                    gain = decrease;
                } else { // mae
                    std::vector<std::pair<double, double>> lyw, ryw;
                    lyw.reserve(nl);
                    ryw.reserve(nr);
                    for (std::size_t q = 0; q < order.size(); ++q) {
                        auto row2 = order[q].second;
                        (q <= i ? lyw : ryw).emplace_back((*targets.values)[row2],
                                                          targets.weight(row2));
                    }
                    double il = weighted_median_mad(lyw).second;
                    double ir = weighted_median_mad(ryw).second;
                    decrease = node_imp - (wl / ns.w) * il - (wr / ns.w) * ir;
                    gain = decrease;
                }
                if (gain > best.gain && gain > 0) {
                    best.found = true;
                    best.feature = f;
                    best.threshold = mid;
                    best.gain = gain;
                    best.impurity_decrease = decrease;
                }
            }
        }
        return best;
    }

    int make_leaf(const std::vector<std::size_t>& idx, const NodeStats& ns) {
        TreeNode leaf;
        leaf.n_samples = ns.n;
        if (targets.classification) {
            leaf.p1 = ns.w > 0 ? ns.w1 / ns.w : 0.0;
        } else if (params.criterion == SplitCriterion::mae) {
            std::vector<std::pair<double, double>> yw;
            for (auto i : idx) yw.emplace_back((*targets.values)[i], targets.weight(i));
            leaf.value = weighted_median_mad(yw).first;
        } else {
            leaf.value = ns.w > 0 ? ns.wy / ns.w : 0.0;
        }
        model->nodes.push_back(leaf);
        return static_cast<int>(model->nodes.size() - 1);
    }

    int build(const std::vector<std::size_t>& idx, std::size_t depth) {
        NodeStats ns = stats_of(idx, targets);
        double imp = node_impurity(idx, ns, targets, params.criterion);
        bool depth_ok = params.max_depth == 0 || depth < params.max_depth;
        if (!depth_ok || idx.size() < min_split || imp <= 0.0)
            return make_leaf(idx, ns);

        auto split = best_split(idx, ns, imp, candidate_features());
        if (!split.found) return make_leaf(idx, ns);

        std::vector<std::size_t> left, right;
        for (auto i : idx)
            (X(i, split.feature) <= split.threshold ? left : right).push_back(i);
        model->importance_raw[split.feature] +=
            (ns.w / total_weight) * split.impurity_decrease;

        TreeNode node;
        node.feature = static_cast<int>(split.feature);
        node.threshold = split.threshold;
        node.n_samples = ns.n;
        model->nodes.push_back(node);
        int self = static_cast<int>(model->nodes.size() - 1);
        int l = build(left, depth + 1);
        int r = build(right, depth + 1);
        model->nodes[self].left = l;
        model->nodes[self].right = r;
        return self;
    }
};

inline TreeModel fit(const Matrix& X, Targets t, const TreeParams& params) {
    if (X.rows() == 0 || X.cols() == 0) fail(Errc::empty_data, "fit_tree on empty data");
    TreeModel model;
    model.params = params;
    model.is_classifier = t.classification;
    model.n_features = X.cols();
    model.importance_raw.assign(X.cols(), 0.0);
    Builder b(X, t, params, &model);
    std::vector<std::size_t> all(X.rows());
    std::iota(all.begin(), all.end(), std::size_t{0});
    b.build(all, 0);
    return model;
}

inline const TreeNode& descend(const TreeModel& m, const double* row) {
    int cur = 0;
    while (m.nodes[cur].feature >= 0)
        cur = row[m.nodes[cur].feature] <= m.nodes[cur].threshold ? m.nodes[cur].left
                                                                  : m.nodes[cur].right;
    return m.nodes[cur];
}

} // namespace tree_detail

// ---- single trees ----

inline TreeModel fit_classification_tree(const Matrix& X, const std::vector<int>& y,
                                         const TreeParams& params,
                                         const std::vector<double>* weights = nullptr) {
    if (y.size() != X.rows()) fail(Errc::length_mismatch, "fit_classification_tree");
    if (!is_classification_criterion(params.criterion))
        fail(Errc::bad_argument, "classification tree needs gini or entropy");
    tree_detail::Targets t;
    t.classification = true;
    t.labels = &y;
    t.weights = weights;
    return tree_detail::fit(X, t, params);
}

inline TreeModel fit_regression_tree(const Matrix& X, const std::vector<double>& y,
                                     const TreeParams& params,
                                     const std::vector<double>* weights = nullptr) {
    if (y.size() != X.rows()) fail(Errc::length_mismatch, "fit_regression_tree");
    if (is_classification_criterion(params.criterion))
        fail(Errc::bad_argument, "regression tree needs mse, mae or friedman_mse");
    tree_detail::Targets t;
    t.classification = false;
    t.values = &y;
    t.weights = weights;
    return tree_detail::fit(X, t, params);
}

inline std::vector<double> predict_proba(const TreeModel& m, const Matrix& X) {
    check_width(m.n_features, X);
    std::vector<double> out(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i)
        out[i] = tree_detail::descend(m, X.row(i)).p1;
    return out;
}

inline std::vector<int> predict_labels(const TreeModel& m, const Matrix& X) {
    auto proba = predict_proba(m, X);
    std::vector<int> out(proba.size());
    for (std::size_t i = 0; i < proba.size(); ++i) out[i] = proba[i] > 0.5 ? 1 : 0;
    return out;
}

inline std::vector<double> predict_values(const TreeModel& m, const Matrix& X) {
    check_width(m.n_features, X);
    std::vector<double> out(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i)
        out[i] = tree_detail::descend(m, X.row(i)).value;
    return out;
}

// ---- impurity (exposed for direct use and tests) ----

inline double impurity(const std::vector<double>& class_probs_or_targets, SplitCriterion c) {
    const auto& v = class_probs_or_targets;
    if (v.empty()) fail(Errc::empty_data, "impurity of empty input");
    switch (c) {
    case SplitCriterion::gini: {
        double s = 1.0;
        for (double p : v) s -= p * p;
        return s;
    }
    case SplitCriterion::entropy: {
        double h = 0.0;
        for (double p : v)
            if (p > 0) h -= p * std::log2(p);
        return h;
    }
    case SplitCriterion::mse: {
        double m = mean_of(v), s = 0;
        for (double y : v) s += (y - m) * (y - m);
        return s / static_cast<double>(v.size());
    }
    case SplitCriterion::mae: {
        std::vector<std::pair<double, double>> yw;
        for (double y : v) yw.emplace_back(y, 1.0);
        return tree_detail::weighted_median_mad(yw).second;
    }
    case SplitCriterion::friedman_mse: {
        double m = mean_of(v), s = 0;
        for (double y : v) s += (y - m) * (y - m);
        return s / static_cast<double>(v.size());
    }
    }
    fail(Errc::bad_argument, "impurity");
}

/// Friedman split score for a two-group candidate: (nl*nr)/(nl+nr)*(mean_l-mean_r)^2.
inline double friedman_split_score(const std::vector<double>& left,
                                   const std::vector<double>& right) {
    if (left.empty() || right.empty()) fail(Errc::empty_data, "friedman_split_score");
    double nl = static_cast<double>(left.size()), nr = static_cast<double>(right.size());
    double d = mean_of(left) - mean_of(right);
    return (nl * nr) / (nl + nr) * d * d;
}

// ---- random forest ----

struct ForestModel {
    EnsembleParams params;
    bool is_classifier = true;
    std::vector<TreeModel> trees;
};

namespace tree_detail {

inline std::vector<std::size_t> bootstrap_indices(std::size_t n, Rng& rng) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = rng.below(n);
    return idx;
}

inline Matrix rows_subset(const Matrix& X, const std::vector<std::size_t>& idx) {
    Matrix out(idx.size(), X.cols());
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < X.cols(); ++j) out(i, j) = X(idx[i], j);
    return out;
}

} // namespace tree_detail

inline ForestModel fit_random_forest(const Matrix& X, const std::vector<int>& y,
                                     const EnsembleParams& params) {
    if (X.rows() == 0) fail(Errc::empty_data, "fit_random_forest");
    if (params.num_estimators < 1) fail(Errc::bad_argument, "num_estimators >= 1");
    ForestModel f;
    f.params = params;
    f.is_classifier = true;
    for (std::size_t t = 0; t < params.num_estimators; ++t) {
        std::uint64_t member_seed = mix64(params.base.random_state, t);
        TreeParams tp = params.base;
        tp.random_state = mix64(member_seed, 1);
        if (params.bootstrap) {
            Rng rng(member_seed);
            auto idx = tree_detail::bootstrap_indices(X.rows(), rng);
            std::vector<int> yb(idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i) yb[i] = y[idx[i]];
            f.trees.push_back(fit_classification_tree(tree_detail::rows_subset(X, idx), yb, tp));
        } else {
            f.trees.push_back(fit_classification_tree(X, y, tp));
        }
    }
    return f;
}

inline ForestModel fit_random_forest_regressor(const Matrix& X, const std::vector<double>& y,
                                               const EnsembleParams& params) {
    if (X.rows() == 0) fail(Errc::empty_data, "fit_random_forest_regressor");
    ForestModel f;
    f.params = params;
    f.is_classifier = false;
    for (std::size_t t = 0; t < params.num_estimators; ++t) {
        std::uint64_t member_seed = mix64(params.base.random_state, t);
        TreeParams tp = params.base;
        tp.random_state = mix64(member_seed, 1);
        if (params.bootstrap) {
            Rng rng(member_seed);
            auto idx = tree_detail::bootstrap_indices(X.rows(), rng);
            std::vector<double> yb(idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i) yb[i] = y[idx[i]];
            f.trees.push_back(fit_regression_tree(tree_detail::rows_subset(X, idx), yb, tp));
        } else {
            f.trees.push_back(fit_regression_tree(X, y, tp));
        }
    }
    return f;
}

inline std::vector<double> predict_proba(const ForestModel& f, const Matrix& X) {
    std::vector<double> acc(X.rows(), 0.0);
    for (const auto& t : f.trees) {
        auto p = predict_proba(t, X);
        for (std::size_t i = 0; i < p.size(); ++i) acc[i] += p[i];
    }
    for (auto& v : acc) v /= static_cast<double>(f.trees.size());
    return acc;
}

/// Majority of member tree votes; ties go to class 0.
inline std::vector<int> predict_labels(const ForestModel& f, const Matrix& X) {
    std::vector<std::size_t> votes(X.rows(), 0);
    for (const auto& t : f.trees) {
        auto labels = predict_labels(t, X);
        for (std::size_t i = 0; i < labels.size(); ++i) votes[i] += labels[i];
    }
    std::vector<int> out(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i)
        out[i] = 2 * votes[i] > f.trees.size() ? 1 : 0;
    return out;
}

inline std::vector<double> predict_values(const ForestModel& f, const Matrix& X) {
    std::vector<double> acc(X.rows(), 0.0);
    for (const auto& t : f.trees) {
        auto v = predict_values(t, X);
        for (std::size_t i = 0; i < v.size(); ++i) acc[i] += v[i];
    }
    for (auto& v : acc) v /= static_cast<double>(f.trees.size());
    return acc;
}

// ---- AdaBoost (discrete, depth-1 stumps) ----

struct AdaBoostModel {
    EnsembleParams params;
    std::vector<TreeModel> stumps;
    std::vector<double> alphas;
};

struct AdaBoostTrace {
    std::vector<double> errors;                // weighted error per recorded round
    std::vector<double> alphas;                // stage weight per recorded round
    std::vector<std::vector<double>> weights;  // sample weights after each update
};

inline AdaBoostModel fit_adaboost(const Matrix& X, const std::vector<int>& y,
                                  const EnsembleParams& params,
                                  AdaBoostTrace* trace = nullptr) {
    if (y.size() != X.rows()) fail(Errc::length_mismatch, "fit_adaboost");
    bool has0 = false, has1 = false;
    for (int v : y) (v == 1 ? has1 : has0) = true;
    if (!has0 || !has1) fail(Errc::single_class, "AdaBoost needs both classes");

    std::size_t n = X.rows();
    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    AdaBoostModel model;
    model.params = params;
    TreeParams stump_params = params.base;
    stump_params.max_depth = 1;

    for (std::size_t round = 0; round < params.num_estimators; ++round) {
        stump_params.random_state = mix64(params.base.random_state, round);
        TreeModel stump = fit_classification_tree(X, y, stump_params, &w);
        auto pred = predict_labels(stump, X);
        double eps = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (pred[i] != y[i]) eps += w[i];

        if (eps >= 0.5) {
            if (eps == 0.5) { // alpha would be exactly 0; record and halt
                model.stumps.push_back(std::move(stump));
                model.alphas.push_back(0.0);
                if (trace) {
                    trace->errors.push_back(eps);
                    trace->alphas.push_back(0.0);
                    trace->weights.push_back(w);
                }
            }
            break;
        }
        double eps_clamped = std::max(eps, 1e-12);
        double alpha = params.learning_rate * std::log((1.0 - eps_clamped) / eps_clamped);
        model.stumps.push_back(std::move(stump));
        model.alphas.push_back(alpha);
        if (eps == 0.0) {
            if (trace) {
                trace->errors.push_back(eps);
                trace->alphas.push_back(alpha);
                trace->weights.push_back(w);
            }
            break; // perfect stump recorded
        }
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (pred[i] != y[i]) w[i] *= std::exp(alpha);
            total += w[i];
        }
        for (auto& wi : w) wi /= total;
        if (trace) {
            trace->errors.push_back(eps);
            trace->alphas.push_back(alpha);
            trace->weights.push_back(w);
        }
    }
    return model;
}

inline std::vector<double> decision_function(const AdaBoostModel& m, const Matrix& X) {
    std::vector<double> f(X.rows(), 0.0);
    for (std::size_t t = 0; t < m.stumps.size(); ++t) {
        auto labels = predict_labels(m.stumps[t], X);
        for (std::size_t i = 0; i < labels.size(); ++i)
            f[i] += m.alphas[t] * (labels[i] == 1 ? 1.0 : -1.0);
    }
    return f;
}

inline std::vector<int> predict_labels(const AdaBoostModel& m, const Matrix& X) {
    auto f = decision_function(m, X);
    std::vector<int> out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] > 0 ? 1 : 0;
    return out;
}

inline std::vector<double> predict_proba(const AdaBoostModel& m, const Matrix& X) {
    double alpha_sum = 0;
    for (double a : m.alphas) alpha_sum += a;
    std::vector<double> out(X.rows(), 0.5);
    if (alpha_sum <= 0) return out;
    std::vector<double> pos(X.rows(), 0.0);
    for (std::size_t t = 0; t < m.stumps.size(); ++t) {
        auto labels = predict_labels(m.stumps[t], X);
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == 1) pos[i] += m.alphas[t];
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = pos[i] / alpha_sum;
    return out;
}

// ---- gradient boosting ----

struct GradientBoostingModel {
    EnsembleParams params;
    bool is_classifier = true;
    double f0 = 0.0;
    std::vector<TreeModel> trees;
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Raw additive score after the first `stages` trees (all if stages > size).
inline std::vector<double> decision_function(const GradientBoostingModel& m, const Matrix& X,
                                             std::size_t stages = SIZE_MAX) {
    std::vector<double> f(X.rows(), m.f0);
    std::size_t limit = std::min(stages, m.trees.size());
    for (std::size_t t = 0; t < limit; ++t) {
        auto v = predict_values(m.trees[t], X);
        for (std::size_t i = 0; i < v.size(); ++i) f[i] += m.params.learning_rate * v[i];
    }
    return f;
}

inline GradientBoostingModel fit_gradient_boosting_classifier(const Matrix& X,
                                                              const std::vector<int>& y,
                                                              const EnsembleParams& params) {
    if (y.size() != X.rows()) fail(Errc::length_mismatch, "fit_gradient_boosting");
    bool has0 = false, has1 = false;
    for (int v : y) (v == 1 ? has1 : has0) = true;
    if (!has0 || !has1) fail(Errc::single_class, "gradient boosting needs both classes");

    GradientBoostingModel m;
    m.params = params;
    m.is_classifier = true;
    double p = 0;
    for (int v : y) p += v;
    p /= static_cast<double>(y.size());
    m.f0 = std::log(p / (1.0 - p));

    TreeParams tp = params.base;
    if (is_classification_criterion(tp.criterion)) tp.criterion = SplitCriterion::friedman_mse;
    std::vector<double> f(X.rows(), m.f0);
    for (std::size_t stage = 0; stage < params.num_estimators; ++stage) {
        tp.random_state = mix64(params.base.random_state, stage);
        std::vector<double> residual(X.rows());
        for (std::size_t i = 0; i < X.rows(); ++i)
            residual[i] = static_cast<double>(y[i]) - sigmoid(f[i]);
        TreeModel tree = fit_regression_tree(X, residual, tp);
        auto upd = predict_values(tree, X);
        for (std::size_t i = 0; i < X.rows(); ++i) f[i] += params.learning_rate * upd[i];
        m.trees.push_back(std::move(tree));
    }
    return m;
}

inline GradientBoostingModel fit_gradient_boosting_regressor(const Matrix& X,
                                                             const std::vector<double>& y,
                                                             const EnsembleParams& params) {
    if (y.size() != X.rows()) fail(Errc::length_mismatch, "fit_gradient_boosting");
    GradientBoostingModel m;
    m.params = params;
    m.is_classifier = false;
    m.f0 = mean_of(y);
    TreeParams tp = params.base;
    if (is_classification_criterion(tp.criterion)) tp.criterion = SplitCriterion::friedman_mse;
    std::vector<double> f(X.rows(), m.f0);
    for (std::size_t stage = 0; stage < params.num_estimators; ++stage) {
        tp.random_state = mix64(params.base.random_state, stage);
        std::vector<double> residual(X.rows());
        for (std::size_t i = 0; i < X.rows(); ++i) residual[i] = y[i] - f[i];
        TreeModel tree = fit_regression_tree(X, residual, tp);
        auto upd = predict_values(tree, X);
        for (std::size_t i = 0; i < X.rows(); ++i) f[i] += params.learning_rate * upd[i];
        m.trees.push_back(std::move(tree));
    }
    return m;
}

inline std::vector<double> predict_proba(const GradientBoostingModel& m, const Matrix& X) {
    auto f = decision_function(m, X);
    for (auto& v : f) v = sigmoid(v);
    return f;
}

inline std::vector<int> predict_labels(const GradientBoostingModel& m, const Matrix& X) {
    auto f = decision_function(m, X);
    std::vector<int> out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] > 0 ? 1 : 0;
    return out;
}

inline std::vector<double> predict_values(const GradientBoostingModel& m, const Matrix& X) {
    return decision_function(m, X);
}

// ---- feature importances (mean decrease in impurity) ----

struct ImportanceVector {
    std::vector<double> values;
    bool undefined = false; // no split anywhere: all-zero with flag
};

inline ImportanceVector feature_importances(const TreeModel& m) {
    ImportanceVector out;
    out.values = m.importance_raw;
    double s = std::accumulate(out.values.begin(), out.values.end(), 0.0);
    if (s <= 0) {
        out.undefined = true;
        std::fill(out.values.begin(), out.values.end(), 0.0);
        return out;
    }
    for (auto& v : out.values) v /= s;
    return out;
}

namespace tree_detail {

inline ImportanceVector average_importances(const std::vector<TreeModel>& members) {
    ImportanceVector out;
    if (members.empty()) {
        out.undefined = true;
        return out;
    }
    out.values.assign(members.front().n_features, 0.0);
    std::size_t informative = 0;
    for (const auto& t : members) {
        auto imp = feature_importances(t);
        if (imp.undefined) continue;
        ++informative;
        for (std::size_t j = 0; j < out.values.size(); ++j) out.values[j] += imp.values[j];
    }
    double s = std::accumulate(out.values.begin(), out.values.end(), 0.0);
    if (informative == 0 || s <= 0) {
        out.undefined = true;
        std::fill(out.values.begin(), out.values.end(), 0.0);
        return out;
    }
    for (auto& v : out.values) v /= s;
    return out;
}

} // namespace tree_detail

inline ImportanceVector feature_importances(const ForestModel& m) {
    return tree_detail::average_importances(m.trees);
}

inline ImportanceVector feature_importances(const AdaBoostModel& m) {
    return tree_detail::average_importances(m.stumps);
}

inline ImportanceVector feature_importances(const GradientBoostingModel& m) {
    return tree_detail::average_importances(m.trees);
}

// ---- serialization (shared JSON envelope) ----

inline nlohmann::json to_json(const TreeModel& m) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : m.nodes)
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"p1", n.p1},
                         {"value", n.value},
                         {"n_samples", n.n_samples}});
    return {{"format_version", kModelFormatVersion},
            {"model_type", m.is_classifier ? "decision_tree_classifier" : "decision_tree_regressor"},
            {"params", m.params.to_json()},
            {"payload",
             {{"n_features", m.n_features}, {"nodes", nodes}, {"importance_raw", m.importance_raw}}}};
}

inline TreeModel tree_from_json(const nlohmann::json& j) {
    TreeModel m;
    m.params = TreeParams::from_json(j.at("params"));
    m.is_classifier = j.at("model_type").get<std::string>() == "decision_tree_classifier";
    const auto& payload = j.at("payload");
    m.n_features = payload.at("n_features").get<std::size_t>();
    m.importance_raw = payload.at("importance_raw").get<std::vector<double>>();
    for (const auto& nj : payload.at("nodes")) {
        TreeNode n;
        n.feature = nj.at("feature").get<int>();
        n.threshold = nj.at("threshold").get<double>();
        n.left = nj.at("left").get<int>();
        n.right = nj.at("right").get<int>();
        n.p1 = nj.at("p1").get<double>();
        n.value = nj.at("value").get<double>();
        n.n_samples = nj.at("n_samples").get<std::size_t>();
        m.nodes.push_back(n);
    }
    return m;
}

inline nlohmann::json to_json(const ForestModel& m) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : m.trees) trees.push_back(to_json(t));
    return {{"format_version", kModelFormatVersion},
            {"model_type", m.is_classifier ? "random_forest_classifier" : "random_forest_regressor"},
            {"params", m.params.to_json()},
            {"payload", {{"trees", trees}}}};
}

inline ForestModel forest_from_json(const nlohmann::json& j) {
    ForestModel m;
    m.params = EnsembleParams::from_json(j.at("params"));
    m.is_classifier = j.at("model_type").get<std::string>() == "random_forest_classifier";
    for (const auto& tj : j.at("payload").at("trees")) m.trees.push_back(tree_from_json(tj));
    return m;
}

inline nlohmann::json to_json(const AdaBoostModel& m) {
    nlohmann::json stumps = nlohmann::json::array();
    for (const auto& t : m.stumps) stumps.push_back(to_json(t));
    return {{"format_version", kModelFormatVersion},
            {"model_type", "adaboost_classifier"},
            {"params", m.params.to_json()},
            {"payload", {{"stumps", stumps}, {"alphas", m.alphas}}}};
}

inline AdaBoostModel adaboost_from_json(const nlohmann::json& j) {
    AdaBoostModel m;
    m.params = EnsembleParams::from_json(j.at("params"));
    for (const auto& tj : j.at("payload").at("stumps")) m.stumps.push_back(tree_from_json(tj));
    m.alphas = j.at("payload").at("alphas").get<std::vector<double>>();
    return m;
}

inline nlohmann::json to_json(const GradientBoostingModel& m) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : m.trees) trees.push_back(to_json(t));
    return {{"format_version", kModelFormatVersion},
            {"model_type",
             m.is_classifier ? "gradient_boosting_classifier" : "gradient_boosting_regressor"},
            {"params", m.params.to_json()},
            {"payload", {{"f0", m.f0}, {"trees", trees}}}};
}

inline GradientBoostingModel gradient_boosting_from_json(const nlohmann::json& j) {
    GradientBoostingModel m;
    m.params = EnsembleParams::from_json(j.at("params"));
    m.is_classifier = j.at("model_type").get<std::string>() == "gradient_boosting_classifier";
    m.f0 = j.at("payload").at("f0").get<double>();
    for (const auto& tj : j.at("payload").at("trees")) m.trees.push_back(tree_from_json(tj));
    return m;
}

} // namespace altcite
