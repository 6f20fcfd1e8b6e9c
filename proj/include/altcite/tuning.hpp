#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "altcite/common.hpp"
#include "altcite/preprocess.hpp"

namespace altcite {

struct CVResult {
    std::vector<double> fold_values;
    double mean = 0.0;
    double std = 0.0; // population std over folds
    nlohmann::json params;
    std::uint64_t seed = 0;
    std::string metric;
};

/// Fit on the training indices (any learned preprocessing must happen inside)
/// and return the metric value, higher-is-better, on the held-out indices.
using FoldEvaluator =
    std::function<double(const std::vector<std::size_t>& train_idx,
                         const std::vector<std::size_t>& test_idx)>;

inline CVResult cross_validate(const FoldEvaluator& evaluate, const SplitPlan& plan,
                               const std::string& metric) {
    if (plan.kind != SplitPlan::Kind::kfold) fail(Errc::bad_argument, "cross_validate needs kfold");
    CVResult result;
    result.seed = plan.seed;
    result.metric = metric;
    for (std::size_t f = 0; f < plan.folds.size(); ++f) {
        std::vector<std::size_t> train;
        for (std::size_t g = 0; g < plan.folds.size(); ++g)
            if (g != f) train.insert(train.end(), plan.folds[g].begin(), plan.folds[g].end());
        try {
            result.fold_values.push_back(evaluate(train, plan.folds[f]));
        } catch (const Error& e) {
            fail(e.code(), "fold " + std::to_string(f) + ": " + e.what());
        }
    }
    result.mean = mean_of(result.fold_values);
    result.std = population_std(result.fold_values);
    return result;
}

inline CVResult cross_validate(const FoldEvaluator& evaluate, std::size_t n, std::size_t k,
                               std::uint64_t seed, const std::string& metric) {
    return cross_validate(evaluate, kfold(n, k, seed), metric);
}

// ---- search spaces ----

struct ParamRange {
    double low = 0, high = 1;
    bool log_scale = false;
    bool integer = false;
};

struct SearchSpace {
    std::map<std::string, std::vector<nlohmann::json>> grid; // explicit value lists
    std::map<std::string, ParamRange> ranges;                // for randomized search

    nlohmann::json to_json() const {
        nlohmann::json j;
        for (const auto& [name, values] : grid) j["grid"][name] = values;
        for (const auto& [name, r] : ranges)
            j["ranges"][name] = {{"low", r.low},
                                 {"high", r.high},
                                 {"log_scale", r.log_scale},
                                 {"integer", r.integer}};
        return j;
    }
    static SearchSpace from_json(const nlohmann::json& j) {
        SearchSpace s;
        if (j.contains("grid"))
            for (const auto& [name, values] : j.at("grid").items())
                s.grid[name] = values.get<std::vector<nlohmann::json>>();
        if (j.contains("ranges"))
            for (const auto& [name, r] : j.at("ranges").items())
                s.ranges[name] = {r.at("low").get<double>(), r.at("high").get<double>(),
                                  r.value("log_scale", false), r.value("integer", false)};
        return s;
    }
};

/// Per-candidate evaluator; params are the candidate's resolved values.
using CandidateEvaluator =
    std::function<double(const nlohmann::json& params, const std::vector<std::size_t>& train_idx,
                         const std::vector<std::size_t>& test_idx)>;

struct SearchResult {
    nlohmann::json best_params;
    CVResult best;
    std::vector<CVResult> all;
};

namespace tuning_detail {

inline std::string canonical(const nlohmann::json& params) { return params.dump(); }

inline SearchResult evaluate_candidates(const std::vector<nlohmann::json>& candidates,
                                        const CandidateEvaluator& evaluate, std::size_t n,
                                        std::size_t k, std::uint64_t cv_seed,
                                        const std::string& metric) {
    // one fold plan shared by every candidate
    auto plan = kfold(n, k, cv_seed);
    SearchResult out;
    bool have_best = false;
    for (const auto& params : candidates) {
        FoldEvaluator fold_eval = [&](const std::vector<std::size_t>& tr,
                                      const std::vector<std::size_t>& te) {
            return evaluate(params, tr, te);
        };
        CVResult r = cross_validate(fold_eval, plan, metric);
        r.params = params;
        bool better = !have_best || r.mean > out.best.mean ||
                      (r.mean == out.best.mean &&
                       canonical(params) < canonical(out.best.params));
        if (better) {
            out.best = r;
            out.best_params = params;
            have_best = true;
        }
        out.all.push_back(std::move(r));
    }
    return out;
}

} // namespace tuning_detail

inline SearchResult grid_search(const SearchSpace& space, const CandidateEvaluator& evaluate,
                                std::size_t n, std::size_t k, std::uint64_t cv_seed,
                                const std::string& metric) {
    if (space.grid.empty()) fail(Errc::empty_grid, "grid_search needs at least one parameter list");
    for (const auto& [name, values] : space.grid)
        if (values.empty()) fail(Errc::empty_grid, "empty value list for '" + name + "'");

    std::vector<nlohmann::json> candidates;
    std::set<std::string> seen;
    std::vector<std::size_t> odo(space.grid.size(), 0);
    std::vector<const std::pair<const std::string, std::vector<nlohmann::json>>*> axes;
    for (const auto& kv : space.grid) axes.push_back(&kv);
    while (true) {
        nlohmann::json params = nlohmann::json::object();
        for (std::size_t a = 0; a < axes.size(); ++a) params[axes[a]->first] = axes[a]->second[odo[a]];
        if (seen.insert(tuning_detail::canonical(params)).second)
            candidates.push_back(std::move(params));
        std::size_t a = axes.size();
        while (a-- > 0) {
            if (++odo[a] < axes[a]->second.size()) break;
            odo[a] = 0;
            if (a == 0) goto done;
        }
    }
done:
    return tuning_detail::evaluate_candidates(candidates, evaluate, n, k, cv_seed, metric);
}

inline SearchResult random_search(const SearchSpace& space, std::size_t n_iter,
                                  std::uint64_t search_seed, const CandidateEvaluator& evaluate,
                                  std::size_t n, std::size_t k, std::uint64_t cv_seed,
                                  const std::string& metric) {
    if (n_iter < 1) fail(Errc::bad_argument, "random_search needs n_iter >= 1");
    if (space.ranges.empty() && space.grid.empty())
        fail(Errc::empty_grid, "random_search needs ranges or grid lists");
    Rng rng(mix64(search_seed, 0x5ea4c4));
    std::vector<nlohmann::json> candidates;
    for (std::size_t it = 0; it < n_iter; ++it) {
        nlohmann::json params = nlohmann::json::object();
        for (const auto& [name, r] : space.ranges) {
            double u = rng.uniform();
            double v;
            if (r.log_scale) {
                if (r.low <= 0) fail(Errc::bad_argument, "log range needs low > 0: " + name);
                v = std::exp(std::log(r.low) + u * (std::log(r.high) - std::log(r.low)));
            } else {
                v = r.low + u * (r.high - r.low);
            }
            if (r.integer) {
                long long iv = static_cast<long long>(round_half_up(v));
                iv = std::max<long long>(iv, static_cast<long long>(std::ceil(r.low)));
                iv = std::min<long long>(iv, static_cast<long long>(std::floor(r.high)));
                params[name] = iv;
            } else {
                params[name] = v;
            }
        }
        for (const auto& [name, values] : space.grid)
            params[name] = values[rng.below(values.size())];
        candidates.push_back(std::move(params));
    }
    return tuning_detail::evaluate_candidates(candidates, evaluate, n, k, cv_seed, metric);
}

/// Search grids mirroring the tuned-parameter menu; every published tuned
/// value is representable.
inline SearchSpace default_tree_search_space(std::size_t p, bool regression) {
    SearchSpace s;
    s.grid["num_estimators"] = {2, 4, 8, 16, 32, 64, 100, 200};
    s.grid["min_samples_split"] = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    s.grid["min_samples_leaf"] = {0.1, 0.2, 0.3, 0.4, 0.5};
    s.grid["max_depth"] = {1, 2, 4, 8, 16, 24, 31, 32};
    std::vector<nlohmann::json> feats;
    for (std::size_t f = 1; f <= std::max<std::size_t>(p, 1); ++f)
        feats.push_back(f);
    s.grid["max_features"] = feats;
    if (regression)
        s.grid["criterion"] = {"mse", "mae", "friedman_mse"};
    else
        s.grid["criterion"] = {"gini", "entropy"};
    s.grid["learning_rate"] = {0.01, 0.05, 0.1, 0.5};
    return s;
}

inline std::string search_results_csv(const SearchResult& r) {
    std::string out = "candidate_id,params_json,fold,metric_value\n";
    for (std::size_t c = 0; c < r.all.size(); ++c) {
        const auto& cv = r.all[c];
        std::string params = cv.params.dump();
        for (auto& ch : params)
            if (ch == ',') ch = ';'; // keep the CSV single-delimiter
        for (std::size_t f = 0; f < cv.fold_values.size(); ++f)
            out += std::to_string(c) + "," + params + "," + std::to_string(f) + "," +
                   fmt_g(cv.fold_values[f]) + "\n";
    }
    std::string best = r.best_params.dump();
    for (auto& ch : best)
        if (ch == ',') ch = ';';
    out += "best," + best + ",," + fmt_g(r.best.mean) + "\n";
    return out;
}

} // namespace altcite
