#pragma once

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "altcite/common.hpp"
#include "altcite/dataset.hpp"
#include "altcite/preprocess.hpp"

namespace altcite {

/// Marginals as sorted value lists (empirical quantile functions), Spearman
/// targets for numeric pairs, and categorical level frequencies.
struct GeneratorProfile {
    struct NumericMarginal {
        std::string name;
        std::vector<double> quantiles; // ascending
    };
    struct CorrelationTarget {
        std::string a, b;
        double spearman = 0.0;
        bool degenerate = false; // zero-variance member: correlation defined as 0
    };
    struct CategoricalMarginal {
        std::string name;
        std::vector<std::pair<std::string, double>> frequencies; // level order preserved
    };

    std::vector<NumericMarginal> numeric;
    std::vector<CorrelationTarget> correlations;
    std::vector<CategoricalMarginal> categorical;

    const NumericMarginal& marginal(const std::string& name) const {
        for (const auto& m : numeric)
            if (m.name == name) return m;
        fail(Errc::unknown_feature, name);
    }

    bool has_numeric(const std::string& name) const {
        for (const auto& m : numeric)
            if (m.name == name) return true;
        return false;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["format_version"] = 1;
        for (const auto& m : numeric)
            j["numeric"].push_back({{"name", m.name}, {"quantiles", m.quantiles}});
        for (const auto& c : correlations)
            j["correlations"].push_back(
                {{"a", c.a}, {"b", c.b}, {"spearman", c.spearman}, {"degenerate", c.degenerate}});
        for (const auto& c : categorical) {
            nlohmann::json freqs = nlohmann::json::array();
            for (const auto& [level, f] : c.frequencies)
                freqs.push_back({{"level", level}, {"frequency", f}});
            j["categorical"].push_back({{"name", c.name}, {"frequencies", freqs}});
        }
        return j;
    }

    static GeneratorProfile from_json(const nlohmann::json& j) {
        GeneratorProfile p;
        for (const auto& m : j.at("numeric"))
            p.numeric.push_back({m.at("name").get<std::string>(),
                                 m.at("quantiles").get<std::vector<double>>()});
        if (j.contains("correlations"))
            for (const auto& c : j.at("correlations"))
                p.correlations.push_back({c.at("a").get<std::string>(), c.at("b").get<std::string>(),
                                          c.at("spearman").get<double>(),
                                          c.at("degenerate").get<bool>()});
        if (j.contains("categorical"))
            for (const auto& c : j.at("categorical")) {
                GeneratorProfile::CategoricalMarginal cm;
                cm.name = c.at("name").get<std::string>();
                for (const auto& f : c.at("frequencies"))
                    cm.frequencies.emplace_back(f.at("level").get<std::string>(),
                                                f.at("frequency").get<double>());
                p.categorical.push_back(std::move(cm));
            }
        return p;
    }
};

// ---- rank helpers ----

inline std::vector<double> average_ranks(const std::vector<double>& v) {
    std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return v[a] < v[b] || (v[a] == v[b] && a < b);
    });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        double avg = 0.5 * static_cast<double>(i + j) + 1.0; // 1-based average rank
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    return pearson(average_ranks(x), average_ranks(y));
}

// ---- profile fitting ----

inline constexpr std::size_t kMinProfileRecords = 30;

inline GeneratorProfile fit_profile(const Dataset& ds) {
    if (ds.size() < kMinProfileRecords)
        fail(Errc::too_few_records,
             "fit_profile requires at least " + std::to_string(kMinProfileRecords) + " records");
    GeneratorProfile p;
    auto cols = ds.numeric_columns();
    std::vector<std::vector<double>> values(cols.size());
    std::vector<bool> constant(cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        values[j] = ds.column(cols[j]);
        auto sorted = values[j];
        std::sort(sorted.begin(), sorted.end());
        constant[j] = sorted.front() == sorted.back();
        p.numeric.push_back({cols[j], std::move(sorted)});
    }
    for (std::size_t a = 0; a < cols.size(); ++a)
        for (std::size_t b = a + 1; b < cols.size(); ++b) {
            GeneratorProfile::CorrelationTarget t;
            t.a = cols[a];
            t.b = cols[b];
            if (constant[a] || constant[b]) {
                t.spearman = 0.0;
                t.degenerate = true;
            } else {
                t.spearman = spearman(values[a], values[b]);
            }
            p.correlations.push_back(std::move(t));
        }
    for (auto name : schema::kCategorical) {
        GeneratorProfile::CategoricalMarginal cm;
        cm.name = std::string(name);
        std::map<std::string, std::size_t> pos;
        for (const auto& r : ds.records) {
            const auto& level = categorical_field(r, cm.name);
            auto it = pos.find(level);
            if (it == pos.end()) {
                pos[level] = cm.frequencies.size();
                cm.frequencies.emplace_back(level, 0.0);
            }
            cm.frequencies[pos[level]].second += 1.0;
        }
        for (auto& [level, f] : cm.frequencies) f /= static_cast<double>(ds.size());
        p.categorical.push_back(std::move(cm));
    }
    return p;
}

// ---- generation ----

namespace gen_detail {

/// Spearman target mapped to the Gaussian-copula correlation.
inline double gauss_corr_from_spearman(double rho_s) {
    return 2.0 * std::sin(3.14159265358979323846 * rho_s / 6.0);
}

/// Cholesky factor with a deterministic shrink-to-identity fallback for
/// targets that are not positive definite.
inline Matrix cholesky_with_ridge(Matrix sigma) {
    std::size_t q = sigma.rows();
    double tau = 0.0;
    for (int attempt = 0; attempt < 60; ++attempt) {
        Matrix work = sigma;
        if (tau > 0.0)
            for (std::size_t i = 0; i < q; ++i)
                for (std::size_t j = 0; j < q; ++j)
                    work(i, j) = (sigma(i, j) + (i == j ? tau : 0.0)) / (1.0 + tau);
        Matrix L(q, q);
        bool ok = true;
        for (std::size_t i = 0; i < q && ok; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                double s = work(i, j);
                for (std::size_t k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
                if (i == j) {
                    if (s <= 1e-10) {
                        ok = false;
                        break;
                    }
                    L(i, j) = std::sqrt(s);
                } else {
                    L(i, j) = s / L(j, j);
                }
            }
        }
        if (ok) return L;
        tau = tau == 0.0 ? 1e-4 : tau * 2.0;
    }
    fail(Errc::bad_argument, "correlation targets do not admit a Gaussian copula");
}

inline double interp_quantile(const std::vector<double>& sorted, double u) {
    return quantile_sorted(sorted, u);
}

} // namespace gen_detail

/// Deterministic synthetic dataset. Correlated Gaussians are reduced to
/// per-feature ranks and the ranks mapped through each marginal's quantile
/// function, so marginal quartiles match the profile tightly while rank
/// correlations move toward the targets. Counts round half-up.
inline Dataset generate(const GeneratorProfile& profile, std::size_t n, std::uint64_t seed) {
    if (n < 1) fail(Errc::bad_argument, "generate requires n >= 1");
    std::size_t q = profile.numeric.size();
    if (q == 0) fail(Errc::bad_argument, "profile has no numeric marginals");

    std::map<std::string, std::size_t> index;
    for (std::size_t j = 0; j < q; ++j) index[profile.numeric[j].name] = j;
    Matrix sigma(q, q);
    for (std::size_t j = 0; j < q; ++j) sigma(j, j) = 1.0;
    for (const auto& c : profile.correlations) {
        if (c.degenerate) continue;
        auto a = index.find(c.a), b = index.find(c.b);
        if (a == index.end() || b == index.end()) continue;
        double r = gen_detail::gauss_corr_from_spearman(c.spearman);
        sigma(a->second, b->second) = r;
        sigma(b->second, a->second) = r;
    }
    Matrix L = gen_detail::cholesky_with_ridge(sigma);

    // per-record independent normals, correlated through L
    Matrix Z(n, q);
    std::vector<double> raw(q);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(mix64(seed, i));
        for (std::size_t j = 0; j < q; ++j) raw[j] = rng.normal();
        for (std::size_t j = 0; j < q; ++j) {
            double s = 0;
            for (std::size_t k = 0; k <= j; ++k) s += L(j, k) * raw[k];
            Z(i, j) = s;
        }
    }

    // ranks -> stratified marginal draws
    Matrix values(n, q);
    std::vector<std::size_t> order(n);
    for (std::size_t j = 0; j < q; ++j) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return Z(a, j) < Z(b, j) || (Z(a, j) == Z(b, j) && a < b);
        });
        const auto& quantiles = profile.numeric[j].quantiles;
        for (std::size_t r = 0; r < n; ++r) {
            double u = (static_cast<double>(r) + 0.5) / static_cast<double>(n);
            double v = gen_detail::interp_quantile(quantiles, u);
            values(order[r], j) = std::max(0.0, round_half_up(v));
        }
    }

    Dataset ds;
    ds.provenance.source = "synthetic";
    ds.provenance.note = "seed=" + std::to_string(seed);
    ds.records.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& rec = ds.records[i];
        rec.doi = "synth:" + std::to_string(i);
        for (std::size_t j = 0; j < q; ++j) {
            const auto& name = profile.numeric[j].name;
            long long v = static_cast<long long>(values(i, j));
            if (name == schema::kCitations2017)
                rec.citations_2017 = v;
            else if (name == schema::kCitations2020)
                rec.citations_2020 = v;
            else
                numeric_field(rec, name) = v;
        }
    }

    // categoricals: independent stratified draws by level frequency
    for (std::size_t c = 0; c < profile.categorical.size(); ++c) {
        const auto& cm = profile.categorical[c];
        if (cm.frequencies.empty()) continue;
        double total = 0;
        for (const auto& [level, f] : cm.frequencies) total += f;
        Rng rng(mix64(seed, 0xca7000 + c));
        auto perm = rng.permutation(n);
        for (std::size_t i = 0; i < n; ++i) {
            double u = (static_cast<double>(perm[i]) + 0.5) / static_cast<double>(n);
            double acc = 0;
            std::string chosen = cm.frequencies.back().first;
            for (const auto& [level, f] : cm.frequencies) {
                acc += f / total;
                if (u <= acc) {
                    chosen = level;
                    break;
                }
            }
            categorical_field(ds.records[i], cm.name) = chosen;
        }
    }
    return ds;
}

// ---- bundled reference profile ----

namespace gen_detail {

struct MarginalAnchors {
    std::string_view name;
    double mean, sd, min, q25, q50, q75, max;
};

// Calibration anchors for the bundled profile (means, quartiles and maxima of
// the reference corpus the toolkit is modeled on).
inline constexpr std::array<MarginalAnchors, 18> kReferenceMarginals = {{
    {"author_count", 2.08, 20.73, 0, 0, 0, 2, 2245},
    {"mendeley", 14.98, 37.89, 0, 0, 4, 14, 1042},
    {"citeulike", 0.14, 0.83, 0, 0, 0, 0, 32},
    {"news", 0.29, 2.85, 0, 0, 0, 0, 150},
    {"blogs", 0.15, 0.86, 0, 0, 0, 0, 51},
    {"reddit", 0.02, 0.21, 0, 0, 0, 0, 11},
    {"twitter", 4.58, 26.00, 0, 1, 1, 3, 1182},
    {"retweets", 2.22, 19.16, 0, 0, 0, 1, 920},
    {"twitter_mentions", 0.81, 3.68, 0, 0, 0, 1, 158},
    {"facebook", 0.46, 8.54, 0, 0, 0, 0, 893},
    {"googleplus", 0.07, 1.20, 0, 0, 0, 0, 65},
    {"peer_review", 0.01, 0.15, 0, 0, 0, 0, 13},
    {"wikipedia", 0.15, 0.48, 0, 0, 0, 0, 9},
    {"total_platforms", 9.03, 3.17, 0, 7, 7, 13, 16},
    {"countries", 2.48, 3.81, 0, 0, 1, 3, 107},
    {"max_followers", 8261.33, 60014.82, 0, 4, 509, 2505, 2406790},
    {"hashtags", 0.93, 2.98, 0, 0, 0, 1, 83},
    {"post_length", 123.33, 69.22, 0, 69.25, 130, 144, 276},
}};

/// Mean of (1+base)*exp(k*s^g) - 1 over s in [0,1], midpoint rule.
inline double tail_segment_mean(double base, double k, double g, std::size_t steps = 512) {
    double tot = 0;
    for (std::size_t i = 0; i < steps; ++i) {
        double s = (static_cast<double>(i) + 0.5) / static_cast<double>(steps);
        tot += (1.0 + base) * std::exp(k * std::pow(s, g)) - 1.0;
    }
    return tot / static_cast<double>(steps);
}

/// Shape exponent for the upper tail: the curve runs from q75 to max in
/// ln(1+x) space and the exponent is fit so the tail's average matches the
/// target segment mean.
inline double solve_tail_gamma(double q75, double max, double target) {
    if (max <= q75) return 1.0;
    double k = std::log((1.0 + max) / (1.0 + q75));
    target = std::clamp(target, q75, max);
    double lo = 1e-3, hi = 500.0;
    for (int it = 0; it < 100; ++it) {
        double mid = 0.5 * (lo + hi);
        if (tail_segment_mean(q75, k, mid) > target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

inline constexpr std::size_t kProfileResolution = 4096; // list length - 1

/// Quantile list: linear through the quartile anchors, shaped tail above q75.
inline std::vector<double> anchored_quantiles(const MarginalAnchors& a) {
    double lin = 0.25 * ((a.min + a.q25) / 2 + (a.q25 + a.q50) / 2 + (a.q50 + a.q75) / 2);
    double tail_target = (a.mean - lin) / 0.25;
    double g = solve_tail_gamma(a.q75, a.max, tail_target);
    double k = a.max > a.q75 ? std::log((1.0 + a.max) / (1.0 + a.q75)) : 0.0;
    std::vector<double> out(kProfileResolution + 1);
    for (std::size_t i = 0; i <= kProfileResolution; ++i) {
        double p = static_cast<double>(i) / static_cast<double>(kProfileResolution);
        double v;
        if (p <= 0.25)
            v = a.min + (a.q25 - a.min) * (p / 0.25);
        else if (p <= 0.5)
            v = a.q25 + (a.q50 - a.q25) * ((p - 0.25) / 0.25);
        else if (p <= 0.75)
            v = a.q50 + (a.q75 - a.q50) * ((p - 0.5) / 0.25);
        else if (k == 0.0)
            v = a.q75;
        else
            v = (1.0 + a.q75) * std::exp(k * std::pow((p - 0.75) / 0.25, g)) - 1.0;
        out[i] = v;
    }
    return out;
}

struct CitationCurve {
    double zero_fraction;  // share of articles with no citations
    double rise_to;        // median count
    double flat_until;     // cumulative share at or below the median
    double max;
    double tail_mean;      // target mean of the above-median segment
};

inline std::vector<double> citation_quantiles(const CitationCurve& c) {
    double g = solve_tail_gamma(c.rise_to, c.max, c.tail_mean);
    double k = std::log((1.0 + c.max) / (1.0 + c.rise_to));
    std::vector<double> out(kProfileResolution + 1);
    for (std::size_t i = 0; i <= kProfileResolution; ++i) {
        double p = static_cast<double>(i) / static_cast<double>(kProfileResolution);
        double v;
        if (p < c.zero_fraction) {
            v = 0.0;
        } else if (p < 0.5) {
            double s = (p - c.zero_fraction) / (0.5 - c.zero_fraction);
            v = std::exp(std::log(2.0) + s * (std::log(1.0 + c.rise_to) - std::log(2.0))) - 1.0;
        } else if (p <= c.flat_until) {
            v = c.rise_to;
        } else {
            double s = (p - c.flat_until) / (1.0 - c.flat_until);
            v = (1.0 + c.rise_to) * std::exp(k * std::pow(s, g)) - 1.0;
        }
        out[i] = v;
    }
    return out;
}

} // namespace gen_detail

/// Profile calibrated to the reference corpus statistics: 18 count marginals,
/// citation marginals at both horizons (2017 split 9779/2595 around zero,
/// median 8; 2020 higher and weakly coupled to the counts), and rank targets
/// that give the twitter/retweets pair its dominant correlation.
inline const GeneratorProfile& paper_default_profile() {
    static const GeneratorProfile profile = [] {
        GeneratorProfile p;
        for (const auto& a : gen_detail::kReferenceMarginals)
            p.numeric.push_back({std::string(a.name), gen_detail::anchored_quantiles(a)});

        gen_detail::CitationCurve c17{2595.0 / 12374.0, 8.0, 6520.0 / 12374.0, 3000.0, 48.0};
        gen_detail::CitationCurve c20{0.05, 22.0, 0.52, 6000.0, 90.0};
        p.numeric.push_back({std::string(schema::kCitations2017), gen_detail::citation_quantiles(c17)});
        p.numeric.push_back({std::string(schema::kCitations2020), gen_detail::citation_quantiles(c20)});

        auto add = [&p](const char* a, const char* b, double rho) {
            p.correlations.push_back({a, b, rho, false});
        };
        add("twitter", "retweets", 0.99);
        add("retweets", "twitter_mentions", 0.52);
        add("retweets", "hashtags", 0.42);
        add("retweets", "max_followers", 0.35);
        add("retweets", "countries", 0.40);
        add("twitter", "twitter_mentions", 0.42);
        add("twitter", "hashtags", 0.32);
        add("twitter", "max_followers", 0.25);
        add("twitter", "countries", 0.32);
        add("mendeley", "citeulike", 0.25);
        add("mendeley", "countries", 0.20);
        add("news", "blogs", 0.30);
        add("total_platforms", "countries", 0.45);
        add("citations_2017", "mendeley", 0.55);
        add("citations_2017", "wikipedia", 0.20);
        add("citations_2017", "max_followers", 0.30);
        add("citations_2017", "twitter", 0.25);
        add("citations_2017", "retweets", 0.25);
        add("citations_2017", "countries", 0.25);
        add("citations_2017", "news", 0.15);
        add("citations_2017", "citations_2020", 0.35);
        add("citations_2020", "mendeley", 0.15);
        add("citations_2020", "max_followers", 0.08);
        add("citations_2020", "twitter", 0.05);

        p.categorical.push_back({"academic_status",
                                 {{"student", 0.42},
                                  {"researcher", 0.22},
                                  {"professor", 0.14},
                                  {"postdoc", 0.12},
                                  {"librarian", 0.06},
                                  {"other", 0.04}}});
        p.categorical.push_back({"profession_twitter",
                                 {{"unknown", 0.55},
                                  {"practitioner", 0.20},
                                  {"science_communicator", 0.15},
                                  {"researcher", 0.10}}});
        p.categorical.push_back({"platform_max_mentions",
                                 {{"twitter", 0.62},
                                  {"facebook", 0.12},
                                  {"mendeley", 0.10},
                                  {"news", 0.06},
                                  {"blogs", 0.04},
                                  {"reddit", 0.03},
                                  {"googleplus", 0.02},
                                  {"wikipedia", 0.01}}});
        return p;
    }();
    return profile;
}

} // namespace altcite
