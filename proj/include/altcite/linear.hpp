#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "altcite/common.hpp"
#include "altcite/dataset.hpp"
#include "altcite/preprocess.hpp"

namespace altcite {

struct OLSModel {
    std::vector<double> beta;
    std::vector<double> standard_errors;
    std::vector<double> t_values;
    double sigma2 = 0.0; // residual variance SSres/(n-p)
    std::size_t n = 0, p = 0;
    std::vector<std::string> names;
};

namespace ols_detail {

/// In-place Householder QR of A (n x p, n >= p): returns R in the upper
/// triangle and overwrites y with Q^T y.
inline void householder_qr(Matrix& A, std::vector<double>& y) {
    std::size_t n = A.rows(), p = A.cols();
    for (std::size_t k = 0; k < p; ++k) {
        double norm = 0;
        for (std::size_t i = k; i < n; ++i) norm += A(i, k) * A(i, k);
        norm = std::sqrt(norm);
        if (norm == 0.0) continue;
        double alpha = A(k, k) > 0 ? -norm : norm;
        std::vector<double> v(n - k);
        v[0] = A(k, k) - alpha;
        for (std::size_t i = k + 1; i < n; ++i) v[i - k] = A(i, k);
        double vv = 0;
        for (double x : v) vv += x * x;
        A(k, k) = alpha;
        for (std::size_t i = k + 1; i < n; ++i) A(i, k) = 0.0;
        if (vv == 0.0) continue;
        for (std::size_t j = k + 1; j < p; ++j) {
            double dot = 0;
            for (std::size_t i = k; i < n; ++i) dot += v[i - k] * A(i, j);
            double f = 2.0 * dot / vv;
            for (std::size_t i = k; i < n; ++i) A(i, j) -= f * v[i - k];
        }
        double dot = 0;
        for (std::size_t i = k; i < n; ++i) dot += v[i - k] * y[i];
        double f = 2.0 * dot / vv;
        for (std::size_t i = k; i < n; ++i) y[i] -= f * v[i - k];
    }
}

} // namespace ols_detail

/// Least squares through an orthogonal factorization; X must already carry an
/// intercept column if one is wanted. Standard errors from the R factor.
inline OLSModel fit_ols(const Matrix& X, const std::vector<double>& y,
                        std::vector<std::string> names = {}) {
    std::size_t n = X.rows(), p = X.cols();
    if (y.size() != n) fail(Errc::length_mismatch, "fit_ols");
    if (n <= p) fail(Errc::too_few_rows, "fit_ols requires n > p");
    if (names.empty())
        for (std::size_t j = 0; j < p; ++j) names.push_back("x" + std::to_string(j));

    Matrix R = X;
    std::vector<double> qty = y;
    ols_detail::householder_qr(R, qty);

    double rmax = 0;
    for (std::size_t j = 0; j < p; ++j) rmax = std::max(rmax, std::fabs(R(j, j)));
    double tol = static_cast<double>(n) * 1e-12 * (rmax > 0 ? rmax : 1.0);
    for (std::size_t j = 0; j < p; ++j)
        if (std::fabs(R(j, j)) <= tol)
            fail(Errc::rank_deficient, "column '" + names[j] + "' is linearly dependent");

    OLSModel m;
    m.n = n;
    m.p = p;
    m.names = std::move(names);
    m.beta.assign(p, 0.0);
    for (std::size_t j = p; j-- > 0;) {
        double s = qty[j];
        for (std::size_t k = j + 1; k < p; ++k) s -= R(j, k) * m.beta[k];
        m.beta[j] = s / R(j, j);
    }

    double ss_res = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double pred = 0;
        for (std::size_t j = 0; j < p; ++j) pred += X(i, j) * m.beta[j];
        ss_res += (y[i] - pred) * (y[i] - pred);
    }
    m.sigma2 = ss_res / static_cast<double>(n - p);

    // (X^T X)^-1 = R^-1 R^-T; diagonal entries are squared row norms of R^-1
    Matrix rinv(p, p);
    for (std::size_t j = 0; j < p; ++j) {
        rinv(j, j) = 1.0 / R(j, j);
        for (std::size_t i = j; i-- > 0;) {
            double s = 0;
            for (std::size_t k = i + 1; k <= j; ++k) s += R(i, k) * rinv(k, j);
            rinv(i, j) = -s / R(i, i);
        }
    }
    m.standard_errors.assign(p, 0.0);
    m.t_values.assign(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        double d = 0;
        for (std::size_t k = j; k < p; ++k) d += rinv(j, k) * rinv(j, k);
        m.standard_errors[j] = std::sqrt(m.sigma2 * d);
        m.t_values[j] = m.standard_errors[j] > 0 ? m.beta[j] / m.standard_errors[j] : 0.0;
    }
    return m;
}

inline std::vector<double> predict_ols(const OLSModel& m, const Matrix& X) {
    if (X.cols() != m.p) fail(Errc::feature_count_mismatch, "predict_ols");
    std::vector<double> out(X.rows(), 0.0);
    for (std::size_t i = 0; i < X.rows(); ++i)
        for (std::size_t j = 0; j < m.p; ++j) out[i] += X(i, j) * m.beta[j];
    return out;
}

// ---- bundled reference regression models (2017 and 2020 horizons) ----

struct PaperCoefRow {
    const char* term;
    const char* coefficient; // printed strings keep the published precision
    const char* std_error;
    const char* t_value;
};

inline constexpr std::array<PaperCoefRow, 21> kPaperModel2017 = {{
    {"constant", "1.2798", "0.109", "11.744"},
    {"mendeley", "0.6241", "0.017", "37.676"},
    {"citeulike", "0.2416", "0.051", "4.760"},
    {"news", "0.1149", "0.041", "2.809"},
    {"blogs", "0.1542", "0.054", "2.834"},
    {"reddit", "-0.0374", "0.147", "-0.255"},
    {"twitter", "-0.2385", "0.033", "-7.215"},
    {"facebook", "-0.0801", "0.038", "-2.102"},
    {"googleplus", "-0.0150", "0.078", "-0.193"},
    {"peer_review", "0.1498", "0.224", "0.667"},
    {"wikipedia", "0.9265", "0.055", "16.848"},
    {"total_platforms", "-0.0243", "0.018", "-1.377"},
    {"platform_max_mentions", "0.0304", "0.006", "5.458"},
    {"countries", "0.1332", "0.029", "4.644"},
    {"max_followers", "-0.0455", "0.006", "-7.226"},
    {"profession_twitter", "-0.0077", "0.016", "-0.488"},
    {"academic_status", "0.0022", "0.002", "1.055"},
    {"post_length", "0.0006", "0.000", "2.958"},
    {"hashtags", "-0.0655", "0.026", "-2.489"},
    {"twitter_mentions", "0.2296", "0.032", "7.158"},
    {"author_count", "-0.0267", "0.014", "-1.841"},
}};

inline constexpr std::array<PaperCoefRow, 21> kPaperModel2020 = {{
    {"constant", "2.8236", "0.101", "28.093"},
    {"mendeley", "0.0003", "0.015", "0.018"},
    {"citeulike", "0.0062", "0.047", "0.133"},
    {"news", "-0.0491", "0.038", "-1.302"},
    {"blogs", "0.0316", "0.050", "0.629"},
    {"reddit", "-0.0456", "0.136", "-0.336"},
    {"twitter", "0.0047", "0.030", "0.153"},
    {"facebook", "-0.0473", "0.035", "-1.347"},
    {"googleplus", "0.0113", "0.072", "0.158"},
    {"peer_review", "-0.2774", "0.207", "-1.340"},
    {"wikipedia", "-0.1088", "0.051", "-2.145"},
    {"total_platforms", "0.0132", "0.016", "0.811"},
    {"platform_max_mentions", "0.0058", "0.005", "1.130"},
    {"countries", "-0.0042", "0.026", "-0.158"},
    {"max_followers", "-0.0056", "0.006", "-0.956"},
    {"profession_twitter", "-0.0040", "0.015", "-0.275"},
    {"academic_status", "-0.0002", "0.002", "-0.106"},
    {"post_length", "0.0002", "0.000", "1.351"},
    {"hashtags", "0.0061", "0.024", "0.251"},
    {"twitter_mentions", "-0.0222", "0.030", "-0.748"},
    {"author_count", "0.0110", "0.013", "0.825"},
}};

/// Predictors that enter the reference model as ln(1+x).
inline constexpr std::array<std::string_view, 15> kLogTransformedPredictors = {
    "mendeley",  "wikipedia", "twitter",   "max_followers", "countries",
    "facebook",  "twitter_mentions", "citeulike", "hashtags", "blogs",
    "googleplus", "news",     "reddit",    "peer_review",   "author_count",
};

inline bool is_log_transformed_predictor(std::string_view name) {
    for (auto f : kLogTransformedPredictors)
        if (f == name) return true;
    return false;
}

struct PaperCoefficients {
    int year = 2017;
    struct Row {
        std::string term;
        double coefficient = 0, std_error = 0, t_value = 0;
        std::string coefficient_str, std_error_str, t_value_str;
    };
    std::vector<Row> rows;

    double coefficient(const std::string& term) const {
        for (const auto& r : rows)
            if (r.term == term) return r.coefficient;
        fail(Errc::unknown_feature, term);
    }
};

inline const PaperCoefficients& paper_coefficients(int year) {
    static const auto build = [](int yr) {
        PaperCoefficients pc;
        pc.year = yr;
        const auto& table = (yr == 2017) ? kPaperModel2017 : kPaperModel2020;
        for (const auto& row : table) {
            PaperCoefficients::Row r;
            r.term = row.term;
            r.coefficient_str = row.coefficient;
            r.std_error_str = row.std_error;
            r.t_value_str = row.t_value;
            r.coefficient = std::stod(r.coefficient_str);
            r.std_error = std::stod(r.std_error_str);
            r.t_value = std::stod(r.t_value_str);
            pc.rows.push_back(std::move(r));
        }
        return pc;
    };
    static const PaperCoefficients pc2017 = build(2017);
    static const PaperCoefficients pc2020 = build(2020);
    if (year == 2017) return pc2017;
    if (year == 2020) return pc2020;
    fail(Errc::bad_argument, "reference model year must be 2017 or 2020");
}

struct PaperPrediction {
    double log_prediction = 0;  // predicted ln(1+citations)
    double count_estimate = 0;  // exp(prediction)-1, floored at 0
    bool categorical_approximation = false;
};

/// Score one record with the bundled coefficient table. Categorical features
/// enter as integer codes (0 when no vocabulary is supplied).
inline PaperPrediction paper_model_predict(const ArticleRecord& record, int year,
                                           const CategoricalVocab* vocab = nullptr) {
    const auto& pc = paper_coefficients(year);
    PaperPrediction out;
    double sum = 0;
    for (const auto& row : pc.rows) {
        double x;
        if (row.term == "constant") {
            x = 1.0;
        } else if (schema::is_categorical(row.term)) {
            long long code = vocab ? vocab->code(row.term, categorical_field(record, row.term)) : 0;
            x = static_cast<double>(code);
            if (code != 0) out.categorical_approximation = true;
        } else {
            double v = static_cast<double>(numeric_field(record, row.term));
            x = is_log_transformed_predictor(row.term) ? std::log1p(v) : v;
        }
        sum += row.coefficient * x;
    }
    out.log_prediction = sum;
    out.count_estimate = std::max(0.0, std::exp(sum) - 1.0);
    return out;
}

// ---- internal consistency of the published tables ----

struct ConsistencyRow {
    int year = 0;
    std::string term;
    enum class Status { pass, fail, skipped } status = Status::pass;
    double ratio_lo = 0, ratio_hi = 0; // attainable coef/SE range under printed rounding
    double t_lo = 0, t_hi = 0;
    std::string reason;
};

struct ConsistencyReport {
    std::vector<ConsistencyRow> rows;
    bool all_passed = true; // over non-skipped rows
};

namespace ols_detail {

inline int printed_decimals(const std::string& s) {
    auto dot = s.find('.');
    return dot == std::string::npos ? 0 : static_cast<int>(s.size() - dot - 1);
}

inline std::pair<double, double> rounding_interval(const std::string& s) {
    double v = std::stod(s);
    double half = 0.5 * std::pow(10.0, -printed_decimals(s));
    return {v - half, v + half};
}

} // namespace ols_detail

/// For each row with a positive printed SE, checks that some (coef, se) inside
/// the half-ULP rounding boxes of the printed values reproduces the printed t
/// within its own rounding box.
inline ConsistencyReport check_paper_consistency() {
    ConsistencyReport report;
    for (int year : {2017, 2020}) {
        for (const auto& row : paper_coefficients(year).rows) {
            ConsistencyRow cr;
            cr.year = year;
            cr.term = row.term;
            auto [se_lo, se_hi] = ols_detail::rounding_interval(row.std_error_str);
            if (se_lo <= 0.0) {
                cr.status = ConsistencyRow::Status::skipped;
                cr.reason = "printed SE interval includes zero";
                report.rows.push_back(std::move(cr));
                continue;
            }
            auto [c_lo, c_hi] = ols_detail::rounding_interval(row.coefficient_str);
            auto [t_lo, t_hi] = ols_detail::rounding_interval(row.t_value_str);
            double corners[4] = {c_lo / se_lo, c_lo / se_hi, c_hi / se_lo, c_hi / se_hi};
            cr.ratio_lo = *std::min_element(corners, corners + 4);
            cr.ratio_hi = *std::max_element(corners, corners + 4);
            cr.t_lo = t_lo;
            cr.t_hi = t_hi;
            bool ok = !(cr.ratio_hi < t_lo || t_hi < cr.ratio_lo);
            cr.status = ok ? ConsistencyRow::Status::pass : ConsistencyRow::Status::fail;
            if (!ok) report.all_passed = false;
            report.rows.push_back(std::move(cr));
        }
    }
    return report;
}

// ---- interchange ----

inline nlohmann::json paper_coefficients_json() {
    nlohmann::json models = nlohmann::json::object();
    for (int year : {2017, 2020}) {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& r : paper_coefficients(year).rows)
            rows.push_back({{"term", r.term},
                            {"coefficient", r.coefficient_str},
                            {"std_error", r.std_error_str},
                            {"t_value", r.t_value_str}});
        models[std::to_string(year)] = rows;
    }
    return {{"format_version", 1}, {"models", models}};
}

inline std::string ols_coefficients_csv(const OLSModel& m) {
    std::string out = "term,coefficient,std_error,t_value\n";
    for (std::size_t j = 0; j < m.p; ++j)
        out += m.names[j] + "," + fmt_g(m.beta[j]) + "," + fmt_g(m.standard_errors[j]) + "," +
               fmt_g(m.t_values[j]) + "\n";
    return out;
}

inline nlohmann::json to_json(const OLSModel& m) {
    return {{"format_version", kModelFormatVersion},
            {"model_type", "ols"},
            {"params", nlohmann::json::object()},
            {"payload",
             {{"beta", m.beta},
              {"standard_errors", m.standard_errors},
              {"t_values", m.t_values},
              {"sigma2", m.sigma2},
              {"n", m.n},
              {"p", m.p},
              {"names", m.names}}}};
}

inline OLSModel ols_from_json(const nlohmann::json& j) {
    OLSModel m;
    const auto& p = j.at("payload");
    m.beta = p.at("beta").get<std::vector<double>>();
    m.standard_errors = p.at("standard_errors").get<std::vector<double>>();
    m.t_values = p.at("t_values").get<std::vector<double>>();
    m.sigma2 = p.at("sigma2").get<double>();
    m.n = p.at("n").get<std::size_t>();
    m.p = p.at("p").get<std::size_t>();
    m.names = p.at("names").get<std::vector<std::string>>();
    return m;
}

} // namespace altcite
