#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "altcite/common.hpp"

namespace altcite {

// ---- Bernoulli naive Bayes ----

struct NBModel {
    double alpha = 1.0;
    double binarize = 0.0;
    std::size_t n_features = 0;
    double log_prior0 = 0, log_prior1 = 0;
    std::vector<double> log_p0, log_not_p0; // log P(x=1|c=0), log P(x=0|c=0)
    std::vector<double> log_p1, log_not_p1;
};

inline NBModel fit_bernoulli_nb(const Matrix& X, const std::vector<int>& y, double alpha = 1.0,
                                double binarize = 0.0) {
    if (y.size() != X.rows()) fail(Errc::length_mismatch, "fit_bernoulli_nb");
    std::size_t n = X.rows(), p = X.cols();
    std::size_t n1 = 0;
    for (int v : y) n1 += (v == 1);
    std::size_t n0 = n - n1;
    if (n0 == 0 || n1 == 0) fail(Errc::single_class, "naive Bayes needs both classes");

    NBModel m;
    m.alpha = alpha;
    m.binarize = binarize;
    m.n_features = p;
    m.log_prior0 = std::log(static_cast<double>(n0) / static_cast<double>(n));
    m.log_prior1 = std::log(static_cast<double>(n1) / static_cast<double>(n));
    m.log_p0.resize(p);
    m.log_not_p0.resize(p);
    m.log_p1.resize(p);
    m.log_not_p1.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        double c0 = 0, c1 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            bool on = X(i, j) > binarize;
            if (y[i] == 1)
                c1 += on;
            else
                c0 += on;
        }
        double p0 = (c0 + alpha) / (static_cast<double>(n0) + 2.0 * alpha);
        double p1 = (c1 + alpha) / (static_cast<double>(n1) + 2.0 * alpha);
        m.log_p0[j] = std::log(p0);
        m.log_not_p0[j] = std::log(1.0 - p0);
        m.log_p1[j] = std::log(p1);
        m.log_not_p1[j] = std::log(1.0 - p1);
    }
    return m;
}

inline std::vector<double> predict_proba(const NBModel& m, const Matrix& X) {
    check_width(m.n_features, X);
    std::vector<double> out(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) {
        double s0 = m.log_prior0, s1 = m.log_prior1;
        for (std::size_t j = 0; j < m.n_features; ++j) {
            bool on = X(i, j) > m.binarize;
            s0 += on ? m.log_p0[j] : m.log_not_p0[j];
            s1 += on ? m.log_p1[j] : m.log_not_p1[j];
        }
        double mx = std::max(s0, s1);
        double e0 = std::exp(s0 - mx), e1 = std::exp(s1 - mx);
        out[i] = e1 / (e0 + e1);
    }
    return out;
}

inline std::vector<int> predict_labels(const NBModel& m, const Matrix& X) {
    auto proba = predict_proba(m, X);
    std::vector<int> out(proba.size());
    for (std::size_t i = 0; i < proba.size(); ++i) out[i] = proba[i] > 0.5 ? 1 : 0;
    return out;
}

// ---- k-nearest neighbors ----

struct KNNModel {
    Matrix X; // expected to be standardized by the caller
    std::vector<int> y;
    std::size_t k = 5;
};

inline KNNModel fit_knn(const Matrix& X, const std::vector<int>& y, std::size_t k = 5) {
    if (y.size() != X.rows()) fail(Errc::length_mismatch, "fit_knn");
    if (k < 1 || k > X.rows()) fail(Errc::bad_k, "knn requires 1 <= k <= n");
    return {X, y, k};
}

/// Vote of the k Euclidean-nearest training rows. Distance ties resolve by
/// lower training-row index; vote ties by the smaller class index.
inline std::vector<double> predict_proba(const KNNModel& m, const Matrix& X) {
    check_width(m.X.cols(), X);
    std::size_t n = m.X.rows(), p = m.X.cols();
    std::vector<double> out(X.rows());
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t q = 0; q < X.rows(); ++q) {
        for (std::size_t i = 0; i < n; ++i) {
            double d = 0;
            const double* a = m.X.row(i);
            const double* b = X.row(q);
            for (std::size_t j = 0; j < p; ++j) d += (a[j] - b[j]) * (a[j] - b[j]);
            dist[i] = {d, i};
        }
        std::partial_sort(dist.begin(), dist.begin() + m.k, dist.end());
        std::size_t votes1 = 0;
        for (std::size_t t = 0; t < m.k; ++t) votes1 += (m.y[dist[t].second] == 1);
        out[q] = static_cast<double>(votes1) / static_cast<double>(m.k);
    }
    return out;
}

inline std::vector<int> predict_labels(const KNNModel& m, const Matrix& X) {
    auto proba = predict_proba(m, X);
    std::vector<int> out(proba.size());
    for (std::size_t i = 0; i < proba.size(); ++i) out[i] = proba[i] > 0.5 ? 1 : 0;
    return out;
}

// ---- C-support-vector classification, sigmoid kernel, SMO solver ----

struct SVMParams {
    double C = 1.0;
    double gamma = 0.045;
    double coef0 = 0.0;
    int degree = 3; // recorded but inert for the sigmoid kernel
    double tolerance = 1e-3;
    std::size_t max_iterations = 0; // 0: 100 * n

    nlohmann::json to_json() const {
        return {{"C", C},          {"gamma", gamma},         {"coef0", coef0},
                {"degree", degree}, {"tolerance", tolerance}, {"max_iterations", max_iterations}};
    }
    static SVMParams from_json(const nlohmann::json& j) {
        SVMParams p;
        p.C = j.at("C").get<double>();
        p.gamma = j.at("gamma").get<double>();
        p.coef0 = j.at("coef0").get<double>();
        p.degree = j.at("degree").get<int>();
        p.tolerance = j.at("tolerance").get<double>();
        p.max_iterations = j.at("max_iterations").get<std::size_t>();
        return p;
    }
};

struct SVMModel {
    SVMParams params;
    Matrix support_vectors;
    std::vector<double> sv_alpha_y; // alpha_i * y_i per support vector
    double bias = 0.0;
    bool converged = true;
    std::size_t iterations = 0;
    // full-length duals kept for inspection and the KKT checks
    std::vector<double> alphas;
    std::vector<int> y_signed; // +1 / -1
};

namespace svm_detail {

inline double sigmoid_kernel(const double* a, const double* b, std::size_t p, double gamma,
                             double coef0) {
    double dot = 0;
    for (std::size_t j = 0; j < p; ++j) dot += a[j] * b[j];
    return std::tanh(gamma * dot + coef0);
}

struct KernelCache {
    const Matrix& X;
    double gamma, coef0;
    std::vector<std::vector<double>> rows;

    KernelCache(const Matrix& x, double g, double c) : X(x), gamma(g), coef0(c), rows(x.rows()) {}

    const std::vector<double>& row(std::size_t i) {
        auto& r = rows[i];
        if (r.empty()) {
            r.resize(X.rows());
            for (std::size_t j = 0; j < X.rows(); ++j)
                r[j] = sigmoid_kernel(X.row(i), X.row(j), X.cols(), gamma, coef0);
        }
        return r;
    }
};

} // namespace svm_detail

inline SVMModel fit_svm_smo(const Matrix& X, const std::vector<int>& y, const SVMParams& params) {
    if (y.size() != X.rows()) fail(Errc::length_mismatch, "fit_svm_smo");
    std::size_t n = X.rows();
    bool has0 = false, has1 = false;
    for (int v : y) (v == 1 ? has1 : has0) = true;
    if (!has0 || !has1) fail(Errc::single_class, "SVM needs both classes");

    SVMModel m;
    m.params = params;
    m.y_signed.resize(n);
    for (std::size_t i = 0; i < n; ++i) m.y_signed[i] = y[i] == 1 ? 1 : -1;
    m.alphas.assign(n, 0.0);

    const double C = params.C;
    const double tol = params.tolerance;
    std::size_t max_iter = params.max_iterations ? params.max_iterations : 100 * n;
    svm_detail::KernelCache cache(X, params.gamma, params.coef0);

    // gradient of the dual objective (minimization form): G_i = sum_j a_j y_i y_j K_ij - 1
    std::vector<double> G(n, -1.0);
    auto yv = [&](std::size_t i) { return static_cast<double>(m.y_signed[i]); };

    double m_up = 0, m_low = 0;
    std::size_t iter = 0;
    for (; iter < max_iter; ++iter) {
        // maximal violating pair
        std::size_t i_up = n, i_low = n;
        m_up = -1e300;
        m_low = 1e300;
        for (std::size_t t = 0; t < n; ++t) {
            double v = -yv(t) * G[t];
            bool in_up = (m.y_signed[t] == 1 && m.alphas[t] < C) ||
                         (m.y_signed[t] == -1 && m.alphas[t] > 0);
            bool in_low = (m.y_signed[t] == 1 && m.alphas[t] > 0) ||
                          (m.y_signed[t] == -1 && m.alphas[t] < C);
            if (in_up && v > m_up) {
                m_up = v;
                i_up = t;
            }
            if (in_low && v < m_low) {
                m_low = v;
                i_low = t;
            }
        }
        if (i_up == n || i_low == n || m_up - m_low <= tol) break;

        std::size_t i = i_up, j = i_low;
        const auto& Ki = cache.row(i);
        const auto& Kj = cache.row(j);
        double eta = Ki[i] + Kj[j] - 2.0 * Ki[j];
        if (eta <= 0) eta = 1e-12; // sigmoid kernel is not PSD in general

        // two-variable subproblem on (alpha_i, alpha_j), equality constraint kept exact
        double yi = yv(i), yj = yv(j);
        double Ei = yi * G[i]; // u_i - y_i
        double Ej = yj * G[j];
        double ai_old = m.alphas[i], aj_old = m.alphas[j];
        double L, H;
        if (m.y_signed[i] != m.y_signed[j]) {
            L = std::max(0.0, aj_old - ai_old);
            H = std::min(C, C + aj_old - ai_old);
        } else {
            L = std::max(0.0, ai_old + aj_old - C);
            H = std::min(C, ai_old + aj_old);
        }
        if (H <= L) continue;
        double aj_new = aj_old + yj * (Ei - Ej) / eta;
        aj_new = std::clamp(aj_new, L, H);
        double ai_new = ai_old + yi * yj * (aj_old - aj_new);
        double di = ai_new - ai_old, dj = aj_new - aj_old;
        if (std::fabs(dj) < 1e-14) continue;
        m.alphas[i] = ai_new;
        m.alphas[j] = aj_new;
        for (std::size_t t = 0; t < n; ++t)
            G[t] += di * yv(t) * yi * Ki[t] + dj * yv(t) * yj * Kj[t];
    }
    m.iterations = iter;
    m.converged = (m_up - m_low) <= tol;

    // bias from free support vectors, else midpoint of the violation bounds
    double sum = 0;
    std::size_t free_count = 0;
    for (std::size_t t = 0; t < n; ++t)
        if (m.alphas[t] > 0 && m.alphas[t] < C) {
            sum += -yv(t) * G[t];
            ++free_count;
        }
    m.bias = free_count ? sum / static_cast<double>(free_count) : 0.5 * (m_up + m_low);

    std::vector<std::size_t> sv;
    for (std::size_t t = 0; t < n; ++t)
        if (m.alphas[t] > 0) sv.push_back(t);
    m.support_vectors = Matrix(sv.size(), X.cols());
    m.sv_alpha_y.resize(sv.size());
    for (std::size_t s = 0; s < sv.size(); ++s) {
        for (std::size_t jx = 0; jx < X.cols(); ++jx) m.support_vectors(s, jx) = X(sv[s], jx);
        m.sv_alpha_y[s] = m.alphas[sv[s]] * yv(sv[s]);
    }
    return m;
}

inline std::vector<double> decision_function(const SVMModel& m, const Matrix& X) {
    check_width(m.support_vectors.cols() ? m.support_vectors.cols() : X.cols(), X);
    std::vector<double> out(X.rows(), m.bias);
    for (std::size_t q = 0; q < X.rows(); ++q)
        for (std::size_t s = 0; s < m.support_vectors.rows(); ++s)
            out[q] += m.sv_alpha_y[s] *
                      svm_detail::sigmoid_kernel(m.support_vectors.row(s), X.row(q), X.cols(),
                                                 m.params.gamma, m.params.coef0);
    return out;
}

inline std::vector<int> predict_labels(const SVMModel& m, const Matrix& X) {
    auto f = decision_function(m, X);
    std::vector<int> out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] > 0 ? 1 : 0;
    return out;
}

// ---- serialization ----

inline nlohmann::json to_json(const NBModel& m) {
    return {{"format_version", kModelFormatVersion},
            {"model_type", "bernoulli_nb"},
            {"params", {{"alpha", m.alpha}, {"binarize", m.binarize}}},
            {"payload",
             {{"n_features", m.n_features},
              {"log_prior0", m.log_prior0},
              {"log_prior1", m.log_prior1},
              {"log_p0", m.log_p0},
              {"log_not_p0", m.log_not_p0},
              {"log_p1", m.log_p1},
              {"log_not_p1", m.log_not_p1}}}};
}

inline NBModel nb_from_json(const nlohmann::json& j) {
    NBModel m;
    m.alpha = j.at("params").at("alpha").get<double>();
    m.binarize = j.at("params").at("binarize").get<double>();
    const auto& p = j.at("payload");
    m.n_features = p.at("n_features").get<std::size_t>();
    m.log_prior0 = p.at("log_prior0").get<double>();
    m.log_prior1 = p.at("log_prior1").get<double>();
    m.log_p0 = p.at("log_p0").get<std::vector<double>>();
    m.log_not_p0 = p.at("log_not_p0").get<std::vector<double>>();
    m.log_p1 = p.at("log_p1").get<std::vector<double>>();
    m.log_not_p1 = p.at("log_not_p1").get<std::vector<double>>();
    return m;
}

inline nlohmann::json to_json(const KNNModel& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < m.X.rows(); ++i) {
        nlohmann::json r = nlohmann::json::array();
        for (std::size_t j = 0; j < m.X.cols(); ++j) r.push_back(m.X(i, j));
        rows.push_back(r);
    }
    return {{"format_version", kModelFormatVersion},
            {"model_type", "knn"},
            {"params", {{"k", m.k}}},
            {"payload", {{"X", rows}, {"y", m.y}}}};
}

inline KNNModel knn_from_json(const nlohmann::json& j) {
    KNNModel m;
    m.k = j.at("params").at("k").get<std::size_t>();
    const auto& rows = j.at("payload").at("X");
    std::size_t n = rows.size(), p = n ? rows[0].size() : 0;
    m.X = Matrix(n, p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t jx = 0; jx < p; ++jx) m.X(i, jx) = rows[i][jx].get<double>();
    m.y = j.at("payload").at("y").get<std::vector<int>>();
    return m;
}

inline nlohmann::json to_json(const SVMModel& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < m.support_vectors.rows(); ++i) {
        nlohmann::json r = nlohmann::json::array();
        for (std::size_t j = 0; j < m.support_vectors.cols(); ++j)
            r.push_back(m.support_vectors(i, j));
        rows.push_back(r);
    }
    return {{"format_version", kModelFormatVersion},
            {"model_type", "svm_sigmoid"},
            {"params", m.params.to_json()},
            {"payload",
             {{"support_vectors", rows},
              {"sv_alpha_y", m.sv_alpha_y},
              {"bias", m.bias},
              {"converged", m.converged},
              {"iterations", m.iterations}}}};
}

inline SVMModel svm_from_json(const nlohmann::json& j) {
    SVMModel m;
    m.params = SVMParams::from_json(j.at("params"));
    const auto& p = j.at("payload");
    const auto& rows = p.at("support_vectors");
    std::size_t n = rows.size(), width = n ? rows[0].size() : 0;
    m.support_vectors = Matrix(n, width);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t jx = 0; jx < width; ++jx) m.support_vectors(i, jx) = rows[i][jx].get<double>();
    m.sv_alpha_y = p.at("sv_alpha_y").get<std::vector<double>>();
    m.bias = p.at("bias").get<double>();
    m.converged = p.at("converged").get<bool>();
    m.iterations = p.at("iterations").get<std::size_t>();
    return m;
}

} // namespace altcite
