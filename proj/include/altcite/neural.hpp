#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "altcite/common.hpp"

namespace altcite {

struct MLPParams {
    std::vector<std::size_t> hidden_sizes = {512};
    double selu_alpha = 1.6732632423;
    double selu_lambda = 1.0507009873;
    std::size_t epochs = 100;
    std::size_t batch_size = 32;
    double learning_rate = 0.001;
    double rmsprop_decay = 0.9;
    double rmsprop_epsilon = 1e-8;
    std::uint64_t seed = 0;

    nlohmann::json to_json() const {
        return {{"hidden_sizes", hidden_sizes}, {"selu_alpha", selu_alpha},
                {"selu_lambda", selu_lambda},   {"epochs", epochs},
                {"batch_size", batch_size},     {"learning_rate", learning_rate},
                {"rmsprop_decay", rmsprop_decay}, {"rmsprop_epsilon", rmsprop_epsilon},
                {"seed", seed}};
    }
    static MLPParams from_json(const nlohmann::json& j) {
        MLPParams p;
        p.hidden_sizes = j.at("hidden_sizes").get<std::vector<std::size_t>>();
        p.selu_alpha = j.at("selu_alpha").get<double>();
        p.selu_lambda = j.at("selu_lambda").get<double>();
        p.epochs = j.at("epochs").get<std::size_t>();
        p.batch_size = j.at("batch_size").get<std::size_t>();
        p.learning_rate = j.at("learning_rate").get<double>();
        p.rmsprop_decay = j.at("rmsprop_decay").get<double>();
        p.rmsprop_epsilon = j.at("rmsprop_epsilon").get<double>();
        p.seed = j.at("seed").get<std::uint64_t>();
        return p;
    }
};

inline double selu(double x, double alpha = 1.6732632423, double lambda = 1.0507009873) {
    return x > 0 ? lambda * x : lambda * alpha * (std::exp(x) - 1.0);
}

inline double selu_grad(double x, double alpha = 1.6732632423, double lambda = 1.0507009873) {
    return x > 0 ? lambda : lambda * alpha * std::exp(x);
}

/// Fully connected net: SELU hidden layers, then either a two-unit softmax
/// head (classifier) or a single linear unit (regressor variant).
struct MLPModel {
    MLPParams params;
    bool classifier = true;
    std::size_t n_features = 0;
    std::vector<Matrix> W;                 // W[l]: fan_in x fan_out
    std::vector<std::vector<double>> b;
    double final_loss = 0.0;
    std::size_t epochs_run = 0;

    std::size_t layers() const { return W.size(); }
};

struct MLPGradients {
    std::vector<Matrix> dW;
    std::vector<std::vector<double>> db;
};

struct RmspropState {
    std::vector<Matrix> sW;
    std::vector<std::vector<double>> sb;
};

namespace mlp_detail {

inline void matmul(const Matrix& A, const Matrix& B, Matrix& out) {
    out = Matrix(A.rows(), B.cols());
    for (std::size_t i = 0; i < A.rows(); ++i) {
        const double* arow = A.row(i);
        double* orow = out.row(i);
        for (std::size_t k = 0; k < A.cols(); ++k) {
            double a = arow[k];
            if (a == 0.0) continue;
            const double* brow = B.row(k);
            for (std::size_t j = 0; j < B.cols(); ++j) orow[j] += a * brow[j];
        }
    }
}

struct ForwardPass {
    std::vector<Matrix> pre;  // pre-activation per layer
    std::vector<Matrix> act;  // act[0] = input, act[l+1] = activation of layer l
};

inline ForwardPass forward_pass(const MLPModel& m, const Matrix& X) {
    ForwardPass fp;
    fp.act.push_back(X);
    for (std::size_t l = 0; l < m.layers(); ++l) {
        Matrix z;
        matmul(fp.act.back(), m.W[l], z);
        for (std::size_t i = 0; i < z.rows(); ++i)
            for (std::size_t j = 0; j < z.cols(); ++j) z(i, j) += m.b[l][j];
        fp.pre.push_back(z);
        bool is_output = (l + 1 == m.layers());
        Matrix a = z;
        if (!is_output)
            for (auto& v : a.data()) v = selu(v, m.params.selu_alpha, m.params.selu_lambda);
        fp.act.push_back(std::move(a));
    }
    return fp;
}

} // namespace mlp_detail

/// Row-stochastic class probabilities (softmax over the output pair), computed
/// with per-row max subtraction.
inline Matrix forward(const MLPModel& m, const Matrix& X) {
    check_width(m.n_features, X);
    auto fp = mlp_detail::forward_pass(m, X);
    Matrix logits = fp.act.back();
    if (!m.classifier) return logits; // identity head
    Matrix probs(logits.rows(), logits.cols());
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        double mx = logits(i, 0);
        for (std::size_t j = 1; j < logits.cols(); ++j) mx = std::max(mx, logits(i, j));
        double sum = 0;
        for (std::size_t j = 0; j < logits.cols(); ++j) {
            probs(i, j) = std::exp(logits(i, j) - mx);
            sum += probs(i, j);
        }
        for (std::size_t j = 0; j < logits.cols(); ++j) probs(i, j) /= sum;
    }
    return probs;
}

/// Mean loss over the batch plus exact backpropagation gradients.
/// Classifier: cross-entropy against one-hot targets. Regressor: mean squared error.
inline std::pair<double, MLPGradients> loss_and_gradients(const MLPModel& m, const Matrix& X,
                                                          const Matrix& Y) {
    check_width(m.n_features, X);
    if (Y.rows() != X.rows()) fail(Errc::length_mismatch, "loss_and_gradients");
    auto fp = mlp_detail::forward_pass(m, X);
    const Matrix& logits = fp.act.back();
    double B = static_cast<double>(X.rows());

    double loss = 0.0;
    Matrix delta(logits.rows(), logits.cols()); // dL/dlogits
    if (m.classifier) {
        for (std::size_t i = 0; i < logits.rows(); ++i) {
            double mx = logits(i, 0);
            for (std::size_t j = 1; j < logits.cols(); ++j) mx = std::max(mx, logits(i, j));
            double lse = 0;
            for (std::size_t j = 0; j < logits.cols(); ++j) lse += std::exp(logits(i, j) - mx);
            lse = std::log(lse);
            for (std::size_t j = 0; j < logits.cols(); ++j) {
                double logp = logits(i, j) - mx - lse;
                loss -= Y(i, j) * logp;
                delta(i, j) = (std::exp(logp) - Y(i, j)) / B;
            }
        }
        loss /= B;
    } else {
        for (std::size_t i = 0; i < logits.rows(); ++i)
            for (std::size_t j = 0; j < logits.cols(); ++j) {
                double e = logits(i, j) - Y(i, j);
                loss += e * e;
                delta(i, j) = 2.0 * e / B;
            }
        loss /= B;
    }

    MLPGradients g;
    g.dW.resize(m.layers());
    g.db.resize(m.layers());
    Matrix cur = std::move(delta);
    for (std::size_t l = m.layers(); l-- > 0;) {
        const Matrix& input = fp.act[l];
        g.dW[l] = Matrix(m.W[l].rows(), m.W[l].cols());
        g.db[l].assign(m.W[l].cols(), 0.0);
        for (std::size_t i = 0; i < cur.rows(); ++i) {
            const double* in = input.row(i);
            const double* d = cur.row(i);
            for (std::size_t k = 0; k < m.W[l].rows(); ++k) {
                double a = in[k];
                if (a == 0.0) continue;
                double* grow = g.dW[l].row(k);
                for (std::size_t j = 0; j < m.W[l].cols(); ++j) grow[j] += a * d[j];
            }
            for (std::size_t j = 0; j < m.W[l].cols(); ++j) g.db[l][j] += d[j];
        }
        if (l == 0) break;
        Matrix prev(cur.rows(), m.W[l].rows());
        for (std::size_t i = 0; i < cur.rows(); ++i) {
            const double* d = cur.row(i);
            double* prow = prev.row(i);
            for (std::size_t k = 0; k < m.W[l].rows(); ++k) {
                double s = 0;
                const double* wrow = m.W[l].row(k);
                for (std::size_t j = 0; j < m.W[l].cols(); ++j) s += wrow[j] * d[j];
                prow[k] = s * selu_grad(fp.pre[l - 1](i, k), m.params.selu_alpha,
                                        m.params.selu_lambda);
            }
        }
        cur = std::move(prev);
    }
    return {loss, std::move(g)};
}

/// s <- rho*s + (1-rho)*g^2 ; theta <- theta - lr*g/(sqrt(s)+eps)
inline void rmsprop_step(RmspropState& state, const MLPGradients& g, MLPModel& m) {
    double rho = m.params.rmsprop_decay, lr = m.params.learning_rate,
           eps = m.params.rmsprop_epsilon;
    for (std::size_t l = 0; l < m.layers(); ++l) {
        auto& sw = state.sW[l].data();
        auto& w = m.W[l].data();
        const auto& gw = g.dW[l].data();
        for (std::size_t t = 0; t < w.size(); ++t) {
            sw[t] = rho * sw[t] + (1.0 - rho) * gw[t] * gw[t];
            w[t] -= lr * gw[t] / (std::sqrt(sw[t]) + eps);
        }
        for (std::size_t t = 0; t < m.b[l].size(); ++t) {
            state.sb[l][t] = rho * state.sb[l][t] + (1.0 - rho) * g.db[l][t] * g.db[l][t];
            m.b[l][t] -= lr * g.db[l][t] / (std::sqrt(state.sb[l][t]) + eps);
        }
    }
}

namespace mlp_detail {

inline MLPModel init_model(std::size_t n_features, std::size_t n_outputs, bool classifier,
                           const MLPParams& params) {
    MLPModel m;
    m.params = params;
    m.classifier = classifier;
    m.n_features = n_features;
    std::vector<std::size_t> widths{n_features};
    for (auto h : params.hidden_sizes) widths.push_back(h);
    widths.push_back(n_outputs);
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        std::size_t fan_in = widths[l], fan_out = widths[l + 1];
        Matrix w(fan_in, fan_out);
        Rng rng(mix64(params.seed, 0xae10 + l));
        double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (auto& v : w.data()) v = scale * rng.normal();
        m.W.push_back(std::move(w));
        m.b.emplace_back(fan_out, 0.0);
    }
    return m;
}

inline RmspropState init_state(const MLPModel& m) {
    RmspropState s;
    for (std::size_t l = 0; l < m.layers(); ++l) {
        s.sW.emplace_back(m.W[l].rows(), m.W[l].cols());
        s.sb.emplace_back(m.b[l].size(), 0.0);
    }
    return s;
}

inline MLPModel train(const Matrix& X, const Matrix& Y, bool classifier, const MLPParams& params,
                      std::vector<double>* epoch_losses) {
    MLPModel m = init_model(X.cols(), Y.cols(), classifier, params);
    RmspropState state = init_state(m);
    std::size_t n = X.rows();
    std::size_t bs = std::min<std::size_t>(params.batch_size ? params.batch_size : 1, n);
    for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
        Rng rng(mix64(mix64(params.seed, 0x5u), epoch));
        auto order = rng.permutation(n);
        double loss_sum = 0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n; start += bs) {
            std::size_t len = std::min(bs, n - start);
            Matrix bx(len, X.cols()), by(len, Y.cols());
            for (std::size_t i = 0; i < len; ++i) {
                std::size_t src = order[start + i];
                for (std::size_t j = 0; j < X.cols(); ++j) bx(i, j) = X(src, j);
                for (std::size_t j = 0; j < Y.cols(); ++j) by(i, j) = Y(src, j);
            }
            auto [loss, grads] = loss_and_gradients(m, bx, by);
            rmsprop_step(state, grads, m);
            loss_sum += loss;
            ++batches;
        }
        m.final_loss = batches ? loss_sum / static_cast<double>(batches) : 0.0;
        m.epochs_run = epoch + 1;
        if (epoch_losses) epoch_losses->push_back(m.final_loss);
    }
    return m;
}

} // namespace mlp_detail

inline Matrix one_hot(const std::vector<int>& y) {
    Matrix Y(y.size(), 2);
    for (std::size_t i = 0; i < y.size(); ++i) Y(i, y[i] == 1 ? 1 : 0) = 1.0;
    return Y;
}

inline MLPModel train_mlp(const Matrix& X, const std::vector<int>& y, const MLPParams& params,
                          std::vector<double>* epoch_losses = nullptr) {
    if (y.size() != X.rows()) fail(Errc::length_mismatch, "train_mlp");
    bool has0 = false, has1 = false;
    for (int v : y) (v == 1 ? has1 : has0) = true;
    if (!has0 || !has1) fail(Errc::single_class, "MLP training needs both classes");
    return mlp_detail::train(X, one_hot(y), true, params, epoch_losses);
}

/// Single-linear-output variant (not part of the published setup).
inline MLPModel train_mlp_regressor(const Matrix& X, const std::vector<double>& y,
                                    const MLPParams& params,
                                    std::vector<double>* epoch_losses = nullptr) {
    if (y.size() != X.rows()) fail(Errc::length_mismatch, "train_mlp_regressor");
    Matrix Y(y.size(), 1);
    for (std::size_t i = 0; i < y.size(); ++i) Y(i, 0) = y[i];
    return mlp_detail::train(X, Y, false, params, epoch_losses);
}

inline std::vector<double> predict_proba(const MLPModel& m, const Matrix& X) {
    auto probs = forward(m, X);
    std::vector<double> out(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) out[i] = probs(i, 1);
    return out;
}

inline std::vector<int> predict_labels(const MLPModel& m, const Matrix& X) {
    auto proba = predict_proba(m, X);
    std::vector<int> out(proba.size());
    for (std::size_t i = 0; i < proba.size(); ++i) out[i] = proba[i] > 0.5 ? 1 : 0;
    return out;
}

inline std::vector<double> predict_values(const MLPModel& m, const Matrix& X) {
    auto outm = forward(m, X);
    std::vector<double> out(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) out[i] = outm(i, 0);
    return out;
}

// ---- serialization ----

inline nlohmann::json to_json(const MLPModel& m) {
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t l = 0; l < m.layers(); ++l)
        layers.push_back({{"rows", m.W[l].rows()},
                          {"cols", m.W[l].cols()},
                          {"w", m.W[l].data()},
                          {"b", m.b[l]}});
    return {{"format_version", kModelFormatVersion},
            {"model_type", m.classifier ? "mlp_classifier" : "mlp_regressor"},
            {"params", m.params.to_json()},
            {"payload",
             {{"n_features", m.n_features},
              {"layers", layers},
              {"final_loss", m.final_loss},
              {"epochs_run", m.epochs_run}}}};
}

inline MLPModel mlp_from_json(const nlohmann::json& j) {
    MLPModel m;
    m.params = MLPParams::from_json(j.at("params"));
    m.classifier = j.at("model_type").get<std::string>() == "mlp_classifier";
    const auto& p = j.at("payload");
    m.n_features = p.at("n_features").get<std::size_t>();
    m.final_loss = p.at("final_loss").get<double>();
    m.epochs_run = p.at("epochs_run").get<std::size_t>();
    for (const auto& lj : p.at("layers")) {
        Matrix w(lj.at("rows").get<std::size_t>(), lj.at("cols").get<std::size_t>());
        w.data() = lj.at("w").get<std::vector<double>>();
        m.W.push_back(std::move(w));
        m.b.push_back(lj.at("b").get<std::vector<double>>());
    }
    return m;
}

} // namespace altcite
