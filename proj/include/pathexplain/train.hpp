#pragma once
// Network construction and a small deterministic trainer: squared-error or
// logistic loss, plain/momentum/Adam steps, seeded shuffling and init.
// Training the same data with the same config and seed is bit-reproducible.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "pathexplain/network.hpp"

namespace pathexplain {

/// Xavier-uniform initialized fully-connected net. `sizes` runs from input
/// width to output width; hidden layers use `hidden`, the final layer
/// `out_act` (identity for regressors and raw-score classifiers).
inline DenseNetwork make_dense(const std::vector<std::size_t>& sizes, Activation hidden,
                               std::uint64_t seed, Activation out_act = Activation(Act::identity)) {
    if (sizes.size() < 2) throw input_error("make_dense: need at least input and output sizes");
    std::vector<Layer> layers;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        std::size_t fan_in = sizes[l], fan_out = sizes[l + 1];
        if (fan_in == 0 || fan_out == 0) throw input_error("make_dense: zero layer size");
        double limit = std::sqrt(6.0 / double(fan_in + fan_out));
        std::mt19937_64 eng(derive_seed(seed, 0x11ceULL, l));
        std::uniform_real_distribution<double> u(-limit, limit);
        Mat w(fan_out, fan_in);
        for (double& v : w.data) v = u(eng);
        Layer ly{std::move(w), Vec(fan_out, 0.0),
                 (l + 2 == sizes.size()) ? out_act : hidden};
        layers.push_back(std::move(ly));
    }
    return DenseNetwork(sizes.front(), std::move(layers));
}

enum class LossKind { squared_error, logistic };
enum class OptimizerKind { sgd, momentum, adam };

struct TrainConfig {
    LossKind loss = LossKind::squared_error;
    OptimizerKind optimizer = OptimizerKind::adam;
    double learning_rate = 1e-3;
    std::size_t epochs = 100;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    double momentum = 0.9;        // momentum optimizer only
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;

    void validate() const {
        if (!(learning_rate > 0.0)) throw input_error("learning_rate must be positive");
        if (epochs == 0) throw input_error("epochs must be at least 1");
        if (batch_size == 0) throw input_error("batch_size must be at least 1");
    }
};

struct TrainResult {
    DenseNetwork net;
    double final_loss = 0.0;  // mean per-sample loss over the last epoch
};

namespace detail {

// loss value and dL/df for one sample
inline std::pair<double, double> loss_and_grad(LossKind kind, double f, double y) {
    if (kind == LossKind::squared_error) {
        double e = f - y;
        return {e * e, 2.0 * e};
    }
    // logistic: y in {0,1}, f is the raw score; stable softplus form
    double loss = std::max(f, 0.0) - y * f + std::log1p(std::exp(-std::abs(f)));
    double sig = stable_sigmoid(f);
    return {loss, sig - y};
}

}  // namespace detail

/// Mini-batch training of a single-output network. Returns a trained copy;
/// the input network provides the architecture and initial weights.
inline TrainResult train(const DenseNetwork& start, const Mat& xs, const Vec& ys,
                         const TrainConfig& cfg) {
    cfg.validate();
    if (xs.cols != start.input_dim())
        throw input_error("training data has " + std::to_string(xs.cols) +
                          " features, network expects " + std::to_string(start.input_dim()));
    if (ys.size() != xs.rows) throw input_error("labels/rows mismatch in training data");
    if (xs.rows == 0) throw input_error("training data is empty");
    if (start.output_dim() != 1)
        throw input_error("train expects a single-output network (output_dim == 1)");
    if (cfg.loss == LossKind::logistic)
        for (double y : ys)
            if (y != 0.0 && y != 1.0)
                throw input_error("logistic loss expects labels in {0,1}");

    DenseNetwork net = start;
    std::size_t L = net.n_layers();

    // Gradient accumulators and optimizer state, one tensor pair per layer.
    std::vector<Mat> gw(L);
    std::vector<Vec> gb(L), z(L), a(L + 1), zbar(L);
    std::vector<Mat> mw(L), vw(L);
    std::vector<Vec> mb(L), vb(L);
    for (std::size_t l = 0; l < L; ++l) {
        const Layer& ly = net.layer(l);
        gw[l] = Mat(ly.weights.rows, ly.weights.cols);
        gb[l] = Vec(ly.bias.size(), 0.0);
        mw[l] = Mat(ly.weights.rows, ly.weights.cols);
        vw[l] = Mat(ly.weights.rows, ly.weights.cols);
        mb[l] = Vec(ly.bias.size(), 0.0);
        vb[l] = Vec(ly.bias.size(), 0.0);
    }

    std::mt19937_64 shuffle_eng(derive_seed(cfg.seed, 0x7261ULL));
    std::vector<std::size_t> order(xs.rows);
    std::iota(order.begin(), order.end(), 0);

    std::size_t adam_t = 0;
    double epoch_loss = 0.0;

    auto apply_step = [&](std::size_t n_in_batch) {
        double inv = 1.0 / double(n_in_batch);
        ++adam_t;
        for (std::size_t l = 0; l < L; ++l) {
            Layer& ly = net.layer(l);
            auto step_tensor = [&](Vec& p, Vec& g, Vec& m, Vec& v) {
                for (std::size_t i = 0; i < p.size(); ++i) {
                    double gi = g[i] * inv;
                    switch (cfg.optimizer) {
                        case OptimizerKind::sgd:
                            p[i] -= cfg.learning_rate * gi;
                            break;
                        case OptimizerKind::momentum:
                            m[i] = cfg.momentum * m[i] + gi;
                            p[i] -= cfg.learning_rate * m[i];
                            break;
                        case OptimizerKind::adam: {
                            m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * gi;
                            v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * gi * gi;
                            double mhat = m[i] / (1.0 - std::pow(cfg.adam_beta1, double(adam_t)));
                            double vhat = v[i] / (1.0 - std::pow(cfg.adam_beta2, double(adam_t)));
                            p[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
                            break;
                        }
                    }
                    g[i] = 0.0;
                }
            };
            step_tensor(ly.weights.data, gw[l].data, mw[l].data, vw[l].data);
            step_tensor(ly.bias, gb[l], mb[l], vb[l]);
        }
    };

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_eng);
        epoch_loss = 0.0;
        std::size_t b = 0;
        while (b < order.size()) {
            std::size_t batch_end = std::min(b + cfg.batch_size, order.size());
            for (std::size_t s = b; s < batch_end; ++s) {
                const double* xrow = xs.row(order[s]);
                // forward
                a[0].assign(xrow, xrow + xs.cols);
                for (std::size_t l = 0; l < L; ++l) {
                    const Layer& ly = net.layer(l);
                    affine(ly.weights, ly.bias, a[l], z[l]);
                    a[l + 1].resize(z[l].size());
                    for (std::size_t i = 0; i < z[l].size(); ++i)
                        a[l + 1][i] = ly.act.value(z[l][i]);
                }
                auto [lv, dldf] = detail::loss_and_grad(cfg.loss, a[L][0], ys[order[s]]);
                epoch_loss += lv;
                // backward, accumulating weight/bias gradients
                Vec abar(1, dldf), prev;
                for (std::size_t l = L; l-- > 0;) {
                    const Layer& ly = net.layer(l);
                    zbar[l].resize(z[l].size());
                    for (std::size_t i = 0; i < z[l].size(); ++i)
                        zbar[l][i] = abar[i] * ly.act.deriv(z[l][i]);
                    for (std::size_t r = 0; r < ly.weights.rows; ++r) {
                        double zb = zbar[l][r];
                        gb[l][r] += zb;
                        if (zb == 0.0) continue;
                        double* grow = gw[l].row(r);
                        for (std::size_t c = 0; c < a[l].size(); ++c) grow[c] += zb * a[l][c];
                    }
                    if (l > 0) {
                        matvec_transpose(ly.weights, zbar[l], prev);
                        abar = prev;
                    }
                }
            }
            apply_step(batch_end - b);
            b = batch_end;
        }
        epoch_loss /= double(order.size());
        if (!std::isfinite(epoch_loss))
            throw divergence_error("training diverged (non-finite loss) at epoch " +
                                       std::to_string(epoch),
                                   epoch);
    }
    return TrainResult{std::move(net), epoch_loss};
}

// -- metrics -----------------------------------------------------------------

inline double mse(const DenseNetwork& net, const Mat& xs, const Vec& ys) {
    if (xs.rows != ys.size()) throw input_error("mse: labels/rows mismatch");
    double s = 0.0;
    Vec x(xs.cols);
    for (std::size_t r = 0; r < xs.rows; ++r) {
        x.assign(xs.row(r), xs.row(r) + xs.cols);
        double e = net.forward(x) - ys[r];
        s += e * e;
    }
    return s / double(xs.rows);
}

inline double r_squared(const DenseNetwork& net, const Mat& xs, const Vec& ys) {
    double mean = sum(ys) / double(ys.size());
    double ss_tot = 0.0;
    for (double y : ys) ss_tot += (y - mean) * (y - mean);
    double ss_res = mse(net, xs, ys) * double(ys.size());
    if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
    return 1.0 - ss_res / ss_tot;
}

inline double max_abs_error(const DenseNetwork& net, const Mat& xs, const Vec& ys) {
    double m = 0.0;
    Vec x(xs.cols);
    for (std::size_t r = 0; r < xs.rows; ++r) {
        x.assign(xs.row(r), xs.row(r) + xs.cols);
        m = std::max(m, std::abs(net.forward(x) - ys[r]));
    }
    return m;
}

}  // namespace pathexplain
