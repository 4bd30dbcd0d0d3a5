#pragma once
// Comparison interaction methods:
//   input_hessian  — raw second derivatives at the input, no path integral;
//   sii_exact      — Shapley Interaction Index by full coalition enumeration;
//   sii_monte_carlo— permutation-sampled SII estimate with standard errors;
//   neural_interaction_detection — global ranking from first-layer weights.
// The coalition game masks absent players to the single baseline x', matching
// the path methods' baseline semantics.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "pathexplain/interaction.hpp"

namespace pathexplain {

/// Subset value function v(S) = f(z) with z_i = x_i for i in S, else x'_i.
class CoalitionGame {
public:
    CoalitionGame(const DenseNetwork& net, Vec x, Vec x_prime)
        : net_(&net), x_(std::move(x)), x_prime_(std::move(x_prime)) {
        if (x_.size() != net.input_dim() || x_prime_.size() != net.input_dim())
            throw input_error("coalition game: input/baseline dimension mismatch");
    }

    std::size_t dim() const { return x_.size(); }
    const Vec& x() const { return x_; }
    const Vec& x_prime() const { return x_prime_; }

    /// v(S) for S encoded as a bitmask (bit i set = player i present).
    double value_mask(std::uint64_t mask) const {
        Vec z(x_prime_);
        for (std::size_t i = 0; i < x_.size(); ++i)
            if (mask & (std::uint64_t(1) << i)) z[i] = x_[i];
        return net_->forward(z);
    }

    const DenseNetwork& net() const { return *net_; }

private:
    const DenseNetwork* net_;
    Vec x_, x_prime_;
};

/// The Hessian of f at x presented as an interaction matrix (no path, no
/// baseline: reference_output = f(x), so its completeness residual is |sum H|).
inline InteractionMatrix input_hessian(const DenseNetwork& net, const Vec& x) {
    net.require_twice_differentiable("input_hessian");
    InteractionMatrix im;
    im.gamma = net.hessian(x);
    im.reference_output = net.forward(x);
    im.input_output = im.reference_output;
    im.x = x;
    im.baseline = detail::single_baseline_info(x);
    im.method = "hessian";
    return im;
}

namespace detail {

inline void factorials(double* f, std::size_t n) {
    f[0] = 1.0;
    for (std::size_t i = 1; i <= n; ++i) f[i] = f[i - 1] * double(i);
}

}  // namespace detail

/// Exact Shapley Interaction Index over all 2^d coalitions:
///   Gamma_ij = sum_{S subseteq N\{i,j}} |S|!(d-|S|-2)!/(d-1)! *
///              [v(S+ij) - v(S+i) - v(S+j) + v(S)]   (i != j).
/// The diagonal stores the plain Shapley value of each player (the pairwise
/// benchmarks only consume off-diagonal ranks).
inline InteractionMatrix sii_exact(const CoalitionGame& game) {
    std::size_t d = game.dim();
    if (d > 20)
        throw contract_error("sii_exact is limited to d <= 20 (2^d coalition enumeration); use "
                             "sii_monte_carlo for d = " + std::to_string(d));
    std::uint64_t full = (d == 64) ? ~0ULL : ((std::uint64_t(1) << d) - 1);

    // Cache every coalition value once; pairs then only index the table.
    std::vector<double> vals(std::size_t(1) << d);
    std::size_t n_chunks = fixed_chunk_count(vals.size());
    parallel_for_chunks(n_chunks, [&](std::size_t c) {
        auto [begin, end] = chunk_range(vals.size(), n_chunks, c);
        for (std::size_t mask = begin; mask < end; ++mask)
            vals[mask] = game.value_mask(mask);
    });

    double fact[21];
    detail::factorials(fact, 20);

    InteractionMatrix im;
    im.gamma = Mat(d, d);
    im.reference_output = vals[0];
    im.input_output = vals[full];
    im.x = game.x();
    im.baseline = detail::single_baseline_info(game.x_prime());
    im.method = "sii";

    // Diagonal: Shapley values.
    for (std::size_t i = 0; i < d; ++i) {
        std::uint64_t bi = std::uint64_t(1) << i;
        std::uint64_t comp = full & ~bi;
        double phi = 0.0;
        std::uint64_t sub = comp;
        for (;;) {
            std::size_t s = std::size_t(std::popcount(sub));
            double w = fact[s] * fact[d - s - 1] / fact[d];
            phi += w * (vals[sub | bi] - vals[sub]);
            if (sub == 0) break;
            sub = (sub - 1) & comp;
        }
        im.gamma(i, i) = phi;
    }

    // Off-diagonal pairs.
    if (d >= 2) {
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = i + 1; j < d; ++j) {
                std::uint64_t bi = std::uint64_t(1) << i, bj = std::uint64_t(1) << j;
                std::uint64_t comp = full & ~(bi | bj);
                double g = 0.0;
                std::uint64_t sub = comp;
                for (;;) {
                    std::size_t s = std::size_t(std::popcount(sub));
                    double w = fact[s] * fact[d - s - 2] / fact[d - 1];
                    g += w * (vals[sub | bi | bj] - vals[sub | bi] - vals[sub | bj] + vals[sub]);
                    if (sub == 0) break;
                    sub = (sub - 1) & comp;
                }
                im.gamma(i, j) = g;
                im.gamma(j, i) = g;
            }
        }
    }
    return im;
}

struct SiiMcResult {
    InteractionMatrix matrix;
    Mat std_error;          // per-entry standard error of the mean
    std::size_t n_samples = 0;
};

/// Permutation-sampled SII. For pair (i,j), each draw shuffles the other
/// d-2 players plus one slot marker and takes S = the prefix before the
/// marker; P(S) then equals the SII weight |S|!(d-|S|-2)!/(d-1)! exactly, so
/// averaging the bracketed second difference is unbiased. The diagonal gets
/// the analogous prefix estimator of the plain Shapley value. Seeds derive
/// per (entry, draw), so parallel schedule cannot change results.
inline SiiMcResult sii_monte_carlo_stats(const CoalitionGame& game, std::size_t n_samples,
                                         std::uint64_t seed) {
    if (n_samples == 0) throw input_error("sii_monte_carlo: n_samples must be >= 1");
    std::size_t d = game.dim();
    const Vec& x = game.x();
    const Vec& xp = game.x_prime();
    const DenseNetwork& net = game.net();

    SiiMcResult res;
    res.n_samples = n_samples;
    res.matrix.gamma = Mat(d, d);
    res.std_error = Mat(d, d);
    res.matrix.reference_output = net.forward(xp);
    res.matrix.input_output = net.forward(x);
    res.matrix.x = x;
    res.matrix.baseline = detail::single_baseline_info(xp);
    res.matrix.method = "sii-mc";

    // One job per matrix entry: pairs (i<j) and diagonal players.
    struct Job {
        std::size_t i, j;  // i == j marks a diagonal job
    };
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) jobs.push_back({i, j});

    std::size_t n_chunks = fixed_chunk_count(jobs.size());
    parallel_for_chunks(n_chunks, [&](std::size_t c) {
        auto [begin, end] = chunk_range(jobs.size(), n_chunks, c);
        Vec z(d);
        std::vector<std::size_t> order;
        for (std::size_t jb = begin; jb < end; ++jb) {
            auto [i, j] = jobs[jb];
            bool diag = (i == j);
            const std::size_t marker = d;  // sentinel separating S from the rest
            order.clear();
            for (std::size_t p = 0; p < d; ++p)
                if (p != i && p != j) order.push_back(p);
            order.push_back(marker);

            double mean = 0.0, m2 = 0.0;
            for (std::size_t s = 0; s < n_samples; ++s) {
                std::mt19937_64 eng(derive_seed(seed, i * d + j, s));
                std::shuffle(order.begin(), order.end(), eng);
                z = xp;
                for (std::size_t p : order) {
                    if (p == marker) break;
                    z[p] = x[p];
                }
                double sample;
                if (diag) {
                    double v_s = net.forward(z);
                    z[i] = x[i];
                    double v_si = net.forward(z);
                    sample = v_si - v_s;
                } else {
                    double v_s = net.forward(z);
                    z[i] = x[i];
                    double v_si = net.forward(z);
                    z[i] = xp[i];
                    z[j] = x[j];
                    double v_sj = net.forward(z);
                    z[i] = x[i];
                    double v_sij = net.forward(z);
                    sample = v_sij - v_si - v_sj + v_s;
                }
                double delta = sample - mean;
                mean += delta / double(s + 1);
                m2 += delta * (sample - mean);
            }
            double var = n_samples > 1 ? m2 / double(n_samples - 1) : 0.0;
            double se = std::sqrt(var / double(n_samples));
            res.matrix.gamma(i, j) = mean;
            res.matrix.gamma(j, i) = mean;
            res.std_error(i, j) = se;
            res.std_error(j, i) = se;
        }
    });
    return res;
}

inline InteractionMatrix sii_monte_carlo(const CoalitionGame& game, std::size_t n_samples,
                                         std::uint64_t seed) {
    return sii_monte_carlo_stats(game, n_samples, seed).matrix;
}

// -- Neural Interaction Detection ---------------------------------------------

enum class NidAggregation { min, mean };

struct PairStrength {
    std::size_t i = 0, j = 0;  // i < j
    double strength = 0.0;
};

/// Global interaction ranking from weights alone: the influence z_h of each
/// first-hidden unit is the product of absolute weight matrices from the
/// output back to that unit, and a pair's strength aggregates the unit's two
/// incoming absolute weights (min by default) times z_h. Per-sample inputs
/// never enter, so the ranking is global by construction.
inline std::vector<PairStrength> neural_interaction_detection(
    const DenseNetwork& net, NidAggregation agg = NidAggregation::min) {
    if (net.n_layers() < 2)
        throw contract_error("neural_interaction_detection needs at least one hidden layer "
                             "(first-layer weights plus a downstream path to the output)");
    // Propagate absolute influence from the selected output down to the
    // first hidden layer: r <- |W_l|^T r for l = L-1 .. 1.
    std::size_t L = net.n_layers();
    const Mat& w_last = net.layer(L - 1).weights;
    Vec r(w_last.cols);
    for (std::size_t c = 0; c < w_last.cols; ++c)
        r[c] = std::abs(w_last(net.output_index(), c));
    for (std::size_t l = L - 1; l-- > 1;) {
        const Mat& w = net.layer(l).weights;
        Vec next(w.cols, 0.0);
        for (std::size_t row = 0; row < w.rows; ++row)
            for (std::size_t c = 0; c < w.cols; ++c) next[c] += std::abs(w(row, c)) * r[row];
        r = std::move(next);
    }

    const Mat& w1 = net.layer(0).weights;
    std::size_t d = w1.cols;
    std::vector<PairStrength> out;
    out.reserve(d * (d - 1) / 2);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            double s = 0.0;
            for (std::size_t h = 0; h < w1.rows; ++h) {
                double wi = std::abs(w1(h, i)), wj = std::abs(w1(h, j));
                double a = agg == NidAggregation::min ? std::min(wi, wj) : 0.5 * (wi + wj);
                s += a * r[h];
            }
            out.push_back({i, j, s});
        }
    }
    std::sort(out.begin(), out.end(), [](const PairStrength& a, const PairStrength& b) {
        if (a.strength != b.strength) return a.strength > b.strength;
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    return out;
}

/// NID strengths reshaped to the shared matrix format (symmetric, zero
/// diagonal) so artifacts serialize uniformly across methods.
inline InteractionMatrix nid_matrix(const DenseNetwork& net,
                                    NidAggregation agg = NidAggregation::min) {
    auto ranked = neural_interaction_detection(net, agg);
    std::size_t d = net.input_dim();
    InteractionMatrix im;
    im.gamma = Mat(d, d);
    for (const auto& p : ranked) {
        im.gamma(p.i, p.j) = p.strength;
        im.gamma(p.j, p.i) = p.strength;
    }
    im.method = "nid";
    im.x.assign(d, 0.0);
    im.baseline = detail::single_baseline_info(Vec(d, 0.0));
    return im;
}

}  // namespace pathexplain
