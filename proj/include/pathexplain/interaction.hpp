#pragma once
// Pairwise interaction attributions via double path integrals of the Hessian.
// Off-diagonal entries discretize
//   Gamma_ij = (x_i-x'_i)(x_j-x'_j) * (1/(km)) * sum_{l,p} (l/k)(p/m) *
//              d2f/dx_i dx_j (x' + (lp/(km))(x-x'))
// and the diagonal adds the first-order term (x_i-x'_i)*(1/(km)) * sum_{l,p}
// df/dx_i at the same grid. All (l,p) cells with the same product l*p share
// one path point, so each distinct t gets one Hessian + gradient evaluation
// (roughly half the raw k*m count when k = m).

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pathexplain/attribution.hpp"

namespace pathexplain {

struct InteractionMatrix {
    Mat gamma;                      // d x d, main effects on the diagonal
    double reference_output = 0.0;  // f(x') or mean f over sampled baselines
    double input_output = 0.0;      // f(x)
    Vec x;                          // explained input (echoed into CSV)
    BaselineInfo baseline;
    std::size_t k = 0, m = 0;       // effective quadrature echo (0 = no path grid)
    QuadScheme scheme = QuadScheme::right_endpoint;
    std::string method = "ih";      // tag carried into CSV/JSON artifacts
    std::size_t n_path_evals = 0;   // distinct path points actually evaluated
};

/// |sum_ij Gamma_ij - (f(x) - reference)| — the second-order completeness gap.
inline double interaction_completeness_residual(const InteractionMatrix& im) {
    return std::abs(sum(im.gamma) - (im.input_output - im.reference_output));
}

namespace detail {

/// Distinct path positions t for the (l,p) product grid, with multiplicities.
struct PairGrid {
    std::vector<double> t;      // ascending distinct positions; weight alpha*beta == t
    std::vector<double> count;  // number of (l,p) cells mapping to each t
};

inline PairGrid build_pair_grid(const QuadratureSpec& quad) {
    std::size_t k = quad.k, m = quad.m;
    PairGrid grid;
    if (quad.scheme == QuadScheme::right_endpoint) {
        // t = l*p/(k*m): group by the integer product l*p.
        std::vector<std::uint32_t> cnt(k * m + 1, 0);
        for (std::size_t l = 1; l <= k; ++l)
            for (std::size_t p = 1; p <= m; ++p) ++cnt[l * p];
        double denom = double(k) * double(m);
        for (std::size_t n = 1; n <= k * m; ++n)
            if (cnt[n]) {
                grid.t.push_back(double(n) / denom);
                grid.count.push_back(double(cnt[n]));
            }
    } else {
        // midpoint: alpha = (2l-1)/(2k), beta = (2p-1)/(2m);
        // t = q/(4km) with odd q = (2l-1)(2p-1).
        std::vector<std::uint32_t> cnt((2 * k - 1) * (2 * m - 1) + 1, 0);
        for (std::size_t l = 1; l <= k; ++l)
            for (std::size_t p = 1; p <= m; ++p) ++cnt[(2 * l - 1) * (2 * p - 1)];
        double denom = 4.0 * double(k) * double(m);
        for (std::size_t q = 1; q < cnt.size(); ++q)
            if (cnt[q]) {
                grid.t.push_back(double(q) / denom);
                grid.count.push_back(double(cnt[q]));
            }
    }
    return grid;
}

inline void check_pair_budget(const QuadratureSpec& quad, const char* op) {
    // multiply in unsigned 64-bit to survive absurd requests
    unsigned long long raw = 1ULL * quad.k * quad.m;
    if (raw > quad.max_path_points)
        throw contract_error(std::string(op) + ": path-point budget exceeded (k*m = " +
                             std::to_string(raw) + " > cap " +
                             std::to_string(quad.max_path_points) +
                             "); lower k/m or raise max_path_points");
}

}  // namespace detail

/// Integrated Hessians against a single baseline. Requires every activation
/// to be twice differentiable (run softplus_surgery on ReLU nets first).
inline InteractionMatrix integrated_hessians(const DenseNetwork& net, const Vec& x,
                                             const BaselinePolicy& baseline,
                                             const QuadratureSpec& quad) {
    quad.validate();
    net.require_twice_differentiable("integrated_hessians");
    std::size_t d = net.input_dim();
    if (x.size() != d) throw input_error("input size mismatch in integrated_hessians");
    detail::check_single(baseline, d);
    detail::check_pair_budget(quad, "integrated_hessians");
    const Vec& xp = baseline.x_prime;

    Vec v(d);
    for (std::size_t i = 0; i < d; ++i) v[i] = x[i] - xp[i];

    InteractionMatrix im;
    im.gamma = Mat(d, d);
    im.reference_output = net.forward(xp);
    im.input_output = net.forward(x);
    im.x = x;
    im.baseline = detail::single_baseline_info(xp);
    im.k = quad.k;
    im.m = quad.m;
    im.scheme = quad.scheme;
    im.method = "ih";

    if (max_abs(v) == 0.0) return im;  // both difference factors vanish everywhere

    detail::PairGrid grid = detail::build_pair_grid(quad);
    im.n_path_evals = grid.t.size();
    std::size_t n_chunks = fixed_chunk_count(grid.t.size());
    struct Part {
        Mat h;   // sum of count * t * Hessian
        Vec g;   // sum of count * gradient
    };
    std::vector<Part> partial(n_chunks);
    parallel_for_chunks(n_chunks, [&](std::size_t c) {
        auto [begin, end] = chunk_range(grid.t.size(), n_chunks, c);
        Part& part = partial[c];
        part.h = Mat(d, d);
        part.g.assign(d, 0.0);
        Vec point(d);
        for (std::size_t idx = begin; idx < end; ++idx) {
            double t = grid.t[idx], cnt = grid.count[idx];
            for (std::size_t i = 0; i < d; ++i) point[i] = xp[i] + t * v[i];
            EvalTape tape = net.make_tape(point);
            Mat h = net.hessian_with_tape(tape);
            Vec g = net.gradient_with_tape(tape);
            double w = cnt * t;
            for (std::size_t e = 0; e < h.data.size(); ++e) part.h.data[e] += w * h.data[e];
            for (std::size_t i = 0; i < d; ++i) part.g[i] += cnt * g[i];
        }
    });

    Mat hsum(d, d);
    Vec gsum(d, 0.0);
    for (std::size_t c = 0; c < n_chunks; ++c) {
        if (partial[c].h.data.empty()) continue;
        for (std::size_t e = 0; e < hsum.data.size(); ++e) hsum.data[e] += partial[c].h.data[e];
        for (std::size_t i = 0; i < d; ++i) gsum[i] += partial[c].g[i];
    }
    double inv_km = 1.0 / (double(quad.k) * double(quad.m));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) im.gamma(i, j) = v[i] * v[j] * hsum(i, j) * inv_km;
    for (std::size_t i = 0; i < d; ++i) im.gamma(i, i) += v[i] * gsum[i] * inv_km;
    return im;
}

/// Total interaction mass and completeness gap computed without materializing
/// the d x d matrix: sum_ij Gamma_ij collapses to v'(H v) contractions, one
/// Hessian-vector product and one gradient per distinct path point. Agrees
/// with summing integrated_hessians' matrix to float precision.
struct CompletenessProbe {
    double sum_gamma = 0.0;
    double delta_f = 0.0;  // f(x) - f(x')
    double residual() const { return std::abs(sum_gamma - delta_f); }
    double relative_residual() const { return residual() / std::abs(delta_f); }
};

inline CompletenessProbe ih_completeness_probe(const DenseNetwork& net, const Vec& x,
                                               const BaselinePolicy& baseline,
                                               const QuadratureSpec& quad) {
    quad.validate();
    net.require_twice_differentiable("ih_completeness_probe");
    std::size_t d = net.input_dim();
    if (x.size() != d) throw input_error("input size mismatch in ih_completeness_probe");
    detail::check_single(baseline, d);
    detail::check_pair_budget(quad, "ih_completeness_probe");
    const Vec& xp = baseline.x_prime;

    Vec v(d);
    for (std::size_t i = 0; i < d; ++i) v[i] = x[i] - xp[i];

    CompletenessProbe probe;
    probe.delta_f = net.forward(x) - net.forward(xp);
    if (max_abs(v) == 0.0) return probe;

    detail::PairGrid grid = detail::build_pair_grid(quad);
    std::size_t n_chunks = fixed_chunk_count(grid.t.size());
    std::vector<double> partial(n_chunks, 0.0);
    parallel_for_chunks(n_chunks, [&](std::size_t c) {
        auto [begin, end] = chunk_range(grid.t.size(), n_chunks, c);
        Vec point(d);
        double acc = 0.0;
        for (std::size_t idx = begin; idx < end; ++idx) {
            double t = grid.t[idx], cnt = grid.count[idx];
            for (std::size_t i = 0; i < d; ++i) point[i] = xp[i] + t * v[i];
            EvalTape tape = net.make_tape(point);
            Vec hv = net.hvp_with_tape(tape, v);
            Vec g = net.gradient_with_tape(tape);
            acc += cnt * (t * dot(v, hv) + dot(g, v));
        }
        partial[c] = acc;
    });
    double total = 0.0;
    for (double p : partial) total += p;
    probe.sum_gamma = total / (double(quad.k) * double(quad.m));
    return probe;
}

/// Expected Hessians: Monte-Carlo over draws (x' ~ background, alpha, beta ~
/// U(0,1) independently); each draw evaluates the Hessian and gradient at
/// x' + alpha*beta*(x - x') and weights the second-order part by alpha*beta.
inline InteractionMatrix expected_hessians(const DenseNetwork& net, const Vec& x,
                                           const BaselinePolicy& baseline,
                                           const QuadratureSpec& quad) {
    quad.validate();
    net.require_twice_differentiable("expected_hessians");
    std::size_t d = net.input_dim();
    if (x.size() != d) throw input_error("input size mismatch in expected_hessians");
    auto pool = detail::background_pool(baseline);
    const Mat& bg = *baseline.background;
    if (bg.cols != d) throw input_error("background dataset feature count mismatch");

    std::size_t n = quad.n_path_samples;
    std::size_t n_chunks = fixed_chunk_count(n);
    struct Part {
        Mat gamma;
        Vec base_mean;
        double ref = 0.0;
    };
    std::vector<Part> partial(n_chunks);
    parallel_for_chunks(n_chunks, [&](std::size_t c) {
        auto [begin, end] = chunk_range(n, n_chunks, c);
        Part& part = partial[c];
        part.gamma = Mat(d, d);
        part.base_mean.assign(d, 0.0);
        Vec point(d), v(d);
        for (std::size_t s = begin; s < end; ++s) {
            std::mt19937_64 eng(derive_seed(quad.seed, 0xe881ULL, s));
            std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            const double* row = bg.row(pool[pick(eng)]);
            double alpha = unit(eng), beta = unit(eng);
            double t = alpha * beta;
            for (std::size_t i = 0; i < d; ++i) {
                v[i] = x[i] - row[i];
                point[i] = row[i] + t * v[i];
                part.base_mean[i] += row[i];
            }
            EvalTape tape = net.make_tape(point);
            Mat h = net.hessian_with_tape(tape);
            Vec g = net.gradient_with_tape(tape);
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j)
                    part.gamma(i, j) += v[i] * v[j] * t * h(i, j);
            for (std::size_t i = 0; i < d; ++i) part.gamma(i, i) += v[i] * g[i];
            part.ref += net.forward(Vec(row, row + d));
        }
    });

    InteractionMatrix im;
    im.gamma = Mat(d, d);
    Vec base_mean(d, 0.0);
    double ref = 0.0;
    for (std::size_t c = 0; c < n_chunks; ++c) {
        if (partial[c].gamma.data.empty()) continue;
        for (std::size_t e = 0; e < im.gamma.data.size(); ++e)
            im.gamma.data[e] += partial[c].gamma.data[e];
        for (std::size_t i = 0; i < d; ++i) base_mean[i] += partial[c].base_mean[i];
        ref += partial[c].ref;
    }
    for (double& e : im.gamma.data) e /= double(n);
    for (double& b : base_mean) b /= double(n);
    im.reference_output = ref / double(n);
    im.input_output = net.forward(x);
    im.x = x;
    im.baseline.kind = BaselineKind::background;
    im.baseline.x_prime = std::move(base_mean);
    im.baseline.n_samples = pool.size();
    im.baseline.seed = baseline.seed;
    im.baseline.content_hash = detail::background_hash(bg, pool);
    im.method = "eh";
    im.n_path_evals = n;
    return im;
}

/// |Gamma_ii - (phi_i - sum_{j != i} Gamma_ij)|: how far the diagonal is from
/// the main effect implied by the first-order attribution. Vanishes as the
/// quadrature densifies. Both results must share the same input and baseline.
inline double main_effect_residual(const InteractionMatrix& im, const AttributionVector& attr,
                                   std::size_t i) {
    std::size_t d = im.gamma.rows;
    if (i >= d) throw input_error("main_effect_residual: feature index out of range");
    if (attr.values.size() != d)
        throw input_error("main_effect_residual: attribution dimension mismatch");
    if (!(im.baseline == attr.baseline))
        throw contract_error(
            "main_effect_residual: baseline mismatch between interaction matrix and "
            "attribution vector; recompute both against the same baseline");
    if (im.x != attr.x)
        throw contract_error("main_effect_residual: results were computed at different inputs");
    double cross = 0.0;
    for (std::size_t j = 0; j < d; ++j)
        if (j != i) cross += im.gamma(i, j);
    return std::abs(im.gamma(i, i) - (attr.values[i] - cross));
}

}  // namespace pathexplain
