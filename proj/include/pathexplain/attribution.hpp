#pragma once
// First-order path attributions. integrated_gradients discretizes the
// straight-line path integral phi_i = (x_i - x'_i) * Int_0^1 df/dx_i dt with a
// right-endpoint sum over l = 1..k (midpoint selectable); expected_gradients
// replaces the single baseline with seeded Monte-Carlo draws from a
// background dataset paired with uniform path positions.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>
#include <vector>

#include "pathexplain/network.hpp"

namespace pathexplain {

enum class QuadScheme { right_endpoint, midpoint };

struct QuadratureSpec {
    std::size_t k = 128;  // outer interpolation count
    std::size_t m = 128;  // inner count (second-order methods only)
    std::size_t n_path_samples = 200;  // expectation variants: Monte-Carlo draws
    std::uint64_t seed = 0;            // expectation variants
    QuadScheme scheme = QuadScheme::right_endpoint;
    std::size_t max_path_points = std::size_t(1) << 24;  // k*m budget cap

    /// Rounds a requested path-point budget up to the next perfect square
    /// and returns a spec with k = m = sqrt(budget'); the effective k is
    /// echoed by every result that uses the spec.
    static QuadratureSpec square_budget(std::size_t budget) {
        if (budget == 0) throw input_error("quadrature budget must be positive");
        std::size_t s = static_cast<std::size_t>(std::sqrt(double(budget)));
        while (s * s < budget) ++s;
        QuadratureSpec q;
        q.k = s;
        q.m = s;
        return q;
    }

    void validate() const {
        if (k == 0 || m == 0) throw input_error("quadrature counts k and m must be >= 1");
        if (n_path_samples == 0) throw input_error("n_path_samples must be >= 1");
    }

    double alpha(std::size_t l, std::size_t count) const {
        return scheme == QuadScheme::right_endpoint ? double(l) / double(count)
                                                    : (double(l) - 0.5) / double(count);
    }
};

enum class BaselineKind { single, background };

/// Where attributions measure "absence" from: one explicit baseline vector,
/// or a background dataset sampled with a seed.
struct BaselinePolicy {
    BaselineKind kind = BaselineKind::single;
    Vec x_prime;                       // single
    const Mat* background = nullptr;   // background (non-owning)
    std::size_t n_samples = 0;         // background pool size; 0 = whole dataset
    std::uint64_t seed = 0;

    static BaselinePolicy single(Vec xp) {
        BaselinePolicy p;
        p.kind = BaselineKind::single;
        p.x_prime = std::move(xp);
        return p;
    }

    /// Borrows `data` (no copy): the matrix must outlive every attribution
    /// call made with the returned policy.
    static BaselinePolicy background_of(const Mat& data, std::size_t n_samples = 0,
                                        std::uint64_t seed = 0) {
        BaselinePolicy p;
        p.kind = BaselineKind::background;
        p.background = &data;
        p.n_samples = n_samples;
        p.seed = seed;
        return p;
    }
};

/// Descriptor of the baseline a result was computed against; stored on every
/// attribution/interaction result so downstream combinations can verify they
/// share a baseline. For background baselines x_prime holds the mean of the
/// sampled baselines (the value reported in CSV output).
struct BaselineInfo {
    BaselineKind kind = BaselineKind::single;
    Vec x_prime;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
    std::uint64_t content_hash = 0;

    friend bool operator==(const BaselineInfo&, const BaselineInfo&) = default;
};

namespace detail {

inline std::uint64_t hash_doubles(std::uint64_t h, const double* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(double));
        std::memcpy(&bits, &p[i], sizeof(bits));
        h = splitmix64(h ^ bits);
    }
    return h;
}

inline BaselineInfo single_baseline_info(const Vec& xp) {
    BaselineInfo b;
    b.kind = BaselineKind::single;
    b.x_prime = xp;
    b.content_hash = hash_doubles(0x5ba5e11eULL, xp.data(), xp.size());
    return b;
}

inline void check_single(const BaselinePolicy& p, std::size_t d) {
    if (p.kind != BaselineKind::single)
        throw input_error("this method requires a single-baseline policy");
    if (p.x_prime.size() != d)
        throw input_error("baseline has " + std::to_string(p.x_prime.size()) +
                          " features, expected " + std::to_string(d));
}

/// Resolves a background policy to a pool of row indices (without
/// replacement when a subset is requested).
inline std::vector<std::size_t> background_pool(const BaselinePolicy& p) {
    if (p.kind != BaselineKind::background || p.background == nullptr)
        throw input_error("this method requires a background-baseline policy");
    const Mat& bg = *p.background;
    if (bg.rows == 0) throw input_error("background dataset is empty");
    std::size_t want = p.n_samples == 0 ? bg.rows : p.n_samples;
    if (want > bg.rows)
        throw input_error("background n_samples exceeds dataset size for sampling without replacement");
    std::vector<std::size_t> pool(bg.rows);
    for (std::size_t i = 0; i < bg.rows; ++i) pool[i] = i;
    if (want < bg.rows) {
        std::mt19937_64 eng(derive_seed(p.seed, 0xb005ULL));
        std::shuffle(pool.begin(), pool.end(), eng);
        pool.resize(want);
    }
    return pool;
}

inline std::uint64_t background_hash(const Mat& bg, const std::vector<std::size_t>& pool) {
    std::uint64_t h = splitmix64(0xbac49024ULL ^ bg.cols);
    for (std::size_t r : pool) h = hash_doubles(h, bg.row(r), bg.cols);
    return h;
}

}  // namespace detail

struct AttributionVector {
    Vec values;                    // phi_i per feature
    double reference_output = 0.0; // f(x') or mean f over sampled baselines
    double input_output = 0.0;     // f(x)
    Vec x;                         // explained input (echoed into CSV)
    BaselineInfo baseline;
    std::size_t k = 0;             // effective interpolation count (0 = no path grid)
    QuadScheme scheme = QuadScheme::right_endpoint;
};

/// |sum_i phi_i - (f(x) - reference)| — zero in the limit of dense quadrature.
inline double completeness_residual(const AttributionVector& attr) {
    return std::abs(sum(attr.values) - (attr.input_output - attr.reference_output));
}

/// Discrete path integral of the gradient from x' to x, scaled by (x - x').
/// Works for any activations: only first derivatives are evaluated.
inline AttributionVector integrated_gradients(const DenseNetwork& net, const Vec& x,
                                              const BaselinePolicy& baseline,
                                              const QuadratureSpec& quad) {
    quad.validate();
    std::size_t d = net.input_dim();
    if (x.size() != d) throw input_error("input size mismatch in integrated_gradients");
    detail::check_single(baseline, d);
    const Vec& xp = baseline.x_prime;

    std::size_t n_chunks = fixed_chunk_count(quad.k);
    std::vector<Vec> partial(n_chunks, Vec(d, 0.0));
    parallel_for_chunks(n_chunks, [&](std::size_t c) {
        auto [begin, end] = chunk_range(quad.k, n_chunks, c);
        Vec point(d);
        for (std::size_t l = begin + 1; l <= end; ++l) {  // l is 1-based
            double a = quad.alpha(l, quad.k);
            for (std::size_t i = 0; i < d; ++i) point[i] = xp[i] + a * (x[i] - xp[i]);
            Vec g = net.gradient(point);
            for (std::size_t i = 0; i < d; ++i) partial[c][i] += g[i];
        }
    });

    AttributionVector attr;
    attr.values.assign(d, 0.0);
    for (std::size_t c = 0; c < n_chunks; ++c)
        for (std::size_t i = 0; i < d; ++i) attr.values[i] += partial[c][i];
    for (std::size_t i = 0; i < d; ++i) attr.values[i] *= (x[i] - xp[i]) / double(quad.k);
    attr.reference_output = net.forward(xp);
    attr.input_output = net.forward(x);
    attr.x = x;
    attr.baseline = detail::single_baseline_info(xp);
    attr.k = quad.k;
    attr.scheme = quad.scheme;
    return attr;
}

/// Monte-Carlo attribution: each draw pairs one background row (with
/// replacement) with one independent alpha ~ U(0,1); the per-draw seed is
/// derived from (quad.seed, draw index), so any parallel schedule and thread
/// count produces identical results.
inline AttributionVector expected_gradients(const DenseNetwork& net, const Vec& x,
                                            const BaselinePolicy& baseline,
                                            const QuadratureSpec& quad) {
    quad.validate();
    std::size_t d = net.input_dim();
    if (x.size() != d) throw input_error("input size mismatch in expected_gradients");
    auto pool = detail::background_pool(baseline);
    const Mat& bg = *baseline.background;
    if (bg.cols != d) throw input_error("background dataset feature count mismatch");

    std::size_t n = quad.n_path_samples;
    std::size_t n_chunks = fixed_chunk_count(n);
    struct Part {
        Vec phi, base_mean;
        double ref = 0.0;
    };
    std::vector<Part> partial(n_chunks);
    for (auto& p : partial) {
        p.phi.assign(d, 0.0);
        p.base_mean.assign(d, 0.0);
    }
    parallel_for_chunks(n_chunks, [&](std::size_t c) {
        auto [begin, end] = chunk_range(n, n_chunks, c);
        Vec point(d), xp(d);
        for (std::size_t s = begin; s < end; ++s) {
            std::mt19937_64 eng(derive_seed(quad.seed, 0xe6d4ULL, s));
            std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            const double* row = bg.row(pool[pick(eng)]);
            double a = unit(eng);
            for (std::size_t i = 0; i < d; ++i) {
                xp[i] = row[i];
                point[i] = xp[i] + a * (x[i] - xp[i]);
            }
            Vec g = net.gradient(point);
            for (std::size_t i = 0; i < d; ++i) {
                partial[c].phi[i] += (x[i] - xp[i]) * g[i];
                partial[c].base_mean[i] += xp[i];
            }
            partial[c].ref += net.forward(xp);
        }
    });

    AttributionVector attr;
    attr.values.assign(d, 0.0);
    Vec base_mean(d, 0.0);
    double ref = 0.0;
    for (std::size_t c = 0; c < n_chunks; ++c) {
        for (std::size_t i = 0; i < d; ++i) {
            attr.values[i] += partial[c].phi[i];
            base_mean[i] += partial[c].base_mean[i];
        }
        ref += partial[c].ref;
    }
    for (std::size_t i = 0; i < d; ++i) {
        attr.values[i] /= double(n);
        base_mean[i] /= double(n);
    }
    attr.reference_output = ref / double(n);
    attr.input_output = net.forward(x);
    attr.x = x;
    attr.baseline.kind = BaselineKind::background;
    attr.baseline.x_prime = std::move(base_mean);
    attr.baseline.n_samples = pool.size();
    attr.baseline.seed = baseline.seed;
    attr.baseline.content_hash = detail::background_hash(bg, pool);
    attr.k = n;  // Monte-Carlo draw count: the effective path-sample count
    attr.scheme = quad.scheme;
    return attr;
}

}  // namespace pathexplain
