#pragma once
// Synthetic-data generators and evaluation protocols:
//   - additive pairwise-interaction regression tasks (five interaction shapes)
//   - label ablation + remove-and-retrain curves with AUC comparison
//   - the two rank-correlation tasks with exact per-sample ground truth
//   - sanity randomization checks, quadrature convergence study,
//     XOR demonstration, and a wall-clock timing harness.
// Every stochastic step derives its seed from explicit inputs, so identical
// calls reproduce identical artifacts on any thread count.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "pathexplain/model_io.hpp"
#include "pathexplain/rivals.hpp"
#include "pathexplain/train.hpp"

namespace pathexplain {

// -- rank statistics -----------------------------------------------------------

/// Ranks with ties averaged (1-based).
inline Vec average_ranks(const Vec& v) {
    std::size_t n = v.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    Vec ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
        double avg = 0.5 * (double(i) + double(j)) + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = avg;
        i = j + 1;
    }
    return ranks;
}

/// Spearman rank correlation (tie-aware). Returns 0 when either input is
/// constant (correlation undefined).
inline double spearman(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw input_error("spearman: size mismatch");
    if (a.size() < 2) throw input_error("spearman: need at least 2 observations");
    Vec ra = average_ranks(a), rb = average_ranks(b);
    double ma = sum(ra) / double(ra.size()), mb = sum(rb) / double(rb.size());
    double num = 0.0, da = 0.0, db = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        double xa = ra[i] - ma, xb = rb[i] - mb;
        num += xa * xb;
        da += xa * xa;
        db += xb * xb;
    }
    if (da == 0.0 || db == 0.0) return 0.0;
    return num / std::sqrt(da * db);
}

// -- synthetic interaction tasks ------------------------------------------------

enum class InteractionKind { tanhsum, cossum, multiply, maximum, minimum };

inline const char* g_kind_name(InteractionKind k) {
    switch (k) {
        case InteractionKind::tanhsum: return "tanhsum";
        case InteractionKind::cossum: return "cossum";
        case InteractionKind::multiply: return "multiply";
        case InteractionKind::maximum: return "maximum";
        case InteractionKind::minimum: return "minimum";
    }
    return "?";
}

inline InteractionKind g_kind_from_name(const std::string& s) {
    if (s == "tanhsum") return InteractionKind::tanhsum;
    if (s == "cossum") return InteractionKind::cossum;
    if (s == "multiply") return InteractionKind::multiply;
    if (s == "maximum") return InteractionKind::maximum;
    if (s == "minimum") return InteractionKind::minimum;
    throw input_error("unknown interaction kind: '" + s + "'");
}

inline double eval_g(InteractionKind k, double a, double b) {
    switch (k) {
        case InteractionKind::tanhsum: return std::tanh(a + b);
        case InteractionKind::cossum: return std::cos(a + b);
        case InteractionKind::multiply: return a * b;
        case InteractionKind::maximum: return std::max(a, b);
        case InteractionKind::minimum: return std::min(a, b);
    }
    return 0.0;
}

struct PairTerm {
    std::size_t i = 0, j = 0;  // i < j
    double alpha = 0.0;        // coefficient (normalized to sum 1 in SyntheticTask)
};

/// y = sum_t alpha_t * g(x_{t.i}, x_{t.j}) on i.i.d. standard-normal features.
struct SyntheticTask {
    std::size_t d = 0;
    std::vector<PairTerm> pairs;
    InteractionKind g_kind = InteractionKind::tanhsum;
    Mat xs;
    Vec ys;
    std::uint64_t seed = 0;

    /// Recomputes a sample's label from xs and the pair terms (exact).
    double label_of_row(std::size_t r) const {
        double y = 0.0;
        for (const PairTerm& p : pairs) y += p.alpha * eval_g(g_kind, xs(r, p.i), xs(r, p.j));
        return y;
    }
};

namespace detail {

inline Mat random_normal(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Mat m(rows, cols);
    std::mt19937_64 eng(seed);
    std::normal_distribution<double> n01(0.0, 1.0);
    for (double& v : m.data) v = n01(eng);
    return m;
}

inline std::vector<std::pair<std::size_t, std::size_t>> all_pairs(std::size_t d) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) out.emplace_back(i, j);
    return out;
}

inline Mat take_rows(const Mat& m, const std::vector<std::size_t>& rows) {
    Mat out(rows.size(), m.cols);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < m.cols; ++c) out(r, c) = m(rows[r], c);
    return out;
}

inline Vec take(const Vec& v, const std::vector<std::size_t>& rows) {
    Vec out(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) out[r] = v[rows[r]];
    return out;
}

/// Seeded disjoint train/holdout row-index split.
struct Split {
    std::vector<std::size_t> train, holdout;
};

inline Split train_holdout_split(std::size_t n, double holdout_fraction, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 eng(derive_seed(seed, 0x59711ULL));
    std::shuffle(idx.begin(), idx.end(), eng);
    std::size_t n_holdout = static_cast<std::size_t>(std::llround(double(n) * holdout_fraction));
    if (n_holdout >= n) n_holdout = n - 1;
    Split s;
    s.holdout.assign(idx.begin(), idx.begin() + n_holdout);
    s.train.assign(idx.begin() + n_holdout, idx.end());
    return s;
}

}  // namespace detail

/// Additive pairwise-interaction regression task: n_pairs distinct feature
/// pairs drawn without replacement, coefficients uniform(0,1) normalized to
/// sum 1, features i.i.d. N(0,1), labels exact.
inline SyntheticTask gen_interaction_task(std::uint64_t seed, std::size_t d, std::size_t n_pairs,
                                          InteractionKind g_kind, std::size_t n_samples) {
    if (d < 2) throw input_error("gen_interaction_task: need at least 2 features");
    if (n_samples == 0) throw input_error("gen_interaction_task: need at least 1 sample");
    std::size_t max_pairs = d * (d - 1) / 2;
    if (n_pairs == 0 || n_pairs > max_pairs)
        throw input_error("gen_interaction_task: n_pairs must be in [1, " +
                          std::to_string(max_pairs) + "] for d = " + std::to_string(d));

    SyntheticTask task;
    task.d = d;
    task.g_kind = g_kind;
    task.seed = seed;

    auto pairs = detail::all_pairs(d);
    std::mt19937_64 pair_eng(derive_seed(seed, 0x9a175ULL));
    std::shuffle(pairs.begin(), pairs.end(), pair_eng);
    pairs.resize(n_pairs);
    std::sort(pairs.begin(), pairs.end());

    std::mt19937_64 coef_eng(derive_seed(seed, 0xc0efULL));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double total = 0.0;
    for (auto [i, j] : pairs) {
        double a = unit(coef_eng);
        task.pairs.push_back({i, j, a});
        total += a;
    }
    for (PairTerm& p : task.pairs) p.alpha /= total;

    task.xs = detail::random_normal(n_samples, d, derive_seed(seed, 0xda7aULL));
    task.ys.resize(n_samples);
    for (std::size_t r = 0; r < n_samples; ++r) task.ys[r] = task.label_of_row(r);
    return task;
}

/// Labels with the top n_ablate listed interaction terms multiplied by
/// independent per-sample standard-normal noise. Noise streams are keyed by
/// the pair's identity in the task (not its rank position), so ablating the
/// same pair injects the same noise regardless of which method ranked it or
/// where. With unit_noise the factor is forced to 1 (labels unchanged).
inline Vec ablate_interactions(const SyntheticTask& task,
                               const std::vector<std::pair<std::size_t, std::size_t>>& ranked_pairs,
                               std::size_t n_ablate, std::uint64_t noise_seed,
                               bool unit_noise = false) {
    if (n_ablate > ranked_pairs.size())
        throw input_error("ablate_interactions: n_ablate exceeds the ranking's length");
    // Resolve the ablated set up front, then apply terms in the task's own
    // pair order: the result is bitwise independent of how the ranking was
    // ordered, so fully-ablated label sets coincide across ranking methods.
    std::vector<bool> ablated(task.pairs.size(), false);
    for (std::size_t r = 0; r < n_ablate; ++r) {
        auto [a, b] = ranked_pairs[r];
        if (a > b) std::swap(a, b);
        std::size_t t = task.pairs.size();
        for (std::size_t p = 0; p < task.pairs.size(); ++p)
            if (task.pairs[p].i == a && task.pairs[p].j == b) {
                t = p;
                break;
            }
        if (t == task.pairs.size())
            throw input_error("ablate_interactions: unknown pair id (" + std::to_string(a) + "," +
                              std::to_string(b) + ") — not one of the task's interaction terms");
        ablated[t] = true;
    }
    Vec ys = task.ys;
    for (std::size_t t = 0; t < task.pairs.size(); ++t) {
        if (!ablated[t]) continue;
        const PairTerm& term = task.pairs[t];
        std::mt19937_64 eng(derive_seed(noise_seed, 0xab1aULL, t));
        std::normal_distribution<double> n01(0.0, 1.0);
        for (std::size_t s = 0; s < ys.size(); ++s) {
            double eps = unit_noise ? 1.0 : n01(eng);
            double g = term.alpha * eval_g(task.g_kind, task.xs(s, term.i), task.xs(s, term.j));
            ys[s] += g * (eps - 1.0);
        }
    }
    return ys;
}

// -- per-sample interaction estimates (shared by the benchmarks) ---------------

enum class RankMethod { ih, eh, input_hessian, nid, sii_exact, sii_mc, random };

inline const char* rank_method_name(RankMethod m) {
    switch (m) {
        case RankMethod::ih: return "ih";
        case RankMethod::eh: return "eh";
        case RankMethod::input_hessian: return "hessian";
        case RankMethod::nid: return "nid";
        case RankMethod::sii_exact: return "sii";
        case RankMethod::sii_mc: return "sii-mc";
        case RankMethod::random: return "random";
    }
    return "?";
}

inline RankMethod rank_method_from_name(const std::string& s) {
    if (s == "ih") return RankMethod::ih;
    if (s == "eh") return RankMethod::eh;
    if (s == "hessian") return RankMethod::input_hessian;
    if (s == "nid") return RankMethod::nid;
    if (s == "sii") return RankMethod::sii_exact;
    if (s == "sii-mc") return RankMethod::sii_mc;
    if (s == "random") return RankMethod::random;
    throw input_error("unknown interaction method: '" + s + "'");
}

struct ExplainOptions {
    QuadratureSpec quad;              // ih/eh path grid; eh draws via n_path_samples
    std::size_t sii_samples = 200;    // sii-mc draws per entry
    std::uint64_t seed = 0;           // sii-mc / eh seeds (derived per sample)
    const Mat* background = nullptr;  // eh only; defaults to the explained rows' source
};

/// Per-sample interaction estimates for the listed feature pairs: one row per
/// explained sample, one column per pair. Baseline is the zeros vector for
/// path methods (features are standardized in every task here). NID and
/// `random` are global rankings and are not per-sample; requesting them is an
/// input error.
inline Mat per_sample_interactions(const DenseNetwork& net, const Mat& xs,
                                   const std::vector<std::size_t>& rows,
                                   const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                   RankMethod method, const ExplainOptions& opts) {
    std::size_t d = net.input_dim();
    if (xs.cols != d) throw input_error("per_sample_interactions: feature count mismatch");
    Mat out(rows.size(), pairs.size());
    Vec zeros(d, 0.0);
    BaselinePolicy zero_base = BaselinePolicy::single(zeros);
    const Mat& bg = opts.background ? *opts.background : xs;

    for (std::size_t r = 0; r < rows.size(); ++r) {
        Vec x(xs.row(rows[r]), xs.row(rows[r]) + d);
        InteractionMatrix im;
        switch (method) {
            case RankMethod::ih:
                im = integrated_hessians(net, x, zero_base, opts.quad);
                break;
            case RankMethod::eh: {
                QuadratureSpec q = opts.quad;
                q.seed = derive_seed(opts.seed, 0xe4aULL, rows[r]);
                im = expected_hessians(net, x, BaselinePolicy::background_of(bg), q);
                break;
            }
            case RankMethod::input_hessian:
                im = input_hessian(net, x);
                break;
            case RankMethod::sii_exact:
                im = sii_exact(CoalitionGame(net, x, zeros));
                break;
            case RankMethod::sii_mc:
                im = sii_monte_carlo(CoalitionGame(net, x, zeros), opts.sii_samples,
                                     derive_seed(opts.seed, 0x51cULL, rows[r]));
                break;
            default:
                throw input_error("per_sample_interactions: method has no per-sample values");
        }
        for (std::size_t p = 0; p < pairs.size(); ++p)
            out(r, p) = im.gamma(pairs[p].first, pairs[p].second);
    }
    return out;
}

/// All feature pairs ranked by a method: per-sample methods use the mean
/// absolute interaction over the explained rows; NID uses its weight-based
/// strengths; `random` is a seeded shuffle.
inline std::vector<std::pair<std::size_t, std::size_t>> rank_all_pairs(
    const DenseNetwork& net, const Mat& xs, const std::vector<std::size_t>& rows,
    RankMethod method, const ExplainOptions& opts) {
    std::size_t d = net.input_dim();
    auto pairs = detail::all_pairs(d);
    if (method == RankMethod::random) {
        std::mt19937_64 eng(derive_seed(opts.seed, 0x4a4dULL));
        std::shuffle(pairs.begin(), pairs.end(), eng);
        return pairs;
    }
    Vec score(pairs.size(), 0.0);
    if (method == RankMethod::nid) {
        auto ranked = neural_interaction_detection(net);
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (const auto& p : ranked) out.emplace_back(p.i, p.j);
        return out;
    }
    Mat vals = per_sample_interactions(net, xs, rows, pairs, method, opts);
    for (std::size_t r = 0; r < vals.rows; ++r)
        for (std::size_t p = 0; p < pairs.size(); ++p) score[p] += std::abs(vals(r, p));
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (score[a] != score[b]) return score[a] > score[b];
        return pairs[a] < pairs[b];
    });
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(pairs.size());
    for (std::size_t o : order) out.push_back(pairs[o]);
    return out;
}

// -- remove-and-retrain ---------------------------------------------------------

struct RoarPoint {
    std::size_t n_ablated = 0;
    double mean_error = 0.0;  // holdout MSE, mean over retrains
    double std_error = 0.0;   // standard error of that mean
};

struct RoarCurve {
    RankMethod method = RankMethod::ih;
    std::vector<RoarPoint> points;
    std::vector<std::pair<std::size_t, std::size_t>> ranking;  // task pairs, best first
};

/// Trapezoidal area under the error-vs-ablation curve.
inline double roar_auc(const RoarCurve& curve) {
    double auc = 0.0;
    for (std::size_t p = 0; p + 1 < curve.points.size(); ++p)
        auc += 0.5 * (curve.points[p].mean_error + curve.points[p + 1].mean_error) *
               double(curve.points[p + 1].n_ablated - curve.points[p].n_ablated);
    return auc;
}

struct RoarOptions {
    std::vector<std::size_t> hidden = {32, 32, 32};  // base/retrain architecture
    Activation hidden_act = Activation(Act::relu);
    std::size_t retrains = 5;
    std::vector<std::size_t> steps;   // ablation counts; default 0,2,..,n_pairs
    double surgery_beta = 10.0;       // for ih / input_hessian on the ReLU base net
    QuadratureSpec quad = [] { QuadratureSpec q; q.k = 16; q.m = 16; return q; }();
    std::size_t n_explain = 256;      // training rows explained for rankings; at
                                      // 128 the mean-magnitude estimate is noisy
                                      // enough to shuffle top-ranked pairs
    std::size_t sii_samples = 64;     // sii-mc draws for ranking
    std::uint64_t noise_seed = 99;
    std::uint64_t seed = 7;           // base-net init + splits + retrain seeds
    double holdout_fraction = 0.2;
};

/// Ranks the task's interactions with `method`, then for each ablation count
/// multiplies the top-ranked terms' label contributions by per-sample noise,
/// retrains from scratch `retrains` times, and records holdout MSE. Pairs the
/// method ranks that are not part of the label are skipped (no-ops); the
/// curve's x axis counts ablated task terms so curves are comparable across
/// methods. Retrain seeds depend only on (seed, n_ablated, retrain index),
/// never on the method, so fully-ablated labels give identical final errors.
inline RoarCurve remove_and_retrain(const SyntheticTask& task, RankMethod method,
                                    const TrainConfig& trainer, const RoarOptions& options) {
    std::size_t d = task.d;
    auto split = detail::train_holdout_split(task.xs.rows, options.holdout_fraction,
                                             derive_seed(options.seed, 0x4011ULL));
    Mat train_xs = detail::take_rows(task.xs, split.train);
    Mat hold_xs = detail::take_rows(task.xs, split.holdout);

    // One base model shared by every method's ranking.
    std::vector<std::size_t> arch{d};
    for (std::size_t h : options.hidden) arch.push_back(h);
    arch.push_back(1);
    DenseNetwork base_init = make_dense(arch, options.hidden_act, derive_seed(options.seed, 0xba5eULL));
    TrainResult base = train(base_init, train_xs, detail::take(task.ys, split.train), trainer);

    // Rank all feature pairs, then keep only pairs that exist in the label.
    ExplainOptions eopts;
    eopts.quad = options.quad;
    eopts.sii_samples = options.sii_samples;
    eopts.seed = derive_seed(options.seed, 0x4a4eULL);
    std::vector<std::size_t> explain_rows;
    for (std::size_t r = 0; r < std::min(options.n_explain, split.train.size()); ++r)
        explain_rows.push_back(split.train[r]);
    const DenseNetwork* rank_net = &base.net;
    DenseNetwork smooth;
    if (method == RankMethod::ih || method == RankMethod::eh ||
        method == RankMethod::input_hessian) {
        smooth = softplus_surgery(base.net, options.surgery_beta);
        rank_net = &smooth;
    }
    auto full_ranking = rank_all_pairs(*rank_net, task.xs, explain_rows, method, eopts);

    RoarCurve curve;
    curve.method = method;
    for (auto [i, j] : full_ranking)
        for (const PairTerm& p : task.pairs)
            if (p.i == i && p.j == j) curve.ranking.emplace_back(i, j);

    std::vector<std::size_t> steps = options.steps;
    if (steps.empty())
        for (std::size_t s = 0; s <= task.pairs.size(); s += 2) steps.push_back(s);

    for (std::size_t n_abl : steps) {
        if (n_abl > curve.ranking.size())
            throw input_error("remove_and_retrain: ablation step exceeds the number of task pairs");
        Vec ys_abl = ablate_interactions(task, curve.ranking, n_abl, options.noise_seed);
        Vec train_ys = detail::take(ys_abl, split.train);
        Vec hold_ys = detail::take(ys_abl, split.holdout);
        double mean = 0.0, m2 = 0.0;
        for (std::size_t r = 0; r < options.retrains; ++r) {
            TrainConfig cfg = trainer;
            cfg.seed = derive_seed(options.seed, 0x4e7ULL, n_abl, r);
            DenseNetwork init = make_dense(arch, options.hidden_act, cfg.seed);
            TrainResult tr = train(init, train_xs, train_ys, cfg);
            double err = mse(tr.net, hold_xs, hold_ys);
            double delta = err - mean;
            mean += delta / double(r + 1);
            m2 += delta * (err - mean);
        }
        double var = options.retrains > 1 ? m2 / double(options.retrains - 1) : 0.0;
        curve.points.push_back({n_abl, mean, std::sqrt(var / double(options.retrains))});
    }
    return curve;
}

// -- rank-correlation benchmark --------------------------------------------------

enum class RankCorrVariant { multiplicative, minmax };

inline const char* variant_name(RankCorrVariant v) {
    return v == RankCorrVariant::multiplicative ? "multiplicative" : "minmax";
}

inline RankCorrVariant variant_from_name(const std::string& s) {
    if (s == "multiplicative") return RankCorrVariant::multiplicative;
    if (s == "minmax") return RankCorrVariant::minmax;
    throw input_error("unknown rank-correlation variant: '" + s + "'");
}

/// Five features, all ten pairs, signed coefficients +10,-9,...,+2,-1 in
/// lexicographic pair order. The multiplicative variant uses x_i*x_j for
/// every term; the minmax variant alternates pairwise max/min shapes. truth
/// holds each sample's exact signed term value (the per-sample ground-truth
/// interaction the local score correlates against).
struct RankCorrTask {
    RankCorrVariant variant = RankCorrVariant::multiplicative;
    std::size_t d = 5;
    std::vector<PairTerm> pairs;       // alpha = signed coefficient
    std::vector<InteractionKind> fns;  // per-pair interaction shape
    Mat xs;
    Vec ys;
    Mat truth;  // n x 10 signed per-sample term values
    std::uint64_t seed = 0;
};

inline RankCorrTask make_rankcorr_task(RankCorrVariant variant, std::size_t n_samples,
                                       std::uint64_t seed) {
    if (n_samples == 0) throw input_error("make_rankcorr_task: need at least 1 sample");
    RankCorrTask task;
    task.variant = variant;
    task.seed = seed;
    auto pairs = detail::all_pairs(task.d);  // lexicographic
    static const InteractionKind minmax_fns[10] = {
        InteractionKind::maximum, InteractionKind::minimum, InteractionKind::minimum,
        InteractionKind::maximum, InteractionKind::minimum, InteractionKind::maximum,
        InteractionKind::minimum, InteractionKind::maximum, InteractionKind::minimum,
        InteractionKind::maximum};
    for (std::size_t t = 0; t < pairs.size(); ++t) {
        double coef = double(10 - t) * (t % 2 == 0 ? 1.0 : -1.0);
        task.pairs.push_back({pairs[t].first, pairs[t].second, coef});
        task.fns.push_back(variant == RankCorrVariant::multiplicative ? InteractionKind::multiply
                                                                      : minmax_fns[t]);
    }
    task.xs = detail::random_normal(n_samples, task.d, derive_seed(seed, 0xda7aULL));
    task.ys.assign(n_samples, 0.0);
    task.truth = Mat(n_samples, task.pairs.size());
    for (std::size_t r = 0; r < n_samples; ++r) {
        for (std::size_t t = 0; t < task.pairs.size(); ++t) {
            const PairTerm& p = task.pairs[t];
            double term = p.alpha * eval_g(task.fns[t], task.xs(r, p.i), task.xs(r, p.j));
            task.truth(r, t) = term;
            task.ys[r] += term;
        }
    }
    return task;
}

struct RankCorrOptions {
    std::size_t n_samples = 6000;
    std::size_t n_explain = 400;       // holdout rows explained
    std::vector<std::size_t> hidden = {64, 64};
    Activation hidden_act = Activation(Act::tanh);
    TrainConfig trainer = [] {
        TrainConfig c;
        c.optimizer = OptimizerKind::adam;
        c.learning_rate = 2e-3;
        c.epochs = 300;
        c.batch_size = 128;
        return c;
    }();
    QuadratureSpec quad = [] { QuadratureSpec q; q.k = 16; q.m = 16; return q; }();
    std::size_t sii_samples = 200;
    std::uint64_t seed = 11;
    double holdout_fraction = 0.2;
    double min_r2 = 0.99;
};

struct RankCorrResult {
    double global_rho = 0.0;
    double local_rho = 0.0;
    bool has_local = false;
    double validation_r2 = 0.0;
};

namespace detail {

struct TrainedRankCorr {
    DenseNetwork net;
    double validation_r2 = 0.0;
    Split split;
};

inline TrainedRankCorr train_rankcorr_net(const RankCorrTask& task, const RankCorrOptions& opt,
                                          std::uint64_t seed, bool enforce_r2) {
    TrainedRankCorr out;
    out.split = train_holdout_split(task.xs.rows, opt.holdout_fraction, derive_seed(seed, 0x4011ULL));
    std::vector<std::size_t> arch{task.d};
    for (std::size_t h : opt.hidden) arch.push_back(h);
    arch.push_back(1);
    TrainConfig cfg = opt.trainer;
    cfg.seed = derive_seed(seed, 0x7417ULL);
    DenseNetwork init = make_dense(arch, opt.hidden_act, cfg.seed);
    TrainResult tr = train(init, take_rows(task.xs, out.split.train), take(task.ys, out.split.train), cfg);
    out.net = std::move(tr.net);
    out.validation_r2 =
        r_squared(out.net, take_rows(task.xs, out.split.holdout), take(task.ys, out.split.holdout));
    if (enforce_r2 && !(out.validation_r2 > opt.min_r2))
        throw contract_error("rank-correlation benchmark: model under-trained (validation R^2 = " +
                             format_double(out.validation_r2) + ", needs > " +
                             format_double(opt.min_r2) + ")");
    return out;
}

}  // namespace detail

namespace detail {

inline RankCorrResult score_rankcorr_method(const RankCorrTask& task,
                                            const TrainedRankCorr& trained, RankMethod method,
                                            const RankCorrOptions& options) {
    RankCorrResult res;
    res.validation_r2 = trained.validation_r2;

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    Vec true_coef_abs;
    for (const PairTerm& p : task.pairs) {
        pairs.emplace_back(p.i, p.j);
        true_coef_abs.push_back(std::abs(p.alpha));
    }

    if (method == RankMethod::nid) {
        auto ranked = neural_interaction_detection(trained.net);
        Vec strength(pairs.size(), 0.0);
        for (const auto& r : ranked)
            for (std::size_t t = 0; t < pairs.size(); ++t)
                if (pairs[t].first == r.i && pairs[t].second == r.j) strength[t] = r.strength;
        res.global_rho = spearman(strength, true_coef_abs);
        res.has_local = false;
        return res;
    }

    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < std::min(options.n_explain, trained.split.holdout.size()); ++r)
        rows.push_back(trained.split.holdout[r]);

    ExplainOptions eopts;
    eopts.quad = options.quad;
    eopts.sii_samples = options.sii_samples;
    eopts.seed = derive_seed(options.seed, 0xe15ULL);
    Mat est = per_sample_interactions(trained.net, task.xs, rows, pairs, method, eopts);

    Vec mean_abs(pairs.size(), 0.0);
    for (std::size_t r = 0; r < est.rows; ++r)
        for (std::size_t p = 0; p < pairs.size(); ++p) mean_abs[p] += std::abs(est(r, p));
    for (double& v : mean_abs) v /= double(est.rows);
    res.global_rho = spearman(mean_abs, true_coef_abs);

    Vec est_pool, truth_pool;
    est_pool.reserve(est.rows * pairs.size());
    truth_pool.reserve(est.rows * pairs.size());
    for (std::size_t r = 0; r < est.rows; ++r)
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            est_pool.push_back(est(r, p));
            truth_pool.push_back(task.truth(rows[r], p));
        }
    res.local_rho = spearman(est_pool, truth_pool);
    res.has_local = true;
    return res;
}

}  // namespace detail

/// Scores several methods' per-sample interaction estimates against the
/// task's exact ground truth, all on ONE trained model per variant. Global:
/// Spearman between mean |estimate| per pair and |coefficient| per pair.
/// Local: Spearman between signed per-sample estimates and signed true terms
/// pooled over (sample, pair). NID has no local score. A validation R^2
/// below options.min_r2 aborts (under-trained).
inline std::vector<std::pair<RankMethod, RankCorrResult>> rank_correlation_table(
    RankCorrVariant variant, const std::vector<RankMethod>& methods,
    const RankCorrOptions& options) {
    RankCorrTask task = make_rankcorr_task(variant, options.n_samples, options.seed);
    auto trained = detail::train_rankcorr_net(task, options, options.seed, true);
    std::vector<std::pair<RankMethod, RankCorrResult>> out;
    for (RankMethod m : methods)
        out.emplace_back(m, detail::score_rankcorr_method(task, trained, m, options));
    return out;
}

/// Single-method convenience wrapper around rank_correlation_table.
inline RankCorrResult rank_correlation_benchmark(RankCorrVariant variant, RankMethod method,
                                                 const RankCorrOptions& options) {
    return rank_correlation_table(variant, {method}, options)[0].second;
}

// -- sanity randomization checks -------------------------------------------------

struct SanityOptions {
    RankCorrOptions base;     // reference model + explanation settings
    std::size_t n_seeds = 5;  // randomization repetitions
    std::size_t n_explain = 100;
};

struct SanitySample {
    std::uint64_t seed = 0;
    double rho_random_weights = 0.0;  // reference IH vs untrained-net IH
    double rho_random_labels = 0.0;   // reference IH vs shuffled-label-net IH
};

struct SanityReport {
    std::vector<SanitySample> per_seed;
    double median_abs_rho_weights = 0.0;
    double median_abs_rho_labels = 0.0;
    double self_rho = 1.0;  // reference against itself (sanity of the scorer)
};

namespace detail {

inline double median(Vec v) {
    if (v.empty()) throw input_error("median of empty vector");
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline Vec pool_matrix(const Mat& m) { return m.data; }

}  // namespace detail

/// Trains one converged reference model, then correlates its pooled per-sample
/// interactions with (a) a freshly initialized untrained net and (b) nets
/// trained to the same schedule on label-shuffled data, once per derived seed.
/// Both correlations should hover near zero when the reference explanations
/// carry real signal.
inline SanityReport sanity_checks(RankCorrVariant variant, const SanityOptions& options) {
    RankCorrOptions opt = options.base;
    RankCorrTask task = make_rankcorr_task(variant, opt.n_samples, opt.seed);
    auto reference = detail::train_rankcorr_net(task, opt, opt.seed, true);

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (const PairTerm& p : task.pairs) pairs.emplace_back(p.i, p.j);
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < std::min(options.n_explain, reference.split.holdout.size()); ++r)
        rows.push_back(reference.split.holdout[r]);

    ExplainOptions eopts;
    eopts.quad = opt.quad;
    eopts.seed = derive_seed(opt.seed, 0x5a17ULL);
    Mat ref_est = per_sample_interactions(reference.net, task.xs, rows, pairs, RankMethod::ih, eopts);
    Vec ref_pool = detail::pool_matrix(ref_est);

    std::vector<std::size_t> arch{task.d};
    for (std::size_t h : opt.hidden) arch.push_back(h);
    arch.push_back(1);

    SanityReport report;
    report.self_rho = spearman(ref_pool, ref_pool);
    Vec abs_w, abs_l;
    for (std::size_t s = 0; s < options.n_seeds; ++s) {
        std::uint64_t seed_s = derive_seed(opt.seed, 0x5eedULL, s);
        SanitySample sample;
        sample.seed = seed_s;

        DenseNetwork untrained = make_dense(arch, opt.hidden_act, seed_s);
        Mat rand_est = per_sample_interactions(untrained, task.xs, rows, pairs, RankMethod::ih, eopts);
        sample.rho_random_weights = spearman(ref_pool, detail::pool_matrix(rand_est));

        Vec shuffled = task.ys;
        std::mt19937_64 eng(derive_seed(seed_s, 0x1abe1ULL));
        std::shuffle(shuffled.begin(), shuffled.end(), eng);
        TrainConfig cfg = opt.trainer;
        cfg.seed = seed_s;
        DenseNetwork init = make_dense(arch, opt.hidden_act, derive_seed(seed_s, 0x171ULL));
        TrainResult tr = train(init, detail::take_rows(task.xs, reference.split.train),
                               detail::take(shuffled, reference.split.train), cfg);
        Mat shuf_est = per_sample_interactions(tr.net, task.xs, rows, pairs, RankMethod::ih, eopts);
        sample.rho_random_labels = spearman(ref_pool, detail::pool_matrix(shuf_est));

        abs_w.push_back(std::abs(sample.rho_random_weights));
        abs_l.push_back(std::abs(sample.rho_random_labels));
        report.per_seed.push_back(sample);
    }
    report.median_abs_rho_weights = detail::median(abs_w);
    report.median_abs_rho_labels = detail::median(abs_l);
    return report;
}

// -- quadrature convergence study -------------------------------------------------

struct ConvergenceOptions {
    std::vector<std::size_t> layer_counts = {5};
    std::vector<double> betas = {1, 2, 5, 10};
    std::vector<std::size_t> k_grid = {4, 16, 64, 256};
    std::size_t d = 100;
    std::size_t width = 50;
    std::size_t n_samples = 10;
    // Midpoint by default: the right-endpoint rule carries an O(1/k) error
    // term that is independent of activation sharpness and, at moderate k,
    // drowns the smoothness effect this study measures. Midpoint integrates
    // the smooth part at O(1/k^2), so the residual that remains is the one
    // governed by activation curvature.
    QuadScheme scheme = QuadScheme::midpoint;
    std::uint64_t seed = 7;
};

struct ConvergenceCell {
    std::size_t layers = 0;
    double beta = 0.0;
    std::size_t k = 0;  // grid uses k = m
    double mean_rel_error = 0.0;
    double median_rel_error = 0.0;
};

/// Relative interaction-completeness error |sum Gamma - (f(x)-f(0))| /
/// |f(x)-f(0)| on randomly initialized nets, per (depth, beta, k) cell, with
/// the zeros baseline. The total interaction mass is contracted directly
/// (one Hessian-vector product + gradient per path point), which equals
/// summing the full matrix; weights are shared across betas within a depth so
/// only the activation sharpness varies.
inline std::vector<ConvergenceCell> convergence_study(const ConvergenceOptions& options) {
    std::vector<ConvergenceCell> cells;
    Vec zeros(options.d, 0.0);
    BaselinePolicy base = BaselinePolicy::single(zeros);
    for (std::size_t L : options.layer_counts) {
        std::vector<std::size_t> arch{options.d};
        for (std::size_t l = 0; l < L; ++l) arch.push_back(options.width);
        arch.push_back(1);
        DenseNetwork proto =
            make_dense(arch, Activation(Act::softplus, 1.0), derive_seed(options.seed, 0xa4cULL, L));
        Mat samples = detail::random_normal(options.n_samples, options.d,
                                            derive_seed(options.seed, 0x5a39ULL, L));
        for (double beta : options.betas) {
            DenseNetwork net = proto;
            for (std::size_t l = 0; l < net.n_layers(); ++l)
                if (net.layer(l).act.kind == Act::softplus)
                    net.layer(l).act = Activation(Act::softplus, beta);
            for (std::size_t k : options.k_grid) {
                QuadratureSpec quad;
                quad.k = k;
                quad.m = k;
                quad.scheme = options.scheme;
                Vec rel;
                for (std::size_t s = 0; s < options.n_samples; ++s) {
                    Vec x(samples.row(s), samples.row(s) + options.d);
                    CompletenessProbe probe = ih_completeness_probe(net, x, base, quad);
                    rel.push_back(probe.residual() / std::abs(probe.delta_f));
                }
                ConvergenceCell cell;
                cell.layers = L;
                cell.beta = beta;
                cell.k = k;
                cell.mean_rel_error = sum(rel) / double(rel.size());
                cell.median_rel_error = detail::median(rel);
                cells.push_back(cell);
            }
        }
    }
    return cells;
}

// -- XOR demonstration -------------------------------------------------------------

struct XorOptions {
    std::vector<std::size_t> hidden = {8};
    Activation hidden_act = Activation(Act::softplus, 1.0);
    TrainConfig trainer = [] {
        TrainConfig c;
        c.optimizer = OptimizerKind::adam;
        c.learning_rate = 3e-2;
        c.epochs = 3000;
        c.batch_size = 4;
        c.seed = 3;
        return c;
    }();
    QuadratureSpec quad = [] { QuadratureSpec q; q.k = 128; q.m = 128; return q; }();
    double max_truth_error = 0.1;
};

struct XorReport {
    DenseNetwork net;
    double max_output_error = 0.0;  // over the 4 truth-table points
    AttributionVector phi00, phi11;
    InteractionMatrix gamma11;
    double f00 = 0.0, f11 = 0.0;
};

/// Trains a small smooth net on the XOR truth table and explains (0,0) and
/// (1,1) against the zeros baseline. The attribution vectors alone cannot
/// separate the two inputs (both sum to ~0); the interaction matrix does,
/// with a strongly negative off-diagonal at (1,1).
inline XorReport xor_demo(const XorOptions& options = {}) {
    Mat xs(4, 2, Vec{0, 0, 0, 1, 1, 0, 1, 1});
    Vec ys{0, 1, 1, 0};
    std::vector<std::size_t> arch{2};
    for (std::size_t h : options.hidden) arch.push_back(h);
    arch.push_back(1);
    DenseNetwork init = make_dense(arch, options.hidden_act, options.trainer.seed);
    TrainResult tr = train(init, xs, ys, options.trainer);

    XorReport report;
    report.max_output_error = max_abs_error(tr.net, xs, ys);
    if (report.max_output_error >= options.max_truth_error)
        throw contract_error("xor_demo: under-trained XOR net (max truth-table error " +
                             format_double(report.max_output_error) + " >= " +
                             format_double(options.max_truth_error) + ")");
    report.net = std::move(tr.net);
    Vec zeros{0.0, 0.0}, ones{1.0, 1.0};
    BaselinePolicy base = BaselinePolicy::single(zeros);
    report.phi00 = integrated_gradients(report.net, zeros, base, options.quad);
    report.phi11 = integrated_gradients(report.net, ones, base, options.quad);
    report.gamma11 = integrated_hessians(report.net, ones, base, options.quad);
    report.f00 = report.net.forward(zeros);
    report.f11 = report.net.forward(ones);
    return report;
}

// -- timing harness -----------------------------------------------------------------

struct TimingOptions {
    std::vector<std::size_t> dims = {5, 50};
    std::size_t n_samples = 4;
    std::vector<RankMethod> methods = {RankMethod::ih, RankMethod::input_hessian,
                                       RankMethod::sii_mc, RankMethod::nid};
    std::size_t hidden_layers = 5;
    std::size_t width = 128;
    QuadratureSpec quad = [] { QuadratureSpec q; q.k = 16; q.m = 16; return q; }();
    std::size_t sii_samples = 50;
    double time_cap_seconds = 600.0;
    std::uint64_t seed = 21;
};

struct TimingRow {
    std::string method;
    std::size_t d = 0;
    std::size_t samples_done = 0;
    double seconds_total = 0.0;
    double seconds_per_sample = 0.0;
    std::string status;  // ok | capped | skipped
};

inline std::string hardware_descriptor() {
    std::string s = "threads=" + std::to_string(std::thread::hardware_concurrency());
#if defined(__VERSION__)
    s += ", compiler=" + std::string(__VERSION__);
#endif
#if defined(__linux__)
    s += ", os=linux";
#endif
    return s;
}

/// Wall-clock per method and input dimension for computing all pairwise
/// interactions of n_samples random inputs on a fresh random SoftPlus net.
/// sii_exact is recorded as skipped above d = 20; any method exceeding the
/// time cap stops early and is recorded as capped, not failed.
inline std::vector<TimingRow> timing_harness(const TimingOptions& options) {
    std::vector<TimingRow> rows;
    for (std::size_t d : options.dims) {
        std::vector<std::size_t> arch{d};
        for (std::size_t l = 0; l < options.hidden_layers; ++l) arch.push_back(options.width);
        arch.push_back(1);
        DenseNetwork net = make_dense(arch, Activation(Act::softplus, 1.0),
                                      derive_seed(options.seed, 0x713eULL, d));
        Mat samples =
            detail::random_normal(options.n_samples, d, derive_seed(options.seed, 0x5a40ULL, d));
        Vec zeros(d, 0.0);
        BaselinePolicy base = BaselinePolicy::single(zeros);

        for (RankMethod method : options.methods) {
            TimingRow row;
            row.method = rank_method_name(method);
            row.d = d;
            if (method == RankMethod::sii_exact && d > 20) {
                row.status = "skipped";
                rows.push_back(row);
                continue;
            }
            auto start = std::chrono::steady_clock::now();
            auto elapsed = [&] {
                return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                    .count();
            };
            bool capped = false;
            std::size_t s = 0;
            for (; s < options.n_samples; ++s) {
                Vec x(samples.row(s), samples.row(s) + d);
                switch (method) {
                    case RankMethod::ih:
                        integrated_hessians(net, x, base, options.quad);
                        break;
                    case RankMethod::input_hessian:
                        input_hessian(net, x);
                        break;
                    case RankMethod::sii_exact:
                        sii_exact(CoalitionGame(net, x, zeros));
                        break;
                    case RankMethod::sii_mc:
                        sii_monte_carlo(CoalitionGame(net, x, zeros), options.sii_samples,
                                        derive_seed(options.seed, 0x51dULL, d, s));
                        break;
                    case RankMethod::nid:
                        neural_interaction_detection(net);
                        break;
                    default:
                        throw input_error("timing_harness: method not timeable");
                }
                if (elapsed() > options.time_cap_seconds) {
                    capped = true;
                    ++s;
                    break;
                }
            }
            row.samples_done = s;
            row.seconds_total = elapsed();
            row.seconds_per_sample = s ? row.seconds_total / double(s) : 0.0;
            row.status = capped ? "capped" : "ok";
            rows.push_back(row);
        }
    }
    return rows;
}

// -- task serialization --------------------------------------------------------------

/// Writes xs/ys as a dataset CSV plus a JSON manifest describing the pair
/// terms, interaction kind, and seed, so the task can be reloaded or
/// regenerated exactly.
inline void save_task(const SyntheticTask& task, const std::string& csv_path,
                      const std::string& manifest_path) {
    save_dataset_csv(csv_path, task.xs, task.ys);
    json jpairs = json::array();
    for (const PairTerm& p : task.pairs)
        jpairs.push_back(json{{"i", p.i}, {"j", p.j}, {"alpha", p.alpha}});
    json j{{"d", task.d},
           {"g_kind", g_kind_name(task.g_kind)},
           {"pairs", std::move(jpairs)},
           {"seed", task.seed},
           {"n_samples", task.xs.rows}};
    std::ofstream out(manifest_path);
    if (!out) throw input_error("cannot open '" + manifest_path + "' for writing");
    out << j.dump(2) << "\n";
}

inline SyntheticTask load_task(const std::string& csv_path, const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw input_error("cannot open task manifest '" + manifest_path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw input_error("cannot parse task manifest '" + manifest_path + "': " + e.what());
    }
    SyntheticTask task;
    try {
        task.d = j.at("d").get<std::size_t>();
        task.g_kind = g_kind_from_name(j.at("g_kind").get<std::string>());
        task.seed = j.at("seed").get<std::uint64_t>();
        for (const json& jp : j.at("pairs"))
            task.pairs.push_back({jp.at("i").get<std::size_t>(), jp.at("j").get<std::size_t>(),
                                  jp.at("alpha").get<double>()});
    } catch (const json::exception& e) {
        throw input_error("malformed task manifest '" + manifest_path + "': " + e.what());
    }
    Dataset ds = load_dataset_csv(csv_path);
    if (ds.xs.cols != task.d)
        throw input_error("task dataset feature count does not match manifest d");
    task.xs = std::move(ds.xs);
    task.ys = std::move(ds.ys);
    return task;
}

}  // namespace pathexplain
