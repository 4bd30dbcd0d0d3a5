// pathexplain: train small dense networks, explain their predictions with
// path-integrated attribution and interaction methods, and run the benchmark
// protocols. Every command writes its artifacts plus a manifest.json into
// --out; primary outputs are byte-reproducible for a given seed and platform.
//
// Exit codes: 0 success, 2 input error, 3 contract violation, 4 divergence.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <pathexplain/pathexplain.hpp>

namespace px = pathexplain;
namespace fs = std::filesystem;
using px::format_double;

namespace {

// ---------------------------------------------------------------- helpers --

std::vector<std::string> split_on(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

// "10-64-64-64-1" -> layer sizes
std::vector<std::size_t> parse_arch(const std::string& spec) {
    std::vector<std::size_t> sizes;
    for (const std::string& f : split_on(spec, '-')) {
        try {
            std::size_t pos = 0;
            long long v = std::stoll(f, &pos);
            if (pos != f.size() || v <= 0) throw std::invalid_argument(f);
            sizes.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw px::input_error("bad architecture spec '" + spec +
                                  "': expected dash-separated positive layer sizes like 10-64-64-1");
        }
    }
    if (sizes.size() < 2)
        throw px::input_error("architecture needs at least input and output sizes, got '" + spec + "'");
    return sizes;
}

std::vector<std::size_t> parse_size_list(const std::string& text, const char* what) {
    std::vector<std::size_t> out;
    for (const std::string& f : split_on(text, ',')) {
        try {
            std::size_t pos = 0;
            long long v = std::stoll(f, &pos);
            if (pos != f.size() || v < 0) throw std::invalid_argument(f);
            out.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw px::input_error(std::string(what) + ": expected comma-separated integers, got '" +
                                  text + "'");
        }
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& text, const char* what) {
    px::Vec v;
    try {
        v = px::parse_number_list(text);
    } catch (const px::input_error&) {
        throw px::input_error(std::string(what) + ": expected comma-separated numbers, got '" +
                              text + "'");
    }
    return v;
}

std::vector<px::RankMethod> parse_methods(const std::string& text) {
    std::vector<px::RankMethod> out;
    for (const std::string& f : split_on(text, ','))
        out.push_back(px::rank_method_from_name(f));
    return out;
}

// "softplus", "softplus:2.5", "relu", ...
px::Activation parse_activation(const std::string& spec) {
    auto colon = spec.find(':');
    std::string name = spec.substr(0, colon);
    px::Activation act(px::act_from_name(name));
    if (colon != std::string::npos) {
        std::string b = spec.substr(colon + 1);
        try {
            std::size_t pos = 0;
            act.beta = std::stod(b, &pos);
            if (pos != b.size()) throw std::invalid_argument(b);
        } catch (const std::exception&) {
            throw px::input_error("bad activation spec '" + spec + "': beta part must be a number");
        }
        if (!(act.beta > 0.0))
            throw px::input_error("activation beta must be positive, got " + b);
    }
    return act;
}

px::QuadScheme parse_scheme(const std::string& name) {
    if (name == "right-endpoint") return px::QuadScheme::right_endpoint;
    if (name == "midpoint") return px::QuadScheme::midpoint;
    throw px::input_error("unknown quadrature scheme '" + name +
                          "' (choose right-endpoint or midpoint)");
}

// PATHEXPLAIN_SEED overrides --seed whenever it is set.
std::uint64_t effective_seed(std::uint64_t cli_seed) {
    const char* e = std::getenv("PATHEXPLAIN_SEED");
    if (e == nullptr || *e == '\0') return cli_seed;
    errno = 0;
    char* end = nullptr;
    unsigned long long v = std::strtoull(e, &end, 10);
    if (errno != 0 || end == e || *end != '\0')
        throw px::input_error("PATHEXPLAIN_SEED must be a non-negative integer, got '" +
                              std::string(e) + "'");
    return static_cast<std::uint64_t>(v);
}

// Collects artifacts for one command and writes the directory's manifest.
class OutputDir {
  public:
    OutputDir(std::string command, std::string dir) : start_(clock::now()) {
        manifest_.command = std::move(command);
        dir_ = std::move(dir);
        if (dir_.empty()) throw px::input_error("--out directory must not be empty");
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw px::input_error("cannot create output directory '" + dir_ + "': " + ec.message());
    }

    std::string path(const std::string& name) {
        manifest_.artifacts.push_back(name);
        return (fs::path(dir_) / name).string();
    }

    px::json& flags() { return manifest_.flags; }
    void set_seed(std::uint64_t s) { manifest_.seed = s; }

    void finish() {
        manifest_.duration_seconds =
            std::chrono::duration<double>(clock::now() - start_).count();
        px::save_run_manifest((fs::path(dir_) / "manifest.json").string(), manifest_);
        std::cout << "wrote " << manifest_.artifacts.size() << " artifact(s) + manifest.json to "
                  << dir_ << "\n";
    }

  private:
    using clock = std::chrono::steady_clock;
    clock::time_point start_;
    std::string dir_;
    px::RunManifest manifest_;
};

std::ofstream open_csv(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw px::input_error("cannot open '" + path + "' for writing");
    out.setf(std::ios::fmtflags(0), std::ios::floatfield);
    return out;
}

// ------------------------------------------------------------------ train --

struct TrainArgs {
    std::string data, arch = "2-8-1", activation = "softplus:1", out_activation = "identity";
    std::string loss = "squared", optimizer = "adam", out = "run";
    std::size_t epochs = 100, batch_size = 32;
    double lr = 1e-3;
    std::uint64_t seed = 0;
};

void run_train(const TrainArgs& a) {
    std::uint64_t seed = effective_seed(a.seed);
    OutputDir dir("train", a.out);
    dir.set_seed(seed);
    dir.flags() = px::json{{"data", a.data},          {"arch", a.arch},
                           {"activation", a.activation}, {"out-activation", a.out_activation},
                           {"loss", a.loss},          {"optimizer", a.optimizer},
                           {"epochs", a.epochs},      {"batch-size", a.batch_size},
                           {"lr", a.lr},              {"seed", seed},
                           {"threads", px::max_threads()}};

    px::Dataset ds = px::load_dataset_csv(a.data);
    std::vector<std::size_t> sizes = parse_arch(a.arch);
    if (sizes.front() != ds.xs.cols)
        throw px::input_error("architecture input size " + std::to_string(sizes.front()) +
                              " does not match the dataset's " + std::to_string(ds.xs.cols) +
                              " feature columns");
    if (sizes.back() != 1)
        throw px::input_error("the trainer supports single-output networks; architecture must end in 1");

    px::TrainConfig cfg;
    cfg.seed = seed;
    cfg.epochs = a.epochs;
    cfg.batch_size = a.batch_size;
    cfg.learning_rate = a.lr;
    if (a.loss == "squared")
        cfg.loss = px::LossKind::squared_error;
    else if (a.loss == "logistic")
        cfg.loss = px::LossKind::logistic;
    else
        throw px::input_error("unknown loss '" + a.loss + "' (choose squared or logistic)");
    if (a.optimizer == "sgd")
        cfg.optimizer = px::OptimizerKind::sgd;
    else if (a.optimizer == "momentum")
        cfg.optimizer = px::OptimizerKind::momentum;
    else if (a.optimizer == "adam")
        cfg.optimizer = px::OptimizerKind::adam;
    else
        throw px::input_error("unknown optimizer '" + a.optimizer + "' (choose sgd, momentum, adam)");

    px::Activation hidden = parse_activation(a.activation);
    px::Activation out_act = parse_activation(a.out_activation);
    px::DenseNetwork init = px::make_dense(sizes, hidden, seed, out_act);
    px::TrainResult tr = px::train(init, ds.xs, ds.ys, cfg);

    px::save_model(dir.path("model.json"), tr.net);
    std::cout << "final loss: " << format_double(tr.final_loss) << "\n";
    dir.flags()["final_loss"] = tr.final_loss;
    dir.finish();
}

// ---------------------------------------------------------------- explain --

struct ExplainArgs {
    std::string model, method = "ih", input, baseline, background, scheme = "right-endpoint";
    std::string format = "csv", nid_agg = "min", out = "run";
    std::size_t k = 128, m = 128, samples = 200, background_samples = 0;
    long long output_index = -1;
    double surgery_beta = 0.0;  // 0 = not requested
    std::uint64_t seed = 0;
};

void run_explain(const ExplainArgs& a) {
    std::uint64_t seed = effective_seed(a.seed);
    OutputDir dir("explain", a.out);
    dir.set_seed(seed);
    dir.flags() = px::json{{"model", a.model},     {"method", a.method},
                           {"input", a.input},     {"baseline", a.baseline},
                           {"background", a.background}, {"scheme", a.scheme},
                           {"format", a.format},   {"k", a.k},
                           {"m", a.m},             {"samples", a.samples},
                           {"seed", seed},         {"threads", px::max_threads()}};
    if (a.surgery_beta > 0.0) dir.flags()["surgery-beta"] = a.surgery_beta;

    px::DenseNetwork net = px::load_model(a.model);
    if (a.surgery_beta > 0.0) net = px::softplus_surgery(net, a.surgery_beta);
    if (a.output_index >= 0) net.set_output_index(static_cast<std::size_t>(a.output_index));
    std::size_t d = net.input_dim();

    px::QuadratureSpec quad;
    quad.k = a.k;
    quad.m = a.m;
    quad.n_path_samples = a.samples;
    quad.seed = seed;
    quad.scheme = parse_scheme(a.scheme);

    const std::string& mth = a.method;
    bool is_attr = (mth == "ig" || mth == "eg");
    bool needs_input = (mth != "nid");
    bool needs_baseline = (mth == "ig" || mth == "ih" || mth == "sii" || mth == "sii-mc");
    bool needs_background = (mth == "eg" || mth == "eh");
    if (mth != "ig" && mth != "ih" && mth != "eg" && mth != "eh" && mth != "hessian" &&
        mth != "sii" && mth != "sii-mc" && mth != "nid")
        throw px::input_error("unknown method '" + mth +
                              "' (choose ig, ih, eg, eh, hessian, sii, sii-mc, nid)");

    px::Vec x;
    if (needs_input) {
        if (a.input.empty())
            throw px::input_error("--input is required for method '" + mth + "'");
        x = px::parse_number_list(a.input);
        if (x.size() != d)
            throw px::input_error("--input has " + std::to_string(x.size()) + " values; the model takes " +
                                  std::to_string(d));
    }
    px::Vec xp;
    if (needs_baseline) {
        if (a.baseline.empty())
            throw px::input_error("--baseline is required for method '" + mth +
                                  "' (a comma-separated point, or 'zeros')");
        xp = (a.baseline == "zeros") ? px::Vec(d, 0.0) : px::parse_number_list(a.baseline);
        if (xp.size() != d)
            throw px::input_error("--baseline has " + std::to_string(xp.size()) +
                                  " values; the model takes " + std::to_string(d));
    }
    px::BaselinePolicy policy = px::BaselinePolicy::single(px::Vec(d, 0.0));
    if (needs_baseline) policy = px::BaselinePolicy::single(xp);
    px::Dataset background_ds;  // the policy borrows this; it must outlive the method call
    if (needs_background) {
        if (a.background.empty())
            throw px::input_error("--background <dataset.csv> is required for method '" + mth + "'");
        background_ds = px::load_dataset_csv(a.background);
        policy = px::BaselinePolicy::background_of(background_ds.xs, a.background_samples, seed);
    }

    bool json_fmt = (a.format == "json");
    if (!json_fmt && a.format != "csv")
        throw px::input_error("unknown format '" + a.format + "' (choose csv or json)");

    if (is_attr) {
        px::AttributionVector attr = (mth == "ig") ? px::integrated_gradients(net, x, policy, quad)
                                                   : px::expected_gradients(net, x, policy, quad);
        std::string file = json_fmt ? "attributions.json" : "attributions.csv";
        if (json_fmt)
            px::save_attribution_json(dir.path(file), attr);
        else
            px::save_attribution_csv(dir.path(file), attr);
        double residual = px::completeness_residual(attr);
        double delta = std::abs(attr.input_output - attr.reference_output);
        double tol = (quad.scheme == px::QuadScheme::midpoint)
                         ? 2.0 * (delta + 1.0) / double(quad.k * quad.k)
                         : 2.0 * (delta + 1.0) / double(quad.k);
        std::cout << "sum(phi) = " << format_double(px::sum(attr.values))
                  << ", f(x) - f(x') = " << format_double(attr.input_output - attr.reference_output)
                  << "\ncompleteness residual = " << format_double(residual)
                  << " (tolerance " << format_double(tol) << ")\n";
        dir.flags()["completeness_residual"] = residual;
        dir.flags()["completeness_tolerance"] = tol;
    } else {
        px::InteractionMatrix im;
        if (mth == "ih") {
            im = px::integrated_hessians(net, x, policy, quad);
        } else if (mth == "eh") {
            im = px::expected_hessians(net, x, policy, quad);
        } else if (mth == "hessian") {
            im = px::input_hessian(net, x);
        } else if (mth == "sii") {
            im = px::sii_exact(px::CoalitionGame(net, x, xp));
        } else if (mth == "sii-mc") {
            px::SiiMcResult mc =
                px::sii_monte_carlo_stats(px::CoalitionGame(net, x, xp), a.samples, seed);
            im = mc.matrix;
            std::cout << "max standard error = " << format_double(px::max_abs(mc.std_error.data))
                      << " over " << mc.n_samples << " draws per entry\n";
        } else {  // nid
            px::NidAggregation agg;
            if (a.nid_agg == "min")
                agg = px::NidAggregation::min;
            else if (a.nid_agg == "mean")
                agg = px::NidAggregation::mean;
            else
                throw px::input_error("unknown NID aggregation '" + a.nid_agg +
                                      "' (choose min or mean)");
            im = px::nid_matrix(net, agg);
        }
        std::string file = json_fmt ? "interactions.json" : "interactions.csv";
        if (json_fmt)
            px::save_interaction_json(dir.path(file), im);
        else
            px::save_interaction_csv(dir.path(file), im);
        if (mth == "ih") {
            double total = px::sum(im.gamma.data);
            double delta_f = im.input_output - im.reference_output;
            double residual = std::abs(total - delta_f);
            std::size_t kk = std::min(quad.k, quad.m);
            double tol = (quad.scheme == px::QuadScheme::midpoint)
                             ? 8.0 * (std::abs(delta_f) + 1.0) / double(kk * kk)
                             : 4.0 * (std::abs(delta_f) + 1.0) / double(kk);
            std::cout << "sum(gamma) = " << format_double(total)
                      << ", f(x) - f(x') = " << format_double(delta_f)
                      << "\ncompleteness residual = " << format_double(residual) << " (tolerance "
                      << format_double(tol) << ")\n";
            dir.flags()["completeness_residual"] = residual;
            dir.flags()["completeness_tolerance"] = tol;
        }
    }
    dir.finish();
}

// ------------------------------------------------------------- benchmarks --

struct RoarArgs {
    std::string kind = "tanhsum", methods = "ih,hessian,nid,sii-mc,random", steps;
    std::string hidden = "32-32-32", activation = "relu", out = "run";
    std::size_t d = 10, pairs = 20, samples = 10000, retrains = 5, n_explain = 256;
    std::size_t sii_samples = 64, epochs = 100, batch_size = 128, k = 16, m = 16;
    double lr = 2e-3, surgery_beta = 10.0, holdout = 0.2;
    std::uint64_t seed = 7, noise_seed = 99;
};

void run_bench_roar(const RoarArgs& a) {
    std::uint64_t seed = effective_seed(a.seed);
    OutputDir dir("bench roar", a.out);
    dir.set_seed(seed);
    dir.flags() = px::json{{"kind", a.kind},       {"methods", a.methods},
                           {"steps", a.steps},     {"hidden", a.hidden},
                           {"activation", a.activation}, {"d", a.d},
                           {"pairs", a.pairs},     {"samples", a.samples},
                           {"retrains", a.retrains}, {"explain", a.n_explain},
                           {"sii-samples", a.sii_samples}, {"epochs", a.epochs},
                           {"batch-size", a.batch_size}, {"k", a.k},
                           {"m", a.m},             {"lr", a.lr},
                           {"surgery-beta", a.surgery_beta}, {"holdout", a.holdout},
                           {"seed", seed},         {"noise-seed", a.noise_seed},
                           {"threads", px::max_threads()}};

    px::SyntheticTask task =
        px::gen_interaction_task(seed, a.d, a.pairs, px::g_kind_from_name(a.kind), a.samples);

    px::RoarOptions opt;
    opt.hidden = parse_arch("1-" + a.hidden + "-1");  // reuse validation, trim ends
    opt.hidden.erase(opt.hidden.begin());
    opt.hidden.pop_back();
    opt.hidden_act = parse_activation(a.activation);
    opt.retrains = a.retrains;
    if (!a.steps.empty()) opt.steps = parse_size_list(a.steps, "--steps");
    opt.surgery_beta = a.surgery_beta;
    opt.quad.k = a.k;
    opt.quad.m = a.m;
    opt.n_explain = a.n_explain;
    opt.sii_samples = a.sii_samples;
    opt.noise_seed = a.noise_seed;
    opt.seed = seed;
    opt.holdout_fraction = a.holdout;

    px::TrainConfig trainer;
    trainer.epochs = a.epochs;
    trainer.batch_size = a.batch_size;
    trainer.learning_rate = a.lr;

    std::ofstream curves = open_csv(dir.path("roar_curves.csv"));
    curves << "method,n_ablated,mean_error,std_error\n";
    std::ofstream aucs = open_csv(dir.path("roar_auc.csv"));
    aucs << "method,auc\n";
    std::ofstream ranks = open_csv(dir.path("roar_rankings.csv"));
    ranks << "method,rank,i,j\n";
    for (px::RankMethod m : parse_methods(a.methods)) {
        px::RoarCurve curve = px::remove_and_retrain(task, m, trainer, opt);
        const char* name = px::rank_method_name(m);
        for (const px::RoarPoint& p : curve.points)
            curves << name << "," << p.n_ablated << "," << format_double(p.mean_error) << ","
                   << format_double(p.std_error) << "\n";
        double auc = px::roar_auc(curve);
        aucs << name << "," << format_double(auc) << "\n";
        for (std::size_t r = 0; r < curve.ranking.size(); ++r)
            ranks << name << "," << r << "," << curve.ranking[r].first << ","
                  << curve.ranking[r].second << "\n";
        std::cout << "roar " << name << ": auc = " << format_double(auc) << "\n";
    }
    dir.finish();
}

struct RankCorrArgs {
    std::string variant = "multiplicative", methods = "ih,sii,hessian,nid", hidden = "64-64";
    std::string out = "run";
    std::size_t samples = 6000, n_explain = 400, epochs = 300, batch_size = 128;
    std::size_t k = 16, m = 16, sii_samples = 200;
    double lr = 2e-3, min_r2 = 0.99, holdout = 0.2;
    std::uint64_t seed = 11;
};

px::RankCorrVariant parse_variant(const std::string& v) {
    if (v == "multiplicative") return px::RankCorrVariant::multiplicative;
    if (v == "minmax") return px::RankCorrVariant::minmax;
    throw px::input_error("unknown variant '" + v + "' (choose multiplicative or minmax)");
}

px::RankCorrOptions rankcorr_options(const RankCorrArgs& a, std::uint64_t seed) {
    px::RankCorrOptions opt;
    opt.n_samples = a.samples;
    opt.n_explain = a.n_explain;
    opt.hidden = parse_arch("1-" + a.hidden + "-1");
    opt.hidden.erase(opt.hidden.begin());
    opt.hidden.pop_back();
    opt.trainer.epochs = a.epochs;
    opt.trainer.batch_size = a.batch_size;
    opt.trainer.learning_rate = a.lr;
    opt.quad.k = a.k;
    opt.quad.m = a.m;
    opt.sii_samples = a.sii_samples;
    opt.seed = seed;
    opt.holdout_fraction = a.holdout;
    opt.min_r2 = a.min_r2;
    return opt;
}

void run_bench_rankcorr(const RankCorrArgs& a) {
    std::uint64_t seed = effective_seed(a.seed);
    OutputDir dir("bench rankcorr", a.out);
    dir.set_seed(seed);
    dir.flags() = px::json{{"variant", a.variant},   {"methods", a.methods},
                           {"hidden", a.hidden},     {"samples", a.samples},
                           {"explain", a.n_explain}, {"epochs", a.epochs},
                           {"batch-size", a.batch_size}, {"k", a.k},
                           {"m", a.m},               {"sii-samples", a.sii_samples},
                           {"lr", a.lr},             {"min-r2", a.min_r2},
                           {"holdout", a.holdout},   {"seed", seed},
                           {"threads", px::max_threads()}};

    auto table = px::rank_correlation_table(parse_variant(a.variant), parse_methods(a.methods),
                                            rankcorr_options(a, seed));
    std::ofstream csv = open_csv(dir.path("rankcorr.csv"));
    csv << "variant,method,global_rho,local_rho,has_local,validation_r2\n";
    for (const auto& [m, res] : table) {
        csv << a.variant << "," << px::rank_method_name(m) << "," << format_double(res.global_rho)
            << "," << (res.has_local ? format_double(res.local_rho) : std::string("")) << ","
            << (res.has_local ? 1 : 0) << "," << format_double(res.validation_r2) << "\n";
        std::cout << "rankcorr " << px::rank_method_name(m)
                  << ": global rho = " << format_double(res.global_rho);
        if (res.has_local) std::cout << ", local rho = " << format_double(res.local_rho);
        std::cout << " (validation R^2 = " << format_double(res.validation_r2) << ")\n";
    }
    dir.finish();
}

struct SanityArgs {
    RankCorrArgs base;
    std::size_t n_seeds = 5, n_explain = 100;
};

void run_bench_sanity(const SanityArgs& a) {
    std::uint64_t seed = effective_seed(a.base.seed);
    OutputDir dir("bench sanity", a.base.out);
    dir.set_seed(seed);
    dir.flags() = px::json{{"variant", a.base.variant}, {"seeds", a.n_seeds},
                           {"explain", a.n_explain},    {"samples", a.base.samples},
                           {"epochs", a.base.epochs},   {"hidden", a.base.hidden},
                           {"k", a.base.k},             {"m", a.base.m},
                           {"min-r2", a.base.min_r2},   {"seed", seed},
                           {"threads", px::max_threads()}};

    px::SanityOptions opt;
    opt.base = rankcorr_options(a.base, seed);
    opt.n_seeds = a.n_seeds;
    opt.n_explain = a.n_explain;
    px::SanityReport rep = px::sanity_checks(parse_variant(a.base.variant), opt);

    std::ofstream per = open_csv(dir.path("sanity_per_seed.csv"));
    per << "seed,rho_random_weights,rho_random_labels\n";
    for (const px::SanitySample& s : rep.per_seed)
        per << s.seed << "," << format_double(s.rho_random_weights) << ","
            << format_double(s.rho_random_labels) << "\n";
    std::ofstream summary = open_csv(dir.path("sanity_summary.csv"));
    summary << "median_abs_rho_weights,median_abs_rho_labels,self_rho\n";
    summary << format_double(rep.median_abs_rho_weights) << ","
            << format_double(rep.median_abs_rho_labels) << "," << format_double(rep.self_rho)
            << "\n";
    std::cout << "sanity: median |rho| weights = " << format_double(rep.median_abs_rho_weights)
              << ", labels = " << format_double(rep.median_abs_rho_labels)
              << ", self = " << format_double(rep.self_rho) << "\n";
    dir.finish();
}

struct ConvergenceArgs {
    std::string layers = "5", betas = "10,5,2,1", kgrid = "4,16,64,256", out = "run";
    std::size_t d = 100, width = 50, samples = 10;
    std::uint64_t seed = 7;
};

void run_bench_convergence(const ConvergenceArgs& a) {
    std::uint64_t seed = effective_seed(a.seed);
    OutputDir dir("bench convergence", a.out);
    dir.set_seed(seed);
    dir.flags() = px::json{{"layers", a.layers}, {"betas", a.betas}, {"kgrid", a.kgrid},
                           {"d", a.d},           {"width", a.width}, {"samples", a.samples},
                           {"seed", seed},       {"threads", px::max_threads()}};

    px::ConvergenceOptions opt;
    opt.layer_counts = parse_size_list(a.layers, "--layers");
    opt.betas = parse_double_list(a.betas, "--betas");
    opt.k_grid = parse_size_list(a.kgrid, "--kgrid");
    opt.d = a.d;
    opt.width = a.width;
    opt.n_samples = a.samples;
    opt.seed = seed;

    std::ofstream csv = open_csv(dir.path("convergence.csv"));
    csv << "layers,beta,k,mean_rel_error,median_rel_error\n";
    for (const px::ConvergenceCell& c : px::convergence_study(opt)) {
        csv << c.layers << "," << format_double(c.beta) << "," << c.k << ","
            << format_double(c.mean_rel_error) << "," << format_double(c.median_rel_error) << "\n";
        std::cout << "convergence layers=" << c.layers << " beta=" << format_double(c.beta)
                  << " k=" << c.k << ": median rel err = " << format_double(c.median_rel_error)
                  << "\n";
    }
    dir.finish();
}

struct TimingArgs {
    std::string dims = "5,50", methods = "ih,hessian,sii-mc,nid", out = "run";
    std::size_t samples = 4, layers = 5, width = 128, k = 16, m = 16, sii_samples = 50;
    double cap = 600.0;
    std::uint64_t seed = 21;
};

void run_bench_timing(const TimingArgs& a) {
    std::uint64_t seed = effective_seed(a.seed);
    OutputDir dir("bench timing", a.out);
    dir.set_seed(seed);
    dir.flags() = px::json{{"dims", a.dims},     {"methods", a.methods},
                           {"samples", a.samples}, {"layers", a.layers},
                           {"width", a.width},   {"k", a.k},
                           {"m", a.m},           {"sii-samples", a.sii_samples},
                           {"cap", a.cap},       {"seed", seed},
                           {"hardware", px::hardware_descriptor()},
                           {"threads", px::max_threads()}};

    px::TimingOptions opt;
    opt.dims = parse_size_list(a.dims, "--dims");
    opt.methods = parse_methods(a.methods);
    opt.n_samples = a.samples;
    opt.hidden_layers = a.layers;
    opt.width = a.width;
    opt.quad.k = a.k;
    opt.quad.m = a.m;
    opt.sii_samples = a.sii_samples;
    opt.time_cap_seconds = a.cap;
    opt.seed = seed;

    std::cout << "hardware: " << px::hardware_descriptor() << "\n";
    std::ofstream csv = open_csv(dir.path("timing.csv"));
    csv << "method,d,samples_done,seconds_total,seconds_per_sample,status\n";
    for (const px::TimingRow& r : px::timing_harness(opt)) {
        csv << r.method << "," << r.d << "," << r.samples_done << ","
            << format_double(r.seconds_total) << "," << format_double(r.seconds_per_sample) << ","
            << r.status << "\n";
        std::cout << "timing " << r.method << " d=" << r.d << ": "
                  << format_double(r.seconds_per_sample) << " s/sample (" << r.status << ")\n";
    }
    dir.finish();
}

struct XorArgs {
    std::string out = "run";
    std::size_t epochs = 3000, k = 128, m = 128;
    std::uint64_t seed = 3;
};

void run_bench_xor(const XorArgs& a) {
    std::uint64_t seed = effective_seed(a.seed);
    OutputDir dir("bench xor", a.out);
    dir.set_seed(seed);
    dir.flags() = px::json{{"epochs", a.epochs}, {"k", a.k},   {"m", a.m},
                           {"seed", seed},       {"threads", px::max_threads()}};

    px::XorOptions opt;
    opt.trainer.epochs = a.epochs;
    opt.trainer.seed = seed;
    opt.quad.k = a.k;
    opt.quad.m = a.m;
    px::XorReport rep = px::xor_demo(opt);

    px::save_attribution_csv(dir.path("xor_attr_00.csv"), rep.phi00);
    px::save_attribution_csv(dir.path("xor_attr_11.csv"), rep.phi11);
    px::save_interaction_csv(dir.path("xor_interactions_11.csv"), rep.gamma11);
    std::ofstream summary = open_csv(dir.path("xor_summary.csv"));
    summary << "f00,f11,max_output_error,gamma_01,gamma_00,gamma_11,sum_gamma\n";
    summary << format_double(rep.f00) << "," << format_double(rep.f11) << ","
            << format_double(rep.max_output_error) << "," << format_double(rep.gamma11.gamma(0, 1))
            << "," << format_double(rep.gamma11.gamma(0, 0)) << ","
            << format_double(rep.gamma11.gamma(1, 1)) << ","
            << format_double(px::sum(rep.gamma11.gamma.data)) << "\n";
    std::cout << "xor: gamma(0,1) at (1,1) = " << format_double(rep.gamma11.gamma(0, 1))
              << " (negative means the pair works against the sum of its parts)\n";
    dir.finish();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pathexplain: path-integrated attribution and interaction analysis for dense "
                 "networks.\nExit codes: 0 ok, 2 input error, 3 contract violation, 4 divergence.\n"
                 "The PATHEXPLAIN_SEED environment variable overrides --seed when set."};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads,
                   "worker threads (0 = all hardware threads; results are thread-count invariant)");

    TrainArgs train_args;
    CLI::App* tr = app.add_subcommand("train", "fit a dense network on a CSV dataset");
    tr->add_option("--data", train_args.data, "CSV: header row, features..., label last")->required();
    tr->add_option("--arch", train_args.arch, "layer sizes, e.g. 10-64-64-1");
    tr->add_option("--activation", train_args.activation,
                   "hidden activation: identity|relu|softplus[:beta]|tanh|sigmoid|gelu");
    tr->add_option("--out-activation", train_args.out_activation, "output activation");
    tr->add_option("--loss", train_args.loss, "squared | logistic");
    tr->add_option("--optimizer", train_args.optimizer, "sgd | momentum | adam");
    tr->add_option("--epochs", train_args.epochs, "training epochs");
    tr->add_option("--batch-size", train_args.batch_size, "minibatch size");
    tr->add_option("--lr", train_args.lr, "learning rate");
    tr->add_option("--seed", train_args.seed, "init + shuffle seed");
    tr->add_option("--out", train_args.out, "output directory");
    tr->callback([&] { px::set_max_threads(threads); run_train(train_args); });

    ExplainArgs ex_args;
    CLI::App* ex = app.add_subcommand("explain", "attribute a prediction to features and pairs");
    ex->add_option("--model", ex_args.model, "model JSON written by train")->required();
    ex->add_option("--method", ex_args.method, "ig | ih | eg | eh | hessian | sii | sii-mc | nid");
    ex->add_option("--input", ex_args.input, "comma-separated input point");
    ex->add_option("--baseline", ex_args.baseline,
                   "comma-separated baseline point, or 'zeros' (ig/ih/sii/sii-mc)");
    ex->add_option("--background", ex_args.background, "background dataset CSV (eg/eh)");
    ex->add_option("--background-samples", ex_args.background_samples,
                   "subsample the background to this many rows (0 = all)");
    ex->add_option("--k", ex_args.k, "outer quadrature resolution");
    ex->add_option("--m", ex_args.m, "inner quadrature resolution (second-order)");
    ex->add_option("--samples", ex_args.samples, "Monte-Carlo draws (eg/eh/sii-mc)");
    ex->add_option("--scheme", ex_args.scheme, "right-endpoint | midpoint");
    ex->add_option("--output-index", ex_args.output_index, "explain this output (default 0)");
    ex->add_option("--surgery-beta", ex_args.surgery_beta,
                   "replace ReLU layers with SoftPlus(beta) before explaining");
    ex->add_option("--nid-agg", ex_args.nid_agg, "NID aggregation: min | mean");
    ex->add_option("--format", ex_args.format, "csv | json");
    ex->add_option("--seed", ex_args.seed, "seed for stochastic methods");
    ex->add_option("--out", ex_args.out, "output directory");
    ex->callback([&] { px::set_max_threads(threads); run_explain(ex_args); });

    CLI::App* bench = app.add_subcommand("bench", "run a benchmark protocol");
    bench->require_subcommand(1);

    RoarArgs roar_args;
    CLI::App* roar = bench->add_subcommand("roar", "remove-and-retrain interaction benchmark");
    roar->add_option("--kind", roar_args.kind, "interaction shape: tanhsum|cossum|multiply|maximum|minimum");
    roar->add_option("--methods", roar_args.methods, "comma list of ih,eh,hessian,nid,sii,sii-mc,random");
    roar->add_option("--steps", roar_args.steps, "ablation counts, e.g. 0,4,8,12,16,20");
    roar->add_option("--d", roar_args.d, "feature count");
    roar->add_option("--pairs", roar_args.pairs, "interacting pairs in the label");
    roar->add_option("--samples", roar_args.samples, "dataset rows");
    roar->add_option("--retrains", roar_args.retrains, "retrainings per ablation step");
    roar->add_option("--explain", roar_args.n_explain, "rows explained when ranking");
    roar->add_option("--sii-samples", roar_args.sii_samples, "sii-mc draws per entry");
    roar->add_option("--hidden", roar_args.hidden, "hidden sizes, e.g. 32-32-32");
    roar->add_option("--activation", roar_args.activation, "hidden activation");
    roar->add_option("--epochs", roar_args.epochs, "epochs per (re)training");
    roar->add_option("--batch-size", roar_args.batch_size, "minibatch size");
    roar->add_option("--lr", roar_args.lr, "learning rate");
    roar->add_option("--k", roar_args.k, "outer quadrature resolution");
    roar->add_option("--m", roar_args.m, "inner quadrature resolution");
    roar->add_option("--surgery-beta", roar_args.surgery_beta, "SoftPlus beta for ReLU nets");
    roar->add_option("--holdout", roar_args.holdout, "holdout fraction");
    roar->add_option("--noise-seed", roar_args.noise_seed, "ablation noise seed");
    roar->add_option("--seed", roar_args.seed, "task/model seed");
    roar->add_option("--out", roar_args.out, "output directory");
    roar->callback([&] { px::set_max_threads(threads); run_bench_roar(roar_args); });

    RankCorrArgs rc_args;
    CLI::App* rc = bench->add_subcommand("rankcorr", "ground-truth rank-correlation benchmark");
    rc->add_option("--variant", rc_args.variant, "multiplicative | minmax");
    rc->add_option("--methods", rc_args.methods, "comma list of ih,eh,hessian,nid,sii,sii-mc");
    rc->add_option("--samples", rc_args.samples, "dataset rows");
    rc->add_option("--explain", rc_args.n_explain, "holdout rows explained");
    rc->add_option("--hidden", rc_args.hidden, "hidden sizes, e.g. 64-64");
    rc->add_option("--epochs", rc_args.epochs, "training epochs");
    rc->add_option("--batch-size", rc_args.batch_size, "minibatch size");
    rc->add_option("--lr", rc_args.lr, "learning rate");
    rc->add_option("--k", rc_args.k, "outer quadrature resolution");
    rc->add_option("--m", rc_args.m, "inner quadrature resolution");
    rc->add_option("--sii-samples", rc_args.sii_samples, "sii-mc draws per entry");
    rc->add_option("--min-r2", rc_args.min_r2, "required validation R^2");
    rc->add_option("--holdout", rc_args.holdout, "holdout fraction");
    rc->add_option("--seed", rc_args.seed, "task/model seed");
    rc->add_option("--out", rc_args.out, "output directory");
    rc->callback([&] { px::set_max_threads(threads); run_bench_rankcorr(rc_args); });

    SanityArgs san_args;
    CLI::App* san = bench->add_subcommand("sanity", "randomization sanity checks");
    san->add_option("--variant", san_args.base.variant, "multiplicative | minmax");
    san->add_option("--seeds", san_args.n_seeds, "randomization repetitions");
    san->add_option("--explain", san_args.n_explain, "rows explained per comparison");
    san->add_option("--samples", san_args.base.samples, "dataset rows");
    san->add_option("--hidden", san_args.base.hidden, "hidden sizes");
    san->add_option("--epochs", san_args.base.epochs, "training epochs");
    san->add_option("--batch-size", san_args.base.batch_size, "minibatch size");
    san->add_option("--lr", san_args.base.lr, "learning rate");
    san->add_option("--k", san_args.base.k, "outer quadrature resolution");
    san->add_option("--m", san_args.base.m, "inner quadrature resolution");
    san->add_option("--min-r2", san_args.base.min_r2, "required reference R^2");
    san->add_option("--seed", san_args.base.seed, "root seed");
    san->add_option("--out", san_args.base.out, "output directory");
    san->callback([&] { px::set_max_threads(threads); run_bench_sanity(san_args); });

    ConvergenceArgs cv_args;
    CLI::App* cv = bench->add_subcommand("convergence", "quadrature error vs smoothness grid");
    cv->add_option("--layers", cv_args.layers, "comma list of hidden-layer counts");
    cv->add_option("--betas", cv_args.betas, "comma list of SoftPlus betas");
    cv->add_option("--kgrid", cv_args.kgrid, "comma list of quadrature resolutions");
    cv->add_option("--d", cv_args.d, "feature count");
    cv->add_option("--width", cv_args.width, "hidden width");
    cv->add_option("--samples", cv_args.samples, "inputs per cell");
    cv->add_option("--seed", cv_args.seed, "net/input seed");
    cv->add_option("--out", cv_args.out, "output directory");
    cv->callback([&] { px::set_max_threads(threads); run_bench_convergence(cv_args); });

    TimingArgs tm_args;
    CLI::App* tm = bench->add_subcommand("timing", "wall-clock scaling across methods");
    tm->add_option("--dims", tm_args.dims, "comma list of feature counts");
    tm->add_option("--methods", tm_args.methods, "comma list of methods");
    tm->add_option("--samples", tm_args.samples, "inputs per (method, d)");
    tm->add_option("--layers", tm_args.layers, "hidden layers");
    tm->add_option("--width", tm_args.width, "hidden width");
    tm->add_option("--k", tm_args.k, "outer quadrature resolution");
    tm->add_option("--m", tm_args.m, "inner quadrature resolution");
    tm->add_option("--sii-samples", tm_args.sii_samples, "sii-mc draws per entry");
    tm->add_option("--cap", tm_args.cap, "per-(method,d) time cap in seconds");
    tm->add_option("--seed", tm_args.seed, "net/input seed");
    tm->add_option("--out", tm_args.out, "output directory");
    tm->callback([&] { px::set_max_threads(threads); run_bench_timing(tm_args); });

    XorArgs xor_args;
    CLI::App* xr = bench->add_subcommand("xor", "train XOR and show the interaction signature");
    xr->add_option("--epochs", xor_args.epochs, "training epochs");
    xr->add_option("--k", xor_args.k, "outer quadrature resolution");
    xr->add_option("--m", xor_args.m, "inner quadrature resolution");
    xr->add_option("--seed", xor_args.seed, "training seed");
    xr->add_option("--out", xor_args.out, "output directory");
    xr->callback([&] { px::set_max_threads(threads); run_bench_xor(xor_args); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const px::divergence_error& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return 4;
    } catch (const px::contract_error& e) {
        std::cerr << "contract violation: " << e.what() << "\n";
        return 3;
    } catch (const px::input_error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
