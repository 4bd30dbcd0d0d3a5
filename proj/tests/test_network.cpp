// Core network tests: activations against finite differences, forward pass
// against an independent JSON-walking evaluator, AD (gradient / HVP /
// Hessian) against central differences, construction/validation contracts,
// training behavior, serialization, and the determinism utilities.

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <set>
#include <thread>

#include "oracles.hpp"

using namespace pathexplain;

TEST_CASE("activation values match closed forms") {
    Activation sp(Act::softplus, 2.0);
    CHECK(sp.value(0.0) == Catch::Approx(std::log(2.0) / 2.0));
    CHECK(sp.value(1000.0) == Catch::Approx(1000.0));  // overflow guard
    CHECK(std::isfinite(sp.value(-1000.0)));
    CHECK(sp.value(-1000.0) >= 0.0);

    Activation g(Act::gelu);
    for (double x : {-2.0, -0.3, 0.0, 0.7, 2.5})
        CHECK(g.value(x) == Catch::Approx(x * 0.5 * std::erfc(-x / std::sqrt(2.0))).margin(1e-14));

    Activation s(Act::sigmoid);
    CHECK(s.value(0.0) == Catch::Approx(0.5));
    CHECK(std::isfinite(s.value(-1000.0)));
    CHECK(std::isfinite(s.value(1000.0)));

    Activation r(Act::relu);
    CHECK(r.value(-1.0) == 0.0);
    CHECK(r.value(3.0) == 3.0);
}

TEST_CASE("activation first and second derivatives match finite differences") {
    std::vector<Activation> acts = {Activation(Act::softplus, 1.0), Activation(Act::softplus, 7.0),
                                    Activation(Act::tanh), Activation(Act::sigmoid),
                                    Activation(Act::gelu), Activation(Act::identity)};
    for (const Activation& a : acts) {
        for (double x : {-1.7, -0.4, 0.0, 0.3, 1.9}) {
            double h = 1e-6;
            double d_num = (a.value(x + h) - a.value(x - h)) / (2 * h);
            double dd_num = (a.deriv(x + h) - a.deriv(x - h)) / (2 * h);
            CHECK(a.deriv(x) == Catch::Approx(d_num).margin(1e-7));
            CHECK(a.second_deriv(x) == Catch::Approx(dd_num).margin(1e-6));
        }
    }
}

TEST_CASE("relu derivative is 0 at the kink and its second derivative is refused") {
    Activation r(Act::relu);
    CHECK(r.deriv(0.0) == 0.0);
    CHECK(r.deriv(-0.5) == 0.0);
    CHECK(r.deriv(0.5) == 1.0);
    CHECK_FALSE(r.twice_differentiable());
    CHECK_THROWS_AS(r.second_deriv(0.3), contract_error);
    try {
        r.second_deriv(0.3);
    } catch (const contract_error& e) {
        CHECK(std::string(e.what()).find("softplus_surgery") != std::string::npos);
    }
}

TEST_CASE("activation names round-trip and unknown names are rejected") {
    for (Act k : {Act::identity, Act::relu, Act::softplus, Act::tanh, Act::sigmoid, Act::gelu})
        CHECK(act_from_name(act_name(k)) == k);
    CHECK_THROWS_AS(act_from_name("swish"), input_error);
    CHECK_THROWS_AS(Activation(Act::softplus, 0.0), input_error);
    CHECK_THROWS_AS(Activation(Act::softplus, -2.0), input_error);
}

TEST_CASE("forward pass matches a hand-computed two-layer example") {
    // f(x) = w2 . tanh(W1 x + b1) + b2
    Layer l1{Mat(2, 2, Vec{1.0, -0.5, 0.25, 2.0}), Vec{0.1, -0.2}, Activation(Act::tanh)};
    Layer l2{Mat(1, 2, Vec{3.0, -1.0}), Vec{0.05}, Activation(Act::identity)};
    DenseNetwork net(2, {l1, l2});
    Vec x{0.3, -0.7};
    double h1 = std::tanh(1.0 * 0.3 + -0.5 * -0.7 + 0.1);
    double h2 = std::tanh(0.25 * 0.3 + 2.0 * -0.7 + -0.2);
    CHECK(net.forward(x) == Catch::Approx(3.0 * h1 - 1.0 * h2 + 0.05).epsilon(1e-14));
}

TEST_CASE("forward pass matches the independent JSON-document evaluator") {
    for (auto [act, seed] : std::vector<std::pair<Act, std::uint64_t>>{
             {Act::softplus, 1}, {Act::tanh, 2}, {Act::gelu, 3}, {Act::sigmoid, 4}, {Act::relu, 5}}) {
        DenseNetwork net = make_dense({4, 7, 5, 3}, Activation(act, 1.5), seed);
        net.set_output_index(1);
        json j = model_to_json(net);
        for (int t = 0; t < 5; ++t) {
            Vec x = oracles::random_vec(4, 100 + t);
            CHECK(net.forward(x) == Catch::Approx(oracles::json_forward(j, x)).margin(1e-12));
        }
    }
}

TEST_CASE("multi-output selection picks the requested coordinate") {
    DenseNetwork net = make_dense({3, 6, 4}, Activation(Act::tanh), 9);
    Vec x = oracles::random_vec(3, 11);
    Vec all = net.forward_outputs(x);
    REQUIRE(all.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        net.set_output_index(i);
        CHECK(net.forward(x) == all[i]);
    }
    CHECK_THROWS_AS(net.set_output_index(4), input_error);
}

TEST_CASE("gradient matches central differences on every smooth activation") {
    for (auto [act, beta] : std::vector<std::pair<Act, double>>{
             {Act::softplus, 1.0}, {Act::softplus, 4.0}, {Act::tanh, 1.0},
             {Act::sigmoid, 1.0}, {Act::gelu, 1.0}}) {
        DenseNetwork net = make_dense({5, 8, 8, 1}, Activation(act, beta), 17);
        auto f = [&](const Vec& v) { return net.forward(v); };
        for (int t = 0; t < 3; ++t) {
            Vec x = oracles::random_vec(5, 50 + t);
            Vec g = net.gradient(x);
            Vec g_num = oracles::central_diff_gradient(f, x);
            CHECK(oracles::max_abs_diff(g, g_num) < 1e-7);
        }
    }
}

TEST_CASE("gradient respects the output selector on multi-output nets") {
    DenseNetwork net = make_dense({4, 6, 3}, Activation(Act::tanh), 23);
    net.set_output_index(2);
    Vec x = oracles::random_vec(4, 29);
    auto f = [&](const Vec& v) { return net.forward(v); };
    CHECK(oracles::max_abs_diff(net.gradient(x), oracles::central_diff_gradient(f, x)) < 1e-7);
}

TEST_CASE("hessian-vector product matches central differences of the gradient") {
    DenseNetwork net = make_dense({4, 10, 10, 1}, Activation(Act::softplus, 1.0), 31);
    Vec x = oracles::random_vec(4, 37);
    for (int t = 0; t < 3; ++t) {
        Vec v = oracles::random_vec(4, 41 + t);
        Vec hv = net.hvp(x, v);
        double h = 1e-5;
        Vec xp = x, xm = x;
        for (std::size_t i = 0; i < 4; ++i) {
            xp[i] = x[i] + h * v[i];
            xm[i] = x[i] - h * v[i];
        }
        Vec gp = net.gradient(xp), gm = net.gradient(xm);
        Vec hv_num(4);
        for (std::size_t i = 0; i < 4; ++i) hv_num[i] = (gp[i] - gm[i]) / (2 * h);
        CHECK(oracles::max_abs_diff(hv, hv_num) < 1e-6);
    }
}

TEST_CASE("full hessian matches central differences and is exactly symmetric") {
    for (auto act : {Activation(Act::softplus, 2.0), Activation(Act::tanh), Activation(Act::gelu)}) {
        DenseNetwork net = make_dense({4, 9, 7, 1}, act, 43);
        Vec x = oracles::random_vec(4, 47);
        Mat H = net.hessian(x);
        auto f = [&](const Vec& v) { return net.forward(v); };
        Mat H_num = oracles::central_diff_hessian(f, x);
        CHECK(oracles::max_abs_diff(H, H_num) < 5e-5);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) CHECK(H(i, j) == H(j, i));  // bitwise
    }
}

TEST_CASE("hessian of a linear model is exactly zero") {
    DenseNetwork net = make_dense({3, 5, 1}, Activation(Act::identity), 53);
    Mat H = net.hessian(oracles::random_vec(3, 59));
    CHECK(max_abs(H) == 0.0);
}

TEST_CASE("second-order ops on relu nets fail with an actionable contract error") {
    DenseNetwork net = make_dense({3, 4, 1}, Activation(Act::relu), 61);
    Vec x{0.1, 0.2, 0.3};
    CHECK_THROWS_AS(net.hessian(x), contract_error);
    CHECK_THROWS_AS(net.hvp(x, x), contract_error);
    try {
        net.hessian(x);
    } catch (const contract_error& e) {
        std::string msg = e.what();
        CHECK(msg.find("layer 0") != std::string::npos);
        CHECK(msg.find("relu") != std::string::npos);
        CHECK(msg.find("softplus_surgery") != std::string::npos);
        CHECK(msg.find("--surgery-beta") != std::string::npos);
    }
    // First-order ops remain available.
    CHECK_NOTHROW(net.gradient(x));
}

TEST_CASE("softplus surgery replaces relu only, keeps weights bitwise, converges as beta grows") {
    DenseNetwork net = make_dense({4, 8, 8, 1}, Activation(Act::relu), 67);
    DenseNetwork smooth = softplus_surgery(net, 10.0);
    REQUIRE(smooth.n_layers() == net.n_layers());
    for (std::size_t l = 0; l < net.n_layers(); ++l) {
        CHECK(smooth.layer(l).weights.data == net.layer(l).weights.data);  // bitwise
        CHECK(smooth.layer(l).bias == net.layer(l).bias);
        if (net.layer(l).act.kind == Act::relu) {
            CHECK(smooth.layer(l).act.kind == Act::softplus);
            CHECK(smooth.layer(l).act.beta == 10.0);
        } else {
            CHECK(smooth.layer(l).act.kind == net.layer(l).act.kind);
        }
    }
    CHECK_NOTHROW(smooth.hessian(Vec{0.1, -0.2, 0.5, 0.9}));

    DenseNetwork sharp = softplus_surgery(net, 1e4);
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
        Vec x = oracles::random_vec(4, 71 + t);
        worst = std::max(worst, std::abs(sharp.forward(x) - net.forward(x)));
    }
    CHECK(worst < 1e-2);
    CHECK_THROWS_AS(softplus_surgery(net, 0.0), input_error);
}

TEST_CASE("make_dense obeys the declared initialization contract") {
    std::vector<std::size_t> sizes{6, 9, 4, 1};
    DenseNetwork net = make_dense(sizes, Activation(Act::softplus, 1.0), 73);
    REQUIRE(net.n_layers() == 3);
    CHECK(net.input_dim() == 6);
    for (std::size_t l = 0; l < net.n_layers(); ++l) {
        const Layer& layer = net.layer(l);
        CHECK(layer.weights.rows == sizes[l + 1]);
        CHECK(layer.weights.cols == sizes[l]);
        double bound = std::sqrt(6.0 / double(sizes[l] + sizes[l + 1]));
        for (double w : layer.weights.data) {
            CHECK(std::abs(w) <= bound);
        }
        for (double b : layer.bias) CHECK(b == 0.0);
    }
    CHECK(net.layer(2).act.kind == Act::identity);  // output layer
    CHECK(net.layer(0).act.kind == Act::softplus);

    DenseNetwork same = make_dense(sizes, Activation(Act::softplus, 1.0), 73);
    DenseNetwork other = make_dense(sizes, Activation(Act::softplus, 1.0), 74);
    for (std::size_t l = 0; l < 3; ++l) {
        CHECK(same.layer(l).weights.data == net.layer(l).weights.data);
    }
    CHECK(other.layer(0).weights.data != net.layer(0).weights.data);

    CHECK_THROWS_AS(make_dense({5}, Activation(Act::tanh), 1), input_error);
    CHECK_THROWS_AS(make_dense({5, 0, 1}, Activation(Act::tanh), 1), input_error);
}

TEST_CASE("network validation rejects inconsistent shapes") {
    Layer ok1{Mat(3, 2, Vec(6, 0.1)), Vec(3, 0.0), Activation(Act::tanh)};
    Layer ok2{Mat(1, 3, Vec(3, 0.1)), Vec(1, 0.0), Activation(Act::identity)};
    CHECK_NOTHROW(DenseNetwork(2, {ok1, ok2}));

    Layer bad_chain{Mat(1, 4, Vec(4, 0.1)), Vec(1, 0.0), Activation(Act::identity)};
    CHECK_THROWS_AS(DenseNetwork(2, {ok1, bad_chain}), input_error);

    Layer bad_bias{Mat(3, 2, Vec(6, 0.1)), Vec(2, 0.0), Activation(Act::tanh)};
    CHECK_THROWS_AS(DenseNetwork(2, {bad_bias, ok2}), input_error);

    CHECK_THROWS_AS(DenseNetwork(2, {}), input_error);
    CHECK_THROWS_AS(DenseNetwork(3, {ok1, ok2}), input_error);  // input dim mismatch

    DenseNetwork net(2, {ok1, ok2});
    CHECK_THROWS_AS(net.forward(Vec{1.0}), input_error);  // wrong input size
}

TEST_CASE("training fits a linear target almost exactly") {
    // y = 2 x0 - 3 x1 + 1
    Mat xs(200, 2);
    std::mt19937_64 eng(5);
    std::normal_distribution<double> n01;
    for (double& v : xs.data) v = n01(eng);
    Vec ys(200);
    for (std::size_t r = 0; r < 200; ++r) ys[r] = 2 * xs(r, 0) - 3 * xs(r, 1) + 1;

    TrainConfig cfg;
    cfg.epochs = 400;
    cfg.learning_rate = 5e-3;
    cfg.batch_size = 32;
    cfg.seed = 7;
    DenseNetwork init = make_dense({2, 8, 1}, Activation(Act::tanh), 7);
    TrainResult tr = train(init, xs, ys, cfg);
    CHECK(r_squared(tr.net, xs, ys) > 0.999);
    CHECK(tr.final_loss < 1e-2);
}

TEST_CASE("training is deterministic for a fixed seed") {
    Mat xs(64, 3);
    std::mt19937_64 eng(11);
    std::normal_distribution<double> n01;
    for (double& v : xs.data) v = n01(eng);
    Vec ys(64);
    for (std::size_t r = 0; r < 64; ++r) ys[r] = xs(r, 0) * xs(r, 1) + xs(r, 2);
    TrainConfig cfg;
    cfg.epochs = 10;
    cfg.seed = 13;
    DenseNetwork init = make_dense({3, 6, 1}, Activation(Act::softplus, 1.0), 13);
    TrainResult a = train(init, xs, ys, cfg);
    TrainResult b = train(init, xs, ys, cfg);
    for (std::size_t l = 0; l < a.net.n_layers(); ++l)
        CHECK(a.net.layer(l).weights.data == b.net.layer(l).weights.data);  // bitwise
    CHECK(a.final_loss == b.final_loss);
}

TEST_CASE("all three optimizers reduce the loss") {
    Mat xs(128, 2);
    std::mt19937_64 eng(17);
    std::normal_distribution<double> n01;
    for (double& v : xs.data) v = n01(eng);
    Vec ys(128);
    for (std::size_t r = 0; r < 128; ++r) ys[r] = std::tanh(xs(r, 0)) - 0.5 * xs(r, 1);
    for (OptimizerKind opt : {OptimizerKind::sgd, OptimizerKind::momentum, OptimizerKind::adam}) {
        TrainConfig cfg;
        cfg.optimizer = opt;
        cfg.epochs = 50;
        cfg.learning_rate = opt == OptimizerKind::adam ? 5e-3 : 5e-2;
        cfg.seed = 19;
        DenseNetwork init = make_dense({2, 8, 1}, Activation(Act::tanh), 19);
        double before = mse(init, xs, ys);
        TrainResult tr = train(init, xs, ys, cfg);
        CHECK(mse(tr.net, xs, ys) < 0.5 * before);
    }
}

TEST_CASE("logistic loss trains a separator and rejects non-binary labels") {
    Mat xs(100, 2);
    Vec ys(100);
    std::mt19937_64 eng(23);
    std::normal_distribution<double> n01;
    for (std::size_t r = 0; r < 100; ++r) {
        xs(r, 0) = n01(eng);
        xs(r, 1) = n01(eng);
        ys[r] = xs(r, 0) + xs(r, 1) > 0 ? 1.0 : 0.0;
    }
    TrainConfig cfg;
    cfg.loss = LossKind::logistic;
    cfg.epochs = 200;
    cfg.learning_rate = 5e-2;
    cfg.seed = 29;
    DenseNetwork init = make_dense({2, 6, 1}, Activation(Act::tanh), 29);
    TrainResult tr = train(init, xs, ys, cfg);
    std::size_t correct = 0;
    for (std::size_t r = 0; r < 100; ++r) {
        double logit = tr.net.forward(Vec{xs(r, 0), xs(r, 1)});
        if ((logit > 0) == (ys[r] > 0.5)) ++correct;
    }
    CHECK(correct >= 95);

    Vec bad = ys;
    bad[0] = 0.5;
    CHECK_THROWS_AS(train(init, xs, bad, cfg), input_error);
}

TEST_CASE("diverging training reports the epoch in a divergence error") {
    Mat xs(32, 2);
    std::mt19937_64 eng(31);
    std::normal_distribution<double> n01;
    for (double& v : xs.data) v = n01(eng);
    Vec ys(32);
    for (std::size_t r = 0; r < 32; ++r) ys[r] = 100 * xs(r, 0);
    TrainConfig cfg;
    cfg.optimizer = OptimizerKind::sgd;
    cfg.learning_rate = 1e9;
    cfg.epochs = 50;
    cfg.seed = 37;
    DenseNetwork init = make_dense({2, 8, 1}, Activation(Act::tanh), 37);
    try {
        train(init, xs, ys, cfg);
        FAIL("expected divergence_error");
    } catch (const divergence_error& e) {
        CHECK(e.epoch() < cfg.epochs);
        CHECK(std::string(e.what()).find("epoch") != std::string::npos);
    }
}

TEST_CASE("training requires a single-output network and consistent shapes") {
    Mat xs(8, 2, Vec(16, 0.1));
    Vec ys(8, 0.0);
    TrainConfig cfg;
    cfg.epochs = 1;
    DenseNetwork multi = make_dense({2, 4, 3}, Activation(Act::tanh), 41);
    CHECK_THROWS_AS(train(multi, xs, ys, cfg), input_error);
    DenseNetwork single = make_dense({2, 4, 1}, Activation(Act::tanh), 41);
    Vec short_ys(7, 0.0);
    CHECK_THROWS_AS(train(single, xs, short_ys, cfg), input_error);
    TrainConfig bad = cfg;
    bad.batch_size = 0;
    CHECK_THROWS_AS(train(single, xs, ys, bad), input_error);
    bad = cfg;
    bad.epochs = 0;
    CHECK_THROWS_AS(train(single, xs, ys, bad), input_error);
    bad = cfg;
    bad.learning_rate = -1.0;
    CHECK_THROWS_AS(train(single, xs, ys, bad), input_error);
}

TEST_CASE("model JSON round-trips bitwise") {
    DenseNetwork net = make_dense({3, 5, 4, 2}, Activation(Act::softplus, 2.5), 43);
    net.set_output_index(1);
    std::string path = "/tmp/px_test_model.json";
    save_model(path, net);
    DenseNetwork back = load_model(path);
    REQUIRE(back.n_layers() == net.n_layers());
    CHECK(back.input_dim() == net.input_dim());
    CHECK(back.output_index() == 1);
    for (std::size_t l = 0; l < net.n_layers(); ++l) {
        CHECK(back.layer(l).weights.data == net.layer(l).weights.data);  // bitwise
        CHECK(back.layer(l).bias == net.layer(l).bias);
        CHECK(back.layer(l).act.kind == net.layer(l).act.kind);
        CHECK(back.layer(l).act.beta == net.layer(l).act.beta);
    }
    std::remove(path.c_str());
}

TEST_CASE("malformed model JSON is rejected with input errors") {
    DenseNetwork net = make_dense({2, 3, 1}, Activation(Act::softplus, 1.0), 47);
    json good = model_to_json(net);

    json j = good;
    j.erase("layers");
    CHECK_THROWS_AS(model_from_json(j), input_error);

    j = good;
    j["layers"][0]["activation"]["kind"] = "swish";
    CHECK_THROWS_AS(model_from_json(j), input_error);

    j = good;
    j["layers"][0]["activation"]["kind"] = "softplus";
    j["layers"][0]["activation"]["beta"] = -1.0;
    CHECK_THROWS_AS(model_from_json(j), input_error);

    j = good;
    j["layers"][0]["bias"] = std::vector<double>{0.0};  // wrong length
    CHECK_THROWS_AS(model_from_json(j), input_error);

    CHECK_THROWS_AS(load_model("/tmp/px_missing_model.json"), input_error);
}

TEST_CASE("dataset CSV round-trips and reports parse errors by row and column") {
    Mat xs(3, 2, Vec{1.5, -2.25, 0.125, 1e-3, 3.0, -0.5});
    Vec ys{0.5, -1.5, 2.0};
    std::string path = "/tmp/px_test_data.csv";
    save_dataset_csv(path, xs, ys);
    Dataset ds = load_dataset_csv(path);
    CHECK(ds.xs.data == xs.data);  // bitwise via %.17g
    CHECK(ds.ys == ys);
    REQUIRE(ds.columns.size() == 3);
    CHECK(ds.columns[0] == "x0");
    std::remove(path.c_str());

    std::string bad = "/tmp/px_bad_data.csv";
    {
        std::ofstream out(bad);
        out << "a,b,y\n1,2,3\n1,oops,3\n";
    }
    try {
        load_dataset_csv(bad);
        FAIL("expected input_error");
    } catch (const input_error& e) {
        std::string msg = e.what();
        CHECK(msg.find("row 3") != std::string::npos);  // file line (header is row 1)
        CHECK(msg.find("column") != std::string::npos);
        CHECK(msg.find("oops") != std::string::npos);
    }
    {
        std::ofstream out(bad);
        out << "a,b,y\n1,2\n";
    }
    CHECK_THROWS_AS(load_dataset_csv(bad), input_error);
    {
        std::ofstream out(bad);
        out << "";
    }
    CHECK_THROWS_AS(load_dataset_csv(bad), input_error);
    std::remove(bad.c_str());
    CHECK_THROWS_AS(load_dataset_csv("/tmp/px_missing.csv"), input_error);
}

TEST_CASE("number lists parse strictly") {
    Vec v = parse_number_list("1,2.5,-3e2");
    REQUIRE(v.size() == 3);
    CHECK(v[0] == 1.0);
    CHECK(v[1] == 2.5);
    CHECK(v[2] == -300.0);
    CHECK_THROWS_AS(parse_number_list("1,two,3"), input_error);
    CHECK_THROWS_AS(parse_number_list(""), input_error);
    CHECK_THROWS_AS(parse_number_list("1,,3"), input_error);
}

TEST_CASE("derived seeds are deterministic and tag-sensitive") {
    CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
    CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
    CHECK(derive_seed(1, 2) != derive_seed(1, 3));
    CHECK(derive_seed(1, 2) != derive_seed(2, 2));
}

TEST_CASE("chunked parallel loops cover ranges exactly and propagate exceptions") {
    for (std::size_t n : {0ul, 1ul, 7ul, 64ul, 1000ul}) {
        std::size_t chunks = fixed_chunk_count(n);
        std::vector<int> hit(n, 0);
        for (std::size_t c = 0; c < chunks; ++c) {
            auto [lo, hi] = chunk_range(n, chunks, c);
            for (std::size_t i = lo; i < hi; ++i) hit[i]++;
        }
        for (std::size_t i = 0; i < n; ++i) CHECK(hit[i] == 1);
    }

    // Sums agree bitwise independent of the thread count.
    auto run_sum = [](std::size_t threads) {
        set_max_threads(threads);
        std::size_t n = 1000, chunks = fixed_chunk_count(n);
        std::vector<double> partial(chunks, 0.0);
        parallel_for_chunks(chunks, [&](std::size_t c) {
            auto [lo, hi] = chunk_range(n, chunks, c);
            for (std::size_t i = lo; i < hi; ++i) partial[c] += std::sin(double(i)) * 1e-3;
        });
        double total = 0;
        for (double p : partial) total += p;
        set_max_threads(0);
        return total;
    };
    double t1 = run_sum(1), t4 = run_sum(4);
    CHECK(t1 == t4);  // bitwise

    set_max_threads(3);
    CHECK_THROWS_AS(parallel_for_chunks(8, [](std::size_t c) {
        if (c == 5) throw input_error("boom");
    }), input_error);
    set_max_threads(0);
}
