// End-to-end tests of the command-line tool: spawns the real binary (path
// injected at compile time), checks exit codes, artifact layout, manifest
// contents, golden CSV headers, seed handling, and byte-level reproducibility.

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#ifndef PATHEXPLAIN_CLI_PATH
#error "PATHEXPLAIN_CLI_PATH must point at the built binary"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr interleaved
};

RunResult run_cli(const std::string& args, const std::string& env = "") {
    std::string cmd = env + " " + std::string(PATHEXPLAIN_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult r;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe)) r.output.append(buf, n);
    int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

// Fresh scratch directory, removed on destruction.
struct Scratch {
    fs::path root;
    explicit Scratch(const std::string& tag) : root(fs::path("/tmp") / ("px_cli_" + tag)) {
        fs::remove_all(root);
        fs::create_directories(root);
    }
    ~Scratch() { fs::remove_all(root); }
    std::string sub(const std::string& name) const { return (root / name).string(); }
};

void write_xor_csv(const fs::path& p) {
    std::ofstream out(p);
    out << "x1,x2,y\n0,0,0\n0,1,1\n1,0,1\n1,1,0\n";
}

json load_json(const fs::path& p) { return json::parse(slurp(p)); }

}  // namespace

TEST_CASE("help and flag errors") {
    RunResult help = run_cli("--help");
    CHECK(help.exit_code == 0);
    CHECK(help.output.find("train") != std::string::npos);
    CHECK(help.output.find("explain") != std::string::npos);
    CHECK(help.output.find("bench") != std::string::npos);
    CHECK(help.output.find("PATHEXPLAIN_SEED") != std::string::npos);

    CHECK(run_cli("explain --help").exit_code == 0);
    CHECK(run_cli("").exit_code == 2);                      // subcommand required
    CHECK(run_cli("train --no-such-flag 1").exit_code == 2);
    CHECK(run_cli("train").exit_code == 2);                 // --data required
    CHECK(run_cli("frobnicate").exit_code == 2);
}

TEST_CASE("train writes a model plus exactly one manifest, reproducibly") {
    Scratch tmp("train");
    write_xor_csv(tmp.root / "xor.csv");
    std::string flags = "train --data " + tmp.sub("xor.csv") +
                        " --arch 2-8-1 --activation softplus:1 --epochs 500 --lr 3e-2 "
                        "--batch-size 4 --seed 3 --out ";

    RunResult r1 = run_cli(flags + tmp.sub("a"));
    CHECK(r1.exit_code == 0);
    CHECK(r1.output.find("final loss") != std::string::npos);
    REQUIRE(fs::exists(tmp.root / "a/model.json"));
    REQUIRE(fs::exists(tmp.root / "a/manifest.json"));

    std::size_t n_files = 0, n_manifests = 0;
    for (const auto& e : fs::directory_iterator(tmp.root / "a")) {
        ++n_files;
        if (e.path().filename() == "manifest.json") ++n_manifests;
    }
    CHECK(n_files == 2);
    CHECK(n_manifests == 1);

    json man = load_json(tmp.root / "a/manifest.json");
    CHECK(man.at("command") == "train");
    CHECK(man.at("seed") == 3);
    CHECK(man.at("flags").at("epochs") == 500);
    CHECK(man.at("artifacts") == json::array({"model.json"}));
    CHECK(man.contains("version"));
    CHECK(man.at("duration_seconds").get<double>() >= 0.0);

    RunResult r2 = run_cli(flags + tmp.sub("b"));
    CHECK(r2.exit_code == 0);
    CHECK(slurp(tmp.root / "a/model.json") == slurp(tmp.root / "b/model.json"));  // bytes

    // The model file itself round-trips through explain.
    RunResult ex = run_cli("explain --model " + tmp.sub("a/model.json") +
                           " --method ig --input 1,1 --baseline zeros --out " + tmp.sub("ig"));
    CHECK(ex.exit_code == 0);
}

TEST_CASE("input errors carry file positions and exit 2") {
    Scratch tmp("badcsv");
    std::ofstream(tmp.root / "bad.csv") << "x1,x2,y\n0,0,oops\n";
    RunResult r = run_cli("train --data " + tmp.sub("bad.csv") + " --arch 2-4-1 --out " +
                          tmp.sub("out"));
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("row 2") != std::string::npos);
    CHECK(r.output.find("oops") != std::string::npos);

    RunResult missing = run_cli("train --data " + tmp.sub("nope.csv") + " --out " + tmp.sub("o2"));
    CHECK(missing.exit_code == 2);

    RunResult badarch = run_cli("train --data " + tmp.sub("bad.csv") + " --arch 2-x-1 --out " +
                                tmp.sub("o3"));
    CHECK(badarch.exit_code == 2);
}

TEST_CASE("training divergence exits 4 with the epoch") {
    Scratch tmp("diverge");
    write_xor_csv(tmp.root / "xor.csv");
    RunResult r = run_cli("train --data " + tmp.sub("xor.csv") +
                          " --arch 2-4-1 --optimizer sgd --lr 1e12 --epochs 50 --out " +
                          tmp.sub("out"));
    CHECK(r.exit_code == 4);
    CHECK(r.output.find("epoch") != std::string::npos);
}

TEST_CASE("second-order methods on relu models demand the surgery flag") {
    Scratch tmp("surgery");
    write_xor_csv(tmp.root / "xor.csv");
    REQUIRE(run_cli("train --data " + tmp.sub("xor.csv") +
                    " --arch 2-6-1 --activation relu --epochs 40 --seed 1 --out " + tmp.sub("m"))
                .exit_code == 0);
    std::string model = tmp.sub("m/model.json");

    RunResult refuse = run_cli("explain --model " + model +
                               " --method ih --input 1,1 --baseline zeros --out " + tmp.sub("f"));
    CHECK(refuse.exit_code == 3);
    CHECK(refuse.output.find("--surgery-beta") != std::string::npos);

    RunResult ok = run_cli("explain --model " + model +
                           " --method ih --input 1,1 --baseline zeros --surgery-beta 10 --out " +
                           tmp.sub("s"));
    CHECK(ok.exit_code == 0);
    CHECK(fs::exists(tmp.root / "s/interactions.csv"));
    json man = load_json(tmp.root / "s/manifest.json");
    CHECK(man.at("flags").at("surgery-beta") == 10.0);

    // First-order path attribution works on relu without surgery.
    CHECK(run_cli("explain --model " + model + " --method ig --input 1,1 --baseline zeros --out " +
                  tmp.sub("g"))
              .exit_code == 0);
}

TEST_CASE("explain artifacts: golden headers, trivial baselines, completeness metadata") {
    Scratch tmp("artifacts");
    write_xor_csv(tmp.root / "xor.csv");
    REQUIRE(run_cli("train --data " + tmp.sub("xor.csv") +
                    " --arch 2-8-1 --activation softplus:1 --epochs 2000 --lr 3e-2 --batch-size 4 "
                    "--seed 3 --out " +
                    tmp.sub("m"))
                .exit_code == 0);
    std::string model = tmp.sub("m/model.json");

    SECTION("attribution CSV header and input-as-baseline zeros") {
        RunResult r = run_cli("explain --model " + model +
                              " --method ig --input 1,1 --baseline 1,1 --out " + tmp.sub("ig0"));
        REQUIRE(r.exit_code == 0);
        std::string csv = slurp(tmp.root / "ig0/attributions.csv");
        CHECK(first_line(csv) == "feature_index,phi,x_value,baseline_value");
        std::istringstream lines(csv);
        std::string line;
        std::getline(lines, line);  // header
        std::size_t rows = 0;
        while (std::getline(lines, line)) {
            ++rows;
            auto c1 = line.find(','), c2 = line.find(',', line.find(',') + 1);
            CHECK(std::stod(line.substr(c1 + 1, c2 - c1 - 1)) == 0.0);
        }
        CHECK(rows == 2);
    }

    SECTION("interaction CSV/JSON agree and satisfy the printed tolerance") {
        RunResult c = run_cli("explain --model " + model +
                              " --method ih --input 1,1 --baseline zeros --k 128 --m 128 --out " +
                              tmp.sub("ihc"));
        REQUIRE(c.exit_code == 0);
        CHECK(first_line(slurp(tmp.root / "ihc/interactions.csv")) == "i,j,gamma,method");

        RunResult j = run_cli("explain --model " + model +
                              " --method ih --input 1,1 --baseline zeros --k 128 --m 128 "
                              "--format json --out " +
                              tmp.sub("ihj"));
        REQUIRE(j.exit_code == 0);
        json art = load_json(tmp.root / "ihj/interactions.json");
        double total = 0.0;
        for (const auto& row : art.at("gamma"))
            for (const auto& v : row) total += v.get<double>();
        double delta = art.at("input_output").get<double>() - art.at("reference_output").get<double>();
        json man = load_json(tmp.root / "ihj/manifest.json");
        double residual = man.at("flags").at("completeness_residual").get<double>();
        double tol = man.at("flags").at("completeness_tolerance").get<double>();
        CHECK(std::abs(total - delta) == Catch::Approx(residual).margin(1e-12));
        CHECK(residual < tol);
        CHECK(art.at("method") == "ih");
        CHECK(art.at("k") == 128);
    }

    SECTION("global nid needs no input point") {
        RunResult r = run_cli("explain --model " + model + " --method nid --out " + tmp.sub("nid"));
        REQUIRE(r.exit_code == 0);
        CHECK(first_line(slurp(tmp.root / "nid/interactions.csv")) == "i,j,gamma,method");
    }

    SECTION("method-specific flag requirements exit 2") {
        CHECK(run_cli("explain --model " + model + " --method ih --input 1,1 --out " +
                      tmp.sub("e1"))
                  .exit_code == 2);  // missing --baseline
        CHECK(run_cli("explain --model " + model + " --method eg --input 1,1 --out " +
                      tmp.sub("e2"))
                  .exit_code == 2);  // missing --background
        CHECK(run_cli("explain --model " + model + " --method warp --input 1,1 --out " +
                      tmp.sub("e3"))
                  .exit_code == 2);
        CHECK(run_cli("explain --model " + model + " --method ig --baseline zeros --out " +
                      tmp.sub("e4"))
                  .exit_code == 2);  // missing --input
    }

    SECTION("expectation methods draw from a background dataset") {
        RunResult r = run_cli("explain --model " + model + " --method eg --input 1,1 --background " +
                              tmp.sub("xor.csv") + " --samples 32 --seed 9 --out " + tmp.sub("eg"));
        REQUIRE(r.exit_code == 0);
        CHECK(first_line(slurp(tmp.root / "eg/attributions.csv")) ==
              "feature_index,phi,x_value,baseline_value");
    }
}

TEST_CASE("seeds: environment override and byte-level reproducibility") {
    Scratch tmp("seeds");
    write_xor_csv(tmp.root / "xor.csv");
    REQUIRE(run_cli("train --data " + tmp.sub("xor.csv") +
                    " --arch 2-6-1 --activation softplus:1 --epochs 200 --seed 1 --out " +
                    tmp.sub("m"))
                .exit_code == 0);
    std::string model = tmp.sub("m/model.json");
    std::string mc = "explain --model " + model +
                     " --method sii-mc --input 1,1 --baseline zeros --samples 64";

    REQUIRE(run_cli(mc + " --seed 123 --out " + tmp.sub("a")).exit_code == 0);
    REQUIRE(run_cli(mc + " --seed 123 --out " + tmp.sub("b")).exit_code == 0);
    REQUIRE(run_cli(mc + " --seed 5 --out " + tmp.sub("c")).exit_code == 0);
    REQUIRE(run_cli(mc + " --seed 5 --out " + tmp.sub("d"), "PATHEXPLAIN_SEED=123").exit_code == 0);

    std::string a = slurp(tmp.root / "a/interactions.csv");
    CHECK(a == slurp(tmp.root / "b/interactions.csv"));          // same seed, same bytes
    CHECK(a != slurp(tmp.root / "c/interactions.csv"));          // different seed
    CHECK(a == slurp(tmp.root / "d/interactions.csv"));          // env wins over --seed
    CHECK(load_json(tmp.root / "d/manifest.json").at("seed") == 123);

    RunResult bad = run_cli(mc + " --out " + tmp.sub("e"), "PATHEXPLAIN_SEED=banana");
    CHECK(bad.exit_code == 2);
    CHECK(bad.output.find("PATHEXPLAIN_SEED") != std::string::npos);
}

TEST_CASE("results are thread-count invariant through the CLI") {
    Scratch tmp("threads");
    write_xor_csv(tmp.root / "xor.csv");
    REQUIRE(run_cli("train --data " + tmp.sub("xor.csv") +
                    " --arch 2-8-1 --activation softplus:1 --epochs 300 --seed 2 --out " +
                    tmp.sub("m"))
                .exit_code == 0);
    std::string ih = "explain --model " + tmp.sub("m/model.json") +
                     " --method ih --input 1,0.5 --baseline zeros --k 64 --m 64";
    REQUIRE(run_cli("--threads 1 " + ih + " --out " + tmp.sub("t1")).exit_code == 0);
    REQUIRE(run_cli("--threads 4 " + ih + " --out " + tmp.sub("t4")).exit_code == 0);
    CHECK(slurp(tmp.root / "t1/interactions.csv") == slurp(tmp.root / "t4/interactions.csv"));
}

TEST_CASE("bench subcommands write their tables and manifests") {
    Scratch tmp("bench");

    SECTION("xor") {
        RunResult r = run_cli("bench xor --out " + tmp.sub("xor"));
        REQUIRE(r.exit_code == 0);
        std::string summary = slurp(tmp.root / "xor/xor_summary.csv");
        CHECK(first_line(summary) ==
              "f00,f11,max_output_error,gamma_01,gamma_00,gamma_11,sum_gamma");
        // gamma_01 is the 4th field of the data row: the xor pair fights its parts.
        std::istringstream lines(summary);
        std::string line;
        std::getline(lines, line);
        std::getline(lines, line);
        std::istringstream fields(line);
        std::string f;
        for (int i = 0; i < 4; ++i) std::getline(fields, f, ',');
        CHECK(std::stod(f) < 0.0);
        CHECK(fs::exists(tmp.root / "xor/xor_attr_00.csv"));
        CHECK(fs::exists(tmp.root / "xor/xor_attr_11.csv"));
        CHECK(fs::exists(tmp.root / "xor/xor_interactions_11.csv"));
        json man = load_json(tmp.root / "xor/manifest.json");
        CHECK(man.at("command") == "bench xor");
        CHECK(man.at("artifacts").size() == 4);
    }

    SECTION("convergence grid") {
        RunResult r = run_cli(
            "bench convergence --layers 2 --betas 1,10 --kgrid 4,32 --d 6 --width 6 --samples 2 "
            "--out " +
            tmp.sub("cv"));
        REQUIRE(r.exit_code == 0);
        std::string csv = slurp(tmp.root / "cv/convergence.csv");
        CHECK(first_line(csv) == "layers,beta,k,mean_rel_error,median_rel_error");
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);  // header + 4 cells
    }

    SECTION("timing rows") {
        RunResult r = run_cli(
            "bench timing --dims 4 --methods ih,nid --samples 1 --layers 2 --width 6 --k 4 --m 4 "
            "--out " +
            tmp.sub("tm"));
        REQUIRE(r.exit_code == 0);
        std::string csv = slurp(tmp.root / "tm/timing.csv");
        CHECK(first_line(csv) == "method,d,samples_done,seconds_total,seconds_per_sample,status");
        CHECK(csv.find("ok") != std::string::npos);
        CHECK(r.output.find("hardware:") != std::string::npos);
    }

    SECTION("under-trained rankcorr model is a contract violation") {
        RunResult r = run_cli(
            "bench rankcorr --variant multiplicative --methods ih --samples 400 --epochs 1 "
            "--out " +
            tmp.sub("rc"));
        CHECK(r.exit_code == 3);
        CHECK(r.output.find("under-trained") != std::string::npos);
    }

    SECTION("tiny roar run produces curves, aucs, and rankings") {
        RunResult r = run_cli(
            "bench roar --kind multiply --d 4 --pairs 2 --samples 250 --retrains 1 --steps 0,2 "
            "--methods random,nid --hidden 8 --epochs 8 --explain 8 --k 2 --m 2 --out " +
            tmp.sub("roar"));
        REQUIRE(r.exit_code == 0);
        CHECK(first_line(slurp(tmp.root / "roar/roar_curves.csv")) ==
              "method,n_ablated,mean_error,std_error");
        CHECK(first_line(slurp(tmp.root / "roar/roar_auc.csv")) == "method,auc");
        CHECK(first_line(slurp(tmp.root / "roar/roar_rankings.csv")) == "method,rank,i,j");
        json man = load_json(tmp.root / "roar/manifest.json");
        CHECK(man.at("artifacts").size() == 3);
    }
}
