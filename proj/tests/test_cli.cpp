#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fucik/cli.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = fucik::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

struct Workspace {
    fs::path root;

    explicit Workspace(const std::string& name) : root(fs::temp_directory_path() / ("fucik_cli_" + name)) {
        fs::remove_all(root);
        fs::create_directories(root);
    }
    ~Workspace() { fs::remove_all(root); }

    std::string file(const std::string& name, const std::string& content) const {
        const fs::path p = root / name;
        std::ofstream(p) << content;
        return p.string();
    }
    std::string path(const std::string& name) const { return (root / name).string(); }
};

std::string read(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kSmall = R"({"n_per_unit": 16})";

}  // namespace

TEST_CASE("assemble writes a cache file and reuses it") {
    Workspace ws("assemble");
    const std::string cfg = ws.file("cfg.json", kSmall);
    const Run first = run({"assemble", "--config", cfg, "--cache-dir", ws.path("cache")});
    REQUIRE(first.code == 0);
    const json j1 = json::parse(first.out);
    CHECK(j1["cache_hit"] == false);
    CHECK(fs::exists(j1["cache_file"].get<std::string>()));
    CHECK(j1["dofs"] == 15);
    const Run second = run({"assemble", "--config", cfg, "--cache-dir", ws.path("cache")});
    REQUIRE(second.code == 0);
    CHECK(json::parse(second.out)["cache_hit"] == true);
}

TEST_CASE("cache directory falls back to the environment variable") {
    Workspace ws("env");
    const std::string cfg = ws.file("cfg.json", kSmall);
    const std::string previous = std::getenv("FUCIK_CACHE_DIR") ? std::getenv("FUCIK_CACHE_DIR") : "";
    setenv("FUCIK_CACHE_DIR", ws.path("envcache").c_str(), 1);
    const Run r = run({"assemble", "--config", cfg});
    if (previous.empty())
        unsetenv("FUCIK_CACHE_DIR");
    else
        setenv("FUCIK_CACHE_DIR", previous.c_str(), 1);
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["cache_file"].get<std::string>().rfind(ws.path("envcache"), 0) == 0);
}

TEST_CASE("configuration errors exit with code 2") {
    Workspace ws("errors");
    const Run bad_s = run({"assemble", "--config", ws.file("s.json", R"({"s": 1.2})")});
    CHECK(bad_s.code == 2);
    CHECK(bad_s.err.find("s out of range") != std::string::npos);
    CHECK(run({"assemble", "--config", ws.file("m.json", "{ \"s\": ")}).code == 2);
    CHECK(run({"assemble", "--config", ws.path("missing.json")}).code == 2);
    CHECK(run({"assemble", "--config", ws.file("u.json", R"({"colour": 3})")}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({}).code == 2);
    const Run k1 = run({"curve", "--config", ws.file("c.json", kSmall), "--k", "1"});
    CHECK(k1.code == 2);
    CHECK(k1.err.find("k must be ≥ 2") != std::string::npos);
    CHECK(run({"curve", "--config", ws.file("c2.json", kSmall), "--k", "500"}).code == 2);
    CHECK(run({"classify", "--config", ws.file("c3.json", kSmall), "--k", "2", "--a", "1", "--b", "1"}).code == 2);
}

TEST_CASE("eigs reports the spectrum and exports vectors") {
    Workspace ws("eigs");
    const std::string cfg = ws.file("cfg.json", kSmall);
    const Run r = run({"eigs", "--config", cfg, "--cache-dir", ws.path("cache"), "--vector", "1", "--vector-out",
                       ws.path("phi1.txt")});
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    for (const char* key : {"lambdas", "mults", "d", "residuals"}) CHECK(j.contains(key));
    const auto lambdas = j["lambdas"].get<std::vector<double>>();
    CHECK(std::is_sorted(lambdas.begin(), lambdas.end()));
    const double l1 = lambdas.front();

    // verify: first eigenvector at (5 λ₁, λ₁) is accepted.
    std::ostringstream a;
    a.precision(17);
    a << 5.0 * l1;
    std::ostringstream b;
    b.precision(17);
    b << l1;
    const Run v = run({"verify", "--config", cfg, "--cache-dir", ws.path("cache"), "--u", ws.path("phi1.txt"), "--a",
                       a.str(), "--b", b.str()});
    REQUIRE(v.code == 0);
    const json jv = json::parse(v.out);
    CHECK(jv["accepted"] == true);
    CHECK(jv["residual"].get<double>() <= 1e-10);
}

TEST_CASE("verify rejects zero, random and mismatched vectors") {
    Workspace ws("verify");
    const std::string cfg = ws.file("cfg.json", kSmall);
    const std::string cache = ws.path("cache");
    std::string zeros;
    for (int i = 0; i < 15; ++i) zeros += "0\n";
    CHECK(run({"verify", "--config", cfg, "--cache-dir", cache, "--u", ws.file("z.txt", zeros), "--a", "20", "--b",
               "30"})
              .code == 2);
    std::mt19937_64 rng(5);
    std::ostringstream random;
    random.precision(17);
    const Eigen::VectorXd u = testing_support::random_vector(rng, 15);
    for (int i = 0; i < 15; ++i) random << u[i] << (i + 1 < 15 ? "," : "\n");
    const Run r = run({"verify", "--config", cfg, "--cache-dir", cache, "--u", ws.file("r.txt", random.str()), "--a",
                       "20", "--b", "30"});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["accepted"] == false);
    CHECK(run({"verify", "--config", cfg, "--cache-dir", cache, "--u", ws.file("s.txt", "1\n2\n"), "--a", "20", "--b",
               "30"})
              .code == 2);
}

TEST_CASE("curve, classify and gap outputs") {
    Workspace ws("curve");
    const std::string cfg = ws.file("cfg.json", kSmall);
    const std::string cache = ws.path("cache");
    const Run c = run({"curve", "--config", cfg, "--cache-dir", cache, "--k", "2", "--grid", "5", "--output",
                       ws.path("curve.csv")});
    REQUIRE(c.code == 0);
    std::istringstream csv(read(ws.path("curve.csv")));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "a,nu,mu,flags");
    int rows = 0;
    while (std::getline(csv, line)) ++rows;
    CHECK(rows == 5);

    const Run cl = run({"classify", "--config", cfg, "--cache-dir", cache, "--k", "2", "--a", "40", "--b", "45"});
    REQUIRE(cl.code == 0);
    const json j = json::parse(cl.out);
    for (const char* key : {"label", "n", "m", "itilde_signs"}) CHECK(j.contains(key));
    CHECK(j["label"] == "AboveUpper");

    const Run g = run({"gap", "--config", cfg, "--cache-dir", cache, "--k", "2"});
    REQUIRE(g.code == 0);
    const json jg = json::parse(g.out);
    CHECK(jg["nonempty"] == false);
    CHECK(jg["witness_norms"].size() == 2);
}

TEST_CASE("p-Laplacian subcommands") {
    Workspace ws("plap");
    const std::string cfg = ws.file("cfg.json", kSmall);
    const Run l = run({"plap-lambda1", "--config", cfg, "--cache-dir", ws.path("cache"), "--p", "3"});
    REQUIRE(l.code == 0);
    const json j = json::parse(l.out);
    for (const char* key : {"lambda1", "iterations", "residual"}) CHECK(j.contains(key));
    const Run c = run({"plap-curve", "--config", cfg, "--cache-dir", ws.path("cache"), "--p", "2", "--tgrid", "0.8,1"});
    REQUIRE(c.code == 0);
    std::istringstream csv(c.out);
    std::string line;
    std::getline(csv, line);
    CHECK(line == "t,c,a,b,residual");
    CHECK(run({"plap-curve", "--config", cfg, "--tgrid", "1,abc"}).code == 2);
    CHECK(run({"plap-lambda1", "--config", cfg, "--p", "0.5"}).code == 2);
}

TEST_CASE("full run writes deterministic outputs and a manifest") {
    Workspace ws("full");
    const std::string cfg = ws.file("cfg.json", R"({"n_per_unit": 24, "seed": 42})");
    const Run first = run({"full", "--config", cfg, "--cache-dir", ws.path("cache"), "--k", "2", "--grid", "9",
                           "--out-dir", ws.path("run1")});
    REQUIRE(first.code == 0);
    const Run second = run({"full", "--config", cfg, "--cache-dir", ws.path("cache"), "--k", "2", "--grid", "9",
                            "--threads", "3", "--out-dir", ws.path("run2")});
    REQUIRE(second.code == 0);
    CHECK(read(ws.path("run1/curve.csv")) == read(ws.path("run2/curve.csv")));
    CHECK(read(ws.path("run1/classification.json")) == read(ws.path("run2/classification.json")));

    const json m1 = json::parse(read(ws.path("run1/manifest.json")));
    const json m2 = json::parse(read(ws.path("run2/manifest.json")));
    CHECK(m1["cache"]["forms_hit"] == false);
    CHECK(m2["cache"]["forms_hit"] == true);
    CHECK(m2["cache"]["eigen_hit"] == true);
    CHECK(m1["config_hash"] == m2["config_hash"]);
    CHECK(m1["outputs"].size() == 3);
    for (const auto& p : m1["outputs"]) CHECK(fs::exists(p.get<std::string>()));
    CHECK(m1["timings_seconds"].contains("total"));

    std::istringstream csv(read(ws.path("run1/curve.csv")));
    std::string line;
    std::getline(csv, line);
    std::vector<double> nu;
    std::vector<double> mu;
    while (std::getline(csv, line)) {
        std::istringstream row(line);
        std::string a, n, m, flags;
        std::getline(row, a, ',');
        std::getline(row, n, ',');
        std::getline(row, m, ',');
        std::getline(row, flags, ',');
        if (flags != "ok") continue;
        nu.push_back(std::stod(n));
        mu.push_back(std::stod(m));
    }
    REQUIRE(nu.size() >= 3);
    for (std::size_t i = 1; i < nu.size(); ++i) {
        CHECK(nu[i] < nu[i - 1] + 1e-8);
        CHECK(mu[i] < mu[i - 1] + 1e-8);
    }
    CHECK(run({"full", "--config", cfg, "--k", "2"}).code == 2);
}

TEST_CASE("solver failures exit with code 3") {
    Workspace ws("solver");
    const std::string cfg = ws.file("cfg.json", R"({"n_per_unit": 16, "tolerances": {"solver_tol": 1e-300}})");
    const Run r = run({"plap-lambda1", "--config", cfg, "--cache-dir", ws.path("cache"), "--p", "3"});
    CHECK(r.code == 3);
    CHECK(r.err.find("did not converge") != std::string::npos);
}

TEST_CASE("help and version") {
    CHECK(run({"--help"}).code == 0);
    const Run v = run({"--version"});
    CHECK(v.code == 0);
    CHECK(v.out.find(fucik::kVersion) != std::string::npos);
}
