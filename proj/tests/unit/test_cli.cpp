// Copyright (C) 2026 The TimeTuner Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "timetuner/cli.hpp"

namespace fs = std::filesystem;
using timetuner::cli::run;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

struct Workspace {
    fs::path dir;
    fs::path config;
    explicit Workspace(const std::string& name, const std::string& body) {
        dir = fs::temp_directory_path() / ("timetuner_cli_" + name);
        fs::remove_all(dir);
        fs::create_directories(dir);
        config = dir / "config.json";
        std::ofstream(config) << body;
    }
    ~Workspace() { fs::remove_all(dir); }
    int call(std::vector<std::string> args, std::string* err_text = nullptr) const {
        args.insert(args.begin(), "timetuner");
        std::ostringstream out, err;
        const int rc = run(args, out, err);
        if (err_text) *err_text = err.str();
        return rc;
    }
};

const char* kConfig = R"({
  "oracle": {"preset": "gmm8"},
  "trajectory": {"kind": "quadratic", "K": 5},
  "sampler": {"kind": "ddim"},
  "tuner": {"batch": 128, "grid_points": 9},
  "analysis": {"n_paths": 16, "dense_K": 100, "n_samples": 64, "n_projections": 8},
  "seed": 5
})";

}  // namespace

TEST_CASE("every subcommand writes its files") {
    const Workspace ws("all", kConfig);
    const std::string c = ws.config.string(), o = (ws.dir / "out").string();
    REQUIRE(ws.call({"tune", "--config", c, "--out", o}) == 0);
    const std::string tuned = (ws.dir / "out" / "tuned.json").string();
    CHECK(fs::exists(tuned));
    CHECK(slurp(ws.dir / "out" / "tune_steps.csv").rfind("i,t_i,tau_i,", 0) == 0);
    CHECK(slurp(tuned).find("\"config\"") != std::string::npos);

    REQUIRE(ws.call({"sample", "--config", c, "--out", o, "--n", "10", "--paths"}) == 0);
    const std::string baseline_samples = slurp(ws.dir / "out" / "samples.csv");
    CHECK(std::count(baseline_samples.begin(), baseline_samples.end(), '\n') == 11);
    CHECK(fs::exists(ws.dir / "out" / "paths.csv"));
    REQUIRE(ws.call({"sample", "--config", c, "--out", o, "--n", "10", "--tuned", tuned}) == 0);
    CHECK(slurp(ws.dir / "out" / "samples.csv") != baseline_samples);
    REQUIRE(ws.call({"sample", "--config", c, "--out", o, "--n", "0"}) == 0);
    CHECK(slurp(ws.dir / "out" / "samples.csv") == "x0,x1\n");

    REQUIRE(ws.call({"gap", "--config", c, "--out", o}) == 0);
    REQUIRE(ws.call({"gap", "--config", c, "--out", o, "--tuned", tuned}) == 0);
    CHECK(slurp(ws.dir / "out" / "gap_baseline.csv").rfind("step_index,t,mean_gap,stderr,n_paths\n5,1000,0,0,16\n", 0) == 0);
    CHECK(fs::exists(ws.dir / "out" / "gap_tuned.csv"));

    REQUIRE(ws.call({"sweep", "--config", c, "--out", o, "--tuned", tuned}) == 0);
    const std::string sweep = slurp(ws.dir / "out" / "sweep.csv");
    CHECK(std::count(sweep.begin(), sweep.end(), '\n') == 7);

    REQUIRE(ws.call({"eval", "--config", c, "--out", o}) == 0);
    const auto ev = nlohmann::json::parse(slurp(ws.dir / "out" / "eval.json"));
    // m = 0 of the sweep is the baseline evaluation
    std::istringstream rows(sweep);
    std::string header, row0;
    std::getline(rows, header);
    std::getline(rows, row0);
    const auto c1 = row0.find(','), c2 = row0.find(',', c1 + 1);
    CHECK(std::stod(row0.substr(c1 + 1, c2 - c1 - 1)) == ev.at("report").at("frechet_distance_sq").get<double>());
    CHECK(std::stod(row0.substr(c2 + 1)) == ev.at("report").at("sliced_wasserstein").get<double>());
}

TEST_CASE("exit codes") {
    const Workspace ws("codes", kConfig);
    const std::string c = ws.config.string(), o = (ws.dir / "out").string();
    std::string err;
    CHECK(ws.call({}, &err) == timetuner::cli::kConfigError);
    CHECK(ws.call({"tune"}, &err) == timetuner::cli::kConfigError);
    CHECK(ws.call({"frobnicate", "--config", c}, &err) == timetuner::cli::kConfigError);
    CHECK(ws.call({"tune", "--config", (ws.dir / "missing.json").string()}, &err) == timetuner::cli::kConfigError);

    std::ofstream(ws.dir / "broken.json") << R"({"oracle": {"preset": "gmm8"}, "trajectory": {"kind": "uniform"}, "sampler": {"kind": "ddim"}})";
    CHECK(ws.call({"tune", "--config", (ws.dir / "broken.json").string(), "--out", o}, &err) ==
          timetuner::cli::kConfigError);
    CHECK(err.find("trajectory.K") != std::string::npos);

    REQUIRE(ws.call({"tune", "--config", c, "--out", o}) == 0);
    auto doc = nlohmann::json::parse(slurp(ws.dir / "out" / "tuned.json"));
    doc["steps"].erase(doc["steps"].size() - 1);
    std::ofstream(ws.dir / "short.json") << doc.dump();
    CHECK(ws.call({"sample", "--config", c, "--out", o, "--tuned", (ws.dir / "short.json").string()}, &err) ==
          timetuner::cli::kContractError);
    doc = nlohmann::json::parse(slurp(ws.dir / "out" / "tuned.json"));
    doc["sampler"] = "dpm-solver-2";
    std::ofstream(ws.dir / "wrong.json") << doc.dump();
    CHECK(ws.call({"eval", "--config", c, "--out", o, "--tuned", (ws.dir / "wrong.json").string()}, &err) ==
          timetuner::cli::kContractError);
    CHECK(ws.call({"sweep", "--config", c, "--out", o}, &err) == timetuner::cli::kConfigError);
    CHECK(ws.call({"tune", "--config", c, "--out", o, "--workers", "0"}, &err) == timetuner::cli::kConfigError);
}

TEST_CASE("installed binary runs") {
    const Workspace ws("binary", kConfig);
    const std::string cmd = std::string(TIMETUNER_CLI_BINARY) + " tune --config " + ws.config.string() +
                            " --out " + (ws.dir / "out").string() + " --seed 8 > /dev/null";
    CHECK(std::system(cmd.c_str()) == 0);
    const auto doc = nlohmann::json::parse(slurp(ws.dir / "out" / "tuned.json"));
    CHECK(doc.at("config").at("seed") == 8);
    CHECK(doc.at("steps").size() == 5);
    const std::string bad = std::string(TIMETUNER_CLI_BINARY) + " tune --config /nonexistent.json 2> /dev/null";
    const int status = std::system(bad.c_str());
    CHECK(WEXITSTATUS(status) == timetuner::cli::kConfigError);
}
