// Copyright (C) 2026 The TimeTuner Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "timetuner/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "timetuner/analysis.hpp"
#include "timetuner/config.hpp"
#include "timetuner/errors.hpp"

namespace timetuner::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Options {
    std::string config;
    std::string tuned;
    std::string out;
    std::optional<std::uint64_t> seed;
    int workers = 1;
    std::optional<std::size_t> n;
    bool paths = false;
};

struct Context {
    ExperimentConfig config;
    GaussianMixtureOracle oracle;
    Trajectory trajectory;
    fs::path out_dir;
    int workers;

    TuningProblem problem() const { return {config.schedule, oracle, trajectory, config.sampler}; }
};

Context load(const Options& opt) {
    ExperimentConfig cfg = load_config(opt.config);
    if (opt.seed) cfg.set_seed(*opt.seed);
    cfg.tuner.workers = opt.workers;
    GaussianMixtureOracle oracle = cfg.make_oracle();
    Trajectory traj = cfg.make_trajectory();
    fs::path out = opt.out.empty() ? fs::path(cfg.output_dir) : fs::path(opt.out);
    fs::create_directories(out);
    return {std::move(cfg), std::move(oracle), std::move(traj), std::move(out), opt.workers};
}

void write_file(const fs::path& path, const std::string& contents) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << contents;
    if (!f) throw std::runtime_error("write failed for " + path.string());
}

TunedTrajectory load_tuned(const std::string& path, const Context& ctx) {
    std::ifstream in(path);
    if (!in) throw ContractError("cannot open tuned trajectory '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ContractError(std::string("tuned trajectory is not valid JSON: ") + e.what());
    }
    TunedTrajectory tuned = tuned_from_json(doc);
    if (tuned.sampler != ctx.config.sampler.kind)
        throw ContractError("tuned trajectory is for sampler " + to_string(tuned.sampler) +
                            ", config selects " + to_string(ctx.config.sampler.kind));
    if (tuned.base.points != ctx.trajectory.points)
        throw ContractError("tuned trajectory points differ from the configured trajectory");
    return tuned;
}

TunedTrajectory tuned_or_baseline(const Options& opt, const Context& ctx) {
    if (!opt.tuned.empty()) return load_tuned(opt.tuned, ctx);
    return baseline_tuned(ctx.trajectory, ctx.config.sampler.kind, ctx.config.schedule);
}

std::string point_header(int dim) {
    std::string h;
    for (int d = 0; d < dim; ++d) h += fmt::format("{}x{}", d ? "," : "", d);
    return h;
}

std::string point_row(const Point& p) {
    std::string row;
    for (Eigen::Index d = 0; d < p.size(); ++d) row += fmt::format("{}{:.17g}", d ? "," : "", p[d]);
    return row;
}

std::uint64_t stream_seed(const Context& ctx, Stream s) {
    return derive_seed(ctx.config.seed, {static_cast<std::uint64_t>(s)});
}

int cmd_tune(const Options& opt, std::ostream& out) {
    const Context ctx = load(opt);
    const TuneResult result = tune(ctx.config.tuner, ctx.problem());
    json doc = to_json(result.tuned);
    doc["config"] = to_json(ctx.config);
    write_file(ctx.out_dir / "tuned.json", doc.dump(2) + "\n");
    write_file(ctx.out_dir / "tune_steps.csv", step_records_csv(result.records));
    out << "wrote " << (ctx.out_dir / "tuned.json").string() << " and tune_steps.csv\n";
    return kOk;
}

int cmd_sample(const Options& opt, std::ostream& out) {
    const Context ctx = load(opt);
    const TunedTrajectory tuned = tuned_or_baseline(opt, ctx);
    const std::size_t n = opt.n.value_or(ctx.config.analysis.n_samples);
    const std::vector<Point> initial =
        initial_noise(n, ctx.oracle.dim(), ctx.config.seed);
    std::string csv = point_header(ctx.oracle.dim()) + "\n";
    if (opt.paths) {
        const auto paths = sample_paths(ctx.config.schedule, ctx.oracle, initial, tuned,
                                        ctx.config.sampler, ctx.workers);
        std::string pcsv = "path,step_index,t," + point_header(ctx.oracle.dim()) + "\n";
        for (const auto& p : paths) {
            csv += point_row(p.final_state()) + "\n";
            for (std::size_t j = 0; j < p.states.size(); ++j)
                pcsv += fmt::format("{},{},{:.17g},{}\n", p.path_id, p.steps() - static_cast<int>(j),
                                    p.times[j], point_row(p.states[j]));
        }
        write_file(ctx.out_dir / "paths.csv", pcsv);
    } else {
        const auto finals = sample_finals(ctx.config.schedule, ctx.oracle, initial, tuned,
                                          ctx.config.sampler, ctx.workers);
        for (const auto& p : finals) csv += point_row(p) + "\n";
    }
    write_file(ctx.out_dir / "samples.csv", csv);
    out << "wrote " << n << " samples to " << (ctx.out_dir / "samples.csv").string() << "\n";
    return kOk;
}

int cmd_gap(const Options& opt, std::ostream& out) {
    const Context ctx = load(opt);
    const TunedTrajectory tuned = tuned_or_baseline(opt, ctx);
    const std::size_t n = opt.n.value_or(static_cast<std::size_t>(ctx.config.analysis.n_paths));
    if (n < 1) throw ConfigError("--n", "gap needs at least one path");
    const std::vector<Point> initial =
        initial_noise(n, ctx.oracle.dim(), ctx.config.seed);
    const auto coarse =
        sample_paths(ctx.config.schedule, ctx.oracle, initial, tuned, ctx.config.sampler, ctx.workers);
    const auto reference = reference_paths(ctx.config.schedule, ctx.oracle, initial,
                                           ctx.config.analysis.dense_steps, ctx.workers);
    GapReport report = gap_profile(coarse, reference);
    report.sampler = to_string(ctx.config.sampler.kind);
    report.trajectory = to_string(ctx.trajectory.kind);
    report.tuned = !opt.tuned.empty();
    const fs::path file = ctx.out_dir / (report.tuned ? "gap_tuned.csv" : "gap_baseline.csv");
    write_file(file, gap_report_csv(report));
    out << "wrote " << file.string() << "\n";
    return kOk;
}

int cmd_sweep(const Options& opt, std::ostream& out) {
    const Context ctx = load(opt);
    if (opt.tuned.empty()) throw ConfigError("--tuned", "sweep needs a tuned trajectory");
    const TunedTrajectory tuned = load_tuned(opt.tuned, ctx);
    const std::size_t n = opt.n.value_or(ctx.config.analysis.n_samples);
    const auto rows = step_replacement_sweep(ctx.problem(), tuned, n, ctx.config.seed, ctx.workers,
                                             ctx.config.analysis.n_projections);
    write_file(ctx.out_dir / "sweep.csv", sweep_csv(rows));
    out << "wrote " << (ctx.out_dir / "sweep.csv").string() << "\n";
    return kOk;
}

int cmd_eval(const Options& opt, std::ostream& out) {
    const Context ctx = load(opt);
    const TunedTrajectory tuned = tuned_or_baseline(opt, ctx);
    const std::size_t n = opt.n.value_or(ctx.config.analysis.n_samples);
    const std::vector<Point> initial =
        initial_noise(n, ctx.oracle.dim(), ctx.config.seed);
    const auto finals =
        sample_finals(ctx.config.schedule, ctx.oracle, initial, tuned, ctx.config.sampler, ctx.workers);
    const auto reference = ctx.oracle.sample_data(n, stream_seed(ctx, Stream::Reference));
    const EvalReport report =
        evaluate_samples(finals, reference, ctx.config.analysis.n_projections, ctx.config.seed);
    json doc = {{"tuned", !opt.tuned.empty()}, {"report", to_json(report)}, {"config", to_json(ctx.config)}};
    write_file(ctx.out_dir / "eval.json", doc.dump(2) + "\n");
    out << "wrote " << (ctx.out_dir / "eval.json").string() << "\n";
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Timestep tuning laboratory for few-step diffusion samplers"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config, "experiment config (JSON)")->required();
        sub->add_option("--out", opt.out, "output directory (default: config output_dir)");
        sub->add_option("--seed", opt.seed, "override the config master seed");
        sub->add_option("--workers", opt.workers, "threads for Monte Carlo evaluation")
            ->check(CLI::Range(1, 1024));
    };
    auto* tune_cmd = app.add_subcommand("tune", "optimize conditioning timesteps");
    add_common(tune_cmd);
    auto* sample_cmd = app.add_subcommand("sample", "draw final samples");
    add_common(sample_cmd);
    sample_cmd->add_option("--tuned", opt.tuned, "tuned trajectory JSON (default: baseline)");
    sample_cmd->add_option("--n", opt.n, "number of samples");
    sample_cmd->add_flag("--paths", opt.paths, "also write every intermediate state");
    auto* gap_cmd = app.add_subcommand("gap", "gap profile against dense DDIM reference paths");
    add_common(gap_cmd);
    gap_cmd->add_option("--tuned", opt.tuned, "tuned trajectory JSON (default: baseline)");
    gap_cmd->add_option("--n", opt.n, "number of paths");
    auto* sweep_cmd = app.add_subcommand("sweep", "step-by-step replacement study");
    add_common(sweep_cmd);
    sweep_cmd->add_option("--tuned", opt.tuned, "tuned trajectory JSON")->required();
    sweep_cmd->add_option("--n", opt.n, "samples per evaluation");
    auto* eval_cmd = app.add_subcommand("eval", "distribution metrics against fresh data");
    add_common(eval_cmd);
    eval_cmd->add_option("--tuned", opt.tuned, "tuned trajectory JSON (default: baseline)");
    eval_cmd->add_option("--n", opt.n, "number of samples");

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    }

    try {
        if (tune_cmd->parsed()) return cmd_tune(opt, out);
        if (sample_cmd->parsed()) return cmd_sample(opt, out);
        if (gap_cmd->parsed()) return cmd_gap(opt, out);
        if (sweep_cmd->parsed()) return cmd_sweep(opt, out);
        if (eval_cmd->parsed()) return cmd_eval(opt, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << "\n";
        return kNumericError;
    } catch (const ContractError& e) {
        err << "contract error: " << e.what() << "\n";
        return kContractError;
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << "\n";
        return kContractError;
    } catch (const ShapeError& e) {
        err << "shape error: " << e.what() << "\n";
        return kContractError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kFailure;
}

}  // namespace timetuner::cli
