// Command-line benchmark harness: generate instances, run single solves,
// reproduce the sweep / noise-table / timing experiments, render plots.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "omr/bench.hpp"
#include "omr/eval.hpp"
#include "omr/plot.hpp"
#include "omr/problem.hpp"

namespace {

struct SweepCli {
    std::string config_path;
    std::string out;
    std::string solvers;
    std::string d_list, n_list, sigma_list;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int trials = 0;
    int k = 0;
    int workers = -1;
    double threshold = 0.0;
};

void add_sweep_flags(CLI::App* cmd, SweepCli& cli) {
    cmd->add_option("--config", cli.config_path, "config file with key = value lines");
    cmd->add_option("--out", cli.out, "output CSV path");
    cmd->add_option("--solver", cli.solvers, "comma-separated solver names");
    cmd->add_option("--seed", cli.seed, "base seed")->each([&cli](const std::string&) {
        cli.seed_set = true;
    });
    cmd->add_option("--trials", cli.trials, "trials per grid cell");
    cmd->add_option("-K,--K", cli.k, "matrix count K");
    cmd->add_option("--D", cli.d_list, "comma-separated D values");
    cmd->add_option("--N", cli.n_list, "comma-separated N values");
    cmd->add_option("--sigma", cli.sigma_list, "comma-separated noise levels");
    cmd->add_option("--workers", cli.workers, "worker thread count");
    cmd->add_option("--threshold", cli.threshold, "success threshold override");
}

omr::bench::SweepConfig build_config(const SweepCli& cli) {
    omr::bench::SweepConfig cfg;
    if (!cli.config_path.empty()) cfg = omr::bench::load_config(cli.config_path);
    if (!cli.solvers.empty()) omr::bench::apply_config_entry(cfg, "solvers", cli.solvers);
    if (!cli.d_list.empty()) omr::bench::apply_config_entry(cfg, "D", cli.d_list);
    if (!cli.n_list.empty()) omr::bench::apply_config_entry(cfg, "N", cli.n_list);
    if (!cli.sigma_list.empty()) omr::bench::apply_config_entry(cfg, "sigma", cli.sigma_list);
    if (cli.k > 0) cfg.K = cli.k;
    if (cli.trials > 0) cfg.trials = cli.trials;
    if (cli.seed_set) cfg.base_seed = cli.seed;
    if (cli.workers >= 0) cfg.workers = cli.workers;
    if (cli.threshold > 0.0) cfg.threshold = cli.threshold;
    if (!cli.out.empty()) cfg.out = cli.out;
    return cfg;
}

void print_report(const omr::SolverReport& report) {
    std::cout << "iterations        " << report.iterations << '\n'
              << "converged         " << (report.converged ? "yes" : "no") << '\n'
              << "objective         " << omr::format_double(report.objective) << '\n'
              << "primal_residual   " << omr::format_double(report.primal_residual) << '\n'
              << "dual_residual     " << omr::format_double(report.dual_residual) << '\n'
              << "runtime_seconds   " << omr::format_double(report.runtime_seconds) << '\n';
    for (const auto& w : report.warnings) std::cout << "warning: " << w << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"orthogonal matrix recovery benchmark"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "write a random instance file");
    std::string gen_out = "instance.txt";
    int gen_k = 3, gen_n = 22, gen_d = 10;
    std::uint64_t gen_seed = 1;
    double gen_sigma = 0.0;
    bool gen_no_truth = false;
    gen->add_option("--out", gen_out, "instance file path");
    gen->add_option("-K,--K", gen_k, "matrix count K (>= 3)");
    gen->add_option("-N,--N", gen_n, "rows per matrix");
    gen->add_option("-D,--D", gen_d, "orthogonal dimension");
    gen->add_option("--seed", gen_seed, "generation seed");
    gen->add_option("--sigma", gen_sigma, "noise stddev added to X_K");
    gen->add_flag("--no-truth", gen_no_truth, "omit the ground-truth V blocks");

    // solve
    auto* solve = app.add_subcommand("solve", "run one solver on one instance file");
    std::string solve_in, solve_solver = "SDP";
    double solve_threshold = 0.0;
    omr::SdpOptions sdp_opts;
    omr::GradOptions grad_opts;
    solve->add_option("--in", solve_in, "instance file path")->required();
    solve->add_option("--solver", solve_solver, "SDP, LS, C-LS, LS+ or C-LS+");
    solve->add_option("--threshold", solve_threshold, "success threshold override");
    solve->add_option("--sdp-rho", sdp_opts.rho, "penalty parameter");
    solve->add_option("--sdp-max-iter", sdp_opts.max_iter, "splitting iteration cap");
    solve->add_option("--grad-max-iter", grad_opts.max_iter, "gradient iteration cap");

    // sweep / noise-table / timing
    SweepCli sweep_cli, table_cli, timing_cli;
    auto* sweep = app.add_subcommand("sweep", "error-vs-N grid sweep to CSV");
    add_sweep_flags(sweep, sweep_cli);
    auto* table = app.add_subcommand("noise-table", "noisy-regime mean-error table");
    add_sweep_flags(table, table_cli);
    auto* timing = app.add_subcommand("timing", "mean solver wall time per cell");
    add_sweep_flags(timing, timing_cli);

    // plot
    auto* plot = app.add_subcommand("plot", "render error-vs-N curves from a sweep CSV");
    std::string plot_in, plot_out = "plot.svg";
    bool plot_logy = false;
    plot->add_option("--in", plot_in, "sweep data CSV")->required();
    plot->add_option("--out", plot_out, "output SVG path");
    plot->add_flag("--log-y", plot_logy, "logarithmic error axis");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            auto [inst, truth] = omr::generate_instance(gen_k, gen_n, gen_d, gen_seed);
            if (gen_sigma > 0.0) {
                omr::NoiseSpec spec;
                spec.sigma = gen_sigma;
                inst = omr::add_noise(inst, spec, omr::splitmix64(gen_seed ^ 0xa5a5a5a5deadbeefULL));
            }
            omr::save_instance(inst, gen_out, gen_no_truth ? nullptr : &truth);
            std::cout << "wrote " << gen_out << " (K=" << gen_k << " N=" << gen_n
                      << " D=" << gen_d << " sigma=" << omr::format_double(gen_sigma) << ")\n";
        } else if (solve->parsed()) {
            const omr::LoadedInstance loaded = omr::load_instance(solve_in);
            const double threshold =
                solve_threshold > 0.0
                    ? solve_threshold
                    : omr::default_threshold(loaded.instance.sigma, loaded.instance.D);
            if (loaded.truth) {
                omr::TrialResult r = omr::bench::run_solver(
                    solve_solver, loaded.instance, *loaded.truth, threshold, sdp_opts, grad_opts);
                std::cout << "solver            " << r.solver << '\n';
                for (std::size_t i = 0; i < r.errors.size(); ++i)
                    std::cout << "err_V" << i + 1 << "            "
                              << omr::format_double(r.errors[i]) << '\n';
                std::cout << "err_mean          " << omr::format_double(r.err_mean) << '\n'
                          << "err_max           " << omr::format_double(r.err_max) << '\n'
                          << "success           " << (r.success ? 1 : 0) << " (threshold "
                          << omr::format_double(threshold) << ")\n";
                print_report(r.report);
            } else {
                // no ground truth stored: report solver diagnostics only
                omr::bench::validate_solver_names({solve_solver});
                omr::OrthogonalSet dummy;
                omr::SolverReport report;
                if (solve_solver == "SDP") {
                    auto [gram, rep] = omr::solve_sdp(omr::assemble_cost(loaded.instance), sdp_opts);
                    auto extracted = omr::extract_solution(gram, rep);
                    report = rep;
                } else if (solve_solver == "LS") {
                    std::tie(dummy, report) = omr::solve_ls(loaded.instance);
                } else if (solve_solver == "C-LS") {
                    std::tie(dummy, report) = omr::solve_cls(loaded.instance, grad_opts);
                } else if (solve_solver == "LS+") {
                    std::tie(dummy, report) = omr::solve_lsplus(loaded.instance, grad_opts);
                } else {
                    std::tie(dummy, report) = omr::solve_clsplus(loaded.instance, grad_opts);
                }
                std::cout << "solver            " << solve_solver
                          << "\n(no ground truth in file; errors unavailable)\n";
                print_report(report);
            }
        } else if (sweep->parsed()) {
            omr::bench::SweepConfig cfg = build_config(sweep_cli);
            omr::bench::run_sweep(cfg);
            std::cout << "wrote " << cfg.out << " and "
                      << omr::bench::sibling_path(cfg.out, ".summary.csv") << '\n';
        } else if (table->parsed()) {
            omr::bench::SweepConfig cfg = build_config(table_cli);
            if (table_cli.out.empty() && cfg.out == "sweep.csv") cfg.out = "noise_table.csv";
            omr::bench::run_noise_table(cfg);
            std::cout << "wrote " << cfg.out << '\n';
        } else if (timing->parsed()) {
            omr::bench::SweepConfig cfg = build_config(timing_cli);
            if (timing_cli.out.empty() && cfg.out == "sweep.csv") cfg.out = "timing.csv";
            omr::bench::run_timing(cfg);
            std::cout << "wrote " << cfg.out << '\n';
        } else if (plot->parsed()) {
            omr::bench::PlotOptions opts;
            opts.log_y = plot_logy;
            const auto files = omr::bench::emit_plot(plot_in, plot_out, opts);
            for (const auto& f : files) std::cout << "wrote " << f << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
