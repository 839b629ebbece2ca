#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "omr/baselines.hpp"
#include "omr/eval.hpp"
#include "omr/problem.hpp"
#include "omr/sdp.hpp"

namespace omr::bench {

inline const std::vector<std::string>& known_solvers() {
    static const std::vector<std::string> names{"SDP", "C-LS+", "LS+", "C-LS", "LS"};
    return names;
}

struct SweepConfig {
    std::vector<std::string> solvers{"SDP"};
    int K = 3;
    std::vector<int> D_list{10};
    std::vector<int> N_list;            // empty: default grid D-2 .. 2D+4 per D
    std::vector<double> sigma_list{0.0};
    int trials = 50;
    std::uint64_t base_seed = 1;
    double threshold = 0.0;             // 0: default rule (1e-3 clean, 10*sigma*sqrt(D) noisy)
    std::string out = "sweep.csv";
    int workers = 0;                    // 0: hardware concurrency
    SdpOptions sdp;
    GradOptions grad;
};

struct CellSummary {
    std::string solver;
    int K = 0, D = 0, N = 0;
    double sigma = 0.0;
    int trials = 0;
    double mean_err = 0.0;       // mean of err_V1 over trials
    double median_err = 0.0;     // median of err_V1
    double success_rate = 0.0;
    double mean_runtime = 0.0;
};

struct SweepResult {
    std::vector<TrialResult> rows;       // ordered by (cell, trial, solver)
    std::vector<CellSummary> summaries;  // ordered by (cell, solver)
};

/// Deterministic per-trial seed: a splitmix64 chain over the base seed and
/// the cell coordinates, independent of execution order.
inline std::uint64_t trial_seed(std::uint64_t base, int K, int D, int N, double sigma,
                                long trial) {
    std::uint64_t s = splitmix64(base);
    s = hash_combine(s, static_cast<std::uint64_t>(K));
    s = hash_combine(s, static_cast<std::uint64_t>(D));
    s = hash_combine(s, static_cast<std::uint64_t>(N));
    std::uint64_t sigma_bits;
    static_assert(sizeof(sigma_bits) == sizeof(sigma));
    std::memcpy(&sigma_bits, &sigma, sizeof(sigma_bits));
    s = hash_combine(s, sigma_bits);
    s = hash_combine(s, static_cast<std::uint64_t>(trial));
    return s;
}

inline void validate_solver_names(const std::vector<std::string>& names) {
    if (names.empty()) throw std::invalid_argument("sweep: solver list is empty");
    for (const auto& n : names) {
        const auto& known = known_solvers();
        if (std::find(known.begin(), known.end(), n) == known.end()) {
            std::string msg = "sweep: unknown solver '" + n + "' (expected one of";
            for (const auto& k : known) msg += " " + k;
            throw std::invalid_argument(msg + ")");
        }
    }
}

/// Run one named solver on one instance; runtime is measured around the
/// solve+extract call only.
inline TrialResult run_solver(const std::string& name, const ProblemInstance& inst,
                              const OrthogonalSet& truth, double threshold,
                              const SdpOptions& sdp_opts, const GradOptions& grad_opts) {
    TrialResult r;
    r.solver = name;
    r.K = inst.K;
    r.N = inst.N;
    r.D = inst.D;
    r.sigma = inst.sigma;

    const detail::StopWatch watch;
    OrthogonalSet estimate;
    if (name == "SDP") {
        auto [gram, report] = solve_sdp(assemble_cost(inst), sdp_opts);
        auto [set, diag] = extract_solution(gram, report);
        estimate = std::move(set);
        r.report = std::move(report);
        r.report.warnings.insert(r.report.warnings.end(), diag.warnings.begin(),
                                 diag.warnings.end());
    } else if (name == "LS") {
        std::tie(estimate, r.report) = solve_ls(inst);
    } else if (name == "C-LS") {
        std::tie(estimate, r.report) = solve_cls(inst, grad_opts);
    } else if (name == "LS+") {
        std::tie(estimate, r.report) = solve_lsplus(inst, grad_opts);
    } else if (name == "C-LS+") {
        std::tie(estimate, r.report) = solve_clsplus(inst, grad_opts);
    } else {
        throw std::invalid_argument("run_solver: unknown solver '" + name + "'");
    }
    r.report.runtime_seconds = watch.seconds();
    fill_errors(r, estimate, truth, threshold);
    return r;
}

namespace detail {

struct Cell {
    int D = 0;
    int N = 0;
    double sigma = 0.0;
};

inline std::vector<Cell> expand_cells(const SweepConfig& cfg) {
    std::vector<Cell> cells;
    for (int d : cfg.D_list) {
        std::vector<int> ns = cfg.N_list;
        if (ns.empty())
            for (int n = std::max(1, d - 2); n <= 2 * d + 4; ++n) ns.push_back(n);
        for (int n : ns)
            for (double sigma : cfg.sigma_list) cells.push_back({d, n, sigma});
    }
    return cells;
}

inline double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace detail

/// Run the full grid; every selected solver sees the identical instance
/// within a trial. Deterministic for a fixed config and base seed.
inline SweepResult run_sweep_in_memory(const SweepConfig& cfg) {
    validate_solver_names(cfg.solvers);
    if (cfg.trials < 1) throw std::invalid_argument("sweep: trials must be >= 1");
    if (cfg.K < 3) throw std::invalid_argument("sweep: K must be >= 3");
    if (cfg.D_list.empty() || cfg.sigma_list.empty())
        throw std::invalid_argument("sweep: D and sigma lists must be non-empty");

    const std::vector<detail::Cell> cells = detail::expand_cells(cfg);
    const std::size_t solver_count = cfg.solvers.size();
    const std::size_t task_count = cells.size() * static_cast<std::size_t>(cfg.trials);

    SweepResult result;
    result.rows.resize(task_count * solver_count);

    int workers = cfg.workers > 0 ? cfg.workers
                                  : static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    workers = std::min<int>(workers, static_cast<int>(task_count));

    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;

    auto worker = [&]() {
        for (;;) {
            const std::size_t task = next.fetch_add(1);
            if (task >= task_count) return;
            {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (first_error) return;
            }
            try {
                const detail::Cell& cell = cells[task / cfg.trials];
                const long trial = static_cast<long>(task % cfg.trials);
                const std::uint64_t seed =
                    trial_seed(cfg.base_seed, cfg.K, cell.D, cell.N, cell.sigma, trial);

                auto [clean, truth] = generate_instance(cfg.K, cell.N, cell.D, seed);
                ProblemInstance inst = std::move(clean);
                if (cell.sigma > 0.0) {
                    NoiseSpec spec;
                    spec.sigma = cell.sigma;
                    inst = add_noise(inst, spec, splitmix64(seed ^ 0xa5a5a5a5deadbeefULL));
                }
                const double threshold = cfg.threshold > 0.0
                                             ? cfg.threshold
                                             : default_threshold(cell.sigma, cell.D);
                for (std::size_t s = 0; s < solver_count; ++s) {
                    TrialResult r = run_solver(cfg.solvers[s], inst, truth, threshold,
                                               cfg.sdp, cfg.grad);
                    r.trial = trial;
                    r.seed = seed;
                    result.rows[task * solver_count + s] = std::move(r);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    // cell summaries, in (cell, solver) order
    for (std::size_t c = 0; c < cells.size(); ++c) {
        for (std::size_t s = 0; s < solver_count; ++s) {
            CellSummary sum;
            sum.solver = cfg.solvers[s];
            sum.K = cfg.K;
            sum.D = cells[c].D;
            sum.N = cells[c].N;
            sum.sigma = cells[c].sigma;
            sum.trials = cfg.trials;
            std::vector<double> errs;
            errs.reserve(cfg.trials);
            double err_sum = 0.0, time_sum = 0.0;
            int successes = 0;
            for (int t = 0; t < cfg.trials; ++t) {
                const TrialResult& r =
                    result.rows[(c * cfg.trials + t) * solver_count + s];
                errs.push_back(r.err_V1);
                err_sum += r.err_V1;
                time_sum += r.report.runtime_seconds;
                successes += r.success ? 1 : 0;
            }
            sum.mean_err = err_sum / cfg.trials;
            sum.median_err = detail::median_of(std::move(errs));
            sum.success_rate = static_cast<double>(successes) / cfg.trials;
            sum.mean_runtime = time_sum / cfg.trials;
            result.summaries.push_back(std::move(sum));
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// CSV emission
// ---------------------------------------------------------------------------

inline constexpr const char* kDataHeader =
    "solver,K,D,N,sigma,trial,seed,err_V1,err_mean,err_max,success,iterations,converged,"
    "objective,runtime_seconds";
inline constexpr const char* kSummaryHeader =
    "solver,K,D,N,sigma,trials,mean_err,median_err,success_rate,mean_runtime_seconds";

/// Output path with a trailing ".csv" replaced by the given suffix.
inline std::string sibling_path(const std::string& out, const std::string& suffix) {
    std::string stem = out;
    if (stem.size() >= 4 && stem.compare(stem.size() - 4, 4, ".csv") == 0)
        stem.erase(stem.size() - 4);
    return stem + suffix;
}

inline void write_config_comment(std::ostream& os, const SweepConfig& cfg) {
    os << "# omr K=" << cfg.K << " trials=" << cfg.trials << " base_seed=" << cfg.base_seed
       << " threshold="
       << (cfg.threshold > 0.0 ? format_double(cfg.threshold) : std::string("auto")) << '\n';
}

inline void write_data_csv(const SweepResult& result, const SweepConfig& cfg,
                           const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("sweep: cannot open output file " + path);
    write_config_comment(os, cfg);
    os << kDataHeader << '\n';
    for (const TrialResult& r : result.rows) {
        os << r.solver << ',' << r.K << ',' << r.D << ',' << r.N << ','
           << format_double(r.sigma) << ',' << r.trial << ',' << r.seed << ','
           << format_double(r.err_V1) << ',' << format_double(r.err_mean) << ','
           << format_double(r.err_max) << ',' << (r.success ? 1 : 0) << ','
           << r.report.iterations << ',' << (r.report.converged ? 1 : 0) << ','
           << format_double(r.report.objective) << ','
           << format_double(r.report.runtime_seconds) << '\n';
    }
    if (!os) throw std::runtime_error("sweep: write failed for " + path);
}

inline void write_summary_csv(const SweepResult& result, const SweepConfig& cfg,
                              const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("sweep: cannot open output file " + path);
    write_config_comment(os, cfg);
    os << kSummaryHeader << '\n';
    for (const CellSummary& s : result.summaries) {
        os << s.solver << ',' << s.K << ',' << s.D << ',' << s.N << ','
           << format_double(s.sigma) << ',' << s.trials << ',' << format_double(s.mean_err)
           << ',' << format_double(s.median_err) << ',' << format_double(s.success_rate)
           << ',' << format_double(s.mean_runtime) << '\n';
    }
    if (!os) throw std::runtime_error("sweep: write failed for " + path);
}

/// Grid sweep: per-trial rows to cfg.out, per-cell summaries to the sibling
/// ".summary.csv" file.
inline SweepResult run_sweep(const SweepConfig& cfg) {
    SweepResult result = run_sweep_in_memory(cfg);
    write_data_csv(result, cfg, cfg.out);
    write_summary_csv(result, cfg, sibling_path(cfg.out, ".summary.csv"));
    return result;
}

/// Noisy-regime table: one row per (N, sigma) cell, one mean-error column
/// per solver. Defaults reproduce the K=3, D=10 setting. The underlying
/// per-trial rows land in the sibling ".data.csv"/".data.summary.csv" files.
inline SweepResult run_noise_table(SweepConfig cfg) {
    if (cfg.solvers.size() == 1 && cfg.solvers[0] == "SDP") cfg.solvers = known_solvers();
    if (cfg.N_list.empty()) cfg.N_list = {12, 16, 22};
    if (cfg.sigma_list.size() == 1 && cfg.sigma_list[0] == 0.0) cfg.sigma_list = {0.01, 0.1};

    SweepConfig sweep_cfg = cfg;
    sweep_cfg.out = sibling_path(cfg.out, ".data.csv");
    SweepResult result = run_sweep(sweep_cfg);

    // solver columns in canonical order, filtered by selection
    std::vector<std::string> columns;
    for (const auto& name : known_solvers())
        if (std::find(cfg.solvers.begin(), cfg.solvers.end(), name) != cfg.solvers.end())
            columns.push_back(name);

    std::ofstream os(cfg.out);
    if (!os) throw std::runtime_error("noise-table: cannot open output file " + cfg.out);
    write_config_comment(os, cfg);
    os << "N,sigma";
    for (const auto& c : columns) os << ',' << c;
    os << '\n';
    for (double sigma : cfg.sigma_list) {
        for (int n : cfg.N_list) {
            os << n << ',' << format_double(sigma);
            for (const auto& c : columns) {
                for (const CellSummary& s : result.summaries)
                    if (s.solver == c && s.N == n && s.sigma == sigma) {
                        os << ',' << format_double(s.mean_err);
                        break;
                    }
            }
            os << '\n';
        }
    }
    if (!os) throw std::runtime_error("noise-table: write failed for " + cfg.out);
    return result;
}

// ---------------------------------------------------------------------------
// Config files: `key = value` lines, lists comma separated, '#' comments.
// Unknown keys are errors.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> items;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

inline long parse_long(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const long out = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw std::runtime_error("config: bad integer for '" + key + "': " + v);
    }
}

inline double parse_real(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double out = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw std::runtime_error("config: bad number for '" + key + "': " + v);
    }
}

inline bool parse_flag(const std::string& v, const std::string& key) {
    if (v == "1" || v == "true" || v == "on") return true;
    if (v == "0" || v == "false" || v == "off") return false;
    throw std::runtime_error("config: bad flag for '" + key + "': " + v);
}

}  // namespace detail

inline void apply_config_entry(SweepConfig& cfg, const std::string& key,
                               const std::string& value) {
    using detail::parse_flag;
    using detail::parse_long;
    using detail::parse_real;
    if (key == "solvers") {
        cfg.solvers = detail::split_list(value);
        validate_solver_names(cfg.solvers);
    } else if (key == "K") {
        cfg.K = static_cast<int>(parse_long(value, key));
    } else if (key == "D") {
        cfg.D_list.clear();
        for (const auto& v : detail::split_list(value))
            cfg.D_list.push_back(static_cast<int>(parse_long(v, key)));
    } else if (key == "N") {
        cfg.N_list.clear();
        for (const auto& v : detail::split_list(value))
            cfg.N_list.push_back(static_cast<int>(parse_long(v, key)));
    } else if (key == "sigma") {
        cfg.sigma_list.clear();
        for (const auto& v : detail::split_list(value))
            cfg.sigma_list.push_back(parse_real(v, key));
    } else if (key == "trials") {
        cfg.trials = static_cast<int>(parse_long(value, key));
    } else if (key == "seed") {
        cfg.base_seed = static_cast<std::uint64_t>(parse_long(value, key));
    } else if (key == "threshold") {
        cfg.threshold = parse_real(value, key);
    } else if (key == "out") {
        cfg.out = value;
    } else if (key == "workers") {
        cfg.workers = static_cast<int>(parse_long(value, key));
    } else if (key == "sdp.rho") {
        cfg.sdp.rho = parse_real(value, key);
    } else if (key == "sdp.max_iter") {
        cfg.sdp.max_iter = static_cast<int>(parse_long(value, key));
    } else if (key == "sdp.tol_primal") {
        cfg.sdp.tol_primal = parse_real(value, key);
    } else if (key == "sdp.tol_dual") {
        cfg.sdp.tol_dual = parse_real(value, key);
    } else if (key == "sdp.adaptive_rho") {
        cfg.sdp.adaptive_rho = parse_flag(value, key);
    } else if (key == "grad.max_iter") {
        cfg.grad.max_iter = static_cast<int>(parse_long(value, key));
    } else if (key == "grad.tol") {
        cfg.grad.tol = parse_real(value, key);
    } else if (key == "grad.acceleration") {
        cfg.grad.acceleration = parse_flag(value, key);
    } else if (key == "grad.backtracking") {
        cfg.grad.backtracking = parse_flag(value, key);
    } else {
        throw std::runtime_error("config: unknown key '" + key + "'");
    }
}

inline SweepConfig parse_config(std::istream& in) {
    SweepConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: line " + std::to_string(lineno) +
                                     " is not 'key = value': " + line);
        apply_config_entry(cfg, detail::trim(line.substr(0, eq)),
                           detail::trim(line.substr(eq + 1)));
    }
    return cfg;
}

inline SweepConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    return parse_config(in);
}

/// Mean wall time per solver per cell.
inline SweepResult run_timing(const SweepConfig& cfg) {
    SweepResult result = run_sweep_in_memory(cfg);
    std::ofstream os(cfg.out);
    if (!os) throw std::runtime_error("timing: cannot open output file " + cfg.out);
    write_config_comment(os, cfg);
    os << "solver,K,D,N,sigma,trials,mean_runtime_seconds\n";
    for (const CellSummary& s : result.summaries)
        os << s.solver << ',' << s.K << ',' << s.D << ',' << s.N << ','
           << format_double(s.sigma) << ',' << s.trials << ','
           << format_double(s.mean_runtime) << '\n';
    if (!os) throw std::runtime_error("timing: write failed for " + cfg.out);
    return result;
}

}  // namespace omr::bench
