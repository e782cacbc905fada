// Command-line front end: single-instance solves, Monte Carlo sweeps,
// convergence traces, and the brute-force verification oracle.
//
// Exit codes: 0 ok, 2 configuration error, 3 infeasible problem,
// 4 numerical failure.

#include <eemax/experiment.hpp>
#include <eemax/oracle.hpp>
#include <eemax/scenario.hpp>
#include <eemax/sco.hpp>
#include <eemax/serialization.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNumerical = 4;

std::vector<double> parse_grid(const std::string& text) {
    // Either "A:STEP:B" (inclusive) or a comma-separated list.
    std::vector<double> values;
    const auto c1 = text.find(':');
    if (c1 != std::string::npos) {
        const auto c2 = text.find(':', c1 + 1);
        if (c2 == std::string::npos) throw eemax::ConfigError("grid must be A:STEP:B or a comma list");
        const double a = std::stod(text.substr(0, c1));
        const double step = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
        const double b = std::stod(text.substr(c2 + 1));
        if (!(step > 0.0)) throw eemax::ConfigError("grid step must be > 0");
        for (double v = a; v <= b + 1e-12 * std::max(1.0, std::abs(b)); v += step) values.push_back(v);
    } else {
        std::istringstream in(text);
        std::string item;
        while (std::getline(in, item, ',')) {
            if (!item.empty()) values.push_back(std::stod(item));
        }
    }
    if (values.empty()) throw eemax::ConfigError("empty grid '" + text + "'");
    return values;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw eemax::ConfigError("cannot open output file '" + path + "'");
    return out;
}

std::string summary_path_for(const std::string& out_path) {
    const auto dot = out_path.rfind('.');
    if (dot == std::string::npos) return out_path + ".summary.csv";
    return out_path.substr(0, dot) + ".summary" + out_path.substr(dot);
}

int run_solve(const std::string& config_path, const std::string& out_path, const std::string& scheme,
              double eps, double lambda) {
    auto inst = eemax::load_instance(config_path);
    eemax::ScoOptions opts;
    opts.tolerance = eps;
    opts.lambda = lambda;
    eemax::ScoResult res;
    if (scheme == "wsee") {
        res = eemax::wsee_maximize(inst, opts);
    } else if (scheme == "wsr") {
        res = eemax::wsr_maximize(inst, opts);
    } else {
        throw eemax::ConfigError("scheme must be 'wsee' or 'wsr'");
    }
    auto j = eemax::result_to_json(res, eemax::wsee(inst, res.p_star), eemax::wsr(inst, res.p_star));
    auto out = open_output(out_path);
    out << j.dump(2) << "\n";
    return kExitOk;
}

int run_sweep_cmd(const eemax::ExperimentSpec& spec, const std::string& out_path, bool audit) {
    auto records = eemax::run_sweep(spec);
    {
        auto out = open_output(out_path);
        eemax::write_sweep_csv(out, records);
    }
    {
        auto out = open_output(summary_path_for(out_path));
        eemax::write_summary_csv(out, records);
    }
    int failures = 0;
    for (const auto& rec : records) failures += rec.converged ? 0 : 1;
    std::cerr << "sweep: " << records.size() << " rows (" << failures << " failed) -> " << out_path
              << "\n";
    if (audit) {
        const double drift = eemax::audit_records(spec, records);
        std::cerr << "audit: worst replay deviation " << drift << "\n";
        if (!(drift <= 1e-9)) return kExitNumerical;
    }
    return kExitOk;
}

int run_convergence_cmd(const eemax::ExperimentSpec& spec, const std::string& out_path) {
    auto rows = eemax::run_convergence(spec);
    auto out = open_output(out_path);
    eemax::write_convergence_csv(out, rows);
    std::cerr << "convergence: " << rows.size() << " rows -> " << out_path << "\n";
    return kExitOk;
}

int run_oracle_cmd(const std::string& config_path, const std::string& out_path, int grid, int refine) {
    auto inst = eemax::load_instance(config_path);
    auto res = eemax::brute_force_oracle(inst, grid, refine);
    if (!res.found) throw eemax::InfeasibleInitialPoint("oracle: no feasible grid point", {});
    nlohmann::json j;
    j["grid"] = grid;
    j["refine"] = refine;
    j["final_step_ratio"] = res.final_step_ratio;
    j["wsee"] = {{"p", std::vector<double>(res.best_wsee_p.data(),
                                           res.best_wsee_p.data() + res.best_wsee_p.size())},
                 {"value", res.best_wsee}};
    j["wsr"] = {{"p", std::vector<double>(res.best_wsr_p.data(),
                                          res.best_wsr_p.data() + res.best_wsr_p.size())},
                {"value", res.best_wsr}};
    auto out = open_output(out_path);
    out << j.dump(2) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Energy-efficient power control for interference networks.\n"
        "dBm values convert as p[W] = 10^((dBm - 30)/10)."};
    app.require_subcommand(1);

    // --- solve ---
    auto* solve = app.add_subcommand("solve", "Solve one instance from a JSON file");
    std::string solve_config, solve_out, solve_scheme = "wsee";
    double solve_eps = 1e-4, solve_lambda = 1.0;
    solve->add_option("--config", solve_config, "instance JSON")->required();
    solve->add_option("--out", solve_out, "result JSON")->required();
    solve->add_option("--scheme", solve_scheme, "wsee|wsr (default wsee)");
    solve->add_option("--eps", solve_eps, "stopping tolerance (default 1e-4)");
    solve->add_option("--lambda", solve_lambda, "initial point scale in (0,1] (default 1)");

    // --- sweep ---
    auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over (p_max, r, lambda) x schemes");
    std::string sweep_pmax = "0:5:40", sweep_r = "0", sweep_schemes = "WSEE,WSR", sweep_lambda = "1";
    std::string sweep_out;
    int sweep_trials = 200, sweep_workers = 0, sweep_users = 5, sweep_rb = 1;
    std::uint64_t sweep_seed = 1;
    double sweep_eps = 1e-4, sweep_xi = 0.0, sweep_delta = 1.0;
    bool sweep_audit = false;
    sweep->add_option("--pmax-dbm", sweep_pmax, "A:STEP:B or comma list (default 0:5:40)");
    sweep->add_option("--r", sweep_r, "QoS fractions, comma list in [0,1) (default 0)");
    sweep->add_option("--schemes", sweep_schemes, "comma list of WSEE,WSR,WSEE_GENERAL,WSEE_MULTI_RB");
    sweep->add_option("--trials", sweep_trials, "trials per grid point (default 200)");
    sweep->add_option("--seed", sweep_seed, "base seed; per-trial seeds derived via splitmix64");
    sweep->add_option("--lambda", sweep_lambda, "initial point scales (default 1)");
    sweep->add_option("--eps", sweep_eps, "stopping tolerance (default 1e-4)");
    sweep->add_option("--out", sweep_out, "rows CSV; summary written alongside")->required();
    sweep->add_option("--n-users", sweep_users, "users per instance (default 5)");
    sweep->add_option("--workers", sweep_workers, "worker threads (default: EEMAX_WORKERS or cores)");
    sweep->add_option("--xi", sweep_xi, "rate-dependent consumption coefficient (WSEE_GENERAL)");
    sweep->add_option("--delta", sweep_delta, "rate exponent in (0,1] (WSEE_GENERAL)");
    sweep->add_option("--rb", sweep_rb, "resource blocks (WSEE_MULTI_RB)");
    sweep->add_flag("--audit", sweep_audit, "recompute every row from its seed after the run");

    // --- convergence ---
    auto* conv = app.add_subcommand("convergence", "Per-iteration objective traces at one p_max");
    std::string conv_lambda = "0.01,0.1,1", conv_r = "0", conv_out;
    double conv_pmax = 20.0, conv_eps = 1e-4;
    int conv_trials = 20, conv_workers = 0, conv_users = 5;
    std::uint64_t conv_seed = 1;
    conv->add_option("--pmax-dbm", conv_pmax, "transmit power cap (default 20 dBm)");
    conv->add_option("--lambda", conv_lambda, "initial point scales (default 0.01,0.1,1)");
    conv->add_option("--r", conv_r, "QoS fractions (default 0)");
    conv->add_option("--trials", conv_trials, "trials (default 20)");
    conv->add_option("--seed", conv_seed, "base seed");
    conv->add_option("--eps", conv_eps, "stopping tolerance (default 1e-4)");
    conv->add_option("--n-users", conv_users, "users per instance (default 5)");
    conv->add_option("--workers", conv_workers, "worker threads");
    conv->add_option("--out", conv_out, "CSV output")->required();

    // --- oracle ---
    auto* oracle = app.add_subcommand("oracle", "Brute-force verification oracle (N <= 3)");
    std::string oracle_config, oracle_out;
    int oracle_grid = 400, oracle_refine = 3;
    oracle->add_option("--config", oracle_config, "instance JSON")->required();
    oracle->add_option("--grid", oracle_grid, "grid points per dimension (default 400)");
    oracle->add_option("--refine", oracle_refine, "refinement rounds (default 3)");
    oracle->add_option("--out", oracle_out, "result JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*solve) return run_solve(solve_config, solve_out, solve_scheme, solve_eps, solve_lambda);
        if (*sweep) {
            eemax::ExperimentSpec spec;
            spec.scenario.n_users = sweep_users;
            spec.scenario.seed = sweep_seed;
            spec.pmax_dbm = parse_grid(sweep_pmax);
            spec.r_values = parse_grid(sweep_r);
            spec.schemes.clear();
            std::istringstream in(sweep_schemes);
            std::string item;
            while (std::getline(in, item, ','))
                if (!item.empty()) spec.schemes.push_back(eemax::scheme_from_string(item));
            spec.trials = sweep_trials;
            spec.lambdas = parse_grid(sweep_lambda);
            spec.eps = sweep_eps;
            spec.workers = sweep_workers;
            spec.xi = sweep_xi;
            spec.delta = sweep_delta;
            spec.n_rb = sweep_rb;
            return run_sweep_cmd(spec, sweep_out, sweep_audit);
        }
        if (*conv) {
            eemax::ExperimentSpec spec;
            spec.scenario.n_users = conv_users;
            spec.scenario.seed = conv_seed;
            spec.pmax_dbm = {conv_pmax};
            spec.r_values = parse_grid(conv_r);
            spec.lambdas = parse_grid(conv_lambda);
            spec.trials = conv_trials;
            spec.eps = conv_eps;
            spec.workers = conv_workers;
            return run_convergence_cmd(spec, conv_out);
        }
        if (*oracle) return run_oracle_cmd(oracle_config, oracle_out, oracle_grid, oracle_refine);
    } catch (const eemax::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const eemax::InfeasibleInitialPoint& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const eemax::DegenerateTarget& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const eemax::SubproblemFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const eemax::DegenerateRate& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}
