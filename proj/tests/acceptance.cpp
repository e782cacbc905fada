// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned here, not configurable.

#include <eemax/experiment.hpp>
#include <eemax/oracle.hpp>
#include <eemax/scenario.hpp>
#include <eemax/sco.hpp>

#include "helpers.hpp"

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

using namespace eemax;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("%s criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
}

struct SuiteRun {
    std::vector<ScoResult> results;       // one per instance, lambda = 1
    std::vector<NetworkInstance> instances;
};

/// Criteria 1-3 share this suite: 504 scenario instances at 20 dBm with
/// r cycling over {0, 0.2, 0.8}.
SuiteRun run_monotone_suite() {
    const int n_instances = 504;
    const double r_grid[3] = {0.0, 0.2, 0.8};
    SuiteRun run;
    run.results.resize(n_instances);
    run.instances.resize(n_instances);
    std::vector<int> ids(n_instances);
    for (int k = 0; k < n_instances; ++k) ids[k] = k;
    detail::run_pool(ids.size(), detail::worker_count(0, ids.size()), [&](std::size_t k) {
        ScenarioConfig cfg;
        cfg.p_max = dbm_to_watt(20.0);
        cfg.qos_fraction = r_grid[k % 3];
        cfg.seed = splitmix64(1000 + k);
        auto gen = generate_feasible_instance(cfg);
        ScoOptions opts;
        opts.tolerance = 1e-4;
        run.results[k] = wsee_maximize(gen.instance, opts);
        run.instances[k] = gen.instance;
    });
    return run;
}

void criterion_1_2_3(const SuiteRun& run) {
    // 1: every objective history nondecreasing within 1e-9 relative slack.
    int violations = 0;
    for (const auto& res : run.results) {
        for (size_t k = 1; k < res.history.size(); ++k)
            if (res.history[k] < res.history[k - 1] * (1.0 - 1e-9)) ++violations;
    }
    std::ostringstream d1;
    d1 << run.results.size() << " histories, " << violations << " violations";
    report(1, "monotone ascent", violations == 0, d1.str());

    // 2: median iterations <= 10, max <= 50, all converged.
    std::vector<double> iters;
    int max_iters = 0, unconverged = 0;
    for (const auto& res : run.results) {
        iters.push_back(res.iterations);
        max_iters = std::max(max_iters, res.iterations);
        unconverged += res.converged ? 0 : 1;
    }
    const double med = median(iters);
    std::ostringstream d2;
    d2 << "median=" << med << " max=" << max_iters << " unconverged=" << unconverged;
    report(2, "convergence speed", med <= 10.0 && max_iters <= 50 && unconverged == 0, d2.str());

    // 3: per-instance relative spread of final WSEE over lambda in
    // {0.01, 0.1, 1}; median spread <= 5%.
    std::vector<double> spreads(run.instances.size());
    detail::run_pool(run.instances.size(), detail::worker_count(0, run.instances.size()),
                     [&](std::size_t k) {
                         double lo = run.results[k].objective, hi = run.results[k].objective;
                         for (double lambda : {0.01, 0.1}) {
                             ScoOptions opts;
                             opts.tolerance = 1e-4;
                             opts.lambda = lambda;
                             const double f = wsee_maximize(run.instances[k], opts).objective;
                             lo = std::min(lo, f);
                             hi = std::max(hi, f);
                         }
                         spreads[k] = (hi - lo) / hi;
                     });
    const double med_spread = median(spreads);
    std::ostringstream d3;
    d3 << "median spread=" << med_spread * 100.0 << "%";
    report(3, "initial-point robustness", med_spread <= 0.05, d3.str());
}

/// Local resolution error of the oracle incumbent for one objective:
/// one-step probes along each axis, plus the domain-truncation error at the
/// algorithm's point (the grid floor is 1e-6 p_max; the continuum allows
/// powers below it). Decomposition: f(alg) - f(incumbent) <=
/// [f(alg) - f(clamp(alg))] + [f(clamp(alg)) - f(incumbent)], where the
/// clamped point lies in the searched domain.
template <typename Objective>
double grid_resolution_error(const NetworkInstance& inst, const PowerVector& incumbent,
                             double f_incumbent, double step_ratio, const PowerVector& alg_point,
                             Objective&& objective) {
    double eps = 1e-7;
    const int n = inst.n_users();
    for (int i = 0; i < n; ++i) {
        for (double factor : {step_ratio, 1.0 / step_ratio}) {
            PowerVector p = incumbent;
            p[i] = std::min(p[i] * factor, inst.users[i].p_max);
            if (!is_feasible(inst, p).feasible) continue;
            eps = std::max(eps, (objective(p) - f_incumbent) / f_incumbent);
        }
    }
    PowerVector clamped = alg_point;
    for (int i = 0; i < n; ++i) clamped[i] = std::max(clamped[i], 1e-6 * inst.users[i].p_max);
    eps = std::max(eps, (objective(alg_point) - objective(clamped)) / f_incumbent);
    return eps;
}

void criterion_4_oracle() {
    const int n_instances = 50;
    int within_1pct_ee = 0, within_1pct_sr = 0;
    int above_resolution = 0;
    std::vector<std::array<double, 6>> rows(n_instances);  // algee, oree, epsee, algsr, orsr, epssr
    detail::run_pool(n_instances, detail::worker_count(0, n_instances), [&](std::size_t k) {
        ScenarioConfig cfg;
        cfg.n_users = 2;
        cfg.p_max = dbm_to_watt(20.0);
        cfg.qos_fraction = (k % 2 == 0) ? 0.0 : 0.5;
        cfg.seed = splitmix64(77000 + k);
        auto gen = generate_feasible_instance(cfg);
        ScoOptions opts;
        opts.tolerance = 1e-4;
        auto alg_ee = wsee_maximize(gen.instance, opts);
        auto alg_sr = wsr_maximize(gen.instance, opts);
        auto oracle = brute_force_oracle(gen.instance, 400, 3);
        const double eps_ee = grid_resolution_error(
            gen.instance, oracle.best_wsee_p, oracle.best_wsee, oracle.final_step_ratio,
            alg_ee.p_star, [&](const PowerVector& p) { return wsee(gen.instance, p); });
        const double eps_sr = grid_resolution_error(
            gen.instance, oracle.best_wsr_p, oracle.best_wsr, oracle.final_step_ratio,
            alg_sr.p_star, [&](const PowerVector& p) { return wsr(gen.instance, p); });
        rows[k] = {alg_ee.objective, oracle.best_wsee, eps_ee,
                   alg_sr.objective, oracle.best_wsr, eps_sr};
    });
    for (const auto& row : rows) {
        if (row[0] >= 0.99 * row[1]) ++within_1pct_ee;
        if (row[3] >= 0.99 * row[4]) ++within_1pct_sr;
        if (row[0] > row[1] * (1.0 + row[2] + 1e-9)) ++above_resolution;
        if (row[3] > row[4] * (1.0 + row[5] + 1e-9)) ++above_resolution;
    }
    std::ostringstream d;
    d << "wsee within 1%: " << within_1pct_ee << "/50, wsr within 1%: " << within_1pct_sr
      << "/50, above grid resolution: " << above_resolution;
    report(4, "oracle equivalence",
           within_1pct_ee >= 45 && within_1pct_sr >= 45 && above_resolution == 0, d.str());
}

void criterion_5_three_properties() {
    std::mt19937_64 rng(555);
    int direction_fail = 0, equality_fail = 0, gradient_fail = 0;
    const int n_instances = 50;
    const int n_points = 1000;
    for (int inst_id = 0; inst_id < n_instances; ++inst_id) {
        NetworkInstance inst;
        if (inst_id % 2 == 0) {
            ScenarioConfig cfg;
            cfg.n_users = 3;
            cfg.seed = splitmix64(4000 + inst_id);
            Rng srng(cfg.seed);
            inst = derive_instance(cfg, draw_channels(cfg, srng));
        } else {
            inst = testutil::random_instance(rng, 3);
        }
        const int n = inst.n_users();
        auto q_prime = log2_vec(testutil::random_power(rng, inst));
        const Eigen::VectorXd p_prime = exp2_vec(q_prime);
        Eigen::VectorXd v_prime(n), w(n);
        for (int i = 0; i < n; ++i) {
            v_prime[i] = std::log2(ee(inst, p_prime, i));
            w[i] = inst.users[i].weight;
        }
        std::vector<BoundCoeffs> coeffs;
        for (int i = 0; i < n; ++i) coeffs.push_back(log_bound_coeffs(sinr(inst, p_prime, i)));

        std::uniform_real_distribution<double> dq(-3.0, 3.0);
        for (int pt = 0; pt < n_points; ++pt) {
            Eigen::VectorXd q = q_prime, v = v_prime;
            for (int i = 0; i < n; ++i) {
                q[i] += dq(rng);
                v[i] += dq(rng);
            }
            const Eigen::VectorXd p = exp2_vec(q);
            for (int i = 0; i < n; ++i) {
                const double scale = std::max(1.0, rate(inst, p, i));
                if (rate_bound(inst, q, coeffs[i], i) > rate(inst, p, i) + 1e-9 * scale)
                    ++direction_fail;
                if (phi_tilde(inst, q, v[i], coeffs[i], i) >
                    phi_exact(inst, q, v[i], i) + 1e-9 * scale)
                    ++direction_fail;
            }
            auto [f, f_t] = f_and_f_tilde(v, v_prime, w);
            if (f_t > f * (1.0 + 1e-12) + 1e-12) ++direction_fail;
        }

        // Equality and gradient match at the expansion point.
        for (int i = 0; i < n; ++i) {
            const double scale = std::max(1.0, rate(inst, p_prime, i));
            if (std::abs(rate_bound(inst, q_prime, coeffs[i], i) - rate(inst, p_prime, i)) >
                1e-9 * scale)
                ++equality_fail;
            if (std::abs(phi_tilde(inst, q_prime, v_prime[i], coeffs[i], i) -
                         phi_exact(inst, q_prime, v_prime[i], i)) > 1e-9 * scale)
                ++equality_fail;

            auto exact_fn = [&](const Eigen::VectorXd& z) { return rate(inst, exp2_vec(z), i); };
            auto bound_fn = [&](const Eigen::VectorXd& z) { return rate_bound(inst, z, coeffs[i], i); };
            const auto g_exact = testutil::fd_gradient(exact_fn, q_prime, 1e-5);
            const auto g_bound = testutil::fd_gradient(bound_fn, q_prime, 1e-5);
            if ((g_exact - g_bound).lpNorm<Eigen::Infinity>() >
                1e-5 * std::max(1.0, g_exact.lpNorm<Eigen::Infinity>()))
                ++gradient_fail;
        }
        {
            auto [f0, ft0] = f_and_f_tilde(v_prime, v_prime, w);
            if (std::abs(f0 - ft0) > 1e-9 * std::max(1.0, std::abs(f0))) ++equality_fail;
            auto f_fn = [&](const Eigen::VectorXd& z) { return f_and_f_tilde(z, v_prime, w).first; };
            auto ft_fn = [&](const Eigen::VectorXd& z) { return f_and_f_tilde(z, v_prime, w).second; };
            const auto gf = testutil::fd_gradient(f_fn, v_prime, 1e-5);
            const auto gt = testutil::fd_gradient(ft_fn, v_prime, 1e-5);
            if ((gf - gt).lpNorm<Eigen::Infinity>() > 1e-5 * std::max(1.0, gf.lpNorm<Eigen::Infinity>()))
                ++gradient_fail;
        }

        // Multi-RB QoS surrogate against the exact QoS residual (2 RBs).
        {
            MultiRbInstance two{inst.bandwidth,
                                {inst.gain, inst.gain},
                                {inst.self_interference, inst.self_interference},
                                {inst.noise, inst.noise},
                                inst.users};
            for (auto& u : two.users) u.r_min = 0.25 * inst.bandwidth;
            Eigen::MatrixXd q2(n, 2);
            q2.col(0) = q_prime;
            q2.col(1) = q_prime;
            auto rows = build_multi_rb_qos(two, q2, 2 * n);
            const Eigen::MatrixXd p2 = exp2_mat(q2);
            for (int i = 0; i < n; ++i) {
                Eigen::VectorXd x(2 * n);
                for (int j = 0; j < n; ++j) {
                    x[2 * j] = q2(j, 0);
                    x[2 * j + 1] = q2(j, 1);
                }
                const double truth =
                    (rate_multi_rb(two, p2, i) - two.users[i].r_min) / two.rb_bandwidth;
                if (std::abs(value(rows[i], x) - truth) > 1e-9 * std::max(1.0, std::abs(truth)))
                    ++equality_fail;
                for (int pt = 0; pt < 20; ++pt) {
                    Eigen::VectorXd xr = x;
                    for (int j = 0; j < 2 * n; ++j) xr[j] += dq(rng);
                    Eigen::MatrixXd pr(n, 2);
                    for (int j = 0; j < n; ++j) {
                        pr(j, 0) = std::exp2(xr[2 * j]);
                        pr(j, 1) = std::exp2(xr[2 * j + 1]);
                    }
                    const double truth_r =
                        (rate_multi_rb(two, pr, i) - two.users[i].r_min) / two.rb_bandwidth;
                    if (value(rows[i], xr) > truth_r + 1e-9 * std::max(1.0, std::abs(truth_r)))
                        ++direction_fail;
                }
            }
        }
    }
    std::ostringstream d;
    d << "direction=" << direction_fail << " equality=" << equality_fail
      << " gradient=" << gradient_fail << " failures";
    report(5, "surrogate three-property suite",
           direction_fail == 0 && equality_fail == 0 && gradient_fail == 0, d.str());
}

void criterion_6_low_power() {
    const int trials = 200;
    std::vector<std::array<double, 2>> wsee_pair(trials);  // by wsee driver, by wsr driver
    std::vector<int> envelope_fail(trials, 0);
    detail::run_pool(trials, detail::worker_count(0, trials), [&](std::size_t t) {
        ScenarioConfig cfg;
        cfg.p_max = dbm_to_watt(-20.0);
        cfg.qos_fraction = 0.0;
        cfg.seed = splitmix64(6000 + t);
        auto gen = generate_feasible_instance(cfg);
        ScoOptions opts;
        opts.tolerance = 1e-4;
        auto by_ee = wsee_maximize(gen.instance, opts);
        auto by_sr = wsr_maximize(gen.instance, opts);
        wsee_pair[t] = {by_ee.objective, wsee(gen.instance, by_sr.p_star)};
        // Analytic envelope, exact inequality at both returned points. The
        // envelope sums are evaluated term by term in the same order as the
        // objective so that denominator monotonicity carries over verbatim.
        for (const auto* res : {&by_ee, &by_sr}) {
            const double p_st = cfg.p_st, mu = cfg.mu, p_max = cfg.p_max;
            double f_ee = 0.0, lower = 0.0, upper = 0.0;
            for (int i = 0; i < gen.instance.n_users(); ++i) {
                const double wr = gen.instance.users[i].weight * rate(gen.instance, res->p_star, i);
                f_ee += wr / power_consumed_linear(gen.instance.users[i], res->p_star[i]);
                lower += wr / (p_st + mu * p_max);
                upper += wr / p_st;
            }
            if (!(lower <= f_ee && f_ee <= upper)) envelope_fail[t] = 1;
        }
    });
    double mean_ee = 0.0, mean_sr = 0.0;
    int env_failures = 0;
    for (int t = 0; t < trials; ++t) {
        mean_ee += wsee_pair[t][0];
        mean_sr += wsee_pair[t][1];
        env_failures += envelope_fail[t];
    }
    mean_ee /= trials;
    mean_sr /= trials;
    const double gap = std::abs(mean_sr - mean_ee) / mean_ee;
    std::ostringstream d;
    d << "envelope failures=" << env_failures << ", driver gap=" << gap * 100.0 << "%";
    report(6, "low-power equivalence", env_failures == 0 && gap <= 0.02, d.str());
}

void criterion_7_8_saturation(std::vector<TrialRecord>& records_out) {
    ExperimentSpec spec;
    spec.scenario.seed = 8800;
    spec.trials = 200;
    spec.pmax_dbm = {0, 5, 10, 15, 20, 25, 30, 35, 40};
    spec.r_values = {0.0};
    spec.schemes = {Scheme::Wsee, Scheme::Wsr};
    auto records = run_sweep(spec);

    const int n_p = static_cast<int>(spec.pmax_dbm.size());
    std::vector<std::vector<double>> ee_by_p(n_p), sr_scheme_wsee(n_p);
    for (const auto& rec : records) {
        const int k = static_cast<int>(
            std::find(spec.pmax_dbm.begin(), spec.pmax_dbm.end(), rec.pmax_dbm) -
            spec.pmax_dbm.begin());
        if (rec.scheme == Scheme::Wsee) ee_by_p[k].push_back(rec.wsee);
        if (rec.scheme == Scheme::Wsr) sr_scheme_wsee[k].push_back(rec.wsee);
    }

    bool monotone_ok = true;
    for (int k = 0; k + 1 < n_p; ++k) {
        // Paired one-sigma test on the per-trial differences.
        double mean_d = 0.0, var_d = 0.0;
        const int t_count = static_cast<int>(ee_by_p[k].size());
        for (int t = 0; t < t_count; ++t) mean_d += ee_by_p[k + 1][t] - ee_by_p[k][t];
        mean_d /= t_count;
        for (int t = 0; t < t_count; ++t) {
            const double d = ee_by_p[k + 1][t] - ee_by_p[k][t] - mean_d;
            var_d += d * d;
        }
        const double se = std::sqrt(var_d / (t_count - 1)) / std::sqrt(double(t_count));
        if (mean_d < -se) monotone_ok = false;
    }
    auto mean_of = [](const std::vector<double>& v) {
        return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    };
    const double mean20 = mean_of(ee_by_p[4]), mean40 = mean_of(ee_by_p[8]);
    const double rise = (mean40 - mean20) / mean20;
    double sr_peak = 0.0;
    for (int k = 0; k < n_p; ++k) sr_peak = std::max(sr_peak, mean_of(sr_scheme_wsee[k]));
    const double sr_at_40 = mean_of(sr_scheme_wsee[n_p - 1]);

    std::ostringstream d7;
    d7 << "monotone=" << (monotone_ok ? "yes" : "no") << ", rise 20->40 dBm=" << rise * 100.0
       << "%, wsr-driver wsee at 40 dBm=" << sr_at_40 << " vs peak " << sr_peak;
    report(7, "saturation trend", monotone_ok && rise <= 0.02 && sr_at_40 < sr_peak, d7.str());

    // 8: achieved WSR bounded by the self-interference limit, exactly.
    int bound_violations = 0, checked = 0;
    for (const auto& rec : records) {
        ScenarioConfig cfg = detail::job_config(spec, rec.trial, rec.pmax_dbm, rec.r);
        auto gen = generate_feasible_instance(cfg);
        if ((gen.instance.self_interference.array() <= 0.0).any()) continue;
        double bound = 0.0;
        for (int i = 0; i < gen.instance.n_users(); ++i)
            bound += gen.instance.users[i].weight * gen.instance.bandwidth *
                     std::log2(1.0 + gamma_max(gen.instance, i));
        ++checked;
        if (!(rec.wsr <= bound)) ++bound_violations;
    }
    std::ostringstream d8;
    d8 << checked << " rows checked, " << bound_violations << " violations";
    report(8, "rate upper bound under self-interference", bound_violations == 0, d8.str());
    records_out = std::move(records);
}

void criterion_9_reductions() {
    double worst_general = 0.0, worst_multi = 0.0;
    for (int k = 0; k < 20; ++k) {
        ScenarioConfig cfg;
        cfg.n_users = 3;
        cfg.qos_fraction = (k % 2 == 0) ? 0.0 : 0.2;
        cfg.seed = splitmix64(9900 + k);
        auto gen = generate_feasible_instance(cfg);
        ScoOptions opts;
        opts.tolerance = 1e-4;
        auto lin = wsee_maximize(gen.instance, opts);

        std::vector<GeneralPowerUser> gusers;
        for (const auto& u : gen.instance.users) gusers.push_back({{u.mu}, 0.0, 1.0, u.p_st});
        auto gen_res = wsee_maximize_general(gen.instance, gusers, opts);
        worst_general = std::max(worst_general, testutil::rel_diff(lin.objective, gen_res.objective));

        MultiRbInstance one{gen.instance.bandwidth,
                            {gen.instance.gain},
                            {gen.instance.self_interference},
                            {gen.instance.noise},
                            gen.instance.users};
        auto mrb_res = wsee_maximize_multi_rb(one, opts);
        worst_multi = std::max(worst_multi, testutil::rel_diff(lin.objective, mrb_res.objective));
    }
    std::ostringstream d;
    d << "general worst=" << worst_general << ", multi-RB worst=" << worst_multi;
    report(9, "extension reductions", worst_general <= 1e-3 && worst_multi <= 1e-6, d.str());
}

void criterion_10_solver() {
    std::mt19937_64 rng(1010);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int recovered = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + static_cast<int>(unit(rng) * 5.99);
        Eigen::VectorXd c(n), w(n);
        for (int j = 0; j < n; ++j) {
            c[j] = 0.2 + 0.8 * unit(rng);
            w[j] = 0.5 + 1.5 * unit(rng);
        }
        const double a = 1.0 + 9.0 * unit(rng);
        ConvexProgram prog;
        prog.n_vars = n;
        prog.objective = CanonicalFunction::affine(c);
        CanonicalFunction g;
        g.n_vars = n;
        g.affine_constant = a;
        for (int j = 0; j < n; ++j) g.add_exp(w[j], AffineForm::unit(n, j));
        prog.constraints.push_back(g);
        prog.lower = Eigen::VectorXd::Constant(n, -30.0);
        prog.upper = Eigen::VectorXd::Constant(n, 30.0);
        double planted = 0.0;
        for (int j = 0; j < n; ++j) planted += c[j] * std::log2(a * c[j] / (w[j] * c.sum()));
        auto rep = solve(prog);
        if (rep.status == SolveStatus::Optimal &&
            std::abs(rep.objective - planted) / std::max(1.0, std::abs(planted)) <= 1e-6)
            ++recovered;
    }

    // Analytic derivatives against central finite differences.
    int derivative_fail = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 3;
        CanonicalFunction fn;
        fn.n_vars = n;
        fn.affine_coeff = Eigen::VectorXd::Random(n);
        fn.affine_constant = unit(rng);
        for (int t = 0; t < 2; ++t) {
            AffineForm form;
            form.coeff = 0.5 * Eigen::VectorXd::Random(n);
            form.constant = unit(rng) - 0.5;
            fn.add_exp(0.1 + unit(rng), form);
        }
        std::vector<AffineForm> forms;
        for (int t = 0; t < 3; ++t) {
            AffineForm form;
            form.coeff = 0.5 * Eigen::VectorXd::Random(n);
            form.constant = unit(rng) - 0.5;
            forms.push_back(form);
        }
        fn.add_lse(0.1 + unit(rng), forms);
        Eigen::VectorXd x = Eigen::VectorXd::Random(n);
        auto e = evaluate(fn, x, false);
        auto f = [&](const Eigen::VectorXd& z) { return value(fn, z); };
        const auto g_fd = testutil::fd_gradient(f, x, 1e-6);
        if ((e.gradient - g_fd).lpNorm<Eigen::Infinity>() >
            1e-6 * std::max(1.0, e.gradient.lpNorm<Eigen::Infinity>()))
            ++derivative_fail;
    }
    std::ostringstream d;
    d << "planted recovered=" << recovered << "/100, derivative failures=" << derivative_fail;
    report(10, "solver certification", recovered == 100 && derivative_fail == 0, d.str());
}

void criterion_11_qos_shrinkage() {
    ExperimentSpec spec;
    spec.scenario.seed = 11100;
    spec.trials = 200;
    spec.pmax_dbm = {20.0};
    spec.r_values = {0.0, 0.2, 0.8};
    spec.schemes = {Scheme::Wsee};
    auto records = run_sweep(spec);
    double mean_r[3] = {0.0, 0.0, 0.0};
    int count_r[3] = {0, 0, 0};
    for (const auto& rec : records) {
        const int k = rec.r == 0.0 ? 0 : (rec.r == 0.2 ? 1 : 2);
        mean_r[k] += rec.wsee;
        ++count_r[k];
    }
    for (int k = 0; k < 3; ++k) mean_r[k] /= count_r[k];
    const bool ok = mean_r[0] >= mean_r[1] * (1.0 - 1e-9) && mean_r[1] >= mean_r[2] * (1.0 - 1e-9);
    std::ostringstream d;
    d << "mean WSEE: r=0 " << mean_r[0] << ", r=0.2 " << mean_r[1] << ", r=0.8 " << mean_r[2];
    report(11, "QoS shrinkage", ok, d.str());
}

}  // namespace

int main() {
    auto suite = run_monotone_suite();
    criterion_1_2_3(suite);
    criterion_4_oracle();
    criterion_5_three_properties();
    criterion_6_low_power();
    std::vector<TrialRecord> saturation_records;
    criterion_7_8_saturation(saturation_records);
    criterion_9_reductions();
    criterion_10_solver();
    criterion_11_qos_shrinkage();
    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
