#include <eemax/experiment.hpp>
#include <eemax/oracle.hpp>
#include <eemax/serialization.hpp>

#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

#include <random>
#include <sstream>

using namespace eemax;

namespace {

ExperimentSpec small_spec() {
    ExperimentSpec spec;
    spec.scenario.seed = 99;
    spec.trials = 4;
    spec.pmax_dbm = {10.0, 20.0};
    spec.r_values = {0.0, 0.2};
    spec.schemes = {Scheme::Wsee, Scheme::Wsr};
    spec.lambdas = {1.0};
    return spec;
}

std::string strip_last_column(const std::string& csv) {
    std::istringstream in(csv);
    std::string out, line;
    while (std::getline(in, line)) {
        const auto pos = line.rfind(',');
        out += line.substr(0, pos);
        out += '\n';
    }
    return out;
}

}  // namespace

TEST_CASE("oracle: 1-D search agrees with golden section") {
    NetworkInstance inst;
    inst.bandwidth = 2e6;
    inst.gain = Eigen::MatrixXd::Constant(1, 1, 1.0);
    inst.self_interference = Eigen::VectorXd::Zero(1);
    inst.noise = Eigen::VectorXd::Constant(1, 1e-9);
    inst.users = {UserLink{1.0, 0.1, 0.0, 5.0, 0.375}};

    auto res = brute_force_oracle(inst, 400, 3);
    REQUIRE(res.found);
    auto ee_of = [&](double p) { return ee(inst, Eigen::VectorXd::Constant(1, p), 0); };
    const double p_gold = testutil::golden_section_max(ee_of, 1e-12, 0.1);
    CHECK(testutil::rel_diff(res.best_wsee, ee_of(p_gold)) < 1e-6);
    // Rate is increasing in p, so the rate incumbent is the power cap.
    CHECK(res.best_wsr_p[0] == Catch::Approx(0.1).epsilon(1e-9));
}

TEST_CASE("oracle: incumbent dominates injected points; nested grids improve") {
    std::mt19937_64 rng(101);
    auto inst = testutil::random_instance(rng, 2);
    std::vector<PowerVector> extras;
    for (int k = 0; k < 10; ++k) extras.push_back(testutil::random_power(rng, inst));

    auto res = brute_force_oracle(inst, 100, 1, extras);
    REQUIRE(res.found);
    for (const auto& p : extras) {
        if (is_feasible(inst, p).feasible) {
            CHECK(res.best_wsee >= wsee(inst, p));
            CHECK(res.best_wsr >= wsr(inst, p));
        }
    }

    // A nested (doubled) grid can only improve the incumbents.
    auto coarse = brute_force_oracle(inst, 100, 0);
    auto fine = brute_force_oracle(inst, 199, 0);
    CHECK(fine.best_wsee >= coarse.best_wsee - 1e-15);
    CHECK(fine.best_wsr >= coarse.best_wsr - 1e-15);

    CHECK_THROWS_AS(brute_force_oracle(testutil::random_instance(rng, 4), 10, 0),
                    std::invalid_argument);
}

TEST_CASE("oracle honors QoS feasibility") {
    std::mt19937_64 rng(102);
    auto inst = testutil::random_instance(rng, 2);
    Eigen::VectorXd pmax(2);
    pmax << inst.users[0].p_max, inst.users[1].p_max;
    inst.users[0].r_min = 0.9 * rate(inst, pmax, 0);
    auto res = brute_force_oracle(inst, 150, 2);
    REQUIRE(res.found);
    CHECK(rate(inst, res.best_wsee_p, 0) >= inst.users[0].r_min * (1.0 - 1e-9));
    CHECK(rate(inst, res.best_wsr_p, 0) >= inst.users[0].r_min * (1.0 - 1e-9));
}

TEST_CASE("instance JSON round trip") {
    std::mt19937_64 rng(103);
    auto inst = testutil::random_instance(rng, 3);
    inst.users[1].r_min = 12345.5;
    auto j = instance_to_json(inst);
    auto back = instance_from_json(j);
    CHECK(back.bandwidth == inst.bandwidth);
    CHECK(back.gain == inst.gain);
    CHECK(back.noise == inst.noise);
    CHECK(back.self_interference == inst.self_interference);
    for (int i = 0; i < 3; ++i) {
        CHECK(back.users[i].weight == inst.users[i].weight);
        CHECK(back.users[i].r_min == inst.users[i].r_min);
    }
}

TEST_CASE("instance JSON schema diagnostics") {
    auto j = nlohmann::json::parse(R"({"n": 1, "B": 1e6})");
    CHECK_THROWS_WITH(instance_from_json(j), Catch::Matchers::ContainsSubstring("omega"));

    auto j2 = nlohmann::json::parse(
        R"({"n": 1, "B": 1e6, "omega": [1.0], "phi": [0.0], "noise": [1.0],
            "users": [{"w": 1.0, "p_max": 1.0, "r_min": 0.0, "mu": 1.0}]})");
    CHECK_THROWS_WITH(instance_from_json(j2), Catch::Matchers::ContainsSubstring("p_st"));

    auto j3 = nlohmann::json::parse(
        R"({"n": 1, "B": 1e6, "omega": [1.0], "phi": [0.0], "noise": [0.0],
            "users": [{"w": 1.0, "p_max": 1.0, "r_min": 0.0, "mu": 1.0, "p_st": 1.0}]})");
    CHECK_THROWS_AS(instance_from_json(j3), ConfigError);  // noise must be > 0
}

TEST_CASE("sweep: row count, schema, determinism") {
    auto spec = small_spec();
    auto records = run_sweep(spec);
    // trials x pmax x r x lambda x schemes rows.
    CHECK(records.size() == 4u * 2u * 2u * 1u * 2u);

    std::ostringstream csv1;
    write_sweep_csv(csv1, records);
    {
        std::istringstream check(csv1.str());
        std::string header;
        std::getline(check, header);
        CHECK(header == kSweepCsvHeader);
    }

    auto records2 = run_sweep(spec);
    std::ostringstream csv2;
    write_sweep_csv(csv2, records2);
    CHECK(strip_last_column(csv1.str()) == strip_last_column(csv2.str()));

    std::ostringstream summary;
    write_summary_csv(summary, records);
    CHECK(summary.str().find("WSEE,") != std::string::npos);
    CHECK(summary.str().find("WSR,") != std::string::npos);
}

TEST_CASE("sweep: single trial and point produces one row per scheme") {
    auto spec = small_spec();
    spec.trials = 1;
    spec.pmax_dbm = {20.0};
    spec.r_values = {0.0};
    auto records = run_sweep(spec);
    REQUIRE(records.size() == 2);
    CHECK(records[0].scheme == Scheme::Wsee);
    CHECK(records[1].scheme == Scheme::Wsr);
    CHECK(records[0].converged);
    CHECK(records[1].converged);
    CHECK(records[0].wsee >= records[1].wsee * (1.0 - 1e-9));  // WSEE driver wins its objective
}

TEST_CASE("sweep: parallel and serial row sets are identical") {
    auto spec = small_spec();
    spec.workers = 1;
    auto serial = run_sweep(spec);
    spec.workers = 4;
    auto parallel = run_sweep(spec);
    REQUIRE(serial.size() == parallel.size());
    for (size_t k = 0; k < serial.size(); ++k) {
        CHECK(serial[k].seed == parallel[k].seed);
        CHECK(serial[k].scheme == parallel[k].scheme);
        CHECK(serial[k].wsee == parallel[k].wsee);
        CHECK(serial[k].wsr == parallel[k].wsr);
        CHECK(serial[k].iterations == parallel[k].iterations);
    }
}

TEST_CASE("sweep: replay audit recomputes every objective") {
    auto spec = small_spec();
    auto records = run_sweep(spec);
    CHECK(audit_records(spec, records) <= 1e-9);
}

TEST_CASE("sweep: general and multi-RB schemes run end to end") {
    auto spec = small_spec();
    spec.trials = 2;
    spec.pmax_dbm = {20.0};
    spec.r_values = {0.0};
    spec.schemes = {Scheme::Wsee, Scheme::WseeGeneral, Scheme::WseeMultiRb};
    spec.xi = 1e-8;
    spec.delta = 0.9;
    spec.n_rb = 2;
    auto records = run_sweep(spec);
    REQUIRE(records.size() == 6);
    for (const auto& rec : records) {
        CHECK(rec.converged);
        CHECK(rec.wsee > 0.0);
        CHECK(rec.wsr > 0.0);
    }
}

TEST_CASE("convergence traces are monotone and bounded") {
    auto spec = small_spec();
    spec.trials = 5;
    spec.pmax_dbm = {20.0};
    spec.r_values = {0.0};
    spec.lambdas = {0.01, 0.1, 1.0};
    auto rows = run_convergence(spec);
    REQUIRE_FALSE(rows.empty());

    std::ostringstream csv;
    write_convergence_csv(csv, rows);
    std::istringstream check(csv.str());
    std::string header;
    std::getline(check, header);
    CHECK(header == kConvergenceCsvHeader);

    // Group rows per (trial, lambda) and verify the trace is nondecreasing.
    for (size_t k = 1; k < rows.size(); ++k) {
        if (rows[k].trial == rows[k - 1].trial && rows[k].lambda == rows[k - 1].lambda &&
            rows[k].r == rows[k - 1].r) {
            CHECK(rows[k].iteration == rows[k - 1].iteration + 1);
            CHECK(rows[k].objective >= rows[k - 1].objective * (1.0 - 1e-9));
        }
    }
}
