#pragma once

// Random relay-assisted MIMO instance generation: distance draws, path loss
// anchored at free space for the reference distance, log-normal shadowing,
// Rayleigh fading, maximum-ratio combining, and the reduction to the
// interference-network coefficients consumed by the drivers.

#include "model.hpp"

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace eemax {

class DegenerateTarget : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watt_to_dbm(double watt) { return 10.0 * std::log10(watt) + 30.0; }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// splitmix64, used to derive independent per-trial seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic draws from a seeded engine; normals via Box-Muller so the
/// stream layout does not depend on the standard library implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform() {
        // 53-bit mantissa uniform in (0, 1].
        return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * M_PI * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Circular complex Gaussian with the variance split equally between
    /// real and imaginary parts.
    std::complex<double> complex_normal(double variance) {
        const double s = std::sqrt(variance / 2.0);
        const double re = s * normal();
        const double im = s * normal();
        return {re, im};
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

struct ScenarioConfig {
    int n_users = 5;
    int n_tx_antennas = 2;  ///< L_T
    int n_rx_antennas = 2;  ///< L_R
    double relay_power = dbm_to_watt(30.0);  ///< [W]; +inf disables relay-noise terms
    double carrier_frequency = 2e9;          ///< [Hz]
    double bandwidth = 2e6;                  ///< [Hz]
    double noise_figure_db = 3.0;
    double noise_psd_dbm_hz = -174.0;
    double mu = 5.0;
    double p_st = 0.375;  ///< [W]
    double p_max = dbm_to_watt(20.0);  ///< [W]
    std::vector<double> weights;       ///< empty means 1/N each
    double qos_fraction = 0.0;         ///< r in [0, 1)
    double distance_min = 200.0;       ///< [m]
    double distance_max = 300.0;
    double pathloss_ref_distance = 100.0;
    double pathloss_exponent = 3.5;
    double shadowing_sigma_db = 8.0;
    std::uint64_t seed = 1;

    void validate() const {
        if (n_users < 1 || n_tx_antennas < 1 || n_rx_antennas < 1)
            throw std::invalid_argument("antenna and user counts must be >= 1");
        if (!(relay_power > 0.0)) throw std::invalid_argument("relay power must be > 0");
        if (!(carrier_frequency > 0.0) || !(bandwidth > 0.0))
            throw std::invalid_argument("carrier frequency and bandwidth must be > 0");
        if (!(mu >= 1.0) || !(p_st > 0.0) || !(p_max > 0.0))
            throw std::invalid_argument("power model parameters out of range");
        if (!(qos_fraction >= 0.0) || qos_fraction >= 1.0)
            throw std::invalid_argument("QoS fraction must lie in [0, 1)");
        if (!(distance_min > 0.0) || distance_max < distance_min)
            throw std::invalid_argument("bad distance interval");
        if (!(pathloss_ref_distance > 0.0)) throw std::invalid_argument("reference distance must be > 0");
        if (!weights.empty() && static_cast<int>(weights.size()) != n_users)
            throw std::invalid_argument("weights must have length N");
    }

    /// Receiver/relay thermal noise power F * N0 * B in watts.
    double thermal_noise() const {
        return db_to_linear(noise_figure_db) * dbm_to_watt(noise_psd_dbm_hz) * bandwidth;
    }
};

struct ChannelDraw {
    Eigen::VectorXd tx_distance, rx_distance;  ///< [m]
    Eigen::VectorXd tx_gain, rx_gain;          ///< linear large-scale gain per hop
    Eigen::VectorXd beamformer;                ///< b, shared unit-norm real vector
    std::vector<Eigen::VectorXcd> h;           ///< transmitter-to-relay, length L_T
    std::vector<Eigen::VectorXcd> g;           ///< relay-to-receiver, length L_R
    std::vector<Eigen::VectorXcd> c;           ///< MRC combiner g_i * (h_i . b)
    std::vector<std::complex<double>> hb;      ///< cached h_i . b
};

/// Free-space power gain at the reference distance.
inline double free_space_gain(double distance, double frequency) {
    constexpr double speed_of_light = 299792458.0;
    const double wavelength = speed_of_light / frequency;
    const double x = wavelength / (4.0 * M_PI * distance);
    return x * x;
}

/// Large-scale linear gain: free-space anchor at d0, power-law beyond,
/// log-normal shadowing.
inline double pathloss_gain(const ScenarioConfig& cfg, double distance, double shadow_db) {
    return free_space_gain(cfg.pathloss_ref_distance, cfg.carrier_frequency) *
           std::pow(cfg.pathloss_ref_distance / distance, cfg.pathloss_exponent) *
           db_to_linear(shadow_db);
}

/// One fading/shadowing realization. Draw order is fixed per user: both
/// distances, both shadowing values, then h and g entries.
inline ChannelDraw draw_channels(const ScenarioConfig& cfg, Rng& rng) {
    cfg.validate();
    const int n = cfg.n_users;
    ChannelDraw draw;
    draw.tx_distance.resize(n);
    draw.rx_distance.resize(n);
    draw.tx_gain.resize(n);
    draw.rx_gain.resize(n);
    draw.beamformer =
        Eigen::VectorXd::Constant(cfg.n_tx_antennas, 1.0 / std::sqrt(double(cfg.n_tx_antennas)));
    draw.h.resize(n);
    draw.g.resize(n);
    draw.c.resize(n);
    draw.hb.resize(n);
    for (int i = 0; i < n; ++i) {
        draw.tx_distance[i] = rng.uniform(cfg.distance_min, cfg.distance_max);
        draw.rx_distance[i] = rng.uniform(cfg.distance_min, cfg.distance_max);
        const double shadow_tx = cfg.shadowing_sigma_db * rng.normal();
        const double shadow_rx = cfg.shadowing_sigma_db * rng.normal();
        draw.tx_gain[i] = pathloss_gain(cfg, draw.tx_distance[i], shadow_tx);
        draw.rx_gain[i] = pathloss_gain(cfg, draw.rx_distance[i], shadow_rx);
        draw.h[i].resize(cfg.n_tx_antennas);
        for (int a = 0; a < cfg.n_tx_antennas; ++a) draw.h[i][a] = rng.complex_normal(draw.tx_gain[i]);
        draw.g[i].resize(cfg.n_rx_antennas);
        for (int a = 0; a < cfg.n_rx_antennas; ++a) draw.g[i][a] = rng.complex_normal(draw.rx_gain[i]);
        // Plain (unconjugated) product h_i b.
        draw.hb[i] = draw.h[i].cwiseProduct(draw.beamformer.cast<std::complex<double>>()).sum();
        draw.c[i] = draw.g[i] * draw.hb[i];
    }
    return draw;
}

/// Fresh fading with the large-scale gains of an existing draw (distances
/// and shadowing shared, as across resource blocks of one link).
inline ChannelDraw redraw_fading(const ScenarioConfig& cfg, const ChannelDraw& base, Rng& rng) {
    ChannelDraw draw = base;
    for (int i = 0; i < cfg.n_users; ++i) {
        for (int a = 0; a < cfg.n_tx_antennas; ++a) draw.h[i][a] = rng.complex_normal(base.tx_gain[i]);
        for (int a = 0; a < cfg.n_rx_antennas; ++a) draw.g[i][a] = rng.complex_normal(base.rx_gain[i]);
        draw.hb[i] = draw.h[i].cwiseProduct(draw.beamformer.cast<std::complex<double>>()).sum();
        draw.c[i] = draw.g[i] * draw.hb[i];
    }
    return draw;
}

/// Reduce a channel draw to the interference-network coefficients. QoS
/// targets are not set here; see qos_targets.
inline NetworkInstance derive_instance(const ScenarioConfig& cfg, const ChannelDraw& draw) {
    const int n = cfg.n_users;
    const double sigma2 = cfg.thermal_noise();  // receiver and relay alike
    const double inv_pr = std::isinf(cfg.relay_power) ? 0.0 : 1.0 / cfg.relay_power;

    NetworkInstance inst;
    inst.bandwidth = cfg.bandwidth;
    inst.gain.resize(n, n);
    inst.self_interference.resize(n);
    inst.noise.resize(n);
    inst.users.resize(n);
    for (int i = 0; i < n; ++i) {
        const std::complex<double> combiner_gain = draw.c[i].dot(draw.g[i]);  // c_i^H g_i
        const double combiner_gain2 = std::norm(combiner_gain);
        const double combiner_norm2 = draw.c[i].squaredNorm();
        if (std::norm(draw.hb[i]) == 0.0) throw std::domain_error("degenerate channel draw: h_i b = 0");
        for (int j = 0; j < n; ++j) {
            const double hbj2 = std::norm(draw.hb[j]);
            if (j == i) {
                inst.gain(i, i) = combiner_gain2 * hbj2;
            } else {
                inst.gain(j, i) = combiner_gain2 * hbj2 + sigma2 * combiner_norm2 * hbj2 * inv_pr;
            }
        }
        inst.self_interference[i] = sigma2 * combiner_norm2 * std::norm(draw.hb[i]) * inv_pr;
        inst.noise[i] = (combiner_gain2 + sigma2 * combiner_norm2 * inv_pr) * sigma2;

        UserLink& u = inst.users[i];
        u.weight = cfg.weights.empty() ? 1.0 / n : cfg.weights[i];
        u.p_max = cfg.p_max;
        u.r_min = 0.0;
        u.mu = cfg.mu;
        u.p_st = cfg.p_st;
    }
    inst.validate();
    return inst;
}

/// Benchmark SINR of user i: equal powers, equivalent noise power zero.
inline double gamma_bar(const NetworkInstance& inst, int i) {
    detail::check_user_index(inst.n_users(), i);
    double denom = inst.self_interference[i];
    for (int j = 0; j < inst.n_users(); ++j)
        if (j != i) denom += inst.gain(j, i);
    if (denom == 0.0) throw DegenerateTarget("interference-free user has no finite benchmark rate");
    return inst.gain(i, i) / denom;
}

/// Set r_min = r * B log2(1 + gamma_bar) on every user; returns the vector.
inline Eigen::VectorXd qos_targets(NetworkInstance& inst, double r) {
    if (!(r >= 0.0) || r >= 1.0) throw std::invalid_argument("QoS fraction must lie in [0, 1)");
    const int n = inst.n_users();
    Eigen::VectorXd r_min = Eigen::VectorXd::Zero(n);
    if (r > 0.0) {
        for (int i = 0; i < n; ++i)
            r_min[i] = r * inst.bandwidth * std::log2(1.0 + gamma_bar(inst, i));
    }
    for (int i = 0; i < n; ++i) inst.users[i].r_min = r_min[i];
    return r_min;
}

struct GeneratedInstance {
    NetworkInstance instance;
    int redraws = 0;  ///< draws rejected because p = p_max * 1 violated QoS
};

/// Draw until the full-power point is feasible (the benchmark targets ignore
/// noise, so rare draws can violate QoS at finite noise). Deterministic in
/// (cfg, cfg.seed): rejected draws advance the same stream.
inline GeneratedInstance generate_feasible_instance(const ScenarioConfig& cfg) {
    Rng rng(cfg.seed);
    GeneratedInstance out;
    for (int attempt = 0; attempt < 1000; ++attempt) {
        try {
            auto draw = draw_channels(cfg, rng);
            out.instance = derive_instance(cfg, draw);
        } catch (const std::domain_error&) {
            ++out.redraws;
            continue;
        }
        qos_targets(out.instance, cfg.qos_fraction);
        PowerVector p_full = Eigen::VectorXd::Constant(cfg.n_users, cfg.p_max);
        if (is_feasible(out.instance, p_full).feasible) return out;
        ++out.redraws;
    }
    throw std::runtime_error("no feasible draw after 1000 attempts; QoS fraction too aggressive");
}

}  // namespace eemax
