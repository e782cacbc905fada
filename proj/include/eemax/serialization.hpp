#pragma once

// JSON interchange for network instances and solve results. The instance
// schema is { n, B, omega (row-major, entry [j*n+i] is the gain of
// transmitter j at receiver i), phi, noise, users: [{w, p_max, r_min, mu,
// p_st}] }.

#include "model.hpp"
#include "sco.hpp"

#include <json.hpp>

#include <fstream>
#include <stdexcept>
#include <string>

namespace eemax {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline double require_number(const nlohmann::json& j, const std::string& field) {
    if (!j.contains(field) || !j[field].is_number())
        throw ConfigError("missing or non-numeric field '" + field + "'");
    return j[field].get<double>();
}

}  // namespace detail

inline nlohmann::json instance_to_json(const NetworkInstance& inst) {
    const int n = inst.n_users();
    nlohmann::json j;
    j["n"] = n;
    j["B"] = inst.bandwidth;
    std::vector<double> omega;
    omega.reserve(n * n);
    for (int jj = 0; jj < n; ++jj)
        for (int i = 0; i < n; ++i) omega.push_back(inst.gain(jj, i));
    j["omega"] = omega;
    j["phi"] = std::vector<double>(inst.self_interference.data(), inst.self_interference.data() + n);
    j["noise"] = std::vector<double>(inst.noise.data(), inst.noise.data() + n);
    nlohmann::json users = nlohmann::json::array();
    for (const auto& u : inst.users) {
        users.push_back({{"w", u.weight},
                         {"p_max", u.p_max},
                         {"r_min", u.r_min},
                         {"mu", u.mu},
                         {"p_st", u.p_st}});
    }
    j["users"] = users;
    return j;
}

inline NetworkInstance instance_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("instance document must be a JSON object");
    const int n = static_cast<int>(detail::require_number(j, "n"));
    if (n < 1) throw ConfigError("field 'n' must be >= 1");
    NetworkInstance inst;
    inst.bandwidth = detail::require_number(j, "B");
    for (const char* field : {"omega", "phi", "noise"}) {
        if (!j.contains(field) || !j[field].is_array())
            throw ConfigError(std::string("missing or non-array field '") + field + "'");
    }
    if (static_cast<int>(j["omega"].size()) != n * n)
        throw ConfigError("field 'omega' must hold n*n row-major entries");
    if (static_cast<int>(j["phi"].size()) != n || static_cast<int>(j["noise"].size()) != n)
        throw ConfigError("fields 'phi' and 'noise' must hold n entries");
    inst.gain.resize(n, n);
    for (int jj = 0; jj < n; ++jj)
        for (int i = 0; i < n; ++i) {
            const auto& e = j["omega"][jj * n + i];
            if (!e.is_number()) throw ConfigError("omega[" + std::to_string(jj * n + i) + "] not numeric");
            inst.gain(jj, i) = e.get<double>();
        }
    inst.self_interference.resize(n);
    inst.noise.resize(n);
    for (int i = 0; i < n; ++i) {
        inst.self_interference[i] = j["phi"][i].get<double>();
        inst.noise[i] = j["noise"][i].get<double>();
    }
    if (!j.contains("users") || !j["users"].is_array() || static_cast<int>(j["users"].size()) != n)
        throw ConfigError("field 'users' must hold n entries");
    inst.users.resize(n);
    for (int i = 0; i < n; ++i) {
        const auto& u = j["users"][i];
        const std::string at = "users[" + std::to_string(i) + "].";
        if (!u.is_object()) throw ConfigError(at + " must be an object");
        auto field = [&](const char* name) {
            if (!u.contains(name) || !u[name].is_number()) throw ConfigError(at + name + " missing or non-numeric");
            return u[name].get<double>();
        };
        inst.users[i] = UserLink{field("w"), field("p_max"), field("r_min"), field("mu"), field("p_st")};
    }
    try {
        inst.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid instance: ") + e.what());
    }
    return inst;
}

inline NetworkInstance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("parse error in '" + path + "': " + e.what());
    }
    return instance_from_json(j);
}

inline nlohmann::json result_to_json(const ScoResult& res, double wsee_value, double wsr_value) {
    nlohmann::json j;
    j["p_star"] = std::vector<double>(res.p_star.data(), res.p_star.data() + res.p_star.size());
    j["wsee"] = wsee_value;
    j["wsr"] = wsr_value;
    j["iterations"] = res.iterations;
    j["history"] = res.history;
    j["converged"] = res.converged;
    j["kkt"] = {{"stationarity", res.kkt.stationarity},
                {"max_violation", res.kkt.max_violation},
                {"complementarity", res.kkt.complementarity}};
    return j;
}

}  // namespace eemax
