#include "fucik/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fucik/errors.hpp"

namespace fucik {

namespace {

const std::set<std::string> kKeys = {"intervals", "s", "p", "n_per_unit", "quad_order",
                                     "truncation_radius", "tolerances", "seed"};
const std::set<std::string> kTolKeys = {"solver_tol", "cluster_tol", "bisect_tol"};

double number(const nlohmann::json& j, const char* key) {
    if (!j.is_number()) throw ConfigError(std::string(key) + " must be a number");
    return j.get<double>();
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

void ProblemConfig::validate() const {
    if (intervals.empty()) throw ConfigError("interval list is empty");
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        const auto& iv = intervals[i];
        if (!std::isfinite(iv.left) || !std::isfinite(iv.right))
            throw ConfigError("interval endpoints must be finite");
        if (!(iv.right > iv.left)) throw ConfigError("interval must have positive length");
        if (i > 0 && !(iv.left > intervals[i - 1].right))
            throw ConfigError("intervals overlap or are not ordered left to right");
    }
    if (!(s > 0.0 && s < 1.0)) throw ConfigError("s out of range (0,1)");
    if (!(p > 1.0) || !std::isfinite(p)) throw ConfigError("p out of range (1,inf)");
    if (n_per_unit < 1) throw ConfigError("n_per_unit must be positive");
    if (quad_order < 1 || quad_order > 64) throw ConfigError("quad_order must be in [1,64]");
    if (!(truncation_radius > 0.0)) throw ConfigError("truncation_radius must be positive");
    if (!(tolerances.solver_tol > 0.0) || !(tolerances.cluster_tol > 0.0) ||
        !(tolerances.bisect_tol > 0.0))
        throw ConfigError("tolerances must be positive");
}

double ProblemConfig::measure() const {
    double m = 0.0;
    for (const auto& iv : intervals) m += iv.length();
    return m;
}

ProblemConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (!kKeys.contains(key)) throw ConfigError("unknown config key: " + key);

    ProblemConfig cfg;
    if (j.contains("intervals")) {
        const auto& arr = j.at("intervals");
        if (!arr.is_array()) throw ConfigError("intervals must be an array of [left, right]");
        cfg.intervals.clear();
        for (const auto& iv : arr) {
            if (!iv.is_array() || iv.size() != 2)
                throw ConfigError("each interval must be a pair [left, right]");
            cfg.intervals.push_back({number(iv[0], "interval"), number(iv[1], "interval")});
        }
    }
    if (j.contains("s")) cfg.s = number(j.at("s"), "s");
    if (j.contains("p")) cfg.p = number(j.at("p"), "p");
    if (j.contains("n_per_unit")) {
        if (!j.at("n_per_unit").is_number_integer()) throw ConfigError("n_per_unit must be an integer");
        cfg.n_per_unit = j.at("n_per_unit").get<int>();
    }
    if (j.contains("quad_order")) {
        if (!j.at("quad_order").is_number_integer()) throw ConfigError("quad_order must be an integer");
        cfg.quad_order = j.at("quad_order").get<int>();
    }
    if (j.contains("truncation_radius"))
        cfg.truncation_radius = number(j.at("truncation_radius"), "truncation_radius");
    if (j.contains("tolerances")) {
        const auto& t = j.at("tolerances");
        if (!t.is_object()) throw ConfigError("tolerances must be an object");
        for (const auto& [key, _] : t.items())
            if (!kTolKeys.contains(key)) throw ConfigError("unknown tolerance: " + key);
        if (t.contains("solver_tol")) cfg.tolerances.solver_tol = number(t.at("solver_tol"), "solver_tol");
        if (t.contains("cluster_tol")) cfg.tolerances.cluster_tol = number(t.at("cluster_tol"), "cluster_tol");
        if (t.contains("bisect_tol")) cfg.tolerances.bisect_tol = number(t.at("bisect_tol"), "bisect_tol");
    }
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
        cfg.seed = j.at("seed").get<std::uint64_t>();
    }
    cfg.validate();
    return cfg;
}

nlohmann::json config_to_json(const ProblemConfig& cfg) {
    nlohmann::json iv = nlohmann::json::array();
    for (const auto& i : cfg.intervals) iv.push_back({i.left, i.right});
    return {{"intervals", iv},
            {"s", cfg.s},
            {"p", cfg.p},
            {"n_per_unit", cfg.n_per_unit},
            {"quad_order", cfg.quad_order},
            {"truncation_radius", cfg.truncation_radius},
            {"tolerances",
             {{"solver_tol", cfg.tolerances.solver_tol},
              {"cluster_tol", cfg.tolerances.cluster_tol},
              {"bisect_tol", cfg.tolerances.bisect_tol}}},
            {"seed", cfg.seed}};
}

ProblemConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("malformed config JSON: ") + e.what());
    }
    return config_from_json(j);
}

std::uint64_t forms_hash(const ProblemConfig& cfg) {
    // Only the fields the assembled forms depend on.
    nlohmann::json j = config_to_json(cfg);
    j.erase("tolerances");
    j.erase("seed");
    return fnv1a(j.dump());
}

}  // namespace fucik
