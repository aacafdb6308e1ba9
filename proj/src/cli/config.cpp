#include "config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ellab/errors.hpp"

namespace ellab::cli {

namespace {

using nlohmann::json;

const std::set<std::string> known_systems = {
    "cm-kp", "bkp", "nv", "toda-rs", "selfdual-cm", "selfdual-bkp",
    "selfdual-rs"};

cplx parse_complex(const json& j, const std::string& where) {
    if (j.is_number()) return cplx(j.get<double>(), 0.0);
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return cplx(j[0].get<double>(), j[1].get<double>());
    throw config_error("config key \"" + where +
                       "\" must be a number or a [re, im] pair");
}

double parse_number(const json& j, const std::string& where) {
    if (!j.is_number())
        throw config_error("config key \"" + where + "\" must be a number");
    return j.get<double>();
}

int parse_positive_int(const json& j, const std::string& where, int max_value) {
    if (!j.is_number_integer())
        throw config_error("config key \"" + where + "\" must be an integer");
    const long long v = j.get<long long>();
    if (v < 1 || v > max_value)
        throw config_error("config key \"" + where + "\" must be between 1 and " +
                           std::to_string(max_value));
    return static_cast<int>(v);
}

std::vector<cplx> parse_complex_list(const json& j, const std::string& where) {
    if (!j.is_array())
        throw config_error("config key \"" + where + "\" must be an array");
    std::vector<cplx> out;
    out.reserve(j.size());
    for (std::size_t k = 0; k < j.size(); ++k)
        out.push_back(parse_complex(j[k], where + "[" + std::to_string(k) + "]"));
    return out;
}

void parse_lattice(const json& j, Scenario& s) {
    if (!j.is_object())
        throw config_error("config key \"lattice\" must be an object");
    double ore = 0.5, oim = 0.0, pre = 0.15, pim = 0.55;
    for (const auto& [key, val] : j.items()) {
        if (key == "omega_re") ore = parse_number(val, "lattice.omega_re");
        else if (key == "omega_im") oim = parse_number(val, "lattice.omega_im");
        else if (key == "omega_prime_re")
            pre = parse_number(val, "lattice.omega_prime_re");
        else if (key == "omega_prime_im")
            pim = parse_number(val, "lattice.omega_prime_im");
        else
            throw config_error("unknown config key \"lattice." + key + "\"");
    }
    s.omega = cplx(ore, oim);
    s.omega_prime = cplx(pre, pim);
}

void parse_initial(const json& j, Scenario& s) {
    if (!j.is_object())
        throw config_error("config key \"initial\" must be an object");
    for (const auto& [key, val] : j.items()) {
        if (key == "positions")
            s.positions = parse_complex_list(val, "initial.positions");
        else if (key == "velocities")
            s.velocities = parse_complex_list(val, "initial.velocities");
        else if (key == "seed") {
            if (!val.is_number_integer() || val.get<long long>() < 0)
                throw config_error(
                    "config key \"initial.seed\" must be a non-negative integer");
            s.seed = val.get<std::uint64_t>();
        } else
            throw config_error("unknown config key \"initial." + key + "\"");
    }
}

void parse_time(const json& j, Scenario& s) {
    if (!j.is_object())
        throw config_error("config key \"time\" must be an object");
    for (const auto& [key, val] : j.items()) {
        if (key == "t_end") s.time.t_end = parse_number(val, "time.t_end");
        else if (key == "rel_tol") {
            s.time.rel_tol = parse_number(val, "time.rel_tol");
            if (s.time.rel_tol <= 0)
                throw config_error("config key \"time.rel_tol\" must be positive");
        } else if (key == "abs_tol") {
            s.time.abs_tol = parse_number(val, "time.abs_tol");
            if (s.time.abs_tol <= 0)
                throw config_error("config key \"time.abs_tol\" must be positive");
        } else
            throw config_error("unknown config key \"time." + key + "\"");
    }
}

json complex_to_json(cplx v) { return json::array({v.real(), v.imag()}); }

json complex_list_to_json(const std::vector<cplx>& vs) {
    json out = json::array();
    for (cplx v : vs) out.push_back(complex_to_json(v));
    return out;
}

} // namespace

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file \"" + path + "\"");
    std::stringstream buf;
    buf << in.rdbuf();

    json root;
    try {
        root = json::parse(buf.str());
    } catch (const json::parse_error& e) {
        throw config_error(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object())
        throw config_error("config root must be a JSON object");

    Scenario s;
    for (const auto& [key, val] : root.items()) {
        if (key == "system") {
            if (!val.is_string())
                throw config_error("config key \"system\" must be a string");
            s.system = val.get<std::string>();
            if (known_systems.find(s.system) == known_systems.end())
                throw config_error("config key \"system\": unknown system \"" +
                                   s.system + "\"");
        } else if (key == "lattice") parse_lattice(val, s);
        else if (key == "particles")
            s.particles = parse_positive_int(val, "particles", 12);
        else if (key == "initial") parse_initial(val, s);
        else if (key == "eta") s.eta = parse_complex(val, "eta");
        else if (key == "lambda") s.lambda = parse_complex(val, "lambda");
        else if (key == "z") s.z = parse_complex(val, "z");
        else if (key == "mu") s.mu = parse_complex(val, "mu");
        else if (key == "hbar") s.hbar = parse_complex(val, "hbar");
        else if (key == "c") s.c = parse_complex(val, "c");
        else if (key == "b") s.b = parse_complex(val, "b");
        else if (key == "gamma") s.gamma = parse_complex(val, "gamma");
        else if (key == "r") s.r = parse_complex(val, "r");
        else if (key == "time") parse_time(val, s);
        else if (key == "checks") {
            if (!val.is_array())
                throw config_error("config key \"checks\" must be an array");
            for (const auto& c : val) {
                if (!c.is_string())
                    throw config_error(
                        "config key \"checks\" must hold only strings");
                s.checks.push_back(c.get<std::string>());
            }
        } else if (key == "trials")
            s.trials = parse_positive_int(val, "trials", 100000);
        else if (key == "steps")
            s.steps = parse_positive_int(val, "steps", 10000);
        else
            throw config_error("unknown config key \"" + key + "\"");
    }
    return s;
}

std::string normalized_dump(const Scenario& s) {
    json j;
    j["b"] = complex_to_json(s.b);
    j["c"] = complex_to_json(s.c);
    j["checks"] = s.checks;
    j["eta"] = complex_to_json(s.eta);
    j["gamma"] = complex_to_json(s.gamma);
    j["hbar"] = complex_to_json(s.hbar);
    j["lambda"] = complex_to_json(s.lambda);
    j["lattice"]["omega"] = complex_to_json(s.omega);
    j["lattice"]["omega_prime"] = complex_to_json(s.omega_prime);
    j["mu"] = complex_to_json(s.mu);
    j["particles"] = s.particles;
    j["positions"] = complex_list_to_json(s.positions);
    j["r"] = complex_to_json(s.r);
    j["seed"] = s.seed;
    j["steps"] = s.steps;
    j["system"] = s.system;
    j["time"]["abs_tol"] = s.time.abs_tol;
    j["time"]["rel_tol"] = s.time.rel_tol;
    j["time"]["t_end"] = s.time.t_end;
    if (s.tol_override) j["tol_override"] = *s.tol_override;
    else j["tol_override"] = nullptr;
    j["trials"] = s.trials;
    j["velocities"] = complex_list_to_json(s.velocities);
    j["z"] = complex_to_json(s.z);
    return j.dump();
}

std::string config_digest(const Scenario& s) {
    const std::string dump = normalized_dump(s);
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace ellab::cli
