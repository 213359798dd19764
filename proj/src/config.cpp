#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "cvqkd/algebra.hpp"
#include "cvqkd/error.hpp"
#include "cvqkd/protocol.hpp"

namespace cvqkd::protocol {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& why, int line) {
    throw ConfigError("config line " + std::to_string(line) + ": '" + key + "': " + why, line);
}

double to_double(const std::string& key, const std::string& v, int line) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        bad(key, "expected a number, got '" + v + "'", line);
    }
    if (used != v.size() || !std::isfinite(x)) bad(key, "expected a number, got '" + v + "'", line);
    return x;
}

std::uint64_t to_uint(const std::string& key, const std::string& v, int line) {
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
        bad(key, "expected a non-negative integer, got '" + v + "'", line);
    try {
        return std::stoull(v);
    } catch (const std::exception&) {
        bad(key, "integer out of range", line);
    }
}

bool to_bool(const std::string& key, const std::string& v, int line) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    bad(key, "expected true or false, got '" + v + "'", line);
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

std::string flow_name(Flow f) { return f == Flow::Decoy ? "decoy" : "gaussian-postselected"; }

Flow parse_flow(const std::string& s) {
    if (s == "decoy") return Flow::Decoy;
    if (s == "gaussian-postselected") return Flow::GaussianPostselected;
    fail(ErrorKind::Config, "unknown flow '" + s + "' (expected decoy or gaussian-postselected)");
}

std::string detection_name(channel::Detection d) {
    return d == channel::Detection::Homodyne ? "homodyne" : "heterodyne";
}

void set_config_value(ProtocolConfig& c, const std::string& key, const std::string& v, int line) {
    if (key == "flow") {
        if (v == "decoy")
            c.flow = Flow::Decoy;
        else if (v == "gaussian-postselected")
            c.flow = Flow::GaussianPostselected;
        else
            bad(key, "expected decoy or gaussian-postselected", line);
    } else if (key == "d") {
        c.d = static_cast<int>(to_uint(key, v, line));
    } else if (key == "alpha") {
        c.alpha = to_double(key, v, line);
    } else if (key == "va") {
        const double va = to_double(key, v, line);
        if (va <= 0.0) bad(key, "must be positive", line);
        c.alpha = std::sqrt(va / 2.0);
    } else if (key == "n_symbols") {
        c.n_symbols = to_uint(key, v, line);
    } else if (key == "p_est") {
        c.p_est = to_double(key, v, line);
    } else if (key == "p") {
        c.p = to_double(key, v, line);
    } else if (key == "gamma_min") {
        c.band.gamma_min = to_double(key, v, line);
    } else if (key == "gamma_max") {
        c.band.gamma_max = v == "inf" ? INFINITY : to_double(key, v, line);
    } else if (key == "decoy_design") {
        c.decoy_design = v;
    } else if (key == "decoy_radii_max") {
        c.decoy_radii_max = static_cast<int>(to_uint(key, v, line));
    } else if (key == "T") {
        c.channel.T = to_double(key, v, line);
    } else if (key == "distance_km") {
        c.distance_km = to_double(key, v, line);
    } else if (key == "loss_db_per_km") {
        c.loss_db_per_km = to_double(key, v, line);
    } else if (key == "xi") {
        c.channel.xi = to_double(key, v, line);
    } else if (key == "eta") {
        c.channel.eta = to_double(key, v, line);
    } else if (key == "eta_trusted") {
        c.channel.eta_trusted = to_bool(key, v, line);
    } else if (key == "detection") {
        if (v == "homodyne")
            c.channel.detection = channel::Detection::Homodyne;
        else if (v == "heterodyne")
            c.channel.detection = channel::Detection::Heterodyne;
        else
            bad(key, "expected homodyne or heterodyne", line);
    } else if (key == "symmetrization_k") {
        c.symmetrization_k = to_uint(key, v, line);
    } else if (key == "beta_target") {
        c.beta_target = to_double(key, v, line);
    } else if (key == "code") {
        if (v.empty()) bad(key, "empty code spec", line);
        c.code = v;
    } else if (key == "seed") {
        c.seed = to_uint(key, v, line);
    } else if (key == "failure_threshold") {
        c.failure_threshold = to_double(key, v, line);
    } else if (key == "min_estimation_samples") {
        c.min_estimation_samples = to_uint(key, v, line);
    } else {
        bad(key, "unknown key", line);
    }
}

ProtocolConfig parse_config(std::istream& in) {
    ProtocolConfig c;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (auto h = raw.find('#'); h != std::string::npos) raw.erase(h);
        const std::string s = trim(raw);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line) + ": expected 'key = value'", line);
        const std::string key = trim(s.substr(0, eq));
        const std::string val = trim(s.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(line) + ": missing key", line);
        set_config_value(c, key, val, line);
    }
    if (c.distance_km) {
        try {
            c.channel.T = channel::distance_to_T(*c.distance_km, c.loss_db_per_km);
        } catch (const Error& e) {
            throw ConfigError(std::string("config: ") + e.what(), line);
        }
    }
    try {
        c.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("config: ") + e.what(), 0);
    }
    return c;
}

ProtocolConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open config file '" + path + "'");
    return parse_config(in);
}

void write_config(std::ostream& os, const ProtocolConfig& c) {
    os << "flow = " << flow_name(c.flow) << '\n'
       << "d = " << c.d << '\n'
       << "alpha = " << fmt(c.alpha) << '\n'
       << "n_symbols = " << c.n_symbols << '\n'
       << "p_est = " << fmt(c.p_est) << '\n'
       << "p = " << fmt(c.p) << '\n'
       << "gamma_min = " << fmt(c.band.gamma_min) << '\n'
       << "gamma_max = " << (std::isinf(c.band.gamma_max) ? std::string("inf") : fmt(c.band.gamma_max)) << '\n'
       << "decoy_design = " << c.decoy_design << '\n'
       << "decoy_radii_max = " << c.decoy_radii_max << '\n'
       << "T = " << fmt(c.channel.T) << '\n'
       << "loss_db_per_km = " << fmt(c.loss_db_per_km) << '\n'
       << "xi = " << fmt(c.channel.xi) << '\n'
       << "eta = " << fmt(c.channel.eta) << '\n'
       << "eta_trusted = " << (c.channel.eta_trusted ? "true" : "false") << '\n'
       << "detection = " << detection_name(c.channel.detection) << '\n'
       << "symmetrization_k = " << c.symmetrization_k << '\n'
       << "beta_target = " << fmt(c.beta_target) << '\n'
       << "code = " << c.code << '\n'
       << "seed = " << c.seed << '\n'
       << "failure_threshold = " << fmt(c.failure_threshold) << '\n'
       << "min_estimation_samples = " << c.min_estimation_samples << '\n';
}

void ProtocolConfig::validate() const {
    require(algebra::is_division_dimension(d), ErrorKind::Config, "d must be 1, 2, 4 or 8");
    require(alpha > 0.0, ErrorKind::Config, "alpha must be positive");
    require(n_symbols >= 1, ErrorKind::Config, "n_symbols must be positive");
    require((2 * n_symbols) % static_cast<std::size_t>(d) == 0 || channel.detection == channel::Detection::Homodyne,
            ErrorKind::Config, "2 * n_symbols must be a multiple of d");
    require(p_est >= 0.0 && p_est <= 1.0, ErrorKind::Config, "p_est must lie in [0, 1]");
    require(p >= 0.0 && p <= 1.0, ErrorKind::Config, "p must lie in [0, 1]");
    require(band.gamma_min >= 0.0 && band.gamma_min <= 1.0 && band.gamma_max >= 1.0, ErrorKind::Config,
            "band must satisfy 0 <= gamma_min <= 1 <= gamma_max");
    require(channel.T > 0.0 && channel.T <= 1.0, ErrorKind::Config, "T must lie in (0, 1]");
    require(channel.xi >= 0.0, ErrorKind::Config, "xi must be >= 0");
    require(channel.eta > 0.0 && channel.eta <= 1.0, ErrorKind::Config, "eta must lie in (0, 1]");
    require(failure_threshold >= 0.0 && failure_threshold <= 1.0, ErrorKind::Config,
            "failure_threshold must lie in [0, 1]");
    require(decoy_radii_max >= 1, ErrorKind::Config, "decoy_radii_max must be >= 1");
    if (flow == Flow::Decoy) {
        require(d == 8, ErrorKind::Config, "the decoy flow is defined for d = 8");
        require(channel.detection == channel::Detection::Heterodyne, ErrorKind::Config,
                "the decoy flow uses heterodyne detection");
    }
}

}  // namespace cvqkd::protocol
