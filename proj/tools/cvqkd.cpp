// cvqkd command-line front end. Uses only the public C interface.

#include <cvqkd/cvqkd.h>

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RuntimeError : std::runtime_error {
    int code;
    RuntimeError(const std::string& what, int c = kExitRuntime) : std::runtime_error(what), code(c) {}
};

void check(cvqkd_status s) {
    if (s == CVQKD_OK) return;
    std::string msg = cvqkd_last_error();
    if (s == CVQKD_ERR_CONFIG) throw RuntimeError(msg, kExitUsage);
    throw RuntimeError(msg);
}

std::string fmt(double x) {
    if (std::isnan(x)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size()) throw UsageError("invalid number '" + s + "' for " + what);
    return v;
}

std::vector<int> parse_dims(const std::string& s) {
    std::vector<int> out;
    for (const auto& t : split(s, ',')) {
        if (t == "inf" || t == "gaussian") {
            out.push_back(CVQKD_D_GAUSSIAN);
            continue;
        }
        if (t != "1" && t != "2" && t != "4" && t != "8") throw UsageError("invalid dimension '" + t + "'");
        out.push_back(std::stoi(t));
    }
    if (out.empty()) throw UsageError("no dimensions given");
    return out;
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
    std::vector<double> out;
    for (const auto& t : split(s, ',')) out.push_back(parse_double(t, what));
    if (out.empty()) throw UsageError("empty list for " + what);
    return out;
}

struct Sweep {
    std::string var;
    std::vector<double> grid;
};

// var:start:stop:steps[:lin|log]
Sweep parse_sweep(const std::string& spec) {
    const auto parts = split(spec, ':');
    if (parts.size() < 4 || parts.size() > 5) throw UsageError("sweep must be var:start:stop:steps[:lin|log]");
    Sweep s;
    s.var = parts[0];
    if (s.var != "distance_km" && s.var != "va" && s.var != "xi" && s.var != "alpha")
        throw UsageError("sweep variable must be distance_km, va, xi or alpha");
    const double a = parse_double(parts[1], "sweep start");
    const double b = parse_double(parts[2], "sweep stop");
    const double n = parse_double(parts[3], "sweep steps");
    if (n < 2 || n != std::floor(n)) throw UsageError("sweep needs an integer number of steps >= 2");
    const bool log = parts.size() == 5 && parts[4] == "log";
    if (parts.size() == 5 && parts[4] != "log" && parts[4] != "lin") throw UsageError("sweep spacing must be lin or log");
    if (log && (a <= 0.0 || b <= 0.0)) throw UsageError("log sweep needs positive bounds");
    if (b < a) throw UsageError("sweep stop must be >= start");
    if (s.var == "distance_km" && a < 0.0) throw UsageError("distance must be non-negative");
    if ((s.var == "va" || s.var == "alpha") && (a <= 0.0 || (s.var == "va" && b > 5.0)))
        throw UsageError("V_A sweep must lie in (0, 5]");
    if (s.var == "xi" && a < 0.0) throw UsageError("excess noise must be non-negative");
    const int steps = static_cast<int>(n);
    for (int i = 0; i < steps; ++i) {
        const double f = static_cast<double>(i) / (steps - 1);
        s.grid.push_back(log ? a * std::pow(b / a, f) : a + (b - a) * f);
    }
    return s;
}

// Evaluates rows[i] = job(i) on a thread pool; output order is the index order.
std::vector<std::string> parallel_rows(std::size_t n, const std::function<std::string(std::size_t)>& job) {
    std::vector<std::string> rows(n);
    std::vector<std::string> errors(n);
    std::atomic<std::size_t> next{0};
    const unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), 16));
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                rows[i] = job(i);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (!e.empty()) throw RuntimeError(e);
    return rows;
}

class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw RuntimeError("cannot write '" + path + "'");
        }
    }
    std::ostream& os() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

// ------------------------------------------------------------------ keyrate

struct KeyrateArgs {
    std::string sweep;  // empty: one row, or the default distance sweep
    std::string table = "keyrate";
    std::string dims = "1,8";
    std::string xis = "0.005";
    std::string detection = "auto";
    double eta = 0.6;
    double beta = 0.8;
    double va = 0.5;
    double T = 1.0;
    double distance = -1.0;
    double loss = 0.2;
    bool trusted = false;
    bool optimize_va = false;
    std::string out;
};

int cmd_keyrate(const KeyrateArgs& a, bool fixed_channel) {
    Sweep sw;
    if (!a.sweep.empty())
        sw = parse_sweep(a.sweep);
    else if (fixed_channel && a.table == "keyrate")
        sw.grid = {0.0};  // single row at the given T or distance
    else
        sw = parse_sweep(a.table == "keyrate" ? "distance_km:0:150:31" : "va:0.05:5:100");
    Output out(a.out);
    auto& os = out.os();

    if (a.table == "correlation") {
        if (sw.var != "va" && sw.var != "alpha") throw UsageError("the correlation table sweeps va or alpha");
        os << "# cvqkd-csv-v1 correlation\nva,z_epr,z_8,z_4,z_2,z_1\n";
        auto rows = parallel_rows(sw.grid.size(), [&](std::size_t i) {
            const double va = sw.var == "va" ? sw.grid[i] : 2.0 * sw.grid[i] * sw.grid[i];
            std::string row = fmt(va);
            for (int d : {CVQKD_D_GAUSSIAN, 8, 4, 2, 1}) {
                double z = 0.0;
                check(cvqkd_correlation(d, va, &z));
                row += "," + fmt(z);
            }
            return row;
        });
        for (const auto& r : rows) os << r << '\n';
        return 0;
    }

    const auto dims = parse_dims(a.dims);
    if (a.table == "noise") {
        if (sw.var != "va" && sw.var != "alpha") throw UsageError("the noise table sweeps va or alpha");
        os << "# cvqkd-csv-v1 noise\nd,va,F,delta_xi\n";
        std::vector<std::pair<int, double>> pts;
        for (int d : dims)
            for (double g : sw.grid) pts.push_back({d, sw.var == "va" ? g : 2.0 * g * g});
        auto rows = parallel_rows(pts.size(), [&](std::size_t i) {
            double F = 0.0, dx = 0.0;
            check(cvqkd_equivalent_excess_noise(pts[i].first, pts[i].second, &F, &dx));
            return (pts[i].first == CVQKD_D_GAUSSIAN ? std::string("inf") : std::to_string(pts[i].first)) + "," +
                   fmt(pts[i].second) + "," + fmt(F) + "," + fmt(dx);
        });
        for (const auto& r : rows) os << r << '\n';
        return 0;
    }
    if (a.table != "keyrate") throw UsageError("--table must be keyrate, noise or correlation");

    const auto xis = parse_list(a.xis, "--xi");
    struct Point {
        int d;
        double xi;
        double g;
    };
    std::vector<Point> pts;
    for (int d : dims)
        for (double xi : xis)
            for (double g : sw.grid) pts.push_back({d, xi, g});
    os << "# cvqkd-csv-v1 keyrate\n"
          "d,detection,distance_km,T,eta,eta_trusted,xi,va,beta,snr,I_AB,chi_BE,K,F,delta_xi\n";
    auto rows = parallel_rows(pts.size(), [&](std::size_t i) {
        const Point& p = pts[i];
        cvqkd_channel ch{a.T, p.xi, a.eta, CVQKD_HETERODYNE, a.trusted ? 1 : 0};
        if (a.detection == "homodyne")
            ch.detection = CVQKD_HOMODYNE;
        else if (a.detection == "heterodyne")
            ch.detection = CVQKD_HETERODYNE;
        else
            ch.detection = p.d == 1 ? CVQKD_HOMODYNE : CVQKD_HETERODYNE;
        double distance = a.distance;
        double va = a.va;
        if (sw.var == "distance_km") distance = p.g;
        if (sw.var == "xi") ch.xi = p.g;
        if (sw.var == "va") va = p.g;
        if (sw.var == "alpha") va = 2.0 * p.g * p.g;
        if (distance >= 0.0) check(cvqkd_distance_to_T(distance, a.loss, &ch.T));
        if (a.optimize_va) check(cvqkd_optimize_va(p.d, &ch, a.beta, 0.01, 5.0, &va));
        cvqkd_keyrate_report r{};
        check(cvqkd_key_rate(p.d, va, &ch, a.beta, &r));
        std::string row = (p.d == CVQKD_D_GAUSSIAN ? std::string("inf") : std::to_string(p.d)) + "," +
                          (r.detection == CVQKD_HOMODYNE ? "homodyne" : "heterodyne") + "," +
                          (distance >= 0.0 ? fmt(distance) : std::string()) + "," + fmt(r.T) + "," + fmt(r.eta) + "," +
                          (r.eta_trusted ? "true" : "false") + "," + fmt(r.xi) + "," + fmt(r.va) + "," + fmt(r.beta) +
                          "," + fmt(r.snr) + "," + fmt(r.I_AB) + "," + fmt(r.chi_BE) + "," + fmt(r.K) + "," +
                          fmt(r.F) + "," + fmt(r.delta_xi);
        return row;
    });
    for (const auto& r : rows) os << r << '\n';
    return 0;
}

// ------------------------------------------------------------------ simulate

struct SimulateArgs {
    std::string config;
    std::string flow;
    std::optional<std::uint64_t> seed;
    std::string out = "transcript";
    bool no_distill = false;
};

int cmd_simulate(const SimulateArgs& a) {
    cvqkd_config* cfg = nullptr;
    check(cvqkd_config_load(a.config.c_str(), &cfg));
    std::unique_ptr<cvqkd_config, decltype(&cvqkd_config_free)> guard(cfg, cvqkd_config_free);
    if (!a.flow.empty()) check(cvqkd_config_set(cfg, "flow", a.flow.c_str()));
    if (a.seed) check(cvqkd_config_set(cfg, "seed", std::to_string(*a.seed).c_str()));
    cvqkd_session* s = nullptr;
    check(cvqkd_session_run(cfg, a.no_distill ? 0 : 1, &s));
    std::unique_ptr<cvqkd_session, decltype(&cvqkd_session_free)> sg(s, cvqkd_session_free);
    check(cvqkd_session_write(s, a.out.c_str()));
    for (size_t i = 0; i < cvqkd_session_warning_count(s); ++i)
        std::cerr << "warning: " << cvqkd_session_warning(s, i) << '\n';
    size_t need = 0;
    check(cvqkd_session_summary(s, nullptr, 0, &need));
    std::string line(need + 1, '\0');
    check(cvqkd_session_summary(s, line.data(), line.size(), &need));
    line.resize(need);
    std::cout << line << '\n';
    return 0;
}

// ------------------------------------------------------------------ decoy-opt

struct DecoyArgs {
    int d = 2;
    double alpha = 0.5;
    double p = 0.5;
    int radii = 12;
    int nmax = 0;
    std::string out = "decoy_design.txt";
};

int cmd_decoy_opt(const DecoyArgs& a) {
    if (a.d != 2 && a.d != 4 && a.d != 8) throw UsageError("--d must be 2, 4 or 8");
    double pi = 0.0, idx_val = 0.0;
    int k_star = 0, idx_k = 0;
    check(cvqkd_povm_scale(a.d, a.alpha, 0, &pi, &k_star, &idx_k, &idx_val));
    std::printf("pi_d=%.12g k_star=%d index_formula_k=%d index_formula_value=%.12g\n", pi, k_star, idx_k, idx_val);
    cvqkd_decoy* dsn = nullptr;
    const cvqkd_status st = cvqkd_decoy_optimize(a.d, a.alpha, a.p, a.radii, a.nmax, &dsn);
    if (st == CVQKD_ERR_INFEASIBLE) {
        std::fprintf(stderr, "infeasible at photon number %d: %s\n", cvqkd_last_error_photon_number(),
                     cvqkd_last_error());
        return kExitRuntime;
    }
    check(st);
    std::unique_ptr<cvqkd_decoy, decltype(&cvqkd_decoy_free)> guard(dsn, cvqkd_decoy_free);
    cvqkd_decoy_info info{};
    check(cvqkd_decoy_get_info(dsn, &info));
    check(cvqkd_decoy_write(dsn, a.out.c_str()));
    std::printf("epsilon=%.6e tail_slack=%.3e n_max=%d components=%zu feasible=yes design=%s\n", info.epsilon,
                info.tail_slack, info.n_max, info.n_components, a.out.c_str());
    return 0;
}

// ------------------------------------------------------------------ reconcile-bench

struct BenchArgs {
    std::string dims = "8";
    std::string snr = "0.05";
    std::string code = "rep:16";
    std::size_t frames = 100;
    std::uint64_t seed = 1;
    std::string out;
};

int cmd_reconcile_bench(const BenchArgs& a) {
    const auto dims = parse_dims(a.dims);
    for (int d : dims)
        if (d == CVQKD_D_GAUSSIAN) throw UsageError("reconcile-bench needs d in {1, 2, 4, 8}");
    const double snr = a.snr == "inf" ? INFINITY : parse_double(a.snr, "--snr");
    if (!(snr > 0.0)) throw UsageError("--snr must be positive");
    if (a.frames < 1) throw UsageError("--frames must be >= 1");
    cvqkd_code* code = nullptr;
    const cvqkd_status cs = cvqkd_code_from_spec(a.code.c_str(), &code);
    if (cs != CVQKD_OK) throw UsageError(std::string("code: ") + cvqkd_last_error());
    std::unique_ptr<cvqkd_code, decltype(&cvqkd_code_free)> cg(code, cvqkd_code_free);

    Output out(a.out);
    auto& os = out.os();
    os << "# cvqkd-csv-v1 reconcile-bench\nd,snr,frame,success,raw_bit_errors,decoded_bit_errors\n";
    std::vector<std::string> summary;
    for (std::size_t di = 0; di < dims.size(); ++di) {
        cvqkd_bench* b = nullptr;
        check(cvqkd_bench_run(dims[di], snr, code, a.frames, a.seed + di, &b));
        std::unique_ptr<cvqkd_bench, decltype(&cvqkd_bench_free)> bg(b, cvqkd_bench_free);
        cvqkd_bench_summary s{};
        check(cvqkd_bench_get_summary(b, &s));
        for (std::size_t f = 0; f < s.frames; ++f) {
            int ok = 0;
            size_t raw = 0, dec = 0;
            check(cvqkd_bench_frame(b, f, &ok, &raw, &dec));
            os << s.d << ',' << fmt(snr) << ',' << f << ',' << ok << ',' << raw << ',' << dec << '\n';
        }
        char buf[320];
        std::snprintf(buf, sizeof buf,
                      "# summary d=%d snr=%s frames=%zu success_rate=%.6f capacity=%.6g beta_achieved=%.6g "
                      "ks_min_p=%.6g w_variance=%.6g sigma2=%.6g max_abs_corr_uw=%.3g",
                      s.d, fmt(snr).c_str(), s.frames, static_cast<double>(s.frames_ok) / s.frames, s.capacity,
                      s.beta_achieved, s.ks_min_p, s.w_variance, s.sigma2, s.max_abs_corr_uw);
        summary.push_back(buf);
    }
    for (const auto& l : summary) {
        os << l << '\n';
        if (!a.out.empty() && a.out != "-") std::cout << l.substr(2) << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cvqkd: non-Gaussian CV-QKD numerical laboratory"};
    app.require_subcommand(1);
    std::uint64_t global_seed = 1;
    app.set_version_flag("--version", std::string(cvqkd_version()));

    KeyrateArgs kr;
    auto* k = app.add_subcommand("keyrate", "Key-rate, equivalent-noise and correlation sweeps");
    k->add_option("--sweep", kr.sweep, "var:start:stop:steps[:lin|log], var in distance_km|va|xi|alpha; default "
                  "distance_km:0:150:31 (keyrate, unless --T or --distance is given) or va:0.05:5:100");
    k->add_option("--table", kr.table, "keyrate | noise | correlation")->capture_default_str();
    k->add_option("--d", kr.dims, "Comma-separated dimensions from 1,2,4,8,inf")->capture_default_str();
    k->add_option("--xi", kr.xis, "Comma-separated excess noise values")->capture_default_str();
    k->add_option("--eta", kr.eta, "Detector efficiency")->capture_default_str();
    k->add_option("--beta", kr.beta, "Reconciliation efficiency")->capture_default_str();
    k->add_option("--va", kr.va, "Modulation variance when not swept")->capture_default_str();
    auto* opt_T = k->add_option("--T", kr.T, "Transmittance when distance is not given")->capture_default_str();
    auto* opt_dist = k->add_option("--distance", kr.distance, "Fixed distance in km");
    k->add_option("--loss", kr.loss, "Fibre loss in dB/km")->capture_default_str();
    k->add_option("--detection", kr.detection, "auto | homodyne | heterodyne")->capture_default_str();
    k->add_flag("--trusted", kr.trusted, "Treat detector loss as trusted");
    k->add_flag("--optimize-va", kr.optimize_va, "Re-optimise V_A at every grid point");
    k->add_option("--out", kr.out, "Output CSV (default stdout)");
    k->add_option("--seed", global_seed, "Unused by deterministic sweeps; accepted for uniformity");

    SimulateArgs sa;
    auto* s = app.add_subcommand("simulate", "Run one protocol session from a config file");
    s->add_option("config", sa.config, "Config file")->required();
    s->add_option("--flow", sa.flow, "gaussian-postselected | decoy (overrides the config)");
    s->add_option("--seed", sa.seed, "RNG seed (overrides the config)");
    s->add_option("--out", sa.out, "Transcript directory")->capture_default_str();
    s->add_flag("--no-distill", sa.no_distill, "Stop after parameter estimation");

    DecoyArgs da;
    auto* d = app.add_subcommand("decoy-opt", "Optimise an approximate decoy distribution");
    d->add_option("--d", da.d, "Dimension 2, 4 or 8")->capture_default_str();
    d->add_option("--alpha", da.alpha, "Coherent amplitude")->capture_default_str();
    d->add_option("--p", da.p, "Key fraction")->capture_default_str();
    d->add_option("--radii", da.radii, "Maximum number of radii")->capture_default_str();
    d->add_option("--nmax", da.nmax, "Photon-number truncation (0 = automatic)")->capture_default_str();
    d->add_option("--out", da.out, "Design file")->capture_default_str();
    d->add_option("--seed", global_seed, "Unused (the optimiser is deterministic)");

    BenchArgs ba;
    auto* b = app.add_subcommand("reconcile-bench", "Reconciliation benchmark on the virtual BI-AWGN channel");
    b->add_option("--d", ba.dims, "Comma-separated dimensions from 1,2,4,8")->capture_default_str();
    b->add_option("--snr", ba.snr, "BI-AWGN signal-to-noise ratio, or inf")->capture_default_str();
    b->add_option("--code", ba.code, "rep:R, a parity-check file, or rep:R+file")->capture_default_str();
    b->add_option("--frames", ba.frames, "Frames per dimension")->capture_default_str();
    b->add_option("--seed", ba.seed, "RNG seed")->capture_default_str();
    b->add_option("--out", ba.out, "Output CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (*k) return cmd_keyrate(kr, opt_T->count() > 0 || opt_dist->count() > 0);
        if (*s) return cmd_simulate(sa);
        if (*d) return cmd_decoy_opt(da);
        if (*b) return cmd_reconcile_bench(ba);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const RuntimeError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
