#include "cvqkd/decoy.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "cvqkd/error.hpp"
#include "cvqkd/simplex.hpp"

namespace cvqkd::decoy {

namespace {

void check_d(int d) {
    require(d == 2 || d == 4 || d == 8, ErrorKind::Dimension, "photon-number laws need d in {2, 4, 8}");
}

double log_f(double mean, int k) {
    if (mean == 0.0) return k == 0 ? 0.0 : -INFINITY;
    return -mean + k * std::log(mean) - std::lgamma(k + 1.0);
}

double log_g(double m, double a2, int k) {
    return std::lgamma(m + k) - std::lgamma(m) - std::lgamma(k + 1.0) + k * std::log(a2) - (m + k) * std::log1p(a2);
}

double poisson_tail(double mean, int n_max) {
    if (mean == 0.0) return 0.0;
    return boost::math::gamma_p(n_max + 1.0, mean);
}

double nb_tail(double m, double a2, int n_max) { return boost::math::ibeta(n_max + 1.0, m, a2 / (1.0 + a2)); }

PhotonNumberDistribution poisson(double mean, int n_max) {
    PhotonNumberDistribution pd;
    pd.weights.resize(static_cast<std::size_t>(n_max) + 1);
    for (int k = 0; k <= n_max; ++k) pd.weights[static_cast<std::size_t>(k)] = std::exp(log_f(mean, k));
    pd.tail = poisson_tail(mean, n_max);
    return pd;
}

}  // namespace

double PhotonNumberDistribution::mean() const {
    double s = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) s += static_cast<double>(k) * weights[k];
    return s;
}

PhotonNumberDistribution f_dist(int d, double alpha, int n_max) {
    check_d(d);
    require(alpha >= 0.0 && n_max >= 0, ErrorKind::InvalidArgument, "f_dist: invalid arguments");
    return poisson(0.5 * d * alpha * alpha, n_max);
}

PhotonNumberDistribution g_dist(int d, double alpha, int n_max) {
    check_d(d);
    require(alpha > 0.0 && n_max >= 0, ErrorKind::InvalidArgument, "g_dist: invalid arguments");
    const double m = 0.5 * d, a2 = alpha * alpha;
    PhotonNumberDistribution pd;
    pd.weights.resize(static_cast<std::size_t>(n_max) + 1);
    for (int k = 0; k <= n_max; ++k) pd.weights[static_cast<std::size_t>(k)] = std::exp(log_g(m, a2, k));
    pd.tail = nb_tail(m, a2, n_max);
    return pd;
}

int default_n_max(int d, double alpha, double tol) {
    check_d(d);
    const double m = 0.5 * d, a2 = alpha * alpha;
    int n = static_cast<int>(std::ceil(m * a2));
    while (nb_tail(m, a2, n) > tol) {
        ++n;
        require(n < 100000, ErrorKind::Truncation, "default_n_max: alpha too large");
    }
    return n;
}

PovmScale povm_scale(int d, double alpha, int n_max) {
    check_d(d);
    require(alpha > 0.0, ErrorKind::InvalidArgument, "povm_scale: alpha must be positive");
    if (n_max <= 0) n_max = default_n_max(d, alpha);
    const double m = 0.5 * d, a2 = alpha * alpha;
    const double fmean = m * a2;
    auto log_ratio = [&](int k) { return log_g(m, a2, k) - log_f(fmean, k); };
    PovmScale s;
    double best = log_ratio(0);
    for (int k = 1; k <= n_max; ++k) {
        const double r = log_ratio(k);
        if (r < best) {
            best = r;
            s.k_star = k;
        }
    }
    // Certificate: ratios increase from k_star on, i.e. r(k+1)/r(k) >= 1.
    require(s.k_star < n_max && (m + s.k_star) / (m * (1.0 + a2)) >= 1.0, ErrorKind::Truncation,
            "povm_scale: minimum of g/f not bracketed within n_max = " + std::to_string(n_max));
    s.pi = std::exp(best);
    s.index_formula_k = static_cast<int>(std::ceil(a2 * d));
    s.index_formula_value = std::exp(log_ratio(s.index_formula_k));
    return s;
}

double p_succ(int d, double alpha) {
    require(alpha > 0.0, ErrorKind::InvalidArgument, "p_succ: alpha must be positive");
    if (d == 1) {
        const double x = 1.0 + alpha * alpha;
        return std::tgamma(std::floor(x) + 1.0) / std::pow(x, std::floor(2.0 + alpha * alpha));
    }
    return povm_scale(d, alpha).pi;
}

PhotonNumberDistribution mixture_photon_dist(const std::vector<double>& radii, const std::vector<double>& weights,
                                             int n_max) {
    require(radii.size() == weights.size(), ErrorKind::Dimension, "mixture: radii and weights differ in length");
    PhotonNumberDistribution out;
    out.weights.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
    for (std::size_t j = 0; j < radii.size(); ++j) {
        require(weights[j] >= 0.0 && radii[j] >= 0.0, ErrorKind::InvalidArgument, "mixture: negative radius or weight");
        if (weights[j] == 0.0) continue;
        const auto p = poisson(radii[j] * radii[j], n_max);
        for (std::size_t k = 0; k < p.weights.size(); ++k) out.weights[k] += weights[j] * p.weights[k];
        out.tail += weights[j] * p.tail;
    }
    return out;
}

double trace_distance(const PhotonNumberDistribution& a, const PhotonNumberDistribution& b) {
    require(a.weights.size() == b.weights.size(), ErrorKind::Dimension, "trace_distance: truncations differ");
    double s = 0.0;
    for (std::size_t k = 0; k < a.weights.size(); ++k) s += std::abs(a.weights[k] - b.weights[k]);
    return std::min(1.0, 0.5 * s + 0.5 * (a.tail + b.tail));
}

namespace {

struct Fit {
    std::vector<double> weights;
    double l1 = 0.0;  // sum |q - mix| over 0..n_max
};

// min sum |q(k) - sum_j w_j P_j(k)| s.t. w >= 0, sum w = 1.
Fit fit_weights(const std::vector<double>& q, const std::vector<std::vector<double>>& cols) {
    const std::size_t K = q.size(), J = cols.size();
    lp::Problem pr;
    pr.rows = K + 1;
    pr.cols = J + 2 * K + 2;
    pr.A.assign(pr.rows * pr.cols, 0.0);
    pr.b.assign(pr.rows, 0.0);
    pr.c.assign(pr.cols, 0.0);
    pr.basis.resize(pr.rows);
    auto at = [&](std::size_t i, std::size_t j) -> double& { return pr.A[i * pr.cols + j]; };
    for (std::size_t j = 0; j < J; ++j) {
        for (std::size_t k = 0; k < K; ++k) at(k, j) = cols[j][k];
        at(K, j) = 1.0;
    }
    for (std::size_t k = 0; k < K; ++k) {
        at(k, J + k) = 1.0;       // s+
        at(k, J + K + k) = -1.0;  // s-
        pr.c[J + k] = pr.c[J + K + k] = 1.0;
        pr.b[k] = q[k];
        pr.basis[k] = J + k;
    }
    // Normalisation row with heavily penalised slacks.
    at(K, J + 2 * K) = 1.0;
    at(K, J + 2 * K + 1) = -1.0;
    pr.c[J + 2 * K] = pr.c[J + 2 * K + 1] = 1e3;
    pr.b[K] = 1.0;
    pr.basis[K] = J + 2 * K;
    const auto sol = lp::solve(pr);
    require(sol.optimal, ErrorKind::Infeasible, "decoy weight fit did not converge");
    Fit f;
    f.weights.assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(J));
    const double tot = std::accumulate(f.weights.begin(), f.weights.end(), 0.0);
    if (tot > 0.0)
        for (auto& w : f.weights) w /= tot;
    for (std::size_t k = 0; k < K; ++k) {
        double mix = 0.0;
        for (std::size_t j = 0; j < J; ++j) mix += f.weights[j] * cols[j][k];
        f.l1 += std::abs(q[k] - mix);
    }
    return f;
}

std::vector<double> poisson_column(double mean, int n_max) { return poisson(mean, n_max).weights; }

}  // namespace

double design_epsilon(const DecoyDesign& design) {
    const auto g = g_dist(design.d, design.alpha, design.n_max);
    const auto f = f_dist(design.d, design.alpha, design.n_max);
    const auto mix = mixture_photon_dist(design.radii, design.weights, design.n_max);
    PhotonNumberDistribution model;
    model.weights.resize(g.weights.size());
    for (std::size_t k = 0; k < model.weights.size(); ++k)
        model.weights[k] = design.p * f.weights[k] + (1.0 - design.p) * mix.weights[k];
    model.tail = design.p * f.tail + (1.0 - design.p) * mix.tail;
    return trace_distance(g, model);
}

DecoyDesign optimize_decoy(int d, double alpha, double p, const DecoyOptions& opt) {
    check_d(d);
    require(alpha > 0.0, ErrorKind::InvalidArgument, "optimize_decoy: alpha must be positive");
    require(p >= 0.0 && p < 1.0, ErrorKind::InvalidArgument, "optimize_decoy: p must lie in [0, 1)");
    require(opt.n_radii_max >= 1 && opt.grid_points >= 2, ErrorKind::InvalidArgument,
            "optimize_decoy: need at least one radius and two grid points");
    const double m = 0.5 * d, a2 = alpha * alpha, mean = m * a2;
    const double mu_max = std::max(4.0 * mean, mean + 6.0 * std::sqrt(mean) + 2.0);
    int n_max = opt.n_max > 0 ? opt.n_max : std::max(default_n_max(d, alpha), 0);
    if (opt.n_max <= 0) {
        while (poisson_tail(mu_max, n_max) > 1e-13) ++n_max;
    }

    const auto scale = povm_scale(d, alpha, std::max(n_max, default_n_max(d, alpha)));
    if (p > scale.pi + 1e-12) {
        char buf[200];
        std::snprintf(buf, sizeof buf,
                      "decoy infeasible: p = %.6g exceeds pi_%d(%.6g) = %.9g; p*f(k) > g(k) at photon number k = %d", p,
                      d, alpha, scale.pi, scale.k_star);
        throw InfeasibleError(buf, scale.k_star);
    }

    const auto g = g_dist(d, alpha, n_max);
    const auto f = f_dist(d, alpha, n_max);
    std::vector<double> q(g.weights.size());
    for (std::size_t k = 0; k < q.size(); ++k) q[k] = std::max(0.0, (g.weights[k] - p * f.weights[k]) / (1.0 - p));

    // Candidate means on a grid dense near the vacuum.
    std::vector<double> grid(static_cast<std::size_t>(opt.grid_points));
    std::vector<std::vector<double>> cols(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double s = static_cast<double>(i) / static_cast<double>(grid.size() - 1);
        grid[i] = mu_max * s * s;
        cols[i] = poisson_column(grid[i], n_max);
    }
    Fit fit = fit_weights(q, cols);

    // Merge runs of adjacent grid points into their weighted mean.
    std::vector<double> mus, ws;
    for (std::size_t i = 0; i < grid.size();) {
        if (fit.weights[i] <= 1e-14) {
            ++i;
            continue;
        }
        double w = 0.0, wm = 0.0;
        std::size_t j = i;
        while (j < grid.size() && fit.weights[j] > 1e-14) {
            w += fit.weights[j];
            wm += fit.weights[j] * grid[j];
            ++j;
        }
        mus.push_back(wm / w);
        ws.push_back(w);
        i = j;
    }
    if (mus.size() > static_cast<std::size_t>(opt.n_radii_max)) {
        std::vector<std::size_t> idx(mus.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return ws[a] > ws[b]; });
        idx.resize(static_cast<std::size_t>(opt.n_radii_max));
        std::sort(idx.begin(), idx.end());
        std::vector<double> keep;
        for (auto i : idx) keep.push_back(mus[i]);
        mus = keep;
    }

    auto refit = [&](const std::vector<double>& m_) {
        std::vector<std::vector<double>> c(m_.size());
        for (std::size_t j = 0; j < m_.size(); ++j) c[j] = poisson_column(m_[j], n_max);
        return fit_weights(q, c);
    };
    fit = refit(mus);

    // Coordinate descent on the means.
    double step = 0.05;
    for (int sweep = 0; sweep < opt.refine_sweeps && step > 1e-7; ++sweep) {
        bool improved = false;
        for (std::size_t j = 0; j < mus.size(); ++j) {
            for (double dir : {1.0, -1.0}) {
                auto trial = mus;
                trial[j] = std::max(0.0, mus[j] + dir * step * std::max(mus[j], 0.05));
                const Fit t = refit(trial);
                if (t.l1 < fit.l1 * (1.0 - 1e-9)) {
                    mus = trial;
                    fit = t;
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) step *= 0.5;
    }

    DecoyDesign out;
    out.d = d;
    out.alpha = alpha;
    out.p = p;
    out.n_max = n_max;
    for (std::size_t j = 0; j < mus.size(); ++j) {
        if (fit.weights[j] <= 0.0) continue;
        out.radii.push_back(std::sqrt(mus[j]));
        out.weights.push_back(fit.weights[j]);
    }
    const auto mix = mixture_photon_dist(out.radii, out.weights, n_max);
    out.tail_slack = 0.5 * (g.tail + p * f.tail + (1.0 - p) * mix.tail);
    out.epsilon = design_epsilon(out);
    return out;
}

MixProbabilities mix_probabilities(double p, double p_est) {
    require(p >= 0.0 && p <= 1.0 && p_est >= 0.0 && p_est <= 1.0, ErrorKind::InvalidArgument,
            "mix_probabilities: p and p_est must lie in [0, 1]");
    return {p * (1.0 - p_est), p_est, (1.0 - p) * (1.0 - p_est)};
}

void write_design(std::ostream& os, const DecoyDesign& design) {
    char buf[96];
    os << "# cvqkd-decoy-design-v1\n";
    os << "d = " << design.d << '\n';
    std::snprintf(buf, sizeof buf, "%.17g", design.alpha);
    os << "alpha = " << buf << '\n';
    std::snprintf(buf, sizeof buf, "%.17g", design.p);
    os << "p = " << buf << '\n';
    std::snprintf(buf, sizeof buf, "%.17g", design.epsilon);
    os << "epsilon = " << buf << '\n';
    os << "n_max = " << design.n_max << '\n';
    os << "radius,weight\n";
    for (std::size_t j = 0; j < design.radii.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g", design.radii[j], design.weights[j]);
        os << buf << '\n';
    }
}

DecoyDesign read_design(std::istream& is) {
    DecoyDesign dsn;
    std::string line;
    int lineno = 0;
    bool rows = false, have_d = false, have_alpha = false, have_p = false;
    dsn.n_max = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        line = line.substr(first, line.find_last_not_of(" \t\r") - first + 1);
        auto bad = [&](const std::string& why) {
            throw ConfigError("design line " + std::to_string(lineno) + ": " + why, lineno);
        };
        if (!rows) {
            if (line == "radius,weight") {
                rows = true;
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) bad("expected 'key = value'");
            std::string key = line.substr(0, eq), val = line.substr(eq + 1);
            key.erase(key.find_last_not_of(" \t") + 1);
            std::istringstream vs(val);
            double v;
            if (!(vs >> v)) bad("value is not a number");
            if (key == "d") {
                dsn.d = static_cast<int>(v);
                have_d = true;
            } else if (key == "alpha") {
                dsn.alpha = v;
                have_alpha = true;
            } else if (key == "p") {
                dsn.p = v;
                have_p = true;
            } else if (key == "epsilon") {
                dsn.epsilon = v;
            } else if (key == "n_max") {
                dsn.n_max = static_cast<int>(v);
            } else {
                bad("unknown key '" + key + "'");
            }
            continue;
        }
        double r, w;
        char comma;
        std::istringstream rs(line);
        if (!(rs >> r >> comma >> w) || comma != ',' || r < 0.0 || w < 0.0) bad("expected 'radius,weight'");
        dsn.radii.push_back(r);
        dsn.weights.push_back(w);
    }
    if (!have_d || !have_alpha || !have_p) throw ConfigError("design: d, alpha and p are required", lineno);
    check_d(dsn.d);
    if (dsn.n_max <= 0) dsn.n_max = default_n_max(dsn.d, dsn.alpha);
    const double tot = std::accumulate(dsn.weights.begin(), dsn.weights.end(), 0.0);
    require(dsn.p == 1.0 || std::abs(tot - 1.0) < 1e-9, ErrorKind::Config, "design: weights must sum to 1");
    return dsn;
}

void write_design_file(const std::string& path, const DecoyDesign& design) {
    std::ofstream os(path);
    if (!os) fail(ErrorKind::Io, "cannot write design file '" + path + "'");
    write_design(os, design);
    if (!os) fail(ErrorKind::Io, "error writing design file '" + path + "'");
}

DecoyDesign read_design_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) fail(ErrorKind::Io, "cannot open design file '" + path + "'");
    return read_design(is);
}

}  // namespace cvqkd::decoy
