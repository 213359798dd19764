#include "cvqkd/security.hpp"

#include <boost/math/special_functions/binomial.hpp>
#include <algorithm>
#include <cmath>
#include <string>

#include "cvqkd/error.hpp"

namespace cvqkd::security {

using channel::Detection;

double z_epr(double va) {
    require(va >= 0.0, ErrorKind::InvalidArgument, "z_epr: V_A must be non-negative");
    return std::sqrt(va * va + 2.0 * va);
}

std::array<double, 4> lambda_coeffs(double alpha) {
    require(alpha > 0.0, ErrorKind::InvalidArgument, "lambda_coeffs: alpha must be positive");
    // lambda_k = e^{-x} sum_j x^{4j+k}/(4j+k)!; the closed forms in cosh/cos
    // cancel catastrophically for small x.
    const double x = alpha * alpha;
    std::array<double, 4> lam{};
    double term = std::exp(-x);  // e^{-x} x^n / n!
    for (int n = 0; n < 100000; ++n) {
        lam[static_cast<std::size_t>(n % 4)] += term;
        if (n > x && term < 1e-300) break;
        term *= x / (n + 1);
    }
    return lam;
}

double z1(double va) {
    require(va > 0.0, ErrorKind::InvalidArgument, "z1: V_A must be positive");
    const double alpha = std::sqrt(va / 2.0);
    const auto lam = lambda_coeffs(alpha);
    double s = 0.0;
    for (int k = 0; k < 4; ++k) {
        const double prev = lam[static_cast<std::size_t>((k + 3) % 4)];
        const double cur = lam[static_cast<std::size_t>(k)];
        if (cur > 0.0) s += std::pow(prev, 1.5) / std::sqrt(cur);
    }
    return 2.0 * alpha * alpha * s;
}

double z8(double va) {
    require(va > 0.0, ErrorKind::InvalidArgument, "z8: V_A must be positive");
    const double alpha = std::sqrt(va / 2.0);
    const double l2a = std::log(2.0 * alpha);
    const double x4 = 4.0 * alpha * alpha;
    double sum = 0.0;
    for (int k = 0;; ++k) {
        const double term = 0.5 * std::sqrt(k + 4.0) * std::exp(-x4 + (2 * k + 1) * l2a - std::lgamma(k + 1.0));
        sum += term;
        const double ratio = x4 / (k + 1.0) * std::sqrt((k + 5.0) / (k + 4.0));
        if (ratio < 1.0 && term * ratio / (1.0 - ratio) <= 1e-14 * sum) break;
        require(k < 100000, ErrorKind::Truncation, "z8: series did not converge");
    }
    return sum;
}

int poisson_cutoff(double mean, double tol) {
    // Smallest N with P(K > N) <= tol, using the geometric bound on the tail
    // once the term ratio mean/(k+1) drops below 1.
    double term = std::exp(-mean);
    for (int k = 0; k < 100000; ++k) {
        const double ratio = mean / (k + 1.0);
        const double next = term * ratio;
        if (ratio < 1.0 && next / (1.0 - ratio) <= tol) return k;
        term = next;
    }
    fail(ErrorKind::Truncation, "poisson_cutoff: mean too large");
}

namespace {

double log_binom(double n, double k) { return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0); }

// <psi_{k-1}|a_1 b_1|psi_k> for m modes: sum over occupation tuples of the
// first-mode occupation, normalised by the sizes of both degree shells.
double shell_matrix_element(int m, int k) {
    if (k == 0) return 0.0;
    double acc = 0.0;
    if (m == 1) {
        acc = k;
    } else {
        for (int n1 = 1; n1 <= k; ++n1) acc += n1 * boost::math::binomial_coefficient<double>(k - n1 + m - 2, m - 2);
    }
    const double log_norm = 0.5 * (log_binom(k + m - 1, m - 1) + log_binom(k + m - 2, m - 1));
    return acc * std::exp(-log_norm);
}

}  // namespace

double zd_numeric(int d, double va, int n_max) {
    require(d == 2 || d == 4 || d == 8, ErrorKind::Dimension, "zd_numeric: d must be 2, 4 or 8");
    require(va > 0.0, ErrorKind::InvalidArgument, "zd_numeric: V_A must be positive");
    const int m = d / 2;
    const double mean = m * va / 2.0;
    const int need = poisson_cutoff(mean);
    require(n_max >= need, ErrorKind::Truncation,
            "zd_numeric: n_max = " + std::to_string(n_max) + " leaves Poisson tail above 1e-12; need " +
                std::to_string(need));
    auto logf = [mean](int k) { return -mean + k * std::log(mean) - std::lgamma(k + 1.0); };
    double z = 0.0;
    for (int k = 1; k <= n_max; ++k) z += std::exp(0.5 * (logf(k) + logf(k - 1))) * shell_matrix_element(m, k);
    return 2.0 * z;
}

double z_d(int d, double va) {
    switch (d) {
        case kGaussian:
            return z_epr(va);
        case 1:
            return z1(va);
        case 8:
            return z8(va);
        case 2:
        case 4:
            return zd_numeric(d, va, poisson_cutoff(d / 2 * va / 2.0) + 8);
        default:
            fail(ErrorKind::Dimension, "dimension must be 1, 2, 4, 8 or Gaussian");
    }
}

Cov2 gamma_key0(int d, double va) {
    require(va >= 0.0, ErrorKind::InvalidArgument, "gamma_key0: V_A must be non-negative");
    if (va == 0.0) return {1.0, 1.0, 0.0};
    return {va + 1.0, va + 1.0, z_d(d, va)};
}

std::pair<double, double> symplectic_eigenvalues(const Cov2& g) {
    const double delta = g.a * g.a + g.b * g.b - 2.0 * g.c * g.c;
    const double det = g.a * g.b - g.c * g.c;
    const double disc = std::sqrt(std::max(0.0, delta * delta - 4.0 * det * det));
    const double n1 = std::sqrt(std::max(0.0, 0.5 * (delta + disc)));
    const double n2 = std::sqrt(std::max(0.0, 0.5 * (delta - disc)));
    return {n1, n2};
}

bool is_physical(const Cov2& g, double tol) {
    if (!(g.a >= 1.0 - tol && g.b >= 1.0 - tol)) return false;
    const auto [n1, n2] = symplectic_eigenvalues(g);
    return n1 >= 1.0 - tol && n2 >= 1.0 - tol && g.a * g.b - g.c * g.c >= -tol;
}

Cov2 gamma_after_channel(const Cov2& g0, double t_eff, double xi) {
    require(t_eff > 0.0 && t_eff <= 1.0, ErrorKind::InvalidArgument, "transmittance must lie in (0, 1]");
    Cov2 g{g0.a, 1.0 + t_eff * (g0.b - 1.0) + t_eff * xi, std::sqrt(t_eff) * g0.c};
    require(is_physical(g), ErrorKind::Unphysical, "covariance matrix after the channel is not physical");
    return g;
}

EquivalentNoise equivalent_excess_noise(int d, double va) {
    require(va > 0.0, ErrorKind::InvalidArgument, "equivalent_excess_noise: V_A must be positive");
    const double r = z_epr(va) / z_d(d, va);
    EquivalentNoise e;
    e.F = r * r;
    e.delta_xi = (e.F - 1.0) * va;
    return e;
}

double g_entropy(double x) {
    if (x <= 0.0) return 0.0;
    return (x + 1.0) * std::log2(x + 1.0) - x * std::log2(x);
}

double g_nu(double nu) { return g_entropy((nu - 1.0) / 2.0); }

double holevo_bound(const Cov2& g, Detection detection) {
    require(is_physical(g), ErrorKind::Unphysical, "holevo_bound: covariance matrix is not physical");
    const auto [n1, n2] = symplectic_eigenvalues(g);
    double n3;
    if (detection == Detection::Homodyne)
        n3 = std::sqrt(std::max(0.0, g.a * (g.a - g.c * g.c / g.b)));
    else
        n3 = g.a - g.c * g.c / (g.b + 1.0);
    return g_nu(n1) + g_nu(n2) - g_nu(n3);
}

double holevo_trusted(double va, double T, double xi, double eta, Detection detection) {
    require(va >= 0.0 && T > 0.0 && eta > 0.0 && eta <= 1.0, ErrorKind::InvalidArgument,
            "holevo_trusted: invalid parameters");
    const double V = va + 1.0;
    const double chi_line = 1.0 / T - 1.0 + xi;
    const double chi_det = detection == Detection::Homodyne ? (1.0 - eta) / eta : (2.0 - eta) / eta;
    const double chi_tot = chi_line + chi_det / T;
    const double A = V * V * (1.0 - 2.0 * T) + 2.0 * T + T * T * (V + chi_line) * (V + chi_line);
    const double B = T * T * (V * chi_line + 1.0) * (V * chi_line + 1.0);
    const double sB = std::sqrt(B);
    const double disc1 = std::sqrt(std::max(0.0, A * A - 4.0 * B));
    const double l1 = std::sqrt(std::max(0.0, 0.5 * (A + disc1)));
    const double l2 = std::sqrt(std::max(0.0, 0.5 * (A - disc1)));
    double C, D;
    const double den = T * (V + chi_tot);
    if (detection == Detection::Homodyne) {
        C = (V * sB + T * (V + chi_line) + A * chi_det) / den;
        D = sB * (V + sB * chi_det) / den;
    } else {
        C = (A * chi_det * chi_det + B + 1.0 + 2.0 * chi_det * (V * sB + T * (V + chi_line)) +
             2.0 * T * (V * V - 1.0)) /
            (den * den);
        D = ((V + sB * chi_det) / den) * ((V + sB * chi_det) / den);
    }
    const double disc2 = std::sqrt(std::max(0.0, C * C - 4.0 * D));
    const double l3 = std::sqrt(std::max(0.0, 0.5 * (C + disc2)));
    const double l4 = std::sqrt(std::max(0.0, 0.5 * (C - disc2)));
    return g_nu(l1) + g_nu(l2) - g_nu(l3) - g_nu(l4);
}

double mutual_information(const channel::ChannelParams& params, double va) {
    const double s = channel::snr(params, va);
    return params.detection == Detection::Homodyne ? 0.5 * std::log2(1.0 + s) : std::log2(1.0 + s);
}

KeyRateReport secret_key_rate(int d, double va, const channel::ChannelParams& params, double beta) {
    params.validate();
    require(d == kGaussian || d == 1 || d == 2 || d == 4 || d == 8, ErrorKind::Dimension,
            "dimension must be 1, 2, 4, 8 or Gaussian");
    require(!(d >= 2 && params.detection == Detection::Homodyne), ErrorKind::InvalidArgument,
            "d = 2, 4, 8 protocols use heterodyne detection");
    require(va > 0.0, ErrorKind::InvalidArgument, "V_A must be positive");
    require(beta >= 0.0, ErrorKind::InvalidArgument, "beta must be non-negative");
    KeyRateReport r;
    r.d = d;
    r.va = va;
    r.T = params.T;
    r.xi = params.xi;
    r.eta = params.eta;
    r.eta_trusted = params.eta_trusted;
    r.detection = params.detection;
    r.beta = beta;
    const auto eq = equivalent_excess_noise(d, va);
    r.F = eq.F;
    r.delta_xi = eq.delta_xi;
    r.snr = channel::snr(params, va);
    r.I_AB = mutual_information(params, va);
    if (params.eta_trusted) {
        r.chi_BE = holevo_trusted(va, params.T / eq.F, eq.F * params.xi + eq.delta_xi, params.eta, params.detection);
    } else {
        r.chi_BE = holevo_bound(gamma_after_channel(gamma_key0(d, va), params.t_eff(), params.xi), params.detection);
    }
    r.K = beta * r.I_AB - r.chi_BE;
    return r;
}

double optimize_va(int d, const channel::ChannelParams& params, double beta, double va_lo, double va_hi, double tol) {
    require(va_lo > 0.0 && va_hi > va_lo && va_hi <= 5.0, ErrorKind::InvalidArgument,
            "optimize_va: range must be a non-empty subset of (0, 5]");
    auto K = [&](double v) { return secret_key_rate(d, v, params, beta).K; };
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = va_lo, b = va_hi;
    double c = b - invphi * (b - a), e = a + invphi * (b - a);
    double fc = K(c), fe = K(e);
    while (b - a > tol) {
        if (fc >= fe) {
            b = e;
            e = c;
            fe = fc;
            c = b - invphi * (b - a);
            fc = K(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + invphi * (b - a);
            fe = K(e);
        }
    }
    const double mid = 0.5 * (a + b);
    // The maximum may sit on the boundary of the search interval.
    double best = mid, fbest = K(mid);
    for (double v : {va_lo, va_hi}) {
        const double f = K(v);
        if (f > fbest) {
            best = v;
            fbest = f;
        }
    }
    return best;
}

}  // namespace cvqkd::security
