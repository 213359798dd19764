#pragma once

// Covariance-matrix security analysis in shot-noise units.

#include <array>
#include <utility>

#include "cvqkd/channel.hpp"

namespace cvqkd::security {

// Dimension value standing for the Gaussian modulation (d = infinity).
inline constexpr int kGaussian = 0;

// [[a I, c Z], [c Z, b I]].
struct Cov2 {
    double a = 1.0;
    double b = 1.0;
    double c = 0.0;
};

double z_epr(double va);
// lambda_k of the four-state mixture, alpha > 0.
std::array<double, 4> lambda_coeffs(double alpha);
double z1(double va);
double z8(double va);
// Photon-number cutoff whose neglected Poisson mass (mean d/2 alpha^2) is <= tol.
int poisson_cutoff(double mean, double tol = 1e-12);
// Generic path for d in {2, 4, 8}; throws Truncation when n_max is too small.
double zd_numeric(int d, double va, int n_max);
// Z_d for d in {1, 2, 4, 8, kGaussian}.
double z_d(int d, double va);

Cov2 gamma_key0(int d, double va);
Cov2 gamma_after_channel(const Cov2& g0, double t_eff, double xi);

std::pair<double, double> symplectic_eigenvalues(const Cov2& g);
bool is_physical(const Cov2& g, double tol = 1e-9);

struct EquivalentNoise {
    double F = 1.0;
    double delta_xi = 0.0;
};
EquivalentNoise equivalent_excess_noise(int d, double va);

// (x+1) log2(x+1) - x log2 x.
double g_entropy(double x);
// Entropy of a mode with symplectic eigenvalue nu.
double g_nu(double nu);

// Eve holds the purification of gamma; Bob's measurement is on mode B.
double holevo_bound(const Cov2& g, channel::Detection detection);

// Gaussian-modulation bound for a channel (T, xi) followed by a trusted
// detector of efficiency eta without electronic noise.
double holevo_trusted(double va, double T, double xi, double eta, channel::Detection detection);

double mutual_information(const channel::ChannelParams& params, double va);

struct KeyRateReport {
    int d = 1;
    double va = 0.0;
    double T = 1.0;
    double xi = 0.0;
    double eta = 1.0;
    bool eta_trusted = false;
    channel::Detection detection = channel::Detection::Homodyne;
    double beta = 1.0;
    double snr = 0.0;
    double I_AB = 0.0;
    double chi_BE = 0.0;
    double K = 0.0;
    double F = 1.0;
    double delta_xi = 0.0;
};

KeyRateReport secret_key_rate(int d, double va, const channel::ChannelParams& params, double beta);

// Golden-section maximisation of K over [va_lo, va_hi] to tolerance tol.
double optimize_va(int d, const channel::ChannelParams& params, double beta, double va_lo = 0.01,
                   double va_hi = 5.0, double tol = 1e-3);

}  // namespace cvqkd::security
