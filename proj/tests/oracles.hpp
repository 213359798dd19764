#pragma once

// Reference computations used only by the tests. They are deliberately
// written from first principles (dense matrices, explicit enumeration) and
// share no code with the library.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <vector>

namespace oracle {

using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

// Annihilation operator on Fock states 0..n-1.
inline Mat annihilation(int n) {
    Mat a = Mat::Zero(n, n);
    for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    return a;
}

inline CVec coherent(std::complex<double> beta, int n) {
    CVec v(n);
    std::complex<double> c = std::exp(-0.5 * std::norm(beta));
    for (int k = 0; k < n; ++k) {
        v(k) = c;
        c *= beta / std::sqrt(static_cast<double>(k + 1));
    }
    return v;
}

// Equal mixture of coherent states of amplitude alpha at `phases` equally
// spaced phases (phases = 4: the four-state constellation).
inline Mat phase_mixture(double alpha, int phases, int n) {
    CMat rho = CMat::Zero(n, n);
    for (int j = 0; j < phases; ++j) {
        const auto v = coherent(std::polar(alpha, 2.0 * M_PI * j / phases), n);
        rho += v * v.adjoint() / static_cast<double>(phases);
    }
    return rho.real();
}

struct Schmidt {
    std::vector<double> lambda;
    std::vector<Eigen::VectorXd> phi;
};

// Largest `rank` eigenpairs of a real symmetric density matrix.
inline Schmidt top_eigen(const Mat& rho, int rank) {
    Eigen::SelfAdjointEigenSolver<Mat> es(rho);
    Schmidt s;
    const int n = static_cast<int>(rho.rows());
    for (int i = n - 1; i >= n - rank; --i) {
        s.lambda.push_back(std::max(0.0, es.eigenvalues()(i)));
        s.phi.push_back(es.eigenvectors().col(i));
    }
    return s;
}

// <Psi| a b + a^dag b^dag |Psi> for |Psi> = sum_j sqrt(l_j) |phi_j>|phi_j>,
// evaluated as a dense two-mode amplitude matrix.
inline double purification_correlation(const Schmidt& s, int n) {
    Mat M = Mat::Zero(n, n);
    for (std::size_t j = 0; j < s.lambda.size(); ++j) M += std::sqrt(s.lambda[j]) * s.phi[j] * s.phi[j].transpose();
    const Mat a = annihilation(n);
    const double ab = (M.cwiseProduct(a * M * a.transpose())).sum();
    return 2.0 * ab;
}

// Four-state (d = 1) correlation at V_A = 2 alpha^2.
inline double z1_fock(double va, int n = 40) {
    const double alpha = std::sqrt(va / 2.0);
    return purification_correlation(top_eigen(phase_mixture(alpha, 4, n), 4), n);
}

// Phase-randomised coherent state (d = 2); 64 phases reproduce the full
// average exactly below photon number 64.
inline double z2_fock(double va, int n = 40) {
    const double alpha = std::sqrt(va / 2.0);
    return purification_correlation(top_eigen(phase_mixture(alpha, 64, n), n), n);
}

// Eigenvalues of the four-state mixture, indexed by the residue class of
// the eigenvector's support.
inline std::array<double, 4> four_state_lambdas(double alpha, int n = 40) {
    const auto s = top_eigen(phase_mixture(alpha, 4, n), 4);
    std::array<double, 4> out{};
    for (std::size_t j = 0; j < 4; ++j) {
        Eigen::Index arg = 0;
        s.phi[j].cwiseAbs().maxCoeff(&arg);
        out[static_cast<std::size_t>(arg % 4)] = s.lambda[j];
    }
    return out;
}

// Four-mode state uniform on the sphere of total amplitude 2 alpha: weight
// lambda_k spread evenly over the photon-number shell k. The purification
// correlation on mode 1 is summed over explicit occupation tuples.
inline double z8_enumerated(double va, int k_max = 80) {
    const double alpha = std::sqrt(va / 2.0);
    const double mean = 4.0 * alpha * alpha;
    auto shell = [](int k) { return (k + 1.0) * (k + 2.0) * (k + 3.0) / 6.0; };
    auto weight = [&](int k) {  // per-tuple probability
        if (k < 0) return 0.0;
        return std::exp(-mean + k * std::log(mean) - std::lgamma(k + 1.0)) / shell(k);
    };
    double z = 0.0;
    for (int k = 1; k <= k_max; ++k) {
        const double w = std::sqrt(weight(k) * weight(k - 1));
        double s = 0.0;
        for (int n1 = 1; n1 <= k; ++n1)
            for (int n2 = 0; n2 <= k - n1; ++n2)
                for (int n3 = 0; n3 <= k - n1 - n2; ++n3) s += n1;  // n4 fixed by k
        z += w * s;
    }
    return 2.0 * z;
}

// Trace distance between the phase-randomised coherent state of amplitude
// alpha and the thermal state of the same mean, truncated to 0..n-1.
inline double trace_distance_d2(double alpha, int n) {
    const Mat key = phase_mixture(alpha, 64, n);
    const double nbar = alpha * alpha, q = nbar / (1.0 + nbar);
    Mat th = Mat::Zero(n, n);
    for (int k = 0; k < n; ++k) th(k, k) = std::pow(q, k) / (1.0 + nbar);
    Eigen::SelfAdjointEigenSolver<Mat> es(key - th);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

// Cayley-Dickson product (a, b)(c, d) = (ac - d* b, da + b c*), written on
// plain vectors of length 2^k.
inline std::vector<double> cd_conj(const std::vector<double>& x) {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = i == 0 ? x[i] : -x[i];
    return y;
}

inline std::vector<double> cd_mul(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n == 1) return {x[0] * y[0]};
    const std::size_t h = n / 2;
    const std::vector<double> a(x.begin(), x.begin() + h), b(x.begin() + h, x.end());
    const std::vector<double> c(y.begin(), y.begin() + h), d(y.begin() + h, y.end());
    const auto ac = cd_mul(a, c), db = cd_mul(cd_conj(d), b);
    const auto da = cd_mul(d, a), bc = cd_mul(b, cd_conj(c));
    std::vector<double> out(n);
    for (std::size_t i = 0; i < h; ++i) {
        out[i] = ac[i] - db[i];
        out[h + i] = da[i] + bc[i];
    }
    return out;
}

// Hamilton's table on basis indices 0 = 1, 1 = i, 2 = j, 3 = k: returns
// (sign, index) of e_p e_q.
inline std::pair<int, int> hamilton(int p, int q) {
    static const int idx[4][4] = {{0, 1, 2, 3}, {1, 0, 3, 2}, {2, 3, 0, 1}, {3, 2, 1, 0}};
    static const int sgn[4][4] = {{1, 1, 1, 1}, {1, -1, 1, -1}, {1, -1, -1, 1}, {1, 1, -1, -1}};
    return {sgn[p][q], idx[p][q]};
}

}  // namespace oracle
