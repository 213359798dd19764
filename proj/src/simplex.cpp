#include "cvqkd/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cvqkd/error.hpp"

namespace cvqkd::lp {

Solution solve(const Problem& pr, int max_iterations) {
    const std::size_t m = pr.rows, n = pr.cols;
    require(pr.A.size() == m * n && pr.b.size() == m && pr.c.size() == n && pr.basis.size() == m,
            ErrorKind::InvalidArgument, "simplex: inconsistent problem dimensions");
    constexpr double eps = 1e-12;
    std::vector<double> T(pr.A);
    std::vector<double> rhs(pr.b);
    std::vector<std::size_t> basis(pr.basis);
    for (std::size_t i = 0; i < m; ++i) {
        require(rhs[i] >= -eps, ErrorKind::InvalidArgument, "simplex: start basis is not feasible");
        require(std::abs(T[i * n + basis[i]] - 1.0) < 1e-12, ErrorKind::InvalidArgument,
                "simplex: start basis is not an identity");
    }
    // Reduced costs r_j = c_j - c_B^T A_j.
    std::vector<double> red(pr.c);
    for (std::size_t i = 0; i < m; ++i) {
        const double cb = pr.c[basis[i]];
        if (cb == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) red[j] -= cb * T[i * n + j];
    }
    Solution sol;
    bool bland = false;
    int degenerate = 0;
    for (; sol.iterations < max_iterations; ++sol.iterations) {
        std::size_t enter = n;
        double best = -1e-11;
        for (std::size_t j = 0; j < n; ++j) {
            if (red[j] < best) {
                enter = j;
                if (bland) break;
                best = red[j];
            }
        }
        if (enter == n) {
            sol.optimal = true;
            break;
        }
        std::size_t leave = m;
        double ratio = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m; ++i) {
            const double a = T[i * n + enter];
            if (a > 1e-12) {
                const double r = rhs[i] / a;
                if (r < ratio - 1e-15 || (bland && leave != m && std::abs(r - ratio) <= 1e-15 && basis[i] < basis[leave])) {
                    ratio = r;
                    leave = i;
                }
            }
        }
        require(leave != m, ErrorKind::Infeasible, "simplex: problem is unbounded");
        if (ratio < 1e-15) {
            if (++degenerate > 200) bland = true;
        } else {
            degenerate = 0;
        }
        const double piv = T[leave * n + enter];
        for (std::size_t j = 0; j < n; ++j) T[leave * n + j] /= piv;
        rhs[leave] /= piv;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == leave) continue;
            const double f = T[i * n + enter];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) T[i * n + j] -= f * T[leave * n + j];
            rhs[i] -= f * rhs[leave];
            if (rhs[i] < 0.0 && rhs[i] > -1e-13) rhs[i] = 0.0;
        }
        const double fr = red[enter];
        for (std::size_t j = 0; j < n; ++j) red[j] -= fr * T[leave * n + j];
        basis[leave] = enter;
    }
    sol.x.assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i) sol.x[basis[i]] = std::max(0.0, rhs[i]);
    for (std::size_t j = 0; j < n; ++j) sol.objective += pr.c[j] * sol.x[j];
    return sol;
}

}  // namespace cvqkd::lp
