#pragma once

// Dense tableau simplex for min c^T x subject to A x = b, x >= 0, started
// from a caller-supplied feasible basis (b >= 0 and basis columns forming an
// identity). Used for the small l1 fits of the decoy optimiser.

#include <cstddef>
#include <vector>

namespace cvqkd::lp {

struct Problem {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> A;  // rows x cols, row-major
    std::vector<double> b;
    std::vector<double> c;
    std::vector<std::size_t> basis;  // one column per row
};

struct Solution {
    std::vector<double> x;
    double objective = 0.0;
    bool optimal = false;
    int iterations = 0;
};

Solution solve(const Problem& problem, int max_iterations = 100000);

}  // namespace cvqkd::lp
