#pragma once

// Photon-number laws of the sphere and Gaussian modulations, POVM success
// probabilities, and approximate decoy distributions.

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace cvqkd::decoy {

// Weights over total photon number 0..n_max; `tail` is the exact mass above
// n_max.
struct PhotonNumberDistribution {
    std::vector<double> weights;
    double tail = 0.0;
    int n_max() const noexcept { return static_cast<int>(weights.size()) - 1; }
    double mean() const;
};

// Poisson law of mean (d/2) alpha^2: the uniform-sphere modulation.
PhotonNumberDistribution f_dist(int d, double alpha, int n_max);
// Negative binomial law with m = d/2 and success probability
// alpha^2/(1+alpha^2): the Gaussian modulation.
PhotonNumberDistribution g_dist(int d, double alpha, int n_max);

// Smallest n_max whose negative-binomial tail is <= tol.
int default_n_max(int d, double alpha, double tol = 1e-13);

struct PovmScale {
    double pi = 1.0;
    int k_star = 0;
    // g/f at the index ceil(alpha^2 d), kept for comparison.
    int index_formula_k = 0;
    double index_formula_value = 1.0;
};

// Certified min_k g(k)/f(k). The ratio of consecutive ratios is
// (m+k)/(m(1+alpha^2)), increasing in k, so the first k where it reaches 1 is
// the global argmin; throws Truncation if that k exceeds n_max.
PovmScale povm_scale(int d, double alpha, int n_max = 0);

// d = 1 closed form, d in {2, 4, 8} via povm_scale.
double p_succ(int d, double alpha);

struct DecoyDesign {
    int d = 2;
    double alpha = 0.5;
    double p = 0.5;
    double epsilon = 0.0;
    double tail_slack = 0.0;
    int n_max = 0;
    std::vector<double> radii;  // amplitude units, total photon mean radius^2
    std::vector<double> weights;
};

PhotonNumberDistribution mixture_photon_dist(const std::vector<double>& radii, const std::vector<double>& weights,
                                             int n_max);

// Half l1 distance plus half of both tail masses.
double trace_distance(const PhotonNumberDistribution& a, const PhotonNumberDistribution& b);

// Certified distance between g and p f + (1-p) mixture(design).
double design_epsilon(const DecoyDesign& design);

struct DecoyOptions {
    int n_radii_max = 12;
    int n_max = 0;  // 0: default_n_max
    int grid_points = 240;
    int refine_sweeps = 40;
};

DecoyDesign optimize_decoy(int d, double alpha, double p, const DecoyOptions& options = {});

struct MixProbabilities {
    double key = 0.0;
    double gaussian = 0.0;
    double decoy = 0.0;
};
MixProbabilities mix_probabilities(double p, double p_est);

void write_design(std::ostream& os, const DecoyDesign& design);
DecoyDesign read_design(std::istream& is);
void write_design_file(const std::string& path, const DecoyDesign& design);
DecoyDesign read_design_file(const std::string& path);

}  // namespace cvqkd::decoy
