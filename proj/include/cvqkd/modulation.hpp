#pragma once

// Alice's classical modulation data. Blocks hold coherent amplitudes
// (Re beta, Im beta, ...) of d/2 modes, or one amplitude component for d = 1;
// the matching quadrature value is twice the amplitude.

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cvqkd/rng.hpp"

namespace cvqkd::modulation {

enum class Kind { Key, Gaussian, DecoyBand, DecoyApprox };

struct ModulationScheme {
    int d = 8;
    double alpha = 0.5;
    Kind kind = Kind::Key;

    double va() const noexcept { return 2.0 * alpha * alpha; }
    // Radius of a key block in amplitude units.
    double key_radius() const noexcept;
    void validate() const;
};

struct RadiusBand {
    double gamma_min = 0.95;
    double gamma_max = 1.05;
    void validate() const;
};

// n blocks of dimension d stored contiguously.
struct Blocks {
    int d = 1;
    std::vector<double> data;

    Blocks() = default;
    Blocks(int dim, std::size_t n) : d(dim), data(n * static_cast<std::size_t>(dim), 0.0) {}

    std::size_t count() const noexcept { return d > 0 ? data.size() / static_cast<std::size_t>(d) : 0; }
    std::span<const double> block(std::size_t i) const {
        return {data.data() + i * static_cast<std::size_t>(d), static_cast<std::size_t>(d)};
    }
    std::span<double> block(std::size_t i) {
        return {data.data() + i * static_cast<std::size_t>(d), static_cast<std::size_t>(d)};
    }
};

// Uniform points on the sphere of radius alpha*sqrt(d/2). For d = 1 each
// coordinate is +-alpha/sqrt(2), so two consecutive blocks form one of the
// four QPSK amplitudes (+-alpha +- i alpha)/sqrt(2).
Blocks sample_key_blocks(const ModulationScheme& scheme, std::size_t n_blocks, Rng& rng);

// Uniform points on a sphere of the given amplitude radius.
Blocks sample_sphere_blocks(int d, double radius, std::size_t n_blocks, Rng& rng);

// Independent N(0, alpha^2/2) amplitude coordinates, i.e. quadrature
// variance V_A = 2 alpha^2.
Blocks sample_gaussian_blocks(const ModulationScheme& scheme, std::size_t n_blocks, Rng& rng);

// Density of the radius of a Gaussian block divided by its rms radius.
double chi_pdf(double r, int d);

// Integral of chi_pdf over the band (adaptive Gauss-Kronrod, abs tol 1e-10).
double band_acceptance_probability(const RadiusBand& band, int d);

// Radius factor |x| / (alpha sqrt(d/2)).
double radius_factor(std::span<const double> block, double alpha);

enum class BandLabel { KeyUsable, Decoy };

std::vector<BandLabel> label_by_band(const Blocks& blocks, const RadiusBand& band, double alpha);

// Consecutive coordinate pairs of the flattened blocks become amplitudes.
std::vector<std::complex<double>> blocks_to_amplitudes(const Blocks& blocks);
Blocks amplitudes_to_blocks(std::span<const std::complex<double>> amplitudes, int d);

// Quadrature values (x = a + a^dagger convention), flattened.
std::vector<double> to_quadratures(const Blocks& blocks);

// block_index,coord_0..coord_{d-1},label. `labels` may be empty.
void write_blocks_csv(std::ostream& os, const Blocks& blocks, std::span<const std::string> labels);

}  // namespace cvqkd::modulation
