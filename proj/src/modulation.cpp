#include "cvqkd/modulation.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "cvqkd/algebra.hpp"
#include "cvqkd/error.hpp"

namespace cvqkd::modulation {

double ModulationScheme::key_radius() const noexcept { return alpha * std::sqrt(0.5 * d); }

void ModulationScheme::validate() const {
    require(algebra::is_division_dimension(d), ErrorKind::Dimension, "modulation dimension must be 1, 2, 4 or 8");
    require(alpha > 0.0 && std::isfinite(alpha), ErrorKind::InvalidArgument, "alpha must be positive");
}

void RadiusBand::validate() const {
    require(gamma_min >= 0.0 && gamma_min <= 1.0, ErrorKind::InvalidArgument, "gamma_min must lie in [0, 1]");
    require(gamma_max >= 1.0, ErrorKind::InvalidArgument, "gamma_max must be >= 1");
}

Blocks sample_sphere_blocks(int d, double radius, std::size_t n_blocks, Rng& rng) {
    require(algebra::is_division_dimension(d), ErrorKind::Dimension, "block dimension must be 1, 2, 4 or 8");
    require(radius >= 0.0, ErrorKind::InvalidArgument, "sphere radius must be non-negative");
    Blocks out(d, n_blocks);
    for (std::size_t i = 0; i < n_blocks; ++i) {
        auto b = out.block(i);
        if (d == 1) {
            b[0] = rng.bit() ? radius : -radius;
            continue;
        }
        double s = 0.0;
        do {
            s = 0.0;
            for (auto& x : b) {
                x = rng.normal();
                s += x * x;
            }
        } while (s == 0.0);
        const double k = radius / std::sqrt(s);
        for (auto& x : b) x *= k;
    }
    return out;
}

Blocks sample_key_blocks(const ModulationScheme& scheme, std::size_t n_blocks, Rng& rng) {
    scheme.validate();
    require(scheme.kind == Kind::Key, ErrorKind::InvalidArgument, "sample_key_blocks: scheme is not a key modulation");
    return sample_sphere_blocks(scheme.d, scheme.key_radius(), n_blocks, rng);
}

Blocks sample_gaussian_blocks(const ModulationScheme& scheme, std::size_t n_blocks, Rng& rng) {
    scheme.validate();
    require(scheme.kind == Kind::Gaussian, ErrorKind::InvalidArgument,
            "sample_gaussian_blocks: scheme is not a Gaussian modulation");
    Blocks out(scheme.d, n_blocks);
    const double sd = scheme.alpha / std::sqrt(2.0);
    for (auto& x : out.data) x = rng.normal(sd);
    return out;
}

double chi_pdf(double r, int d) {
    require(r >= 0.0, ErrorKind::InvalidArgument, "chi_pdf: negative radius");
    require(algebra::is_division_dimension(d), ErrorKind::Dimension, "chi_pdf: dimension must be 1, 2, 4 or 8");
    const double h = 0.5 * d;
    // 2 h^h r^{d-1} e^{-h r^2} / Gamma(h), in logs to stay finite for large r.
    if (r == 0.0) return d == 1 ? 2.0 * std::sqrt(h) / std::tgamma(h) : 0.0;
    const double lg = std::log(2.0) + h * std::log(h) + (d - 1) * std::log(r) - h * r * r - std::lgamma(h);
    return std::exp(lg);
}

double band_acceptance_probability(const RadiusBand& band, int d) {
    band.validate();
    require(algebra::is_division_dimension(d), ErrorKind::Dimension, "band dimension must be 1, 2, 4 or 8");
    if (band.gamma_max <= band.gamma_min) return 0.0;
    auto f = [d](double r) { return chi_pdf(r, d); };
    double err = 0.0;
    double p = 0.0;
    if (std::isinf(band.gamma_max)) {
        p = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            f, band.gamma_min, std::numeric_limits<double>::infinity(), 20, 1e-12, &err);
    } else {
        p = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, band.gamma_min, band.gamma_max, 20,
                                                                          1e-12, &err);
    }
    return std::clamp(p, 0.0, 1.0);
}

double radius_factor(std::span<const double> block, double alpha) {
    double s = 0.0;
    for (double x : block) s += x * x;
    return std::sqrt(s) / (alpha * std::sqrt(0.5 * static_cast<double>(block.size())));
}

std::vector<BandLabel> label_by_band(const Blocks& blocks, const RadiusBand& band, double alpha) {
    band.validate();
    require(alpha > 0.0, ErrorKind::InvalidArgument, "label_by_band: alpha must be positive");
    std::vector<BandLabel> out(blocks.count());
    for (std::size_t i = 0; i < blocks.count(); ++i) {
        const double r = radius_factor(blocks.block(i), alpha);
        out[i] = (r >= band.gamma_min && r <= band.gamma_max) ? BandLabel::KeyUsable : BandLabel::Decoy;
    }
    return out;
}

std::vector<std::complex<double>> blocks_to_amplitudes(const Blocks& blocks) {
    require(blocks.data.size() % 2 == 0, ErrorKind::Dimension, "blocks_to_amplitudes: odd number of coordinates");
    std::vector<std::complex<double>> out(blocks.data.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = {blocks.data[2 * i], blocks.data[2 * i + 1]};
    return out;
}

Blocks amplitudes_to_blocks(std::span<const std::complex<double>> amplitudes, int d) {
    require(algebra::is_division_dimension(d), ErrorKind::Dimension, "amplitudes_to_blocks: bad dimension");
    const std::size_t coords = 2 * amplitudes.size();
    require(coords % static_cast<std::size_t>(d) == 0, ErrorKind::Dimension,
            "amplitudes_to_blocks: amplitude count does not fill whole blocks");
    Blocks out(d, coords / static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < amplitudes.size(); ++i) {
        out.data[2 * i] = amplitudes[i].real();
        out.data[2 * i + 1] = amplitudes[i].imag();
    }
    return out;
}

std::vector<double> to_quadratures(const Blocks& blocks) {
    std::vector<double> q(blocks.data.size());
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = 2.0 * blocks.data[i];
    return q;
}

void write_blocks_csv(std::ostream& os, const Blocks& blocks, std::span<const std::string> labels) {
    require(labels.empty() || labels.size() == blocks.count(), ErrorKind::Dimension,
            "write_blocks_csv: label count differs from block count");
    os << "block_index";
    for (int j = 0; j < blocks.d; ++j) os << ",coord_" << j;
    os << ",label\n";
    char buf[32];
    for (std::size_t i = 0; i < blocks.count(); ++i) {
        os << i;
        for (double x : blocks.block(i)) {
            std::snprintf(buf, sizeof buf, "%.17g", x);
            os << ',' << buf;
        }
        os << ',' << (labels.empty() ? std::string() : labels[i]) << '\n';
    }
}

}  // namespace cvqkd::modulation
