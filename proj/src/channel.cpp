#include "cvqkd/channel.hpp"

#include <cmath>

#include "cvqkd/error.hpp"

namespace cvqkd::channel {

void ChannelParams::validate() const {
    require(T > 0.0 && T <= 1.0, ErrorKind::InvalidArgument, "transmittance must lie in (0, 1]");
    require(xi >= 0.0 && std::isfinite(xi), ErrorKind::InvalidArgument, "excess noise must be >= 0");
    require(eta > 0.0 && eta <= 1.0, ErrorKind::InvalidArgument, "detector efficiency must lie in (0, 1]");
}

double distance_to_T(double d_km, double loss_db_per_km) {
    require(d_km >= 0.0, ErrorKind::InvalidArgument, "distance must be non-negative");
    require(loss_db_per_km >= 0.0, ErrorKind::InvalidArgument, "attenuation must be non-negative");
    return std::pow(10.0, -loss_db_per_km * d_km / 10.0);
}

double noise_floor(Detection detection) noexcept { return detection == Detection::Homodyne ? 1.0 : 2.0; }

double snr(const ChannelParams& params, double va) {
    params.validate();
    require(va >= 0.0, ErrorKind::InvalidArgument, "V_A must be non-negative");
    const double t = params.t_eff();
    return t * va / (noise_floor(params.detection) + t * params.xi);
}

namespace {

template <class Noise>
Outcomes run(std::span<const double> q, const ChannelParams& params, Rng& rng,
             std::optional<std::span<const std::uint8_t>> basis_choices, Noise&& noise) {
    params.validate();
    require(q.size() % 2 == 0, ErrorKind::Dimension, "quadratures must come in (x, p) pairs");
    const std::size_t modes = q.size() / 2;
    const double g = std::sqrt(params.t_eff());
    Outcomes out;
    if (params.detection == Detection::Homodyne) {
        if (basis_choices)
            require(basis_choices->size() == modes, ErrorKind::Dimension, "one basis choice per mode required");
        out.y.resize(modes);
        out.basis.resize(modes);
        for (std::size_t m = 0; m < modes; ++m) {
            const std::uint8_t b = basis_choices ? ((*basis_choices)[m] ? 1 : 0) : (rng.bit() ? 1 : 0);
            out.basis[m] = b;
            out.y[m] = g * q[2 * m + b] + noise(rng);
        }
    } else {
        out.y.resize(q.size());
        for (std::size_t i = 0; i < q.size(); ++i) out.y[i] = g * q[i] + noise(rng);
    }
    return out;
}

}  // namespace

Outcomes transmit_measure(std::span<const double> quadratures, const ChannelParams& params, Rng& rng,
                          std::optional<std::span<const std::uint8_t>> basis_choices) {
    const double sd = std::sqrt(noise_floor(params.detection) + params.t_eff() * params.xi);
    return run(quadratures, params, rng, basis_choices, [sd](Rng& r) { return r.normal(sd); });
}

Outcomes add_non_gaussian_noise(std::span<const double> quadratures, const ChannelParams& params,
                                const NoiseSpec& noise, Rng& rng,
                                std::optional<std::span<const std::uint8_t>> basis_choices) {
    require(noise.shape != NoiseShape::Cauchy, ErrorKind::InvalidArgument,
            "noise law has no finite variance; second-moment estimation is undefined");
    double var = noise.variance;
    if (var < 0.0) var = noise_floor(params.detection) + params.t_eff() * params.xi;
    require(std::isfinite(var), ErrorKind::InvalidArgument, "noise variance must be finite");
    const double sd = std::sqrt(var);
    switch (noise.shape) {
        case NoiseShape::Gaussian:
            return run(quadratures, params, rng, basis_choices, [sd](Rng& r) { return r.normal(sd); });
        case NoiseShape::Uniform: {
            const double a = sd * std::sqrt(3.0);
            return run(quadratures, params, rng, basis_choices,
                       [a](Rng& r) { return a * (2.0 * r.uniform() - 1.0); });
        }
        case NoiseShape::TwoPoint:
            return run(quadratures, params, rng, basis_choices, [sd](Rng& r) { return r.bit() ? sd : -sd; });
        case NoiseShape::Zero:
            return run(quadratures, params, rng, basis_choices, [](Rng&) { return 0.0; });
        case NoiseShape::Cauchy:
            break;
    }
    fail(ErrorKind::InvalidArgument, "unknown noise shape");
}

}  // namespace cvqkd::channel
