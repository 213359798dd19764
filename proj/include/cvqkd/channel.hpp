#pragma once

// Linear bosonic channel followed by homodyne or heterodyne detection, in
// shot-noise units. Inputs and outputs are quadrature values.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cvqkd/rng.hpp"

namespace cvqkd::channel {

enum class Detection { Homodyne, Heterodyne };

struct ChannelParams {
    double T = 1.0;
    double xi = 0.0;
    double eta = 1.0;
    Detection detection = Detection::Homodyne;
    // When true, detector loss is known to Alice and Bob and is not credited
    // to Eve. It does not change the simulated physics.
    bool eta_trusted = false;

    double t_eff() const noexcept { return eta * T; }
    void validate() const;
};

double distance_to_T(double d_km, double loss_db_per_km = 0.2);

// Shot-noise floor of one outcome: 1 for homodyne, 2 for heterodyne.
double noise_floor(Detection detection) noexcept;

double snr(const ChannelParams& params, double va);

struct Outcomes {
    // Homodyne: one value per mode; heterodyne: (x, p) per mode.
    std::vector<double> y;
    // Homodyne only: 0 = x quadrature, 1 = p quadrature.
    std::vector<std::uint8_t> basis;
};

// `quadratures` holds (x, p) pairs, one per mode.
Outcomes transmit_measure(std::span<const double> quadratures, const ChannelParams& params, Rng& rng,
                          std::optional<std::span<const std::uint8_t>> basis_choices = std::nullopt);

enum class NoiseShape { Gaussian, Uniform, TwoPoint, Zero, Cauchy };

// Additive noise law on each outcome. A negative variance selects the value
// implied by the channel, noise_floor + T_eff xi.
struct NoiseSpec {
    NoiseShape shape = NoiseShape::Gaussian;
    double variance = -1.0;
};

// Same gain as transmit_measure with the additive noise drawn from `noise`.
Outcomes add_non_gaussian_noise(std::span<const double> quadratures, const ChannelParams& params,
                                const NoiseSpec& noise, Rng& rng,
                                std::optional<std::span<const std::uint8_t>> basis_choices = std::nullopt);

}  // namespace cvqkd::channel
