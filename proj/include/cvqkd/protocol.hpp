#pragma once

// Prepare-and-measure protocol sessions: the Gaussian post-selected flow and
// the eight-dimensional decoy flow, parameter estimation and distillation.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cvqkd/channel.hpp"
#include "cvqkd/decoy.hpp"
#include "cvqkd/modulation.hpp"
#include "cvqkd/reconciliation.hpp"
#include "cvqkd/rng.hpp"
#include "cvqkd/security.hpp"

namespace cvqkd::protocol {

enum class Flow { GaussianPostselected, Decoy };

struct ProtocolConfig {
    Flow flow = Flow::Decoy;
    int d = 8;
    double alpha = 1.0;
    std::size_t n_symbols = 1000000;  // coherent states sent
    double p_est = 0.5;
    double p = 0.5;
    modulation::RadiusBand band{0.95, 1.05};
    // Decoy flow: design file; optimised at run time when empty.
    std::string decoy_design;
    int decoy_radii_max = 12;
    std::optional<decoy::DecoyDesign> design;
    channel::ChannelParams channel{0.5, 0.005, 1.0, channel::Detection::Heterodyne, false};
    // When set, overrides channel.T through distance_to_T.
    std::optional<double> distance_km;
    double loss_db_per_km = 0.2;
    std::size_t symmetrization_k = 1;
    // Reconciliation efficiency used in the key-rate report; <= 0 uses the
    // efficiency achieved by the code.
    double beta_target = 0.8;
    std::string code = "rep:16";
    std::uint64_t seed = 1;
    double failure_threshold = 0.05;
    std::size_t min_estimation_samples = 1000;

    double va() const noexcept { return 2.0 * alpha * alpha; }
    void validate() const;
};

std::string flow_name(Flow f);
Flow parse_flow(const std::string& s);
std::string detection_name(channel::Detection d);

// Flat "key = value" text. Unknown keys and malformed values raise
// ConfigError carrying the line number.
ProtocolConfig parse_config(std::istream& in);
ProtocolConfig load_config(const std::string& path);
void write_config(std::ostream& os, const ProtocolConfig& config);
// Applies one "key = value" assignment; line is used for diagnostics.
void set_config_value(ProtocolConfig& config, const std::string& key, const std::string& value, int line = 0);

enum class Label : std::uint8_t { Key, Decoy, Estimation, Discarded };
std::string label_name(Label l);

struct Estimate {
    double T = 0.0;   // effective transmittance, eta T
    double xi = 0.0;  // raw, may be negative
    std::size_t samples = 0;
};

struct SessionTranscript {
    ProtocolConfig config;
    // Phase log in execution order.
    std::vector<std::string> events;

    // Per mode: quadratures Alice sent (x, p) and Bob's outcomes. Homodyne
    // outcomes occupy the slot of the measured quadrature; the other is 0.
    std::vector<double> sent;
    std::vector<double> outcomes;
    std::vector<std::uint8_t> basis;

    // Block-aligned data in the frame where labels apply (after R for the
    // post-selected flow, before R for the decoy flow), d coordinates per block.
    std::vector<double> alice;
    std::vector<double> bob;
    std::vector<Label> labels;
    std::vector<std::uint8_t> transform;  // serialized OrthogonalTransform

    Estimate estimate;
    double band_acceptance = 0.0;  // fraction of non-estimation blocks kept

    // Filled by distill().
    bool distilled = false;
    std::vector<double> t_messages;
    reconciliation::Bits syndromes;
    std::vector<std::uint8_t> frame_success;
    std::size_t frames = 0;
    double beta_achieved = 0.0;
    security::KeyRateReport report;
    std::size_t n_key = 0;
    std::size_t key_length = 0;
    reconciliation::Bits alice_key;
    reconciliation::Bits bob_key;
    std::vector<std::string> warnings;

    std::size_t count(Label l) const;
    bool event_before(const std::string& a, const std::string& b) const;
};

SessionTranscript run_gaussian_postselected(const ProtocolConfig& config, Rng& rng);
SessionTranscript run_decoy_flow(const ProtocolConfig& config, Rng& rng);
SessionTranscript run_flow(const ProtocolConfig& config, Rng& rng);

// x and y are aligned quadrature samples; va is the modulation variance and
// noise_floor 1 (homodyne) or 2 (heterodyne).
Estimate estimate_channel(const std::vector<double>& x, const std::vector<double>& y, double va, double noise_floor,
                          std::size_t min_samples = 1);

struct DistillResult {
    reconciliation::Bits alice_key;
    reconciliation::Bits bob_key;
    security::KeyRateReport report;
};

DistillResult distill(SessionTranscript& transcript, const reconciliation::BinaryLinearCode& code, Rng& rng);

// Transcript directory: manifest.txt, symbols.csv, outcomes.csv, labels.csv,
// messages.csv, frames.csv, keys.txt, transform.bin.
void write_transcript(const SessionTranscript& t, const std::string& dir);
std::string summary_line(const SessionTranscript& t);

}  // namespace cvqkd::protocol
