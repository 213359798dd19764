#include "cvqkd/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "cvqkd/algebra.hpp"
#include "cvqkd/error.hpp"

namespace cvqkd::protocol {

using channel::Detection;

std::string label_name(Label l) {
    switch (l) {
        case Label::Key:
            return "key";
        case Label::Decoy:
            return "decoy";
        case Label::Estimation:
            return "estimation";
        case Label::Discarded:
            return "discarded";
    }
    return "?";
}

std::size_t SessionTranscript::count(Label l) const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), l));
}

bool SessionTranscript::event_before(const std::string& a, const std::string& b) const {
    const auto ia = std::find(events.begin(), events.end(), a);
    const auto ib = std::find(events.begin(), events.end(), b);
    return ia != events.end() && ib != events.end() && ia < ib;
}

namespace {

// Exactly `count` distinct indices out of n, in increasing order.
std::vector<std::size_t> choose_subset(std::size_t n, std::size_t count, Rng& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < count; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
    return idx;
}

void symmetrize(SessionTranscript& t, std::vector<double>& a, std::vector<double>& b, std::size_t k, Rng& rng,
                bool apply_to_b_inverse) {
    if (k == 0 || a.empty()) {
        t.transform = algebra::OrthogonalTransform(a.size()).serialize();
        return;
    }
    require(k <= a.size(), ErrorKind::Config, "symmetrization_k exceeds the number of coordinates");
    const auto R = algebra::sample_orthogonal(a.size(), k, rng);
    R.apply(std::span<double>(a));
    if (!b.empty()) {
        if (apply_to_b_inverse)
            R.apply_inverse(std::span<double>(b));
        else
            R.apply(std::span<double>(b));
    }
    t.transform = R.serialize();
}

Estimate estimate_from_labels(const SessionTranscript& t, double va, double floor) {
    const std::size_t d = static_cast<std::size_t>(t.config.d);
    std::vector<double> x, y;
    for (std::size_t i = 0; i < t.labels.size(); ++i) {
        if (t.labels[i] != Label::Estimation) continue;
        x.insert(x.end(), t.alice.begin() + static_cast<std::ptrdiff_t>(i * d),
                 t.alice.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
        y.insert(y.end(), t.bob.begin() + static_cast<std::ptrdiff_t>(i * d),
                 t.bob.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
    }
    return estimate_channel(x, y, va, floor, t.config.min_estimation_samples);
}

void record_outcomes(SessionTranscript& t, const channel::Outcomes& out, Detection det) {
    const std::size_t modes = t.sent.size() / 2;
    if (det == Detection::Heterodyne) {
        t.outcomes = out.y;
        return;
    }
    t.outcomes.assign(2 * modes, 0.0);
    t.basis = out.basis;
    for (std::size_t m = 0; m < modes; ++m) t.outcomes[2 * m + out.basis[m]] = out.y[m];
}

}  // namespace

Estimate estimate_channel(const std::vector<double>& x, const std::vector<double>& y, double va, double noise_floor,
                          std::size_t min_samples) {
    require(x.size() == y.size(), ErrorKind::Dimension, "estimate_channel: sample sizes differ");
    require(va > 0.0, ErrorKind::InvalidArgument, "estimate_channel: V_A must be positive");
    require(x.size() >= std::max<std::size_t>(min_samples, 1), ErrorKind::Estimation,
            "estimate_channel: " + std::to_string(x.size()) + " estimation samples, need at least " +
                std::to_string(std::max<std::size_t>(min_samples, 1)));
    double sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    const double n = static_cast<double>(x.size());
    Estimate e;
    e.samples = x.size();
    const double g = sxy / n / va;
    e.T = g * g;
    require(e.T > 0.0, ErrorKind::Estimation, "estimate_channel: no correlation between Alice and Bob");
    e.xi = (syy / n - noise_floor - e.T * va) / e.T;
    return e;
}

SessionTranscript run_gaussian_postselected(const ProtocolConfig& config, Rng& rng) {
    config.validate();
    SessionTranscript t;
    t.config = config;
    const bool het = config.channel.detection == Detection::Heterodyne;
    if (!((config.d == 1 && !het) || (config.d == 8 && het)))
        t.warnings.push_back("non-standard pairing of d = " + std::to_string(config.d) + " with " +
                             detection_name(config.channel.detection) + " detection");
    Rng r_mod = rng.substream(1), r_chan = rng.substream(2), r_sym = rng.substream(3), r_pe = rng.substream(4);
    const double va = config.va();
    const double sd = std::sqrt(va);

    t.sent.resize(2 * config.n_symbols);
    for (auto& q : t.sent) q = r_mod.normal(sd);
    t.events.push_back("alice_draw");
    const auto out = channel::transmit_measure(t.sent, config.channel, r_chan);
    t.events.push_back("transmitted");
    t.events.push_back("measured");
    record_outcomes(t, out, config.channel.detection);

    std::vector<double> x, y;
    if (het) {
        x = t.sent;
        y = out.y;
    } else {
        t.events.push_back("basis_announced");
        x.resize(config.n_symbols);
        for (std::size_t m = 0; m < config.n_symbols; ++m) x[m] = t.sent[2 * m + out.basis[m]];
        y = out.y;
        t.events.push_back("coordinates_matched");
    }
    const std::size_t d = static_cast<std::size_t>(config.d);
    const std::size_t blocks = x.size() / d;
    if (blocks * d != x.size()) {
        t.warnings.push_back("dropped " + std::to_string(x.size() - blocks * d) + " coordinates that do not fill a block");
        x.resize(blocks * d);
        y.resize(blocks * d);
    }

    symmetrize(t, x, y, config.symmetrization_k, r_sym, false);
    t.events.push_back("transform_announced");
    t.events.push_back("transform_applied");
    t.alice = std::move(x);
    t.bob = std::move(y);

    t.labels.assign(blocks, Label::Key);
    const auto n_pe = static_cast<std::size_t>(std::llround(config.p_est * static_cast<double>(blocks)));
    for (auto i : choose_subset(blocks, n_pe, r_pe)) t.labels[i] = Label::Estimation;
    t.events.push_back("estimation_selected");

    const double rms = std::sqrt(static_cast<double>(d) * va);
    std::size_t candidates = 0, kept = 0;
    for (std::size_t i = 0; i < blocks; ++i) {
        if (t.labels[i] == Label::Estimation) continue;
        ++candidates;
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += t.alice[i * d + j] * t.alice[i * d + j];
        const double r = std::sqrt(s) / rms;
        if (r >= config.band.gamma_min && r <= config.band.gamma_max)
            ++kept;
        else
            t.labels[i] = Label::Discarded;
    }
    t.band_acceptance = candidates ? static_cast<double>(kept) / static_cast<double>(candidates) : 0.0;
    t.events.push_back("band_filter_announced");

    t.estimate = estimate_from_labels(t, va, channel::noise_floor(config.channel.detection));
    t.events.push_back("estimation");
    return t;
}

SessionTranscript run_decoy_flow(const ProtocolConfig& config, Rng& rng) {
    config.validate();
    SessionTranscript t;
    t.config = config;
    Rng r_lab = rng.substream(1), r_mod = rng.substream(2), r_sym = rng.substream(3), r_chan = rng.substream(4);
    const int d = config.d;
    const std::size_t ud = static_cast<std::size_t>(d);
    const double alpha = config.alpha;

    decoy::DecoyDesign design;
    if (config.p < 1.0) {
        if (config.design)
            design = *config.design;
        else if (!config.decoy_design.empty())
            design = decoy::read_design_file(config.decoy_design);
        else
            design = decoy::optimize_decoy(d, alpha, config.p, {config.decoy_radii_max, 0, 240, 40});
        require(design.d == d && std::abs(design.alpha - alpha) < 1e-12 && std::abs(design.p - config.p) < 1e-12,
                ErrorKind::Config, "decoy design does not match the configured d, alpha and p");
        require(!design.radii.empty(), ErrorKind::Config, "decoy design has no radii");
        t.config.design = design;
    }

    const std::size_t blocks = 2 * config.n_symbols / ud;
    const auto mix = decoy::mix_probabilities(config.p, config.p_est);
    t.labels.resize(blocks);
    for (auto& l : t.labels) {
        const double u = r_lab.uniform();
        l = u < mix.key ? Label::Key : (u < mix.key + mix.gaussian ? Label::Estimation : Label::Decoy);
    }
    t.events.push_back("labels_committed");

    std::vector<double> cumulative;
    for (double w : design.weights) cumulative.push_back((cumulative.empty() ? 0.0 : cumulative.back()) + w);
    const double key_radius = alpha * std::sqrt(0.5 * d);
    std::vector<double> amp(blocks * ud);
    for (std::size_t i = 0; i < blocks; ++i) {
        std::span<double> b(amp.data() + i * ud, ud);
        if (t.labels[i] == Label::Estimation) {
            for (auto& x : b) x = r_mod.normal(alpha / std::sqrt(2.0));
            continue;
        }
        double radius = key_radius;
        if (t.labels[i] == Label::Decoy) {
            const double u = r_mod.uniform() * cumulative.back();
            const auto j = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                                                    cumulative.begin());
            radius = design.radii[std::min(j, design.radii.size() - 1)];
        }
        const auto s = modulation::sample_sphere_blocks(d, radius, 1, r_mod);
        std::copy(s.data.begin(), s.data.end(), b.begin());
    }
    std::vector<double> x(amp.size());
    for (std::size_t i = 0; i < amp.size(); ++i) x[i] = 2.0 * amp[i];
    t.events.push_back("alice_draw");

    std::vector<double> sent = x;
    std::vector<double> none;
    symmetrize(t, sent, none, config.symmetrization_k, r_sym, false);
    t.events.push_back("transform_applied_alice");
    t.sent = sent;
    const auto out = channel::transmit_measure(t.sent, config.channel, r_chan);
    t.events.push_back("transmitted");
    t.events.push_back("measured");
    record_outcomes(t, out, config.channel.detection);

    std::vector<double> y = out.y;
    if (config.symmetrization_k > 0) {
        const auto R = algebra::OrthogonalTransform::deserialize(t.transform);
        R.apply_inverse(std::span<double>(y));
    }
    t.events.push_back("transform_announced");
    t.events.push_back("transform_applied_bob");
    t.alice = std::move(x);
    t.bob = std::move(y);
    t.events.push_back("labels_revealed");

    t.estimate = estimate_from_labels(t, config.va(), channel::noise_floor(config.channel.detection));
    t.events.push_back("estimation");
    return t;
}

SessionTranscript run_flow(const ProtocolConfig& config, Rng& rng) {
    return config.flow == Flow::Decoy ? run_decoy_flow(config, rng) : run_gaussian_postselected(config, rng);
}

DistillResult distill(SessionTranscript& t, const reconciliation::BinaryLinearCode& code, Rng& rng) {
    require(t.estimate.samples > 0, ErrorKind::Estimation, "distill: transcript has no channel estimate");
    const auto& c = t.config;
    const std::size_t d = static_cast<std::size_t>(c.d);
    const double va = c.va();
    const bool het = c.channel.detection == Detection::Heterodyne;

    std::vector<double> x, y;
    const double bob_scale = 1.0 / (std::sqrt(t.estimate.T) * std::sqrt(static_cast<double>(d) * va));
    for (std::size_t i = 0; i < t.labels.size(); ++i) {
        if (t.labels[i] != Label::Key) continue;
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += t.alice[i * d + j] * t.alice[i * d + j];
        const double an = 1.0 / std::sqrt(s);
        for (std::size_t j = 0; j < d; ++j) {
            x.push_back(t.alice[i * d + j] * an);
            y.push_back(t.bob[i * d + j] * bob_scale);
        }
    }
    const std::size_t key_coords = x.size();
    if (key_coords < code.n_bits()) {
        std::ostringstream os;
        os << "distill: " << t.count(Label::Key) << " key blocks (" << key_coords
           << " coordinates) do not fill one " << code.n_bits() << "-bit frame; band acceptance "
           << t.band_acceptance << ", estimation blocks " << t.count(Label::Estimation) << ", discarded "
           << t.count(Label::Discarded);
        fail(ErrorKind::Reconciliation, os.str());
    }

    Rng r_rec = rng.substream(11);
    const auto rec = reconciliation::reconcile(c.d, x, y, code, r_rec);
    t.t_messages = rec.t;
    t.syndromes = rec.syndromes;
    t.frame_success = rec.frame_success;
    t.frames = rec.frames;
    t.beta_achieved = rec.beta_achieved;
    t.events.push_back("reconciliation");
    const double failure = 1.0 - rec.success_rate();
    if (failure > c.failure_threshold) {
        std::ostringstream os;
        os << "distill: " << rec.frames - rec.successful_frames() << " of " << rec.frames
           << " frames failed (rate " << failure << " > threshold " << c.failure_threshold
           << "); estimated BI-AWGN snr " << rec.snr << ", code rate " << code.rate();
        fail(ErrorKind::Reconciliation, os.str());
    }

    double xi = t.estimate.xi;
    if (xi < 0.0) {
        t.warnings.push_back("estimated excess noise " + std::to_string(xi) + " < 0; key rate uses 0");
        xi = 0.0;
    }
    channel::ChannelParams p = c.channel;
    p.xi = xi;
    if (c.channel.eta_trusted) {
        p.T = std::min(1.0, t.estimate.T / c.channel.eta);
    } else {
        p.T = std::min(1.0, t.estimate.T);
        p.eta = 1.0;
    }
    const double beta = c.beta_target > 0.0 ? c.beta_target : std::min(1.0, rec.beta_achieved);
    const int d_report = c.flow == Flow::Decoy ? c.d : security::kGaussian;
    t.report = security::secret_key_rate(d_report, va, p, beta);
    t.report.eta = c.channel.eta;

    t.n_key = key_coords / (het ? 2 : 1);
    reconciliation::Bits agreed_a, agreed_b;
    const std::size_t n = code.n_bits();
    for (std::size_t f = 0; f < rec.frames; ++f) {
        if (!rec.frame_success[f]) continue;
        agreed_a.insert(agreed_a.end(), rec.alice_bits.begin() + static_cast<std::ptrdiff_t>(f * n),
                        rec.alice_bits.begin() + static_cast<std::ptrdiff_t>((f + 1) * n));
        agreed_b.insert(agreed_b.end(), rec.bob_bits.begin() + static_cast<std::ptrdiff_t>(f * n),
                        rec.bob_bits.begin() + static_cast<std::ptrdiff_t>((f + 1) * n));
    }
    std::size_t len = 0;
    if (t.report.K <= 0.0) {
        t.warnings.push_back("key rate K <= 0: no key material emitted");
    } else {
        len = static_cast<std::size_t>(std::floor(t.report.K * static_cast<double>(t.n_key)));
        if (len > agreed_b.size()) {
            t.warnings.push_back("key length limited by the " + std::to_string(agreed_b.size()) + " agreed bits");
            len = agreed_b.size();
        }
    }
    t.key_length = len;
    t.alice_key.assign(agreed_a.begin(), agreed_a.begin() + static_cast<std::ptrdiff_t>(len));
    t.bob_key.assign(agreed_b.begin(), agreed_b.begin() + static_cast<std::ptrdiff_t>(len));
    t.events.push_back("privacy_amplification");
    t.distilled = true;
    return {t.alice_key, t.bob_key, t.report};
}

}  // namespace cvqkd::protocol
