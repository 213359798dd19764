#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cvqkd/error.hpp"
#include "cvqkd/protocol.hpp"

namespace cvqkd::protocol {

namespace {

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& p, bool binary = false) {
    std::ofstream os(p, binary ? std::ios::binary : std::ios::out);
    if (!os) fail(ErrorKind::Io, "cannot write '" + p.string() + "'");
    return os;
}

void close_checked(std::ofstream& os, const std::filesystem::path& p) {
    os.close();
    if (!os) fail(ErrorKind::Io, "error writing '" + p.string() + "'");
}

std::string bits_string(const reconciliation::Bits& b) {
    std::string s(b.size(), '0');
    for (std::size_t i = 0; i < b.size(); ++i) s[i] = b[i] ? '1' : '0';
    return s;
}

}  // namespace

void write_transcript(const SessionTranscript& t, const std::string& dir) {
    namespace fs = std::filesystem;
    const fs::path root(dir);
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) fail(ErrorKind::Io, "cannot create transcript directory '" + dir + "': " + ec.message());
    const std::size_t d = static_cast<std::size_t>(t.config.d);
    const bool hom = t.config.channel.detection == channel::Detection::Homodyne;

    {
        const auto p = root / "manifest.txt";
        auto os = open_out(p);
        os << "# cvqkd-transcript-v1\n";
        write_config(os, t.config);
        os << "blocks = " << t.labels.size() << '\n'
           << "blocks_key = " << t.count(Label::Key) << '\n'
           << "blocks_estimation = " << t.count(Label::Estimation) << '\n'
           << "blocks_decoy = " << t.count(Label::Decoy) << '\n'
           << "blocks_discarded = " << t.count(Label::Discarded) << '\n'
           << "band_acceptance = " << fmt(t.band_acceptance) << '\n'
           << "estimation_samples = " << t.estimate.samples << '\n'
           << "T_hat = " << fmt(t.estimate.T) << '\n'
           << "xi_hat = " << fmt(t.estimate.xi) << '\n';
        if (t.config.design) {
            os << "decoy_epsilon = " << fmt(t.config.design->epsilon) << '\n';
            for (std::size_t j = 0; j < t.config.design->radii.size(); ++j)
                os << "decoy_component." << j << " = " << fmt(t.config.design->radii[j]) << ','
                   << fmt(t.config.design->weights[j]) << '\n';
        }
        os << "distilled = " << (t.distilled ? "true" : "false") << '\n';
        if (t.distilled) {
            std::size_t ok = 0;
            for (auto s : t.frame_success) ok += s;
            os << "frames = " << t.frames << '\n'
               << "frames_ok = " << ok << '\n'
               << "beta_achieved = " << fmt(t.beta_achieved) << '\n'
               << "beta = " << fmt(t.report.beta) << '\n'
               << "report_d = " << (t.report.d == security::kGaussian ? std::string("inf") : std::to_string(t.report.d))
               << '\n'
               << "I_AB = " << fmt(t.report.I_AB) << '\n'
               << "chi_BE = " << fmt(t.report.chi_BE) << '\n'
               << "K = " << fmt(t.report.K) << '\n'
               << "F = " << fmt(t.report.F) << '\n'
               << "delta_xi = " << fmt(t.report.delta_xi) << '\n'
               << "n_key = " << t.n_key << '\n'
               << "key_length = " << t.key_length << '\n';
        }
        for (std::size_t i = 0; i < t.events.size(); ++i) os << "event." << i << " = " << t.events[i] << '\n';
        for (std::size_t i = 0; i < t.warnings.size(); ++i) os << "warning." << i << " = " << t.warnings[i] << '\n';
        close_checked(os, p);
    }
    {
        const auto p = root / "symbols.csv";
        auto os = open_out(p);
        os << "# cvqkd-csv-v1 symbols\nmode,x,p\n";
        for (std::size_t m = 0; 2 * m + 1 < t.sent.size(); ++m)
            os << m << ',' << fmt(t.sent[2 * m]) << ',' << fmt(t.sent[2 * m + 1]) << '\n';
        close_checked(os, p);
    }
    {
        const auto p = root / "outcomes.csv";
        auto os = open_out(p);
        os << "# cvqkd-csv-v1 outcomes\nmode,basis,y_x,y_p\n";
        for (std::size_t m = 0; 2 * m + 1 < t.outcomes.size(); ++m) {
            os << m << ',';
            if (hom) {
                const bool px = t.basis[m] == 0;
                os << (px ? "x," : "p,") << (px ? fmt(t.outcomes[2 * m]) : std::string()) << ','
                   << (px ? std::string() : fmt(t.outcomes[2 * m + 1])) << '\n';
            } else {
                os << "xp," << fmt(t.outcomes[2 * m]) << ',' << fmt(t.outcomes[2 * m + 1]) << '\n';
            }
        }
        close_checked(os, p);
    }
    {
        const auto p = root / "labels.csv";
        auto os = open_out(p);
        os << "# cvqkd-csv-v1 labels\nblock,label\n";
        for (std::size_t i = 0; i < t.labels.size(); ++i) os << i << ',' << label_name(t.labels[i]) << '\n';
        close_checked(os, p);
    }
    {
        const auto p = root / "messages.csv";
        auto os = open_out(p);
        os << "# cvqkd-csv-v1 messages\nkey_block";
        for (std::size_t j = 0; j < d; ++j) os << ",t_" << j;
        os << '\n';
        for (std::size_t b = 0; (b + 1) * d <= t.t_messages.size(); ++b) {
            os << b;
            for (std::size_t j = 0; j < d; ++j) os << ',' << fmt(t.t_messages[b * d + j]);
            os << '\n';
        }
        close_checked(os, p);
    }
    {
        const auto p = root / "frames.csv";
        auto os = open_out(p);
        os << "# cvqkd-csv-v1 frames\nframe,success,syndrome\n";
        const std::size_t sb = t.frames ? t.syndromes.size() / t.frames : 0;
        for (std::size_t f = 0; f < t.frames; ++f) {
            os << f << ',' << int(t.frame_success[f]) << ',';
            for (std::size_t i = 0; i < sb; ++i) os << char('0' + t.syndromes[f * sb + i]);
            os << '\n';
        }
        close_checked(os, p);
    }
    {
        const auto p = root / "keys.txt";
        auto os = open_out(p);
        os << "alice = " << bits_string(t.alice_key) << '\n' << "bob = " << bits_string(t.bob_key) << '\n';
        close_checked(os, p);
    }
    {
        const auto p = root / "transform.bin";
        auto os = open_out(p, true);
        os.write(reinterpret_cast<const char*>(t.transform.data()), static_cast<std::streamsize>(t.transform.size()));
        close_checked(os, p);
    }
}

std::string summary_line(const SessionTranscript& t) {
    auto fmt = [](double x) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", x);
        return std::string(buf);
    };
    std::ostringstream os;
    os << "flow=" << flow_name(t.config.flow) << " T_hat=" << fmt(t.estimate.T) << " xi_hat=" << fmt(t.estimate.xi);
    if (t.distilled) {
        std::size_t ok = 0;
        for (auto s : t.frame_success) ok += s;
        os << " frames=" << ok << '/' << t.frames << " beta_achieved=" << fmt(t.beta_achieved)
           << " beta=" << fmt(t.report.beta) << " K=" << fmt(t.report.K) << " key_bits=" << t.key_length;
    }
    return os.str();
}

}  // namespace cvqkd::protocol
