#include "cvqkd/reconciliation.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>

#include "cvqkd/algebra.hpp"
#include "cvqkd/error.hpp"
#include "cvqkd/stats.hpp"

namespace cvqkd::reconciliation {

// ---------------------------------------------------------------- repetition

RepetitionCode::RepetitionCode(std::size_t length) : r_(length) {
    require(length >= 1, ErrorKind::InvalidArgument, "repetition length must be >= 1");
}

Bits RepetitionCode::syndrome(std::span<const std::uint8_t> word) const {
    require(word.size() == r_, ErrorKind::Dimension, "repetition syndrome: wrong word length");
    Bits s(r_ - 1);
    for (std::size_t i = 1; i < r_; ++i) s[i - 1] = word[0] ^ word[i];
    return s;
}

Bits RepetitionCode::decode(std::span<const double> llr, std::span<const std::uint8_t> syndrome) const {
    require(llr.size() == r_ && syndrome.size() == r_ - 1, ErrorKind::Dimension, "repetition decode: wrong sizes");
    double l = llr[0];
    for (std::size_t i = 1; i < r_; ++i) l += syndrome[i - 1] ? -llr[i] : llr[i];
    const std::uint8_t b0 = l < 0.0 ? 1 : 0;
    Bits w(r_);
    w[0] = b0;
    for (std::size_t i = 1; i < r_; ++i) w[i] = b0 ^ syndrome[i - 1];
    return w;
}

std::string RepetitionCode::describe() const { return "rep:" + std::to_string(r_); }

// ---------------------------------------------------------------- sparse

SparseParityCode::SparseParityCode(std::size_t n_bits, std::vector<std::vector<std::uint32_t>> checks,
                                   int max_iterations)
    : n_(n_bits), checks_(std::move(checks)), var_checks_(n_bits), max_iterations_(max_iterations) {
    require(n_ >= 1, ErrorKind::InvalidArgument, "code length must be >= 1");
    require(checks_.size() < n_, ErrorKind::InvalidArgument, "parity-check matrix must have fewer rows than columns");
    for (std::size_t c = 0; c < checks_.size(); ++c) {
        auto& row = checks_[c];
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
        for (auto v : row) {
            require(v < n_, ErrorKind::InvalidArgument, "parity-check column out of range");
            var_checks_[v].push_back(static_cast<std::uint32_t>(c));
        }
    }
}

std::shared_ptr<SparseParityCode> SparseParityCode::load(std::istream& in) {
    std::string line;
    int lineno = 0;
    long long n = -1, k = -1;
    std::vector<std::vector<std::uint32_t>> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::istringstream ss(line);
        if (n < 0) {
            if (!(ss >> n)) continue;
            if (!(ss >> k) || n <= 0 || k <= 0 || k > n)
                throw ConfigError("code file line " + std::to_string(lineno) + ": expected 'n_bits k_bits'", lineno);
            rows.assign(static_cast<std::size_t>(n - k), {});
            continue;
        }
        long long r, c;
        if (!(ss >> r)) continue;
        long long value = 1;
        if (!(ss >> c))
            throw ConfigError("code file line " + std::to_string(lineno) + ": expected 'row col [value]'", lineno);
        ss >> value;
        if (r < 0 || r >= n - k || c < 0 || c >= n)
            throw ConfigError("code file line " + std::to_string(lineno) + ": index out of range", lineno);
        if (value % 2 != 0) rows[static_cast<std::size_t>(r)].push_back(static_cast<std::uint32_t>(c));
    }
    if (n < 0) throw ConfigError("code file: missing header", lineno);
    return std::make_shared<SparseParityCode>(static_cast<std::size_t>(n), std::move(rows));
}

std::shared_ptr<SparseParityCode> SparseParityCode::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open code file '" + path + "'");
    return load(in);
}

Bits SparseParityCode::syndrome(std::span<const std::uint8_t> word) const {
    require(word.size() == n_, ErrorKind::Dimension, "syndrome: wrong word length");
    Bits s(checks_.size());
    for (std::size_t c = 0; c < checks_.size(); ++c) {
        std::uint8_t p = 0;
        for (auto v : checks_[c]) p ^= word[v];
        s[c] = p;
    }
    return s;
}

Bits SparseParityCode::decode(std::span<const double> llr, std::span<const std::uint8_t> syndrome) const {
    require(llr.size() == n_ && syndrome.size() == checks_.size(), ErrorKind::Dimension, "BP decode: wrong sizes");
    constexpr double clip = 30.0;
    // Messages are stored per (check, position in row).
    std::vector<std::vector<double>> c2v(checks_.size()), v2c(checks_.size());
    for (std::size_t c = 0; c < checks_.size(); ++c) {
        c2v[c].assign(checks_[c].size(), 0.0);
        v2c[c].resize(checks_[c].size());
        for (std::size_t j = 0; j < checks_[c].size(); ++j) v2c[c][j] = llr[checks_[c][j]];
    }
    std::vector<double> total(llr.begin(), llr.end());
    Bits hard(n_);
    auto harden = [&] {
        for (std::size_t v = 0; v < n_; ++v) hard[v] = total[v] < 0.0 ? 1 : 0;
    };
    harden();
    if (this->syndrome(hard) == Bits(syndrome.begin(), syndrome.end())) return hard;
    for (int it = 0; it < max_iterations_; ++it) {
        for (std::size_t c = 0; c < checks_.size(); ++c) {
            const auto& row = checks_[c];
            double prod = syndrome[c] ? -1.0 : 1.0;
            std::size_t zeros = 0;
            std::vector<double> th(row.size());
            for (std::size_t j = 0; j < row.size(); ++j) {
                th[j] = std::tanh(0.5 * std::clamp(v2c[c][j], -clip, clip));
                if (th[j] == 0.0)
                    ++zeros;
                else
                    prod *= th[j];
            }
            for (std::size_t j = 0; j < row.size(); ++j) {
                double p;
                if (th[j] == 0.0)
                    p = zeros > 1 ? 0.0 : prod;
                else
                    p = zeros > 0 ? 0.0 : prod / th[j];
                p = std::clamp(p, -1.0 + 1e-15, 1.0 - 1e-15);
                c2v[c][j] = 2.0 * std::atanh(p);
            }
        }
        std::copy(llr.begin(), llr.end(), total.begin());
        for (std::size_t c = 0; c < checks_.size(); ++c)
            for (std::size_t j = 0; j < checks_[c].size(); ++j) total[checks_[c][j]] += c2v[c][j];
        for (std::size_t c = 0; c < checks_.size(); ++c)
            for (std::size_t j = 0; j < checks_[c].size(); ++j) v2c[c][j] = total[checks_[c][j]] - c2v[c][j];
        harden();
        if (this->syndrome(hard) == Bits(syndrome.begin(), syndrome.end())) break;
    }
    return hard;
}

std::string SparseParityCode::describe() const {
    return "sparse[" + std::to_string(n_) + "," + std::to_string(k_bits()) + "]";
}

// ---------------------------------------------------------------- concatenated

ConcatenatedCode::ConcatenatedCode(std::size_t rep_len, std::shared_ptr<const BinaryLinearCode> inner)
    : rep_(rep_len), inner_(std::move(inner)) {
    require(rep_len >= 1, ErrorKind::InvalidArgument, "rep_len must be >= 1");
}

std::size_t ConcatenatedCode::n_bits() const { return rep_ * (inner_ ? inner_->n_bits() : 1); }
std::size_t ConcatenatedCode::k_bits() const { return inner_ ? inner_->k_bits() : 1; }

Bits ConcatenatedCode::syndrome(std::span<const std::uint8_t> word) const {
    require(word.size() == n_bits(), ErrorKind::Dimension, "concatenated syndrome: wrong word length");
    const std::size_t groups = n_bits() / rep_;
    Bits s;
    s.reserve(syndrome_bits());
    Bits leaders(groups);
    for (std::size_t g = 0; g < groups; ++g) {
        const std::uint8_t* w = word.data() + g * rep_;
        leaders[g] = w[0];
        for (std::size_t i = 1; i < rep_; ++i) s.push_back(w[0] ^ w[i]);
    }
    if (inner_) {
        const Bits si = inner_->syndrome(leaders);
        s.insert(s.end(), si.begin(), si.end());
    }
    return s;
}

Bits ConcatenatedCode::decode(std::span<const double> llr, std::span<const std::uint8_t> syndrome) const {
    require(llr.size() == n_bits() && syndrome.size() == syndrome_bits(), ErrorKind::Dimension,
            "concatenated decode: wrong sizes");
    const std::size_t groups = n_bits() / rep_;
    std::vector<double> lead(groups);
    for (std::size_t g = 0; g < groups; ++g) {
        const double* l = llr.data() + g * rep_;
        const std::uint8_t* s = syndrome.data() + g * (rep_ - 1);
        double acc = l[0];
        for (std::size_t i = 1; i < rep_; ++i) acc += s[i - 1] ? -l[i] : l[i];
        lead[g] = acc;
    }
    Bits leaders(groups);
    if (inner_) {
        leaders = inner_->decode(lead, syndrome.subspan(groups * (rep_ - 1)));
    } else {
        for (std::size_t g = 0; g < groups; ++g) leaders[g] = lead[g] < 0.0 ? 1 : 0;
    }
    Bits w(n_bits());
    for (std::size_t g = 0; g < groups; ++g) {
        const std::uint8_t* s = syndrome.data() + g * (rep_ - 1);
        w[g * rep_] = leaders[g];
        for (std::size_t i = 1; i < rep_; ++i) w[g * rep_ + i] = leaders[g] ^ s[i - 1];
    }
    return w;
}

std::string ConcatenatedCode::describe() const {
    return "rep:" + std::to_string(rep_) + (inner_ ? "+" + inner_->describe() : std::string());
}

std::shared_ptr<ConcatenatedCode> concatenated_code(std::size_t rep_len,
                                                    std::shared_ptr<const BinaryLinearCode> inner) {
    return std::make_shared<ConcatenatedCode>(rep_len, std::move(inner));
}

std::shared_ptr<const BinaryLinearCode> code_from_spec(const std::string& spec) {
    require(!spec.empty(), ErrorKind::Config, "empty code spec");
    if (spec.rfind("rep:", 0) == 0) {
        const auto plus = spec.find('+');
        const std::string num = spec.substr(4, plus == std::string::npos ? std::string::npos : plus - 4);
        std::size_t used = 0;
        long long r = 0;
        try {
            r = std::stoll(num, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != num.size() || r < 1) fail(ErrorKind::Config, "bad repetition length in code spec '" + spec + "'");
        std::shared_ptr<const BinaryLinearCode> inner;
        if (plus != std::string::npos) inner = SparseParityCode::load_file(spec.substr(plus + 1));
        return concatenated_code(static_cast<std::size_t>(r), inner);
    }
    return SparseParityCode::load_file(spec);
}

// ---------------------------------------------------------------- reduction

BobReduction bob_reduce(std::span<const double> y_block, Rng& rng) {
    const int d = static_cast<int>(y_block.size());
    require(algebra::is_division_dimension(d), ErrorKind::Dimension, "bob_reduce: block dimension must be 1, 2, 4 or 8");
    BobReduction r;
    const auto u = algebra::sample_unit(d, rng);
    r.u.assign(u.coords().begin(), u.coords().end());
    r.t.resize(y_block.size());
    algebra::mul_into(r.u, y_block, r.t);
    return r;
}

std::vector<double> alice_reduce(std::span<const double> x_block, std::span<const double> t) {
    require(x_block.size() == t.size(), ErrorKind::Dimension, "alice_reduce: block sizes differ");
    double xi[8];
    const std::span<double> xinv(xi, x_block.size());
    algebra::inv_into(x_block, xinv);
    std::vector<double> v(t.size());
    algebra::mul_into(t, xinv, v);
    return v;
}

// ---------------------------------------------------------------- capacity

namespace {

struct HermiteRule {
    std::vector<double> nodes, weights;
};

const HermiteRule& hermite_rule() {
    static const HermiteRule rule = [] {
        constexpr std::size_t n = 96;
        gsl_integration_fixed_workspace* w =
            gsl_integration_fixed_alloc(gsl_integration_fixed_hermite, n, 0.0, 1.0, 0.0, 0.0);
        HermiteRule r;
        r.nodes.assign(gsl_integration_fixed_nodes(w), gsl_integration_fixed_nodes(w) + n);
        r.weights.assign(gsl_integration_fixed_weights(w), gsl_integration_fixed_weights(w) + n);
        gsl_integration_fixed_free(w);
        return r;
    }();
    return rule;
}

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

double biawgn_capacity(double snr) {
    require(snr >= 0.0, ErrorKind::InvalidArgument, "biawgn_capacity: negative snr");
    if (snr == 0.0) return 0.0;
    if (std::isinf(snr)) return 1.0;
    // Signal +1, noise N(0, 1/snr); LLR = 2 snr + 2 sqrt(snr) z with z ~ N(0,1).
    // C = 1 - E[log2(1 + exp(-LLR))].
    const auto& rule = hermite_rule();
    double e = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double z = std::sqrt(2.0) * rule.nodes[i];
        e += rule.weights[i] * softplus(-2.0 * snr - 2.0 * std::sqrt(snr) * z);
    }
    e /= std::sqrt(M_PI);
    return std::clamp(1.0 - e / std::log(2.0), 0.0, 1.0);
}

// ---------------------------------------------------------------- reconcile

double ReconcileResult::success_rate() const {
    return frames ? static_cast<double>(successful_frames()) / static_cast<double>(frames) : 0.0;
}

std::size_t ReconcileResult::successful_frames() const {
    return static_cast<std::size_t>(std::count(frame_success.begin(), frame_success.end(), std::uint8_t{1}));
}

ReconcileResult reconcile(int d, std::span<const double> x, std::span<const double> y, const BinaryLinearCode& code,
                          Rng& rng, const ReconcileOptions& options) {
    require(algebra::is_division_dimension(d), ErrorKind::Dimension, "reconcile: block dimension must be 1, 2, 4 or 8");
    require(x.size() == y.size(), ErrorKind::Dimension, "reconcile: Alice and Bob block counts differ");
    const std::size_t ud = static_cast<std::size_t>(d);
    require(x.size() % ud == 0, ErrorKind::Dimension, "reconcile: data is not a whole number of blocks");
    const std::size_t n = code.n_bits();
    ReconcileResult res;
    res.frames = x.size() / n;
    require(res.frames > 0, ErrorKind::Reconciliation,
            "reconcile: " + std::to_string(x.size()) + " key bits do not fill one " + std::to_string(n) + "-bit frame");
    const std::size_t blocks = (res.frames * n + ud - 1) / ud;
    const std::size_t used = blocks * ud;

    // Bob.
    res.u.resize(used);
    res.t.resize(used);
    for (std::size_t b = 0; b < blocks; ++b) {
        auto r = bob_reduce(y.subspan(b * ud, ud), rng);
        std::copy(r.u.begin(), r.u.end(), res.u.begin() + static_cast<std::ptrdiff_t>(b * ud));
        std::copy(r.t.begin(), r.t.end(), res.t.begin() + static_cast<std::ptrdiff_t>(b * ud));
    }
    res.bob_bits.resize(res.frames * n);
    for (std::size_t i = 0; i < res.bob_bits.size(); ++i) res.bob_bits[i] = res.u[i] > 0.0 ? 0 : 1;
    for (std::size_t f = 0; f < res.frames; ++f) {
        const Bits s = code.syndrome(std::span<const std::uint8_t>(res.bob_bits).subspan(f * n, n));
        res.syndromes.insert(res.syndromes.end(), s.begin(), s.end());
    }

    // Alice: only x, t and the syndromes.
    res.v.resize(used);
    double norm2 = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
        auto v = alice_reduce(x.subspan(b * ud, ud), std::span<const double>(res.t).subspan(b * ud, ud));
        for (std::size_t j = 0; j < ud; ++j) {
            res.v[b * ud + j] = v[j];
            norm2 += v[j] * v[j];
        }
    }
    res.sigma2 = options.sigma2 > 0.0 ? options.sigma2 : (norm2 / static_cast<double>(blocks) - 1.0) / d;
    if (!(res.sigma2 > 1e-12)) res.sigma2 = 1e-12;
    res.snr = 1.0 / (d * res.sigma2);
    res.capacity = biawgn_capacity(res.snr);
    res.beta_achieved = res.capacity > 0.0 ? code.rate() / res.capacity : std::numeric_limits<double>::infinity();

    const double scale = 2.0 / (std::sqrt(static_cast<double>(d)) * res.sigma2);
    res.alice_bits.resize(res.frames * n);
    res.frame_success.resize(res.frames);
    res.raw_errors.resize(res.frames);
    res.decoded_errors.resize(res.frames);
    std::vector<double> llr(n);
    const std::size_t sb = code.syndrome_bits();
    for (std::size_t f = 0; f < res.frames; ++f) {
        std::size_t raw = 0;
        for (std::size_t i = 0; i < n; ++i) {
            llr[i] = scale * res.v[f * n + i];
            raw += ((llr[i] < 0.0 ? 1 : 0) != res.bob_bits[f * n + i]);
        }
        const Bits w = code.decode(llr, std::span<const std::uint8_t>(res.syndromes).subspan(f * sb, sb));
        std::size_t errs = 0;
        for (std::size_t i = 0; i < n; ++i) {
            res.alice_bits[f * n + i] = w[i];
            errs += (w[i] != res.bob_bits[f * n + i]);
        }
        res.raw_errors[f] = raw;
        res.decoded_errors[f] = errs;
        res.frame_success[f] = errs == 0 ? 1 : 0;
    }
    return res;
}

BenchResult reconcile_bench(int d, double snr, const BinaryLinearCode& code, std::size_t frames, Rng& rng) {
    require(algebra::is_division_dimension(d), ErrorKind::Dimension, "bench: block dimension must be 1, 2, 4 or 8");
    require(snr > 0.0, ErrorKind::InvalidArgument, "bench: snr must be positive");
    require(frames >= 1, ErrorKind::InvalidArgument, "bench: need at least one frame");
    const std::size_t ud = static_cast<std::size_t>(d);
    const std::size_t blocks = (frames * code.n_bits() + ud - 1) / ud;
    BenchResult out;
    out.d = d;
    out.snr = snr;
    out.sigma2 = std::isinf(snr) ? 0.0 : 1.0 / (d * snr);
    const double sd = std::sqrt(out.sigma2);
    std::vector<double> x(blocks * ud), y(blocks * ud);
    for (std::size_t b = 0; b < blocks; ++b) {
        double s = 0.0;
        do {
            s = 0.0;
            for (std::size_t j = 0; j < ud; ++j) {
                x[b * ud + j] = rng.normal();
                s += x[b * ud + j] * x[b * ud + j];
            }
        } while (s == 0.0);
        const double k = 1.0 / std::sqrt(s);
        for (std::size_t j = 0; j < ud; ++j) {
            x[b * ud + j] *= k;
            y[b * ud + j] = x[b * ud + j] + (sd > 0.0 ? rng.normal(sd) : 0.0);
        }
    }
    out.rec = reconcile(d, x, y, code, rng);

    const std::size_t nb = out.rec.u.size() / ud;
    std::vector<double> wj(nb), uj(nb);
    double wsum2 = 0.0;
    for (std::size_t j = 0; j < ud; ++j) {
        for (std::size_t b = 0; b < nb; ++b) {
            wj[b] = out.rec.v[b * ud + j] - out.rec.u[b * ud + j];
            wsum2 += wj[b] * wj[b];
        }
        if (sd > 0.0 && nb > 1) {
            out.ks_p_values.push_back(
                stats::ks_test(wj, [sd](double w) { return stats::normal_cdf(w / sd); }).p_value);
            for (std::size_t i = 0; i < ud; ++i) {
                for (std::size_t b = 0; b < nb; ++b) uj[b] = out.rec.u[b * ud + i];
                out.max_abs_corr_uw = std::max(out.max_abs_corr_uw, std::abs(stats::correlation(uj, wj)));
            }
        }
    }
    out.w_variance = nb ? wsum2 / static_cast<double>(nb * ud) : 0.0;
    return out;
}

}  // namespace cvqkd::reconciliation
