#pragma once

// Reverse reconciliation on the sphere: Bob's sign vector u is the key, he
// publishes t = u y and a syndrome of u, Alice recovers a noisy copy
// v = t x^{-1} of u and decodes it within the announced coset.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cvqkd/rng.hpp"

namespace cvqkd::reconciliation {

using Bits = std::vector<std::uint8_t>;

// Binary linear code used for coset decoding. LLRs are log P(0)/P(1).
class BinaryLinearCode {
public:
    virtual ~BinaryLinearCode() = default;
    virtual std::size_t n_bits() const = 0;
    virtual std::size_t k_bits() const = 0;
    std::size_t syndrome_bits() const { return n_bits() - k_bits(); }
    double rate() const { return static_cast<double>(k_bits()) / static_cast<double>(n_bits()); }

    virtual Bits syndrome(std::span<const std::uint8_t> word) const = 0;
    // Most likely word with the given syndrome. May return a word with a
    // different syndrome when an iterative decoder does not converge.
    virtual Bits decode(std::span<const double> llr, std::span<const std::uint8_t> syndrome) const = 0;
    virtual std::string describe() const = 0;
};

// [r, 1] repetition code; syndrome bit i-1 is w_0 xor w_i.
class RepetitionCode final : public BinaryLinearCode {
public:
    explicit RepetitionCode(std::size_t length);
    std::size_t n_bits() const override { return r_; }
    std::size_t k_bits() const override { return 1; }
    Bits syndrome(std::span<const std::uint8_t> word) const override;
    Bits decode(std::span<const double> llr, std::span<const std::uint8_t> syndrome) const override;
    std::string describe() const override;

private:
    std::size_t r_;
};

// Code given by a sparse parity-check matrix, decoded by sum-product belief
// propagation. Rows are assumed linearly independent.
class SparseParityCode final : public BinaryLinearCode {
public:
    SparseParityCode(std::size_t n_bits, std::vector<std::vector<std::uint32_t>> checks, int max_iterations = 60);

    // Text format: "n_bits k_bits" then "row col [value]" triplets, '#' comments.
    static std::shared_ptr<SparseParityCode> load(std::istream& in);
    static std::shared_ptr<SparseParityCode> load_file(const std::string& path);

    std::size_t n_bits() const override { return n_; }
    std::size_t k_bits() const override { return n_ - checks_.size(); }
    const std::vector<std::vector<std::uint32_t>>& checks() const noexcept { return checks_; }
    Bits syndrome(std::span<const std::uint8_t> word) const override;
    Bits decode(std::span<const double> llr, std::span<const std::uint8_t> syndrome) const override;
    std::string describe() const override;

private:
    std::size_t n_;
    std::vector<std::vector<std::uint32_t>> checks_;
    std::vector<std::vector<std::uint32_t>> var_checks_;
    int max_iterations_;
};

// Each inner codeword bit repeated rep_len times. Without an inner code this
// is the [rep_len, 1] repetition code.
class ConcatenatedCode final : public BinaryLinearCode {
public:
    ConcatenatedCode(std::size_t rep_len, std::shared_ptr<const BinaryLinearCode> inner);
    std::size_t n_bits() const override;
    std::size_t k_bits() const override;
    std::size_t rep_len() const noexcept { return rep_; }
    const BinaryLinearCode* inner() const noexcept { return inner_.get(); }
    Bits syndrome(std::span<const std::uint8_t> word) const override;
    Bits decode(std::span<const double> llr, std::span<const std::uint8_t> syndrome) const override;
    std::string describe() const override;

private:
    std::size_t rep_;
    std::shared_ptr<const BinaryLinearCode> inner_;
};

std::shared_ptr<ConcatenatedCode> concatenated_code(std::size_t rep_len,
                                                    std::shared_ptr<const BinaryLinearCode> inner = nullptr);

// Built-in spec "rep:R" or a path to a code file, optionally "rep:R+path".
std::shared_ptr<const BinaryLinearCode> code_from_spec(const std::string& spec);

struct BobReduction {
    std::vector<double> u;
    std::vector<double> t;
};

BobReduction bob_reduce(std::span<const double> y_block, Rng& rng);
std::vector<double> alice_reduce(std::span<const double> x_block, std::span<const double> t);

// Mutual information of the binary-input AWGN channel with unit signal power
// and noise variance 1/snr, in bits per use.
double biawgn_capacity(double snr);

struct ReconcileOptions {
    // When positive, Alice uses this noise variance instead of measuring it.
    double sigma2 = -1.0;
};

struct ReconcileResult {
    std::size_t frames = 0;
    Bits bob_bits;    // frames * n_bits
    Bits alice_bits;  // decoded
    std::vector<std::uint8_t> frame_success;
    std::vector<std::size_t> raw_errors;      // hard-decision errors per frame
    std::vector<std::size_t> decoded_errors;  // errors after decoding per frame
    std::vector<double> t;                    // Bob -> Alice side information
    Bits syndromes;
    std::vector<double> u;  // Bob's unit vectors, flattened
    std::vector<double> v;  // Alice's reduced vectors, flattened
    double sigma2 = 0.0;
    double snr = 0.0;
    double capacity = 0.0;
    double beta_achieved = 0.0;

    double success_rate() const;
    std::size_t successful_frames() const;
};

// x and y are flattened d-blocks, x on the unit sphere and y ~ x + noise.
// Blocks beyond the last complete frame are ignored.
ReconcileResult reconcile(int d, std::span<const double> x, std::span<const double> y, const BinaryLinearCode& code,
                          Rng& rng, const ReconcileOptions& options = {});

struct BenchResult {
    int d = 1;
    double snr = 0.0;
    double sigma2 = 0.0;
    ReconcileResult rec;
    std::vector<double> ks_p_values;  // one per coordinate of w = v - u
    double w_variance = 0.0;
    double max_abs_corr_uw = 0.0;
};

// Synthetic virtual channel: x uniform on the unit sphere, y = x + z with
// z ~ N(0, sigma2 I), sigma2 = 1 / (d snr). snr = inf gives a noiseless run.
BenchResult reconcile_bench(int d, double snr, const BinaryLinearCode& code, std::size_t frames, Rng& rng);

}  // namespace cvqkd::reconciliation
