#pragma once

// Real division algebras (reals, complex numbers, quaternions, octonions) and
// orthogonal transforms stored as products of Householder reflections.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cvqkd/rng.hpp"

namespace cvqkd::algebra {

bool is_division_dimension(int d) noexcept;

// Element of R, C, H or O. The product is the Cayley-Dickson doubling
// (a,b)(c,d) = (ac - d*b, da + bc*), which reproduces the Hamilton table for
// d = 4. Octonions are alternative but not associative.
class Element {
public:
    Element() = default;
    explicit Element(std::span<const double> coords);
    Element(std::initializer_list<double> coords);

    static Element identity(int d);
    static Element zero(int d);

    int dim() const noexcept { return d_; }
    std::span<const double> coords() const noexcept { return {c_.data(), static_cast<std::size_t>(d_)}; }
    double operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }

    double norm_squared() const noexcept;
    double norm() const noexcept;
    Element conjugate() const;

    friend bool operator==(const Element&, const Element&) = default;

private:
    int d_ = 1;
    std::array<double, 8> c_{};
};

Element mul(const Element& a, const Element& b);
Element inv(const Element& a);

// Uniform element of {-1/sqrt(d), +1/sqrt(d)}^d.
Element sample_unit(int d, Rng& rng);

// Span versions for hot loops; sizes must agree and be 1, 2, 4 or 8.
void mul_into(std::span<const double> a, std::span<const double> b, std::span<double> out);
void inv_into(std::span<const double> a, std::span<double> out);

class OrthogonalTransform {
public:
    // Reflection I - 2 u u^T restricted to coordinates [offset, n); u has
    // n - offset entries and unit norm.
    struct Reflector {
        std::size_t offset = 0;
        std::vector<double> u;
    };

    explicit OrthogonalTransform(std::size_t n = 0) : n_(n) {}

    std::size_t dim() const noexcept { return n_; }
    std::size_t reflector_count() const noexcept { return reflectors_.size(); }
    const std::vector<Reflector>& reflectors() const noexcept { return reflectors_; }

    // Appends a reflector applied after the existing ones. u is renormalised.
    void push_back(Reflector r);

    // v <- R v, reflectors in stored order. `touched`, when given, is
    // incremented by the number of scalar reads of v and of the reflectors.
    void apply(std::span<double> v, std::size_t* touched = nullptr) const;
    // v <- R^{-1} v = R^T v: same reflectors, reverse order.
    void apply_inverse(std::span<double> v, std::size_t* touched = nullptr) const;

    std::vector<double> apply(std::span<const double> v) const;
    std::vector<double> apply_inverse(std::span<const double> v) const;

    // Dense n x n row-major matrix. Only meant for small n.
    std::vector<double> materialize() const;

    // u64 n, u64 count, then per reflector u64 length L followed by L
    // little-endian binary64 values; the reflector acts on the last L coords.
    std::vector<std::uint8_t> serialize() const;
    static OrthogonalTransform deserialize(std::span<const std::uint8_t> bytes);

private:
    std::size_t n_;
    std::vector<Reflector> reflectors_;
};

// Reflection about the hyperplane orthogonal to u (renormalised).
OrthogonalTransform householder(std::span<const double> u);

// Composition of the last k steps of the recursive Haar construction on O(n).
// The first stored reflector acts on the trailing n - k + 1 coordinates and
// the last one on all n; each maps the leading basis vector of its subspace to
// a uniform point of the unit sphere. k = n gives the Haar measure, k = 0 the
// identity.
OrthogonalTransform sample_orthogonal(std::size_t n, std::size_t k, Rng& rng);

}  // namespace cvqkd::algebra
