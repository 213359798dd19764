#include "cvqkd/algebra.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <string>

#include "cvqkd/error.hpp"

namespace cvqkd::algebra {

namespace {

void check_dim(std::size_t d) {
    require(d == 1 || d == 2 || d == 4 || d == 8, ErrorKind::Dimension,
            "division algebra dimension must be 1, 2, 4 or 8, got " + std::to_string(d));
}

void conj_raw(const double* x, std::size_t n, double* out) {
    out[0] = x[0];
    for (std::size_t i = 1; i < n; ++i) out[i] = -x[i];
}

// (a,b)(c,d) = (ac - d*b, da + bc*)
void mul_raw(const double* x, const double* y, std::size_t n, double* out) {
    if (n == 1) {
        out[0] = x[0] * y[0];
        return;
    }
    const std::size_t h = n / 2;
    const double* a = x;
    const double* b = x + h;
    const double* c = y;
    const double* d = y + h;
    double cc[4], dc[4], t1[4], t2[4];
    conj_raw(c, h, cc);
    conj_raw(d, h, dc);
    mul_raw(a, c, h, t1);
    mul_raw(dc, b, h, t2);
    for (std::size_t i = 0; i < h; ++i) out[i] = t1[i] - t2[i];
    mul_raw(d, a, h, t1);
    mul_raw(b, cc, h, t2);
    for (std::size_t i = 0; i < h; ++i) out[h + i] = t1[i] + t2[i];
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64(std::span<const std::uint8_t> bytes, std::size_t& pos) {
    require(pos + 8 <= bytes.size(), ErrorKind::Io, "transform description truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[pos + i]) << (8 * i);
    pos += 8;
    return v;
}

double normalise(std::vector<double>& u) {
    double s = 0.0;
    for (double x : u) s += x * x;
    const double n = std::sqrt(s);
    require(n > 0.0 && std::isfinite(n), ErrorKind::Singular, "reflector vector has zero norm");
    for (double& x : u) x /= n;
    return n;
}

}  // namespace

bool is_division_dimension(int d) noexcept { return d == 1 || d == 2 || d == 4 || d == 8; }

Element::Element(std::span<const double> coords) {
    check_dim(coords.size());
    d_ = static_cast<int>(coords.size());
    std::copy(coords.begin(), coords.end(), c_.begin());
}

Element::Element(std::initializer_list<double> coords)
    : Element(std::span<const double>(coords.begin(), coords.size())) {}

Element Element::identity(int d) {
    Element e = zero(d);
    e.c_[0] = 1.0;
    return e;
}

Element Element::zero(int d) {
    check_dim(static_cast<std::size_t>(d));
    Element e;
    e.d_ = d;
    return e;
}

double Element::norm_squared() const noexcept {
    double s = 0.0;
    for (int i = 0; i < d_; ++i) s += c_[i] * c_[i];
    return s;
}

double Element::norm() const noexcept { return std::sqrt(norm_squared()); }

Element Element::conjugate() const {
    Element e = *this;
    for (int i = 1; i < d_; ++i) e.c_[i] = -e.c_[i];
    return e;
}

void mul_into(std::span<const double> a, std::span<const double> b, std::span<double> out) {
    require(a.size() == b.size() && a.size() == out.size(), ErrorKind::Dimension,
            "mul: operand dimensions differ");
    check_dim(a.size());
    double tmp[8];
    mul_raw(a.data(), b.data(), a.size(), tmp);
    std::copy_n(tmp, a.size(), out.begin());
}

void inv_into(std::span<const double> a, std::span<double> out) {
    require(a.size() == out.size(), ErrorKind::Dimension, "inv: output dimension differs");
    check_dim(a.size());
    double n2 = 0.0;
    for (double x : a) n2 += x * x;
    require(n2 > 0.0, ErrorKind::Singular, "inv: zero element");
    out[0] = a[0] / n2;
    for (std::size_t i = 1; i < a.size(); ++i) out[i] = -a[i] / n2;
}

Element mul(const Element& a, const Element& b) {
    require(a.dim() == b.dim(), ErrorKind::Dimension, "mul: operand dimensions differ");
    double tmp[8];
    mul_raw(a.coords().data(), b.coords().data(), static_cast<std::size_t>(a.dim()), tmp);
    return Element(std::span<const double>(tmp, static_cast<std::size_t>(a.dim())));
}

Element inv(const Element& a) {
    double tmp[8];
    inv_into(a.coords(), std::span<double>(tmp, static_cast<std::size_t>(a.dim())));
    return Element(std::span<const double>(tmp, static_cast<std::size_t>(a.dim())));
}

Element sample_unit(int d, Rng& rng) {
    check_dim(static_cast<std::size_t>(d));
    const double s = 1.0 / std::sqrt(static_cast<double>(d));
    double tmp[8];
    for (int i = 0; i < d; ++i) tmp[i] = rng.bit() ? s : -s;
    return Element(std::span<const double>(tmp, static_cast<std::size_t>(d)));
}

void OrthogonalTransform::push_back(Reflector r) {
    require(r.offset < n_ && r.u.size() == n_ - r.offset, ErrorKind::Dimension,
            "reflector does not fit the ambient dimension");
    normalise(r.u);
    reflectors_.push_back(std::move(r));
}

namespace {

void reflect(const OrthogonalTransform::Reflector& r, std::span<double> v, std::size_t* touched) {
    const std::size_t m = r.u.size();
    double* x = v.data() + r.offset;
    double dot = 0.0;
    for (std::size_t i = 0; i < m; ++i) dot += r.u[i] * x[i];
    const double s = 2.0 * dot;
    for (std::size_t i = 0; i < m; ++i) x[i] -= s * r.u[i];
    if (touched) *touched += 4 * m;
}

}  // namespace

void OrthogonalTransform::apply(std::span<double> v, std::size_t* touched) const {
    require(v.size() == n_, ErrorKind::Dimension, "apply: vector length differs from transform dimension");
    for (const auto& r : reflectors_) reflect(r, v, touched);
}

void OrthogonalTransform::apply_inverse(std::span<double> v, std::size_t* touched) const {
    require(v.size() == n_, ErrorKind::Dimension, "apply_inverse: vector length differs from transform dimension");
    for (auto it = reflectors_.rbegin(); it != reflectors_.rend(); ++it) reflect(*it, v, touched);
}

std::vector<double> OrthogonalTransform::apply(std::span<const double> v) const {
    std::vector<double> out(v.begin(), v.end());
    apply(std::span<double>(out));
    return out;
}

std::vector<double> OrthogonalTransform::apply_inverse(std::span<const double> v) const {
    std::vector<double> out(v.begin(), v.end());
    apply_inverse(std::span<double>(out));
    return out;
}

std::vector<double> OrthogonalTransform::materialize() const {
    // Column j is R e_j.
    std::vector<double> m(n_ * n_, 0.0);
    std::vector<double> col(n_);
    for (std::size_t j = 0; j < n_; ++j) {
        std::fill(col.begin(), col.end(), 0.0);
        col[j] = 1.0;
        apply(std::span<double>(col));
        for (std::size_t i = 0; i < n_; ++i) m[i * n_ + j] = col[i];
    }
    return m;
}

std::vector<std::uint8_t> OrthogonalTransform::serialize() const {
    std::vector<std::uint8_t> out;
    put_u64(out, n_);
    put_u64(out, reflectors_.size());
    for (const auto& r : reflectors_) {
        put_u64(out, r.u.size());
        for (double x : r.u) put_u64(out, std::bit_cast<std::uint64_t>(x));
    }
    return out;
}

OrthogonalTransform OrthogonalTransform::deserialize(std::span<const std::uint8_t> bytes) {
    std::size_t pos = 0;
    const std::uint64_t n = get_u64(bytes, pos);
    const std::uint64_t k = get_u64(bytes, pos);
    require(k <= bytes.size() / 8, ErrorKind::Io, "transform description: implausible reflector count");
    OrthogonalTransform t(n);
    for (std::uint64_t j = 0; j < k; ++j) {
        const std::uint64_t len = get_u64(bytes, pos);
        require(len >= 1 && len <= n, ErrorKind::Io, "transform description: bad reflector length");
        Reflector r;
        r.offset = n - len;
        r.u.resize(len);
        double norm2 = 0.0;
        for (auto& x : r.u) {
            x = std::bit_cast<double>(get_u64(bytes, pos));
            norm2 += x * x;
        }
        require(std::abs(norm2 - 1.0) < 1e-9, ErrorKind::Io, "transform description: reflector is not a unit vector");
        // stored vectors are already unit; keep them bit-exact
        t.reflectors_.push_back(std::move(r));
    }
    require(pos == bytes.size(), ErrorKind::Io, "transform description: trailing bytes");
    return t;
}

OrthogonalTransform householder(std::span<const double> u) {
    require(!u.empty(), ErrorKind::Dimension, "householder: empty vector");
    OrthogonalTransform t(u.size());
    t.push_back({0, std::vector<double>(u.begin(), u.end())});
    return t;
}

OrthogonalTransform sample_orthogonal(std::size_t n, std::size_t k, Rng& rng) {
    require(n >= 1 && k <= n, ErrorKind::InvalidArgument, "sample_orthogonal: need n >= 1 and k <= n");
    OrthogonalTransform t(n);
    for (std::size_t j = 0; j < k; ++j) {
        const std::size_t m = n - k + 1 + j;
        std::vector<double> w(m);
        for (auto& x : w) x = rng.normal();
        normalise(w);
        // u = (e_1 - w)/|e_1 - w| sends e_1 to w; w == e_1 is a probability-zero
        // event where the step is the identity.
        std::vector<double> u = w;
        for (auto& x : u) x = -x;
        u[0] += 1.0;
        double s = 0.0;
        for (double x : u) s += x * x;
        if (s < 1e-24) continue;
        t.push_back({n - m, std::move(u)});
    }
    return t;
}

}  // namespace cvqkd::algebra
