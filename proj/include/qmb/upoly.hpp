#pragma once

// Polynomials in the auxiliary variable u (u = q^{2 lambda}) over a coefficient field.

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qmb/coeff.hpp"

namespace qmb {

template <class C>
class UPoly {
public:
    UPoly() = default;
    explicit UPoly(std::vector<C> coeffs) : c_(std::move(coeffs)) { trim(); }
    UPoly(const C& constant) {  // NOLINT(google-explicit-constructor)
        if (!coeff_traits<C>::is_zero(constant)) c_.push_back(constant);
    }

    /// c * u^k
    static UPoly monomial(const C& c, int k) {
        std::vector<C> v(static_cast<std::size_t>(k) + 1, C(0));
        v.back() = c;
        return UPoly(std::move(v));
    }

    const std::vector<C>& coeffs() const { return c_; }
    bool is_zero() const { return c_.empty(); }
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    C coeff(int j) const { return (j >= 0 && j < static_cast<int>(c_.size())) ? c_[static_cast<std::size_t>(j)] : C(0); }

    UPoly& operator+=(const UPoly& o) {
        if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), C(0));
        for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] += o.c_[i];
        trim();
        return *this;
    }
    UPoly& operator-=(const UPoly& o) {
        if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), C(0));
        for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] -= o.c_[i];
        trim();
        return *this;
    }
    friend UPoly operator+(UPoly a, const UPoly& b) { return a += b; }
    friend UPoly operator-(UPoly a, const UPoly& b) { return a -= b; }
    friend UPoly operator-(const UPoly& a) {
        UPoly r = a;
        for (auto& x : r.c_) x = -x;
        return r;
    }
    friend UPoly operator*(const UPoly& a, const UPoly& b) {
        if (a.is_zero() || b.is_zero()) return {};
        std::vector<C> c(a.c_.size() + b.c_.size() - 1, C(0));
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
        return UPoly(std::move(c));
    }
    UPoly& operator*=(const UPoly& o) { return *this = *this * o; }
    UPoly scaled(const C& s) const {
        UPoly r = *this;
        for (auto& x : r.c_) x *= s;
        r.trim();
        return r;
    }
    friend bool operator==(const UPoly& a, const UPoly& b) { return a.c_ == b.c_; }

    /// Horner evaluation at u0.
    C eval(const C& u0) const {
        C acc(0);
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * u0 + *it;
        return acc;
    }

    /// The polynomial P(s u) for a scalar s.
    UPoly dilated(const C& s) const {
        UPoly r = *this;
        C p(1);
        for (auto& x : r.c_) {
            x *= p;
            p *= s;
        }
        r.trim();
        return r;
    }

private:
    void trim() {
        while (!c_.empty() && coeff_traits<C>::is_zero(c_.back())) c_.pop_back();
    }

    std::vector<C> c_;
};

/// Unique polynomial of degree < points.size() through the given (u0, value) pairs.
template <class C>
UPoly<C> upoly_interpolate(const std::vector<std::pair<C, C>>& points) {
    const std::size_t n = points.size();
    if (n == 0) return {};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (coeff_traits<C>::is_zero(points[i].first - points[j].first))
                throw std::invalid_argument("duplicate interpolation abscissa");
    // Newton divided differences, then expand the Newton form.
    std::vector<C> dd;
    dd.reserve(n);
    for (const auto& p : points) dd.push_back(p.second);
    for (std::size_t level = 1; level < n; ++level)
        for (std::size_t i = n - 1; i >= level; --i)
            dd[i] = (dd[i] - dd[i - 1]) / (points[i].first - points[i - level].first);
    UPoly<C> result(dd[n - 1]);
    for (std::size_t i = n - 1; i-- > 0;) {
        // result = result * (u - x_i) + dd[i]
        result = result * UPoly<C>(std::vector<C>{-points[i].first, C(1)}) + UPoly<C>(dd[i]);
    }
    return result;
}

}  // namespace qmb

namespace qmb {

template <class C>
struct coeff_traits<UPoly<C>> {
    static constexpr bool exact = coeff_traits<C>::exact;
    static bool is_zero(const UPoly<C>& p) { return p.is_zero(); }
};

/// Evaluates an exact u-polynomial at q = q0 and u = u0.
inline Real eval_upoly(const UPoly<QRational>& p, const Real& q0, const Real& u0) {
    Real acc = 0;
    const auto& c = p.coeffs();
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * u0 + qr_eval(*it, q0);
    return acc;
}

}  // namespace qmb
