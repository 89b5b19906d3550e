#pragma once

// Uniform access to the two coefficient rings: exact Q(q) and working-precision reals.

#include <string>

#include "qmb/qrational.hpp"
#include "qmb/real.hpp"

namespace qmb {

template <class C>
struct coeff_traits;

template <>
struct coeff_traits<QRational> {
    static constexpr bool exact = true;
    static bool is_zero(const QRational& x) { return x.is_zero(); }
    static std::string to_string(const QRational& x) { return x.to_string(); }
    static QRational parse(const std::string& s) { return QRational::parse(s); }
    static Real to_real(const QRational& x, const Real& q0) { return qr_eval(x, q0); }
};

template <>
struct coeff_traits<Real> {
    static constexpr bool exact = false;
    static bool is_zero(const Real& x) { return x == 0; }
    static std::string to_string(const Real& x) { return to_decimal(x, static_cast<int>(working_digits())); }
    static Real parse(const std::string& s) { return Real(s); }
    static Real to_real(const Real& x, const Real&) { return x; }
};

template <class C>
concept Coefficient = requires { coeff_traits<C>::exact; };

}  // namespace qmb
