#pragma once

// Working-precision real numbers used for every numeric evaluation.

#include <cstdlib>
#include <string>

#include <boost/multiprecision/mpfr.hpp>

namespace qmb {

using Real = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>, boost::multiprecision::et_off>;

inline constexpr unsigned kDefaultDigits = 50;

/// Sets the number of significant decimal digits for all subsequently created Reals.
inline void set_working_digits(unsigned digits) { Real::default_precision(digits); }

inline unsigned working_digits() { return Real::default_precision(); }

/// Reads QMB_DIGITS from the environment, falling back to 50 digits.
inline unsigned init_precision_from_env() {
    unsigned digits = kDefaultDigits;
    if (const char* env = std::getenv("QMB_DIGITS")) {
        try {
            int v = std::stoi(env);
            if (v >= 16 && v <= 2000) digits = static_cast<unsigned>(v);
        } catch (...) {
        }
    }
    set_working_digits(digits);
    return digits;
}

namespace detail {
struct PrecisionInit {
    PrecisionInit() { init_precision_from_env(); }
};
inline const PrecisionInit precision_init{};
}  // namespace detail

inline std::string to_decimal(const Real& x, int digits = 20) {
    return x.str(digits, std::ios_base::scientific);
}

}  // namespace qmb
