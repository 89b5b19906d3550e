#pragma once

// Exact coefficient arithmetic: polynomials in q over Q and the field Q(q).

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "qmb/real.hpp"

namespace qmb {

using Rational = mpq_class;

inline Real to_real(const Rational& r) { return Real(r.get_mpq_t()); }

/// Dense polynomial in q with rational coefficients; coeffs()[i] multiplies q^i.
class QPoly {
public:
    QPoly() = default;
    explicit QPoly(std::vector<Rational> coeffs) : c_(std::move(coeffs)) { trim(); }
    QPoly(long v) {  // NOLINT(google-explicit-constructor)
        if (v != 0) c_.emplace_back(v);
    }
    QPoly(const Rational& v) {  // NOLINT(google-explicit-constructor)
        if (sgn(v) != 0) c_.push_back(v);
    }

    static QPoly monomial(const Rational& coeff, int power) {
        if (power < 0) throw std::invalid_argument("negative power in QPoly::monomial");
        if (sgn(coeff) == 0) return {};
        std::vector<Rational> c(static_cast<std::size_t>(power) + 1);
        c.back() = coeff;
        return QPoly(std::move(c));
    }

    const std::vector<Rational>& coeffs() const { return c_; }
    bool is_zero() const { return c_.empty(); }
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    const Rational& lead() const { return c_.back(); }

    /// Exponent of the lowest nonzero term; -1 for the zero polynomial.
    int low_degree() const {
        for (std::size_t i = 0; i < c_.size(); ++i)
            if (sgn(c_[i]) != 0) return static_cast<int>(i);
        return -1;
    }
    bool is_monomial() const { return !c_.empty() && low_degree() == degree(); }
    bool is_one() const { return c_.size() == 1 && c_[0] == 1; }

    Rational coeff(int i) const {
        return (i >= 0 && i < static_cast<int>(c_.size())) ? c_[static_cast<std::size_t>(i)] : Rational(0);
    }

    QPoly shifted_down(int k) const {
        if (k == 0) return *this;
        return QPoly(std::vector<Rational>(c_.begin() + k, c_.end()));
    }
    QPoly shifted_up(int k) const {
        if (k == 0 || is_zero()) return *this;
        std::vector<Rational> c(static_cast<std::size_t>(k), Rational(0));
        c.insert(c.end(), c_.begin(), c_.end());
        return QPoly(std::move(c));
    }

    QPoly& operator+=(const QPoly& o) {
        if (o.c_.size() > c_.size()) c_.resize(o.c_.size());
        for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] += o.c_[i];
        trim();
        return *this;
    }
    QPoly& operator-=(const QPoly& o) {
        if (o.c_.size() > c_.size()) c_.resize(o.c_.size());
        for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] -= o.c_[i];
        trim();
        return *this;
    }
    friend QPoly operator+(QPoly a, const QPoly& b) { return a += b; }
    friend QPoly operator-(QPoly a, const QPoly& b) { return a -= b; }
    friend QPoly operator-(QPoly a) {
        for (auto& x : a.c_) x = -x;
        return a;
    }
    friend QPoly operator*(const QPoly& a, const QPoly& b) {
        if (a.is_zero() || b.is_zero()) return {};
        std::vector<Rational> c(a.c_.size() + b.c_.size() - 1);
        for (std::size_t i = 0; i < a.c_.size(); ++i) {
            if (sgn(a.c_[i]) == 0) continue;
            for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
        }
        return QPoly(std::move(c));
    }
    QPoly scaled(const Rational& s) const {
        if (sgn(s) == 0) return {};
        QPoly r = *this;
        for (auto& x : r.c_) x *= s;
        return r;
    }
    QPoly& operator*=(const QPoly& o) { return *this = *this * o; }

    friend bool operator==(const QPoly& a, const QPoly& b) { return a.c_ == b.c_; }

    /// Euclidean division; throws on a zero divisor.
    static std::pair<QPoly, QPoly> divmod(QPoly num, const QPoly& den) {
        if (den.is_zero()) throw std::domain_error("division by zero polynomial");
        if (num.degree() < den.degree()) return {QPoly(), std::move(num)};
        std::vector<Rational> quot(static_cast<std::size_t>(num.degree() - den.degree() + 1));
        const Rational inv_lead = 1 / den.lead();
        auto& r = num.c_;
        for (int k = num.degree() - den.degree(); k >= 0; --k) {
            auto top = static_cast<std::size_t>(k + den.degree());
            if (top >= r.size() || sgn(r[top]) == 0) continue;
            Rational f = r[top] * inv_lead;
            quot[static_cast<std::size_t>(k)] = f;
            for (std::size_t j = 0; j < den.c_.size(); ++j) r[static_cast<std::size_t>(k) + j] -= f * den.c_[j];
        }
        num.trim();
        return {QPoly(std::move(quot)), std::move(num)};
    }

    QPoly monic() const { return is_zero() ? *this : scaled(1 / lead()); }

    static QPoly gcd(QPoly a, QPoly b) {
        while (!b.is_zero()) {
            auto r = divmod(std::move(a), b).second;
            a = std::move(b);
            b = r.monic();
        }
        return a.monic();
    }

    Real eval(const Real& x) const {
        Real acc = 0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + to_real(*it);
        return acc;
    }
    /// Sum of |c_i| |x|^i, the scale against which cancellation at x is judged.
    Real eval_abs(const Real& x) const {
        Real acc = 0;
        Real ax = abs(x);
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * ax + abs(to_real(*it));
        return acc;
    }

    /// Sparse "c*q^k" term list; "0" for the zero polynomial.
    std::string to_string() const {
        if (is_zero()) return "0";
        std::string out;
        for (std::size_t i = 0; i < c_.size(); ++i) {
            if (sgn(c_[i]) == 0) continue;
            if (!out.empty()) out += " + ";
            out += c_[i].get_str() + "*q^" + std::to_string(i);
        }
        return out;
    }

private:
    void trim() {
        while (!c_.empty() && sgn(c_.back()) == 0) c_.pop_back();
    }

    std::vector<Rational> c_;
};

/// Element of Q(q) in canonical form: coprime numerator and monic denominator.
class QRational {
public:
    QRational() : den_(1) {}
    QRational(long v) : num_(v), den_(1) {}  // NOLINT(google-explicit-constructor)
    QRational(const Rational& v) : num_(v), den_(1) {}  // NOLINT(google-explicit-constructor)
    explicit QRational(QPoly p) : num_(std::move(p)), den_(1) {}

    /// Canonical reduction of num/den.
    static QRational normalize(QPoly num, QPoly den) {
        if (den.is_zero()) throw std::domain_error("division by zero polynomial");
        QRational r;
        if (num.is_zero()) return r;
        if (den.is_monomial()) {
            // den = c q^k: only powers of q can cancel.
            int k = den.degree();
            Rational c = den.lead();
            int shift = std::min(k, num.low_degree());
            r.num_ = num.shifted_down(shift);
            if (c != 1) r.num_ = r.num_.scaled(1 / c);
            r.den_ = QPoly::monomial(1, k - shift);
            return r;
        }
        QPoly g = QPoly::gcd(num, den);
        if (!g.is_one()) {
            num = QPoly::divmod(std::move(num), g).first;
            den = QPoly::divmod(std::move(den), g).first;
        }
        Rational lc = den.lead();
        if (lc != 1) {
            num = num.scaled(1 / lc);
            den = den.scaled(1 / lc);
        }
        r.num_ = std::move(num);
        r.den_ = std::move(den);
        return r;
    }

    static QRational q() { return QRational(QPoly::monomial(1, 1)); }
    /// q^k for any integer k.
    static QRational q_pow(int k) {
        QRational r;
        if (k >= 0) {
            r.num_ = QPoly::monomial(1, k);
        } else {
            r.num_ = QPoly(1);
            r.den_ = QPoly::monomial(1, -k);
        }
        return r;
    }

    const QPoly& num() const { return num_; }
    const QPoly& den() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }
    bool is_one() const { return num_.is_one() && den_.is_one(); }
    bool is_laurent() const { return den_.is_monomial(); }

    friend QRational operator+(const QRational& a, const QRational& b) {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        if (a.den_ == b.den_) return normalize(a.num_ + b.num_, a.den_);
        if (a.is_laurent() && b.is_laurent()) {
            int da = a.den_.degree(), db = b.den_.degree(), d = std::max(da, db);
            return normalize(a.num_.shifted_up(d - da) + b.num_.shifted_up(d - db), QPoly::monomial(1, d));
        }
        return normalize(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
    }
    friend QRational operator-(const QRational& a) {
        QRational r = a;
        r.num_ = -r.num_;
        return r;
    }
    friend QRational operator-(const QRational& a, const QRational& b) { return a + (-b); }
    friend QRational operator*(const QRational& a, const QRational& b) {
        if (a.is_zero() || b.is_zero()) return {};
        if (a.den_.is_one() && b.den_.is_one()) return QRational(a.num_ * b.num_);
        if (a.is_laurent() && b.is_laurent())
            return normalize(a.num_ * b.num_, QPoly::monomial(1, a.den_.degree() + b.den_.degree()));
        return normalize(a.num_ * b.num_, a.den_ * b.den_);
    }
    QRational inverse() const {
        if (is_zero()) throw std::domain_error("division by zero polynomial");
        return normalize(den_, num_);
    }
    friend QRational operator/(const QRational& a, const QRational& b) { return a * b.inverse(); }
    QRational& operator+=(const QRational& o) { return *this = *this + o; }
    QRational& operator-=(const QRational& o) { return *this = *this - o; }
    QRational& operator*=(const QRational& o) { return *this = *this * o; }
    QRational& operator/=(const QRational& o) { return *this = *this / o; }

    friend bool operator==(const QRational& a, const QRational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }

    /// x^k for integer k (negative powers invert).
    QRational pow(int k) const {
        if (k < 0) return inverse().pow(-k);
        QRational result(1), base = *this;
        while (k > 0) {
            if (k & 1) result *= base;
            base *= base;
            k >>= 1;
        }
        return result;
    }

    /// Substitutes q -> q^k (k >= 1).
    QRational subst_q_power(int k) const {
        auto expand = [k](const QPoly& p) {
            std::vector<Rational> c(p.is_zero() ? 0 : static_cast<std::size_t>(p.degree() * k + 1));
            for (int i = 0; i <= p.degree(); ++i) c[static_cast<std::size_t>(i * k)] = p.coeff(i);
            return QPoly(std::move(c));
        };
        return normalize(expand(num_), expand(den_));
    }

    std::string to_string() const {
        std::string s = "(" + num_.to_string() + ")";
        if (!den_.is_one()) s += "/(" + den_.to_string() + ")";
        return s;
    }

    static QRational parse(std::string_view text);

private:
    QPoly num_;
    QPoly den_;
};

/// Evaluates num(q0)/den(q0) without any cancellation; throws at a pole.
inline Real eval_ratio(const QPoly& num, const QPoly& den, const Real& q0) {
    Real d = den.eval(q0);
    Real scale = den.eval_abs(q0);
    Real tiny = pow(Real(10), -static_cast<int>(working_digits()) + 5);
    if (d == 0 || abs(d) <= tiny * scale) throw std::domain_error("pole at evaluation point");
    return num.eval(q0) / d;
}

inline Real qr_eval(const QRational& x, const Real& q0) { return eval_ratio(x.num(), x.den(), q0); }

namespace detail {

class PolyParser {
public:
    explicit PolyParser(std::string_view s) : s_(s) {}

    QRational parse_rational_function() {
        QRational num = parse_group();
        skip_ws();
        if (peek() == '/') {
            ++pos_;
            QRational den = parse_group();
            num = num / den;
        }
        skip_ws();
        if (pos_ != s_.size()) fail("trailing characters");
        return num;
    }

private:
    // "(" terms ")" or a bare term list.
    QRational parse_group() {
        skip_ws();
        if (peek() == '(') {
            ++pos_;
            QRational r = parse_terms();
            skip_ws();
            if (peek() != ')') fail("expected ')'");
            ++pos_;
            return r;
        }
        return parse_terms();
    }

    QRational parse_terms() {
        QRational acc;
        bool first = true;
        for (;;) {
            skip_ws();
            int sign = 1;
            if (!first) {
                if (peek() == '+') {
                    ++pos_;
                } else if (peek() == '-') {
                    ++pos_;
                    sign = -1;
                } else {
                    break;
                }
                skip_ws();
            }
            while (peek() == '-' || peek() == '+') {
                if (peek() == '-') sign = -sign;
                ++pos_;
                skip_ws();
            }
            QRational t = parse_term();
            acc += sign > 0 ? t : -t;
            first = false;
        }
        return acc;
    }

    QRational parse_term() {
        Rational coeff(1);
        bool have_coeff = false;
        if (std::isdigit(static_cast<unsigned char>(peek()))) {
            coeff = parse_number();
            have_coeff = true;
            skip_ws();
            if (peek() != '*') return QRational(coeff);
            ++pos_;
            skip_ws();
        }
        if (peek() != 'q') {
            if (have_coeff) fail("expected 'q'");
            fail("expected a term");
        }
        ++pos_;
        int power = 1;
        skip_ws();
        if (peek() == '^') {
            ++pos_;
            power = parse_int();
        }
        return QRational(coeff) * QRational::q_pow(power);
    }

    Rational parse_number() {
        std::size_t start = pos_;
        while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
        if (peek() == '/' && pos_ + 1 < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_ + 1]))) {
            ++pos_;
            while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
        }
        Rational r(std::string(s_.substr(start, pos_ - start)));
        r.canonicalize();
        return r;
    }

    int parse_int() {
        skip_ws();
        int sign = 1;
        if (peek() == '-') {
            sign = -1;
            ++pos_;
        } else if (peek() == '+') {
            ++pos_;
        }
        if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected exponent");
        long v = 0;
        while (std::isdigit(static_cast<unsigned char>(peek()))) {
            v = v * 10 + (s_[pos_++] - '0');
            if (v > 100000) fail("exponent too large");
        }
        return sign * static_cast<int>(v);
    }

    char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    [[noreturn]] void fail(const char* what) const {
        throw std::invalid_argument("cannot parse scalar '" + std::string(s_) + "' at offset " +
                                    std::to_string(pos_) + ": " + what);
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline QRational QRational::parse(std::string_view text) {
    return detail::PolyParser(text).parse_rational_function();
}

}  // namespace qmb

namespace qmb {

/// Canonical reduced form of num/den.
inline QRational qr_normalize(const QPoly& num, const QPoly& den) { return QRational::normalize(num, den); }

}  // namespace qmb
