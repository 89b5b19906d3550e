#pragma once

// Kernels in C[Mat]_q^op (x) C[Mat-bar]_q, truncated by bidegree, and the q-Bergman kernels.
//
// A kernel term p (x) r pairs a holomorphic monomial p with a z*-only monomial r of the
// same degree. The left factor multiplies in the opposite order:
//   (p1 (x) r1)(p2 (x) r2) = (p2 p1) (x) (r1 r2).

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qmb/integral.hpp"
#include "qmb/upoly.hpp"

namespace qmb {

template <class C>
class KernelElement {
public:
    using Key = std::pair<Monomial, Monomial>;
    using Terms = std::map<Key, C>;

    KernelElement() = default;
    KernelElement(Shape shape, int trunc) : shape_(shape), trunc_(trunc) {
        if (trunc < 0) throw std::invalid_argument("truncation order must be >= 0");
    }

    static KernelElement identity(Shape shape, int trunc) {
        KernelElement k(shape, trunc);
        k.add(Monomial{}, Monomial{}, C(1));
        return k;
    }

    const Shape& shape() const { return shape_; }
    int trunc() const { return trunc_; }
    const Terms& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    /// Adds c (left (x) right); terms above the truncation order are dropped.
    void add(const Monomial& left, const Monomial& right, const C& c) {
        if (!left.holomorphic() || right.zdeg() != 0) throw std::invalid_argument("kernel factors have wrong type");
        if (left.zdeg() != right.zsdeg()) throw std::invalid_argument("unbalanced kernel term");
        if (left.zdeg() > trunc_ || coeff_traits<C>::is_zero(c)) return;
        auto [it, inserted] = terms_.try_emplace(Key{left, right}, c);
        if (!inserted) {
            it->second += c;
            if (coeff_traits<C>::is_zero(it->second)) terms_.erase(it);
        }
    }

    C coeff(const Monomial& left, const Monomial& right) const {
        auto it = terms_.find(Key{left, right});
        return it == terms_.end() ? C(0) : it->second;
    }

    /// Terms of bidegree exactly (d, d).
    KernelElement component(int d) const {
        KernelElement r(shape_, trunc_);
        for (const auto& [key, c] : terms_)
            if (key.first.zdeg() == d) r.terms_.emplace(key, c);
        return r;
    }

    KernelElement truncated(int trunc) const {
        KernelElement r(shape_, trunc);
        for (const auto& [key, c] : terms_) r.add(key.first, key.second, c);
        return r;
    }

    KernelElement& operator+=(const KernelElement& o) {
        for (const auto& [key, c] : o.terms_) add(key.first, key.second, c);
        return *this;
    }
    KernelElement& operator-=(const KernelElement& o) {
        for (const auto& [key, c] : o.terms_) add(key.first, key.second, -c);
        return *this;
    }
    friend KernelElement operator+(KernelElement a, const KernelElement& b) { return a += b; }
    friend KernelElement operator-(KernelElement a, const KernelElement& b) { return a -= b; }
    friend bool operator==(const KernelElement& a, const KernelElement& b) {
        return a.shape_ == b.shape_ && a.terms_ == b.terms_;
    }

    template <class F>
    auto map_coeffs(F&& f) const {
        using D = std::decay_t<decltype(f(std::declval<const C&>()))>;
        KernelElement<D> r(shape_, trunc_);
        for (const auto& [key, c] : terms_) r.add(key.first, key.second, f(c));
        return r;
    }

private:
    Shape shape_;
    int trunc_ = 0;
    Terms terms_;
};

/// Polynomial kernel: coefficients are polynomials in u over Q(q).
using PolyKernel = KernelElement<UPoly<QRational>>;

/// Residual of a commutator check.
struct CommutatorResult {
    bool zero = false;
    PolyKernel residual;
};

/// Exact kernel algebra over a fixed (m, n).
class KernelAlgebra {
public:
    using Poly = UPoly<QRational>;

    explicit KernelAlgebra(const Algebra<QRational>& algebra) : alg_(algebra) {}

    const Algebra<QRational>& algebra() const { return alg_; }
    const Shape& shape() const { return alg_.shape(); }

    PolyKernel one(int trunc) const { return PolyKernel::identity(shape(), trunc); }

    /// chi_k = sum over k-subsets J', J'' of z^{wedge k} (x) (z^{wedge k})*.
    PolyKernel chi(int k) const {
        if (k < 1 || k > shape().m) throw std::out_of_range("chi index out of range 1..m");
        PolyKernel out(shape(), k);
        for (const auto& rows : Algebra<QRational>::subsets(shape().m, k))
            for (const auto& cols : Algebra<QRational>::subsets(shape().n, k)) {
                Element<QRational> minor = alg_.qminor(rows, cols);
                Element<QRational> conj = alg_.star(minor);
                for (const auto& [lm, lc] : minor.terms())
                    for (const auto& [rm, rc] : conj.terms()) out.add(lm, rm, Poly(lc * rc));
            }
        return out;
    }

    PolyKernel mul(const PolyKernel& a, const PolyKernel& b, int trunc) const {
        if (!(a.shape() == shape()) || !(b.shape() == shape())) throw std::invalid_argument("dimension mismatch");
        PolyKernel out(shape(), trunc);
        for (const auto& [ka, ca] : a.terms())
            for (const auto& [kb, cb] : b.terms()) {
                if (ka.first.zdeg() + kb.first.zdeg() > trunc) continue;
                Element<QRational> left = alg_.mul_monomials(kb.first, ka.first);
                Element<QRational> right = alg_.mul_monomials(ka.second, kb.second);
                Poly c = ca * cb;
                for (const auto& [lm, lc] : left.terms())
                    for (const auto& [rm, rc] : right.terms()) out.add(lm, rm, c.scaled(lc * rc));
            }
        return out;
    }

    /// Inverse of 1 + A' by the truncated geometric series.
    PolyKernel invert(const PolyKernel& a, int trunc) const {
        PolyKernel rest = a.truncated(trunc);
        Poly constant = rest.coeff(Monomial{}, Monomial{});
        if (!(constant == Poly(QRational(1)))) throw std::domain_error("not invertible in truncated form");
        rest -= one(trunc);
        PolyKernel result = one(trunc);
        PolyKernel power = one(trunc);
        for (int i = 1; i <= trunc; ++i) {
            power = mul(power, rest, trunc);
            if (power.is_zero()) break;
            if (i % 2 == 1)
                result -= power;
            else
                result += power;
        }
        return result;
    }

    /// 1 + sum_k (-x)^k chi_k for a scalar x.
    PolyKernel factor(const QRational& x, int trunc) const {
        PolyKernel out = one(trunc);
        QRational p(1);
        for (int k = 1; k <= shape().m; ++k) {
            p *= -x;
            if (k > trunc) break;
            const PolyKernel ck = chi(k);
            for (const auto& [key, c] : ck.terms()) out.add(key.first, key.second, c.scaled(p));
        }
        return out;
    }

    /// K_l = prod_{j=l}^{-1} (1 + sum_k (-q^{2j})^k chi_k), leftmost factor j = l.
    PolyKernel k_finite(int l, int trunc) const {
        if (l > -1) throw std::invalid_argument("K_finite needs l <= -1");
        PolyKernel acc = one(trunc);
        for (int j = -1; j >= l; --j) acc = mul(factor(QRational::q_pow(2 * j), trunc), acc, trunc);
        return acc;
    }

    /// The polynomial kernel K(u) with K(q^{2l}) = K_l, solved degree by degree from
    /// K(u) = (1 + sum_k (-u)^k chi_k) K(q^2 u) and K(1) = 1.
    PolyKernel k_poly(int trunc) const {
        std::vector<PolyKernel> parts;
        parts.push_back(one(trunc));
        const QRational q2 = QRational::q_pow(2);
        std::vector<PolyKernel> chis;
        for (int k = 1; k <= shape().m; ++k) chis.push_back(chi(k));
        for (int d = 1; d <= trunc; ++d) {
            PolyKernel rhs(shape(), trunc);
            for (int k = 1; k <= std::min(shape().m, d); ++k) {
                PolyKernel dilated = parts[static_cast<std::size_t>(d - k)].map_coeffs(
                    [&](const Poly& p) { return p.dilated(q2); });
                PolyKernel prod = mul(chis[static_cast<std::size_t>(k - 1)], dilated, trunc);
                Poly shift = Poly::monomial(QRational(k % 2 == 0 ? 1 : -1), k);
                for (const auto& [key, c] : prod.terms()) rhs.add(key.first, key.second, c * shift);
            }
            PolyKernel kd(shape(), trunc);
            for (const auto& [key, r] : rhs.terms()) {
                if (!r.coeff(0).is_zero()) throw std::logic_error("functional equation has a u^0 source term");
                std::vector<QRational> c(static_cast<std::size_t>(r.degree()) + 1);
                QRational sum;
                for (int j = 1; j <= r.degree(); ++j) {
                    c[static_cast<std::size_t>(j)] = r.coeff(j) / (QRational(1) - QRational::q_pow(2 * j));
                    sum += c[static_cast<std::size_t>(j)];
                }
                c[0] = -sum;
                kd.add(key.first, key.second, Poly(std::move(c)));
            }
            parts.push_back(std::move(kd));
        }
        PolyKernel out(shape(), trunc);
        for (const auto& part : parts) out += part;
        return out;
    }

    /// K(u0) with constant coefficients.
    static PolyKernel specialize(const PolyKernel& k, const QRational& u0) {
        return k.map_coeffs([&](const Poly& p) { return Poly(p.eval(u0)); });
    }

    /// K_lambda for integral lambda: u = q^{2 lambda}, exact.
    PolyKernel k_lambda(int lambda, int trunc) const { return specialize(k_poly(trunc), QRational::q_pow(2 * lambda)); }

    /// [chi_j, chi_k] truncated at trunc.
    CommutatorResult commutator(int j, int k, int trunc) const {
        PolyKernel a = chi(j), b = chi(k);
        PolyKernel res = mul(a, b, trunc) - mul(b, a, trunc);
        return {res.is_zero(), res};
    }

private:
    const Algebra<QRational>& alg_;
};

/// K_lambda at numeric q0 and real lambda: u0 = q0^{2 lambda}.
inline KernelElement<Real> k_lambda_numeric(const PolyKernel& k_poly, const Real& q0, const Real& lambda) {
    const Real u0 = pow(q0, 2 * lambda);
    return k_poly.map_coeffs([&](const UPoly<QRational>& p) { return eval_upoly(p, q0, u0); });
}

/// (id (x) nu_lambda)(K_lambda (1 (x) f)) = sum c p nu_lambda(r f).
inline Element<Real> bergman_apply(const NumericModel& model, const KernelElement<Real>& kernel,
                                   const Element<Real>& f, const IntegralParams& params) {
    params.validate(model.shape());
    if (kernel.trunc() < f.max_zdeg() + f.max_zsdeg())
        throw std::invalid_argument("kernel truncation below the degree of the input");
    const Algebra<Real>& alg = model.algebra();
    std::vector<int> shifts;  // zdeg - zsdeg values present in f
    for (const auto& [mono, c] : f.terms()) {
        int s = mono.zdeg() - mono.zsdeg();
        if (s >= 0 && std::find(shifts.begin(), shifts.end(), s) == shifts.end()) shifts.push_back(s);
    }
    std::map<Monomial, Real> integral_cache;
    Element<Real> out(model.shape());
    for (const auto& [key, c] : kernel.terms()) {
        const int d = key.second.zsdeg();
        if (std::find(shifts.begin(), shifts.end(), d) == shifts.end()) continue;
        auto it = integral_cache.find(key.second);
        if (it == integral_cache.end()) {
            Element<Real> integrand = alg.mul(alg.monomial(key.second), f);
            it = integral_cache.emplace(key.second, model.nu(integrand, params).value).first;
        }
        out.add(key.first, c * it->second);
    }
    return out;
}

/// Orthogonal projection of f onto holomorphic polynomials of degree <= hol_degree in
/// L^2(dnu_lambda), by solving the Gram normal equations degree by degree.
inline Element<Real> bergman_oracle(const NumericModel& model, const Element<Real>& f, const IntegralParams& params,
                                    int hol_degree, int full_degree) {
    params.validate(model.shape());
    for (const auto& [mono, c] : f.terms())
        if (mono.zdeg() + mono.zsdeg() > full_degree)
            throw std::invalid_argument("input degree exceeds the oracle's full degree");
    const Algebra<Real>& alg = model.algebra();
    Element<Real> out(model.shape());
    for (int d = 0; d <= hol_degree; ++d) {
        const auto& basis = model.fock().basis(d);
        const int dim = static_cast<int>(basis.size());
        std::vector<Element<Real>> conj;
        for (const auto& b : basis) conj.push_back(alg.star(alg.monomial(b)));
        std::vector<Real> rhs(static_cast<std::size_t>(dim));
        bool any = false;
        for (int k = 0; k < dim; ++k) {
            rhs[static_cast<std::size_t>(k)] = model.nu(alg.mul(conj[static_cast<std::size_t>(k)], f), params).value;
            if (rhs[static_cast<std::size_t>(k)] != 0) any = true;
        }
        if (!any) continue;
        Matrix<Real> gram(dim, dim);
        for (int k = 0; k < dim; ++k)
            for (int i = 0; i < dim; ++i)
                gram(k, i) = model.nu(alg.mul(conj[static_cast<std::size_t>(k)], alg.monomial(basis[static_cast<std::size_t>(i)])), params).value;
        auto chol = cholesky(gram);
        if (!chol) throw std::domain_error("singular Gram matrix in projection oracle");
        std::vector<Real> coeffs = cholesky_solve(*chol, rhs);
        for (int i = 0; i < dim; ++i) out.add(basis[static_cast<std::size_t>(i)], coeffs[static_cast<std::size_t>(i)]);
    }
    return out;
}

}  // namespace qmb
