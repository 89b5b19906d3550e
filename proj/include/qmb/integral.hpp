#pragma once

// Invariant integrals nu_lambda as weighted traces on the Fock space.
//
//   int f dnu_lambda = C(lambda) tr(Theta(f) Theta(y)^lambda Gamma),
//
// with Theta(y)^lambda = q^{2 k lambda} on H_k and Gamma the diagonal weight operator.
// Traces are taken in the PBW basis; no Gram factor enters.

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmb/fock.hpp"
#include "qmb/upoly.hpp"

namespace qmb {

struct IntegralParams {
    Real q0{"0.5"};
    Real lambda{3};
    Real eps{"1e-14"};
    int max_degree = 400;

    void validate(const Shape& shape) const {
        if (!(q0 > 0 && q0 < 1)) throw std::invalid_argument("q0 must lie in (0,1)");
        if (!(lambda > shape.N() - 1))
            throw std::invalid_argument("lambda must exceed N-1 = " + std::to_string(shape.N() - 1));
        if (!(eps > 0)) throw std::invalid_argument("tail tolerance must be positive");
        if (max_degree < 1) throw std::invalid_argument("max degree must be positive");
    }
};

/// A tail-controlled sum together with its certificate.
struct SeriesResult {
    Real value;
    Real tail_bound;
    int degrees = 0;
};

/// C(lambda) as a polynomial in u = q^{2 lambda}: prod_{j<n, k<m} (1 - u q^{2(1-N)} q^{2(j+k)}).
inline UPoly<QRational> c_lambda_poly(int m, int n) {
    const int big_n = m + n;
    UPoly<QRational> acc(QRational(1));
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < m; ++k)
            acc *= UPoly<QRational>(std::vector<QRational>{QRational(1), -QRational::q_pow(2 * (1 - big_n) + 2 * (j + k))});
    return acc;
}

inline Real c_lambda(int m, int n, const Real& q0, const Real& lambda) {
    const int big_n = m + n;
    Real acc = 1;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < m; ++k) acc *= 1 - pow(q0, 2 * (lambda + 1 - big_n) + 2 * (j + k));
    return acc;
}

/// Closed product formula for tr(Theta(y)^lambda Gamma).
inline Real trace_y_closed(int m, int n, const Real& q0, const Real& lambda) {
    Real c = 1;
    const int big_n = m + n;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < m; ++k) {
            Real factor = 1 - pow(q0, 2 * (lambda + 1 - big_n) + 2 * (j + k));
            if (!(factor > 0)) throw std::domain_error("divergent parameter: lambda must exceed N-1");
            c *= factor;
        }
    return 1 / c;
}

/// Stopping rule shared by every weighted-trace series.
///
/// Stops at degree k once three consecutive per-degree magnitudes decay with ratio at most
/// 1.5 q0^{2(lambda+1-N)} and the last is below eps. The reported tail bound assumes the
/// geometric continuation with the largest of those ratios.
class TailController {
public:
    TailController(const Real& q0, const Real& lambda, int big_n, Real eps, int min_degree = 0)
        : limit_(pow(q0, 2 * (lambda + 1 - big_n)) * Real("1.5")), eps_(std::move(eps)), min_degree_(min_degree) {}

    /// Feeds the magnitude of degree k (called for k = 0, 1, ...). Returns true when done.
    bool push(int k, const Real& magnitude) {
        mags_.push_back(magnitude);
        if (k < min_degree_ + 3 || mags_.size() < 4) return false;
        const std::size_t n = mags_.size();
        bool decaying = true;
        Real worst = 0;
        int growing = 0;
        for (std::size_t i = n - 3; i < n; ++i) {
            const Real& prev = mags_[i - 1];
            const Real& cur = mags_[i];
            if (cur > limit_ * prev) decaying = false;
            if (prev > 0) {
                Real ratio = cur / prev;
                if (ratio > worst) worst = ratio;
                if (ratio >= 1) ++growing;
            }
        }
        if (decaying && mags_.back() < eps_) {
            tail_ = worst < 1 ? mags_.back() * worst / (1 - worst) : mags_.back();
            return true;
        }
        if (k >= 20 + min_degree_ && growing == 3) throw std::domain_error("series not converging");
        return false;
    }

    const Real& tail_bound() const { return tail_; }

private:
    Real limit_;
    Real eps_;
    int min_degree_;
    std::vector<Real> mags_;
    Real tail_{0};
};

/// Direct summation of the multi-index series for tr(Theta(y)^lambda Gamma).
inline SeriesResult trace_y_series(int m, int n, const Real& q0, const Real& lambda, const Real& eps,
                                   int max_degree = 2000) {
    Shape shape(m, n);
    if (!(q0 > 0 && q0 < 1)) throw std::invalid_argument("q0 must lie in (0,1)");
    // Per-generator ratio w_g = q^{2(lambda - (N+1-a-alpha))}; the degree-k term is h_k(w).
    std::vector<Real> w;
    for (int g = 0; g < shape.gens(); ++g)
        w.push_back(pow(q0, 2 * (lambda - (shape.N() + 1 - shape.col_of(g) - shape.row_of(g)))));
    // h[g] holds h_k(w_0..w_g) for the current k.
    std::vector<Real> h(w.size(), Real(1));
    TailController tail(q0, lambda, shape.N(), eps);
    SeriesResult result{Real(1), Real(0), 1};
    if (tail.push(0, Real(1))) return result;
    for (int k = 1; k <= max_degree; ++k) {
        Real acc = 0;
        for (std::size_t g = 0; g < w.size(); ++g) {
            acc = acc + w[g] * h[g];  // h_k(w_0..w_g) = h_k(w_0..w_{g-1}) + w_g h_{k-1}(w_0..w_g)
            h[g] = acc;
        }
        result.value += acc;
        result.degrees = k + 1;
        if (tail.push(k, acc)) {
            result.tail_bound = tail.tail_bound();
            return result;
        }
    }
    throw std::domain_error("series not converging");
}

/// Numeric model of Pol(Mat_mn)_q at a fixed q0: algebra, Fock space, and nu_lambda.
class NumericModel {
public:
    NumericModel(int m, int n, const Real& q0)
        : q0_(q0), algebra_(make_numeric_algebra(m, n, q0)), fock_(std::make_unique<FockSpace<Real>>(*algebra_)) {
        if (!(q0 > 0 && q0 < 1)) throw std::invalid_argument("q0 must lie in (0,1)");
    }

    const Real& q0() const { return q0_; }
    const Shape& shape() const { return algebra_->shape(); }
    const Algebra<Real>& algebra() const { return *algebra_; }
    const FockSpace<Real>& fock() const { return *fock_; }

    /// Evaluates every coefficient of an exact element at q0.
    Element<Real> lift(const Element<QRational>& f) const {
        if (!(f.shape() == shape())) throw std::invalid_argument("dimension mismatch");
        return f.map_coeffs([this](const QRational& c) { return qr_eval(c, q0_); });
    }

    /// int f dnu_lambda with tail control; exactly 0 when no component has balanced bidegree.
    SeriesResult nu(const Element<Real>& f, const IntegralParams& p) const {
        p.validate(shape());
        if (abs(p.q0 - q0_) > pow(Real(10), -static_cast<int>(working_digits()) + 5))
            throw std::invalid_argument("integral parameters use a different q0 than the model");
        Element<Real> balanced(shape());
        int top = 0;
        for (const auto& [mono, c] : f.terms())
            if (mono.zdeg() == mono.zsdeg()) {
                balanced.add(mono, c);
                top = std::max(top, mono.zdeg());
            }
        if (balanced.is_zero()) return {Real(0), Real(0), 0};

        const Real c_lam = c_lambda(shape().m, shape().n, q0_, p.lambda);
        const Real y_ratio = pow(q0_, 2 * p.lambda);
        TailController tail(q0_, p.lambda, shape().N(), p.eps, top);
        SeriesResult result{Real(0), Real(0), 0};
        Real y_pow = 1;
        for (int k = 0; k <= p.max_degree; ++k) {
            const auto& basis = fock_->basis(k);
            std::vector<Real> diag = fock_->diagonal(balanced, k);
            Real sum = 0, mag = 0;
            for (std::size_t i = 0; i < basis.size(); ++i) {
                Real w = fock_->gamma_weight(basis[i]);
                sum += w * diag[i];
                mag += w * abs(diag[i]);
            }
            result.value += c_lam * y_pow * sum;
            result.degrees = k + 1;
            if (tail.push(k, c_lam * y_pow * mag)) {
                result.tail_bound = tail.tail_bound();
                return result;
            }
            y_pow *= y_ratio;
        }
        throw std::domain_error("series not converging");
    }

    SeriesResult nu(const Element<QRational>& f, const IntegralParams& p) const { return nu(lift(f), p); }

private:
    Real q0_;
    std::unique_ptr<Algebra<Real>> algebra_;
    std::unique_ptr<FockSpace<Real>> fock_;
};

}  // namespace qmb
