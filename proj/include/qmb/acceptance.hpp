#pragma once

// Acceptance checks, one per criterion, each with its own time budget.

#include <chrono>
#include <complex>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qmb/kernels.hpp"

namespace qmb {

struct CheckResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0;
    double budget = 0;  // seconds; 0 means no budget
};

struct AcceptanceOptions {
    bool quick = true;
    std::uint64_t seed = 20240611;
};

namespace accept {

using Clock = std::chrono::steady_clock;
using cplx = std::complex<double>;

inline std::vector<std::pair<int, int>> shapes(std::initializer_list<std::pair<int, int>> s) { return s; }

inline std::string fmt(const Real& x) { return to_decimal(x, 6); }

/// Determinant by Gaussian elimination with partial pivoting.
inline cplx det(std::vector<std::vector<cplx>> a) {
    const std::size_t n = a.size();
    cplx d = 1;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
        if (std::abs(a[p][c]) == 0) return 0;
        if (p != c) {
            std::swap(a[p], a[c]);
            d = -d;
        }
        d *= a[c][c];
        for (std::size_t r = c + 1; r < n; ++r) {
            cplx f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
        }
    }
    return d;
}

/// Random m x n complex matrix with Frobenius norm 0.9 (hence operator norm < 1).
inline std::vector<std::vector<cplx>> random_contraction(int m, int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    std::vector<std::vector<cplx>> z(static_cast<std::size_t>(m), std::vector<cplx>(static_cast<std::size_t>(n)));
    double fro = 0;
    for (auto& row : z)
        for (auto& x : row) {
            x = {g(rng), g(rng)};
            fro += std::norm(x);
        }
    std::uniform_real_distribution<double> scale(0.05, 0.95);
    const double s = scale(rng) / std::sqrt(fro);
    for (auto& row : z)
        for (auto& x : row) x *= s;
    return z;
}

/// Random element with monomials of z-degree <= dz and z*-degree <= ds and small rational coefficients.
inline Element<QRational> random_element(const Shape& shape, int dz, int ds, int terms, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> gen(0, shape.gens() - 1), coeff(-5, 5), den(1, 3);
    std::uniform_int_distribution<int> zdeg(0, dz), sdeg(0, ds);
    Element<QRational> f(shape);
    for (int t = 0; t < terms; ++t) {
        Monomial mono;
        for (int i = zdeg(rng); i > 0; --i) ++mono.z[static_cast<std::size_t>(gen(rng))];
        for (int i = sdeg(rng); i > 0; --i) ++mono.zs[static_cast<std::size_t>(gen(rng))];
        f.add(mono, QRational(Rational(coeff(rng), den(rng))));
    }
    return f;
}

inline Real max_abs_diff(const Element<Real>& a, const Element<Real>& b) {
    Real worst = 0;
    const Element<Real> diff = a - b;
    for (const auto& [mono, c] : diff.terms())
        if (abs(c) > worst) worst = abs(c);
    return worst;
}

inline CheckResult relations(const AcceptanceOptions&) {
    CheckResult r{1, "commutation of generators with y", true, "", 0, 30};
    int checked = 0;
    for (auto [m, n] : shapes({{1, 1}, {1, 2}, {2, 2}, {2, 3}})) {
        auto alg = make_exact_algebra(m, n);
        const Element<QRational> y = alg->build_y();
        const QRational q2 = QRational::q_pow(2), qm2 = QRational::q_pow(-2);
        for (int row = 1; row <= m; ++row)
            for (int col = 1; col <= n; ++col) {
                Element<QRational> z = alg->gen(row, col), zs = alg->gen(row, col, true);
                bool ok = alg->mul(z, y) == qm2 * alg->mul(y, z) && alg->mul(zs, y) == q2 * alg->mul(y, zs);
                ++checked;
                if (!ok) {
                    r.passed = false;
                    r.detail += "fails at (m,n)=(" + std::to_string(m) + "," + std::to_string(n) + ") gen z[" +
                                std::to_string(col) + "," + std::to_string(row) + "]; ";
                }
            }
    }
    if (r.passed) r.detail = std::to_string(checked) + " generators, exact";
    return r;
}

inline CheckResult theta_y(const AcceptanceOptions&) {
    CheckResult r{2, "Theta(y) = q^{2k} on H_k", true, "", 0, 60};
    for (auto [m, n] : shapes({{1, 1}, {1, 2}, {2, 2}})) {
        auto alg = make_exact_algebra(m, n);
        FockSpace<QRational> fock(*alg);
        const Element<QRational> y = alg->build_y();
        for (int k = 0; k <= 4; ++k) {
            auto blocks = fock.apply(y, k);
            Matrix<QRational> expect = QRational::q_pow(2 * k) * Matrix<QRational>::identity(fock.dimension(k));
            bool ok = blocks.size() == 1 && blocks.count(k) == 1 && blocks.at(k).matrix == expect;
            if (!ok) {
                r.passed = false;
                r.detail += "(m,n)=(" + std::to_string(m) + "," + std::to_string(n) + ") k=" + std::to_string(k) + "; ";
            }
        }
    }
    if (r.passed) r.detail = "k <= 4, exact";
    return r;
}

inline CheckResult trace_product(const AcceptanceOptions&) {
    CheckResult r{3, "trace series vs product formula", true, "", 0, 60};
    Real worst = 0;
    for (auto [m, n] : shapes({{1, 1}, {1, 2}, {2, 2}}))
        for (const char* qs : {"0.3", "0.5", "0.7"}) {
            const Real q0(qs);
            const Real lambda = Real(m + n) + Real("0.5");
            SeriesResult s = trace_y_series(m, n, q0, lambda, Real("1e-14"));
            Real closed = trace_y_closed(m, n, q0, lambda);
            Real rel = abs(s.value - closed) / abs(closed);
            if (rel > worst) worst = rel;
            if (rel > Real("1e-10")) r.passed = false;
        }
    r.detail = "max relative error " + fmt(worst);
    return r;
}

inline CheckResult positivity(const AcceptanceOptions&) {
    CheckResult r{4, "Gram positivity and Theta adjointness", true, "", 0, 0};
    for (auto [m, n] : shapes({{1, 1}, {1, 2}, {2, 2}})) {
        auto num = make_numeric_algebra(m, n, Real("0.5"));
        FockSpace<Real> nfock(*num);
        for (int k = 0; k <= 4; ++k)
            if (!cholesky(nfock.gram(k))) {
                r.passed = false;
                r.detail += "Cholesky fails (m,n)=(" + std::to_string(m) + "," + std::to_string(n) + ") k=" + std::to_string(k) + "; ";
            }
        auto alg = make_exact_algebra(m, n);
        FockSpace<QRational> fock(*alg);
        for (int k = 0; k <= 3; ++k) {
            Matrix<QRational> gk = fock.gram(k), gk1 = fock.gram(k + 1);
            for (int g = 0; g < alg->shape().gens(); ++g) {
                Matrix<QRational> a = fock.gen_block({g, false}, k).matrix;
                Matrix<QRational> b = fock.gen_block({g, true}, k + 1).matrix;
                if (!(gk1 * a == b.transpose() * gk)) {
                    r.passed = false;
                    r.detail += "adjointness fails (m,n)=(" + std::to_string(m) + "," + std::to_string(n) + ") k=" + std::to_string(k) + "; ";
                }
            }
        }
    }
    if (r.passed) r.detail = "Cholesky k <= 4 at q=0.5; exact adjointness k <= 3";
    return r;
}

inline CheckResult commutativity(const AcceptanceOptions&) {
    CheckResult r{5, "pairwise commutativity of chi_k", true, "", 0, 300};
    int pairs = 0;
    for (auto [m, n] : shapes({{2, 2}, {2, 3}})) {
        auto alg = make_exact_algebra(m, n);
        KernelAlgebra ka(*alg);
        for (int j = 1; j <= m; ++j)
            for (int k = 1; k <= m; ++k) {
                ++pairs;
                if (!ka.commutator(j, k, j + k + 1).zero) {
                    r.passed = false;
                    r.detail += "[chi_" + std::to_string(j) + ", chi_" + std::to_string(k) + "] != 0 at (m,n)=(" +
                                std::to_string(m) + "," + std::to_string(n) + "); ";
                }
            }
    }
    if (r.passed) r.detail = std::to_string(pairs) + " pairs, exact";
    return r;
}

inline CheckResult polynomial_kernel(const AcceptanceOptions&) {
    CheckResult r{6, "polynomial kernel vs finite products", true, "", 0, 0};
    const int trunc = 3;
    for (auto [m, n] : shapes({{1, 1}, {1, 2}, {2, 2}})) {
        auto alg = make_exact_algebra(m, n);
        KernelAlgebra ka(*alg);
        const std::string tag = "(m,n)=(" + std::to_string(m) + "," + std::to_string(n) + ") ";
        PolyKernel kp = ka.k_poly(trunc);
        for (const auto& [key, c] : kp.terms())
            if (c.degree() > key.first.zdeg()) {
                r.passed = false;
                r.detail += tag + "deg_u bound; ";
            }
        PolyKernel previous = ka.one(trunc);
        for (int l = -1; l >= -3; --l) {
            PolyKernel finite = ka.k_finite(l, trunc);
            if (!(KernelAlgebra::specialize(kp, QRational::q_pow(2 * l)) == finite)) {
                r.passed = false;
                r.detail += tag + "K(q^{2l}) != K_l at l=" + std::to_string(l) + "; ";
            }
            if (!(ka.mul(ka.factor(QRational::q_pow(2 * l), trunc), previous, trunc) == finite)) {
                r.passed = false;
                r.detail += tag + "recursion fails at l=" + std::to_string(l) + "; ";
            }
            previous = finite;
        }
    }
    if (r.passed) r.detail = "l in {-1,-2,-3}, bidegree <= 3, exact";
    return r;
}

inline CheckResult reproducing(const AcceptanceOptions& opt) {
    CheckResult r{7, "Bergman operator vs projection oracle", true, "", 0, 300};
    std::mt19937_64 rng(opt.seed);
    const Real tol("1e-8");
    Real worst = 0;
    int inputs = 0;
    for (auto [m, n] : shapes({{1, 1}, {1, 2}})) {
        NumericModel model(m, n, Real("0.6"));
        IntegralParams p;
        p.q0 = Real("0.6");
        p.lambda = m + n + 1;
        auto alg = make_exact_algebra(m, n);
        KernelAlgebra ka(*alg);
        const PolyKernel kp = ka.k_poly(5);
        const KernelElement<Real> kl = k_lambda_numeric(kp, p.q0, p.lambda);
        const std::string tag = "(m,n)=(" + std::to_string(m) + "," + std::to_string(n) + ") ";
        auto run = [&](const Element<Real>& f, const Element<Real>* expected) {
            const int trunc = f.max_zdeg() + f.max_zsdeg() + 1;
            Element<Real> got = bergman_apply(model, kl.truncated(trunc), f, p);
            Element<Real> oracle = bergman_oracle(model, f, p, trunc, f.max_zdeg() + f.max_zsdeg());
            Real d = max_abs_diff(got, oracle);
            if (expected) d = std::max(d, max_abs_diff(got, *expected));
            if (d > worst) worst = d;
            ++inputs;
            return d <= tol;
        };
        for (int k = 0; k <= 2; ++k)
            for (const auto& mono : model.fock().basis(k)) {
                Element<Real> f = model.algebra().monomial(mono);
                if (!run(f, &f)) {
                    r.passed = false;
                    r.detail += tag + "holomorphic monomial not reproduced; ";
                }
            }
        const Element<Real> zero(model.shape());
        for (int k = 1; k <= 2; ++k)
            for (const auto& mono : model.fock().basis(k)) {
                Element<Real> f = model.algebra().star(model.algebra().monomial(mono));
                if (!run(f, &zero)) {
                    r.passed = false;
                    r.detail += tag + "antiholomorphic input not killed; ";
                }
            }
        const int samples = opt.quick ? 20 : 60;
        for (int i = 0; i < samples; ++i) {
            Element<Real> f = model.lift(random_element(model.shape(), 2, 2, 4, rng));
            if (f.is_zero()) continue;
            if (!run(f, nullptr)) {
                r.passed = false;
                r.detail += tag + "random input disagrees; ";
            }
        }
    }
    r.detail = std::to_string(inputs) + " inputs, max deviation " + fmt(worst) + (r.passed ? "" : "; " + r.detail);
    return r;
}

inline CheckResult classical_limit(const AcceptanceOptions& opt) {
    CheckResult r{8, "classical limit of y is det(1 - ZZ*)", true, "", 0, 0};
    std::mt19937_64 rng(opt.seed + 1);
    double worst = 0;
    int samples = 0;
    for (auto [m, n] : shapes({{1, 1}, {1, 2}, {1, 3}, {2, 2}, {2, 3}, {3, 3}})) {
        auto alg = make_exact_algebra(m, n);
        const Element<QRational> y = alg->build_y();
        const int count = opt.quick ? 20 : 50;
        for (int i = 0; i < count; ++i) {
            auto z = random_contraction(m, n, rng);
            std::vector<std::vector<cplx>> a(static_cast<std::size_t>(m), std::vector<cplx>(static_cast<std::size_t>(m)));
            for (int i1 = 0; i1 < m; ++i1)
                for (int i2 = 0; i2 < m; ++i2) {
                    cplx s = i1 == i2 ? 1.0 : 0.0;
                    for (int c = 0; c < n; ++c)
                        s -= z[static_cast<std::size_t>(i1)][static_cast<std::size_t>(c)] *
                             std::conj(z[static_cast<std::size_t>(i2)][static_cast<std::size_t>(c)]);
                    a[static_cast<std::size_t>(i1)][static_cast<std::size_t>(i2)] = s;
                }
            double d = std::abs(classical_eval(y, z) - det(a));
            worst = std::max(worst, d);
            ++samples;
        }
    }
    r.passed = worst <= 1e-12;
    std::ostringstream os;
    os << samples << " matrices, max deviation " << worst;
    r.detail = os.str();
    return r;
}

inline CheckResult norm_bound(const AcceptanceOptions&) {
    CheckResult r{9, "truncated norm of Theta(Z) <= 1", true, "", 0, 0};
    const int top = 6;
    const Real limit = 1 + Real("1e-9");
    std::string per_shape;
    for (auto [m, n] : shapes({{1, 1}, {1, 2}, {2, 2}})) {
        auto alg = make_numeric_algebra(m, n, Real("0.5"));
        FockSpace<Real> fock(*alg);
        std::vector<Matrix<Real>> chol;
        for (int k = 0; k <= top; ++k) {
            auto l = cholesky(fock.gram(k));
            if (!l) throw std::domain_error("Gram matrix not positive definite");
            chol.push_back(*l);
        }
        Real worst = 0;
        int worst_k = 0;
        for (int k = 0; k < top; ++k) {
            const int din = fock.dimension(k), dout = fock.dimension(k + 1);
            // Orthonormalized block A' = L_out^T A L_in^{-T}, assembled over the generator array.
            Matrix<Real> big(m * dout, n * din);
            const Matrix<Real> lin_inv_t = lower_solve(chol[static_cast<std::size_t>(k)], Matrix<Real>::identity(din)).transpose();
            const Matrix<Real> lout_t = chol[static_cast<std::size_t>(k + 1)].transpose();
            for (int row = 1; row <= m; ++row)
                for (int col = 1; col <= n; ++col) {
                    Matrix<Real> a = fock.gen_block({alg->shape().gen(row, col), false}, k).matrix;
                    Matrix<Real> b = lout_t * a * lin_inv_t;
                    for (int i = 0; i < dout; ++i)
                        for (int j = 0; j < din; ++j) big((row - 1) * dout + i, (col - 1) * din + j) = b(i, j);
                }
            Real norm = sqrt(psd_max_eigenvalue_upper(big.transpose() * big, Real("1e-15")));
            if (norm > worst) {
                worst = norm;
                worst_k = k;
            }
        }
        if (worst > limit) r.passed = false;
        per_shape += "(" + std::to_string(m) + "," + std::to_string(n) + "): " + to_decimal(worst, 10) +
                     (worst > limit ? " at H_" + std::to_string(worst_k) + " -> H_" + std::to_string(worst_k + 1) : "") + "; ";
    }
    r.detail = "max truncated norm per shape " + per_shape.substr(0, per_shape.size() - 2);
    return r;
}

/// Polynomial extrapolation to x = 0 through (x_i, y_i) by Neville's scheme.
inline Real extrapolate_to_zero(const std::vector<Real>& x, std::vector<Real> y) {
    const std::size_t n = x.size();
    for (std::size_t level = 1; level < n; ++level)
        for (std::size_t i = n - 1; i >= level; --i)
            y[i] = (x[i] * y[i - 1] - x[i - level] * y[i]) / (x[i] - x[i - level]);
    return y[n - 1];
}

inline Real binomial_real(const Real& a, int d) {
    Real r = 1;
    for (int i = 1; i <= d; ++i) r = r * (a - (d - i)) / i;  // binomial(a, d) for real a
    return r;
}

inline CheckResult disc_kernel(const AcceptanceOptions&) {
    CheckResult r{10, "quantum disc kernel coefficients and their q -> 1 limit", true, "", 0, 0};
    auto alg = make_exact_algebra(1, 1);
    KernelAlgebra ka(*alg);
    const int top = 5;
    const PolyKernel kp = ka.k_poly(top);
    std::vector<UPoly<QRational>> coeff;
    for (int d = 0; d <= top; ++d) {
        Monomial left, right;
        left.z[0] = static_cast<std::uint8_t>(d);
        right.zs[0] = static_cast<std::uint8_t>(d);
        coeff.push_back(kp.coeff(left, right));
        // (u; q^2)_d / (q^2; q^2)_d
        UPoly<QRational> expect(QRational(1));
        QRational den(1);
        for (int i = 0; i < d; ++i) {
            expect *= UPoly<QRational>(std::vector<QRational>{QRational(1), -QRational::q_pow(2 * i)});
            den *= QRational(1) - QRational::q_pow(2 * (i + 1));
        }
        if (!(coeff.back() == expect.scaled(den.inverse()))) {
            r.passed = false;
            r.detail += "q-binomial mismatch at d=" + std::to_string(d) + "; ";
        }
    }
    // Integral lambda: exact limit of the rational function at q = 1.
    for (int lambda = 2; lambda <= 4; ++lambda)
        for (int d = 0; d <= top; ++d) {
            QRational c = coeff[static_cast<std::size_t>(d)].eval(QRational::q_pow(2 * lambda));
            Real at_one = qr_eval(c, Real(1));
            if (abs(at_one - binomial_real(Real(lambda + d - 1), d)) > Real("1e-30")) {
                r.passed = false;
                r.detail += "exact limit mismatch at lambda=" + std::to_string(lambda) + " d=" + std::to_string(d) + "; ";
            }
        }
    // Real lambda: evaluate at q0 = 0.999 and the next points 0.998, ..., extrapolate in 1 - q.
    const Real h("0.001");
    Real worst = 0, raw = 0;
    for (const char* ls : {"2", "2.5", "3.25"}) {
        const Real lambda(ls);
        for (int d = 0; d <= top; ++d) {
            std::vector<Real> xs, ys;
            for (int i = 1; i <= 6; ++i) {
                const Real q0 = 1 - h * i;
                const Real u0 = pow(q0, 2 * lambda);
                xs.push_back(h * i);
                ys.push_back(eval_upoly(coeff[static_cast<std::size_t>(d)], q0, u0));
            }
            const Real expect = binomial_real(lambda + d - 1, d);
            const Real dev = abs(extrapolate_to_zero(xs, ys) - expect);
            raw = std::max(raw, Real(abs(ys[0] - expect)));
            worst = std::max(worst, dev);
        }
    }
    if (worst > Real("1e-6")) r.passed = false;
    r.detail = "d <= 5; limit from q0 = 0.999 deviates " + fmt(worst) + " (raw value at 0.999 deviates " + fmt(raw) + ")" +
               (r.passed ? "" : "; " + r.detail);
    return r;
}

}  // namespace accept

using CheckFn = std::function<CheckResult(const AcceptanceOptions&)>;

inline std::vector<CheckFn> acceptance_checks() {
    return {accept::relations,         accept::theta_y,     accept::trace_product, accept::positivity,
            accept::commutativity,     accept::polynomial_kernel, accept::reproducing, accept::classical_limit,
            accept::norm_bound,        accept::disc_kernel};
}

/// Runs one check, timing it and turning exceptions and overruns into failures.
inline CheckResult run_check(const CheckFn& fn, const AcceptanceOptions& opt, int id) {
    const auto start = accept::Clock::now();
    CheckResult r;
    try {
        r = fn(opt);
    } catch (const std::exception& e) {
        r.id = id;
        r.name = "criterion " + std::to_string(id);
        r.passed = false;
        r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(accept::Clock::now() - start).count();
    if (r.budget > 0 && r.seconds > r.budget) {
        r.passed = false;
        r.detail += "; over time budget";
    }
    return r;
}

/// Runs every check in order; on_result sees each result as soon as it is ready.
inline std::vector<CheckResult> run_acceptance(const AcceptanceOptions& opt,
                                               const std::function<void(const CheckResult&)>& on_result = {}) {
    std::vector<CheckResult> out;
    const auto checks = acceptance_checks();
    for (std::size_t i = 0; i < checks.size(); ++i) {
        out.push_back(run_check(checks[i], opt, static_cast<int>(i) + 1));
        if (on_result) on_result(out.back());
    }
    return out;
}

inline std::string format_result(const CheckResult& r) {
    std::ostringstream os;
    os << (r.passed ? "PASS" : "FAIL") << " [" << r.id << "] " << r.name << " (" << std::fixed;
    os.precision(2);
    os << r.seconds << " s) " << r.detail;
    return os.str();
}

}  // namespace qmb
