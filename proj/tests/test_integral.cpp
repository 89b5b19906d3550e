#include <random>

#include <gtest/gtest.h>

#include "qmb/integral.hpp"

using namespace qmb;

namespace {

using Ex = Element<QRational>;

QRational qp(int k) { return QRational::q_pow(k); }

Real rel_err(const Real& a, const Real& b) { return abs(a - b) / abs(b); }

// Random element of bidegree at most (2,-2) with small integer coefficients.
Ex random_element(std::mt19937_64& rng, const Algebra<QRational>& alg, int terms) {
    const Shape& s = alg.shape();
    std::uniform_int_distribution<int> deg(0, 2), gen(0, s.gens() - 1), c(-3, 3);
    Ex f = alg.zero();
    for (int t = 0; t < terms; ++t) {
        Monomial mono;
        for (int i = deg(rng); i > 0; --i) ++mono.z[static_cast<std::size_t>(gen(rng))];
        for (int i = deg(rng); i > 0; --i) ++mono.zs[static_cast<std::size_t>(gen(rng))];
        f.add(mono, QRational(c(rng)));
    }
    return f;
}

IntegralParams params(const char* q0, const Real& lambda) {
    IntegralParams p;
    p.q0 = Real(q0);
    p.lambda = lambda;
    return p;
}

}  // namespace

TEST(CLambda, Polynomials) {
    using P = UPoly<QRational>;
    EXPECT_EQ(c_lambda_poly(1, 1), P(std::vector<QRational>{1, -qp(-2)}));
    P ball = P(std::vector<QRational>{1, -qp(-4)}) * P(std::vector<QRational>{1, -qp(-2)});
    EXPECT_EQ(c_lambda_poly(1, 2), ball);
    EXPECT_EQ(c_lambda_poly(2, 3).eval(QRational(0)), QRational(1));
}

TEST(CLambda, NumericMatchesPolynomial) {
    const Real q0("0.5"), lam("3.5");
    const Real u = pow(q0, 2 * lam);
    EXPECT_LT(abs(c_lambda(2, 2, q0, lam) - eval_upoly(c_lambda_poly(2, 2), q0, u)), Real("1e-45"));
    EXPECT_LT(abs(c_lambda(1, 1, q0, Real(2)) - Real("0.75")), Real("1e-45"));
}

TEST(TraceClosed, Examples) {
    EXPECT_LT(abs(trace_y_closed(1, 1, Real("0.5"), Real(2)) - Real(4) / 3), Real("1e-45"));
    EXPECT_LT(abs(trace_y_closed(1, 2, Real("0.5"), Real(3)) - 1 / (Real("0.75") * Real("0.9375"))), Real("1e-45"));
    EXPECT_LT(abs(trace_y_closed(2, 3, Real("0.5"), Real(200)) - 1), Real("1e-45"));
}

TEST(TraceClosed, DivergentParameter) {
    EXPECT_THROW(trace_y_closed(1, 1, Real("0.5"), Real(1)), std::domain_error);
    EXPECT_THROW(trace_y_closed(1, 2, Real("0.5"), Real("1.5")), std::domain_error);
}

TEST(TraceSeries, Examples) {
    auto r = trace_y_series(1, 1, Real("0.5"), Real(2), Real("1e-14"));
    EXPECT_LT(abs(r.value - Real(4) / 3), Real("1e-12"));
    auto big = trace_y_series(1, 1, Real("0.5"), Real(50), Real("1e-14"));
    EXPECT_LT(abs(big.value - 1), Real("1e-28"));
    EXPECT_GT(big.value, 1);
    auto sq = trace_y_series(2, 2, Real("0.4"), Real(5), Real("1e-14"));
    EXPECT_LT(rel_err(sq.value, trace_y_closed(2, 2, Real("0.4"), Real(5))), Real("1e-10"));
}

TEST(TraceSeries, AgreesWithClosedForm) {
    for (auto [m, n] : {std::pair{1, 1}, {1, 2}, {2, 2}})
        for (const char* q0 : {"0.3", "0.5", "0.7"}) {
            const Real lam = Real(m + n) + Real("0.5");
            auto r = trace_y_series(m, n, Real(q0), lam, Real("1e-14"));
            Real closed = trace_y_closed(m, n, Real(q0), lam);
            EXPECT_LT(rel_err(r.value, closed), Real("1e-10")) << m << n << " q0=" << q0;
            EXPECT_LT(abs(r.value - closed), 10 * Real("1e-14") * closed) << m << n << " q0=" << q0;
        }
}

TEST(TraceSeries, NonConvergence) {
    try {
        trace_y_series(1, 1, Real("0.5"), Real("0.5"), Real("1e-14"));
        FAIL();
    } catch (const std::domain_error& e) {
        EXPECT_STREQ(e.what(), "series not converging");
    }
}

TEST(Tail, StopsOnGeometricDecay) {
    TailController t(Real("0.5"), Real(3), 2, Real("1e-6"));
    int k = 0;
    Real mag = 1;
    while (!t.push(k, mag)) {
        ++k;
        mag /= 16;
        ASSERT_LT(k, 50);
    }
    EXPECT_LT(mag, Real("1e-6"));
    EXPECT_LE(t.tail_bound(), mag);
}

TEST(Nu, Unit) {
    NumericModel model(1, 2, Real("0.5"));
    auto alg = make_exact_algebra(1, 2);
    auto r = model.nu(alg->one(), params("0.5", Real(4)));
    EXPECT_LT(abs(r.value - 1), Real("1e-13"));
}

TEST(Nu, DiscNumberOperator) {
    NumericModel model(1, 1, Real("0.5"));
    auto alg = make_exact_algebra(1, 1);
    const Real q0("0.5");
    for (const Real& lam : {Real(2), Real("2.5"), Real(4)}) {
        Ex zzs = alg->mul(alg->gen(1, 1), alg->gen(1, 1, true));
        auto r = model.nu(zzs, params("0.5", lam));
        Real expect = (1 - q0 * q0) * pow(q0, 2 * (lam - 1)) / (1 - pow(q0, 2 * lam));
        EXPECT_LT(abs(r.value - expect), Real("1e-13")) << lam;
    }
}

TEST(Nu, UnbalancedIsExactlyZero) {
    NumericModel model(2, 2, Real("0.5"));
    auto alg = make_exact_algebra(2, 2);
    auto p = params("0.5", Real(5));
    EXPECT_EQ(model.nu(alg->gen(1, 1), p).value, 0);
    EXPECT_EQ(model.nu(alg->mul(alg->gen(1, 2), alg->mul(alg->gen(2, 1), alg->gen(1, 1, true))), p).value, 0);
    // The trace path agrees: an unbalanced term never lands on the diagonal.
    Ex mixed = alg->gen(2, 2) + alg->one();
    EXPECT_LT(abs(model.nu(mixed, p).value - 1), Real("1e-13"));
}

TEST(Nu, ParameterValidation) {
    NumericModel model(1, 2, Real("0.5"));
    auto alg = make_exact_algebra(1, 2);
    EXPECT_THROW(model.nu(alg->one(), params("0.5", Real(2))), std::invalid_argument);
    EXPECT_THROW(model.nu(alg->one(), params("0.6", Real(4))), std::invalid_argument);
    EXPECT_THROW(model.nu(alg->one(), params("1.5", Real(4))), std::invalid_argument);
    EXPECT_THROW(NumericModel(1, 1, Real(0)), std::invalid_argument);
}

TEST(Nu, Positivity) {
    std::mt19937_64 rng(41);
    for (auto [m, n, count] : {std::tuple{1, 1, 50}, {1, 2, 50}, {2, 2, 5}}) {
        auto alg = make_exact_algebra(m, n);
        NumericModel model(m, n, Real("0.5"));
        auto p = params("0.5", Real(m + n + 1));
        for (int i = 0; i < count; ++i) {
            Ex f = random_element(rng, *alg, 4);
            Real v = model.nu(alg->mul(alg->star(f), f), p).value;
            EXPECT_GE(v, Real("-1e-12")) << m << n << " #" << i;
        }
    }
}

TEST(Nu, HermitianForm) {
    std::mt19937_64 rng(42);
    auto alg = make_exact_algebra(1, 2);
    NumericModel model(1, 2, Real("0.5"));
    auto p = params("0.5", Real(4));
    for (int i = 0; i < 20; ++i) {
        Ex f = random_element(rng, *alg, 3), g = random_element(rng, *alg, 3);
        Real fg = model.nu(alg->mul(alg->star(g), f), p).value;
        Real gf = model.nu(alg->mul(alg->star(f), g), p).value;
        EXPECT_LT(abs(fg - gf), Real("1e-12")) << i;
    }
}

TEST(Nu, YPowerWeightsMatchClosedTrace) {
    // nu(y) = C(lambda) tr(Theta(y)^{lambda+1} Gamma) = C(lambda) / C(lambda+1).
    auto alg = make_exact_algebra(1, 2);
    NumericModel model(1, 2, Real("0.5"));
    const Real lam("3.5");
    Real got = model.nu(alg->build_y(), params("0.5", lam)).value;
    Real expect = c_lambda(1, 2, Real("0.5"), lam) * trace_y_closed(1, 2, Real("0.5"), lam + 1);
    EXPECT_LT(abs(got - expect), Real("1e-13"));
}
