#include <complex>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "qmb/algebra.hpp"

using namespace qmb;

namespace {

using Ex = Element<QRational>;
const QRational q = QRational::q();

QRational qp(int k) { return QRational::q_pow(k); }

Monomial mono(const Shape& s, std::vector<std::pair<int, int>> z, std::vector<std::pair<int, int>> zs = {}) {
    // Pairs are (a, alpha), i.e. column first.
    Monomial r;
    for (auto [a, al] : z) ++r.z[static_cast<std::size_t>(s.gen(al, a))];
    for (auto [a, al] : zs) ++r.zs[static_cast<std::size_t>(s.gen(al, a))];
    return r;
}

Word random_word(std::mt19937_64& rng, const Shape& s, int max_len) {
    std::uniform_int_distribution<int> len(0, max_len), gen(0, s.gens() - 1), star(0, 1);
    Word w(static_cast<std::size_t>(len(rng)));
    for (auto& l : w) l = {gen(rng), star(rng) == 1};
    return w;
}

Ex random_element(std::mt19937_64& rng, const Algebra<QRational>& alg, int terms) {
    std::uniform_int_distribution<int> c(-3, 3), e(-2, 2);
    Ex f = alg.zero();
    for (int t = 0; t < terms; ++t) f += alg.normal_form(random_word(rng, alg.shape(), 3)).map_coeffs([&](const QRational& x) {
        return x * QRational(c(rng)) * qp(e(rng));
    });
    return f;
}

long binomial(long n, long k) {
    long r = 1;
    for (long i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

TEST(NormalForm, DiscStarPastZ) {
    auto alg = make_exact_algebra(1, 1);
    const Shape& s = alg->shape();
    Ex expect(s, mono(s, {{1, 1}}, {{1, 1}}), qp(2));
    expect.add(Monomial{}, QRational(1) - qp(2));
    EXPECT_EQ(alg->normal_form(parse_word("zs[1,1] z[1,1]", s)), expect);
    EXPECT_EQ(alg->mul(alg->gen(1, 1, true), alg->gen(1, 1)), expect);
}

TEST(NormalForm, AlreadyNormal) {
    auto alg = make_exact_algebra(2, 2);
    EXPECT_EQ(alg->normal_form(parse_word("z[1,1]", alg->shape())), alg->gen(1, 1));
}

TEST(NormalForm, BallStarPastOtherColumn) {
    auto alg = make_exact_algebra(1, 2);
    const Shape& s = alg->shape();
    EXPECT_EQ(alg->normal_form(parse_word("zs[2,1] z[1,1]", s)), Ex(s, mono(s, {{1, 1}}, {{2, 1}}), q));
}

TEST(NormalForm, SameColumnRowSwap) {
    auto alg = make_exact_algebra(2, 1);
    const Shape& s = alg->shape();
    EXPECT_EQ(alg->normal_form(parse_word("z[1,2] z[1,1]", s)), Ex(s, mono(s, {{1, 1}, {1, 2}}), qp(-1)));
}

TEST(NormalForm, BadWordsRejected) {
    Shape s(2, 2);
    EXPECT_THROW(parse_word("z[3,1]", s), std::out_of_range);
    EXPECT_THROW(parse_word("w[1,1]", s), std::invalid_argument);
    EXPECT_THROW(parse_word("z[1 1]", s), std::invalid_argument);
}

TEST(Mul, UnitAndMismatch) {
    auto a = make_exact_algebra(1, 2);
    auto b = make_exact_algebra(2, 2);
    Ex f = a->gen(1, 2) + a->gen(1, 1, true);
    EXPECT_EQ(a->mul(a->one(), f), f);
    EXPECT_EQ(a->mul(f, a->one()), f);
    try {
        a->mul(f, b->gen(1, 1));
        FAIL();
    } catch (const std::invalid_argument& e) {
        EXPECT_STREQ(e.what(), "dimension mismatch");
    }
    EXPECT_THROW(f + b->gen(1, 1), std::invalid_argument);
}

TEST(Mul, YCommutesUpToQSquaredOnDisc) {
    auto alg = make_exact_algebra(1, 1);
    Ex z = alg->gen(1, 1);
    Ex y = alg->one() - alg->mul(z, alg->gen(1, 1, true));
    EXPECT_EQ(alg->build_y(), y);
    EXPECT_EQ(alg->mul(y, z), qp(2) * alg->mul(z, y));
}

TEST(Mul, Associative) {
    std::mt19937_64 rng(21);
    auto alg = make_exact_algebra(2, 2);
    for (int i = 0; i < 15; ++i) {
        Ex f = random_element(rng, *alg, 2), g = random_element(rng, *alg, 2), h = random_element(rng, *alg, 2);
        EXPECT_EQ(alg->mul(alg->mul(f, g), h), alg->mul(f, alg->mul(g, h)));
    }
}

TEST(Star, Examples) {
    auto alg = make_exact_algebra(1, 1);
    Ex z = alg->gen(1, 1), zs = alg->gen(1, 1, true);
    EXPECT_EQ(alg->star(z), zs);
    EXPECT_EQ(alg->star(zs), z);
    Ex f = alg->one() + alg->mul(z, zs);
    EXPECT_EQ(alg->star(f), f);
    EXPECT_EQ(alg->star(qp(2) * z), qp(2) * zs);
}

TEST(Star, IsInvolutiveAntihomomorphism) {
    std::mt19937_64 rng(22);
    for (auto [m, n] : {std::pair{1, 2}, {2, 2}, {2, 3}}) {
        auto alg = make_exact_algebra(m, n);
        for (int i = 0; i < 20; ++i) {
            Ex f = random_element(rng, *alg, 2), g = random_element(rng, *alg, 2);
            EXPECT_EQ(alg->star(alg->mul(f, g)), alg->mul(alg->star(g), alg->star(f)));
            EXPECT_EQ(alg->star(alg->star(f)), f);
        }
    }
}

TEST(QMinor, SingleEntry) {
    auto alg = make_exact_algebra(2, 3);
    EXPECT_EQ(alg->qminor({2}, {3}), alg->gen(2, 3));
}

TEST(QMinor, TwoByTwo) {
    auto alg = make_exact_algebra(2, 2);
    const Shape& s = alg->shape();
    Ex expect(s, mono(s, {{1, 1}, {2, 2}}), QRational(1));
    expect.add(mono(s, {{1, 2}, {2, 1}}), -q);
    EXPECT_EQ(alg->qminor({1, 2}, {1, 2}), expect);
}

TEST(QMinor, Errors) {
    auto alg = make_exact_algebra(2, 2);
    try {
        alg->qminor({1, 2}, {1});
        FAIL();
    } catch (const std::invalid_argument& e) {
        EXPECT_STREQ(e.what(), "q-minor size mismatch");
    }
    EXPECT_THROW(alg->qminor({2, 1}, {1, 2}), std::invalid_argument);
}

TEST(QMinor, ClassicalDeterminant) {
    auto alg = make_exact_algebra(3, 3);
    Ex d = alg->qminor({1, 2, 3}, {1, 2, 3});
    std::vector<std::vector<std::complex<double>>> z = {{{0.3, 0.1}, {0.2, 0}, {-0.1, 0.2}},
                                                        {{0.0, -0.3}, {0.4, 0.1}, {0.1, 0}},
                                                        {{0.2, 0.2}, {-0.1, 0}, {0.5, -0.1}}};
    auto e = [&](int i, int j) { return z[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; };
    std::complex<double> det = e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) -
                               e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0)) +
                               e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0));
    EXPECT_LT(std::abs(classical_eval(d, z) - det), 1e-14);
}

TEST(BuildY, Ball) {
    for (int n : {1, 2, 3}) {
        auto alg = make_exact_algebra(1, n);
        Ex expect = alg->one();
        for (int a = 1; a <= n; ++a) expect -= alg->mul(alg->gen(1, a), alg->gen(1, a, true));
        EXPECT_EQ(alg->build_y(), expect) << "n=" << n;
    }
}

TEST(BuildY, TwoByTwo) {
    auto alg = make_exact_algebra(2, 2);
    Ex expect = alg->one();
    for (int a = 1; a <= 2; ++a)
        for (int al = 1; al <= 2; ++al) expect -= alg->mul(alg->gen(al, a), alg->gen(al, a, true));
    // Minor written out by hand, independent of qminor().
    Ex minor = alg->mul(alg->gen(1, 1), alg->gen(2, 2)) - q * alg->mul(alg->gen(2, 1), alg->gen(1, 2));
    expect += alg->mul(minor, alg->star(minor));
    EXPECT_EQ(alg->build_y(), expect);
}

TEST(BuildY, RequiresMAtMostN) { EXPECT_THROW(make_exact_algebra(2, 1)->build_y(), std::invalid_argument); }

TEST(BuildY, SelfAdjoint) {
    for (auto [m, n] : {std::pair{1, 1}, {1, 2}, {2, 2}, {2, 3}}) {
        auto alg = make_exact_algebra(m, n);
        Ex y = alg->build_y();
        EXPECT_EQ(alg->star(y), y);
    }
}

TEST(BuildY, GeneratorsQCommute) {
    for (auto [m, n] : {std::pair{1, 1}, {1, 2}, {2, 2}, {2, 3}}) {
        auto alg = make_exact_algebra(m, n);
        Ex y = alg->build_y();
        for (int a = 1; a <= n; ++a)
            for (int al = 1; al <= m; ++al) {
                Ex z = alg->gen(al, a), zs = alg->gen(al, a, true);
                EXPECT_EQ(alg->mul(z, y), qp(-2) * alg->mul(y, z));
                EXPECT_EQ(alg->mul(zs, y), qp(2) * alg->mul(y, zs));
            }
    }
}

TEST(Bidegree, Split) {
    auto alg = make_exact_algebra(1, 1);
    const Shape& s = alg->shape();
    Ex zzs = alg->mul(alg->gen(1, 1), alg->gen(1, 1, true));
    auto p = bidegree_split(zzs);
    ASSERT_EQ(p.size(), 1u);
    EXPECT_EQ(p.at({1, -1}), zzs);

    auto py = bidegree_split(alg->build_y());
    ASSERT_EQ(py.size(), 2u);
    EXPECT_EQ(py.at({0, 0}), alg->one());
    EXPECT_EQ(py.at({1, -1}), QRational(-1) * zzs);

    auto pn = bidegree_split(alg->normal_form(parse_word("zs[1,1] z[1,1]", s)));
    ASSERT_EQ(pn.size(), 2u);
    EXPECT_EQ(pn.at({1, -1}), qp(2) * zzs);
    EXPECT_EQ(pn.at({0, 0}), (QRational(1) - qp(2)) * alg->one());
}

TEST(Classical, Examples) {
    auto alg = make_exact_algebra(2, 2);
    std::vector<std::vector<std::complex<double>>> z = {{0.5, 0}, {0, 0.3}};
    EXPECT_NEAR(classical_eval(alg->build_y(), z).real(), 0.75 * 0.91, 1e-14);
    EXPECT_EQ(classical_eval(alg->one(), z), std::complex<double>(1));
    EXPECT_THROW(classical_eval(alg->one(), {{0.5, 0}}), std::invalid_argument);
}

TEST(Classical, PoleAtOneThrows) {
    auto alg = make_exact_algebra(1, 1);
    Ex f = (QRational(1) / (QRational(1) - q)) * alg->one();
    EXPECT_THROW(classical_eval(f, {{0.1}}), std::domain_error);
}

TEST(Pbw, HolomorphicDimension) {
    for (auto [m, n] : {std::pair{1, 1}, {1, 2}, {1, 3}, {1, 4}, {1, 5}, {1, 6}, {2, 2}, {2, 3}, {3, 2}}) {
        auto alg = make_exact_algebra(m, n);
        const int g = m * n;
        for (int k = 0; k <= 5; ++k) {
            std::set<Monomial> seen;
            Word w(static_cast<std::size_t>(k));
            std::vector<int> idx(static_cast<std::size_t>(k), 0);
            while (true) {
                for (int i = 0; i < k; ++i) w[static_cast<std::size_t>(i)] = {idx[static_cast<std::size_t>(i)], false};
                Ex f = alg->normal_form(w);
                for (const auto& [mo, c] : f.terms()) {
                    EXPECT_EQ(mo.zdeg(), k);
                    EXPECT_EQ(mo.zsdeg(), 0);
                    seen.insert(mo);
                }
                int i = 0;
                while (i < k && ++idx[static_cast<std::size_t>(i)] == g) idx[static_cast<std::size_t>(i++)] = 0;
                if (i == k) break;
            }
            EXPECT_EQ(static_cast<long>(seen.size()), binomial(k + g - 1, g - 1)) << m << "x" << n << " k=" << k;
        }
    }
}

TEST(Rewriting, StrategiesAgree) {
    std::mt19937_64 rng(23);
    int checked = 0;
    for (auto [m, n] : {std::pair{1, 1}, {1, 2}, {2, 1}, {2, 2}}) {
        auto alg = make_exact_algebra(m, n);
        for (int i = 0; i < 60; ++i, ++checked) {
            Word w = random_word(rng, alg->shape(), 6);
            Ex s = alg->normal_form(w, Strategy::Structured);
            EXPECT_EQ(alg->normal_form(w, Strategy::LeftmostRewrite), s);
            EXPECT_EQ(alg->normal_form(w, Strategy::RightmostRewrite), s);
        }
    }
    EXPECT_GE(checked, 200);
}

TEST(Rewriting, DegreesNeverGrow) {
    std::mt19937_64 rng(24);
    auto alg = make_exact_algebra(2, 2);
    for (int i = 0; i < 100; ++i) {
        Word w = random_word(rng, alg->shape(), 6);
        int zc = 0, sc = 0;
        for (const auto& l : w) (l.starred ? sc : zc)++;
        const Ex f = alg->normal_form(w);
        for (const auto& [mo, c] : f.terms()) {
            EXPECT_LE(mo.zdeg(), zc);
            EXPECT_LE(mo.zsdeg(), sc);
            EXPECT_EQ(mo.zdeg() - mo.zsdeg(), zc - sc);
        }
    }
}

TEST(Numeric, MatchesExactEvaluation) {
    std::mt19937_64 rng(25);
    auto ex = make_exact_algebra(2, 2);
    const Real q0("0.45");
    auto nu = make_numeric_algebra(2, 2, q0);
    for (int i = 0; i < 20; ++i) {
        Word w = random_word(rng, ex->shape(), 5);
        Element<Real> a = nu->normal_form(w);
        Element<Real> b = ex->normal_form(w).map_coeffs([&](const QRational& c) { return qr_eval(c, q0); });
        for (const auto& [mo, c] : b.terms()) EXPECT_LT(abs(a.coeff(mo) - c), Real("1e-40"));
        for (const auto& [mo, c] : a.terms()) EXPECT_LT(abs(b.coeff(mo) - c), Real("1e-40"));
    }
}
