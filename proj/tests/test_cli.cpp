#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "qmb/json_io.hpp"

using namespace qmb;

namespace {

struct CliRun {
    int status = -1;
    std::string out;
};

// Runs the CLI through the shell; stdin_text, when given, is piped in.
CliRun run_cli(const std::string& args, const std::string& stdin_text = "") {
    std::string cmd;
    if (!stdin_text.empty()) cmd = "printf '%s' '" + stdin_text + "' | ";
    cmd += std::string(QMB_CLI_PATH) + " " + args + " 2>/dev/null";
    CliRun r;
    FILE* p = popen(cmd.c_str(), "r");
    if (p == nullptr) return r;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
    const int raw = pclose(p);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

json fixture(const std::string& name) {
    std::ifstream in(std::string(QMB_FIXTURE_DIR) + "/" + name);
    if (!in) throw std::runtime_error("missing fixture " + name);
    return json::parse(in);
}

Element<QRational> random_element(std::mt19937_64& rng, const Algebra<QRational>& alg) {
    std::uniform_int_distribution<int> len(0, 4), gen(0, alg.shape().gens() - 1), star(0, 1), c(-5, 5), e(-3, 3);
    Word w(static_cast<std::size_t>(len(rng)));
    for (auto& l : w) l = {gen(rng), star(rng) == 1};
    const QRational s = QRational(c(rng)) * QRational::q_pow(e(rng)) / (QRational(1) - QRational::q_pow(2));
    return s * alg.normal_form(w) + alg.one();
}

}  // namespace

TEST(Json, ElementRoundTrip) {
    std::mt19937_64 rng(61);
    auto alg = make_exact_algebra(2, 3);
    for (int i = 0; i < 30; ++i) {
        Element<QRational> f = random_element(rng, *alg);
        EXPECT_EQ(element_from_json(json::parse(element_to_json(f).dump())), f);
    }
}

TEST(Json, ElementFormat) {
    auto alg = make_exact_algebra(1, 2);
    json j = element_to_json(alg->gen(1, 2, true));
    EXPECT_EQ(j.at("m"), 1);
    EXPECT_EQ(j.at("n"), 2);
    ASSERT_EQ(j.at("terms").size(), 1u);
    EXPECT_EQ(j.at("terms")[0].at("zstar"), json::parse("[[2,1,1]]"));
    EXPECT_EQ(j.at("terms")[0].at("coeff"), "(1*q^0)");
}

TEST(Json, ElementInputErrors) {
    EXPECT_THROW(element_from_json(json::parse(R"({"m":1})")), std::invalid_argument);
    EXPECT_THROW(element_from_json(json::parse(R"({"m":1,"n":1,"terms":[{"z":[[1,1]],"coeff":"1"}]})")),
                 std::invalid_argument);
    EXPECT_THROW(element_from_json(json::parse(R"({"m":1,"n":1,"terms":[{"z":[[2,1,1]],"coeff":"1"}]})")),
                 std::out_of_range);
}

TEST(Json, KernelRoundTrip) {
    for (auto [m, n] : {std::pair{1, 1}, {2, 2}}) {
        auto alg = make_exact_algebra(m, n);
        KernelAlgebra ka(*alg);
        PolyKernel kp = ka.k_poly(3);
        EXPECT_EQ(kernel_from_json(json::parse(kernel_to_json(kp).dump())), kp);
    }
}

TEST(Json, MatrixRoundTrip) {
    auto alg = make_exact_algebra(1, 2);
    FockSpace<QRational> fock(*alg);
    Matrix<QRational> g = fock.gram(3);
    EXPECT_EQ(matrix_from_json(json::parse(matrix_to_json(g).dump())), g);
    EXPECT_THROW(matrix_from_json(json::parse(R"([["1","2"],["3"]])")), std::invalid_argument);
}

TEST(Cli, NormalForm) {
    CliRun r = run_cli("nf --m 1 --n 1 \"zs[1,1] z[1,1]\"");
    ASSERT_EQ(r.status, 0);
    auto alg = make_exact_algebra(1, 1);
    Element<QRational> expect = alg->mul(alg->gen(1, 1), alg->gen(1, 1, true));
    expect = QRational::q_pow(2) * expect + (QRational(1) - QRational::q_pow(2)) * alg->one();
    EXPECT_EQ(element_from_json(json::parse(r.out)), expect);
}

TEST(Cli, StrategiesAgree) {
    const std::string word = "\"zs[2,2] zs[1,1] z[2,1] z[1,2]\"";
    CliRun a = run_cli("nf --m 2 --n 2 " + word);
    CliRun b = run_cli("nf --m 2 --n 2 --strategy leftmost " + word);
    CliRun c = run_cli("nf --m 2 --n 2 --strategy rightmost " + word);
    ASSERT_EQ(a.status, 0);
    EXPECT_EQ(json::parse(a.out), json::parse(b.out));
    EXPECT_EQ(json::parse(a.out), json::parse(c.out));
}

TEST(Cli, TraceClosed) {
    CliRun r = run_cli("trace --m 1 --n 1 --q 0.5 --lambda 2 --closed");
    ASSERT_EQ(r.status, 0);
    json j = json::parse(r.out);
    EXPECT_EQ(j.at("value").get<std::string>().substr(0, 12), "1.3333333333");
    EXPECT_TRUE(j.contains("error_bound"));
}

TEST(Cli, TraceSeriesCarriesBound) {
    CliRun r = run_cli("trace --m 2 --n 2 --q 0.4 --lambda 5 --series");
    ASSERT_EQ(r.status, 0);
    json j = json::parse(r.out);
    const Real v(j.at("value").get<std::string>());
    EXPECT_LT(abs(v - trace_y_closed(2, 2, Real("0.4"), Real(5))) / v, Real("1e-10"));
    EXPECT_LT(Real(j.at("error_bound").get<std::string>()), Real("1e-12"));
}

TEST(Cli, Integrate) {
    CliRun r = run_cli("integrate --q 0.5 --lambda 2", R"({"m":1,"n":1,"terms":[{"z":[[1,1,1]],"zstar":[[1,1,1]],"coeff":"1"}]})");
    ASSERT_EQ(r.status, 0);
    // (1-q^2) q^{2(lambda-1)} / (1-q^{2 lambda}) = 0.75 * 0.25 / 0.9375
    EXPECT_LT(abs(Real(json::parse(r.out).at("value").get<std::string>()) - Real("0.2")), Real("1e-12"));
}

TEST(Cli, Bergman) {
    CliRun r = run_cli("bergman --q 0.6 --lambda 3", R"({"m":1,"n":1,"terms":[{"z":[[1,1,1]],"coeff":"1"}]})");
    ASSERT_EQ(r.status, 0);
    json j = json::parse(r.out);
    ASSERT_EQ(j.at("terms").size(), 1u);
    EXPECT_EQ(j.at("terms")[0].at("z"), json::parse("[[1,1,1]]"));
    EXPECT_LT(abs(Real(j.at("terms")[0].at("coeff").get<std::string>()) - 1), Real("1e-8"));
}

TEST(Cli, KernelCommute) {
    CliRun r = run_cli("kernel commute --m 2 --n 3 --j 1 --k 2 --trunc 4");
    ASSERT_EQ(r.status, 0);
    EXPECT_TRUE(json::parse(r.out).at("zero").get<bool>());
}

TEST(Cli, UsageErrors) {
    for (const char* args : {"nf --m 1", "trace --m 1 --n 1 --q 0.5 --lambda 1", "trace --m 1 --n 1 --q 1.5 --lambda 3",
                                   "kernel chi --m 2 --n 2 --k 3", "nf --m 1 --n 1 \"z[2,1]\"", "bogus"}) {
        CliRun r = run_cli(args);
        EXPECT_EQ(r.status, 1) << args;
        json j = json::parse(r.out);
        EXPECT_EQ(j.at("error").at("kind"), "usage") << args;
        EXPECT_FALSE(j.at("error").at("message").get<std::string>().empty());
    }
    CliRun bad = run_cli("integrate --q 0.5 --lambda 2", "not json");
    EXPECT_EQ(bad.status, 1);
}

TEST(Cli, ComputationErrorExitsTwo) {
    // The coefficient 1/(1 - 2q) has a pole at q = 0.5.
    CliRun r = run_cli("integrate --q 0.5 --lambda 2", R"j({"m":1,"n":1,"terms":[{"coeff":"(1*q^0)/(1*q^0 + -2*q^1)"}]})j");
    EXPECT_EQ(r.status, 2);
    json j = json::parse(r.out);
    EXPECT_EQ(j.at("error").at("kind"), "computation");
    EXPECT_EQ(j.at("error").at("message"), "pole at evaluation point");
}

TEST(Fixtures, MatchCurrentOutput) {
    const std::pair<const char*, const char*> cases[] = {
        {"nf --m 1 --n 1 \"zs[1,1] z[1,1]\"", "nf_disc_star_z.json"},
        {"nf --m 2 --n 2 \"zs[1,2] z[2,1] z[1,1]\"", "nf_2x2_word.json"},
        {"kernel chi --m 2 --n 2 --k 2", "chi2_2x2.json"},
        {"kernel K --m 1 --n 1 --trunc 3 --poly", "kpoly_1x1_t3.json"},
        {"kernel K --m 1 --n 2 --trunc 2 --poly", "kpoly_1x2_t2.json"},
        {"gram --m 1 --n 2 --deg 2", "gram_1x2_k2.json"},
        {"theta --m 2 --n 2 --gen \"zs[1,2]\" --deg 2", "theta_2x2_zs12_k2.json"},
    };
    for (const auto& [args, file] : cases) {
        CliRun r = run_cli(args);
        ASSERT_EQ(r.status, 0) << args;
        EXPECT_EQ(json::parse(r.out), fixture(file)) << args;
    }
}

TEST(Fixtures, DecodeToKnownValues) {
    // Disc kernel: coefficient of z (x) z* is (1 - u)/(1 - q^2).
    PolyKernel k = kernel_from_json(fixture("kpoly_1x1_t3.json"));
    Monomial l, r;
    l.z[0] = 1;
    r.zs[0] = 1;
    const QRational d = QRational(1) - QRational::q_pow(2);
    EXPECT_EQ(k.coeff(l, r), UPoly<QRational>(std::vector<QRational>{QRational(1) / d, QRational(-1) / d}));

    // Ball Gram on H_2 is diagonal.
    Matrix<QRational> g = matrix_from_json(fixture("gram_1x2_k2.json"));
    for (int i = 0; i < g.rows(); ++i)
        for (int j = 0; j < g.cols(); ++j)
            if (i != j) {
                EXPECT_TRUE(g(i, j).is_zero());
            }
}

TEST(Cli, SelftestReportsEveryCriterion) {
    CliRun r = run_cli("selftest --quick --json");
    json j = json::parse(r.out);
    ASSERT_EQ(j.size(), 10u);
    bool all = true;
    for (std::size_t i = 0; i < j.size(); ++i) {
        EXPECT_EQ(j[i].at("id"), static_cast<int>(i) + 1);
        all = all && j[i].at("passed").get<bool>();
    }
    EXPECT_EQ(r.status, all ? 0 : 3);
}
