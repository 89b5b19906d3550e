// qmb: command-line front end for the quantum matrix ball engine.

#include <cmath>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qmb/acceptance.hpp"
#include "qmb/json_io.hpp"

namespace {

using namespace qmb;

enum Exit { kOk = 0, kUsage = 1, kCompute = 2, kAcceptance = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void print_error(const std::string& kind, const std::string& message) {
    std::cout << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << "\n";
}

json read_stdin_json() {
    std::string text((std::istreambuf_iterator<char>(std::cin)), std::istreambuf_iterator<char>());
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw UsageError(std::string("invalid JSON input: ") + e.what());
    }
}

void check_shape(int m, int n) {
    if (m < 1 || n < 1 || m * n > kMaxGen) throw UsageError("need m, n >= 1 and m*n <= 9");
    if (m > n) throw UsageError("need m <= n");
}

Real parse_real(const std::string& s, const char* what) {
    try {
        return Real(s);
    } catch (const std::exception&) {
        throw UsageError(std::string("invalid number for ") + what + ": " + s);
    }
}

Real parse_q(const std::string& s) {
    Real q0 = parse_real(s, "--q");
    if (!(q0 > 0 && q0 < 1)) throw UsageError("q must lie in (0,1)");
    return q0;
}

IntegralParams make_params(const Shape& shape, const std::string& q, const std::string& lambda, const std::string& eps) {
    IntegralParams p;
    p.q0 = parse_q(q);
    p.lambda = parse_real(lambda, "--lambda");
    p.eps = parse_real(eps, "--eps");
    if (!(p.lambda > shape.N() - 1)) throw UsageError("lambda must exceed N-1 = " + std::to_string(shape.N() - 1));
    return p;
}

json series_json(const SeriesResult& s) {
    return {{"value", to_decimal(s.value, 30)}, {"error_bound", to_decimal(s.tail_bound, 6)}, {"degrees", s.degrees}};
}

Letter parse_gen(const std::string& text, const Shape& shape) {
    Word w = parse_word(text, shape);
    if (w.size() != 1) throw UsageError("--gen expects a single letter z[a,alpha] or zs[a,alpha]");
    return w.front();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum matrix ball: normal ordering, Fock representation, integrals and Bergman kernels"};
    app.require_subcommand(1);

    int m = 1, n = 1, deg = 0, k_index = 1, j_index = 1, trunc = 3;
    std::string word, gen, numeric, q = "0.5", lambda = "3", eps = "1e-14", strategy = "structured";
    bool series = false, closed = false, quick = false, poly = false, as_json = false;

    auto add_shape = [&](CLI::App* sub) {
        sub->add_option("--m", m, "rows")->default_val(1);
        sub->add_option("--n", n, "columns")->default_val(1);
    };

    auto* nf = app.add_subcommand("nf", "normal form of a word of z[a,alpha] / zs[a,alpha] tokens");
    add_shape(nf);
    nf->add_option("word", word, "word")->required();
    nf->add_option("--strategy", strategy, "structured, leftmost or rightmost")->default_val("structured");

    auto* theta = app.add_subcommand("theta", "matrix of Theta(generator) on H_k");
    add_shape(theta);
    theta->add_option("--gen", gen, "generator, e.g. z[1,1] or zs[2,1]")->required();
    theta->add_option("--deg", deg, "source degree k")->required();
    theta->add_option("--numeric", numeric, "evaluate at q0");

    auto* gram = app.add_subcommand("gram", "Gram matrix of the Fock scalar product on H_k");
    add_shape(gram);
    gram->add_option("--deg", deg, "degree k")->required();
    gram->add_option("--numeric", numeric, "evaluate at q0");

    auto* trace = app.add_subcommand("trace", "tr(Theta(y)^lambda Gamma)");
    add_shape(trace);
    trace->add_option("--q", q, "q0 in (0,1)")->required();
    trace->add_option("--lambda", lambda, "lambda > N-1")->required();
    trace->add_option("--eps", eps, "tail tolerance")->default_val("1e-14");
    auto* series_flag = trace->add_flag("--series", series, "sum the multi-index series");
    trace->add_flag("--closed", closed, "product formula")->excludes(series_flag);

    auto* integrate = app.add_subcommand("integrate", "integral of the element read from stdin");
    integrate->add_option("--q", q, "q0 in (0,1)")->required();
    integrate->add_option("--lambda", lambda, "lambda > N-1")->required();
    integrate->add_option("--eps", eps, "tail tolerance")->default_val("1e-14");

    auto* kernel = app.add_subcommand("kernel", "kernel algebra");
    kernel->require_subcommand(1);
    auto* chi = kernel->add_subcommand("chi", "the kernel chi_k");
    add_shape(chi);
    chi->add_option("--k", k_index, "1 <= k <= m")->required();
    auto* kk = kernel->add_subcommand("K", "Bergman kernel K_lambda (or K(u) with --poly)");
    add_shape(kk);
    kk->add_option("--lambda", lambda, "lambda; integral values are exact, others need --q");
    kk->add_option("--q", numeric, "q0 for non-integral lambda");
    kk->add_option("--trunc", trunc, "truncation order")->default_val(3);
    kk->add_flag("--poly", poly, "print the polynomial kernel K(u)");
    auto* commute = kernel->add_subcommand("commute", "commutator [chi_j, chi_k]");
    add_shape(commute);
    commute->add_option("--j", j_index, "j")->required();
    commute->add_option("--k", k_index, "k")->required();
    commute->add_option("--trunc", trunc, "truncation order")->default_val(3);

    auto* bergman = app.add_subcommand("bergman", "Bergman operator applied to the element read from stdin");
    bergman->add_option("--q", q, "q0 in (0,1)")->required();
    bergman->add_option("--lambda", lambda, "lambda > N-1")->required();
    bergman->add_option("--trunc", trunc, "kernel truncation (default: total degree + 1)");
    bergman->add_option("--eps", eps, "tail tolerance")->default_val("1e-14");

    auto* selftest = app.add_subcommand("selftest", "run the acceptance checks");
    selftest->add_flag("--quick", quick, "desk-scale sample counts");
    selftest->add_flag("--json", as_json, "machine-readable report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("usage", e.what());
        return kUsage;
    }

    try {
        if (*nf) {
            check_shape(m, n);
            Strategy s = Strategy::Structured;
            if (strategy == "leftmost")
                s = Strategy::LeftmostRewrite;
            else if (strategy == "rightmost")
                s = Strategy::RightmostRewrite;
            else if (strategy != "structured")
                throw UsageError("unknown strategy " + strategy);
            auto alg = make_exact_algebra(m, n);
            Word w;
            try {
                w = parse_word(word, alg->shape());
            } catch (const std::exception& e) {
                throw UsageError(e.what());
            }
            std::cout << element_to_json(alg->normal_form(w, s)).dump() << "\n";
        } else if (*theta || *gram) {
            check_shape(m, n);
            if (deg < 0) throw UsageError("degree must be >= 0");
            if (numeric.empty()) {
                auto alg = make_exact_algebra(m, n);
                FockSpace<QRational> fock(*alg);
                Matrix<QRational> mat = *theta ? fock.gen_block(parse_gen(gen, alg->shape()), deg).matrix : fock.gram(deg);
                std::cout << matrix_to_json(mat).dump() << "\n";
            } else {
                const Real q0 = parse_q(numeric);
                auto alg = make_numeric_algebra(m, n, q0);
                FockSpace<Real> fock(*alg);
                Matrix<Real> mat = *theta ? fock.gen_block(parse_gen(gen, alg->shape()), deg).matrix : fock.gram(deg);
                std::cout << matrix_to_json(mat).dump() << "\n";
            }
        } else if (*trace) {
            check_shape(m, n);
            Shape shape(m, n);
            IntegralParams p = make_params(shape, q, lambda, eps);
            if (series) {
                std::cout << series_json(trace_y_series(m, n, p.q0, p.lambda, p.eps)).dump() << "\n";
            } else {
                std::cout << json{{"value", to_decimal(trace_y_closed(m, n, p.q0, p.lambda), 30)}, {"error_bound", "0"}}.dump()
                          << "\n";
            }
        } else if (*integrate) {
            Element<QRational> f;
            try {
                f = element_from_json(read_stdin_json());
            } catch (const UsageError&) {
                throw;
            } catch (const std::exception& e) {
                throw UsageError(std::string("invalid element: ") + e.what());
            }
            check_shape(f.shape().m, f.shape().n);
            IntegralParams p = make_params(f.shape(), q, lambda, eps);
            NumericModel model(f.shape().m, f.shape().n, p.q0);
            std::cout << series_json(model.nu(f, p)).dump() << "\n";
        } else if (*kernel) {
            check_shape(m, n);
            auto alg = make_exact_algebra(m, n);
            KernelAlgebra ka(*alg);
            if (*chi) {
                if (k_index < 1 || k_index > m) throw UsageError("--k must lie in 1..m");
                std::cout << kernel_to_json(ka.chi(k_index)).dump() << "\n";
            } else if (*kk) {
                if (trunc < 0) throw UsageError("--trunc must be >= 0");
                PolyKernel kp = ka.k_poly(trunc);
                if (poly) {
                    std::cout << kernel_to_json(kp).dump() << "\n";
                } else {
                    const Real lam = parse_real(lambda, "--lambda");
                    const Real rounded = round(lam);
                    if (lam == rounded && abs(rounded) < 10000) {
                        std::cout << kernel_to_json(KernelAlgebra::specialize(kp, QRational::q_pow(2 * rounded.convert_to<int>())))
                                         .dump()
                                  << "\n";
                    } else {
                        if (numeric.empty()) throw UsageError("non-integral lambda needs --q");
                        std::cout << kernel_to_json(k_lambda_numeric(kp, parse_q(numeric), lam)).dump() << "\n";
                    }
                }
            } else if (*commute) {
                if (j_index < 1 || j_index > m || k_index < 1 || k_index > m) throw UsageError("--j, --k must lie in 1..m");
                CommutatorResult res = ka.commutator(j_index, k_index, trunc);
                std::cout << json{{"zero", res.zero}, {"residual", kernel_to_json(res.residual)}}.dump() << "\n";
            }
        } else if (*bergman) {
            Element<QRational> f;
            try {
                f = element_from_json(read_stdin_json());
            } catch (const UsageError&) {
                throw;
            } catch (const std::exception& e) {
                throw UsageError(std::string("invalid element: ") + e.what());
            }
            check_shape(f.shape().m, f.shape().n);
            IntegralParams p = make_params(f.shape(), q, lambda, eps);
            const int total = f.max_zdeg() + f.max_zsdeg();
            const int d = bergman->count("--trunc") ? trunc : total + 1;
            if (d < total) throw UsageError("--trunc must be at least the total degree of the input");
            NumericModel model(f.shape().m, f.shape().n, p.q0);
            auto exact = make_exact_algebra(f.shape().m, f.shape().n);
            KernelAlgebra kernels(*exact);
            Element<Real> out = bergman_apply(model, k_lambda_numeric(kernels.k_poly(d), p.q0, p.lambda), model.lift(f), p);
            json j = element_to_json(out);
            j["error_bound"] = to_decimal(p.eps, 6);
            std::cout << j.dump() << "\n";
        } else if (*selftest) {
            AcceptanceOptions opt;
            opt.quick = quick;
            bool all = true;
            json report = json::array();
            for (const CheckResult& r : run_acceptance(opt)) {
                all = all && r.passed;
                if (as_json)
                    report.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"seconds", r.seconds}, {"detail", r.detail}});
                else
                    std::cout << format_result(r) << std::endl;
            }
            if (as_json) std::cout << report.dump(2) << "\n";
            return all ? kOk : kAcceptance;
        }
    } catch (const UsageError& e) {
        print_error("usage", e.what());
        return kUsage;
    } catch (const std::invalid_argument& e) {
        print_error("usage", e.what());
        return kUsage;
    } catch (const std::exception& e) {
        print_error("computation", e.what());
        return kCompute;
    }
    return kOk;
}
