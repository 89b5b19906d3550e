#pragma once

// The *-algebra Pol(Mat_mn)_q: PBW monomials, elements, and the normal-ordering engine.
//
// Generators z_a^alpha (row alpha in 1..m, column a in 1..n) are numbered column-major,
// g = (a-1)*m + (alpha-1), which is the canonical PBW order. A normal monomial is
// all z factors in ascending g followed by all z* factors in ascending g.

#include <algorithm>
#include <array>
#include <compare>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qmb/coeff.hpp"

namespace qmb {

inline constexpr int kMaxGen = 9;

struct GenIndex {
    int row = 1;  // alpha
    int col = 1;  // a
    bool starred = false;
    friend bool operator==(const GenIndex&, const GenIndex&) = default;
};

/// Sizes of the matrix space and the generator numbering.
struct Shape {
    int m = 1;
    int n = 1;

    Shape() = default;
    Shape(int m_, int n_) : m(m_), n(n_) {
        if (m < 1 || n < 1 || m * n > kMaxGen)
            throw std::invalid_argument("unsupported dimensions m=" + std::to_string(m) + ", n=" + std::to_string(n));
    }
    int gens() const { return m * n; }
    int N() const { return m + n; }
    int gen(int row, int col) const {
        if (row < 1 || row > m || col < 1 || col > n)
            throw std::out_of_range("generator index z[" + std::to_string(col) + "," + std::to_string(row) +
                                    "] outside " + std::to_string(m) + "x" + std::to_string(n));
        return (col - 1) * m + (row - 1);
    }
    int row_of(int g) const { return g % m + 1; }
    int col_of(int g) const { return g / m + 1; }
    friend bool operator==(const Shape&, const Shape&) = default;
};

/// Normal-ordered monomial: z-exponents followed by z*-exponents, indexed by generator number.
struct Monomial {
    std::array<std::uint8_t, kMaxGen> z{};
    std::array<std::uint8_t, kMaxGen> zs{};

    auto operator<=>(const Monomial&) const = default;

    int zdeg() const {
        int d = 0;
        for (auto e : z) d += e;
        return d;
    }
    int zsdeg() const {
        int d = 0;
        for (auto e : zs) d += e;
        return d;
    }
    bool is_one() const { return zdeg() == 0 && zsdeg() == 0; }
    bool holomorphic() const { return zsdeg() == 0; }
    Monomial z_part() const {
        Monomial r;
        r.z = z;
        return r;
    }
    Monomial zs_part() const {
        Monomial r;
        r.zs = zs;
        return r;
    }
    static Monomial gen(int g, bool starred = false) {
        Monomial r;
        (starred ? r.zs : r.z)[static_cast<std::size_t>(g)] = 1;
        return r;
    }
};

struct MonomialHash {
    std::size_t operator()(const Monomial& mono) const noexcept {
        std::size_t h = 1469598103934665603ull;
        for (auto e : mono.z) h = (h ^ e) * 1099511628211ull;
        for (auto e : mono.zs) h = (h ^ e) * 1099511628211ull;
        return h;
    }
};

struct MonomialPairHash {
    std::size_t operator()(const std::pair<Monomial, Monomial>& p) const noexcept {
        MonomialHash h;
        return h(p.first) * 31 + h(p.second);
    }
};

struct MonomialLetterHash {
    std::size_t operator()(const std::pair<Monomial, int>& p) const noexcept {
        return MonomialHash{}(p.first) * 17 + static_cast<std::size_t>(p.second);
    }
};

/// Finite linear combination of normal monomials.
template <class C>
class Element {
public:
    using Terms = std::map<Monomial, C>;

    Element() = default;
    explicit Element(Shape shape) : shape_(shape) {}
    Element(Shape shape, const Monomial& mono, C coeff) : shape_(shape) { add(mono, std::move(coeff)); }

    const Shape& shape() const { return shape_; }
    const Terms& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    C coeff(const Monomial& mono) const {
        auto it = terms_.find(mono);
        return it == terms_.end() ? C(0) : it->second;
    }

    void add(const Monomial& mono, const C& c) {
        if (coeff_traits<C>::is_zero(c)) return;
        auto [it, inserted] = terms_.try_emplace(mono, c);
        if (!inserted) {
            it->second += c;
            if (coeff_traits<C>::is_zero(it->second)) terms_.erase(it);
        }
    }
    void add_scaled(const Element& other, const C& s) {
        for (const auto& [mono, c] : other.terms_) add(mono, c * s);
    }

    Element& operator+=(const Element& o) {
        check_shape(o);
        for (const auto& [mono, c] : o.terms_) add(mono, c);
        return *this;
    }
    Element& operator-=(const Element& o) {
        check_shape(o);
        for (const auto& [mono, c] : o.terms_) add(mono, -c);
        return *this;
    }
    friend Element operator+(Element a, const Element& b) { return a += b; }
    friend Element operator-(Element a, const Element& b) { return a -= b; }
    friend Element operator*(const C& s, const Element& a) {
        Element r(a.shape_);
        for (const auto& [mono, c] : a.terms_) r.add(mono, s * c);
        return r;
    }
    friend bool operator==(const Element& a, const Element& b) {
        return a.shape_ == b.shape_ && a.terms_ == b.terms_;
    }

    int max_zdeg() const {
        int d = 0;
        for (const auto& t : terms_) d = std::max(d, t.first.zdeg());
        return d;
    }
    int max_zsdeg() const {
        int d = 0;
        for (const auto& t : terms_) d = std::max(d, t.first.zsdeg());
        return d;
    }

    /// Drops every term carrying a z* factor.
    Element holomorphic_part() const {
        Element r(shape_);
        for (const auto& [mono, c] : terms_)
            if (mono.holomorphic()) r.terms_.emplace(mono, c);
        return r;
    }

    template <class F>
    auto map_coeffs(F&& f) const {
        using D = std::decay_t<decltype(f(std::declval<const C&>()))>;
        Element<D> r(shape_);
        for (const auto& [mono, c] : terms_) r.add(mono, f(c));
        return r;
    }

private:
    void check_shape(const Element& o) const {
        if (!(shape_ == o.shape_)) throw std::invalid_argument("dimension mismatch");
    }

    Shape shape_;
    Terms terms_;
};

/// Free word in the generators, read left to right.
struct Letter {
    int gen = 0;
    bool starred = false;
    friend bool operator==(const Letter&, const Letter&) = default;
};
using Word = std::vector<Letter>;

enum class Strategy { Structured, LeftmostRewrite, RightmostRewrite };

/// Parses "z[a,alpha] zs[b,beta] ..." (column first) into a word.
inline Word parse_word(std::string_view text, const Shape& shape) {
    Word w;
    std::size_t i = 0;
    auto skip = [&] {
        while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == '\n' || text[i] == '*')) ++i;
    };
    auto read_int = [&] {
        std::size_t start = i;
        while (i < text.size() && text[i] >= '0' && text[i] <= '9') ++i;
        if (start == i) throw std::invalid_argument("malformed word near offset " + std::to_string(start));
        return std::stoi(std::string(text.substr(start, i - start)));
    };
    skip();
    while (i < text.size()) {
        bool starred = false;
        if (text.substr(i, 3) == "zs[") {
            starred = true;
            i += 3;
        } else if (text.substr(i, 2) == "z[") {
            i += 2;
        } else {
            throw std::invalid_argument("malformed word near offset " + std::to_string(i));
        }
        int col = read_int();
        if (i >= text.size() || text[i] != ',') throw std::invalid_argument("expected ',' in generator token");
        ++i;
        int row = read_int();
        if (i >= text.size() || text[i] != ']') throw std::invalid_argument("expected ']' in generator token");
        ++i;
        w.push_back({shape.gen(row, col), starred});
        skip();
    }
    return w;
}

inline std::string format_letter(const Shape& shape, Letter l) {
    return std::string(l.starred ? "zs[" : "z[") + std::to_string(shape.col_of(l.gen)) + "," +
           std::to_string(shape.row_of(l.gen)) + "]";
}

/// Normal-ordering engine for fixed (m, n) over the coefficient ring C with deformation
/// parameter q (symbolic for QRational, a number for Real). Results are memoized.
template <class C>
class Algebra {
public:
    Algebra(int m, int n, C q) : shape_(m, n), q_(std::move(q)) { build_rules(); }
    Algebra(const Algebra&) = delete;
    Algebra& operator=(const Algebra&) = delete;

    const Shape& shape() const { return shape_; }
    int m() const { return shape_.m; }
    int n() const { return shape_.n; }
    const C& q() const { return q_; }

    Element<C> zero() const { return Element<C>(shape_); }
    Element<C> one() const { return Element<C>(shape_, Monomial{}, C(1)); }
    Element<C> gen(int row, int col, bool starred = false) const {
        return Element<C>(shape_, Monomial::gen(shape_.gen(row, col), starred), C(1));
    }
    Element<C> monomial(const Monomial& mono, C c = C(1)) const { return Element<C>(shape_, mono, std::move(c)); }

    /// R_{ij}^{kl} of the defining relations.
    C r_matrix(int i, int j, int k, int l) const {
        if (i != j && i == k && j == l) return q_inv_;
        if (i == j && j == k && k == l) return C(1);
        if (i == j && k == l && l > j) return one_minus_q_inv2_;
        return C(0);
    }

    Element<C> mul(const Element<C>& f, const Element<C>& g) const {
        if (!(f.shape() == shape_) || !(g.shape() == shape_)) throw std::invalid_argument("dimension mismatch");
        std::lock_guard lock(mutex_);
        Element<C> out(shape_);
        for (const auto& [a, ca] : f.terms())
            for (const auto& [b, cb] : g.terms()) out.add_scaled(mul_mono(a, b), ca * cb);
        return out;
    }

    Element<C> mul_monomials(const Monomial& a, const Monomial& b) const {
        std::lock_guard lock(mutex_);
        return mul_mono(a, b);
    }

    Element<C> star(const Element<C>& f) const {
        std::lock_guard lock(mutex_);
        Element<C> out(shape_);
        for (const auto& [mono, c] : f.terms()) {
            // (Z S)* = S* Z*: the z-word is S's letters reversed, the z*-word Z's letters reversed.
            Element<C> zpart = fold_letters(mono.zs, false);
            Element<C> spart = fold_letters(mono.z, true);
            for (const auto& [zm, zc] : zpart.terms())
                for (const auto& [sm, sc] : spart.terms()) {
                    Monomial joined;
                    joined.z = zm.z;
                    joined.zs = sm.zs;
                    out.add(joined, c * zc * sc);
                }
        }
        return out;
    }

    Element<C> normal_form(const Word& w, Strategy strategy = Strategy::Structured) const {
        for (const auto& l : w)
            if (l.gen < 0 || l.gen >= shape_.gens()) throw std::out_of_range("generator out of range");
        std::lock_guard lock(mutex_);
        if (strategy == Strategy::Structured) {
            Element<C> acc = one();
            for (const auto& l : w) {
                Element<C> next(shape_);
                Monomial g = Monomial::gen(l.gen, l.starred);
                for (const auto& [mono, c] : acc.terms()) next.add_scaled(mul_mono(mono, g), c);
                acc = std::move(next);
            }
            return acc;
        }
        return rewrite(w, strategy == Strategy::LeftmostRewrite);
    }

    /// z^{wedge k} with rows J' (alphas) and columns J'' (a's), both strictly increasing.
    Element<C> qminor(const std::vector<int>& rows, const std::vector<int>& cols) const {
        if (rows.size() != cols.size() || rows.empty()) throw std::invalid_argument("q-minor size mismatch");
        for (std::size_t i = 1; i < rows.size(); ++i)
            if (rows[i] <= rows[i - 1] || cols[i] <= cols[i - 1])
                throw std::invalid_argument("q-minor indices must be strictly increasing");
        const std::size_t k = rows.size();
        std::vector<std::size_t> perm(k);
        for (std::size_t i = 0; i < k; ++i) perm[i] = i;
        Element<C> out(shape_);
        do {
            int inversions = 0;
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = i + 1; j < k; ++j)
                    if (perm[i] > perm[j]) ++inversions;
            Word w;
            for (std::size_t i = 0; i < k; ++i) w.push_back({shape_.gen(rows[perm[i]], cols[i]), false});
            C sign = (inversions % 2 == 0) ? C(1) : C(-1);
            C weight = sign * power(q_, inversions);
            out.add_scaled(normal_form(w), weight);
        } while (std::next_permutation(perm.begin(), perm.end()));
        return out;
    }

    /// y = 1 + sum_k (-1)^k sum_{J',J''} z^{wedge k} (z^{wedge k})*.
    Element<C> build_y() const {
        if (m() > n()) throw std::invalid_argument("build_y requires m <= n");
        Element<C> y = one();
        for (int k = 1; k <= m(); ++k) {
            C sign = (k % 2 == 0) ? C(1) : C(-1);
            for (const auto& rows : subsets(m(), k))
                for (const auto& cols : subsets(n(), k)) {
                    Element<C> minor = qminor(rows, cols);
                    y.add_scaled(mul(minor, star(minor)), sign);
                }
        }
        return y;
    }

    /// z_g Z for a holomorphic monomial Z.
    Element<C> left_gen_times(int g, const Monomial& z_mono) const {
        std::lock_guard lock(mutex_);
        return zz_mul(Monomial::gen(g), z_mono);
    }
    /// z*_g Z for a holomorphic monomial Z.
    Element<C> left_star_times(int g, const Monomial& z_mono) const {
        std::lock_guard lock(mutex_);
        return sz_left(g, z_mono);
    }

    /// All k-element subsets of {1..n} in lexicographic order.
    static std::vector<std::vector<int>> subsets(int n, int k) {
        std::vector<std::vector<int>> out;
        std::vector<int> cur;
        auto rec = [&](auto&& self, int start) -> void {
            if (static_cast<int>(cur.size()) == k) {
                out.push_back(cur);
                return;
            }
            for (int i = start; i <= n; ++i) {
                cur.push_back(i);
                self(self, i + 1);
                cur.pop_back();
            }
        };
        rec(rec, 1);
        return out;
    }

    static C power(const C& x, int k) {
        C r(1);
        for (int i = 0; i < k; ++i) r *= x;
        return r;
    }

private:
    struct PairTerm {
        C coeff;
        int first;
        int second;
    };

    void build_rules() {
        const int g = shape_.gens();
        q_inv_ = C(1) / q_;
        q2_ = q_ * q_;
        one_minus_q2_ = C(1) - q2_;
        one_minus_q_inv2_ = C(1) - q_inv_ * q_inv_;
        C q_minus_qinv = q_ - q_inv_;
        zz_.assign(static_cast<std::size_t>(g * g), {});
        ss_.assign(static_cast<std::size_t>(g * g), {});
        sz_.assign(static_cast<std::size_t>(g * g), {});
        for (int x = 0; x < g; ++x) {
            for (int y = 0; y < g; ++y) {
                auto idx = static_cast<std::size_t>(x * g + y);
                int a = shape_.col_of(x), alpha = shape_.row_of(x);
                int b = shape_.col_of(y), beta = shape_.row_of(y);
                if (x > y) {
                    // z_x z_y out of order (key (a,alpha) > (b,beta)).
                    if (a == b) {
                        zz_[idx] = {{q_inv_, y, x}};
                        ss_[idx] = {{q_, y, x}};
                    } else if (alpha == beta) {
                        zz_[idx] = {{q_inv_, y, x}};
                        ss_[idx] = {{q_, y, x}};
                    } else if (alpha < beta) {
                        zz_[idx] = {{C(1), y, x}};
                        ss_[idx] = {{C(1), y, x}};
                    } else {
                        // a > b, alpha > beta
                        int lo = shape_.gen(alpha, b), hi = shape_.gen(beta, a);
                        zz_[idx] = {{C(1), y, x}, {-q_minus_qinv, lo, hi}};
                        // starred image: z*_x z*_y = z*_y z*_x + (q - q^{-1}) (z_b^alpha)* (z_a^beta)*
                        ss_[idx] = {{C(1), y, x}, {q_minus_qinv, shape_.gen(alpha, b), shape_.gen(beta, a)}};
                    }
                }
                // z*_x z_y = q^2 sum R_{b a}^{b' a'} R_{beta alpha}^{beta' alpha'} z_{a'}^{alpha'} z*_{b'}^{beta'}
                // with x = (b, beta) starred and y = (a, alpha).
                {
                    int sb = shape_.col_of(x), sbeta = shape_.row_of(x);
                    int ta = shape_.col_of(y), talpha = shape_.row_of(y);
                    std::vector<PairTerm> terms;
                    for (int b2 = 1; b2 <= shape_.n; ++b2)
                        for (int a2 = 1; a2 <= shape_.n; ++a2) {
                            C rc = r_matrix(sb, ta, b2, a2);
                            if (coeff_traits<C>::is_zero(rc)) continue;
                            for (int beta2 = 1; beta2 <= shape_.m; ++beta2)
                                for (int alpha2 = 1; alpha2 <= shape_.m; ++alpha2) {
                                    C rr = r_matrix(sbeta, talpha, beta2, alpha2);
                                    if (coeff_traits<C>::is_zero(rr)) continue;
                                    terms.push_back({q2_ * rc * rr, shape_.gen(alpha2, a2), shape_.gen(beta2, b2)});
                                }
                        }
                    sz_[idx] = std::move(terms);
                }
            }
        }
    }

    const std::vector<PairTerm>& zz_rule(int x, int y) const { return zz_[static_cast<std::size_t>(x * shape_.gens() + y)]; }
    const std::vector<PairTerm>& ss_rule(int x, int y) const { return ss_[static_cast<std::size_t>(x * shape_.gens() + y)]; }
    const std::vector<PairTerm>& sz_rule(int s, int t) const { return sz_[static_cast<std::size_t>(s * shape_.gens() + t)]; }

    static int max_letter(const std::array<std::uint8_t, kMaxGen>& e) {
        for (int g = kMaxGen - 1; g >= 0; --g)
            if (e[static_cast<std::size_t>(g)]) return g;
        return -1;
    }
    static int min_letter(const std::array<std::uint8_t, kMaxGen>& e) {
        for (int g = 0; g < kMaxGen; ++g)
            if (e[static_cast<std::size_t>(g)]) return g;
        return -1;
    }

    // Z * z_g for holomorphic Z.
    Element<C> zz_right(const Monomial& z_mono, int g) const {
        int t = max_letter(z_mono.z);
        if (t <= g) {
            Monomial r = z_mono;
            ++r.z[static_cast<std::size_t>(g)];
            return Element<C>(shape_, r, C(1));
        }
        auto key = std::make_pair(z_mono, g);
        if (auto it = zz_right_cache_.find(key); it != zz_right_cache_.end()) return it->second;
        Monomial rest = z_mono;
        --rest.z[static_cast<std::size_t>(t)];
        Element<C> out(shape_);
        for (const auto& rule : zz_rule(t, g)) {
            Element<C> first = zz_right(rest, rule.first);
            for (const auto& [mono, c] : first.terms()) out.add_scaled(zz_right(mono, rule.second), rule.coeff * c);
        }
        zz_right_cache_.emplace(key, out);
        return out;
    }

    // S * z*_g for a z*-only S.
    Element<C> ss_right(const Monomial& s_mono, int g) const {
        int t = max_letter(s_mono.zs);
        if (t <= g) {
            Monomial r = s_mono;
            ++r.zs[static_cast<std::size_t>(g)];
            return Element<C>(shape_, r, C(1));
        }
        auto key = std::make_pair(s_mono, g);
        if (auto it = ss_right_cache_.find(key); it != ss_right_cache_.end()) return it->second;
        Monomial rest = s_mono;
        --rest.zs[static_cast<std::size_t>(t)];
        Element<C> out(shape_);
        for (const auto& rule : ss_rule(t, g)) {
            Element<C> first = ss_right(rest, rule.first);
            for (const auto& [mono, c] : first.terms()) out.add_scaled(ss_right(mono, rule.second), rule.coeff * c);
        }
        ss_right_cache_.emplace(key, out);
        return out;
    }

    Element<C> zz_mul(const Monomial& a, const Monomial& b) const {
        if (b.zdeg() == 0) return Element<C>(shape_, a, C(1));
        if (a.zdeg() == 0) return Element<C>(shape_, b, C(1));
        auto key = std::make_pair(a, b);
        if (auto it = zz_cache_.find(key); it != zz_cache_.end()) return it->second;
        Element<C> acc(shape_, a, C(1));
        for (int g = 0; g < shape_.gens(); ++g)
            for (int e = 0; e < b.z[static_cast<std::size_t>(g)]; ++e) {
                Element<C> next(shape_);
                for (const auto& [mono, c] : acc.terms()) next.add_scaled(zz_right(mono, g), c);
                acc = std::move(next);
            }
        zz_cache_.emplace(key, acc);
        return acc;
    }

    Element<C> ss_mul(const Monomial& a, const Monomial& b) const {
        if (b.zsdeg() == 0) return Element<C>(shape_, a, C(1));
        if (a.zsdeg() == 0) return Element<C>(shape_, b, C(1));
        auto key = std::make_pair(a, b);
        if (auto it = ss_cache_.find(key); it != ss_cache_.end()) return it->second;
        Element<C> acc(shape_, a, C(1));
        for (int g = 0; g < shape_.gens(); ++g)
            for (int e = 0; e < b.zs[static_cast<std::size_t>(g)]; ++e) {
                Element<C> next(shape_);
                for (const auto& [mono, c] : acc.terms()) next.add_scaled(ss_right(mono, g), c);
                acc = std::move(next);
            }
        ss_cache_.emplace(key, acc);
        return acc;
    }

    // z*_s Z for holomorphic Z; every result term has at most one z* factor.
    Element<C> sz_left(int s, const Monomial& z_mono) const {
        int t = min_letter(z_mono.z);
        if (t < 0) return Element<C>(shape_, Monomial::gen(s, true), C(1));
        auto key = std::make_pair(z_mono, s);
        if (auto it = sz_cache_.find(key); it != sz_cache_.end()) return it->second;
        Monomial rest = z_mono;
        --rest.z[static_cast<std::size_t>(t)];
        Element<C> out(shape_);
        for (const auto& rule : sz_rule(s, t)) {
            Element<C> inner = sz_left(rule.second, rest);
            for (const auto& [mono, c] : inner.terms()) {
                Element<C> left = zz_mul(Monomial::gen(rule.first), mono.z_part());
                for (const auto& [lm, lc] : left.terms()) {
                    Monomial joined = lm;
                    joined.zs = mono.zs;
                    out.add(joined, rule.coeff * c * lc);
                }
            }
        }
        if (s == t) out.add(rest, one_minus_q2_);
        sz_cache_.emplace(key, out);
        return out;
    }

    // S Z for z*-only S and holomorphic Z.
    Element<C> cross(const Monomial& s_mono, const Monomial& z_mono) const {
        if (s_mono.zsdeg() == 0 || z_mono.zdeg() == 0) {
            Monomial joined;
            joined.z = z_mono.z;
            joined.zs = s_mono.zs;
            return Element<C>(shape_, joined, C(1));
        }
        auto key = std::make_pair(s_mono, z_mono);
        if (auto it = cross_cache_.find(key); it != cross_cache_.end()) return it->second;
        int s = max_letter(s_mono.zs);
        Monomial rest = s_mono;
        --rest.zs[static_cast<std::size_t>(s)];
        Element<C> out(shape_);
        const Element<C> first = sz_left(s, z_mono);
        for (const auto& [m1, c1] : first.terms()) {
            Element<C> inner = cross(rest, m1.z_part());
            for (const auto& [m2, c2] : inner.terms()) {
                Element<C> tail = ss_mul(m2.zs_part(), m1.zs_part());
                for (const auto& [m3, c3] : tail.terms()) {
                    Monomial joined;
                    joined.z = m2.z;
                    joined.zs = m3.zs;
                    out.add(joined, c1 * c2 * c3);
                }
            }
        }
        cross_cache_.emplace(key, out);
        return out;
    }

    // (Z1 S1)(Z2 S2) = Z1 (S1 Z2) S2.
    Element<C> mul_mono(const Monomial& a, const Monomial& b) const {
        if (a.is_one()) return Element<C>(shape_, b, C(1));
        if (b.is_one()) return Element<C>(shape_, a, C(1));
        Element<C> out(shape_);
        const Element<C> middle = cross(a.zs_part(), b.z_part());
        for (const auto& [mid, cm] : middle.terms()) {
            Element<C> left = zz_mul(a.z_part(), mid.z_part());
            Element<C> right = ss_mul(mid.zs_part(), b.zs_part());
            for (const auto& [lm, lc] : left.terms())
                for (const auto& [rm, rc] : right.terms()) {
                    Monomial joined;
                    joined.z = lm.z;
                    joined.zs = rm.zs;
                    out.add(joined, cm * lc * rc);
                }
        }
        return out;
    }

    // Product of the exponent vector's letters taken in descending generator order.
    Element<C> fold_letters(const std::array<std::uint8_t, kMaxGen>& e, bool starred) const {
        Element<C> acc = one();
        for (int g = shape_.gens() - 1; g >= 0; --g)
            for (int k = 0; k < e[static_cast<std::size_t>(g)]; ++k) {
                Element<C> next(shape_);
                for (const auto& [mono, c] : acc.terms())
                    next.add_scaled(starred ? ss_right(mono, g) : zz_right(mono, g), c);
                acc = std::move(next);
            }
        return acc;
    }

    // Plain word rewriting, one adjacent pair at a time.
    Element<C> rewrite(const Word& w, bool leftmost) const {
        std::string key(w.size(), '\0');
        for (std::size_t i = 0; i < w.size(); ++i)
            key[i] = static_cast<char>(w[i].gen + (w[i].starred ? 64 : 0));
        auto& cache = leftmost ? left_cache_ : right_cache_;
        if (auto it = cache.find(key); it != cache.end()) return it->second;

        auto out_of_order = [](const Letter& l, const Letter& r) {
            if (l.starred && !r.starred) return true;
            if (l.starred == r.starred) return l.gen > r.gen;
            return false;
        };
        std::optional<std::size_t> pos;
        for (std::size_t i = 0; i + 1 < w.size(); ++i) {
            if (out_of_order(w[i], w[i + 1])) {
                pos = i;
                if (leftmost) break;
            }
        }
        Element<C> out(shape_);
        if (!pos) {
            Monomial mono;
            for (const auto& l : w) ++(l.starred ? mono.zs : mono.z)[static_cast<std::size_t>(l.gen)];
            out.add(mono, C(1));
        } else {
            const std::size_t i = *pos;
            const Letter l = w[i], r = w[i + 1];
            auto splice = [&](const std::vector<Letter>& mid) {
                Word nw(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(i));
                nw.insert(nw.end(), mid.begin(), mid.end());
                nw.insert(nw.end(), w.begin() + static_cast<std::ptrdiff_t>(i) + 2, w.end());
                return nw;
            };
            if (l.starred && !r.starred) {
                for (const auto& rule : sz_rule(l.gen, r.gen))
                    out.add_scaled(rewrite(splice({{rule.first, false}, {rule.second, true}}), leftmost), rule.coeff);
                if (l.gen == r.gen) out.add_scaled(rewrite(splice({}), leftmost), one_minus_q2_);
            } else {
                const auto& rules = l.starred ? ss_rule(l.gen, r.gen) : zz_rule(l.gen, r.gen);
                for (const auto& rule : rules)
                    out.add_scaled(rewrite(splice({{rule.first, l.starred}, {rule.second, l.starred}}), leftmost),
                                   rule.coeff);
            }
        }
        cache.emplace(key, out);
        return out;
    }

    Shape shape_;
    C q_;
    C q_inv_, q2_, one_minus_q2_, one_minus_q_inv2_;
    std::vector<std::vector<PairTerm>> zz_, ss_, sz_;

    mutable std::recursive_mutex mutex_;
    mutable std::unordered_map<std::pair<Monomial, int>, Element<C>, MonomialLetterHash> zz_right_cache_;
    mutable std::unordered_map<std::pair<Monomial, int>, Element<C>, MonomialLetterHash> ss_right_cache_;
    mutable std::unordered_map<std::pair<Monomial, int>, Element<C>, MonomialLetterHash> sz_cache_;
    mutable std::unordered_map<std::pair<Monomial, Monomial>, Element<C>, MonomialPairHash> zz_cache_;
    mutable std::unordered_map<std::pair<Monomial, Monomial>, Element<C>, MonomialPairHash> ss_cache_;
    mutable std::unordered_map<std::pair<Monomial, Monomial>, Element<C>, MonomialPairHash> cross_cache_;
    mutable std::unordered_map<std::string, Element<C>> left_cache_;
    mutable std::unordered_map<std::string, Element<C>> right_cache_;
};

/// Exact algebra: q is the indeterminate.
inline std::unique_ptr<Algebra<QRational>> make_exact_algebra(int m, int n) {
    return std::make_unique<Algebra<QRational>>(m, n, QRational::q());
}

/// Numeric algebra at q = q0.
inline std::unique_ptr<Algebra<Real>> make_numeric_algebra(int m, int n, const Real& q0) {
    return std::make_unique<Algebra<Real>>(m, n, q0);
}

/// Splits f into bidegree components keyed by (z-degree, -z*-degree).
template <class C>
std::map<std::pair<int, int>, Element<C>> bidegree_split(const Element<C>& f) {
    std::map<std::pair<int, int>, Element<C>> parts;
    for (const auto& [mono, c] : f.terms()) {
        auto key = std::make_pair(mono.zdeg(), -mono.zsdeg());
        auto it = parts.try_emplace(key, Element<C>(f.shape())).first;
        it->second.add(mono, c);
    }
    return parts;
}

/// Classical (q = 1) value of f at the m x n complex matrix Z (Z[alpha][a]).
inline std::complex<double> classical_eval(const Element<QRational>& f,
                                           const std::vector<std::vector<std::complex<double>>>& z) {
    const Shape& s = f.shape();
    if (static_cast<int>(z.size()) != s.m) throw std::invalid_argument("matrix row count must equal m");
    for (const auto& row : z)
        if (static_cast<int>(row.size()) != s.n) throw std::invalid_argument("matrix column count must equal n");
    std::complex<double> total = 0;
    for (const auto& [mono, c] : f.terms()) {
        double cv;
        try {
            cv = static_cast<double>(qr_eval(c, Real(1)));
        } catch (const std::domain_error&) {
            throw std::domain_error("pole at q=1 in coefficient " + c.to_string());
        }
        std::complex<double> term = cv;
        for (int g = 0; g < s.gens(); ++g) {
            auto entry = z[static_cast<std::size_t>(s.row_of(g) - 1)][static_cast<std::size_t>(s.col_of(g) - 1)];
            for (int e = 0; e < mono.z[static_cast<std::size_t>(g)]; ++e) term *= entry;
            for (int e = 0; e < mono.zs[static_cast<std::size_t>(g)]; ++e) term *= std::conj(entry);
        }
        total += term;
    }
    return total;
}

}  // namespace qmb
