#pragma once

// The Fock representation Theta on H = C[Mat]_q f0, graded by degree.
//
// H_k has the PBW basis of holomorphic monomials of degree k. Theta(z_g) acts by left
// multiplication; Theta(z*_g) left-multiplies and discards every term that still carries
// a z* factor, since those annihilate f0.

#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qmb/algebra.hpp"
#include "qmb/linalg.hpp"

namespace qmb {

/// Multi-index k_{a alpha} of a PBW basis vector of H; stored as a holomorphic Monomial.
using FockIndex = Monomial;

/// dim H_k = binomial(k + mn - 1, mn - 1)
inline long long fock_dimension(int gens, int k) {
    long long r = 1;
    for (int i = 1; i < gens; ++i) r = r * (k + i) / i;
    return r;
}

/// Degree-k multi-indices, lexicographically descending in (k_0, k_1, ...).
inline std::vector<FockIndex> fock_basis(const Shape& shape, int k) {
    if (k < 0) throw std::invalid_argument("negative degree");
    std::vector<FockIndex> out;
    FockIndex cur;
    const int g = shape.gens();
    auto rec = [&](auto&& self, int pos, int left) -> void {
        if (pos == g - 1) {
            cur.z[static_cast<std::size_t>(pos)] = static_cast<std::uint8_t>(left);
            out.push_back(cur);
            return;
        }
        for (int e = left; e >= 0; --e) {
            cur.z[static_cast<std::size_t>(pos)] = static_cast<std::uint8_t>(e);
            self(self, pos + 1, left - e);
        }
        cur.z[static_cast<std::size_t>(pos)] = 0;
    };
    rec(rec, 0, k);
    return out;
}

/// A graded piece Theta_{ij}: H_j -> H_i.
template <class C>
struct FockBlock {
    int source_degree = 0;
    int target_degree = 0;
    Matrix<C> matrix;
};

template <class C>
using SparseVector = std::map<int, C>;

template <class C>
class FockSpace {
public:
    explicit FockSpace(const Algebra<C>& algebra) : alg_(algebra) {}

    const Algebra<C>& algebra() const { return alg_; }
    const Shape& shape() const { return alg_.shape(); }

    const std::vector<FockIndex>& basis(int k) const {
        std::lock_guard lock(mutex_);
        return basis_locked(k);
    }
    int dimension(int k) const { return static_cast<int>(basis(k).size()); }

    /// Position of a holomorphic monomial inside the basis of its degree.
    int index_of(const FockIndex& idx) const {
        std::lock_guard lock(mutex_);
        basis_locked(idx.zdeg());
        return index_.at(idx);
    }

    /// q^{-2 sum k_{a alpha} (N + 1 - a - alpha)}
    C gamma_weight(const FockIndex& idx) const {
        const Shape& s = shape();
        int exponent = 0;
        for (int g = 0; g < s.gens(); ++g)
            exponent += idx.z[static_cast<std::size_t>(g)] * (s.N() + 1 - s.col_of(g) - s.row_of(g));
        C qi = C(1) / alg_.q();
        return Algebra<C>::power(qi, 2 * exponent);
    }

    /// Theta of one generator on H_k.
    FockBlock<C> gen_block(Letter g, int k) const {
        const auto& cols = sparse_gen(g, k);
        int target = g.starred ? k - 1 : k + 1;
        FockBlock<C> block{k, target, Matrix<C>(target < 0 ? 0 : dimension(target), dimension(k))};
        for (int j = 0; j < static_cast<int>(cols.size()); ++j)
            for (const auto& [i, c] : cols[static_cast<std::size_t>(j)]) block.matrix(i, j) = c;
        return block;
    }

    /// Theta(f) restricted to H_k, split by target degree; composed from generator blocks.
    std::map<int, FockBlock<C>> apply(const Element<C>& f, int k) const {
        std::map<int, FockBlock<C>> out;
        const int dim = dimension(k);
        for (const auto& [mono, c] : f.terms()) {
            int target = k + mono.zdeg() - mono.zsdeg();
            if (k < mono.zsdeg() || target < 0) continue;
            auto it = out.find(target);
            if (it == out.end())
                it = out.emplace(target, FockBlock<C>{k, target, Matrix<C>(dimension(target), dim)}).first;
            for (int j = 0; j < dim; ++j) {
                SparseVector<C> v = apply_monomial(mono, k, SparseVector<C>{{j, C(1)}});
                for (const auto& [i, x] : v) it->second.matrix(i, j) += c * x;
            }
        }
        return out;
    }

    /// Theta(f): H_k -> H_{target}; zero when f has no component of that degree shift.
    FockBlock<C> apply_block(const Element<C>& f, int k, int target) const {
        auto blocks = apply(f, k);
        if (auto it = blocks.find(target); it != blocks.end()) return it->second;
        return FockBlock<C>{k, target, Matrix<C>(target < 0 ? 0 : dimension(target), dimension(k))};
    }

    /// Theta(mono) applied to a sparse vector of H_k, letters taken right to left.
    SparseVector<C> apply_monomial(const Monomial& mono, int k, SparseVector<C> v) const {
        const Shape& s = shape();
        int deg = k;
        for (int g = s.gens() - 1; g >= 0 && !v.empty(); --g)
            for (int e = 0; e < mono.zs[static_cast<std::size_t>(g)] && !v.empty(); ++e)
                v = apply_sparse({g, true}, deg--, v);
        for (int g = s.gens() - 1; g >= 0 && !v.empty(); --g)
            for (int e = 0; e < mono.z[static_cast<std::size_t>(g)]; ++e) v = apply_sparse({g, false}, deg++, v);
        return v;
    }

    /// Diagonal of Theta(f) on H_k (only degree-preserving monomials contribute).
    std::vector<C> diagonal(const Element<C>& f, int k) const {
        const int dim = dimension(k);
        std::vector<C> diag(static_cast<std::size_t>(dim), C(0));
        for (const auto& [mono, c] : f.terms()) {
            if (mono.zdeg() != mono.zsdeg() || mono.zsdeg() > k) continue;
            for (int j = 0; j < dim; ++j) {
                SparseVector<C> v = apply_monomial(mono, k, SparseVector<C>{{j, C(1)}});
                if (auto it = v.find(j); it != v.end()) diag[static_cast<std::size_t>(j)] += c * it->second;
            }
        }
        return diag;
    }

    /// Gram matrix (u, v) -> constant term of star(v) u on H_k.
    Matrix<C> gram(int k) const {
        const auto& b = basis(k);
        const int dim = static_cast<int>(b.size());
        Matrix<C> g(dim, dim);
        std::vector<Element<C>> stars;
        stars.reserve(b.size());
        for (const auto& v : b) stars.push_back(alg_.star(alg_.monomial(v)));
        for (int u = 0; u < dim; ++u)
            for (int v = 0; v < dim; ++v) {
                Element<C> prod = alg_.mul(stars[static_cast<std::size_t>(v)], alg_.monomial(b[static_cast<std::size_t>(u)]));
                g(u, v) = prod.coeff(Monomial{});
            }
        return g;
    }

private:
    const std::vector<FockIndex>& basis_locked(int k) const {
        if (k < 0) throw std::invalid_argument("negative degree");
        auto it = bases_.find(k);
        if (it == bases_.end()) {
            it = bases_.emplace(k, fock_basis(shape(), k)).first;
            const auto& b = it->second;
            for (int i = 0; i < static_cast<int>(b.size()); ++i) index_.emplace(b[static_cast<std::size_t>(i)], i);
        }
        return it->second;
    }

    using SparseColumns = std::vector<std::vector<std::pair<int, C>>>;

    const SparseColumns& sparse_gen(Letter g, int k) const {
        std::lock_guard lock(mutex_);
        auto key = std::make_tuple(g.gen, g.starred, k);
        if (auto it = gen_cache_.find(key); it != gen_cache_.end()) return it->second;
        const auto source = basis_locked(k);
        if (!g.starred) basis_locked(k + 1);
        else if (k > 0) basis_locked(k - 1);
        SparseColumns cols(source.size());
        for (std::size_t j = 0; j < source.size(); ++j) {
            Element<C> image = g.starred ? alg_.left_star_times(g.gen, source[j]).holomorphic_part()
                                         : alg_.left_gen_times(g.gen, source[j]);
            for (const auto& [mono, c] : image.terms()) cols[j].emplace_back(index_.at(mono), c);
        }
        return gen_cache_.emplace(key, std::move(cols)).first->second;
    }

    SparseVector<C> apply_sparse(Letter g, int k, const SparseVector<C>& v) const {
        if (g.starred && k == 0) return {};
        const auto& cols = sparse_gen(g, k);
        SparseVector<C> out;
        for (const auto& [j, x] : v)
            for (const auto& [i, c] : cols[static_cast<std::size_t>(j)]) {
                auto [it, inserted] = out.try_emplace(i, c * x);
                if (!inserted) it->second += c * x;
            }
        for (auto it = out.begin(); it != out.end();)
            it = coeff_traits<C>::is_zero(it->second) ? out.erase(it) : std::next(it);
        return out;
    }

    const Algebra<C>& alg_;
    mutable std::recursive_mutex mutex_;
    mutable std::map<int, std::vector<FockIndex>> bases_;
    mutable std::unordered_map<FockIndex, int, MonomialHash> index_;
    mutable std::map<std::tuple<int, bool, int>, SparseColumns> gen_cache_;
};

}  // namespace qmb
