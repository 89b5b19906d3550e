#pragma once

// JSON serialization of elements, kernels and matrices.
//
// Element:  {"m":..,"n":..,"terms":[{"z":[[a,alpha,exp]..],"zstar":[[a,alpha,exp]..],"coeff":".."}..]}
// Kernel:   {"m":..,"n":..,"trunc":..,"terms":[{"left":[..],"right":[..],"coeff":["u^0 coeff",..]}..]}

#include <string>
#include <vector>

#include <json.hpp>

#include "qmb/kernels.hpp"

namespace qmb {

using json = nlohmann::json;

namespace detail {

inline json exponents_to_json(const Shape& shape, const std::array<std::uint8_t, kMaxGen>& e) {
    json out = json::array();
    for (int g = 0; g < shape.gens(); ++g)
        if (e[static_cast<std::size_t>(g)] != 0)
            out.push_back({shape.col_of(g), shape.row_of(g), e[static_cast<std::size_t>(g)]});
    return out;
}

inline void exponents_from_json(const Shape& shape, const json& j, std::array<std::uint8_t, kMaxGen>& e) {
    if (!j.is_array()) throw std::invalid_argument("exponent list must be an array");
    for (const auto& t : j) {
        if (!t.is_array() || t.size() != 3) throw std::invalid_argument("exponent entry must be [a, alpha, exp]");
        const int a = t[0].get<int>(), alpha = t[1].get<int>(), exp = t[2].get<int>();
        if (exp < 0 || exp > 255) throw std::invalid_argument("exponent out of range");
        const int g = shape.gen(alpha, a);
        e[static_cast<std::size_t>(g)] = static_cast<std::uint8_t>(e[static_cast<std::size_t>(g)] + exp);
    }
}

inline Shape shape_from_json(const json& j) {
    if (!j.is_object() || !j.contains("m") || !j.contains("n")) throw std::invalid_argument("missing m or n");
    return Shape(j.at("m").get<int>(), j.at("n").get<int>());
}

inline std::string coeff_string(const QRational& c) { return c.to_string(); }
inline std::string coeff_string(const Real& c) { return to_decimal(c, static_cast<int>(working_digits())); }

}  // namespace detail

template <class C>
json element_to_json(const Element<C>& f) {
    json terms = json::array();
    for (const auto& [mono, c] : f.terms())
        terms.push_back({{"z", detail::exponents_to_json(f.shape(), mono.z)},
                         {"zstar", detail::exponents_to_json(f.shape(), mono.zs)},
                         {"coeff", detail::coeff_string(c)}});
    return {{"m", f.shape().m}, {"n", f.shape().n}, {"terms", terms}};
}

inline Element<QRational> element_from_json(const json& j) {
    const Shape shape = detail::shape_from_json(j);
    Element<QRational> f(shape);
    if (!j.contains("terms") || !j.at("terms").is_array()) throw std::invalid_argument("missing terms array");
    for (const auto& t : j.at("terms")) {
        Monomial mono;
        if (t.contains("z")) detail::exponents_from_json(shape, t.at("z"), mono.z);
        if (t.contains("zstar")) detail::exponents_from_json(shape, t.at("zstar"), mono.zs);
        const json& c = t.at("coeff");
        f.add(mono, c.is_string() ? QRational::parse(c.get<std::string>()) : QRational(c.get<long>()));
    }
    return f;
}

inline json kernel_to_json(const PolyKernel& k) {
    json terms = json::array();
    for (const auto& [key, c] : k.terms()) {
        json coeffs = json::array();
        for (const auto& x : c.coeffs()) coeffs.push_back(x.to_string());
        terms.push_back({{"left", detail::exponents_to_json(k.shape(), key.first.z)},
                         {"right", detail::exponents_to_json(k.shape(), key.second.zs)},
                         {"coeff", coeffs}});
    }
    return {{"m", k.shape().m}, {"n", k.shape().n}, {"trunc", k.trunc()}, {"terms", terms}};
}

inline json kernel_to_json(const KernelElement<Real>& k) {
    json terms = json::array();
    for (const auto& [key, c] : k.terms())
        terms.push_back({{"left", detail::exponents_to_json(k.shape(), key.first.z)},
                         {"right", detail::exponents_to_json(k.shape(), key.second.zs)},
                         {"coeff", detail::coeff_string(c)}});
    return {{"m", k.shape().m}, {"n", k.shape().n}, {"trunc", k.trunc()}, {"terms", terms}};
}

inline PolyKernel kernel_from_json(const json& j) {
    const Shape shape = detail::shape_from_json(j);
    PolyKernel k(shape, j.at("trunc").get<int>());
    for (const auto& t : j.at("terms")) {
        Monomial left, right;
        detail::exponents_from_json(shape, t.at("left"), left.z);
        detail::exponents_from_json(shape, t.at("right"), right.zs);
        std::vector<QRational> coeffs;
        for (const auto& c : t.at("coeff")) coeffs.push_back(QRational::parse(c.get<std::string>()));
        k.add(left, right, UPoly<QRational>(std::move(coeffs)));
    }
    return k;
}

template <class C>
json matrix_to_json(const Matrix<C>& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(detail::coeff_string(m(i, j)));
        rows.push_back(row);
    }
    return rows;
}

inline Matrix<QRational> matrix_from_json(const json& j) {
    const int rows = static_cast<int>(j.size());
    const int cols = rows == 0 ? 0 : static_cast<int>(j.at(0).size());
    Matrix<QRational> m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if (static_cast<int>(j.at(static_cast<std::size_t>(i)).size()) != cols) throw std::invalid_argument("ragged matrix");
        for (int c = 0; c < cols; ++c) m(i, c) = QRational::parse(j[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)].get<std::string>());
    }
    return m;
}

}  // namespace qmb
