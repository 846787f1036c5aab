#pragma once

// Parametric hypersurfaces R^4 -> R^5: jets, unit normals, fundamental forms.

#include <array>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "isect5/errors.hpp"
#include "isect5/expr.hpp"
#include "isect5/linalg.hpp"

namespace isect5 {

inline constexpr double kRegularityTolerance = 1e-10;

/// All partial-derivative vectors Phi_sigma with |sigma| <= order at one parameter point.
class SurfaceJet {
public:
    SurfaceJet(Vec4 params, int order, std::vector<Vec5> values)
        : params_(params), order_(order), values_(std::move(values)) {}

    const Vec4& params() const { return params_; }
    int order() const { return order_; }

    const Vec5& operator[](const expr::MultiIndex& sigma) const { return at_id(sigma.id()); }

    /// Phi_{i j ...} with 1-based indices in any order; {} is the point itself.
    const Vec5& d(std::initializer_list<int> sigma) const { return (*this)[expr::MultiIndex(sigma)]; }

    const Vec5& at_id(int id) const {
        if (id >= static_cast<int>(values_.size())) throw OrderExceeded(expr::MultiIndex::from_id(id).order());
        return values_[id];
    }

    const Vec5& point() const { return values_[0]; }

    /// Phi_1..Phi_4.
    std::array<Vec5, 4> tangents() const { return {values_[1], values_[2], values_[3], values_[4]}; }

private:
    Vec4 params_;
    int order_;
    std::vector<Vec5> values_;
};

/// Scale-free regularity measure ||Phi_1 x Phi_2 x Phi_3 x Phi_4|| / prod ||Phi_l||, in [0, 1].
inline double regularity_margin(const SurfaceJet& j) {
    const auto t = j.tangents();
    double denom = 1.0;
    for (const Vec5& v : t) denom *= norm(v);
    if (denom == 0.0) return 0.0;
    return norm(quad_product(t)) / denom;
}

/// Immutable handle; partial tables to order 5 are built and compiled at construction,
/// so copies and concurrent jet() calls are safe.
class Hypersurface {
public:
    Hypersurface() = default;

    Hypersurface(std::string name, const std::array<std::string, 5>& components) {
        std::array<expr::Ast, 5> asts;
        for (int c = 0; c < 5; ++c) asts[c] = expr::parse(components[c]);
        init(std::move(name), components, asts);
    }

    Hypersurface(std::string name, const std::array<expr::Ast, 5>& components) {
        std::array<std::string, 5> texts;
        for (int c = 0; c < 5; ++c) texts[c] = expr::unparse(components[c]);
        init(std::move(name), texts, components);
    }

    const std::string& name() const { return impl_->name; }
    const std::string& component_text(int c) const { return impl_->texts[c]; }
    const expr::Ast& component(int c) const { return impl_->roots[c]; }

    /// Evaluates every Phi_sigma with |sigma| <= order (0..5).
    /// Throws DomainError, and NotRegular when order >= 1 and the first partials are dependent.
    SurfaceJet jet(const Vec4& u, int order, double regularity_tol = kRegularityTolerance) const {
        if (order < 0 || order > expr::kMaxOrder) throw OrderExceeded(order);
        const int count = expr::multi_index_count(order);
        std::vector<double> flat(static_cast<std::size_t>(count) * 5);
        try {
            impl_->tapes[order].evaluate(u, flat);
        } catch (DomainError& e) {
            throw DomainError("surface '" + impl_->name + "': " + e.what());
        }
        std::vector<Vec5> values(count);
        for (int id = 0; id < count; ++id)
            for (int c = 0; c < 5; ++c) values[id][c] = flat[static_cast<std::size_t>(id) * 5 + c];
        SurfaceJet j(u, order, std::move(values));
        if (order >= 1 && !(regularity_margin(j) > regularity_tol))
            throw NotRegular("surface '" + impl_->name + "' is not regular at the requested point");
        return j;
    }

    Vec5 point(const Vec4& u) const { return jet(u, 0).point(); }

private:
    struct Impl {
        std::string name;
        std::array<std::string, 5> texts;
        std::array<expr::Ast, 5> roots;
        std::array<expr::Tape, expr::kMaxOrder + 1> tapes; // one per jet order
    };
    std::shared_ptr<const Impl> impl_;

    void init(std::string name, const std::array<std::string, 5>& texts, const std::array<expr::Ast, 5>& roots) {
        auto impl = std::make_shared<Impl>();
        impl->name = std::move(name);
        impl->texts = texts;
        impl->roots = roots;
        std::vector<expr::PartialTable> tables;
        for (const auto& r : roots) {
            tables.emplace_back(r);
            tables.back().build(expr::kMaxOrder);
        }
        for (int order = 0; order <= expr::kMaxOrder; ++order) {
            std::vector<expr::Ast> outputs;
            for (int id = 0; id < expr::multi_index_count(order); ++id)
                for (auto& t : tables) outputs.push_back(t.partial(expr::MultiIndex::from_id(id)));
            impl->tapes[order] = expr::Tape(outputs);
        }
        impl_ = std::move(impl);
    }
};

inline SurfaceJet jet(const Hypersurface& s, const Vec4& u, int order) { return s.jet(u, order); }

/// N = (Phi_1 x Phi_2 x Phi_3 x Phi_4) / ||.||.
inline Vec5 unit_normal(const SurfaceJet& j, double regularity_tol = kRegularityTolerance) {
    if (j.order() < 1) throw OrderExceeded(1);
    if (!(regularity_margin(j) > regularity_tol)) throw NotRegular("first partials are linearly dependent");
    return normalized(quad_product(j.tangents()));
}

/// g_lm = <Phi_l, Phi_m>.
inline Mat4 first_fundamental(const SurfaceJet& j) {
    const auto t = j.tangents();
    return gram(t);
}

/// h_lm = <Phi_lm, N>.
inline Mat4 second_fundamental(const SurfaceJet& j, const Vec5& n) {
    Mat4 h;
    for (int l = 1; l <= 4; ++l)
        for (int m = l; m <= 4; ++m) h(l - 1, m - 1) = h(m - 1, l - 1) = dot(j.d({l, m}), n);
    return h;
}

/// Full symmetric contraction sum_{i1..ik} Phi_{i1..ik} v1[i1] ... vk[ik] (k = vs.size() <= 5).
inline Vec5 contract(const SurfaceJet& j, std::initializer_list<Vec4> vs) {
    const std::vector<Vec4> v(vs);
    const int k = static_cast<int>(v.size());
    Vec5 out;
    int total = 1;
    for (int i = 0; i < k; ++i) total *= 4;
    std::array<int, expr::kMaxOrder> idx{};
    for (int code = 0; code < total; ++code) {
        double w = 1.0;
        for (int p = 0, c = code; p < k; ++p, c /= 4) {
            idx[p] = c % 4 + 1;
            w *= v[p][idx[p] - 1];
        }
        if (w == 0.0) continue;
        out += w * j[expr::MultiIndex(std::span<const int>(idx.data(), k))];
    }
    return out;
}

} // namespace isect5
