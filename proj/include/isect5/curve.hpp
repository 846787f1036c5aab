#pragma once

// Frenet apparatus of the transversal intersection curve of four hypersurfaces in R^5.
//
// Stage order inside analyze():
//   jets(5) -> normals -> t -> u' -> kn -> a, alpha'' -> u'' -> c, alpha''' -> u'''
//   -> d, alpha'''' -> b3, b2, b1 -> kappa2, kappa3, kappa1'' -> u'''' -> m, alpha^(5) -> kappa4
// Every surface's chain-rule sums use that surface's own parameter derivatives.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "isect5/errors.hpp"
#include "isect5/linalg.hpp"
#include "isect5/surface.hpp"

namespace isect5 {

inline constexpr double kTransversalityTolerance = 1e-8;
inline constexpr double kDegeneracyTolerance = 1e-10;

using SurfaceQuad = std::array<Hypersurface, 4>;
using ParamSet = std::array<Vec4, 4>;

struct IntersectionPoint {
    Vec5 x;                   // Phi^1(params[0])
    ParamSet params{};
    double agreement = 0.0;   // max pairwise ambient distance
    double residual_inf = 0.0; // ||(Phi1-Phi2, Phi1-Phi3, Phi1-Phi4)||_inf
};

inline IntersectionPoint make_intersection_point(const SurfaceQuad& s, const ParamSet& params) {
    std::array<Vec5, 4> x;
    for (int i = 0; i < 4; ++i) x[i] = s[i].point(params[i]);
    IntersectionPoint p{x[0], params};
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) p.agreement = std::max(p.agreement, norm(x[i] - x[j]));
    for (int i = 1; i < 4; ++i) p.residual_inf = std::max(p.residual_inf, norm_inf(x[0] - x[i]));
    return p;
}

/// Per-surface intermediates of the pipeline.
struct SurfaceTerms {
    Vec5 normal;
    Mat4 first_fundamental;
    Mat4 second_fundamental;
    std::array<Vec4, 4> u{}; // u', u'', u''', u''''
    Vec5 delta;              // sum Phi_ij u'_i u'_j
    double kn = 0.0;
    double mu = 0.0;
    double xi = 0.0;
    double eta = 0.0;
};

struct DerivativeData {
    std::vector<SurfaceJet> jets;
    std::array<SurfaceTerms, 4> surfaces{};
    std::array<Vec5, 5> alpha{}; // alpha' .. alpha^(5)
    Mat4 gram;                   // <N_i, N_j>
    Vec4 a{}, c{}, d{}, m{};
    Vec4 kn{}, mu{}, xi{}, eta{};
    double tangential5 = 0.0;    // <alpha^(5), t>
    int orders_done = 0;         // highest alpha derivative computed (1..5)
};

struct FrenetFrame {
    Vec5 n, b1, b2, b3;
};

struct FrenetApparatus {
    Vec5 t;
    std::optional<Vec5> n, b1, b2, b3;
    double k1 = 0.0;
    std::optional<double> k2, k3, k4, k1_prime, k1_second;
    int degenerate_level = 0; // 0 when every curvature is nonzero
    DerivativeData data;

    bool complete() const { return degenerate_level == 0; }
    std::string status() const {
        return complete() ? "complete" : "degenerate_at_level_" + std::to_string(degenerate_level);
    }
};

// ---------------------------------------------------------------------------
// Individual stages

/// Unit tangent t = N1 x N2 x N3 x N4 / ||.||, in the given surface order.
inline Vec5 transversal_tangent(std::span<const Vec5, 4> normals, double tol = kTransversalityTolerance) {
    const Vec5 q = quad_product(normals);
    const double len = norm(q);
    if (!(len >= tol))
        throw NonTransversal("normals are linearly dependent (||N1 x N2 x N3 x N4|| = " + std::to_string(len) + ")");
    return q / len;
}

/// Chain-rule tail of the k-th derivative of Phi(u(s)), i.e. alpha^(k) minus sum Phi_i u_i^(k).
/// lower[j] holds u^(j+1); needs lower.size() >= order - 1.
inline Vec5 chain_tail(const SurfaceJet& j, int order, std::span<const Vec4> lower) {
    const auto& u = lower;
    switch (order) {
    case 1: return {};
    case 2: return contract(j, {u[0], u[0]});
    case 3: return 3.0 * contract(j, {u[1], u[0]}) + contract(j, {u[0], u[0], u[0]});
    case 4:
        return 4.0 * contract(j, {u[2], u[0]}) + 3.0 * contract(j, {u[1], u[1]}) +
               6.0 * contract(j, {u[1], u[0], u[0]}) + contract(j, {u[0], u[0], u[0], u[0]});
    case 5:
        return 5.0 * contract(j, {u[3], u[0]}) + 10.0 * contract(j, {u[2], u[1]}) +
               10.0 * contract(j, {u[2], u[0], u[0]}) + 15.0 * contract(j, {u[1], u[1], u[0]}) +
               10.0 * contract(j, {u[1], u[0], u[0], u[0]}) + contract(j, {u[0], u[0], u[0], u[0], u[0]});
    default: throw OrderExceeded(order);
    }
}

/// Solves g u^(k) = <alpha^(k) - tail_k, Phi_l>, l = 1..4.
inline Vec4 param_derivs(const SurfaceJet& j, int order, std::span<const Vec4> lower, const Vec5& alpha_k) {
    if (order < 1 || order > 4) throw OrderExceeded(order);
    if (j.order() < order) throw OrderExceeded(order);
    const Vec5 rhs = alpha_k - chain_tail(j, order, lower);
    const auto phi = j.tangents();
    Vec4 b;
    for (int l = 0; l < 4; ++l) b[l] = dot(rhs, phi[l]);
    return solve4(first_fundamental(j), b);
}

/// kn = sum_lm h_lm u'_l u'_m.
inline double normal_curvature(const Mat4& h, const Vec4& uprime) { return quadratic_form(h, uprime); }

/// Coefficients of a vector in the normal span together with its projections <v, N_i>.
struct NormalExpansion {
    Vec4 coeffs{};
    Vec4 projections{};
    Vec5 vector;
};

namespace detail {
inline NormalExpansion expand_in_normals(std::span<const Vec5, 4> normals, const Vec4& projections, const Vec5& tangential) {
    NormalExpansion e;
    e.projections = projections;
    e.coeffs = solve4(gram(normals), projections);
    e.vector = tangential;
    for (int i = 0; i < 4; ++i) e.vector += e.coeffs[i] * normals[i];
    return e;
}

inline Vec4 project_tails(std::span<const SurfaceJet> jets, std::span<const Vec5, 4> normals, int order,
                          std::span<const std::array<Vec4, 4>> u) {
    Vec4 p;
    for (int r = 0; r < 4; ++r) p[r] = dot(chain_tail(jets[r], order, u[r]), normals[r]);
    return p;
}
} // namespace detail

/// alpha'' = sum a_i N_i with Gram(N) a = kn.
inline NormalExpansion second_derivative(std::span<const Vec5, 4> normals, const Vec4& kn) {
    return detail::expand_in_normals(normals, kn, Vec5{});
}

/// alpha''' = -kappa1^2 t + sum c_i N_i; mu_r = <3 sum Phi_ij u''_i u'_j + sum Phi_ijk u'u'u', N_r>.
/// u[r] holds (u', u'', ...) of surface r.
inline NormalExpansion third_derivative(std::span<const SurfaceJet> jets, std::span<const Vec5, 4> normals,
                                        const Vec5& t, double k1, std::span<const std::array<Vec4, 4>> u,
                                        double tol = kDegeneracyTolerance) {
    if (!(k1 > tol)) throw DegenerateFrenet(1);
    return detail::expand_in_normals(normals, detail::project_tails(jets, normals, 3, u), -(k1 * k1) * t);
}

/// alpha'''' = -3 kappa1 kappa1' t + sum d_i N_i.
inline NormalExpansion fourth_derivative(std::span<const SurfaceJet> jets, std::span<const Vec5, 4> normals,
                                         const Vec5& t, double k1, double k1_prime,
                                         std::span<const std::array<Vec4, 4>> u, double tol = kDegeneracyTolerance) {
    if (!(k1 > tol)) throw DegenerateFrenet(1);
    return detail::expand_in_normals(normals, detail::project_tails(jets, normals, 4, u), (-3.0 * k1 * k1_prime) * t);
}

/// <alpha^(5), t> = -3 kappa1'^2 - 4 kappa1 kappa1'' + kappa1^4 + kappa1^2 kappa2^2.
inline double fifth_tangential_coefficient(double k1, double k1_prime, double k1_second, double k2) {
    return -3.0 * k1_prime * k1_prime - 4.0 * k1 * k1_second + k1 * k1 * k1 * k1 + k1 * k1 * k2 * k2;
}

/// alpha^(5) = <alpha^(5), t> t + sum m_i N_i.
inline NormalExpansion fifth_derivative(std::span<const SurfaceJet> jets, std::span<const Vec5, 4> normals,
                                        const Vec5& t, double k1, double k1_prime, double k1_second, double k2,
                                        std::span<const std::array<Vec4, 4>> u, double tol = kDegeneracyTolerance) {
    if (!(k1 > tol)) throw DegenerateFrenet(1);
    if (!(std::abs(k2) > tol)) throw DegenerateFrenet(2);
    const double tangential = fifth_tangential_coefficient(k1, k1_prime, k1_second, k2);
    return detail::expand_in_normals(normals, detail::project_tails(jets, normals, 5, u), tangential * t);
}

/// n = alpha''/kappa1 and the binormals
///   b3 = |a' x a'' x a''' x a''''|, b2 = |b3 x a' x a'' x a'''|, b1 = |b2 x b3 x a' x a''|.
/// Throws DegenerateFrenet with the first level whose curvature vanishes.
inline FrenetFrame frenet_frame(const Vec5& d1, const Vec5& d2, const Vec5& d3, const Vec5& d4,
                                double tol = kDegeneracyTolerance) {
    const double k1 = norm(d2);
    if (!(k1 > tol)) throw DegenerateFrenet(1);
    const Vec5 t = normalized(d1);
    const Vec5 n = d2 / k1;

    const std::array<Vec5, 2> tn{t, n};
    const double k1k2 = norm(reject(d3, tn));
    if (!(k1k2 / k1 > tol)) throw DegenerateFrenet(2);

    const std::array<Vec5, 3> tnb{t, n, normalized(reject(d3, tn))};
    const double k1k2k3 = norm(reject(d4, tnb));
    if (!(k1k2k3 / k1k2 > tol)) throw DegenerateFrenet(3);

    const Vec5 v3 = quad_product(d1, d2, d3, d4);
    const double scale = norm(d1) * k1 * norm(d3) * norm(d4);
    if (!(norm(v3) / scale > tol)) throw DegenerateFrenet(3);

    FrenetFrame f;
    f.n = n;
    f.b3 = normalized(v3);
    f.b2 = normalized(quad_product(f.b3, d1, d2, d3));
    f.b1 = normalized(quad_product(f.b2, f.b3, d1, d2));
    return f;
}

/// kappa1 = ||a''||, kappa2 = <a''',b1>/k1, kappa3 = <a'''',b2>/(k1 k2), kappa4 = <a^(5),b3>/(k1 k2 k3).
inline std::array<double, 4> curvatures(const Vec5& d2, const Vec5& d3, const Vec5& d4, const Vec5& d5,
                                        const FrenetFrame& f, double tol = kDegeneracyTolerance) {
    const double k1 = norm(d2);
    if (!(k1 > tol)) throw DegenerateFrenet(1);
    const double k2 = dot(d3, f.b1) / k1;
    if (!(std::abs(k2) > tol)) throw DegenerateFrenet(2);
    const double k3 = dot(d4, f.b2) / (k1 * k2);
    if (!(std::abs(k3) > tol)) throw DegenerateFrenet(3);
    const double k4 = dot(d5, f.b3) / (k1 * k2 * k3);
    return {k1, k2, k3, k4};
}

// ---------------------------------------------------------------------------
// Full pipeline

struct AnalysisOptions {
    double regularity = kRegularityTolerance;
    double transversality = kTransversalityTolerance;
    double degeneracy = kDegeneracyTolerance;
};

namespace detail {
template <class F>
auto run_stage(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (Error& e) {
        if (e.stage().empty()) e.set_stage(name);
        throw;
    }
}
} // namespace detail

/// Runs every stage at one intersection point. Frenet degeneracy is reported through
/// degenerate_level with partial results; all other failures throw, labeled with their stage.
inline FrenetApparatus analyze(const SurfaceQuad& surfaces, const ParamSet& params, const AnalysisOptions& opt = {}) {
    using detail::run_stage;
    FrenetApparatus out;
    DerivativeData& dd = out.data;
    auto& terms = dd.surfaces;

    run_stage("jets", [&] {
        for (int i = 0; i < 4; ++i) dd.jets.push_back(surfaces[i].jet(params[i], 5, opt.regularity));
    });
    std::array<Vec5, 4> normals;
    run_stage("normals", [&] {
        for (int i = 0; i < 4; ++i) {
            normals[i] = unit_normal(dd.jets[i], opt.regularity);
            terms[i].normal = normals[i];
            terms[i].first_fundamental = first_fundamental(dd.jets[i]);
            terms[i].second_fundamental = second_fundamental(dd.jets[i], normals[i]);
        }
        dd.gram = gram(normals);
    });
    out.t = run_stage("tangent", [&] { return transversal_tangent(normals, opt.transversality); });
    dd.alpha[0] = out.t;
    dd.orders_done = 1;

    std::array<std::array<Vec4, 4>, 4> u{}; // u[r] = (u', u'', u''', u'''') of surface r
    auto param_stage = [&](const char* name, int order) {
        run_stage(name, [&] {
            for (int r = 0; r < 4; ++r) {
                u[r][order - 1] = param_derivs(dd.jets[r], order, std::span(u[r]).first(order - 1), dd.alpha[order - 1]);
                terms[r].u[order - 1] = u[r][order - 1];
            }
        });
    };

    param_stage("first_param_derivatives", 1);
    run_stage("normal_curvatures", [&] {
        for (int r = 0; r < 4; ++r) {
            terms[r].kn = dd.kn[r] = normal_curvature(terms[r].second_fundamental, u[r][0]);
            terms[r].delta = chain_tail(dd.jets[r], 2, u[r]);
        }
    });

    run_stage("second_derivative", [&] {
        const auto e = second_derivative(normals, dd.kn);
        dd.a = e.coeffs;
        dd.alpha[1] = e.vector;
    });
    dd.orders_done = 2;
    out.k1 = norm(dd.alpha[1]);
    param_stage("second_param_derivatives", 2);
    if (!(out.k1 > opt.degeneracy)) {
        out.degenerate_level = 1;
        return out;
    }
    const Vec5 n = dd.alpha[1] / out.k1;
    out.n = n;

    run_stage("third_derivative", [&] {
        const auto e = third_derivative(dd.jets, normals, out.t, out.k1, u, opt.degeneracy);
        dd.c = e.coeffs;
        dd.mu = e.projections;
        dd.alpha[2] = e.vector;
    });
    dd.orders_done = 3;
    const double k1p = dot(dd.alpha[2], n);
    out.k1_prime = k1p;
    param_stage("third_param_derivatives", 3);

    run_stage("fourth_derivative", [&] {
        const auto e = fourth_derivative(dd.jets, normals, out.t, out.k1, k1p, u, opt.degeneracy);
        dd.d = e.coeffs;
        dd.xi = e.projections;
        dd.alpha[3] = e.vector;
    });
    dd.orders_done = 4;
    param_stage("fourth_param_derivatives", 4);
    for (int r = 0; r < 4; ++r) {
        terms[r].mu = dd.mu[r];
        terms[r].xi = dd.xi[r];
    }

    FrenetFrame frame;
    try {
        frame = run_stage("frame", [&] {
            return frenet_frame(dd.alpha[0], dd.alpha[1], dd.alpha[2], dd.alpha[3], opt.degeneracy);
        });
    } catch (const DegenerateFrenet& e) {
        out.degenerate_level = e.level();
        return out;
    }
    out.b1 = frame.b1;
    out.b2 = frame.b2;
    out.b3 = frame.b3;

    const double k2 = dot(dd.alpha[2], frame.b1) / out.k1;
    const double k3 = dot(dd.alpha[3], frame.b2) / (out.k1 * k2);
    if (!(std::abs(k2) > opt.degeneracy)) {
        out.degenerate_level = 2;
        return out;
    }
    out.k2 = k2;
    if (!(std::abs(k3) > opt.degeneracy)) {
        out.degenerate_level = 3;
        return out;
    }
    out.k3 = k3;
    const double k1pp = dot(dd.alpha[3], n) + out.k1 * out.k1 * out.k1 + out.k1 * k2 * k2;
    out.k1_second = k1pp;

    run_stage("fifth_derivative", [&] {
        const auto e = fifth_derivative(dd.jets, normals, out.t, out.k1, k1p, k1pp, k2, u, opt.degeneracy);
        dd.m = e.coeffs;
        dd.eta = e.projections;
        dd.alpha[4] = e.vector;
        dd.tangential5 = fifth_tangential_coefficient(out.k1, k1p, k1pp, k2);
    });
    dd.orders_done = 5;
    for (int r = 0; r < 4; ++r) terms[r].eta = dd.eta[r];

    out.k4 = dot(dd.alpha[4], frame.b3) / (out.k1 * k2 * k3);
    return out;
}

} // namespace isect5
