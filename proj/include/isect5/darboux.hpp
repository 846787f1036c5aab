#pragma once

// Per-surface Darboux frames, first geodesic curvature and geodesic torsions.

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "isect5/curve.hpp"
#include "isect5/errors.hpp"
#include "isect5/linalg.hpp"
#include "isect5/surface.hpp"

namespace isect5 {

/// {U1..U5} with U1 = t and U5 = N_i; U2..U4 from alpha'', alpha''', alpha'''' by Gram-Schmidt.
struct DarbouxFrame {
    int surface = 0;
    std::array<Vec5, 5> U{};
    /// 0 when U2..U4 all came from the curve derivatives; otherwise the first index (2..4)
    /// that had to be filled by a canonical orthonormal completion.
    int completed_from = 0;
};

struct GeodesicData {
    int surface = 0;
    double kn = 0.0;
    double k1g = 0.0;
    std::array<double, 3> tau{};
    Vec5 dNds;
    DarbouxFrame frame;
};

namespace detail {
/// Smallest-index-first orthonormal completion from the standard basis, picking the
/// candidate with the largest residual each time.
inline Vec5 complete_one(std::span<const Vec5> fixed) {
    Vec5 best;
    double best_norm = -1.0;
    for (int k = 0; k < 5; ++k) {
        const Vec5 r = reject(Vec5::basis(k), fixed);
        const double len = norm(r);
        if (len > best_norm + 1e-12) {
            best_norm = len;
            best = r;
        }
    }
    return best / best_norm;
}

inline DarbouxFrame build_darboux(const std::array<Vec5, 4>& alpha, const Vec5& normal, int surface, double tol, bool complete) {
    DarbouxFrame f;
    f.surface = surface;
    f.U[0] = alpha[0];
    f.U[4] = normal;
    std::vector<Vec5> fixed{alpha[0], normal};
    for (int k = 1; k <= 3; ++k) {
        Vec5 r = reject(alpha[k], fixed);
        const double len = norm(r);
        if (len > tol && f.completed_from == 0) {
            f.U[k] = r / len;
        } else {
            if (!complete)
                throw RankDeficient(k + 1, "Darboux frame: residual of derivative " + std::to_string(k + 1) +
                                               " vanishes (U" + std::to_string(k + 1) + ")");
            if (f.completed_from == 0) f.completed_from = k + 1;
            f.U[k] = complete_one(fixed);
        }
        fixed.push_back(f.U[k]);
    }
    // Orientation of U2 is pinned by <alpha'', U2> >= 0.
    if (dot(alpha[1], f.U[1]) < 0.0) f.U[1] = -f.U[1];
    return f;
}
} // namespace detail

/// Throws RankDeficient with the failing position (2, 3 or 4).
inline DarbouxFrame darboux_frame(const std::array<Vec5, 4>& alpha, const Vec5& normal, int surface = 0,
                                  double tol = kDegeneracyTolerance) {
    return detail::build_darboux(alpha, normal, surface, tol, false);
}

/// Same construction; when a derivative is dependent, the remaining U's are completed
/// deterministically and completed_from records where that started.
inline DarbouxFrame darboux_frame_completed(const std::array<Vec5, 4>& alpha, const Vec5& normal, int surface = 0,
                                            double tol = kDegeneracyTolerance) {
    return detail::build_darboux(alpha, normal, surface, tol, true);
}

/// kappa1g = sum_j a_j <N_j, U2>.
inline double geodesic_curvature(const Vec4& a, std::span<const Vec5, 4> normals, const Vec5& u2) {
    double s = 0.0;
    for (int j = 0; j < 4; ++j) s += a[j] * dot(normals[j], u2);
    return s;
}

/// dN/ds of the unit normal along a curve with parameter velocity u'. Full quotient rule:
/// (dNbar/ds - <dNbar/ds, N> N) / ||Nbar||, Nbar = Phi_1 x Phi_2 x Phi_3 x Phi_4.
inline Vec5 normal_derivative(const SurfaceJet& j, const Vec4& uprime, double regularity_tol = kRegularityTolerance) {
    if (j.order() < 2) throw OrderExceeded(2);
    if (!(regularity_margin(j) > regularity_tol)) throw NotRegular("first partials are linearly dependent");
    const auto phi = j.tangents();
    const Vec5 nbar = quad_product(phi);
    Vec5 dnbar;
    for (int k = 1; k <= 4; ++k) {
        if (uprime[k - 1] == 0.0) continue;
        Vec5 dk;
        for (int slot = 0; slot < 4; ++slot) {
            auto rows = phi;
            rows[slot] = j.d({slot + 1, k});
            dk += quad_product(rows);
        }
        dnbar += uprime[k - 1] * dk;
    }
    const double len = norm(nbar);
    const Vec5 n = nbar / len;
    return (dnbar - dot(dnbar, n) * n) / len;
}

/// tau_jg = -<dN/ds, U_{j+1}>, j = 1, 2, 3.
inline std::array<double, 3> geodesic_torsions(const Vec5& dNds, const DarbouxFrame& f) {
    return {-dot(dNds, f.U[1]), -dot(dNds, f.U[2]), -dot(dNds, f.U[3])};
}

/// Darboux data of one surface at an analyzed point. Uses the completed frame when the
/// curve derivatives do not span; requires alpha'''' unless kappa1 vanished.
inline GeodesicData geodesic_data(const FrenetApparatus& fa, int surface, double tol = kDegeneracyTolerance) {
    const DerivativeData& dd = fa.data;
    const SurfaceTerms& st = dd.surfaces[surface];
    std::array<Vec5, 4> alpha{dd.alpha[0], dd.alpha[1], dd.alpha[2], dd.alpha[3]};
    // Unavailable higher derivatives are left zero and end up completed.
    for (int k = dd.orders_done; k < 4; ++k) alpha[k] = Vec5{};

    GeodesicData g;
    g.surface = surface;
    g.kn = st.kn;
    g.frame = darboux_frame_completed(alpha, st.normal, surface, tol);
    std::array<Vec5, 4> normals;
    for (int i = 0; i < 4; ++i) normals[i] = dd.surfaces[i].normal;
    g.k1g = geodesic_curvature(dd.a, normals, g.frame.U[1]);
    g.dNds = normal_derivative(dd.jets[surface], st.u[0]);
    g.tau = geodesic_torsions(g.dNds, g.frame);
    return g;
}

inline std::array<GeodesicData, 4> geodesic_data(const FrenetApparatus& fa, double tol = kDegeneracyTolerance) {
    return {geodesic_data(fa, 0, tol), geodesic_data(fa, 1, tol), geodesic_data(fa, 2, tol), geodesic_data(fa, 3, tol)};
}

struct GeodesicProfileSample {
    std::size_t index = 0;        // position in the input sequence
    std::array<double, 4> kg{};   // kappa_1g .. kappa_4g
};

/// Central-difference kappa_ig = <U_i', U_{i+1}> along equally spaced frames (spacing h).
/// Frames are sign-aligned to their predecessor first.
inline std::vector<GeodesicProfileSample> geodesic_profile(std::span<const DarbouxFrame> frames, double h) {
    if (frames.size() < 3) throw InsufficientTrace("geodesic profile needs at least 3 frames");
    std::vector<DarbouxFrame> f(frames.begin(), frames.end());
    for (std::size_t i = 1; i < f.size(); ++i)
        for (int k = 0; k < 5; ++k)
            if (dot(f[i].U[k], f[i - 1].U[k]) < 0.0) f[i].U[k] = -f[i].U[k];

    std::vector<GeodesicProfileSample> out;
    for (std::size_t i = 1; i + 1 < f.size(); ++i) {
        GeodesicProfileSample s;
        s.index = i;
        for (int k = 0; k < 4; ++k) {
            const Vec5 du = (f[i + 1].U[k] - f[i - 1].U[k]) / (2.0 * h);
            s.kg[k] = dot(du, f[i].U[k + 1]);
        }
        out.push_back(s);
    }
    return out;
}

} // namespace isect5
