#pragma once

// Shared fixtures and independent reference computations for the test binaries.
// Nothing here calls into the library's own quad product, solver or Gram-Schmidt.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "isect5/scene.hpp"

namespace testing {

inline std::string fixture(const std::string& name) { return std::string(FIXTURE_DIR) + "/" + name; }

inline isect5::Scene load(const std::string& name) { return isect5::load_scene(fixture(name)); }

using V5 = std::array<double, 5>;

inline double dot5(const V5& a, const V5& b) {
    double s = 0.0;
    for (int i = 0; i < 5; ++i) s += a[i] * b[i];
    return s;
}

inline V5 to_v5(const isect5::Vec5& v) { return v.v; }

/// Sign of a permutation given as an index array.
template <std::size_t N>
inline int perm_sign(const std::array<int, N>& p) {
    int s = 1;
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = i + 1; j < N; ++j)
            if (p[i] > p[j]) s = -s;
    return s;
}

/// Formal determinant with e1..e5 in the first row, by a full Leibniz sum over S5.
inline V5 leibniz_quad(const V5& a, const V5& b, const V5& c, const V5& d) {
    const V5* rows[4] = {&a, &b, &c, &d};
    V5 out{};
    std::array<int, 5> p{0, 1, 2, 3, 4};
    do {
        double term = perm_sign(p);
        for (int r = 0; r < 4; ++r) term *= (*rows[r])[p[r + 1]];
        out[p[0]] += term;
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
}

inline double norm5(const V5& a) { return std::sqrt(dot5(a, a)); }

inline V5 unit5(const V5& a) {
    V5 out = a;
    const double n = norm5(a);
    for (double& x : out) x /= n;
    return out;
}

/// Frenet frame and curvatures of a unit-speed curve from its derivatives d[0..4] = alpha'..alpha^(5),
/// straight from the binormal and curvature formulas.
struct DirectFrenet {
    V5 t, n, b1, b2, b3;
    double k1, k2, k3, k4;
};

inline DirectFrenet direct_frenet(const std::array<V5, 5>& d) {
    DirectFrenet f;
    f.t = d[0];
    f.k1 = norm5(d[1]);
    f.n = unit5(d[1]);
    f.b3 = unit5(leibniz_quad(d[0], d[1], d[2], d[3]));
    f.b2 = unit5(leibniz_quad(f.b3, d[0], d[1], d[2]));
    f.b1 = unit5(leibniz_quad(f.b2, f.b3, d[0], d[1]));
    f.k2 = dot5(d[2], f.b1) / f.k1;
    f.k3 = dot5(d[3], f.b2) / (f.k1 * f.k2);
    f.k4 = dot5(d[4], f.b3) / (f.k1 * f.k2 * f.k3);
    return f;
}

/// gamma(theta) = (cos th, sin th, cos 2th, sin 2th, th) / sqrt(6), unit speed; k-th derivative.
inline V5 helix_derivative(double th, int k) {
    const double r = 1.0 / std::sqrt(6.0);
    auto trig = [](double w, double x, int k) {
        // k-th derivative of (cos wx, sin wx)
        const double wk = std::pow(w, k);
        const double ang = w * x + k * M_PI / 2.0;
        return std::array<double, 2>{wk * std::cos(ang), wk * std::sin(ang)};
    };
    const auto a = trig(1.0, th, k);
    const auto b = trig(2.0, th, k);
    const double lin = k == 0 ? th : (k == 1 ? 1.0 : 0.0);
    return {r * a[0], r * a[1], r * b[0], r * b[1], r * lin};
}

/// 4x4 solve by Cramer's rule with Leibniz determinants, for cross-checking.
inline std::array<double, 4> cramer4(const std::array<std::array<double, 4>, 4>& a, const std::array<double, 4>& b) {
    auto det = [](const std::array<std::array<double, 4>, 4>& m) {
        std::array<int, 4> p{0, 1, 2, 3};
        double s = 0.0;
        do {
            double t = perm_sign(p);
            for (int i = 0; i < 4; ++i) t *= m[i][p[i]];
            s += t;
        } while (std::next_permutation(p.begin(), p.end()));
        return s;
    };
    const double d = det(a);
    std::array<double, 4> x{};
    for (int c = 0; c < 4; ++c) {
        auto m = a;
        for (int r = 0; r < 4; ++r) m[r][c] = b[r];
        x[c] = det(m) / d;
    }
    return x;
}

inline double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

} // namespace testing
