#pragma once

// Small dense linear algebra on R^5 vectors and 4x4 systems.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "isect5/errors.hpp"

namespace isect5 {

struct Vec5 {
    std::array<double, 5> v{};

    constexpr double& operator[](int i) { return v[i]; }
    constexpr double operator[](int i) const { return v[i]; }

    static constexpr Vec5 basis(int i) {
        Vec5 e;
        e.v[i] = 1.0;
        return e;
    }

    constexpr Vec5& operator+=(const Vec5& o) {
        for (int i = 0; i < 5; ++i) v[i] += o.v[i];
        return *this;
    }
    constexpr Vec5& operator-=(const Vec5& o) {
        for (int i = 0; i < 5; ++i) v[i] -= o.v[i];
        return *this;
    }
    constexpr Vec5& operator*=(double s) {
        for (double& x : v) x *= s;
        return *this;
    }

    friend constexpr Vec5 operator+(Vec5 a, const Vec5& b) { return a += b; }
    friend constexpr Vec5 operator-(Vec5 a, const Vec5& b) { return a -= b; }
    friend constexpr Vec5 operator-(Vec5 a) { return a *= -1.0; }
    friend constexpr Vec5 operator*(Vec5 a, double s) { return a *= s; }
    friend constexpr Vec5 operator*(double s, Vec5 a) { return a *= s; }
    friend constexpr Vec5 operator/(Vec5 a, double s) { return a *= 1.0 / s; }
    friend constexpr bool operator==(const Vec5&, const Vec5&) = default;
};

using Vec4 = std::array<double, 4>;

inline double dot(const Vec5& a, const Vec5& b) {
    double s = 0.0;
    for (int i = 0; i < 5; ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Vec5& a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(const Vec5& a) {
    double m = 0.0;
    for (double x : a.v) m = std::max(m, std::abs(x));
    return m;
}

inline Vec5 normalized(const Vec5& a) { return a / norm(a); }

inline double dot(const Vec4& a, const Vec4& b) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i) s += a[i] * b[i];
    return s;
}

struct Mat4 {
    std::array<std::array<double, 4>, 4> m{};

    double& operator()(int i, int j) { return m[i][j]; }
    double operator()(int i, int j) const { return m[i][j]; }

    static Mat4 identity() {
        Mat4 a;
        for (int i = 0; i < 4; ++i) a.m[i][i] = 1.0;
        return a;
    }

    Vec4 operator*(const Vec4& x) const {
        Vec4 y{};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) y[i] += m[i][j] * x[j];
        return y;
    }
};

/// Gram matrix <v_i, v_j> of four vectors.
inline Mat4 gram(std::span<const Vec5, 4> v) {
    Mat4 g;
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) g(i, j) = g(j, i) = dot(v[i], v[j]);
    return g;
}

/// Quadratic form x^T A x.
inline double quadratic_form(const Mat4& a, const Vec4& x) { return dot(x, a * x); }

namespace detail {
inline double det3(double a, double b, double c, double d, double e, double f, double g, double h, double i) {
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
}

inline double det4(const std::array<std::array<double, 4>, 4>& r) {
    double s = 0.0;
    for (int c = 0; c < 4; ++c) {
        int k[3];
        for (int j = 0, n = 0; j < 4; ++j)
            if (j != c) k[n++] = j;
        const double minor = det3(r[1][k[0]], r[1][k[1]], r[1][k[2]],
                                  r[2][k[0]], r[2][k[1]], r[2][k[2]],
                                  r[3][k[0]], r[3][k[1]], r[3][k[2]]);
        s += (c % 2 == 0 ? 1.0 : -1.0) * r[0][c] * minor;
    }
    return s;
}
} // namespace detail

/// Formal 5x5 determinant with the basis row e1..e5 first and x, y, z, w below,
/// expanded along the basis row. Orthogonal to all four arguments.
inline Vec5 quad_product(const Vec5& x, const Vec5& y, const Vec5& z, const Vec5& w) {
    const Vec5* rows[4] = {&x, &y, &z, &w};
    Vec5 out;
    for (int col = 0; col < 5; ++col) {
        std::array<std::array<double, 4>, 4> minor{};
        for (int r = 0; r < 4; ++r)
            for (int j = 0, n = 0; j < 5; ++j)
                if (j != col) minor[r][n++] = (*rows[r])[j];
        out[col] = (col % 2 == 0 ? 1.0 : -1.0) * detail::det4(minor);
    }
    return out;
}

inline Vec5 quad_product(std::span<const Vec5, 4> v) { return quad_product(v[0], v[1], v[2], v[3]); }

/// Gaussian elimination with partial pivoting. Throws SingularSystem when a pivot
/// falls below 1e-12 times the largest initial entry magnitude.
inline Vec4 solve4(const Mat4& a_in, const Vec4& b_in) {
    auto a = a_in.m;
    Vec4 b = b_in;
    double scale = 0.0;
    for (const auto& row : a)
        for (double x : row) scale = std::max(scale, std::abs(x));
    const double tol = 1e-12 * scale;

    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (!(std::abs(a[piv][col]) > tol) || scale == 0.0)
            throw SingularSystem("singular 4x4 system (pivot " + std::to_string(col + 1) + ")");
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (int r = col + 1; r < 4; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < 4; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    Vec4 x{};
    for (int r = 3; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < 4; ++c) s -= a[r][c] * x[c];
        x[r] = s / a[r][r];
    }
    return x;
}

/// v minus its components along the (orthonormal) `basis`: classical projection
/// followed by one re-orthogonalization pass.
inline Vec5 reject(Vec5 v, std::span<const Vec5> basis) {
    for (int pass = 0; pass < 2; ++pass) {
        Vec5 proj;
        for (const Vec5& q : basis) proj += dot(v, q) * q;
        v -= proj;
    }
    return v;
}

/// Classical Gram-Schmidt with one re-orthogonalization pass.
/// Throws RankDeficient (1-based position) when a residual norm drops below `tol`.
inline std::vector<Vec5> gram_schmidt(std::span<const Vec5> vectors, double tol = 1e-10) {
    if (vectors.size() > 5) throw RankDeficient(6, "more than 5 vectors in R^5");
    std::vector<Vec5> q;
    q.reserve(vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        const Vec5 r = reject(vectors[i], q);
        const double n = norm(r);
        if (!(n >= tol))
            throw RankDeficient(static_cast<int>(i + 1), "Gram-Schmidt residual vanished at position " + std::to_string(i + 1));
        q.push_back(r / n);
    }
    return q;
}

} // namespace isect5
