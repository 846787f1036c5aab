#include <catch_amalgamated.hpp>

#include <random>

#include "isect5/linalg.hpp"
#include "support.hpp"

using namespace isect5;
using Catch::Approx;

namespace {

Vec5 random_vec(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Vec5 v;
    for (double& x : v.v) x = d(rng);
    return v;
}

const Vec5 e1 = Vec5::basis(0), e2 = Vec5::basis(1), e3 = Vec5::basis(2), e4 = Vec5::basis(3), e5 = Vec5::basis(4);

} // namespace

TEST_CASE("quad product of the standard basis") {
    CHECK(quad_product(e1, e2, e3, e4) == e5);
    CHECK(quad_product(e2, e3, e4, e5) == e1);
    CHECK(quad_product(e1, e3, e4, e5) == -e2);
    const Vec5 x{{1, 2, 3, 4, 5}};
    CHECK(quad_product(x, x, e1, e2) == Vec5{});
}

TEST_CASE("quad product matches a Leibniz expansion") {
    std::mt19937_64 rng(1);
    for (int n = 0; n < 50; ++n) {
        const Vec5 a = random_vec(rng), b = random_vec(rng), c = random_vec(rng), d = random_vec(rng);
        const Vec5 q = quad_product(a, b, c, d);
        const auto ref = testing::leibniz_quad(a.v, b.v, c.v, d.v);
        for (int i = 0; i < 5; ++i) CHECK(q[i] == Approx(ref[i]).margin(1e-13));
    }
}

TEST_CASE("quad product is orthogonal, multilinear and alternating") {
    std::mt19937_64 rng(2);
    for (int n = 0; n < 100; ++n) {
        const Vec5 a = random_vec(rng), b = random_vec(rng), c = random_vec(rng), d = random_vec(rng),
                   v = random_vec(rng);
        const Vec5 q = quad_product(a, b, c, d);
        const double scale = norm(a) * norm(b) * norm(c) * norm(d);
        for (const Vec5& x : {a, b, c, d}) CHECK(std::abs(dot(q, x)) <= 1e-10 * scale * norm(x));

        const double s = 0.7;
        const Vec5 lin = quad_product(a + s * v, b, c, d);
        const Vec5 sum = q + s * quad_product(v, b, c, d);
        CHECK(norm(lin - sum) <= 1e-9 * std::max(1.0, norm(lin)));
        const Vec5 lin3 = quad_product(a, b, c + s * v, d);
        const Vec5 sum3 = q + s * quad_product(a, b, v, d);
        CHECK(norm(lin3 - sum3) <= 1e-9 * std::max(1.0, norm(lin3)));

        const Vec5 swapped = quad_product(b, a, c, d);
        for (int i = 0; i < 5; ++i) CHECK(std::abs(swapped[i] + q[i]) <= 1e-12);
        const Vec5 swapped2 = quad_product(a, b, d, c);
        for (int i = 0; i < 5; ++i) CHECK(std::abs(swapped2[i] + q[i]) <= 1e-12);
    }
}

TEST_CASE("solve4") {
    const Vec4 b{1, 2, 3, 4};
    CHECK(solve4(Mat4::identity(), b) == b);

    // First fundamental form of X1 at the worked-example point, right-hand side <t, Phi_l>.
    Mat4 g;
    g.m = {{{0.5, 0.5, 0, 0}, {0.5, 1, -0.5, 0}, {0, -0.5, 2.25, -1}, {0, 0, -1, 1}}};
    const Vec5 t{{-0.20965697, 0, -0.74124932, -0.62897090, -0.10482848}};
    const double r = std::sqrt(2.0) / 2;
    // Phi_l of X1 at (pi/4, pi/4, pi/4, 1), differentiated by hand.
    const std::array<Vec5, 4> phi{Vec5{{-0.5, 0.5, 0, 0, 0}}, Vec5{{-0.5, 0.5, -r, 0, 0}},
                                  Vec5{{0.5, 0.5, r, -1, 0.5}}, Vec5{{0, 0, 0, 1, 0}}};
    const Mat4 g_hand = gram(phi);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(g_hand(i, j) == Approx(g(i, j)).margin(1e-15));
    Vec4 rhs;
    for (int l = 0; l < 4; ++l) rhs[l] = dot(t, phi[l]);
    const Vec4 u = solve4(g, rhs);
    const Vec4 want{-0.628971, 0.838628, -0.209657, -0.838628};
    for (int i = 0; i < 4; ++i) CHECK(u[i] == Approx(want[i]).margin(1e-5));

    Mat4 zero_row = Mat4::identity();
    zero_row.m[2] = {0, 0, 0, 0};
    CHECK_THROWS_AS(solve4(zero_row, b), SingularSystem);
    CHECK_THROWS_AS(solve4(Mat4{}, b), SingularSystem);
}

TEST_CASE("solve4 reproduces the right-hand side and agrees with Cramer's rule") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int n = 0; n < 200; ++n) {
        Mat4 a;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) a(i, j) = d(rng) + (i == j ? 3.0 : 0.0);
        const Vec4 b{d(rng), d(rng), d(rng), d(rng)};
        const Vec4 x = solve4(a, b);
        const Vec4 back = a * x;
        double bn = 0.0;
        for (double v : b) bn = std::max(bn, std::abs(v));
        for (int i = 0; i < 4; ++i) CHECK(std::abs(back[i] - b[i]) <= 1e-10 * (1 + bn));
        const auto ref = testing::cramer4(a.m, b);
        for (int i = 0; i < 4; ++i) CHECK(x[i] == Approx(ref[i]).epsilon(1e-10).margin(1e-12));
    }
}

TEST_CASE("gram matrix") {
    std::mt19937_64 rng(4);
    std::array<Vec5, 4> v{random_vec(rng), random_vec(rng), random_vec(rng), random_vec(rng)};
    const Mat4 g = gram(v);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            CHECK(std::abs(g(i, j) - g(j, i)) <= 1e-12);
            CHECK(g(i, j) == dot(v[i], v[j]));
        }
    CHECK(quadratic_form(Mat4::identity(), {1, 2, 3, 4}) == 30.0);
}

TEST_CASE("gram_schmidt") {
    const std::array<Vec5, 2> already{e1, e2};
    auto q = gram_schmidt(already);
    CHECK(q[0] == e1);
    CHECK(q[1] == e2);

    const std::array<Vec5, 2> shear{e1, e1 + e2};
    q = gram_schmidt(shear);
    CHECK(norm(q[0] - e1) <= 1e-15);
    CHECK(norm(q[1] - e2) <= 1e-15);

    const std::array<Vec5, 2> dependent{e1, 2.0 * e1};
    try {
        gram_schmidt(dependent);
        FAIL("expected RankDeficient");
    } catch (const RankDeficient& e) {
        CHECK(e.position() == 2);
    }

    std::mt19937_64 rng(5);
    for (int n = 0; n < 100; ++n) {
        std::array<Vec5, 5> v{random_vec(rng), random_vec(rng), random_vec(rng), random_vec(rng), random_vec(rng)};
        const auto o = gram_schmidt(v);
        REQUIRE(o.size() == 5);
        for (int i = 0; i < 5; ++i) {
            CHECK(std::abs(norm(o[i]) - 1.0) <= 1e-12);
            for (int j = 0; j < i; ++j) CHECK(std::abs(dot(o[i], o[j])) <= 1e-12);
            // Same flag: v_i lies in span(o_0..o_i) and has a positive component along o_i.
            const Vec5 resid = reject(v[i], std::span<const Vec5>(o.data(), i));
            CHECK(dot(o[i], resid) > 0.0);
            CHECK(norm(reject(v[i], std::span<const Vec5>(o.data(), i + 1))) <= 1e-12 * norm(v[i]));
        }
    }
}
