#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include <boost/multiprecision/cpp_int.hpp>

#include "test_support.hpp"

using namespace lmcf;
using namespace lmcf::testing;

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double max_hessian_error(int nodes, double a) {
    const GridSpec g(2, a, nodes);
    const auto u = ScalarField::sample(g, [](const Point& x) { return std::sin(x[0]) * std::sin(x[1]); });
    const auto H = fd_hessian(u);
    const auto mask = make_ball_mask(g, 0.5);
    double err = 0.0;
    for (auto p : mask.member_nodes) {
        const Point x = g.position(p);
        const double s0 = std::sin(x[0]), s1 = std::sin(x[1]), c0 = std::cos(x[0]), c1 = std::cos(x[1]);
        err = std::max({err, std::abs(H.values[p](0, 0) + s0 * s1), std::abs(H.values[p](1, 1) + s0 * s1),
                        std::abs(H.values[p](0, 1) - c0 * c1)});
    }
    return err;
}

}  // namespace

TEST(GridSpec, RejectsBadParameters) {
    EXPECT_THROW(GridSpec(0, 1.0, 9), ConfigError);
    EXPECT_THROW(GridSpec(4, 1.0, 9), ConfigError);
    EXPECT_THROW(GridSpec(2, -1.0, 9), ConfigError);
    EXPECT_THROW(GridSpec(2, 1.0, 8), ConfigError);
    EXPECT_THROW(GridSpec(2, 1.0, 3), ConfigError);
}

TEST(GridSpec, RowMajorLayoutAndOrigin) {
    const GridSpec g(3, 2.0, 5);
    EXPECT_EQ(g.node_count(), 125u);
    EXPECT_DOUBLE_EQ(g.spacing(), 1.0);
    EXPECT_EQ(g.stride(2), 1u);
    EXPECT_EQ(g.stride(0), 25u);
    const auto o = g.origin_index();
    for (int k = 0; k < 3; ++k) EXPECT_EQ(g.position(o)[static_cast<std::size_t>(k)], 0.0);
    for (std::size_t p = 0; p < g.node_count(); ++p) EXPECT_EQ(g.flat_index(g.multi_index(p)), p);
    EXPECT_DOUBLE_EQ(g.position(1)[2], -1.0);
    EXPECT_DOUBLE_EQ(g.position(25)[0], -1.0);
}

TEST(FdGradient, LinearIsExact) {
    const GridSpec g(2, 1.0, 11);
    const auto u = ScalarField::sample(g, [](const Point& x) { return 2.0 * x[0] - x[1]; });
    const auto du = fd_gradient(u);
    for (std::size_t p = 0; p < g.node_count(); ++p) {
        EXPECT_NEAR(du.values[p][0], 2.0, 1e-13);
        EXPECT_NEAR(du.values[p][1], -1.0, 1e-13);
    }
}

TEST(FdGradient, ConstantGivesZero) {
    const GridSpec g(3, 1.0, 7);
    const auto du = fd_gradient(ScalarField(g, 7.0));
    for (const auto& v : du.values)
        for (double c : v) EXPECT_EQ(c, 0.0);
}

TEST(FdGradient, CubicMatchesExactRationalStencil) {
    // Central difference of x^3 at x = 1/2, h = 1/10 in exact rationals:
    // ((3/5)^3 - (2/5)^3) / (1/5) = 19/25 = 3x^2 + h^2.
    using boost::multiprecision::cpp_rational;
    const cpp_rational xp(3, 5), xm(2, 5), two_h(1, 5);
    const cpp_rational exact = (xp * xp * xp - xm * xm * xm) / two_h;
    ASSERT_EQ(exact, cpp_rational(19, 25));
    const double frozen = 0.76;
    EXPECT_EQ(static_cast<double>(exact), frozen);

    const GridSpec g(1, 1.0, 21);
    const auto u = ScalarField::sample(g, [](const Point& x) { return x[0] * x[0] * x[0]; });
    const auto du = fd_gradient(u);
    const std::size_t node = 15;  // x = 0.5
    ASSERT_DOUBLE_EQ(g.position(node)[0], 0.5);
    EXPECT_NEAR(du.values[node][0], frozen, 1e-14);
}

TEST(FdHessian, HalfSquaredNormGivesIdentity) {
    const GridSpec g(2, 1.0, 9);
    const auto u = ScalarField::sample(g, [](const Point& x) { return 0.5 * (x[0] * x[0] + x[1] * x[1]); });
    const auto H = fd_hessian(u);
    for (std::size_t p = 0; p < g.node_count(); ++p) {
        if (g.is_boundary(p)) continue;
        EXPECT_NEAR(H.values[p](0, 0), 1.0, 1e-13);
        EXPECT_NEAR(H.values[p](1, 1), 1.0, 1e-13);
        EXPECT_NEAR(H.values[p](0, 1), 0.0, 1e-13);
    }
}

TEST(FdHessian, BilinearGivesOffDiagonal) {
    const GridSpec g(2, 1.0, 9);
    const auto u = ScalarField::sample(g, [](const Point& x) { return x[0] * x[1]; });
    const auto H = fd_hessian(u);
    for (std::size_t p = 0; p < g.node_count(); ++p) {
        if (g.is_boundary(p)) continue;
        EXPECT_NEAR(H.values[p](0, 0), 0.0, 1e-13);
        EXPECT_NEAR(H.values[p](1, 1), 0.0, 1e-13);
        EXPECT_NEAR(H.values[p](0, 1), 1.0, 1e-13);
    }
}

TEST(FdHessian, SecondOrderConvergenceOnSinSin) {
    const double e1 = max_hessian_error(17, 1.0);
    const double e2 = max_hessian_error(33, 1.0);
    const double e3 = max_hessian_error(65, 1.0);
    EXPECT_GE(e1 / e2, 3.5);
    EXPECT_LE(e1 / e2, 4.5);
    EXPECT_GE(e2 / e3, 3.5);
    EXPECT_LE(e2 / e3, 4.5);
    // C h^2 with the constant from the coarsest grid.
    const double h1 = GridSpec(2, 1.0, 17).spacing();
    EXPECT_LE(e3, 1.1 * (e1 / (h1 * h1)) * std::pow(GridSpec(2, 1.0, 65).spacing(), 2));
}

// Every polynomial of degree <= 2, including boundary nodes (one-sided
// stencils are exact on quadratics too).
TEST(FdStencils, QuadraticExactnessProperty) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> c(-3.0, 3.0);
    for (int dim = 1; dim <= 3; ++dim) {
        const GridSpec g(dim, 1.3, 7);
        for (int trial = 0; trial < 10; ++trial) {
            const SymMatrix A = random_sym(dim, -3.0, 3.0, rng);
            Point b{};
            for (int k = 0; k < dim; ++k) b[static_cast<std::size_t>(k)] = c(rng);
            const double c0 = c(rng);
            auto f = [&](const Point& x) {
                double v = c0;
                for (int i = 0; i < dim; ++i) {
                    v += b[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
                    for (int j = 0; j < dim; ++j)
                        v += 0.5 * A(i, j) * x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(j)];
                }
                return v;
            };
            const auto u = ScalarField::sample(g, f);
            const auto du = fd_gradient(u);
            const auto H = fd_hessian(u);
            double scale = 0.0;
            for (double v : u.values) scale = std::max(scale, std::abs(v));
            const double h = g.spacing();
            for (std::size_t p = 0; p < g.node_count(); ++p) {
                const Point x = g.position(p);
                for (int i = 0; i < dim; ++i) {
                    double gi = b[static_cast<std::size_t>(i)];
                    for (int j = 0; j < dim; ++j) gi += A(i, j) * x[static_cast<std::size_t>(j)];
                    EXPECT_NEAR(du.values[p][static_cast<std::size_t>(i)], gi, 10 * 8 * kEps * scale / h);
                    for (int j = 0; j < dim; ++j)
                        EXPECT_NEAR(H.values[p](i, j), A(i, j), 10 * 16 * kEps * scale / (h * h));
                }
            }
        }
    }
}

TEST(FdHessian, SymmetricBitExactly) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u01(-1.0, 1.0);
    const GridSpec g(3, 1.0, 7);
    ScalarField u(g);
    for (auto& v : u.values) v = u01(rng);
    const auto H = fd_hessian(u);
    for (const auto& m : H.values)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) EXPECT_EQ(m(i, j), m(j, i));
}

TEST(BallMask, LargeRadiusCoversEverything) {
    const GridSpec g(2, 1.0, 9);
    const auto m = make_ball_mask(g, std::sqrt(2.0) + 1e-9);
    EXPECT_EQ(m.member_nodes.size(), g.node_count());
}

TEST(BallMask, TinyRadiusIsTheOrigin) {
    const GridSpec g(3, 1.0, 9);
    const auto m = make_ball_mask(g, 0.4 * g.spacing());
    ASSERT_EQ(m.member_nodes.size(), 1u);
    EXPECT_EQ(m.member_nodes[0], g.origin_index());
}

TEST(BallMask, MembershipMatchesBruteForce) {
    const GridSpec g(2, 1.0, 5);
    std::size_t count = 0;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            const double x = -1.0 + 0.5 * i, y = -1.0 + 0.5 * j;
            if (x * x + y * y <= 1.0) ++count;
        }
    EXPECT_EQ(count, 13u);
    EXPECT_EQ(make_ball_mask(g, 1.0).member_nodes.size(), count);
}

TEST(BallMask, EmptyMaskIsAnError) {
    const GridSpec g(2, 1.0, 5);
    EXPECT_THROW(make_ball_mask(g, Point{0.25, 0.25, 0.0}, 0.1), ConfigError);
    EXPECT_THROW(make_ball_mask(g, 0.0), ConfigError);
}

TEST(BallMask, BoundaryAndInteriorConsistency) {
    for (int dim = 1; dim <= 3; ++dim) {
        const GridSpec g(dim, 1.0, 13);
        for (double r : {0.3, 0.55, 0.8, 1.0}) {
            const auto m = make_ball_mask(g, Point{0.1, -0.05, 0.0}, r);
            std::vector<char> edge(g.node_count(), 0);
            for (auto b : m.boundary_nodes) {
                EXPECT_TRUE(m.contains(b));
                edge[b] = 1;
                bool outside_neighbour = false;
                const auto idx = g.multi_index(b);
                for (int k = 0; k < dim; ++k) {
                    const int i = idx[static_cast<std::size_t>(k)];
                    const auto s = g.stride(k);
                    if (i == 0 || i == 12 || !m.contains(b - s) || !m.contains(b + s)) outside_neighbour = true;
                }
                EXPECT_TRUE(outside_neighbour);
            }
            for (auto p : m.interior_nodes()) {
                EXPECT_FALSE(edge[p]);
                for (int k = 0; k < dim; ++k) {
                    EXPECT_TRUE(m.contains(p - g.stride(k)));
                    EXPECT_TRUE(m.contains(p + g.stride(k)));
                }
            }
        }
    }
}
