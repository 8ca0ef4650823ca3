#include <gtest/gtest.h>

#include "guarding/random.hpp"
#include "guarding/target_geometry.hpp"
#include "oracles.hpp"

using namespace guarding;

namespace {

Vec v2(double x, double y) {
    Vec v(2);
    v << x, y;
    return v;
}

ProximityShape random_shape(Rng& rng, int n) {
    const int kind = static_cast<int>(rng.uniform(0.0, 3.0));
    if (kind == 0) return Ball{rng.gaussian_vec(n) * 2.0, rng.uniform(0.3, 3.0)};
    if (kind == 1) {
        Mat A(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) A(i, j) = rng.gaussian();
        Mat Q = A.transpose() * A + 0.2 * Mat::Identity(n, n);
        return Ellipsoid{rng.gaussian_vec(n), Q, rng.uniform(0.5, 2.0)};
    }
    return HalfSpace{rng.unit_vec(n), rng.uniform(-2.0, 2.0)};
}

}  // namespace

TEST(TargetGeometry, BallValues) {
    const ProximityShape ball = Ball{v2(0, 0), 2.0};
    EXPECT_DOUBLE_EQ(h_value(ball, v2(2, 2)), 4.0);
    EXPECT_DOUBLE_EQ(h_value(ball, v2(2, 0)), 0.0);
    EXPECT_TRUE(contains(ball, v2(1, 1)));
    EXPECT_FALSE(contains(ball, v2(2, 2)));
    EXPECT_TRUE(contains(ball, v2(2, 0)));  // boundary included
}

TEST(TargetGeometry, HalfSpaceValues) {
    const ProximityShape hs = HalfSpace{v2(1, 0), 1.0};
    EXPECT_DOUBLE_EQ(h_value(hs, v2(3, 5)), 2.0);
    EXPECT_EQ(h_gradient(hs, v2(9, -4)), v2(1, 0));
    EXPECT_TRUE(h_hessian(hs, v2(0, 0)).isZero());
}

TEST(TargetGeometry, AnalyticDerivatives) {
    const ProximityShape ball = Ball{v2(0, 0), 2.0};
    EXPECT_EQ(h_gradient(ball, v2(1, 0)), v2(2, 0));
    EXPECT_TRUE(h_hessian(ball, v2(5, -3)).isApprox(2.0 * Mat::Identity(2, 2)));

    Mat Q(2, 2);
    Q << 1, 0, 0, 4;
    const ProximityShape ell = Ellipsoid{v2(0, 0), Q, 1.0};
    EXPECT_EQ(h_gradient(ell, v2(1, 1)), v2(2, 8));
    EXPECT_TRUE(h_hessian(ell, v2(1, 1)).isApprox(2.0 * Q));
}

TEST(TargetGeometry, DimensionMismatchThrows) {
    const ProximityShape ball = Ball{v2(0, 0), 2.0};
    Vec x3(3);
    x3 << 1, 2, 3;
    EXPECT_THROW(h_value(ball, x3), std::invalid_argument);
    EXPECT_THROW(h_gradient(ball, x3), std::invalid_argument);
    EXPECT_THROW(h_hessian(ball, x3), std::invalid_argument);
}

TEST(TargetGeometry, GradientMatchesFiniteDifference) {
    Rng rng(11);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 1 + static_cast<int>(rng.uniform(0.0, 4.0));
        const ProximityShape shape = random_shape(rng, n);
        const Vec x = rng.gaussian_vec(n) * 3.0;
        const Vec dir = rng.unit_vec(n);
        const double step = 1e-5;
        const double fd =
            (h_value(shape, x + step * dir) - h_value(shape, x - step * dir)) / (2.0 * step);
        const double an = h_gradient(shape, x).dot(dir);
        EXPECT_NEAR(fd, an, 1e-6 * std::max(1.0, std::abs(an)));
    }
}

TEST(TargetGeometry, HessianMatchesFiniteDifference) {
    Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + static_cast<int>(rng.uniform(0.0, 3.0));
        const ProximityShape shape = random_shape(rng, n);
        const Vec x = rng.gaussian_vec(n) * 3.0;
        const Mat J = oracle::fd_jacobian([&](const Vec& p) { return h_gradient(shape, p); }, x);
        EXPECT_LT((J - h_hessian(shape, x)).cwiseAbs().maxCoeff(), 1e-5);
    }
}

TEST(TargetGeometry, ConvexityAlongRandomSegments) {
    Rng rng(13);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 2;
        const ProximityShape shape = random_shape(rng, n);
        const Vec x = rng.gaussian_vec(n) * 4.0;
        const Vec y = rng.gaussian_vec(n) * 4.0;
        const double t = rng.uniform();
        const double lhs = h_value(shape, t * x + (1 - t) * y);
        const double rhs = t * h_value(shape, x) + (1 - t) * h_value(shape, y);
        EXPECT_LE(lhs, rhs + 1e-12);
    }
}

TEST(TargetGeometry, HessianPositiveSemidefinite) {
    Rng rng(14);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform(0.0, 2.0));
        const ProximityShape shape = random_shape(rng, n);
        Eigen::SelfAdjointEigenSolver<Mat> eig(h_hessian(shape, rng.gaussian_vec(n)));
        EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-12);
    }
}

TEST(TargetGeometry, ValidateShape) {
    EXPECT_TRUE(validate_shape(Ball{v2(0, 0), 2.0}).empty());
    EXPECT_FALSE(validate_shape(Ball{v2(0, 0), 0.0}).empty());
    EXPECT_FALSE(validate_shape(HalfSpace{v2(2, 0), 1.0}).empty());
    Mat notspd(2, 2);
    notspd << 1, 0, 0, -1;
    EXPECT_FALSE(validate_shape(Ellipsoid{v2(0, 0), notspd, 1.0}).empty());
}
