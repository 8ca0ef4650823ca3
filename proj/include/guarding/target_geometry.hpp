#pragma once

// Convex target area T = { x : h(x) <= 0 } behind a proximity-function
// interface with exact first and second derivatives. All shapes keep h
// convex and twice continuously differentiable on the whole space.

#include <variant>
#include <vector>

#include "guarding/types.hpp"

namespace guarding {

// h(x) = ||x - center||^2 - radius^2
struct Ball {
    Vec center;
    double radius = 1.0;
};

// h(x) = (x - center)^T Q (x - center) - level, Q symmetric positive definite
struct Ellipsoid {
    Vec center;
    Mat shape_matrix;
    double level = 1.0;
};

// h(x) = normal . x - offset, ||normal|| = 1
struct HalfSpace {
    Vec normal;
    double offset = 0.0;
};

using ProximityShape = std::variant<Ball, Ellipsoid, HalfSpace>;

inline Eigen::Index shape_dim(const ProximityShape& shape) {
    return std::visit([](const auto& s) -> Eigen::Index {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, HalfSpace>)
            return s.normal.size();
        else
            return s.center.size();
    }, shape);
}

// Returns all invariant violations (empty means the shape is valid).
inline std::vector<std::string> validate_shape(const ProximityShape& shape) {
    std::vector<std::string> bad;
    if (const auto* b = std::get_if<Ball>(&shape)) {
        if (b->center.size() < 1) bad.push_back("ball center must have dimension >= 1");
        if (!(b->radius > 0.0)) bad.push_back("ball radius must be > 0");
    } else if (const auto* e = std::get_if<Ellipsoid>(&shape)) {
        const Eigen::Index n = e->center.size();
        if (n < 1) bad.push_back("ellipsoid center must have dimension >= 1");
        if (e->shape_matrix.rows() != n || e->shape_matrix.cols() != n) {
            bad.push_back("ellipsoid shape_matrix size must match center dimension");
        } else {
            if ((e->shape_matrix - e->shape_matrix.transpose()).cwiseAbs().maxCoeff() > 1e-10)
                bad.push_back("ellipsoid shape_matrix must be symmetric");
            Eigen::SelfAdjointEigenSolver<Mat> eig(e->shape_matrix);
            if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0)
                bad.push_back("ellipsoid shape_matrix must be positive definite");
        }
    } else if (const auto* hs = std::get_if<HalfSpace>(&shape)) {
        if (hs->normal.size() < 1) bad.push_back("halfspace normal must have dimension >= 1");
        else if (std::abs(hs->normal.norm() - 1.0) > 1e-9)
            bad.push_back("halfspace normal must have unit norm");
    }
    return bad;
}

inline double h_value(const ProximityShape& shape, const Vec& x) {
    return std::visit([&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ball>) {
            require_dim(x, s.center.size(), "h_value");
            return (x - s.center).squaredNorm() - s.radius * s.radius;
        } else if constexpr (std::is_same_v<T, Ellipsoid>) {
            require_dim(x, s.center.size(), "h_value");
            const Vec d = x - s.center;
            return d.dot(s.shape_matrix * d) - s.level;
        } else {
            require_dim(x, s.normal.size(), "h_value");
            return s.normal.dot(x) - s.offset;
        }
    }, shape);
}

inline Vec h_gradient(const ProximityShape& shape, const Vec& x) {
    return std::visit([&](const auto& s) -> Vec {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ball>) {
            require_dim(x, s.center.size(), "h_gradient");
            return 2.0 * (x - s.center);
        } else if constexpr (std::is_same_v<T, Ellipsoid>) {
            require_dim(x, s.center.size(), "h_gradient");
            return 2.0 * (s.shape_matrix * (x - s.center));
        } else {
            require_dim(x, s.normal.size(), "h_gradient");
            return s.normal;
        }
    }, shape);
}

inline Mat h_hessian(const ProximityShape& shape, const Vec& x) {
    return std::visit([&](const auto& s) -> Mat {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ball>) {
            require_dim(x, s.center.size(), "h_hessian");
            return 2.0 * Mat::Identity(x.size(), x.size());
        } else if constexpr (std::is_same_v<T, Ellipsoid>) {
            require_dim(x, s.center.size(), "h_hessian");
            return 2.0 * s.shape_matrix;
        } else {
            require_dim(x, s.normal.size(), "h_hessian");
            return Mat::Zero(x.size(), x.size());
        }
    }, shape);
}

inline bool contains(const ProximityShape& shape, const Vec& x) {
    return h_value(shape, x) <= 0.0;
}

}  // namespace guarding
