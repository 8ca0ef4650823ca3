#pragma once

// Test-only oracles. Everything here recomputes expected values through an
// independent route (closed forms, finite differences, brute-force grids)
// and must not call into the solver paths it is used to check.

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "guarding/game_model.hpp"
#include "guarding/types.hpp"

namespace oracle {

using guarding::Vec;

// Closed-form single-attacker solution for a Ball target: project the
// target center onto the safe-reachable ball, derived by completing the
// square in ||p - x_A||^2 <= nu^2 ||p - x_D||^2.
struct SingleBallSolution {
    Vec point;
    double value;  // theta * h(p*)
};

inline SingleBallSolution single_ball_closed_form(const Vec& x_attacker, const Vec& x_defender,
                                                  double nu, const Vec& target_center,
                                                  double target_radius, double theta) {
    const double s = 1.0 - nu * nu;
    const Vec center = (x_attacker - nu * nu * x_defender) / s;
    const double radius = nu * (x_attacker - x_defender).norm() / s;
    const Vec offset = target_center - center;
    Vec p;
    if (offset.norm() <= radius)
        p = target_center;
    else
        p = center + radius * offset / offset.norm();
    return {p, theta * ((p - target_center).squaredNorm() - target_radius * target_radius)};
}

// Central finite difference of a scalar function.
inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x,
                       double step = 1e-5) {
    Vec g(x.size());
    Vec xp = x, xm = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        xp[i] += step;
        xm[i] -= step;
        g[i] = (f(xp) - f(xm)) / (2.0 * step);
        xp[i] = x[i];
        xm[i] = x[i];
    }
    return g;
}

inline guarding::Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x,
                                 double step = 1e-5) {
    const Vec f0 = f(x);
    guarding::Mat J(f0.size(), x.size());
    Vec xp = x, xm = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        xp[i] += step;
        xm[i] -= step;
        J.col(i) = (f(xp) - f(xm)) / (2.0 * step);
        xp[i] = x[i];
        xm[i] = x[i];
    }
    return J;
}

// Brute-force minimum of theta * h over the single-attacker safe-reachable
// region, scanning an axis-aligned grid over the region's bounding box and
// refining around the incumbent. 2-D only.
inline double grid_min_single(const guarding::GameConfig& cfg, const guarding::GameState& state,
                              int cells = 800, int refine_rounds = 3) {
    const int i = cfg.m - 1;
    const Vec& xa = state.attackers[i];
    const Vec& xd = state.defender;
    const double nu = cfg.speeds[i];
    const double s = 1.0 - nu * nu;
    const Vec center = (xa - nu * nu * xd) / s;
    const double radius = nu * (xa - xd).norm() / s;

    double lo_x = center[0] - radius, hi_x = center[0] + radius;
    double lo_y = center[1] - radius, hi_y = center[1] + radius;
    double best = std::numeric_limits<double>::infinity();
    double best_x = center[0], best_y = center[1];

    for (int round = 0; round <= refine_rounds; ++round) {
        const double dx = (hi_x - lo_x) / cells, dy = (hi_y - lo_y) / cells;
        for (int ix = 0; ix <= cells; ++ix) {
            const double px = lo_x + ix * dx;
            for (int iy = 0; iy <= cells; ++iy) {
                const double py = lo_y + iy * dy;
                Vec p(2);
                p << px, py;
                if ((p - xa).norm() / nu - (p - xd).norm() > 0.0) continue;
                const double v = cfg.weights[i] * guarding::h_value(cfg.target, p);
                if (v < best) {
                    best = v;
                    best_x = px;
                    best_y = py;
                }
            }
        }
        const double wx = 3.0 * dx, wy = 3.0 * dy;
        lo_x = best_x - wx;
        hi_x = best_x + wx;
        lo_y = best_y - wy;
        hi_y = best_y + wy;
    }
    return best;
}

}  // namespace oracle
