#pragma once

// Game instance (agents, speeds, weights, target), the state, the weighted
// proximity objective, and the time-extended reachability constraints g_j
// of the capture-point problem.
//
// Conventions: attacker indices are 0-based. `phase` is the index of the
// first uncaptured attacker; attackers are captured in index order.
// Constraint g_j for a phase-`i` game, j >= i:
//
//   g_j = ||p_j - x_{A_j}|| / nu_j - sum_{k=i}^{j} ||p_k - p_{k-1}||,
//
// with p_{i-1} taken to be the defender position. g_j <= 0 means the
// defender, traversing p_i, ..., p_j in order, reaches p_j no earlier than
// attacker j does.

#include <cmath>
#include <string>
#include <vector>

#include "guarding/target_geometry.hpp"
#include "guarding/types.hpp"

namespace guarding {

struct Tolerances {
    double kkt_tol = 1e-8;
    double value_gap_tol = 1e-6;
    double fd_step = 1e-5;
};

struct GameConfig {
    int n = 2;                     // space dimension
    int m = 1;                     // attacker count
    std::vector<double> speeds;    // nu_i in (0,1), attacker speed per unit defender speed
    std::vector<double> weights;   // theta_i > 0, summing to 1
    ProximityShape target = Ball{Vec::Zero(2), 1.0};
    double capture_radius = 1e-3;  // epsilon
    Tolerances tol;
};

struct GameState {
    std::vector<Vec> attackers;  // m positions
    Vec defender;
    int phase = 0;  // first uncaptured attacker

    int alive(const GameConfig& cfg) const { return cfg.m - phase; }
};

inline std::vector<std::string> validate_config(const GameConfig& cfg) {
    std::vector<std::string> bad;
    if (cfg.m < 1) bad.push_back("attacker count m must be >= 1");
    if (cfg.n < 1) bad.push_back("dimension n must be >= 1");
    if (!(cfg.capture_radius > 0.0)) bad.push_back("capture_radius must be > 0");
    if (static_cast<int>(cfg.speeds.size()) != cfg.m) {
        bad.push_back("speeds must list exactly m values");
    } else {
        for (int i = 0; i < cfg.m; ++i)
            if (!(cfg.speeds[i] > 0.0 && cfg.speeds[i] < 1.0))
                bad.push_back("speed ratio nu_" + std::to_string(i + 1) + " not in (0,1)");
    }
    if (static_cast<int>(cfg.weights.size()) != cfg.m) {
        bad.push_back("weights must list exactly m values");
    } else {
        double sum = 0.0;
        bool pos = true;
        for (int i = 0; i < cfg.m; ++i) {
            if (!(cfg.weights[i] > 0.0)) {
                bad.push_back("weight theta_" + std::to_string(i + 1) + " must be > 0");
                pos = false;
            }
            sum += cfg.weights[i];
        }
        if (pos && std::abs(sum - 1.0) > 1e-12) bad.push_back("weights sum != 1");
    }
    if (shape_dim(cfg.target) != cfg.n) bad.push_back("target dimension must equal n");
    for (auto& v : validate_shape(cfg.target)) bad.push_back(v);
    if (!(cfg.tol.kkt_tol > 0.0)) bad.push_back("kkt_tol must be > 0");
    if (!(cfg.tol.value_gap_tol > 0.0)) bad.push_back("value_gap_tol must be > 0");
    if (!(cfg.tol.fd_step > 0.0)) bad.push_back("fd_step must be > 0");
    return bad;
}

inline void validate_state(const GameState& state, const GameConfig& cfg) {
    if (static_cast<int>(state.attackers.size()) != cfg.m)
        throw std::invalid_argument("state must hold exactly m attacker positions");
    for (const auto& a : state.attackers) require_dim(a, cfg.n, "attacker position");
    require_dim(state.defender, cfg.n, "defender position");
    if (state.phase < 0 || state.phase >= cfg.m)
        throw std::invalid_argument("phase out of range");
}

// Weighted proximity sum over the uncaptured attackers' capture points.
// `points` lists all m capture points; entries before `phase` are ignored.
inline double objective_f(const std::vector<Vec>& points, const GameConfig& cfg, int phase) {
    if (static_cast<int>(points.size()) != cfg.m)
        throw std::invalid_argument("objective_f: need m capture points");
    double sum = 0.0;
    for (int j = phase; j < cfg.m; ++j) sum += cfg.weights[j] * h_value(cfg.target, points[j]);
    return sum;
}

inline double constraint_g(int j, const std::vector<Vec>& points, const GameState& state,
                           const GameConfig& cfg, int phase) {
    if (j < phase || j >= cfg.m) throw std::out_of_range("constraint_g: index out of range");
    if (static_cast<int>(points.size()) != cfg.m)
        throw std::invalid_argument("constraint_g: need m capture points");
    double travel = 0.0;
    for (int k = phase; k <= j; ++k) {
        const Vec& prev = (k == phase) ? state.defender : points[k - 1];
        travel += (points[k] - prev).norm();
    }
    return (points[j] - state.attackers[j]).norm() / cfg.speeds[j] - travel;
}

struct ConstraintGradients {
    std::vector<Vec> wrt_points;     // m entries; zero outside [phase, j]
    std::vector<Vec> wrt_attackers;  // m entries; zero except index j
    Vec wrt_defender;
};

// Exact analytic gradients of g_j. Requires every involved norm kernel to be
// nonzero; coincident points make the gradient undefined.
inline ConstraintGradients constraint_gradients(int j, const std::vector<Vec>& points,
                                                const GameState& state, const GameConfig& cfg,
                                                int phase) {
    if (j < phase || j >= cfg.m) throw std::out_of_range("constraint_gradients: index out of range");
    if (static_cast<int>(points.size()) != cfg.m)
        throw std::invalid_argument("constraint_gradients: need m capture points");

    auto unit = [](const Vec& w, const char* what) -> Vec {
        const double norm = w.norm();
        if (norm < kKernelFloor) throw degenerate_error(std::string(what) + ": coincident points");
        return w / norm;
    };

    ConstraintGradients grads;
    grads.wrt_points.assign(cfg.m, Vec::Zero(cfg.n));
    grads.wrt_attackers.assign(cfg.m, Vec::Zero(cfg.n));
    grads.wrt_defender = Vec::Zero(cfg.n);

    const Vec u_own = unit(points[j] - state.attackers[j], "constraint_gradients: p_j - x_Aj");
    grads.wrt_points[j] += u_own / cfg.speeds[j];
    grads.wrt_attackers[j] = -u_own / cfg.speeds[j];

    for (int k = phase; k <= j; ++k) {
        const Vec& prev = (k == phase) ? state.defender : points[k - 1];
        const Vec u_seg = unit(points[k] - prev, "constraint_gradients: path segment");
        grads.wrt_points[k] -= u_seg;
        if (k == phase)
            grads.wrt_defender += u_seg;
        else
            grads.wrt_points[k - 1] += u_seg;
    }
    return grads;
}

}  // namespace guarding
