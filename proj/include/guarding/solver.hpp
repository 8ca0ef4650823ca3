#pragma once

// Capture-point solver. The joint problem over p_phase..p_m,
//
//   minimize   sum_j theta_j h(p_j)
//   subject to g_j(p, x) <= 0          (time-extended reachability)
//
// is a difference-of-convex program for two or more attackers. Local solves
// run the convex-concave procedure: each round replaces the concave path
// terms -||p_k - p_{k-1}|| with their affine majorants at the current
// iterate and solves the resulting convex program with an augmented
// Lagrangian / BFGS loop. The first reachability constraint is kept exact
// through its convex quadratic form (the Apollonius ball). Converged
// iterates are polished by Newton's method on the active-set KKT system
// with exact norms, which is what drives residuals to ~1e-12.
// Globalization is multistart with deduplication of stationary points.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "guarding/detail/bfgs.hpp"
#include "guarding/game_model.hpp"
#include "guarding/random.hpp"

namespace guarding {

struct Certificates {
    bool licq = false;
    bool scs = false;
    bool sosc = false;
    double sosc_min_eig = std::numeric_limits<double>::quiet_NaN();
};

struct CapturePlan {
    int phase = 0;
    std::vector<Vec> points;          // p_phase .. p_{m-1}
    std::vector<double> multipliers;  // lambda_phase .. lambda_{m-1}
    double value = 0.0;
    double kkt_residual = std::numeric_limits<double>::infinity();
    std::vector<int> active_set;      // absolute attacker indices with g_j ~ 0
    Certificates certificates;
};

struct SolveReport {
    CapturePlan best;
    std::vector<CapturePlan> stationary_points;  // deduplicated, value-sorted
    bool ambiguous = false;
    bool in_capturable_set = false;
};

struct SolverOptions {
    double dedup_radius = 1e-4;  // max-norm over point stacks
    double scs_tol = 1e-8;
    double sosc_tol = 1e-8;
    double licq_tol = 1e-8;      // smallest singular value threshold
    double smooth_delta = 1e-9;  // norm smoothing inside iterations
    int ccp_max_iters = 200;
    double ccp_value_tol = 1e-12;
    int default_starts = 32;
};

struct CcpTrace {
    std::vector<double> values;  // objective after each CCP round
    bool polished = false;
};

namespace detail {

inline double snorm(const Vec& w, double d) { return std::sqrt(w.squaredNorm() + d * d); }

// Stacked view of the phase-i problem: decision vector z holds the alive
// capture points back to back. Alive index k corresponds to attacker
// phase + k; the path predecessor of block 0 is the defender.
struct Stacked {
    const GameConfig& cfg;
    const GameState& state;
    int phase;
    int a;    // alive count
    int n;
    int dim;  // a * n
    double delta;

    Stacked(const GameConfig& c, const GameState& s, int ph, double sm)
        : cfg(c), state(s), phase(ph), a(c.m - ph), n(c.n), dim((c.m - ph) * c.n), delta(sm) {}

    double nu(int k) const { return cfg.speeds[phase + k]; }
    double theta(int k) const { return cfg.weights[phase + k]; }
    const Vec& attacker(int k) const { return state.attackers[phase + k]; }

    auto block(const Vec& z, int k) const { return z.segment(k * n, n); }
    Vec prev(const Vec& z, int k) const {
        return k == 0 ? state.defender : Vec(z.segment((k - 1) * n, n));
    }
    Vec seg(const Vec& z, int k) const { return block(z, k) - prev(z, k); }

    Vec stack(const std::vector<Vec>& points) const {
        Vec z(dim);
        for (int k = 0; k < a; ++k) z.segment(k * n, n) = points[k];
        return z;
    }
    std::vector<Vec> unstack(const Vec& z) const {
        std::vector<Vec> pts(a);
        for (int k = 0; k < a; ++k) pts[k] = z.segment(k * n, n);
        return pts;
    }

    double f(const Vec& z) const {
        double s = 0.0;
        for (int k = 0; k < a; ++k) s += theta(k) * h_value(cfg.target, block(z, k));
        return s;
    }
    Vec grad_f(const Vec& z) const {
        Vec g(dim);
        for (int k = 0; k < a; ++k)
            g.segment(k * n, n) = theta(k) * h_gradient(cfg.target, block(z, k));
        return g;
    }
    Mat hess_f(const Vec& z) const {
        Mat H = Mat::Zero(dim, dim);
        for (int k = 0; k < a; ++k)
            H.block(k * n, k * n, n, n) = theta(k) * h_hessian(cfg.target, block(z, k));
        return H;
    }

    double g_exact(const Vec& z, int k) const {
        double travel = 0.0;
        for (int l = 0; l <= k; ++l) travel += seg(z, l).norm();
        return (block(z, k) - attacker(k)).norm() / nu(k) - travel;
    }
    double g_smooth(const Vec& z, int k) const {
        double travel = 0.0;
        for (int l = 0; l <= k; ++l) travel += snorm(seg(z, l), delta);
        return snorm(block(z, k) - attacker(k), delta) / nu(k) - travel;
    }
    Vec grad_g_smooth(const Vec& z, int k) const {
        Vec g = Vec::Zero(dim);
        const Vec own = block(z, k) - attacker(k);
        g.segment(k * n, n) += own / (snorm(own, delta) * nu(k));
        for (int l = 0; l <= k; ++l) {
            const Vec sg = seg(z, l);
            const Vec u = sg / snorm(sg, delta);
            g.segment(l * n, n) -= u;
            if (l > 0) g.segment((l - 1) * n, n) += u;
        }
        return g;
    }
    Vec grad_g_exact(const Vec& z, int k) const {
        Vec g = Vec::Zero(dim);
        const Vec own = block(z, k) - attacker(k);
        const double own_norm = own.norm();
        if (own_norm < kKernelFloor) throw degenerate_error("g gradient: p_j = x_Aj");
        g.segment(k * n, n) += own / (own_norm * nu(k));
        for (int l = 0; l <= k; ++l) {
            const Vec sg = seg(z, l);
            const double sn = sg.norm();
            if (sn < kKernelFloor) throw degenerate_error("g gradient: coincident path points");
            const Vec u = sg / sn;
            g.segment(l * n, n) -= u;
            if (l > 0) g.segment((l - 1) * n, n) += u;
        }
        return g;
    }
    Mat hess_g_exact(const Vec& z, int k) const {
        Mat H = Mat::Zero(dim, dim);
        auto norm_hess = [this](const Vec& w) -> Mat {
            const double nw = w.norm();
            if (nw < kKernelFloor) throw degenerate_error("g hessian: zero kernel");
            const Vec u = w / nw;
            return (Mat::Identity(n, n) - u * u.transpose()) / nw;
        };
        const Vec own = block(z, k) - attacker(k);
        H.block(k * n, k * n, n, n) += norm_hess(own) / nu(k);
        for (int l = 0; l <= k; ++l) {
            const Mat Hs = norm_hess(seg(z, l));
            H.block(l * n, l * n, n, n) -= Hs;
            if (l > 0) {
                H.block((l - 1) * n, (l - 1) * n, n, n) -= Hs;
                H.block(l * n, (l - 1) * n, n, n) += Hs;
                H.block((l - 1) * n, l * n, n, n) += Hs;
            }
        }
        return H;
    }

    double max_violation_exact(const Vec& z) const {
        double v = 0.0;
        for (int k = 0; k < a; ++k) v = std::max(v, g_exact(z, k));
        return v;
    }
};

// Convexified subproblem at a reference iterate. Constraint 0 is the exact
// Apollonius-ball quadratic; constraints k >= 1 keep their convex own-norm
// term and replace every path term by its affine majorant at the reference.
struct CcpSubproblem {
    const Stacked& P;
    Vec z_ref;
    std::vector<double> seg_len;  // smoothed segment lengths at reference
    std::vector<Vec> seg_unit;    // gradients of smoothed segment norms

    CcpSubproblem(const Stacked& prob, Vec ref) : P(prob), z_ref(std::move(ref)) {
        seg_len.resize(P.a);
        seg_unit.resize(P.a);
        for (int l = 0; l < P.a; ++l) {
            const Vec s = P.seg(z_ref, l);
            seg_len[l] = snorm(s, P.delta);
            seg_unit[l] = s / seg_len[l];
        }
    }

    double c(const Vec& z, int k) const {
        if (k == 0) {
            const Vec own = P.block(z, 0) - P.attacker(0);
            const Vec tod = P.block(z, 0) - P.state.defender;
            const double nu0 = P.nu(0);
            return own.squaredNorm() - nu0 * nu0 * tod.squaredNorm();
        }
        double major = 0.0;
        for (int l = 0; l <= k; ++l)
            major += seg_len[l] + seg_unit[l].dot(P.seg(z, l) - P.seg(z_ref, l));
        return snorm(P.block(z, k) - P.attacker(k), P.delta) / P.nu(k) - major;
    }

    Vec grad_c(const Vec& z, int k) const {
        Vec g = Vec::Zero(P.dim);
        const int n = P.n;
        if (k == 0) {
            const Vec own = P.block(z, 0) - P.attacker(0);
            const Vec tod = P.block(z, 0) - P.state.defender;
            g.segment(0, n) = 2.0 * own - 2.0 * P.nu(0) * P.nu(0) * tod;
            return g;
        }
        const Vec own = P.block(z, k) - P.attacker(k);
        g.segment(k * n, n) += own / (snorm(own, P.delta) * P.nu(k));
        for (int l = 0; l <= k; ++l) {
            g.segment(l * n, n) -= seg_unit[l];
            if (l > 0) g.segment((l - 1) * n, n) += seg_unit[l];
        }
        return g;
    }
};

struct AlState {
    Vec z;
    std::vector<double> mu;  // one multiplier per constraint
    double viol = std::numeric_limits<double>::infinity();
    bool ok = false;
};

// PHR augmented Lagrangian over the convex subproblem.
inline AlState augmented_lagrangian(const CcpSubproblem& sub, Vec z0, std::vector<double> mu0,
                                    double stat_tol) {
    const int nc = sub.P.a;
    AlState st;
    st.z = std::move(z0);
    st.mu = std::move(mu0);
    if (static_cast<int>(st.mu.size()) != nc) st.mu.assign(nc, 0.0);

    double rho = 10.0;
    std::vector<double> cvals(nc);
    Vec grad(sub.P.dim);

    for (int outer = 0; outer < 40; ++outer) {
        auto fg = [&](const Vec& z, Vec& g) -> double {
            double val = sub.P.f(z);
            g = sub.P.grad_f(z);
            for (int k = 0; k < nc; ++k) {
                const double ck = sub.c(z, k);
                const double t = st.mu[k] + rho * ck;
                if (t > 0.0) {
                    val += (t * t - st.mu[k] * st.mu[k]) / (2.0 * rho);
                    g += t * sub.grad_c(z, k);
                } else {
                    val -= st.mu[k] * st.mu[k] / (2.0 * rho);
                }
            }
            return val;
        };
        BfgsOptions bo;
        bo.grad_tol = std::max(stat_tol, 1e-11);
        bo.max_iters = 600;
        auto r = bfgs_minimize(fg, st.z, bo);
        st.z = r.x;

        double viol = 0.0, comp = 0.0;
        for (int k = 0; k < nc; ++k) {
            cvals[k] = sub.c(st.z, k);
            viol = std::max(viol, cvals[k]);
            st.mu[k] = std::max(0.0, st.mu[k] + rho * cvals[k]);
            comp = std::max(comp, std::abs(st.mu[k] * cvals[k]));
        }
        // Stationarity of the plain Lagrangian at the updated multipliers.
        grad = sub.P.grad_f(st.z);
        for (int k = 0; k < nc; ++k)
            if (st.mu[k] > 0.0) grad += st.mu[k] * sub.grad_c(st.z, k);
        const double stat = grad.lpNorm<Eigen::Infinity>();

        if (viol <= 1e-11 && stat <= stat_tol && comp <= 1e-10) {
            st.ok = true;
            st.viol = viol;
            return st;
        }
        if (viol > 0.25 * st.viol) rho = std::min(rho * 8.0, 1e12);
        st.viol = std::min(st.viol, viol);
    }
    st.ok = st.viol < 1e-8;
    return st;
}

// Drives the smoothed constraint violations to zero from an arbitrary start.
inline bool penalty_presolve(const Stacked& P, Vec& z) {
    auto fg = [&](const Vec& x, Vec& g) -> double {
        double val = 0.0;
        g.setZero(P.dim);
        for (int k = 0; k < P.a; ++k) {
            const double gk = P.g_smooth(x, k);
            if (gk > 0.0) {
                val += gk * gk;
                g += 2.0 * gk * P.grad_g_smooth(x, k);
            }
        }
        return val;
    };
    Vec g0(P.dim);
    if (fg(z, g0) <= 1e-16) return true;
    BfgsOptions bo;
    bo.grad_tol = 1e-12;
    bo.max_iters = 400;
    auto r = bfgs_minimize(fg, z, bo);
    z = r.x;
    return P.max_violation_exact(z) <= 1e-6;
}

struct PolishOutcome {
    Vec z;
    std::vector<double> lambda;  // per alive constraint, zero when inactive
    bool ok = false;
};

// Newton iteration on the active-set KKT system with exact norms.
inline PolishOutcome newton_polish(const Stacked& P, Vec z, std::vector<double> lam,
                                   std::vector<int> active) {
    PolishOutcome out;
    out.z = z;
    out.lambda.assign(P.a, 0.0);

    for (int round = 0; round < 4; ++round) {
        const int na = static_cast<int>(active.size());
        const int total = P.dim + na;
        Vec lam_a(na);
        for (int i = 0; i < na; ++i)
            lam_a[i] = std::max(0.0, active[i] < static_cast<int>(lam.size()) ? lam[active[i]] : 0.0);

        Vec zz = z;
        bool failed = false;
        double res_norm = std::numeric_limits<double>::infinity();
        try {
            for (int it = 0; it < 60; ++it) {
                Vec R(total);
                Vec gf = P.grad_f(zz);
                Mat G(na, P.dim);
                for (int i = 0; i < na; ++i) {
                    G.row(i) = P.grad_g_exact(zz, active[i]).transpose();
                    R[P.dim + i] = P.g_exact(zz, active[i]);
                }
                R.head(P.dim) = gf + G.transpose() * lam_a;
                res_norm = R.lpNorm<Eigen::Infinity>();
                if (res_norm <= 1e-13) break;

                Mat H = P.hess_f(zz);
                for (int i = 0; i < na; ++i) H += lam_a[i] * P.hess_g_exact(zz, active[i]);
                Mat J = Mat::Zero(total, total);
                J.topLeftCorner(P.dim, P.dim) = H;
                J.topRightCorner(P.dim, na) = G.transpose();
                J.bottomLeftCorner(na, P.dim) = G;
                Eigen::FullPivLU<Mat> lu(J);
                if (!lu.isInvertible()) {
                    failed = true;
                    break;
                }
                const Vec step = lu.solve(-R);
                // Damped update: insist on residual decrease.
                double t = 1.0;
                bool accepted = false;
                for (int half = 0; half < 25; ++half) {
                    const Vec z_try = zz + t * step.head(P.dim);
                    const Vec l_try = lam_a + t * step.tail(na);
                    try {
                        Vec R_try(total);
                        Vec gf_t = P.grad_f(z_try);
                        Mat G_t(na, P.dim);
                        for (int i = 0; i < na; ++i) {
                            G_t.row(i) = P.grad_g_exact(z_try, active[i]).transpose();
                            R_try[P.dim + i] = P.g_exact(z_try, active[i]);
                        }
                        R_try.head(P.dim) = gf_t + G_t.transpose() * l_try;
                        if (R_try.lpNorm<Eigen::Infinity>() < res_norm * (1.0 - 1e-4 * t) ||
                            R_try.lpNorm<Eigen::Infinity>() < 1e-13) {
                            zz = z_try;
                            lam_a = l_try;
                            accepted = true;
                            break;
                        }
                    } catch (const degenerate_error&) {
                        // step left the regular region; shrink
                    }
                    t *= 0.5;
                }
                if (!accepted) {
                    failed = res_norm > 1e-11;
                    break;
                }
            }
        } catch (const degenerate_error&) {
            failed = true;
        }
        if (failed) return out;

        // Multiplier signs: drop the most negative active constraint and retry.
        int worst = -1;
        double worst_val = -1e-10;
        for (int i = 0; i < na; ++i)
            if (lam_a[i] < worst_val) {
                worst_val = lam_a[i];
                worst = i;
            }
        if (worst >= 0) {
            active.erase(active.begin() + worst);
            lam.assign(P.a, 0.0);
            continue;
        }
        // Inactive constraints must stay feasible.
        bool violated = false;
        for (int k = 0; k < P.a && !violated; ++k) {
            if (std::find(active.begin(), active.end(), k) != active.end()) continue;
            if (P.g_exact(zz, k) > 1e-9) {
                active.push_back(k);
                std::sort(active.begin(), active.end());
                lam.assign(P.a, 0.0);
                violated = true;
            }
        }
        if (violated) continue;

        if (res_norm <= 1e-11) {
            out.z = zz;
            out.lambda.assign(P.a, 0.0);
            for (int i = 0; i < static_cast<int>(active.size()); ++i)
                out.lambda[active[i]] = std::max(0.0, lam_a[i]);
            out.ok = true;
        }
        return out;
    }
    return out;
}

inline double kkt_residual_stacked(const Stacked& P, const Vec& z, const std::vector<double>& lam) {
    Vec grad = P.grad_f(z);
    double feas = 0.0, dual = 0.0, comp = 0.0;
    for (int k = 0; k < P.a; ++k) {
        const double gk = P.g_exact(z, k);
        feas = std::max(feas, std::max(gk, 0.0));
        dual = std::max(dual, std::max(-lam[k], 0.0));
        comp = std::max(comp, std::abs(lam[k] * gk));
        if (lam[k] != 0.0) grad += lam[k] * P.grad_g_exact(z, k);
    }
    return std::max({grad.lpNorm<Eigen::Infinity>(), feas, dual, comp});
}

inline std::vector<int> detect_active(const Stacked& P, const Vec& z, double tol = 1e-7) {
    std::vector<int> act;
    for (int k = 0; k < P.a; ++k)
        if (P.g_exact(z, k) >= -tol) act.push_back(k);
    return act;
}

}  // namespace detail

// --------------------------------------------------------------------------
// Public solver surface
// --------------------------------------------------------------------------

// Single-attacker safe-reachable region: the set ||p - x_A|| / nu <= ||p - x_D||
// is the ball below (complete the square in the squared inequality).
inline Ball apollonius_ball(int i, const GameState& state, const GameConfig& cfg) {
    if (i < 0 || i >= cfg.m) throw std::out_of_range("apollonius_ball: attacker index");
    const Vec& xa = state.attackers[i];
    const Vec& xd = state.defender;
    const double dist = (xa - xd).norm();
    if (dist < cfg.capture_radius)
        throw degenerate_error("apollonius_ball: attacker and defender coincide");
    const double nu = cfg.speeds[i];
    const double s = 1.0 - nu * nu;
    return Ball{(xa - nu * nu * xd) / s, nu * dist / s};
}

inline double kkt_residual(const CapturePlan& plan, const GameState& state, const GameConfig& cfg) {
    detail::Stacked P(cfg, state, plan.phase, 1e-9);
    return detail::kkt_residual_stacked(P, P.stack(plan.points), plan.multipliers);
}

inline Certificates certify(const CapturePlan& plan, const GameState& state, const GameConfig& cfg,
                            const SolverOptions& opt = {}) {
    detail::Stacked P(cfg, state, plan.phase, opt.smooth_delta);
    const Vec z = P.stack(plan.points);
    Certificates cert;

    std::vector<int> active;
    for (int k = 0; k < P.a; ++k)
        if (std::abs(P.g_exact(z, k)) <= std::max(100.0 * cfg.tol.kkt_tol, 1e-7)) active.push_back(k);

    const int na = static_cast<int>(active.size());
    Mat G(na, P.dim);
    for (int i = 0; i < na; ++i) G.row(i) = P.grad_g_exact(z, active[i]).transpose();

    Mat Z;  // null-space basis of the active Jacobian
    if (na == 0) {
        cert.licq = true;
        cert.scs = true;
        Z = Mat::Identity(P.dim, P.dim);
    } else {
        Eigen::JacobiSVD<Mat> svd(G, Eigen::ComputeFullV);
        cert.licq = svd.singularValues().minCoeff() > opt.licq_tol && na <= P.dim;
        cert.scs = true;
        for (int i = 0; i < na; ++i)
            if (!(plan.multipliers[active[i]] > opt.scs_tol)) cert.scs = false;
        int rank = 0;
        const double rank_tol = std::max(1e-12, svd.singularValues().maxCoeff() * 1e-12);
        for (int i = 0; i < svd.singularValues().size(); ++i)
            if (svd.singularValues()[i] > rank_tol) ++rank;
        Z = svd.matrixV().rightCols(P.dim - rank);
    }

    if (Z.cols() == 0) {
        cert.sosc = true;
        cert.sosc_min_eig = std::numeric_limits<double>::infinity();
        return cert;
    }
    Mat H = P.hess_f(z);
    for (int k = 0; k < P.a; ++k)
        if (plan.multipliers[k] != 0.0) H += plan.multipliers[k] * P.hess_g_exact(z, k);
    Eigen::SelfAdjointEigenSolver<Mat> eig(Z.transpose() * H * Z);
    cert.sosc_min_eig = eig.eigenvalues().minCoeff();
    cert.sosc = cert.sosc_min_eig > opt.sosc_tol;
    return cert;
}

// Local solve by the convex-concave procedure from a given start.
// `initial_points` lists the alive capture points p_phase..p_{m-1}.
inline CapturePlan ccp_solve(const GameState& state, const GameConfig& cfg, int phase,
                             const std::vector<Vec>& initial_points, CcpTrace* trace = nullptr,
                             const SolverOptions& opt = {}) {
    validate_state(state, cfg);
    if (phase < 0 || phase >= cfg.m) throw std::invalid_argument("ccp_solve: phase out of range");
    detail::Stacked P(cfg, state, phase, opt.smooth_delta);
    if (static_cast<int>(initial_points.size()) != P.a)
        throw std::invalid_argument("ccp_solve: need one start point per alive attacker");

    Vec z = P.stack(initial_points);
    if (P.max_violation_exact(z) > 1e-8 && !detail::penalty_presolve(P, z))
        throw infeasible_error("ccp_solve: no feasible start found");

    std::vector<double> mu(P.a, 0.0);
    double value = P.f(z);
    if (trace) trace->values.push_back(value);

    std::optional<detail::PolishOutcome> polished;
    for (int it = 0; it < opt.ccp_max_iters; ++it) {
        detail::CcpSubproblem sub(P, z);
        auto al = detail::augmented_lagrangian(sub, z, mu, 1e-10);
        z = al.z;
        mu = al.mu;
        const double v_new = P.f(z);
        if (trace) trace->values.push_back(v_new);
        const double decrease = value - v_new;
        value = v_new;
        if (decrease < opt.ccp_value_tol && it >= 1) break;
        // Once progress slows, try to land exactly on the KKT point.
        if (decrease < 1e-9 && it >= 1) {
            auto cand = detail::newton_polish(P, z, mu, detail::detect_active(P, z));
            if (cand.ok && P.f(cand.z) <= value + 1e-10 &&
                P.max_violation_exact(cand.z) <= cfg.tol.kkt_tol) {
                polished = cand;
                break;
            }
        }
    }

    if (!polished) {
        // Convert the ball-constraint multiplier to the scale of g_0 before
        // polishing; the quadratic form and g share the boundary normal.
        std::vector<double> lam = mu;
        try {
            detail::CcpSubproblem sub(P, z);
            const double q0 = std::abs(sub.c(z, 0));
            if (mu[0] > 0.0 && q0 < 1e-6) {
                const double gq = sub.grad_c(z, 0).norm();
                const double gg = P.grad_g_exact(z, 0).norm();
                if (gg > 0.0) lam[0] = mu[0] * gq / gg;
            }
        } catch (const degenerate_error&) {
        }
        auto cand = detail::newton_polish(P, z, lam, detail::detect_active(P, z));
        if (cand.ok && P.f(cand.z) <= value + 1e-9 &&
            P.max_violation_exact(cand.z) <= cfg.tol.kkt_tol) {
            polished = cand;
        }
    }

    CapturePlan plan;
    plan.phase = phase;
    if (polished) {
        if (trace) trace->polished = true;
        plan.points = P.unstack(polished->z);
        plan.multipliers = polished->lambda;
    } else {
        plan.points = P.unstack(z);
        plan.multipliers = mu;
        // mu[0] lives on the quadratic scale; convert as above.
        try {
            detail::CcpSubproblem sub(P, z);
            if (mu[0] > 0.0) {
                const double gg = P.grad_g_exact(z, 0).norm();
                if (gg > 0.0) plan.multipliers[0] = mu[0] * sub.grad_c(z, 0).norm() / gg;
            }
        } catch (const degenerate_error&) {
        }
    }
    const Vec zf = P.stack(plan.points);
    plan.value = P.f(zf);
    plan.kkt_residual = detail::kkt_residual_stacked(P, zf, plan.multipliers);
    for (int k : detail::detect_active(P, zf)) plan.active_set.push_back(phase + k);
    return plan;
}

// Single remaining attacker: the problem is convex (minimize h over the
// Apollonius ball), so one CCP start suffices.
inline CapturePlan solve_single(const GameState& state, const GameConfig& cfg,
                                const SolverOptions& opt = {}) {
    if (state.phase != cfg.m - 1)
        throw std::invalid_argument("solve_single: requires exactly one uncaptured attacker");
    const Vec& xa = state.attackers[cfg.m - 1];
    if ((xa - state.defender).norm() < cfg.capture_radius)
        throw degenerate_error("solve_single: safe-reachable region degenerates to a point");
    CapturePlan plan = ccp_solve(state, cfg, state.phase, {xa}, nullptr, opt);
    plan.certificates = certify(plan, state, cfg, opt);
    return plan;
}

namespace detail {

// Start sampling: first point uniform in the Apollonius ball of the phase
// attacker, later points uniform in balls around their attackers whose radii
// grow with the sampled defender path.
inline std::vector<Vec> sample_start(const Stacked& P, const GameConfig& cfg,
                                     const GameState& state, int phase, Rng& rng) {
    std::vector<Vec> pts(P.a);
    const Ball b0 = apollonius_ball(phase, state, cfg);
    pts[0] = rng.in_ball(b0.center, b0.radius);
    double path = (pts[0] - state.defender).norm();
    for (int k = 1; k < P.a; ++k) {
        pts[k] = rng.in_ball(P.attacker(k), P.nu(k) * path);
        path += (pts[k] - pts[k - 1]).norm();
    }
    return pts;
}

inline double plan_distance(const CapturePlan& a, const CapturePlan& b) {
    double d = 0.0;
    for (size_t k = 0; k < a.points.size(); ++k)
        d = std::max(d, (a.points[k] - b.points[k]).lpNorm<Eigen::Infinity>());
    return d;
}

inline bool plan_less(const CapturePlan& a, const CapturePlan& b) {
    if (std::abs(a.value - b.value) > 1e-12) return a.value < b.value;
    for (size_t k = 0; k < a.points.size(); ++k)
        for (Eigen::Index c = 0; c < a.points[k].size(); ++c) {
            if (a.points[k][c] < b.points[k][c]) return true;
            if (a.points[k][c] > b.points[k][c]) return false;
        }
    return false;
}

}  // namespace detail

// Multistart globalization. Start 0 is the always-feasible plan that parks
// every capture point on its attacker; the rest follow the sampling rule
// above. `warm` plans, when given, are injected ahead of everything else.
inline SolveReport multistart_solve(const GameState& state, const GameConfig& cfg, int phase,
                                    int n_starts, std::uint64_t seed,
                                    const std::vector<Vec>* warm = nullptr,
                                    const SolverOptions& opt = {}) {
    validate_state(state, cfg);
    if (n_starts < 1) throw std::invalid_argument("multistart_solve: n_starts must be >= 1");
    detail::Stacked P(cfg, state, phase, opt.smooth_delta);

    std::vector<std::vector<Vec>> starts;
    if (warm) starts.push_back(*warm);
    {
        std::vector<Vec> trivial(P.a);
        for (int k = 0; k < P.a; ++k) trivial[k] = P.attacker(k);
        starts.push_back(std::move(trivial));
    }
    for (int s = static_cast<int>(starts.size()); s < n_starts + (warm ? 1 : 0); ++s) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(s)));
        try {
            starts.push_back(detail::sample_start(P, cfg, state, phase, rng));
        } catch (const degenerate_error&) {
            break;  // phase attacker on top of the defender: keep what we have
        }
    }

    SolveReport report;
    std::string first_error;
    for (const auto& start : starts) {
        CapturePlan plan;
        try {
            plan = ccp_solve(state, cfg, phase, start, nullptr, opt);
        } catch (const std::exception& e) {
            if (first_error.empty()) first_error = e.what();
            continue;
        }
        bool merged = false;
        for (auto& existing : report.stationary_points) {
            if (detail::plan_distance(existing, plan) <= opt.dedup_radius) {
                if (detail::plan_less(plan, existing) || plan.kkt_residual < existing.kkt_residual)
                    existing = plan;
                merged = true;
                break;
            }
        }
        if (!merged) report.stationary_points.push_back(std::move(plan));
    }
    if (report.stationary_points.empty())
        throw infeasible_error("multistart_solve: every start failed: " + first_error);

    std::sort(report.stationary_points.begin(), report.stationary_points.end(), detail::plan_less);
    for (auto& plan : report.stationary_points) plan.certificates = certify(plan, state, cfg, opt);
    report.best = report.stationary_points.front();

    report.ambiguous = report.stationary_points.size() > 1 &&
                       report.stationary_points[1].value - report.best.value <= cfg.tol.value_gap_tol;
    report.in_capturable_set = true;
    for (const auto& plan : report.stationary_points) {
        if (plan.value - report.best.value > cfg.tol.value_gap_tol) break;
        for (const auto& p : plan.points)
            if (h_value(cfg.target, p) <= 0.0) report.in_capturable_set = false;
    }
    return report;
}

struct ValueGradient {
    int phase = 0;
    std::vector<Vec> attackers;  // m entries; zero for captured attackers
    Vec defender;
};

// Gradient of the optimal value in the game state, assembled from the
// optimal multipliers. Valid only at certified, unambiguous solves.
inline ValueGradient value_gradient(const SolveReport& report, const GameState& state,
                                    const GameConfig& cfg) {
    const CapturePlan& plan = report.best;
    if (!(plan.certificates.licq && plan.certificates.scs && plan.certificates.sosc))
        throw uncertified_error("value_gradient: plan is not certified (LICQ/SCS/SOSC)");
    if (report.ambiguous)
        throw ambiguous_error("value_gradient: multiple near-optimal plans; gradient undefined");

    ValueGradient grad;
    grad.phase = plan.phase;
    grad.attackers.assign(cfg.m, Vec::Zero(cfg.n));
    double lambda_sum = 0.0;
    for (int k = 0; k < static_cast<int>(plan.points.size()); ++k) {
        const int j = plan.phase + k;
        const Vec w = plan.points[k] - state.attackers[j];
        const double wn = w.norm();
        if (wn < kKernelFloor) throw degenerate_error("value_gradient: p_j = x_Aj");
        grad.attackers[j] = -(plan.multipliers[k] / cfg.speeds[j]) * (w / wn);
        lambda_sum += plan.multipliers[k];
    }
    const Vec wd = plan.points[0] - state.defender;
    const double wdn = wd.norm();
    if (wdn < kKernelFloor) throw degenerate_error("value_gradient: p_phase = x_D");
    grad.defender = lambda_sum * (wd / wdn);
    return grad;
}

// H(grad) = ||grad_xD|| - sum_i nu_i ||grad_xAi|| over alive attackers; zero
// along certified solves since it reduces to |sum lambda| - sum lambda.
inline double isaacs_residual(const ValueGradient& grad, const GameConfig& cfg) {
    double s = grad.defender.norm();
    for (int j = grad.phase; j < cfg.m; ++j) s -= cfg.speeds[j] * grad.attackers[j].norm();
    return s;
}

}  // namespace guarding
