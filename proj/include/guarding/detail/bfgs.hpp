#pragma once

// Dense BFGS with a strong-Wolfe line search. Problems here are tiny
// (dimension m*n, at most a few dozen), so the full inverse-Hessian update
// is cheaper than anything limited-memory.

#include <cmath>
#include <functional>
#include <limits>

#include "guarding/types.hpp"

namespace guarding::detail {

struct BfgsOptions {
    int max_iters = 500;
    double grad_tol = 1e-10;   // stop when ||grad||_inf <= grad_tol
    double step_tol = 1e-16;   // stop when the step stalls
};

struct BfgsResult {
    Vec x;
    double f = 0.0;
    Vec grad;
    int iters = 0;
    bool converged = false;
};

// Objective callback: f = fg(x, grad_out).
using FuncGrad = std::function<double(const Vec&, Vec&)>;

namespace internal {

struct LinePoint {
    double alpha, f, dg;
};

inline double cubic_min(const LinePoint& a, const LinePoint& b) {
    // Minimizer of the cubic interpolant; falls back to bisection.
    const double d1 = a.dg + b.dg - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
    const double disc = d1 * d1 - a.dg * b.dg;
    if (disc < 0.0) return 0.5 * (a.alpha + b.alpha);
    const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
    double t = b.alpha - (b.alpha - a.alpha) * (b.dg + d2 - d1) / (b.dg - a.dg + 2.0 * d2);
    const double lo = std::min(a.alpha, b.alpha), hi = std::max(a.alpha, b.alpha);
    if (!(t > lo && t < hi)) t = 0.5 * (a.alpha + b.alpha);
    // Keep away from the bracket ends.
    const double margin = 0.1 * (hi - lo);
    return std::min(std::max(t, lo + margin), hi - margin);
}

}  // namespace internal

// Strong Wolfe line search (c1 = 1e-4, c2 = 0.9). Returns the accepted step
// or 0 on failure.
inline double wolfe_line_search(const FuncGrad& fg, const Vec& x, const Vec& dir, double f0,
                                double dg0, Vec& x_out, double& f_out, Vec& g_out,
                                double alpha_init = 1.0) {
    constexpr double c1 = 1e-4, c2 = 0.9;
    constexpr int max_evals = 40;
    internal::LinePoint lo{0.0, f0, dg0};
    double alpha = alpha_init;
    double alpha_prev = 0.0, f_prev = f0, dg_prev = dg0;
    Vec g(x.size());

    auto eval = [&](double a, double& f, double& dg) {
        x_out = x + a * dir;
        f = fg(x_out, g);
        dg = g.dot(dir);
    };

    internal::LinePoint hi{0.0, 0.0, 0.0};
    bool bracketed = false;
    int evals = 0;
    double f_a = 0.0, dg_a = 0.0;

    for (; evals < max_evals && !bracketed; ++evals) {
        eval(alpha, f_a, dg_a);
        if (f_a > f0 + c1 * alpha * dg0 || (evals > 0 && f_a >= f_prev)) {
            lo = {alpha_prev, f_prev, dg_prev};
            hi = {alpha, f_a, dg_a};
            bracketed = true;
            break;
        }
        if (std::abs(dg_a) <= -c2 * dg0) {
            f_out = f_a;
            g_out = g;
            return alpha;
        }
        if (dg_a >= 0.0) {
            lo = {alpha, f_a, dg_a};
            hi = {alpha_prev, f_prev, dg_prev};
            bracketed = true;
            break;
        }
        alpha_prev = alpha;
        f_prev = f_a;
        dg_prev = dg_a;
        alpha *= 2.5;
    }
    if (!bracketed) {
        // Ran out of expansion budget; accept the last sufficient-decrease point.
        if (f_a <= f0 + c1 * alpha * dg0) {
            f_out = f_a;
            g_out = g;
            return alpha;
        }
        return 0.0;
    }

    for (; evals < max_evals; ++evals) {
        const double a = internal::cubic_min(lo, hi);
        eval(a, f_a, dg_a);
        if (f_a > f0 + c1 * a * dg0 || f_a >= lo.f) {
            hi = {a, f_a, dg_a};
        } else {
            if (std::abs(dg_a) <= -c2 * dg0) {
                f_out = f_a;
                g_out = g;
                return a;
            }
            if (dg_a * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
            lo = {a, f_a, dg_a};
        }
        if (std::abs(hi.alpha - lo.alpha) < 1e-14 * std::max(1.0, lo.alpha)) break;
    }
    // Zoom exhausted; take the best point seen if it decreases f.
    if (lo.alpha > 0.0 && lo.f < f0) {
        eval(lo.alpha, f_out, dg_a);
        g_out = g;
        return lo.alpha;
    }
    return 0.0;
}

inline BfgsResult bfgs_minimize(const FuncGrad& fg, Vec x0, const BfgsOptions& opt = {}) {
    const Eigen::Index d = x0.size();
    BfgsResult res;
    res.x = std::move(x0);
    res.grad.resize(d);
    res.f = fg(res.x, res.grad);

    Mat H = Mat::Identity(d, d);
    bool h_scaled = false;
    Vec x_new(d), g_new(d);

    for (res.iters = 0; res.iters < opt.max_iters; ++res.iters) {
        if (res.grad.lpNorm<Eigen::Infinity>() <= opt.grad_tol) {
            res.converged = true;
            return res;
        }
        Vec dir = -(H * res.grad);
        double dg0 = dir.dot(res.grad);
        if (dg0 >= 0.0) {  // not a descent direction; reset curvature
            H.setIdentity();
            dir = -res.grad;
            dg0 = -res.grad.squaredNorm();
        }
        double f_new = 0.0;
        const double alpha0 = (res.iters == 0) ? std::min(1.0, 1.0 / std::max(1.0, res.grad.norm())) : 1.0;
        const double alpha = wolfe_line_search(fg, res.x, dir, res.f, dg0, x_new, f_new, g_new, alpha0);
        if (alpha <= 0.0) return res;  // line search failed; stationary enough or stuck

        const Vec s = x_new - res.x;
        const Vec y = g_new - res.grad;
        res.x = x_new;
        res.f = f_new;
        res.grad = g_new;
        if (s.lpNorm<Eigen::Infinity>() < opt.step_tol) {
            res.converged = res.grad.lpNorm<Eigen::Infinity>() <= opt.grad_tol;
            return res;
        }
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (!h_scaled) {
                H *= sy / y.squaredNorm();
                h_scaled = true;
            }
            const double rho = 1.0 / sy;
            const Vec Hy = H * y;
            // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
            H.noalias() -= rho * (Hy * s.transpose() + s * Hy.transpose());
            H.noalias() += (rho * rho * y.dot(Hy) + rho) * (s * s.transpose());
        }
    }
    res.converged = res.grad.lpNorm<Eigen::Infinity>() <= opt.grad_tol;
    return res;
}

}  // namespace guarding::detail
