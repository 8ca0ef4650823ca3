#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace guarding {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Norm kernels below this are treated as degenerate: gradients of the
// reachability constraints are undefined there.
inline constexpr double kKernelFloor = 1e-12;

// Thrown when a gradient kernel ||a-b|| vanishes (coincident points).
struct degenerate_error : std::runtime_error {
    explicit degenerate_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when no feasible capture plan can be produced.
struct infeasible_error : std::runtime_error {
    explicit infeasible_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when an operation requires a certified plan and the plan is not.
struct uncertified_error : std::runtime_error {
    explicit uncertified_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when an operation requires a unique optimal plan and the solve
// reported near-ties.
struct ambiguous_error : std::runtime_error {
    explicit ambiguous_error(const std::string& what) : std::runtime_error(what) {}
};

inline void require_dim(const Vec& x, Eigen::Index n, const char* what) {
    if (x.size() != n)
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (got " +
                                    std::to_string(x.size()) + ", want " + std::to_string(n) + ")");
}

}  // namespace guarding
