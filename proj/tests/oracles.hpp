#pragma once

// Independent verification paths used by the test suites. None of these touch
// the interior-point solver: the group-lasso oracle is Douglas-Rachford
// splitting with closed-form proximal maps, and the equality-constrained
// least-squares oracle is a direct KKT linear solve.

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "trisynth/conic_solver.hpp"
#include "trisynth/pattern_grid.hpp"
#include "test_rng.hpp"

namespace oracles {

/// Euclidean projection onto { x : ||D x - f||_2 <= alpha }. Requires the
/// constraint set to be nonempty (alpha above the least-squares residual).
Eigen::VectorXd project_residual_ball(const Eigen::MatrixXd& D, const Eigen::VectorXd& f,
                                      double alpha, const Eigen::VectorXd& x0);

struct GroupLassoInstance {
    Eigen::MatrixXd D;
    Eigen::VectorXd f;
    double alpha = 0.0;
    std::vector<std::pair<int, int>> groups;  // (start, size) partitions of x
    Eigen::VectorXd weights;                  // one per group

    int num_x() const { return static_cast<int>(D.cols()); }
};

/// min sum_g w_g ||x_g|| s.t. ||D x - f|| <= alpha, solved by
/// Douglas-Rachford splitting. Returns the objective at a feasible point.
struct DrResult {
    Eigen::VectorXd x;
    double objective = 0.0;
};
DrResult solve_group_lasso_dr(const GroupLassoInstance& inst, int iterations = 30000,
                              double prox_step = 1.0);

/// Strictly feasible random instance with 2..5 groups, n <= max_n.
GroupLassoInstance random_group_lasso(TestRng& rng, int max_n);

/// Conic encoding of the instance (epigraph variables appended after x).
trisynth::ConicProgram to_conic_program(const GroupLassoInstance& inst);

/// The lifted design subproblem as a group-lasso instance: slack columns
/// stripped, weights delta^2 (the per-group scaling enters both the objective
/// and the cone bound).
GroupLassoInstance design_as_group_lasso(const trisynth::LiftedSystem& lifted, double alpha,
                                         const Eigen::VectorXd& deltas);

/// min ||A x - b||^2 s.t. C x = d via the KKT normal system, solved with a
/// pivoted LU factorization.
Eigen::VectorXd equality_ls_kkt(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                const Eigen::MatrixXd& C, const Eigen::VectorXd& d);

}  // namespace oracles
