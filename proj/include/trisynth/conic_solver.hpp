#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

namespace trisynth {

/// One second-order cone constraint  ||A x + b||_2 <= bound(x)  where the
/// bound is either a constant or an affine form g.x + h. A applies to the
/// contiguous variable window starting at col_offset, which keeps
/// block-structured constraints (per-group norms) cheap to state. A may have
/// zero rows; the constraint then degenerates to the linear inequality
/// bound(x) >= 0.
struct SocConstraint {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    int col_offset = 0;

    bool affine_bound = false;
    Eigen::VectorXd g;  // used when affine_bound
    double h = 0.0;     // affine offset, or the constant bound itself

    static SocConstraint with_constant_bound(Eigen::MatrixXd A, Eigen::VectorXd b,
                                             double bound, int col_offset = 0);
    static SocConstraint with_affine_bound(Eigen::MatrixXd A, Eigen::VectorXd b,
                                           Eigen::VectorXd g, double h,
                                           int col_offset = 0);
};

struct EqualityConstraint {
    Eigen::VectorXd row;
    double value = 0.0;
};

struct ConicProgram {
    int num_vars = 0;
    Eigen::VectorXd objective;
    std::vector<SocConstraint> cones;
    std::vector<EqualityConstraint> equalities;
};

enum class SolveStatus { Optimal, Infeasible, MaxIterations, Unbounded };

const char* to_string(SolveStatus status);

struct KktResiduals {
    double primal_feas = 0.0;  // worst absolute constraint violation
    double dual_feas = 0.0;    // stationarity (relative) and dual cone violation
    double duality_gap = 0.0;  // |primal - dual| / max(1, |primal|)
};

struct ConicSolution {
    Eigen::VectorXd x;
    double objective_value = 0.0;
    SolveStatus status = SolveStatus::MaxIterations;
    KktResiduals kkt_residuals;
    int iterations = 0;

    // Dual variables, exposed so certificates can be re-derived from scratch.
    Eigen::VectorXd eq_duals;                  // one per equality
    std::vector<Eigen::VectorXd> cone_duals;   // per cone, dim = A.rows() + 1
};

struct SolverOptions {
    double feas_tol = 1e-7;
    double gap_tol = 1e-6;
    int max_iters = 10000;
};

/// Deterministic primal-dual interior-point solve. Identical inputs produce
/// bit-identical solutions; a single solve is internally single-threaded.
ConicSolution solve(const ConicProgram& prog, const SolverOptions& opts = {});

/// Recomputes the optimality certificate directly from the program data and
/// the solution's primal/dual variables, independent of solver internals.
KktResiduals check_kkt(const ConicProgram& prog, const ConicSolution& sol);

/// Plain-text dump of a program for offline inspection.
void dump_program(const ConicProgram& prog, std::ostream& os);

}  // namespace trisynth
