#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "trisynth/conic_solver.hpp"
#include "trisynth/pattern_grid.hpp"

namespace trisynth {

enum class EpsilonPolicy { Relative, Fixed };

/// Knobs of the reweighted iteration and of pruning.
struct GroupNormConfig {
    EpsilonPolicy epsilon_policy = EpsilonPolicy::Relative;
    // Fixed: epsilon itself. Relative: fraction of the largest group norm
    // after the first iteration.
    double epsilon_value = 1e-3;
    double prune_threshold = 1e-3;  // relative to the largest group norm
    int stop_patience = 3;
    int max_reweight_iters = 20;
};

struct ReweightIteration {
    int k = 0;
    Eigen::VectorXd delta;  // per-group weights used in iteration k (ones for k=1)
    int active_count = 0;
    double residual = 0.0;
    double objective = 0.0;
};

struct ReweightTrace {
    std::vector<ReweightIteration> iterations;
};

enum class DesignStatus { Success, Infeasible, IterationLimit };

const char* to_string(DesignStatus status);

struct DesignResult {
    DesignStatus status = DesignStatus::IterationLimit;
    WeightVector weights;                 // full grid, pruned groups zeroed exactly
    std::vector<int> active_indices;      // grid indices with nonzero groups
    std::vector<double> active_positions; // wavelengths, strictly increasing
    double residual = 0.0;                // || p_r - S w^H ||_2, complex domain
    double objective = 0.0;
    std::optional<ReweightTrace> trace;
    int solver_iterations = 0;
};

/// Group-sparse design: min sum_m t_m subject to the lifted residual cone
/// || p_hat - S_hat w_hat ||_2 <= alpha and per-group cones ||w_m||_2 <= t_m.
DesignResult design_group_sparse(const DesignSpec& spec, const SolverOptions& opts = {},
                                 double prune_threshold = 1e-3);

/// Iteratively reweighted design. Iteration 1 is the plain group-sparse
/// problem; iteration k >= 2 applies delta_m = 1 / (||w_m^{k-1}|| + eps) both
/// in the objective and in the per-group cone (delta_m ||w_m|| <= t_m). Stops
/// once the active count is unchanged for stop_patience consecutive
/// iterations, or at max_reweight_iters.
DesignResult design_reweighted(const DesignSpec& spec, const GroupNormConfig& cfg = {},
                               const SolverOptions& opts = {});

/// Keeps group m iff ||w_m|| > tau * max_m ||w_m||; pruned groups are zeroed
/// exactly, kept groups are untouched. Returns kept indices and the pruned
/// weights.
std::pair<std::vector<int>, WeightVector> extract_active_tripoles(const WeightVector& w,
                                                                  double tau);

/// Least-squares ULA baseline on a lambda/2-style uniform grid spanning the
/// aperture: min || p_hat - S_hat w_hat ||_2 subject to a unit (distortionless)
/// response at the mainlobe. No pruning; every tripole stays active.
DesignResult design_ula_reference(double aperture_wl, double spacing_wl,
                                  const DesignSpec& spec_core,
                                  const SolverOptions& opts = {});

/// Conic encoding of one (possibly reweighted) group-sparse subproblem,
/// exposed so tests can replay the exact program through independent solvers.
ConicProgram encode_group_sparse_program(const LiftedSystem& lifted, double alpha,
                                         const Eigen::VectorXd& deltas);

/// Residual in the complex domain for given weights and sampled system.
double complex_residual(const Eigen::VectorXcd& p_r, const Eigen::MatrixXcd& S,
                        const WeightVector& w);

}  // namespace trisynth
