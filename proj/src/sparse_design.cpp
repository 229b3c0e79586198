#include "trisynth/sparse_design.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace trisynth {

const char* to_string(DesignStatus status) {
    switch (status) {
        case DesignStatus::Success: return "success";
        case DesignStatus::Infeasible: return "infeasible";
        case DesignStatus::IterationLimit: return "iteration_limit";
    }
    return "unknown";
}

double complex_residual(const Eigen::VectorXcd& p_r, const Eigen::MatrixXcd& S,
                        const WeightVector& w) {
    return (p_r - S * w.flatten().conjugate()).norm();
}

ConicProgram encode_group_sparse_program(const LiftedSystem& lifted, double alpha,
                                         const Eigen::VectorXd& deltas) {
    const int n = static_cast<int>(lifted.S_hat.cols());
    const int M = n / kLiftedBlock;
    if (deltas.size() != M) {
        throw std::invalid_argument("encode_group_sparse_program: deltas length must equal M");
    }

    // The weighted subproblem min sum delta_m t_m s.t. delta_m ||w_m|| <= t_m
    // is encoded through the exact substitution t = delta * t_slack, which
    // keeps every cone at unit scale: min sum delta_m^2 t_slack_m subject to
    // ||w_m|| <= t_slack_m. Optimal weights and objective value are
    // unchanged; the conditioning is much better when delta spans decades.
    ConicProgram prog;
    prog.num_vars = n;
    prog.objective = Eigen::VectorXd::Zero(n);
    for (int m = 0; m < M; ++m) prog.objective[kLiftedBlock * m] = deltas[m] * deltas[m];

    prog.cones.push_back(
        SocConstraint::with_constant_bound(-lifted.S_hat, lifted.p_hat, alpha));
    for (int m = 0; m < M; ++m) {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
        g[kLiftedBlock * m] = 1.0;
        prog.cones.push_back(SocConstraint::with_affine_bound(
            Eigen::MatrixXd::Identity(6, 6), Eigen::VectorXd::Zero(6), std::move(g), 0.0,
            kLiftedBlock * m + 1));
    }
    return prog;
}

std::pair<std::vector<int>, WeightVector> extract_active_tripoles(const WeightVector& w,
                                                                  double tau) {
    if (!(tau > 0.0 && tau < 1.0)) {
        throw std::invalid_argument("extract_active_tripoles: tau must lie in (0, 1)");
    }
    double max_norm = 0.0;
    for (int m = 0; m < w.size(); ++m) max_norm = std::max(max_norm, w.group_norm(m));

    std::vector<int> active;
    WeightVector pruned(w.size());
    if (max_norm == 0.0) return {active, pruned};
    const double cut = tau * max_norm;
    for (int m = 0; m < w.size(); ++m) {
        if (w.group_norm(m) > cut) {
            active.push_back(m);
            pruned.triples[m] = w.triples[m];
        }
    }
    return {active, pruned};
}

namespace {

std::vector<double> positions_at(const CandidateGrid& grid, const std::vector<int>& indices) {
    std::vector<double> pos;
    pos.reserve(indices.size());
    for (int idx : indices) pos.push_back(grid.positions()[idx]);
    return pos;
}

double max_group_norm(const WeightVector& w) {
    double v = 0.0;
    for (int m = 0; m < w.size(); ++m) v = std::max(v, w.group_norm(m));
    return v;
}

DesignStatus map_status(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return DesignStatus::Success;
        case SolveStatus::Infeasible: return DesignStatus::Infeasible;
        default: return DesignStatus::IterationLimit;
    }
}

struct AssembledSpec {
    Eigen::VectorXcd p_r;
    Eigen::MatrixXcd S;
    LiftedSystem lifted;
};

AssembledSpec assemble_spec(const DesignSpec& spec) {
    AssembledSpec out;
    const SampledPattern pattern = build_samples(spec);
    assemble_matrices(pattern, spec.grid, out.p_r, out.S);
    out.lifted = lift_to_real(out.p_r, out.S);
    return out;
}

DesignResult finish_result(const AssembledSpec& sys, const DesignSpec& spec,
                           const ConicSolution& sol, double prune_threshold) {
    DesignResult result;
    result.solver_iterations = sol.iterations;
    result.status = map_status(sol.status);
    if (result.status != DesignStatus::Success) {
        result.weights = WeightVector(spec.grid.num_locations());
        return result;
    }
    const WeightVector raw = weights_from_lifted(sol.x);
    auto [active, pruned] = extract_active_tripoles(raw, prune_threshold);
    result.weights = std::move(pruned);
    result.active_indices = std::move(active);
    result.active_positions = positions_at(spec.grid, result.active_indices);
    result.residual = complex_residual(sys.p_r, sys.S, result.weights);
    result.objective = sol.objective_value;
    return result;
}

}  // namespace

DesignResult design_group_sparse(const DesignSpec& spec, const SolverOptions& opts,
                                 double prune_threshold) {
    const AssembledSpec sys = assemble_spec(spec);
    const int M = spec.grid.num_locations();
    const ConicProgram prog =
        encode_group_sparse_program(sys.lifted, spec.alpha, Eigen::VectorXd::Ones(M));
    const ConicSolution sol = solve(prog, opts);
    return finish_result(sys, spec, sol, prune_threshold);
}

DesignResult design_reweighted(const DesignSpec& spec, const GroupNormConfig& cfg,
                               const SolverOptions& opts) {
    if (cfg.stop_patience < 1 || cfg.max_reweight_iters < 1) {
        throw std::invalid_argument("GroupNormConfig: patience and iteration cap must be >= 1");
    }
    if (!(cfg.epsilon_value > 0.0)) {
        throw std::invalid_argument("GroupNormConfig: epsilon_value must be positive");
    }

    const AssembledSpec sys = assemble_spec(spec);
    const int M = spec.grid.num_locations();

    ReweightTrace trace;
    Eigen::VectorXd deltas = Eigen::VectorXd::Ones(M);
    double epsilon = cfg.epsilon_policy == EpsilonPolicy::Fixed ? cfg.epsilon_value : 0.0;

    DesignResult last;
    int prev_count = -1;
    int streak = 0;

    for (int k = 1; k <= cfg.max_reweight_iters; ++k) {
        const ConicProgram prog = encode_group_sparse_program(sys.lifted, spec.alpha, deltas);
        const ConicSolution sol = solve(prog, opts);
        if (sol.status != SolveStatus::Optimal) {
            DesignResult result = finish_result(sys, spec, sol, cfg.prune_threshold);
            result.trace = std::move(trace);
            return result;
        }

        const WeightVector raw = weights_from_lifted(sol.x);
        last = finish_result(sys, spec, sol, cfg.prune_threshold);
        const int count = static_cast<int>(last.active_indices.size());
        trace.iterations.push_back(
            {k, deltas, count, last.residual, sol.objective_value});

        if (k == 1 && cfg.epsilon_policy == EpsilonPolicy::Relative) {
            epsilon = std::max(cfg.epsilon_value * max_group_norm(raw), 1e-12);
        }

        if (k >= 2) {
            streak = count == prev_count ? streak + 1 : 0;
            if (streak >= cfg.stop_patience) break;
        }
        prev_count = count;

        for (int m = 0; m < M; ++m) {
            deltas[m] = 1.0 / (raw.group_norm(m) + epsilon);
        }
    }

    last.trace = std::move(trace);
    return last;
}

DesignResult design_ula_reference(double aperture_wl, double spacing_wl,
                                  const DesignSpec& spec_core, const SolverOptions& opts) {
    if (!(spacing_wl > 0.0) || !(aperture_wl > 0.0)) {
        throw std::invalid_argument("design_ula_reference: aperture and spacing must be positive");
    }
    const double intervals = aperture_wl / spacing_wl;
    const int k = static_cast<int>(std::llround(intervals));
    if (k < 1 || std::abs(intervals - k) > 1e-9 * std::max(1.0, intervals)) {
        throw std::invalid_argument(
            "design_ula_reference: spacing must divide the aperture into whole intervals");
    }
    const int M = k + 1;
    const CandidateGrid ula_grid(M, spacing_wl);
    DesignSpec spec{spec_core.mainlobe, spec_core.polarization, spec_core.sidelobe_regions,
                    spec_core.transition_halfwidth_deg, spec_core.sidelobe_step_deg,
                    spec_core.alpha, ula_grid};

    const SampledPattern pattern = build_samples(spec);
    Eigen::VectorXcd p_r;
    Eigen::MatrixXcd S;
    assemble_matrices(pattern, ula_grid, p_r, S);
    const int L = pattern.count();

    // Lift without slack slots: per-location blocks
    // [Re wx, Re wy, Re wz, -Im wx, -Im wy, -Im wz].
    Eigen::VectorXd p_hat(2 * L);
    p_hat.head(L) = p_r.real();
    p_hat.tail(L) = p_r.imag();
    Eigen::MatrixXd S_hat(2 * L, 6 * M);
    for (int m = 0; m < M; ++m) {
        for (int axis = 0; axis < 3; ++axis) {
            const auto col = S.col(3 * m + axis);
            S_hat.col(6 * m + axis).head(L) = col.real();
            S_hat.col(6 * m + axis).tail(L) = col.imag();
            S_hat.col(6 * m + 3 + axis).head(L) = -col.imag();
            S_hat.col(6 * m + 3 + axis).tail(L) = col.real();
        }
    }

    // Epigraph form: min t s.t. ||p_hat - S_hat w|| <= t, with the lifted
    // mainlobe rows pinned to a unit response (real part 1, imaginary part 0).
    const int n = 6 * M + 1;
    ConicProgram prog;
    prog.num_vars = n;
    prog.objective = Eigen::VectorXd::Zero(n);
    prog.objective[6 * M] = 1.0;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
    g[6 * M] = 1.0;
    prog.cones.push_back(
        SocConstraint::with_affine_bound(-S_hat, p_hat, std::move(g), 0.0, 0));
    EqualityConstraint real_row, imag_row;
    real_row.row = Eigen::VectorXd::Zero(n);
    real_row.row.head(6 * M) = S_hat.row(0);
    real_row.value = 1.0;
    imag_row.row = Eigen::VectorXd::Zero(n);
    imag_row.row.head(6 * M) = S_hat.row(L);
    imag_row.value = 0.0;
    prog.equalities.push_back(std::move(real_row));
    prog.equalities.push_back(std::move(imag_row));

    SolverOptions tight = opts;
    tight.feas_tol = std::min(opts.feas_tol, 1e-9);
    tight.gap_tol = std::min(opts.gap_tol, 1e-9);
    const ConicSolution sol = solve(prog, tight);

    DesignResult result;
    result.solver_iterations = sol.iterations;
    result.status = map_status(sol.status);
    result.weights = WeightVector(M);
    if (result.status != DesignStatus::Success) return result;

    for (int m = 0; m < M; ++m) {
        for (int axis = 0; axis < 3; ++axis) {
            result.weights.triples[m][axis] =
                std::complex<double>(sol.x[6 * m + axis], -sol.x[6 * m + 3 + axis]);
        }
    }
    result.active_indices.resize(M);
    for (int m = 0; m < M; ++m) result.active_indices[m] = m;
    result.active_positions = positions_at(ula_grid, result.active_indices);
    result.residual = complex_residual(p_r, S, result.weights);
    result.objective = sol.objective_value;
    return result;
}

}  // namespace trisynth
