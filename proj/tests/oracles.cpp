#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace oracles {

namespace {

// Work in the eigenbasis of D'D so each bisection probe is O(n).
struct BallProjector {
    Eigen::MatrixXd Q;
    Eigen::VectorXd lam;
    Eigen::VectorXd r;   // Q' D' f
    double ff = 0.0;
    double alpha = 0.0;

    explicit BallProjector(const Eigen::MatrixXd& D, const Eigen::VectorXd& f, double a) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D.transpose() * D);
        Q = es.eigenvectors();
        lam = es.eigenvalues();
        r = Q.transpose() * (D.transpose() * f);
        ff = f.squaredNorm();
        alpha = a;
    }

    double residual_sq(const Eigen::VectorXd& xt) const {
        double v = ff;
        for (int i = 0; i < lam.size(); ++i) {
            v += lam[i] * xt[i] * xt[i] - 2.0 * r[i] * xt[i];
        }
        return v;
    }

    Eigen::VectorXd shrink(const Eigen::VectorXd& u0, double nu) const {
        Eigen::VectorXd xt(u0.size());
        for (int i = 0; i < u0.size(); ++i) {
            xt[i] = (u0[i] + nu * r[i]) / (1.0 + nu * lam[i]);
        }
        return xt;
    }

    Eigen::VectorXd project(const Eigen::VectorXd& x0) const {
        const Eigen::VectorXd u0 = Q.transpose() * x0;
        if (residual_sq(u0) <= alpha * alpha) return x0;
        double hi = 1.0;
        while (residual_sq(shrink(u0, hi)) > alpha * alpha) {
            hi *= 2.0;
            if (hi > 1e18) {
                throw std::runtime_error("project_residual_ball: constraint set looks empty");
            }
        }
        double lo = 0.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (residual_sq(shrink(u0, mid)) > alpha * alpha) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return Q * shrink(u0, hi);
    }
};

Eigen::VectorXd group_prox(const GroupLassoInstance& inst, const Eigen::VectorXd& y,
                           double step) {
    Eigen::VectorXd x = y;
    for (size_t g = 0; g < inst.groups.size(); ++g) {
        const auto [start, size] = inst.groups[g];
        const double norm = y.segment(start, size).norm();
        const double thresh = step * inst.weights[static_cast<Eigen::Index>(g)];
        if (norm <= thresh) {
            x.segment(start, size).setZero();
        } else {
            x.segment(start, size) *= (1.0 - thresh / norm);
        }
    }
    return x;
}

double group_objective(const GroupLassoInstance& inst, const Eigen::VectorXd& x) {
    double v = 0.0;
    for (size_t g = 0; g < inst.groups.size(); ++g) {
        const auto [start, size] = inst.groups[g];
        v += inst.weights[static_cast<Eigen::Index>(g)] * x.segment(start, size).norm();
    }
    return v;
}

}  // namespace

Eigen::VectorXd project_residual_ball(const Eigen::MatrixXd& D, const Eigen::VectorXd& f,
                                      double alpha, const Eigen::VectorXd& x0) {
    return BallProjector(D, f, alpha).project(x0);
}

DrResult solve_group_lasso_dr(const GroupLassoInstance& inst, int iterations,
                              double prox_step) {
    const BallProjector projector(inst.D, inst.f, inst.alpha);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(inst.num_x());
    Eigen::VectorXd x = y;
    for (int it = 0; it < iterations; ++it) {
        x = group_prox(inst, y, prox_step);
        const Eigen::VectorXd z = projector.project(2.0 * x - y);
        y += z - x;
    }
    DrResult res;
    res.x = projector.project(x);
    res.objective = group_objective(inst, res.x);
    return res;
}

GroupLassoInstance random_group_lasso(TestRng& rng, int max_n) {
    GroupLassoInstance inst;
    const int ngroups = rng.uniform_int(2, 5);
    std::vector<int> sizes(ngroups);
    int n = 0;
    for (int g = 0; g < ngroups; ++g) {
        sizes[g] = rng.uniform_int(1, std::max(1, (max_n - (ngroups - g)) / std::max(1, ngroups)));
        n += sizes[g];
    }
    int start = 0;
    inst.weights.resize(ngroups);
    for (int g = 0; g < ngroups; ++g) {
        inst.groups.emplace_back(start, sizes[g]);
        inst.weights[g] = rng.uniform(0.5, 2.0);
        start += sizes[g];
    }
    const int rows = n + rng.uniform_int(1, 8);
    inst.D.resize(rows, n);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < n; ++j) inst.D(i, j) = rng.normal();
    }
    Eigen::VectorXd x_true = Eigen::VectorXd::Zero(n);
    for (const auto& [gs, gz] : inst.groups) {
        if (rng.uniform() < 0.7) {
            for (int j = 0; j < gz; ++j) x_true[gs + j] = rng.normal();
        }
    }
    inst.f = inst.D * x_true;
    for (int i = 0; i < rows; ++i) inst.f[i] += 0.05 * rng.normal();

    const double ls_res = (inst.D * inst.D.colPivHouseholderQr().solve(inst.f) - inst.f).norm();
    inst.alpha = ls_res + rng.uniform(0.05, 0.5) * std::max(1.0, inst.f.norm());
    return inst;
}

trisynth::ConicProgram to_conic_program(const GroupLassoInstance& inst) {
    const int nx = inst.num_x();
    const int ng = static_cast<int>(inst.groups.size());
    trisynth::ConicProgram prog;
    prog.num_vars = nx + ng;
    prog.objective = Eigen::VectorXd::Zero(nx + ng);
    for (int g = 0; g < ng; ++g) prog.objective[nx + g] = inst.weights[g];

    prog.cones.push_back(
        trisynth::SocConstraint::with_constant_bound(inst.D, -inst.f, inst.alpha, 0));
    for (int g = 0; g < ng; ++g) {
        const auto [start, size] = inst.groups[g];
        Eigen::VectorXd bound_row = Eigen::VectorXd::Zero(nx + ng);
        bound_row[nx + g] = 1.0;
        prog.cones.push_back(trisynth::SocConstraint::with_affine_bound(
            Eigen::MatrixXd::Identity(size, size), Eigen::VectorXd::Zero(size),
            std::move(bound_row), 0.0, start));
    }
    return prog;
}

GroupLassoInstance design_as_group_lasso(const trisynth::LiftedSystem& lifted, double alpha,
                                         const Eigen::VectorXd& deltas) {
    const int M = static_cast<int>(lifted.S_hat.cols()) / trisynth::kLiftedBlock;
    GroupLassoInstance inst;
    inst.D.resize(lifted.S_hat.rows(), 6 * M);
    for (int m = 0; m < M; ++m) {
        inst.D.middleCols(6 * m, 6) =
            lifted.S_hat.middleCols(trisynth::kLiftedBlock * m + 1, 6);
    }
    inst.f = lifted.p_hat;
    inst.alpha = alpha;
    inst.weights.resize(M);
    for (int m = 0; m < M; ++m) {
        inst.groups.emplace_back(6 * m, 6);
        inst.weights[m] = deltas[m] * deltas[m];
    }
    return inst;
}

Eigen::VectorXd equality_ls_kkt(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                const Eigen::MatrixXd& C, const Eigen::VectorXd& d) {
    const int n = static_cast<int>(A.cols());
    const int p = static_cast<int>(C.rows());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + p, n + p);
    kkt.topLeftCorner(n, n) = 2.0 * A.transpose() * A;
    kkt.topRightCorner(n, p) = C.transpose();
    kkt.bottomLeftCorner(p, n) = C;
    Eigen::VectorXd rhs(n + p);
    rhs.head(n) = 2.0 * A.transpose() * b;
    rhs.tail(p) = d;
    const Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
    return sol.head(n);
}

}  // namespace oracles
