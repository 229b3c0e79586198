#include "trisynth/conic_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>

namespace trisynth {

SocConstraint SocConstraint::with_constant_bound(Eigen::MatrixXd A, Eigen::VectorXd b,
                                                 double bound, int col_offset) {
    SocConstraint c;
    c.A = std::move(A);
    c.b = std::move(b);
    c.col_offset = col_offset;
    c.affine_bound = false;
    c.h = bound;
    return c;
}

SocConstraint SocConstraint::with_affine_bound(Eigen::MatrixXd A, Eigen::VectorXd b,
                                               Eigen::VectorXd g, double h,
                                               int col_offset) {
    SocConstraint c;
    c.A = std::move(A);
    c.b = std::move(b);
    c.col_offset = col_offset;
    c.affine_bound = true;
    c.g = std::move(g);
    c.h = h;
    return c;
}

const char* to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::MaxIterations: return "max_iterations";
        case SolveStatus::Unbounded: return "unbounded";
    }
    return "unknown";
}

namespace {

constexpr double kStepMax = 0.999;
constexpr double kStepMin = 1e-6;
constexpr double kGammaStep = 0.99;
constexpr double kSigmaMin = 1e-4;
constexpr double kSigmaMax = 0.9999;
constexpr int kRefineSteps = 6;

void validate_program(const ConicProgram& prog) {
    const int n = prog.num_vars;
    if (n < 0) throw std::invalid_argument("ConicProgram: num_vars must be nonnegative");
    if (prog.objective.size() != n) {
        throw std::invalid_argument("ConicProgram: objective length must equal num_vars");
    }
    for (const SocConstraint& cone : prog.cones) {
        if (cone.b.size() != cone.A.rows()) {
            throw std::invalid_argument("SocConstraint: b length must equal A rows");
        }
        if (cone.col_offset < 0 || cone.col_offset + cone.A.cols() > n) {
            throw std::invalid_argument("SocConstraint: column window out of range");
        }
        if (cone.affine_bound && cone.g.size() != n) {
            throw std::invalid_argument("SocConstraint: affine bound row must have length num_vars");
        }
    }
    for (const EqualityConstraint& eq : prog.equalities) {
        if (eq.row.size() != n) {
            throw std::invalid_argument("EqualityConstraint: row length must equal num_vars");
        }
    }
}

double bound_value(const SocConstraint& cone, const Eigen::VectorXd& x) {
    return cone.affine_bound ? cone.g.dot(x) + cone.h : cone.h;
}

Eigen::VectorXd cone_arg(const SocConstraint& cone, const Eigen::VectorXd& x) {
    if (cone.A.rows() == 0) return cone.b;
    return cone.A * x.segment(cone.col_offset, cone.A.cols()) + cone.b;
}

// ---------------------------------------------------------------------------
// Homogeneous self-dual interior-point method with Nesterov-Todd scalings.
// Internal standard form: min c'x  s.t.  Aeq x = beq,  G x + s = h,
// s in (R+)^nlp x SOC_d1 x ... The KKT systems are reduced to normal
// equations H = G' W^-2 G solved by dense Cholesky; per-cone structure keeps
// the per-iteration assembly at O(n^2) via G'JG precomputation and rank-one
// scaling updates. Everything is fixed-order arithmetic on one thread, so
// identical inputs give bit-identical iterates.
// ---------------------------------------------------------------------------

struct LpRow {
    std::vector<int> sup;     // columns with nonzero coefficients
    Eigen::VectorXd gvals;    // G row values over sup
    double h = 0.0;
    int user_idx = -1;
};

struct SocBlock {
    int dim = 0;
    int offset = 0;           // start within the stacked cone vector
    std::vector<int> sup;
    Eigen::MatrixXd G;        // dim x |sup|
    Eigen::VectorXd h;        // dim
    Eigen::MatrixXd P;        // G' J G over sup
    int user_idx = -1;

    // Nesterov-Todd scaling state
    double eta = 1.0;
    double eta2 = 1.0;
    Eigen::VectorXd wbar;     // dim, wbar' J wbar = 1
};

std::vector<int> window_support(int offset, int cols) {
    std::vector<int> sup(cols);
    for (int i = 0; i < cols; ++i) sup[i] = offset + i;
    return sup;
}

std::vector<int> row_support(const Eigen::VectorXd& g) {
    std::vector<int> sup;
    for (int i = 0; i < g.size(); ++i) {
        if (g[i] != 0.0) sup.push_back(i);
    }
    return sup;
}

class Ipm {
  public:
    Ipm(const ConicProgram& prog, const SolverOptions& opts)
        : prog_(prog), opts_(opts), n_(prog.num_vars),
          p_(static_cast<int>(prog.equalities.size())) {
        build_internal();
    }

    ConicSolution run();

  private:
    void build_internal();
    bool update_scalings();
    void set_identity_scalings();
    bool assemble_and_factor();
    void kkt_solve(const Eigen::VectorXd& bx, const Eigen::VectorXd& by,
                   const Eigen::VectorXd& bz, Eigen::VectorXd& dx,
                   Eigen::VectorXd& dy, Eigen::VectorXd& dz) const;
    void reduced_solve(const Eigen::VectorXd& r1, const Eigen::VectorXd& by,
                       Eigen::VectorXd& dx, Eigen::VectorXd& dy) const;

    Eigen::VectorXd G_mul(const Eigen::VectorXd& x) const;
    Eigen::VectorXd Gt_mul(const Eigen::VectorXd& v) const;
    Eigen::VectorXd Aeq_mul(const Eigen::VectorXd& x) const;
    Eigen::VectorXd Aeqt_mul(const Eigen::VectorXd& y) const;

    void apply_W(const Eigen::VectorXd& v, Eigen::VectorXd& out) const;
    void apply_W2(const Eigen::VectorXd& v, Eigen::VectorXd& out) const;
    void apply_Winv2(const Eigen::VectorXd& v, Eigen::VectorXd& out) const;
    void conic_product(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                       Eigen::VectorXd& out) const;
    void conic_division(const Eigen::VectorXd& u, const Eigen::VectorXd& w,
                        Eigen::VectorXd& out) const;
    void bring_to_cone(const Eigen::VectorXd& r, Eigen::VectorXd& out) const;
    double line_search(const Eigen::VectorXd& ds, const Eigen::VectorXd& dz,
                       double tau, double dtau, double kap, double dkap) const;

    double cone_infeasibility(const Eigen::VectorXd& v) const;

    ConicSolution materialize(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& z, double tau) const;

    const ConicProgram& prog_;
    SolverOptions opts_;
    int n_;
    int p_;
    int nlp_ = 0;
    int m_ = 0;

    // Objective scaled to unit infinity norm so the dual iterates stay O(1);
    // updates of large duals would otherwise inject eps * ||c|| of roundoff
    // per iteration and floor the dual residual above tight tolerances.
    double c_scale_ = 1.0;
    Eigen::VectorXd c_;
    Eigen::MatrixXd Aeq_;
    Eigen::VectorXd beq_;
    Eigen::VectorXd h_;
    std::vector<LpRow> lp_rows_;
    std::vector<SocBlock> socs_;

    // scaling state for the LP part
    Eigen::VectorXd lp_w2_;    // s ./ z
    Eigen::VectorXd lambda_;   // W z, full cone vector

    // iterate
    Eigen::VectorXd x_, y_, z_, s_;
    double tau_ = 1.0, kap_ = 1.0;

    // factorization of the Jacobi-equilibrated normal matrix
    Eigen::MatrixXd H_;
    Eigen::VectorXd equil_;  // D with H_tilde = D^-1 H D^-1 of unit diagonal
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::MatrixXd HinvAt_;
    Eigen::LDLT<Eigen::MatrixXd> schur_;

    Eigen::VectorXd solve_H(const Eigen::VectorXd& r) const {
        return (llt_.solve((r.cwiseQuotient(equil_)).eval())).cwiseQuotient(equil_);
    }
};

void Ipm::build_internal() {
    c_scale_ = std::max(1.0, prog_.objective.lpNorm<Eigen::Infinity>());
    c_ = prog_.objective / c_scale_;
    Aeq_.resize(p_, n_);
    beq_.resize(p_);
    for (int i = 0; i < p_; ++i) {
        Aeq_.row(i) = prog_.equalities[i].row.transpose();
        beq_[i] = prog_.equalities[i].value;
    }

    // LP rows first, then SOC blocks, both in user order.
    std::vector<double> h_entries;
    for (int i = 0; i < static_cast<int>(prog_.cones.size()); ++i) {
        const SocConstraint& cone = prog_.cones[i];
        if (cone.A.rows() == 0) {
            LpRow row;
            row.user_idx = i;
            row.h = cone.h;
            if (cone.affine_bound) {
                row.sup = row_support(cone.g);
                row.gvals.resize(row.sup.size());
                for (size_t k = 0; k < row.sup.size(); ++k) {
                    row.gvals[static_cast<Eigen::Index>(k)] = -cone.g[row.sup[k]];
                }
            }
            lp_rows_.push_back(std::move(row));
        }
    }
    nlp_ = static_cast<int>(lp_rows_.size());
    for (int i = 0; i < nlp_; ++i) h_entries.push_back(lp_rows_[i].h);

    int offset = nlp_;
    for (int i = 0; i < static_cast<int>(prog_.cones.size()); ++i) {
        const SocConstraint& cone = prog_.cones[i];
        const int k = static_cast<int>(cone.A.rows());
        if (k == 0) continue;
        SocBlock blk;
        blk.user_idx = i;
        blk.dim = k + 1;
        blk.offset = offset;
        offset += blk.dim;

        // Support: window of A plus any extra bound-row columns.
        std::vector<int> sup = window_support(cone.col_offset, static_cast<int>(cone.A.cols()));
        if (cone.affine_bound) {
            for (int col : row_support(cone.g)) {
                if (std::find(sup.begin(), sup.end(), col) == sup.end()) sup.push_back(col);
            }
            std::sort(sup.begin(), sup.end());
        }
        blk.sup = std::move(sup);
        const int ns = static_cast<int>(blk.sup.size());

        blk.G = Eigen::MatrixXd::Zero(blk.dim, ns);
        for (int j = 0; j < ns; ++j) {
            const int col = blk.sup[j];
            if (cone.affine_bound) blk.G(0, j) = -cone.g[col];
            if (col >= cone.col_offset && col < cone.col_offset + cone.A.cols()) {
                blk.G.block(1, j, k, 1) = -cone.A.col(col - cone.col_offset);
            }
        }
        blk.h.resize(blk.dim);
        blk.h[0] = cone.h;
        blk.h.tail(k) = cone.b;

        // P = G' J G, constant across the solve.
        blk.P = blk.G.row(0).transpose() * blk.G.row(0);
        blk.P.noalias() -= blk.G.bottomRows(k).transpose() * blk.G.bottomRows(k);

        blk.wbar = Eigen::VectorXd::Zero(blk.dim);
        blk.wbar[0] = 1.0;
        socs_.push_back(std::move(blk));
    }
    m_ = offset;

    h_.resize(m_);
    for (int i = 0; i < nlp_; ++i) h_[i] = h_entries[i];
    for (const SocBlock& blk : socs_) h_.segment(blk.offset, blk.dim) = blk.h;

    lp_w2_ = Eigen::VectorXd::Ones(nlp_);
    lambda_ = Eigen::VectorXd::Zero(m_);
}

Eigen::VectorXd Ipm::G_mul(const Eigen::VectorXd& x) const {
    Eigen::VectorXd r(m_);
    for (int i = 0; i < nlp_; ++i) {
        double acc = 0.0;
        const LpRow& row = lp_rows_[i];
        for (size_t k = 0; k < row.sup.size(); ++k) {
            acc += row.gvals[static_cast<Eigen::Index>(k)] * x[row.sup[k]];
        }
        r[i] = acc;
    }
    for (const SocBlock& blk : socs_) {
        Eigen::VectorXd xs(blk.sup.size());
        for (size_t k = 0; k < blk.sup.size(); ++k) {
            xs[static_cast<Eigen::Index>(k)] = x[blk.sup[k]];
        }
        r.segment(blk.offset, blk.dim).noalias() = blk.G * xs;
    }
    return r;
}

Eigen::VectorXd Ipm::Gt_mul(const Eigen::VectorXd& v) const {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(n_);
    for (int i = 0; i < nlp_; ++i) {
        const LpRow& row = lp_rows_[i];
        for (size_t k = 0; k < row.sup.size(); ++k) {
            r[row.sup[k]] += row.gvals[static_cast<Eigen::Index>(k)] * v[i];
        }
    }
    for (const SocBlock& blk : socs_) {
        Eigen::VectorXd rs = blk.G.transpose() * v.segment(blk.offset, blk.dim);
        for (size_t k = 0; k < blk.sup.size(); ++k) {
            r[blk.sup[k]] += rs[static_cast<Eigen::Index>(k)];
        }
    }
    return r;
}

Eigen::VectorXd Ipm::Aeq_mul(const Eigen::VectorXd& x) const {
    if (p_ == 0) return Eigen::VectorXd(0);
    return Aeq_ * x;
}

Eigen::VectorXd Ipm::Aeqt_mul(const Eigen::VectorXd& y) const {
    if (p_ == 0) return Eigen::VectorXd::Zero(n_);
    return Aeq_.transpose() * y;
}

void Ipm::set_identity_scalings() {
    lp_w2_.setOnes();
    for (SocBlock& blk : socs_) {
        blk.eta = 1.0;
        blk.eta2 = 1.0;
        blk.wbar.setZero();
        blk.wbar[0] = 1.0;
    }
}

bool Ipm::update_scalings() {
    if (!s_.allFinite() || !z_.allFinite() || !std::isfinite(tau_) || !std::isfinite(kap_)) {
        return false;
    }
    for (int i = 0; i < nlp_; ++i) {
        if (!(s_[i] > 0.0) || !(z_[i] > 0.0)) return false;
        lp_w2_[i] = s_[i] / z_[i];
        lambda_[i] = std::sqrt(s_[i] * z_[i]);
    }
    for (SocBlock& blk : socs_) {
        const auto sb = s_.segment(blk.offset, blk.dim);
        const auto zb = z_.segment(blk.offset, blk.dim);
        const double sres = sb[0] * sb[0] - sb.tail(blk.dim - 1).squaredNorm();
        const double zres = zb[0] * zb[0] - zb.tail(blk.dim - 1).squaredNorm();
        if (!(sres > 0.0) || !(zres > 0.0)) return false;
        const double snorm = std::sqrt(sres);
        const double znorm = std::sqrt(zres);
        const Eigen::VectorXd sbar = sb / snorm;
        const Eigen::VectorXd zbar = zb / znorm;
        const double gamma = std::sqrt(0.5 * (1.0 + sbar.dot(zbar)));
        blk.wbar[0] = (0.5 / gamma) * (sbar[0] + zbar[0]);
        blk.wbar.tail(blk.dim - 1) =
            (0.5 / gamma) * (sbar.tail(blk.dim - 1) - zbar.tail(blk.dim - 1));
        blk.eta2 = snorm / znorm;
        blk.eta = std::sqrt(blk.eta2);

        // lambda block = W z
        const double zeta = blk.wbar.tail(blk.dim - 1).dot(zb.tail(blk.dim - 1));
        lambda_[blk.offset] = blk.eta * (blk.wbar[0] * zb[0] + zeta);
        lambda_.segment(blk.offset + 1, blk.dim - 1) =
            blk.eta * (zb.tail(blk.dim - 1) +
                       (zb[0] + zeta / (1.0 + blk.wbar[0])) * blk.wbar.tail(blk.dim - 1));
    }
    return true;
}

void Ipm::apply_W(const Eigen::VectorXd& v, Eigen::VectorXd& out) const {
    out.resize(m_);
    for (int i = 0; i < nlp_; ++i) out[i] = std::sqrt(lp_w2_[i]) * v[i];
    for (const SocBlock& blk : socs_) {
        const auto vb = v.segment(blk.offset, blk.dim);
        const double zeta = blk.wbar.tail(blk.dim - 1).dot(vb.tail(blk.dim - 1));
        out[blk.offset] = blk.eta * (blk.wbar[0] * vb[0] + zeta);
        out.segment(blk.offset + 1, blk.dim - 1) =
            blk.eta * (vb.tail(blk.dim - 1) +
                       (vb[0] + zeta / (1.0 + blk.wbar[0])) * blk.wbar.tail(blk.dim - 1));
    }
}

void Ipm::apply_W2(const Eigen::VectorXd& v, Eigen::VectorXd& out) const {
    out.resize(m_);
    for (int i = 0; i < nlp_; ++i) out[i] = lp_w2_[i] * v[i];
    for (const SocBlock& blk : socs_) {
        const auto vb = v.segment(blk.offset, blk.dim);
        const double wv = blk.wbar.dot(vb);
        out[blk.offset] = blk.eta2 * (2.0 * blk.wbar[0] * wv - vb[0]);
        out.segment(blk.offset + 1, blk.dim - 1) =
            blk.eta2 * (2.0 * wv * blk.wbar.tail(blk.dim - 1) + vb.tail(blk.dim - 1));
    }
}

void Ipm::apply_Winv2(const Eigen::VectorXd& v, Eigen::VectorXd& out) const {
    out.resize(m_);
    for (int i = 0; i < nlp_; ++i) out[i] = v[i] / lp_w2_[i];
    for (const SocBlock& blk : socs_) {
        const auto vb = v.segment(blk.offset, blk.dim);
        const double wJv = blk.wbar[0] * vb[0] - blk.wbar.tail(blk.dim - 1).dot(vb.tail(blk.dim - 1));
        out[blk.offset] = (2.0 * blk.wbar[0] * wJv - vb[0]) / blk.eta2;
        out.segment(blk.offset + 1, blk.dim - 1) =
            (-2.0 * wJv * blk.wbar.tail(blk.dim - 1) + vb.tail(blk.dim - 1)) / blk.eta2;
    }
}

void Ipm::conic_product(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                        Eigen::VectorXd& out) const {
    out.resize(m_);
    for (int i = 0; i < nlp_; ++i) out[i] = u[i] * v[i];
    for (const SocBlock& blk : socs_) {
        const auto ub = u.segment(blk.offset, blk.dim);
        const auto vb = v.segment(blk.offset, blk.dim);
        out[blk.offset] = ub.dot(vb);
        out.segment(blk.offset + 1, blk.dim - 1) =
            ub[0] * vb.tail(blk.dim - 1) + vb[0] * ub.tail(blk.dim - 1);
    }
}

void Ipm::conic_division(const Eigen::VectorXd& u, const Eigen::VectorXd& w,
                         Eigen::VectorXd& out) const {
    out.resize(m_);
    for (int i = 0; i < nlp_; ++i) out[i] = w[i] / u[i];
    for (const SocBlock& blk : socs_) {
        const auto ub = u.segment(blk.offset, blk.dim);
        const auto wb = w.segment(blk.offset, blk.dim);
        const double rho = ub[0] * ub[0] - ub.tail(blk.dim - 1).squaredNorm();
        const double zeta = ub.tail(blk.dim - 1).dot(wb.tail(blk.dim - 1));
        const double factor = (zeta / ub[0] - wb[0]) / rho;
        out[blk.offset] = (ub[0] * wb[0] - zeta) / rho;
        out.segment(blk.offset + 1, blk.dim - 1) =
            factor * ub.tail(blk.dim - 1) + wb.tail(blk.dim - 1) / ub[0];
    }
}

void Ipm::bring_to_cone(const Eigen::VectorXd& r, Eigen::VectorXd& out) const {
    double alpha = -0.99;
    for (int i = 0; i < nlp_; ++i) {
        if (r[i] <= 0.0 && -r[i] > alpha) alpha = -r[i];
    }
    for (const SocBlock& blk : socs_) {
        const double res = r[blk.offset] - r.segment(blk.offset + 1, blk.dim - 1).norm();
        if (res <= 0.0 && -res > alpha) alpha = -res;
    }
    out = r;
    const double shift = 1.0 + alpha;
    for (int i = 0; i < nlp_; ++i) out[i] += shift;
    for (const SocBlock& blk : socs_) out[blk.offset] += shift;
}

double Ipm::cone_infeasibility(const Eigen::VectorXd& v) const {
    double worst = 0.0;
    for (int i = 0; i < nlp_; ++i) worst = std::max(worst, -v[i]);
    for (const SocBlock& blk : socs_) {
        worst = std::max(worst, v.segment(blk.offset + 1, blk.dim - 1).norm() - v[blk.offset]);
    }
    return worst;
}

bool Ipm::assemble_and_factor() {
    H_.resize(n_, n_);

    for (int attempt = 0; attempt < 4; ++attempt) {
        H_.setZero();
        for (int i = 0; i < nlp_; ++i) {
            const LpRow& row = lp_rows_[i];
            const double coeff = 1.0 / lp_w2_[i];
            for (size_t a = 0; a < row.sup.size(); ++a) {
                const double va = row.gvals[static_cast<Eigen::Index>(a)];
                for (size_t bi = a; bi < row.sup.size(); ++bi) {
                    H_(row.sup[bi], row.sup[a]) +=
                        coeff * va * row.gvals[static_cast<Eigen::Index>(bi)];
                }
            }
        }
        for (const SocBlock& blk : socs_) {
            // contribution = (2 u u' - P) / eta^2 with u = G' J wbar
            Eigen::VectorXd jw(blk.dim);
            jw[0] = blk.wbar[0];
            jw.tail(blk.dim - 1) = -blk.wbar.tail(blk.dim - 1);
            const Eigen::VectorXd u = blk.G.transpose() * jw;
            const double inv_eta2 = 1.0 / blk.eta2;
            const int ns = static_cast<int>(blk.sup.size());
            for (int a = 0; a < ns; ++a) {
                const int col = blk.sup[a];
                const double ua = u[a];
                for (int bi = a; bi < ns; ++bi) {
                    H_(blk.sup[bi], col) += inv_eta2 * (2.0 * u[bi] * ua - blk.P(bi, a));
                }
            }
        }

        // Symmetric Jacobi equilibration keeps the factorization honest when
        // per-column scales span many decades; regularize on the unit
        // diagonal of the scaled matrix.
        equil_.resize(n_);
        for (int i = 0; i < n_; ++i) {
            equil_[i] = std::sqrt(std::max(H_(i, i), 1e-300));
        }
        for (int j = 0; j < n_; ++j) {
            for (int i = j; i < n_; ++i) {
                H_(i, j) /= equil_[i] * equil_[j];
            }
        }
        const double delta = 1e-13 * std::pow(100.0, attempt);
        H_.diagonal().array() += delta;

        llt_.compute(H_.selfadjointView<Eigen::Lower>());
        if (llt_.info() == Eigen::Success) {
            if (p_ > 0) {
                HinvAt_.resize(n_, p_);
                for (int j = 0; j < p_; ++j) {
                    HinvAt_.col(j) = solve_H(Aeq_.row(j).transpose());
                }
                Eigen::MatrixXd schur = Aeq_ * HinvAt_;
                schur_.compute(schur);
            }
            return true;
        }
    }
    return false;
}

void Ipm::reduced_solve(const Eigen::VectorXd& r1, const Eigen::VectorXd& by,
                        Eigen::VectorXd& dx, Eigen::VectorXd& dy) const {
    if (p_ == 0) {
        dx = solve_H(r1);
        dy.resize(0);
        return;
    }
    const Eigen::VectorXd t1 = solve_H(r1);
    dy = schur_.solve(Aeq_ * t1 - by);
    dx = t1 - HinvAt_ * dy;
}

void Ipm::kkt_solve(const Eigen::VectorXd& bx, const Eigen::VectorXd& by,
                    const Eigen::VectorXd& bz, Eigen::VectorXd& dx,
                    Eigen::VectorXd& dy, Eigen::VectorXd& dz) const {
    Eigen::VectorXd wz;
    apply_Winv2(bz, wz);
    Eigen::VectorXd r1 = bx + Gt_mul(wz);
    reduced_solve(r1, by, dx, dy);
    Eigen::VectorXd tmp = G_mul(dx) - bz;
    apply_Winv2(tmp, dz);

    // Iterative refinement against the unreduced KKT system.
    double prev_err = std::numeric_limits<double>::infinity();
    const double scale = 1.0 + std::max({bx.lpNorm<Eigen::Infinity>(),
                                         p_ > 0 ? by.lpNorm<Eigen::Infinity>() : 0.0,
                                         bz.lpNorm<Eigen::Infinity>()});
    Eigen::VectorXd best_dx = dx, best_dy = dy, best_dz = dz;
    for (int it = 0; it < kRefineSteps; ++it) {
        Eigen::VectorXd w2dz;
        apply_W2(dz, w2dz);
        const Eigen::VectorXd ex = bx - (Aeqt_mul(dy) + Gt_mul(dz));
        const Eigen::VectorXd ey = by - Aeq_mul(dx);
        const Eigen::VectorXd ez = bz - (G_mul(dx) - w2dz);
        const double err = std::max({ex.lpNorm<Eigen::Infinity>(),
                                     p_ > 0 ? ey.lpNorm<Eigen::Infinity>() : 0.0,
                                     ez.lpNorm<Eigen::Infinity>()});
        if (err < prev_err) {
            best_dx = dx;
            best_dy = dy;
            best_dz = dz;
        }
        if (err <= 1e-15 * scale || err >= 0.5 * prev_err) break;
        prev_err = err;
        Eigen::VectorXd cz;
        apply_Winv2(ez, cz);
        Eigen::VectorXd cr1 = ex + Gt_mul(cz);
        Eigen::VectorXd cx, cy;
        reduced_solve(cr1, ey, cx, cy);
        Eigen::VectorXd ctmp = G_mul(cx) - ez;
        Eigen::VectorXd cdz;
        apply_Winv2(ctmp, cdz);
        dx += cx;
        if (p_ > 0) dy += cy;
        dz += cdz;
    }
    dx = best_dx;
    dy = best_dy;
    dz = best_dz;
}

double Ipm::line_search(const Eigen::VectorXd& ds, const Eigen::VectorXd& dz,
                        double tau, double dtau, double kap, double dkap) const {
    double alpha = 1.0 / kStepMin;
    for (int i = 0; i < nlp_; ++i) {
        const double rho = ds[i] / lambda_[i];
        const double sig = dz[i] / lambda_[i];
        if (rho < 0.0) alpha = std::min(alpha, -1.0 / rho);
        if (sig < 0.0) alpha = std::min(alpha, -1.0 / sig);
    }
    if (dtau < 0.0) alpha = std::min(alpha, -tau / dtau);
    if (dkap < 0.0) alpha = std::min(alpha, -kap / dkap);

    for (const SocBlock& blk : socs_) {
        const auto lb = lambda_.segment(blk.offset, blk.dim);
        const double lknorm2 = lb[0] * lb[0] - lb.tail(blk.dim - 1).squaredNorm();
        if (lknorm2 <= 0.0) continue;
        const double lknorm = std::sqrt(lknorm2);
        const Eigen::VectorXd lkbar = lb / lknorm;

        for (const Eigen::VectorXd* d : {&ds, &dz}) {
            const auto db = d->segment(blk.offset, blk.dim);
            const double lk_d = lkbar[0] * db[0] - lkbar.tail(blk.dim - 1).dot(db.tail(blk.dim - 1));
            const double factor = (lk_d + db[0]) / (lkbar[0] + 1.0);
            const double rho0 = lk_d / lknorm;
            const double rho1norm =
                ((db.tail(blk.dim - 1) - factor * lkbar.tail(blk.dim - 1)) / lknorm).norm();
            const double blocking = rho1norm - rho0;
            if (blocking > 0.0) alpha = std::min(alpha, 1.0 / blocking);
        }
    }
    return std::clamp(alpha, kStepMin, kStepMax);
}

ConicSolution Ipm::materialize(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& z, double tau) const {
    ConicSolution sol;
    sol.x = x / tau;
    sol.objective_value = c_scale_ * c_.dot(sol.x);
    sol.eq_duals = p_ > 0 ? Eigen::VectorXd(c_scale_ * y / tau) : Eigen::VectorXd(0);
    sol.cone_duals.resize(prog_.cones.size());
    for (int i = 0; i < nlp_; ++i) {
        Eigen::VectorXd zi(1);
        zi[0] = c_scale_ * z[i] / tau;
        sol.cone_duals[lp_rows_[i].user_idx] = std::move(zi);
    }
    for (const SocBlock& blk : socs_) {
        sol.cone_duals[blk.user_idx] = c_scale_ * z.segment(blk.offset, blk.dim) / tau;
    }
    return sol;
}

ConicSolution Ipm::run() {
    // Degenerate programs without any cone rows.
    if (m_ == 0) {
        ConicSolution sol;
        if (p_ == 0) {
            sol.x = Eigen::VectorXd::Zero(n_);
            sol.status = c_.isZero(0.0) ? SolveStatus::Optimal : SolveStatus::Unbounded;
        } else {
            // Minimum-norm stationary point of the equality-constrained LP.
            Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n_ + p_, n_ + p_);
            kkt.topLeftCorner(n_, n_).setIdentity();
            kkt.topRightCorner(n_, p_) = Aeq_.transpose();
            kkt.bottomLeftCorner(p_, n_) = Aeq_;
            Eigen::VectorXd rhs(n_ + p_);
            rhs.head(n_) = -c_;
            rhs.tail(p_) = beq_;
            const Eigen::VectorXd sol_xy = kkt.ldlt().solve(rhs);
            sol.x = sol_xy.head(n_);
            sol.eq_duals = c_scale_ * sol_xy.tail(p_);
            const double stat = (c_ + Aeq_.transpose() * sol_xy.tail(p_)).lpNorm<Eigen::Infinity>();
            const double feas = (Aeq_ * sol.x - beq_).lpNorm<Eigen::Infinity>();
            sol.status = (stat <= opts_.feas_tol && feas <= opts_.feas_tol)
                             ? SolveStatus::Optimal
                             : SolveStatus::Unbounded;
        }
        sol.objective_value = c_scale_ * c_.dot(sol.x);
        sol.kkt_residuals = check_kkt(prog_, sol);
        return sol;
    }

    const double resx0 = std::max(1.0, c_.norm());
    const double resy0 = std::max(1.0, p_ > 0 ? beq_.norm() : 0.0);
    const double resz0 = std::max(1.0, h_.norm());
    const double feastol_inf = std::min(opts_.feas_tol, 1e-8);
    const double reltol_gate = 1e-8;

    // Initialization with identity scalings.
    set_identity_scalings();
    if (!assemble_and_factor()) {
        throw std::runtime_error("conic solve: initial KKT factorization failed");
    }
    Eigen::VectorXd dx1, dy1, dz1, dx2, dy2, dz2;
    kkt_solve(Eigen::VectorXd::Zero(n_), beq_, h_, dx1, dy1, dz1);
    x_ = dx1;
    bring_to_cone(-dz1, s_);
    kkt_solve(-c_, Eigen::VectorXd::Zero(p_), Eigen::VectorXd::Zero(m_), dx2, dy2, dz2);
    y_ = dy2;
    bring_to_cone(dz2, z_);
    tau_ = 1.0;
    kap_ = 1.0;

    const double nu = nlp_ + static_cast<int>(socs_.size());

    ConicSolution best;
    double best_metric = std::numeric_limits<double>::infinity();
    bool have_best = false;
    int slow_steps = 0;

    const int iter_cap = std::max(1, opts_.max_iters);
    SolveStatus final_status = SolveStatus::MaxIterations;
    bool decided = false;
    int it = 0;

    Eigen::VectorXd rx, ry, rz, lam_sq, ds_combined, W_dz, ds_by_W, ds_final;

    for (it = 0; it <= iter_cap; ++it) {
        // Residuals of the homogeneous embedding.
        Eigen::VectorXd hrx = -(Aeqt_mul(y_) + Gt_mul(z_));
        const double hresx = hrx.norm();
        rx = hrx - tau_ * c_;
        Eigen::VectorXd hry = Aeq_mul(x_);
        const double hresy = p_ > 0 ? hry.norm() : 0.0;
        ry = hry - tau_ * beq_;
        Eigen::VectorXd hrz = s_ + G_mul(x_);
        const double hresz = hrz.norm();
        rz = hrz - tau_ * h_;

        const double cx = c_.dot(x_);
        const double by = p_ > 0 ? beq_.dot(y_) : 0.0;
        const double hz = h_.dot(z_);
        const double rt = kap_ + cx + by + hz;

        const double nx = x_.norm(), ny = y_.norm(), nz = z_.norm(), ns = s_.norm();
        const double gap = s_.dot(z_);
        const double mu = (gap + kap_ * tau_) / (nu + 1.0);

        const double pres =
            std::max(p_ > 0 ? ry.norm() / std::max(resy0 + nx, 1.0) : 0.0,
                     rz.norm() / std::max(resz0 + nx + ns, 1.0)) /
            tau_;
        const double dres = rx.norm() / std::max(resx0 + ny + nz, 1.0) / tau_;

        // Contract-level certificate on the de-homogenized iterate.
        ConicSolution cand = materialize(x_, y_, z_, tau_);
        cand.iterations = it;
        cand.kkt_residuals = check_kkt(prog_, cand);
        if (std::getenv("TRISYNTH_IPM_TRACE")) {
            std::fprintf(stderr,
                         "it=%3d pres=%9.2e dres=%9.2e mu=%9.2e tau=%9.2e kap=%9.2e "
                         "user=(%9.2e %9.2e %9.2e)\n",
                         it, pres, dres, mu, tau_, kap_, cand.kkt_residuals.primal_feas,
                         cand.kkt_residuals.dual_feas, cand.kkt_residuals.duality_gap);
        }
        const double cand_metric =
            std::max({cand.kkt_residuals.primal_feas, cand.kkt_residuals.dual_feas,
                      cand.kkt_residuals.duality_gap});
        if (cand_metric < best_metric) {
            best_metric = cand_metric;
            best = cand;
            have_best = true;
        }
        if (cand.kkt_residuals.primal_feas <= opts_.feas_tol &&
            cand.kkt_residuals.dual_feas <= opts_.feas_tol &&
            cand.kkt_residuals.duality_gap <= opts_.gap_tol) {
            best = cand;
            final_status = SolveStatus::Optimal;
            decided = true;
            break;
        }

        // Infeasibility certificates.
        if ((hz + by) / std::max(ny + nz, 1.0) < -reltol_gate) {
            const double pinfres = hresx / std::max(ny + nz, 1.0);
            if (pinfres < feastol_inf && tau_ < kap_) {
                final_status = SolveStatus::Infeasible;
                decided = true;
                break;
            }
        }
        if (cx / std::max(nx, 1.0) < -reltol_gate) {
            const double dinfres =
                std::max(p_ > 0 ? hresy / std::max(nx, 1.0) : 0.0, hresz / std::max(nx + ns, 1.0));
            if (dinfres < feastol_inf && tau_ < kap_) {
                final_status = SolveStatus::Unbounded;
                decided = true;
                break;
            }
        }

        if (it == iter_cap) break;
        if (!update_scalings()) break;
        if (!assemble_and_factor()) break;

        // Static right-hand side (-c, b, h).
        kkt_solve(-c_, beq_, h_, dx1, dy1, dz1);
        const double dtau_denom =
            kap_ / tau_ - (c_.dot(dx1) + (p_ > 0 ? beq_.dot(dy1) : 0.0) + h_.dot(dz1));

        // Affine (predictor) direction.
        kkt_solve(rx, -ry, s_ - rz, dx2, dy2, dz2);
        const double dtauaff =
            (rt - kap_ + c_.dot(dx2) + (p_ > 0 ? beq_.dot(dy2) : 0.0) + h_.dot(dz2)) / dtau_denom;
        dz2 += dtauaff * dz1;
        apply_W(dz2, W_dz);
        ds_by_W = -W_dz - lambda_;
        const double dkapaff = -kap_ - (kap_ / tau_) * dtauaff;
        const double alpha_aff = line_search(ds_by_W, W_dz, tau_, dtauaff, kap_, dkapaff);

        const double sigma = std::clamp(std::pow(1.0 - alpha_aff, 3), kSigmaMin, kSigmaMax);
        const double sigmamu = sigma * mu;

        // Combined (corrector) direction.
        conic_product(lambda_, lambda_, lam_sq);
        Eigen::VectorXd mehrotra;
        conic_product(ds_by_W, W_dz, mehrotra);
        ds_combined = lam_sq + mehrotra;
        for (int i = 0; i < nlp_; ++i) ds_combined[i] -= sigmamu;
        for (const SocBlock& blk : socs_) ds_combined[blk.offset] -= sigmamu;

        Eigen::VectorXd dsbar;
        conic_division(lambda_, ds_combined, dsbar);
        Eigen::VectorXd W_dsbar;
        apply_W(dsbar, W_dsbar);

        const double oms = 1.0 - sigma;
        kkt_solve(oms * rx, -oms * ry, -oms * rz + W_dsbar, dx2, dy2, dz2);

        const double bkap = kap_ * tau_ + dkapaff * dtauaff - sigmamu;
        const double dtau = (oms * rt - bkap / tau_ + c_.dot(dx2) +
                             (p_ > 0 ? beq_.dot(dy2) : 0.0) + h_.dot(dz2)) /
                            dtau_denom;
        dx2 += dtau * dx1;
        if (p_ > 0) dy2 += dtau * dy1;
        dz2 += dtau * dz1;

        apply_W(dz2, W_dz);
        ds_by_W = -(dsbar + W_dz);
        const double dkap = -(bkap + kap_ * dtau) / tau_;

        const double alpha = kGammaStep * line_search(ds_by_W, W_dz, tau_, dtau, kap_, dkap);
        apply_W(ds_by_W, ds_final);

        x_ += alpha * dx2;
        if (p_ > 0) y_ += alpha * dy2;
        z_ += alpha * dz2;
        s_ += alpha * ds_final;
        kap_ += alpha * dkap;
        tau_ += alpha * dtau;

        if (alpha <= 2.0 * kStepMin) {
            if (++slow_steps >= 3) break;
        } else {
            slow_steps = 0;
        }
    }

    ConicSolution sol;
    if (decided && final_status != SolveStatus::Optimal) {
        // Infeasibility: report the certifying iterate.
        sol = materialize(x_, y_, z_, tau_);
        sol.kkt_residuals = check_kkt(prog_, sol);
    } else if (have_best) {
        sol = best;
        if (!decided &&
            sol.kkt_residuals.primal_feas <= opts_.feas_tol &&
            sol.kkt_residuals.dual_feas <= opts_.feas_tol &&
            sol.kkt_residuals.duality_gap <= opts_.gap_tol) {
            final_status = SolveStatus::Optimal;
        }
    } else {
        sol = materialize(x_, y_, z_, tau_);
        sol.kkt_residuals = check_kkt(prog_, sol);
    }
    sol.status = final_status;
    sol.iterations = it;
    return sol;
}

}  // namespace

ConicSolution solve(const ConicProgram& prog, const SolverOptions& opts) {
    validate_program(prog);
    if (!(opts.feas_tol > 0.0) || !(opts.gap_tol > 0.0)) {
        throw std::invalid_argument("SolverOptions: tolerances must be positive");
    }
    Ipm ipm(prog, opts);
    return ipm.run();
}

KktResiduals check_kkt(const ConicProgram& prog, const ConicSolution& sol) {
    validate_program(prog);
    const Eigen::VectorXd& x = sol.x;
    KktResiduals res;

    double primal = 0.0;
    for (const EqualityConstraint& eq : prog.equalities) {
        primal = std::max(primal, std::abs(eq.row.dot(x) - eq.value));
    }
    for (const SocConstraint& cone : prog.cones) {
        primal = std::max(primal, cone_arg(cone, x).norm() - bound_value(cone, x));
    }
    res.primal_feas = std::max(primal, 0.0);

    // Stationarity: c + Aeq' y - sum_i (g_i z0_i + A_i' z1_i) = 0, z in K.
    Eigen::VectorXd rd = prog.objective;
    double dual_obj = 0.0;
    double dual_cone_viol = 0.0;
    const bool have_duals = sol.cone_duals.size() == prog.cones.size() &&
                            sol.eq_duals.size() == static_cast<Eigen::Index>(prog.equalities.size());
    if (have_duals) {
        for (size_t i = 0; i < prog.equalities.size(); ++i) {
            rd += sol.eq_duals[static_cast<Eigen::Index>(i)] * prog.equalities[i].row;
            dual_obj -= sol.eq_duals[static_cast<Eigen::Index>(i)] * prog.equalities[i].value;
        }
        for (size_t i = 0; i < prog.cones.size(); ++i) {
            const SocConstraint& cone = prog.cones[i];
            const Eigen::VectorXd& zi = sol.cone_duals[i];
            if (zi.size() != cone.A.rows() + 1) {
                throw std::invalid_argument("check_kkt: cone dual has wrong dimension");
            }
            const double z0 = zi[0];
            const auto z1 = zi.tail(zi.size() - 1);
            if (cone.affine_bound) rd -= z0 * cone.g;
            if (cone.A.rows() > 0) {
                rd.segment(cone.col_offset, cone.A.cols()).noalias() -= cone.A.transpose() * z1;
            }
            dual_obj -= cone.h * z0 + cone.b.dot(z1);
            dual_cone_viol = std::max(dual_cone_viol, z1.norm() - z0);
        }
        res.dual_feas = std::max(rd.lpNorm<Eigen::Infinity>() /
                                     std::max(1.0, prog.objective.lpNorm<Eigen::Infinity>()),
                                 std::max(dual_cone_viol, 0.0));
        const double pobj = prog.objective.dot(x);
        res.duality_gap = std::abs(pobj - dual_obj) / std::max(1.0, std::abs(pobj));
    } else {
        res.dual_feas = std::numeric_limits<double>::infinity();
        res.duality_gap = std::numeric_limits<double>::infinity();
    }
    return res;
}

void dump_program(const ConicProgram& prog, std::ostream& os) {
    const auto put = [&os](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        os << buf;
    };
    os << "conic_program num_vars=" << prog.num_vars << " cones=" << prog.cones.size()
       << " equalities=" << prog.equalities.size() << "\n";
    os << "objective:";
    for (int i = 0; i < prog.objective.size(); ++i) {
        os << ' ';
        put(prog.objective[i]);
    }
    os << "\n";
    for (size_t i = 0; i < prog.cones.size(); ++i) {
        const SocConstraint& cone = prog.cones[i];
        os << "cone " << i << " rows=" << cone.A.rows() << " col_offset=" << cone.col_offset
           << " bound=" << (cone.affine_bound ? "affine" : "constant") << " h=";
        put(cone.h);
        os << "\n";
        if (cone.affine_bound) {
            os << "  g:";
            for (int j = 0; j < cone.g.size(); ++j) {
                os << ' ';
                put(cone.g[j]);
            }
            os << "\n";
        }
        for (int r = 0; r < cone.A.rows(); ++r) {
            os << "  A[" << r << "]:";
            for (int j = 0; j < cone.A.cols(); ++j) {
                os << ' ';
                put(cone.A(r, j));
            }
            os << "  b=";
            put(cone.b[r]);
            os << "\n";
        }
    }
    for (size_t i = 0; i < prog.equalities.size(); ++i) {
        os << "equality " << i << " value=";
        put(prog.equalities[i].value);
        os << " row:";
        for (int j = 0; j < prog.equalities[i].row.size(); ++j) {
            os << ' ';
            put(prog.equalities[i].row[j]);
        }
        os << "\n";
    }
}

}  // namespace trisynth
