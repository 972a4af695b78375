#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "chp/common.hpp"

namespace chp {

// Convex quadratic program in standard form:
//   minimize    0.5 x'Px + q'x
//   subject to  Ax = b          (equalities, multiplier y)
//               Gx <= h         (inequalities, multiplier z >= 0)
// P is positive semidefinite and stored full-symmetric.
struct QpProblem {
  Eigen::SparseMatrix<double> P;
  Eigen::VectorXd q;
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd b;
  Eigen::SparseMatrix<double> G;
  Eigen::VectorXd h;

  int vars() const { return static_cast<int>(q.size()); }
  int eqs() const { return static_cast<int>(b.size()); }
  int ineqs() const { return static_cast<int>(h.size()); }

  double objective(const Eigen::VectorXd& x) const {
    return 0.5 * x.dot(P * x) + q.dot(x);
  }
};

enum class QpStatus { Optimal, Infeasible, Unbounded, NumericalFailure, MaxIterations };

inline const char* to_string(QpStatus s) {
  switch (s) {
    case QpStatus::Optimal: return "optimal";
    case QpStatus::Infeasible: return "infeasible";
    case QpStatus::Unbounded: return "unbounded";
    case QpStatus::NumericalFailure: return "numerical_failure";
    case QpStatus::MaxIterations: return "max_iterations";
  }
  return "?";
}

// Max-norm residuals of the KKT system, measured after row scaling.
struct QpResiduals {
  double stationarity = std::numeric_limits<double>::quiet_NaN();
  double primal_eq = std::numeric_limits<double>::quiet_NaN();
  double primal_ineq = std::numeric_limits<double>::quiet_NaN();
  double complementarity = std::numeric_limits<double>::quiet_NaN();
  double dual_sign = std::numeric_limits<double>::quiet_NaN();  // max(0, -min z)

  double worst() const {
    return std::max({stationarity, primal_eq, primal_ineq, complementarity, dual_sign});
  }
};

struct QpSettings {
  double tolerance = 1e-10;       // target for scaled residuals and relative gap
  double accept_tolerance = 1e-8; // fallback acceptance when progress stalls
  int max_iterations = 100;
  bool scale_rows = true;
  bool polish = true;
  bool infeasibility_probe = true;  // run the phase-1 feasibility QP on failure
  double reg_primal = 1e-9;
  double reg_dual = 1e-9;
  int refine_steps = 2;
};

struct QpSolution {
  QpStatus status = QpStatus::NumericalFailure;
  Eigen::VectorXd x, y, z, s;
  double objective = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  bool polished = false;
  QpResiduals residuals;
  std::string message;
  std::vector<int> infeasible_rows;  // inequality rows implicated by the probe (or -1-k for eq k)
};

namespace qp_detail {

inline Eigen::VectorXd row_inf_norms(const Eigen::SparseMatrix<double>& m) {
  Eigen::VectorXd norms = Eigen::VectorXd::Zero(m.rows());
  for (int k = 0; k < m.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
      norms[it.row()] = std::max(norms[it.row()], std::abs(it.value()));
  return norms;
}

inline Eigen::SparseMatrix<double> scale_rows_of(const Eigen::SparseMatrix<double>& m,
                                                 const Eigen::VectorXd& d) {
  Eigen::SparseMatrix<double> out = m;
  for (int k = 0; k < out.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(out, k); it; ++it)
      it.valueRef() *= d[it.row()];
  return out;
}

inline double inf_norm(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

// Symmetric quasidefinite KKT operator
//   [ P + rI   A'        G'      ]
//   [ A       -dI        0       ]
//   [ G        0        -W - dI  ]
// with W = diag(s/z). Factorized with a sparse LDL'; solves are refined
// against the unregularized operator.
class KktSystem {
 public:
  KktSystem(const Eigen::SparseMatrix<double>& P, const Eigen::SparseMatrix<double>& A,
            const Eigen::SparseMatrix<double>& G, double reg_p, double reg_d)
      : n_(static_cast<int>(P.rows())),
        me_(static_cast<int>(A.rows())),
        mi_(static_cast<int>(G.rows())),
        P_(&P), A_(&A), G_(&G), reg_p_(reg_p), reg_d_(reg_d) {
    dim_ = n_ + me_ + mi_;
    base_.reserve(P.nonZeros() + 2 * A.nonZeros() + 2 * G.nonZeros() + dim_);
    for (int k = 0; k < P.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(P, k); it; ++it)
        base_.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (int k = 0; k < A.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
        base_.emplace_back(n_ + static_cast<int>(it.row()), static_cast<int>(it.col()),
                           it.value());
        base_.emplace_back(static_cast<int>(it.col()), n_ + static_cast<int>(it.row()),
                           it.value());
      }
    for (int k = 0; k < G.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(G, k); it; ++it) {
        base_.emplace_back(n_ + me_ + static_cast<int>(it.row()), static_cast<int>(it.col()),
                           it.value());
        base_.emplace_back(static_cast<int>(it.col()), n_ + me_ + static_cast<int>(it.row()),
                           it.value());
      }
    analyzed_ = false;
  }

  // w: the diagonal of the (3,3) block, positive values (s/z); may be empty
  // when there are no inequalities. extra_reg bumps both regularizations when
  // a factorization needs rescuing.
  bool factorize(const Eigen::VectorXd& w, double extra_reg = 0.0) {
    w_ = w;
    std::vector<Eigen::Triplet<double>> trips = base_;
    for (int i = 0; i < n_; ++i) trips.emplace_back(i, i, reg_p_ + extra_reg);
    for (int i = 0; i < me_; ++i) trips.emplace_back(n_ + i, n_ + i, -(reg_d_ + extra_reg));
    for (int i = 0; i < mi_; ++i)
      trips.emplace_back(n_ + me_ + i, n_ + me_ + i, -(w[i] + reg_d_ + extra_reg));
    Eigen::SparseMatrix<double> kkt(dim_, dim_);
    kkt.setFromTriplets(trips.begin(), trips.end());
    if (!analyzed_) {
      ldlt_.analyzePattern(kkt);
      analyzed_ = true;
    }
    ldlt_.factorize(kkt);
    return ldlt_.info() == Eigen::Success;
  }

  // residual of the *unregularized* operator
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
    Eigen::VectorXd x = v.head(n_), y = v.segment(n_, me_), z = v.tail(mi_);
    Eigen::VectorXd out(dim_);
    out.head(n_) = (*P_) * x + A_->transpose() * y + G_->transpose() * z;
    out.segment(n_, me_) = (*A_) * x;
    out.tail(mi_) = (*G_) * x - w_.cwiseProduct(z);
    return out;
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs, int refine_steps) const {
    Eigen::VectorXd sol = ldlt_.solve(rhs);
    for (int i = 0; i < refine_steps; ++i) {
      Eigen::VectorXd r = rhs - apply(sol);
      sol += ldlt_.solve(r);
    }
    return sol;
  }

  int n() const { return n_; }
  int me() const { return me_; }
  int mi() const { return mi_; }

 private:
  int n_, me_, mi_, dim_;
  const Eigen::SparseMatrix<double>*P_, *A_, *G_;
  double reg_p_, reg_d_;
  std::vector<Eigen::Triplet<double>> base_;
  Eigen::VectorXd w_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  bool analyzed_;
};

}  // namespace qp_detail

QpSolution solve_qp(const QpProblem& prob, const QpSettings& settings = {});

namespace qp_detail {

// Phase-1 feasibility probe. Minimizes slack violations
//   min 0.5|u|^2 + 0.5|Ax - b|^2   s.t.  Gx - u <= h, u >= 0,
// which is strictly feasible and bounded. A strictly positive optimum is an
// infeasibility witness; rows with active slack are reported.
inline void infeasibility_probe(const QpProblem& prob, QpSolution& sol) {
  const int n = prob.vars(), mi = prob.ineqs(), me = prob.eqs();
  QpProblem p1;
  std::vector<Eigen::Triplet<double>> pt, gt;
  for (int i = 0; i < mi; ++i) pt.emplace_back(n + i, n + i, 1.0);
  Eigen::SparseMatrix<double> ata(n, n);
  if (me > 0) {
    ata = Eigen::SparseMatrix<double>(prob.A.transpose() * prob.A);
    for (int k = 0; k < ata.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(ata, k); it; ++it)
        pt.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  }
  p1.P = Eigen::SparseMatrix<double>(n + mi, n + mi);
  p1.P.setFromTriplets(pt.begin(), pt.end());
  p1.q = Eigen::VectorXd::Zero(n + mi);
  if (me > 0) p1.q.head(n) = -prob.A.transpose() * prob.b;
  p1.A = Eigen::SparseMatrix<double>(0, n + mi);
  p1.b = Eigen::VectorXd(0);
  for (int k = 0; k < prob.G.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(prob.G, k); it; ++it)
      gt.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (int i = 0; i < mi; ++i) {
    gt.emplace_back(i, n + i, -1.0);
    gt.emplace_back(mi + i, n + i, -1.0);
  }
  p1.G = Eigen::SparseMatrix<double>(2 * mi, n + mi);
  p1.G.setFromTriplets(gt.begin(), gt.end());
  p1.h = Eigen::VectorXd::Zero(2 * mi);
  p1.h.head(mi) = prob.h;

  QpSettings s1;
  s1.polish = false;
  s1.infeasibility_probe = false;
  s1.tolerance = 1e-10;
  QpSolution r1 = solve_qp(p1, s1);
  if (r1.status != QpStatus::Optimal && r1.status != QpStatus::MaxIterations) return;

  double feas_scale = 1.0 + std::max(inf_norm(prob.h), inf_norm(prob.b));
  Eigen::VectorXd u = r1.x.tail(mi);
  Eigen::VectorXd eq_gap =
      me > 0 ? Eigen::VectorXd(prob.A * r1.x.head(n) - prob.b) : Eigen::VectorXd(0);
  double worst = std::max(mi > 0 ? inf_norm(u) : 0.0, me > 0 ? inf_norm(eq_gap) : 0.0);
  if (worst > 1e-6 * feas_scale) {
    sol.status = QpStatus::Infeasible;
    sol.message = "infeasible: minimum constraint violation " + num_str(worst);
    for (int i = 0; i < mi; ++i)
      if (u[i] > 1e-6 * feas_scale) sol.infeasible_rows.push_back(i);
    for (int i = 0; i < me; ++i)
      if (std::abs(eq_gap[i]) > 1e-6 * feas_scale) sol.infeasible_rows.push_back(-1 - i);
  }
}

}  // namespace qp_detail

// Mehrotra predictor-corrector interior-point method on the row-scaled
// problem, with iterative refinement of every KKT solve and an optional
// active-set polish. Deterministic: fixed iteration order, no randomness.
inline QpSolution solve_qp(const QpProblem& prob, const QpSettings& settings) {
  using namespace qp_detail;
  const int n = prob.vars(), me = prob.eqs(), mi = prob.ineqs();
  QpSolution sol;
  sol.x = Eigen::VectorXd::Zero(n);
  sol.y = Eigen::VectorXd::Zero(me);
  sol.z = Eigen::VectorXd::Zero(mi);
  sol.s = Eigen::VectorXd::Zero(mi);

  // --- row scaling ---
  Eigen::VectorXd da = Eigen::VectorXd::Ones(me), dg = Eigen::VectorXd::Ones(mi);
  if (settings.scale_rows) {
    Eigen::VectorXd na = row_inf_norms(prob.A), ng = row_inf_norms(prob.G);
    for (int i = 0; i < me; ++i) da[i] = na[i] > 1e-12 ? 1.0 / na[i] : 1.0;
    for (int i = 0; i < mi; ++i) dg[i] = ng[i] > 1e-12 ? 1.0 / ng[i] : 1.0;
  }
  const Eigen::SparseMatrix<double> A = scale_rows_of(prob.A, da);
  const Eigen::SparseMatrix<double> G = scale_rows_of(prob.G, dg);
  const Eigen::VectorXd b = da.cwiseProduct(prob.b);
  const Eigen::VectorXd h = dg.cwiseProduct(prob.h);

  auto unscale_into = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& z, const Eigen::VectorXd& s) {
    sol.x = x;
    sol.y = da.cwiseProduct(y);
    sol.z = dg.cwiseProduct(z);
    sol.s = mi > 0 ? Eigen::VectorXd(s.cwiseQuotient(dg)) : s;
    sol.objective = prob.objective(x);
  };

  auto scaled_residuals = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& z) {
    QpResiduals r;
    Eigen::VectorXd rd = prob.P * x + prob.q + A.transpose() * y + G.transpose() * z;
    r.stationarity = inf_norm(rd);
    r.primal_eq = me > 0 ? inf_norm(Eigen::VectorXd(A * x - b)) : 0.0;
    if (mi > 0) {
      Eigen::VectorXd gap = G * x - h;
      r.primal_ineq = std::max(0.0, gap.maxCoeff());
      r.complementarity = gap.cwiseProduct(z).cwiseAbs().maxCoeff();
      r.dual_sign = std::max(0.0, -z.minCoeff());
    } else {
      r.primal_ineq = 0.0;
      r.complementarity = 0.0;
      r.dual_sign = 0.0;
    }
    return r;
  };

  // --- equality-only problems: one refined KKT solve ---
  if (mi == 0) {
    KktSystem kkt(prob.P, A, G, settings.reg_primal, settings.reg_dual);
    if (!kkt.factorize(Eigen::VectorXd(0))) {
      sol.message = "KKT factorization failed";
      return sol;
    }
    Eigen::VectorXd rhs(n + me);
    rhs.head(n) = -prob.q;
    rhs.tail(me) = b;
    Eigen::VectorXd v = kkt.solve(rhs, settings.refine_steps + 2);
    unscale_into(v.head(n), v.segment(n, me), Eigen::VectorXd(0), Eigen::VectorXd(0));
    sol.residuals = scaled_residuals(v.head(n), v.segment(n, me), Eigen::VectorXd(0));
    sol.status = sol.residuals.worst() < settings.accept_tolerance
                     ? QpStatus::Optimal
                     : QpStatus::NumericalFailure;
    if (sol.status == QpStatus::NumericalFailure && settings.infeasibility_probe)
      infeasibility_probe(prob, sol);
    return sol;
  }

  // --- interior-point iteration ---
  KktSystem kkt(prob.P, A, G, settings.reg_primal, settings.reg_dual);

  // starting point: equality-regularized least-squares for x, unit slacks
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  const Eigen::SparseMatrix<double> empty_g(0, n);
  {
    KktSystem init(prob.P, A, empty_g, 1e-6, 1e-6);
    if (init.factorize(Eigen::VectorXd(0))) {
      Eigen::VectorXd rhs(n + me);
      rhs.head(n) = -prob.q;
      rhs.tail(me) = b;
      x = init.solve(rhs, 1).head(n);
    }
  }
  Eigen::VectorXd s(mi), z(mi), y = Eigen::VectorXd::Zero(me);
  {
    Eigen::VectorXd slack = h - G * x;
    double shift = std::max(0.0, 1.0 - slack.minCoeff());
    for (int i = 0; i < mi; ++i) s[i] = slack[i] + shift;
    z.setOnes();
  }

  const double obj_scale = 1.0 + std::abs(prob.objective(x));
  double best_worst = std::numeric_limits<double>::infinity();
  Eigen::VectorXd bx = x, by = y, bz = z, bs = s;
  int stall = 0;

  for (int iter = 1; iter <= settings.max_iterations; ++iter) {
    sol.iterations = iter;
    Eigen::VectorXd rd = prob.P * x + prob.q + A.transpose() * y + G.transpose() * z;
    Eigen::VectorXd rp = A * x - b;
    Eigen::VectorXd rg = G * x + s - h;
    double mu = s.dot(z) / mi;
    double obj = prob.objective(x);

    double rel_d = inf_norm(rd) / (1.0 + std::max({inf_norm(prob.q),
                                                   inf_norm(Eigen::VectorXd(prob.P * x)),
                                                   inf_norm(Eigen::VectorXd(G.transpose() * z))}));
    double rel_p = me > 0 ? inf_norm(rp) / (1.0 + inf_norm(b)) : 0.0;
    double rel_g = inf_norm(rg) / (1.0 + inf_norm(h));
    double rel_mu = mu / (1.0 + std::abs(obj));
    double worst = std::max({rel_d, rel_p, rel_g, rel_mu});

    if (worst < best_worst * 0.99) {
      best_worst = worst;
      bx = x; by = y; bz = z; bs = s;
      stall = 0;
    } else {
      ++stall;
    }

    if (worst <= settings.tolerance) break;
    if (stall >= 8) break;  // no further progress; fall through to classification
    if (inf_norm(x) > 1e13 && obj < -1e13 * obj_scale) {
      sol.status = QpStatus::Unbounded;
      sol.message = "diverging objective";
      unscale_into(x, y, z, s);
      return sol;
    }

    Eigen::VectorXd w = s.cwiseQuotient(z);
    bool ok = kkt.factorize(w);
    for (double bump = 1e-7; !ok && bump <= 1e-3; bump *= 100) ok = kkt.factorize(w, bump);
    if (!ok) {
      sol.message = "KKT factorization failed";
      break;
    }

    auto solve_direction = [&](const Eigen::VectorXd& rc) {
      Eigen::VectorXd rhs(n + me + mi);
      rhs.head(n) = -rd;
      rhs.segment(n, me) = -rp;
      rhs.tail(mi) = -rg + rc.cwiseQuotient(z);
      Eigen::VectorXd v = kkt.solve(rhs, settings.refine_steps);
      Eigen::VectorXd dz = v.tail(mi);
      Eigen::VectorXd ds = -(rc.cwiseQuotient(z)) - w.cwiseProduct(dz);
      return std::make_tuple(Eigen::VectorXd(v.head(n)), Eigen::VectorXd(v.segment(n, me)),
                             dz, ds);
    };

    auto step_len = [&](const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
      double alpha = 1.0;
      for (int i = 0; i < v.size(); ++i)
        if (dv[i] < 0) alpha = std::min(alpha, -v[i] / dv[i]);
      return alpha;
    };

    // predictor
    auto [dx_a, dy_a, dz_a, ds_a] = solve_direction(s.cwiseProduct(z));
    double ap_a = step_len(s, ds_a), ad_a = step_len(z, dz_a);
    double mu_aff = (s + ap_a * ds_a).dot(z + ad_a * dz_a) / mi;
    double sigma = std::pow(mu_aff / mu, 3);
    sigma = std::min(std::max(sigma, 1e-8), 1.0 - 1e-8);

    // corrector
    Eigen::VectorXd rc =
        s.cwiseProduct(z) + ds_a.cwiseProduct(dz_a) - Eigen::VectorXd::Constant(mi, sigma * mu);
    auto [dx, dy, dz, ds] = solve_direction(rc);
    double eta = 0.995;
    double ap = std::min(1.0, eta * step_len(s, ds));
    double ad = std::min(1.0, eta * step_len(z, dz));
    x += ap * dx;
    s += ap * ds;
    y += ad * dy;
    z += ad * dz;
  }

  // classify from the best iterate
  x = bx; y = by; z = bz; s = bs;
  unscale_into(x, y, z, s);
  sol.residuals = scaled_residuals(x, y, z);
  {
    double mu = mi > 0 ? s.dot(z) / mi : 0.0;
    double rel_mu = mu / (1.0 + std::abs(prob.objective(x)));
    double worst = std::max(sol.residuals.worst(), rel_mu);
    if (worst <= settings.accept_tolerance) {
      sol.status = QpStatus::Optimal;
    } else if (sol.iterations >= settings.max_iterations) {
      sol.status = QpStatus::MaxIterations;
      sol.message = "no convergence in " + std::to_string(sol.iterations) + " iterations";
    } else {
      sol.status = QpStatus::NumericalFailure;
      if (sol.message.empty())
        sol.message = "stalled at scaled residual " + num_str(worst);
    }
  }

  if (sol.status != QpStatus::Optimal && settings.infeasibility_probe)
    infeasibility_probe(prob, sol);

  // --- polish: refactor on the apparent active set ---
  if (sol.status == QpStatus::Optimal && settings.polish) {
    std::vector<int> active;
    for (int i = 0; i < mi; ++i)
      if (z[i] > s[i]) active.push_back(i);
    const int ma = static_cast<int>(active.size());
    std::vector<Eigen::Triplet<double>> gt;
    Eigen::VectorXd hh(ma);
    for (int k = 0; k < ma; ++k) hh[k] = h[active[k]];
    for (int c = 0; c < G.outerSize(); ++c)
      for (Eigen::SparseMatrix<double>::InnerIterator it(G, c); it; ++it) {
        auto pos = std::lower_bound(active.begin(), active.end(), static_cast<int>(it.row()));
        if (pos != active.end() && *pos == it.row())
          gt.emplace_back(static_cast<int>(pos - active.begin()),
                          static_cast<int>(it.col()), it.value());
      }
    Eigen::SparseMatrix<double> Ga(ma, n);
    Ga.setFromTriplets(gt.begin(), gt.end());

    KktSystem pol(prob.P, A, Ga, settings.reg_primal, settings.reg_dual);
    if (pol.factorize(Eigen::VectorXd::Zero(ma))) {
      Eigen::VectorXd rhs(n + me + ma);
      rhs.head(n) = -prob.q;
      rhs.segment(n, me) = b;
      rhs.tail(ma) = hh;
      Eigen::VectorXd v = pol.solve(rhs, settings.refine_steps + 2);
      Eigen::VectorXd px = v.head(n), py = v.segment(n, me);
      Eigen::VectorXd pz = Eigen::VectorXd::Zero(mi);
      bool sign_ok = true;
      for (int k = 0; k < ma; ++k) {
        double zi = v[n + me + k];
        if (zi < -1e-9) { sign_ok = false; break; }
        pz[active[k]] = std::max(zi, 0.0);
      }
      if (sign_ok) {
        Eigen::VectorXd slack = h - G * px;
        double worst_viol = std::max(0.0, -slack.minCoeff());
        QpResiduals pr = scaled_residuals(px, py, pz);
        if (worst_viol <= 1e-9 && pr.worst() <= std::max(sol.residuals.worst(), 1e-12)) {
          unscale_into(px, py, pz, slack.cwiseMax(0.0));
          sol.residuals = pr;
          sol.polished = true;
        }
      }
    }
  }
  return sol;
}

// Writes the program in LP interchange format for third-party cross-checks.
// Variable/constraint names come from the callbacks.
inline void write_lp(std::ostream& os, const QpProblem& prob,
                     const std::function<std::string(int)>& var_name,
                     const std::function<std::string(int)>& eq_name,
                     const std::function<std::string(int)>& ineq_name) {
  os << "\\ generated by chpmarket\nMinimize\n obj:";
  for (int i = 0; i < prob.q.size(); ++i)
    if (prob.q[i] != 0.0)
      os << (prob.q[i] < 0 ? " - " : " + ") << num_str(std::abs(prob.q[i])) << " "
         << var_name(i);
  bool has_quad = prob.P.nonZeros() > 0;
  if (has_quad) {
    os << " + [";
    bool first = true;
    for (int k = 0; k < prob.P.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(prob.P, k); it; ++it) {
        if (it.row() > it.col() || it.value() == 0.0) continue;
        double coeff = it.row() == it.col() ? it.value() : 2.0 * it.value();
        os << (coeff < 0 ? " - " : first ? " " : " + ") << num_str(std::abs(coeff)) << " "
           << var_name(static_cast<int>(it.row()));
        if (it.row() == it.col()) os << " ^ 2";
        else os << " * " << var_name(static_cast<int>(it.col()));
        first = false;
      }
    os << " ] / 2";
  }
  os << "\nSubject To\n";
  Eigen::SparseMatrix<double, Eigen::RowMajor> ar(prob.A), gr(prob.G);
  for (int row = 0; row < ar.rows(); ++row) {
    os << " " << eq_name(row) << ":";
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(ar, row); it; ++it)
      if (it.value() != 0.0)
        os << (it.value() < 0 ? " - " : " + ") << num_str(std::abs(it.value())) << " "
           << var_name(static_cast<int>(it.col()));
    os << " = " << num_str(prob.b[row]) << "\n";
  }
  for (int row = 0; row < gr.rows(); ++row) {
    os << " " << ineq_name(row) << ":";
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(gr, row); it; ++it)
      if (it.value() != 0.0)
        os << (it.value() < 0 ? " - " : " + ") << num_str(std::abs(it.value())) << " "
           << var_name(static_cast<int>(it.col()));
    os << " <= " << num_str(prob.h[row]) << "\n";
  }
  os << "Bounds\n";
  for (int i = 0; i < prob.vars(); ++i) os << " " << var_name(i) << " free\n";
  os << "End\n";
}

}  // namespace chp
