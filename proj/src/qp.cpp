/* SPDX-License-Identifier: Apache-2.0 */
#include "stlsynth/qp.hpp"

#include "stlsynth/log.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace stlsynth::qp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inf_norm(const Vector &v) {
  return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
}

bool is_diagonal(const RowMatrix &P) {
  for (Eigen::Index r = 0; r < P.rows(); ++r)
    for (RowMatrix::InnerIterator it(P, r); it; ++it)
      if (it.row() != it.col() && it.value() != 0.0) return false;
  return true;
}

} // namespace

void Problem::validate() const {
  const int h = num_vars();
  if (P.rows() != h || P.cols() != h)
    throw std::invalid_argument("P must be h x h");
  if (A_in.rows() != b_in.size() || (A_in.rows() > 0 && A_in.cols() != h))
    throw std::invalid_argument("inequality block dimensions inconsistent");
  if (A_eq.rows() != b_eq.size() || (A_eq.rows() > 0 && A_eq.cols() != h))
    throw std::invalid_argument("equality block dimensions inconsistent");

  // symmetry
  Eigen::SparseMatrix<double> Pc = P;
  Eigen::SparseMatrix<double> diff = Pc - Eigen::SparseMatrix<double>(Pc.transpose());
  double asym = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(diff, k); it; ++it)
      asym = std::max(asym, std::abs(it.value()));
  if (asym > 1e-8)
    throw std::invalid_argument("P is not symmetric");

  // eigenvalue floor -1e-8 on the symmetric part
  if (is_diagonal(P)) {
    for (Eigen::Index r = 0; r < P.rows(); ++r)
      for (RowMatrix::InnerIterator it(P, r); it; ++it)
        if (it.value() < -1e-8)
          throw std::invalid_argument("P has a negative diagonal entry");
  } else if (h <= 400) {
    Eigen::MatrixXd dense = Eigen::MatrixXd(Pc);
    dense = 0.5 * (dense + dense.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-8)
      throw std::invalid_argument("P is not positive semidefinite");
  }
}

namespace {

struct Workspace {
  int h = 0;  // variables
  int mr = 0; // merged constraint rows (eq first)
  int n_eq = 0;

  // original data
  RowMatrix Po, Ao, ATo;
  Vector qo, lo, uo;

  // Ruiz-equilibrated data the iteration runs on
  RowMatrix P, A, AT;
  Vector q, l, u;
  Vector D, E; // variable / constraint scalings, x = D xs, y = E ys / c
  double c = 1.0;

  Vector rho, rho_inv;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  double sigma = 1e-6;

  void equilibrate(int rounds) {
    D = Vector::Ones(h);
    E = Vector::Ones(mr);
    c = 1.0;
    Vector colnorm(h), rownorm(mr);
    for (int round = 0; round < rounds; ++round) {
      colnorm.setZero();
      rownorm.setZero();
      for (Eigen::Index r = 0; r < P.rows(); ++r)
        for (RowMatrix::InnerIterator it(P, r); it; ++it)
          colnorm[it.col()] = std::max(colnorm[it.col()], std::abs(it.value()));
      for (Eigen::Index r = 0; r < A.rows(); ++r)
        for (RowMatrix::InnerIterator it(A, r); it; ++it) {
          colnorm[it.col()] = std::max(colnorm[it.col()], std::abs(it.value()));
          rownorm[it.row()] = std::max(rownorm[it.row()], std::abs(it.value()));
        }
      Vector d(h), e(mr);
      for (int j = 0; j < h; ++j)
        d[j] = colnorm[j] > 1e-12 ? 1.0 / std::sqrt(colnorm[j]) : 1.0;
      for (int i = 0; i < mr; ++i)
        e[i] = rownorm[i] > 1e-12 ? 1.0 / std::sqrt(rownorm[i]) : 1.0;

      for (Eigen::Index r = 0; r < P.rows(); ++r)
        for (RowMatrix::InnerIterator it(P, r); it; ++it)
          it.valueRef() *= d[it.row()] * d[it.col()];
      for (Eigen::Index r = 0; r < A.rows(); ++r)
        for (RowMatrix::InnerIterator it(A, r); it; ++it)
          it.valueRef() *= e[it.row()] * d[it.col()];
      q = q.cwiseProduct(d);
      for (int i = 0; i < mr; ++i) {
        if (l[i] != -kInf) l[i] *= e[i];
        if (u[i] != kInf) u[i] *= e[i];
      }
      D = D.cwiseProduct(d);
      E = E.cwiseProduct(e);

      // cost normalization
      double pnorm_mean = 0.0;
      if (P.nonZeros() > 0) {
        colnorm.setZero();
        for (Eigen::Index r = 0; r < P.rows(); ++r)
          for (RowMatrix::InnerIterator it(P, r); it; ++it)
            colnorm[it.col()] = std::max(colnorm[it.col()], std::abs(it.value()));
        pnorm_mean = colnorm.mean();
      }
      const double denom = std::max(pnorm_mean, inf_norm(q));
      if (denom > 1e-12) {
        const double gamma = 1.0 / denom;
        for (Eigen::Index r = 0; r < P.rows(); ++r)
          for (RowMatrix::InnerIterator it(P, r); it; ++it) it.valueRef() *= gamma;
        q *= gamma;
        c *= gamma;
      }
    }
    AT = RowMatrix(A.transpose());
  }

  void build_rho(double base) {
    rho.resize(mr);
    for (int i = 0; i < mr; ++i) rho[i] = i < n_eq ? base * 1e3 : base;
    rho_inv = rho.cwiseInverse();
  }

  bool factorize() {
    Eigen::SparseMatrix<double> kkt(h + mr, h + mr);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(P.nonZeros() + A.nonZeros() * 2 + h + mr);
    for (Eigen::Index r = 0; r < P.rows(); ++r)
      for (RowMatrix::InnerIterator it(P, r); it; ++it)
        trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                          it.value());
    for (int i = 0; i < h; ++i) trip.emplace_back(i, i, sigma);
    for (Eigen::Index r = 0; r < A.rows(); ++r)
      for (RowMatrix::InnerIterator it(A, r); it; ++it) {
        trip.emplace_back(h + static_cast<int>(it.row()), static_cast<int>(it.col()),
                          it.value());
        trip.emplace_back(static_cast<int>(it.col()), h + static_cast<int>(it.row()),
                          it.value());
      }
    for (int i = 0; i < mr; ++i) trip.emplace_back(h + i, h + i, -rho_inv[i]);
    kkt.setFromTriplets(trip.begin(), trip.end());
    ldlt.compute(kkt);
    return ldlt.info() == Eigen::Success;
  }
};

struct Residuals {
  double prim = kInf, dual = kInf, cs = kInf;
  double max3() const { return std::max({prim, dual, cs}); }
};

// Unscaled KKT residuals from the scaled iterate products:
// A x_us = E^-1 (As xs), station_us = D^-1 (Ps xs + qs + ATs ys) / c.
Residuals residuals_from_scaled(const Workspace &w, const Vector &ys,
                                const Vector &Axs, const Vector &station_s,
                                Vector &Ax_us, Vector &y_us) {
  Residuals res;
  Ax_us = Axs.cwiseQuotient(w.E);
  y_us = w.E.cwiseProduct(ys) / w.c;
  res.prim = 0;
  for (int i = 0; i < w.mr; ++i) {
    if (i < w.n_eq) res.prim = std::max(res.prim, std::abs(Ax_us[i] - w.uo[i]));
    else res.prim = std::max(res.prim, Ax_us[i] - w.uo[i]);
  }
  res.prim = std::max(res.prim, 0.0);
  res.dual = 0;
  for (int j = 0; j < w.h; ++j)
    res.dual = std::max(res.dual, std::abs(station_s[j] / w.D[j]) / w.c);
  res.cs = 0;
  for (int i = w.n_eq; i < w.mr; ++i) {
    if (y_us[i] < 0) res.cs = std::max(res.cs, -y_us[i]); // wrong sign
    else res.cs = std::max(res.cs, std::abs(y_us[i] * (w.uo[i] - Ax_us[i])));
  }
  return res;
}

// Residuals of an unscaled candidate (x, y) against the original data.
Residuals residuals_unscaled(const Workspace &w, const Vector &x, const Vector &y) {
  Vector Ax(w.mr), Px(w.h), ATy(w.h);
  kernels::spmv(w.Ao, x, Ax);
  kernels::spmv(w.Po, x, Px);
  kernels::spmv(w.ATo, y, ATy);
  Residuals res;
  res.prim = 0;
  for (int i = 0; i < w.mr; ++i) {
    if (i < w.n_eq) res.prim = std::max(res.prim, std::abs(Ax[i] - w.uo[i]));
    else res.prim = std::max(res.prim, Ax[i] - w.uo[i]);
  }
  res.prim = std::max(res.prim, 0.0);
  res.dual = inf_norm(Px + w.qo + ATy);
  res.cs = 0;
  for (int i = w.n_eq; i < w.mr; ++i) {
    if (y[i] < 0) res.cs = std::max(res.cs, -y[i]);
    else res.cs = std::max(res.cs, std::abs(y[i] * (w.uo[i] - Ax[i])));
  }
  return res;
}

// Reduced KKT solve on a candidate active set (original data) with
// regularization and iterative refinement; writes unscaled (x, y).
bool polish_with_set(const Workspace &w, const std::vector<int> &active, Vector &x,
                     Vector &y) {
  const double delta = 1e-7;
  const int na = static_cast<int>(active.size());
  const int dim = w.h + na;

  std::vector<Eigen::Triplet<double>> trip, trip_reg;
  for (Eigen::Index r = 0; r < w.Po.rows(); ++r)
    for (RowMatrix::InnerIterator it(w.Po, r); it; ++it)
      trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                        it.value());
  for (int a = 0; a < na; ++a)
    for (RowMatrix::InnerIterator it(w.Ao, active[a]); it; ++it) {
      trip.emplace_back(w.h + a, static_cast<int>(it.col()), it.value());
      trip.emplace_back(static_cast<int>(it.col()), w.h + a, it.value());
    }
  trip_reg = trip;
  for (int i = 0; i < w.h; ++i) trip_reg.emplace_back(i, i, delta);
  for (int a = 0; a < na; ++a) trip_reg.emplace_back(w.h + a, w.h + a, -delta);

  Eigen::SparseMatrix<double> K(dim, dim), Kreg(dim, dim);
  K.setFromTriplets(trip.begin(), trip.end());
  Kreg.setFromTriplets(trip_reg.begin(), trip_reg.end());

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Kreg);
  if (ldlt.info() != Eigen::Success) return false;

  Vector rhs(dim);
  rhs.head(w.h) = -w.qo;
  for (int a = 0; a < na; ++a) rhs[w.h + a] = w.uo[active[a]];

  Vector t = Vector::Zero(dim);
  for (int round = 0; round < 8; ++round)
    t += ldlt.solve(rhs - K.selfadjointView<Eigen::Lower>() * t);
  if (!t.allFinite()) return false;

  x = t.head(w.h);
  y.setZero(w.mr);
  for (int a = 0; a < na; ++a) y[active[a]] = t[w.h + a];
  return true;
}

// Try the dual-sign active set first, then a slack-based one; accept the
// first candidate whose exact residuals meet tol.
bool polish(const Workspace &w, const Vector &y_us, const Vector &Ax_us, double tol,
            Vector &x_out, Vector &y_out, Residuals &res_out) {
  std::vector<int> by_dual, by_slack;
  for (int i = 0; i < w.mr; ++i) {
    if (i < w.n_eq) {
      by_dual.push_back(i);
      by_slack.push_back(i);
      continue;
    }
    if (y_us[i] > 1e-12) by_dual.push_back(i);
    if (w.uo[i] - Ax_us[i] <= 1e-7 * (1.0 + std::abs(w.uo[i]))) by_slack.push_back(i);
  }
  for (const auto *active : {&by_dual, &by_slack}) {
    Vector x, y;
    if (!polish_with_set(w, *active, x, y)) continue;
    Residuals res = residuals_unscaled(w, x, y);
    if (res.max3() <= tol) {
      x_out = x;
      y_out = y;
      res_out = res;
      return true;
    }
  }
  return false;
}

// support function of the box at the (unscaled) dual ray dy
double support_value(const Workspace &w, const Vector &dy, bool &certificate_ok,
                     double scale) {
  double support = 0.0;
  certificate_ok = true;
  for (int i = 0; i < w.mr; ++i) {
    if (dy[i] > 0) {
      if (w.uo[i] == kInf) {
        if (dy[i] > 1e-6 * scale) certificate_ok = false;
      } else {
        support += w.uo[i] * dy[i];
      }
    } else if (dy[i] < 0) {
      if (w.lo[i] == -kInf) {
        if (-dy[i] > 1e-6 * scale) certificate_ok = false;
      } else {
        support += w.lo[i] * dy[i];
      }
    }
  }
  return support;
}

} // namespace

Solution solve(const Problem &p, const Settings &settings) {
  p.validate();
  const int h = p.num_vars();
  const int n_eq = static_cast<int>(p.A_eq.rows());
  const int n_in = static_cast<int>(p.A_in.rows());

  Workspace w;
  w.h = h;
  w.n_eq = n_eq;
  w.mr = n_eq + n_in;
  w.sigma = settings.sigma;
  w.Po = p.P;
  w.qo = p.q;

  // merged rows: equalities first
  {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(p.A_eq.nonZeros() + p.A_in.nonZeros());
    for (Eigen::Index r = 0; r < p.A_eq.rows(); ++r)
      for (RowMatrix::InnerIterator it(p.A_eq, r); it; ++it)
        trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                          it.value());
    for (Eigen::Index r = 0; r < p.A_in.rows(); ++r)
      for (RowMatrix::InnerIterator it(p.A_in, r); it; ++it)
        trip.emplace_back(n_eq + static_cast<int>(it.row()), static_cast<int>(it.col()),
                          it.value());
    w.Ao.resize(w.mr, h);
    w.Ao.setFromTriplets(trip.begin(), trip.end());
    w.ATo = RowMatrix(w.Ao.transpose());
  }
  w.lo.resize(w.mr);
  w.uo.resize(w.mr);
  w.lo.head(n_eq) = p.b_eq;
  w.uo.head(n_eq) = p.b_eq;
  w.lo.tail(n_in).setConstant(-kInf);
  w.uo.tail(n_in) = p.b_in;

  w.P = w.Po;
  w.A = w.Ao;
  w.q = w.qo;
  w.l = w.lo;
  w.u = w.uo;
  w.equilibrate(settings.scaling ? 10 : 0);

  double rho_base = settings.rho;
  w.build_rho(rho_base);
  for (int tries = 0; !w.factorize(); ++tries) {
    if (tries >= 4) throw std::runtime_error("KKT factorization failed");
    w.sigma *= 100.0;
  }

  // warm start maps into the scaled space
  Vector x = Vector::Zero(h);
  if (settings.warm_z.size() == h) x = settings.warm_z.cwiseQuotient(w.D);
  Vector y = Vector::Zero(w.mr);
  if (settings.warm_y.size() == w.mr)
    y = w.c * settings.warm_y.cwiseQuotient(w.E);
  Vector zc(w.mr);
  kernels::spmv(w.A, x, zc);
  zc = zc.cwiseMax(w.l).cwiseMin(w.u);

  Vector rhs(h + w.mr), sol(h + w.mr), zt(w.mr), z_relax(w.mr);
  Vector Ax(w.mr), Px(h), ATy(h), Ax_us(w.mr), y_us(w.mr);
  Vector y_prev_check = y;
  Vector best_x, best_y;
  double best_score = kInf;

  Solution out;
  out.status = Status::max_iter;

  Vector x_final, y_final; // unscaled
  const int check_interval = 10;
  for (int iter = 1; iter <= settings.max_iter; ++iter) {
    rhs.head(h) = w.sigma * x - w.q;
    rhs.tail(w.mr) = zc - w.rho_inv.cwiseProduct(y);
    sol = w.ldlt.solve(rhs);
    const Vector xt = sol.head(h);
    const Vector nu = sol.tail(w.mr);
    zt = zc + w.rho_inv.cwiseProduct(nu - y);
    x = settings.alpha * xt + (1.0 - settings.alpha) * x;
    z_relax = settings.alpha * zt + (1.0 - settings.alpha) * zc;
    zc = (z_relax + w.rho_inv.cwiseProduct(y)).cwiseMax(w.l).cwiseMin(w.u);
    y += w.rho.cwiseProduct(z_relax - zc);

    const bool last = iter == settings.max_iter;
    if (iter % check_interval != 0 && !last) continue;

    kernels::spmv(w.A, x, Ax);
    kernels::spmv(w.P, x, Px);
    kernels::spmv(w.AT, y, ATy);
    const Vector station_s = Px + w.q + ATy;
    Residuals res = residuals_from_scaled(w, y, Ax, station_s, Ax_us, y_us);

    if (iter % 400 == 0)
      STLSYNTH_LOG_DEBUG(
          "qp iter %d: rp=%.2e rd=%.2e cs=%.2e rp_s=%.2e rd_s=%.2e rho=%.2e",
          iter, res.prim, res.dual, res.cs, inf_norm(Ax - zc),
          inf_norm(station_s), rho_base);

    if (res.max3() < best_score) {
      best_score = res.max3();
      best_x = w.D.cwiseProduct(x);
      best_y = y_us;
    }

    // primal infeasibility certificate from the dual update direction
    Vector dy_us = w.E.cwiseProduct(y - y_prev_check) / w.c;
    const double ndy = inf_norm(dy_us);
    if (ndy > 1e-12) {
      Vector ATdy(h);
      kernels::spmv(w.ATo, dy_us, ATdy);
      bool cert_ok = false;
      const double support = support_value(w, dy_us, cert_ok, ndy);
      if (cert_ok && inf_norm(ATdy) <= 1e-6 * ndy && support <= -1e-6 * ndy) {
        out.status = Status::infeasible;
        out.iterations = iter;
        x_final = w.D.cwiseProduct(x);
        y_final = y_us;
        break;
      }
    }
    y_prev_check = y;

    const bool tight = res.prim <= settings.tol && res.dual <= settings.tol;
    const bool close = res.prim <= std::max(1e2 * settings.tol, 1e-4) &&
                       res.dual <= std::max(1e2 * settings.tol, 1e-4);
    if (tight || (settings.polish && close && iter % 50 == 0) || last) {
      Vector xp, yp;
      if (settings.polish && polish(w, y_us, xp, yp)) {
        Residuals pol = residuals_unscaled(w, xp, yp);
        if (pol.max3() <= settings.tol) {
          out.status = Status::optimal;
          out.iterations = iter;
          x_final = xp;
          y_final = yp;
          break;
        }
      }
      if (res.max3() <= settings.tol) {
        out.status = Status::optimal;
        out.iterations = iter;
        x_final = w.D.cwiseProduct(x);
        y_final = y_us;
        break;
      }
      if (last) {
        out.iterations = iter;
        break;
      }
    }

    if (settings.adaptive_rho && iter % 50 == 0) {
      const double r_prim_s = inf_norm(Ax - zc);
      const double r_dual_s = inf_norm(station_s);
      const double prim_scale = std::max({inf_norm(Ax), inf_norm(zc), 1e-10});
      const double dual_scale =
          std::max({inf_norm(Px), inf_norm(ATy), inf_norm(w.q), 1e-10});
      const double ratio =
          (r_prim_s / prim_scale) / std::max(r_dual_s / dual_scale, 1e-16);
      const double rho_new = std::clamp(rho_base * std::sqrt(ratio), 1e-6, 1e6);
      if (rho_new > 5.0 * rho_base || rho_new < rho_base / 5.0) {
        rho_base = rho_new;
        w.build_rho(rho_base);
        if (!w.factorize())
          throw std::runtime_error("KKT refactorization failed");
      }
    }
  }

  if (x_final.size() == 0) {
    x_final = best_x.size() ? best_x : w.D.cwiseProduct(x);
    y_final = best_y.size() ? best_y : Vector::Zero(w.mr);
    if (out.iterations == 0) out.iterations = settings.max_iter;
  }

  // final report against the original data
  Residuals res = residuals_unscaled(w, x_final, y_final);
  Vector Pxo(h);
  kernels::spmv(w.Po, x_final, Pxo);
  out.z = x_final;
  out.y_eq = y_final.head(n_eq);
  out.y_in = y_final.tail(n_in);
  out.primal_residual = res.prim;
  out.dual_residual = res.dual;
  out.comp_slack_residual = res.cs;
  out.objective = 0.5 * x_final.dot(Pxo) + w.qo.dot(x_final);
  double support = 0.0;
  for (int i = 0; i < w.mr; ++i) {
    if (y_final[i] > 0 && w.uo[i] != kInf) support += w.uo[i] * y_final[i];
    else if (y_final[i] < 0 && w.lo[i] != -kInf) support += w.lo[i] * y_final[i];
  }
  out.duality_gap = std::abs(x_final.dot(Pxo) + w.qo.dot(x_final) + support);
  if (out.status != Status::infeasible && res.max3() <= settings.tol)
    out.status = Status::optimal;
  STLSYNTH_LOG_DEBUG("qp: iters=%d prim=%.2e dual=%.2e cs=%.2e status=%d",
                     out.iterations, res.prim, res.dual, res.cs,
                     static_cast<int>(out.status));
  return out;
}

} // namespace stlsynth::qp
