#include <algorithm>
#include <cmath>
#include <vector>

#include "ucadmm/errors.hpp"
#include "ucadmm/tron.hpp"

namespace ucadmm {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Solves the equality-constrained reduced problem with the variables outside
// `free` held at their current values.
VectorXd reduced_newton_point(const BoxQp& qp, const VectorXd& x, const std::vector<Eigen::Index>& free) {
  const auto nf = static_cast<Eigen::Index>(free.size());
  VectorXd out = x;
  if (nf == 0) return out;
  MatrixXd A(nf, nf);
  VectorXd rhs(nf);
  const VectorXd grad = qp.H * x + qp.g;
  for (Eigen::Index a = 0; a < nf; ++a) {
    // grad at x minus the free part gives g_F + H_FA x_A
    double r = grad[free[a]];
    for (Eigen::Index b = 0; b < nf; ++b) {
      A(a, b) = qp.H(free[a], free[b]);
      r -= qp.H(free[a], free[b]) * x[free[b]];
    }
    rhs[a] = -r;
  }
  Eigen::LDLT<MatrixXd> ldlt(A);
  if (ldlt.info() != Eigen::Success) throw NumericalError("box qp: factorization failed");
  const VectorXd xf = ldlt.solve(rhs);
  if (!xf.allFinite()) throw NumericalError("box qp: singular reduced Hessian");
  for (Eigen::Index a = 0; a < nf; ++a) out[free[a]] = xf[a];
  return out;
}

}  // namespace

BoxQpResult solve_box_qp_newton(const BoxQp& qp, const VectorXd& x0, double tol, int max_iter) {
  const Eigen::Index n = x0.size();
  if (qp.H.rows() != n || qp.H.cols() != n || qp.g.size() != n || qp.lo.size() != n ||
      qp.hi.size() != n) {
    throw ValidationError("box qp: dimension mismatch");
  }
  BoxQpResult res;
  res.x = x0.cwiseMax(qp.lo).cwiseMin(qp.hi);
  double f = qp.value(res.x);
  VectorXd grad = qp.H * res.x + qp.g;
  res.pg_norm = projected_gradient_norm(res.x, grad, qp.lo, qp.hi);

  for (res.iterations = 0; res.iterations < max_iter && res.pg_norm > tol; ++res.iterations) {
    const double eps = std::min(1e-6, res.pg_norm);
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool at_lo = res.x[i] <= qp.lo[i] + eps && grad[i] > 0.0;
      const bool at_hi = res.x[i] >= qp.hi[i] - eps && grad[i] < 0.0;
      if (!at_lo && !at_hi) free.push_back(i);
    }
    // Newton direction on the free set, scaled gradient on the rest.
    VectorXd dir = -grad;
    for (Eigen::Index i = 0; i < n; ++i) dir[i] /= std::max(qp.H(i, i), 1e-300);
    const VectorXd newton = reduced_newton_point(qp, res.x, free);
    for (auto i : free) dir[i] = newton[i] - res.x[i];

    double alpha = 1.0;
    bool moved = false;
    for (int k = 0; k < 60; ++k) {
      const VectorXd trial = (res.x + alpha * dir).cwiseMax(qp.lo).cwiseMin(qp.hi);
      const double ft = qp.value(trial);
      if (ft <= f + 1e-4 * grad.dot(trial - res.x)) {
        moved = (trial - res.x).lpNorm<Eigen::Infinity>() > 0.0;
        res.x = trial;
        f = ft;
        break;
      }
      alpha *= 0.5;
    }
    grad = qp.H * res.x + qp.g;
    res.pg_norm = projected_gradient_norm(res.x, grad, qp.lo, qp.hi);
    if (!moved) break;
  }

  // Re-solve on the final active set to remove the line-search residue.
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool at_lo = res.x[i] <= qp.lo[i] && grad[i] >= 0.0;
    const bool at_hi = res.x[i] >= qp.hi[i] && grad[i] <= 0.0;
    if (!at_lo && !at_hi) free.push_back(i);
  }
  const VectorXd exact = reduced_newton_point(qp, res.x, free);
  if ((exact.array() >= qp.lo.array()).all() && (exact.array() <= qp.hi.array()).all()) {
    const VectorXd ge = qp.H * exact + qp.g;
    const double pe = projected_gradient_norm(exact, ge, qp.lo, qp.hi);
    if (pe <= res.pg_norm) {
      res.x = exact;
      res.pg_norm = pe;
    }
  }
  res.f = qp.value(res.x);
  res.converged = res.pg_norm <= tol;
  return res;
}

}  // namespace ucadmm
