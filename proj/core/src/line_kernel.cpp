#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ucadmm/errors.hpp"
#include "ucadmm/kernels.hpp"

namespace ucadmm {

namespace {

using Eigen::Matrix3d;
using Eigen::Matrix;
using Eigen::Vector3d;
using Vec5 = Matrix<double, 5, 1>;
using Mat5 = Matrix<double, 5, 5>;

// Flow as a function of (w_i, w_j, theta_i - theta_j).
struct FlowEval {
  double f = 0.0;
  Vector3d grad = Vector3d::Zero();
  Matrix3d hess = Matrix3d::Zero();
};

Vec5 lift(const Vector3d& g) {
  Vec5 out = Vec5::Zero();
  out.head<3>() = g;
  return out;
}

Mat5 lift(const Matrix3d& h) {
  Mat5 out = Mat5::Zero();
  out.topLeftCorner<3, 3>() = h;
  return out;
}

double thermal(const FlowEval& p, const FlowEval& q, double s, int s_pos, double rate2, double mu,
               double sigma, Vec5& g, Mat5& H, bool want) {
  const double h = p.f * p.f + q.f * q.f + s - rate2;
  const double m = mu + sigma * h;
  if (want) {
    Vec5 gh = lift(Vector3d(2.0 * p.f * p.grad + 2.0 * q.f * q.grad));
    gh[s_pos] = 1.0;
    Mat5 hh = lift(Matrix3d(2.0 * (p.grad * p.grad.transpose() + p.f * p.hess + q.grad * q.grad.transpose() +
                                   q.f * q.hess)));
    g += m * gh;
    H += sigma * gh * gh.transpose() + m * hh;
  }
  return mu * h + 0.5 * sigma * h * h;
}

}  // namespace

double line_objective(const LineProblem& lp, double sigma, const Eigen::VectorXd& x,
                      Eigen::VectorXd* grad, Eigen::MatrixXd* hess) {
  const double a = x[line_slot::WI], b = x[line_slot::WJ];
  const double d = x[line_slot::TI] - x[line_slot::TJ];
  const double sq = std::sqrt(a * b);
  const double wr = sq * std::cos(d), wi = sq * std::sin(d);
  const bool want = grad != nullptr || hess != nullptr;

  Vector3d gwr(wr / (2 * a), wr / (2 * b), -wi);
  Vector3d gwi(wi / (2 * a), wi / (2 * b), wr);
  Matrix3d hwr, hwi;
  hwr << -wr / (4 * a * a), wr / (4 * a * b), -wi / (2 * a),
         wr / (4 * a * b), -wr / (4 * b * b), -wi / (2 * b),
         -wi / (2 * a), -wi / (2 * b), -wr;
  hwi << -wi / (4 * a * a), wi / (4 * a * b), wr / (2 * a),
         wi / (4 * a * b), -wi / (4 * b * b), wr / (2 * b),
         wr / (2 * a), wr / (2 * b), -wi;

  const auto& y = lp.adm;
  // coefficients on (w_i, w_j, wR, wI)
  const double coef[4][4] = {
      {y.gii, 0.0, y.gij, y.bij},
      {-y.bii, 0.0, -y.bij, y.gij},
      {0.0, y.gjj, y.gji, -y.bji},
      {0.0, -y.bjj, -y.bji, -y.gji},
  };
  FlowEval fl[6];
  for (int k = 0; k < 4; ++k) {
    fl[k].f = coef[k][0] * a + coef[k][1] * b + coef[k][2] * wr + coef[k][3] * wi;
    if (want) {
      fl[k].grad = coef[k][2] * gwr + coef[k][3] * gwi;
      fl[k].grad[0] += coef[k][0];
      fl[k].grad[1] += coef[k][1];
      fl[k].hess = coef[k][2] * hwr + coef[k][3] * hwi;
    }
  }
  fl[4].f = a;
  fl[4].grad = Vector3d(1, 0, 0);
  fl[5].f = b;
  fl[5].grad = Vector3d(0, 1, 0);

  double F = 0.0;
  Vec5 g = Vec5::Zero();
  Mat5 H = Mat5::Zero();
  for (int k = 0; k < 6; ++k) {
    const auto& pt = lp.rows[static_cast<std::size_t>(k)];
    const double r = fl[k].f + pt.c;
    F += pt.y * r + 0.5 * pt.rho * r * r;
    if (want) {
      const double m = pt.y + pt.rho * r;
      g += m * lift(fl[k].grad);
      H += pt.rho * lift(Matrix3d(fl[k].grad * fl[k].grad.transpose())) + m * lift(fl[k].hess);
    }
  }
  const double rate2 = lp.rate * lp.rate;
  F += thermal(fl[0], fl[1], x[line_slot::S_IJ], 3, rate2, lp.mu_ij, sigma, g, H, want);
  F += thermal(fl[2], fl[3], x[line_slot::S_JI], 4, rate2, lp.mu_ji, sigma, g, H, want);

  if (want) {
    // x = (a, b, theta_i, theta_j, s_ij, s_ji) -> (a, b, d, s_ij, s_ji)
    Matrix<double, 6, 5> J = Matrix<double, 6, 5>::Zero();
    J(0, 0) = 1;
    J(1, 1) = 1;
    J(2, 2) = 1;
    J(3, 2) = -1;
    J(4, 3) = 1;
    J(5, 4) = 1;
    if (grad) *grad = J * g;
    if (hess) *hess = J * H * J.transpose();
  }
  return F;
}

LineResult solve_line(const LineProblem& lp, const std::array<double, line_slot::COUNT>& x0,
                      const LineConfig& config) {
  const double pi = std::numbers::pi;
  const double rate2 = lp.rate * lp.rate;
  Eigen::VectorXd lo(6), hi(6), x(6);
  lo << lp.wi_lo, lp.wj_lo, -pi, -pi, 0.0, 0.0;
  hi << lp.wi_hi, lp.wj_hi, pi, pi, rate2, rate2;
  for (int k = 0; k < 6; ++k) x[k] = x0[static_cast<std::size_t>(k)];
  x = x.cwiseMax(lo).cwiseMin(hi);

  auto flows_at = [&](const Eigen::VectorXd& xx) {
    return line_flows(lp.adm, xx[0], xx[1], xx[2], xx[3]);
  };
  auto h_pair = [&](const Eigen::VectorXd& xx) {
    const auto f = flows_at(xx);
    return std::pair{f[0] * f[0] + f[1] * f[1] + xx[4] - rate2, f[2] * f[2] + f[3] * f[3] + xx[5] - rate2};
  };
  {
    const auto f = flows_at(x);
    x[4] = std::clamp(rate2 - f[0] * f[0] - f[1] * f[1], 0.0, rate2);
    x[5] = std::clamp(rate2 - f[2] * f[2] - f[3] * f[3], 0.0, rate2);
  }

  LineResult out;
  LineProblem cur = lp;
  double sigma = config.sigma0;
  double prev_viol = std::numeric_limits<double>::infinity();
  double viol = 0.0;
  for (out.al_iterations = 0; out.al_iterations < config.max_outer;) {
    SmoothFn fn = [&cur, sigma](const Eigen::VectorXd& xx, Eigen::VectorXd* g, Eigen::MatrixXd* H) {
      return line_objective(cur, sigma, xx, g, H);
    };
    const auto res = tron_solve(fn, x, lo, hi, config.tron);
    x = res.x;
    out.tron_iterations += res.iterations;
    ++out.al_iterations;
    const auto [hij, hji] = h_pair(x);
    viol = std::max(std::abs(hij), std::abs(hji));
    if (viol <= config.thermal_tol) break;
    cur.mu_ij += sigma * hij;
    cur.mu_ji += sigma * hji;
    if (viol > 0.25 * prev_viol) sigma *= config.growth;
    prev_viol = viol;
  }
  for (int k = 0; k < 6; ++k) out.x[static_cast<std::size_t>(k)] = x[k];
  out.flows = flows_at(x);
  out.mu_ij = cur.mu_ij;
  out.mu_ji = cur.mu_ji;
  out.violation = viol;
  out.violation_flag = viol > config.thermal_tol;
  return out;
}

LineProblem line_problem(const KernelContext& ctx, const Variables& v, std::size_t t, std::size_t l,
                         double mu_ij, double mu_ji) {
  const auto& L = ctx.layout;
  const auto& br = ctx.problem.grid.branches()[l];
  const auto& bi = ctx.problem.grid.buses()[br.from];
  const auto& bj = ctx.problem.grid.buses()[br.to];
  LineProblem lp;
  lp.adm = br.y;
  lp.wi_lo = bi.vmin * bi.vmin;
  lp.wi_hi = bi.vmax * bi.vmax;
  lp.wj_lo = bj.vmin * bj.vmin;
  lp.wj_hi = bj.vmax * bj.vmax;
  lp.rate = br.rate_limit;
  lp.mu_ij = mu_ij;
  lp.mu_ji = mu_ji;
  const auto r0 = L.line_first_row(t, l);
  for (std::uint32_t k = 0; k < 6; ++k) {
    const auto& row = L.row(r0 + k);
    // the first term is always the x-side local quantity
    double c = row.constant + ctx.z[r0 + k];
    for (std::size_t j = 1; j < row.n_terms; ++j) c += row.terms[j].coef * v.value(row.terms[j]);
    lp.rows[k] = PenaltyTerm{ctx.rho.of(row.cls), ctx.y[r0 + k], c};
  }
  return lp;
}

}  // namespace ucadmm
