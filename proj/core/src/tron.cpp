#include "ucadmm/tron.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ucadmm/errors.hpp"

namespace ucadmm {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kMu0 = 0.01;   // sufficient decrease, Cauchy and projected searches
constexpr double kEta0 = 1e-4;  // step acceptance
constexpr double kEta1 = 0.25;
constexpr double kEta2 = 0.75;

VectorXd project(const VectorXd& x, const VectorXd& lo, const VectorXd& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

double model(const VectorXd& g, const MatrixXd& H, const VectorXd& s) {
  return g.dot(s) + 0.5 * s.dot(H * s);
}

[[noreturn]] void fail(const char* what, const VectorXd& x) {
  std::ostringstream os;
  os << "tron: non-finite " << what << " at x = [";
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << "]";
  throw NumericalError(os.str());
}

// Generalized Cauchy step along the projected steepest-descent path.
VectorXd cauchy_step(const VectorXd& x, const VectorXd& g, const MatrixXd& H, const VectorXd& lo,
                     const VectorXd& hi, double radius, double& alpha) {
  auto step = [&](double a) { return VectorXd(project(x - a * g, lo, hi) - x); };
  auto ok = [&](const VectorXd& s) {
    return s.norm() <= radius * (1.0 + 1e-12) && model(g, H, s) <= kMu0 * g.dot(s);
  };
  VectorXd s = step(alpha);
  if (ok(s)) {
    for (int k = 0; k < 30; ++k) {
      const double a2 = alpha * 10.0;
      VectorXd s2 = step(a2);
      if (!ok(s2) || (s2 - s).lpNorm<Eigen::Infinity>() == 0.0) break;
      alpha = a2;
      s = std::move(s2);
    }
  } else {
    for (int k = 0; k < 60 && !ok(s); ++k) {
      alpha *= 0.1;
      s = step(alpha);
    }
  }
  return s;
}

// Steihaug CG for min -r'd + 0.5 d'Ad subject to ||base + d||^2 <= rad2.
VectorXd steihaug(const MatrixXd& A, const VectorXd& r, const VectorXd& base, double rad2, int max_cg) {
  const Eigen::Index n = r.size();
  VectorXd d = VectorXd::Zero(n);
  if (rad2 <= 0.0) return d;
  VectorXd res = r;
  VectorXd p = res;
  double rr = res.squaredNorm();
  const double stop = 1e-12 * std::max(1.0, std::sqrt(rr));
  auto to_boundary = [&](const VectorXd& dir) {
    const VectorXd c = base + d;
    const double a = dir.squaredNorm();
    const double b = 2.0 * c.dot(dir);
    const double cc = c.squaredNorm() - rad2;
    const double disc = std::max(0.0, b * b - 4.0 * a * cc);
    const double tau = a > 0.0 ? (-b + std::sqrt(disc)) / (2.0 * a) : 0.0;
    return VectorXd(d + std::max(0.0, tau) * dir);
  };
  for (int it = 0; it < max_cg; ++it) {
    if (std::sqrt(rr) <= stop) break;
    const VectorXd Ap = A * p;
    const double kappa = p.dot(Ap);
    if (kappa <= 0.0) return to_boundary(p);
    const double a = rr / kappa;
    if ((base + d + a * p).squaredNorm() >= rad2) return to_boundary(p);
    d += a * p;
    res -= a * Ap;
    const double rr_new = res.squaredNorm();
    p = res + (rr_new / rr) * p;
    rr = rr_new;
  }
  return d;
}

// Refines the Cauchy step on the free variables, with a projected search
// after each CG solve.
VectorXd subspace_step(const VectorXd& x, const VectorXd& g, const MatrixXd& H, const VectorXd& lo,
                       const VectorXd& hi, double radius, VectorXd s, int max_cg) {
  const Eigen::Index n = x.size();
  for (Eigen::Index pass = 0; pass <= n; ++pass) {
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double xi = x[i] + s[i];
      if (xi > lo[i] && xi < hi[i]) free.push_back(i);
    }
    if (free.empty()) break;
    const auto nf = static_cast<Eigen::Index>(free.size());
    const VectorXd grad = g + H * s;
    VectorXd r(nf), base(nf);
    MatrixXd A(nf, nf);
    double fixed2 = s.squaredNorm();
    for (Eigen::Index a = 0; a < nf; ++a) {
      r[a] = -grad[free[a]];
      base[a] = s[free[a]];
      fixed2 -= s[free[a]] * s[free[a]];
      for (Eigen::Index b = 0; b < nf; ++b) A(a, b) = H(free[a], free[b]);
    }
    if (r.lpNorm<Eigen::Infinity>() <= 1e-300) break;
    const VectorXd d = steihaug(A, r, base, radius * radius - std::max(0.0, fixed2), max_cg);
    if (d.lpNorm<Eigen::Infinity>() == 0.0) break;
    VectorXd dir = VectorXd::Zero(n);
    for (Eigen::Index a = 0; a < nf; ++a) dir[free[a]] = d[a];

    const double q0 = model(g, H, s);
    double alpha = 1.0;
    VectorXd s_new = s;
    bool accepted = false;
    for (int k = 0; k < 40; ++k) {
      s_new = project(x + s + alpha * dir, lo, hi) - x;
      if (model(g, H, s_new) <= q0 + kMu0 * grad.dot(s_new - s)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    bool new_bound = false;
    for (Eigen::Index a = 0; a < nf && !new_bound; ++a) {
      const Eigen::Index i = free[a];
      const double xi = x[i] + s_new[i];
      new_bound = xi <= lo[i] || xi >= hi[i];
    }
    s = std::move(s_new);
    // Stop once the step stays in the interior or reaches the trust boundary.
    if (!new_bound || alpha < 1.0 || s.norm() >= radius * (1.0 - 1e-12)) break;
  }
  return s;
}

}  // namespace

double projected_gradient_norm(const VectorXd& x, const VectorXd& g, const VectorXd& lo,
                               const VectorXd& hi) {
  return (project(x - g, lo, hi) - x).lpNorm<Eigen::Infinity>();
}

TronResult tron_solve(const SmoothFn& fn, const VectorXd& x0, const VectorXd& lo, const VectorXd& hi,
                      const TronConfig& config) {
  const Eigen::Index n = x0.size();
  if (lo.size() != n || hi.size() != n) throw ValidationError("tron: bound dimensions differ");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(lo[i] <= hi[i])) throw ValidationError("tron: empty box");
  }

  TronResult res;
  res.x = project(x0, lo, hi);
  VectorXd g(n);
  MatrixXd H(n, n);
  res.f = fn(res.x, &g, &H);
  if (!std::isfinite(res.f)) fail("objective", res.x);
  if (!g.allFinite() || !H.allFinite()) fail("derivatives", res.x);

  double radius = config.radius0 > 0.0 ? config.radius0 : std::max(1.0, g.norm());
  double alpha = 1.0;
  res.pg_norm = projected_gradient_norm(res.x, g, lo, hi);

  for (res.iterations = 0; res.iterations < config.max_iter; ++res.iterations) {
    if (res.pg_norm <= config.gtol) {
      res.status = TronStatus::Converged;
      return res;
    }
    VectorXd s = cauchy_step(res.x, g, H, lo, hi, radius, alpha);
    s = subspace_step(res.x, g, H, lo, hi, radius, std::move(s), config.max_cg);
    const double pred = model(g, H, s);
    const double snorm = s.norm();
    if (snorm == 0.0 || !(pred < 0.0)) {
      radius *= 0.25;
      if (radius < 1e-14 * std::max(1.0, res.x.norm())) break;
      continue;
    }

    const VectorXd x_new = project(res.x + s, lo, hi);
    const double f_new = fn(x_new, nullptr, nullptr);
    const double actual = f_new - res.f;
    double ratio = std::isfinite(f_new) ? actual / pred : -1.0;
    // Predicted decrease below rounding noise in f: trust the model.
    if (std::isfinite(f_new) && -pred <= 1e-13 * std::max(1.0, std::abs(res.f)) &&
        actual <= 1e-12 * std::max(1.0, std::abs(res.f))) {
      ratio = 1.0;
    }

    if (ratio < kEta1) {
      radius = 0.25 * std::min(snorm, radius);
    } else if (ratio > kEta2) {
      radius = std::max(radius, 4.0 * snorm);
    }
    if (ratio > kEta0) {
      res.x = x_new;
      res.f = fn(res.x, &g, &H);
      if (!std::isfinite(res.f)) fail("objective", res.x);
      if (!g.allFinite() || !H.allFinite()) fail("derivatives", res.x);
      res.pg_norm = projected_gradient_norm(res.x, g, lo, hi);
    } else if (radius < 1e-14 * std::max(1.0, res.x.norm())) {
      break;
    }
  }
  res.status = res.pg_norm <= config.gtol ? TronStatus::Converged : TronStatus::MaxIterations;
  return res;
}

TronResult solve_box_qp_tron(const BoxQp& qp, const VectorXd& x0, const TronConfig& config) {
  SmoothFn fn = [&qp](const VectorXd& x, VectorXd* g, MatrixXd* H) {
    const VectorXd Hx = qp.H * x;
    if (g) *g = Hx + qp.g;
    if (H) *H = qp.H;
    return 0.5 * x.dot(Hx) + qp.g.dot(x);
  };
  return tron_solve(fn, x0, qp.lo, qp.hi, config);
}

}  // namespace ucadmm
