#pragma once

#include <functional>

#include <Eigen/Dense>

namespace ucadmm {

struct TronConfig {
  double gtol = 1e-8;      // on the projected-gradient infinity norm
  int max_iter = 200;
  double radius0 = 1.0;
  int max_cg = 50;
};

enum class TronStatus { Converged, MaxIterations };

struct TronResult {
  Eigen::VectorXd x;
  double f = 0.0;
  double pg_norm = 0.0;
  int iterations = 0;
  TronStatus status = TronStatus::MaxIterations;
};

/// f(x), and if non-null the gradient and Hessian at x.
using SmoothFn = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*, Eigen::MatrixXd*)>;

/// Trust-region projected Newton for min f(x) s.t. lo <= x <= hi.
/// Throws NumericalError when f or its derivatives are not finite.
TronResult tron_solve(const SmoothFn& fn, const Eigen::VectorXd& x0, const Eigen::VectorXd& lo,
                      const Eigen::VectorXd& hi, const TronConfig& config = {});

/// ||P(x - g) - x||_inf on the box.
double projected_gradient_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                               const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);

/// 0.5 x'Hx + g'x over a box.
struct BoxQp {
  Eigen::MatrixXd H;
  Eigen::VectorXd g, lo, hi;

  double value(const Eigen::VectorXd& x) const { return 0.5 * x.dot(H * x) + g.dot(x); }
};

TronResult solve_box_qp_tron(const BoxQp& qp, const Eigen::VectorXd& x0, const TronConfig& config = {});

struct BoxQpResult {
  Eigen::VectorXd x;
  double f = 0.0;
  double pg_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Projected Newton with active-set refinement; H must be positive definite.
BoxQpResult solve_box_qp_newton(const BoxQp& qp, const Eigen::VectorXd& x0, double tol = 1e-10,
                                int max_iter = 100);

}  // namespace ucadmm
