#pragma once

#include <array>
#include <utility>
#include <vector>

#include "ucadmm/formulation.hpp"
#include "ucadmm/tron.hpp"
#include "ucadmm/uc_dp.hpp"

namespace ucadmm {

/// Read-only view of the iterate data every kernel needs.
struct KernelContext {
  const ScheduleProblem& problem;
  const Layout& layout;
  const Penalties& rho;
  const std::vector<double>& y;
  const std::vector<double>& z;
};

/// One local variable of a kernel, as a reference into Variables.
struct LocalVar {
  Block block;
  std::uint32_t index;
};

/// Quadratic in the local variables of sum over `rows` of
/// y_r (a_r x + c_r) + rho_r/2 (a_r x + c_r)^2, with c_r collecting every
/// non-local term, the row constant and z_r. The constant part is dropped.
BoxQp assemble_local_qp(const KernelContext& ctx, const Variables& v,
                        const std::vector<std::uint32_t>& rows, const std::vector<LocalVar>& locals);

/// L^UC_{g,t}(prev, cur) for every period of generator g.
StageCost dp_stage_costs(const KernelContext& ctx, const Variables& v, std::size_t g);

/// The 9-variable QP of generator (t,g): slot order as gen_slot.
BoxQp gen_kernel_qp(const KernelContext& ctx, const Variables& v, std::size_t t, std::size_t g);
std::array<double, gen_slot::COUNT> gen_kernel(const KernelContext& ctx, const Variables& v,
                                               std::size_t t, std::size_t g,
                                               const TronConfig& config = {});

/// The 3T-variable QP of generator g's relaxed binaries, ordered
/// (on, su, sd) per period.
BoxQp ucbar_kernel_qp(const KernelContext& ctx, const Variables& v, std::size_t g);
std::vector<double> ucbar_kernel(const KernelContext& ctx, const Variables& v, std::size_t g,
                                 double tol = 1e-8);

struct BusKernelResult {
  std::vector<std::pair<LocalVar, double>> values;
  double lambda_p = 0.0;
  double lambda_q = 0.0;
  bool voltage_clipped = false;
};

/// Closed-form minimizer of the bus-side copies at (t,i) under the two
/// balance equations and the voltage box.
BusKernelResult bus_kernel(const KernelContext& ctx, const Variables& v, std::size_t t, std::size_t i);

/// Penalty row of the line kernel: y (f + c) + rho/2 (f + c)^2.
struct PenaltyTerm {
  double rho = 0.0;
  double y = 0.0;
  double c = 0.0;
};

struct LineProblem {
  TwoPortAdmittance adm;
  double wi_lo = 0.81, wi_hi = 1.21, wj_lo = 0.81, wj_hi = 1.21;
  double rate = 1.0;
  std::array<PenaltyTerm, 6> rows{};  // p_ij, q_ij, p_ji, q_ji, w_i, w_j
  double mu_ij = 0.0, mu_ji = 0.0;    // thermal multipliers
};

struct LineConfig {
  TronConfig tron{1e-8, 300, 1.0, 50};
  double thermal_tol = 1e-7;
  double sigma0 = 1e3;
  double growth = 10.0;
  int max_outer = 50;
};

struct LineResult {
  std::array<double, line_slot::COUNT> x{};
  std::array<double, flow_slot::COUNT> flows{};
  double mu_ij = 0.0, mu_ji = 0.0;
  double violation = 0.0;
  bool violation_flag = false;
  int tron_iterations = 0;
  int al_iterations = 0;
};

/// Value, gradient and Hessian of the line kernel's augmented Lagrangian in
/// x = (w_i, w_j, theta_i, theta_j, s_ij, s_ji) at thermal penalty sigma.
double line_objective(const LineProblem& lp, double sigma, const Eigen::VectorXd& x,
                      Eigen::VectorXd* grad, Eigen::MatrixXd* hess);

LineResult solve_line(const LineProblem& lp, const std::array<double, line_slot::COUNT>& x0,
                      const LineConfig& config = {});

LineProblem line_problem(const KernelContext& ctx, const Variables& v, std::size_t t, std::size_t l,
                         double mu_ij, double mu_ji);

}  // namespace ucadmm
