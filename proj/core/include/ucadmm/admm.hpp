#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ucadmm/formulation.hpp"
#include "ucadmm/kernels.hpp"
#include "ucadmm/scenario.hpp"
#include "ucadmm/table.hpp"
#include "ucadmm/worker_pool.hpp"

namespace ucadmm {

enum class UcMode {
  Optimize,  // binaries from the DP, relaxed copies from the box QP
  FixedOn,   // every unit on in every period; UC steps skipped
};

struct AdmmOptions {
  Penalties rho;
  double tau = 6.0;
  double theta = 0.8;
  double beta0 = 0.0;  // <= 0: max of the three penalties
  double lambda_lo = -1e12;
  double lambda_hi = 1e12;
  double eps_outer = 1e-3;  // on ||z||_inf
  int max_outer = 100;
  int max_inner = 1000;
  int max_total_inner = 0;  // 0 = no global cap
  double inner_primal_tol = 1e-4;
  double inner_dual_tol = 1e-4;
  int divergence_window = 200;
  double divergence_factor = 10.0;
  double divergence_floor = 1e-2;
  std::size_t workers = 1;
  UcMode mode = UcMode::Optimize;
  bool warm_start = true;
  double warm_start_threshold = 1e-3;
  int warm_start_budget = 300;  // inner iterations of the relaxed solve
  std::optional<Table2<std::uint8_t>> initial_schedule;
  LineConfig line;
  TronConfig gen_tron{1e-9, 200, 1.0, 50};
  double ucbar_tol = 1e-8;
  bool keep_history = true;
};

/// Closed-form minimizer over z of lambda z + beta/2 z^2 + y (r + z) + rho/2 (r + z)^2.
inline double z_update(double lambda, double y, double rho, double beta, double r) {
  return -(lambda + y + rho * r) / (beta + rho);
}

inline double y_update(double y, double rho, double r, double z) { return y + rho * (r + z); }

/// lambda <- clip(lambda + beta z); returns beta, multiplied by tau when
/// z_now > theta z_prev. A negative z_prev skips the test.
double outer_update(std::vector<double>& lambda, double beta, const std::vector<double>& z,
                    double z_now, double z_prev, double tau, double theta, double lambda_lo,
                    double lambda_hi);

struct AdmmState {
  Variables v;
  std::vector<double> z, y, lambda;
  std::vector<double> mu_ij, mu_ji;  // thermal multipliers per (t,l)
  double beta = 0.0;
};

struct SweepStats {
  double primal = 0.0;  // ||Ax + Bxbar + z||_inf
  double dual = 0.0;    // max change of Bxbar + z
  double x_norm = 0.0;  // ||x||_inf
  int line_flags = 0;   // line kernels that left their thermal loop unconverged
};

struct HistoryRow {
  int outer = 0;
  int inner = 0;  // within the outer iteration, 1-based
  int total = 0;
  double primal = 0.0;
  double dual = 0.0;
  double infeasibility = 0.0;
  double z_inf = 0.0;
  double beta = 0.0;
  double objective = 0.0;
};

enum class SolveStatus { Converged, IterationCap };

std::string to_string(SolveStatus s);

struct PhaseTiming {
  double warm_start = 0.0;
  double uc_dp = 0.0;
  double opf_x = 0.0;
  double uc_bar = 0.0;
  double bus = 0.0;
  double multipliers = 0.0;
  double total = 0.0;
  std::size_t workers = 1;
};

struct SolveReport {
  SolveStatus status = SolveStatus::IterationCap;
  double objective = 0.0;
  double primal_infeasibility = 0.0;
  double z_inf = 0.0;
  double z_two = 0.0;
  int outer_iterations = 0;
  int total_inner = 0;
  int warm_start_inner = 0;  // sweeps of the relaxed warm-start solve
  std::vector<int> inner_per_outer;
  std::vector<double> z_inf_history;  // per outer iteration
  std::vector<double> z_two_history;
  std::vector<double> beta_history;
  double final_beta = 0.0;
  std::size_t rows = 0;
  Table2<std::uint8_t> schedule;    // T x G
  Table2<double> dispatch_p;        // T x G, per-unit
  Table2<double> dispatch_q;
  Table2<double> voltage;           // T x B, magnitudes of the consensus voltages
  Table2<double> angle;             // T x B, radians, reference bus at 0
  std::vector<std::string> uc_violations;  // empty when every schedule is feasible
  double ramp_violation = 0.0;      // max violation of the bound and ramp rows
  int line_flags = 0;
  std::vector<HistoryRow> history;
  PhaseTiming timing;
  Penalties rho;
};

/// Two-level ADMM over a fixed problem. The engine owns the iterate; the
/// free functions below drive it.
class AdmmEngine {
 public:
  AdmmEngine(const ScheduleProblem& problem, AdmmOptions options);

  const ScheduleProblem& problem() const { return problem_; }
  const Layout& layout() const { return layout_; }
  const AdmmOptions& options() const { return opts_; }
  AdmmState& state() { return state_; }
  const AdmmState& state() const { return state_; }

  /// Midpoint initialization around the given schedule; z = y = lambda = 0.
  void initialize(const Table2<std::uint8_t>& schedule);

  /// One inner iteration, steps UC-x, OPF-x, UC-xbar, OPF-xbar, z, y.
  SweepStats sweep();

  /// Runs the outer/inner loops from the current state.
  SolveReport run();

  void set_warm_start_info(double seconds, int inner) {
    warm_seconds_ = seconds;
    warm_inner_ = inner;
  }

 private:
  ScheduleProblem problem_;
  AdmmOptions opts_;
  Layout layout_;
  AdmmState state_;
  std::vector<double> prev_bz_;
  PhaseTiming timing_;
  double warm_seconds_ = 0.0;
  int warm_inner_ = 0;
  std::unique_ptr<WorkerPool> pool_;
};

/// Warm start (unless a schedule is given), then the two-level loop.
SolveReport solve(const ScheduleProblem& problem, const AdmmOptions& options);

/// Copy of the problem with every lower generation bound replaced by
/// min(bound, 0), used by the relaxed warm-start solve.
ScheduleProblem relaxed_problem(const ScheduleProblem& problem);

/// Max violation of Pmin u <= p <= Pmax u, Qmin u <= q <= Qmax u and the
/// ramp inequalities, evaluated on the binaries and the dispatch.
double coupling_violation(const ScheduleProblem& problem, const Table2<std::uint8_t>& schedule,
                          const Table2<double>& p, const Table2<double>& q);

}  // namespace ucadmm
