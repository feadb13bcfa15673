#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>

#include "fixtures.hpp"
#include "ucadmm/admm.hpp"
#include "ucadmm/errors.hpp"
#include "ucadmm/report_io.hpp"

using namespace ucadmm;

namespace {

// z objective for one row, written out directly.
double z_objective(double lambda, double y, double rho, double beta, double r, double z) {
  return lambda * z + 0.5 * beta * z * z + y * (r + z) + 0.5 * rho * (r + z) * (r + z);
}

}  // namespace

TEST(ZUpdate, WorkedExample) {
  // -(1 + 2 + 2 * 0.5) / (4 + 2)
  EXPECT_NEAR(z_update(1.0, 2.0, 2.0, 4.0, 0.5), -2.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(y_update(2.0, 2.0, 0.5, -2.0 / 3.0), 2.0 + 2.0 * (0.5 - 2.0 / 3.0));
}

TEST(ZUpdate, LargeBetaDrivesZToZero) {
  EXPECT_LT(std::abs(z_update(1.0, 2.0, 2.0, 1e12, 0.5)), 1e-11);
}

TEST(ZUpdate, MatchesNumericMinimum) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-10.0, 10.0), R(0.1, 1e3);
  for (int k = 0; k < 500; ++k) {
    const double lam = U(rng), y = U(rng), rho = R(rng), beta = R(rng), r = U(rng);
    const double z = z_update(lam, y, rho, beta, r);
    const auto f = [&](double t) { return z_objective(lam, y, rho, beta, r, t); };
    const auto best = boost::math::tools::brent_find_minima(f, -100.0, 100.0, 52);
    EXPECT_NEAR(z, best.first, 1e-6 * std::max(1.0, std::abs(z)));
    // convexity: nearby points are no better
    EXPECT_LE(f(z), f(z + 1e-6));
    EXPECT_LE(f(z), f(z - 1e-6));
  }
}

TEST(OuterUpdate, LambdaStepAndBetaGrowth) {
  std::vector<double> lam{1.0, -2.0, 0.0};
  const std::vector<double> z{0.5, 0.25, -1.0};
  const double b = outer_update(lam, 4.0, z, 0.9, 1.0, 6.0, 0.8, -1e12, 1e12);
  EXPECT_EQ(b, 24.0);
  EXPECT_EQ(lam[0], 3.0);
  EXPECT_EQ(lam[1], -1.0);
  EXPECT_EQ(lam[2], -4.0);
}

TEST(OuterUpdate, SufficientDecreaseKeepsBeta) {
  std::vector<double> lam{0.0};
  EXPECT_EQ(outer_update(lam, 4.0, {1.0}, 0.7, 1.0, 6.0, 0.8, -1e12, 1e12), 4.0);
  // boundary: exactly theta times the previous value is not an increase
  EXPECT_EQ(outer_update(lam, 4.0, {1.0}, 0.8, 1.0, 6.0, 0.8, -1e12, 1e12), 4.0);
}

TEST(OuterUpdate, FirstIterationSkipsTest) {
  std::vector<double> lam{0.0};
  EXPECT_EQ(outer_update(lam, 4.0, {1.0}, 1.0, -1.0, 6.0, 0.8, -1e12, 1e12), 4.0);
}

TEST(OuterUpdate, ProjectionAndZeroZ) {
  std::vector<double> lam{9.0, -9.0};
  outer_update(lam, 100.0, {1.0, -1.0}, 1.0, -1.0, 6.0, 0.8, -10.0, 10.0);
  EXPECT_EQ(lam[0], 10.0);
  EXPECT_EQ(lam[1], -10.0);
  std::vector<double> lam2{1.5, -0.5};
  const double b = outer_update(lam2, 7.0, {0.0, 0.0}, 0.0, 0.0, 6.0, 0.8, -1e12, 1e12);
  EXPECT_EQ(b, 7.0);
  EXPECT_EQ(lam2[0], 1.5);
  EXPECT_EQ(lam2[1], -0.5);
}

TEST(OuterUpdate, DimensionMismatchThrows) {
  std::vector<double> lam{0.0};
  EXPECT_THROW(outer_update(lam, 1.0, {1.0, 2.0}, 1.0, 1.0, 6.0, 0.8, -1, 1), ValidationError);
}

TEST(Engine, RejectsBadOptions) {
  const auto P = fixture::problem(fixture::two_bus_grid(), 2);
  AdmmOptions o;
  o.rho.rho_pq = 0.0;
  EXPECT_THROW(AdmmEngine(P, o), ValidationError);
  o = AdmmOptions{};
  o.tau = 1.0;
  EXPECT_THROW(AdmmEngine(P, o), ValidationError);
  o = AdmmOptions{};
  o.theta = 1.0;
  EXPECT_THROW(AdmmEngine(P, o), ValidationError);
}

TEST(Engine, SingleBusMeetsDemand) {
  std::vector<Bus> buses{fixture::bus(1, 0.5, 0.1, true)};
  std::vector<Generator> gens{fixture::generator(1, 0.0, 1.0, -1.0, 1.0, 1.0, 1.0, 0.0)};
  const GridCase grid(100.0, buses, {}, gens);
  const auto P = fixture::problem(grid, 1);
  AdmmOptions o;
  o.rho = {100.0, 100.0, 100.0};
  o.mode = UcMode::FixedOn;
  o.warm_start = false;
  o.eps_outer = 1e-8;
  o.inner_primal_tol = 1e-10;
  o.inner_dual_tol = 1e-10;
  const auto rep = solve(P, o);
  EXPECT_EQ(rep.status, SolveStatus::Converged);
  EXPECT_LE(rep.primal_infeasibility, 1e-6);
  EXPECT_NEAR(rep.dispatch_p(0, 0), 0.5, 1e-6);
  EXPECT_NEAR(rep.dispatch_q(0, 0), 0.1, 1e-6);
  const double c2 = grid.generators()[0].c2, c1 = grid.generators()[0].c1;
  EXPECT_NEAR(rep.objective, c2 * 0.25 + c1 * 0.5, 1e-5 * std::max(1.0, std::abs(rep.objective)));
}

// A two-bus point where every coupling row holds and all costs vanish: one
// sweep should leave it where it is.
TEST(Engine, ConsistentPointIsFixed) {
  const double v1 = 1.0, v2 = 0.98;
  const double p1 = 0.6, q1 = 0.1, p2 = 0.3, q2 = 0.05;
  auto br = fixture::branch(1, 2, 0.01, 0.08, 0.1, 10.0);
  const auto f = line_flows(br.y, v1 * v1, v2 * v2, 0.0, 0.0);
  const double gs2 = 0.01, bs2 = 0.02;
  std::vector<Bus> buses{fixture::bus(1, p1 - f[0], q1 - f[1], true),
                         fixture::bus(2, p2 - f[2] - gs2 * v2 * v2, q2 - f[3] + bs2 * v2 * v2)};
  buses[1].gs = gs2;
  buses[1].bs = bs2;
  buses[0].vmin = v1 - 0.05;
  buses[0].vmax = v1 + 0.05;
  buses[1].vmin = v2 - 0.05;
  buses[1].vmax = v2 + 0.05;
  std::vector<Generator> gens{fixture::generator(1, p1 - 0.2, p1 + 0.2, q1 - 0.3, q1 + 0.3),
                              fixture::generator(2, p2 - 0.2, p2 + 0.2, q2 - 0.3, q2 + 0.3)};
  const GridCase grid(100.0, buses, {br}, gens);
  UcOverrides ov;
  ov.per_generator[0].initial_dispatch = p1;
  ov.per_generator[1].initial_dispatch = p2;
  ov.all.ramp_up = 1.0;
  ov.all.ramp_down = 1.0;
  const auto P = fixture::problem(grid, 1, ov);

  AdmmOptions o;
  o.rho = {50.0, 80.0, 30.0};
  o.mode = UcMode::FixedOn;
  AdmmEngine eng(P, o);
  eng.initialize(Table2<std::uint8_t>(1, 2, 1));
  const auto& L = eng.layout();
  const auto r0 = residuals(L, eng.state().v, eng.state().z);
  double worst0 = 0.0;
  for (double x : r0) worst0 = std::max(worst0, std::abs(x));
  ASSERT_LE(worst0, 1e-12);

  const auto before = eng.state().v;
  const auto st = eng.sweep();
  EXPECT_LE(st.primal, 1e-6);
  const auto& v = eng.state().v;
  EXPECT_NEAR(v.gen[L.gen_index(0, 0, gen_slot::P)], p1, 1e-6);
  EXPECT_NEAR(v.gen[L.gen_index(0, 1, gen_slot::Q)], q2, 1e-6);
  for (std::size_t i = 0; i < v.wbar.size(); ++i) EXPECT_NEAR(v.wbar[i], before.wbar[i], 1e-6);
  for (std::size_t i = 0; i < v.fbar.size(); ++i) EXPECT_NEAR(v.fbar[i], before.fbar[i], 1e-6);
  for (std::size_t i = 0; i < v.pbar.size(); ++i) EXPECT_NEAR(v.pbar[i], before.pbar[i], 1e-6);
}

class EngineRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    UcOverrides ov;
    ov.all.min_up = 2;
    ov.all.min_down = 2;
    ov.per_generator[1].initial_on = false;
    auto prof = DemandProfile{{0.8, 1.0, 1.2, 0.9}, 0.8};
    problem_ = new ScheduleProblem(build_problem(fixture::two_bus_grid(), prof, ov));
    AdmmOptions o;
    o.rho = {1000.0, 1000.0, 1000.0};
    o.workers = 1;
    report_ = new SolveReport(solve(*problem_, o));
  }
  static void TearDownTestSuite() {
    delete report_;
    delete problem_;
  }
  static ScheduleProblem* problem_;
  static SolveReport* report_;
};

ScheduleProblem* EngineRun::problem_ = nullptr;
SolveReport* EngineRun::report_ = nullptr;

TEST_F(EngineRun, IterationAccounting) {
  const auto& rep = *report_;
  int sum = 0;
  for (int k : rep.inner_per_outer) sum += k;
  EXPECT_EQ(sum, rep.total_inner);
  EXPECT_EQ(static_cast<int>(rep.inner_per_outer.size()), rep.outer_iterations);
  EXPECT_EQ(rep.z_inf_history.size(), rep.beta_history.size());
  EXPECT_EQ(static_cast<int>(rep.history.size()), rep.total_inner);
  for (int k : rep.inner_per_outer) EXPECT_LE(k, 1000);
}

TEST_F(EngineRun, BetaGrowsOnlyByTau) {
  const auto& b = report_->beta_history;
  ASSERT_FALSE(b.empty());
  EXPECT_EQ(b[0], 1000.0);
  for (std::size_t k = 1; k < b.size(); ++k) {
    EXPECT_TRUE(b[k] == b[k - 1] || b[k] == 6.0 * b[k - 1]) << k;
  }
  const auto& z = report_->z_inf_history;
  for (std::size_t k = 2; k < b.size(); ++k) {
    // growth at k happened after outer iteration k-1 compared with k-2
    const bool grew = b[k] > b[k - 1];
    EXPECT_EQ(grew, z[k - 1] > 0.8 * z[k - 2]) << k;
  }
}

TEST_F(EngineRun, ReportsFeasibleSchedule) {
  const auto& rep = *report_;
  EXPECT_EQ(rep.status, SolveStatus::Converged);
  EXPECT_TRUE(rep.uc_violations.empty());
  EXPECT_LE(rep.z_inf, 1e-3);
  EXPECT_EQ(rep.schedule.rows(), 4u);
  EXPECT_EQ(rep.voltage.cols(), 2u);
  EXPECT_EQ(rep.angle(0, 0), 0.0);
}

TEST_F(EngineRun, DeterministicAcrossWorkers) {
  AdmmOptions o;
  o.rho = {1000.0, 1000.0, 1000.0};
  o.workers = 3;
  const auto rep3 = solve(*problem_, o);
  o.workers = 1;
  const auto& rep1 = *report_;
  const auto j1 = report_without_timing(report_json(rep1, *problem_, o, "x"));
  const auto j3 = report_without_timing(report_json(rep3, *problem_, o, "x"));
  EXPECT_EQ(j1, j3);
  EXPECT_EQ(history_csv(rep1), history_csv(rep3));
  EXPECT_EQ(rep3.timing.workers, 3u);
}

TEST(Engine, TotalInnerCapStops) {
  const auto P = fixture::problem(fixture::two_bus_grid(), 3);
  AdmmOptions o;
  o.rho = {200.0, 400.0, 400.0};
  o.warm_start = false;
  o.max_total_inner = 5;
  const auto rep = solve(P, o);
  EXPECT_EQ(rep.status, SolveStatus::IterationCap);
  EXPECT_EQ(rep.total_inner, 5);
}

TEST(Relaxed, LowerBoundsDropToZero) {
  const auto P = fixture::problem(fixture::two_bus_grid(), 2);
  const auto R = relaxed_problem(P);
  EXPECT_EQ(R.grid.generators()[0].pmin, 0.0);
  EXPECT_EQ(R.grid.generators()[0].qmin, -0.5);
  EXPECT_EQ(R.grid.generators()[1].pmax, 0.6);
  EXPECT_EQ(R.horizon, 2);
}

TEST(Coupling, ViolationOfBoundsAndRamps) {
  UcOverrides ov;
  ov.all.ramp_up = 0.1;
  ov.all.ramp_down = 0.1;
  ov.all.startup_ramp = 0.2;
  ov.all.shutdown_ramp = 0.2;
  ov.per_generator[0].initial_dispatch = 0.5;
  ov.per_generator[1].initial_dispatch = 0.3;
  const auto P = fixture::problem(fixture::two_bus_grid(), 2, ov);
  Table2<std::uint8_t> s(2, 2, 1);
  Table2<double> p(2, 2, 0.0), q(2, 2, 0.0);
  p(0, 0) = 0.55;
  p(1, 0) = 0.65;
  p(0, 1) = 0.3;
  p(1, 1) = 0.3;
  EXPECT_NEAR(coupling_violation(P, s, p, q), 0.0, 1e-15);
  p(1, 0) = 0.80;  // ramp up by 0.25 against 0.1
  EXPECT_NEAR(coupling_violation(P, s, p, q), 0.15, 1e-12);
  p(1, 0) = 0.65;
  q(0, 1) = 0.5;  // qmax 0.4
  EXPECT_NEAR(coupling_violation(P, s, p, q), 0.1, 1e-12);
  q(0, 1) = 0.0;
  s(1, 1) = 0;  // off while dispatching 0.3; shutdown ramp 0.2 covers the drop only partly
  EXPECT_NEAR(coupling_violation(P, s, p, q), 0.3, 1e-12);
}

TEST(Pool, CoversEveryIndexOnce) {
  WorkerPool pool(4);
  EXPECT_EQ(pool.size(), 4u);
  for (std::size_t n : {0u, 1u, 3u, 4u, 17u, 1000u}) {
    std::vector<std::atomic<int>> hits(n);
    pool.parallel_for(n, [&](std::size_t i) { hits[i].fetch_add(1); });
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(hits[i].load(), 1);
  }
}

TEST(Pool, RethrowsAndRecovers) {
  WorkerPool pool(3);
  EXPECT_THROW(pool.parallel_for(30, [](std::size_t i) {
    if (i == 29) throw std::runtime_error("boom");
  }),
               std::runtime_error);
  std::atomic<int> n{0};
  pool.parallel_for(30, [&](std::size_t) { n.fetch_add(1); });
  EXPECT_EQ(n.load(), 30);
}
