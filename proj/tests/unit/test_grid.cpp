#include <cmath>
#include <complex>
#include <string>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles/pi_model.hpp"
#include "ucadmm/errors.hpp"
#include "ucadmm/grid.hpp"
#include "ucadmm/report_io.hpp"

using namespace ucadmm;

namespace {

const char* kTiny = R"(function mpc = tiny
mpc.version = '2';
mpc.baseMVA = 100;
mpc.bus = [
	1	3	90	30	0	0	1	1	0	345	1	1.1	0.9;
	2	1	0	0	0	0	1	1	0	345	1	1.1	0.9;
];
mpc.gen = [
	1	0	0	300	-300	1	100	1	250	10	0	0	0	0	0	0	0	0	0	0	0;
];
mpc.branch = [
	1	2	0	0.1	0	0	0	0	0	0	1	-360	360;
];
mpc.gencost = [
	2	1500	0	3	0.11	5	150;
];
)";

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  if (pos != std::string::npos) s.replace(pos, from.size(), to);
  return s;
}

void expect_same(const GridCase& a, const GridCase& b) {
  ASSERT_EQ(a.base_mva(), b.base_mva());
  ASSERT_EQ(a.buses().size(), b.buses().size());
  for (std::size_t i = 0; i < a.buses().size(); ++i) {
    const auto &x = a.buses()[i], &y = b.buses()[i];
    EXPECT_EQ(x.id, y.id);
    EXPECT_EQ(x.type, y.type);
    EXPECT_EQ(x.pd, y.pd);
    EXPECT_EQ(x.qd, y.qd);
    EXPECT_EQ(x.gs, y.gs);
    EXPECT_EQ(x.bs, y.bs);
    EXPECT_EQ(x.vmin, y.vmin);
    EXPECT_EQ(x.vmax, y.vmax);
    EXPECT_EQ(x.base_kv, y.base_kv);
    EXPECT_EQ(x.is_reference, y.is_reference);
  }
  ASSERT_EQ(a.branches().size(), b.branches().size());
  for (std::size_t k = 0; k < a.branches().size(); ++k) {
    const auto &x = a.branches()[k], &y = b.branches()[k];
    EXPECT_EQ(x.from_bus, y.from_bus);
    EXPECT_EQ(x.to_bus, y.to_bus);
    EXPECT_EQ(x.prim.r, y.prim.r);
    EXPECT_EQ(x.prim.x, y.prim.x);
    EXPECT_EQ(x.prim.b, y.prim.b);
    EXPECT_EQ(x.prim.tap, y.prim.tap);
    EXPECT_EQ(x.prim.shift_deg, y.prim.shift_deg);
    EXPECT_EQ(x.rate_limit, y.rate_limit);
    EXPECT_EQ(x.rate_a_file, y.rate_a_file);
    EXPECT_EQ(x.y.gij, y.y.gij);
    EXPECT_EQ(x.y.bij, y.y.bij);
    EXPECT_EQ(x.y.bii, y.y.bii);
  }
  ASSERT_EQ(a.generators().size(), b.generators().size());
  for (std::size_t g = 0; g < a.generators().size(); ++g) {
    const auto &x = a.generators()[g], &y = b.generators()[g];
    EXPECT_EQ(x.bus, y.bus);
    EXPECT_EQ(x.pmin, y.pmin);
    EXPECT_EQ(x.pmax, y.pmax);
    EXPECT_EQ(x.qmin, y.qmin);
    EXPECT_EQ(x.qmax, y.qmax);
    EXPECT_EQ(x.c2, y.c2);
    EXPECT_EQ(x.c1, y.c1);
    EXPECT_EQ(x.c0, y.c0);
    EXPECT_EQ(x.startup_cost, y.startup_cost);
    EXPECT_EQ(x.shutdown_cost, y.shutdown_cost);
  }
}

}  // namespace

TEST(GridParse, Case9Counts) {
  const auto grid = fixture::load_case9();
  EXPECT_EQ(grid.buses().size(), 9u);
  EXPECT_EQ(grid.generators().size(), 3u);
  EXPECT_EQ(grid.branches().size(), 9u);
  EXPECT_EQ(grid.base_mva(), 100.0);
  EXPECT_EQ(grid.buses()[grid.reference_bus()].id, 1);
  const auto s = summarize(grid);
  EXPECT_EQ(s.reference_buses, 1u);
}

TEST(GridParse, IndexMapsAgreeWithElementLists) {
  const auto grid = fixture::load_case9();
  std::size_t gens = 0, ends = 0;
  for (std::size_t i = 0; i < grid.buses().size(); ++i) {
    for (auto g : grid.generators_at(i)) {
      EXPECT_EQ(grid.generators()[g].bus_index, i);
      ++gens;
    }
    for (const auto& e : grid.branch_ends_at(i)) {
      const auto& br = grid.branches()[e.branch];
      EXPECT_EQ(e.from_side ? br.from : br.to, i);
      ++ends;
    }
  }
  EXPECT_EQ(gens, 3u);
  EXPECT_EQ(ends, 18u);
}

TEST(GridParse, PerUnitDemandIsExactDivision) {
  const auto grid = fixture::load_case9();
  // bus 5: 90 MW, 30 MVAr
  const auto& b = grid.buses()[grid.bus_index(5)];
  EXPECT_EQ(b.pd, 90.0 / 100.0);
  EXPECT_EQ(b.qd, 30.0 / 100.0);
  EXPECT_EQ(grid.generators()[0].pmax, 250.0 / 100.0);
}

TEST(GridParse, QuadraticCostScaledToPerUnit) {
  const auto grid = parse_matpower(kTiny);
  const auto& g = grid.generators()[0];
  // 0.11 $/MW^2h at 100 MVA base
  EXPECT_NEAR(g.c2, 0.11 * 1e4, 1e-9);
  EXPECT_NEAR(g.c1, 5.0 * 100.0, 1e-12);
  EXPECT_EQ(g.c0, 150.0);
  EXPECT_EQ(g.startup_cost, 1500.0);
}

TEST(GridParse, EmptyTextNamesMissingBlock) {
  try {
    parse_matpower("");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_STREQ(e.what(), "missing mpc.bus");
  }
}

TEST(GridParse, MissingGencostBlock) {
  const std::string text = replace(kTiny, "mpc.gencost", "mpc.notcost");
  EXPECT_THROW(
      {
        try {
          parse_matpower(text);
        } catch (const ParseError& e) {
          EXPECT_NE(std::string(e.what()).find("mpc.gencost"), std::string::npos);
          throw;
        }
      },
      ParseError);
}

TEST(GridParse, NonNumericEntryReportsRowAndColumn) {
  const std::string text = replace(kTiny, "2	1	0	0	0	0	1	1	0	345", "2	1	abc	0	0	0	1	1	0	345");
  try {
    parse_matpower(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("column 3"), std::string::npos) << msg;
  }
}

TEST(GridParse, NoReferenceBusIsValidationError) {
  const std::string text = replace(kTiny, "1	3	90", "1	1	90");
  EXPECT_THROW(parse_matpower(text), ValidationError);
}

TEST(GridParse, TwoReferenceBusesListed) {
  const std::string text = replace(kTiny, "2	1	0	0", "2	3	0	0");
  try {
    parse_matpower(text);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("2 reference buses"), std::string::npos) << e.what();
  }
}

TEST(GridParse, VminAboveVmaxNamed) {
  const std::string text = replace(kTiny, "345	1	1.1	0.9;\n	2", "345	1	0.8	0.9;\n	2");
  try {
    parse_matpower(text);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("bus 1: Vmin > Vmax"), std::string::npos) << e.what();
  }
}

TEST(GridParse, CubicCostRejected) {
  const std::string text = replace(kTiny, "2	1500	0	3	0.11	5	150", "2	1500	0	4	1	0.11	5	150");
  EXPECT_THROW(parse_matpower(text), ParseError);
}

TEST(GridParse, ZeroRateBecomesTenTimesBase) {
  const auto grid = parse_matpower(kTiny);
  EXPECT_EQ(grid.branches()[0].rate_limit, 10.0);
  ParseOptions opts;
  opts.unlimited_rate_factor = 3.0;
  EXPECT_EQ(parse_matpower(kTiny, opts).branches()[0].rate_limit, 3.0);
}

TEST(GridParse, RoundTripThroughSerializer) {
  const auto a = fixture::load_case9();
  const auto b = parse_matpower(serialize_matpower(a));
  expect_same(a, b);
  const auto c = parse_matpower(kTiny);
  expect_same(c, parse_matpower(serialize_matpower(c)));
}

TEST(GridParse, AllQuantitiesFinite) {
  const auto grid = fixture::load_case9();
  for (const auto& br : grid.branches()) {
    for (double v : {br.y.gii, br.y.gij, br.y.gji, br.y.gjj, br.y.bii, br.y.bij, br.y.bji, br.y.bjj}) {
      EXPECT_TRUE(std::isfinite(v));
    }
  }
}

TEST(Admittance, PureReactance) {
  BranchPrimitives p;
  p.x = 0.1;
  const auto y = admittance_of(p);
  EXPECT_EQ(y.gij, 0.0);
  EXPECT_NEAR(y.bij, 10.0, 1e-12);
  EXPECT_NEAR(y.bii, -10.0, 1e-12);
}

TEST(Admittance, SymmetricWithoutTapOrShift) {
  BranchPrimitives p{0.02, 0.3, 0.05, 1.0, 0.0};
  const auto y = admittance_of(p);
  EXPECT_EQ(y.gij, y.gji);
  EXPECT_EQ(y.bij, y.bji);
  EXPECT_EQ(y.gii, y.gjj);
  EXPECT_EQ(y.bii, y.bjj);
}

TEST(Admittance, DegenerateBranch) {
  try {
    admittance_of(BranchPrimitives{0.0, 0.0, 0.0, 1.0, 0.0});
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("degenerate branch"), std::string::npos);
  }
}

TEST(Admittance, MatchesPhasorPortModelWithTapAndShift) {
  BranchPrimitives p{0.01, 0.12, 0.2, 0.97, 4.0};
  const auto y = admittance_of(p);
  const auto o = oracle::port_admittance({0, 1, p.r, p.x, p.b, p.tap, p.shift_deg});
  EXPECT_NEAR(y.gii, o.ff.real(), 1e-12);
  EXPECT_NEAR(y.bii, o.ff.imag(), 1e-12);
  EXPECT_NEAR(y.gij, o.ft.real(), 1e-12);
  EXPECT_NEAR(y.bij, o.ft.imag(), 1e-12);
  EXPECT_NEAR(y.gji, o.tf.real(), 1e-12);
  EXPECT_NEAR(y.bji, o.tf.imag(), 1e-12);
  EXPECT_NEAR(y.gjj, o.tt.real(), 1e-12);
  EXPECT_NEAR(y.bjj, o.tt.imag(), 1e-12);
}

TEST(Admittance, Case9YbusAgainstPhasorConstruction) {
  const auto grid = fixture::load_case9();
  const std::size_t n = grid.buses().size();
  std::vector<oracle::BranchData> data;
  std::vector<oracle::cd> shunts;
  for (const auto& b : grid.buses()) shunts.emplace_back(b.gs, b.bs);
  // branch columns re-read from the file in the test's own terms
  for (const auto& br : grid.branches()) {
    data.push_back({static_cast<int>(grid.bus_index(br.from_bus)), static_cast<int>(grid.bus_index(br.to_bus)),
                    br.prim.r, br.prim.x, br.prim.b, br.prim.tap, br.prim.shift_deg});
  }
  const auto Y = oracle::ybus(n, data, shunts);

  std::vector<std::vector<oracle::cd>> mine(n, std::vector<oracle::cd>(n));
  for (std::size_t i = 0; i < n; ++i) mine[i][i] += shunts[i];
  for (const auto& br : grid.branches()) {
    mine[br.from][br.from] += oracle::cd(br.y.gii, br.y.bii);
    mine[br.from][br.to] += oracle::cd(br.y.gij, br.y.bij);
    mine[br.to][br.from] += oracle::cd(br.y.gji, br.y.bji);
    mine[br.to][br.to] += oracle::cd(br.y.gjj, br.y.bjj);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) EXPECT_LT(std::abs(Y[i][j] - mine[i][j]), 1e-10) << i << "," << j;
  }
  // published value for bus 4 of the nine-bus system
  const auto y44 = mine[grid.bus_index(4)][grid.bus_index(4)];
  EXPECT_NEAR(y44.real(), 3.3074, 1e-3);
  EXPECT_NEAR(y44.imag(), -39.3089, 1e-3);
  // branch 1 is a pure reactance x = 0.0576
  EXPECT_NEAR(grid.branches()[0].y.bij, 1.0 / 0.0576, 1e-10);
}

TEST(GridSummary, JsonCarriesCounts) {
  const auto s = summarize(fixture::load_case9());
  const auto j = summary_json(s);
  EXPECT_NE(j.find("\"buses\": 9"), std::string::npos) << j;
  EXPECT_NE(j.find("\"generators\": 3"), std::string::npos) << j;
}
