#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "daeic/problems.hpp"
#include "daeic/reduction.hpp"

using namespace daeic;

TEST_CASE("kcf pair: index 2, no degrees of freedom") {
  ProblemBundle p = kcf_index2();
  ReductionConfig cfg;
  cfg.Md = 5;
  cfg.tau = 0.1;
  ReductionOutcome out = accurate_ic_matrix(p.pair, 0.0, cfg);
  CHECK(out.mu == 2);
  CHECK(out.dof == 0);
  REQUIRE(out.ranks.size() == 2);
  CHECK(out.ranks[0] == 1);
  CHECK(out.ranks[1] == 0);
  CHECK(out.G.rows() == 0);
  CHECK(out.G.cols() == 2);
  CHECK(gap_to_reference(out.G, p.G_exact(0.0)) == 0.0);
}

TEST_CASE("campbell-moore reduction recovers index, dof and G") {
  ProblemBundle p = campbell_moore();
  ReductionConfig cfg;
  cfg.Md = 7;
  cfg.tau = 0.1;
  for (auto strat : {BasisStrategy::SvdOde, BasisStrategy::QrFixedPivot}) {
    cfg.strategy = strat;
    ReductionOutcome out = accurate_ic_matrix(p.pair, 0.0, cfg);
    CHECK(out.mu == 3);
    CHECK(out.dof == 4);
    REQUIRE(out.ranks.size() == 3);
    CHECK(out.ranks[0] == 6);
    CHECK(out.ranks[1] == 5);
    CHECK(out.ranks[2] == 4);
    const double gap = gap_to_reference(out.G, p.G_exact(0.0));
    INFO("strategy " << (strat == BasisStrategy::SvdOde ? "svd" : "qr") << " gap " << gap);
    CHECK(gap < 1e-6);
    // the condition must not see the never-differentiated component
    CHECK(out.G.col(6).norm() < 1e-8 * out.G.norm());
  }
}

TEST_CASE("campbell-moore accepted initial condition matches the analytic block form") {
  ProblemBundle p = campbell_moore();
  CHECK((p.G_exact(0.0) - p.G_a).norm() < 1e-14);
  CHECK((p.G_a * p.exact(0.0) - p.g_a).norm() < 1e-14);
}

TEST_CASE("chua cases classify correctly with tiny gaps") {
  ReductionConfig cfg;
  cfg.Md = 5;
  cfg.tau = 0.5;
  for (auto which : {ChuaCase::Index1, ChuaCase::Index2, ChuaCase::Index3}) {
    ProblemBundle p = chua_riaza(which);
    ReductionOutcome out = accurate_ic_matrix(p.pair, 0.0, cfg);
    INFO(p.name);
    CHECK(out.mu == p.expected_mu);
    CHECK(out.dof == p.expected_dof);
    CHECK(gap_to_reference(out.G, p.G_exact(0.0)) < 1e-10);
  }
}

TEST_CASE("flow subspace pairs with the condition matrix") {
  ProblemBundle p = campbell_moore();
  ReductionConfig cfg;
  cfg.Md = 7;
  cfg.tau = 0.1;
  ReductionOutcome flow = flow_subspace(p.pair, 0.0, cfg);
  CHECK(flow.dof == 4);
  // accepted initial condition must be injective on the flow subspace
  TransferCompat tc = transfer_compat(p.G_a, flow.G);
  CHECK(tc.compatible);
  CHECK(tc.sigma_min > 1e-3);
  // degenerate condition matrix: drop a row's worth of information
  Matrix bad = p.G_a;
  bad.row(0).setZero();
  TransferCompat tc2 = transfer_compat(bad, flow.G);
  CHECK_FALSE(tc2.compatible);
}

TEST_CASE("one-sided windows work at the interval edge") {
  ProblemBundle p = campbell_moore();
  ReductionConfig cfg;
  cfg.Md = 5;
  cfg.tau = 0.1;
  cfg.mode = WindowMode::Right;
  ReductionOutcome out = accurate_ic_matrix(p.pair, 0.0, cfg);
  CHECK(out.mu == 3);
  CHECK(out.dof == 4);
  CHECK(out.window.c == 0.0);
  CHECK(gap_to_reference(out.G, p.G_exact(0.0)) < 1e-4);
}

TEST_CASE("least-squares differentiation variant classifies as well") {
  ProblemBundle p = campbell_moore();
  ReductionConfig cfg;
  cfg.Md = 7;
  cfg.Nd = 5;
  cfg.diff = DiffKind::LeastSquares;
  cfg.tau = 0.1;
  ReductionOutcome out = accurate_ic_matrix(p.pair, 0.0, cfg);
  CHECK(out.mu == 3);
  CHECK(out.dof == 4);
  CHECK(gap_to_reference(out.G, p.G_exact(0.0)) < 1e-5);
}

TEST_CASE("gap to reference rejects mismatched widths") {
  CHECK_THROWS_AS(gap_to_reference(Matrix::Zero(1, 3), Matrix::Zero(1, 4)), ConfigError);
}
