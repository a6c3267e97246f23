#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "daeic/collocation.hpp"
#include "daeic/problems.hpp"

using namespace daeic;

TEST_CASE("grid construction") {
  WindowGrid g = build_grid(1.0, 2.0, 4);
  CHECK(g.h == 0.5);
  REQUIRE(g.breaks.size() == 5);
  CHECK(g.breaks.front() == 1.0);
  CHECK(g.breaks.back() == 3.0);
  CHECK_THROWS_AS(build_grid(0.0, 1.0, 0), ConfigError);
}

TEST_CASE("gram factor reduces to quadrature weights on gauss points") {
  CollocationConfig cfg;
  cfg.Nc = 3;
  cfg.Mc = 5;
  CollocationBasis b = make_collocation_basis(cfg);
  QuadRule q = gauss_legendre(5);
  Matrix L = b.W.transpose() * b.W;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const double expect = (i == j) ? 0.5 * q.weights[i] : 0.0;
      CHECK(L(i, j) == Catch::Approx(expect).margin(1e-13));
    }
}

namespace {

// kcf pair with polynomial data: the exact solution (t^2, 2t) lies in the
// ansatz space, so the least-squares minimizer must reproduce it
ProblemBundle kcf_poly() {
  ProblemBundle p = kcf_index2();
  p.exact = [](double t) {
    Vector x(2);
    x << t * t, 2.0 * t;
    return x;
  };
  p.dexact = [](double t) {
    Vector x(2);
    x << 2.0 * t, 2.0;
    return x;
  };
  p.q = manufacture_rhs(p.pair, p.exact, p.dexact);
  return p;
}

}  // namespace

TEST_CASE("representable solutions are reproduced to rounding") {
  ProblemBundle p = kcf_poly();
  CollocationConfig cfg;
  cfg.Nc = 3;
  cfg.Mc = 5;
  CollocationBasis basis = make_collocation_basis(cfg);
  WindowGrid grid = build_grid(0.0, 1.0, 3);
  PiecewisePolySolution sol = solve_window(p.pair, p.q, p.G_a, p.g_a, grid, basis);
  CHECK(sol.functional_residual < 1e-11);
  for (double t : {0.0, 0.1, 0.37, 0.5, 0.99, 1.0}) {
    CHECK((sol.eval(t) - p.exact(t)).norm() < 1e-10);
    CHECK(std::abs(sol.eval_Dx_prime(t)(0) - 2.0 * t) < 1e-9);
  }
  CHECK(hd1_error(sol, p.exact, p.dexact) < 1e-10);
}

TEST_CASE("norm computation has the expected value on a known function") {
  // solution x = (t, 1) on [0,1]: |x|^2 integrates to 4/3 and (x_1')^2 to 1,
  // so the error against the zero function is sqrt(7/3)
  ProblemBundle p = kcf_index2();
  p.exact = [](double t) {
    Vector x(2);
    x << t, 1.0;
    return x;
  };
  p.dexact = [](double) {
    Vector x(2);
    x << 1.0, 0.0;
    return x;
  };
  p.q = manufacture_rhs(p.pair, p.exact, p.dexact);
  CollocationConfig cfg;
  cfg.Nc = 2;
  cfg.Mc = 4;
  PiecewisePolySolution sol = solve_window(p.pair, p.q, p.G_a, p.g_a,
                                           build_grid(0.0, 1.0, 2),
                                           make_collocation_basis(cfg));
  auto zero = [](double) { return Vector::Zero(2); };
  CHECK(hd1_error(sol, zero, zero) == Catch::Approx(std::sqrt(7.0 / 3.0)).epsilon(1e-9));
}

TEST_CASE("zero data give the zero solution") {
  ProblemBundle p = campbell_moore();
  auto qzero = [](double) { return Vector::Zero(7); };
  CollocationConfig cfg;
  cfg.Nc = 4;
  cfg.Mc = 5;
  PiecewisePolySolution sol =
      solve_window(p.pair, qzero, p.G_a, Vector::Zero(4), build_grid(0.0, 0.5, 4),
                   make_collocation_basis(cfg));
  auto zero = [](double) { return Vector::Zero(7); };
  CHECK(hd1_error(sol, zero, zero) < 1e-10);
}

TEST_CASE("campbell-moore single window converges") {
  ProblemBundle p = campbell_moore();
  CollocationConfig cfg;
  cfg.Nc = 4;
  cfg.Mc = 5;
  CollocationBasis basis = make_collocation_basis(cfg);
  double prev = -1.0;
  for (int n : {5, 10}) {
    PiecewisePolySolution sol =
        solve_window(p.pair, p.q, p.G_a, p.g_a, build_grid(0.0, 5.0, n), basis);
    const double err = hd1_error(sol, p.exact, p.dexact);
    INFO("n = " << n << " err = " << err);
    CHECK(err < 0.5);
    if (prev > 0.0) CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("evaluation outside the window is refused") {
  ProblemBundle p = kcf_poly();
  CollocationConfig cfg;
  cfg.Nc = 2;
  cfg.Mc = 3;
  PiecewisePolySolution sol = solve_window(p.pair, p.q, p.G_a, p.g_a,
                                           build_grid(0.0, 1.0, 2),
                                           make_collocation_basis(cfg));
  CHECK_THROWS_AS(sol.eval(-0.5), DomainError);
  CHECK_THROWS_AS(sol.eval(1.5), DomainError);
  CHECK_NOTHROW(sol.eval(1.0));
}

TEST_CASE("config validation") {
  CollocationConfig cfg;
  cfg.Nc = 4;
  cfg.Mc = 3;
  CHECK_THROWS_AS(make_collocation_basis(cfg), ConfigError);
}
