#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <limits>
#include <random>

#include "daeic/nodes.hpp"
#include "daeic/spectral_diff.hpp"

using namespace daeic;

TEST_CASE("chebyshev nodes hit the closed-form values") {
  auto x = reference_nodes(NodeFamily::Chebyshev2, 5);
  const double r = std::sqrt(2.0) / 2.0;
  std::vector<double> expect{-1.0, -r, 0.0, r, 1.0};
  for (int i = 0; i < 5; ++i) CHECK(x[i] == Catch::Approx(expect[i]).margin(1e-15));
}

TEST_CASE("gauss-legendre two-point rule on a window") {
  Window w{0.0, 1.0};
  auto x = make_nodes(NodeFamily::GaussLegendre, 2, w);
  CHECK(x[0] == Catch::Approx((3.0 - std::sqrt(3.0)) / 6.0).epsilon(1e-14));
  CHECK(x[1] == Catch::Approx((3.0 + std::sqrt(3.0)) / 6.0).epsilon(1e-14));
}

TEST_CASE("gauss-legendre weights integrate low-degree polynomials exactly") {
  for (int n : {1, 2, 3, 5, 8}) {
    QuadRule q = gauss_legendre(n);
    for (int deg = 0; deg <= 2 * n - 1; ++deg) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += q.weights[i] * std::pow(q.nodes[i], deg);
      const double exact = (deg % 2 == 0) ? 2.0 / (deg + 1) : 0.0;
      CHECK(acc == Catch::Approx(exact).margin(1e-13));
    }
  }
}

TEST_CASE("radau nodes include the left endpoint") {
  QuadRule q = radau_left(3);
  CHECK(q.nodes[0] == -1.0);
  CHECK(q.nodes[1] == Catch::Approx((1.0 - std::sqrt(6.0)) / 5.0).epsilon(1e-12));
  CHECK(q.nodes[2] == Catch::Approx((1.0 + std::sqrt(6.0)) / 5.0).epsilon(1e-12));
  // Radau rules are exact up to degree 2n-2
  for (int n : {2, 3, 4, 6}) {
    QuadRule r = radau_left(n);
    for (int deg = 0; deg <= 2 * n - 2; ++deg) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += r.weights[i] * std::pow(r.nodes[i], deg);
      const double exact = (deg % 2 == 0) ? 2.0 / (deg + 1) : 0.0;
      CHECK(acc == Catch::Approx(exact).margin(1e-12));
    }
  }
}

TEST_CASE("lobatto nodes") {
  auto x = lobatto_nodes(4);
  CHECK(x[0] == -1.0);
  CHECK(x[1] == Catch::Approx(-1.0 / std::sqrt(5.0)).epsilon(1e-13));
  CHECK(x[2] == Catch::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-13));
  CHECK(x[3] == 1.0);
}

TEST_CASE("equidistant barycentric weights are binomial up to scaling") {
  auto x = reference_nodes(NodeFamily::Equidistant, 5);
  auto w = barycentric_weights(x);
  // proportional to (-1)^i * C(4, i)
  std::vector<double> ref{1.0, -4.0, 6.0, -4.0, 1.0};
  const double s = w[2] / ref[2];
  for (int i = 0; i < 5; ++i) CHECK(w[i] == Catch::Approx(s * ref[i]).epsilon(1e-12));
}

TEST_CASE("three-point differentiation matrix has the classic entries") {
  Window w{-1.0, 2.0};
  for (auto fam : {NodeFamily::Chebyshev2, NodeFamily::Equidistant}) {
    DiffOperator d = diff_matrix_interp(fam, 3, w);
    Matrix expect(3, 3);
    expect << -1.5, 2.0, -0.5,
              -0.5, 0.0, 0.5,
               0.5, -2.0, 1.5;
    CHECK((d.Dmat - expect).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("interpolatory differentiation is exact on polynomials up to degree M-1") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  Window w{0.3, 0.25};
  for (int M : {2, 3, 5, 8}) {
    DiffOperator d = diff_matrix_interp(NodeFamily::Chebyshev2, M, w);
    std::vector<double> a(M);
    for (auto& ai : a) ai = coef(rng);
    std::vector<double> f(M), df_exact(M);
    for (int i = 0; i < M; ++i) {
      double v = 0.0, dv = 0.0;
      for (int j = M - 1; j >= 0; --j) v = v * d.nodes[i] + a[j];
      for (int j = M - 1; j >= 1; --j) dv = dv * d.nodes[i] + j * a[j];
      f[i] = v;
      df_exact[i] = dv;
    }
    auto df = diff_apply(d, f);
    for (int i = 0; i < M; ++i) CHECK(std::abs(df[i] - df_exact[i]) < 1e-12 * (1.0 + std::abs(df_exact[i])) + 1e-12);
  }
}

TEST_CASE("least-squares differentiation matches a dense normal-equation oracle") {
  Window w{-1.0, 2.0};
  const int M = 4, N = 2;
  DiffOperator d = diff_matrix_lsq(NodeFamily::Chebyshev2, M, N, w);
  // oracle: monomial basis, normal equations solved densely
  Matrix V(M, N + 1), Vd(M, N + 1);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j <= N; ++j) {
      V(i, j) = std::pow(d.ref_nodes[i], j);
      Vd(i, j) = (j == 0) ? 0.0 : j * std::pow(d.ref_nodes[i], j - 1);
    }
  Matrix D_oracle = Vd * (V.transpose() * V).ldlt().solve(V.transpose());
  CHECK((d.Dmat - D_oracle).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("least-squares differentiation is exact on polynomials up to degree N") {
  Window w{0.1, 0.4};
  const int M = 6, N = 3;
  DiffOperator d = diff_matrix_lsq(NodeFamily::Chebyshev2, M, N, w);
  std::vector<double> f(M), dfe(M);
  for (int i = 0; i < M; ++i) {
    const double t = d.nodes[i];
    f[i] = 1.0 + t - 2.0 * t * t + 0.5 * t * t * t;
    dfe[i] = 1.0 - 4.0 * t + 1.5 * t * t;
  }
  auto df = diff_apply(d, f);
  for (int i = 0; i < M; ++i) CHECK(std::abs(df[i] - dfe[i]) < 1e-12);
}

TEST_CASE("null-sum rows kill constants exactly") {
  for (int M : {2, 5, 9}) {
    Window w{1.0, 0.01};
    DiffOperator d = diff_matrix_interp(NodeFamily::Chebyshev2, M, w);
    std::vector<double> f(M, 3.7);
    auto df = diff_apply(d, f);
    // the difference form makes constants map to the exact zero vector
    for (double v : df) CHECK(v == 0.0);
    // row sums of the unscaled coefficients vanish to rounding of the row
    const Matrix& R = d.reference_matrix();
    for (int i = 0; i < M; ++i)
      CHECK(std::abs(R.row(i).sum()) <=
            4.0 * std::numeric_limits<double>::epsilon() * R.row(i).cwiseAbs().sum());
  }
}

TEST_CASE("differentiation scales like 1/tau") {
  DiffOperator d1 = diff_matrix_interp(NodeFamily::Chebyshev2, 5, Window{0.0, 0.2});
  DiffOperator d2 = diff_matrix_interp(NodeFamily::Chebyshev2, 5, Window{0.0, 0.1});
  CHECK((d2.Dmat - 2.0 * d1.Dmat).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("convergence of spectral differentiation on exp") {
  // error at the window midpoint vs tau, slope should be about N = M-1
  const int M = 4;
  std::vector<double> taus{0.2, 0.1, 0.05, 0.025};
  std::vector<double> errs;
  for (double tau : taus) {
    Window w{-tau / 2.0, tau};
    DiffOperator d = diff_matrix_interp(NodeFamily::Chebyshev2, M, w);
    std::vector<double> f(M);
    for (int i = 0; i < M; ++i) f[i] = std::exp(d.nodes[i]);
    auto df = diff_apply(d, f);
    double e = 0.0;
    for (int i = 0; i < M; ++i) e = std::max(e, std::abs(df[i] - std::exp(d.nodes[i])));
    errs.push_back(e);
  }
  double slope_sum = 0.0;
  for (size_t i = 0; i + 1 < errs.size(); ++i)
    slope_sum += std::log(errs[i] / errs[i + 1]) / std::log(2.0);
  const double slope = slope_sum / (errs.size() - 1);
  CHECK(slope >= M - 1 - 0.5);
}

TEST_CASE("norm bound report") {
  SECTION("chebyshev M=3 derived value") {
    DiffOperator d = diff_matrix_interp(NodeFamily::Chebyshev2, 3, Window{-1.0, 2.0});
    auto r = norm_bound_report(d);
    CHECK(r.inf_norm == Catch::Approx(4.0).margin(1e-13));
    CHECK(r.bound == 64.0);
    CHECK(r.satisfied);
  }
  SECTION("chebyshev quadratic bound holds for M in 2..20") {
    for (int M = 2; M <= 20; ++M) {
      auto r = norm_bound_report(diff_matrix_interp(NodeFamily::Chebyshev2, M, Window{0.0, 1.0}));
      INFO("M = " << M << " inf_norm " << r.inf_norm << " bound " << r.bound);
      CHECK(r.satisfied);
    }
  }
  SECTION("equidistant exponential lower bound for M in 2..20") {
    for (int M = 2; M <= 20; ++M) {
      auto r = norm_bound_report(diff_matrix_interp(NodeFamily::Equidistant, M, Window{0.0, 1.0}));
      INFO("M = " << M << " inf_norm " << r.inf_norm << " bound " << r.bound);
      CHECK(r.satisfied);
      CHECK_FALSE(r.is_upper);
    }
  }
}

TEST_CASE("window placement") {
  Interval iv{0.0, 5.0};
  SECTION("central fits in the interior") {
    Window w = place_window(2.0, 0.1, WindowMode::Central, iv);
    CHECK(w.c == Catch::Approx(1.95));
    CHECK(w.tau == 0.1);
  }
  SECTION("central at the boundary is clamped") {
    Window w = place_window(0.0, 0.1, WindowMode::Central, iv);
    CHECK(w.c == 0.0);
  }
  SECTION("rejects bad configurations") {
    CHECK_THROWS_AS(place_window(2.0, -1.0, WindowMode::Central, iv), ConfigError);
    CHECK_THROWS_AS(place_window(9.0, 0.1, WindowMode::Central, iv), ConfigError);
    CHECK_THROWS_AS(place_window(2.0, 6.0, WindowMode::Central, iv), ConfigError);
  }
}
