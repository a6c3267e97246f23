#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseQR>
#include <cmath>
#include <vector>

#include "daeic/matrix_function.hpp"
#include "daeic/nodes.hpp"

namespace daeic {

struct CollocationConfig {
  int Nc = 4;  // polynomial degree of the differentiated components
  int Mc = 5;  // collocation points per subinterval (>= Nc + 1 for overdetermination)
  NodeFamily family = NodeFamily::GaussLegendre;
};

struct WindowGrid {
  double t0 = 0.0;
  double H = 1.0;
  int n = 1;
  double h = 1.0;
  std::vector<double> breaks;
};

inline WindowGrid build_grid(double t0, double H, int n) {
  if (n < 1 || !(H > 0.0)) throw ConfigError("build_grid: need n >= 1 and H > 0");
  WindowGrid g;
  g.t0 = t0;
  g.H = H;
  g.n = n;
  g.h = H / n;
  g.breaks.resize(n + 1);
  for (int j = 0; j <= n; ++j) g.breaks[j] = t0 + H * j / n;
  return g;
}

namespace detail {

inline std::vector<double> unit_interval(const std::vector<double>& ref) {
  std::vector<double> x(ref.size());
  for (size_t i = 0; i < ref.size(); ++i) x[i] = 0.5 * (ref[i] + 1.0);
  return x;
}

inline std::vector<double> product_weights(const std::vector<double>& x) {
  const int M = static_cast<int>(x.size());
  std::vector<double> w(M);
  for (int i = 0; i < M; ++i) {
    double p = 1.0;
    for (int j = 0; j < M; ++j)
      if (j != i) p *= (x[i] - x[j]);
    w[i] = 1.0 / p;
  }
  return w;
}

inline Vector cardinal_values(const std::vector<double>& x, const std::vector<double>& w,
                              double s) {
  const int M = static_cast<int>(x.size());
  Vector c = Vector::Zero(M);
  for (int i = 0; i < M; ++i)
    if (std::abs(s - x[i]) < 1e-14) {
      c(i) = 1.0;
      return c;
    }
  double den = 0.0;
  for (int i = 0; i < M; ++i) {
    c(i) = w[i] / (s - x[i]);
    den += c(i);
  }
  c /= den;
  return c;
}

inline Matrix lagrange_diff_matrix(const std::vector<double>& x,
                                   const std::vector<double>& w) {
  const int M = static_cast<int>(x.size());
  Matrix D(M, M);
  for (int i = 0; i < M; ++i) {
    double diag = 0.0;
    for (int j = 0; j < M; ++j)
      if (j != i) {
        D(i, j) = (w[j] / w[i]) / (x[i] - x[j]);
        diag -= D(i, j);
      }
    D(i, i) = diag;
  }
  return D;
}

}  // namespace detail

// node sets and cardinal-function tables shared by every subinterval
struct CollocationBasis {
  int Nc = 0, Mc = 0;
  std::vector<double> u, wu;  // Nc+1 Lobatto points on [0,1] (differentiated comps)
  std::vector<double> v, wv;  // Nc Gauss points on [0,1] (algebraic comps)
  std::vector<double> theta;  // Mc collocation points on [0,1]
  Matrix Du;                  // differentiation on the u-points, d/ds
  Matrix Lval, Lder;          // Mc x (Nc+1): u-cardinals and derivatives at theta
  Matrix Aval;                // Mc x Nc: v-cardinals at theta
  Vector Aval0;               // v-cardinals at s = 0 (for initial conditions)
  Matrix W;                   // upper Cholesky factor of the theta-cardinal Gram matrix
};

inline CollocationBasis make_collocation_basis(const CollocationConfig& cfg) {
  if (cfg.Nc < 1) throw ConfigError("collocation: need Nc >= 1");
  if (cfg.Mc < cfg.Nc + 1) throw ConfigError("collocation: need Mc >= Nc + 1");
  CollocationBasis b;
  b.Nc = cfg.Nc;
  b.Mc = cfg.Mc;
  {
    auto lob = lobatto_nodes(cfg.Nc + 1);
    b.u = detail::unit_interval(lob);
  }
  b.u.front() = 0.0;
  b.u.back() = 1.0;
  b.v = detail::unit_interval(gauss_legendre(cfg.Nc).nodes);
  switch (cfg.family) {
    case NodeFamily::GaussLegendre:
      b.theta = detail::unit_interval(gauss_legendre(cfg.Mc).nodes);
      break;
    case NodeFamily::RadauLeft:
      b.theta = detail::unit_interval(radau_left(cfg.Mc).nodes);
      b.theta.front() = 0.0;
      break;
    case NodeFamily::Chebyshev2:
    case NodeFamily::Equidistant:
      b.theta = detail::unit_interval(reference_nodes(cfg.family, cfg.Mc));
      break;
  }
  b.wu = detail::product_weights(b.u);
  b.wv = detail::product_weights(b.v);
  b.Du = detail::lagrange_diff_matrix(b.u, b.wu);

  b.Lval.resize(cfg.Mc, cfg.Nc + 1);
  b.Lder.resize(cfg.Mc, cfg.Nc + 1);
  b.Aval.resize(cfg.Mc, cfg.Nc);
  for (int i = 0; i < cfg.Mc; ++i) {
    Vector cu = detail::cardinal_values(b.u, b.wu, b.theta[i]);
    b.Lval.row(i) = cu.transpose();
    b.Lder.row(i) = cu.transpose() * b.Du;  // cardinal derivatives are degree Nc - 1
    b.Aval.row(i) = detail::cardinal_values(b.v, b.wv, b.theta[i]).transpose();
  }
  b.Aval0 = detail::cardinal_values(b.v, b.wv, 0.0);

  // exact Gram matrix of the theta-cardinals on (0,1); Gauss rule with Mc
  // points integrates the degree 2Mc-2 products exactly
  std::vector<double> wt = detail::product_weights(b.theta);
  QuadRule q = gauss_legendre(cfg.Mc);
  Matrix L = Matrix::Zero(cfg.Mc, cfg.Mc);
  for (int qq = 0; qq < cfg.Mc; ++qq) {
    const double s = 0.5 * (q.nodes[qq] + 1.0);
    const double wq = 0.5 * q.weights[qq];
    Vector c = detail::cardinal_values(b.theta, wt, s);
    L += wq * c * c.transpose();
  }
  Eigen::LLT<Matrix> llt(L);
  if (llt.info() != Eigen::Success)
    throw DegenerateInputError("collocation: cardinal Gram matrix not positive definite");
  b.W = llt.matrixU();
  return b;
}

struct AssembledLsq {
  Eigen::SparseMatrix<double> A;
  Vector rhs;
  int n = 0, m = 0, k = 0, Nc = 0, l = 0;
  int cols_diff = 0;  // unknowns per differentiated component

  int col_diff(int comp, int j, int loc) const { return comp * cols_diff + j * Nc + loc; }
  int col_alg(int comp, int j, int loc) const {
    return k * cols_diff + comp * (n * Nc) + j * Nc + loc;
  }
};

// least-squares system for one window: weighted collocation residuals of
// E x' + F x = q plus the initial-condition rows G x(t0) = g
inline AssembledLsq assemble(const DaePair& pair, const VectorFunction& q, const Matrix& G,
                             const Vector& g, const WindowGrid& grid,
                             const CollocationBasis& basis) {
  const int m = pair.m, k = pair.k;
  const int n = grid.n, Nc = basis.Nc, Mc = basis.Mc;
  const int l = static_cast<int>(G.rows());
  if (l > 0 && G.cols() != m) throw ConfigError("assemble: G has wrong width");
  if (g.size() != l) throw ConfigError("assemble: g length does not match G");

  AssembledLsq sys;
  sys.n = n;
  sys.m = m;
  sys.k = k;
  sys.Nc = Nc;
  sys.l = l;
  sys.cols_diff = n * Nc + 1;
  const int cols = k * sys.cols_diff + (m - k) * n * Nc;
  const int rows = l + n * Mc * m;

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(rows) * (k * (Nc + 1) + (m - k) * Nc));
  Vector rhs = Vector::Zero(rows);

  for (int e = 0; e < l; ++e) {
    for (int comp = 0; comp < k; ++comp)
      if (G(e, comp) != 0.0) trip.emplace_back(e, sys.col_diff(comp, 0, 0), G(e, comp));
    for (int comp = 0; comp < m - k; ++comp)
      if (G(e, k + comp) != 0.0)
        for (int bcol = 0; bcol < Nc; ++bcol)
          trip.emplace_back(e, sys.col_alg(comp, 0, bcol), G(e, k + comp) * basis.Aval0(bcol));
    rhs(e) = g(e);
  }

  const int nloc = k * (Nc + 1) + (m - k) * Nc;
  Matrix block(Mc * m, nloc);
  Vector bloc(Mc * m);
  std::vector<int> gcol(nloc);
  const double sqh = std::sqrt(grid.h);

  for (int j = 0; j < n; ++j) {
    block.setZero();
    int lc = 0;
    for (int comp = 0; comp < k; ++comp)
      for (int loc = 0; loc <= Nc; ++loc) gcol[lc++] = sys.col_diff(comp, j, loc);
    for (int comp = 0; comp < m - k; ++comp)
      for (int loc = 0; loc < Nc; ++loc) gcol[lc++] = sys.col_alg(comp, j, loc);

    for (int i = 0; i < Mc; ++i) {
      const double t = grid.breaks[j] + grid.h * basis.theta[i];
      const Matrix E = pair.E(t);
      const Matrix F = pair.F(t);
      const Vector qt = q(t);
      for (int e = 0; e < m; ++e) {
        const int rr = i * m + e;
        int c = 0;
        for (int comp = 0; comp < k; ++comp)
          for (int loc = 0; loc <= Nc; ++loc, ++c)
            block(rr, c) = E(e, comp) * basis.Lder(i, loc) / grid.h +
                           F(e, comp) * basis.Lval(i, loc);
        for (int comp = 0; comp < m - k; ++comp)
          for (int loc = 0; loc < Nc; ++loc, ++c)
            block(rr, c) = F(e, k + comp) * basis.Aval(i, loc);
        bloc(rr) = qt(e);
      }
    }

    // weight by sqrt(h) * (W (x) I_m): turns the row block into the Cholesky
    // square root of the local L2 functional
    const int row0 = l + j * Mc * m;
    for (int i2 = 0; i2 < Mc; ++i2)
      for (int e = 0; e < m; ++e) {
        const int rr = row0 + i2 * m + e;
        double racc = 0.0;
        for (int i = i2; i < Mc; ++i) racc += basis.W(i2, i) * bloc(i * m + e);
        rhs(rr) = sqh * racc;
        for (int c = 0; c < nloc; ++c) {
          double acc = 0.0;
          for (int i = i2; i < Mc; ++i) acc += basis.W(i2, i) * block(i * m + e, c);
          if (acc != 0.0) trip.emplace_back(rr, gcol[c], sqh * acc);
        }
      }
  }

  sys.A.resize(rows, cols);
  sys.A.setFromTriplets(trip.begin(), trip.end());
  sys.A.makeCompressed();
  sys.rhs = rhs;
  return sys;
}

struct PiecewisePolySolution {
  WindowGrid grid;
  int m = 0, k = 0, Nc = 0;
  std::vector<double> u, wu, v, wv;
  Matrix Du;
  std::vector<std::vector<double>> diff_vals;  // k components, n*Nc+1 values each
  std::vector<std::vector<double>> alg_vals;   // m-k components, n*Nc values each
  double functional_residual = 0.0;

  int locate(double t) const {
    const double tol = 1e-9 * std::max(1.0, std::abs(grid.t0) + grid.H);
    if (t < grid.t0 - tol || t > grid.t0 + grid.H + tol)
      throw DomainError("solution evaluated outside its window");
    int j = static_cast<int>(std::floor((t - grid.t0) / grid.h));
    return std::clamp(j, 0, grid.n - 1);
  }

  Vector eval(double t) const {
    const int j = locate(t);
    const double s = (t - grid.breaks[j]) / grid.h;
    Vector x(m);
    Vector cu = detail::cardinal_values(u, wu, s);
    Vector cv = detail::cardinal_values(v, wv, s);
    for (int comp = 0; comp < k; ++comp) {
      double acc = 0.0;
      for (int loc = 0; loc <= Nc; ++loc) acc += cu(loc) * diff_vals[comp][j * Nc + loc];
      x(comp) = acc;
    }
    for (int comp = 0; comp < m - k; ++comp) {
      double acc = 0.0;
      for (int loc = 0; loc < Nc; ++loc) acc += cv(loc) * alg_vals[comp][j * Nc + loc];
      x(k + comp) = acc;
    }
    return x;
  }

  // derivative of the differentiated part (Dx)'
  Vector eval_Dx_prime(double t) const {
    const int j = locate(t);
    const double s = (t - grid.breaks[j]) / grid.h;
    Vector der = (detail::cardinal_values(u, wu, s).transpose() * Du).transpose();
    Vector out(k);
    for (int comp = 0; comp < k; ++comp) {
      double acc = 0.0;
      for (int loc = 0; loc <= Nc; ++loc) acc += der(loc) * diff_vals[comp][j * Nc + loc];
      out(comp) = acc / grid.h;
    }
    return out;
  }
};

inline PiecewisePolySolution solve_window(const DaePair& pair, const VectorFunction& q,
                                          const Matrix& G, const Vector& g,
                                          const WindowGrid& grid,
                                          const CollocationBasis& basis) {
  AssembledLsq sys = assemble(pair, q, G, g, grid, basis);
  Eigen::SparseQR<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> qr;
  qr.compute(sys.A);
  if (qr.info() != Eigen::Success)
    throw SingularWindowError("collocation: sparse QR factorization failed", 0.0);
  if (qr.rank() < sys.A.cols()) {
    double smin = 0.0;
    if (sys.A.cols() <= 1200) {
      Eigen::JacobiSVD<Matrix> svd(Matrix(sys.A));
      smin = svd.singularValues()(svd.singularValues().size() - 1);
    }
    throw SingularWindowError("collocation: window system is rank deficient", smin);
  }
  Vector x = qr.solve(sys.rhs);

  PiecewisePolySolution sol;
  sol.grid = grid;
  sol.m = pair.m;
  sol.k = pair.k;
  sol.Nc = basis.Nc;
  sol.u = basis.u;
  sol.wu = basis.wu;
  sol.v = basis.v;
  sol.wv = basis.wv;
  sol.Du = basis.Du;
  sol.diff_vals.assign(pair.k, std::vector<double>(grid.n * basis.Nc + 1));
  sol.alg_vals.assign(pair.m - pair.k, std::vector<double>(grid.n * basis.Nc));
  for (int comp = 0; comp < pair.k; ++comp)
    for (int idx = 0; idx <= grid.n * basis.Nc; ++idx)
      sol.diff_vals[comp][idx] = x(comp * sys.cols_diff + idx);
  for (int comp = 0; comp < pair.m - pair.k; ++comp)
    for (int idx = 0; idx < grid.n * basis.Nc; ++idx)
      sol.alg_vals[comp][idx] = x(pair.k * sys.cols_diff + comp * grid.n * basis.Nc + idx);
  sol.functional_residual = (sys.A * x - sys.rhs).norm();
  return sol;
}

// error in the norm that controls both the solution and the derivative of
// its differentiated part
inline double hd1_error(const PiecewisePolySolution& sol, const VectorFunction& x_exact,
                        const VectorFunction& dx_exact) {
  const int NQ = sol.Nc + 3;
  QuadRule qr = gauss_legendre(NQ);
  double acc = 0.0;
  for (int j = 0; j < sol.grid.n; ++j) {
    const double a = sol.grid.breaks[j];
    for (int qq = 0; qq < NQ; ++qq) {
      const double t = a + 0.5 * sol.grid.h * (qr.nodes[qq] + 1.0);
      const double w = 0.5 * sol.grid.h * qr.weights[qq];
      Vector ex = sol.eval(t) - x_exact(t);
      Vector ed = sol.eval_Dx_prime(t) - dx_exact(t).head(sol.k);
      acc += w * (ex.squaredNorm() + ed.squaredNorm());
    }
  }
  return std::sqrt(acc);
}

}  // namespace daeic
