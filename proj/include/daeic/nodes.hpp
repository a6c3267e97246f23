#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "daeic/matrix_function.hpp"

namespace daeic {

enum class NodeFamily { Chebyshev2, Equidistant, GaussLegendre, RadauLeft };

struct QuadRule {
  std::vector<double> nodes;    // on [-1,1], increasing
  std::vector<double> weights;  // sum to 2
};

namespace detail {

// Golub-Welsch: nodes/weights from the symmetric Jacobi matrix
inline QuadRule from_jacobi(const std::vector<double>& diag,
                            const std::vector<double>& offdiag, double mu0) {
  const int n = static_cast<int>(diag.size());
  Matrix J = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) J(i, i) = diag[i];
  for (int i = 0; i + 1 < n; ++i) {
    J(i, i + 1) = offdiag[i];
    J(i + 1, i) = offdiag[i];
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(J);
  QuadRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    r.nodes[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    r.weights[i] = mu0 * v0 * v0;
  }
  return r;
}

inline std::vector<double> legendre_offdiag(int n) {
  std::vector<double> b(n > 0 ? n - 1 : 0);
  for (int kk = 1; kk < n; ++kk) b[kk - 1] = kk / std::sqrt(4.0 * kk * kk - 1.0);
  return b;
}

}  // namespace detail

inline QuadRule gauss_legendre(int n) {
  if (n < 1) throw ConfigError("gauss_legendre: need n >= 1");
  return detail::from_jacobi(std::vector<double>(n, 0.0), detail::legendre_offdiag(n), 2.0);
}

// Gauss-Radau with the left endpoint -1 fixed
inline QuadRule radau_left(int n) {
  if (n < 1) throw ConfigError("radau_left: need n >= 1");
  if (n == 1) return QuadRule{{-1.0}, {2.0}};
  std::vector<double> diag(n, 0.0);
  std::vector<double> off = detail::legendre_offdiag(n);
  // modified last diagonal entry so that -1 becomes an eigenvalue
  const int nm = n - 1;
  Eigen::MatrixXd Jm = Matrix::Zero(nm, nm);
  for (int i = 0; i + 1 < nm; ++i) {
    Jm(i, i + 1) = off[i];
    Jm(i + 1, i) = off[i];
  }
  Jm.diagonal().array() += 1.0;  // J_{n-1} - a*I with a = -1
  Vector e = Vector::Zero(nm);
  e(nm - 1) = off[nm - 1] * off[nm - 1];
  Vector delta = Jm.fullPivLu().solve(e);
  diag[n - 1] = -1.0 + delta(nm - 1);
  QuadRule r = detail::from_jacobi(diag, off, 2.0);
  r.nodes.front() = -1.0;  // exact by construction, clean up rounding
  return r;
}

// Gauss-Lobatto nodes (both endpoints); interior points are the roots of
// P'_{n-1}, i.e. Gauss nodes of the Jacobi(1,1) weight
inline std::vector<double> lobatto_nodes(int n) {
  if (n < 2) throw ConfigError("lobatto_nodes: need n >= 2");
  std::vector<double> x(n);
  x.front() = -1.0;
  x.back() = 1.0;
  const int ni = n - 2;
  if (ni > 0) {
    std::vector<double> off(ni > 1 ? ni - 1 : 0);
    for (int kk = 1; kk < ni; ++kk)
      off[kk - 1] = std::sqrt(kk * (kk + 2.0) / ((2.0 * kk + 1.0) * (2.0 * kk + 3.0)));
    QuadRule r = detail::from_jacobi(std::vector<double>(ni, 0.0), off, 4.0 / 3.0);
    for (int i = 0; i < ni; ++i) x[i + 1] = r.nodes[i];
  }
  return x;
}

inline std::vector<double> reference_nodes(NodeFamily family, int M) {
  if (M < 2) throw ConfigError("reference_nodes: need M >= 2");
  std::vector<double> x(M);
  switch (family) {
    case NodeFamily::Chebyshev2:
      for (int i = 0; i < M; ++i)
        x[i] = std::cos((M - 1 - i) * M_PI / (M - 1));
      x.front() = -1.0;
      x.back() = 1.0;
      if (M % 2 == 1) x[(M - 1) / 2] = 0.0;
      break;
    case NodeFamily::Equidistant:
      for (int i = 0; i < M; ++i) x[i] = -1.0 + 2.0 * i / (M - 1);
      break;
    case NodeFamily::GaussLegendre:
      x = gauss_legendre(M).nodes;
      break;
    case NodeFamily::RadauLeft:
      x = radau_left(M).nodes;
      break;
  }
  return x;
}

struct Window {
  double c = 0.0;    // left end
  double tau = 1.0;  // length
  double map(double ref) const { return 0.5 * tau * (ref + 1.0) + c; }
};

enum class WindowMode { Central, Left, Right };

// places the approximation window around t_bar, shifted to stay inside the
// interval on which the coefficients are defined
inline Window place_window(double t_bar, double tau, WindowMode mode, Interval iv) {
  if (!(tau > 0.0)) throw ConfigError("place_window: tau must be positive");
  if (tau > iv.length() + 1e-14) throw ConfigError("place_window: window longer than interval");
  double c = 0.0;
  switch (mode) {
    case WindowMode::Central: c = t_bar - 0.5 * tau; break;
    case WindowMode::Left: c = t_bar - tau; break;
    case WindowMode::Right: c = t_bar; break;
  }
  const double shift_tol = 1e-12 * std::max(1.0, std::abs(iv.a) + std::abs(iv.b));
  if (!iv.contains(t_bar, shift_tol)) throw ConfigError("place_window: t_bar outside interval");
  c = std::clamp(c, iv.a, iv.b - tau);
  return Window{c, tau};
}

inline std::vector<double> make_nodes(NodeFamily family, int M, Window w) {
  std::vector<double> ref = reference_nodes(family, M);
  for (double& x : ref) x = w.map(x);
  return ref;
}

// barycentric interpolation weights; closed form for the Chebyshev points,
// product formula otherwise
inline std::vector<double> barycentric_weights(const std::vector<double>& ref_nodes,
                                               NodeFamily family = NodeFamily::Equidistant) {
  const int M = static_cast<int>(ref_nodes.size());
  std::vector<double> w(M);
  if (family == NodeFamily::Chebyshev2) {
    for (int i = 0; i < M; ++i) {
      double wi = ((M - 1 - i) % 2 == 0) ? 1.0 : -1.0;
      if (i == 0 || i == M - 1) wi *= 0.5;
      w[i] = wi;
    }
    return w;
  }
  for (int i = 0; i < M; ++i) {
    double prod = 1.0;
    for (int j = 0; j < M; ++j)
      if (j != i) prod *= (ref_nodes[i] - ref_nodes[j]);
    w[i] = 1.0 / prod;
  }
  // rescale to unit max magnitude so different M stay comparable
  double mx = 0.0;
  for (double wi : w) mx = std::max(mx, std::abs(wi));
  for (double& wi : w) wi /= mx;
  return w;
}

// barycentric evaluation of the interpolant with values f_i at nodes x_i
inline double barycentric_eval(const std::vector<double>& x, const std::vector<double>& w,
                               const std::vector<double>& f, double t) {
  const int M = static_cast<int>(x.size());
  double num = 0.0, den = 0.0;
  for (int i = 0; i < M; ++i) {
    const double d = t - x[i];
    if (std::abs(d) < 1e-300) return f[i];
    const double c = w[i] / d;
    num += c * f[i];
    den += c;
  }
  return num / den;
}

}  // namespace daeic
