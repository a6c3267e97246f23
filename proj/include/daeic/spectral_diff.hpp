#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "daeic/matrix_function.hpp"
#include "daeic/nodes.hpp"

namespace daeic {

enum class DiffKind { Interpolatory, LeastSquares };

// discrete differentiation on a window: values at the M nodes are mapped to
// approximate derivative values at the same nodes.  Dmat carries the 2/tau
// scaling; its rows sum to zero exactly so that constants are annihilated.
struct DiffOperator {
  DiffKind kind = DiffKind::Interpolatory;
  NodeFamily family = NodeFamily::Chebyshev2;
  int M = 0;  // node count
  int N = 0;  // polynomial degree being differentiated exactly
  Window window;
  std::vector<double> ref_nodes;  // on [-1,1]
  std::vector<double> nodes;      // on the window
  Matrix Dref;                    // unscaled, rows sum to zero exactly
  Matrix Dmat;                    // (2/tau) * Dref

  const Matrix& reference_matrix() const { return Dref; }
};

namespace detail {

inline Matrix nullsum_fix(Matrix D) {
  for (int i = 0; i < D.rows(); ++i) {
    D(i, i) = 0.0;
    D(i, i) = -D.row(i).sum();
  }
  return D;
}

// Chebyshev polynomials and derivatives at a point, degrees 0..N
inline void chebyshev_row(double x, int N, Vector& T, Vector& dT) {
  T.resize(N + 1);
  dT.resize(N + 1);
  T(0) = 1.0;
  dT(0) = 0.0;
  if (N >= 1) {
    T(1) = x;
    dT(1) = 1.0;
  }
  for (int j = 2; j <= N; ++j) {
    T(j) = 2.0 * x * T(j - 1) - T(j - 2);
    dT(j) = 2.0 * T(j - 1) + 2.0 * x * dT(j - 1) - dT(j - 2);
  }
}

}  // namespace detail

// exact differentiation matrix of the degree M-1 interpolant, in barycentric
// form D_ij = (w_j/w_i)/(x_i - x_j)
inline DiffOperator diff_matrix_interp(NodeFamily family, int M, Window w) {
  DiffOperator d;
  d.kind = DiffKind::Interpolatory;
  d.family = family;
  d.M = M;
  d.N = M - 1;
  d.window = w;
  d.ref_nodes = reference_nodes(family, M);
  d.nodes.resize(M);
  for (int i = 0; i < M; ++i) d.nodes[i] = w.map(d.ref_nodes[i]);
  std::vector<double> bw = barycentric_weights(d.ref_nodes, family);
  Matrix D(M, M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      if (j != i) D(i, j) = (bw[j] / bw[i]) / (d.ref_nodes[i] - d.ref_nodes[j]);
  d.Dref = detail::nullsum_fix(D);
  d.Dmat = (2.0 / w.tau) * d.Dref;
  return d;
}

// differentiation of the degree-N least-squares fit through M > N+1 nodes;
// the diagonal is replaced so that rows sum to zero exactly
inline DiffOperator diff_matrix_lsq(NodeFamily family, int M, int N, Window w) {
  if (N + 1 > M) throw ConfigError("diff_matrix_lsq: need N + 1 <= M");
  DiffOperator d;
  d.kind = DiffKind::LeastSquares;
  d.family = family;
  d.M = M;
  d.N = N;
  d.window = w;
  d.ref_nodes = reference_nodes(family, M);
  d.nodes.resize(M);
  for (int i = 0; i < M; ++i) d.nodes[i] = w.map(d.ref_nodes[i]);
  Matrix V(M, N + 1), VD(M, N + 1);
  Vector T, dT;
  for (int i = 0; i < M; ++i) {
    detail::chebyshev_row(d.ref_nodes[i], N, T, dT);
    V.row(i) = T.transpose();
    VD.row(i) = dT.transpose();
  }
  // D = VD * pinv(V)
  Matrix D = VD * V.completeOrthogonalDecomposition().pseudoInverse();
  d.Dref = detail::nullsum_fix(D);
  d.Dmat = (2.0 / w.tau) * d.Dref;
  return d;
}

inline DiffOperator make_diff_operator(DiffKind kind, NodeFamily family, int M, int N,
                                       Window w) {
  return kind == DiffKind::Interpolatory ? diff_matrix_interp(family, M, w)
                                         : diff_matrix_lsq(family, M, N, w);
}

// applies the operator in null-sum form, which is exact on constants
// independently of rounding in the coefficients
inline std::vector<Matrix> diff_apply(const DiffOperator& d, const std::vector<Matrix>& values) {
  if (static_cast<int>(values.size()) != d.M)
    throw ConfigError("apply: stack size does not match node count");
  std::vector<Matrix> out(values.size());
  for (int i = 0; i < d.M; ++i) {
    Matrix acc = Matrix::Zero(values[i].rows(), values[i].cols());
    for (int j = 0; j < d.M; ++j)
      if (j != i) acc += d.Dmat(i, j) * (values[j] - values[i]);
    out[i] = std::move(acc);
  }
  return out;
}

inline SampledMatrixStack diff_apply(const DiffOperator& d, const SampledMatrixStack& s) {
  SampledMatrixStack out;
  out.nodes = s.nodes;
  out.values = diff_apply(d, s.values);
  return out;
}

inline std::vector<double> diff_apply(const DiffOperator& d, const std::vector<double>& f) {
  std::vector<double> out(f.size());
  for (int i = 0; i < d.M; ++i) {
    double acc = 0.0;
    for (int j = 0; j < d.M; ++j)
      if (j != i) acc += d.Dmat(i, j) * (f[j] - f[i]);
    out[i] = acc;
  }
  return out;
}

struct NormBoundReport {
  double inf_norm = 0.0;  // of the unscaled reference-interval matrix
  double bound = 0.0;
  bool satisfied = false;  // upper bound for Chebyshev, lower bound otherwise
  bool is_upper = true;
};

// Chebyshev nodes keep the coefficient growth quadratic in M; equidistant
// nodes blow up exponentially, which is the reason they are not the default
inline NormBoundReport norm_bound_report(const DiffOperator& d) {
  NormBoundReport r;
  r.inf_norm = d.reference_matrix().cwiseAbs().rowwise().sum().maxCoeff();
  if (d.family == NodeFamily::Chebyshev2) {
    r.bound = 16.0 * (d.M - 1.0) * (d.M - 1.0);
    r.is_upper = true;
    r.satisfied = r.inf_norm <= r.bound;
  } else if (d.family == NodeFamily::Equidistant) {
    r.bound = 0.5 * (std::pow(2.0, d.M - 1) - 1.0);
    r.is_upper = false;
    r.satisfied = r.inf_norm >= r.bound;
  } else {
    r.bound = 0.0;
    r.is_upper = false;
    r.satisfied = true;
  }
  return r;
}

}  // namespace daeic
