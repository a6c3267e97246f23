#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "daeic/matrix_function.hpp"
#include "daeic/spectral_diff.hpp"

namespace daeic {

// rank decisions: singular values below rel_tol * sigma_max are treated as
// zero; a matrix whose largest singular value is below abs_zero_tol counts
// as the zero matrix.  Zero fields mean "pick automatically".
struct RankPolicy {
  double rel_tol = 0.0;       // default: 64 * eps * max(rows, cols)
  double abs_zero_tol = 0.0;  // default: 1e-12 * problem scale

  double effective_rel_tol(int rows, int cols) const {
    if (rel_tol > 0.0) return rel_tol;
    return 64.0 * std::numeric_limits<double>::epsilon() * std::max(rows, cols);
  }
  double effective_abs_tol() const {
    return abs_zero_tol > 0.0 ? abs_zero_tol : 1e-12;
  }
};

inline int rank_of(const Matrix& A, const RankPolicy& policy = {}) {
  if (A.rows() == 0 || A.cols() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(A);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  if (smax < policy.effective_abs_tol()) return 0;
  const double cut = smax * policy.effective_rel_tol(static_cast<int>(A.rows()),
                                                     static_cast<int>(A.cols()));
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) ++r;
  return r;
}

// orthonormal basis of a subspace of R^ambient, stored column-wise
struct SubspaceBasis {
  int ambient = 0;
  Matrix columns;  // ambient x dim

  int dim() const { return static_cast<int>(columns.cols()); }
};

inline SubspaceBasis range_basis(const Matrix& A, const RankPolicy& policy = {}) {
  SubspaceBasis b;
  b.ambient = static_cast<int>(A.rows());
  if (A.cols() == 0 || A.rows() == 0) {
    b.columns = Matrix::Zero(A.rows(), 0);
    return b;
  }
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeFullU);
  const int r = rank_of(A, policy);
  b.columns = svd.matrixU().leftCols(r);
  return b;
}

inline SubspaceBasis nullspace_basis(const Matrix& A, const RankPolicy& policy = {}) {
  SubspaceBasis b;
  b.ambient = static_cast<int>(A.cols());
  if (A.rows() == 0) {
    b.columns = Matrix::Identity(A.cols(), A.cols());
    return b;
  }
  if (A.cols() == 0) {
    b.columns = Matrix::Zero(0, 0);
    return b;
  }
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeFullV);
  const int r = rank_of(A, policy);
  b.columns = svd.matrixV().rightCols(A.cols() - r);
  return b;
}

// orthonormal basis of (im A)^perp
inline SubspaceBasis corange_basis(const Matrix& A, const RankPolicy& policy = {}) {
  SubspaceBasis b;
  b.ambient = static_cast<int>(A.rows());
  if (A.cols() == 0) {
    b.columns = Matrix::Identity(A.rows(), A.rows());
    return b;
  }
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeFullU);
  const int r = rank_of(A, policy);
  b.columns = svd.matrixU().rightCols(A.rows() - r);
  return b;
}

inline Matrix orthonormal_complement(const Matrix& V) {
  const int m = static_cast<int>(V.rows());
  const int r = static_cast<int>(V.cols());
  if (r == 0) return Matrix::Identity(m, m);
  Eigen::HouseholderQR<Matrix> qr(V);
  Matrix Q = qr.householderQ() * Matrix::Identity(m, m);
  return Q.rightCols(m - r);
}

// largest principal angle (its sine) between two subspaces; 1 by convention
// when the dimensions differ
inline double opening(const SubspaceBasis& U, const SubspaceBasis& V) {
  if (U.ambient != V.ambient) throw ConfigError("opening: ambient dimensions differ");
  if (U.dim() != V.dim()) return 1.0;
  if (U.dim() == 0) return 0.0;
  Matrix Vp = orthonormal_complement(V.columns);
  if (Vp.cols() == 0) return 0.0;
  Matrix G = Vp.transpose() * U.columns;
  Eigen::JacobiSVD<Matrix> svd(G);
  return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
}

// smooth family of orthonormal bases over the window nodes
struct SmoothBasisTrack {
  std::vector<double> nodes;
  std::vector<Matrix> values;      // m x r per node
  std::vector<Matrix> derivative;  // same shape; may be empty
  double coherence = 0.0;          // max node-to-node variation rate
  int reorthonormalizations = 0;

  int size() const { return static_cast<int>(nodes.size()); }
  int dim() const { return values.empty() ? 0 : static_cast<int>(values.front().cols()); }
  int ambient() const { return values.empty() ? 0 : static_cast<int>(values.front().rows()); }
};

namespace detail {

inline void track_coherence(SmoothBasisTrack& tr) {
  tr.coherence = 0.0;
  for (size_t i = 0; i + 1 < tr.values.size(); ++i) {
    const double dt = std::abs(tr.nodes[i + 1] - tr.nodes[i]);
    if (dt > 0.0)
      tr.coherence = std::max(tr.coherence, (tr.values[i + 1] - tr.values[i]).norm() / dt);
  }
}

// closest orthonormal matrix (polar factor)
inline Matrix polar_orthonormalize(const Matrix& C) {
  Eigen::JacobiSVD<Matrix> svd(C, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().transpose();
}

}  // namespace detail

// Continues the basis chosen at the anchor node across the window by
// collocating C' = P'C in the degree M-1 polynomial space.  P must be a
// stack of orthoprojectors of constant rank.
inline SmoothBasisTrack smooth_basis_svd_ode(const SampledMatrixStack& P,
                                             const DiffOperator& d, int anchor,
                                             const RankPolicy& policy = {}) {
  const int M = P.size();
  const int m = P.rows();
  if (M != d.M) throw ConfigError("smooth_basis_svd_ode: node count mismatch");
  if (anchor < 0 || anchor >= M) throw ConfigError("smooth_basis_svd_ode: bad anchor");
  int r = -1;
  for (int i = 0; i < M; ++i) {
    const Matrix& Pi = P.values[i];
    const double sc = 1.0 + Pi.norm();
    if ((Pi - Pi.transpose()).norm() > 1e-8 * sc || (Pi * Pi - Pi).norm() > 1e-8 * sc)
      throw DegenerateInputError("smooth_basis_svd_ode: sample is not an orthoprojector");
    const int ri = rank_of(Pi, policy);
    if (r < 0) r = ri;
    else if (ri != r)
      throw RankDropError("smooth_basis_svd_ode: projector rank varies across window");
  }

  SmoothBasisTrack tr;
  tr.nodes = P.nodes;
  tr.values.assign(M, Matrix());
  tr.derivative.assign(M, Matrix());
  if (r == 0) {
    for (int i = 0; i < M; ++i) {
      tr.values[i] = Matrix::Zero(m, 0);
      tr.derivative[i] = Matrix::Zero(m, 0);
    }
    return tr;
  }

  Eigen::JacobiSVD<Matrix> svd(P.values[anchor], Eigen::ComputeFullU);
  Matrix C0 = svd.matrixU().leftCols(r);

  // the least-squares operator is rank deficient (degree N < M-1), which
  // would make the collocation system singular; continuation always runs on
  // the interpolatory matrix over the same nodes
  const DiffOperator& dc = (d.kind == DiffKind::Interpolatory)
                               ? d
                               : diff_matrix_interp(d.family, d.M, d.window);
  std::vector<Matrix> Pd = diff_apply(dc, P.values);

  // collocation system for all columns at once
  Matrix K = Matrix::Zero(M * m, M * m);
  Matrix rhs = Matrix::Zero(M * m, r);
  for (int i = 0; i < M; ++i) {
    if (i == anchor) {
      K.block(i * m, i * m, m, m) = Matrix::Identity(m, m);
      rhs.middleRows(i * m, m) = C0;
      continue;
    }
    for (int j = 0; j < M; ++j)
      K.block(i * m, j * m, m, m) += dc.Dmat(i, j) * Matrix::Identity(m, m);
    K.block(i * m, i * m, m, m) -= Pd[i];
  }
  Matrix X = K.fullPivLu().solve(rhs);

  for (int i = 0; i < M; ++i) {
    // the collocated solution drifts O(tau^{M-1}) out of range P; projecting
    // back keeps the subspaces node-exact while the ODE only fixes the gauge
    Matrix Ci = P.values[i] * X.middleRows(i * m, m);
    const double ortho_defect = (Ci.transpose() * Ci - Matrix::Identity(r, r)).norm();
    if (ortho_defect > 1e-12) {
      Ci = detail::polar_orthonormalize(Ci);
      if (ortho_defect > 1e-6) ++tr.reorthonormalizations;
    }
    tr.values[i] = Ci;
    tr.derivative[i] = Pd[i] * Ci;
  }
  detail::track_coherence(tr);
  return tr;
}

// Householder QR with column pivoting whose pivot order and reflection signs
// are frozen at the anchor node and replayed at every other node
struct FixedPivotPlan {
  std::vector<int> pivots;   // original column indices in elimination order
  std::vector<double> signs; // sign used in each reflection
  int rank = 0;
  double r11 = 0.0;
};

namespace detail {

struct QrFactors {
  Matrix Q;  // full square
  Matrix R;
};

// one QR pass; when plan is null, pivots/signs are chosen greedily and
// recorded into out_plan, otherwise they are replayed from *plan
inline QrFactors pivoted_qr(const Matrix& A, const FixedPivotPlan* plan,
                            FixedPivotPlan* out_plan, const RankPolicy& policy) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  const int steps = plan ? plan->rank : std::min(m, n);
  Matrix R = A;
  Matrix Q = Matrix::Identity(m, m);
  std::vector<int> colperm(n);
  for (int j = 0; j < n; ++j) colperm[j] = j;
  FixedPivotPlan local;

  int s = 0;
  for (; s < steps; ++s) {
    int piv;
    if (plan) {
      // locate the recorded original column in the current permutation
      piv = -1;
      for (int j = s; j < n; ++j)
        if (colperm[j] == plan->pivots[s]) { piv = j; break; }
      if (piv < 0) throw RankDropError("fixed-pivot QR: recorded pivot unavailable");
    } else {
      piv = s;
      double best = -1.0;
      for (int j = s; j < n; ++j) {
        const double nj = R.col(j).tail(m - s).squaredNorm();
        if (nj > best) { best = nj; piv = j; }
      }
    }
    if (piv != s) {
      R.col(piv).swap(R.col(s));
      std::swap(colperm[piv], colperm[s]);
    }
    Vector x = R.col(s).tail(m - s);
    const double xn = x.norm();
    double sign;
    if (plan) sign = plan->signs[s];
    else sign = (x(0) >= 0.0) ? 1.0 : -1.0;
    if (!plan) {
      // rank decision while planning
      const double r11 = (s == 0) ? xn : local.r11;
      if (s == 0) local.r11 = xn;
      const double cut = std::max(policy.effective_abs_tol(),
                                  r11 * policy.effective_rel_tol(m, n));
      if (xn <= cut) break;
      local.pivots.push_back(colperm[s]);
      local.signs.push_back(sign);
    }
    Vector v = x;
    v(0) += sign * xn;
    const double vn2 = v.squaredNorm();
    if (vn2 > 0.0) {
      Matrix block = R.bottomRightCorner(m - s, n - s);
      block -= (2.0 / vn2) * v * (v.transpose() * block);
      R.bottomRightCorner(m - s, n - s) = block;
      Matrix qblock = Q.rightCols(m - s);
      qblock -= (2.0 / vn2) * (qblock * v) * v.transpose();
      Q.rightCols(m - s) = qblock;
    }
  }
  if (!plan && out_plan) {
    local.rank = s;
    *out_plan = local;
  }
  if (plan) {
    // replaying: verify no rank drop at this node
    const double cut = std::max(policy.effective_abs_tol(),
                                std::abs(R(0, 0)) * policy.effective_rel_tol(m, n));
    for (int i = 0; i < plan->rank; ++i)
      if (std::abs(R(i, i)) <= cut)
        throw RankDropError("fixed-pivot QR: rank drop while replaying plan");
  }
  return QrFactors{Q, R};
}

}  // namespace detail

// smooth track of nullspace bases of the sampled matrices: the pivot pattern
// of ker A = (im A^T)^perp is fixed at the anchor and replayed elsewhere
inline SmoothBasisTrack qr_fixed_pivot(const SampledMatrixStack& A, int anchor,
                                       const RankPolicy& policy = {}) {
  const int M = A.size();
  if (anchor < 0 || anchor >= M) throw ConfigError("qr_fixed_pivot: bad anchor");
  const int n = A.cols();
  SmoothBasisTrack tr;
  tr.nodes = A.nodes;
  tr.values.resize(M);
  FixedPivotPlan plan;
  detail::pivoted_qr(A.values[anchor].transpose(), nullptr, &plan, policy);
  for (int i = 0; i < M; ++i) {
    auto f = detail::pivoted_qr(A.values[i].transpose(),
                                i == anchor ? nullptr : &plan,
                                i == anchor ? &plan : nullptr, policy);
    tr.values[i] = f.Q.rightCols(n - plan.rank);
  }
  detail::track_coherence(tr);
  return tr;
}

// companion track of range bases (first Q columns), same frozen-pivot idea
inline SmoothBasisTrack qr_fixed_pivot_range(const SampledMatrixStack& A, int anchor,
                                             const RankPolicy& policy = {}) {
  const int M = A.size();
  if (anchor < 0 || anchor >= M) throw ConfigError("qr_fixed_pivot_range: bad anchor");
  SmoothBasisTrack tr;
  tr.nodes = A.nodes;
  tr.values.resize(M);
  FixedPivotPlan plan;
  detail::pivoted_qr(A.values[anchor], nullptr, &plan, policy);
  for (int i = 0; i < M; ++i) {
    auto f = detail::pivoted_qr(A.values[i], i == anchor ? nullptr : &plan,
                                i == anchor ? &plan : nullptr, policy);
    tr.values[i] = f.Q.leftCols(plan.rank);
  }
  detail::track_coherence(tr);
  return tr;
}

}  // namespace daeic
