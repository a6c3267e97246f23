#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "daeic/matrix_function.hpp"
#include "daeic/nodes.hpp"
#include "daeic/spectral_diff.hpp"
#include "daeic/subspace.hpp"

namespace daeic {

enum class BasisStrategy { SvdOde, QrFixedPivot };

struct ReductionConfig {
  int Md = 5;                                  // differentiation nodes per window
  int Nd = -1;                                 // fit degree; -1 means Md - 1
  DiffKind diff = DiffKind::Interpolatory;
  NodeFamily family = NodeFamily::Chebyshev2;
  WindowMode mode = WindowMode::Central;
  double tau = 0.1;
  BasisStrategy strategy = BasisStrategy::SvdOde;
  RankPolicy policy;
  int max_levels = 16;
};

struct ReductionOutcome {
  int m = 0;
  int mu = 0;                // number of reduction levels (index)
  int dof = 0;               // dynamical degrees of freedom l
  std::vector<int> ranks;    // r_0 > r_1 > ... for the counted levels
  double t_bar = 0.0;
  Window window;
  Matrix G;                  // dof x m condition matrix at t_bar
  SmoothBasisTrack track;    // accumulated basis track over the window
  int anchor = 0;
};

namespace detail {

struct CbasisResult {
  std::vector<Matrix> track;  // m x l per node
  std::vector<int> ranks;
};

inline double stack_frobenius_mean(const std::vector<Matrix>& v) {
  double acc = 0.0;
  for (const Matrix& x : v) acc += x.norm();
  return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
}

// The rank is decided once, at the anchor node, with the tight policy; the
// other nodes only have to be consistent with that decision up to a loose
// margin.  Basis-track errors of size ~1e-11 would otherwise flip per-node
// rank calls that sit right at the tolerance.
inline void verify_rank_across_window(const std::vector<Matrix>& vals, int r,
                                      const RankPolicy& policy, const char* what) {
  for (const Matrix& v : vals) {
    if (v.rows() == 0 || v.cols() == 0) {
      if (r != 0) throw RankDropError(std::string("reduction: rank of ") + what +
                                      " varies across window");
      continue;
    }
    Eigen::JacobiSVD<Matrix> svd(v);
    const auto& s = svd.singularValues();
    const double loose = std::max(policy.effective_abs_tol(), 1e-6 * s(0));
    if (r > 0 && (s.size() < r || s(r - 1) <= loose))
      throw RankDropError(std::string("reduction: rank of ") + what +
                          " drops inside the window");
    if (r < s.size() && s(r) > loose)
      throw RankDropError(std::string("reduction: rank of ") + what +
                          " rises inside the window");
  }
}

inline SmoothBasisTrack range_track(const SampledMatrixStack& E, const DiffOperator& d,
                                    int anchor, BasisStrategy strategy,
                                    const RankPolicy& policy, int r) {
  if (strategy == BasisStrategy::QrFixedPivot) return qr_fixed_pivot_range(E, anchor, policy);
  SampledMatrixStack P;
  P.nodes = E.nodes;
  P.values.reserve(E.values.size());
  for (const Matrix& Ei : E.values) {
    Eigen::JacobiSVD<Matrix> svd(Ei, Eigen::ComputeFullU);
    Matrix U = svd.matrixU().leftCols(r);
    P.values.push_back(U * U.transpose());
  }
  return smooth_basis_svd_ode(P, d, anchor, policy);
}

inline SmoothBasisTrack kernel_track(const SampledMatrixStack& A, const DiffOperator& d,
                                     int anchor, BasisStrategy strategy,
                                     const RankPolicy& policy) {
  if (strategy == BasisStrategy::QrFixedPivot) return qr_fixed_pivot(A, anchor, policy);
  const int n = A.cols();
  const int ra = rank_of(A.values[anchor], policy);
  verify_rank_across_window(A.values, ra, policy, "the projected pair");
  SampledMatrixStack P;
  P.nodes = A.nodes;
  P.values.reserve(A.values.size());
  for (const Matrix& Ai : A.values) {
    Eigen::JacobiSVD<Matrix> svd(Ai, Eigen::ComputeFullV);
    Matrix V = svd.matrixV().rightCols(n - ra);
    P.values.push_back(V * V.transpose());
  }
  return smooth_basis_svd_ode(P, d, anchor, policy);
}

// one reduction sweep on the sampled pair; returns the accumulated basis of
// the subspace that absorbs all reachable flows
inline CbasisResult cbasis(const SampledMatrixStack& E, const SampledMatrixStack& F,
                           const DiffOperator& d, int anchor, BasisStrategy strategy,
                           const RankPolicy& policy, int levels_left) {
  const int M = E.size();
  const int m = E.rows();
  if (levels_left <= 0)
    throw NonRegularError("reduction: level limit exceeded, pair is not regular");

  CbasisResult out;
  if (m == 0) {
    out.track.assign(M, Matrix::Zero(0, 0));
    return out;
  }

  int r;
  if (stack_frobenius_mean(E.values) < policy.effective_abs_tol()) {
    r = 0;
  } else {
    r = rank_of(E.values[anchor], policy);
    verify_rank_across_window(E.values, r, policy, "E");
  }

  if (r == m) {
    out.track.assign(M, Matrix::Identity(m, m));
    return out;
  }

  SmoothBasisTrack Y;
  if (r > 0) Y = range_track(E, d, anchor, strategy, policy, r);

  // rows orthogonal to im E applied to F; its kernel does not depend on the
  // corange basis choice, so smoothness comes for free from Y
  SampledMatrixStack A;
  A.nodes = E.nodes;
  A.values.resize(M);
  for (int i = 0; i < M; ++i) {
    if (r > 0)
      A.values[i] = F.values[i] - Y.values[i] * (Y.values[i].transpose() * F.values[i]);
    else
      A.values[i] = F.values[i];
  }

  SmoothBasisTrack C = kernel_track(A, d, anchor, strategy, policy);
  const int s = C.dim();
  if (s != r)
    throw NonRegularError("reduction: kernel dimension " + std::to_string(s) +
                          " does not match rank " + std::to_string(r));

  SampledMatrixStack En, Fn;
  En.nodes = Fn.nodes = E.nodes;
  En.values.resize(M);
  Fn.values.resize(M);
  std::vector<Matrix> dC = diff_apply(d, C.values);
  for (int i = 0; i < M; ++i) {
    const Matrix Yt = (r > 0) ? Matrix(Y.values[i].transpose()) : Matrix::Zero(0, m);
    En.values[i] = Yt * (E.values[i] * C.values[i]);
    Fn.values[i] = Yt * (F.values[i] * C.values[i] + E.values[i] * dC[i]);
  }

  CbasisResult sub = cbasis(En, Fn, d, anchor, strategy, policy, levels_left - 1);
  out.ranks.push_back(r);
  out.ranks.insert(out.ranks.end(), sub.ranks.begin(), sub.ranks.end());
  out.track.resize(M);
  for (int i = 0; i < M; ++i) out.track[i] = C.values[i] * sub.track[i];
  return out;
}

inline int nearest_node(const std::vector<double>& nodes, double t) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(nodes.size()); ++i)
    if (std::abs(nodes[i] - t) < std::abs(nodes[best] - t)) best = i;
  return best;
}

// evaluates a basis track at t; exact node hit preferred, otherwise
// barycentric interpolation entry by entry
inline Matrix track_at(const std::vector<double>& nodes, const std::vector<Matrix>& values,
                       const DiffOperator& d, double t) {
  const int M = static_cast<int>(nodes.size());
  const int i0 = nearest_node(nodes, t);
  if (std::abs(nodes[i0] - t) < 1e-12 * std::max(1.0, std::abs(t))) return values[i0];
  std::vector<double> bw = barycentric_weights(d.ref_nodes, d.family);
  Matrix out = Matrix::Zero(values[0].rows(), values[0].cols());
  std::vector<double> f(M);
  for (int rr = 0; rr < out.rows(); ++rr)
    for (int cc = 0; cc < out.cols(); ++cc) {
      for (int i = 0; i < M; ++i) f[i] = values[i](rr, cc);
      out(rr, cc) = barycentric_eval(nodes, bw, f, t);
    }
  return out;
}

inline RankPolicy scaled_policy(RankPolicy policy, const SampledMatrixStack& E,
                                const SampledMatrixStack& F) {
  if (policy.abs_zero_tol > 0.0) return policy;
  double scale = 0.0;
  for (const Matrix& v : E.values) scale = std::max(scale, v.norm());
  for (const Matrix& v : F.values) scale = std::max(scale, v.norm());
  policy.abs_zero_tol = 1e-12 * std::max(1.0, scale);
  return policy;
}

}  // namespace detail

inline DiffOperator reduction_diff_operator(const ReductionConfig& cfg, Window w) {
  const int N = (cfg.Nd >= 0) ? cfg.Nd : cfg.Md - 1;
  return make_diff_operator(cfg.diff, cfg.family, cfg.Md, N, w);
}

// Condition matrix G at t_bar from the reduction of the adjoint pair:
// ker G approximates the space of consistent-at-t_bar flow values, so
// G x(t_bar) = g is an accurate initial/transfer condition.
inline ReductionOutcome accurate_ic_matrix(const DaePair& pair, double t_bar,
                                           const ReductionConfig& cfg) {
  Window w = place_window(t_bar, cfg.tau, cfg.mode, pair.interval);
  DiffOperator d = reduction_diff_operator(cfg, w);

  SampledMatrixStack E = sample(pair.E, d.nodes);
  SampledMatrixStack F = sample(pair.F, d.nodes);
  const int M = d.M;
  const int m = pair.m;
  RankPolicy policy = detail::scaled_policy(cfg.policy, E, F);

  // adjoint pair -E^T y' + (F^T - (E^T)') y = 0, sampled on the window
  SampledMatrixStack Et;
  Et.nodes = d.nodes;
  Et.values.resize(M);
  for (int i = 0; i < M; ++i) Et.values[i] = E.values[i].transpose();
  std::vector<Matrix> dEt = diff_apply(d, Et.values);

  SampledMatrixStack Ea, Fa;
  Ea.nodes = Fa.nodes = d.nodes;
  Ea.values.resize(M);
  Fa.values.resize(M);
  for (int i = 0; i < M; ++i) {
    Ea.values[i] = -Et.values[i];
    Fa.values[i] = F.values[i].transpose() - dEt[i];
  }

  const int anchor = detail::nearest_node(d.nodes, t_bar);
  detail::CbasisResult cb =
      detail::cbasis(Ea, Fa, d, anchor, cfg.strategy, policy, cfg.max_levels);

  ReductionOutcome out;
  out.m = m;
  out.mu = static_cast<int>(cb.ranks.size());
  out.ranks = cb.ranks;
  out.dof = cb.track.empty() ? m : static_cast<int>(cb.track[0].cols());
  out.t_bar = t_bar;
  out.window = w;
  out.anchor = anchor;
  out.track.nodes = d.nodes;
  out.track.values = cb.track;
  detail::track_coherence(out.track);

  Matrix C_tbar = detail::track_at(d.nodes, cb.track, d, t_bar);
  out.G = C_tbar.transpose() * pair.E(t_bar);
  return out;
}

// basis of the flow subspace S_can(t_bar) via reduction of the pair itself
inline ReductionOutcome flow_subspace(const DaePair& pair, double t_bar,
                                      const ReductionConfig& cfg) {
  Window w = place_window(t_bar, cfg.tau, cfg.mode, pair.interval);
  DiffOperator d = reduction_diff_operator(cfg, w);
  SampledMatrixStack E = sample(pair.E, d.nodes);
  SampledMatrixStack F = sample(pair.F, d.nodes);
  RankPolicy policy = detail::scaled_policy(cfg.policy, E, F);
  const int anchor = detail::nearest_node(d.nodes, t_bar);
  detail::CbasisResult cb =
      detail::cbasis(E, F, d, anchor, cfg.strategy, policy, cfg.max_levels);
  ReductionOutcome out;
  out.m = pair.m;
  out.mu = static_cast<int>(cb.ranks.size());
  out.ranks = cb.ranks;
  out.dof = cb.track.empty() ? pair.m : static_cast<int>(cb.track[0].cols());
  out.t_bar = t_bar;
  out.window = w;
  out.anchor = anchor;
  out.track.nodes = d.nodes;
  out.track.values = cb.track;
  detail::track_coherence(out.track);
  out.G = detail::track_at(d.nodes, cb.track, d, t_bar);  // here: basis, not condition
  return out;
}

// opening between ker G_computed and ker G_reference
inline double gap_to_reference(const Matrix& G, const Matrix& G_ref,
                               const RankPolicy& policy = {}) {
  if (G.cols() != G_ref.cols()) throw ConfigError("gap_to_reference: column mismatch");
  SubspaceBasis ka = nullspace_basis(G, policy);
  SubspaceBasis kb = nullspace_basis(G_ref, policy);
  return opening(ka, kb);
}

struct TransferCompat {
  bool compatible = false;
  double sigma_min = 0.0;
};

// a condition matrix is usable for transfer iff it stays injective on the
// flow subspace
inline TransferCompat transfer_compat(const Matrix& G, const Matrix& S_basis,
                                      double tol = 1e-8) {
  TransferCompat tc;
  if (G.rows() != S_basis.cols())
    return tc;  // dimension mismatch can never be compatible
  if (G.rows() == 0) {
    tc.compatible = true;
    tc.sigma_min = 0.0;
    return tc;
  }
  Matrix P = G * S_basis;
  Eigen::JacobiSVD<Matrix> svd(P);
  tc.sigma_min = svd.singularValues()(svd.singularValues().size() - 1);
  tc.compatible = tc.sigma_min > tol;
  return tc;
}

}  // namespace daeic
