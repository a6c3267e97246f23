#pragma once

#include <cmath>
#include <vector>

#include "daeic/collocation.hpp"
#include "daeic/matrix_function.hpp"
#include "daeic/reduction.hpp"

namespace daeic {

enum class TauRuleKind { Fixed, PowerHalf, PowerThird };

// window length for the transfer-condition reduction, as a function of the
// collocation stepsize h and the detected index mu
struct TauRule {
  TauRuleKind kind = TauRuleKind::PowerHalf;
  double value = 0.1;  // used by Fixed

  double tau(double h, int mu) const {
    switch (kind) {
      case TauRuleKind::Fixed: return value;
      case TauRuleKind::PowerHalf: return std::pow(h, 0.5 * mu);
      case TauRuleKind::PowerThird: return std::pow(h, mu / 3.0);
    }
    return value;
  }
};

struct IvpConfig {
  int L = 1;  // number of windows
  int n = 1;  // subintervals per window
  CollocationConfig colloc;
  ReductionConfig red;
  TauRule tau_rule;
  bool log_transfer_compat = true;
};

struct TransferRecord {
  double t = 0.0;
  int mu = 0;
  int dof = 0;
  double tau = 0.0;
  double sigma_min = 0.0;  // of G restricted to the flow subspace
  bool compatible = true;
};

struct IvpSolution {
  Interval interval;
  int L = 0;
  double H = 0.0;
  std::vector<PiecewisePolySolution> windows;
  std::vector<TransferRecord> transfers;

  Vector eval(double t) const {
    const double tol = 1e-9 * std::max(1.0, std::abs(interval.a) + std::abs(interval.b));
    if (t < interval.a - tol || t > interval.b + tol)
      throw DomainError("solution evaluated outside the integration interval");
    int lam = static_cast<int>(std::floor((t - interval.a) / H));
    lam = std::clamp(lam, 0, L - 1);
    return windows[lam].eval(t);
  }
};

// windowed solve: the first window uses the caller's initial condition, each
// later window restarts from an accurate transfer condition computed by the
// reduction at the window boundary
inline IvpSolution solve_ivp(const DaePair& pair, const VectorFunction& q, const Matrix& G_a,
                             const Vector& g_a, Interval interval, const IvpConfig& cfg) {
  if (cfg.L < 1) throw ConfigError("solve_ivp: need L >= 1");
  const double H = interval.length() / cfg.L;
  const double h = H / cfg.n;
  CollocationBasis basis = make_collocation_basis(cfg.colloc);

  IvpSolution sol;
  sol.interval = interval;
  sol.L = cfg.L;
  sol.H = H;

  sol.windows.push_back(
      solve_window(pair, q, G_a, g_a, build_grid(interval.a, H, cfg.n), basis));
  if (cfg.L == 1) return sol;

  // pin down tau: power rules need the index first
  ReductionConfig rcfg = cfg.red;
  rcfg.mode = WindowMode::Central;
  double tau;
  int expect_mu = -1, expect_dof = -1;
  if (cfg.tau_rule.kind == TauRuleKind::Fixed) {
    tau = cfg.tau_rule.value;
  } else {
    ReductionConfig probe = rcfg;
    probe.tau = std::min(rcfg.tau, 0.5 * interval.length());
    ReductionOutcome pre = accurate_ic_matrix(pair, interval.a + H, probe);
    expect_mu = pre.mu;
    expect_dof = pre.dof;
    tau = cfg.tau_rule.tau(h, pre.mu);
  }
  tau = std::min(tau, interval.length());
  rcfg.tau = tau;

  for (int lam = 1; lam < cfg.L; ++lam) {
    const double w = interval.a + lam * H;
    ReductionOutcome red = accurate_ic_matrix(pair, w, rcfg);
    if (expect_mu < 0) {
      expect_mu = red.mu;
      expect_dof = red.dof;
    } else if (red.mu != expect_mu || red.dof != expect_dof) {
      throw TransferError("solve_ivp: index or dof changed between windows");
    }

    TransferRecord rec;
    rec.t = w;
    rec.mu = red.mu;
    rec.dof = red.dof;
    rec.tau = tau;
    if (cfg.log_transfer_compat) {
      ReductionOutcome flow = flow_subspace(pair, w, rcfg);
      Matrix S = detail::track_at(flow.track.nodes, flow.track.values,
                                  reduction_diff_operator(rcfg, flow.window), w);
      TransferCompat tc = transfer_compat(red.G, S);
      rec.sigma_min = tc.sigma_min;
      rec.compatible = tc.compatible;
    }
    sol.transfers.push_back(rec);

    Vector g = red.G * sol.windows.back().eval(w);
    sol.windows.push_back(
        solve_window(pair, q, red.G, g, build_grid(w, H, cfg.n), basis));
  }
  return sol;
}

// root of the summed squared window errors
inline double global_error(const IvpSolution& sol, const VectorFunction& x_exact,
                           const VectorFunction& dx_exact) {
  double acc = 0.0;
  for (const auto& w : sol.windows) {
    const double e = hd1_error(w, x_exact, dx_exact);
    acc += e * e;
  }
  return std::sqrt(acc);
}

}  // namespace daeic
