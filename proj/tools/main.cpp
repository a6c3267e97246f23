#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "daeic/problems.hpp"
#include "daeic/reduction.hpp"
#include "daeic/spectral_diff.hpp"
#include "daeic/stepper.hpp"

using namespace daeic;
using nlohmann::json;

namespace {

struct Options {
  std::string problem = "campbell-moore";
  double t_bar = 0.0;
  std::vector<double> tau;  // empty means command default
  int Nd = -1;
  std::vector<int> Md;
  std::vector<int> Nc;
  int Mc = -1;
  std::vector<int> L;
  std::vector<int> n;
  std::string mode = "central";
  std::string strategy = "svd-ode";
  std::string diff = "interp";
  std::string nodes = "gauss";
  std::string sweep = "gaps";
  std::string out;
  std::string config;
};

WindowMode parse_mode(const std::string& s) {
  if (s == "central") return WindowMode::Central;
  if (s == "left") return WindowMode::Left;
  if (s == "right") return WindowMode::Right;
  throw ConfigError("unknown mode: " + s);
}

BasisStrategy parse_strategy(const std::string& s) {
  if (s == "svd-ode") return BasisStrategy::SvdOde;
  if (s == "qr-fixed") return BasisStrategy::QrFixedPivot;
  throw ConfigError("unknown strategy: " + s);
}

DiffKind parse_diff(const std::string& s) {
  if (s == "interp") return DiffKind::Interpolatory;
  if (s == "lsq") return DiffKind::LeastSquares;
  throw ConfigError("unknown diff kind: " + s);
}

NodeFamily parse_nodes(const std::string& s) {
  if (s == "cheb2") return NodeFamily::Chebyshev2;
  if (s == "radau") return NodeFamily::RadauLeft;
  if (s == "gauss") return NodeFamily::GaussLegendre;
  if (s == "equi") return NodeFamily::Equidistant;
  throw ConfigError("unknown node family: " + s);
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.5e", v);
  return buf;
}

// flags win over config-file values: a key is only applied when the matching
// flag was not given on the command line
void apply_config(const std::string& path, const CLI::App& app, Options& o) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j = json::parse(in);
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");

  auto unused = [&](const char* flag) {
    const CLI::Option* opt = app.get_option_no_throw(flag);
    return opt == nullptr || opt->count() == 0;
  };
  for (const auto& [key, val] : j.items()) {
    if (key == "problem") { if (unused("--problem")) o.problem = val.get<std::string>(); }
    else if (key == "t-bar") { if (unused("--t-bar")) o.t_bar = val.get<double>(); }
    else if (key == "tau") {
      if (unused("--tau")) o.tau = val.is_array() ? val.get<std::vector<double>>()
                                                  : std::vector<double>{val.get<double>()};
    }
    else if (key == "Nd") { if (unused("--Nd")) o.Nd = val.get<int>(); }
    else if (key == "Md") {
      if (unused("--Md")) o.Md = val.is_array() ? val.get<std::vector<int>>()
                                                : std::vector<int>{val.get<int>()};
    }
    else if (key == "Nc") {
      if (unused("--Nc")) o.Nc = val.is_array() ? val.get<std::vector<int>>()
                                                : std::vector<int>{val.get<int>()};
    }
    else if (key == "Mc") { if (unused("--Mc")) o.Mc = val.get<int>(); }
    else if (key == "L") {
      if (unused("--L")) o.L = val.is_array() ? val.get<std::vector<int>>()
                                              : std::vector<int>{val.get<int>()};
    }
    else if (key == "n") {
      if (unused("--n")) o.n = val.is_array() ? val.get<std::vector<int>>()
                                              : std::vector<int>{val.get<int>()};
    }
    else if (key == "mode") { if (unused("--mode")) o.mode = val.get<std::string>(); }
    else if (key == "strategy") { if (unused("--strategy")) o.strategy = val.get<std::string>(); }
    else if (key == "diff") { if (unused("--diff")) o.diff = val.get<std::string>(); }
    else if (key == "nodes") { if (unused("--nodes")) o.nodes = val.get<std::string>(); }
    else if (key == "sweep") { if (unused("--sweep")) o.sweep = val.get<std::string>(); }
    else if (key == "out") { if (unused("--out")) o.out = val.get<std::string>(); }
    else throw ConfigError("unknown config key: " + key);
  }
}

ReductionConfig reduction_config(const Options& o, int Md, double tau) {
  ReductionConfig rc;
  rc.Md = Md;
  rc.Nd = o.Nd;
  rc.tau = tau;
  rc.mode = parse_mode(o.mode);
  rc.strategy = parse_strategy(o.strategy);
  rc.diff = parse_diff(o.diff);
  if (rc.diff == DiffKind::LeastSquares && rc.Nd < 0) rc.Nd = Md - 2;
  return rc;
}

// output goes to --out when given, stdout otherwise; always LF line endings
struct CsvSink {
  std::ofstream file;
  std::ostream* os = &std::cout;

  explicit CsvSink(const std::string& path) {
    if (!path.empty()) {
      file.open(path, std::ios::binary);
      if (!file) throw ConfigError("cannot open output file: " + path);
      os = &file;
    }
  }
  void row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i)
      *os << cells[i] << (i + 1 < cells.size() ? "," : "");
    *os << "\n";
  }
};

void emit_gnuplot(const std::string& csv_path, const std::string& xlabel,
                  const std::vector<std::string>& series, bool loglog) {
  if (csv_path.empty()) return;
  const std::string gp = csv_path + ".gp";
  std::ofstream f(gp, std::ios::binary);
  if (!f) return;
  f << "set datafile separator ','\n";
  f << "set key autotitle columnhead\n";
  f << "set xlabel '" << xlabel << "'\n";
  if (loglog) f << "set logscale xy\n";
  f << "plot";
  for (size_t i = 0; i < series.size(); ++i)
    f << (i ? ", \\\n     " : " ") << "'" << csv_path << "' using 1:" << (i + 2)
      << " with linespoints";
  f << "\n";
}

// bounded worker pool; results land in caller-indexed slots so the output
// order never depends on scheduling
void run_pool(int njobs, const std::function<void(int)>& job) {
  unsigned hw = std::thread::hardware_concurrency();
  int T = static_cast<int>(std::min(hw == 0 ? 1u : hw, 8u));
  T = std::max(1, std::min(T, njobs));
  if (T <= 1) {
    for (int i = 0; i < njobs; ++i) job(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> workers;
  workers.reserve(T);
  for (int t = 0; t < T; ++t)
    workers.emplace_back([&] {
      for (int i; (i = next.fetch_add(1)) < njobs;) job(i);
    });
  for (auto& w : workers) w.join();
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (size_t i = 0; i < x.size(); ++i)
    if (std::isfinite(y[i]) && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  const size_t k = lx.size();
  if (k < 2) return std::nan("");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < k; ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

int cmd_analyze(const Options& o) {
  ProblemBundle p = problem_by_name(o.problem);
  const int Md = o.Md.empty() ? 5 : o.Md.front();
  const double tau = o.tau.empty() ? 0.1 : o.tau.front();
  ReductionConfig rc = reduction_config(o, Md, tau);
  ReductionOutcome red = accurate_ic_matrix(p.pair, o.t_bar, rc);

  double gap = std::nan("");
  if (p.G_exact.eval) gap = gap_to_reference(red.G, p.G_exact(o.t_bar));

  std::ostringstream ranks;
  for (size_t i = 0; i < red.ranks.size(); ++i) ranks << (i ? " " : "") << red.ranks[i];
  std::cout << "problem:   " << p.name << "\n"
            << "t_bar:     " << fmt(o.t_bar) << "\n"
            << "window:    tau " << fmt(rc.tau) << ", " << o.mode << "\n"
            << "index mu:  " << red.mu << "\n"
            << "dof l:     " << red.dof << "\n"
            << "ranks:     " << ranks.str() << "\n"
            << "|G|_F:     " << fmt(red.G.norm()) << "\n"
            << "gap:       " << fmt(gap) << "\n";

  if (!o.out.empty()) {
    CsvSink csv(o.out);
    csv.row({"problem", "t_bar", "Md", "tau", "mu", "dof", "gap", "norm_G"});
    csv.row({p.name, fmt(o.t_bar), std::to_string(Md), fmt(rc.tau), std::to_string(red.mu),
             std::to_string(red.dof), fmt(gap), fmt(red.G.norm())});
  }
  return 0;
}

IvpConfig ivp_config(const Options& o, int Nc, int L, int n, Interval interval) {
  IvpConfig c;
  c.L = L;
  c.n = n;
  c.colloc.Nc = Nc;
  const DiffKind diff = parse_diff(o.diff);
  c.colloc.Mc = (o.Mc > 0) ? o.Mc : (diff == DiffKind::Interpolatory ? Nc + 1 : Nc + 2);
  c.colloc.family = parse_nodes(o.nodes);
  c.red.Md = c.colloc.Mc;
  c.red.diff = diff;
  if (diff == DiffKind::LeastSquares) c.red.Nd = Nc;
  c.red.strategy = parse_strategy(o.strategy);
  c.tau_rule.kind = TauRuleKind::Fixed;
  const double h = interval.length() / (static_cast<double>(L) * n);
  c.tau_rule.value = o.tau.empty() ? h : o.tau.front();
  return c;
}

int cmd_solve(const Options& o) {
  ProblemBundle p = problem_by_name(o.problem);
  const int Nc = o.Nc.empty() ? 4 : o.Nc.front();
  const int L = o.L.empty() ? 1 : o.L.front();
  const int n = o.n.empty() ? 10 : o.n.front();
  IvpConfig cfg = ivp_config(o, Nc, L, n, p.solve_interval);

  IvpSolution sol = solve_ivp(p.pair, p.q, p.G_a, p.g_a, p.solve_interval, cfg);
  const double err = global_error(sol, p.exact, p.dexact);

  CsvSink csv(o.out);
  std::vector<std::string> head{"t"};
  for (int j = 1; j <= p.pair.m; ++j) head.push_back("x" + std::to_string(j));
  csv.row(head);
  const int samples = 200;
  for (int i = 0; i <= samples; ++i) {
    const double t = p.solve_interval.a +
                     p.solve_interval.length() * i / static_cast<double>(samples);
    Vector x = sol.eval(t);
    std::vector<std::string> cells{fmt(t)};
    for (int j = 0; j < x.size(); ++j) cells.push_back(fmt(x(j)));
    csv.row(cells);
  }
  std::cerr << "windows:  " << cfg.L << " x " << cfg.n << " subintervals, Nc " << cfg.colloc.Nc
            << ", Mc " << cfg.colloc.Mc << "\n";
  for (const auto& tr : sol.transfers)
    if (!tr.compatible)
      std::cerr << "warning: transfer at t=" << fmt(tr.t) << " nearly incompatible (sigma_min "
                << fmt(tr.sigma_min) << ")\n";
  std::cerr << "H1_D error vs exact: " << fmt(err) << "\n";
  return 0;
}

int converge_gaps(const Options& o) {
  ProblemBundle p = problem_by_name(o.problem);
  std::vector<int> Mds = o.Md.empty() ? std::vector<int>{3, 5, 7} : o.Md;
  std::vector<double> taus =
      o.tau.empty() ? std::vector<double>{0.1, 0.05, 0.025, 0.0125, 0.00625} : o.tau;

  const int R = static_cast<int>(taus.size());
  const int C = static_cast<int>(Mds.size());
  std::vector<double> cell(static_cast<size_t>(R) * C, std::nan(""));
  std::vector<std::string> notes(static_cast<size_t>(R) * C);
  run_pool(R * C, [&](int idx) {
    const int i = idx / C, j = idx % C;
    try {
      ReductionConfig rc = reduction_config(o, Mds[j], taus[i]);
      ReductionOutcome red = accurate_ic_matrix(p.pair, o.t_bar, rc);
      if (p.G_exact.eval) cell[idx] = gap_to_reference(red.G, p.G_exact(o.t_bar));
    } catch (const std::exception& e) {
      notes[idx] = e.what();
    }
  });

  CsvSink csv(o.out);
  std::vector<std::string> head{"tau"};
  for (int Md : Mds) head.push_back("M=" + std::to_string(Md));
  csv.row(head);
  for (int i = 0; i < R; ++i) {
    std::vector<std::string> cells{fmt(taus[i])};
    for (int j = 0; j < C; ++j) cells.push_back(fmt(cell[i * C + j]));
    csv.row(cells);
  }
  std::vector<std::string> slopes{"slope"};
  for (int j = 0; j < C; ++j) {
    std::vector<double> col(R);
    for (int i = 0; i < R; ++i) col[i] = cell[i * C + j];
    slopes.push_back(fmt(fit_slope(taus, col)));
  }
  csv.row(slopes);
  emit_gnuplot(o.out, "tau", head, true);

  int bad = 0;
  for (int idx = 0; idx < R * C; ++idx)
    if (!notes[idx].empty()) {
      ++bad;
      std::cerr << "cell tau=" << fmt(taus[idx / C]) << " M=" << Mds[idx % C]
                << " failed: " << notes[idx] << "\n";
    }
  return bad == 0 ? 0 : 1;
}

int converge_solver(const Options& o) {
  ProblemBundle p = problem_by_name(o.problem);
  std::vector<int> Ncs = o.Nc.empty() ? std::vector<int>{4, 6, 8} : o.Nc;
  std::vector<int> Ls = o.L.empty() ? std::vector<int>{1} : o.L;
  std::vector<int> ns = o.n.empty() ? std::vector<int>{10, 20, 40, 80} : o.n;

  struct RowKey { int L, n; double h; };
  std::vector<RowKey> rows;
  for (int L : Ls)
    for (int n : ns)
      rows.push_back({L, n, p.solve_interval.length() / (static_cast<double>(L) * n)});

  const int R = static_cast<int>(rows.size());
  const int C = static_cast<int>(Ncs.size());
  std::vector<double> cell(static_cast<size_t>(R) * C, std::nan(""));
  std::vector<std::string> notes(static_cast<size_t>(R) * C);
  run_pool(R * C, [&](int idx) {
    const int i = idx / C, j = idx % C;
    try {
      IvpConfig cfg = ivp_config(o, Ncs[j], rows[i].L, rows[i].n, p.solve_interval);
      IvpSolution sol = solve_ivp(p.pair, p.q, p.G_a, p.g_a, p.solve_interval, cfg);
      cell[idx] = global_error(sol, p.exact, p.dexact);
    } catch (const std::exception& e) {
      notes[idx] = e.what();
    }
  });

  CsvSink csv(o.out);
  std::vector<std::string> head{"L", "n", "h"};
  for (int N : Ncs) head.push_back("N=" + std::to_string(N));
  csv.row(head);
  for (int i = 0; i < R; ++i) {
    std::vector<std::string> cells{std::to_string(rows[i].L), std::to_string(rows[i].n),
                                   fmt(rows[i].h)};
    for (int j = 0; j < C; ++j) cells.push_back(fmt(cell[i * C + j]));
    csv.row(cells);
  }
  std::vector<double> hs(R);
  for (int i = 0; i < R; ++i) hs[i] = rows[i].h;
  std::vector<std::string> slopes{"slope", "", ""};
  for (int j = 0; j < C; ++j) {
    std::vector<double> col(R);
    for (int i = 0; i < R; ++i) col[i] = cell[i * C + j];
    slopes.push_back(fmt(fit_slope(hs, col)));
  }
  csv.row(slopes);
  // plot error columns (4, 5, ...) against the stepsize column
  if (!o.out.empty()) {
    const std::string gp = o.out + ".gp";
    std::ofstream f(gp, std::ios::binary);
    if (f) {
      f << "set datafile separator ','\nset key autotitle columnhead\n"
        << "set xlabel 'h'\nset logscale xy\nplot";
      for (int j = 0; j < C; ++j)
        f << (j ? ", \\\n     " : " ") << "'" << o.out << "' using 3:" << (4 + j)
          << " with linespoints";
      f << "\n";
    }
  }

  int bad = 0;
  for (int idx = 0; idx < R * C; ++idx)
    if (!notes[idx].empty()) {
      ++bad;
      std::cerr << "cell L=" << rows[idx / C].L << " n=" << rows[idx / C].n
                << " N=" << Ncs[idx % C] << " failed: " << notes[idx] << "\n";
    }
  return bad == 0 ? 0 : 1;
}

int cmd_converge(const Options& o) {
  if (o.sweep == "gaps") return converge_gaps(o);
  if (o.sweep == "solver") return converge_solver(o);
  throw ConfigError("unknown sweep kind: " + o.sweep);
}

int cmd_diffcheck(const Options& o) {
  NodeFamily family = parse_nodes(o.nodes == "gauss" ? "cheb2" : o.nodes);
  int lo = 2, hi = 20;
  if (o.Md.size() == 1) hi = o.Md.front();
  else if (o.Md.size() >= 2) { lo = o.Md[0]; hi = o.Md[1]; }
  if (lo < 2 || hi < lo) throw ConfigError("diffcheck: bad M range");

  CsvSink csv(o.out);
  csv.row({"M", "inf_norm", "bound", "satisfied"});
  bool all_ok = true;
  for (int M = lo; M <= hi; ++M) {
    auto r = norm_bound_report(diff_matrix_interp(family, M, Window{0.0, 2.0}));
    all_ok = all_ok && r.satisfied;
    csv.row({std::to_string(M), fmt(r.inf_norm), fmt(r.bound), r.satisfied ? "true" : "false"});
  }
  emit_gnuplot(o.out, "M", {"M", "inf_norm", "bound"}, false);
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"accurate initial conditions and least-squares collocation for linear DAEs"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--problem", o.problem, "problem bundle name");
    cmd->add_option("--t-bar", o.t_bar, "time of the condition matrix");
    cmd->add_option("--tau", o.tau, "window width (repeatable for sweeps)");
    cmd->add_option("--Nd", o.Nd, "differentiation degree (-1: from Md)");
    cmd->add_option("--Md", o.Md, "differentiation nodes (repeatable for sweeps)");
    cmd->add_option("--Nc", o.Nc, "collocation degree (repeatable for sweeps)");
    cmd->add_option("--Mc", o.Mc, "collocation points per subinterval");
    cmd->add_option("--L", o.L, "windows (repeatable for sweeps)");
    cmd->add_option("--n", o.n, "subintervals per window (repeatable for sweeps)");
    cmd->add_option("--mode", o.mode, "window placement: central|left|right");
    cmd->add_option("--strategy", o.strategy, "basis continuation: svd-ode|qr-fixed");
    cmd->add_option("--diff", o.diff, "differentiation: interp|lsq");
    cmd->add_option("--nodes", o.nodes, "node family: cheb2|radau|gauss|equi");
    cmd->add_option("--out", o.out, "CSV output path (default stdout)");
    cmd->add_option("--config", o.config, "JSON config file (flags take precedence)");
    return cmd;
  };

  CLI::App* analyze = add_common(app.add_subcommand("analyze", "index, dof and condition matrix"));
  CLI::App* solve = add_common(app.add_subcommand("solve", "windowed collocation IVP solve"));
  CLI::App* converge = add_common(app.add_subcommand("converge", "convergence sweep tables"));
  converge->add_option("--sweep", o.sweep, "sweep kind: gaps|solver");
  CLI::App* diffcheck =
      add_common(app.add_subcommand("diffcheck", "differentiation matrix norm bounds"));

  CLI11_PARSE(app, argc, argv);

  CLI::App* active = app.get_subcommands().front();
  try {
    if (!o.config.empty()) apply_config(o.config, *active, o);
    if (active == analyze) return cmd_analyze(o);
    if (active == solve) return cmd_solve(o);
    if (active == converge) return cmd_converge(o);
    if (active == diffcheck) return cmd_diffcheck(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
