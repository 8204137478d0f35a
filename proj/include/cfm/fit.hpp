#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cfm/bound.hpp"
#include "cfm/errors.hpp"
#include "cfm/potentials.hpp"

namespace cfm {

// Quantum-defect analysis of Rydberg series and Broyden quasi-Newton
// optimisation of the two Green-Sellin-Zachor parameters (eps1, eps2)
// against experimental levels.

// delta = n - nu with nu = (-E)^{-1/2}, E in Rydberg (asymptotic charge 1).
inline double quantum_defect(double E_ry, int n) {
  if (!(E_ry < 0.0)) throw NonNegativeEnergy("quantum_defect: level must be bound (E < 0)");
  return n - 1.0 / std::sqrt(-E_ry);
}

struct RydbergSeries {
  int l = 0;
  std::vector<double> energies; // Ry, negative, strictly increasing toward 0
  int n_start = 2;              // principal number paired with energies[0]
  std::vector<double> qd;       // experimental QDs (filled on demand)

  void validate() const {
    if (energies.size() < 2) throw ConfigError("RydbergSeries: need at least 2 levels");
    for (std::size_t i = 0; i < energies.size(); ++i) {
      if (!(energies[i] < 0.0)) throw ConfigError("RydbergSeries: levels must be negative");
      if (i > 0 && !(energies[i] > energies[i - 1]))
        throw ConfigError("RydbergSeries: levels must increase toward 0");
    }
  }
  double experimental_qd(std::size_t i) const {
    if (i < qd.size()) return qd[i];
    return quantum_defect(energies[i], n_start + static_cast<int>(i));
  }
};

// Residual selection strategies; each produces exactly two components to
// match the two free parameters.
enum class FitStrategy {
  AvgHigh, // one picked level + the average QD of a block of higher ones
  TwoHigh, // two high levels with stabilised QD
  LowHigh, // one low and one high level
};

struct ObjectiveSpec {
  FitStrategy strategy = FitStrategy::LowHigh;
  int pick = 0;     // the single picked level (AvgHigh, LowHigh low index)
  int high = -1;    // high level (-1 means last of the series)
  int second = -1;  // TwoHigh: the other high level (-1 means third-from-end)
  int avg_from = -1; // AvgHigh block [avg_from, high]; -1 means upper half
};

enum class FitBackend { Vsca, Rk4 };

struct GszFitConfig {
  double Z = 18.0;
  int l = 0;
  double c = 1.0;       // hbar^2/2mu in Ry a0^2
  double r0 = 1.0;
  double min_step = 1e-14;
  double max_step = 50.0;
  double r_cap = 1e6;
  // scan window as effective quantum numbers nu = (-E)^{-1/2}
  double nu_lo = 1.05, nu_hi = 12.6, nu_step = 0.1;
  FitBackend backend = FitBackend::Vsca;
  double rk4_h = 5e-3;
  double rk4_r_inner = 1e-6;
  // must clear the outer turning point of the shallowest level (~2 nu_hi^2)
  double rk4_r_outer = 500.0;
};

inline std::vector<double> gsz_levels(double eps1, double eps2, const GszFitConfig& cfg) {
  if (!(eps1 > 0.0) || !(eps2 > 0.0))
    throw SolverFailure("gsz_levels: parameters must stay positive (eps1=" +
                        std::to_string(eps1) + ", eps2=" + std::to_string(eps2) + ")");
  BoundProblem pb;
  auto pot = std::make_shared<GszPotential>(cfg.Z, eps1, eps2);
  pot->l = cfg.l;
  pb.pot = pot;
  pb.c = cfg.c;
  pb.r0 = cfg.r0;
  pb.tol.min_step = cfg.min_step;
  pb.tol.max_step = cfg.max_step;
  pb.r_cap = cfg.r_cap;
  std::vector<double> grid;
  for (double nu = cfg.nu_lo; nu <= cfg.nu_hi; nu += cfg.nu_step)
    grid.push_back(-1.0 / (nu * nu));
  try {
    Spectrum sp = cfg.backend == FitBackend::Vsca
                      ? scan_spectrum(pb, grid)
                      : scan_spectrum_rk4(pb, grid, cfg.rk4_h, cfg.rk4_r_inner, cfg.rk4_r_outer);
    return sp.energies;
  } catch (const SolverError& e) {
    throw SolverFailure(std::string("gsz_levels(eps1=") + std::to_string(eps1) +
                        ", eps2=" + std::to_string(eps2) + "): " + e.what());
  }
}

// Residuals = QD(computed) - QD(experimental) on the levels selected by the
// strategy.  Computed levels are matched to the series by ordinal index
// counted from the first level found in the scan window.
inline Eigen::VectorXd gsz_objective(const Eigen::VectorXd& params, const RydbergSeries& series,
                                     const ObjectiveSpec& spec, const GszFitConfig& cfg) {
  series.validate();
  int m = static_cast<int>(series.energies.size());
  std::vector<double> L = gsz_levels(params[0], params[1], cfg);
  if (static_cast<int>(L.size()) < m)
    throw SolverFailure("gsz_objective: scan found " + std::to_string(L.size()) +
                        " levels, series references " + std::to_string(m) + " (eps1=" +
                        std::to_string(params[0]) + ", eps2=" + std::to_string(params[1]) + ")");
  auto cqd = [&](int i) { return quantum_defect(L[i], series.n_start + i); };
  auto res = [&](int i) { return cqd(i) - series.experimental_qd(i); };

  int high = spec.high >= 0 ? spec.high : m - 1;
  Eigen::VectorXd r(2);
  switch (spec.strategy) {
  case FitStrategy::LowHigh:
    r[0] = res(spec.pick);
    r[1] = res(high);
    break;
  case FitStrategy::TwoHigh: {
    int second = spec.second >= 0 ? spec.second : m - 3;
    r[0] = res(second);
    r[1] = res(high);
    break;
  }
  case FitStrategy::AvgHigh: {
    int from = spec.avg_from >= 0 ? spec.avg_from : m / 2;
    r[0] = res(spec.pick);
    double acc = 0.0;
    for (int i = from; i <= high; ++i) acc += res(i);
    r[1] = acc / (high - from + 1);
    break;
  }
  }
  return r;
}

struct BroydenState {
  Eigen::VectorXd x;
  Eigen::VectorXd residual;
  Eigen::MatrixXd jacobian;
  int iterations = 0;
  bool converged = false;
};

// Quasi-Newton solve of r(x) = 0: forward-difference Jacobian to start,
// Broyden's good update per accepted step, backtracking (up to 8 halvings)
// on the residual norm, and a finite-difference Jacobian restart when the
// line search stalls.
inline BroydenState broyden_solve(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& fn,
                                  Eigen::VectorXd x0, double tol = 1e-9, int max_iter = 60,
                                  double fd_step = 1e-4) {
  BroydenState st;
  st.x = std::move(x0);
  st.residual = fn(st.x);
  const int n = static_cast<int>(st.x.size());
  if (st.residual.size() != n)
    throw ConfigError("broyden_solve: residual dimension must match parameter dimension");

  auto fd_jacobian = [&] {
    Eigen::MatrixXd J(n, n);
    for (int j = 0; j < n; ++j) {
      Eigen::VectorXd xp = st.x;
      double h = fd_step * std::max(1.0, std::abs(st.x[j]));
      xp[j] += h;
      J.col(j) = (fn(xp) - st.residual) / h;
    }
    if (!J.allFinite()) throw SolverFailure("broyden_solve: non-finite Jacobian");
    return J;
  };
  st.jacobian = fd_jacobian();

  bool reinitialized_this_round = true; // the initial J is fresh
  while (st.iterations < max_iter) {
    if (st.residual.lpNorm<Eigen::Infinity>() < tol) {
      st.converged = true;
      return st;
    }
    ++st.iterations;
    Eigen::VectorXd dx = st.jacobian.fullPivLu().solve(-st.residual);
    if (!dx.allFinite()) throw SolverFailure("broyden_solve: singular Jacobian");

    double nr = st.residual.norm();
    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd xn, rn;
    for (int bt = 0; bt <= 8; ++bt) {
      xn = st.x + t * dx;
      bool ok = true;
      try {
        rn = fn(xn);
      } catch (const SolverFailure&) {
        ok = false;
      }
      if (ok && rn.allFinite() && rn.norm() < nr) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (reinitialized_this_round)
        throw SolverFailure("broyden_solve: line search failed with a fresh Jacobian");
      st.jacobian = fd_jacobian();
      reinitialized_this_round = true;
      continue;
    }
    Eigen::VectorXd step = xn - st.x;
    Eigen::VectorXd dr = rn - st.residual;
    st.jacobian += (dr - st.jacobian * step) * step.transpose() / step.squaredNorm();
    st.x = xn;
    st.residual = rn;
    reinitialized_this_round = false;
  }
  if (st.residual.lpNorm<Eigen::Infinity>() < tol) {
    st.converged = true;
    return st;
  }
  throw MaxIterations("broyden_solve: no convergence in " + std::to_string(max_iter) +
                      " iterations (|r|_inf = " + std::to_string(st.residual.lpNorm<Eigen::Infinity>()) +
                      ")");
}

struct GszFitResult {
  double eps1 = 0.0, eps2 = 0.0;
  BroydenState rk4_stage;  // populated when the pipeline ran RK4 first
  BroydenState vsca_stage;
  std::vector<double> levels; // VSCA levels at the optimum, series-aligned
};

// RK4-first, VSCA-polish pipeline: the cheap fixed-step backend brings the
// parameters near the optimum, the variable-step backend finishes.
inline GszFitResult fit_gsz(const RydbergSeries& series, const ObjectiveSpec& spec,
                            GszFitConfig cfg, Eigen::VectorXd x0, double tol = 1e-8,
                            bool rk4_first = true) {
  GszFitResult out;
  if (rk4_first) {
    GszFitConfig c1 = cfg;
    c1.backend = FitBackend::Rk4;
    auto f1 = [&](const Eigen::VectorXd& p) { return gsz_objective(p, series, spec, c1); };
    out.rk4_stage = broyden_solve(f1, x0, std::max(tol, 1e-5), 40);
    x0 = out.rk4_stage.x;
  }
  cfg.backend = FitBackend::Vsca;
  auto f2 = [&](const Eigen::VectorXd& p) { return gsz_objective(p, series, spec, cfg); };
  out.vsca_stage = broyden_solve(f2, x0, tol, 40);
  out.eps1 = out.vsca_stage.x[0];
  out.eps2 = out.vsca_stage.x[1];
  out.levels = gsz_levels(out.eps1, out.eps2, cfg);
  out.levels.resize(std::min(out.levels.size(), series.energies.size()));
  return out;
}

// Per-level comparison table: n, E_exp, E_comp, QD_exp, QD_comp.
inline std::string fit_report(const RydbergSeries& series, const std::vector<double>& computed) {
  std::ostringstream os;
  os.precision(9);
  os << "n,E_exp_ry,E_comp_ry,qd_exp,qd_comp\n";
  for (std::size_t i = 0; i < series.energies.size() && i < computed.size(); ++i) {
    int n = series.n_start + static_cast<int>(i);
    os << n << ',' << series.energies[i] << ',' << computed[i] << ','
       << series.experimental_qd(i) << ',' << quantum_defect(computed[i], n) << '\n';
  }
  return os.str();
}

// The argon s-series used throughout (Ry, lowest first).
inline RydbergSeries argon_s_series() {
  RydbergSeries s;
  s.l = 0;
  s.n_start = 2;
  s.energies = {-0.309522,    -0.124309,    -6.76780e-2, -4.25540e-2, -2.92210e-2, -2.13080e-2,
                -1.62200e-2,  -1.27620e-2,  -1.03020e-2, -8.49000e-3, -7.11800e-3};
  return s;
}

} // namespace cfm
