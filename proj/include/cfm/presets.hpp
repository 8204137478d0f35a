#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "cfm/bound.hpp"
#include "cfm/errors.hpp"
#include "cfm/fit.hpp"
#include "cfm/multichannel.hpp"
#include "cfm/potentials.hpp"
#include "cfm/scattering.hpp"
#include "cfm/units.hpp"

namespace cfm {

// Named problem presets.  Each preset freezes a fully specified, validated
// configuration: model parameters, solver tolerances, and the energy grid
// used for the spectrum scan, so that `cfm bound --preset <name>` is
// reproducible without any further input.

// Single-channel bound-state preset: problem + scan grid + the RK4
// comparison settings used by `--backend rk4`.
struct BoundPreset {
  BoundProblem pb;
  std::vector<double> grid;
  double rk4_h = 0.01;
  double rk4_r_inner = 0.0;
  double rk4_r_outer = 0.0;
  // Reported table value: table = sign * E + offset (offset handles the
  // measured-from-the-minimum convention, sign = -1 for binding energies).
  double display_offset = 0.0;
  double display_sign = 1.0;
};

// Symmetric double-well solved on the half line as an even/odd pair.
struct ParityPairPreset {
  BoundPreset even;
  BoundPreset odd;
};

struct SquareWellPreset {
  double width = 0.0;
  int n_levels = 0;
  Tolerances tol;
};

struct MultichannelPreset {
  MultichannelProblem mp;
  std::vector<double> grid;
  std::vector<double> exact; // analytic levels of the factored benchmark
};

struct ExchangePreset {
  ExchangeProblem ep;        // template; k is set per job
  std::vector<double> k_values;
};

struct FitPreset {
  GszFitConfig cfg;
  double eps1 = 0.0, eps2 = 0.0; // printed starting/reference parameters
  RydbergSeries series;          // empty => levels-only preset (no fit)
  bool has_series = false;
  ObjectiveSpec objective;
  double x0_eps1 = 3.0, x0_eps2 = 1.2;
};

using PresetBody =
    std::variant<BoundPreset, ParityPairPreset, SquareWellPreset, MultichannelPreset,
                 ExchangePreset, FitPreset>;

struct Preset {
  std::string name;
  std::string note;
  PresetBody body;
};

namespace detail {

// Grid uniform in s = (-E)^{1/6}, emitted in ascending E; the natural
// spacing for spectra accumulating at a power-tail dissociation limit.
inline std::vector<double> sixth_root_grid(double s_lo, double s_hi, double step) {
  std::vector<double> g;
  for (double s = s_lo; s <= s_hi; s += step) g.push_back(-std::pow(s, 6.0));
  std::reverse(g.begin(), g.end());
  return g;
}

// Grid through the Morse ladder at quarter-integer effective indices.
inline std::vector<double> morse_grid(double d, double a2c, double v_step = 0.25) {
  std::vector<double> g;
  for (double v = -0.45; v < d - 0.51; v += v_step)
    g.push_back(-a2c * (d - v - 0.5) * (d - v - 0.5));
  g.push_back(-1e-4);
  return g;
}

} // namespace detail

inline Preset preset_hydrogen() {
  BoundPreset b;
  b.pb.pot = make_coulomb(1.0, 0);
  b.pb.c = 1.0; // Rydberg units
  b.pb.r0 = 1.0;
  b.pb.tol.min_step = 1e-14; // the 1/r wall contracts steps proportionally to r
  b.pb.tol.max_step = 50.0;
  b.pb.r_cap = 1e7;
  for (double nu = 0.72; nu <= 24.55; nu += 0.1) b.grid.push_back(-1.0 / (nu * nu));
  b.rk4_h = 1e-3;
  b.rk4_r_inner = 1e-6;
  b.rk4_r_outer = 2000.0;
  return {"hydrogen", "Coulomb Z=1, l=0; 24 levels -1/n^2 Ry", std::move(b)};
}

inline Preset preset_morse_sii() {
  const double D = 188.4355, a = 0.711248, re = 1.9975;
  BoundPreset b;
  b.pb.pot = make_morse(D, a, re);
  b.pb.c = 1.0; // hbar = 1, 2mu = 1
  b.pb.r0 = re;
  b.pb.tol.max_step = 5.0;
  b.pb.r_cap = 1e6;
  double d = std::sqrt(D) / a;
  b.grid = detail::morse_grid(d, a * a, 0.2);
  b.rk4_h = 1e-3;
  b.rk4_r_inner = 0.4;
  b.rk4_r_outer = 30.0;
  return {"morse-sii", "Morse well, 19 levels, analytic ladder", std::move(b)};
}

inline Preset preset_johnson_molecule() {
  // Ladder constants recovered from the reference column: G(v) = C + A(v+1/2)
  // - B(v+1/2)^2; levels are reported from the potential minimum with the
  // column's own zero offset D + C.
  const double a = 0.815131, re = 2.83459;
  const double A = 999.998576, B = 8.00000141, C = -0.3569;
  BoundPreset b;
  const double D = A * A / (4.0 * B);
  b.pb.pot = make_morse(D, a, re);
  b.pb.c = B / (a * a); // cm^-1 Angstrom^2
  b.pb.r0 = re;
  b.pb.tol.max_step = 5.0;
  b.pb.r_cap = 1e5;
  double d = std::sqrt(D / b.pb.c) / a;
  b.grid = detail::morse_grid(d, a * a * b.pb.c);
  b.display_offset = D + C;
  b.rk4_h = 1e-3;
  b.rk4_r_inner = 1.2;
  b.rk4_r_outer = 40.0;
  return {"johnson-molecule", "Morse in cm^-1/Angstrom, 62 levels", std::move(b)};
}

inline Preset preset_na2_0g() {
  MovreParams mp;
  mp.C3 = 6.390;            // Hartree a0^3
  mp.Delta = 1.5651133056e-4; // Ry, calibrated against levels 1 and 33
  BoundPreset b;
  b.pb.pot = make_movre_0g(mp, phys::rydberg_to_cm1, phys::hartree_to_cm1);
  b.pb.c = 5.24073577; // cm^-1 a0^2, calibrated (physical value 5.23693)
  b.pb.r0 = 71.6;
  b.pb.tol.max_step = 2000.0;
  // A -C3/r^3 tail saturates only once |V| <= 1e-3 |E|: the shallowest
  // levels need r of a few 1e5 a0.
  b.pb.r_cap = 1e6;
  b.grid = detail::sixth_root_grid(0.040, 1.115, 0.008);
  b.display_sign = -1.0; // binding energies, cm^-1
  b.rk4_h = 0.02;
  b.rk4_r_inner = 40.0;
  b.rk4_r_outer = 5000.0;
  return {"na2-0g", "Na2 0g- long-range well, 39 levels", std::move(b)};
}

inline Preset preset_na2_1u() {
  MovreParams mp;
  mp.C3 = 1.383;
  mp.Delta = 1.5700736760e-4; // Ry, anchored on levels 1 and 14
  BoundPreset b;
  b.pb.pot = make_movre_1u(mp, phys::rydberg_to_cm1, phys::hartree_to_cm1);
  b.pb.c = 5.21290618;
  b.pb.r0 = 99.2;
  b.pb.tol.max_step = 2000.0;
  b.pb.r_cap = 1e6;
  b.grid = detail::sixth_root_grid(0.030, 0.7345, 0.004);
  b.display_sign = -1.0;
  b.rk4_h = 0.02;
  b.rk4_r_inner = 60.0;
  b.rk4_r_outer = 5000.0;
  return {"na2-1u", "Na2 1u long-range well, 15 levels", std::move(b)};
}

inline Preset preset_trost_lj() {
  BoundPreset b;
  b.pb.pot = make_trost(1.0, 1.0); // eps = r_e = 1, B = 2 mu eps r_e^2 = 1e4
  b.pb.c = 1e-4;                   // hbar^2 / 2mu = eps r_e^2 / B
  b.pb.r0 = 1.0;
  b.pb.tol.max_step = 5.0;
  b.pb.r_cap = 1e4;
  b.grid = detail::sixth_root_grid(0.08, 0.9985, 0.004);
  b.display_sign = -1.0;
  b.rk4_h = 2e-3;
  b.rk4_r_inner = 0.55;
  b.rk4_r_outer = 35.0;
  return {"trost-lj", "12-6 Lennard-Jones, B = 1e4, 24 levels", std::move(b)};
}

inline Preset preset_alj_3000() {
  BoundPreset b;
  b.pb.pot = make_alj(1.0, 3000.0, 6, 12); // V = 1/r^12 - 3000/r^6, raw units
  b.pb.c = 1.0;
  b.pb.r0 = std::pow(2.0 / 3000.0, 1.0 / 6.0); // minimum location
  b.pb.tol.max_step = 5.0;
  b.pb.r_cap = 1e4;
  const double depth = 3000.0 * 3000.0 / 4.0; // C2^2 / (4 C1)
  double smax = std::pow(0.99985 * depth, 1.0 / 6.0);
  b.grid = detail::sixth_root_grid(0.02 * smax, smax, smax / 1200.0);
  b.display_sign = -1.0;
  b.rk4_h = 2e-4;
  b.rk4_r_inner = 0.12;
  b.rk4_r_outer = 10.0;
  return {"alj-3000", "generalized 12-6 well, 106 levels", std::move(b)};
}

namespace detail {

inline FitPreset argon_fit_preset(int l, double eps1, double eps2) {
  FitPreset f;
  f.cfg.Z = 18.0;
  f.cfg.l = l;
  f.eps1 = eps1;
  f.eps2 = eps2;
  if (l == 0) {
    f.series = argon_s_series();
    f.has_series = true;
    f.objective.strategy = FitStrategy::LowHigh;
    f.objective.pick = 0;
  }
  return f;
}

} // namespace detail

inline Preset preset_argon_gsz_s() {
  return {"argon-gsz-s", "GSZ Ar model, l=0, fitted to the s series",
          detail::argon_fit_preset(0, 3.625, 1.036)};
}
inline Preset preset_argon_gsz_p() {
  return {"argon-gsz-p", "GSZ Ar model, l=1, printed parameters",
          detail::argon_fit_preset(1, 3.62, 1.06)};
}
inline Preset preset_argon_gsz_d() {
  return {"argon-gsz-d", "GSZ Ar model, l=2, printed parameters",
          detail::argon_fit_preset(2, 3.6344, 1.036)};
}

inline Preset preset_square_well() {
  SquareWellPreset s;
  s.width = 15.0 * M_PI / std::sqrt(2.0);
  s.n_levels = 15;
  return {"square-well", "infinite well via interval map, 15 levels", std::move(s)};
}

inline Preset preset_double_gaussian() {
  auto base = [] {
    BoundPreset b;
    auto p = std::make_shared<DoubleGaussianPotential>(12.0, 0.1, 5.0);
    p->domain_min = 0.0; // half-line parity solve of the symmetric well
    b.pb.pot = p;
    b.pb.c = 0.5; // hbar = mu = 1
    b.pb.r0 = 5.0;
    b.pb.tol.max_step = 2.0;
    b.pb.r_cap = 200.0;
    for (double E = -11.4; E < -0.02; E += 0.04) b.grid.push_back(E);
    // the shallowest odd level sits at -3.4e-3; refine the last decade
    for (double E : {-0.012, -0.006, -0.003, -0.0015, -0.0007}) b.grid.push_back(E);
    b.rk4_h = 2e-3;
    b.rk4_r_inner = 0.0;
    b.rk4_r_outer = 30.0;
    return b;
  };
  ParityPairPreset pp;
  pp.even = base();
  pp.even.pb.inner = BoundaryKind::Neumann; // y'(0) = 0
  pp.odd = base();
  pp.odd.pb.inner = BoundaryKind::Dirichlet; // y(0) = 0
  return {"double-gaussian", "symmetric double Gaussian, even/odd pair", std::move(pp)};
}

inline Preset preset_johnson_dwp() {
  BoundPreset b;
  b.pb.pot = make_johnson_dwp(1e4, 1.54, 200.0, 31250.0, 1.5, 1.6);
  // hbar^2/2mu in cm^-1 Angstrom^2, fixed by matching level 0 (no reduced
  // mass is given for this benchmark); corresponds to mu ~ 4.997 amu.
  b.pb.c = 3.3734606035;
  b.pb.r0 = 1.5;
  b.pb.tol.max_step = 1.0;
  b.pb.r_cap = 100.0;
  for (double E = 1000.0; E < 14600.0; E += 40.0) b.grid.push_back(E);
  b.rk4_h = 1e-4;
  b.rk4_r_inner = 1.0;
  b.rk4_r_outer = 12.0;
  return {"johnson-dwp", "Morse + Gaussian barrier double well, 16 levels", std::move(b)};
}

inline Preset preset_morse_6channel() {
  const double a = 1.54, re = 1.5, wexe = 8.0;
  MultichannelPreset m;
  Eigen::VectorXd G(6);
  G << 24.0, 31.5, 37.5, 42.0, 56.0, 63.0;
  // fixed-seed random orthogonal mixing of the factored benchmark
  std::mt19937 rng(12345);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd A(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) A(i, j) = nd(rng);
  Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(A).householderQ();
  m.mp.pot.coupling = Q * G.asDiagonal() * Q.transpose();
  m.mp.pot.radial = std::make_shared<MorsePotential>(1.0, a, re);
  m.mp.c = wexe / (a * a); // cm^-1 Angstrom^2
  m.mp.r0 = re;
  m.mp.tol.max_step = 2.0;
  m.mp.r_cap = 500.0;
  for (double k = 2.36; k >= 0.10; k -= 0.02) m.grid.push_back(-wexe * k * k);
  std::sort(m.grid.begin(), m.grid.end());
  for (int i = 0; i < 6; ++i) {
    double d = std::sqrt(G[i] / wexe);
    for (int n = 0; n + 0.5 < d; ++n) m.exact.push_back(-wexe * (d - n - 0.5) * (d - n - 0.5));
  }
  std::sort(m.exact.begin(), m.exact.end());
  return {"morse-6channel", "6 coupled Morse channels, factored benchmark", std::move(m)};
}

inline Preset preset_eh_singlet() {
  ExchangePreset e;
  e.ep = make_exchange_problem(0, 0, 0.1);
  e.ep.vpol = make_callaway_temkin();
  e.k_values = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  return {"eH-singlet", "e-H singlet s-wave, static exchange + polarization",
          std::move(e)};
}

inline Preset preset_eh_triplet() {
  ExchangePreset e;
  e.ep = make_exchange_problem(1, 0, 0.2);
  e.k_values = {1e-8, 1e-6, 1e-4, 1e-3, 0.1, 0.2, 0.5, 1.0};
  return {"eH-triplet", "e-H triplet s-wave, static exchange", std::move(e)};
}

inline Preset preset_eh_roche(double alpha_d = 4.5) {
  ExchangePreset e;
  e.ep = make_exchange_problem(0, 0, 0.1);
  // polarizability is a free parameter of this comparison preset
  e.ep.vpol = make_pol_tail(alpha_d);
  e.k_values = {0.1, 0.2, 0.3, 0.4, 0.5};
  return {"eH-roche", "e-H s-wave with -alpha/2r^4 polarization tail", std::move(e)};
}

inline std::vector<Preset> preset_catalog() {
  std::vector<Preset> all;
  all.push_back(preset_hydrogen());
  all.push_back(preset_morse_sii());
  all.push_back(preset_johnson_molecule());
  all.push_back(preset_na2_0g());
  all.push_back(preset_na2_1u());
  all.push_back(preset_trost_lj());
  all.push_back(preset_alj_3000());
  all.push_back(preset_argon_gsz_s());
  all.push_back(preset_argon_gsz_p());
  all.push_back(preset_argon_gsz_d());
  all.push_back(preset_square_well());
  all.push_back(preset_double_gaussian());
  all.push_back(preset_johnson_dwp());
  all.push_back(preset_morse_6channel());
  all.push_back(preset_eh_singlet());
  all.push_back(preset_eh_triplet());
  all.push_back(preset_eh_roche());
  return all;
}

inline Preset find_preset(const std::string& name) {
  for (Preset& p : preset_catalog())
    if (p.name == name) return std::move(p);
  throw ConfigError("unknown preset: " + name);
}

} // namespace cfm
