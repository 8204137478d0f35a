#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "cfm/errors.hpp"
#include "cfm/integrate.hpp"
#include "cfm/potential.hpp"
#include "cfm/potentials.hpp"
#include "cfm/rootfind.hpp"

namespace cfm {

// Boundary condition at an endpoint of the domain: Dirichlet kills the
// value (y -> 0), Neumann kills the derivative (y' -> 0).  The matching
// ratio saturating at that end is -alpha/beta resp. -alpha'/beta'.
enum class BoundaryKind { Dirichlet, Neumann };

// Canonical pair alpha, beta at some r: alpha(r0) = 1, alpha'(r0) = 0,
// beta(r0) = 0, beta'(r0) = 1.  Any solution is y(r0) alpha + y'(r0) beta.
// A joint power-of-ten rescale keeps the four values representable; every
// ratio is unaffected and log10_scale records the factor taken out.
struct CanonicalPair {
  double r = 0.0;
  double alpha = 1.0, alpha_prime = 0.0;
  double beta = 0.0, beta_prime = 1.0;
  double log10_scale = 0.0;

  double ratio(BoundaryKind k) const {
    return k == BoundaryKind::Dirichlet ? -alpha / beta : -alpha_prime / beta_prime;
  }
};

struct SaturationReport {
  double r_stop = 0.0;
  long steps = 0;
  bool saturated = false;    // stopped by the stability criterion
  bool hit_endpoint = false; // landed exactly on a finite domain edge
  double ratio = 0.0;        // boundary ratio at the stop point
  // Unit vector along the (y(r0), y'(r0)) direction selected by the
  // boundary condition: (u, v) ~ (beta_end, -alpha_end) (primed pair for
  // Neumann).  ratio = v/u; the vector form stays regular when the ratio
  // passes through a pole.
  double u = 0.0, v = 0.0;
  double log10_scale = 0.0;
};

// Scalar bound-state problem y'' = ((V_tot - E)/c) y on the potential's
// domain.  c = hbar^2/2mu in (energy unit)*(length unit)^2.
struct BoundProblem {
  PotentialPtr pot;
  double c = 1.0;
  double r0 = 1.0; // matching point; pick near the potential minimum
  BoundaryKind inner = BoundaryKind::Dirichlet;
  BoundaryKind outer = BoundaryKind::Dirichlet;
  Tolerances tol;
  // Override of tol.stability_error for the inward run (slowly saturating
  // walls such as the Coulomb one need a looser value); 0 keeps the default.
  double inner_stability = 0.0;
  double r_cap = 0.0;     // outward range limit; 0 means 1e4 * max(1, r0)
  double root_tol = 1e-12; // relative energy tolerance in root refinement
  int saturation_run = 5;
  long max_steps = 5'000'000;
};

namespace detail {

inline constexpr double kRescaleAt = 1e150;

struct PairStepView {
  double r_from = 0.0;
  double h = 0.0;     // signed physical step
  double scale = 1.0; // local variable scale: coefficients are in t = x/scale
  const double* CA = nullptr;
  const double* CB = nullptr;
  int NA = 0, NB = 0;
  double log10_scale = 0.0; // joint rescale in effect during this step
};

// Propagates the canonical pair from pb.r0 in `direction` (+1/-1) until the
// boundary ratio saturates (or the finite regular endpoint is reached).
// `sink` sees every accepted step and may be a no-op.
template <class StepSink>
inline SaturationReport propagate_pair(const BoundProblem& pb, double E, int direction,
                                       CanonicalPair& cp, StepSink&& sink) {
  const RadialPotential& pot = *pb.pot;
  const Tolerances& tol = pb.tol;
  const bool inward = direction < 0;
  const BoundaryKind kind = inward ? pb.inner : pb.outer;
  double eps_s = (inward && pb.inner_stability > 0.0) ? pb.inner_stability : tol.stability_error;
  const double E_eff = E / pb.c;
  const double D = pot.tail.D;
  const double r_cap = pb.r_cap > 0.0 ? pb.r_cap : 1e4 * std::max(1.0, pb.r0);
  const bool finite_edge = inward && !pot.singular_at_rmin && std::isfinite(pot.domain_min);

  cp = CanonicalPair{};
  cp.r = pb.r0;

  SaturationReport rep;
  double h_trial = 0.1;
  // Boundary direction (u, v) of the previous step, for the angular
  // stabilisation test; stays well-conditioned when the ratio v/u poles.
  double u_prev = std::numeric_limits<double>::quiet_NaN(), v_prev = u_prev;
  int run = 0;
  double CA[64], CB[64];

  auto boundary_vector = [&](double& u, double& v) {
    if (kind == BoundaryKind::Dirichlet) {
      u = cp.beta;
      v = -cp.alpha;
    } else {
      u = cp.beta_prime;
      v = -cp.alpha_prime;
    }
    double n = std::hypot(u, v);
    if (n > 0.0 && std::isfinite(n)) {
      u /= n;
      v /= n;
    }
  };

  for (long step = 0; step < pb.max_steps; ++step) {
    // Expansion in the scaled offset t = (r' - r)/s with s near the
    // expected step; the scaled coefficients stay representable however
    // close a singular endpoint is (the raw ones overflow there).
    double hint = pot.max_step_hint(cp.r);
    double s = std::max(std::min({h_trial, hint, tol.max_step}), 1e-280);
    SeriesExpansion ex = pot.total_taylor(cp.r, tol.max_order, s);
    for (double& g : ex.gamma) g /= pb.c;
    vsca_coefficients(ex, E_eff, cp.alpha, cp.alpha_prime, tol.max_order, CA);
    vsca_coefficients(ex, E_eff, cp.beta, cp.beta_prime, tol.max_order, CB);
    for (int n = 0; n <= tol.max_order; ++n)
      if (!std::isfinite(CA[n]) || !std::isfinite(CB[n]))
        throw NonFiniteCoefficient("propagate_pair: non-finite series coefficient");
    double scale = std::max({1.0, std::abs(cp.alpha), std::abs(cp.alpha_prime) * s,
                             std::abs(cp.beta), std::abs(cp.beta_prime) * s});
    StepChoice sa =
        choose_order_and_step(CA, tol.max_order, h_trial / s, tol.truncation_error, scale);
    StepChoice sb =
        choose_order_and_step(CB, tol.max_order, h_trial / s, tol.truncation_error, scale);
    double h = std::min({sa.h * s, sb.h * s, tol.max_step, hint});
    if (!std::isfinite(h)) h = std::max(1.0, 0.5 * std::abs(cp.r));
    bool landing = false;
    if (finite_edge) {
      double dist = cp.r - pot.domain_min;
      if (h >= dist) {
        h = dist;
        landing = true;
      }
    }
    if (!landing && h < tol.min_step)
      throw StepUnderflow("propagate_pair: step below h_min before saturation");
    double ht = direction * h / s;

    PairStepView view{cp.r, direction * h, s, CA, CB, sa.order, sb.order, cp.log10_scale};
    sink(view);

    double na, nap, nb, nbp;
    evaluate_series(CA, sa.order, ht, na, nap);
    evaluate_series(CB, sb.order, ht, nb, nbp);
    cp.alpha = na;
    cp.alpha_prime = nap / s;
    cp.beta = nb;
    cp.beta_prime = nbp / s;
    cp.r += direction * h;
    h_trial = h;
    rep.steps = step + 1;

    double m = std::max({std::abs(cp.alpha), std::abs(cp.alpha_prime), std::abs(cp.beta),
                         std::abs(cp.beta_prime)});
    if (!std::isfinite(m)) throw NonFiniteValue("propagate_pair: solution overflow");
    if (m > kRescaleAt) {
      double f = 1.0 / m;
      cp.alpha *= f;
      cp.alpha_prime *= f;
      cp.beta *= f;
      cp.beta_prime *= f;
      cp.log10_scale += std::log10(m);
    }

    if (landing) {
      rep.hit_endpoint = true;
      rep.saturated = true;
      break;
    }

    // Angular stabilisation of the boundary direction: |sin| of the angle
    // swept since the previous step below eps_s.  Equivalent to the
    // relative ratio criterion away from ratio poles, regular across them.
    double u, v;
    boundary_vector(u, v);
    if (std::isfinite(u_prev) && std::abs(u * v_prev - v * u_prev) <= eps_s)
      ++run;
    else
      run = 0;
    u_prev = u;
    v_prev = v;

    bool gate = true;
    if (!inward) {
      // Do not stop while the potential still differs appreciably from its
      // dissociation limit on the scale of the binding energy; a confining
      // wall far above that scale also terminates the run (no tail exists).
      double v = pot.total_value(cp.r);
      gate = std::abs(v - D) <= 1e-3 * std::abs(E - D) || v - D >= 10.0 * std::abs(E - D);
    }
    if (run >= pb.saturation_run && gate) {
      rep.saturated = true;
      break;
    }
    if (!inward && cp.r > r_cap)
      throw NoSaturation("propagate_pair: outward ratio not saturated before r_cap");
  }
  if (!rep.saturated) throw NoSaturation("propagate_pair: step budget exhausted");
  rep.r_stop = cp.r;
  rep.ratio = cp.ratio(kind);
  boundary_vector(rep.u, rep.v);
  rep.log10_scale = cp.log10_scale;
  if (!(std::isfinite(rep.u) && std::isfinite(rep.v)) ||
      (rep.u == 0.0 && rep.v == 0.0))
    throw NoSaturation("propagate_pair: boundary direction not finite at stop");
  return rep;
}

} // namespace detail

// Canonical pair propagated one-sided to its boundary limit.
inline SaturationReport canonical_pair(const BoundProblem& pb, double E, int direction,
                                       CanonicalPair& cp) {
  return detail::propagate_pair(pb, E, direction, cp, [](const detail::PairStepView&) {});
}

struct EigenvalueSample {
  double F = 0.0; // l_plus - l_minus; zero at an eigenvalue
  SaturationReport inner;
  SaturationReport outer;
};

inline EigenvalueSample eigenvalue_function(const BoundProblem& pb, double E) {
  EigenvalueSample s;
  CanonicalPair cp;
  s.inner = canonical_pair(pb, E, -1, cp);
  s.outer = canonical_pair(pb, E, +1, cp);
  s.F = s.outer.ratio - s.inner.ratio;
  return s;
}

// Pole-free form of the matching condition: the cross product of the unit
// boundary directions from both sides.  Vanishes exactly where F does but
// stays bounded through the tan-like poles of F, so a sign change always
// brackets an eigenvalue.  Used by the spectrum scan; F itself is exposed
// through eigenvalue_function for diagnostics and tables.
inline double matching_mismatch(const BoundProblem& pb, double E) {
  CanonicalPair cp;
  SaturationReport in = canonical_pair(pb, E, -1, cp);
  SaturationReport out = canonical_pair(pb, E, +1, cp);
  return in.u * out.v - in.v * out.u;
}

struct Spectrum {
  std::vector<double> energies;
  std::vector<double> residuals; // F at each accepted eigenvalue
  int poles_skipped = 0;
  int failed_points = 0;
};

// Grid scan of F(E); grid points must be strictly below the dissociation
// limit.  Evaluation is parallel across grid points (CFM_THREADS).
inline Spectrum scan_spectrum(const BoundProblem& pb, const std::vector<double>& grid,
                              bool parallel = true) {
  auto F = [&pb](double E) { return matching_mismatch(pb, E); };
  ScanResult sr = scan_for_roots(F, grid, pb.root_tol, parallel, /*classify_poles=*/false);
  Spectrum sp;
  sp.poles_skipped = sr.poles_skipped;
  sp.failed_points = sr.failed_points;
  for (const BracketedRoot& r : sr.roots) {
    sp.energies.push_back(r.x);
    sp.residuals.push_back(r.f);
  }
  return sp;
}

struct Wavefunction {
  std::vector<double> r;
  std::vector<double> y;
  std::vector<double> y_prime;
  int nodes = 0;
  double norm = 0.0; // integral of y^2 before normalisation
  SaturationReport inner;
  SaturationReport outer;
};

// Eigenfunction at (an accepted) eigenvalue E, normalised to unit L2 norm,
// sampled at the step ends of both runs.  The per-step L2 contribution is
// integrated exactly from the local series.
inline Wavefunction wavefunction(const BoundProblem& pb, double E) {
  Wavefunction wf;
  CanonicalPair cp;
  wf.inner = canonical_pair(pb, E, -1, cp);
  wf.outer = [&] {
    CanonicalPair tmp;
    return canonical_pair(pb, E, +1, tmp);
  }();
  double mismatch = std::abs(wf.inner.u * wf.outer.v - wf.inner.v * wf.outer.u);
  if (mismatch > 1e-5)
    throw NotAnEigenvalue("wavefunction: boundary directions do not match at this energy");

  // Initial conditions at r0 compatible with the inner boundary limit.
  double y0 = wf.inner.u, yp0 = wf.inner.v;

  const RadialPotential& pot = *pb.pot;
  const Tolerances& tol = pb.tol;
  double E_eff = E / pb.c;

  auto run_scalar = [&](int direction, double stop_r, std::vector<double>& rs,
                        std::vector<double>& ys, std::vector<double>& yps) {
    OdeState st{pb.r0, y0, yp0};
    double h_trial = 0.1;
    double C[64];
    long guard = pb.max_steps;
    // Past the turning points the admixture of the growing solution takes
    // over eventually; cut the run once the envelope has decayed and turns
    // back up (the true eigenfunction only decays there).
    double env_max = std::abs(y0) + std::abs(yp0);
    double env_min = env_max;
    while (guard-- > 0) {
      bool last = false;
      double hint = pot.max_step_hint(st.r);
      double s = std::max(std::min({h_trial, hint, tol.max_step}), 1e-280);
      SeriesExpansion ex = pot.total_taylor(st.r, tol.max_order, s);
      for (double& g : ex.gamma) g /= pb.c;
      detail::vsca_coefficients(ex, E_eff, st.y, st.y_prime, tol.max_order, C);
      double scale = std::max(1.0, std::max(std::abs(st.y), std::abs(st.y_prime) * s));
      detail::StepChoice sc =
          detail::choose_order_and_step(C, tol.max_order, h_trial / s, tol.truncation_error, scale);
      double h = std::min({sc.h * s, tol.max_step, hint});
      if (!std::isfinite(h)) h = std::max(1.0, 0.5 * std::abs(st.r));
      double dist = std::abs(stop_r - st.r);
      if (h >= dist) {
        h = dist;
        last = true;
      }
      double ht = direction * h / s;
      // L2 contribution of this step from the series square.
      double acc = 0.0;
      for (int i = 0; i <= sc.order; ++i)
        for (int j = 0; j <= sc.order; ++j)
          acc += C[i] * C[j] * std::pow(ht, i + j + 1) / (i + j + 1.0);
      wf.norm += std::abs(acc) * s;
      double ny, nyp;
      detail::evaluate_series(C, sc.order, ht, ny, nyp);
      st.y = ny;
      st.y_prime = nyp / s;
      st.r += direction * h;
      if (!std::isfinite(st.y) || !std::isfinite(st.y_prime))
        throw NonFiniteValue("wavefunction: overflow in scalar run");
      rs.push_back(st.r);
      ys.push_back(st.y);
      yps.push_back(st.y_prime);
      h_trial = h;
      if (last) break;
      double env = std::abs(st.y) + std::abs(st.y_prime);
      env_max = std::max(env_max, env);
      if (env <= 1e-14 * env_max) break;
      if (env < env_min) env_min = env;
      else if (env_min <= 1e-4 * env_max && env > 100.0 * env_min) break;
    }
    // Trim samples contaminated by the admixed growing solution: keep
    // everything up to the envelope minimum when the run ended on growth.
    double env_last = rs.empty() ? 0.0 : std::abs(ys.back()) + std::abs(yps.back());
    if (env_last > 10.0 * env_min && env_min <= 1e-4 * env_max) {
      size_t cut = rs.size();
      double best = std::numeric_limits<double>::infinity();
      for (size_t k = 0; k < rs.size(); ++k) {
        double e = std::abs(ys[k]) + std::abs(yps[k]);
        if (e < best) {
          best = e;
          cut = k + 1;
        }
      }
      rs.resize(cut);
      ys.resize(cut);
      yps.resize(cut);
    }
  };

  std::vector<double> ri, yi, ypi;
  run_scalar(-1, wf.inner.r_stop, ri, yi, ypi);
  std::vector<double> ro, yo, ypo;
  run_scalar(+1, wf.outer.r_stop, ro, yo, ypo);

  wf.r.reserve(ri.size() + 1 + ro.size());
  wf.y.reserve(wf.r.capacity());
  wf.y_prime.reserve(wf.r.capacity());
  for (size_t k = ri.size(); k-- > 0;) {
    wf.r.push_back(ri[k]);
    wf.y.push_back(yi[k]);
    wf.y_prime.push_back(ypi[k]);
  }
  wf.r.push_back(pb.r0);
  wf.y.push_back(y0);
  wf.y_prime.push_back(yp0);
  for (size_t k = 0; k < ro.size(); ++k) {
    wf.r.push_back(ro[k]);
    wf.y.push_back(yo[k]);
    wf.y_prime.push_back(ypo[k]);
  }

  double inv = 1.0 / std::sqrt(wf.norm);
  for (size_t k = 0; k < wf.y.size(); ++k) {
    wf.y[k] *= inv;
    wf.y_prime[k] *= inv;
  }

  int prev_sign = 0;
  for (double v : wf.y) {
    int s = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
    if (s != 0) {
      if (prev_sign != 0 && s != prev_sign) ++wf.nodes;
      prev_sign = s;
    }
  }
  return wf;
}

// RK4 reference spectrum with the same matching construction at fixed step
// h (comparison runs).  Propagates the pair by RK4 from r0 to fixed inner
// and outer endpoints.
inline double eigenvalue_function_rk4(const BoundProblem& pb, double E, double h, double r_inner,
                                      double r_outer) {
  const RadialPotential& pot = *pb.pot;
  auto v = [&](double r) { return pot.total_value(r) / pb.c; };
  double E_eff = E / pb.c;
  auto run = [&](int direction, double r_end, BoundaryKind kind) {
    OdeState a{pb.r0, 1.0, 0.0}, b{pb.r0, 0.0, 1.0};
    double span = std::abs(r_end - pb.r0);
    long n = std::max(1L, static_cast<long>(std::ceil(span / h)));
    double hs = direction * span / static_cast<double>(n);
    for (long i = 0; i < n; ++i) {
      a = rk4_step(a, v, E_eff, hs);
      b = rk4_step(b, v, E_eff, hs);
      double m = std::max({std::abs(a.y), std::abs(a.y_prime), std::abs(b.y), std::abs(b.y_prime)});
      if (m > detail::kRescaleAt) {
        double f = 1.0 / m;
        a.y *= f;
        a.y_prime *= f;
        b.y *= f;
        b.y_prime *= f;
      }
    }
    return kind == BoundaryKind::Dirichlet ? -a.y / b.y : -a.y_prime / b.y_prime;
  };
  double lm = run(-1, r_inner, pb.inner);
  double lp = run(+1, r_outer, pb.outer);
  return lp - lm;
}

inline Spectrum scan_spectrum_rk4(const BoundProblem& pb, const std::vector<double>& grid,
                                  double h, double r_inner, double r_outer,
                                  bool parallel = true) {
  auto F = [&](double E) { return eigenvalue_function_rk4(pb, E, h, r_inner, r_outer); };
  ScanResult sr = scan_for_roots(F, grid, pb.root_tol, parallel);
  Spectrum sp;
  sp.poles_skipped = sr.poles_skipped;
  sp.failed_points = sr.failed_points;
  for (const BracketedRoot& r : sr.roots) {
    sp.energies.push_back(r.x);
    sp.residuals.push_back(r.f);
  }
  return sp;
}

// ---------------------------------------------------------- mapped well

// Infinite square well of width w solved on the half line via the interval
// map x = w r / (1 + r).  Dirichlet at r = 0 is exact; the x = w wall is
// reached as r -> infinity through ratio saturation.  Exact spectrum
// E_n = (n pi / w)^2 / 2 (hbar = mass = 1).
inline double square_well_mapped_F(double w, double E, const Tolerances& tol, double r0 = 1.0,
                                   double r_cap = 1e12) {
  struct Dir {
    double u = 0.0, v = 0.0;
  };
  auto run = [&](int direction) {
    CanonicalPair cp;
    cp.r = r0;
    double h_trial = 0.1;
    double CA[64], CB[64];
    double u_prev = std::numeric_limits<double>::quiet_NaN(), v_prev = u_prev;
    int run_count = 0;
    auto bvec = [&] {
      Dir d{cp.beta, -cp.alpha};
      double n = std::hypot(d.u, d.v);
      if (n > 0.0 && std::isfinite(n)) {
        d.u /= n;
        d.v /= n;
      }
      return d;
    };
    for (long step = 0; step < 200000; ++step) {
      Series a = inverse_power_series(1.0 + cp.r, 1, tol.max_order);
      Series b = inverse_power_series(1.0 + cp.r, 4, tol.max_order);
      detail::vsca_coefficients_mapped(a, b, E, w, cp.alpha, cp.alpha_prime, tol.max_order, CA);
      detail::vsca_coefficients_mapped(a, b, E, w, cp.beta, cp.beta_prime, tol.max_order, CB);
      double scale = std::max({1.0, std::abs(cp.alpha), std::abs(cp.alpha_prime),
                               std::abs(cp.beta), std::abs(cp.beta_prime)});
      detail::StepChoice sa =
          detail::choose_order_and_step(CA, tol.max_order, h_trial, tol.truncation_error, scale);
      detail::StepChoice sb =
          detail::choose_order_and_step(CB, tol.max_order, h_trial, tol.truncation_error, scale);
      double h = std::min({sa.h, sb.h, 10.0 * (1.0 + cp.r)});
      bool landing = false;
      if (direction < 0) {
        h = std::min(h, tol.max_step);
        if (h >= cp.r) {
          h = cp.r;
          landing = true;
        }
      }
      double hs = direction * h;
      double na, nap, nb, nbp;
      detail::evaluate_series(CA, sa.order, hs, na, nap);
      detail::evaluate_series(CB, sb.order, hs, nb, nbp);
      cp.alpha = na;
      cp.alpha_prime = nap;
      cp.beta = nb;
      cp.beta_prime = nbp;
      cp.r += hs;
      h_trial = h;
      double m = std::max({std::abs(cp.alpha), std::abs(cp.alpha_prime), std::abs(cp.beta),
                           std::abs(cp.beta_prime)});
      if (m > detail::kRescaleAt) {
        double f = 1.0 / m;
        cp.alpha *= f;
        cp.alpha_prime *= f;
        cp.beta *= f;
        cp.beta_prime *= f;
      }
      if (landing) return bvec();
      if (direction > 0) {
        Dir d = bvec();
        if (std::isfinite(u_prev) && std::abs(d.u * v_prev - d.v * u_prev) <= tol.stability_error)
          ++run_count;
        else
          run_count = 0;
        u_prev = d.u;
        v_prev = d.v;
        if (run_count >= 5) return d;
        if (cp.r > r_cap) throw NoSaturation("square_well_mapped: no outer saturation");
      }
    }
    throw NoSaturation("square_well_mapped: step budget exhausted");
  };
  Dir in = run(-1);
  Dir out = run(+1);
  return in.u * out.v - in.v * out.u;
}

// First n_levels eigenvalues of the mapped well, scanned on a grid uniform
// in sqrt(E) (the spectrum is quadratic in the level index).
inline Spectrum solve_square_well_mapped(double w, int n_levels, const Tolerances& tol) {
  // r0 = 0.77 maps to x = 0.435 w, away from the well midpoint where every
  // second eigenfunction has a node (a node at r0 turns the root of F into
  // a pole).
  auto F = [&](double E) { return square_well_mapped_F(w, E, tol, 0.77); };
  double k_hi = n_levels + 0.5;
  int npts = 4 * n_levels + 2;
  std::vector<double> grid(static_cast<size_t>(npts));
  for (int i = 0; i < npts; ++i) {
    double k = 0.4 + (k_hi - 0.4) * i / (npts - 1.0);
    double q = k * M_PI / w;
    grid[static_cast<size_t>(i)] = 0.5 * q * q;
  }
  ScanResult sr = scan_for_roots(F, grid, 1e-12, true, /*classify_poles=*/false);
  Spectrum sp;
  sp.poles_skipped = sr.poles_skipped;
  sp.failed_points = sr.failed_points;
  for (const BracketedRoot& r : sr.roots) {
    sp.energies.push_back(r.x);
    sp.residuals.push_back(r.f);
  }
  if (static_cast<int>(sp.energies.size()) > n_levels) sp.energies.resize(static_cast<size_t>(n_levels));
  return sp;
}

} // namespace cfm
