#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "cfm/errors.hpp"
#include "cfm/series.hpp"

namespace cfm {

struct OdeState {
  double r = 0.0;
  double y = 0.0;
  double y_prime = 0.0;
};

// Local expansion of the total potential (potential + centrifugal term)
// about r_p in the scaled offset t = (r - r_p)/scale.  Energy is
// deliberately not folded in: one expansion serves every energy on the
// interval.
struct SeriesExpansion {
  double center = 0.0;
  double scale = 1.0;
  std::vector<double> gamma; // gamma[n] multiplies t^n
  int order() const { return static_cast<int>(gamma.size()) - 1; }
};

struct Tolerances {
  double truncation_error = 1e-12; // eps_T
  double stability_error = 1e-10;  // eps_S (saturation / phase stability)
  int max_order = 30;              // N_max
  double min_step = 1e-10;         // h_min
  double max_step = 1.0;           // h_max
};

namespace detail {

// Power-series coefficients C_0..C_N for y'' = (V_tot(r) - E) y with
// V_tot given by gamma about the step center:
//   (n+2)(n+1) C_{n+2} = sum_{m=0}^{n} C_m gamma_{n-m} - E C_n
// The recursion runs in the scaled variable t = (r - center)/s: C_1 picks
// up a factor s and the source terms a factor s^2, so C[n] is the
// coefficient of t^n and dy/dt = s * dy/dr.
inline void vsca_coefficients(const SeriesExpansion& ex, double E, double y, double yp,
                              int N, double* C) {
  double s = ex.scale;
  double s2 = s * s;
  C[0] = y;
  if (N >= 1) C[1] = yp * s;
  int gmax = ex.order();
  for (int n = 0; n + 2 <= N; ++n) {
    double acc = 0.0;
    int mmax = std::min(n, gmax);
    // sum_{m} C_m gamma_{n-m}, with gamma index limited to available order
    for (int m = n - mmax; m <= n; ++m) acc += C[m] * ex.gamma[static_cast<size_t>(n - m)];
    acc -= E * C[n];
    C[n + 2] = s2 * acc / (static_cast<double>(n + 2) * static_cast<double>(n + 1));
  }
}

// Same recursion for the interval-mapped well (transformation r = x/(w-x)):
//   (n+2)(n+1) C_{n+2} = -2 sum (m+1) a_{n-m} C_{m+1} - 2 E w^2 sum b_{n-m} C_m
// with a, b the local expansions of 1/(1+r) and 1/(1+r)^4.
inline void vsca_coefficients_mapped(const Series& a, const Series& b, double E, double w,
                                     double y, double yp, int N, double* C) {
  C[0] = y;
  if (N >= 1) C[1] = yp;
  double ew2 = 2.0 * E * w * w;
  int amax = a.order();
  int bmax = b.order();
  for (int n = 0; n + 2 <= N; ++n) {
    double acc = 0.0;
    for (int m = std::max(0, n - amax); m <= n; ++m)
      acc += -2.0 * static_cast<double>(m + 1) * a[n - m] * C[m + 1];
    for (int m = std::max(0, n - bmax); m <= n; ++m) acc -= ew2 * b[n - m] * C[m];
    C[n + 2] = acc / (static_cast<double>(n + 2) * static_cast<double>(n + 1));
  }
}

// Order and step selection shared by all VSCA variants.  The step rule
// h = (eps_T^2 scale / |C_N|)^(1/N) keeps the per-step remainder at
// eps_T^2 * scale (comfortably below eps_T); the order is grown, seeded by
// the previous step as trial, until two consecutive terms meet that same
// budget at the trial step (two terms so that a parity zero in the series
// cannot end the growth prematurely).  Using one tolerance in both rules
// makes the accepted step a non-contracting map of the trial step.
struct StepChoice {
  int order = 0;
  double h = 0.0;
};

inline StepChoice choose_order_and_step(const double* C, int n_max, double h_trial,
                                        double eps_T, double scale) {
  StepChoice sc;
  double tol = eps_T * eps_T * scale;
  double ht = std::abs(h_trial);
  int N = 4;
  while (N < n_max) {
    double tN = std::abs(C[N]) * std::pow(ht, N);
    double tN1 = std::abs(C[N - 1]) * std::pow(ht, N - 1);
    if (tN <= tol && tN1 <= tol) break;
    ++N;
  }
  sc.order = N;
  auto h_for = [&](int n) {
    double cn = std::abs(C[n]);
    if (cn <= std::numeric_limits<double>::min()) return std::numeric_limits<double>::infinity();
    return std::pow(tol / cn, 1.0 / static_cast<double>(n));
  };
  sc.h = std::min(h_for(N), h_for(N - 1));
  return sc;
}

inline void evaluate_series(const double* C, int N, double h, double& y, double& yp) {
  double acc = 0.0, dacc = 0.0;
  for (int n = N; n >= 1; --n) {
    acc = acc * h + C[n];
    dacc = dacc * h + static_cast<double>(n) * C[n];
  }
  y = acc * h + C[0];
  yp = dacc;
}

} // namespace detail

struct VscaStepResult {
  OdeState state;
  double h = 0.0; // signed step actually taken
  int order = 0;
};

// One VSCA step of y'' = (V_tot - E) y.  `provider` returns the local
// expansion about the current point at the requested local scale;
// `h_trial` seeds the order-growth rule (use 0.1 on the first step);
// `direction` is +1/-1; `h_limit` caps |h| (e.g. distance to a domain
// edge), pass +inf for none.
inline VscaStepResult
vsca_step(const OdeState& state,
          const std::function<SeriesExpansion(double, int, double)>& provider, double E,
          const Tolerances& tol, double h_trial = 0.1, double direction = 1.0,
          double h_limit = std::numeric_limits<double>::infinity()) {
  double s = std::min(h_trial, h_limit);
  SeriesExpansion ex = provider(state.r, tol.max_order, s);
  double C[64];
  detail::vsca_coefficients(ex, E, state.y, state.y_prime, tol.max_order, C);
  double yscale = std::max(1.0, std::max(std::abs(state.y), std::abs(state.y_prime) * s));
  for (int n = 0; n <= tol.max_order; ++n)
    if (!std::isfinite(C[n])) throw NonFiniteCoefficient("vsca_step: non-finite series coefficient");
  detail::StepChoice sc =
      detail::choose_order_and_step(C, tol.max_order, h_trial / s, tol.truncation_error, yscale);
  double h = std::min({sc.h * s, tol.max_step, h_limit});
  if (h < tol.min_step)
    throw StepUnderflow("vsca_step: step below h_min (singularity approach?)");
  double ht = direction * h / s;
  VscaStepResult out;
  detail::evaluate_series(C, sc.order, ht, out.state.y, out.state.y_prime);
  out.state.y_prime /= s;
  out.state.r = state.r + direction * h;
  out.h = direction * h;
  out.order = sc.order;
  return out;
}

// Classical RK4 on the first-order system (y, y') for y'' = (V_tot - E) y.
inline OdeState rk4_step(const OdeState& s, const std::function<double(double)>& v_total,
                         double E, double h) {
  auto f = [&](double r, double y, double yp, double& dy, double& dyp) {
    double v = v_total(r);
    if (!std::isfinite(v)) throw NonFiniteValue("rk4_step: potential not finite");
    dy = yp;
    dyp = (v - E) * y;
  };
  double k1y, k1p, k2y, k2p, k3y, k3p, k4y, k4p;
  f(s.r, s.y, s.y_prime, k1y, k1p);
  f(s.r + 0.5 * h, s.y + 0.5 * h * k1y, s.y_prime + 0.5 * h * k1p, k2y, k2p);
  f(s.r + 0.5 * h, s.y + 0.5 * h * k2y, s.y_prime + 0.5 * h * k2p, k3y, k3p);
  f(s.r + h, s.y + h * k3y, s.y_prime + h * k3p, k4y, k4p);
  OdeState out;
  out.r = s.r + h;
  out.y = s.y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
  out.y_prime = s.y_prime + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
  return out;
}

// One VSCA step of the interval-mapped square well equation
//   psi'' = -2 psi'/(1+r) - 2 E w^2 psi/(1+r)^4
// with a = series of 1/(1+r), b = series of 1/(1+r)^4 about state.r.
inline VscaStepResult vsca_step_mapped(const OdeState& state, const Series& a, const Series& b,
                                       double E, double w, const Tolerances& tol,
                                       double h_trial = 0.1, double direction = 1.0,
                                       double h_limit = std::numeric_limits<double>::infinity()) {
  double C[64];
  detail::vsca_coefficients_mapped(a, b, E, w, state.y, state.y_prime, tol.max_order, C);
  double scale = std::max(1.0, std::max(std::abs(state.y), std::abs(state.y_prime)));
  for (int n = 0; n <= tol.max_order; ++n)
    if (!std::isfinite(C[n]))
      throw NonFiniteCoefficient("vsca_step_mapped: non-finite series coefficient");
  detail::StepChoice sc =
      detail::choose_order_and_step(C, tol.max_order, h_trial, tol.truncation_error, scale);
  double h = std::min({sc.h, tol.max_step, h_limit});
  if (h < tol.min_step) throw StepUnderflow("vsca_step_mapped: step below h_min");
  double hs = direction * h;
  VscaStepResult out;
  detail::evaluate_series(C, sc.order, hs, out.state.y, out.state.y_prime);
  out.state.r = state.r + hs;
  out.h = hs;
  out.order = sc.order;
  return out;
}

} // namespace cfm
