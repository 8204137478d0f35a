#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "cfm/bound.hpp"
#include "cfm/errors.hpp"
#include "cfm/free_wave.hpp"
#include "cfm/integrate.hpp"
#include "cfm/potential.hpp"
#include "cfm/potentials.hpp"

namespace cfm {

// Scattering phaseshifts: potential-only (single channel) and the
// exchange-coupled two-channel system for electron-hydrogenic targets,
// plus scattering-length extraction from the effective-range expansion.
//
// Working units are Rydberg / Bohr: y'' = (U(r) - k^2) y with U in the
// attractive-negative solver convention.

struct PhaseResult {
  double delta = 0.0;   // radians, reported in [0, pi)
  double q_final = 0.0; // tan(delta)
  double r_stable = 0.0;
  long steps = 0;
  double k = 0.0;
  int l = 0;
  int spin = -1; // -1 for potential-only results
  std::vector<std::pair<double, double>> q_trace; // (r, Q(r)) samples
};

namespace detail {

// Q(r) from the derivative-free recursion form; Z = 1 selects the
// Riccati-Bessel branch, Z > 1 the Coulomb one.
inline double q_value(const FreeWave& fw, double f, double fp, double r, double k, double Z) {
  double base, kk;
  double lp1 = fw.l + 1.0;
  if (Z > 1.0) {
    base = fp + ((Z - 1.0) / (k * lp1) - lp1 / r) * f;
    kk = std::sqrt(k * k + (Z - 1.0) * (Z - 1.0) / (lp1 * lp1));
  } else {
    base = fp - lp1 / r * f;
    kk = k;
  }
  double num = base * fw.s + kk * f * fw.s_next;
  double den = base * fw.c + kk * f * fw.c_next;
  // leading minus from the defining ratio; dropping it returns -tan(delta)
  // (checked against the square-well closed form)
  return -num / den;
}

inline double delta_from_q(double q) {
  double d = std::atan(q);
  if (d < 0.0) d += M_PI;
  return d;
}

} // namespace detail

// Phaseshift of a single-channel potential: regular solution fixed by the
// inward canonical-pair run, then outward integration with the Q(r)
// stability test |Q_{p+1}-Q_p| / |Q_{p+1}+Q_p| <= eps_S over
// `stability_run` consecutive steps.  `Z` sets the asymptotic reference
// waves (Z = 1 short range; Z > 1 Coulomb tail (Z-1)/r).
inline PhaseResult potential_phaseshift(const PotentialPtr& pot, double k, int l,
                                        double r0 = 1.0, Tolerances tol = {}, double c = 1.0,
                                        double Z = 1.0, double r_cap = 2000.0,
                                        int stability_run = 5) {
  if (!(k > 0.0)) throw ConfigError("potential_phaseshift: k must be positive");
  double E = c * k * k;

  BoundProblem pb;
  auto mutable_pot = pot; // l is carried on the potential object
  if (pot->l != l) {
    // wrap to avoid mutating the caller's object
    struct WithL final : RadialPotential {
      PotentialPtr base;
      explicit WithL(PotentialPtr b) : base(std::move(b)) {
        tail = base->tail;
        domain_min = base->domain_min;
        domain_max = base->domain_max;
        singular_at_rmin = base->singular_at_rmin;
        name = base->name;
      }
      double value(double r) const override { return base->value(r); }
      Series taylor(double center, int order, double scale = 1.0) const override {
        return base->taylor(center, order, scale);
      }
      double max_step_hint(double r) const override { return base->max_step_hint(r); }
    };
    auto w = std::make_shared<WithL>(pot);
    w->l = l;
    mutable_pot = w;
  }
  pb.pot = mutable_pot;
  pb.c = c;
  pb.r0 = r0;
  pb.tol = tol;
  pb.inner = BoundaryKind::Dirichlet;

  CanonicalPair cp;
  SaturationReport in = canonical_pair(pb, E, -1, cp);

  PhaseResult out;
  out.k = k;
  out.l = l;
  const RadialPotential& p = *pb.pot;
  OdeState st{r0, in.u, in.v};
  double h_trial = 0.1;
  double C[64];
  double q_prev = std::numeric_limits<double>::quiet_NaN();
  int run = 0;
  // A stable streak must also span half a wavelength: near a node of
  // sin(kr + delta) the phase drift from a long-range tail stalls for
  // many consecutive steps even though the tail is far from negligible.
  double span_req = std::min(M_PI / k, 0.2 * r_cap);
  double streak_start = st.r;
  while (st.r < r_cap) {
    double hint = p.max_step_hint(st.r);
    double s = std::max(std::min({h_trial, hint, tol.max_step}), 1e-280);
    SeriesExpansion ex = p.total_taylor(st.r, tol.max_order, s);
    for (double& g : ex.gamma) g /= c;
    detail::vsca_coefficients(ex, E / c, st.y, st.y_prime, tol.max_order, C);
    double scale = std::max(1.0, std::max(std::abs(st.y), std::abs(st.y_prime) * s));
    detail::StepChoice sc =
        detail::choose_order_and_step(C, tol.max_order, h_trial / s, tol.truncation_error, scale);
    double h = std::min({sc.h * s, tol.max_step, hint});
    if (!std::isfinite(h)) h = std::max(1.0, 0.5 * st.r);
    if (h < tol.min_step) throw StepUnderflow("potential_phaseshift: step underflow");
    double ht = h / s;
    double ny, nyp;
    detail::evaluate_series(C, sc.order, ht, ny, nyp);
    st.y = ny;
    st.y_prime = nyp / s;
    st.r += h;
    h_trial = h;
    ++out.steps;
    if (!std::isfinite(st.y) || !std::isfinite(st.y_prime))
      throw NonFiniteValue("potential_phaseshift: solution overflow");

    FreeWave fw = free_waves(l, k, Z, st.r);
    double q = detail::q_value(fw, st.y, st.y_prime, st.r, k, Z);
    out.q_trace.emplace_back(st.r, q);
    if (std::isfinite(q) && std::isfinite(q_prev) &&
        (std::abs(q - q_prev) <= tol.stability_error * std::abs(q + q_prev) ||
         std::abs(q) + std::abs(q_prev) <= 1e-14)) {
      ++run;
    } else {
      run = 0;
      streak_start = st.r;
    }
    q_prev = q;
    if (run >= stability_run && st.r - streak_start >= span_req) {
      out.q_final = q;
      out.delta = detail::delta_from_q(q);
      out.r_stable = st.r;
      return out;
    }
  }
  throw NoStabilization("potential_phaseshift: Q(r) not stable before r_cap");
}

// ------------------------------------------------------------- exchange

// Electron scattering off a one-electron target in its 1s state
// (R10 = 2 Z^{3/2} r e^{-Zr}, E10 = -Z^2 Ry), spin channel S, partial
// wave l'.  The coupled system for (f1, f2) carries the non-local
// exchange exactly; the l' = 0 source is closed through A(k).
struct ExchangeProblem {
  double Z = 1.0;
  int spin = 0; // S = 0 singlet, 1 triplet
  int l = 0;
  double k = 0.1;
  PotentialPtr vstatic; // solver-convention static potential
  PotentialPtr vpol;    // optional polarization; may be null
  double r0 = 1.0;
  Tolerances tol;
  double r_cap = 2000.0;
  double q_max_step = 0.01; // step cap in the scalar Q(r) phase
  int stability_run = 5;
  long max_steps = 2'000'000;
  // zero the off-diagonal couplings and the source; the result must then
  // reduce to the potential-only phaseshift
  bool exchange_off = false;
};

inline ExchangeProblem make_exchange_problem(int spin, int l, double k) {
  ExchangeProblem ep;
  ep.spin = spin;
  ep.l = l;
  ep.k = k;
  ep.vstatic = std::make_shared<HydrogenStaticPotential>();
  if (k > 1.0) ep.r0 = 0.1;
  // the inward Coulomb-like wall contracts steps proportionally to r, and
  // Lambda stabilizes only once r ~ eps_S
  ep.tol.min_step = 1e-14;
  return ep;
}

namespace detail {

// Local series data for one exchange step about r at local scale s.
struct ExchangeSeries {
  Series g11, g12, g21, g22; // Y'' = G(r) Y (+ source)
  Series w;                   // source row-1 series (sign folded in)
  Series r10;                 // R10 series (integral accumulation)
};

inline ExchangeSeries exchange_series(const ExchangeProblem& ep, double r, int order, double s) {
  ExchangeSeries es;
  double Z = ep.Z;
  // rho10 = R10 / r = 2 Z^{3/2} e^{-Zr}; exponential expanded in t
  Series ex(order);
  double term = 2.0 * std::pow(Z, 1.5) * std::exp(-Z * r);
  for (int n = 0; n <= order; ++n) {
    ex[n] = term;
    term *= -Z * s / (n + 1.0);
  }
  Series lin(order);
  lin[0] = r;
  if (order >= 1) lin[1] = s;
  es.r10 = ex * lin;

  Series u = ep.vstatic->taylor(r, order, s);
  if (ep.vpol) u += ep.vpol->taylor(r, order, s);
  Series cf(order);
  if (ep.l > 0) {
    cf = inverse_power_series(r, 2, order, s);
    cf *= ep.l * (ep.l + 1.0);
  }
  es.g11 = u;
  es.g11 += cf;
  es.g11[0] -= ep.k * ep.k;
  es.g22 = cf;
  // Exchange spin factor: the f2 coupling enters with (-1)^S and the
  // closure source with (-1)^{S+1}.  The relative sign is fixed by the
  // zero-energy limits (singlet a = 8.1003, triplet a = 2.3494); flipping
  // either one moves both branches off the known static-exchange values.
  double sign = (ep.spin % 2 == 0) ? -1.0 : 1.0; // (-1)^{S+1}
  if (ep.exchange_off) {
    es.g12 = Series(order);
    es.g21 = Series(order);
    es.w = Series(order);
    return es;
  }
  es.g12 = ex;
  es.g12 *= -sign * 2.0 / (2.0 * ep.l + 1.0);
  es.g21 = ex;
  es.g21 *= -(2.0 * ep.l + 1.0);
  es.w = es.r10;
  es.w *= sign;
  return es;
}

// One shared VSCA step of the 2 x m system Y'' = G(r) Y + W e_src.
// Columns are independent solutions; `src_col` < 0 disables the source.
// Returns the signed step taken; `integrals` (size m or empty) receives
// the per-step contribution of int R10 * (row 1 of column j) dr.
struct ExchangeStepState {
  Eigen::Matrix2Xd Y0, Y1; // values and derivatives, 2 x m
  double r = 0.0;
};

inline double exchange_step(const ExchangeProblem& ep, ExchangeStepState& st, int direction,
                            int src_col, double h_trial, std::vector<double>* integrals,
                            double r_floor = 0.0) {
  const Tolerances& tol = ep.tol;
  const int n_max = tol.max_order;
  const long m = st.Y0.cols();
  double hint = ep.vstatic->max_step_hint(st.r);
  if (ep.vpol) hint = std::min(hint, ep.vpol->max_step_hint(st.r));
  hint = std::min(hint, 0.9 * st.r); // 1/r structure of the static/coupling terms
  double s = std::max(std::min({h_trial, hint, tol.max_step}), 1e-280);
  ExchangeSeries es = exchange_series(ep, st.r, n_max, s);

  std::vector<Eigen::Matrix2Xd> C(static_cast<size_t>(n_max + 1),
                                  Eigen::Matrix2Xd::Zero(2, m));
  std::vector<double> norms(static_cast<size_t>(n_max + 1));
  C[0] = st.Y0;
  C[1] = st.Y1 * s;
  const double s2 = s * s;
  Eigen::Matrix2d G;
  for (int n = 0; n + 2 <= n_max; ++n) {
    Eigen::Matrix2Xd acc = Eigen::Matrix2Xd::Zero(2, m);
    int kmax = std::min({n, es.g11.order()});
    for (int kk = 0; kk <= kmax; ++kk) {
      G << es.g11[kk], es.g12[kk], es.g21[kk], es.g22[kk];
      acc += G * C[static_cast<size_t>(n - kk)];
    }
    if (src_col >= 0 && n <= es.w.order()) acc(0, src_col) += es.w[n];
    C[static_cast<size_t>(n + 2)] = (s2 / ((n + 2.0) * (n + 1.0))) * acc;
  }
  for (int n = 0; n <= n_max; ++n) {
    norms[static_cast<size_t>(n)] = C[static_cast<size_t>(n)].cwiseAbs().maxCoeff();
    if (!std::isfinite(norms[static_cast<size_t>(n)]))
      throw NonFiniteCoefficient("exchange_step: non-finite series coefficient");
  }
  double scale = std::max({1.0, norms[0], norms[1]});
  StepChoice sc =
      choose_order_and_step(norms.data(), n_max, h_trial / s, tol.truncation_error, scale);
  double h = std::min({sc.h * s, tol.max_step, hint});
  if (!std::isfinite(h)) h = std::max(1.0, 0.5 * st.r);
  bool landing = false;
  if (direction < 0) {
    double dist = st.r - r_floor;
    if (r_floor > 0.0 && h >= dist) {
      // land exactly on the requested floor radius
      h = dist;
      landing = true;
    } else if (h >= 0.95 * st.r) {
      // never step across the origin; the run stops by stabilization
      h = 0.5 * st.r;
    }
  }
  if (!landing && h < tol.min_step) throw StepUnderflow("exchange_step: step below h_min");
  double ht = direction * h / s;

  if (integrals) {
    // per-column contribution of int R10(r) y_1(r) dr across this step
    for (long j = 0; j < m; ++j) {
      double acc = 0.0;
      for (int i = 0; i <= sc.order; ++i) {
        // convolution of R10 series with the row-1 series of column j
        double conv = 0.0;
        int kmax = std::min(i, es.r10.order());
        for (int kk = 0; kk <= kmax; ++kk) conv += es.r10[kk] * C[static_cast<size_t>(i - kk)](0, j);
        acc += conv * std::pow(ht, i + 1) / (i + 1.0);
      }
      (*integrals)[static_cast<size_t>(j)] += acc * s;
    }
  }

  Eigen::Matrix2Xd y = C[static_cast<size_t>(sc.order)];
  Eigen::Matrix2Xd yp = static_cast<double>(sc.order) * C[static_cast<size_t>(sc.order)];
  for (int n = sc.order - 1; n >= 1; --n) {
    y = y * ht + C[static_cast<size_t>(n)];
    yp = yp * ht + static_cast<double>(n) * C[static_cast<size_t>(n)];
  }
  y = y * ht + C[0];
  st.Y0 = y;
  st.Y1 = yp / s;
  st.r += direction * h;
  if (!st.Y0.allFinite() || !st.Y1.allFinite())
    throw NonFiniteValue("exchange_step: solution overflow");
  return h;
}

} // namespace detail

struct ExchangeReport {
  Eigen::Matrix2d Lambda;
  Eigen::Vector2d lambda;
  double r_inner = 0.0;   // inward stabilization radius
  double r_closure = 0.0; // radius where the A(k) closure was applied
  double A = 0.0;
  double y2 = 0.0; // f2(r0)
  double i_phi11 = 0.0, i_phi12 = 0.0, i_gamma1 = 0.0;
};

// Full exchange phaseshift, following the four-stage construction:
// (1) inward alpha, beta, sigma from r0 until Lambda = -beta^-1 alpha and
//     lambda = -beta^-1 sigma stabilize; (2) outward phi = alpha + beta
//     Lambda and gamma = beta lambda + sigma accumulating the overlap
//     integrals with R10 (both sides of r0) until they stabilize;
// (3) A(k) closure together with the f2 boundary condition fixes the two
//     remaining constants; (4) scalar continuation of f1 with the Q(r)
//     stability test.
inline PhaseResult exchange_phaseshift(const ExchangeProblem& ep, ExchangeReport* report = nullptr) {
  if (!ep.vstatic) throw ConfigError("exchange_phaseshift: static potential not set");
  const Tolerances& tol = ep.tol;
  const double eps_s = tol.stability_error;
  const bool has_source = ep.l == 0;

  // ---- stage 1: inward alpha(2), beta(2), sigma(1)
  detail::ExchangeStepState st;
  st.Y0 = Eigen::Matrix2Xd::Zero(2, 5);
  st.Y1 = Eigen::Matrix2Xd::Zero(2, 5);
  st.Y0.leftCols<2>() = Eigen::Matrix2d::Identity();
  st.Y1.middleCols<2>(2) = Eigen::Matrix2d::Identity();
  st.r = ep.r0;

  Eigen::Matrix2d Lambda;
  Eigen::Vector2d lambda;
  Eigen::Matrix2d L_prev;
  Eigen::Vector2d l_prev;
  bool have_prev = false;
  int run = 0;
  double h_trial = 0.1;
  long steps = 0;
  double r_inner = 0.0;
  while (true) {
    if (++steps > ep.max_steps) throw NoSaturation("exchange_phaseshift: inward step budget");
    h_trial = detail::exchange_step(ep, st, -1, has_source ? 4 : -1, h_trial, nullptr);
    Eigen::Matrix2d alpha = st.Y0.leftCols<2>();
    Eigen::Matrix2d beta = st.Y0.middleCols<2>(2);
    Eigen::FullPivLU<Eigen::Matrix2d> lu(beta);
    if (lu.rcond() > 100.0 * std::numeric_limits<double>::epsilon()) {
      Lambda = -lu.solve(alpha);
      lambda = -lu.solve(Eigen::Vector2d(st.Y0.col(4)));
      if (have_prev) {
        double d = (Lambda - L_prev).cwiseAbs().maxCoeff() /
                   std::max(1.0, Lambda.cwiseAbs().maxCoeff());
        double dl = (lambda - l_prev).cwiseAbs().maxCoeff() /
                    std::max(1.0, lambda.cwiseAbs().maxCoeff());
        if (std::max(d, dl) <= eps_s)
          ++run;
        else
          run = 0;
      }
      L_prev = Lambda;
      l_prev = lambda;
      have_prev = true;
      if (run >= ep.stability_run) {
        r_inner = st.r;
        break;
      }
    }
  }
  if (!has_source) lambda.setZero();

  // ---- stage 2: phi, gamma on both sides of r0, accumulating
  //      I = int R10 * (phi11, phi12, gamma1) dr
  auto fresh_state = [&] {
    detail::ExchangeStepState s2;
    s2.Y0 = Eigen::Matrix2Xd::Zero(2, 3);
    s2.Y1 = Eigen::Matrix2Xd::Zero(2, 3);
    s2.Y0.leftCols<2>() = Eigen::Matrix2d::Identity();
    s2.Y1.leftCols<2>() = Lambda;
    s2.Y1.col(2) = lambda;
    s2.r = ep.r0;
    return s2;
  };
  std::vector<double> I(3, 0.0);

  // inner side: down to the stage-1 radius (R10 -> 0 there)
  {
    detail::ExchangeStepState si = fresh_state();
    std::vector<double> Ii(3, 0.0);
    double ht = 0.1;
    while (si.r > r_inner * 1.0000001) {
      if (++steps > ep.max_steps) throw NoSaturation("exchange_phaseshift: inner integral budget");
      ht = detail::exchange_step(ep, si, -1, has_source ? 2 : -1, ht, &Ii, r_inner);
    }
    // inward contributions enter with a sign flip (dr runs negative)
    for (int j = 0; j < 3; ++j) I[static_cast<size_t>(j)] -= Ii[static_cast<size_t>(j)];
  }

  // outer side: until the integrals stabilize
  detail::ExchangeStepState so = fresh_state();
  {
    double ht = 0.1;
    run = 0;
    std::vector<double> prev = I;
    while (true) {
      if (++steps > ep.max_steps) throw NoSaturation("exchange_phaseshift: outward step budget");
      ht = detail::exchange_step(ep, so, +1, has_source ? 2 : -1, ht, &I);
      double d = 0.0;
      for (int j = 0; j < 3; ++j) {
        double ref = std::max(1e-300, std::abs(I[static_cast<size_t>(j)]));
        d = std::max(d, std::abs(I[static_cast<size_t>(j)] - prev[static_cast<size_t>(j)]) / ref);
      }
      prev = I;
      if (d <= eps_s)
        ++run;
      else
        run = 0;
      if (run >= ep.stability_run) break;
      if (so.r > ep.r_cap)
        throw NoSaturation("exchange_phaseshift: overlap integrals not stable before r_cap");
    }
  }
  double r_closure = so.r;

  // ---- stage 3: closure.  y1 = f1(r0) = 1 (normalization-free), unknowns
  // y2 = f2(r0) and A.  Conditions: the A(k) self-consistency and the
  // decay of f2 (vanishing derivative once the coupling has died off).
  double y2, A;
  double dE = ep.k * ep.k + ep.Z * ep.Z; // k^2 - E10
  double p21p = so.Y1(1, 0), p22p = so.Y1(1, 1), g2p = so.Y1(1, 2);
  if (has_source) {
    Eigen::Matrix2d M;
    Eigen::Vector2d rhs;
    M << -dE * I[1], (1.0 - dE * I[2]), p22p, g2p;
    rhs << dE * I[0], -p21p;
    Eigen::FullPivLU<Eigen::Matrix2d> lu(M);
    if (lu.rcond() <= 100.0 * std::numeric_limits<double>::epsilon())
      throw SolverFailure("exchange_phaseshift: singular closure system");
    Eigen::Vector2d sol = lu.solve(rhs);
    y2 = sol[0];
    A = sol[1];
  } else {
    A = 0.0;
    if (std::abs(p22p) < 1e-300)
      throw SolverFailure("exchange_phaseshift: degenerate f2 condition");
    y2 = -p21p / p22p;
  }

  if (report) {
    report->Lambda = Lambda;
    report->lambda = lambda;
    report->r_inner = r_inner;
    report->r_closure = r_closure;
    report->A = A;
    report->y2 = y2;
    report->i_phi11 = I[0];
    report->i_phi12 = I[1];
    report->i_gamma1 = I[2];
  }

  // ---- stage 4: scalar continuation of f1 with Q(r) stabilization
  double f1 = so.Y0(0, 0) + y2 * so.Y0(0, 1) + A * so.Y0(0, 2);
  double f1p = so.Y1(0, 0) + y2 * so.Y1(0, 1) + A * so.Y1(0, 2);

  PotentialPtr scalar_pot;
  {
    std::vector<PotentialPtr> parts{ep.vstatic};
    if (ep.vpol) parts.push_back(ep.vpol);
    auto sum = std::make_shared<SumPotential>(parts);
    sum->l = ep.l;
    scalar_pot = sum;
  }

  PhaseResult out;
  out.k = ep.k;
  out.l = ep.l;
  out.spin = ep.spin;
  const RadialPotential& p = *scalar_pot;
  OdeState sst{so.r, f1, f1p};
  double C[64];
  double q_prev = std::numeric_limits<double>::quiet_NaN();
  double ht2 = 0.1;
  run = 0;
  double E = ep.k * ep.k;
  // see potential_phaseshift: a stable streak must span half a wavelength
  // so that a node of sin(kr + delta) cannot fake convergence
  double span_req = std::min(M_PI / ep.k, 0.2 * ep.r_cap);
  double streak_start = sst.r;
  while (sst.r < ep.r_cap) {
    if (++steps > ep.max_steps) throw NoStabilization("exchange_phaseshift: Q step budget");
    double hint = p.max_step_hint(sst.r);
    double s = std::max(std::min({ht2, hint, ep.q_max_step}), 1e-280);
    SeriesExpansion ex = p.total_taylor(sst.r, tol.max_order, s);
    detail::vsca_coefficients(ex, E, sst.y, sst.y_prime, tol.max_order, C);
    double scale = std::max(1.0, std::max(std::abs(sst.y), std::abs(sst.y_prime) * s));
    detail::StepChoice sc =
        detail::choose_order_and_step(C, tol.max_order, ht2 / s, tol.truncation_error, scale);
    double h = std::min({sc.h * s, ep.q_max_step, hint});
    if (!std::isfinite(h)) h = ep.q_max_step;
    if (h < tol.min_step) throw StepUnderflow("exchange_phaseshift: Q-phase step underflow");
    double htl = h / s;
    double ny, nyp;
    detail::evaluate_series(C, sc.order, htl, ny, nyp);
    sst.y = ny;
    sst.y_prime = nyp / s;
    sst.r += h;
    ht2 = h;

    FreeWave fw = free_waves(ep.l, ep.k, ep.Z, sst.r);
    double q = detail::q_value(fw, sst.y, sst.y_prime, sst.r, ep.k, ep.Z);
    out.q_trace.emplace_back(sst.r, q);
    if (std::isfinite(q) && std::isfinite(q_prev) &&
        (std::abs(q - q_prev) <= eps_s * std::abs(q + q_prev) ||
         std::abs(q) + std::abs(q_prev) <= 1e-14)) {
      ++run;
    } else {
      run = 0;
      streak_start = sst.r;
    }
    q_prev = q;
    if (run >= ep.stability_run && sst.r - streak_start >= span_req) {
      out.q_final = q;
      out.delta = detail::delta_from_q(q);
      out.r_stable = sst.r;
      out.steps = steps;
      return out;
    }
  }
  throw NoStabilization("exchange_phaseshift: Q(r) not stable before r_cap");
}

// ------------------------------------------------- scattering length

struct ScatteringLength {
  double a = 0.0;
  double r_eff = 0.0;
  bool degenerate = false; // zero-phase input; a = 0, r_eff meaningless
  double k1 = 0.0, k2 = 0.0;
  double delta1 = 0.0, delta2 = 0.0;
};

// Effective-range extraction k cot(delta) = -1/a + r_eff k^2 from two
// momenta differing by a factor of two.
inline ScatteringLength scattering_length(const std::function<double(double)>& delta_of_k,
                                          double k1) {
  if (!(k1 > 0.0)) throw ConfigError("scattering_length: k must be positive");
  double k2 = 0.5 * k1;
  ScatteringLength out;
  out.k1 = k1;
  out.k2 = k2;
  out.delta1 = delta_of_k(k1);
  out.delta2 = delta_of_k(k2);
  double t1 = std::tan(out.delta1), t2 = std::tan(out.delta2);
  if (std::abs(t1) < 1e-300 && std::abs(t2) < 1e-300) {
    out.degenerate = true;
    return out;
  }
  // x + r_eff k^2 = k cot(delta), x = -1/a
  double b1 = k1 / t1, b2 = k2 / t2;
  double det = k2 * k2 - k1 * k1;
  double x = (b1 * k2 * k2 - b2 * k1 * k1) / det;
  out.r_eff = (b2 - b1) / det;
  if (x == 0.0) {
    out.degenerate = true;
    return out;
  }
  out.a = -1.0 / x;
  return out;
}

// k / tan(delta) curve over a momentum grid; delta = pi/2 points cross
// zero rather than fail.
inline std::vector<std::pair<double, double>>
ktan_curve(const std::function<double(double)>& delta_of_k, const std::vector<double>& ks) {
  std::vector<std::pair<double, double>> out;
  out.reserve(ks.size());
  for (double k : ks) {
    double d = delta_of_k(k);
    double t = std::tan(d);
    out.emplace_back(k, std::abs(t) < 1e-300 ? std::numeric_limits<double>::infinity() : k / t);
  }
  return out;
}

} // namespace cfm
