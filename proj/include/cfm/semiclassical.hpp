#pragma once

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "cfm/errors.hpp"
#include "cfm/potential.hpp"

namespace cfm {

// LeRoy-Bernstein analysis of near-dissociation level progressions for
// potentials with a power tail V(r) -> D - C_n / r^n.
//
// With the solver convention y'' = ((V - E)/c) y, c = hbar^2/2mu, the tail
// length scale is beta_n = (C_n / c)^{1/(n-2)} and the dimensionless scaled
// binding energy of a level E < D is
//   eps_s = pref_n * (E - D) * beta_n^2 / c,   pref_3 = 1/4, pref_6 = 1/16.
// Consecutive values of [-eps_s]^{(n-2)/(2n)} are then equally spaced near
// dissociation, with a universal (n-dependent) spacing constant.

struct ScaledSpectrum {
  AsymptoticTail tail;       // D, n, C_n of the source potential
  double c = 1.0;            // hbar^2 / 2 mu in the working units
  double beta_n = 0.0;       // (C_n / c)^{1/(n-2)}
  std::vector<int> v;        // vibrational indices (deep to shallow)
  std::vector<double> eps_s; // scaled binding energies, all < 0 (or 0 at D)
  std::string source;        // free-form spectrum id for reports
};

struct SpacingSequence {
  int n = 0;
  std::vector<int> v;          // index of the deeper level of each pair
  std::vector<double> value;   // [-eps_s(v)]^p, p = (n-2)/(2n)
  std::vector<double> diff;    // value(v) - value(v+1) > 0
  double limit = 0.0;          // universal constant for this n
};

// Universal spacing constant, computed from the Gamma(1/3) closed forms.
inline double universal_constant(int n) {
  double g = std::tgamma(1.0 / 3.0);
  double base = g * g * g / (std::pow(2.0, 5.0 / 3.0) * M_PI);
  if (n == 3) return base / std::sqrt(3.0);
  if (n == 6) return base;
  throw UnsupportedTail("universal_constant: tail power must be 3 or 6");
}

inline ScaledSpectrum scale_spectrum(const std::vector<double>& levels,
                                     const AsymptoticTail& tail, double c,
                                     std::string source = {}, int v_first = 0) {
  if (tail.n != 3 && tail.n != 6)
    throw UnsupportedTail("scale_spectrum: tail power must be 3 or 6");
  if (!(tail.C > 0.0) || !(c > 0.0))
    throw ConfigError("scale_spectrum: C_n and c must be positive");
  ScaledSpectrum ss;
  ss.tail = tail;
  ss.c = c;
  ss.beta_n = std::pow(tail.C / c, 1.0 / (tail.n - 2.0));
  ss.source = std::move(source);
  double pref = tail.n == 3 ? 0.25 : 1.0 / 16.0;
  int v = v_first;
  for (double E : levels) {
    if (E > tail.D)
      throw LevelAboveDissociation("scale_spectrum: level above the dissociation limit");
    ss.v.push_back(v++);
    ss.eps_s.push_back(pref * (E - tail.D) * ss.beta_n * ss.beta_n / c);
  }
  return ss;
}

inline SpacingSequence spacing_sequence(const ScaledSpectrum& ss) {
  if (ss.eps_s.size() < 3)
    throw TooFewLevels("spacing_sequence: need at least 3 levels");
  SpacingSequence sq;
  sq.n = ss.tail.n;
  sq.limit = universal_constant(ss.tail.n);
  double p = (ss.tail.n - 2.0) / (2.0 * ss.tail.n);
  std::vector<double> val(ss.eps_s.size());
  for (std::size_t i = 0; i < ss.eps_s.size(); ++i)
    val[i] = std::pow(-ss.eps_s[i], p);
  for (std::size_t i = 0; i + 1 < val.size(); ++i) {
    sq.v.push_back(ss.v[i]);
    sq.value.push_back(val[i]);
    sq.diff.push_back(val[i] - val[i + 1]);
  }
  return sq;
}

struct CorrespondenceReport {
  SpacingSequence seq;
  int crossover_first_v = -1; // first v with |diff - limit| < 2% of limit
  int crossover_width = -1;   // v-span from that entry to the last level
  std::string csv;            // (v, eps_s, spaced_value, diff, deviation_from_limit)
};

inline CorrespondenceReport correspondence_report(const ScaledSpectrum& ss) {
  CorrespondenceReport rep;
  rep.seq = spacing_sequence(ss);
  const SpacingSequence& sq = rep.seq;
  for (std::size_t i = 0; i < sq.diff.size(); ++i) {
    if (std::abs(sq.diff[i] - sq.limit) < 0.02 * sq.limit) {
      rep.crossover_first_v = sq.v[i];
      rep.crossover_width = ss.v.back() - sq.v[i];
      break;
    }
  }
  std::ostringstream os;
  os.precision(9);
  os << "v,eps_s,spaced_value,diff,deviation_from_limit\n";
  for (std::size_t i = 0; i < sq.diff.size(); ++i)
    os << sq.v[i] << ',' << ss.eps_s[i] << ',' << sq.value[i] << ',' << sq.diff[i] << ','
       << sq.diff[i] - sq.limit << '\n';
  rep.csv = os.str();
  return rep;
}

// Synthetic ladder that is an exact fixed point of the spacing analysis:
// invert [-eps_s]^p = limit * (v_D - v) with v_D = 0 and map eps_s back to
// absolute energies below D.
inline std::vector<double> leroy_bernstein_ladder(const AsymptoticTail& tail, double c,
                                                  int count) {
  double lim = universal_constant(tail.n);
  double beta = std::pow(tail.C / c, 1.0 / (tail.n - 2.0));
  double pref = tail.n == 3 ? 0.25 : 1.0 / 16.0;
  double p = (tail.n - 2.0) / (2.0 * tail.n);
  std::vector<double> out;
  for (int v = 0; v < count; ++v) {
    double eps = -std::pow(lim * (count - v), 1.0 / p);
    out.push_back(tail.D + eps * c / (pref * beta * beta));
  }
  return out;
}

namespace detail {

// Adaptive Simpson on a smooth integrand.
template <class F>
double adapt_simpson(const F& f, double a, double b, double fa, double fm, double fb,
                     double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adapt_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adapt_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
double integrate(const F& f, double a, double b, double tol) {
  double m = 0.5 * (a + b);
  double fa = f(a), fm = f(m), fb = f(b);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adapt_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

} // namespace detail

// Level-density shape integral  I(n, x) = int_1^x y^-2 (y^n - 1)^{-1/2} dy,
// the r-integral behind dv/dE for a pure -C_n/r^n tail (x = R2/R1, the ratio
// of outer turning point to the tail onset).  The x -> infinity limit has the
// Beta-function closed form B(1/2 + 1/n, 1/2) / n; the pair is used as a
// validation of the scaled-spacing construction.
inline double level_density_integral(int n, double x, double tol = 1e-12) {
  if (n < 3) throw UnsupportedTail("level_density_integral: tail power must be >= 3");
  if (!(x > 1.0)) throw ConfigError("level_density_integral: upper limit must exceed 1");
  // substitute y = 1 + u^2 to remove the inverse-square-root endpoint
  auto g = [n](double u) {
    double y = 1.0 + u * u;
    double s = std::pow(y, n) - 1.0;
    double core = s > 0.0 ? u / std::sqrt(s) : 1.0 / std::sqrt(static_cast<double>(n));
    return 2.0 * core / (y * y);
  };
  return detail::integrate(g, 0.0, std::sqrt(x - 1.0), tol);
}

inline double level_density_limit(int n) {
  if (n < 3) throw UnsupportedTail("level_density_limit: tail power must be >= 3");
  double a = 0.5 + 1.0 / n, b = 0.5;
  return std::tgamma(a) * std::tgamma(b) / std::tgamma(a + b) / n;
}

} // namespace cfm
