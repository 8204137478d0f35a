#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "cfm/errors.hpp"
#include "cfm/parallel.hpp"

namespace cfm {

// Scan a function over a grid, bracket sign changes, tell roots from poles
// (both flip the sign of a tan-like function) and refine the roots.  Shared
// by the scalar eigenvalue function F(E) and the multichannel determinant.

struct BracketedRoot {
  double x = 0.0;
  double f = 0.0; // residual at the accepted root
  double a = 0.0, b = 0.0;
};

struct ScanResult {
  std::vector<BracketedRoot> roots;
  int poles_skipped = 0;
  int failed_points = 0; // grid points where evaluation threw
};

namespace detail {

// Illinois-damped false position on a sign-change bracket.
inline BracketedRoot refine_bracket(const std::function<double(double)>& f, double a, double b,
                                    double fa, double fb, double rel_tol) {
  BracketedRoot out;
  out.a = a;
  out.b = b;
  double m = 0.5 * (a + b), fm = fa;
  int side = 0;
  for (int it = 0; it < 200; ++it) {
    double denom = fb - fa;
    m = (std::isfinite(denom) && denom != 0.0) ? (a * fb - b * fa) / denom : 0.5 * (a + b);
    if (!(m > std::min(a, b) && m < std::max(a, b))) m = 0.5 * (a + b);
    fm = f(m);
    if (!std::isfinite(fm)) {
      // fall back to plain bisection around the midpoint
      m = 0.5 * (a + b);
      fm = f(m);
      if (!std::isfinite(fm)) break;
    }
    if ((fm > 0.0) == (fa > 0.0)) {
      a = m;
      fa = fm;
      if (side == -1) fb *= 0.5;
      side = -1;
    } else {
      b = m;
      fb = fm;
      if (side == +1) fa *= 0.5;
      side = +1;
    }
    if (std::abs(b - a) <= rel_tol * std::max(1.0, std::abs(m))) break;
  }
  out.x = m;
  out.f = fm;
  return out;
}

} // namespace detail

// `f` must be thread-safe when parallel evaluation is used.  With
// `classify_poles` set (tan-like functions such as the multichannel
// determinant), a bracket counts as a root only when |f(midpoint)| does
// not exceed the larger endpoint magnitude and the refined residual
// collapses; pole-free mismatch functions skip both tests since every
// sign change is a root there.
inline ScanResult scan_for_roots(const std::function<double(double)>& f,
                                 const std::vector<double>& grid, double rel_tol,
                                 bool parallel = true, bool classify_poles = true) {
  int n = static_cast<int>(grid.size());
  ScanResult out;
  if (n < 2) return out;
  std::vector<double> fv(static_cast<size_t>(n), std::numeric_limits<double>::quiet_NaN());
  auto eval = [&](int i) {
    try {
      fv[static_cast<size_t>(i)] = f(grid[static_cast<size_t>(i)]);
    } catch (const SolverError&) {
      // leave NaN; the bracket containing this point is dropped
    }
  };
  if (parallel) parallel_for(n, eval);
  else
    for (int i = 0; i < n; ++i) eval(i);

  for (int i = 0; i < n; ++i)
    if (!std::isfinite(fv[static_cast<size_t>(i)])) ++out.failed_points;

  for (int i = 0; i + 1 < n; ++i) {
    double fa = fv[static_cast<size_t>(i)], fb = fv[static_cast<size_t>(i + 1)];
    if (!std::isfinite(fa) || !std::isfinite(fb)) continue;
    if ((fa > 0.0) == (fb > 0.0) || fa == 0.0) continue;
    double a = grid[static_cast<size_t>(i)], b = grid[static_cast<size_t>(i + 1)];
    if (classify_poles) {
      double fm;
      try {
        fm = f(0.5 * (a + b));
      } catch (const SolverError&) {
        ++out.failed_points;
        continue;
      }
      if (!std::isfinite(fm) || std::abs(fm) > std::max(std::abs(fa), std::abs(fb))) {
        ++out.poles_skipped;
        continue;
      }
    }
    try {
      BracketedRoot root = detail::refine_bracket(f, a, b, fa, fb, rel_tol);
      // At a genuine root the residual collapses with the bracket; at a
      // pole it blows up instead.
      if (!classify_poles ||
          (std::isfinite(root.f) && std::abs(root.f) <= std::max(std::abs(fa), std::abs(fb)))) {
        out.roots.push_back(root);
      } else {
        ++out.poles_skipped;
      }
    } catch (const SolverError&) {
      ++out.failed_points;
    }
  }
  return out;
}

inline std::vector<double> linear_grid(double lo, double hi, int n) {
  std::vector<double> g(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) g[static_cast<size_t>(i)] = lo + (hi - lo) * i / (n - 1.0);
  return g;
}

// Log-spaced grid in the gap below `top`: points top - gap with gap running
// geometrically from gap_hi down to gap_lo (ascending in x).
inline std::vector<double> log_gap_grid(double top, double gap_lo, double gap_hi, int n) {
  std::vector<double> g(static_cast<size_t>(n));
  double ratio = std::log(gap_lo / gap_hi) / (n - 1.0);
  for (int i = 0; i < n; ++i) g[static_cast<size_t>(i)] = top - gap_hi * std::exp(ratio * i);
  return g;
}

} // namespace cfm
