#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

#include "cfm/errors.hpp"

namespace cfm {

// Truncated power series in a local offset x about some expansion center.
// coefficient k multiplies x^k.  All binary operations truncate at the
// shorter operand's order; the usual recurrences give reciprocal, sqrt,
// exp, log, sin/cos and acos of a series whose constant term is valid for
// the outer function.
class Series {
public:
  Series() = default;
  explicit Series(int order, double c0 = 0.0) : c_(static_cast<size_t>(order) + 1, 0.0) {
    c_[0] = c0;
  }
  static Series constant(double v, int order) { return Series(order, v); }
  // The local offset itself: c0 + x.
  static Series shifted_variable(double c0, int order) {
    Series s(order, c0);
    if (order >= 1) s.c_[1] = 1.0;
    return s;
  }

  int order() const { return static_cast<int>(c_.size()) - 1; }
  double operator[](int k) const { return c_[static_cast<size_t>(k)]; }
  double& operator[](int k) { return c_[static_cast<size_t>(k)]; }
  const std::vector<double>& coeffs() const { return c_; }

  double eval(double x) const {
    double acc = 0.0;
    for (size_t k = c_.size(); k-- > 0;) acc = acc * x + c_[k];
    return acc;
  }

  Series& operator+=(const Series& o) {
    resize_to_min(o);
    for (size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
    return *this;
  }
  Series& operator-=(const Series& o) {
    resize_to_min(o);
    for (size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
    return *this;
  }
  Series& operator*=(double s) {
    for (double& v : c_) v *= s;
    return *this;
  }
  Series& operator+=(double s) {
    c_[0] += s;
    return *this;
  }

  friend Series operator+(Series a, const Series& b) { return a += b; }
  friend Series operator-(Series a, const Series& b) { return a -= b; }
  friend Series operator*(Series a, double s) { return a *= s; }
  friend Series operator*(double s, Series a) { return a *= s; }
  friend Series operator+(Series a, double s) { return a += s; }
  friend Series operator+(double s, Series a) { return a += s; }
  friend Series operator-(Series a, double s) { return a += -s; }
  friend Series operator-(double s, Series a) {
    a *= -1.0;
    return a += s;
  }

  friend Series operator*(const Series& a, const Series& b) {
    int n = std::min(a.order(), b.order());
    Series r(n);
    for (int i = 0; i <= n; ++i) {
      double acc = 0.0;
      for (int j = 0; j <= i; ++j) acc += a.c_[static_cast<size_t>(j)] * b.c_[static_cast<size_t>(i - j)];
      r.c_[static_cast<size_t>(i)] = acc;
    }
    return r;
  }

  // 1/f, requires f(0) != 0.
  Series reciprocal() const {
    assert(c_[0] != 0.0);
    int n = order();
    Series r(n);
    double inv0 = 1.0 / c_[0];
    r.c_[0] = inv0;
    for (int k = 1; k <= n; ++k) {
      double acc = 0.0;
      for (int j = 1; j <= k; ++j) acc += c_[static_cast<size_t>(j)] * r.c_[static_cast<size_t>(k - j)];
      r.c_[static_cast<size_t>(k)] = -inv0 * acc;
    }
    return r;
  }

  // sqrt(f), requires f(0) > 0.
  Series sqrt_series() const {
    assert(c_[0] > 0.0);
    int n = order();
    Series r(n);
    r.c_[0] = std::sqrt(c_[0]);
    double inv2g0 = 0.5 / r.c_[0];
    for (int k = 1; k <= n; ++k) {
      double acc = 0.0;
      for (int j = 1; j < k; ++j) acc += r.c_[static_cast<size_t>(j)] * r.c_[static_cast<size_t>(k - j)];
      r.c_[static_cast<size_t>(k)] = (c_[static_cast<size_t>(k)] - acc) * inv2g0;
    }
    return r;
  }

  // exp(f).
  Series exp_series() const {
    int n = order();
    Series r(n);
    r.c_[0] = std::exp(c_[0]);
    for (int k = 1; k <= n; ++k) {
      double acc = 0.0;
      for (int j = 1; j <= k; ++j)
        acc += static_cast<double>(j) * c_[static_cast<size_t>(j)] * r.c_[static_cast<size_t>(k - j)];
      r.c_[static_cast<size_t>(k)] = acc / static_cast<double>(k);
    }
    return r;
  }

  // log(f), requires f(0) > 0.
  Series log_series() const {
    assert(c_[0] > 0.0);
    int n = order();
    // log f = log f0 + integral of f'/f.
    Series d = derivative();
    Series q = d * reciprocal();
    Series r = q.antiderivative(std::log(c_[0]));
    r.truncate(n);
    return r;
  }

  // Simultaneous sin(f), cos(f).
  void sin_cos(Series& s, Series& c) const {
    int n = order();
    s = Series(n);
    c = Series(n);
    s.c_[0] = std::sin(c_[0]);
    c.c_[0] = std::cos(c_[0]);
    for (int k = 1; k <= n; ++k) {
      double as = 0.0, ac = 0.0;
      for (int j = 1; j <= k; ++j) {
        double jf = static_cast<double>(j) * c_[static_cast<size_t>(j)];
        as += jf * c.c_[static_cast<size_t>(k - j)];
        ac += jf * s.c_[static_cast<size_t>(k - j)];
      }
      s.c_[static_cast<size_t>(k)] = as / static_cast<double>(k);
      c.c_[static_cast<size_t>(k)] = -ac / static_cast<double>(k);
    }
  }

  // acos(f), requires |f(0)| < 1 (strictly inside the branch).
  Series acos_series() const {
    assert(std::abs(c_[0]) < 1.0);
    int n = order();
    Series one_minus = 1.0 - (*this) * (*this);
    Series h = one_minus.sqrt_series();
    Series d = derivative() * h.reciprocal();
    d *= -1.0;
    Series r = d.antiderivative(std::acos(c_[0]));
    r.truncate(n);
    return r;
  }

  Series pow_int(int p) const {
    assert(p >= 0);
    Series r = Series::constant(1.0, order());
    Series base = *this;
    while (p > 0) {
      if (p & 1) r = r * base;
      base = base * base;
      p >>= 1;
    }
    return r;
  }

  // d/dx; result has one order less (kept at same length minus one).
  Series derivative() const {
    int n = order();
    Series r(n > 0 ? n - 1 : 0);
    for (int k = 1; k <= n; ++k)
      r.c_[static_cast<size_t>(k - 1)] = static_cast<double>(k) * c_[static_cast<size_t>(k)];
    return r;
  }

  // Antiderivative with constant term c0; result has one order more.
  Series antiderivative(double c0) const {
    int n = order();
    Series r(n + 1);
    r.c_[0] = c0;
    for (int k = 0; k <= n; ++k)
      r.c_[static_cast<size_t>(k + 1)] = c_[static_cast<size_t>(k)] / static_cast<double>(k + 1);
    return r;
  }

  void truncate(int n) {
    if (order() > n) c_.resize(static_cast<size_t>(n) + 1);
  }

  bool all_finite() const {
    for (double v : c_)
      if (!std::isfinite(v)) return false;
    return true;
  }

private:
  void resize_to_min(const Series& o) {
    if (o.c_.size() < c_.size()) c_.resize(o.c_.size());
    else if (c_.size() < o.c_.size()) {
      // Keep our own truncation order; the other operand is simply cut.
    }
  }
  // Note: += / -= with a longer other operand ignores the other's tail.
  friend class SeriesAccess;
  std::vector<double> c_;
};

// Series of 1/(a + s x)^p in x about x = 0, for p >= 1 and a != 0.  The
// scale s is folded into the recurrence so the coefficients stay bounded
// when |a| is tiny but s is of order |a| (expansion near a singularity).
inline Series inverse_power_series(double a, int p, int order, double s = 1.0) {
  assert(a != 0.0);
  // coefficients of (a+x)^{-p} are binom(p-1+k, k) (-1)^k / a^{p+k}
  Series r(order);
  double ainv = 1.0 / a;
  double coef = std::pow(ainv, p);
  for (int k = 0; k <= order; ++k) {
    r[k] = coef;
    coef *= -s * ainv * static_cast<double>(p + k) / static_cast<double>(k + 1);
  }
  return r;
}

// Folds a scale s into an unscaled series: f(x) -> f(s x).
inline Series fold_scale(Series f, double s) {
  double pw = 1.0;
  for (int k = 0; k <= f.order(); ++k) {
    f[k] *= pw;
    pw *= s;
  }
  return f;
}

} // namespace cfm
