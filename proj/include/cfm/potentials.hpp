#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "cfm/errors.hpp"
#include "cfm/potential.hpp"

namespace cfm {

// ---------------------------------------------------------------- Coulomb

class CoulombPotential final : public RadialPotential {
public:
  CoulombPotential(double Z, int l_in) : Z_(Z) {
    l = l_in;
    tail = {0.0, 0, 0.0};
    name = "coulomb";
  }
  double value(double r) const override { return -2.0 * Z_ / r; }
  Series taylor(double center, int order, double scale = 1.0) const override {
    Series s = inverse_power_series(center, 1, order, scale);
    s *= -2.0 * Z_;
    return s;
  }
  double Z() const { return Z_; }

private:
  double Z_;
};

inline PotentialPtr make_coulomb(double Z, int l) {
  return std::make_shared<CoulombPotential>(Z, l);
}

// ------------------------------------------------------------------ Morse

class MorsePotential final : public RadialPotential {
public:
  MorsePotential(double D, double a, double r_e) : D_(D), a_(a), re_(r_e) {
    tail = {0.0, 0, 0.0}; // exponential approach to 0 from below
    singular_at_rmin = false;
    name = "morse";
  }
  double value(double r) const override {
    double z = std::exp(-a_ * (r - re_));
    return D_ * (z * z - 2.0 * z);
  }
  Series taylor(double center, int order, double scale = 1.0) const override {
    double z0 = std::exp(-a_ * (center - re_));
    // z(center + scale t) = z0 * exp(-a scale t)
    Series ax(order);
    if (order >= 1) ax[1] = -a_ * scale;
    Series z = ax.exp_series();
    z *= z0;
    Series v = z * z - 2.0 * z;
    v *= D_;
    return v;
  }
  double D() const { return D_; }
  double a() const { return a_; }
  double r_e() const { return re_; }

private:
  double D_, a_, re_;
};

inline PotentialPtr make_morse(double D, double a, double r_e) {
  return std::make_shared<MorsePotential>(D, a, r_e);
}

// Analytic Morse spectrum E_n = -(a^2 c) (sqrt(D/c)/a - n - 1/2)^2 with
// c = hbar^2/2mu (the paper's section-II benchmark uses c = 1).
inline std::vector<double> morse_levels(double D, double a, double r_e, double hbar2_2mu) {
  (void)r_e;
  double c = hbar2_2mu;
  double d = std::sqrt(D / c) / a;
  if (d < 0.5) throw NoBoundLevels("morse_levels: sqrt(2 mu D)/a < 1/2");
  int count = static_cast<int>(std::floor(d - 0.5)) + 1;
  std::vector<double> out;
  out.reserve(static_cast<size_t>(count));
  for (int n = 0; n < count; ++n) {
    double t = d - n - 0.5;
    out.push_back(-a * a * c * t * t);
  }
  return out;
}

// -------------------------------------------------- (A)LJ 12-6 and Trost

class AljPotential final : public RadialPotential {
public:
  AljPotential(double C1, double C2, int alpha, int beta) : C1_(C1), C2_(C2), al_(alpha), be_(beta) {
    if (!(beta > alpha && alpha >= 3)) throw InvalidExponents("ALJ requires beta > alpha >= 3");
    tail = {0.0, alpha, C2};
    name = "alj";
  }
  double value(double r) const override {
    return C1_ * std::pow(r, -be_) - C2_ * std::pow(r, -al_);
  }
  Series taylor(double center, int order, double scale = 1.0) const override {
    Series s = inverse_power_series(center, be_, order, scale);
    s *= C1_;
    Series t = inverse_power_series(center, al_, order, scale);
    t *= C2_;
    return s - t;
  }

private:
  double C1_, C2_;
  int al_, be_;
};

inline PotentialPtr make_alj(double C1, double C2, int alpha, int beta) {
  return std::make_shared<AljPotential>(C1, C2, alpha, beta);
}

// Trost parameterisation of the 12-6 form: C1 = eps*alpha*r_e^beta/(beta-alpha),
// C2 = eps*beta*r_e^alpha/(beta-alpha); minimum -eps at r_e.  The scaling
// constant B = 2 mu eps r_e^2 enters through the solver's hbar^2/2mu.
inline PotentialPtr make_trost(double eps, double r_e, double /*B*/ = 1e4) {
  double C1 = eps * 6.0 * std::pow(r_e, 12) / 6.0;
  double C2 = eps * 12.0 * std::pow(r_e, 6) / 6.0;
  return make_alj(C1, C2, 6, 12);
}

// ------------------------------------------------- Movre-Pichler curves

struct MovreParams {
  double C3 = 0.0;    // Hartree * a0^3 (per-state C3)
  double Delta = 0.0; // spin-orbit splitting, Ry
  bool state_1u = false;
};

namespace movre_detail {

// Middle root of q(tau) = tau^3 + tau^2 - 21 X^2 tau + 20 X^3 - 7 X^2,
// which is the 1u eigenvalue branch shifted so V/Delta = tau + 2X.
inline double middle_root(double X) {
  if (X < 1e-2) {
    // tau = X*g with g = -sqrt(7 + X(21g - g^3 - 20)), fixed point from -sqrt(7).
    double g = -std::sqrt(7.0);
    for (int i = 0; i < 60; ++i) {
      double gn = -std::sqrt(7.0 + X * (21.0 * g - g * g * g - 20.0));
      if (std::abs(gn - g) < 1e-17 * std::abs(gn)) {
        g = gn;
        break;
      }
      g = gn;
    }
    return X * g;
  }
  // Depress: tau = m - 1/3 gives m^3 + p m + q.
  double p = -21.0 * X * X - 1.0 / 3.0;
  double q = 20.0 * X * X * X - 7.0 * X * X + 21.0 * X * X / 3.0 + 2.0 / 27.0;
  // Three real roots expected (discriminant <= 0 region).
  double mterm = 2.0 * std::sqrt(-p / 3.0);
  double arg = 3.0 * q / (p * mterm);
  arg = std::min(1.0, std::max(-1.0, arg));
  double phi = std::acos(arg) / 3.0;
  double r0 = mterm * std::cos(phi);
  double r1 = mterm * std::cos(phi - 2.0 * M_PI / 3.0);
  double r2 = mterm * std::cos(phi - 4.0 * M_PI / 3.0);
  double lo = std::min({r0, r1, r2});
  double hi = std::max({r0, r1, r2});
  double mid = r0 + r1 + r2 - lo - hi;
  return mid - 1.0 / 3.0;
}

// Newton refinement of the tau-series for the same cubic with X a series.
inline Series tau_series(const Series& X, double tau0) {
  int order = X.order();
  Series X2 = X * X;
  Series X3 = X2 * X;
  Series s = Series::constant(tau0, order);
  for (int it = 0; it < 8; ++it) {
    Series q = s * s * s + s * s - 21.0 * (X2 * s) + 20.0 * X3 - 7.0 * X2;
    Series qp = 3.0 * (s * s) + 2.0 * s - 21.0 * X2;
    s -= q * qp.reciprocal();
  }
  return s;
}

} // namespace movre_detail

// Potential energies in cm^-1, distances in a0; zero at dissociation.
class MovrePotential final : public RadialPotential {
public:
  MovrePotential(const MovreParams& p, double ry_to_cm1, double hartree_to_cm1)
      : params_(p) {
    delta_cm_ = p.Delta * ry_to_cm1;
    double c3_cm = p.C3 * hartree_to_cm1;
    double C_cm = p.state_1u ? 9.0 * c3_cm / (std::sqrt(7.0) - 2.0) : 3.0 * c3_cm;
    kappa_ = C_cm / (9.0 * delta_cm_); // X = kappa / r^3
    tail = {0.0, 3, c3_cm};
    name = p.state_1u ? "movre-1u" : "movre-0g";
  }

  double value(double r) const override {
    double X = kappa_ / (r * r * r);
    if (!params_.state_1u) {
      double u = -6.0 * X + 81.0 * X * X;
      return delta_cm_ * (-1.5 * X + u / (2.0 * (1.0 + std::sqrt(1.0 + u))));
    }
    double tau = movre_detail::middle_root(X);
    return delta_cm_ * (tau + 2.0 * X);
  }

  Series taylor(double center, int order, double scale = 1.0) const override {
    Series X = inverse_power_series(center, 3, order, scale);
    X *= kappa_;
    if (!params_.state_1u) {
      Series u = 81.0 * (X * X) - 6.0 * X;
      Series den = (1.0 + u).sqrt_series() + 1.0;
      Series v = (-1.5) * X + 0.5 * (u * den.reciprocal());
      v *= delta_cm_;
      return v;
    }
    double X0 = kappa_ / (center * center * center);
    double tau0 = movre_detail::middle_root(X0);
    Series tau = movre_detail::tau_series(X, tau0);
    Series v = tau + 2.0 * X;
    v *= delta_cm_;
    return v;
  }

  double delta_cm() const { return delta_cm_; }

private:
  MovreParams params_;
  double delta_cm_;
  double kappa_;
};

inline PotentialPtr make_movre_0g(const MovreParams& p, double ry_to_cm1, double hartree_to_cm1) {
  MovreParams q = p;
  q.state_1u = false;
  return std::make_shared<MovrePotential>(q, ry_to_cm1, hartree_to_cm1);
}

inline PotentialPtr make_movre_1u(const MovreParams& p, double ry_to_cm1, double hartree_to_cm1) {
  MovreParams q = p;
  q.state_1u = true;
  return std::make_shared<MovrePotential>(q, ry_to_cm1, hartree_to_cm1);
}

// --------------------------------------------------- Green-Sellin-Zachor

class GszPotential final : public RadialPotential {
public:
  GszPotential(double Z, double eps1, double eps2) : Z_(Z), e1_(eps1), e2_(eps2) {
    tail = {0.0, 0, 0.0};
    name = "gsz";
  }
  double value(double r) const override {
    double w = omega(r);
    return -(2.0 / r) * ((Z_ - 1.0) * w + 1.0);
  }
  Series taylor(double center, int order, double scale = 1.0) const override {
    Series invr = inverse_power_series(center, 1, order, scale);
    Series w = omega_series(center, order, scale);
    Series inner = (Z_ - 1.0) * w + 1.0;
    Series v = invr * inner;
    v *= -2.0;
    return v;
  }

private:
  double omega(double r) const {
    double x = r / e2_;
    if (x > 300.0) return 0.0; // exp(-x)/eps1 below 1e-130
    return 1.0 / (e1_ * (std::exp(x) - 1.0) + 1.0);
  }
  Series omega_series(double center, int order, double scale) const {
    double x0 = center / e2_;
    if (x0 > 300.0) return Series(order);
    Series x(order, x0);
    if (order >= 1) x[1] = scale / e2_;
    Series den = e1_ * (x.exp_series() - 1.0) + 1.0;
    return den.reciprocal();
  }
  double Z_, e1_, e2_;
};

inline PotentialPtr make_gsz(double Z, double eps1, double eps2) {
  return std::make_shared<GszPotential>(Z, eps1, eps2);
}

// --------------------------------------------- 1D double-well potentials

class DoubleGaussianPotential final : public RadialPotential {
public:
  DoubleGaussianPotential(double D, double Omega, double r_a) : D_(D), om_(Omega), ra_(r_a) {
    domain_min = -std::numeric_limits<double>::infinity();
    singular_at_rmin = false;
    tail = {0.0, 0, 0.0};
    name = "double-gaussian";
  }
  double value(double r) const override {
    return -D_ * (std::exp(-om_ * (r - ra_) * (r - ra_)) + std::exp(-om_ * (r + ra_) * (r + ra_)));
  }
  Series taylor(double center, int order, double scale = 1.0) const override {
    return gauss_series(center, -ra_, order, scale) + gauss_series(center, ra_, order, scale);
  }

private:
  // -D exp(-om (r - mu)^2) expanded about center.
  Series gauss_series(double center, double mu, int order, double scale) const {
    double d0 = center - mu;
    // exponent series: -om (d0 + scale t)^2
    Series e(order, -om_ * d0 * d0);
    if (order >= 1) e[1] = -2.0 * om_ * d0 * scale;
    if (order >= 2) e[2] = -om_ * scale * scale;
    Series g = e.exp_series();
    g *= -D_;
    return g;
  }
  double D_, om_, ra_;
};

inline PotentialPtr make_double_gaussian(double D, double Omega, double r_a) {
  return std::make_shared<DoubleGaussianPotential>(D, Omega, r_a);
}

class JohnsonDwpPotential final : public RadialPotential {
public:
  JohnsonDwpPotential(double A, double B, double C, double D, double r_a, double r_b)
      : A_(A), B_(B), C_(C), D_(D), ra_(r_a), rb_(r_b) {
    domain_min = -std::numeric_limits<double>::infinity();
    singular_at_rmin = false;
    tail = {D, 0, 0.0}; // dissociation at the Morse plateau
    name = "johnson-dwp";
  }
  double value(double r) const override {
    double z = std::exp(-B_ * (r - ra_));
    double morse = D_ * (1.0 - z) * (1.0 - z);
    double gauss = A_ * std::exp(-C_ * (r - rb_) * (r - rb_));
    return morse + gauss;
  }
  Series taylor(double center, int order, double scale = 1.0) const override {
    double z0 = std::exp(-B_ * (center - ra_));
    Series bx(order);
    if (order >= 1) bx[1] = -B_ * scale;
    Series z = bx.exp_series();
    z *= z0;
    Series one_minus = 1.0 - z;
    Series morse = one_minus * one_minus;
    morse *= D_;
    double d0 = center - rb_;
    Series e(order, -C_ * d0 * d0);
    if (order >= 1) e[1] = -2.0 * C_ * d0 * scale;
    if (order >= 2) e[2] = -C_ * scale * scale;
    Series gauss = e.exp_series();
    gauss *= A_;
    return morse + gauss;
  }

private:
  double A_, B_, C_, D_, ra_, rb_;
};

inline PotentialPtr make_johnson_dwp(double A, double B, double C, double D, double r_a, double r_b) {
  return std::make_shared<JohnsonDwpPotential>(A, B, C, D, r_a, r_b);
}

// ------------------------------------- electron-hydrogen model potentials

// Static e-H potential V_1s(r) = -2 (1 + 1/r) exp(-2r), Rydberg units.
class HydrogenStaticPotential final : public RadialPotential {
public:
  HydrogenStaticPotential() {
    tail = {0.0, 0, 0.0};
    name = "hydrogen-static";
  }
  double value(double r) const override { return -2.0 * (1.0 + 1.0 / r) * std::exp(-2.0 * r); }
  Series taylor(double center, int order, double scale = 1.0) const override {
    Series invr = inverse_power_series(center, 1, order, scale);
    Series e(order);
    if (order >= 1) e[1] = -2.0 * scale;
    Series ex = e.exp_series();
    ex *= std::exp(-2.0 * center);
    Series v = (invr + 1.0) * ex;
    v *= -2.0;
    return v;
  }
};

inline PotentialPtr make_hydrogen_static() { return std::make_shared<HydrogenStaticPotential>(); }

// Callaway-Temkin polarisation potential
//   V_pol = -(9/2r^4) [1 - exp(-2r)(1 + 2r + 2r^2 + 4/3 r^3 + 2/3 r^4 + 4/27 r^5)].
// The bracket vanishes through r^4 at the origin; a precomputed origin
// expansion provides cancellation-free evaluation at small r.
class CallawayTemkinPotential final : public RadialPotential {
public:
  CallawayTemkinPotential() {
    tail = {0.0, 4, 4.5};
    name = "callaway-temkin";
    build_origin_poly();
  }
  double value(double r) const override {
    if (r < switch_r_) {
      // V = -4.5 * sum_k b_{k+5} r^{k+1}
      double acc = 0.0;
      for (size_t k = poly_.size(); k-- > 0;) acc = acc * r + poly_[k];
      return acc * r;
    }
    double p = 1.0 + r * (2.0 + r * (2.0 + r * (4.0 / 3.0 + r * (2.0 / 3.0 + r * 4.0 / 27.0))));
    double bracket = 1.0 - std::exp(-2.0 * r) * p;
    return -4.5 / (r * r * r * r) * bracket;
  }
  Series taylor(double center, int order, double scale = 1.0) const override {
    Series rv(order, center);
    if (order >= 1) rv[1] = scale;
    if (center < switch_r_) {
      // Recentre the origin polynomial r * poly(r) by Horner in series form.
      Series acc = Series::constant(0.0, order);
      for (size_t k = poly_.size(); k-- > 0;) {
        acc = acc * rv;
        acc += poly_[k];
      }
      return acc * rv;
    }
    Series inv4 = inverse_power_series(center, 4, order, scale);
    Series e(order);
    if (order >= 1) e[1] = -2.0 * scale;
    Series ex = e.exp_series();
    ex *= std::exp(-2.0 * center);
    Series p = Series::constant(4.0 / 27.0, order);
    const double c[5] = {2.0 / 3.0, 4.0 / 3.0, 2.0, 2.0, 1.0};
    for (double ck : c) {
      p = p * rv;
      p += ck;
    }
    Series bracket = 1.0 - ex * p;
    Series v = inv4 * bracket;
    v *= -4.5;
    return v;
  }

private:
  void build_origin_poly() {
    // Coefficients b_k of 1 - exp(-2r) p(r); b_0..b_4 vanish analytically.
    const int K = 46;
    std::vector<double> pc(K + 1, 0.0);
    pc[0] = 1.0;
    pc[1] = 2.0;
    pc[2] = 2.0;
    pc[3] = 4.0 / 3.0;
    pc[4] = 2.0 / 3.0;
    pc[5] = 4.0 / 27.0;
    std::vector<double> ec(K + 1, 0.0); // exp(-2r)
    ec[0] = 1.0;
    for (int k = 1; k <= K; ++k) ec[static_cast<size_t>(k)] = ec[static_cast<size_t>(k - 1)] * (-2.0) / k;
    std::vector<double> b(K + 1, 0.0);
    for (int k = 0; k <= K; ++k) {
      double acc = 0.0;
      for (int j = 0; j <= std::min(k, 5); ++j) acc += pc[static_cast<size_t>(j)] * ec[static_cast<size_t>(k - j)];
      b[static_cast<size_t>(k)] = (k == 0 ? 1.0 - acc : -acc);
    }
    // V = -4.5 sum_{k>=5} b_k r^{k-4}; store poly_[j] = -4.5 b_{j+5} so that
    // V = r * sum_j poly_[j] r^j.
    poly_.assign(static_cast<size_t>(K - 4), 0.0);
    for (int k = 5; k <= K; ++k) poly_[static_cast<size_t>(k - 5)] = -4.5 * b[static_cast<size_t>(k)];
  }
  std::vector<double> poly_;
  double switch_r_ = 0.5;
};

inline PotentialPtr make_callaway_temkin() { return std::make_shared<CallawayTemkinPotential>(); }

// Simple -alpha_d / (2 r^4) polarisation tail (Roche comparison preset).
class PolTailPotential final : public RadialPotential {
public:
  explicit PolTailPotential(double alpha_d) : ad_(alpha_d) {
    tail = {0.0, 4, alpha_d / 2.0};
    name = "pol-tail";
  }
  double value(double r) const override { return -ad_ / (2.0 * r * r * r * r); }
  Series taylor(double center, int order, double scale = 1.0) const override {
    Series s = inverse_power_series(center, 4, order, scale);
    s *= -ad_ / 2.0;
    return s;
  }

private:
  double ad_;
};

inline PotentialPtr make_pol_tail(double alpha_d) { return std::make_shared<PolTailPotential>(alpha_d); }

// ----------------------------------------------------- utility potentials

// Sum of component potentials (shared l taken from the first entry).
class SumPotential final : public RadialPotential {
public:
  explicit SumPotential(std::vector<PotentialPtr> parts) : parts_(std::move(parts)) {
    if (!parts_.empty()) {
      l = parts_.front()->l;
      domain_min = parts_.front()->domain_min;
      singular_at_rmin = parts_.front()->singular_at_rmin;
      for (const auto& p : parts_) {
        if (p->tail.has_power_tail()) {
          tail.n = p->tail.n;
          tail.C = p->tail.C;
        }
        tail.D += p->tail.D;
      }
    }
    name = "sum";
  }
  double value(double r) const override {
    double acc = 0.0;
    for (const auto& p : parts_) acc += p->value(r);
    return acc;
  }
  Series taylor(double center, int order, double scale = 1.0) const override {
    Series acc(order);
    for (const auto& p : parts_) acc += p->taylor(center, order, scale);
    return acc;
  }
  double max_step_hint(double r) const override {
    double h = std::numeric_limits<double>::infinity();
    for (const auto& p : parts_) h = std::min(h, p->max_step_hint(r));
    return h;
  }

private:
  std::vector<PotentialPtr> parts_;
};

inline PotentialPtr make_sum(std::vector<PotentialPtr> parts) {
  return std::make_shared<SumPotential>(std::move(parts));
}

// Attractive square well (analytic phaseshift oracle in tests).
class SquareWellPotential final : public RadialPotential {
public:
  SquareWellPotential(double V0, double R) : V0_(V0), R_(R) {
    singular_at_rmin = false;
    tail = {0.0, 0, 0.0};
    name = "square-well";
  }
  double value(double r) const override { return r < R_ ? -V0_ : 0.0; }
  Series taylor(double center, int order, double /*scale*/ = 1.0) const override {
    return Series::constant(value(center), order);
  }
  double max_step_hint(double r) const override {
    double d = std::abs(R_ - r);
    return d > 1e-14 ? d : std::numeric_limits<double>::infinity();
  }

private:
  double V0_, R_;
};

inline PotentialPtr make_square_well(double V0, double R) {
  return std::make_shared<SquareWellPotential>(V0, R);
}

// Polynomial potential about the origin (tests: V = 0, V = r^2, ...).
class PolynomialPotential final : public RadialPotential {
public:
  explicit PolynomialPotential(std::vector<double> coeffs) : c_(std::move(coeffs)) {
    singular_at_rmin = false;
    name = "polynomial";
  }
  double value(double r) const override {
    double acc = 0.0;
    for (size_t k = c_.size(); k-- > 0;) acc = acc * r + c_[k];
    return acc;
  }
  Series taylor(double center, int order, double scale = 1.0) const override {
    Series rv(order, center);
    if (order >= 1) rv[1] = scale;
    Series acc = Series::constant(0.0, order);
    for (size_t k = c_.size(); k-- > 0;) {
      acc = acc * rv;
      acc += c_[k];
    }
    return acc;
  }

private:
  std::vector<double> c_;
};

inline PotentialPtr make_polynomial(std::vector<double> coeffs) {
  return std::make_shared<PolynomialPotential>(std::move(coeffs));
}

// Numerically locate the potential minimum (default r0 choice).
inline double argmin_potential(const RadialPotential& pot, double lo, double hi) {
  // Golden-section on total potential.
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
  double f1 = pot.total_value(c1), f2 = pot.total_value(c2);
  for (int i = 0; i < 200 && (b - a) > 1e-12 * (std::abs(a) + 1.0); ++i) {
    if (f1 < f2) {
      b = c2;
      c2 = c1;
      f2 = f1;
      c1 = b - gr * (b - a);
      f1 = pot.total_value(c1);
    } else {
      a = c1;
      c1 = c2;
      f1 = f2;
      c2 = a + gr * (b - a);
      f2 = pot.total_value(c2);
    }
  }
  return 0.5 * (a + b);
}

} // namespace cfm
