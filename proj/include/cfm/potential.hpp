#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "cfm/integrate.hpp"
#include "cfm/series.hpp"

namespace cfm {

// Long-range behaviour V(r) -> D - C/r^n for tailed potentials.  n = 0
// means "no power tail" (exponential or compact support); D is still the
// dissociation limit used by outward-cutoff logic.
struct AsymptoticTail {
  double D = 0.0;
  int n = 0;
  double C = 0.0;
  bool has_power_tail() const { return n >= 3; }
};

// A potential model: point evaluation, Taylor-coefficient provider for the
// VSCA scheme, tail metadata and (open) domain.  `value`/`taylor` exclude
// the centrifugal term; use the total_* helpers to include l(l+1)/r^2.
//
// taylor() expands V(center + scale * t) in t: coefficient k carries a
// factor scale^k relative to the plain Taylor coefficient.  Models with a
// singularity fold the scale in analytically, which keeps the coefficients
// representable arbitrarily close to the singular point (the plain
// coefficients overflow there long before the propagation itself would).
class RadialPotential {
public:
  virtual ~RadialPotential() = default;

  virtual double value(double r) const = 0;
  virtual Series taylor(double center, int order, double scale = 1.0) const = 0;

  // Upper bound on a step taken from r (distance to the nearest
  // singularity or breakpoint of the model); infinity when unconstrained.
  virtual double max_step_hint(double r) const {
    if (singular_at_rmin && std::isfinite(domain_min)) return 0.9 * (r - domain_min);
    return std::numeric_limits<double>::infinity();
  }

  double total_value(double r) const {
    double v = value(r);
    if (l > 0) v += static_cast<double>(l) * (l + 1.0) / (r * r);
    return v;
  }

  SeriesExpansion total_taylor(double center, int order, double scale = 1.0) const {
    Series s = taylor(center, order, scale);
    if (l > 0) {
      Series cf = inverse_power_series(center, 2, order, scale);
      cf *= static_cast<double>(l) * (l + 1.0);
      s += cf;
    }
    SeriesExpansion ex;
    ex.center = center;
    ex.scale = scale;
    ex.gamma = s.coeffs();
    return ex;
  }

  int l = 0;
  AsymptoticTail tail;
  double domain_min = 0.0;
  double domain_max = std::numeric_limits<double>::infinity();
  // True when the inner boundary condition must be imposed by ratio
  // saturation (1/r-type wall); false when the potential is regular at
  // domain_min and the boundary value can be evaluated there directly.
  bool singular_at_rmin = true;
  std::string name = "potential";
};

using PotentialPtr = std::shared_ptr<const RadialPotential>;

// Isospectral (E0, L0) scaling: V'(r') = V(L0 r') / E0.  A problem solved
// in scaled coordinates with hbar^2/2mu' = (hbar^2/2mu)/(E0 L0^2) has the
// spectrum E' = E / E0.
class ScaledPotential final : public RadialPotential {
public:
  ScaledPotential(PotentialPtr base, double E0, double L0) : base_(std::move(base)), E0_(E0), L0_(L0) {
    l = base_->l;
    tail.D = base_->tail.D / E0;
    tail.n = base_->tail.n;
    tail.C = base_->tail.C / (E0 * std::pow(L0, base_->tail.n));
    domain_min = base_->domain_min / L0;
    domain_max = base_->domain_max / L0;
    singular_at_rmin = base_->singular_at_rmin;
    name = base_->name + "-scaled";
  }

  double value(double r) const override { return base_->value(L0_ * r) / E0_; }

  Series taylor(double center, int order, double scale = 1.0) const override {
    // V(L0 (center + scale t)) / E0 = base expansion at L0*center with
    // local scale L0*scale.
    Series s = base_->taylor(L0_ * center, order, L0_ * scale);
    s *= 1.0 / E0_;
    return s;
  }

  double max_step_hint(double r) const override { return base_->max_step_hint(L0_ * r) / L0_; }

private:
  PotentialPtr base_;
  double E0_, L0_;
};

inline PotentialPtr make_scaled(PotentialPtr base, double E0, double L0) {
  return std::make_shared<ScaledPotential>(std::move(base), E0, L0);
}

} // namespace cfm
