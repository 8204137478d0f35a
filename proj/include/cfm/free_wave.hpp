#pragma once

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_bessel.h>
#include <gsl/gsl_sf_coulomb.h>

#include <cmath>
#include <limits>

#include "cfm/errors.hpp"

namespace cfm {

// Free asymptotic reference waves for phaseshift extraction.
//   Z = 1: Riccati-Bessel pair s_l(rho) = rho j_l(rho),
//          c_l(rho) = -rho y_l(rho); s_0 = sin, c_0 = cos.
//   Z > 1: regular/irregular Coulomb waves F_l, G_l at eta = -(Z-1)/k
//          (attractive residual charge), same sine/cosine-like roles.
// Derivatives are with respect to rho = k r.  Wronskian convention:
//   s_l c_l' - s_l' c_l = -1  for Z = 1,
//   F_l G_l' - F_l' G_l = -1  for Z > 1 (per unit rho).

struct FreeWave {
  double s = 0.0, c = 0.0;            // s_l(rho), c_l(rho)
  double s_prime = 0.0, c_prime = 0.0; // d/drho
  double s_next = 0.0, c_next = 0.0;  // order l+1 values (Q recursion)
  double rho = 0.0;
  int l = 0;
};

namespace detail {

inline void gsl_quiet() {
  static const bool once = [] {
    gsl_set_error_handler_off();
    return true;
  }();
  (void)once;
}

} // namespace detail

inline FreeWave free_waves(int l, double k, double Z, double r) {
  detail::gsl_quiet();
  if (!(k > 0.0) || !(r > 0.0)) throw ConfigError("free_waves: k and r must be positive");
  FreeWave fw;
  fw.l = l;
  fw.rho = k * r;
  double rho = fw.rho;
  if (Z <= 1.0) {
    gsl_sf_result jm, j0, j1, ym, y0, y1;
    // orders l-1, l, l+1; l-1 = -1 handled by the closed forms
    int s0 = gsl_sf_bessel_jl_e(l, rho, &j0);
    int s1 = gsl_sf_bessel_jl_e(l + 1, rho, &j1);
    int s2 = gsl_sf_bessel_yl_e(l, rho, &y0);
    int s3 = gsl_sf_bessel_yl_e(l + 1, rho, &y1);
    if (s0 || s1 || s2 || s3)
      throw NonFiniteValue("free_waves: Riccati-Bessel evaluation failed");
    double sm, cm; // order l-1
    if (l == 0) {
      sm = std::cos(rho); // rho j_{-1}
      cm = -std::sin(rho);
    } else {
      int s4 = gsl_sf_bessel_jl_e(l - 1, rho, &jm);
      int s5 = gsl_sf_bessel_yl_e(l - 1, rho, &ym);
      if (s4 || s5) throw NonFiniteValue("free_waves: Riccati-Bessel evaluation failed");
      sm = rho * jm.val;
      cm = -rho * ym.val;
    }
    fw.s = rho * j0.val;
    fw.c = -rho * y0.val;
    fw.s_next = rho * j1.val;
    fw.c_next = -rho * y1.val;
    fw.s_prime = sm - l / rho * fw.s;
    fw.c_prime = cm - l / rho * fw.c;
  } else {
    double eta = -(Z - 1.0) / k;
    gsl_sf_result F, Fp, G, Gp, F1, F1p, G1, G1p;
    double expF, expG, expF1, expG1;
    int st = gsl_sf_coulomb_wave_FG_e(eta, rho, static_cast<double>(l), 0, &F, &Fp, &G, &Gp,
                                      &expF, &expG);
    int st1 = gsl_sf_coulomb_wave_FG_e(eta, rho, static_cast<double>(l + 1), 0, &F1, &F1p, &G1,
                                       &G1p, &expF1, &expG1);
    if (st || st1 || expF != 0.0 || expG != 0.0)
      throw NonFiniteValue("free_waves: Coulomb wave evaluation failed or overflowed");
    fw.s = F.val;
    fw.c = G.val;
    fw.s_prime = Fp.val;
    fw.c_prime = Gp.val;
    fw.s_next = F1.val;
    fw.c_next = G1.val;
  }
  if (!(std::isfinite(fw.s) && std::isfinite(fw.c) && std::isfinite(fw.s_prime) &&
        std::isfinite(fw.c_prime)))
    throw NonFiniteValue("free_waves: non-finite reference wave");
  return fw;
}

// Wronskian s c' - s' c; should be -1 in either branch.
inline double free_wave_wronskian(const FreeWave& fw) {
  return fw.s * fw.c_prime - fw.s_prime * fw.c;
}

} // namespace cfm
