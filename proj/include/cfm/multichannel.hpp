#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cfm/bound.hpp"
#include "cfm/errors.hpp"
#include "cfm/integrate.hpp"
#include "cfm/potential.hpp"
#include "cfm/rootfind.hpp"

namespace cfm {

// N-channel bound states for a factored matrix potential V(r) = C * M(r)
// with a constant symmetric coupling matrix C and a scalar radial factor
// M(r).  The canonical matrices alpha, beta (alpha(r0) = I, beta'(r0) = I,
// alpha'(r0) = beta(r0) = 0) are propagated column-wise with a shared step
// sequence; the matching matrix is L(E, r) = beta^-1 alpha and eigenvalues
// are the zeros of D(E) = det(L(E, 0) - L(E, inf)).

// Optional per-channel threshold offsets shift channel i by thresholds[i]
// (empty vector means all zero).
struct MatrixPotential {
  Eigen::MatrixXd coupling;
  PotentialPtr radial;
  Eigen::VectorXd thresholds;

  int size() const { return static_cast<int>(coupling.rows()); }
  Eigen::MatrixXd value(double r) const {
    Eigen::MatrixXd v = coupling * radial->value(r);
    if (thresholds.size() == coupling.rows()) v += thresholds.asDiagonal();
    return v;
  }
};

struct ChannelMatrices {
  double r = 0.0;
  double r0 = 0.0;
  Eigen::MatrixXd alpha, alpha_prime, beta, beta_prime;
  double log10_scale = 0.0;
};

struct ChannelReport {
  ChannelMatrices cm;
  long steps = 0;
  bool saturated = false;
  bool hit_endpoint = false;
  Eigen::MatrixXd L;       // beta^-1 alpha at the stop radius
  double cond_beta = 0.0;  // condition estimate of beta there
  double log10_scale = 0.0;
};

struct MultichannelProblem {
  MatrixPotential pot;
  double c = 1.0;  // hbar^2 / 2mu in working units
  double r0 = 1.0;
  Tolerances tol;
  double r_cap = 0.0;  // 0 means 1e4 * max(1, r0)
  double root_tol = 1e-12;
  int saturation_run = 5;
  long max_steps = 2'000'000;
};

namespace detail {

// L = beta^-1 alpha by solving the linear system; refuses a beta whose
// condition exceeds 1 / (100 eps).
inline Eigen::MatrixXd matching_matrix(const Eigen::MatrixXd& alpha, const Eigen::MatrixXd& beta,
                                       double* cond_out) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(beta);
  double rc = lu.rcond();
  if (cond_out) *cond_out = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
  if (!(rc > 100.0 * std::numeric_limits<double>::epsilon()))
    throw SingularBeta("matching_matrix: beta numerically singular at evaluation radius");
  return lu.solve(alpha);
}

} // namespace detail

// Propagate the canonical matrices from r0 in `direction` (+1/-1).  The
// inward run lands exactly on a finite regular domain edge (the factored
// benchmark is Dirichlet at r = 0); otherwise the run ends when L(E, r)
// stabilizes over `saturation_run` consecutive steps.
inline ChannelReport propagate_channels(const MultichannelProblem& mp, double E, int direction) {
  const int N = mp.pot.size();
  const RadialPotential& rad = *mp.pot.radial;
  const Tolerances& tol = mp.tol;
  const bool inward = direction < 0;
  const double r_cap = mp.r_cap > 0.0 ? mp.r_cap : 1e4 * std::max(1.0, mp.r0);
  const bool finite_edge = inward && !rad.singular_at_rmin && std::isfinite(rad.domain_min);
  const int n_max = tol.max_order;

  // Dissociation scale for the outward cutoff gate: distance from E to the
  // nearest channel threshold (thresholds default to the factor's own tail).
  double e_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < N; ++i) {
    double thr = mp.pot.thresholds.size() == N ? mp.pot.thresholds[i] : 0.0;
    e_gap = std::min(e_gap, std::abs(E - thr - mp.pot.coupling(i, i) * rad.tail.D));
  }
  const double norm_c = mp.pot.coupling.cwiseAbs().maxCoeff();

  ChannelReport rep;
  ChannelMatrices& cm = rep.cm;
  cm.r = cm.r0 = mp.r0;
  cm.alpha = Eigen::MatrixXd::Identity(N, N);
  cm.alpha_prime = Eigen::MatrixXd::Zero(N, N);
  cm.beta = Eigen::MatrixXd::Zero(N, N);
  cm.beta_prime = Eigen::MatrixXd::Identity(N, N);

  // Y0 = [alpha beta], Y1 = [alpha' beta'] share every step.
  std::vector<Eigen::MatrixXd> C(static_cast<size_t>(n_max + 1));
  std::vector<double> norms(static_cast<size_t>(n_max + 1));
  Eigen::MatrixXd Y0(N, 2 * N), Y1(N, 2 * N), S(N, 2 * N), acc(N, 2 * N), dacc(N, 2 * N);

  double h_trial = 0.1;
  Eigen::MatrixXd L_prev;
  int run = 0;

  for (long step = 0; step < mp.max_steps; ++step) {
    double hint = rad.max_step_hint(cm.r);
    double s = std::max(std::min({h_trial, hint, tol.max_step}), 1e-280);
    Series g = rad.taylor(cm.r, n_max, s);
    int gmax = g.order();

    Y0.leftCols(N) = cm.alpha;
    Y0.rightCols(N) = cm.beta;
    Y1.leftCols(N) = cm.alpha_prime;
    Y1.rightCols(N) = cm.beta_prime;

    // Matrix lift of the scalar coefficient recursion in t = (r' - r)/s:
    //   (n+2)(n+1) C_{n+2} = s^2 [ Ccoup sum_m (g_{n-m}/c) C_m
    //                              + (diag(thr)/c - E/c) C_n ]
    const double s2 = s * s;
    C[0] = Y0;
    C[1] = Y1 * s;
    for (int n = 0; n + 2 <= n_max; ++n) {
      int mmax = std::min(n, gmax);
      S.setZero();
      for (int m = n - mmax; m <= n; ++m) S += (g[n - m] / mp.c) * C[static_cast<size_t>(m)];
      S = mp.pot.coupling * S;
      if (mp.pot.thresholds.size() == N)
        S += (mp.pot.thresholds / mp.c).asDiagonal() * C[static_cast<size_t>(n)];
      S -= (E / mp.c) * C[static_cast<size_t>(n)];
      C[static_cast<size_t>(n + 2)] = (s2 / ((n + 2.0) * (n + 1.0))) * S;
    }
    for (int n = 0; n <= n_max; ++n) {
      norms[static_cast<size_t>(n)] = C[static_cast<size_t>(n)].cwiseAbs().maxCoeff();
      if (!std::isfinite(norms[static_cast<size_t>(n)]))
        throw NonFiniteCoefficient("propagate_channels: non-finite series coefficient");
    }
    double scale = std::max({1.0, norms[0], norms[1]});
    detail::StepChoice sc =
        detail::choose_order_and_step(norms.data(), n_max, h_trial / s, tol.truncation_error, scale);
    double h = std::min({sc.h * s, tol.max_step, hint});
    if (!std::isfinite(h)) h = std::max(1.0, 0.5 * std::abs(cm.r));
    bool landing = false;
    if (finite_edge) {
      double dist = cm.r - rad.domain_min;
      if (h >= dist) {
        h = dist;
        landing = true;
      }
    }
    if (!landing && h < tol.min_step)
      throw StepUnderflow("propagate_channels: step below h_min before saturation");
    double ht = direction * h / s;

    // Horner on matrix coefficients, value and t-derivative together.
    acc = C[static_cast<size_t>(sc.order)];
    dacc = static_cast<double>(sc.order) * C[static_cast<size_t>(sc.order)];
    for (int n = sc.order - 1; n >= 1; --n) {
      acc = acc * ht + C[static_cast<size_t>(n)];
      dacc = dacc * ht + static_cast<double>(n) * C[static_cast<size_t>(n)];
    }
    acc = acc * ht + C[0];

    cm.alpha = acc.leftCols(N);
    cm.beta = acc.rightCols(N);
    cm.alpha_prime = dacc.leftCols(N) / s;
    cm.beta_prime = dacc.rightCols(N) / s;
    cm.r += direction * h;
    h_trial = h;
    rep.steps = step + 1;

    double m = std::max(std::max(cm.alpha.cwiseAbs().maxCoeff(), cm.beta.cwiseAbs().maxCoeff()),
                        std::max(cm.alpha_prime.cwiseAbs().maxCoeff(),
                                 cm.beta_prime.cwiseAbs().maxCoeff()));
    if (!std::isfinite(m)) throw NonFiniteValue("propagate_channels: solution overflow");
    if (m > detail::kRescaleAt) {
      double f = 1.0 / m;
      cm.alpha *= f;
      cm.alpha_prime *= f;
      cm.beta *= f;
      cm.beta_prime *= f;
      cm.log10_scale += std::log10(m);
    }

    if (landing) {
      rep.hit_endpoint = true;
      rep.saturated = true;
      break;
    }

    // L stabilization; skipped silently while beta is still singular (it
    // starts at zero and passes through singular radii).
    bool l_ok = false;
    Eigen::MatrixXd L;
    try {
      L = detail::matching_matrix(cm.alpha, cm.beta, nullptr);
      l_ok = L.allFinite();
    } catch (const SingularBeta&) {
    }
    if (l_ok && L_prev.size() == L.size() &&
        (L - L_prev).cwiseAbs().maxCoeff() <=
            tol.stability_error * std::max(1.0, L.cwiseAbs().maxCoeff()))
      ++run;
    else
      run = 0;
    if (l_ok) L_prev = L;

    bool gate = true;
    if (!inward) {
      double vdist = norm_c * std::abs(rad.value(cm.r) - rad.tail.D);
      gate = vdist <= 1e-3 * e_gap;
    }
    if (run >= mp.saturation_run && gate) {
      rep.saturated = true;
      break;
    }
    if (!inward && cm.r > r_cap)
      throw NoSaturation("propagate_channels: L not saturated before r_cap");
  }
  if (!rep.saturated) throw NoSaturation("propagate_channels: step budget exhausted");
  rep.L = detail::matching_matrix(cm.alpha, cm.beta, &rep.cond_beta);
  rep.log10_scale = cm.log10_scale;
  if (!rep.L.allFinite()) throw NonFiniteValue("propagate_channels: matching matrix not finite");
  return rep;
}

// D(E) = det(L(E, 0) - L(E, inf)): tan-like in E, vanishing on the coupled
// spectrum.
inline double determinant_function(const MultichannelProblem& mp, double E) {
  ChannelReport in = propagate_channels(mp, E, -1);
  ChannelReport out = propagate_channels(mp, E, +1);
  return (in.L - out.L).determinant();
}

// Grid scan of D(E) with the same pole/root discrimination as the scalar
// eigenvalue function.
inline Spectrum scan_channel_spectrum(const MultichannelProblem& mp,
                                      const std::vector<double>& grid, bool parallel = true) {
  auto D = [&mp](double E) { return determinant_function(mp, E); };
  ScanResult sr = scan_for_roots(D, grid, mp.root_tol, parallel, /*classify_poles=*/true);
  Spectrum sp;
  sp.poles_skipped = sr.poles_skipped;
  sp.failed_points = sr.failed_points;
  for (const BracketedRoot& r : sr.roots) {
    sp.energies.push_back(r.x);
    sp.residuals.push_back(r.f);
  }
  return sp;
}

// ------------------------------------------------------------ decoupling

struct Decoupling {
  Eigen::VectorXd g;  // eigenvalues of the coupling matrix, ascending
  Eigen::MatrixXd q;  // C = q diag(g) q^-1 (orthogonal for symmetric C)
};

inline Decoupling similarity_decouple(const Eigen::MatrixXd& C) {
  Decoupling d;
  double asym = (C - C.transpose()).cwiseAbs().maxCoeff();
  if (asym <= 1e-12 * std::max(1.0, C.cwiseAbs().maxCoeff())) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
    d.g = es.eigenvalues();
    d.q = es.eigenvectors();
    return d;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(C);
  double imag = es.eigenvalues().imag().cwiseAbs().maxCoeff();
  if (imag > 1e-10 * std::max(1.0, es.eigenvalues().real().cwiseAbs().maxCoeff()))
    throw ComplexSpectrum("similarity_decouple: coupling matrix has complex eigenvalues");
  // sort ascending by real part
  int n = static_cast<int>(C.rows());
  std::vector<int> idx(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<size_t>(i)] = i;
  Eigen::VectorXd ev = es.eigenvalues().real();
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return ev[a] < ev[b]; });
  d.g.resize(n);
  d.q.resize(n, n);
  for (int i = 0; i < n; ++i) {
    d.g[i] = ev[idx[static_cast<size_t>(i)]];
    d.q.col(i) = es.eigenvectors().col(idx[static_cast<size_t>(i)]).real();
  }
  return d;
}

// Scalar factor multiplied by a constant strength: the decoupled channel
// potential g_i * M(r).
class StrengthScaledPotential final : public RadialPotential {
public:
  StrengthScaledPotential(PotentialPtr base, double g) : base_(std::move(base)), g_(g) {
    l = base_->l;
    tail.D = g * base_->tail.D;
    tail.n = base_->tail.n;
    tail.C = g * base_->tail.C;
    domain_min = base_->domain_min;
    domain_max = base_->domain_max;
    singular_at_rmin = base_->singular_at_rmin;
    name = base_->name + "-strength";
  }
  double value(double r) const override { return g_ * base_->value(r); }
  Series taylor(double center, int order, double scale = 1.0) const override {
    Series s = base_->taylor(center, order, scale);
    s *= g_;
    return s;
  }
  double max_step_hint(double r) const override { return base_->max_step_hint(r); }

private:
  PotentialPtr base_;
  double g_;
};

inline PotentialPtr scale_strength(PotentialPtr base, double g) {
  return std::make_shared<StrengthScaledPotential>(std::move(base), g);
}

// Union property: for V = C M(r) the coupled spectrum is the multiset
// union of the scalar spectra of g_i M(r).  Each scalar channel is solved
// on the same grid with the `bound` machinery.
inline std::vector<double> decoupled_union_spectrum(const MultichannelProblem& mp,
                                                    const std::vector<double>& grid) {
  // A non-uniform threshold diagonal does not commute with the coupling,
  // so exact decoupling requires uniform (or absent) thresholds.
  double thr0 = 0.0;
  if (mp.pot.thresholds.size() == mp.pot.coupling.rows()) {
    thr0 = mp.pot.thresholds[0];
    if ((mp.pot.thresholds.array() - thr0).abs().maxCoeff() > 0.0)
      throw ConfigError("decoupled_union_spectrum: thresholds must be uniform for decoupling");
  }
  Decoupling d = similarity_decouple(mp.pot.coupling);
  std::vector<double> shifted = grid;
  for (double& e : shifted) e -= thr0;
  std::vector<double> all;
  for (int i = 0; i < d.g.size(); ++i) {
    BoundProblem pb;
    pb.pot = scale_strength(mp.pot.radial, d.g[i]);
    pb.c = mp.c;
    pb.r0 = mp.r0;
    pb.tol = mp.tol;
    pb.r_cap = mp.r_cap;
    pb.root_tol = mp.root_tol;
    pb.saturation_run = mp.saturation_run;
    if (!mp.pot.radial->singular_at_rmin) pb.inner = BoundaryKind::Dirichlet;
    Spectrum sp = scan_spectrum(pb, shifted, /*parallel=*/false);
    for (double e : sp.energies) all.push_back(e + thr0);
  }
  std::sort(all.begin(), all.end());
  return all;
}

} // namespace cfm
