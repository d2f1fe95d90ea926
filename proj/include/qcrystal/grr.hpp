#pragma once

/* Path-regularity diagnostics for the free measure and the single-site
 * measure: grid Holder modulus, even-moment increment bounds, the
 * Garsia-Rodemich-Rumsey expectation bound, well-event probabilities, and
 * the mass threshold assembled from them. */

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "qcrystal/free_measure.hpp"
#include "qcrystal/rng.hpp"

namespace qcr {

struct GrrParams {
  int p = 2;             // even-moment order (moments of order 2p)
  double alpha = 0.5;    // Holder weight exponent, in (0, p-1)
  double theta = 0.25;   // modulus range, multiple of the grid spacing
  int n = 4;             // number of well anchor points
  double c = 1.5;        // well depth threshold, c > sqrt(eps)
  double eps = 1.0;      // floor level is sqrt(eps)
  double varsigma = 0.0; // power-of-two slack in the expectation bound
};

inline void validate_grr(const GrrParams& g) {
  std::vector<std::string> errs;
  if (g.p < 2) errs.push_back("p must be an integer >= 2");
  if (!(g.alpha > 0.0) || !(g.alpha < g.p - 1.0)) errs.push_back("alpha must lie in (0, p-1)");
  if (!(g.theta > 0.0) || !(g.theta < 1.0)) errs.push_back("theta must lie in (0, 1)");
  if (g.n < 2) errs.push_back("n must be >= 2");
  if (!(g.eps > 0.0)) errs.push_back("eps must be > 0");
  if (!(g.c > std::sqrt(std::max(0.0, g.eps)))) errs.push_back("c must exceed sqrt(eps)");
  if (g.varsigma < 0.0) errs.push_back("varsigma must be >= 0");
  if (!errs.empty()) {
    std::string all = "grr params:";
    for (const auto& e : errs) all += " " + e + ";";
    throw std::invalid_argument(all);
  }
}

// moment constant 2^p Gamma(1/2 + p) / Gamma(1/2); equals (2p-1)!!
inline double q_moment_constant(int p) {
  if (p < 1) throw std::invalid_argument("moment constant: p must be >= 1");
  return std::pow(2.0, p) * std::tgamma(0.5 + p) / std::tgamma(0.5);
}

// expectation-bound constant (2^{alpha + 6p + varsigma} / (p - alpha - 1)) (1 + 2/alpha) Q_p
inline double q_grr_constant(const GrrParams& g) {
  validate_grr(g);
  return std::pow(2.0, g.alpha + 6.0 * g.p + g.varsigma) / (g.p - g.alpha - 1.0) *
         (1.0 + 2.0 / g.alpha) * q_moment_constant(g.p);
}

/* Grid Holder modulus: the largest (omega(tau) - omega(tau'))^{2p} /
 * |tau - tau'|_per^alpha over grid pairs at periodic distance in (0, theta].
 * theta must be a grid multiple so the constrained pair set is exactly
 * realizable. */
inline double holder_modulus(const double* w, int P, int p, double alpha, double theta) {
  if (P < 2) throw std::invalid_argument("holder modulus: need at least two grid points");
  const double steps_real = theta * P;
  const int steps = static_cast<int>(std::lround(steps_real));
  if (steps < 1 || std::fabs(steps_real - steps) > 1e-9 * P)
    throw std::invalid_argument("holder modulus: theta must be a positive multiple of 1/P");
  const int maxstep = std::min(steps, P / 2);
  double best = 0.0;
  for (int d = 1; d <= maxstep; ++d) {
    const double dist = static_cast<double>(d) / P;
    const double denom = std::pow(dist, alpha);
    for (int i = 0; i < P; ++i) {
      const int j = (i + d) % P;
      const double diff = w[j] - w[i];
      const double num = std::pow(diff * diff, p);
      if (num > best * denom) best = num / denom;
    }
  }
  return best;
}

inline double holder_modulus(const std::vector<double>& w, int p, double alpha, double theta) {
  return holder_modulus(w.data(), static_cast<int>(w.size()), p, alpha, theta);
}

struct BoundCheck {
  double estimate = 0.0;
  double bound = 0.0;
  double margin = 0.0;  // bound - estimate
  double sigma = 0.0;
  bool pass = false;
};

/* Even increment moments of the free measure against the closed-form cap:
 * E (omega(tau) - omega(tau'))^{2k}  <=  (2k-1)!! m^{-k} |tau - tau'|_per^k. */
inline BoundCheck kolmogorov_moment_check(const FreeMeasureSampler& s, int k, double tau,
                                          double tau2, std::size_t samples, Rng& rng) {
  if (k < 1) throw std::invalid_argument("moment check: k must be >= 1");
  if (samples < 2) throw std::invalid_argument("moment check: need at least two samples");
  double gap = std::fabs(tau - tau2);
  gap = std::min(gap, 1.0 - gap);

  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const auto xy = sample_free_pair(s, tau, tau2, rng);
    const double d2 = (xy.first - xy.second) * (xy.first - xy.second);
    const double v = std::pow(d2, k);
    sum += v;
    sum2 += v * v;
  }
  BoundCheck out;
  out.estimate = sum / static_cast<double>(samples);
  const double var = std::max(0.0, sum2 / samples - out.estimate * out.estimate);
  out.sigma = std::sqrt(var / static_cast<double>(samples));
  out.bound = q_moment_constant(k) / std::pow(s.m, k) * std::pow(gap, k);
  out.margin = out.bound - out.estimate;
  out.pass = out.margin >= -3.0 * out.sigma;
  return out;
}

struct GrrCheck : BoundCheck {
  int recommended_varsigma = 0;  // smallest integer slack that passes
};

namespace detail {

inline GrrCheck finish_grr_check(double estimate, double sigma, const GrrParams& g, double m) {
  GrrCheck out;
  out.estimate = estimate;
  out.sigma = sigma;
  out.bound = q_grr_constant(g) / std::pow(m, g.p) * std::pow(g.theta, g.p - g.alpha);
  out.margin = out.bound - out.estimate;
  out.pass = out.margin >= -3.0 * out.sigma;
  GrrParams trial = g;
  for (int vs = 0; vs <= 64; ++vs) {
    trial.varsigma = vs;
    const double b = q_grr_constant(trial) / std::pow(m, g.p) * std::pow(g.theta, g.p - g.alpha);
    if (b - estimate >= -3.0 * sigma) {
      out.recommended_varsigma = vs;
      return out;
    }
  }
  out.recommended_varsigma = 65;
  return out;
}

}  // namespace detail

// mean Holder modulus of free paths on a P-grid against the expectation bound
inline GrrCheck grr_expectation_check(const FreeMeasureSampler& s, const GrrParams& g, int P,
                                      std::size_t samples, Rng& rng) {
  validate_grr(g);
  if (samples < 2) throw std::invalid_argument("grr check: need at least two samples");
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const auto w = sample_free_path(s, P, rng);
    const double v = holder_modulus(w.data(), P, g.p, g.alpha, g.theta);
    sum += v;
    sum2 += v * v;
  }
  const double est = sum / static_cast<double>(samples);
  const double var = std::max(0.0, sum2 / samples - est * est);
  return detail::finish_grr_check(est, std::sqrt(var / static_cast<double>(samples)), g, s.m);
}

// same bound over a single-site ensemble (weighted or chain output)
inline GrrCheck grr_expectation_check(const NuRun& run, const GrrParams& g, double m) {
  validate_grr(g);
  const int P = run.P;
  const auto st = nu_weighted_mean(
      run, [&](const double* w) { return holder_modulus(w, P, g.p, g.alpha, g.theta); });
  return detail::finish_grr_check(st.value, st.sigma, g, m);
}

/* Probability that the path clears +/- c at all n anchor points j/n.
 * The anchors must lie on the sampling grid. */
inline WeightedStat well_event_probability(const NuRun& run, int n, double c, int sign) {
  if (n < 2) throw std::invalid_argument("well event: n must be >= 2");
  if (sign != 1 && sign != -1) throw std::invalid_argument("well event: sign must be +1 or -1");
  if (run.P % n != 0)
    throw std::invalid_argument("well event: anchor count must divide the grid size");
  const int stride = run.P / n;
  return nu_weighted_mean(run, [&](const double* w) {
    for (int j = 1; j <= n; ++j) {
      const int idx = (j * stride) % run.P;
      if (sign * w[idx] < c) return 0.0;
    }
    return 1.0;
  });
}

// mass threshold: max{ m0, [n (c - sqrt(eps))^2]^{-1} (Q_{p,alpha} / sigma_nc)^{1/p} }
inline double mass_threshold(const GrrParams& g, double sigma_nc, double m0) {
  validate_grr(g);
  if (!(sigma_nc > 0.0)) throw std::invalid_argument("mass threshold: sigma_nc must be > 0");
  const double gap = g.c - std::sqrt(g.eps);
  const double second =
      std::pow(q_grr_constant(g) / sigma_nc, 1.0 / g.p) / (g.n * gap * gap);
  return std::max(m0, second);
}

}  // namespace qcr
