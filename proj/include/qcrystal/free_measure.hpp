#pragma once

/* Exact mode-space sampling of the free Gaussian path measure on the unit
 * circle, and of the single-site measure with an on-site potential and
 * external field on top of it.
 *
 * The covariance operator is (-m d^2/dtau^2 + a)^{-1} with periodic
 * boundary, eigenvalues lambda_k = m (2 pi k)^2 + a. A path is synthesized
 * from independent standard normals,
 *
 *   omega(tau) = xi_0 / sqrt(lambda_0)
 *              + sqrt(2) sum_{k=1..K} (xi_k cos 2 pi k tau
 *                                      + eta_k sin 2 pi k tau) / sqrt(lambda_k),
 *
 * truncated at K modes. The variance lost to the tail sum_{|k|>K} 1/lambda_k
 * is restored as independent per-point noise, so the single-point variance
 * equals the closed form coth(omega0/2) / (2 m omega0) exactly. */

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qcrystal/accumulator.hpp"
#include "qcrystal/potential.hpp"
#include "qcrystal/rng.hpp"

namespace qcr {

struct FreeMeasureSampler {
  double m = 1.0;
  double a = 1.0;
  int K_modes = 0;
  double tail_sd = 0.0;
};

inline double free_mode_eigenvalue(double m, double a, int k) {
  const double w = 2.0 * M_PI * static_cast<double>(k);
  return m * w * w + a;
}

// Sum over all modes of 1/lambda_k: the single-point variance
// coth(omega0/2) / (2 m omega0), omega0 = sqrt(a/m)
inline double free_total_variance(double m, double a) {
  const double w0 = std::sqrt(a / m);
  return 1.0 / (std::tanh(0.5 * w0) * 2.0 * m * w0);
}

// Covariance at periodic distance `gap`:
// cosh(omega0 (1/2 - gap)) / (2 m omega0 sinh(omega0 / 2))
inline double free_pair_covariance(double m, double a, double gap) {
  double g = std::fabs(gap);
  g = std::min(g, 1.0 - g);
  const double w0 = std::sqrt(a / m);
  return std::cosh(w0 * (0.5 - g)) / (2.0 * m * w0 * std::sinh(0.5 * w0));
}

// Mode sum truncated at |k| <= K; gap = 0 gives the variance kept by the
// truncated synthesis
inline double free_truncated_covariance(const FreeMeasureSampler& s, double gap) {
  double c = 1.0 / s.a;
  for (int k = 1; k <= s.K_modes; ++k)
    c += 2.0 * std::cos(2.0 * M_PI * k * gap) / free_mode_eigenvalue(s.m, s.a, k);
  return c;
}

inline FreeMeasureSampler make_free_sampler(double m, double a, int K_modes) {
  if (!(m > 0.0) || !(a > 0.0)) throw std::invalid_argument("free sampler: m and a must be > 0");
  if (K_modes < 1) throw std::invalid_argument("free sampler: need at least one mode");
  FreeMeasureSampler s;
  s.m = m;
  s.a = a;
  s.K_modes = K_modes;
  const double lost = free_total_variance(m, a) - free_truncated_covariance(s, 0.0);
  s.tail_sd = std::sqrt(std::max(0.0, lost));
  return s;
}

// default cutoff: four modes per grid point
inline FreeMeasureSampler default_free_sampler(double m, double a, int P) {
  return make_free_sampler(m, a, 4 * P);
}

struct ModeCoeffs {
  double xi0 = 0.0;
  std::vector<double> xc, xs;  // cos / sin coefficients, k = 1..K
};

inline ModeCoeffs sample_free_modes(const FreeMeasureSampler& s, Rng& rng) {
  ModeCoeffs c;
  c.xi0 = rng.normal();
  c.xc.resize(s.K_modes);
  c.xs.resize(s.K_modes);
  for (int k = 0; k < s.K_modes; ++k) {
    c.xc[k] = rng.normal();
    c.xs[k] = rng.normal();
  }
  return c;
}

// truncated synthesis at one point (no tail correction)
inline double free_path_eval(const FreeMeasureSampler& s, const ModeCoeffs& c, double tau) {
  double x = c.xi0 / std::sqrt(s.a);
  const double r2 = std::sqrt(2.0);
  for (int k = 1; k <= s.K_modes; ++k) {
    const double ph = 2.0 * M_PI * k * tau;
    x += r2 * (c.xc[k - 1] * std::cos(ph) + c.xs[k - 1] * std::sin(ph)) /
         std::sqrt(free_mode_eigenvalue(s.m, s.a, k));
  }
  return x;
}

// one path on the P-point grid tau_j = j/P
inline std::vector<double> sample_free_path(const FreeMeasureSampler& s, int P, Rng& rng) {
  if (P < 2) throw std::invalid_argument("free path: need at least two grid points");
  if (s.K_modes < (P + 1) / 2)
    throw std::invalid_argument("free path: mode cutoff below the grid Nyquist index");
  const ModeCoeffs c = sample_free_modes(s, rng);
  std::vector<double> w(static_cast<std::size_t>(P));
  for (int j = 0; j < P; ++j) {
    w[j] = free_path_eval(s, c, static_cast<double>(j) / P);
    if (s.tail_sd > 0.0) w[j] += s.tail_sd * rng.normal();
  }
  return w;
}

// joint draw of (omega(tau), omega(tau2)); coincident points share all noise
inline std::pair<double, double> sample_free_pair(const FreeMeasureSampler& s, double tau,
                                                  double tau2, Rng& rng) {
  const ModeCoeffs c = sample_free_modes(s, rng);
  double x = free_path_eval(s, c, tau);
  double y = (tau == tau2) ? x : free_path_eval(s, c, tau2);
  if (s.tail_sd > 0.0) {
    const double nx = s.tail_sd * rng.normal();
    x += nx;
    y += (tau == tau2) ? nx : s.tail_sd * rng.normal();
  }
  return {x, y};
}

enum class NuMethod { reweight, metropolis };

/* Sample of the single-site measure: free paths carrying importance weights
 * exp(int (h omega - V0(omega)) dtau) (rectangle rule), or a Markov chain
 * targeting the same reweighted law with unit weights. Weights are stored
 * relative to the largest one. */
struct NuRun {
  int P = 0;
  std::size_t n = 0;
  NuMethod method = NuMethod::reweight;
  std::vector<double> paths;    // n x P, row-major
  std::vector<double> weights;  // max entry 1
  double ess = 0.0;
  bool low_ess = false;

  const double* path(std::size_t i) const { return paths.data() + i * static_cast<std::size_t>(P); }
};

namespace detail {

inline double site_log_likelihood(const Potential& v0, double h, const double* w, int P) {
  double s = 0.0;
  for (int j = 0; j < P; ++j) s -= eval_V(v0, h, w[j]);
  return s / static_cast<double>(P);
}

}  // namespace detail

inline NuRun sample_nu_h(const FreeMeasureSampler& s, const Potential& v0, double h, int P,
                         std::size_t n, NuMethod method, Rng& rng, std::size_t burn_in = 200,
                         int thin = 2) {
  bool zero = true;
  for (double c : v0.coeff) zero = zero && c == 0.0;
  if (!zero && !v0.valid()) throw std::invalid_argument("nu_h: invalid potential");
  if (n < 2) throw std::invalid_argument("nu_h: need at least two samples");
  if (thin < 1) throw std::invalid_argument("nu_h: thin must be >= 1");
  NuRun out;
  out.P = P;
  out.n = n;
  out.method = method;
  out.paths.reserve(n * static_cast<std::size_t>(P));
  out.weights.resize(n, 1.0);

  if (method == NuMethod::reweight) {
    std::vector<double> logw(n);
    double wmax = -1e300;
    for (std::size_t i = 0; i < n; ++i) {
      const auto w = sample_free_path(s, P, rng);
      out.paths.insert(out.paths.end(), w.begin(), w.end());
      logw[i] = detail::site_log_likelihood(v0, h, w.data(), P);
      wmax = std::max(wmax, logw[i]);
    }
    double sw = 0.0, sw2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      out.weights[i] = std::exp(logw[i] - wmax);
      sw += out.weights[i];
      sw2 += out.weights[i] * out.weights[i];
    }
    out.ess = sw * sw / sw2;
    out.low_ess = out.ess < 10.0;
    return out;
  }

  // Markov chain over mode coefficients: each coefficient in turn gets a
  // fresh draw from its prior, accepted on the likelihood ratio alone
  if (s.K_modes < (P + 1) / 2)
    throw std::invalid_argument("nu_h: mode cutoff below the grid Nyquist index");
  const int K = s.K_modes;
  std::vector<double> bc(static_cast<std::size_t>(K) * P), bs(static_cast<std::size_t>(K) * P);
  for (int k = 1; k <= K; ++k) {
    const double amp = std::sqrt(2.0 / free_mode_eigenvalue(s.m, s.a, k));
    for (int j = 0; j < P; ++j) {
      const double ph = 2.0 * M_PI * k * j / static_cast<double>(P);
      bc[(k - 1) * static_cast<std::size_t>(P) + j] = amp * std::cos(ph);
      bs[(k - 1) * static_cast<std::size_t>(P) + j] = amp * std::sin(ph);
    }
  }
  ModeCoeffs c;
  c.xi0 = 0.0;
  c.xc.assign(K, 0.0);
  c.xs.assign(K, 0.0);
  std::vector<double> w(static_cast<std::size_t>(P), 0.0);
  double loglike = detail::site_log_likelihood(v0, h, w.data(), P);
  std::vector<double> trial(static_cast<std::size_t>(P));
  const double amp0 = 1.0 / std::sqrt(s.a);

  auto update_coeff = [&](double& coeff, const double* basis) {
    const double fresh = rng.normal();
    const double delta = fresh - coeff;
    for (int j = 0; j < P; ++j) trial[j] = w[j] + delta * basis[j];
    const double cand = detail::site_log_likelihood(v0, h, trial.data(), P);
    if (cand >= loglike || rng.uniform() < std::exp(cand - loglike)) {
      coeff = fresh;
      w.swap(trial);
      loglike = cand;
    }
  };
  std::vector<double> ones(static_cast<std::size_t>(P), amp0);

  const std::size_t total = burn_in + n * static_cast<std::size_t>(thin);
  std::size_t kept = 0;
  for (std::size_t sweep = 0; sweep < total; ++sweep) {
    update_coeff(c.xi0, ones.data());
    for (int k = 0; k < K; ++k) {
      update_coeff(c.xc[k], bc.data() + static_cast<std::size_t>(k) * P);
      update_coeff(c.xs[k], bs.data() + static_cast<std::size_t>(k) * P);
    }
    if (sweep >= burn_in && (sweep - burn_in) % static_cast<std::size_t>(thin) == 0 && kept < n) {
      out.paths.insert(out.paths.end(), w.begin(), w.end());
      ++kept;
    }
  }
  out.n = kept;
  out.weights.resize(kept, 1.0);
  out.ess = static_cast<double>(kept);
  out.low_ess = false;
  return out;
}

struct WeightedStat {
  double value = 0.0;
  double sigma = 0.0;
};

// Weighted mean of a per-path functional. Independent weighted draws get
// the normalized-weight variance estimate; chain output is serially
// correlated, so it goes through the blocking analysis instead.
template <class F>
inline WeightedStat nu_weighted_mean(const NuRun& run, F&& f) {
  WeightedStat out;
  if (run.method == NuMethod::metropolis) {
    std::vector<std::vector<double>> series(1);
    series[0].reserve(run.n);
    for (std::size_t i = 0; i < run.n; ++i) series[0].push_back(f(run.path(i)));
    const Stat st = blocked_stats(series);
    out.value = st.value;
    out.sigma = st.sigma;
    return out;
  }
  double sw = 0.0;
  for (std::size_t i = 0; i < run.n; ++i) sw += run.weights[i];
  if (!(sw > 0.0)) throw std::runtime_error("nu_h statistics: all weights vanished");
  double mean = 0.0;
  for (std::size_t i = 0; i < run.n; ++i) mean += run.weights[i] * f(run.path(i));
  mean /= sw;
  double v = 0.0;
  for (std::size_t i = 0; i < run.n; ++i) {
    const double d = f(run.path(i)) - mean;
    const double wn = run.weights[i] / sw;
    v += wn * wn * d * d;
  }
  out.value = mean;
  out.sigma = std::sqrt(v);
  return out;
}

inline WeightedStat nu_mean_position(const NuRun& run) {
  const int P = run.P;
  return nu_weighted_mean(run, [P](const double* w) {
    double s = 0.0;
    for (int j = 0; j < P; ++j) s += w[j];
    return s / static_cast<double>(P);
  });
}

}  // namespace qcr
