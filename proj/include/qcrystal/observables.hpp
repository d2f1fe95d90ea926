#pragma once

/* Estimators and certificates computed from accumulated measurements:
 * polarization, the Duhamel correlation matrix and its Fourier transform,
 * the infrared and displacement-fluctuation inequalities, the pressure
 * derivative in J with thermodynamic integration, and the condensate
 * fraction proxy with its rigorous lower-bound formula.
 *
 * Every statistical quantity is produced by materializing a per-sample
 * series from the accumulator and blocking it, so linear combinations
 * (Fourier sums) carry exact error propagation; the one nonlinear margin
 * uses a first-order delta method with blocked covariances. */

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcrystal/accumulator.hpp"
#include "qcrystal/lattice.hpp"

namespace qcr {

inline Stat polarization(const Accumulator& acc) { return blocked_stats(acc.series_m()); }

inline Stat second_moment(const Accumulator& acc) { return blocked_stats(acc.series_q2()); }

/* Duhamel correlations per site-offset class: the double time average
 * D_off = <omega_bar_l omega_bar_{l+off}> site-averaged, which the
 * accumulator stores per sample. */
inline std::vector<Stat> duhamel_offsets(const Accumulator& acc) {
  std::vector<Stat> out(acc.volume());
  for (std::size_t off = 0; off < acc.volume(); ++off)
    out[off] = blocked_stats(acc.series_doff(off));
  return out;
}

// cosine transform over offset classes; sine parts cancel exactly because
// the offset estimator is even under off -> -off
inline std::vector<double> fourier_duhamel(const std::vector<double>& D,
                                           const BrillouinZone& zone) {
  const std::size_t V = zone.size();
  if (D.size() != V) throw std::invalid_argument("fourier: offset array has wrong size");
  std::vector<double> out(V, 0.0);
  double scale = 0.0;
  for (double v : D) scale = std::max(scale, std::fabs(v));
  for (std::size_t ip = 0; ip < V; ++ip) {
    const auto& p = zone.momenta[ip];
    double c = 0.0, s = 0.0;
    for (std::size_t off = 0; off < V; ++off) {
      const double phase = dot(p, zone.box.coords(off));
      c += D[off] * std::cos(phase);
      s += D[off] * std::sin(phase);
    }
    if (std::fabs(s) > 1e-10 * (1.0 + scale))
      throw std::runtime_error("fourier: sine part did not cancel (asymmetric input)");
    out[ip] = c;
  }
  return out;
}

inline std::vector<double> inverse_fourier_duhamel(const std::vector<double>& Dhat,
                                                   const BrillouinZone& zone) {
  const std::size_t V = zone.size();
  if (Dhat.size() != V) throw std::invalid_argument("fourier: momentum array has wrong size");
  std::vector<double> out(V, 0.0);
  for (std::size_t off = 0; off < V; ++off) {
    const auto oc = zone.box.coords(off);
    double c = 0.0;
    for (std::size_t ip = 0; ip < V; ++ip) c += Dhat[ip] * std::cos(dot(zone.momenta[ip], oc));
    out[off] = c / static_cast<double>(V);
  }
  return out;
}

// D_hat_p with blocking errors, from the per-sample linear combination
inline std::vector<Stat> fourier_duhamel_stats(const Accumulator& acc,
                                               const BrillouinZone& zone) {
  const std::size_t V = acc.volume();
  if (zone.size() != V) throw std::invalid_argument("fourier: zone does not match accumulator");
  std::vector<Stat> out(V);
  for (std::size_t ip = 0; ip < V; ++ip) {
    const auto& p = zone.momenta[ip];
    std::vector<double> phase(V);
    for (std::size_t off = 0; off < V; ++off) phase[off] = std::cos(dot(p, zone.box.coords(off)));
    auto series = acc.derived([&phase, V](const Segment& s, std::size_t t) {
      double c = 0.0;
      for (std::size_t off = 0; off < V; ++off) c += s.doff[t * V + off] * phase[off];
      return c;
    });
    out[ip] = blocked_stats(series);
  }
  return out;
}

struct InfraredEntry {
  std::size_t p_index = 0;
  double energy = 0.0;  // dispersion E(p)
  Stat dhat;
  double bound = 0.0;   // 1 / (J E(p)), infinite at p = 0
  double margin = 0.0;  // bound - dhat
  bool checked = false; // false at p = 0
};

struct InfraredReport {
  std::vector<InfraredEntry> entries;
  bool pass = true;
  double worst_margin_sigmas = 0.0;  // min over p of margin / sigma
};

/* Certificate: D_hat_p <= 1/(J E(p)) for every p != 0, and positivity of
 * every D_hat_p, both within 3 blocked standard errors. */
inline InfraredReport infrared_check(const Accumulator& acc, const BrillouinZone& zone,
                                     double J) {
  if (J <= 0.0) throw std::invalid_argument("infrared check: requires J > 0");
  const auto dhat = fourier_duhamel_stats(acc, zone);
  InfraredReport rep;
  rep.entries.resize(dhat.size());
  double worst = 1e300;
  for (std::size_t ip = 0; ip < dhat.size(); ++ip) {
    InfraredEntry& e = rep.entries[ip];
    e.p_index = ip;
    e.energy = dispersion(zone.momenta[ip]);
    e.dhat = dhat[ip];
    e.checked = ip != zone.zero_index();
    if (e.dhat.value < -3.0 * e.dhat.sigma) rep.pass = false;  // positivity
    if (!e.checked) continue;
    e.bound = 1.0 / (J * e.energy);
    e.margin = e.bound - e.dhat.value;
    if (e.margin < -3.0 * e.dhat.sigma) rep.pass = false;
    if (e.dhat.sigma > 0.0) worst = std::min(worst, e.margin / e.dhat.sigma);
  }
  rep.worst_margin_sigmas = worst;
  return rep;
}

/* The implicit function f with f(xi tanh xi) = tanh(xi)/xi, f(0) = 1:
 * strictly decreasing from 1 on [0, inf). Solved by bisection on the
 * strictly increasing map xi -> xi tanh xi. */
inline double bruch_falk_f(double u) {
  if (u < 0.0) throw std::invalid_argument("bruch_falk_f: argument must be >= 0");
  if (u == 0.0) return 1.0;
  auto g = [](double xi) { return xi * std::tanh(xi); };
  double lo = 0.0, hi = 1.0;
  while (g(hi) < u) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (std::fabs(gm - u) < 1e-15 * (1.0 + u)) {
      lo = hi = mid;
      break;
    }
    (gm < u ? lo : hi) = mid;
  }
  const double xi = 0.5 * (lo + hi);
  return std::tanh(xi) / xi;
}

// lower-bound margin D_ll - q2 f(1/(4 m q2)); nonnegative for the thermal
// state of any single-site Hamiltonian with kinetic term p^2/2m
inline double bruch_falk_margin(double D_ll, double q2, double m) {
  if (q2 <= 0.0) throw std::invalid_argument("displacement bound: q2 must be > 0");
  return D_ll - q2 * bruch_falk_f(1.0 / (4.0 * m * q2));
}

struct MarginReport {
  double value = 0.0;   // left-hand side D_ll
  double rhs = 0.0;     // q2 f(1/(4 m q2))
  double margin = 0.0;  // value - rhs
  double sigma = 0.0;   // delta-method error of the margin
  bool pass = false;    // margin >= -3 sigma
};

inline MarginReport bruch_falk_check(const Accumulator& acc, const Torus& box, double m) {
  // on-site Duhamel correlation: the zero-offset entry, not array slot 0
  const auto d_series = acc.series_doff(box.index(std::vector<int>(box.d, 0)));
  const auto q_series = acc.series_q2();
  const Stat d0 = blocked_stats(d_series);
  const Stat q2 = blocked_stats(q_series);
  if (q2.value <= 0.0) throw std::invalid_argument("displacement bound: q2 must be > 0");

  const double u = 1.0 / (4.0 * m * q2.value);
  const double f = bruch_falk_f(u);
  const double eps = 1e-6 * (1.0 + u);
  const double fprime = (bruch_falk_f(u + eps) - bruch_falk_f(std::max(0.0, u - eps))) /
                        (eps + std::min(u, eps));
  // d/dq2 [q2 f(u(q2))] with u = 1/(4 m q2): f(u) - u f'(u)
  const double g_q2 = -(f - u * fprime);

  const std::size_t block = std::max(d0.block, q2.block);
  const double var_d = blocked_cov(d_series, d_series, block);
  const double var_q = blocked_cov(q_series, q_series, block);
  const double cov_dq = blocked_cov(d_series, q_series, block);
  const double var =
      std::max(0.0, var_d + g_q2 * g_q2 * var_q + 2.0 * g_q2 * cov_dq);

  MarginReport rep;
  rep.value = d0.value;
  rep.rhs = q2.value * f;
  rep.margin = rep.value - rep.rhs;
  rep.sigma = std::sqrt(var);
  rep.pass = rep.margin >= -3.0 * rep.sigma;
  return rep;
}

struct PressureDerivative {
  Stat dpdJ;          // bond sum per site of the equal-time correlator
  Stat bound_margin;  // d <q2> - dp/dJ, blocked on the per-sample difference
  bool bound_pass = false;
};

inline PressureDerivative pressure_derivative(const Accumulator& acc, int d) {
  PressureDerivative out;
  out.dpdJ = blocked_stats(acc.series_nn());
  auto margin_series = acc.derived([d](const Segment& s, std::size_t t) {
    return static_cast<double>(d) * s.q2[t] - s.nn[t];
  });
  out.bound_margin = blocked_stats(margin_series);
  out.bound_pass = out.bound_margin.value >= -3.0 * out.bound_margin.sigma;
  return out;
}

struct ThermoIntegral {
  double value = 0.0;  // p(J_max, h) - p(0, h)
  double sigma = 0.0;
  bool monotone_pass = true;   // integrand nondecreasing within error
  bool convexity_pass = true;  // value <= J_max * last integrand + error
};

/* Trapezoid integration of dp/dJ over an ascending grid starting at 0.
 * Convexity of the pressure in J makes the integrand nondecreasing and
 * bounds the integral by J_max times the final derivative. */
inline ThermoIntegral thermo_integrate(const std::vector<double>& J_grid,
                                       const std::vector<Stat>& deriv) {
  if (J_grid.size() != deriv.size())
    throw std::invalid_argument("thermo integrate: grid and values differ in length");
  if (J_grid.size() < 3) throw std::invalid_argument("thermo integrate: need >= 3 points");
  if (J_grid.front() != 0.0) throw std::invalid_argument("thermo integrate: grid must start at 0");
  for (std::size_t i = 1; i < J_grid.size(); ++i)
    if (J_grid[i] <= J_grid[i - 1])
      throw std::invalid_argument("thermo integrate: grid must be strictly ascending");

  ThermoIntegral out;
  std::vector<double> w(J_grid.size(), 0.0);
  for (std::size_t i = 0; i + 1 < J_grid.size(); ++i) {
    const double half = 0.5 * (J_grid[i + 1] - J_grid[i]);
    w[i] += half;
    w[i + 1] += half;
  }
  double var = 0.0;
  for (std::size_t i = 0; i < J_grid.size(); ++i) {
    out.value += w[i] * deriv[i].value;
    var += w[i] * w[i] * deriv[i].sigma * deriv[i].sigma;
  }
  out.sigma = std::sqrt(var);

  for (std::size_t i = 0; i + 1 < deriv.size(); ++i) {
    const double sc = std::sqrt(deriv[i].sigma * deriv[i].sigma +
                                deriv[i + 1].sigma * deriv[i + 1].sigma);
    if (deriv[i + 1].value < deriv[i].value - 3.0 * sc) out.monotone_pass = false;
  }
  const double cap = J_grid.back() * deriv.back().value;
  const double cap_sigma = J_grid.back() * deriv.back().sigma;
  out.convexity_pass = out.value <= cap + 3.0 * std::sqrt(cap_sigma * cap_sigma +
                                                          out.sigma * out.sigma);
  return out;
}

// condensate fraction proxy: the p = 0 Duhamel weight per site
inline Stat kappa_estimate(const Accumulator& acc) {
  const std::size_t V = acc.volume();
  auto series = acc.derived([V](const Segment& s, std::size_t t) {
    double c = 0.0;
    for (std::size_t off = 0; off < V; ++off) c += s.doff[t * V + off];
    return c / static_cast<double>(V);
  });
  return blocked_stats(series);
}

/* Rigorous condensate lower bound (eps - delta/J) f(J / (4 m_star (eps J -
 * delta))) - W_d / J, where W_d is the lattice Green integral. Positive
 * values certify long-range order at the given parameters. */
inline double kappa_lower_bound(double J, double m_star, double eps, double delta, double W_d) {
  if (eps <= 0.0 || m_star <= 0.0) throw std::invalid_argument("kappa bound: need eps, m_star > 0");
  if (J * eps <= delta) throw std::invalid_argument("kappa bound: requires J > delta/eps");
  const double theta = bruch_falk_f(J / (4.0 * m_star * (eps * J - delta)));
  return (eps - delta / J) * theta - W_d / J;
}

struct JStarResult {
  bool found = false;
  double j_star = 0.0;  // smallest grid J with a positive bound
};

inline JStarResult find_j_star(double m_star, double eps, double delta, double W_d,
                               const std::vector<double>& J_grid) {
  JStarResult out;
  for (double J : J_grid) {
    if (J * eps <= delta) continue;
    if (kappa_lower_bound(J, m_star, eps, delta, W_d) > 0.0) {
      out.found = true;
      out.j_star = J;
      return out;
    }
  }
  return out;
}

}  // namespace qcr
