#pragma once

/* Independent finite-P reference for a single decoupled site (J = 0).
 * The P-slice Gibbs weight factors through the symmetric kernel
 *
 *   K(x, y) = sqrt(m P / (2 pi)) exp(-(m P / 2)(x - y)^2 - (V(x) + V(y)) / (2 P))
 *
 * with V(x) = (a/2) x^2 + V0(x) - h x, so single-site expectations at the
 * same slice count are <f> = Tr(F K^P) / Tr(K^P), F = diag f(x_i). The
 * kernel is discretized on a uniform grid with trapezoid weight dx and
 * diagonalized; powers are taken on eigenvalue ratios to stay in range.
 * This reproduces the sampled measure exactly (up to grid resolution),
 * including its Trotter bias, which makes it a fixed-P cross-check that
 * needs no extrapolation. */

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "qcrystal/model.hpp"
#include "qcrystal/potential.hpp"

namespace tmref {

struct SiteMoments {
  double q1 = 0.0;
  double q2 = 0.0;
  double q4 = 0.0;
};

inline SiteMoments site_moments(const qcr::Model& mp, int n = 500, double xmax = 6.0) {
  if (mp.J != 0.0) throw std::invalid_argument("transfer matrix: J must be 0");
  if (n < 50) throw std::invalid_argument("transfer matrix: grid too small");
  const double dx = 2.0 * xmax / (n - 1);
  const double kin = 0.5 * mp.m * static_cast<double>(mp.P);
  const double norm = std::sqrt(mp.m * mp.P / (2.0 * M_PI));

  std::vector<double> x(n), vpot(n);
  for (int i = 0; i < n; ++i) {
    x[i] = -xmax + i * dx;
    vpot[i] = 0.5 * mp.a * x[i] * x[i] + qcr::eval_V0(mp.v0, x[i]) - mp.h * x[i];
  }

  Eigen::MatrixXd K(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double dxy = x[i] - x[j];
      const double val =
          dx * norm * std::exp(-kin * dxy * dxy - (vpot[i] + vpot[j]) / (2.0 * mp.P));
      K(i, j) = val;
      K(j, i) = val;
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
  if (es.info() != Eigen::Success) throw std::runtime_error("transfer matrix: eigensolver failed");
  const auto& mu = es.eigenvalues();
  const auto& U = es.eigenvectors();
  const double mu_max = mu(n - 1);
  if (mu_max <= 0.0) throw std::runtime_error("transfer matrix: top eigenvalue not positive");

  double z = 0.0, s1 = 0.0, s2 = 0.0, s4 = 0.0;
  for (int t = 0; t < n; ++t) {
    const double w = std::pow(mu(t) / mu_max, mp.P);
    if (std::fabs(w) < 1e-300) continue;
    double g1 = 0.0, g2 = 0.0, g4 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double u2 = U(i, t) * U(i, t);
      g1 += x[i] * u2;
      g2 += x[i] * x[i] * u2;
      g4 += x[i] * x[i] * x[i] * x[i] * u2;
    }
    z += w;
    s1 += w * g1;
    s2 += w * g2;
    s4 += w * g4;
  }
  SiteMoments out;
  out.q1 = s1 / z;
  out.q2 = s2 / z;
  out.q4 = s4 / z;
  return out;
}

}  // namespace tmref
