#pragma once

/* Exact single-site reference solver. H = p^2/2m + (a/2) q^2 + V0(q) - h q
 * is assembled in the N lowest eigenstates of the harmonic part (frequency
 * w = sqrt(a/m)) and diagonalized. Position powers are built by repeated
 * multiplication of the tridiagonal q matrix in a padded basis of size N + K
 * and truncated back to N, which keeps the top rows of the retained block
 * exact. All thermal sums are at inverse temperature 1. */

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "qcrystal/model.hpp"

namespace qcr {

struct SpectralOracle {
  int N = 0;
  Eigen::VectorXd energies;  // ascending
  Eigen::MatrixXd q;         // <i|q|j> in the eigenbasis of H
};

inline SpectralOracle build_oracle(const Model& mp, int N = 64) {
  if (N < 8) throw std::invalid_argument("oracle: N must be >= 8");
  const int K = mp.v0.degree();
  const int Npad = N + K;
  const double w = std::sqrt(mp.a / mp.m);

  // q in the harmonic eigenbasis: tridiagonal, <n|q|n+1> = sqrt((n+1)/(2 m w))
  Eigen::MatrixXd qpad = Eigen::MatrixXd::Zero(Npad, Npad);
  const double unit = 1.0 / std::sqrt(2.0 * mp.m * w);
  for (int n = 0; n + 1 < Npad; ++n) {
    const double e = unit * std::sqrt(static_cast<double>(n + 1));
    qpad(n, n + 1) = e;
    qpad(n + 1, n) = e;
  }

  // H = harmonic diagonal + sum_j c_j q^j - h q, powers in the padded basis
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(N, N);
  for (int n = 0; n < N; ++n) H(n, n) = w * (n + 0.5);
  H -= mp.h * qpad.topLeftCorner(N, N);

  Eigen::MatrixXd qpow = qpad;  // q^1
  for (int j = 2; j <= K; ++j) {
    qpow = (qpow * qpad).eval();
    if (mp.v0.coeff[j] != 0.0) H += mp.v0.coeff[j] * qpow.topLeftCorner(N, N);
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  if (es.info() != Eigen::Success) throw std::runtime_error("oracle: diagonalization failed");

  SpectralOracle o;
  o.N = N;
  o.energies = es.eigenvalues();
  o.q = es.eigenvectors().transpose() * qpad.topLeftCorner(N, N) * es.eigenvectors();
  return o;
}

// Z = sum_k exp(-E_k)
inline double partition_function(const SpectralOracle& o) {
  double z = 0.0;
  for (int k = 0; k < o.N; ++k) z += std::exp(-o.energies[k]);
  return z;
}

struct Moments {
  double mean_q = 0.0;
  double mean_q2 = 0.0;
};

inline Moments moments(const SpectralOracle& o) {
  const double z = partition_function(o);
  Moments mo;
  for (int k = 0; k < o.N; ++k) {
    const double wgt = std::exp(-o.energies[k]);
    mo.mean_q += wgt * o.q(k, k);
    double row2 = 0.0;
    for (int j = 0; j < o.N; ++j) row2 += o.q(k, j) * o.q(k, j);
    mo.mean_q2 += wgt * row2;
  }
  mo.mean_q /= z;
  mo.mean_q2 /= z;
  return mo;
}

// Gamma(0, tau) = sum_{k,j} e^{-(1-tau) E_k} e^{-tau E_j} (q_kj)^2 / Z
inline double gamma_exact(const SpectralOracle& o, double tau) {
  if (tau < 0.0 || tau > 1.0) throw std::invalid_argument("gamma_exact: tau outside [0,1]");
  const double z = partition_function(o);
  double g = 0.0;
  for (int k = 0; k < o.N; ++k)
    for (int j = 0; j < o.N; ++j)
      g += std::exp(-(1.0 - tau) * o.energies[k] - tau * o.energies[j]) * o.q(k, j) * o.q(k, j);
  return g / z;
}

/* D = integral of Gamma(0, tau) over tau in [0,1], in closed form:
 * sum_{k,j} (q_kj)^2 (e^{-E_k} - e^{-E_j}) / ((E_j - E_k) Z), degenerate
 * pairs |E_j - E_k| < 1e-12 contributing the limit e^{-E_k}. */
inline double duhamel_exact(const SpectralOracle& o) {
  const double z = partition_function(o);
  double dsum = 0.0;
  for (int k = 0; k < o.N; ++k) {
    const double ek = o.energies[k];
    for (int j = 0; j < o.N; ++j) {
      const double ej = o.energies[j];
      const double q2 = o.q(k, j) * o.q(k, j);
      if (std::fabs(ej - ek) < 1e-12) {
        dsum += q2 * std::exp(-ek);
      } else {
        dsum += q2 * (std::exp(-ek) - std::exp(-ej)) / (ej - ek);
      }
    }
  }
  return dsum / z;
}

/* Convergence gate: largest relative change in (Z, <q>, <q^2>, D) when the
 * basis grows from N to 2N. */
inline double oracle_convergence_delta(const Model& mp, int N = 64) {
  const auto o1 = build_oracle(mp, N);
  const auto o2 = build_oracle(mp, 2 * N);
  const double z1 = partition_function(o1), z2 = partition_function(o2);
  const auto m1 = moments(o1), m2 = moments(o2);
  const double d1 = duhamel_exact(o1), d2 = duhamel_exact(o2);
  auto rel = [](double x, double y) { return std::fabs(x - y) / std::max(1.0, std::fabs(y)); };
  double delta = rel(z1, z2);
  delta = std::max(delta, rel(m1.mean_q, m2.mean_q));
  delta = std::max(delta, rel(m1.mean_q2, m2.mean_q2));
  delta = std::max(delta, rel(d1, d2));
  return delta;
}

}  // namespace qcr
