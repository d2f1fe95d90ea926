#pragma once

/* Full parameter set of the quantum anharmonic crystal: unit mass/rigidity
 * scales m and a, nearest-neighbor coupling J, external field h, the on-site
 * potential, the torus geometry, and the imaginary-time slice count P.
 * Inverse temperature and Planck's constant are fixed at 1. */

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "qcrystal/lattice.hpp"
#include "qcrystal/potential.hpp"

namespace qcr {

struct Model {
  double m = 1.0;  // particle mass
  double a = 1.0;  // harmonic rigidity
  double J = 0.0;  // nn coupling, >= 0
  double h = 0.0;  // external field
  Potential v0;    // anharmonic part
  int d = 1;
  int L = 1;
  int P = 64;      // imaginary-time slices

  bool gaussian() const {
    for (double c : v0.coeff) {
      if (c != 0.0) return false;
    }
    return true;
  }

  Torus torus() const { return Torus(d, L); }

  std::vector<std::string> validate() const {
    std::vector<std::string> errs;
    if (m <= 0.0) errs.push_back("model: m must be > 0");
    if (a <= 0.0) errs.push_back("model: a must be > 0");
    if (J < 0.0) errs.push_back("model: J must be >= 0");
    if (d < 1) errs.push_back("model: d must be >= 1");
    if (L < 1) errs.push_back("model: L must be >= 1");
    if (P < 2) errs.push_back("model: P must be >= 2");
    if (!gaussian()) {
      for (auto& e : v0.validate()) errs.push_back(e);
    } else if (2.0 * d * J >= a) {
      // with V0 = 0 the measure is Gaussian and needs every mode rigidity
      // a - 2 J sum_j cos p_j > 0
      errs.push_back("model: V0 = 0 requires 2*d*J < a (measure not normalizable)");
    }
    return errs;
  }

  // canonical one-line rendering, used for hashing and checkpoint tagging
  std::string canonical() const {
    std::string s = "m=" + format(m) + ";a=" + format(a) + ";J=" + format(J) +
                    ";h=" + format(h) + ";d=" + std::to_string(d) + ";L=" + std::to_string(L) +
                    ";P=" + std::to_string(P) + ";c=";
    for (std::size_t j = 2; j < v0.coeff.size(); ++j) {
      if (j > 2) s += ",";
      s += format(v0.coeff[j]);
    }
    return s;
  }

 private:
  static std::string format(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
  }
};

// FNV-1a over the canonical parameter string
inline std::uint64_t params_hash(const Model& mp) {
  const std::string s = mp.canonical();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace qcr
