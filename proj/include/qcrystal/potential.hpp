#pragma once

/* On-site anharmonic potential V0(x) = sum_{j=2..K} c_j x^j.
 * K even, K >= 4, c_K > 0, so V0 grows at least quartically and admits a
 * witness pair (A, B) with A x^K + B <= V0(x) everywhere. The external field
 * enters the full potential as V(x) = V0(x) - h x; h is kept separately in
 * the model parameters. */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace qcr {

struct Potential {
  // coeff[j] multiplies x^j; entries 0 and 1 are identically zero.
  std::vector<double> coeff;

  Potential() : coeff(5, 0.0) { coeff[4] = 1.0; }

  explicit Potential(std::vector<double> c) : coeff(std::move(c)) {
    if (coeff.size() < 5) coeff.resize(5, 0.0);
  }

  int degree() const { return static_cast<int>(coeff.size()) - 1; }

  double leading() const { return coeff.back(); }

  // Validation errors, empty when the invariants hold.
  std::vector<std::string> validate() const {
    std::vector<std::string> errs;
    const int K = degree();
    if (K < 4) errs.push_back("potential: degree K must be >= 4");
    if (K % 2 != 0) errs.push_back("potential: degree K must be even");
    if (!coeff.empty() && coeff.back() <= 0.0)
      errs.push_back("potential: leading coefficient c_K must be > 0");
    if (coeff.size() >= 2 && (coeff[0] != 0.0 || coeff[1] != 0.0))
      errs.push_back("potential: constant and linear terms must be zero");
    return errs;
  }

  bool valid() const { return validate().empty(); }

  double sum_abs_coeff() const {
    double s = 0.0;
    for (double c : coeff) s += std::fabs(c);
    return s;
  }
};

// V0(x) by Horner evaluation; exact for polynomials.
inline double eval_V0(const Potential& v, double x) {
  double r = 0.0;
  for (int j = v.degree(); j >= 2; --j) r = r * x + v.coeff[j];
  return r * x * x;
}

// Full on-site potential including the external field term.
inline double eval_V(const Potential& v, double h, double x) {
  return eval_V0(v, x) - h * x;
}

struct BoundWitness {
  double A = 0.0;  // coefficient of x^K
  double B = 0.0;  // additive constant
};

/* Witness (A, B) with A x^K + B <= V0(x) for all x. A = c_K/2; B is the grid
 * minimum of V0(x) - A x^K over [-R, R] with 1e5 points. The radius is
 * R = max(10 (1 + sum |c_j|), 1 + 2 sum_{j<K} |c_j| / c_K), which makes the
 * degree-K term dominate outside the grid: for |x| >= R >= 1,
 *   V0(x) - A x^K >= |x|^K (c_K/2 - sum_{j<K} |c_j| / R) >= 0,
 * so the interior grid minimum is global (up to grid resolution). */
inline BoundWitness lower_bound_witness(const Potential& v) {
  if (!v.valid()) throw std::invalid_argument("lower_bound_witness: invalid potential");
  const int K = v.degree();
  BoundWitness w;
  w.A = 0.5 * v.leading();
  double tail = 0.0;
  for (int j = 2; j < K; ++j) tail += std::fabs(v.coeff[j]);
  const double R = std::max(10.0 * (1.0 + v.sum_abs_coeff()),
                            1.0 + 2.0 * tail / v.leading());
  const std::size_t n = 100000;
  double best = 0.0;  // x = 0 is always on the grid conceptually: V0(0)-0 = 0
  for (std::size_t i = 0; i <= n; ++i) {
    const double x = -R + (2.0 * R * static_cast<double>(i)) / static_cast<double>(n);
    const double g = eval_V0(v, x) - w.A * std::pow(x, K);
    if (g < best) best = g;
  }
  w.B = best;
  return w;
}

}  // namespace qcr
