#pragma once

/* The d-dimensional torus (-L, L]^d with (2L)^d sites, periodic distance, the
 * nearest-neighbor structure, and the matching Brillouin zone. Sites are
 * indexed linearly, axis 0 fastest; coordinates live in {-L+1, ..., L}. */

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace qcr {

struct Torus {
  int d = 1;
  int L = 1;

  Torus() = default;
  Torus(int d_, int L_) : d(d_), L(L_) {
    if (d < 1) throw std::invalid_argument("torus: d must be >= 1");
    if (L < 1) throw std::invalid_argument("torus: L must be >= 1");
  }

  int side() const { return 2 * L; }

  std::size_t volume() const {
    std::size_t v = 1;
    for (int j = 0; j < d; ++j) v *= static_cast<std::size_t>(side());
    return v;
  }

  // site index -> coordinates in {-L+1..L}
  std::vector<int> coords(std::size_t site) const {
    std::vector<int> c(d);
    for (int j = 0; j < d; ++j) {
      c[j] = static_cast<int>(site % side()) - (L - 1);
      site /= side();
    }
    return c;
  }

  std::size_t index(const std::vector<int>& c) const {
    std::size_t site = 0;
    for (int j = d - 1; j >= 0; --j) {
      int m = ((c[j] + L - 1) % side() + side()) % side();
      site = site * side() + static_cast<std::size_t>(m);
    }
    return site;
  }

  // site shifted by +/- 1 along axis, with periodic wrap
  std::size_t step(std::size_t site, int axis, int dir) const {
    std::size_t stride = 1;
    for (int j = 0; j < axis; ++j) stride *= static_cast<std::size_t>(side());
    const std::size_t m = (site / stride) % side();
    const std::size_t m2 = (m + static_cast<std::size_t>(side() + dir)) % side();
    return site + (m2 - m) * stride;
  }

  // periodic one-axis distance between coordinate values
  int axis_distance(int x, int y) const {
    int diff = std::abs(x - y) % side();
    return std::min(diff, side() - diff);
  }

  // |l - l'|_Lambda = sum_j min(|l_j - l'_j|, 2L - |l_j - l'_j|)
  int distance(std::size_t s1, std::size_t s2) const {
    const auto a = coords(s1), b = coords(s2);
    int dist = 0;
    for (int j = 0; j < d; ++j) dist += axis_distance(a[j], b[j]);
    return dist;
  }
};

/* The 2d nearest neighbors of a site, axis-major, minus direction before
 * plus. On an L=1 torus the two axis neighbors coincide; the duplicate entry
 * is intentional (double bond, flagged at the reporting layer). */
inline std::vector<std::size_t> neighbors(const Torus& box, std::size_t site) {
  std::vector<std::size_t> out;
  out.reserve(2 * static_cast<std::size_t>(box.d));
  for (int j = 0; j < box.d; ++j) {
    out.push_back(box.step(site, j, -1));
    out.push_back(box.step(site, j, +1));
  }
  return out;
}

/* Directed bond list: one entry (site, site + e_axis) per site and axis.
 * For L >= 2 this enumerates each unordered nearest-neighbor pair exactly
 * once; for L = 1 it yields the doubled bonds matching the neighbor table. */
struct Bond {
  std::size_t s1, s2;
};

inline std::vector<Bond> bonds(const Torus& box) {
  std::vector<Bond> out;
  out.reserve(box.volume() * static_cast<std::size_t>(box.d));
  for (std::size_t s = 0; s < box.volume(); ++s)
    for (int j = 0; j < box.d; ++j) out.push_back({s, box.step(s, j, +1)});
  return out;
}

/* Brillouin zone on the torus: all d-tuples with components
 * p_j = -pi + (pi/L) s_j, s_j = 1..2L. Contains p = 0, has (2L)^d points,
 * and is symmetric under p -> -p modulo 2 pi. Momenta are stored in the same
 * linear order as sites, so momentum index m has components indexed by the
 * site coordinate machinery. */
struct BrillouinZone {
  Torus box;
  std::vector<std::vector<double>> momenta;

  explicit BrillouinZone(const Torus& b) : box(b) {
    momenta.resize(box.volume());
    const double step = M_PI / static_cast<double>(box.L);
    for (std::size_t i = 0; i < box.volume(); ++i) {
      const auto c = box.coords(i);
      std::vector<double> p(box.d);
      // coordinate value in {-L+1..L} maps to s in {1..2L} via s = c + L
      for (int j = 0; j < box.d; ++j) p[j] = -M_PI + step * static_cast<double>(c[j] + box.L);
      momenta[i] = p;
    }
  }

  std::size_t size() const { return momenta.size(); }

  // index of p = 0 (component value c = 0 on every axis)
  std::size_t zero_index() const {
    std::vector<int> c(box.d, 0);
    return box.index(c);
  }
};

// E(p) = sum_j (1 - cos p_j)
inline double dispersion(const std::vector<double>& p) {
  double e = 0.0;
  for (double pj : p) e += 1.0 - std::cos(pj);
  return e;
}

// p . offset, offset given as torus coordinates
inline double dot(const std::vector<double>& p, const std::vector<int>& offset) {
  double s = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) s += p[j] * static_cast<double>(offset[j]);
  return s;
}

}  // namespace qcr
