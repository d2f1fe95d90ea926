#pragma once

/* Measurement storage and blocking (binning) error analysis. Raw
 * per-measurement series are kept per chain so that error estimates never
 * mix samples across chain boundaries; estimates for derived quantities are
 * built by materializing a derived series and blocking it. Block size
 * doubles until the variance estimate plateaus. */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace qcr {

struct Stat {
  double value = 0.0;
  double sigma = 0.0;
  double tau_int = 0.5;  // integrated autocorrelation estimate
  std::size_t n = 0;
  std::size_t block = 1;  // block size the error was read off at
  bool plateaued = true;
};

/* Blocking over per-chain series: block size doubles while at least 16
 * blocks remain; the reported sigma is the first plateau (growth < 2% on
 * doubling) or the largest-block estimate if no plateau is reached. */
inline Stat blocked_stats(const std::vector<std::vector<double>>& chains) {
  Stat st;
  std::size_t total = 0;
  double sum = 0.0;
  for (const auto& c : chains) {
    total += c.size();
    for (double x : c) sum += x;
  }
  if (total < 2) throw std::runtime_error("blocked_stats: need at least 2 samples");
  st.n = total;
  st.value = sum / static_cast<double>(total);

  double sigma_naive = 0.0;
  double sigma_prev = 0.0;
  bool have_prev = false;
  st.plateaued = false;
  for (std::size_t b = 1;; b *= 2) {
    // block means, never straddling a chain boundary
    double bsum = 0.0, bsum2 = 0.0;
    std::size_t nb = 0;
    for (const auto& c : chains) {
      const std::size_t k = c.size() / b;
      for (std::size_t i = 0; i < k; ++i) {
        double s = 0.0;
        for (std::size_t t = i * b; t < (i + 1) * b; ++t) s += c[t];
        const double bm = s / static_cast<double>(b);
        bsum += bm;
        bsum2 += bm * bm;
        ++nb;
      }
    }
    if (nb < 16 && have_prev) break;
    if (nb < 2) break;
    const double mean_b = bsum / static_cast<double>(nb);
    const double var_b = std::max(0.0, (bsum2 - static_cast<double>(nb) * mean_b * mean_b) /
                                           static_cast<double>(nb - 1));
    const double sig = std::sqrt(var_b / static_cast<double>(nb));
    if (b == 1) sigma_naive = sig;
    if (have_prev && sig <= sigma_prev * 1.02) {
      st.sigma = std::max(sig, sigma_prev);
      st.block = b;
      st.plateaued = true;
      break;
    }
    sigma_prev = sig;
    have_prev = true;
    st.sigma = sig;
    st.block = b;
  }
  if (sigma_naive > 0.0) {
    const double r = st.sigma / sigma_naive;
    st.tau_int = std::max(0.5, 0.5 * r * r);
  }
  return st;
}

/* Covariance of two equal-shape series at a given block size, for the
 * delta-method propagation through nonlinear functions. */
inline double blocked_cov(const std::vector<std::vector<double>>& xa,
                          const std::vector<std::vector<double>>& xb, std::size_t block) {
  double sa = 0.0, sb = 0.0, sab = 0.0;
  std::size_t nb = 0;
  for (std::size_t c = 0; c < xa.size(); ++c) {
    const std::size_t k = xa[c].size() / block;
    for (std::size_t i = 0; i < k; ++i) {
      double ma = 0.0, mb = 0.0;
      for (std::size_t t = i * block; t < (i + 1) * block; ++t) {
        ma += xa[c][t];
        mb += xb[c][t];
      }
      ma /= static_cast<double>(block);
      mb /= static_cast<double>(block);
      sa += ma;
      sb += mb;
      sab += ma * mb;
      ++nb;
    }
  }
  if (nb < 2) return 0.0;
  const double n = static_cast<double>(nb);
  return (sab - sa * sb / n) / ((n - 1.0) * n);
}

/* One chain's stored measurement history. doff is flattened row-major
 * (measurement, offset class); glag likewise over slice lags when enabled. */
struct Segment {
  std::uint64_t chain = 0;
  std::vector<double> m;       // site mean of omega(0)
  std::vector<double> q2;      // site+slice mean of omega^2
  std::vector<double> nn;      // bond sum of slice-averaged products / |Lambda|
  std::vector<double> action;  // total action at measurement time
  std::vector<double> doff;    // time-averaged field autocorrelation per offset
  std::vector<double> glag;    // on-site slice-lag correlation (optional)
  std::size_t n = 0;
};

class Accumulator {
 public:
  Accumulator() = default;
  Accumulator(std::size_t volume, int slices, bool with_gamma)
      : volume_(volume), slices_(slices), with_gamma_(with_gamma) {}

  std::size_t volume() const { return volume_; }
  int slices() const { return slices_; }
  bool with_gamma() const { return with_gamma_; }

  std::size_t n_samples() const {
    std::size_t n = 0;
    for (const auto& s : segs_) n += s.n;
    return n;
  }

  Segment& segment(std::uint64_t chain) {
    for (auto& s : segs_) {
      if (s.chain == chain) return s;
    }
    segs_.push_back(Segment{});
    segs_.back().chain = chain;
    return segs_.back();
  }

  const std::vector<Segment>& segments() const { return segs_; }

  /* Associative; commutative when the two sides hold disjoint chain ids.
   * Segments with the same chain id are concatenated left-then-right, the
   * order a resumed run extends its checkpoint. */
  static Accumulator merge(const Accumulator& a, const Accumulator& b) {
    if (a.volume_ != b.volume_ || a.slices_ != b.slices_ || a.with_gamma_ != b.with_gamma_)
      throw std::invalid_argument("accumulator merge: incompatible shapes");
    Accumulator out(a.volume_, a.slices_, a.with_gamma_);
    out.segs_ = a.segs_;
    for (const auto& s : b.segs_) {
      Segment& dst = out.segment(s.chain);
      auto append = [](std::vector<double>& d, const std::vector<double>& src) {
        d.insert(d.end(), src.begin(), src.end());
      };
      append(dst.m, s.m);
      append(dst.q2, s.q2);
      append(dst.nn, s.nn);
      append(dst.action, s.action);
      append(dst.doff, s.doff);
      append(dst.glag, s.glag);
      dst.n += s.n;
    }
    std::sort(out.segs_.begin(), out.segs_.end(),
              [](const Segment& x, const Segment& y) { return x.chain < y.chain; });
    return out;
  }

  // materialize a derived scalar series, fn(segment, measurement index)
  std::vector<std::vector<double>> derived(
      const std::function<double(const Segment&, std::size_t)>& fn) const {
    std::vector<std::vector<double>> out;
    out.reserve(segs_.size());
    for (const auto& s : segs_) {
      std::vector<double> v(s.n);
      for (std::size_t t = 0; t < s.n; ++t) v[t] = fn(s, t);
      out.push_back(std::move(v));
    }
    return out;
  }

  std::vector<std::vector<double>> series_m() const {
    return derived([](const Segment& s, std::size_t t) { return s.m[t]; });
  }
  std::vector<std::vector<double>> series_q2() const {
    return derived([](const Segment& s, std::size_t t) { return s.q2[t]; });
  }
  std::vector<std::vector<double>> series_nn() const {
    return derived([](const Segment& s, std::size_t t) { return s.nn[t]; });
  }
  std::vector<std::vector<double>> series_doff(std::size_t off) const {
    const std::size_t v = volume_;
    return derived([off, v](const Segment& s, std::size_t t) { return s.doff[t * v + off]; });
  }
  std::vector<std::vector<double>> series_glag(std::size_t lag) const {
    if (!with_gamma_) throw std::runtime_error("accumulator: gamma lags not enabled");
    const std::size_t p = static_cast<std::size_t>(slices_);
    return derived([lag, p](const Segment& s, std::size_t t) { return s.glag[t * p + lag]; });
  }

 private:
  std::size_t volume_ = 0;
  int slices_ = 0;
  bool with_gamma_ = false;
  std::vector<Segment> segs_;
};

}  // namespace qcr
