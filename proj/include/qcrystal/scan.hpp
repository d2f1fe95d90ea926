#pragma once

/* Field sweeps at fixed (J, m): drive h across a grid in one or both
 * directions, warm-starting each point from the previous one, and look for
 * the signature of a first-order transition — a jump of the polarization
 * curve that exceeds five combined standard errors, with hysteresis between
 * the two sweep directions. */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcrystal/accumulator.hpp"
#include "qcrystal/model.hpp"
#include "qcrystal/observables.hpp"
#include "qcrystal/rng.hpp"
#include "qcrystal/sampler.hpp"

namespace qcr {

enum class SweepDirection { up, down, both };
enum class Verdict { pass, fail, skipped };

inline const char* to_string(SweepDirection d) {
  switch (d) {
    case SweepDirection::up: return "up";
    case SweepDirection::down: return "down";
    default: return "both";
  }
}
inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "PASS";
    case Verdict::fail: return "FAIL";
    default: return "SKIPPED";
  }
}

/* One sweep campaign. `base` carries the physics (m, a, J, V0, d, P); its L
 * and h fields are overridden by L_list and h_grid point by point. */
struct SweepPlan {
  Model base;
  std::vector<double> h_grid;  // strictly ascending
  SweepDirection direction = SweepDirection::both;
  std::vector<int> L_list;
  McParams mc;
  bool warm_start = true;

  std::vector<std::string> validate() const {
    std::vector<std::string> errs;
    Model probe = base;
    probe.h = 0.0;
    probe.L = L_list.empty() ? 1 : L_list.front();
    for (auto& e : probe.validate()) errs.push_back(e);
    for (auto& e : mc.validate()) errs.push_back(e);
    if (h_grid.empty()) errs.push_back("scan: h_grid must be nonempty");
    for (std::size_t i = 1; i < h_grid.size(); ++i)
      if (h_grid[i] <= h_grid[i - 1]) {
        errs.push_back("scan: h_grid must be strictly ascending");
        break;
      }
    if (L_list.empty()) errs.push_back("scan: L_list must be nonempty");
    for (int L : L_list)
      if (L < 1) {
        errs.push_back("scan: box sizes must be >= 1");
        break;
      }
    return errs;
  }
};

struct SweepPoint {
  int L = 0;
  SweepDirection direction = SweepDirection::up;  // up or down, never both
  double h = 0.0;
  double M = 0.0, sigma_M = 0.0;
  double q2 = 0.0, sigma_q2 = 0.0;
  double D_ll = 0.0, sigma_Dll = 0.0;
  double kappa = 0.0, sigma_kappa = 0.0;
  Verdict ir = Verdict::skipped;  // skipped when J = 0
  Verdict bf = Verdict::skipped;
  double tau_int = 0.5;
  bool thermalized = true;  // tau_int <= sweeps / 50
};

struct JumpCandidate {
  int L = 0;
  SweepDirection direction = SweepDirection::up;
  double h_low = 0.0, h_high = 0.0;  // the grid pair straddling the jump
  double delta_m = 0.0;              // M(h_high) - M(h_low)
  double significance = 0.0;         // |delta_m| over the pair's combined sigma
};

struct HysteresisEntry {
  int L = 0;
  double area = 0.0;  // integral of |M_up - M_down| over the grid
};

struct TransitionReport {
  double J = 0.0, m = 0.0;
  int d = 1;
  std::vector<double> h_grid;
  SweepDirection direction = SweepDirection::both;
  bool warm_start = true;
  std::vector<SweepPoint> points;        // stored in run order
  std::vector<JumpCandidate> jumps;      // at most one per (L, direction)
  std::vector<HysteresisEntry> hysteresis;
};

namespace detail {

// points of one branch, reordered to ascending h
inline std::vector<const SweepPoint*> branch_points(const TransitionReport& rep, int L,
                                                    SweepDirection dir) {
  std::vector<const SweepPoint*> out;
  for (const auto& p : rep.points)
    if (p.L == L && p.direction == dir) out.push_back(&p);
  std::sort(out.begin(), out.end(),
            [](const SweepPoint* a, const SweepPoint* b) { return a->h < b->h; });
  return out;
}

/* The most significant consecutive step exceeding five combined sigmas, if
 * any. Jump size is only meaningful against the noise of its two endpoints,
 * so significance uses the pair's quadrature-combined error. */
inline bool detect_jump(const std::vector<const SweepPoint*>& pts, JumpCandidate& out) {
  bool found = false;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double dm = pts[i + 1]->M - pts[i]->M;
    const double sc =
        std::sqrt(pts[i]->sigma_M * pts[i]->sigma_M + pts[i + 1]->sigma_M * pts[i + 1]->sigma_M);
    if (sc <= 0.0) continue;
    const double sig = std::fabs(dm) / sc;
    if (sig > 5.0 && (!found || sig > out.significance)) {
      found = true;
      out.h_low = pts[i]->h;
      out.h_high = pts[i + 1]->h;
      out.delta_m = dm;
      out.significance = sig;
    }
  }
  return found;
}

}  // namespace detail

/* Run the full campaign. Each (L, direction) branch is sequential so that
 * warm starts chain through it; every point gets its own derived seed, so
 * the whole report is a pure function of the plan. */
inline TransitionReport sweep(const SweepPlan& plan) {
  for (const auto& e : plan.validate()) throw std::invalid_argument(e);

  TransitionReport rep;
  rep.J = plan.base.J;
  rep.m = plan.base.m;
  rep.d = plan.base.d;
  rep.h_grid = plan.h_grid;
  rep.direction = plan.direction;
  rep.warm_start = plan.warm_start;

  std::vector<SweepDirection> dirs;
  if (plan.direction != SweepDirection::down) dirs.push_back(SweepDirection::up);
  if (plan.direction != SweepDirection::up) dirs.push_back(SweepDirection::down);

  std::uint64_t point_counter = 0;
  for (std::size_t li = 0; li < plan.L_list.size(); ++li) {
    const int L = plan.L_list[li];
    Model mp = plan.base;
    mp.L = L;
    const Torus box = mp.torus();
    const BrillouinZone zone(box);
    const std::size_t zero_off = box.index(std::vector<int>(box.d, 0));

    for (SweepDirection dir : dirs) {
      std::vector<double> hs = plan.h_grid;
      if (dir == SweepDirection::down) std::reverse(hs.begin(), hs.end());

      PathConfig warm;
      bool have_warm = false;
      for (double h : hs) {
        Model pm = mp;
        pm.h = h;
        McParams mc = plan.mc;
        mc.seed = derive_seed(plan.mc.seed, 0x5ca90000u + point_counter++);

        const PathConfig* init = (plan.warm_start && have_warm) ? &warm : nullptr;
        auto r = run(pm, mc, /*with_gamma=*/false, nullptr, init);
        if (plan.warm_start) {
          warm = r.state.configs.front();
          have_warm = true;
        }

        SweepPoint pt;
        pt.L = L;
        pt.direction = dir;
        pt.h = h;
        const Stat sm = polarization(r.acc);
        pt.M = sm.value;
        pt.sigma_M = sm.sigma;
        pt.tau_int = sm.tau_int;
        pt.thermalized = sm.tau_int <= static_cast<double>(mc.sweeps) / 50.0;
        const Stat sq = second_moment(r.acc);
        pt.q2 = sq.value;
        pt.sigma_q2 = sq.sigma;
        const Stat sd = blocked_stats(r.acc.series_doff(zero_off));
        pt.D_ll = sd.value;
        pt.sigma_Dll = sd.sigma;
        const Stat sk = kappa_estimate(r.acc);
        pt.kappa = sk.value;
        pt.sigma_kappa = sk.sigma;
        if (pm.J > 0.0)
          pt.ir = infrared_check(r.acc, zone, pm.J).pass ? Verdict::pass : Verdict::fail;
        pt.bf = bruch_falk_check(r.acc, box, pm.m).pass ? Verdict::pass : Verdict::fail;
        rep.points.push_back(pt);
      }
    }
  }

  for (int L : plan.L_list) {
    for (SweepDirection dir : dirs) {
      JumpCandidate jc;
      jc.L = L;
      jc.direction = dir;
      if (detail::detect_jump(detail::branch_points(rep, L, dir), jc)) rep.jumps.push_back(jc);
    }
    if (dirs.size() == 2) {
      const auto up = detail::branch_points(rep, L, SweepDirection::up);
      const auto dn = detail::branch_points(rep, L, SweepDirection::down);
      HysteresisEntry he;
      he.L = L;
      for (std::size_t i = 0; i + 1 < up.size(); ++i) {
        const double d0 = std::fabs(up[i]->M - dn[i]->M);
        const double d1 = std::fabs(up[i + 1]->M - dn[i + 1]->M);
        he.area += 0.5 * (d0 + d1) * (up[i + 1]->h - up[i]->h);
      }
      rep.hysteresis.push_back(he);
    }
  }
  return rep;
}

struct MonotonicityVerdict {
  Verdict verdict = Verdict::skipped;
  double worst = std::numeric_limits<double>::infinity();  // min slack M_{i+1}-M_i+3*sigma_pair
  double at_h = 0.0;                                       // left endpoint of the worst pair
};

/* Finite-volume polarization is the h-derivative of a convex pressure, so a
 * single-direction curve must be nondecreasing up to noise. */
inline MonotonicityVerdict monotonicity_check(const std::vector<double>& h,
                                              const std::vector<double>& M,
                                              const std::vector<double>& sigma) {
  if (h.size() != M.size() || h.size() != sigma.size())
    throw std::invalid_argument("monotonicity: arrays differ in length");
  if (h.size() < 2) throw std::invalid_argument("monotonicity: need at least 2 points");
  MonotonicityVerdict out;
  out.verdict = Verdict::pass;
  for (std::size_t i = 0; i + 1 < h.size(); ++i) {
    const double sc = std::sqrt(sigma[i] * sigma[i] + sigma[i + 1] * sigma[i + 1]);
    const double slack = M[i + 1] - M[i] + 3.0 * sc;
    if (slack < out.worst) {
      out.worst = slack;
      out.at_h = h[i];
    }
    if (slack < 0.0) out.verdict = Verdict::fail;
  }
  return out;
}

inline MonotonicityVerdict monotonicity_check(const TransitionReport& rep, int L,
                                              SweepDirection dir) {
  const auto pts = detail::branch_points(rep, L, dir);
  std::vector<double> h, M, s;
  for (const auto* p : pts) {
    h.push_back(p->h);
    M.push_back(p->M);
    s.push_back(p->sigma_M);
  }
  return monotonicity_check(h, M, s);
}

struct SignCheckVerdict {
  Verdict verdict = Verdict::skipped;
  std::size_t tested = 0;  // points beyond either threshold
};

/* Strong-field sign test: M strictly positive (3 sigma) beyond h_plus and
 * strictly negative below h_minus. SKIPPED when the grid never reaches one
 * of the thresholds. */
inline SignCheckVerdict sign_check_large_field(const TransitionReport& rep, double h_plus,
                                               double h_minus) {
  if (h_plus <= h_minus) throw std::invalid_argument("sign check: need h_plus > h_minus");
  SignCheckVerdict out;
  bool any_plus = false, any_minus = false, ok = true;
  for (const auto& p : rep.points) {
    if (p.h > h_plus) {
      any_plus = true;
      ++out.tested;
      if (p.M - 3.0 * p.sigma_M <= 0.0) ok = false;
    } else if (p.h < h_minus) {
      any_minus = true;
      ++out.tested;
      if (p.M + 3.0 * p.sigma_M >= 0.0) ok = false;
    }
  }
  if (!any_plus || !any_minus) {
    out.verdict = Verdict::skipped;
    return out;
  }
  out.verdict = ok ? Verdict::pass : Verdict::fail;
  return out;
}

struct FiniteSizeEntry {
  int L = 0;
  std::size_t volume = 0;
  double kappa = 0.0, sigma_kappa = 0.0;
  double delta_m = 0.0;  // polarization step across h_ref on this box
  bool has_jump = false;
};

struct FiniteSizeTable {
  double h_ref = 0.0;
  std::vector<FiniteSizeEntry> rows;  // ascending L
  /* true when the largest box's kappa is below half the smallest box's, with
   * three-sigma slack on both; a 1/|Lambda| decay clears this, long-range
   * order does not */
  bool kappa_decays = false;
};

/* Tabulate the condensate proxy and the jump size across box sizes at a
 * common field value: the most significant jump's location when one exists,
 * otherwise the grid point nearest zero field. */
inline FiniteSizeTable finite_size_series(const TransitionReport& rep) {
  std::vector<int> ls;
  for (const auto& p : rep.points)
    if (std::find(ls.begin(), ls.end(), p.L) == ls.end()) ls.push_back(p.L);
  std::sort(ls.begin(), ls.end());
  if (ls.size() < 2) throw std::invalid_argument("finite size series: need >= 2 box sizes");

  FiniteSizeTable tab;
  const JumpCandidate* best = nullptr;
  for (const auto& j : rep.jumps)
    if (!best || j.significance > best->significance) best = &j;
  if (best) {
    tab.h_ref = 0.5 * (best->h_low + best->h_high);
  } else {
    double hbest = rep.h_grid.front();
    for (double h : rep.h_grid)
      if (std::fabs(h) < std::fabs(hbest)) hbest = h;
    tab.h_ref = hbest;
  }

  for (int L : ls) {
    SweepDirection dir = SweepDirection::up;
    auto pts = detail::branch_points(rep, L, dir);
    if (pts.empty()) {
      dir = SweepDirection::down;
      pts = detail::branch_points(rep, L, dir);
    }
    if (pts.empty()) continue;

    // the stored point nearest the reference field
    const SweepPoint* at = pts.front();
    for (const auto* p : pts)
      if (std::fabs(p->h - tab.h_ref) < std::fabs(at->h - tab.h_ref)) at = p;

    FiniteSizeEntry row;
    row.L = L;
    row.volume = Torus(rep.d, L).volume();
    row.kappa = at->kappa;
    row.sigma_kappa = at->sigma_kappa;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      if (pts[i]->h <= tab.h_ref && tab.h_ref <= pts[i + 1]->h) {
        row.delta_m = pts[i + 1]->M - pts[i]->M;
        break;
      }
    }
    for (const auto& j : rep.jumps)
      if (j.L == L) row.has_jump = true;
    tab.rows.push_back(row);
  }

  if (tab.rows.size() >= 2) {
    const auto& lo = tab.rows.front();
    const auto& hi = tab.rows.back();
    tab.kappa_decays =
        hi.kappa + 3.0 * hi.sigma_kappa < 0.5 * (lo.kappa - 3.0 * lo.sigma_kappa);
  }
  return tab;
}

}  // namespace qcr
