#pragma once

/* Metropolis sampling of the discretized periodic Gibbs measure. The action
 * for one path per site, P slices, slice spacing 1/P:
 *
 *   S = sum_l sum_k [ (m P / 2)(w_l[k+1] - w_l[k])^2
 *                     + (1/P)((a/2) w_l[k]^2 + V0(w_l[k]) - h w_l[k]) ]
 *       - (J/P) sum_{bonds <l l'>} sum_k w_l[k] w_l'[k]
 *
 * Moves: a uniform-window update at every (site, slice) in site-major order,
 * plus one rigid whole-path shift per site. Proposal widths are tuned to
 * acceptance in [0.3, 0.6] during thermalization, then frozen. */

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcrystal/accumulator.hpp"
#include "qcrystal/model.hpp"
#include "qcrystal/rng.hpp"

namespace qcr {

struct PathConfig {
  std::size_t volume = 0;
  int P = 0;
  std::vector<double> w;  // site-major: w[site * P + k]

  PathConfig() = default;
  PathConfig(std::size_t volume_, int P_)
      : volume(volume_), P(P_), w(volume_ * static_cast<std::size_t>(P_), 0.0) {}

  double& at(std::size_t site, int k) { return w[site * static_cast<std::size_t>(P) + k]; }
  double at(std::size_t site, int k) const { return w[site * static_cast<std::size_t>(P) + k]; }
};

struct McParams {
  std::int64_t sweeps = 2000;          // total, including thermalization
  std::int64_t thermalization = 500;
  std::int64_t measure_every = 2;
  double proposal_width = 1.0;
  int chains = 2;
  std::uint64_t seed = 1;

  std::vector<std::string> validate() const {
    std::vector<std::string> errs;
    if (sweeps <= 0) errs.push_back("mc: sweeps must be > 0");
    if (thermalization < 0) errs.push_back("mc: thermalization must be >= 0");
    if (thermalization >= sweeps) errs.push_back("mc: thermalization must be < sweeps");
    if (measure_every < 1) errs.push_back("mc: measure_every must be >= 1");
    if (proposal_width <= 0.0) errs.push_back("mc: proposal_width must be > 0");
    if (chains < 1) errs.push_back("mc: chains must be >= 1");
    if (measure_every >= 1 && thermalization >= 0 && sweeps > thermalization &&
        (sweeps - thermalization) / measure_every < 2)
      errs.push_back("mc: fewer than 2 measurements (raise sweeps or lower measure_every)");
    return errs;
  }
};

// geometry tables shared by action evaluation and the sweep kernel
struct LatticeTables {
  std::size_t volume = 0;
  int d = 0;
  std::vector<std::size_t> nbr;   // volume x 2d, axis-major minus-then-plus
  std::vector<Bond> bond_list;
  std::vector<std::size_t> perm;  // volume x volume: perm[off * V + l] = l + off

  explicit LatticeTables(const Torus& box) {
    volume = box.volume();
    d = box.d;
    nbr.resize(volume * 2 * static_cast<std::size_t>(d));
    for (std::size_t s = 0; s < volume; ++s) {
      const auto ns = neighbors(box, s);
      for (std::size_t j = 0; j < ns.size(); ++j) nbr[s * 2 * d + j] = ns[j];
    }
    bond_list = bonds(box);
    perm.resize(volume * volume);
    for (std::size_t off = 0; off < volume; ++off) {
      const auto oc = box.coords(off);
      for (std::size_t s = 0; s < volume; ++s) {
        auto c = box.coords(s);
        for (int j = 0; j < box.d; ++j) c[j] += oc[j];
        perm[off * volume + s] = box.index(c);
      }
    }
  }
};

inline double action(const Model& mp, const PathConfig& cfg) {
  const Torus box = mp.torus();
  const std::size_t V = box.volume();
  const int P = cfg.P;
  const double kin = 0.5 * mp.m * static_cast<double>(P);
  const double invP = 1.0 / static_cast<double>(P);
  double s = 0.0;
  for (std::size_t l = 0; l < V; ++l) {
    for (int k = 0; k < P; ++k) {
      const double x = cfg.at(l, k);
      const double xn = cfg.at(l, (k + 1) % P);
      s += kin * (xn - x) * (xn - x);
      s += invP * (0.5 * mp.a * x * x + eval_V0(mp.v0, x) - mp.h * x);
    }
  }
  if (mp.J != 0.0) {
    for (const auto& b : bonds(box)) {
      double acc = 0.0;
      for (int k = 0; k < P; ++k) acc += cfg.at(b.s1, k) * cfg.at(b.s2, k);
      s -= mp.J * invP * acc;
    }
  }
  return s;
}

/* Action change from replacing w_l[k] by x_new: two kinetic bonds, the
 * on-site terms at slice k, and the 2d spatial couplings at slice k. */
inline double local_action_delta(const Model& mp, const LatticeTables& tab, const PathConfig& cfg,
                                 std::size_t l, int k, double x_new) {
  const int P = cfg.P;
  const double x_old = cfg.at(l, k);
  const double prev = cfg.at(l, (k + P - 1) % P);
  const double next = cfg.at(l, (k + 1) % P);
  const double kin = 0.5 * mp.m * static_cast<double>(P);
  const double invP = 1.0 / static_cast<double>(P);
  double delta = kin * ((next - x_new) * (next - x_new) - (next - x_old) * (next - x_old) +
                        (x_new - prev) * (x_new - prev) - (x_old - prev) * (x_old - prev));
  delta += invP * (0.5 * mp.a * (x_new * x_new - x_old * x_old) + eval_V0(mp.v0, x_new) -
                   eval_V0(mp.v0, x_old) - mp.h * (x_new - x_old));
  if (mp.J != 0.0) {
    double nsum = 0.0;
    for (int j = 0; j < 2 * tab.d; ++j) nsum += cfg.at(tab.nbr[l * 2 * tab.d + j], k);
    delta -= mp.J * invP * (x_new - x_old) * nsum;
  }
  return delta;
}

// action change from shifting site l's whole path by s (kinetic part unchanged)
inline double shift_action_delta(const Model& mp, const LatticeTables& tab, const PathConfig& cfg,
                                 std::size_t l, double s) {
  const int P = cfg.P;
  const double invP = 1.0 / static_cast<double>(P);
  double delta = -mp.h * s;
  double onsite = 0.0;
  for (int k = 0; k < P; ++k) {
    const double x = cfg.at(l, k);
    const double y = x + s;
    onsite += 0.5 * mp.a * (y * y - x * x) + eval_V0(mp.v0, y) - eval_V0(mp.v0, x);
  }
  delta += invP * onsite;
  if (mp.J != 0.0) {
    double nsum = 0.0;
    for (int j = 0; j < 2 * tab.d; ++j) {
      const std::size_t nb = tab.nbr[l * 2 * tab.d + j];
      for (int k = 0; k < P; ++k) nsum += cfg.at(nb, k);
    }
    delta -= mp.J * invP * s * nsum;
  }
  return delta;
}

struct SweepWidths {
  double local = 1.0;
  double shift = 1.0;
};

struct SweepCounts {
  std::int64_t local_tried = 0, local_accepted = 0;
  std::int64_t shift_tried = 0, shift_accepted = 0;

  double rate() const {
    const std::int64_t tried = local_tried + shift_tried;
    return tried == 0 ? 0.0
                      : static_cast<double>(local_accepted + shift_accepted) /
                            static_cast<double>(tried);
  }
};

/* One Metropolis pass. Every (site, slice) gets a uniform-window proposal in
 * deterministic site-major order, then each site gets one rigid shift
 * proposal. Returns the overall acceptance fraction of the pass. */
inline double metropolis_sweep(const Model& mp, const LatticeTables& tab, PathConfig& cfg,
                               const SweepWidths& ww, Rng& rng, SweepCounts* counts = nullptr) {
  const int P = cfg.P;
  SweepCounts c;
  for (std::size_t l = 0; l < cfg.volume; ++l) {
    for (int k = 0; k < P; ++k) {
      const double x_new = cfg.at(l, k) + rng.uniform(-ww.local, ww.local);
      const double delta = local_action_delta(mp, tab, cfg, l, k, x_new);
      ++c.local_tried;
      if (delta <= 0.0 || rng.uniform() < std::exp(-delta)) {
        cfg.at(l, k) = x_new;
        ++c.local_accepted;
      }
    }
    const double s = rng.uniform(-ww.shift, ww.shift);
    const double delta = shift_action_delta(mp, tab, cfg, l, s);
    ++c.shift_tried;
    if (delta <= 0.0 || rng.uniform() < std::exp(-delta)) {
      for (int k = 0; k < P; ++k) cfg.at(l, k) += s;
      ++c.shift_accepted;
    }
  }
  if (counts) {
    counts->local_tried += c.local_tried;
    counts->local_accepted += c.local_accepted;
    counts->shift_tried += c.shift_tried;
    counts->shift_accepted += c.shift_accepted;
  }
  return c.rate();
}

// per-measurement reduction into the accumulator
inline void measure_into(const Model& mp, const LatticeTables& tab, const PathConfig& cfg,
                         Segment& seg, std::vector<double>& wbar_scratch, bool with_gamma) {
  const std::size_t V = cfg.volume;
  const int P = cfg.P;
  const double invP = 1.0 / static_cast<double>(P);

  double msum = 0.0, q2sum = 0.0;
  wbar_scratch.assign(V, 0.0);
  for (std::size_t l = 0; l < V; ++l) {
    msum += cfg.at(l, 0);
    double acc = 0.0;
    for (int k = 0; k < P; ++k) {
      const double x = cfg.at(l, k);
      acc += x;
      q2sum += x * x;
    }
    wbar_scratch[l] = acc * invP;
  }
  seg.m.push_back(msum / static_cast<double>(V));
  seg.q2.push_back(q2sum / static_cast<double>(V * static_cast<std::size_t>(P)));

  double nnsum = 0.0;
  for (const auto& b : tab.bond_list) {
    double acc = 0.0;
    for (int k = 0; k < P; ++k) acc += cfg.at(b.s1, k) * cfg.at(b.s2, k);
    nnsum += acc * invP;
  }
  seg.nn.push_back(nnsum / static_cast<double>(V));

  seg.action.push_back(action(mp, cfg));

  for (std::size_t off = 0; off < V; ++off) {
    double acc = 0.0;
    const std::size_t* pm = &tab.perm[off * V];
    for (std::size_t l = 0; l < V; ++l) acc += wbar_scratch[l] * wbar_scratch[pm[l]];
    seg.doff.push_back(acc / static_cast<double>(V));
  }

  if (with_gamma) {
    for (int lag = 0; lag < P; ++lag) {
      double acc = 0.0;
      for (std::size_t l = 0; l < V; ++l)
        for (int k = 0; k < P; ++k) acc += cfg.at(l, k) * cfg.at(l, (k + lag) % P);
      seg.glag.push_back(acc / static_cast<double>(V * static_cast<std::size_t>(P)));
    }
  }
  ++seg.n;
}

/* Everything a later call needs to continue the chains exactly where they
 * stopped: per-chain configurations, generator states, and the frozen
 * proposal widths, plus the total sweep count already executed (which fixes
 * the measurement cadence phase). */
struct SamplerState {
  std::int64_t sweeps_done = 0;
  std::vector<PathConfig> configs;
  std::vector<std::array<std::uint64_t, 4>> rng_states;
  std::vector<SweepWidths> widths;
};

struct RunResult {
  Accumulator acc;
  double acceptance = 0.0;  // overall accepted fraction across chains
  SweepWidths tuned;        // widths after the last chain's tuning
  SamplerState state;
};

using MeasureHook = std::function<void(int chain, std::int64_t sweep, double m_inst, double s)>;

/* Full run: `chains` independent chains with derived seeds. Each chain
 * thermalizes with width auto-tuning (every 50 sweeps toward acceptance in
 * [0.3, 0.6]), freezes widths, then measures every measure_every sweeps.
 * Initial state is the zero configuration unless `warm` supplies one. */
inline RunResult run(const Model& mp, const McParams& mc, bool with_gamma = false,
                     const MeasureHook& hook = nullptr, const PathConfig* warm = nullptr) {
  for (const auto& e : mp.validate()) throw std::invalid_argument(e);
  for (const auto& e : mc.validate()) throw std::invalid_argument(e);
  const Torus box = mp.torus();
  const LatticeTables tab(box);
  const std::size_t V = box.volume();

  RunResult out;
  out.acc = Accumulator(V, mp.P, with_gamma);
  std::vector<double> wbar(V, 0.0);
  std::int64_t tried_total = 0, accepted_total = 0;

  for (int chain = 0; chain < mc.chains; ++chain) {
    Rng rng(derive_seed(mc.seed, static_cast<std::uint64_t>(chain)));
    if (warm && (warm->volume != V || warm->P != mp.P))
      throw std::invalid_argument("run: warm-start config has wrong shape");
    PathConfig cfg = warm ? *warm : PathConfig(V, mp.P);
    SweepWidths ww{mc.proposal_width, mc.proposal_width};
    Segment& seg = out.acc.segment(static_cast<std::uint64_t>(chain));

    SweepCounts tune;
    for (std::int64_t sweep = 0; sweep < mc.sweeps; ++sweep) {
      const bool thermal = sweep < mc.thermalization;
      SweepCounts pass;
      metropolis_sweep(mp, tab, cfg, ww, rng, &pass);
      tried_total += pass.local_tried + pass.shift_tried;
      accepted_total += pass.local_accepted + pass.shift_accepted;

      if (thermal) {
        tune.local_tried += pass.local_tried;
        tune.local_accepted += pass.local_accepted;
        tune.shift_tried += pass.shift_tried;
        tune.shift_accepted += pass.shift_accepted;
        if ((sweep + 1) % 50 == 0 || sweep + 1 == mc.thermalization) {
          auto adjust = [](double& w, std::int64_t acc_n, std::int64_t tried) {
            if (tried == 0) return;
            const double r = static_cast<double>(acc_n) / static_cast<double>(tried);
            if (r < 0.3) w *= 0.8;
            else if (r > 0.6) w *= 1.25;
            if (w < 1e-4) w = 1e-4;
            if (w > 1e3) w = 1e3;
          };
          adjust(ww.local, tune.local_accepted, tune.local_tried);
          adjust(ww.shift, tune.shift_accepted, tune.shift_tried);
          tune = SweepCounts{};
        }
        continue;
      }

      const std::int64_t since = sweep - mc.thermalization;
      if (since % mc.measure_every == mc.measure_every - 1) {
        measure_into(mp, tab, cfg, seg, wbar, with_gamma);
        const double s_now = seg.action.back();
        if (!std::isfinite(s_now))
          throw std::runtime_error("run: non-finite action (chain " + std::to_string(chain) +
                                   ", sweep " + std::to_string(sweep) + ")");
        if (hook) hook(chain, sweep, seg.m.back(), s_now);
      }
    }
    out.tuned = ww;
    out.state.configs.push_back(cfg);
    out.state.rng_states.push_back(rng.state());
    out.state.widths.push_back(ww);
  }
  out.state.sweeps_done = mc.sweeps;
  out.acceptance =
      tried_total == 0 ? 0.0 : static_cast<double>(accepted_total) / static_cast<double>(tried_total);
  return out;
}

/* Continue saved chains for `extra_sweeps` more sweeps, extending `acc`
 * in place. Bitwise equivalent to having run the same chains without the
 * interruption. Only measurement-phase states can continue (the tuning
 * counters are not part of the state), so sweeps_done must be past
 * thermalization. */
inline RunResult resume(const Model& mp, const McParams& mc, const SamplerState& st,
                        Accumulator acc, std::int64_t extra_sweeps, bool with_gamma = false,
                        const MeasureHook& hook = nullptr) {
  for (const auto& e : mp.validate()) throw std::invalid_argument(e);
  for (const auto& e : mc.validate()) throw std::invalid_argument(e);
  if (extra_sweeps < 1) throw std::invalid_argument("resume: extra_sweeps must be >= 1");
  if (st.sweeps_done < mc.thermalization)
    throw std::invalid_argument("resume: state predates the end of thermalization");
  const std::size_t nchains = st.configs.size();
  if (nchains == 0 || st.rng_states.size() != nchains || st.widths.size() != nchains)
    throw std::invalid_argument("resume: inconsistent chain state");
  const Torus box = mp.torus();
  const LatticeTables tab(box);
  const std::size_t V = box.volume();
  if (acc.volume() != V || acc.slices() != mp.P || acc.with_gamma() != with_gamma)
    throw std::invalid_argument("resume: accumulator shape does not match the model");

  RunResult out;
  out.acc = std::move(acc);
  std::vector<double> wbar(V, 0.0);
  std::int64_t tried_total = 0, accepted_total = 0;

  for (std::size_t chain = 0; chain < nchains; ++chain) {
    if (st.configs[chain].volume != V || st.configs[chain].P != mp.P)
      throw std::invalid_argument("resume: saved configuration has wrong shape");
    Rng rng(1);
    rng.set_state(st.rng_states[chain]);
    PathConfig cfg = st.configs[chain];
    SweepWidths ww = st.widths[chain];
    Segment& seg = out.acc.segment(static_cast<std::uint64_t>(chain));

    for (std::int64_t sweep = st.sweeps_done; sweep < st.sweeps_done + extra_sweeps; ++sweep) {
      SweepCounts pass;
      metropolis_sweep(mp, tab, cfg, ww, rng, &pass);
      tried_total += pass.local_tried + pass.shift_tried;
      accepted_total += pass.local_accepted + pass.shift_accepted;

      const std::int64_t since = sweep - mc.thermalization;
      if (since % mc.measure_every == mc.measure_every - 1) {
        measure_into(mp, tab, cfg, seg, wbar, with_gamma);
        const double s_now = seg.action.back();
        if (!std::isfinite(s_now))
          throw std::runtime_error("resume: non-finite action (chain " + std::to_string(chain) +
                                   ", sweep " + std::to_string(sweep) + ")");
        if (hook) hook(static_cast<int>(chain), sweep, seg.m.back(), s_now);
      }
    }
    out.tuned = ww;
    out.state.configs.push_back(cfg);
    out.state.rng_states.push_back(rng.state());
    out.state.widths.push_back(ww);
  }
  out.state.sweeps_done = st.sweeps_done + extra_sweeps;
  out.acceptance =
      tried_total == 0 ? 0.0 : static_cast<double>(accepted_total) / static_cast<double>(tried_total);
  return out;
}

}  // namespace qcr
