#include "qcrystal/sampler.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "qcrystal/accumulator.hpp"
#include "qcrystal/model.hpp"
#include "qcrystal/rng.hpp"
#include "support/gaussian_oracle.hpp"
#include "support/transfer_matrix.hpp"

namespace {

using qcr::Accumulator;
using qcr::action;
using qcr::blocked_stats;
using qcr::LatticeTables;
using qcr::local_action_delta;
using qcr::McParams;
using qcr::metropolis_sweep;
using qcr::Model;
using qcr::PathConfig;
using qcr::shift_action_delta;
using qcr::Stat;
using qcr::SweepWidths;

Model gaussian_model(int d, int L, int P, double m = 1.0, double a = 1.0, double J = 0.0,
                     double h = 0.0) {
  Model mp;
  mp.v0.coeff.assign(5, 0.0);
  mp.d = d;
  mp.L = L;
  mp.P = P;
  mp.m = m;
  mp.a = a;
  mp.J = J;
  mp.h = h;
  return mp;
}

Model anharmonic_model(int d, int L, int P, double J = 0.0, double h = 0.0) {
  Model mp;
  mp.v0.coeff = {0.0, 0.0, -1.0, 0.3, 1.0};
  mp.d = d;
  mp.L = L;
  mp.P = P;
  mp.J = J;
  mp.h = h;
  return mp;
}

PathConfig random_config(std::size_t volume, int P, std::uint64_t seed) {
  PathConfig cfg(volume, P);
  qcr::Rng rng(seed);
  for (auto& v : cfg.w) v = rng.normal();
  return cfg;
}

TEST(Action, ZeroConfigurationHasZeroAction) {
  Model mp = anharmonic_model(2, 2, 8, 0.4, 0.7);
  PathConfig cfg(mp.torus().volume(), mp.P);
  EXPECT_DOUBLE_EQ(action(mp, cfg), 0.0);
}

TEST(Action, TwoSliceHandValue) {
  // one active site, P = 2, m = a = 1, V0 = 0, path (1, -1):
  // kinetic 2 * (1/2 * 1 * 2 * 2^2) = 8, potential 2 * (1/2 * 1/2) = 0.5
  Model mp = gaussian_model(1, 1, 2);
  PathConfig cfg(mp.torus().volume(), mp.P);
  cfg.at(0, 0) = 1.0;
  cfg.at(0, 1) = -1.0;
  EXPECT_DOUBLE_EQ(action(mp, cfg), 8.5);
}

TEST(Action, ConstantConfigurationClosedForm) {
  Model mp = anharmonic_model(2, 2, 8, 0.3, 0.0);
  mp.a = 2.0;
  mp.v0.coeff = {0.0, 0.0, 0.0, 0.0, 1.0};
  const std::size_t V = mp.torus().volume();
  const double c = 0.7;
  PathConfig cfg(V, mp.P);
  for (auto& v : cfg.w) v = c;
  // kinetic vanishes; per site (a/2) c^2 + c^4, minus J c^2 per bond (d V bonds)
  const double expected = static_cast<double>(V) * (0.5 * mp.a * c * c + c * c * c * c) -
                          mp.J * static_cast<double>(mp.d) * static_cast<double>(V) * c * c;
  EXPECT_NEAR(action(mp, cfg), expected, 1e-12 * (1.0 + std::fabs(expected)));
}

TEST(Action, FieldTermIsLinear) {
  Model mp = gaussian_model(1, 2, 4);
  PathConfig cfg = random_config(mp.torus().volume(), mp.P, 9);
  const double s0 = action(mp, cfg);
  mp.h = 0.75;
  double wsum = 0.0;
  for (double v : cfg.w) wsum += v;
  EXPECT_NEAR(action(mp, cfg), s0 - 0.75 * wsum / mp.P, 1e-12 * (1.0 + std::fabs(s0)));
}

TEST(LocalDelta, MatchesFullRecompute) {
  Model mp = anharmonic_model(2, 2, 8, 0.4, 0.25);
  mp.m = 0.8;
  mp.a = 1.1;
  const std::size_t V = mp.torus().volume();
  const LatticeTables tab(mp.torus());
  PathConfig cfg = random_config(V, mp.P, 17);
  qcr::Rng rng(18);
  double s = action(mp, cfg);
  for (int t = 0; t < 2000; ++t) {
    const std::size_t l = static_cast<std::size_t>(rng.uniform(0.0, static_cast<double>(V)));
    const int k = static_cast<int>(rng.uniform(0.0, static_cast<double>(mp.P)));
    const double x_new = cfg.at(l, k) + rng.uniform(-1.0, 1.0);
    const double delta = local_action_delta(mp, tab, cfg, l, k, x_new);
    cfg.at(l, k) = x_new;
    const double s_new = action(mp, cfg);
    ASSERT_NEAR(delta, s_new - s, 1e-9 * (1.0 + std::fabs(s)));
    s = s_new;
  }
}

TEST(LocalDelta, IdentityMoveIsExactlyZero) {
  Model mp = anharmonic_model(1, 2, 4, 0.2, 0.1);
  const LatticeTables tab(mp.torus());
  PathConfig cfg = random_config(mp.torus().volume(), mp.P, 5);
  EXPECT_DOUBLE_EQ(local_action_delta(mp, tab, cfg, 1, 2, cfg.at(1, 2)), 0.0);
  EXPECT_DOUBLE_EQ(shift_action_delta(mp, tab, cfg, 1, 0.0), 0.0);
}

TEST(LocalDelta, DecoupledSitesIgnoreOtherSites) {
  Model mp = anharmonic_model(1, 2, 4, 0.0, 0.1);
  const LatticeTables tab(mp.torus());
  PathConfig cfg = random_config(mp.torus().volume(), mp.P, 7);
  const double d1 = local_action_delta(mp, tab, cfg, 0, 1, 2.5);
  for (int k = 0; k < mp.P; ++k) cfg.at(3, k) += 10.0;
  const double d2 = local_action_delta(mp, tab, cfg, 0, 1, 2.5);
  EXPECT_DOUBLE_EQ(d1, d2);
}

TEST(ShiftDelta, MatchesFullRecompute) {
  Model mp = anharmonic_model(2, 2, 6, 0.35, -0.4);
  const std::size_t V = mp.torus().volume();
  const LatticeTables tab(mp.torus());
  PathConfig cfg = random_config(V, mp.P, 23);
  qcr::Rng rng(24);
  for (int t = 0; t < 300; ++t) {
    const std::size_t l = static_cast<std::size_t>(rng.uniform(0.0, static_cast<double>(V)));
    const double s = rng.uniform(-0.8, 0.8);
    const double before = action(mp, cfg);
    const double delta = shift_action_delta(mp, tab, cfg, l, s);
    for (int k = 0; k < mp.P; ++k) cfg.at(l, k) += s;
    const double after = action(mp, cfg);
    ASSERT_NEAR(delta, after - before, 1e-9 * (1.0 + std::fabs(before)));
  }
}

TEST(Sweep, VanishingWidthAcceptsEverything) {
  Model mp = anharmonic_model(2, 2, 8, 0.3, 0.2);
  const LatticeTables tab(mp.torus());
  PathConfig cfg = random_config(mp.torus().volume(), mp.P, 31);
  qcr::Rng rng(32);
  const SweepWidths ww{1e-10, 1e-10};
  const double rate = metropolis_sweep(mp, tab, cfg, ww, rng);
  EXPECT_GT(rate, 0.99);
}

TEST(Sweep, CountsAccumulateAcrossPasses) {
  Model mp = gaussian_model(1, 2, 4);
  const LatticeTables tab(mp.torus());
  PathConfig cfg(mp.torus().volume(), mp.P);
  qcr::Rng rng(3);
  qcr::SweepCounts counts;
  const SweepWidths ww{0.5, 0.5};
  for (int i = 0; i < 10; ++i) metropolis_sweep(mp, tab, cfg, ww, rng, &counts);
  // 4 sites x 4 slices local proposals plus 4 shift proposals per pass
  EXPECT_EQ(counts.local_tried, 160);
  EXPECT_EQ(counts.shift_tried, 40);
  EXPECT_GE(counts.local_accepted, 0);
  EXPECT_LE(counts.local_accepted, counts.local_tried);
}

TEST(Run, DeterministicForFixedSeed) {
  Model mp = anharmonic_model(1, 2, 6, 0.2, 0.1);
  McParams mc;
  mc.sweeps = 300;
  mc.thermalization = 100;
  mc.chains = 2;
  mc.seed = 77;
  auto r1 = qcr::run(mp, mc);
  auto r2 = qcr::run(mp, mc);
  ASSERT_EQ(r1.acc.segments().size(), r2.acc.segments().size());
  for (std::size_t c = 0; c < r1.acc.segments().size(); ++c) {
    const auto& s1 = r1.acc.segments()[c];
    const auto& s2 = r2.acc.segments()[c];
    ASSERT_EQ(s1.n, s2.n);
    for (std::size_t t = 0; t < s1.n; ++t) {
      ASSERT_EQ(s1.m[t], s2.m[t]);
      ASSERT_EQ(s1.q2[t], s2.q2[t]);
      ASSERT_EQ(s1.action[t], s2.action[t]);
    }
  }
  ASSERT_EQ(r1.state.configs.size(), r2.state.configs.size());
  for (std::size_t c = 0; c < r1.state.configs.size(); ++c) {
    EXPECT_EQ(r1.state.configs[c].w, r2.state.configs[c].w);
    EXPECT_EQ(r1.state.rng_states[c], r2.state.rng_states[c]);
  }
}

TEST(Run, ChainsFollowDistinctStreams) {
  Model mp = gaussian_model(1, 2, 4);
  McParams mc;
  mc.sweeps = 50;
  mc.thermalization = 10;
  mc.chains = 2;
  auto r = qcr::run(mp, mc);
  ASSERT_EQ(r.state.configs.size(), 2u);
  EXPECT_NE(r.state.configs[0].w, r.state.configs[1].w);
}

TEST(Resume, ContinuationMatchesUninterruptedRun) {
  Model mp = anharmonic_model(1, 2, 6, 0.2, 0.1);
  McParams full;
  full.sweeps = 500;
  full.thermalization = 100;
  full.measure_every = 3;
  full.chains = 2;
  full.seed = 33;
  auto whole = qcr::run(mp, full);

  McParams part = full;
  part.sweeps = 260;  // split mid-measurement-cycle on purpose
  auto first = qcr::run(mp, part);
  auto second = qcr::resume(mp, part, first.state, std::move(first.acc), 240);

  EXPECT_EQ(second.state.sweeps_done, whole.state.sweeps_done);
  ASSERT_EQ(second.acc.segments().size(), whole.acc.segments().size());
  for (std::size_t c = 0; c < whole.acc.segments().size(); ++c) {
    const auto& sa = whole.acc.segments()[c];
    const auto& sb = second.acc.segments()[c];
    ASSERT_EQ(sa.n, sb.n);
    ASSERT_EQ(sa.m, sb.m);
    ASSERT_EQ(sa.q2, sb.q2);
    ASSERT_EQ(sa.nn, sb.nn);
    ASSERT_EQ(sa.action, sb.action);
    ASSERT_EQ(sa.doff, sb.doff);
    EXPECT_EQ(whole.state.configs[c].w, second.state.configs[c].w);
    EXPECT_EQ(whole.state.rng_states[c], second.state.rng_states[c]);
    EXPECT_EQ(whole.state.widths[c].local, second.state.widths[c].local);
    EXPECT_EQ(whole.state.widths[c].shift, second.state.widths[c].shift);
  }
}

TEST(Resume, RejectsBadState) {
  Model mp = gaussian_model(1, 2, 4);
  McParams mc;
  mc.sweeps = 120;
  mc.thermalization = 40;
  mc.chains = 1;
  auto r = qcr::run(mp, mc);

  Accumulator acc(mp.torus().volume(), mp.P, false);
  EXPECT_THROW(qcr::resume(mp, mc, r.state, acc, 0), std::invalid_argument);

  qcr::SamplerState early = r.state;
  early.sweeps_done = mc.thermalization - 1;
  EXPECT_THROW(qcr::resume(mp, mc, early, acc, 10), std::invalid_argument);

  qcr::SamplerState lopsided = r.state;
  lopsided.rng_states.clear();
  EXPECT_THROW(qcr::resume(mp, mc, lopsided, acc, 10), std::invalid_argument);

  Accumulator wrong(mp.torus().volume(), mp.P + 2, false);
  EXPECT_THROW(qcr::resume(mp, mc, r.state, wrong, 10), std::invalid_argument);
}

TEST(Run, RejectsInvalidParameters) {
  Model mp = gaussian_model(1, 2, 4);
  McParams mc;
  mc.sweeps = 100;
  mc.thermalization = 100;  // not < sweeps
  EXPECT_THROW(qcr::run(mp, mc), std::invalid_argument);

  mc.thermalization = 10;
  PathConfig warm(3, 4);  // wrong volume
  EXPECT_THROW(qcr::run(mp, mc, false, nullptr, &warm), std::invalid_argument);

  Model bad = gaussian_model(1, 2, 4, 1.0, 1.0, 0.6);  // 2dJ >= a
  EXPECT_THROW(qcr::run(bad, mc), std::invalid_argument);
}

TEST(Run, WarmStartIsUsed) {
  Model mp = anharmonic_model(1, 2, 4);
  McParams mc;
  mc.sweeps = 2;
  mc.thermalization = 0;
  mc.measure_every = 1;
  mc.chains = 1;
  mc.proposal_width = 0.1;
  PathConfig warm(mp.torus().volume(), mp.P);
  for (auto& v : warm.w) v = 5.0;
  auto r = qcr::run(mp, mc, false, nullptr, &warm);
  ASSERT_GE(r.acc.segments()[0].n, 1u);
  EXPECT_GT(r.acc.segments()[0].m[0], 3.0);
}

TEST(Run, HookSeesEveryMeasurement) {
  Model mp = gaussian_model(1, 2, 4);
  McParams mc;
  mc.sweeps = 120;
  mc.thermalization = 20;
  mc.measure_every = 4;
  mc.chains = 2;
  std::size_t calls = 0;
  auto r = qcr::run(mp, mc, false,
                    [&](int, std::int64_t, double, double) { ++calls; });
  EXPECT_EQ(calls, r.acc.n_samples());
  EXPECT_EQ(calls, 2u * 25u);
}

TEST(Run, NonFiniteActionIsReported) {
  Model mp = anharmonic_model(1, 1, 4);
  McParams mc;
  mc.sweeps = 3;
  mc.thermalization = 0;
  mc.measure_every = 1;
  mc.chains = 1;
  PathConfig warm(mp.torus().volume(), mp.P);
  for (auto& v : warm.w) v = 1e200;
  EXPECT_THROW(qcr::run(mp, mc, false, nullptr, &warm), std::runtime_error);
}

TEST(Run, AcceptanceLandsInTunedWindow) {
  Model mp = anharmonic_model(2, 2, 8, 0.3, 0.0);
  McParams mc;
  mc.sweeps = 1500;
  mc.thermalization = 600;
  mc.chains = 1;
  mc.seed = 5;
  auto r = qcr::run(mp, mc);
  EXPECT_GT(r.acceptance, 0.2);
  EXPECT_LT(r.acceptance, 0.75);
  EXPECT_GT(r.tuned.local, 1e-4);
  EXPECT_LT(r.tuned.local, 1e3);
}

/* Equilibrium checks against closed forms. Windows are multiples of the
 * blocked error; seeds are fixed, so these are deterministic. */

TEST(Equilibrium, SingleSiteGaussianVariance) {
  Model mp = gaussian_model(1, 1, 8);
  McParams mc;
  mc.sweeps = 7000;
  mc.thermalization = 1000;
  mc.measure_every = 2;
  mc.chains = 2;
  mc.seed = 101;
  auto r = qcr::run(mp, mc);
  Stat q2 = blocked_stats(r.acc.series_q2());
  const double expected = gauss::mode_var_discrete(mp.m, mp.a, mp.P);
  EXPECT_NEAR(q2.value, expected, 4.0 * q2.sigma);
  EXPECT_LT(q2.sigma, 0.02);
}

TEST(Equilibrium, GaussianLatticeMagnetizationAndBond) {
  Model mp = gaussian_model(2, 2, 8, 1.0, 1.0, 0.15, 0.5);
  McParams mc;
  mc.sweeps = 5000;
  mc.thermalization = 1000;
  mc.measure_every = 2;
  mc.chains = 2;
  mc.seed = 202;
  auto r = qcr::run(mp, mc);
  const auto ref = gauss::lattice_closed_form(mp);
  Stat m = blocked_stats(r.acc.series_m());
  Stat q2 = blocked_stats(r.acc.series_q2());
  Stat nn = blocked_stats(r.acc.series_nn());
  EXPECT_NEAR(m.value, ref.M, 5.0 * m.sigma);
  EXPECT_NEAR(q2.value, ref.q2, 5.0 * q2.sigma);
  // the nn series is the bond sum per site, i.e. d times the single-bond
  // average, which is the derivative of the pressure in J
  EXPECT_NEAR(nn.value, ref.dpdJ, 5.0 * nn.sigma);
}

TEST(Equilibrium, SliceLagCorrelationsMatchDiscreteKernel) {
  Model mp = gaussian_model(1, 1, 8, 1.3, 0.9);
  McParams mc;
  mc.sweeps = 7000;
  mc.thermalization = 1000;
  mc.measure_every = 2;
  mc.chains = 2;
  mc.seed = 303;
  auto r = qcr::run(mp, mc, true);
  for (int lag = 0; lag < mp.P; ++lag) {
    Stat g = blocked_stats(r.acc.series_glag(lag));
    const double expected = gauss::site_cov_discrete(mp.m, mp.a, mp.P, lag);
    EXPECT_NEAR(g.value, expected, 5.0 * g.sigma) << "lag " << lag;
  }
}

TEST(Equilibrium, AnharmonicMomentsMatchTransferMatrix) {
  Model mp = anharmonic_model(1, 1, 16, 0.0, 0.2);
  McParams mc;
  mc.sweeps = 9000;
  mc.thermalization = 1500;
  mc.measure_every = 2;
  mc.chains = 2;
  mc.seed = 404;
  auto r = qcr::run(mp, mc);
  const auto ref = tmref::site_moments(mp, 500, 6.0);
  const auto ref2 = tmref::site_moments(mp, 800, 7.5);
  ASSERT_NEAR(ref.q1, ref2.q1, 1e-8);  // grid-converged reference
  ASSERT_NEAR(ref.q2, ref2.q2, 1e-8);
  Stat m = blocked_stats(r.acc.series_m());
  Stat q2 = blocked_stats(r.acc.series_q2());
  EXPECT_NEAR(m.value, ref.q1, 5.0 * m.sigma);
  EXPECT_NEAR(q2.value, ref.q2, 5.0 * q2.sigma);
}

TEST(Equilibrium, SliceTranslationInvariance) {
  Model mp = anharmonic_model(1, 1, 8, 0.2, 0.3);
  const LatticeTables tab(mp.torus());
  PathConfig cfg(mp.torus().volume(), mp.P);
  qcr::Rng rng(515);
  const SweepWidths ww{1.0, 1.0};
  for (int i = 0; i < 500; ++i) metropolis_sweep(mp, tab, cfg, ww, rng);
  std::vector<double> a_series, b_series;
  for (int i = 0; i < 6000; ++i) {
    metropolis_sweep(mp, tab, cfg, ww, rng);
    a_series.push_back(cfg.at(0, 0) * cfg.at(0, 2));
    b_series.push_back(cfg.at(0, 5) * cfg.at(0, 7));
  }
  Stat a = blocked_stats({a_series});
  Stat b = blocked_stats({b_series});
  const double sigma = std::sqrt(a.sigma * a.sigma + b.sigma * b.sigma);
  EXPECT_NEAR(a.value, b.value, 5.0 * sigma);
}

TEST(Equilibrium, SpatialHomogeneity) {
  Model mp = gaussian_model(2, 2, 4, 1.0, 1.0, 0.2, 0.4);
  const LatticeTables tab(mp.torus());
  PathConfig cfg(mp.torus().volume(), mp.P);
  qcr::Rng rng(616);
  const SweepWidths ww{1.0, 1.0};
  for (int i = 0; i < 500; ++i) metropolis_sweep(mp, tab, cfg, ww, rng);
  std::vector<double> s3, s11;
  for (int i = 0; i < 5000; ++i) {
    metropolis_sweep(mp, tab, cfg, ww, rng);
    s3.push_back(cfg.at(3, 0));
    s11.push_back(cfg.at(11, 0));
  }
  Stat a = blocked_stats({s3});
  Stat b = blocked_stats({s11});
  const double sigma = std::sqrt(a.sigma * a.sigma + b.sigma * b.sigma);
  EXPECT_NEAR(a.value, b.value, 5.0 * sigma);
}

TEST(Equilibrium, MergedRunEqualsJointAnalysis) {
  Model mp = gaussian_model(1, 2, 4, 1.0, 1.0, 0.1, 0.2);
  McParams mc;
  mc.sweeps = 800;
  mc.thermalization = 200;
  mc.chains = 1;
  mc.seed = 900;
  auto r1 = qcr::run(mp, mc);
  mc.seed = 901;
  auto r2 = qcr::run(mp, mc);
  auto joint = Accumulator::merge(r1.acc, r2.acc);
  // both sides used chain id 0, so the merge concatenates in call order
  ASSERT_EQ(joint.segments().size(), 1u);
  EXPECT_EQ(joint.n_samples(), r1.acc.n_samples() + r2.acc.n_samples());
  EXPECT_EQ(joint.segments()[0].m[0], r1.acc.segments()[0].m[0]);
}

}  // namespace
