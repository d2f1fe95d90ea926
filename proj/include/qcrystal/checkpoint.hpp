#pragma once

/* Versioned binary snapshot of a run in flight: parameter hash, per-chain
 * sampler state (generator words, frozen proposal widths, path
 * configuration), and the complete measurement history. The snapshot
 * round-trips bit-exactly, so a resumed run produces the same stream of
 * numbers as one that never stopped.
 *
 * Layout (all integers and doubles little-endian):
 *   magic "QCRCHKPT" | version u32 | params_hash u64 | sweeps_done u64
 *   volume u64 | P u32 | nchains u32 | with_gamma u8
 *   per chain: rng 4xu64, width_local f64, width_shift f64, path V*P f64
 *   accumulator: nsegs u64, then per segment
 *     chain u64 | n u64 | m[n] | q2[n] | nn[n] | action[n] | doff[n*V]
 *     | glag[n*P when gamma is on]
 */

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcrystal/accumulator.hpp"
#include "qcrystal/model.hpp"
#include "qcrystal/sampler.hpp"

namespace qcr {

static_assert(std::endian::native == std::endian::little,
              "checkpoint IO writes raw host bytes and requires a little-endian host");
static_assert(sizeof(double) == 8, "checkpoint format stores 64-bit IEEE doubles");

inline constexpr char kCheckpointMagic[8] = {'Q', 'C', 'R', 'C', 'H', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/* Hash over everything the saving and the resuming run must agree on. The
 * sweep target is deliberately excluded: extending `sweeps` and resuming is
 * the normal way to lengthen a run. */
inline std::uint64_t run_params_hash(const Model& mp, const McParams& mc) {
  std::string s = mp.canonical();
  s += "|seed=" + std::to_string(mc.seed);
  s += ";chains=" + std::to_string(mc.chains);
  s += ";thermalization=" + std::to_string(mc.thermalization);
  s += ";measure_every=" + std::to_string(mc.measure_every);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", mc.proposal_width);
  s += ";width=";
  s += buf;
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

struct Checkpoint {
  std::uint64_t params_hash = 0;
  bool with_gamma = false;
  SamplerState state;
  Accumulator acc;
};

namespace detail {

class CkptReader {
 public:
  explicit CkptReader(const std::string& path) : in_(path, std::ios::binary) {
    if (!in_) throw std::runtime_error("checkpoint: cannot open " + path);
    in_.seekg(0, std::ios::end);
    remaining_ = static_cast<std::uint64_t>(in_.tellg());
    in_.seekg(0, std::ios::beg);
  }

  void bytes(void* dst, std::size_t n) {
    if (remaining_ < n) throw std::runtime_error("checkpoint: truncated file");
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (!in_) throw std::runtime_error("checkpoint: truncated file");
    remaining_ -= n;
  }

  std::uint32_t u32() {
    std::uint32_t v;
    bytes(&v, 4);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    bytes(&v, 8);
    return v;
  }
  double f64() {
    double v;
    bytes(&v, 8);
    return v;
  }
  // length-checked bulk read; guards the resize against corrupt counts
  void doubles(std::vector<double>& out, std::uint64_t count) {
    if (count > remaining_ / 8) throw std::runtime_error("checkpoint: truncated file");
    out.resize(static_cast<std::size_t>(count));
    if (count) bytes(out.data(), static_cast<std::size_t>(count) * 8);
  }
  std::uint64_t remaining() const { return remaining_; }

 private:
  std::ifstream in_;
  std::uint64_t remaining_ = 0;
};

inline void put(std::ofstream& os, const void* src, std::size_t n) {
  os.write(static_cast<const char*>(src), static_cast<std::streamsize>(n));
}
inline void put_u32(std::ofstream& os, std::uint32_t v) { put(os, &v, 4); }
inline void put_u64(std::ofstream& os, std::uint64_t v) { put(os, &v, 8); }
inline void put_f64(std::ofstream& os, double v) { put(os, &v, 8); }

}  // namespace detail

inline void checkpoint_save(const std::string& path, std::uint64_t params_hash,
                            const SamplerState& st, const Accumulator& acc) {
  const std::size_t nchains = st.configs.size();
  if (nchains == 0 || st.rng_states.size() != nchains || st.widths.size() != nchains)
    throw std::invalid_argument("checkpoint: inconsistent chain state");
  const std::size_t V = st.configs[0].volume;
  const int P = st.configs[0].P;
  for (const auto& cfg : st.configs) {
    if (cfg.volume != V || cfg.P != P || cfg.w.size() != V * static_cast<std::size_t>(P))
      throw std::invalid_argument("checkpoint: chain configurations disagree in shape");
  }
  if (acc.volume() != V || acc.slices() != P)
    throw std::invalid_argument("checkpoint: accumulator shape does not match configurations");

  // write to a sibling temp file and rename, so an interrupted save never
  // leaves a half-written checkpoint under the real name
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("checkpoint: cannot open " + tmp + " for writing");
    detail::put(os, kCheckpointMagic, 8);
    detail::put_u32(os, kCheckpointVersion);
    detail::put_u64(os, params_hash);
    detail::put_u64(os, static_cast<std::uint64_t>(st.sweeps_done));
    detail::put_u64(os, static_cast<std::uint64_t>(V));
    detail::put_u32(os, static_cast<std::uint32_t>(P));
    detail::put_u32(os, static_cast<std::uint32_t>(nchains));
    const std::uint8_t g = acc.with_gamma() ? 1 : 0;
    detail::put(os, &g, 1);

    for (std::size_t c = 0; c < nchains; ++c) {
      for (std::uint64_t w : st.rng_states[c]) detail::put_u64(os, w);
      detail::put_f64(os, st.widths[c].local);
      detail::put_f64(os, st.widths[c].shift);
      detail::put(os, st.configs[c].w.data(), st.configs[c].w.size() * 8);
    }

    detail::put_u64(os, static_cast<std::uint64_t>(acc.segments().size()));
    for (const auto& seg : acc.segments()) {
      detail::put_u64(os, seg.chain);
      detail::put_u64(os, static_cast<std::uint64_t>(seg.n));
      detail::put(os, seg.m.data(), seg.m.size() * 8);
      detail::put(os, seg.q2.data(), seg.q2.size() * 8);
      detail::put(os, seg.nn.data(), seg.nn.size() * 8);
      detail::put(os, seg.action.data(), seg.action.size() * 8);
      detail::put(os, seg.doff.data(), seg.doff.size() * 8);
      detail::put(os, seg.glag.data(), seg.glag.size() * 8);
    }
    os.flush();
    if (!os) throw std::runtime_error("checkpoint: write to " + tmp + " failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("checkpoint: cannot move " + tmp + " into place");
}

inline Checkpoint checkpoint_load(const std::string& path) {
  detail::CkptReader r(path);

  char magic[8];
  r.bytes(magic, 8);
  if (std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw std::runtime_error("checkpoint: " + path + " is not a checkpoint file");
  const std::uint32_t ver = r.u32();
  if (ver != kCheckpointVersion)
    throw std::runtime_error("checkpoint: version mismatch (file has " + std::to_string(ver) +
                             ", this build reads " + std::to_string(kCheckpointVersion) + ")");

  Checkpoint ck;
  ck.params_hash = r.u64();
  ck.state.sweeps_done = static_cast<std::int64_t>(r.u64());
  const std::uint64_t V = r.u64();
  const std::uint32_t P = r.u32();
  const std::uint32_t nchains = r.u32();
  std::uint8_t g = 0;
  r.bytes(&g, 1);
  if (V == 0 || P < 2 || nchains == 0 || g > 1)
    throw std::runtime_error("checkpoint: corrupt header");
  ck.with_gamma = g == 1;

  for (std::uint32_t c = 0; c < nchains; ++c) {
    std::array<std::uint64_t, 4> words{};
    for (auto& w : words) w = r.u64();
    ck.state.rng_states.push_back(words);
    SweepWidths ww;
    ww.local = r.f64();
    ww.shift = r.f64();
    ck.state.widths.push_back(ww);
    PathConfig cfg(static_cast<std::size_t>(V), static_cast<int>(P));
    r.doubles(cfg.w, V * P);
    ck.state.configs.push_back(std::move(cfg));
  }

  ck.acc = Accumulator(static_cast<std::size_t>(V), static_cast<int>(P), ck.with_gamma);
  const std::uint64_t nsegs = r.u64();
  for (std::uint64_t i = 0; i < nsegs; ++i) {
    const std::uint64_t chain = r.u64();
    const std::uint64_t n = r.u64();
    Segment& seg = ck.acc.segment(chain);
    if (seg.n != 0) throw std::runtime_error("checkpoint: duplicate segment (corrupt file)");
    seg.n = static_cast<std::size_t>(n);
    r.doubles(seg.m, n);
    r.doubles(seg.q2, n);
    r.doubles(seg.nn, n);
    r.doubles(seg.action, n);
    r.doubles(seg.doff, n * V);
    r.doubles(seg.glag, ck.with_gamma ? n * P : 0);
  }
  if (r.remaining() != 0)
    throw std::runtime_error("checkpoint: trailing bytes (corrupt file)");
  return ck;
}

}  // namespace qcr
