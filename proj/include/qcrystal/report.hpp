#pragma once

/* Output writers. Every file starts with `#`-prefixed metadata (config hash,
 * seed, code version) so results stay traceable to the exact run that made
 * them; numbers render at full precision and nothing time-dependent is ever
 * written, so rerunning the same config byte-identically reproduces every
 * file. CSV carries the data tables, JSON the verdict summaries. */

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcrystal/lattice.hpp"
#include "qcrystal/observables.hpp"
#include "qcrystal/scan.hpp"

namespace qcr {

inline constexpr const char* kCodeVersion = "1.0.0";

struct OutputMeta {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
};

// shortest decimal form that parses back to the same bits (17 digits always do)
inline std::string fmt_g17(double x) {
  char buf[32];
  for (int prec = 15; prec < 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) return buf;
  }
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string hex16(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline void write_meta_lines(std::ostream& os, const OutputMeta& meta) {
  os << "# config = " << hex16(meta.config_hash) << "\n";
  os << "# seed = " << meta.seed << "\n";
  os << "# version = " << kCodeVersion << "\n";
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  return os;
}

// one row per measurement, chain-major in run order
struct MeasurementRow {
  int chain = 0;
  std::int64_t sweep = 0;
  double m_instant = 0.0;
  double action = 0.0;
};

inline void write_measurements_csv(std::ostream& os, const OutputMeta& meta,
                                   const std::vector<MeasurementRow>& rows) {
  write_meta_lines(os, meta);
  os << "chain,sweep,M_instant,action\n";
  for (const auto& r : rows)
    os << r.chain << "," << r.sweep << "," << fmt_g17(r.m_instant) << ","
       << fmt_g17(r.action) << "\n";
}

inline void write_observables_csv(std::ostream& os, const OutputMeta& meta, const Stat& M,
                                  const Stat& q2, const Stat& d_ll, const Stat& kappa) {
  write_meta_lines(os, meta);
  os << "observable,value,sigma,tau_int,n\n";
  auto row = [&os](const char* name, const Stat& s) {
    os << name << "," << fmt_g17(s.value) << "," << fmt_g17(s.sigma) << ","
       << fmt_g17(s.tau_int) << "," << s.n << "\n";
  };
  row("M", M);
  row("q2", q2);
  row("D_ll", d_ll);
  row("kappa", kappa);
}

/* Momentum-resolved table: one row per Brillouin point with the Duhamel
 * weight and, where defined, the infrared bound and margin (the zero mode
 * and J = 0 runs have no bound; those cells hold nan). */
inline void write_dhat_csv(std::ostream& os, const OutputMeta& meta, const BrillouinZone& zone,
                           const std::vector<Stat>& dhat, double J) {
  write_meta_lines(os, meta);
  const int d = zone.box.d;
  for (int j = 0; j < d; ++j) os << "p" << j + 1 << ",";
  os << "energy,dhat,sigma,bound,margin\n";
  for (std::size_t ip = 0; ip < dhat.size(); ++ip) {
    for (int j = 0; j < d; ++j) os << fmt_g17(zone.momenta[ip][j]) << ",";
    const double e = dispersion(zone.momenta[ip]);
    const bool bounded = J > 0.0 && ip != zone.zero_index();
    const double bound = bounded ? 1.0 / (J * e) : std::nan("");
    os << fmt_g17(e) << "," << fmt_g17(dhat[ip].value) << "," << fmt_g17(dhat[ip].sigma) << ","
       << fmt_g17(bound) << "," << fmt_g17(bounded ? bound - dhat[ip].value : std::nan(""))
       << "\n";
  }
}

inline const char* verdict_word(bool pass) { return pass ? "PASS" : "FAIL"; }

/* PASS/FAIL summary of the three run certificates. The infrared entry turns
 * into SKIPPED at J = 0, where the bound does not exist. */
inline void write_certificates_json(std::ostream& os, const OutputMeta& meta,
                                    const InfraredReport* ir, const MarginReport& bf,
                                    const PressureDerivative& pd) {
  nlohmann::ordered_json j;
  j["config"] = hex16(meta.config_hash);
  j["seed"] = meta.seed;
  j["version"] = kCodeVersion;

  if (ir) {
    j["infrared"]["verdict"] = verdict_word(ir->pass);
    j["infrared"]["worst_margin_sigmas"] = ir->worst_margin_sigmas;
    j["infrared"]["modes_checked"] =
        static_cast<int>(ir->entries.empty() ? 0 : ir->entries.size() - 1);
  } else {
    j["infrared"]["verdict"] = "SKIPPED";
  }
  j["bruch_falk"]["verdict"] = verdict_word(bf.pass);
  j["bruch_falk"]["value"] = bf.value;
  j["bruch_falk"]["rhs"] = bf.rhs;
  j["bruch_falk"]["margin"] = bf.margin;
  j["bruch_falk"]["sigma"] = bf.sigma;
  j["pressure_derivative"]["verdict"] = verdict_word(pd.bound_pass);
  j["pressure_derivative"]["dpdJ"] = pd.dpdJ.value;
  j["pressure_derivative"]["dpdJ_sigma"] = pd.dpdJ.sigma;
  j["pressure_derivative"]["bound_margin"] = pd.bound_margin.value;
  j["pressure_derivative"]["bound_margin_sigma"] = pd.bound_margin.sigma;
  os << j.dump(2) << "\n";
}

inline void write_scan_csv(std::ostream& os, const OutputMeta& meta,
                           const TransitionReport& rep) {
  write_meta_lines(os, meta);
  os << "L,direction,h,M,sigma_M,q2,D_ll,kappa,ir_verdict,bf_verdict,thermalized\n";
  for (const auto& p : rep.points) {
    os << p.L << "," << to_string(p.direction) << "," << fmt_g17(p.h) << "," << fmt_g17(p.M)
       << "," << fmt_g17(p.sigma_M) << "," << fmt_g17(p.q2) << "," << fmt_g17(p.D_ll) << ","
       << fmt_g17(p.kappa) << "," << to_string(p.ir) << "," << to_string(p.bf) << ","
       << (p.thermalized ? 1 : 0) << "\n";
  }
}

inline void write_transition_json(std::ostream& os, const OutputMeta& meta,
                                  const TransitionReport& rep) {
  nlohmann::ordered_json j;
  j["config"] = hex16(meta.config_hash);
  j["seed"] = meta.seed;
  j["version"] = kCodeVersion;
  j["J"] = rep.J;
  j["m"] = rep.m;
  j["jumps"] = nlohmann::ordered_json::array();
  for (const auto& jc : rep.jumps) {
    nlohmann::ordered_json e;
    e["L"] = jc.L;
    e["direction"] = to_string(jc.direction);
    e["h_low"] = jc.h_low;
    e["h_high"] = jc.h_high;
    e["delta_m"] = jc.delta_m;
    e["significance"] = jc.significance;
    j["jumps"].push_back(e);
  }
  j["hysteresis"] = nlohmann::ordered_json::array();
  for (const auto& he : rep.hysteresis) {
    nlohmann::ordered_json e;
    e["L"] = he.L;
    e["area"] = he.area;
    j["hysteresis"].push_back(e);
  }
  os << j.dump(2) << "\n";
}

struct GrrRow {
  std::string check;
  std::string parameters;
  double estimate = 0.0;
  double bound = 0.0;
  double margin = 0.0;
  double sigma = 0.0;
  std::string verdict;  // PASS, FAIL, or INFO for value-only rows
};

inline void write_grr_csv(std::ostream& os, const OutputMeta& meta,
                          const std::vector<GrrRow>& rows) {
  write_meta_lines(os, meta);
  os << "check,parameters,estimate,bound,margin,sigma,verdict\n";
  for (const auto& r : rows)
    os << r.check << "," << r.parameters << "," << fmt_g17(r.estimate) << ","
       << fmt_g17(r.bound) << "," << fmt_g17(r.margin) << "," << fmt_g17(r.sigma) << ","
       << r.verdict << "\n";
}

}  // namespace qcr
