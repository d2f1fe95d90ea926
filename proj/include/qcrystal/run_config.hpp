#pragma once

/* Line-oriented run configuration: `key = value` entries grouped under
 * bracketed section headers, `#` comments, every key validated before any
 * work starts. Parsing never stops at the first problem; the caller gets the
 * complete list of errors in one pass. An empty file is a valid config and
 * yields the documented defaults.
 *
 * Sections and keys:
 *   [model]  m a J h (reals)  d L P (ints)  c2..c16 (potential coefficients;
 *            setting any cK replaces the default quartic c4 = 1 wholesale)
 *   [mc]     sweeps thermalization measure_every (ints)  proposal_width
 *            (real)  chains (int)  seed (unsigned)
 *   [grr]    p n samples (ints)  alpha theta c eps varsigma m0 (reals)
 *   [scan]   h_grid (comma list)  L_list (comma list)  direction
 *            (up|down|both)  warm_start (bool)  h_plus h_minus (reals,
 *            default +-10 times the deepest well location)
 *   [output] dir (path)
 */

#include <cctype>
#include <climits>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <string>
#include <vector>

#include "qcrystal/grr.hpp"
#include "qcrystal/model.hpp"
#include "qcrystal/sampler.hpp"
#include "qcrystal/scan.hpp"

namespace qcr {

struct RunConfig {
  Model model;
  McParams mc;
  GrrParams grr;
  int grr_samples = 4000;
  double grr_m0 = 1.0;

  std::vector<double> h_grid;  // empty until the scan command requires it
  std::vector<int> L_list;     // defaults to {model.L}
  SweepDirection direction = SweepDirection::both;
  bool warm_start = true;
  double h_plus = 0.0;   // filled from the potential when not configured
  double h_minus = 0.0;

  std::string output_dir = ".";

  SweepPlan plan() const {
    SweepPlan p;
    p.base = model;
    p.h_grid = h_grid;
    p.direction = direction;
    p.L_list = L_list;
    p.mc = mc;
    p.warm_start = warm_start;
    return p;
  }

  // canonical rendering of every effective value, used for the output hash
  std::string canonical() const {
    auto fmt = [](double x) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", x);
      return std::string(buf);
    };
    std::string s = model.canonical();
    s += "|sweeps=" + std::to_string(mc.sweeps);
    s += ";therm=" + std::to_string(mc.thermalization);
    s += ";every=" + std::to_string(mc.measure_every);
    s += ";width=" + fmt(mc.proposal_width);
    s += ";chains=" + std::to_string(mc.chains);
    s += ";seed=" + std::to_string(mc.seed);
    s += "|p=" + std::to_string(grr.p) + ";alpha=" + fmt(grr.alpha) +
         ";theta=" + fmt(grr.theta) + ";n=" + std::to_string(grr.n) + ";c=" + fmt(grr.c) +
         ";eps=" + fmt(grr.eps) + ";vs=" + fmt(grr.varsigma) +
         ";samples=" + std::to_string(grr_samples) + ";m0=" + fmt(grr_m0);
    s += "|hgrid=";
    for (std::size_t i = 0; i < h_grid.size(); ++i) s += (i ? "," : "") + fmt(h_grid[i]);
    s += ";L=";
    for (std::size_t i = 0; i < L_list.size(); ++i)
      s += (i ? "," : "") + std::to_string(L_list[i]);
    s += ";dir=" + std::string(to_string(direction));
    s += ";warm=" + std::string(warm_start ? "1" : "0");
    s += ";hp=" + fmt(h_plus) + ";hm=" + fmt(h_minus);
    return s;
  }

  std::uint64_t hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : canonical()) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    return h;
  }
};

struct ParseResult {
  RunConfig config;
  std::vector<std::string> errors;
  bool ok() const { return errors.empty(); }
};

// deepest minimum of the anharmonic part, located by grid refinement; the
// scale behind the default strong-field thresholds
inline double well_location(const Potential& v0) {
  bool zero = true;
  for (double c : v0.coeff) zero = zero && c == 0.0;
  if (zero || !v0.valid()) return 1.0;
  double lo = -30.0, hi = 30.0, best = 0.0;
  for (int pass = 0; pass < 4; ++pass) {
    double fbest = 1e300;
    const double step = (hi - lo) / 6000.0;
    for (int i = 0; i <= 6000; ++i) {
      const double x = lo + step * i;
      const double f = eval_V0(v0, x);
      if (f < fbest) {
        fbest = f;
        best = x;
      }
    }
    lo = best - 2.0 * step;
    hi = best + 2.0 * step;
  }
  return std::fabs(best) < 1e-6 ? 1.0 : std::fabs(best);
}

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline bool to_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

inline bool to_i64(const std::string& s, std::int64_t& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtoll(s.c_str(), &end, 10);
  return end == s.c_str() + s.size();
}

inline bool to_int(const std::string& s, int& out) {
  std::int64_t v;
  if (!to_i64(s, v) || v < INT_MIN || v > INT_MAX) return false;
  out = static_cast<int>(v);
  return true;
}

inline bool to_u64(const std::string& s, std::uint64_t& out) {
  if (s.empty() || s[0] == '-') return false;
  char* end = nullptr;
  out = std::strtoull(s.c_str(), &end, 10);
  return end == s.c_str() + s.size();
}

inline bool to_bool(const std::string& s, bool& out) {
  if (s == "true" || s == "1" || s == "yes") {
    out = true;
    return true;
  }
  if (s == "false" || s == "0" || s == "no") {
    out = false;
    return true;
  }
  return false;
}

template <typename T, typename Fn>
inline bool to_list(const std::string& s, std::vector<T>& out, Fn item) {
  out.clear();
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t comma = s.find(',', pos);
    const std::string tok = trim(s.substr(pos, comma == std::string::npos ? comma : comma - pos));
    T v;
    if (!item(tok, v)) return false;
    out.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return !out.empty();
}

// potential coefficient keys: c2 .. c16
inline bool coeff_key(const std::string& key, int& k) {
  if (key.size() < 2 || key[0] != 'c') return false;
  int v;
  if (!to_int(key.substr(1), v)) return false;
  if (v < 2 || v > 16) return false;
  k = v;
  return true;
}

}  // namespace detail

inline ParseResult parse_config(const std::string& text) {
  ParseResult res;
  RunConfig& cfg = res.config;
  auto err = [&](int line, const std::string& msg) {
    res.errors.push_back("line " + std::to_string(line) + ": " + msg);
  };

  std::set<std::string> seen;
  std::string section;
  bool potential_reset = false;
  bool h_plus_set = false, h_minus_set = false, l_list_set = false;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string line = text.substr(pos, nl == std::string::npos ? nl : nl - pos);
    pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    const std::size_t hash_at = line.find('#');
    if (hash_at != std::string::npos) line.erase(hash_at);
    line = detail::trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        err(line_no, "unterminated section header");
        continue;
      }
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section != "model" && section != "mc" && section != "grr" && section != "scan" &&
          section != "output") {
        err(line_no, "unknown section [" + section + "]");
        section.clear();
      }
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      err(line_no, "expected `key = value`, got \"" + line + "\"");
      continue;
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (section.empty()) {
      err(line_no, "key \"" + key + "\" appears outside any [section]");
      continue;
    }
    if (key.empty() || val.empty()) {
      err(line_no, "empty key or value");
      continue;
    }
    if (!seen.insert(section + "." + key).second) {
      err(line_no, "duplicate key \"" + key + "\" in [" + section + "]");
      continue;
    }

    auto bad_value = [&](const char* what) {
      err(line_no, "[" + section + "] " + key + ": expected " + what + ", got \"" + val + "\"");
    };

    if (section == "model") {
      int ck;
      double dv;
      int iv;
      if (key == "m" || key == "a" || key == "J" || key == "h") {
        if (!detail::to_double(val, dv)) {
          bad_value("a real number");
          continue;
        }
        if (key == "m") cfg.model.m = dv;
        else if (key == "a") cfg.model.a = dv;
        else if (key == "J") cfg.model.J = dv;
        else cfg.model.h = dv;
      } else if (key == "d" || key == "L" || key == "P") {
        if (!detail::to_int(val, iv)) {
          bad_value("an integer");
          continue;
        }
        if (key == "d") cfg.model.d = iv;
        else if (key == "L") cfg.model.L = iv;
        else cfg.model.P = iv;
      } else if (detail::coeff_key(key, ck)) {
        if (!detail::to_double(val, dv)) {
          bad_value("a real number");
          continue;
        }
        if (!potential_reset) {
          cfg.model.v0.coeff.assign(5, 0.0);  // explicit potential replaces the default
          potential_reset = true;
        }
        if (cfg.model.v0.coeff.size() < static_cast<std::size_t>(ck + 1))
          cfg.model.v0.coeff.resize(ck + 1, 0.0);
        cfg.model.v0.coeff[ck] = dv;
      } else {
        err(line_no, "unknown key \"" + key + "\" in [model]");
      }
    } else if (section == "mc") {
      std::int64_t lv;
      double dv;
      int iv;
      std::uint64_t uv;
      if (key == "sweeps" || key == "thermalization" || key == "measure_every") {
        if (!detail::to_i64(val, lv)) {
          bad_value("an integer");
          continue;
        }
        if (key == "sweeps") cfg.mc.sweeps = lv;
        else if (key == "thermalization") cfg.mc.thermalization = lv;
        else cfg.mc.measure_every = lv;
      } else if (key == "proposal_width") {
        if (!detail::to_double(val, dv)) {
          bad_value("a real number");
          continue;
        }
        cfg.mc.proposal_width = dv;
      } else if (key == "chains") {
        if (!detail::to_int(val, iv)) {
          bad_value("an integer");
          continue;
        }
        cfg.mc.chains = iv;
      } else if (key == "seed") {
        if (!detail::to_u64(val, uv)) {
          bad_value("an unsigned integer");
          continue;
        }
        cfg.mc.seed = uv;
      } else {
        err(line_no, "unknown key \"" + key + "\" in [mc]");
      }
    } else if (section == "grr") {
      double dv;
      int iv;
      if (key == "p" || key == "n" || key == "samples") {
        if (!detail::to_int(val, iv)) {
          bad_value("an integer");
          continue;
        }
        if (key == "p") cfg.grr.p = iv;
        else if (key == "n") cfg.grr.n = iv;
        else cfg.grr_samples = iv;
      } else if (key == "alpha" || key == "theta" || key == "c" || key == "eps" ||
                 key == "varsigma" || key == "m0") {
        if (!detail::to_double(val, dv)) {
          bad_value("a real number");
          continue;
        }
        if (key == "alpha") cfg.grr.alpha = dv;
        else if (key == "theta") cfg.grr.theta = dv;
        else if (key == "c") cfg.grr.c = dv;
        else if (key == "eps") cfg.grr.eps = dv;
        else if (key == "varsigma") cfg.grr.varsigma = dv;
        else cfg.grr_m0 = dv;
      } else {
        err(line_no, "unknown key \"" + key + "\" in [grr]");
      }
    } else if (section == "scan") {
      double dv;
      if (key == "h_grid") {
        if (!detail::to_list<double>(val, cfg.h_grid, detail::to_double))
          bad_value("a comma-separated list of reals");
      } else if (key == "L_list") {
        if (!detail::to_list<int>(val, cfg.L_list, detail::to_int))
          bad_value("a comma-separated list of integers");
        else
          l_list_set = true;
      } else if (key == "direction") {
        if (val == "up") cfg.direction = SweepDirection::up;
        else if (val == "down") cfg.direction = SweepDirection::down;
        else if (val == "both") cfg.direction = SweepDirection::both;
        else bad_value("up, down, or both");
      } else if (key == "warm_start") {
        bool bv;
        if (!detail::to_bool(val, bv)) {
          bad_value("true or false");
          continue;
        }
        cfg.warm_start = bv;
      } else if (key == "h_plus" || key == "h_minus") {
        if (!detail::to_double(val, dv)) {
          bad_value("a real number");
          continue;
        }
        if (key == "h_plus") {
          cfg.h_plus = dv;
          h_plus_set = true;
        } else {
          cfg.h_minus = dv;
          h_minus_set = true;
        }
      } else {
        err(line_no, "unknown key \"" + key + "\" in [scan]");
      }
    } else if (section == "output") {
      if (key == "dir") {
        cfg.output_dir = val;
      } else {
        err(line_no, "unknown key \"" + key + "\" in [output]");
      }
    }
  }

  if (!l_list_set) cfg.L_list = {cfg.model.L};
  const double scale = well_location(cfg.model.v0);
  if (!h_plus_set) cfg.h_plus = 10.0 * scale;
  if (!h_minus_set) cfg.h_minus = -10.0 * scale;

  for (auto& e : cfg.model.validate()) res.errors.push_back(e);
  for (auto& e : cfg.mc.validate()) res.errors.push_back(e);
  try {
    validate_grr(cfg.grr);
  } catch (const std::invalid_argument& e) {
    res.errors.push_back(e.what());
  }
  if (cfg.grr_samples < 2) res.errors.push_back("grr: samples must be >= 2");
  if (cfg.grr_m0 <= 0.0) res.errors.push_back("grr: m0 must be > 0");
  for (std::size_t i = 1; i < cfg.h_grid.size(); ++i)
    if (cfg.h_grid[i] <= cfg.h_grid[i - 1]) {
      res.errors.push_back("scan: h_grid must be strictly ascending");
      break;
    }
  for (int L : cfg.L_list)
    if (L < 1) {
      res.errors.push_back("scan: box sizes must be >= 1");
      break;
    }
  if (cfg.h_plus <= cfg.h_minus) res.errors.push_back("scan: h_plus must exceed h_minus");
  return res;
}

}  // namespace qcr
