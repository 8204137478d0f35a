#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "cfm/errors.hpp"
#include "cfm/presets.hpp"

namespace cfm {

// INI-style run configuration: [section] blocks of key=value lines, keys
// mirroring the model symbols (D, a, r_e, C1, C2, alpha, beta, eps1, eps2,
// C3, Delta, Omega, r_a, r_b).  '#' and ';' start comments.

class IniFile {
public:
  static IniFile parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
  }

  static IniFile parse(const std::string& text, const std::string& origin = "<string>") {
    IniFile ini;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      auto cut = line.find_first_of(";#");
      if (cut != std::string::npos) line.erase(cut);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ConfigError(origin + ":" + std::to_string(lineno) + ": unterminated section");
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key=value");
      std::string key = trim(line.substr(0, eq));
      std::string val = trim(line.substr(eq + 1));
      if (key.empty())
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
      ini.values_[section + "." + key] = val;
    }
    return ini;
  }

  bool has(const std::string& section, const std::string& key) const {
    return values_.count(section + "." + key) != 0;
  }
  std::string get(const std::string& section, const std::string& key) const {
    auto it = values_.find(section + "." + key);
    if (it == values_.end())
      throw ConfigError("missing config key [" + section + "] " + key);
    return it->second;
  }
  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const {
    auto it = values_.find(section + "." + key);
    return it == values_.end() ? fallback : it->second;
  }
  double get_num(const std::string& section, const std::string& key) const {
    return to_num(get(section, key), section, key);
  }
  double get_num(const std::string& section, const std::string& key, double fallback) const {
    if (!has(section, key)) return fallback;
    return to_num(get(section, key), section, key);
  }

private:
  static std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }
  static double to_num(const std::string& v, const std::string& section,
                       const std::string& key) {
    char* end = nullptr;
    double x = std::strtod(v.c_str(), &end);
    if (!end || *end != '\0' || v.empty())
      throw ConfigError("config key [" + section + "] " + key + ": not a number: " + v);
    return x;
  }

  std::map<std::string, std::string> values_;
};

inline PotentialPtr build_potential(const IniFile& ini) {
  std::string model = ini.get("potential", "model");
  if (model == "coulomb")
    return make_coulomb(ini.get_num("potential", "Z", 1.0),
                        static_cast<int>(ini.get_num("potential", "l", 0.0)));
  if (model == "morse")
    return make_morse(ini.get_num("potential", "D"), ini.get_num("potential", "a"),
                      ini.get_num("potential", "r_e"));
  if (model == "alj")
    return make_alj(ini.get_num("potential", "C1"), ini.get_num("potential", "C2"),
                    static_cast<int>(ini.get_num("potential", "alpha", 6.0)),
                    static_cast<int>(ini.get_num("potential", "beta", 12.0)));
  if (model == "trost")
    return make_trost(ini.get_num("potential", "eps", 1.0),
                      ini.get_num("potential", "r_e", 1.0));
  if (model == "movre-0g" || model == "movre-1u") {
    MovreParams mp;
    mp.C3 = ini.get_num("potential", "C3");
    mp.Delta = ini.get_num("potential", "Delta");
    return model == "movre-0g"
               ? make_movre_0g(mp, phys::rydberg_to_cm1, phys::hartree_to_cm1)
               : make_movre_1u(mp, phys::rydberg_to_cm1, phys::hartree_to_cm1);
  }
  if (model == "gsz") {
    auto p = std::make_shared<GszPotential>(ini.get_num("potential", "Z", 18.0),
                                            ini.get_num("potential", "eps1"),
                                            ini.get_num("potential", "eps2"));
    p->l = static_cast<int>(ini.get_num("potential", "l", 0.0));
    return p;
  }
  if (model == "double-gaussian") {
    auto p = std::make_shared<DoubleGaussianPotential>(ini.get_num("potential", "D"),
                                                       ini.get_num("potential", "Omega"),
                                                       ini.get_num("potential", "r_a"));
    p->domain_min = ini.get_num("potential", "domain_min", 0.0);
    return p;
  }
  if (model == "johnson-dwp")
    return make_johnson_dwp(ini.get_num("potential", "A"), ini.get_num("potential", "B"),
                            ini.get_num("potential", "C"), ini.get_num("potential", "D"),
                            ini.get_num("potential", "r_a"), ini.get_num("potential", "r_b"));
  throw ConfigError("unknown potential model: " + model);
}

inline BoundaryKind parse_boundary(const std::string& s) {
  if (s == "dirichlet") return BoundaryKind::Dirichlet;
  if (s == "neumann") return BoundaryKind::Neumann;
  throw ConfigError("unknown boundary kind: " + s);
}

// Build a bound-state run from a config file; when `base` carries a preset
// the [solver] section only overrides what it names.
inline BoundPreset build_bound(const IniFile& ini, BoundPreset base = {}) {
  BoundPreset b = std::move(base);
  if (ini.has("potential", "model")) b.pb.pot = build_potential(ini);
  if (!b.pb.pot) throw ConfigError("config defines no potential and no preset given");
  b.pb.c = ini.get_num("solver", "c", b.pb.c);
  b.pb.r0 = ini.get_num("solver", "r0", b.pb.r0);
  b.pb.tol.truncation_error = ini.get_num("solver", "eps_T", b.pb.tol.truncation_error);
  b.pb.tol.stability_error = ini.get_num("solver", "eps_S", b.pb.tol.stability_error);
  b.pb.tol.min_step = ini.get_num("solver", "min_step", b.pb.tol.min_step);
  b.pb.tol.max_step = ini.get_num("solver", "max_step", b.pb.tol.max_step);
  b.pb.r_cap = ini.get_num("solver", "r_cap", b.pb.r_cap);
  b.pb.root_tol = ini.get_num("solver", "root_tol", b.pb.root_tol);
  if (ini.has("solver", "boundary_inner"))
    b.pb.inner = parse_boundary(ini.get("solver", "boundary_inner"));
  if (ini.has("solver", "boundary_outer"))
    b.pb.outer = parse_boundary(ini.get("solver", "boundary_outer"));
  if (ini.has("solver", "e_min") || ini.has("solver", "e_max") || ini.has("solver", "e_step")) {
    double lo = ini.get_num("solver", "e_min");
    double hi = ini.get_num("solver", "e_max");
    double step = ini.get_num("solver", "e_step");
    if (!(step > 0.0) || !(hi > lo)) throw ConfigError("bad energy grid in [solver]");
    b.grid.clear();
    for (double e = lo; e <= hi; e += step) b.grid.push_back(e);
  }
  if (b.grid.empty()) throw ConfigError("config defines no energy grid");
  b.rk4_h = ini.get_num("solver", "rk4_h", b.rk4_h);
  b.rk4_r_inner = ini.get_num("solver", "rk4_r_inner", b.rk4_r_inner);
  b.rk4_r_outer = ini.get_num("solver", "rk4_r_outer", b.rk4_r_outer);
  return b;
}

} // namespace cfm
