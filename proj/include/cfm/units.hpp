#pragma once

#include <array>
#include <cmath>
#include <string>
#include <string_view>

#include "cfm/errors.hpp"

namespace cfm {

// Pairwise energy conversions among {J, eV, Hz, cm-1, Ry, Hartree} plus the
// two length units {bohr, angstrom}.  Values are the printed ones from the
// appendix table (6 significant digits); each unit carries a single scale
// (its value in eV, resp. angstrom) so that factor(a,b)*factor(b,a) == 1
// holds to machine precision by construction.  Note the printed cm-1 -> eV
// cell (1.23935e-4) does not close against the eV -> cm-1 cell at printed
// precision; the eV-row value 8.06547e3 is taken as authoritative.
class UnitTable {
public:
  enum class Kind { Energy, Length };

  struct Unit {
    std::string_view name;
    Kind kind;
    double scale; // value of one unit in eV (energy) or angstrom (length)
  };

  static const UnitTable& instance() {
    static UnitTable t;
    return t;
  }

  // Resolves a unit name (few common spellings accepted).
  const Unit& lookup(std::string_view name) const {
    for (const Unit& u : units_) {
      if (equals(name, u.name)) return u;
    }
    // Aliases
    if (equals(name, "cm^-1") || equals(name, "1/cm") || equals(name, "wavenumber"))
      return lookup("cm-1");
    if (equals(name, "Ha") || equals(name, "hartree")) return lookup("Hartree");
    if (equals(name, "Rydberg") || equals(name, "ry")) return lookup("Ry");
    if (equals(name, "A") || equals(name, "Angstrom") || equals(name, "angstrom"))
      return lookup("AA");
    if (equals(name, "a0") || equals(name, "Bohr")) return lookup("bohr");
    throw UnknownUnit("unknown unit: " + std::string(name));
  }

  double factor(std::string_view from, std::string_view to) const {
    const Unit& a = lookup(from);
    const Unit& b = lookup(to);
    if (a.kind != b.kind)
      throw ConfigError("cannot convert between energy and length units: " +
                        std::string(from) + " -> " + std::string(to));
    if (a.name == b.name) return 1.0;
    return a.scale / b.scale;
  }

private:
  UnitTable() = default;

  static bool equals(std::string_view a, std::string_view b) { return a == b; }

  // Scales from the appendix table: J and Hz from the eV column entries,
  // cm-1 from the eV row (1 eV = 8.06547e3 cm-1), Hartree = 27.2 eV,
  // Ry = 13.6 eV (Hartree/Ry = 2 exactly), bohr = 0.529 angstrom.
  std::array<Unit, 8> units_ = {{
      {"eV", Kind::Energy, 1.0},
      {"J", Kind::Energy, 6.24151e18},
      {"Hz", Kind::Energy, 4.13570e-15},
      {"cm-1", Kind::Energy, 1.0 / 8.06547e3},
      {"Ry", Kind::Energy, 13.6},
      {"Hartree", Kind::Energy, 27.2},
      {"bohr", Kind::Length, 0.529},
      {"AA", Kind::Length, 1.0},
  }};
};

inline double convert_units(double value, std::string_view from, std::string_view to) {
  return value * UnitTable::instance().factor(from, to);
}

// Precise conversion constants used internally by presets (CODATA-quality,
// independent of the printed display table above).
namespace phys {
inline constexpr double hartree_to_cm1 = 219474.6313632;  // cm^-1 per Hartree
inline constexpr double rydberg_to_cm1 = 109737.3156816;  // cm^-1 per Ry
inline constexpr double bohr_to_angstrom = 0.529177210903;
inline constexpr double amu_to_me = 1822.888486209;       // electron masses per u
} // namespace phys

} // namespace cfm
