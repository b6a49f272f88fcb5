#pragma once
// Physical constants and the reduced-unit seam used by the MD side.
#include "tub/ensemble.hpp"
#include "tub/report.hpp"

#include <string>

namespace tub {

namespace si {
inline constexpr double hbar = 1.054571817e-34;   // J s
inline constexpr double kB = 1.380649e-23;        // J / K
inline constexpr double amu = 1.66053906660e-27;  // kg
} // namespace si

enum class UnitsMode { natural, si };

std::string to_string(UnitsMode u);
UnitsMode units_from_string(const std::string& s);

struct ConstantsRegistry {
    UnitsMode mode = UnitsMode::natural;
    double hbar = 1.0;
    double kB = 1.0;

    ThermalContext context(double T) const { return ThermalContext(T, hbar, kB); }
};

ConstantsRegistry constants(UnitsMode mode);

// Reference scales derived on demand (SI).
double planckian_time_si(double T_kelvin);
double n_hbar_si(double n_per_m3);
double thermal_wavelength_si(double mass_kg, double T_kelvin);

// Lennard-Jones reduced units mapped onto a physical species.
struct LJUnits {
    std::string species = "argon";
    double sigma_m = 3.405e-10;
    double epsilon_J = 119.8 * si::kB;
    double mass_kg = 39.948 * si::amu;

    double time_s() const;                  // sigma sqrt(m / epsilon)
    double hbar_reduced() const;            // hbar / (sigma sqrt(m epsilon))
    double temperature_K(double T_star) const;
    // Thermal context in reduced units carrying the physical hbar.
    ThermalContext reduced_context(double T_star) const { return ThermalContext(T_star, hbar_reduced(), 1.0); }
};

LJUnits argon_units();

// Registry plus the derived reference values, as printed by the CLI.
json constants_table(UnitsMode mode);

} // namespace tub
