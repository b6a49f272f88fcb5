#include "tub/constants.hpp"
#include "tub/errors.hpp"

#include <cmath>
#include <numbers>

namespace tub {

std::string to_string(UnitsMode u) { return u == UnitsMode::si ? "si" : "natural"; }

UnitsMode units_from_string(const std::string& s) {
    if (s == "si" || s == "SI") return UnitsMode::si;
    if (s == "natural") return UnitsMode::natural;
    throw ConfigError("unknown units mode '" + s + "' (expected si or natural)");
}

ConstantsRegistry constants(UnitsMode mode) {
    ConstantsRegistry r;
    r.mode = mode;
    if (mode == UnitsMode::si) {
        r.hbar = si::hbar;
        r.kB = si::kB;
    }
    return r;
}

double planckian_time_si(double T) { return planckian_time(ThermalContext(T, si::hbar, si::kB)); }

double n_hbar_si(double n) { return n * si::hbar; }

double thermal_wavelength_si(double m, double T) { return thermal_wavelength(m, ThermalContext(T, si::hbar, si::kB)); }

double LJUnits::time_s() const { return sigma_m * std::sqrt(mass_kg / epsilon_J); }

double LJUnits::hbar_reduced() const { return si::hbar / (sigma_m * std::sqrt(mass_kg * epsilon_J)); }

double LJUnits::temperature_K(double T_star) const { return T_star * epsilon_J / si::kB; }

LJUnits argon_units() { return LJUnits{}; }

json constants_table(UnitsMode mode) {
    const auto r = constants(mode);
    json j;
    j["units"] = to_string(mode);
    j["hbar"] = r.hbar;
    j["kB"] = r.kB;
    json d;
    d["planckian_time_300K_s"] = planckian_time_si(300.0);
    d["n_hbar_water_Pa_s"] = n_hbar_si(3.34e28);
    d["thermal_wavelength_O2_300K_m"] = thermal_wavelength_si(31.998 * si::amu, 300.0);
    const auto ar = argon_units();
    d["argon_hbar_reduced"] = ar.hbar_reduced();
    d["argon_time_unit_s"] = ar.time_s();
    d["argon_T_star_1_K"] = ar.temperature_K(1.0);
    j["derived"] = d;
    return j;
}

} // namespace tub
