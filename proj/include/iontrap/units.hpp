#pragma once

// Unit-suffixed quantity parsing ("50um", "100MHz", "9u", "4e-4") and
// shortest round-trip decimal formatting.
//
// Every dimensioned quantity accepted from the outside world (CLI flags,
// geometry spec files) must carry an explicit unit suffix; bare numbers are
// rejected to prevent unit bugs.  Dimensionless quantities are plain
// numbers and reject any suffix.

#include <charconv>
#include <cstddef>
#include <string>
#include <string_view>

#include "iontrap/errors.hpp"

namespace iontrap {

enum class Unit {
  kDimensionless,
  kLength,        // SI meters
  kVoltage,       // volts
  kFrequency,     // hertz (ordinary frequency, not angular)
  kMass,          // kilograms
  kCharge,        // coulombs
  kCapacitance,   // farads
  kResistance,    // ohms
  kTime,          // seconds
  kFieldStrength  // volts per meter
};

// Parses "<number><suffix>" into SI units for the requested dimension.
// Throws input_error on a missing/unknown suffix or malformed number.
double parse_quantity(std::string_view text, Unit unit);

// Convenience wrappers used by the CLI option handlers.
inline double parse_length(std::string_view t) { return parse_quantity(t, Unit::kLength); }
inline double parse_voltage(std::string_view t) { return parse_quantity(t, Unit::kVoltage); }
inline double parse_frequency(std::string_view t) { return parse_quantity(t, Unit::kFrequency); }
inline double parse_mass(std::string_view t) { return parse_quantity(t, Unit::kMass); }
inline double parse_charge(std::string_view t) { return parse_quantity(t, Unit::kCharge); }
inline double parse_capacitance(std::string_view t) { return parse_quantity(t, Unit::kCapacitance); }
inline double parse_resistance(std::string_view t) { return parse_quantity(t, Unit::kResistance); }
inline double parse_time(std::string_view t) { return parse_quantity(t, Unit::kTime); }
inline double parse_field(std::string_view t) { return parse_quantity(t, Unit::kFieldStrength); }
inline double parse_number(std::string_view t) { return parse_quantity(t, Unit::kDimensionless); }

// Shortest decimal representation that round-trips exactly through a
// double.  Used wherever byte-stable serialization is required.
inline std::string format_shortest(double value) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

}  // namespace iontrap
