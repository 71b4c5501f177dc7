#pragma once

// Physical constants (CODATA 2018 exact/recommended values) and a few
// numeric conventions shared across the library.  All internal units are SI.

namespace iontrap {

// Elementary charge [C].  Exact by SI definition.
inline constexpr double kElementaryCharge = 1.602176634e-19;

// Reduced Planck constant [J s].
inline constexpr double kHbar = 1.054571817e-34;

// Unified atomic mass unit [kg].
inline constexpr double kAtomicMassUnit = 1.66053906660e-27;

// Vacuum permittivity [F/m].
inline constexpr double kEpsilon0 = 8.8541878128e-12;

// Joule -> electronvolt conversion uses the elementary charge.
inline constexpr double joules_to_ev(double joules) {
  return joules / kElementaryCharge;
}

inline constexpr double kPi = 3.141592653589793238462643383279502884;

}  // namespace iontrap
