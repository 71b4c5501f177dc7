#include "iontrap/units.hpp"

#include <array>
#include <cctype>

#include "iontrap/constants.hpp"

namespace iontrap {
namespace {

struct Suffix {
  std::string_view text;
  double factor;
};

// Longest-match tables per dimension.  Factors convert to SI.
constexpr std::array<Suffix, 4> kLengthSuffixes{{
    {"nm", 1e-9}, {"um", 1e-6}, {"mm", 1e-3}, {"m", 1.0}}};
constexpr std::array<Suffix, 4> kVoltageSuffixes{{
    {"uV", 1e-6}, {"mV", 1e-3}, {"kV", 1e3}, {"V", 1.0}}};
constexpr std::array<Suffix, 4> kFrequencySuffixes{{
    {"GHz", 1e9}, {"MHz", 1e6}, {"kHz", 1e3}, {"Hz", 1.0}}};
constexpr std::array<Suffix, 3> kMassSuffixes{{
    {"kg", 1.0}, {"u", kAtomicMassUnit}, {"g", 1e-3}}};
constexpr std::array<Suffix, 2> kChargeSuffixes{{
    {"C", 1.0}, {"e", kElementaryCharge}}};
constexpr std::array<Suffix, 4> kCapacitanceSuffixes{{
    {"pF", 1e-12}, {"nF", 1e-9}, {"uF", 1e-6}, {"F", 1.0}}};
constexpr std::array<Suffix, 4> kResistanceSuffixes{{
    {"mOhm", 1e-3}, {"kOhm", 1e3}, {"MOhm", 1e6}, {"Ohm", 1.0}}};
constexpr std::array<Suffix, 5> kTimeSuffixes{{
    {"ns", 1e-9}, {"us", 1e-6}, {"ms", 1e-3}, {"min", 60.0}, {"s", 1.0}}};
constexpr std::array<Suffix, 4> kFieldSuffixes{{
    {"GV/m", 1e9}, {"MV/m", 1e6}, {"kV/m", 1e3}, {"V/m", 1.0}}};

const char* expected_suffixes(Unit unit) {
  switch (unit) {
    case Unit::kLength: return "nm, um, mm, m";
    case Unit::kVoltage: return "uV, mV, V, kV";
    case Unit::kFrequency: return "Hz, kHz, MHz, GHz";
    case Unit::kMass: return "kg, g, u";
    case Unit::kCharge: return "C, e";
    case Unit::kCapacitance: return "pF, nF, uF, F";
    case Unit::kResistance: return "mOhm, Ohm, kOhm, MOhm";
    case Unit::kTime: return "ns, us, ms, s, min";
    case Unit::kFieldStrength: return "V/m, kV/m, MV/m, GV/m";
    case Unit::kDimensionless: return "";
  }
  return "";
}

template <std::size_t N>
double match_suffix(std::string_view text, std::string_view suffix,
                    const std::array<Suffix, N>& table, double magnitude) {
  for (const Suffix& s : table) {
    if (suffix == s.text) return magnitude * s.factor;
  }
  throw input_error("unknown unit suffix '" + std::string(suffix) + "' in '" +
                    std::string(text) + "'");
}

}  // namespace

double parse_quantity(std::string_view text, Unit unit) {
  std::string_view trimmed = text;
  while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.front())))
    trimmed.remove_prefix(1);
  while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back())))
    trimmed.remove_suffix(1);
  if (trimmed.empty()) throw input_error("empty quantity");

  double magnitude = 0.0;
  auto res = std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), magnitude);
  if (res.ec != std::errc{} || res.ptr == trimmed.data())
    throw input_error("malformed number in '" + std::string(text) + "'");
  std::string_view suffix = trimmed.substr(static_cast<std::size_t>(res.ptr - trimmed.data()));

  if (unit == Unit::kDimensionless) {
    if (!suffix.empty())
      throw input_error("unexpected unit suffix '" + std::string(suffix) +
                        "' on dimensionless value '" + std::string(text) + "'");
    return magnitude;
  }
  if (suffix.empty())
    throw input_error("missing unit on '" + std::string(text) + "' (expected one of: " +
                      expected_suffixes(unit) + ")");

  switch (unit) {
    case Unit::kLength: return match_suffix(text, suffix, kLengthSuffixes, magnitude);
    case Unit::kVoltage: return match_suffix(text, suffix, kVoltageSuffixes, magnitude);
    case Unit::kFrequency: return match_suffix(text, suffix, kFrequencySuffixes, magnitude);
    case Unit::kMass: return match_suffix(text, suffix, kMassSuffixes, magnitude);
    case Unit::kCharge: return match_suffix(text, suffix, kChargeSuffixes, magnitude);
    case Unit::kCapacitance: return match_suffix(text, suffix, kCapacitanceSuffixes, magnitude);
    case Unit::kResistance: return match_suffix(text, suffix, kResistanceSuffixes, magnitude);
    case Unit::kTime: return match_suffix(text, suffix, kTimeSuffixes, magnitude);
    case Unit::kFieldStrength: return match_suffix(text, suffix, kFieldSuffixes, magnitude);
    case Unit::kDimensionless: break;  // handled above
  }
  throw input_error("unsupported unit");
}

}  // namespace iontrap
