#pragma once

// Declarative geometry spec files.
//
// UTF-8, line-oriented key/value document with `[trap]` and `[electrode]`
// sections.  Lengths carry explicit unit suffixes (nm/um/mm/m).  Example:
//
//   [trap]
//   d = 50um
//   label = five-wire
//
//   [electrode]
//   shape = rectangle
//   role = rf
//   center = -160um, 2.5um
//   width = 100um
//   height = 5um
//
// `#` starts a comment.  Serialization emits keys in a fixed order with
// numbers in shortest round-trip decimal form (always in meters), so equal
// geometries serialize byte-identically.

#include <string>

#include "iontrap/geometry.hpp"

namespace iontrap {

// Parses and validates a geometry document.  Malformed input raises
// input_error with a line-level diagnostic; geometric violations (overlaps,
// control-index gaps) raise input_error naming the offending electrodes.
CrossSectionGeometry parse_spec_file(const std::string& text);

// Inverse of parse_spec_file; output round-trips semantically and is
// byte-stable for equal inputs.
std::string serialize_spec_file(const CrossSectionGeometry& g);

}  // namespace iontrap
