#pragma once

#include <iosfwd>
#include <string>

#include "ncsched/design.hpp"

namespace ncsched {

inline constexpr const char* kDesignFormat = "ncsched-design";
inline constexpr int kDesignVersion = 1;

/// YAML document with a `format`/`version` header, the scalar parameters,
/// m, p, and P1/P0 of every loop as row lists. Doubles carry 17 significant
/// digits, so a save/load round trip is exact.
void write_design(std::ostream& out, const PriorityDesign& design);
std::string design_to_string(const PriorityDesign& design);

/// Throws InvalidArgument on malformed documents, unknown keys, or a
/// version other than kDesignVersion.
PriorityDesign read_design(std::istream& in);
PriorityDesign design_from_string(const std::string& text);

void save_design(const std::string& path, const PriorityDesign& design);
PriorityDesign load_design(const std::string& path);

}  // namespace ncsched
