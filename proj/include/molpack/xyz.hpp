#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "molpack/molecule.hpp"

namespace molpack {

// Parses concatenated XYZ frames:
//
//   <atom count>
//   <comment line, may contain a token "E=<float>" carrying the label>
//   <symbol> <x> <y> <z>     (atom count times)
//
// Molecules are assigned ids "m0", "m1", ... in frame order unless
// `id_prefix` overrides the "m".  Throws ParseError (citing the 1-based line
// number) on any structural problem.
std::vector<Molecule> parse_xyz(std::string_view text, std::string_view id_prefix = "m");

// Renders molecules back to concatenated XYZ text.  Coordinates and labels
// are written with enough digits to round-trip doubles exactly.
std::string format_xyz(std::span<const Molecule> molecules);

}  // namespace molpack
