#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "gridsens/grid_case.hpp"

namespace gridsens {

/// Parses a MATPOWER version-2 case (`mpc.baseMVA`, `mpc.bus`, `mpc.gen`,
/// `mpc.branch`). Other fields such as `mpc.gencost` or cell arrays are skipped.
/// Powers are converted from MW/MVAr to per unit and angles from degrees to
/// radians. PV buses without an in-service generator become PQ buses.
///
/// Throws ParseError (with line number) on malformed text and InputError on
/// semantic problems such as dangling bus references.
GridCase parse_case(std::string_view text, std::string name = {});

/// Reads and parses a case file. The case name defaults to the file stem.
GridCase load_case(const std::filesystem::path& path);

/// Writes the case back as MATPOWER text. Numbers are chosen so that
/// `parse_case(to_matpower(c)) == c` holds exactly.
std::string to_matpower(const GridCase& grid);

}  // namespace gridsens
