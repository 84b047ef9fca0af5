#pragma once

#include <optional>
#include <vector>

#include "gridsens/grid_case.hpp"

namespace gridsens {

/// Closed branches whose removal disconnects the closed-branch graph
/// (low-link DFS; parallel branches between one bus pair are never bridges).
std::vector<std::size_t> find_bridges(const GridCase& grid);

/// True when every bus is reachable over closed branches, optionally
/// ignoring one branch.
bool is_connected(const GridCase& grid, std::optional<std::size_t> skip_branch = std::nullopt);

}  // namespace gridsens
