#include <gtest/gtest.h>

#include "gridsens/bridges.hpp"
#include "support.hpp"

namespace gridsens {
namespace {

TEST(Bridges, RadialChainIsAllBridges) {
  EXPECT_EQ(find_bridges(testing::chain3(0.1)), (std::vector<std::size_t>{0, 1}));
}

TEST(Bridges, TriangleHasNone) { EXPECT_TRUE(find_bridges(testing::triangle(0.1, 0.1)).empty()); }

TEST(Bridges, ParallelLinesAreNotBridges) { EXPECT_TRUE(find_bridges(testing::two_bus_parallel(0.1, 0.0)).empty()); }

TEST(Bridges, OpenBranchesIgnored) {
  const GridCase grid = testing::triangle(0.1, 0.1).with_branch_status(2, BranchStatus::Open);
  EXPECT_EQ(find_bridges(grid), (std::vector<std::size_t>{0, 1}));
  EXPECT_TRUE(is_connected(grid));
  EXPECT_FALSE(is_connected(grid, 0));
}

// brute force: remove each closed branch and re-test connectivity
std::vector<std::size_t> brute_force(const GridCase& grid) {
  std::vector<std::size_t> out;
  for (std::size_t l = 0; l < grid.branch_count(); ++l) {
    if (grid.branches()[l].closed() && !is_connected(grid, l)) out.push_back(l);
  }
  return out;
}

TEST(Bridges, Ieee14MatchesBruteForce) {
  const std::vector<std::size_t> bridges = find_bridges(testing::case14());
  EXPECT_EQ(bridges, brute_force(testing::case14()));
  EXPECT_EQ(bridges, (std::vector<std::size_t>{13}));  // 7-8
}

TEST(Bridges, Ieee118MatchesBruteForce) {
  EXPECT_EQ(find_bridges(testing::case118()), brute_force(testing::case118()));
}

}  // namespace
}  // namespace gridsens
