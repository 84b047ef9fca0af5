#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gridsens/case_io.hpp"
#include "gridsens/errors.hpp"
#include "support.hpp"

namespace gridsens {
namespace {

constexpr const char* kTwoBus = R"(function mpc = two
mpc.version = '2';
mpc.baseMVA = 100;
mpc.bus = [
	1	3	0	0	0	0	1	1	0	230	1	1.1	0.9;
	2	1	50	0	0	0	1	1	0	230	1	1.1	0.9;
];
mpc.gen = [
	1	0	0	300	-300	1	100	1	250	10;
];
mpc.branch = [
	1	2	0	0.1	0	250	250	250	0	0	1	-360	360;
];
mpc.gencost = [
	2	0	0	3	0.01	40	0;
];
)";

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos);
  return text.replace(pos, from.size(), to);
}

TEST(CaseIo, ParsesMinimalTwoBusCase) {
  const GridCase grid = parse_case(kTwoBus, "two");
  EXPECT_EQ(grid.bus_count(), 2u);
  EXPECT_EQ(grid.branch_count(), 1u);
  EXPECT_EQ(grid.generators().size(), 1u);
  EXPECT_DOUBLE_EQ(grid.base_mva(), 100.0);
  EXPECT_DOUBLE_EQ(grid.buses()[1].p_load, 0.5);
  EXPECT_EQ(grid.buses()[0].kind, BusKind::Slack);
  EXPECT_DOUBLE_EQ(grid.branches()[0].x, 0.1);
  EXPECT_DOUBLE_EQ(grid.branches()[0].tap, 1.0);
  EXPECT_EQ(grid.name(), "two");
}

TEST(CaseIo, RejectsDanglingBusReference) {
  const std::string text = replace(kTwoBus, "	1	2	0	0.1", "	1	99	0	0.1");
  EXPECT_THROW(parse_case(text), InputError);
}

TEST(CaseIo, RejectsDuplicateBusIds) {
  const std::string text = replace(kTwoBus, "	2	1	50", "	1	1	50");
  EXPECT_THROW(parse_case(text), InputError);
}

TEST(CaseIo, RejectsZeroImpedanceClosedBranch) {
  const std::string text = replace(kTwoBus, "	1	2	0	0.1", "	1	2	0	0");
  EXPECT_THROW(parse_case(text), InputError);
}

TEST(CaseIo, AcceptsZeroImpedanceOpenBranch) {
  std::string text = replace(kTwoBus, "	1	2	0	0.1", "	1	2	0	0");
  text = replace(text, "0	0	1	-360", "0	0	0	-360");
  const std::string extra = "mpc.branch = [\n\t1\t2\t0\t0.1\t0\t250\t250\t250\t0\t0\t1\t-360\t360;\n";
  text = replace(text, "mpc.branch = [\n", extra);
  const GridCase grid = parse_case(text);
  ASSERT_EQ(grid.branch_count(), 2u);
  EXPECT_FALSE(grid.branches()[1].closed());
}

TEST(CaseIo, SyntaxErrorCarriesLineNumber) {
  const std::string text = replace(kTwoBus, "0	0	0	0	1	1	0	230", "0	0	x	0	1	1	0	230");
  try {
    parse_case(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 5);
  }
}

TEST(CaseIo, RejectsUnknownStatement) {
  const std::string text = std::string(kTwoBus) + "disp(mpc)\n";
  try {
    parse_case(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 17);
  }
}

TEST(CaseIo, RejectsIsolatedBusType) {
  const std::string text = replace(kTwoBus, "	2	1	50", "	2	4	50");
  EXPECT_THROW(parse_case(text), ParseError);
}

TEST(CaseIo, RejectsTwoSlackBuses) {
  const std::string text = replace(kTwoBus, "	2	1	50", "	2	3	50");
  EXPECT_THROW(parse_case(text), InputError);
}

TEST(CaseIo, PvBusWithoutGeneratorBecomesPq) {
  const std::string text = replace(kTwoBus, "	2	1	50", "	2	2	50");
  const GridCase grid = parse_case(text);
  EXPECT_EQ(grid.buses()[1].kind, BusKind::PQ);
}

TEST(CaseIo, MissingFileIsInputError) { EXPECT_THROW(load_case("no/such/case.m"), InputError); }

TEST(CaseIo, Ieee14Counts) {
  const GridCase& grid = testing::case14();
  EXPECT_EQ(grid.bus_count(), 14u);
  EXPECT_EQ(grid.branch_count(), 20u);
  EXPECT_EQ(grid.generators().size(), 5u);
  EXPECT_EQ(grid.name(), "case14");
}

TEST(CaseIo, ConvertsUnitsAndTransformerData) {
  const GridCase& grid = testing::case14();
  // bus 3 load 94.2 MW, 19 MVAr; branch 8 (4-7) is a 0.978 transformer; bus 9 shunt 19 MVAr
  EXPECT_DOUBLE_EQ(grid.buses()[2].p_load, 0.942);
  EXPECT_DOUBLE_EQ(grid.buses()[2].q_load, 0.19);
  EXPECT_DOUBLE_EQ(grid.branches()[7].tap, 0.978);
  EXPECT_DOUBLE_EQ(grid.buses()[8].b_shunt, 0.19);
  EXPECT_NEAR(grid.buses()[1].theta_init, -4.98 * std::numbers::pi / 180.0, 1e-15);
}

TEST(CaseIo, Ieee118NonContiguousIndexing) {
  const GridCase& grid = testing::case118();
  EXPECT_EQ(grid.bus_count(), 118u);
  EXPECT_EQ(grid.branch_count(), 186u);
  for (std::size_t k = 0; k < grid.bus_count(); ++k) EXPECT_EQ(grid.index_of(grid.buses()[k].id), k);
  EXPECT_THROW(grid.index_of(1000), InputError);
}

class RoundTrip : public ::testing::TestWithParam<std::string> {};

TEST_P(RoundTrip, SerializeThenParseIsIdentity) {
  const GridCase grid = load_case(testing::data_path(GetParam()));
  const GridCase again = parse_case(to_matpower(grid), grid.name());
  EXPECT_TRUE(again == grid);
  EXPECT_EQ(to_matpower(again), to_matpower(grid));
}

INSTANTIATE_TEST_SUITE_P(Cases, RoundTrip, ::testing::Values("case14.m", "case118.m", "case2383wp.m"));

TEST(CaseIo, RoundTripOfConstructedCase) {
  const GridCase grid = testing::five_bus();
  EXPECT_TRUE(parse_case(to_matpower(grid), grid.name()) == grid);
}

}  // namespace
}  // namespace gridsens
