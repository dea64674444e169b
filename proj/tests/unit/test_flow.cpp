#include <gtest/gtest.h>

#include "tsc/config.hpp"
#include "tsc/errors.hpp"
#include "tsc/flow.hpp"

namespace tsc {
namespace {

TEST(FlowProfile, SyntheticHasThreeRegimesAndRepeats) {
  const FlowProfile f = FlowProfile::synthetic();
  EXPECT_EQ(f.regime_at(0.0), "high");
  EXPECT_EQ(f.regime_at(2400.0), "medium");
  EXPECT_EQ(f.regime_at(4800.0), "low");
  EXPECT_EQ(f.regime_at(7200.0), "high");
  EXPECT_DOUBLE_EQ(f.rate(0, 100.0), f.rate(0, 7300.0));
  // The NS through+left lane is the heaviest movement in every regime.
  for (double t : {0.0, 3000.0, 6000.0}) {
    for (int l = 1; l < kNumLanes; ++l) EXPECT_GT(f.rate(0, t), f.rate(l, t));
  }
  EXPECT_GT(f.rate(0, 0.0), f.rate(0, 3000.0));
  EXPECT_GT(f.rate(0, 3000.0), f.rate(0, 6000.0));
}

TEST(FlowProfile, ZeroAndUniform) {
  const FlowProfile z = FlowProfile::zero();
  const FlowProfile u = FlowProfile::uniform(300.0);
  for (int l = 0; l < kNumLanes; ++l) {
    EXPECT_EQ(z.rate(l, 123.0), 0.0);
    EXPECT_EQ(u.rate(l, 1e6), 300.0);
  }
}

TEST(FlowProfile, ScaledMultipliesRates) {
  const FlowProfile f = FlowProfile::synthetic().scaled(0.5);
  EXPECT_DOUBLE_EQ(f.rate(0, 0.0), 0.5 * FlowProfile::synthetic().rate(0, 0.0));
}

TEST(FlowProfile, ValidationRejectsOverlapAndNegativeRates) {
  FlowProfile f = FlowProfile::zero();
  f.segments[0] = {{0, 100, 10}, {50, 150, 10}};
  EXPECT_THROW(f.validate(), ConfigError);
  f.segments[0] = {{0, 100, -1}};
  EXPECT_THROW(f.validate(), ConfigError);
  f.segments[0] = {{100, 0, 1}};
  EXPECT_THROW(f.validate(), ConfigError);
}

TEST(FlowConfig, LaneSegmentsAndRegimes) {
  const auto cfg = KeyValueConfig::parse(
      "flow.preset = zero\n"
      "flow.N0 = 0 100 720; 100 200 360\n"
      "flow.regimes = 0 100 peak; 100 200 off\n");
  const FlowProfile f = flow_from_config(cfg);
  EXPECT_DOUBLE_EQ(f.rate(0, 50.0), 720.0);
  EXPECT_DOUBLE_EQ(f.rate(0, 150.0), 360.0);
  EXPECT_DOUBLE_EQ(f.rate(0, 250.0), 0.0);
  EXPECT_DOUBLE_EQ(f.rate(1, 50.0), 0.0);
  EXPECT_EQ(f.regime_at(150.0), "off");
  EXPECT_THROW(flow_from_config(KeyValueConfig::parse("flow.E1 = 0 10\n")),
               ConfigError);
  EXPECT_THROW(flow_from_config(KeyValueConfig::parse("flow.preset = rush\n")),
               ConfigError);
}

}  // namespace
}  // namespace tsc
