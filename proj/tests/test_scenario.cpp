// Copyright 2026 The tradenet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace tradenet {
namespace {

using testing::fixture;
using testing::Q;

std::string error_of(const std::string& text) {
  try {
    scenario_from_json(parse_json_text(text, "t.json"));
  } catch (const ScenarioError& e) {
    return e.what();
  }
  return "";
}

TEST(Scenario, EveryFixtureLoads) {
  for (const auto& name : testing::fixture_names()) EXPECT_NO_THROW(fixture(name)) << name;
}

TEST(Scenario, RoundTripsMarkets) {
  for (const auto& name : testing::fixture_names()) {
    Market a = fixture(name).market;
    Market b = market_from_json(market_to_json(a));
    ASSERT_EQ(a.num_trades(), b.num_trades());
    for (std::size_t i = 0; i < a.num_agents(); ++i)
      for_each_bundle(a, i, [&](TradeMask x) { EXPECT_EQ(a.value(i, x), b.value(i, x)) << name; });
  }
}

TEST(Scenario, NumbersAreExact) {
  const char* text = R"({"agents":["a","b"],"trades":[{"id":"w","seller":"a","buyer":"b"}],
    "valuations":{"b":{"entries":[{"bundle":["w"],"value":0.1}]},
                  "a":{"entries":[{"bundle":["w"],"value":"-1/3"}]}}})";
  Market m = market_from_json(parse_json_text(text, "t"));
  EXPECT_EQ(m.value(1, 1), ExtValue(Q("1/10")));
  EXPECT_EQ(m.value(0, 1), ExtValue(Q("-1/3")));
}

TEST(Scenario, ValidationErrorsCarryContext) {
  EXPECT_NE(error_of(R"({"agents":["a"],)").find("t.json:1:"), std::string::npos);
  EXPECT_NE(error_of("{\n\"agents\": [\"a\",\n}").find("t.json:3:"), std::string::npos);
  EXPECT_NE(error_of(R"({"agents":["a","b"],"trades":[{"id":"w","seller":"a","buyer":"a"}]})")
                .find("same buyer and seller"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"agents":["a","b"],"trades":[{"id":"w","seller":"a","buyer":"b"}],
      "valuations":{"a":{"entries":[{"bundle":["w"],"value":"x"}]}}})")
                .find("valuations.a.entries[0].value"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"agents":["a","b"],"trades":[],"runs":{"r":{"schedule":"none"}}})").find("unknown schedule"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"agents":["a","b"],"trades":[],"schedules":{"s":["c"]}})").find("schedules.s"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"agents":["a","b"],"trades":[{"id":"w","seller":"a","buyer":"b"}],
      "valuations":{"a":{"entries":[{"bundle":[],"value":1}]}}})")
                .find("empty bundle"),
            std::string::npos);
}

TEST(Scenario, NegInfDefaultsAndNamedObjects) {
  Scenario sc = fixture("fig4");
  const Market& m = sc.market;
  std::size_t t1 = m.agent_index("t1");
  EXPECT_FALSE(m.value(t1, bit(m.trade_index("omega1"))).finite());
  EXPECT_EQ(m.value(t1, bit(m.trade_index("omega1")) | bit(m.trade_index("chi1"))), ExtValue(0L));
  Scenario f7 = fixture("fig7");
  EXPECT_EQ(f7.schedules.at("table2").size(), 7u);
  EXPECT_EQ(f7.runs.at("table3").algorithm, "clock");
  EXPECT_EQ(*f7.runs.at("table3").epsilon, Q("1/2"));
}

}  // namespace
}  // namespace tradenet
