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

#pragma once

#include <random>
#include <string>
#include <vector>

#include "tradenet/dynamics.hpp"
#include "tradenet/market.hpp"
#include "tradenet/reduction.hpp"

namespace tradenet {

inline long uniform_int(std::mt19937_64& rng, long lo, long hi) {
  return lo + static_cast<long>(uniform_index(rng, static_cast<std::size_t>(hi - lo + 1)));
}

struct NetworkShape {
  std::size_t min_agents = 2, max_agents = 4;
  std::size_t min_trades = 1, max_trades = 5;
};

// Agents a0.., trades w0.. with distinct random endpoints.
inline Market random_network(std::mt19937_64& rng, const NetworkShape& shape) {
  std::size_t n = static_cast<std::size_t>(uniform_int(rng, shape.min_agents, shape.max_agents));
  std::size_t k = static_cast<std::size_t>(uniform_int(rng, shape.min_trades, shape.max_trades));
  std::vector<std::string> agents;
  for (std::size_t i = 0; i < n; ++i) agents.push_back("a" + std::to_string(i));
  std::vector<Market::TradeSpec> trades;
  for (std::size_t t = 0; t < k; ++t) {
    std::size_t s = uniform_index(rng, n);
    std::size_t b = uniform_index(rng, n - 1);
    if (b >= s) ++b;
    trades.push_back({"w" + std::to_string(t), agents[s], agents[b]});
  }
  return Market("random", agents, trades);
}

// Assignment valuation: goods fill at most one of `slots` slots each, value
// is the best total weight. Such valuations are gross substitutes.
inline long assignment_value(const std::vector<std::vector<long>>& weight, const std::vector<std::size_t>& goods,
                             std::size_t g, std::uint32_t used_slots) {
  if (g == goods.size()) return 0;
  long best = assignment_value(weight, goods, g + 1, used_slots);
  for (std::size_t s = 0; s < weight.size(); ++s) {
    if (used_slots & (1u << s)) continue;
    best = std::max(best, weight[s][goods[g]] + assignment_value(weight, goods, g + 1, used_slots | (1u << s)));
  }
  return best;
}

// Gives agent i a random assignment-plus-linear valuation on the goods side
// of the auction reduction, mapped back through tau and normalized at the
// empty bundle.
inline void assign_substitutes_valuation(Market& m, std::size_t i, std::mt19937_64& rng, long max_weight = 6,
                                         long max_linear = 3) {
  std::size_t d = m.degree(i);
  std::size_t slots = static_cast<std::size_t>(uniform_int(rng, 1, 2));
  std::vector<std::vector<long>> weight(slots, std::vector<long>(d));
  for (auto& row : weight)
    for (auto& w : row) w = uniform_int(rng, 0, max_weight);
  std::vector<long> linear(d);
  for (auto& c : linear) c = uniform_int(rng, -max_linear, max_linear);
  const auto& inc = m.incident_list(i);
  auto vhat = [&](TradeMask goods) {
    std::vector<std::size_t> local;
    long lin = 0;
    for (std::size_t k = 0; k < d; ++k) {
      if (goods & bit(inc[k])) {
        local.push_back(k);
        lin += linear[k];
      }
    }
    return assignment_value(weight, local, 0, 0) + lin;
  };
  long base = vhat(tau(m, i, 0));
  for_each_bundle(m, i, [&](TradeMask b) {
    if (b) m.set_value(i, b, ExtValue(vhat(tau(m, i, b)) - base));
  });
}

inline Market random_substitutes_market(std::mt19937_64& rng, const NetworkShape& shape = {}) {
  Market m = random_network(rng, shape);
  for (std::size_t i = 0; i < m.num_agents(); ++i) assign_substitutes_valuation(m, i, rng);
  return m;
}

// Independent uniform integer values on every nonempty bundle.
inline Market random_general_market(std::mt19937_64& rng, const NetworkShape& shape = {}, long lo = -5,
                                    long hi = 5) {
  Market m = random_network(rng, shape);
  for (std::size_t i = 0; i < m.num_agents(); ++i)
    for_each_bundle(m, i, [&](TradeMask b) {
      if (b) m.set_value(i, b, ExtValue(uniform_int(rng, lo, hi)));
    });
  return m;
}

}  // namespace tradenet
