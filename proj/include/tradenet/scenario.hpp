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

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tradenet/game.hpp"
#include "tradenet/market.hpp"

namespace tradenet {

using Json = nlohmann::ordered_json;

class ScenarioError : public Error {
 public:
  using Error::Error;
};

struct RunConfig {
  std::string algorithm = "offers";  // offers | clock
  std::optional<Rational> epsilon;
  std::size_t rounds = 1000000;
  Rational R = 0;
  std::optional<std::string> schedule;
  std::optional<std::string> initial;  // offer profile name, or price arrangement name
  std::uint64_t seed = 0;
};

struct Scenario {
  Market market;
  std::map<std::string, RunConfig> runs;
  std::map<std::string, std::vector<std::size_t>> schedules;
  std::map<std::string, OfferProfile> offer_profiles;
  std::map<std::string, Arrangement> arrangements;
};

// Integers, decimal strings, "a/b" strings; JSON floats go through their
// shortest decimal text.
inline Rational json_rational(const Json& j, const std::string& where) {
  try {
    if (j.is_number_integer()) return Rational(j.dump());
    if (j.is_number_float()) return parse_rational(j.dump());
    if (j.is_string()) return parse_rational(j.get<std::string>());
  } catch (const std::exception& e) {
    throw ScenarioError(where + ": " + e.what());
  }
  throw ScenarioError(where + ": expected a number");
}

inline ExtValue json_ext_value(const Json& j, const std::string& where) {
  if (j.is_string() && j.get<std::string>() == "neg_inf") return ExtValue::neg_inf();
  return ExtValue(json_rational(j, where));
}

inline Json rational_json(const Rational& r) { return format_rational(r); }

inline Json ext_json(const ExtValue& v) {
  return v.finite() ? rational_json(v.value()) : Json("neg_inf");
}

inline Json bundle_json(const Market& m, TradeMask b) { return m.bundle_ids(b); }

inline TradeMask json_bundle(const Market& m, const Json& j, const std::string& where) {
  if (!j.is_array()) throw ScenarioError(where + ": expected an array of trade ids");
  TradeMask b = 0;
  for (const auto& id : j) {
    if (!id.is_string()) throw ScenarioError(where + ": trade ids must be strings");
    try {
      TradeMask t = bit(m.trade_index(id.get<std::string>()));
      if (b & t) throw ScenarioError(where + ": repeated trade '" + id.get<std::string>() + "'");
      b |= t;
    } catch (const ScenarioError&) {
      throw;
    } catch (const std::exception& e) {
      throw ScenarioError(where + ": " + e.what());
    }
  }
  return b;
}

inline const Json& require(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ScenarioError(where + ": missing '" + key + "'");
  return j.at(key);
}

inline std::string require_string(const Json& j, const std::string& where) {
  if (!j.is_string()) throw ScenarioError(where + ": expected a string");
  return j.get<std::string>();
}

inline Market market_from_json(const Json& j) {
  if (!j.is_object()) throw ScenarioError("scenario: expected an object");
  std::vector<std::string> agents;
  const Json& ja = require(j, "agents", "scenario");
  if (!ja.is_array()) throw ScenarioError("agents: expected an array");
  for (std::size_t k = 0; k < ja.size(); ++k)
    agents.push_back(require_string(ja[k], "agents[" + std::to_string(k) + "]"));
  std::vector<Market::TradeSpec> trades;
  const Json& jt = require(j, "trades", "scenario");
  if (!jt.is_array()) throw ScenarioError("trades: expected an array");
  for (std::size_t k = 0; k < jt.size(); ++k) {
    std::string w = "trades[" + std::to_string(k) + "]";
    trades.push_back({require_string(require(jt[k], "id", w), w + ".id"),
                      require_string(require(jt[k], "seller", w), w + ".seller"),
                      require_string(require(jt[k], "buyer", w), w + ".buyer")});
  }
  std::string name = j.contains("name") ? require_string(j["name"], "name") : "";
  std::optional<Market> built;
  try {
    built.emplace(name, agents, trades);
  } catch (const std::exception& e) {
    throw ScenarioError(std::string("market: ") + e.what());
  }
  Market& m = *built;
  if (j.contains("valuations")) {
    const Json& jv = j["valuations"];
    if (!jv.is_object()) throw ScenarioError("valuations: expected an object");
    for (const auto& [agent, spec] : jv.items()) {
      std::string w = "valuations." + agent;
      std::size_t i;
      try {
        i = m.agent_index(agent);
      } catch (const std::exception& e) {
        throw ScenarioError(w + ": " + e.what());
      }
      if (spec.contains("default")) m.set_default(i, json_ext_value(spec["default"], w + ".default"));
      if (spec.contains("entries")) {
        const Json& je = spec["entries"];
        if (!je.is_array()) throw ScenarioError(w + ".entries: expected an array");
        for (std::size_t k = 0; k < je.size(); ++k) {
          std::string we = w + ".entries[" + std::to_string(k) + "]";
          TradeMask b = json_bundle(m, require(je[k], "bundle", we), we + ".bundle");
          if (b & ~m.incident(i)) throw ScenarioError(we + ": bundle has a trade the agent is not party to");
          ExtValue v = json_ext_value(require(je[k], "value", we), we + ".value");
          try {
            m.set_value(i, b, v);
          } catch (const std::exception& e) {
            throw ScenarioError(we + ": " + e.what());
          }
        }
      }
    }
  }
  return std::move(*built);
}

inline Json market_to_json(const Market& m) {
  Json j;
  if (!m.name().empty()) j["name"] = m.name();
  j["agents"] = m.agents();
  j["trades"] = Json::array();
  for (const auto& t : m.trades())
    j["trades"].push_back({{"id", t.id}, {"seller", m.agent_id(t.seller)}, {"buyer", m.agent_id(t.buyer)}});
  Json jv = Json::object();
  for (std::size_t i = 0; i < m.num_agents(); ++i) {
    Json entries = Json::array();
    for_each_bundle(m, i, [&](TradeMask b) {
      if (b) entries.push_back({{"bundle", bundle_json(m, b)}, {"value", ext_json(m.value(i, b))}});
    });
    jv[m.agent_id(i)] = {{"entries", entries}};
  }
  j["valuations"] = jv;
  return j;
}

inline Json offers_to_json(const Market& m, const OfferProfile& s) {
  Json b = Json::object(), sl = Json::object();
  for (std::size_t t = 0; t < m.num_trades(); ++t) {
    b[m.trade(t).id] = rational_json(s.buyer[t]);
    sl[m.trade(t).id] = rational_json(s.seller[t]);
  }
  return {{"buyer", b}, {"seller", sl}};
}

inline PriceVector json_prices(const Market& m, const Json& j, const std::string& where) {
  if (!j.is_object()) throw ScenarioError(where + ": expected a trade-id map");
  PriceVector p(m.num_trades());
  std::vector<bool> seen(m.num_trades(), false);
  for (const auto& [id, v] : j.items()) {
    std::size_t t;
    try {
      t = m.trade_index(id);
    } catch (const std::exception& e) {
      throw ScenarioError(where + ": " + e.what());
    }
    p[t] = json_rational(v, where + "." + id);
    seen[t] = true;
  }
  for (std::size_t t = 0; t < m.num_trades(); ++t)
    if (!seen[t]) throw ScenarioError(where + ": no value for trade '" + m.trade(t).id + "'");
  return p;
}

inline Json prices_to_json(const Market& m, const PriceVector& p) {
  Json j = Json::object();
  for (std::size_t t = 0; t < p.size(); ++t) j[m.trade(t).id] = rational_json(p[t]);
  return j;
}

inline OfferProfile json_offers(const Market& m, const Json& j, const std::string& where) {
  return {json_prices(m, require(j, "buyer", where), where + ".buyer"),
          json_prices(m, require(j, "seller", where), where + ".seller")};
}

inline Json arrangement_to_json(const Market& m, const Arrangement& a) {
  return {{"allocation", bundle_json(m, a.allocation)}, {"prices", prices_to_json(m, a.prices)}};
}

inline Json outcome_to_json(const Market& m, const MarketOutcome& o) {
  Json p = Json::object();
  for (const auto& [t, v] : o.prices) p[m.trade(t).id] = rational_json(v);
  return {{"allocation", bundle_json(m, o.allocation)}, {"prices", p}};
}

inline Scenario scenario_from_json(const Json& j) {
  Scenario sc{market_from_json(j), {}, {}, {}, {}};
  const Market& m = sc.market;
  if (j.contains("schedules")) {
    for (const auto& [name, seq] : j["schedules"].items()) {
      std::string w = "schedules." + name;
      if (!seq.is_array()) throw ScenarioError(w + ": expected an array of agent ids");
      std::vector<std::size_t> out;
      for (const auto& a : seq) {
        try {
          out.push_back(m.agent_index(require_string(a, w)));
        } catch (const ScenarioError&) {
          throw;
        } catch (const std::exception& e) {
          throw ScenarioError(w + ": " + e.what());
        }
      }
      sc.schedules[name] = std::move(out);
    }
  }
  if (j.contains("offer_profiles"))
    for (const auto& [name, prof] : j["offer_profiles"].items())
      sc.offer_profiles[name] = json_offers(m, prof, "offer_profiles." + name);
  if (j.contains("arrangements")) {
    for (const auto& [name, arr] : j["arrangements"].items()) {
      std::string w = "arrangements." + name;
      Arrangement a;
      a.prices = json_prices(m, require(arr, "prices", w), w + ".prices");
      a.allocation = arr.contains("allocation") ? json_bundle(m, arr["allocation"], w + ".allocation") : 0;
      sc.arrangements[name] = std::move(a);
    }
  }
  if (j.contains("runs")) {
    for (const auto& [name, run] : j["runs"].items()) {
      std::string w = "runs." + name;
      RunConfig rc;
      if (run.contains("algorithm")) rc.algorithm = require_string(run["algorithm"], w + ".algorithm");
      if (rc.algorithm != "offers" && rc.algorithm != "clock")
        throw ScenarioError(w + ".algorithm: expected 'offers' or 'clock'");
      if (run.contains("epsilon")) rc.epsilon = json_rational(run["epsilon"], w + ".epsilon");
      if (run.contains("rounds")) {
        if (!run["rounds"].is_number_unsigned()) throw ScenarioError(w + ".rounds: expected a nonnegative integer");
        rc.rounds = run["rounds"].get<std::size_t>();
      }
      if (run.contains("R")) rc.R = json_rational(run["R"], w + ".R");
      if (run.contains("seed")) {
        if (!run["seed"].is_number_unsigned()) throw ScenarioError(w + ".seed: expected a nonnegative integer");
        rc.seed = run["seed"].get<std::uint64_t>();
      }
      if (run.contains("schedule")) {
        rc.schedule = require_string(run["schedule"], w + ".schedule");
        if (!sc.schedules.count(*rc.schedule))
          throw ScenarioError(w + ".schedule: unknown schedule '" + *rc.schedule + "'");
      }
      if (run.contains("initial")) {
        rc.initial = require_string(run["initial"], w + ".initial");
        bool ok = rc.algorithm == "offers" ? sc.offer_profiles.count(*rc.initial) > 0
                                           : sc.arrangements.count(*rc.initial) > 0;
        if (!ok) throw ScenarioError(w + ".initial: unknown " +
                                     (rc.algorithm == "offers" ? "offer profile" : "arrangement") + " '" +
                                     *rc.initial + "'");
      }
      sc.runs[name] = std::move(rc);
    }
  }
  return sc;
}

// Parses text and reports JSON syntax errors with line and column.
inline Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ScenarioError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Scenario load_scenario(const std::string& path) {
  return scenario_from_json(parse_json_text(read_file(path), path));
}

}  // namespace tradenet
