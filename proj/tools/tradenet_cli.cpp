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

// tradenet: validate scenarios, run the two dynamics, analyze equilibria,
// the core and fair imputations.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "tradenet/tradenet.hpp"

namespace fs = std::filesystem;
using namespace tradenet;

namespace {

enum Exit : int { kOk = 0, kValidation = 2, kCapHit = 3, kVerification = 4, kImpossible = 5 };

constexpr const char* kFixtureEnv = "TRADENET_FIXTURES";

// Exit-code carrying failure with a JSON error body for stdout.
struct CliFailure {
  int code;
  Json body;
};

[[noreturn]] void fail(int code, const std::string& kind, const std::string& message) {
  throw CliFailure{code, {{"error", kind}, {"message", message}}};
}

// Resolves a scenario argument: a path, or a fixture name under $TRADENET_FIXTURES.
std::string resolve_scenario(const std::string& arg) {
  if (fs::exists(arg)) return arg;
  if (const char* dir = std::getenv(kFixtureEnv)) {
    for (const std::string& cand : {arg, arg + ".json"}) {
      fs::path p = fs::path(dir) / cand;
      if (fs::exists(p)) return p.string();
    }
  }
  fail(kValidation, "io", "scenario '" + arg + "' not found");
}

Scenario load(const std::string& arg) {
  try {
    return load_scenario(resolve_scenario(arg));
  } catch (const ScenarioError& e) {
    fail(kValidation, "validation", e.what());
  }
}

Rational parse_q(const std::string& text, const std::string& flag) {
  try {
    return parse_rational(text);
  } catch (const std::exception& e) {
    fail(kValidation, "validation", flag + ": " + e.what());
  }
}

Json ids_json(const Market& m, const std::vector<std::size_t>& agents) {
  Json j = Json::array();
  for (std::size_t i : agents) j.push_back(m.agent_id(i));
  return j;
}

Json imputation_json(const Market& m, const Imputation& x) {
  Json j = Json::object();
  for (std::size_t i = 0; i < x.size(); ++i) j[m.agent_id(i)] = rational_json(x[i]);
  return j;
}

// ---------------------------------------------------------------- validate

Json cmd_validate(const std::string& path) {
  Scenario sc = load(path);
  const Market& m = sc.market;
  Json agents = Json::array();
  bool all_finite = true;
  for (std::size_t i = 0; i < m.num_agents(); ++i) {
    Json a = {{"id", m.agent_id(i)}, {"degree", m.degree(i)}, {"finite", m.all_finite(i)}};
    all_finite = all_finite && m.all_finite(i);
    auto rep = is_fully_substitutable(m, i);
    a["substitutes"] = rep.substitutable;
    if (rep.witness) {
      a["witness"] = {{"p", prices_to_json(m, rep.witness->p)},
                      {"p_prime", prices_to_json(m, rep.witness->p_prime)},
                      {"bundle", bundle_json(m, rep.witness->bundle)},
                      {"condition", rep.witness->condition}};
    }
    agents.push_back(a);
  }
  for (const auto& [name, seq] : sc.schedules)
    if (seq.empty()) fail(kValidation, "validation", "schedules." + name + ": empty schedule");
  return {{"name", m.name()},
          {"n", m.num_agents()},
          {"m", m.num_trades()},
          {"delta", m.max_degree()},
          {"finite_valuations", all_finite},
          {"agents", agents},
          {"runs", [&] {
             Json r = Json::array();
             for (const auto& [name, cfg] : sc.runs) r.push_back(name);
             return r;
           }()},
          {"verified", true}};
}

// --------------------------------------------------------------------- run

struct RunOptions {
  std::string scenario, run, out, algorithm, schedule;
  std::optional<std::string> epsilon, R;
  std::optional<std::size_t> rounds;
  std::uint64_t seed = 0;
  std::size_t seeds = 0;  // 0: single run
  std::size_t workers = 0;
  bool lyapunov = false;
};

struct RunArtifacts {
  std::string trace;     // JSONL
  Json terminal;
  std::string summary;   // one CSV row without wall time
  int code = kOk;
};

Json offer_round_json(const Market& m, const OfferRound& r) {
  Json j = {{"round", r.round}};
  j["agent"] = r.agent ? Json(m.agent_id(*r.agent)) : Json(nullptr);
  j["demand"] = bundle_json(m, r.demand);
  j["offers"] = offers_to_json(m, r.offers);
  j["phi"] = r.phi;
  j["unsatisfied"] = ids_json(m, r.unsatisfied);
  return j;
}

Json price_round_json(const Market& m, const PriceRound& r) {
  Json j = {{"round", r.round}};
  j["agent"] = r.agent ? Json(m.agent_id(*r.agent)) : Json(nullptr);
  j["demand"] = bundle_json(m, r.demand);
  j["prices"] = prices_to_json(m, r.prices);
  if (r.L) j["L"] = rational_json(*r.L);
  return j;
}

// Replays the clock trace from its start and checks each recorded demand.
bool verify_price_trace(const Market& m, const PriceRunResult& r) {
  if (r.trace.empty()) return false;
  PriceVector p = r.trace.front().prices;
  for (std::size_t k = 1; k < r.trace.size(); ++k) {
    const auto& row = r.trace[k];
    if (!row.agent) return false;
    std::size_t i = *row.agent;
    if (demand_tiebreak(m, i, p) != row.demand) return false;
    for (std::size_t t : m.incident_list(i))
      if (!(row.demand & bit(t))) p[t] -= r.epsilon * m.chi(i, t);
    if (p != row.prices) return false;
  }
  return p == r.final_prices;
}

RunArtifacts execute_run(const Scenario& sc, const RunConfig& rc, Scheduler sched, bool lyapunov,
                         std::string* lyapunov_data) {
  const Market& m = sc.market;
  RunArtifacts out;
  std::ostringstream trace;
  if (rc.algorithm == "offers") {
    OfferConfig cfg;
    if (rc.epsilon) cfg.epsilon = *rc.epsilon;
    cfg.max_rounds = rc.rounds;
    cfg.initial = rc.initial ? sc.offer_profiles.at(*rc.initial) : OfferProfile::zeros(m);
    OfferRunResult r;
    try {
      r = run_offer_dynamics(m, cfg, std::move(sched));
    } catch (const SchedulerError& e) {
      fail(kValidation, "schedule", e.what());
    } catch (const Error& e) {
      fail(kValidation, "validation", e.what());
    }
    for (const auto& row : r.trace) trace << offer_round_json(m, row).dump() << "\n";
    NashReport nr = is_nash(m, r.terminal, cfg.epsilon);
    bool verified = r.converged && nr.status == NashStatus::kEpsTightNash;
    MarketOutcome o = outcome_of_offers(m, r.terminal);
    std::size_t phi = potential_phi(m, r.terminal, cfg.epsilon);
    out.terminal = {{"algorithm", "offers"},
                    {"epsilon", rational_json(cfg.epsilon)},
                    {"rounds", r.rounds},
                    {"converged", r.converged},
                    {"cap_hit", r.cap_hit},
                    {"schedule_exhausted", r.schedule_exhausted},
                    {"offers", offers_to_json(m, r.terminal)},
                    {"outcome", outcome_to_json(m, o)},
                    {"phi", phi},
                    {"verified", verified}};
    out.summary = std::to_string(r.rounds) + "," + std::to_string(phi) + "," + (r.converged ? "1" : "0");
    if (r.cap_hit || r.schedule_exhausted) out.code = kCapHit;
    else if (!verified) out.code = kVerification;
  } else {
    PriceConfig cfg;
    cfg.epsilon = rc.epsilon;
    cfg.rounds = rc.rounds;
    cfg.R = rc.R;
    cfg.initial = rc.initial ? sc.arrangements.at(*rc.initial).prices
                             : PriceVector(m.num_trades(), Rational(0));
    cfg.record_lyapunov = true;
    if (!cfg.epsilon && cfg.R <= 0) fail(kValidation, "validation", "automatic step needs R > 0");
    PriceRunResult r;
    try {
      r = run_price_dynamics(m, cfg, std::move(sched));
    } catch (const SchedulerError& e) {
      fail(kValidation, "schedule", e.what());
    } catch (const Error& e) {
      fail(kValidation, "validation", e.what());
    }
    for (const auto& row : r.trace) trace << price_round_json(m, row).dump() << "\n";
    Rational w = market_value(m);
    Rational gap = ce_gap(m, r.average, w);
    bool verified = verify_price_trace(m, r);
    out.terminal = {{"algorithm", "clock"},
                    {"epsilon", rational_json(r.epsilon)},
                    {"rounds", r.rounds},
                    {"horizon_ok", r.horizon_ok},
                    {"final_prices", prices_to_json(m, r.final_prices)},
                    {"average_prices", prices_to_json(m, r.average)},
                    {"market_value", rational_json(w)},
                    {"ce_gap_average", rational_json(gap)},
                    {"verified", verified}};
    out.summary = std::to_string(r.rounds) + "," + format_rational(gap) + ",1";
    if (r.rounds < rc.rounds) out.code = kCapHit;
    else if (!verified) out.code = kVerification;
    if (lyapunov && lyapunov_data) {
      std::ostringstream l;
      for (const auto& row : r.trace) l << row.round << " " << format_rational(*row.L) << "\n";
      *lyapunov_data = l.str();
    }
  }
  out.trace = trace.str();
  return out;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) fail(kValidation, "io", "cannot write '" + p.string() + "'");
  f << text;
}

Json cmd_run(const RunOptions& opt, int& code) {
  Scenario sc = load(opt.scenario);
  RunConfig rc;
  if (!opt.run.empty()) {
    auto it = sc.runs.find(opt.run);
    if (it == sc.runs.end()) fail(kValidation, "validation", "unknown run '" + opt.run + "'");
    rc = it->second;
  }
  if (!opt.algorithm.empty()) rc.algorithm = opt.algorithm;
  if (opt.epsilon) rc.epsilon = parse_q(*opt.epsilon, "--epsilon");
  if (opt.R) rc.R = parse_q(*opt.R, "--R");
  if (opt.rounds) rc.rounds = *opt.rounds;
  if (!opt.schedule.empty()) {
    if (!sc.schedules.count(opt.schedule)) fail(kValidation, "validation", "unknown schedule '" + opt.schedule + "'");
    rc.schedule = opt.schedule;
  }
  if (opt.seeds > 0 && rc.schedule) fail(kValidation, "validation", "seed sweeps need a random schedule");
  if (rc.initial) {
    bool ok = rc.algorithm == "offers" ? sc.offer_profiles.count(*rc.initial) > 0
                                       : sc.arrangements.count(*rc.initial) > 0;
    if (!ok) fail(kValidation, "validation", "initial state '" + *rc.initial + "' does not fit " + rc.algorithm);
  }
  fs::path dir = opt.out.empty() ? fs::path(".") : fs::path(opt.out);
  fs::create_directories(dir);

  auto one = [&](std::uint64_t seed, std::string* lyap) {
    Scheduler sched = rc.schedule ? Scheduler::scripted(sc.schedules.at(*rc.schedule)) : Scheduler::seeded(seed);
    auto t0 = std::chrono::steady_clock::now();
    RunArtifacts a = execute_run(sc, rc, std::move(sched), opt.lyapunov, lyap);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream row;
    row << seed << "," << a.summary << "," << secs << "\n";
    a.summary = row.str();
    return a;
  };
  const std::string header = "seed,rounds,terminal,converged,wall_seconds\n";
  Json result;
  if (opt.seeds == 0) {
    std::string lyap;
    RunArtifacts a = one(opt.seed, &lyap);
    write_file(dir / "trace.jsonl", a.trace);
    write_file(dir / "summary.csv", header + a.summary);
    write_file(dir / "terminal.json", a.terminal.dump(2) + "\n");
    if (opt.lyapunov && !lyap.empty()) write_file(dir / "lyapunov.dat", lyap);
    code = a.code;
    result = a.terminal;
  } else {
    std::size_t workers = opt.workers ? opt.workers : std::max(1u, std::thread::hardware_concurrency());
    std::vector<RunArtifacts> runs(opt.seeds);
    std::vector<std::future<void>> jobs;
    for (std::size_t w = 0; w < workers; ++w) {
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t k = w; k < opt.seeds; k += workers) runs[k] = one(opt.seed + k, nullptr);
      }));
    }
    for (auto& j : jobs) j.get();
    std::string summary = header;
    std::size_t ok = 0, verified = 0;
    code = kOk;
    for (std::size_t k = 0; k < opt.seeds; ++k) {
      write_file(dir / ("trace_" + std::to_string(opt.seed + k) + ".jsonl"), runs[k].trace);
      summary += runs[k].summary;
      ok += runs[k].code == kOk;
      verified += runs[k].terminal.value("verified", false);
      if (runs[k].code != kOk && code == kOk) code = runs[k].code;
    }
    write_file(dir / "summary.csv", summary);
    result = {{"runs", opt.seeds}, {"clean", ok}, {"verified_runs", verified},
              {"verified", verified == opt.seeds}};
    write_file(dir / "terminal.json", result.dump(2) + "\n");
  }
  return result;
}

// ----------------------------------------------------------------- analyze

struct AnalyzeOptions {
  std::string what, scenario, profile, arrangement;
  std::optional<std::string> epsilon;
};

Json analyze_ce(const Scenario& sc) {
  const Market& m = sc.market;
  Arrangement a;
  try {
    a = solve_ce_prices(m);
  } catch (const NoEquilibriumError& e) {
    fail(kImpossible, "no_equilibrium", e.what());
  }
  bool verified = is_competitive_equilibrium(m, a);
  if (!verified) fail(kVerification, "verification", "solved prices fail the CE check");
  Json j = {{"arrangement", arrangement_to_json(m, a)},
            {"welfare", ext_json(social_welfare(m, a.allocation))},
            {"market_value", rational_json(market_value(m))},
            {"lyapunov", rational_json(lyapunov_L(m, a.prices))}};
  Json utilities = Json::object();
  for (std::size_t i = 0; i < m.num_agents(); ++i)
    utilities[m.agent_id(i)] = ext_json(utility(m, i, a.allocation & m.incident(i), a.prices));
  j["utilities"] = utilities;
  j["verified"] = true;
  return j;
}

const OfferProfile& pick_profile(const Scenario& sc, const std::string& name) {
  if (name.empty()) {
    if (sc.offer_profiles.size() == 1) return sc.offer_profiles.begin()->second;
    fail(kValidation, "validation", "--profile is required");
  }
  auto it = sc.offer_profiles.find(name);
  if (it == sc.offer_profiles.end()) fail(kValidation, "validation", "unknown offer profile '" + name + "'");
  return it->second;
}

const Arrangement* pick_arrangement(const Scenario& sc, const std::string& name) {
  if (name.empty()) return nullptr;
  auto it = sc.arrangements.find(name);
  if (it == sc.arrangements.end()) fail(kValidation, "validation", "unknown arrangement '" + name + "'");
  return &it->second;
}

Json analyze_ne(const Scenario& sc, const AnalyzeOptions& opt) {
  const Market& m = sc.market;
  const OfferProfile& s = pick_profile(sc, opt.profile);
  Rational eps = opt.epsilon ? parse_q(*opt.epsilon, "--epsilon") : Rational(1, 2);
  NashReport r = is_nash(m, s, eps);
  const char* status[] = {"not_nash", "nash", "eps_tight_nash"};
  Json j = {{"epsilon", rational_json(eps)}, {"status", status[static_cast<int>(r.status)]}};
  bool verified = true;
  if (r.witness) {
    Deviation d = best_deviation(m, *r.witness, s, eps);
    j["witness"] = {{"agent", m.agent_id(*r.witness)},
                    {"current", ext_json(r.witness_current)},
                    {"deviation_bundle", bundle_json(m, d.bundle)},
                    {"deviation_utility", rational_json(d.utility)}};
    verified = r.witness_current < ExtValue(d.utility);
  }
  Json mis = Json::array();
  for (std::size_t t : r.misordered_trades) mis.push_back(m.trade(t).id);
  j["misordered_trades"] = mis;
  j["outcome"] = outcome_to_json(m, outcome_of_offers(m, s));
  j["verified"] = verified;
  return j;
}

Json analyze_extend(const Scenario& sc, const AnalyzeOptions& opt) {
  const Market& m = sc.market;
  const OfferProfile& s = pick_profile(sc, opt.profile);
  Rational eps = opt.epsilon ? parse_q(*opt.epsilon, "--epsilon") : Rational(1, 2);
  Json bound = {{"epsilon", rational_json(eps)}, {"delta", m.max_degree()},
                {"within_bound", epsilon_within_bound(m, eps)}};
  try {
    ExtensionResult r = extend_ne_to_ce(m, s, eps);
    if (!is_competitive_equilibrium(m, r.arrangement))
      fail(kVerification, "verification", "extension fails the CE check");
    bound["arrangement"] = arrangement_to_json(m, r.arrangement);
    bound["candidates_tried"] = r.candidates_tried;
    bound["verified"] = true;
    return bound;
  } catch (const ExtensionError& e) {
    using Kind = ExtensionError::Kind;
    switch (e.kind()) {
      case Kind::kNotTightNash: fail(kValidation, "not_tight_nash", e.what());
      case Kind::kNoExtensionAtBound: fail(kImpossible, "no_extension_at_bound", e.what());
      case Kind::kNoCandidate: fail(kVerification, "no_candidate", e.what());
    }
    throw;
  }
}

Json cf_json(const CharacteristicFunction& cf) {
  Json j = Json::object();
  for (Coalition c : cf.coalition_order()) j[std::to_string(c)] = rational_json(cf(c));
  return j;
}

Json analyze_core(const Scenario& sc, const AnalyzeOptions& opt) {
  const Market& m = sc.market;
  if (m.num_agents() > kMaxCoalitionPlayers) fail(kValidation, "validation", "too many agents for the core");
  CharacteristicFunction cf = characteristic_function(m);
  Json j = {{"characteristic_function", cf_json(cf)}, {"core_nonempty", core_nonempty(cf)}};
  bool verified = true;
  if (core_nonempty(cf) && m.num_agents() <= 8) {
    Json verts = Json::array();
    for (const auto& v : core_vertices(cf)) {
      verified = verified && is_core_imputation(cf, v).in_core;
      verts.push_back(imputation_json(m, v));
    }
    j["vertices"] = verts;
  }
  if (const Arrangement* a = pick_arrangement(sc, opt.arrangement)) {
    MarketOutcome o = restrict_outcome(*a);
    bool in_core = is_core_outcome(m, o, cf);
    j["outcome"] = outcome_to_json(m, o);
    j["outcome_in_core"] = in_core;
    if (m.num_agents() <= 5) {
      auto block = find_blocking_outcome(m, o);
      verified = verified && (block.has_value() != in_core);
      if (block)
        j["blocking"] = {{"coalition", ids_json(m, [&] {
                            std::vector<std::size_t> v;
                            for (std::size_t i = 0; i < m.num_agents(); ++i)
                              if (block->coalition >> i & 1) v.push_back(i);
                            return v;
                          }())},
                         {"trades", bundle_json(m, block->trades)}};
    }
  }
  j["verified"] = verified;
  return j;
}

Json analyze_fairness(const Scenario& sc) {
  const Market& m = sc.market;
  CharacteristicFunction cf = characteristic_function(m);
  if (!core_nonempty(cf)) fail(kImpossible, "empty_core", "the core is empty");
  Json j = Json::object();
  bool verified = true;
  auto add = [&](const char* name, const Imputation& x) {
    bool ok = is_core_imputation(cf, x).in_core;
    verified = verified && ok;
    j[name] = {{"imputation", imputation_json(m, x)}, {"in_core", ok}};
  };
  Imputation lmin = leximin_imputation(cf);
  add("leximin", lmin);
  add("leximax", leximax_imputation(cf));
  if (m.num_agents() <= 6) add("minvar", minvar_imputation(cf));
  TradeMask phi = efficient_allocations(m).front();
  MarketOutcome o = implement_imputation(m, phi, lmin);
  bool core_ok = is_core_outcome(m, o, cf);
  auto u = outcome_utilities(m, o);
  for (std::size_t i = 0; i < u.size(); ++i) core_ok = core_ok && u[i] == ExtValue(lmin[i]);
  verified = verified && core_ok;
  j["leximin_outcome"] = outcome_to_json(m, o);
  j["essential"] = ids_json(m, essential_agents(m));
  j["verified"] = verified;
  return j;
}

Json analyze_essential(const Scenario& sc) {
  const Market& m = sc.market;
  try {
    return {{"essential", ids_json(m, essential_agents(m))},
            {"market_value", rational_json(market_value(m))},
            {"verified", true}};
  } catch (const EssentialDisagreement& e) {
    fail(kVerification, "verification", e.what());
  }
}

Json analyze_reduce(const Scenario& sc) {
  const Market& m = sc.market;
  Auction au(m);
  bool verified = true;
  Json agents = Json::array();
  for (std::size_t i = 0; i < m.num_agents(); ++i) {
    Json vals = Json::array();
    for_each_bundle(m, i, [&](TradeMask goods) {
      vals.push_back({{"goods", bundle_json(m, goods)}, {"value", ext_json(au.value(i, goods))}});
    });
    Json a = {{"id", m.agent_id(i)}, {"auction_values", vals}};
    if (m.degree(i) <= 3) {
      auto nv = is_substitutes_by_normals(m, i);
      a["facet_normals"] = nv.normals;
      a["substitutes_by_normals"] = nv.substitutes;
      bool grid = is_fully_substitutable(m, i).substitutable;
      a["substitutes_by_grid"] = grid;
      verified = verified && grid == nv.substitutes;
    }
    agents.push_back(a);
  }
  // Demand mapping on the integer grid around the valuations.
  for (std::size_t i = 0; i < m.num_agents(); ++i) {
    PriceBox box = default_price_box(m, i);
    std::size_t d = m.degree(i);
    long lo = floor_of(box.lo).get_si(), hi = ceil_of(box.hi).get_si();
    std::size_t span = static_cast<std::size_t>(hi - lo + 1), total = 1;
    for (std::size_t k = 0; k < d && total < 4096; ++k) total *= span;
    if (total > 4096) continue;
    for (std::size_t idx = 0; idx < total; ++idx) {
      PriceVector p(m.num_trades(), Rational(0));
      std::size_t r = idx;
      for (std::size_t t : m.incident_list(i)) {
        p[t] = lo + static_cast<long>(r % span);
        r /= span;
      }
      verified = verified && verify_demand_mapping(m, i, p);
    }
  }
  Json j = {{"agents", agents}};
  // tau round trip and welfare preservation on every trade set.
  if (m.num_trades() <= 16) {
    for (TradeMask phi = 0; phi <= m.all_trades(); ++phi) {
      auto psi = map_allocation(m, phi);
      verified = verified && unmap_allocation(m, psi) == phi && au.welfare(psi) == social_welfare(m, phi);
    }
  }
  try {
    Arrangement a = solve_ce_prices(m);
    auto rep = verify_ce_mapping(m, a);
    verified = verified && rep.market_ce && rep.agree();
    j["ce"] = arrangement_to_json(m, a);
    Json psi = Json::object();
    auto alloc = map_allocation(m, a.allocation);
    for (std::size_t i = 0; i < alloc.size(); ++i) psi[m.agent_id(i)] = bundle_json(m, alloc[i]);
    j["auction_allocation"] = psi;
    j["auction_ce"] = rep.auction_ce;
  } catch (const NoEquilibriumError&) {
    j["ce"] = nullptr;
  }
  j["verified"] = verified;
  if (!verified) throw CliFailure{kVerification, j};
  return j;
}

Json cmd_analyze(const AnalyzeOptions& opt) {
  Scenario sc = load(opt.scenario);
  if (opt.what == "ce") return analyze_ce(sc);
  if (opt.what == "ne-check") return analyze_ne(sc, opt);
  if (opt.what == "extend-ce") return analyze_extend(sc, opt);
  if (opt.what == "core") return analyze_core(sc, opt);
  if (opt.what == "fairness") return analyze_fairness(sc);
  if (opt.what == "essential") return analyze_essential(sc);
  if (opt.what == "reduce") return analyze_reduce(sc);
  fail(kValidation, "usage", "unknown analysis '" + opt.what + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trading network markets: equilibria, dynamics, core and fairness"};
  app.require_subcommand(1);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Parse a scenario and report its invariants");
  validate->add_option("scenario", validate_path, "Scenario file or fixture name")->required();

  RunOptions ro;
  std::string format = "json";
  auto* run = app.add_subcommand("run", "Run offer or clock dynamics");
  run->add_option("--scenario", ro.scenario, "Scenario file or fixture name")->required();
  run->add_option("--run", ro.run, "Named run config in the scenario");
  run->add_option("--algorithm", ro.algorithm, "offers or clock")->check(CLI::IsMember({"offers", "clock"}));
  run->add_option("--seed", ro.seed, "RNG seed (first seed of a sweep)");
  run->add_option("--seeds", ro.seeds, "Number of seeds in a sweep");
  run->add_option("--workers", ro.workers, "Sweep worker threads");
  run->add_option("--epsilon", ro.epsilon, "Step or offer gap (rational)");
  run->add_option("--R", ro.R, "Price radius for the automatic clock step");
  run->add_option("--rounds", ro.rounds, "Round cap (offers) or horizon T (clock)");
  run->add_option("--schedule", ro.schedule, "Named scripted schedule");
  run->add_option("--out", ro.out, "Output directory");
  run->add_option("--format", format, "Stdout format")->check(CLI::IsMember({"json", "csv"}));
  run->add_flag("--lyapunov", ro.lyapunov, "Write (round, L) data for clock runs");

  AnalyzeOptions ao;
  auto* analyze = app.add_subcommand("analyze", "Equilibrium, core and fairness analyses");
  analyze->add_option("what", ao.what, "ce|ne-check|extend-ce|core|fairness|essential|reduce")
      ->required()
      ->check(CLI::IsMember({"ce", "ne-check", "extend-ce", "core", "fairness", "essential", "reduce"}));
  analyze->add_option("--scenario", ao.scenario, "Scenario file or fixture name")->required();
  analyze->add_option("--profile", ao.profile, "Named offer profile");
  analyze->add_option("--arrangement", ao.arrangement, "Named arrangement");
  analyze->add_option("--epsilon", ao.epsilon, "Offer gap (rational)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  }

  try {
    if (*validate) {
      std::cout << cmd_validate(validate_path).dump(2) << "\n";
      return kOk;
    }
    if (*run) {
      int code = kOk;
      Json j = cmd_run(ro, code);
      if (format == "csv") {
        std::cout << read_file((fs::path(ro.out.empty() ? "." : ro.out) / "summary.csv").string());
      } else {
        std::cout << j.dump(2) << "\n";
      }
      return code;
    }
    std::cout << cmd_analyze(ao).dump(2) << "\n";
    return kOk;
  } catch (const CliFailure& f) {
    std::cout << f.body.dump(2) << "\n";
    if (f.body.contains("message")) std::cerr << "tradenet: " << f.body["message"].get<std::string>() << "\n";
    return f.code;
  } catch (const std::exception& e) {
    std::cout << Json{{"error", "internal"}, {"message", e.what()}}.dump(2) << "\n";
    std::cerr << "tradenet: " << e.what() << "\n";
    return kVerification;
  }
}
