#pragma once

// JSON readers and writers for games, families and experiment configs.
//
// Game file:    {"players": M, "actions": N, "payoffs": [[...M^N...], ...]}
// Family:       {"type": "exponential"|"uniform"|"pareto"|"tabulated",
//                "gamma": g, "eta": [...], "q": q, "table": [[t, v], ...]}
//               "table" may also be a list of per-action tables.
// Experiment:   see ExperimentConfig below; paths are relative to the config file.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "seob/analysis.hpp"
#include "seob/belief.hpp"
#include "seob/dynamics.hpp"
#include "seob/errors.hpp"
#include "seob/game.hpp"

namespace seob {

using Json = nlohmann::json;

inline Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw InvalidInput("cannot parse " + path.string() + ": " + e.what());
  }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << text;
  if (!out) throw InvalidInput("write failed for " + path.string());
}

inline Vector vector_from_json(const Json& j, const std::string& what) {
  if (!j.is_array()) throw InvalidInput(what + " must be an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw InvalidInput(what + " must be an array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

inline Json vector_to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Json profile_to_json(const StrategyProfile& P) {
  Json a = Json::array();
  for (const auto& p : P.strategies()) a.push_back(vector_to_json(p));
  return a;
}

namespace detail {

template <class T>
T required(const Json& j, const char* key, const std::string& what) {
  if (!j.contains(key)) throw InvalidInput(what + " is missing \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw InvalidInput(what + " has a malformed \"" + key + "\"");
  }
}

template <class T>
T optional_value(const Json& j, const char* key, T fallback, const std::string& what) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw InvalidInput(what + " has a malformed \"" + key + "\"");
  }
}

inline TabulatedFamily::Table table_from_json(const Json& j) {
  if (!j.is_array()) throw InvalidInput("quantile table must be a list of [t, value] pairs");
  TabulatedFamily::Table tab;
  for (const auto& knot : j) {
    if (!knot.is_array() || knot.size() != 2 || !knot[0].is_number() || !knot[1].is_number()) {
      throw InvalidInput("quantile table must be a list of [t, value] pairs");
    }
    tab.emplace_back(knot[0].get<double>(), knot[1].get<double>());
  }
  return tab;
}

}  // namespace detail

inline Game game_from_json(const Json& j) {
  if (!j.is_object()) throw InvalidInput("game must be a JSON object");
  const int m = detail::required<int>(j, "players", "game");
  const int n = detail::required<int>(j, "actions", "game");
  if (!j.contains("payoffs") || !j["payoffs"].is_array()) {
    throw InvalidInput("game is missing the \"payoffs\" array");
  }
  std::vector<std::vector<double>> payoffs;
  for (const auto& t : j["payoffs"]) {
    const Vector v = vector_from_json(t, "payoff tensor");
    payoffs.emplace_back(v.data(), v.data() + v.size());
  }
  return Game(m, n, std::move(payoffs));
}

inline Json game_to_json(const Game& g) {
  Json t = Json::array();
  for (int j = 0; j < g.num_players(); ++j) {
    const auto s = g.tensor(j);
    t.push_back(std::vector<double>(s.begin(), s.end()));
  }
  return {{"players", g.num_players()}, {"actions", g.num_actions()}, {"payoffs", t}};
}

inline Game load_game(const std::filesystem::path& path) { return game_from_json(read_json_file(path)); }

// `actions` fills in eta (all ones) and the per-action table count when omitted.
inline MarginalFamily family_from_json(const Json& j, int actions) {
  const std::string what = "family";
  if (!j.is_object()) throw InvalidInput("family must be a JSON object");
  const auto type = detail::required<std::string>(j, "type", what);
  auto weights = [&]() -> Vector {
    if (!j.contains("eta")) return Vector::Ones(actions);
    Vector eta = vector_from_json(j["eta"], "eta");
    if (eta.size() != actions) throw InvalidInput("eta has the wrong length");
    return eta;
  };
  if (type == "exponential") {
    return MarginalFamily::exponential(detail::required<double>(j, "gamma", what), weights());
  }
  if (type == "uniform") {
    return MarginalFamily::uniform(detail::required<double>(j, "gamma", what), actions);
  }
  if (type == "pareto") {
    return MarginalFamily::pareto(detail::required<double>(j, "gamma", what),
                                  detail::required<double>(j, "q", what), weights());
  }
  if (type == "tabulated") {
    if (!j.contains("table") || !j["table"].is_array() || j["table"].empty()) {
      throw InvalidInput("tabulated family needs a \"table\"");
    }
    const Json& t = j["table"];
    std::vector<TabulatedFamily::Table> tables;
    const bool per_action = t[0].is_array() && !t[0].empty() && t[0][0].is_array();
    if (per_action) {
      for (const auto& tab : t) tables.push_back(detail::table_from_json(tab));
    } else {
      tables.assign(static_cast<std::size_t>(actions), detail::table_from_json(t));
    }
    return MarginalFamily::tabulated(std::move(tables));
  }
  throw InvalidInput("unknown family type \"" + type + "\"");
}

inline Json family_to_json(const MarginalFamily& fam) {
  return std::visit(
      detail::overloaded{
          [](const ExponentialFamily& f) -> Json {
            return {{"type", "exponential"}, {"gamma", f.gamma}, {"eta", vector_to_json(f.eta)}};
          },
          [](const UniformFamily& f) -> Json {
            return {{"type", "uniform"}, {"gamma", f.gamma}};
          },
          [](const ParetoFamily& f) -> Json {
            return {{"type", "pareto"}, {"gamma", f.gamma}, {"q", f.q}, {"eta", vector_to_json(f.eta)}};
          },
          [](const TabulatedFamily& f) -> Json {
            Json t = Json::array();
            for (const auto& tab : f.tables) {
              Json a = Json::array();
              for (const auto& [x, v] : tab) a.push_back({x, v});
              t.push_back(a);
            }
            return {{"type", "tabulated"}, {"table", t}};
          }},
      fam.variant());
}

// A single family object is shared by every player; a list gives one per player.
inline FamilyList families_from_json(const Json& j, const Game& game) {
  FamilyList out;
  if (j.is_array()) {
    if (j.size() != static_cast<std::size_t>(game.num_players())) {
      throw InvalidInput("family list has " + std::to_string(j.size()) + " entries for " +
                         std::to_string(game.num_players()) + " players");
    }
    for (const auto& f : j) out.push_back(family_from_json(f, game.num_actions()));
  } else {
    const auto fam = family_from_json(j, game.num_actions());
    out.assign(static_cast<std::size_t>(game.num_players()), fam);
  }
  check_families(game, out);
  return out;
}

inline StepSchedule schedule_from_json(const Json& j) {
  if (!j.is_object()) throw InvalidInput("schedule must be a JSON object");
  const auto type = detail::required<std::string>(j, "type", "schedule");
  const double c = detail::optional_value<double>(j, "c", 1.0, "schedule");
  if (type == "power") return StepSchedule::power(c, detail::required<double>(j, "a", "schedule"));
  if (type == "constant") return StepSchedule::constant(c);
  throw InvalidInput("unknown schedule type \"" + type + "\"");
}

inline Json schedule_to_json(const StepSchedule& s) {
  if (s.kind() == StepSchedule::Kind::Constant) return {{"type", "constant"}, {"c", s.scale()}};
  return {{"type", "power"}, {"c", s.scale()}, {"a", s.exponent()}};
}

struct Tolerances {
  double residual = 1e-3;         // simulate: warning threshold on the final residual
  double solve_residual = 1e-9;   // solve: warning threshold
};

struct SolverSettings {
  double damping = 0.5;
  double tol = 1e-12;
  long max_iter = 100000;
};

struct ExperimentConfig {
  std::filesystem::path source;      // config file, empty when built in code
  std::filesystem::path game_path;
  Game game;
  FamilyList risk_families;
  FamilyList belief_families;
  StepSchedule schedule = StepSchedule::power(1.0, 0.6);
  long horizon = 10000;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  long downsample = 1;
  double clamp = 1e-12;
  bool random_initial_estimates = false;
  std::vector<Vector> initial_estimates;
  Tolerances tolerances;
  SolverSettings solver;
  int hessian_samples = 10;
  int assumption2_draws = 1000;
};

inline ExperimentConfig experiment_from_json(const Json& j, const std::filesystem::path& base) {
  const std::string what = "config";
  if (!j.is_object()) throw InvalidInput("config must be a JSON object");
  const auto game_rel = detail::required<std::string>(j, "game", what);
  std::filesystem::path game_path = game_rel;
  if (game_path.is_relative()) game_path = base / game_path;
  ExperimentConfig c{.game_path = game_path, .game = load_game(game_path)};
  if (!j.contains("risk_families")) throw InvalidInput("config is missing \"risk_families\"");
  c.risk_families = families_from_json(j["risk_families"], c.game);
  c.belief_families = j.contains("belief_families") ? families_from_json(j["belief_families"], c.game)
                                                    : c.risk_families;
  if (j.contains("schedule")) c.schedule = schedule_from_json(j["schedule"]);
  c.horizon = detail::optional_value<long>(j, "horizon", c.horizon, what);
  c.seed = detail::optional_value<std::uint64_t>(j, "seed", c.seed, what);
  if (j.contains("output_dir")) {
    std::filesystem::path out = detail::required<std::string>(j, "output_dir", what);
    c.output_dir = out.is_relative() ? base / out : out;
  } else {
    c.output_dir = base / c.output_dir;
  }
  c.downsample = detail::optional_value<long>(j, "downsample", c.downsample, what);
  c.clamp = detail::optional_value<double>(j, "clamp", c.clamp, what);
  if (j.contains("initial_estimates")) {
    const Json& u = j["initial_estimates"];
    if (u.is_string()) {
      if (u.get<std::string>() != "random") throw InvalidInput("initial_estimates must be a list or \"random\"");
      c.random_initial_estimates = true;
    } else if (u.is_array()) {
      for (const auto& v : u) c.initial_estimates.push_back(vector_from_json(v, "initial estimate"));
    } else {
      throw InvalidInput("initial_estimates must be a list or \"random\"");
    }
  }
  if (j.contains("tolerances")) {
    const Json& t = j["tolerances"];
    c.tolerances.residual = detail::optional_value<double>(t, "residual", c.tolerances.residual, "tolerances");
    c.tolerances.solve_residual =
        detail::optional_value<double>(t, "solve_residual", c.tolerances.solve_residual, "tolerances");
  }
  if (j.contains("solver")) {
    const Json& s = j["solver"];
    c.solver.damping = detail::optional_value<double>(s, "damping", c.solver.damping, "solver");
    c.solver.tol = detail::optional_value<double>(s, "tol", c.solver.tol, "solver");
    c.solver.max_iter = detail::optional_value<long>(s, "max_iter", c.solver.max_iter, "solver");
  }
  c.hessian_samples = detail::optional_value<int>(j, "hessian_samples", c.hessian_samples, what);
  c.assumption2_draws = detail::optional_value<int>(j, "assumption2_draws", c.assumption2_draws, what);
  return c;
}

inline ExperimentConfig load_experiment(const std::filesystem::path& path) {
  ExperimentConfig c = experiment_from_json(read_json_file(path), path.parent_path());
  c.source = path;
  return c;
}

inline RunConfig run_config(const ExperimentConfig& c) {
  RunConfig r;
  r.horizon = c.horizon;
  r.schedule = c.schedule;
  r.risk_families = c.risk_families;
  r.belief_families = c.belief_families;
  r.initial_estimates = c.initial_estimates;
  r.clamp = c.clamp;
  r.seed = c.seed;
  r.random_initial_estimates = c.random_initial_estimates;
  r.downsample = c.downsample;
  return r;
}

inline Json experiment_to_json(const ExperimentConfig& c) {
  Json risk = Json::array();
  Json belief = Json::array();
  for (const auto& f : c.risk_families) risk.push_back(family_to_json(f));
  for (const auto& f : c.belief_families) belief.push_back(family_to_json(f));
  Json j = {{"game", c.game_path.string()},
            {"players", c.game.num_players()},
            {"actions", c.game.num_actions()},
            {"risk_families", risk},
            {"belief_families", belief},
            {"schedule", schedule_to_json(c.schedule)},
            {"horizon", c.horizon},
            {"seed", c.seed},
            {"output_dir", c.output_dir.string()},
            {"downsample", c.downsample},
            {"clamp", c.clamp},
            {"tolerances", {{"residual", c.tolerances.residual}, {"solve_residual", c.tolerances.solve_residual}}},
            {"solver", {{"damping", c.solver.damping}, {"tol", c.solver.tol}, {"max_iter", c.solver.max_iter}}}};
  if (c.random_initial_estimates) {
    j["initial_estimates"] = "random";
  } else if (!c.initial_estimates.empty()) {
    Json u = Json::array();
    for (const auto& v : c.initial_estimates) u.push_back(vector_to_json(v));
    j["initial_estimates"] = u;
  }
  return j;
}

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Long format: one line per (round, player, action).
inline std::string trace_csv(const Trace& trace) {
  std::ostringstream out;
  out << "round,player,action,probability,estimate,payoff,lambda\n";
  for (const auto& rec : trace.rounds) {
    for (int j = 0; j < rec.profile.num_players(); ++j) {
      const auto uj = static_cast<std::size_t>(j);
      for (int i = 0; i < rec.profile.num_actions(); ++i) {
        out << rec.round << ',' << j << ',' << i << ',' << format_double(rec.profile[j][i]) << ','
            << format_double(rec.estimates[uj][i]) << ',' << format_double(rec.payoffs[uj][i]) << ','
            << format_double(rec.step) << '\n';
      }
    }
  }
  return out.str();
}

}  // namespace seob
