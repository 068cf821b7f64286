#pragma once

// Repeated play by risk-sensitive players with optimistic beliefs. Each round
// every player best-responds optimistically (quantal response under its
// belief family G_j) to its running estimate, receives its exact payoff
// vector, and adds the risk-adjusted payoff r_i + F_j,i^{-1}(1 - p_i) to the
// estimate with step size lambda_t.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "seob/analysis.hpp"
#include "seob/belief.hpp"
#include "seob/errors.hpp"
#include "seob/game.hpp"
#include "seob/response.hpp"
#include "seob/rng.hpp"

namespace seob {

class StepSchedule {
 public:
  enum class Kind { Constant, Power };

  static StepSchedule constant(double c) { return StepSchedule(Kind::Constant, c, 0.0); }
  static StepSchedule power(double c, double a) { return StepSchedule(Kind::Power, c, a); }

  Kind kind() const { return kind_; }
  double scale() const { return c_; }
  double exponent() const { return a_; }

  // lambda_t for t >= 1.
  double operator()(long t) const {
    if (t < 1) throw InvalidInput("step sizes are indexed from round 1");
    if (kind_ == Kind::Constant) return c_;
    return c_ * std::pow(static_cast<double>(t), -a_);
  }

  std::string describe() const {
    if (kind_ == Kind::Constant) return "constant(" + std::to_string(c_) + ")";
    return "power(" + std::to_string(c_) + ", " + std::to_string(a_) + ")";
  }

 private:
  StepSchedule(Kind k, double c, double a) : kind_(k), c_(c), a_(a) {
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidInput("step scale must be positive");
    // Exponents above 1 are representable so that they can be diagnosed.
    if (!(a >= 0.0) || !std::isfinite(a)) throw InvalidInput("step exponent must be nonnegative");
  }

  Kind kind_;
  double c_;
  double a_;
};

struct ScheduleReport {
  bool sum_diverges = false;    // sum_t lambda_t = infinity
  bool ratio_vanishes = false;  // sum lambda_t^2 / sum lambda_t -> 0
};

// Power(c, a): the sum diverges iff a <= 1; the ratio vanishes iff 0 < a <= 1
// (for a > 1 both series converge and the ratio tends to a positive limit).
// Constant(c): diverging sum, ratio tends to c.
inline ScheduleReport schedule_validate(const StepSchedule& s) {
  if (s.kind() == StepSchedule::Kind::Constant) return {true, false};
  const double a = s.exponent();
  return {a <= 1.0, a > 0.0 && a <= 1.0};
}

struct RunConfig {
  long horizon = 1;
  StepSchedule schedule = StepSchedule::power(1.0, 0.6);
  FamilyList risk_families;    // F_j: enter the estimate update and define the SE-OB target
  FamilyList belief_families;  // G_j: define how strategies are selected from estimates
  std::vector<Vector> initial_estimates;  // empty: zeros
  double clamp = 1e-12;
  std::uint64_t seed = 0;
  bool random_initial_estimates = false;  // draw u^(0) uniformly from [-1, 1] with `seed`
  long downsample = 1;                    // record every k-th round (and the last)
};

struct RoundRecord {
  long round = 0;
  double step = 0.0;
  StrategyProfile profile;
  std::vector<Vector> estimates;  // u^(t), after the update of round t
  std::vector<Vector> payoffs;    // r^(t)
};

struct Trace {
  long horizon = 0;
  long downsample = 1;
  std::vector<RoundRecord> rounds;
  StrategyProfile final_profile;
  std::vector<Vector> final_estimates;
  double final_residual = 0.0;
  double last_movement = 0.0;   // ||P^(T) - P^(T-1)||_inf
  double tail_movement = 0.0;   // max movement over the final 100 rounds
  long clamp_triggers = 0;      // coordinates with p_i < clamp in an update
};

// u + lambda (r + F^{-1}(1 - max(p, clamp))), coordinatewise.
inline Vector step_increment(const Vector& r, const Vector& p, double step,
                             const MarginalFamily& fam, double clamp,
                             long* clamp_triggers = nullptr) {
  if (r.size() != p.size() || r.size() != fam.num_actions()) {
    throw InvalidInput("step update dimensions disagree");
  }
  if (!(step > 0.0)) throw InvalidInput("step size must be positive");
  if (!(clamp > 0.0 && clamp < 1.0)) throw InvalidInput("probability clamp must lie in (0, 1)");
  Vector d(r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    if (p[i] < clamp && clamp_triggers) ++*clamp_triggers;
    const double q = tail_quantile(fam, static_cast<int>(i), std::max(p[i], clamp));
    if (!std::isfinite(q)) {
      throw SolverError("risk-adjusted payoff is infinite despite clamping (action " +
                        std::to_string(i) + ", " + fam.describe() + ")");
    }
    d[i] = step * (r[i] + q);
  }
  return d;
}

inline Vector step_update(const Vector& estimate, const Vector& r, const Vector& p, double step,
                          const MarginalFamily& fam, double clamp = 1e-12) {
  if (estimate.size() != r.size()) throw InvalidInput("step update dimensions disagree");
  return estimate + step_increment(r, p, step, fam, clamp);
}

namespace detail {

// An estimate stored as offset * 1 + centered. Quantal responses are
// invariant to adding a constant to every coordinate, so strategies are
// computed from `centered` alone; the common drift sum_t lambda_t * mean(v_t)
// goes to `offset`. This keeps the part that determines play at O(1)
// magnitude, so increments below its resolution are absorbed instead of
// being rounded against an ever-growing total.
struct SplitEstimate {
  double offset = 0.0;
  Vector centered;

  explicit SplitEstimate(const Vector& u) {
    offset = u.mean();
    centered = u.array() - offset;
  }
  void add(const Vector& d) {
    const double shift = d.mean();
    centered += (d.array() - shift).matrix();
    offset += shift;
  }
  Vector value() const { return centered.array() + offset; }
};

}  // namespace detail

inline void validate_run_config(const Game& game, const RunConfig& cfg) {
  if (cfg.horizon < 1) throw InvalidInput("horizon must be at least 1");
  if (cfg.downsample < 1) throw InvalidInput("downsample factor must be at least 1");
  if (!(cfg.clamp > 0.0 && cfg.clamp < 1.0 / game.num_actions())) {
    throw InvalidInput("probability clamp must lie in (0, 1/N)");
  }
  check_families(game, cfg.risk_families);
  check_families(game, cfg.belief_families);
  if (!cfg.initial_estimates.empty()) {
    if (cfg.initial_estimates.size() != static_cast<std::size_t>(game.num_players())) {
      throw InvalidInput("expected one initial estimate per player");
    }
    for (const auto& u : cfg.initial_estimates) {
      if (u.size() != game.num_actions() || !u.allFinite()) {
        throw InvalidInput("initial estimate has the wrong length or is not finite");
      }
    }
  }
}

inline std::vector<Vector> initial_estimates(const Game& game, const RunConfig& cfg) {
  const int m = game.num_players();
  const int n = game.num_actions();
  if (!cfg.initial_estimates.empty()) return cfg.initial_estimates;
  std::vector<Vector> u(static_cast<std::size_t>(m), Vector::Zero(n));
  if (cfg.random_initial_estimates) {
    Rng rng(cfg.seed);
    for (auto& v : u) {
      for (int i = 0; i < n; ++i) v[i] = rng.uniform(-1.0, 1.0);
    }
  }
  return u;
}

// Runs T rounds and records the trace. Deterministic given the config.
inline Trace run_repeated_game(const Game& game, const RunConfig& cfg) {
  validate_run_config(game, cfg);
  const int m = game.num_players();
  const auto players = static_cast<std::size_t>(m);

  std::vector<detail::SplitEstimate> est;
  for (const auto& u : initial_estimates(game, cfg)) est.emplace_back(u);

  Trace trace{cfg.horizon, cfg.downsample, {}, StrategyProfile::uniform(m, game.num_actions()),
              {}, 0.0, 0.0, 0.0, 0};
  std::optional<StrategyProfile> previous;
  const long tail_start = std::max(2L, cfg.horizon - 99);

  for (long t = 1; t <= cfg.horizon; ++t) {
    std::vector<Vector> strategies;
    strategies.reserve(players);
    for (std::size_t j = 0; j < players; ++j) {
      try {
        strategies.push_back(quantal_response(cfg.belief_families[j], est[j].centered).probabilities);
      } catch (const SolverError& e) {
        throw SolverError("round " + std::to_string(t) + ", player " + std::to_string(j) + ": " +
                          e.what());
      }
    }
    StrategyProfile P(std::move(strategies));
    if (previous) {
      const double move = P.distance_inf(*previous);
      trace.last_movement = move;
      if (t >= tail_start) trace.tail_movement = std::max(trace.tail_movement, move);
    }

    const double step = cfg.schedule(t);
    std::vector<Vector> payoffs;
    payoffs.reserve(players);
    for (int j = 0; j < m; ++j) {
      payoffs.push_back(payoff_vector(game, j, P));
      const auto uj = static_cast<std::size_t>(j);
      est[uj].add(step_increment(payoffs.back(), P[j], step, cfg.risk_families[uj], cfg.clamp,
                                 &trace.clamp_triggers));
    }

    if (t % cfg.downsample == 0 || t == cfg.horizon) {
      std::vector<Vector> values;
      for (const auto& e : est) values.push_back(e.value());
      trace.rounds.push_back(RoundRecord{t, step, P, std::move(values), std::move(payoffs)});
    }
    previous = std::move(P);
  }

  trace.final_profile = *previous;
  for (const auto& e : est) trace.final_estimates.push_back(e.value());
  trace.final_residual = seob_residual(game, trace.final_profile, cfg.risk_families);
  return trace;
}

}  // namespace seob
