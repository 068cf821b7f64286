#pragma once

// Finite normal-form games in mixed extension: payoff tensors, strategy
// profiles, and the multilinear expectations built on them.

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "seob/errors.hpp"

namespace seob {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Tolerance on |sum - 1| for strategies stored in a StrategyProfile. Profiles
// are never renormalized silently.
inline constexpr double kSimplexTolerance = 1e-12;

inline void validate_simplex(const Vector& p, double tol = kSimplexTolerance,
                             const std::string& what = "probability vector") {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i]) || p[i] < 0.0) {
      throw InvalidInput(what + ": component " + std::to_string(i) + " = " +
                         std::to_string(p[i]) + " is not a probability");
    }
    sum += p[i];
  }
  if (std::abs(sum - 1.0) > tol) {
    throw InvalidInput(what + ": components sum to " + std::to_string(sum));
  }
}

inline Vector unit_vector(int n, int i) {
  Vector e = Vector::Zero(n);
  e[i] = 1.0;
  return e;
}

class StrategyProfile {
 public:
  explicit StrategyProfile(std::vector<Vector> strategies)
      : strategies_(std::move(strategies)) {
    if (strategies_.empty()) throw InvalidInput("strategy profile has no players");
    const auto n = strategies_.front().size();
    if (n < 1) throw InvalidInput("strategy profile has no actions");
    for (std::size_t j = 0; j < strategies_.size(); ++j) {
      if (strategies_[j].size() != n) {
        throw InvalidInput("strategy of player " + std::to_string(j) +
                           " has the wrong number of actions");
      }
      validate_simplex(strategies_[j], kSimplexTolerance,
                       "strategy of player " + std::to_string(j));
    }
  }

  static StrategyProfile uniform(int players, int actions) {
    return StrategyProfile(std::vector<Vector>(
        static_cast<std::size_t>(players), Vector::Constant(actions, 1.0 / actions)));
  }

  static StrategyProfile pure(std::span<const int> actions, int num_actions) {
    std::vector<Vector> s;
    s.reserve(actions.size());
    for (int a : actions) {
      if (a < 0 || a >= num_actions) throw InvalidInput("pure action out of range");
      s.push_back(unit_vector(num_actions, a));
    }
    return StrategyProfile(std::move(s));
  }

  int num_players() const { return static_cast<int>(strategies_.size()); }
  int num_actions() const { return static_cast<int>(strategies_.front().size()); }

  const Vector& operator[](int j) const { return strategies_.at(static_cast<std::size_t>(j)); }
  const std::vector<Vector>& strategies() const { return strategies_; }

  StrategyProfile with(int j, Vector p) const {
    auto s = strategies_;
    s.at(static_cast<std::size_t>(j)) = std::move(p);
    return StrategyProfile(std::move(s));
  }

  // max_j ||p_j - q_j||_inf
  double distance_inf(const StrategyProfile& other) const {
    if (other.num_players() != num_players() || other.num_actions() != num_actions()) {
      throw InvalidInput("profiles have different shapes");
    }
    double d = 0.0;
    for (std::size_t j = 0; j < strategies_.size(); ++j) {
      d = std::max(d, (strategies_[j] - other.strategies_[j]).cwiseAbs().maxCoeff());
    }
    return d;
  }

 private:
  std::vector<Vector> strategies_;
};

// Payoff tensors of an M-player, N-action game. Entry order is row-major over
// action profiles (a_1, ..., a_M): the last player's action varies fastest.
class Game {
 public:
  Game(int players, int actions, std::vector<std::vector<double>> payoffs)
      : players_(players), actions_(actions), payoffs_(std::move(payoffs)) {
    if (players_ < 2) throw InvalidInput("a game needs at least 2 players");
    if (actions_ < 2) throw InvalidInput("a game needs at least 2 actions");
    double size = std::pow(static_cast<double>(actions_), players_);
    if (size > 1e8) throw InvalidInput("payoff tensor too large for dense storage");
    profiles_ = static_cast<std::size_t>(size);
    if (payoffs_.size() != static_cast<std::size_t>(players_)) {
      throw InvalidInput("expected one payoff tensor per player, got " +
                         std::to_string(payoffs_.size()));
    }
    for (std::size_t j = 0; j < payoffs_.size(); ++j) {
      if (payoffs_[j].size() != profiles_) {
        throw InvalidInput("payoff tensor of player " + std::to_string(j) + " has " +
                           std::to_string(payoffs_[j].size()) + " entries, expected " +
                           std::to_string(profiles_));
      }
      for (double x : payoffs_[j]) {
        if (!(x >= 0.0 && x <= 1.0)) {
          throw InvalidInput("payoff entry " + std::to_string(x) + " of player " +
                             std::to_string(j) + " lies outside [0,1]");
        }
      }
    }
  }

  // Builds the tensors from f(player, action_profile).
  static Game from_function(int players, int actions,
                            const std::function<double(int, std::span<const int>)>& f) {
    std::size_t profiles = 1;
    for (int j = 0; j < players; ++j) profiles *= static_cast<std::size_t>(actions);
    std::vector<std::vector<double>> payoffs(static_cast<std::size_t>(players),
                                             std::vector<double>(profiles));
    std::vector<int> profile(static_cast<std::size_t>(players), 0);
    for (std::size_t idx = 0; idx < profiles; ++idx) {
      std::size_t rem = idx;
      for (int k = players - 1; k >= 0; --k) {
        profile[static_cast<std::size_t>(k)] = static_cast<int>(rem % actions);
        rem /= actions;
      }
      for (int j = 0; j < players; ++j) payoffs[static_cast<std::size_t>(j)][idx] = f(j, profile);
    }
    return Game(players, actions, std::move(payoffs));
  }

  int num_players() const { return players_; }
  int num_actions() const { return actions_; }
  std::size_t num_profiles() const { return profiles_; }

  std::span<const double> tensor(int j) const {
    check_player(j);
    return payoffs_[static_cast<std::size_t>(j)];
  }

  std::size_t profile_index(std::span<const int> profile) const {
    if (profile.size() != static_cast<std::size_t>(players_)) {
      throw InvalidInput("action profile has the wrong length");
    }
    std::size_t idx = 0;
    for (int a : profile) {
      if (a < 0 || a >= actions_) throw InvalidInput("action out of range");
      idx = idx * static_cast<std::size_t>(actions_) + static_cast<std::size_t>(a);
    }
    return idx;
  }

  double payoff(int j, std::span<const int> profile) const {
    return tensor(j)[profile_index(profile)];
  }

  void check_player(int j) const {
    if (j < 0 || j >= players_) {
      throw InvalidInput("player index " + std::to_string(j) + " out of range");
    }
  }

  void check_profile(const StrategyProfile& P) const {
    if (P.num_players() != players_ || P.num_actions() != actions_) {
      throw InvalidInput("strategy profile shape (" + std::to_string(P.num_players()) + "x" +
                         std::to_string(P.num_actions()) + ") does not match the game (" +
                         std::to_string(players_) + "x" + std::to_string(actions_) + ")");
    }
  }

 private:
  int players_;
  int actions_;
  std::size_t profiles_ = 0;
  std::vector<std::vector<double>> payoffs_;
};

namespace detail {

// Contracts every player axis whose `keep` flag is false against that
// player's strategy, one axis at a time from the last player backwards.
// Remaining axes keep their original relative order.
inline std::vector<double> contract(std::span<const double> tensor, int players, int actions,
                                    const std::vector<const Vector*>& strategies,
                                    const std::vector<bool>& keep) {
  std::vector<double> cur(tensor.begin(), tensor.end());
  const auto n = static_cast<std::size_t>(actions);
  std::size_t inner = 1;  // product of sizes of kept axes after the current one
  for (int axis = players - 1; axis >= 0; --axis) {
    if (keep[static_cast<std::size_t>(axis)]) {
      inner *= n;
      continue;
    }
    const Vector& p = *strategies[static_cast<std::size_t>(axis)];
    const std::size_t outer = cur.size() / (n * inner);
    std::vector<double> next(outer * inner, 0.0);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t a = 0; a < n; ++a) {
        const double w = p[static_cast<Eigen::Index>(a)];
        if (w == 0.0) continue;
        const double* src = cur.data() + (o * n + a) * inner;
        double* dst = next.data() + o * inner;
        for (std::size_t in = 0; in < inner; ++in) dst[in] += w * src[in];
      }
    }
    cur = std::move(next);
  }
  return cur;
}

inline std::vector<const Vector*> strategy_pointers(const StrategyProfile& P) {
  std::vector<const Vector*> s;
  for (const auto& p : P.strategies()) s.push_back(&p);
  return s;
}

}  // namespace detail

// u_j(P): expectation of player j's payoff under the product distribution.
inline double expected_payoff(const Game& game, int j, const StrategyProfile& P) {
  game.check_player(j);
  game.check_profile(P);
  std::vector<bool> keep(static_cast<std::size_t>(game.num_players()), false);
  return detail::contract(game.tensor(j), game.num_players(), game.num_actions(),
                          detail::strategy_pointers(P), keep)[0];
}

// (u_j(e_i; P_{-j}))_i
inline Vector payoff_vector(const Game& game, int j, const StrategyProfile& P) {
  game.check_player(j);
  game.check_profile(P);
  std::vector<bool> keep(static_cast<std::size_t>(game.num_players()), false);
  keep[static_cast<std::size_t>(j)] = true;
  auto r = detail::contract(game.tensor(j), game.num_players(), game.num_actions(),
                            detail::strategy_pointers(P), keep);
  return Eigen::Map<Vector>(r.data(), static_cast<Eigen::Index>(r.size()));
}

// Entry (i, i') is u_j with p_j = e_i, p_k = e_i' and the remaining players
// playing their strategies in P. The entries of P for players j and k are
// ignored.
inline Matrix pairwise_payoff_matrix(const Game& game, int j, int k, const StrategyProfile& P) {
  game.check_player(j);
  game.check_player(k);
  if (j == k) throw InvalidInput("pairwise payoff matrix needs two distinct players");
  game.check_profile(P);
  const int n = game.num_actions();
  std::vector<bool> keep(static_cast<std::size_t>(game.num_players()), false);
  keep[static_cast<std::size_t>(j)] = true;
  keep[static_cast<std::size_t>(k)] = true;
  auto r = detail::contract(game.tensor(j), game.num_players(), n,
                            detail::strategy_pointers(P), keep);
  // Remaining axes are (min(j,k), max(j,k)), row-major.
  Matrix m(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      m(a, b) = r[static_cast<std::size_t>(a * n + b)];
    }
  }
  return j < k ? m : Matrix(m.transpose());
}

// Same, with the strategies of the other M-2 players listed in player order.
inline Matrix pairwise_payoff_matrix(const Game& game, int j, int k,
                                     std::span<const Vector> rest) {
  game.check_player(j);
  game.check_player(k);
  if (j == k) throw InvalidInput("pairwise payoff matrix needs two distinct players");
  if (rest.size() != static_cast<std::size_t>(game.num_players() - 2)) {
    throw InvalidInput("expected strategies for the " + std::to_string(game.num_players() - 2) +
                       " remaining players");
  }
  const int n = game.num_actions();
  std::vector<Vector> full;
  std::size_t next = 0;
  for (int l = 0; l < game.num_players(); ++l) {
    if (l == j || l == k) {
      full.push_back(Vector::Constant(n, 1.0 / n));
    } else {
      full.push_back(rest[next++]);
    }
  }
  return pairwise_payoff_matrix(game, j, k, StrategyProfile(std::move(full)));
}

}  // namespace seob
