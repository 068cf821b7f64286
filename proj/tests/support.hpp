#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "seob/seob.hpp"

namespace seob::testing {

// u_1 = u_2 = 1 when the actions match.
inline Game matching_pennies() { return Game(2, 2, {{1, 0, 0, 1}, {1, 0, 0, 1}}); }

inline Game random_game(std::uint64_t seed, int players, int actions) {
  Rng rng(seed);
  return Game::from_function(players, actions, [&](int, std::span<const int>) { return rng.uniform(); });
}

inline StrategyProfile random_interior_profile(Rng& rng, int players, int actions, double floor) {
  std::vector<Vector> s;
  for (int j = 0; j < players; ++j) s.push_back(rng.interior_simplex_point(actions, floor));
  return StrategyProfile(std::move(s));
}

inline Vector random_vector(Rng& rng, int n, double lo, double hi) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

inline double max_abs_diff(const Vector& a, const Vector& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace seob::testing
