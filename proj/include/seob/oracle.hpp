#pragma once

// Brute-force and sampling oracles. Nothing in here calls the closed forms it
// is used to check: projections sort and threshold, regularizers integrate the
// quantile numerically, coupling estimates sample perturbations directly.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "seob/analysis.hpp"
#include "seob/belief.hpp"
#include "seob/errors.hpp"
#include "seob/game.hpp"
#include "seob/quadrature.hpp"
#include "seob/rng.hpp"

namespace seob {

struct SampleEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  long n = 0;
  std::uint64_t seed = 0;
};

enum class Copula { Independence, Comonotone, PermutationMixture };

inline std::string to_string(Copula c) {
  switch (c) {
    case Copula::Independence: return "independence";
    case Copula::Comonotone: return "comonotone";
    case Copula::PermutationMixture: return "permutation-mixture";
  }
  return "unknown";
}

// Uniform levels at or above this are capped before inverting an unbounded CDF.
inline constexpr double kMaxSampleLevel = 1.0 - 1e-15;

// Monte Carlo estimate of E[max_i u_i + xi_i] where xi has the family's
// marginals and the chosen dependence: independent levels, one shared level,
// or a shared level whose coordinates are randomly permuted per draw.
inline SampleEstimate coupling_expected_max(const MarginalFamily& fam, const Vector& u,
                                            Copula copula, long n, std::uint64_t seed) {
  if (n < 1) throw InvalidInput("need at least one sample");
  if (u.size() != fam.num_actions()) throw InvalidInput("payoff vector does not match family");
  const auto dim = static_cast<int>(u.size());
  Rng rng(seed);
  std::vector<double> levels(static_cast<std::size_t>(dim));
  std::vector<int> perm(static_cast<std::size_t>(dim));
  double sum = 0.0;
  double sumsq = 0.0;
  for (long s = 0; s < n; ++s) {
    switch (copula) {
      case Copula::Independence:
        for (auto& t : levels) t = rng.uniform();
        break;
      case Copula::Comonotone: {
        const double t = rng.uniform();
        std::fill(levels.begin(), levels.end(), t);
        break;
      }
      case Copula::PermutationMixture: {
        // A comonotone draw whose coordinates are reassigned by a random
        // permutation: coordinate i takes the shared level shifted by
        // perm[i]/N (mod 1), so every marginal stays uniform.
        std::iota(perm.begin(), perm.end(), 0);
        for (int k = dim - 1; k > 0; --k) {
          std::swap(perm[static_cast<std::size_t>(k)],
                    perm[rng.index(static_cast<std::size_t>(k) + 1)]);
        }
        const double t = rng.uniform();
        for (int i = 0; i < dim; ++i) {
          const double shifted = t + static_cast<double>(perm[static_cast<std::size_t>(i)]) / dim;
          levels[static_cast<std::size_t>(i)] = shifted - std::floor(shifted);
        }
        break;
      }
    }
    double best = -kInfinity;
    for (int i = 0; i < dim; ++i) {
      const double t = std::min(levels[static_cast<std::size_t>(i)], kMaxSampleLevel);
      best = std::max(best, u[i] + quantile(fam, i, t));
    }
    sum += best;
    sumsq += best * best;
  }
  SampleEstimate e;
  e.n = n;
  e.seed = seed;
  e.mean = sum / static_cast<double>(n);
  const double var = n > 1 ? std::max(0.0, (sumsq - n * e.mean * e.mean) / static_cast<double>(n - 1))
                           : 0.0;
  e.stderr_ = std::sqrt(var / static_cast<double>(n));
  return e;
}

// Empirical argmax frequencies of u_i + g_i with g_i i.i.d. Gumbel(0, scale).
inline Vector gumbel_choice_frequencies(const Vector& u, double scale, long n, std::uint64_t seed) {
  if (n < 1) throw InvalidInput("need at least one sample");
  if (!(scale > 0.0)) throw InvalidInput("Gumbel scale must be positive");
  Rng rng(seed);
  Vector counts = Vector::Zero(u.size());
  for (long s = 0; s < n; ++s) {
    Eigen::Index best = 0;
    double best_value = -kInfinity;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      const double v = u[i] - scale * std::log(-std::log(rng.open_uniform()));
      if (v > best_value) {
        best_value = v;
        best = i;
      }
    }
    counts[best] += 1.0;
  }
  return counts / static_cast<double>(n);
}

// Euclidean projection onto the probability simplex by sorting and
// thresholding: tau = (sum of the top r entries - 1)/r for the largest r with
// v_(r) > tau.
inline Vector euclidean_projection_simplex(const Vector& v) {
  if (v.size() == 0) throw InvalidInput("projection of an empty vector");
  std::vector<double> sorted(v.data(), v.data() + v.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (std::size_t r = 0; r < sorted.size(); ++r) {
    cumulative += sorted[r];
    const double candidate = (cumulative - 1.0) / static_cast<double>(r + 1);
    if (sorted[r] > candidate) tau = candidate;
  }
  return (v.array() - tau).max(0.0).matrix();
}

// Central differences, componentwise.
inline Vector finite_difference_gradient(const std::function<double(const Vector&)>& f,
                                         const Vector& x, double h) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector xp = x;
    Vector xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

// h(p) by adaptive quadrature of p -> F^{-1}(1 - x) over x in [0, p_i].
inline double quadrature_regularizer(const MarginalFamily& fam, const Vector& p,
                                     double abs_tol = 1e-10) {
  if (p.size() != fam.num_actions()) throw InvalidInput("probability vector does not match family");
  double total = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const int a = static_cast<int>(i);
    // Tabulated quantiles have kinks at the knots; split there so each piece is smooth.
    std::vector<double> cuts{0.0};
    if (fam.kind() == FamilyKind::Tabulated) {
      for (const auto& knot : std::get<TabulatedFamily>(fam.variant()).tables[static_cast<std::size_t>(i)]) {
        const double s = 1.0 - knot.first;
        if (s > 0.0 && s < p[i]) cuts.push_back(s);
      }
      std::sort(cuts.begin(), cuts.end());
    }
    cuts.push_back(p[i]);
    for (std::size_t k = 1; k < cuts.size(); ++k) {
      total += integrate([&](double x) { return tail_quantile(fam, a, x); }, cuts[k - 1], cuts[k], abs_tol);
    }
  }
  return total;
}

// Expected payoff of player j by enumerating every pure profile. Strategies
// are used as given, without normalization, so the map is defined (and
// multilinear) off the simplex as well.
inline double enumerated_expected_payoff(const Game& game, int j, const std::vector<Vector>& strategies) {
  game.check_player(j);
  const int m = game.num_players();
  const int n = game.num_actions();
  if (strategies.size() != static_cast<std::size_t>(m)) throw InvalidInput("expected one strategy per player");
  for (const auto& s : strategies) {
    if (s.size() != n) throw InvalidInput("strategy has the wrong length");
  }
  std::vector<int> a(static_cast<std::size_t>(m), 0);
  double total = 0.0;
  for (std::size_t k = 0; k < game.num_profiles(); ++k) {
    double w = 1.0;
    for (int l = 0; l < m; ++l) w *= strategies[static_cast<std::size_t>(l)][a[static_cast<std::size_t>(l)]];
    total += w * game.payoff(j, a);
    for (int l = m - 1; l >= 0; --l) {
      auto& d = a[static_cast<std::size_t>(l)];
      if (++d < n) break;
      d = 0;
    }
  }
  return total;
}

// Smooth payoff of player j with p_j replaced by an arbitrary positive x,
// regularizer included term by term. Used as the target of finite differences.
inline double extended_smooth_payoff(const Game& game, int j, const StrategyProfile& P,
                                     const MarginalFamily& fam, const Vector& x) {
  std::vector<Vector> s = P.strategies();
  s.at(static_cast<std::size_t>(j)) = x;
  double total = enumerated_expected_payoff(game, j, s);
  for (Eigen::Index i = 0; i < x.size(); ++i) total += regularizer_term(fam, static_cast<int>(i), x[i]);
  return total;
}

// Grid scan over (p_1,1, p_2,1) in [0,1]^2 for a 2x2 game; returns the grid
// point with the smallest SE-OB residual.
inline StrategyProfile exhaustive_small_fixed_point(const Game& game, const FamilyList& fams,
                                                    double resolution) {
  if (game.num_players() != 2 || game.num_actions() != 2) {
    throw InvalidInput("grid oracle only handles 2-player 2-action games");
  }
  if (!(resolution > 0.0 && resolution <= 1.0)) throw InvalidInput("grid resolution must lie in (0,1]");
  check_families(game, fams);
  const long steps = std::lround(1.0 / resolution);
  double best = kInfinity;
  std::pair<double, double> arg{0.5, 0.5};
  for (long a = 0; a <= steps; ++a) {
    const double x = static_cast<double>(a) / steps;
    for (long b = 0; b <= steps; ++b) {
      const double y = static_cast<double>(b) / steps;
      const StrategyProfile P({Vector{{x, 1.0 - x}}, Vector{{y, 1.0 - y}}});
      const double r = seob_residual(game, P, fams);
      if (r < best) {
        best = r;
        arg = {x, y};
      }
    }
  }
  return StrategyProfile({Vector{{arg.first, 1.0 - arg.first}}, Vector{{arg.second, 1.0 - arg.second}}});
}

}  // namespace seob
