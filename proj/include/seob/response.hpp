#pragma once

// Quantal responses under marginal belief sets. The optimistic value
//   u~(u) = max_{p in simplex} p.u + h(p)
// is attained at the quantal response, which is what a player with optimistic
// beliefs plays. Exponential marginals give a weighted softmax, uniform
// marginals give sparsemax, everything else goes through a scalar root-find
// on the KKT multiplier.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "seob/belief.hpp"
#include "seob/errors.hpp"
#include "seob/game.hpp"

namespace seob {

enum class SolverPath { ClosedFormSoftmax, ClosedFormSparsemax, Bisection };

inline std::string to_string(SolverPath s) {
  switch (s) {
    case SolverPath::ClosedFormSoftmax: return "softmax";
    case SolverPath::ClosedFormSparsemax: return "sparsemax";
    case SolverPath::Bisection: return "bisection";
  }
  return "unknown";
}

struct ResponseResult {
  Vector probabilities;
  double optimistic_value = 0.0;
  // kappa with u_i + F_i^{-1}(1 - p_i) = kappa on the support of p.
  double kkt_multiplier = 0.0;
  SolverPath solver = SolverPath::Bisection;
};

// eta_i exp(u_i/gamma) / sum_k eta_k exp(u_k/gamma), evaluated with the max
// subtracted so small gamma cannot overflow.
inline Vector softmax_weighted(const Vector& u, const Vector& eta, double gamma) {
  if (!(gamma > 0.0)) throw InvalidInput("softmax scale must be positive");
  if (eta.size() != u.size()) throw InvalidInput("softmax weights and payoffs differ in length");
  if (u.size() == 0) throw InvalidInput("softmax of an empty vector");
  if ((eta.array() <= 0.0).any()) throw InvalidInput("softmax weights must be positive");
  Vector z = u / gamma + eta.array().log().matrix();
  const double m = z.maxCoeff();
  Vector w = (z.array() - m).exp();
  return w / w.sum();
}

// Sparse simplex map with the 2N offset and 1/(2N) scaling: sort descending,
//   k = max{j : 2N + j v_(j) > sum_{i<=j} v_(i)},
//   kappa = (sum_{i<=k} v_(i) - 2N) / k,
// output [v_i - kappa]_+ / (2N). Equal to the Euclidean projection of v/(2N).
inline Vector sparsemax(const Vector& v) {
  const auto n = v.size();
  if (n == 0) throw InvalidInput("sparsemax of an empty vector");
  if (!v.allFinite()) throw InvalidInput("sparsemax input must be finite");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return v[a] > v[b]; });
  const double two_n = 2.0 * static_cast<double>(n);
  double running = 0.0;
  double support_sum = 0.0;
  Eigen::Index k = 1;
  for (Eigen::Index j = 1; j <= n; ++j) {
    const double vj = v[order[static_cast<std::size_t>(j - 1)]];
    running += vj;
    if (two_n + static_cast<double>(j) * vj > running) {
      k = j;
      support_sum = running;
    }
  }
  const double kappa = (support_sum - two_n) / static_cast<double>(k);
  return ((v.array() - kappa).max(0.0) / two_n).matrix();
}

namespace detail {

inline Vector tail_probabilities(const MarginalFamily& fam, const Vector& u, double kappa) {
  Vector p(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    p[i] = 1.0 - cdf(fam, static_cast<int>(i), kappa - u[i]);
  }
  return p;
}

inline void check_payoffs(const MarginalFamily& fam, const Vector& u) {
  if (u.size() != fam.num_actions()) {
    throw InvalidInput("payoff vector of length " + std::to_string(u.size()) +
                       " does not match " + fam.describe());
  }
  if (!u.allFinite()) throw InvalidInput("payoff vector must be finite");
}

inline ResponseResult finish(const MarginalFamily& fam, const Vector& u, Vector p, double kappa,
                             SolverPath path) {
  p /= p.sum();
  ResponseResult r;
  r.optimistic_value = p.dot(u) + regularizer_unchecked(fam, p);
  r.probabilities = std::move(p);
  r.kkt_multiplier = kappa;
  r.solver = path;
  return r;
}

}  // namespace detail

// Generic route: stationarity gives p_i(kappa) = 1 - F_i(kappa - u_i), which
// is nonincreasing in kappa; bisect on sum_i p_i(kappa) = 1.
inline ResponseResult quantal_response_bisection(const MarginalFamily& fam, const Vector& u) {
  detail::check_payoffs(fam, u);
  const auto n = u.size();
  double lo = kInfinity;
  double hi = -kInfinity;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int a = static_cast<int>(i);
    lo = std::min(lo, u[i] + quantile(fam, a, 0.0));
    hi = std::max(hi, u[i] + tail_quantile(fam, a, 1.0 / static_cast<double>(n)));
  }
  auto excess = [&](double kappa) { return detail::tail_probabilities(fam, u, kappa).sum() - 1.0; };

  // Expand geometrically until the bracket straddles the root.
  double width = std::max(1.0, hi - lo);
  for (int it = 0; excess(lo) < 0.0; ++it) {
    if (it > 200) throw SolverError("bisection bracket failure (low end " + std::to_string(lo) +
                                    ") for " + fam.describe());
    lo -= width;
    width *= 2.0;
  }
  width = std::max(1.0, hi - lo);
  for (int it = 0; excess(hi) > 0.0; ++it) {
    if (it > 200) throw SolverError("bisection bracket failure (high end " + std::to_string(hi) +
                                    ") for " + fam.describe());
    hi += width;
    width *= 2.0;
  }

  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    const double e = excess(mid);
    if (std::abs(e) <= 1e-12) break;
    (e > 0.0 ? lo : hi) = mid;
  }

  Vector p = detail::tail_probabilities(fam, u, mid);
  if (std::abs(p.sum() - 1.0) > 1e-9) {
    // The root sits on a jump of some F_i (an atom of the marginal). The
    // optimum is unique only if a single action jumps there; it absorbs the
    // remaining mass.
    const Vector p_lo = detail::tail_probabilities(fam, u, lo);
    const Vector p_hi = detail::tail_probabilities(fam, u, hi);
    std::vector<Eigen::Index> jumping;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (p_lo[i] - p_hi[i] > 1e-9) jumping.push_back(i);
    }
    if (jumping.size() != 1) {
      throw SolverError("quantal response is not unique: " + fam.describe() +
                        " is not strictly increasing near kappa = " + std::to_string(mid));
    }
    p = p_hi;
    const Eigen::Index a = jumping.front();
    p[a] = 0.0;
    p[a] = std::clamp(1.0 - p.sum(), 0.0, 1.0);
  }
  return detail::finish(fam, u, std::move(p), mid, SolverPath::Bisection);
}

// Unique maximizer of p.u + h(p) over the simplex, with closed forms for the
// exponential (softmax) and uniform (sparsemax) families.
inline ResponseResult quantal_response(const MarginalFamily& fam, const Vector& u) {
  detail::check_payoffs(fam, u);
  if (const auto* f = std::get_if<ExponentialFamily>(&fam.variant())) {
    Vector p = softmax_weighted(u, f->eta, f->gamma);
    const Vector z = u / f->gamma + f->eta.array().log().matrix();
    const double m = z.maxCoeff();
    const double kappa = f->gamma * (m + std::log((z.array() - m).exp().sum()) - 1.0);
    return detail::finish(fam, u, std::move(p), kappa, SolverPath::ClosedFormSoftmax);
  }
  if (const auto* f = std::get_if<UniformFamily>(&fam.variant())) {
    Vector p = sparsemax(u / f->gamma);
    // On the support u_i + gamma(1 - 2N p_i) is constant.
    Eigen::Index top = 0;
    p.maxCoeff(&top);
    const double kappa = u[top] + f->gamma * (1.0 - 2.0 * f->actions * p[top]);
    return detail::finish(fam, u, std::move(p), kappa, SolverPath::ClosedFormSparsemax);
  }
  return quantal_response_bisection(fam, u);
}

// u~(u): the largest expected maximum of u_i + xi_i over couplings of the marginals.
inline double optimistic_value(const MarginalFamily& fam, const Vector& u) {
  return quantal_response(fam, u).optimistic_value;
}

inline void check_family_matches(const Game& game, const MarginalFamily& fam) {
  if (fam.num_actions() != game.num_actions()) {
    throw InvalidInput(fam.describe() + " does not match a game with " +
                       std::to_string(game.num_actions()) + " actions");
  }
}

// u_j(P) + h_j(p_j)
inline double smooth_payoff(const Game& game, int j, const StrategyProfile& P,
                            const MarginalFamily& fam) {
  check_family_matches(game, fam);
  return expected_payoff(game, j, P) + regularizer(fam, P[j]);
}

// Gradient of the smooth payoff in p_j: u_j(e_i; P_{-j}) + F_{j,i}^{-1}(1 - p_{j,i}).
inline Vector smooth_payoff_gradient(const Game& game, int j, const StrategyProfile& P,
                                     const MarginalFamily& fam) {
  check_family_matches(game, fam);
  Vector g = payoff_vector(game, j, P);
  const Vector& p = P[j];
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double q = tail_quantile(fam, static_cast<int>(i), p[i]);
    if (!std::isfinite(q)) {
      throw InvalidInput("smooth payoff gradient is infinite: player " + std::to_string(j) +
                         " puts zero mass on action " + std::to_string(i) + " under " +
                         fam.describe() + "; clamp probabilities away from 0");
    }
    g[i] += q;
  }
  return g;
}

}  // namespace seob
