#pragma once

// Equilibrium residuals, the smooth game's fixed point, the game Hessian and
// the sufficient stability certificates built from it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "seob/belief.hpp"
#include "seob/errors.hpp"
#include "seob/game.hpp"
#include "seob/response.hpp"
#include "seob/rng.hpp"

namespace seob {

using FamilyList = std::vector<MarginalFamily>;

inline void check_families(const Game& game, const FamilyList& fams) {
  if (fams.size() != static_cast<std::size_t>(game.num_players())) {
    throw InvalidInput("expected one family per player, got " + std::to_string(fams.size()));
  }
  for (const auto& f : fams) check_family_matches(game, f);
}

// Profile of quantal responses to the payoff vectors at P.
inline StrategyProfile response_profile(const Game& game, const StrategyProfile& P,
                                        const FamilyList& fams) {
  std::vector<Vector> out;
  out.reserve(fams.size());
  for (int j = 0; j < game.num_players(); ++j) {
    out.push_back(quantal_response(fams[static_cast<std::size_t>(j)], payoff_vector(game, j, P))
                      .probabilities);
  }
  return StrategyProfile(std::move(out));
}

// max_j || p_j - QR_j(u_j(.; P_{-j})) ||_inf. Zero exactly at Nash equilibria of
// the smooth game, which are the SE-OBs of the original game for marginal
// belief sets built from `fams`.
inline double seob_residual(const Game& game, const StrategyProfile& P, const FamilyList& fams) {
  check_families(game, fams);
  game.check_profile(P);
  double r = 0.0;
  for (int j = 0; j < game.num_players(); ++j) {
    const Vector q =
        quantal_response(fams[static_cast<std::size_t>(j)], payoff_vector(game, j, P)).probabilities;
    r = std::max(r, (P[j] - q).cwiseAbs().maxCoeff());
  }
  return r;
}

struct FixedPointResult {
  StrategyProfile profile;
  int iterations = 0;
  bool converged = false;
  double last_step = 0.0;
};

// Damped iteration P <- (1 - beta) P + beta QR(P), from `start` (uniform by
// default) until ||Delta P||_inf <= tol. Non-convergence is reported, not thrown.
inline FixedPointResult fixed_point_iterate(const Game& game, const FamilyList& fams,
                                            double damping = 0.5, double tol = 1e-12,
                                            int max_iter = 100000,
                                            const StrategyProfile* start = nullptr) {
  check_families(game, fams);
  if (!(damping > 0.0 && damping <= 1.0)) throw InvalidInput("damping must lie in (0, 1]");
  StrategyProfile P =
      start ? *start : StrategyProfile::uniform(game.num_players(), game.num_actions());
  game.check_profile(P);
  FixedPointResult result{P, 0, false, 0.0};
  for (int it = 1; it <= max_iter; ++it) {
    const StrategyProfile Q = response_profile(game, P, fams);
    std::vector<Vector> next;
    next.reserve(Q.strategies().size());
    for (int j = 0; j < game.num_players(); ++j) {
      Vector p = (1.0 - damping) * P[j] + damping * Q[j];
      next.push_back(p / p.sum());
    }
    StrategyProfile Pn(std::move(next));
    result.last_step = Pn.distance_inf(P);
    result.iterations = it;
    P = std::move(Pn);
    if (result.last_step <= tol) {
      result.converged = true;
      break;
    }
  }
  result.profile = P;
  return result;
}

// Largest singular value.
inline double operator_norm(const Matrix& A) {
  if (A.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(A);
  return svd.singularValues()(0);
}

// MN x MN Hessian of the smooth game. Off-diagonal blocks are
// (A_jk + A_kj^T) / 2 with A_jk the pairwise payoff matrix of j against k;
// diagonal blocks are -diag(1 / F_j,i'(F_j,i^{-1}(1 - p_j,i))).
inline Matrix game_hessian(const Game& game, const StrategyProfile& P, const FamilyList& fams) {
  check_families(game, fams);
  game.check_profile(P);
  const int m = game.num_players();
  const int n = game.num_actions();
  Matrix H = Matrix::Zero(m * n, m * n);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < n; ++i) {
      const double p = P[j][i];
      if (!(p > 0.0 && p < 1.0)) {
        throw InvalidInput("game Hessian needs interior probabilities; player " +
                           std::to_string(j) + " action " + std::to_string(i) + " has " +
                           std::to_string(p));
      }
      H(j * n + i, j * n + i) = -1.0 / density_at_quantile(fams[static_cast<std::size_t>(j)], i, p);
    }
    for (int k = j + 1; k < m; ++k) {
      const Matrix A = pairwise_payoff_matrix(game, j, k, P);
      const Matrix B = pairwise_payoff_matrix(game, k, j, P);
      const Matrix block = 0.5 * (A + B.transpose());
      H.block(j * n, k * n, n, n) = block;
      H.block(k * n, j * n, n, n) = block.transpose();
    }
  }
  return H;
}

struct DominanceReport {
  bool dominant = false;
  // Per block row: 1/||H_jj^{-1}|| and sum_{k != j} ||H_jk||.
  std::vector<double> diagonal_strength;
  std::vector<double> off_diagonal_sum;
  std::string diagnostic;
};

// Strict block diagonal dominance: 1/||H_jj^{-1}|| > sum_{k != j} ||H_jk|| for every j.
inline DominanceReport diagonal_dominance_check(const Matrix& H, int players, int actions) {
  if (H.rows() != H.cols() || H.rows() != static_cast<Eigen::Index>(players) * actions) {
    throw InvalidInput("Hessian shape does not match the block structure");
  }
  DominanceReport rep;
  rep.dominant = true;
  for (int j = 0; j < players; ++j) {
    const Matrix D = H.block(j * actions, j * actions, actions, actions);
    Eigen::JacobiSVD<Matrix> svd(D);
    const double smin = svd.singularValues()(actions - 1);
    double off = 0.0;
    for (int k = 0; k < players; ++k) {
      if (k != j) off += operator_norm(H.block(j * actions, k * actions, actions, actions));
    }
    rep.diagonal_strength.push_back(smin);
    rep.off_diagonal_sum.push_back(off);
    if (!(smin > 0.0)) {
      rep.dominant = false;
      rep.diagnostic += "diagonal block " + std::to_string(j) + " is singular; ";
    } else if (!(smin > off)) {
      rep.dominant = false;
      rep.diagnostic += "block row " + std::to_string(j) + ": " + std::to_string(smin) +
                        " <= " + std::to_string(off) + "; ";
    }
  }
  return rep;
}

// Orthonormal basis of {z : the components of each player's block sum to 0}.
inline Matrix tangent_basis(int players, int actions) {
  Matrix Z = Matrix::Zero(players * actions, players * (actions - 1));
  for (int j = 0; j < players; ++j) {
    for (int c = 1; c < actions; ++c) {
      // Helmert column: c ones followed by -c, normalized.
      const double norm = std::sqrt(static_cast<double>(c) * (c + 1));
      for (int i = 0; i < c; ++i) Z(j * actions + i, j * (actions - 1) + c - 1) = 1.0 / norm;
      Z(j * actions + c, j * (actions - 1) + c - 1) = -static_cast<double>(c) / norm;
    }
  }
  return Z;
}

// Largest eigenvalue of H restricted to the tangent space of the simplex product.
inline double tangent_max_eigenvalue(const Matrix& H, int players, int actions) {
  if (H.rows() != H.cols() || H.rows() != static_cast<Eigen::Index>(players) * actions) {
    throw InvalidInput("Hessian shape does not match the block structure");
  }
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw InvalidInput("tangent eigen check needs a symmetric matrix");
  }
  const Matrix Z = tangent_basis(players, actions);
  const Matrix R = Z.transpose() * H * Z;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (R + R.transpose()));
  if (eig.info() != Eigen::Success) throw SolverError("symmetric eigensolver failed");
  return eig.eigenvalues().maxCoeff();
}

inline bool negdef_on_tangent_check(const Matrix& H, int players, int actions, double tol = 1e-10) {
  return tangent_max_eigenvalue(H, players, actions) < -tol;
}

struct PlayerStability {
  double lhs = 0.0;          // value used for the verdict
  double lhs_grid = 0.0;     // grid infimum, always computed
  bool lhs_closed_form = false;
  double rhs = 0.0;
  bool pass = false;
};

struct StabilityReport {
  std::vector<PlayerStability> players;
  bool pass = false;
  bool hessian_negdef_on_tangent = false;
  bool diag_dominant = false;
  bool grid_fallback = false;
  int hessian_samples = 0;
  double worst_tangent_eigenvalue = -kInfinity;
};

// p-grid over (0,1) for infima and suprema of density expressions: a uniform
// interior grid plus log-spaced points running to 1e-12 from both ends, 10^4
// points in total.
inline std::vector<double> probability_grid() {
  std::vector<double> g;
  g.reserve(10000);
  constexpr int kUniform = 5000;
  constexpr int kTail = 2500;
  for (int k = 0; k < kUniform; ++k) g.push_back((k + 0.5) / kUniform);
  for (int k = 0; k < kTail; ++k) {
    const double e = -1.0 - 11.0 * k / (kTail - 1);
    const double x = std::pow(10.0, e);
    g.push_back(x);
    g.push_back(1.0 - x);
  }
  std::sort(g.begin(), g.end());
  return g;
}

// inf_{p in (0,1)} 1 / min_i F_i'(F_i^{-1}(1 - p)) over the grid.
inline double stability_lhs_grid(const MarginalFamily& fam) {
  double best = kInfinity;
  for (double p : probability_grid()) {
    double dmin = kInfinity;
    for (int i = 0; i < fam.num_actions(); ++i) dmin = std::min(dmin, density_at_quantile(fam, i, p));
    best = std::min(best, 1.0 / dmin);
  }
  return best;
}

// Closed-form left side where known: gamma (exponential), 2 gamma N (uniform).
inline std::optional<double> stability_lhs_closed_form(const MarginalFamily& fam) {
  if (const auto* f = std::get_if<ExponentialFamily>(&fam.variant())) return f->gamma;
  if (const auto* f = std::get_if<UniformFamily>(&fam.variant())) return 2.0 * f->gamma * f->actions;
  return std::nullopt;
}

// Right side for player j: (1/2) sum_{k != j} ||A_jk + A_kj^T||, maximized over
// pure profiles of all other players (exact, since each norm is convex in
// every remaining player's strategy and the entries are multilinear).
inline double stability_rhs(const Game& game, int j) {
  const int m = game.num_players();
  const int n = game.num_actions();
  std::vector<int> others;
  for (int l = 0; l < m; ++l) {
    if (l != j) others.push_back(l);
  }
  std::vector<int> digits(others.size(), 0);
  double worst = 0.0;
  while (true) {
    std::vector<int> pure(static_cast<std::size_t>(m), 0);
    for (std::size_t c = 0; c < others.size(); ++c) pure[static_cast<std::size_t>(others[c])] = digits[c];
    const StrategyProfile P = StrategyProfile::pure(pure, n);
    double total = 0.0;
    for (int k : others) {
      const Matrix A = pairwise_payoff_matrix(game, j, k, P);
      const Matrix B = pairwise_payoff_matrix(game, k, j, P);
      total += 0.5 * operator_norm(A + B.transpose());
    }
    worst = std::max(worst, total);
    // With two players nothing else enters the pairwise matrices.
    if (m == 2) break;
    std::size_t c = 0;
    while (c < digits.size() && ++digits[c] == n) digits[c++] = 0;
    if (c == digits.size()) break;
  }
  return worst;
}

// Condition: lhs_j > rhs_j for every player. Hessian diagnostics are
// evaluated at the uniform profile and `hessian_samples - 1` random interior
// profiles.
inline StabilityReport assumption1_check(const Game& game, const FamilyList& fams,
                                         int hessian_samples = 10, std::uint64_t seed = 0) {
  check_families(game, fams);
  StabilityReport rep;
  rep.pass = true;
  for (int j = 0; j < game.num_players(); ++j) {
    const auto& fam = fams[static_cast<std::size_t>(j)];
    PlayerStability ps;
    ps.lhs_grid = stability_lhs_grid(fam);
    if (auto closed = stability_lhs_closed_form(fam)) {
      ps.lhs = *closed;
      ps.lhs_closed_form = true;
    } else {
      ps.lhs = ps.lhs_grid;
      rep.grid_fallback = true;
    }
    ps.rhs = stability_rhs(game, j);
    ps.pass = ps.lhs > ps.rhs;
    rep.pass = rep.pass && ps.pass;
    rep.players.push_back(ps);
  }

  const int m = game.num_players();
  const int n = game.num_actions();
  Rng rng(seed);
  rep.hessian_negdef_on_tangent = true;
  rep.diag_dominant = true;
  rep.hessian_samples = std::max(1, hessian_samples);
  for (int s = 0; s < rep.hessian_samples; ++s) {
    StrategyProfile P = StrategyProfile::uniform(m, n);
    if (s > 0) {
      std::vector<Vector> strat;
      for (int j = 0; j < m; ++j) strat.push_back(rng.interior_simplex_point(n, 1e-3));
      P = StrategyProfile(std::move(strat));
    }
    const Matrix H = game_hessian(game, P, fams);
    const double top = tangent_max_eigenvalue(H, m, n);
    rep.worst_tangent_eigenvalue = std::max(rep.worst_tangent_eigenvalue, top);
    rep.hessian_negdef_on_tangent = rep.hessian_negdef_on_tangent && top < -1e-10;
    rep.diag_dominant = rep.diag_dominant && diagonal_dominance_check(H, m, n).dominant;
  }
  return rep;
}

struct VsProbeReport {
  // Smallest value of -sum_j <grad_j, p_j - p*_j> over the samples; positive
  // means every sampled direction points toward P*.
  double min_margin = kInfinity;
  int violations = 0;
  int samples = 0;
};

inline double vs_inner_product(const Game& game, const StrategyProfile& P,
                               const StrategyProfile& P_star, const FamilyList& fams) {
  double total = 0.0;
  for (int j = 0; j < game.num_players(); ++j) {
    total += smooth_payoff_gradient(game, j, P, fams[static_cast<std::size_t>(j)])
                 .dot(P[j] - P_star[j]);
  }
  return total;
}

// Samples interior profiles (every component >= 1e-6) and checks the
// variational-stability inequality against P*.
inline VsProbeReport vs_inequality_probe(const Game& game, const StrategyProfile& P_star,
                                         const FamilyList& fams, int samples,
                                         std::uint64_t seed) {
  check_families(game, fams);
  game.check_profile(P_star);
  VsProbeReport rep;
  Rng rng(seed);
  const int m = game.num_players();
  const int n = game.num_actions();
  for (int s = 0; s < samples; ++s) {
    std::vector<Vector> strat;
    for (int j = 0; j < m; ++j) strat.push_back(rng.interior_simplex_point(n, 1e-6));
    const StrategyProfile P(std::move(strat));
    if (P.distance_inf(P_star) == 0.0) continue;
    const double margin = -vs_inner_product(game, P, P_star, fams);
    rep.min_margin = std::min(rep.min_margin, margin);
    if (!(margin > 0.0)) ++rep.violations;
    ++rep.samples;
  }
  return rep;
}

struct Assumption2Player {
  double lipschitz = 0.0;
  bool lipschitz_closed_form = false;
  bool lipschitz_finite = false;
  bool strong_concavity_verified = false;
  double worst_slack = kInfinity;  // min over draws of lhs - rhs of the inequality
};

struct Assumption2Report {
  std::vector<Assumption2Player> players;
  bool pass = false;
};

// Largest CDF slope. Closed forms: 1/gamma (exponential), 1/(2 gamma N)
// (uniform), max_i eta_i^{q-1} / (gamma q) for Pareto with q <= 2 (unbounded
// for q > 2); tables use the grid supremum of the density at quantiles.
inline std::pair<double, bool> lipschitz_constant(const MarginalFamily& fam) {
  if (const auto* f = std::get_if<ExponentialFamily>(&fam.variant())) return {1.0 / f->gamma, true};
  if (const auto* f = std::get_if<UniformFamily>(&fam.variant())) {
    return {1.0 / (2.0 * f->gamma * f->actions), true};
  }
  if (const auto* f = std::get_if<ParetoFamily>(&fam.variant())) {
    if (f->q > 2.0) return {kInfinity, true};
    return {f->eta.array().pow(f->q - 1.0).maxCoeff() / (f->gamma * f->q), true};
  }
  double best = 0.0;
  for (double p : probability_grid()) {
    for (int i = 0; i < fam.num_actions(); ++i) best = std::max(best, density_at_quantile(fam, i, p));
  }
  return {best, false};
}

// g(p; u) = p.u + h(p) must be (1/L)-strongly concave:
// g(a p + (1-a) q) >= a g(p) + (1-a) g(q) + a(1-a)/(2L) ||p - q||^2 - 1e-9.
inline Assumption2Player assumption2_check(const MarginalFamily& fam, int draws = 1000,
                                           std::uint64_t seed = 0) {
  Assumption2Player rep;
  auto [L, closed] = lipschitz_constant(fam);
  rep.lipschitz = L;
  rep.lipschitz_closed_form = closed;
  rep.lipschitz_finite = std::isfinite(L);
  const double modulus = rep.lipschitz_finite ? 1.0 / L : 0.0;
  const int n = fam.num_actions();
  Rng rng(seed);
  for (int d = 0; d < draws; ++d) {
    const Vector p = rng.simplex_point(n);
    const Vector q = rng.simplex_point(n);
    const double a = rng.open_uniform();
    Vector u(n);
    for (int i = 0; i < n; ++i) u[i] = rng.uniform();
    auto g = [&](const Vector& x) { return x.dot(u) + regularizer_unchecked(fam, x); };
    const Vector mix = a * p + (1.0 - a) * q;
    const double slack = g(mix) - a * g(p) - (1.0 - a) * g(q) -
                         0.5 * modulus * a * (1.0 - a) * (p - q).squaredNorm();
    rep.worst_slack = std::min(rep.worst_slack, slack);
  }
  rep.strong_concavity_verified = rep.worst_slack >= -1e-9;
  return rep;
}

inline Assumption2Report assumption2_check(const FamilyList& fams, int draws = 1000,
                                           std::uint64_t seed = 0) {
  Assumption2Report rep;
  rep.pass = true;
  Rng root(seed);
  for (std::size_t j = 0; j < fams.size(); ++j) {
    rep.players.push_back(assumption2_check(fams[j], draws, root.split(j).seed()));
    rep.pass = rep.pass && rep.players.back().lipschitz_finite &&
               rep.players.back().strong_concavity_verified;
  }
  return rep;
}

}  // namespace seob
