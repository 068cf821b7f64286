#pragma once

// The oracle suite behind `seob verify`. Each scope compares library closed
// forms against the independent oracles and against frozen fixture values,
// and reports one entry per check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "seob/analysis.hpp"
#include "seob/belief.hpp"
#include "seob/io.hpp"
#include "seob/oracle.hpp"
#include "seob/response.hpp"
#include "seob/rng.hpp"

namespace seob {

inline const std::vector<std::string>& verify_scopes() {
  static const std::vector<std::string> scopes = {"sparsemax", "softmax",  "regularizer",
                                                  "coupling",  "gumbel",   "gradient",
                                                  "fixed_point", "fixtures"};
  return scopes;
}

// Same content as configs/fixtures/verify.json.
inline Json default_verify_fixtures() {
  return Json::parse(R"({
  "seed": 20240601,
  "random_cases": 500,
  "softmax": [
    {"u": [1, 0], "eta": [1, 1], "gamma": 1, "expected": [0.7310585786300049, 0.2689414213699951], "tol": 1e-12},
    {"u": [0, 0, 0], "eta": [1, 1, 1], "gamma": 0.5, "expected": [0.3333333333333333, 0.3333333333333333, 0.3333333333333333], "tol": 1e-12}
  ],
  "sparsemax": [
    {"u": [4, 0], "expected": [1, 0], "tol": 1e-12},
    {"u": [0, 0, 0], "expected": [0.3333333333333333, 0.3333333333333333, 0.3333333333333333], "tol": 1e-12},
    {"u": [10, 0], "expected": [1, 0], "tol": 0}
  ],
  "regularizer": [
    {"family": {"type": "exponential", "gamma": 1}, "p": [0.5, 0.5], "expected": 0.6931471805599453, "tol": 1e-12},
    {"family": {"type": "exponential", "gamma": 1}, "p": [0, 1, 0], "expected": 0, "tol": 1e-12},
    {"family": {"type": "uniform", "gamma": 1}, "p": [0.25, 0.25, 0.25, 0.25], "expected": 0, "tol": 1e-12}
  ],
  "cdf": [
    {"family": {"type": "exponential", "gamma": 1}, "actions": 2, "action": 0, "s": 0, "expected": 0.6321205588285577, "tol": 1e-12},
    {"family": {"type": "uniform", "gamma": 1}, "actions": 2, "action": 1, "s": 0, "expected": 0.75, "tol": 1e-12}
  ],
  "residual": [
    {"game": {"players": 2, "actions": 2, "payoffs": [[1, 0, 0, 1], [1, 0, 0, 1]]},
     "family": {"type": "exponential", "gamma": 1}, "profile": [[1, 0], [1, 0]],
     "expected": 0.2689414213699951, "tol": 1e-9}
  ],
  "coupling": {"instances": 4, "samples": 10000, "actions": [2, 3, 5], "gamma": 1},
  "gumbel": {"u": [1, 0], "scale": 1, "samples": 1000000, "tol": 0.002},
  "gradient": {"points": 100, "h": 1e-5, "tol": 1e-5},
  "fixed_point": {"games": 3, "gamma": 3, "resolution": 0.01}
})");
}

namespace detail {

struct VerifyContext {
  const Json& fixtures;
  Rng rng;
  Json checks = Json::array();

  void record(const std::string& scope, const std::string& name, bool pass, double value,
              double tolerance) {
    checks.push_back({{"scope", scope}, {"name", name}, {"pass", pass}, {"value", value},
                      {"tolerance", tolerance}});
  }

  const Json& section(const char* key) const {
    if (!fixtures.contains(key)) throw InvalidInput("fixtures are missing \"" + std::string(key) + "\"");
    return fixtures.at(key);
  }

  int random_cases() const { return optional_value<int>(fixtures, "random_cases", 500, "fixtures"); }
};

inline double max_abs_diff(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) return kInfinity;
  return (a - b).cwiseAbs().maxCoeff();
}

inline Vector random_payoffs(Rng& rng, int n, double lo, double hi) {
  Vector u(n);
  for (int i = 0; i < n; ++i) u[i] = rng.uniform(lo, hi);
  return u;
}

inline Game random_game(Rng& rng, int players, int actions) {
  return Game::from_function(players, actions, [&](int, std::span<const int>) { return rng.uniform(); });
}

inline void verify_sparsemax(VerifyContext& ctx) {
  double worst = 0.0;
  for (int c = 0; c < ctx.random_cases(); ++c) {
    const int n = 2 + static_cast<int>(ctx.rng.index(9));
    const Vector u = random_payoffs(ctx.rng, n, -10.0, 10.0);
    worst = std::max(worst, max_abs_diff(sparsemax(u), euclidean_projection_simplex(u / (2.0 * n))));
  }
  ctx.record("sparsemax", "projection_oracle", worst <= 1e-10, worst, 1e-10);
  int k = 0;
  for (const auto& f : ctx.section("sparsemax")) {
    const double tol = f.at("tol").get<double>();
    const double d = max_abs_diff(sparsemax(vector_from_json(f.at("u"), "u")),
                                  vector_from_json(f.at("expected"), "expected"));
    ctx.record("sparsemax", "fixture_" + std::to_string(k++), d <= tol, d, tol);
  }
}

inline void verify_softmax(VerifyContext& ctx) {
  double worst_exp = 0.0;
  double worst_uni = 0.0;
  for (int c = 0; c < ctx.random_cases(); ++c) {
    const int n = 2 + static_cast<int>(ctx.rng.index(19));
    const double gamma = ctx.rng.uniform(0.2, 3.0);
    const Vector u = random_payoffs(ctx.rng, n, -2.0, 2.0);
    Vector eta(n);
    for (int i = 0; i < n; ++i) eta[i] = ctx.rng.uniform(0.5, 2.0);
    const auto e = MarginalFamily::exponential(gamma, eta);
    worst_exp = std::max(worst_exp, max_abs_diff(quantal_response_bisection(e, u).probabilities,
                                                 softmax_weighted(u, eta, gamma)));
    const auto uf = MarginalFamily::uniform(gamma, n);
    worst_uni = std::max(worst_uni, max_abs_diff(quantal_response_bisection(uf, u).probabilities,
                                                 sparsemax(u / gamma)));
  }
  ctx.record("softmax", "bisection_vs_softmax", worst_exp <= 1e-8, worst_exp, 1e-8);
  ctx.record("softmax", "bisection_vs_sparsemax", worst_uni <= 1e-8, worst_uni, 1e-8);

  int k = 0;
  for (const auto& f : ctx.section("softmax")) {
    const double tol = f.at("tol").get<double>();
    const Vector got = softmax_weighted(vector_from_json(f.at("u"), "u"), vector_from_json(f.at("eta"), "eta"),
                                        f.at("gamma").get<double>());
    const double d = max_abs_diff(got, vector_from_json(f.at("expected"), "expected"));
    ctx.record("softmax", "fixture_" + std::to_string(k++), d <= tol, d, tol);
  }
}

inline void verify_regularizer(VerifyContext& ctx) {
  const std::vector<MarginalFamily> fams = {
      MarginalFamily::exponential(1.3, Vector{{1.0, 0.5, 2.0}}),
      MarginalFamily::uniform(0.7, 3),
      MarginalFamily::pareto(1.1, 1.5, Vector{{1.0, 0.8, 1.2}}),
      MarginalFamily::pareto(0.9, 0.7, Vector{{1.0, 1.0, 1.0}}),
      MarginalFamily::tabulated(std::vector<TabulatedFamily::Table>(
          3, TabulatedFamily::Table{{0.0, -1.0}, {0.4, 0.0}, {0.9, 0.5}, {1.0, 2.0}})),
  };
  for (const auto& fam : fams) {
    double worst = 0.0;
    for (int c = 0; c < std::max(1, ctx.random_cases() / 10); ++c) {
      const Vector p = ctx.rng.simplex_point(3);
      worst = std::max(worst, std::abs(regularizer(fam, p) - quadrature_regularizer(fam, p)));
    }
    ctx.record("regularizer", "quadrature_" + to_string(fam.kind()), worst <= 1e-8, worst, 1e-8);
  }
  int k = 0;
  for (const auto& f : ctx.section("regularizer")) {
    const Vector p = vector_from_json(f.at("p"), "p");
    const auto fam = family_from_json(f.at("family"), static_cast<int>(p.size()));
    const double tol = f.at("tol").get<double>();
    const double d = std::abs(regularizer(fam, p) - f.at("expected").get<double>());
    ctx.record("regularizer", "fixture_" + std::to_string(k++), d <= tol, d, tol);
  }
}

inline void verify_coupling(VerifyContext& ctx) {
  const Json& s = ctx.section("coupling");
  const int instances = s.at("instances").get<int>();
  const long samples = s.at("samples").get<long>();
  const double gamma = s.at("gamma").get<double>();
  for (const int n : s.at("actions").get<std::vector<int>>()) {
    for (const auto& fam : {MarginalFamily::exponential(gamma, n), MarginalFamily::uniform(gamma, n)}) {
      double worst = -kInfinity;
      for (int c = 0; c < instances; ++c) {
        const Vector u = random_payoffs(ctx.rng, n, 0.0, 1.0);
        const double bound = optimistic_value(fam, u);
        for (auto cop : {Copula::Independence, Copula::Comonotone, Copula::PermutationMixture}) {
          const auto est = coupling_expected_max(fam, u, cop, samples, ctx.rng.next());
          worst = std::max(worst, (est.mean - bound) / std::max(est.stderr_, 1e-300) - 3.0);
        }
      }
      // value: largest excess over the bound, in standard errors beyond 3.
      ctx.record("coupling", "frechet_bound_" + to_string(fam.kind()) + "_N" + std::to_string(n),
                 worst <= 0.0, worst, 0.0);
    }
  }
}

inline void verify_gumbel(VerifyContext& ctx) {
  const Json& g = ctx.section("gumbel");
  const Vector u = vector_from_json(g.at("u"), "u");
  const double scale = g.at("scale").get<double>();
  const double tol = g.at("tol").get<double>();
  const Vector freq = gumbel_choice_frequencies(u, scale, g.at("samples").get<long>(), ctx.rng.next());
  const double d = max_abs_diff(freq, softmax_weighted(u, Vector::Ones(u.size()), scale));
  ctx.record("gumbel", "logit_frequencies", d <= tol, d, tol);
}

inline void verify_gradient(VerifyContext& ctx) {
  const Json& g = ctx.section("gradient");
  const int points = g.at("points").get<int>();
  const double h = g.at("h").get<double>();
  const double tol = g.at("tol").get<double>();
  const int n = 3;
  const std::vector<MarginalFamily> fams = {
      MarginalFamily::exponential(1.0, Vector{{1.0, 0.5, 2.0}}),
      MarginalFamily::uniform(0.8, n),
      MarginalFamily::pareto(1.0, 1.5, Vector::Ones(n)),
      MarginalFamily::pareto(1.0, 0.7, Vector::Ones(n)),
  };
  for (const auto& fam : fams) {
    double worst = 0.0;
    for (int c = 0; c < points; ++c) {
      const Game game = random_game(ctx.rng, 2, n);
      std::vector<Vector> s;
      for (int j = 0; j < 2; ++j) s.push_back(ctx.rng.interior_simplex_point(n, 0.01));
      const StrategyProfile P(std::move(s));
      const int j = static_cast<int>(ctx.rng.index(2));
      const Vector fd = finite_difference_gradient(
          [&](const Vector& x) { return extended_smooth_payoff(game, j, P, fam, x); }, P[j], h);
      worst = std::max(worst, max_abs_diff(smooth_payoff_gradient(game, j, P, fam), fd));
    }
    ctx.record("gradient", "finite_difference_" + to_string(fam.kind()), worst <= tol, worst, tol);
  }
}

inline void verify_fixed_point(VerifyContext& ctx) {
  const Json& f = ctx.section("fixed_point");
  const int games = f.at("games").get<int>();
  const double gamma = f.at("gamma").get<double>();
  const double res = f.at("resolution").get<double>();
  const FamilyList fams(2, MarginalFamily::exponential(gamma, 2));
  double worst_residual = 0.0;
  double worst_gap = 0.0;
  for (int c = 0; c < games; ++c) {
    const Game game = random_game(ctx.rng, 2, 2);
    const auto fp = fixed_point_iterate(game, fams);
    worst_residual = std::max(worst_residual, seob_residual(game, fp.profile, fams));
    const auto grid = exhaustive_small_fixed_point(game, fams, res);
    worst_gap = std::max(worst_gap, grid.distance_inf(fp.profile));
  }
  ctx.record("fixed_point", "iterate_residual", worst_residual <= 1e-9, worst_residual, 1e-9);
  ctx.record("fixed_point", "grid_agreement", worst_gap <= 2.0 * res, worst_gap, 2.0 * res);
}

inline void verify_fixtures(VerifyContext& ctx) {
  int k = 0;
  for (const auto& f : ctx.section("cdf")) {
    const auto fam = family_from_json(f.at("family"), f.at("actions").get<int>());
    const double tol = f.at("tol").get<double>();
    const double d = std::abs(cdf(fam, f.at("action").get<int>(), f.at("s").get<double>()) -
                              f.at("expected").get<double>());
    ctx.record("fixtures", "cdf_" + std::to_string(k++), d <= tol, d, tol);
  }
  k = 0;
  for (const auto& f : ctx.section("residual")) {
    const Game game = game_from_json(f.at("game"));
    const FamilyList fams = families_from_json(f.at("family"), game);
    std::vector<Vector> s;
    for (const auto& p : f.at("profile")) s.push_back(vector_from_json(p, "profile"));
    const double tol = f.at("tol").get<double>();
    const double d =
        std::abs(seob_residual(game, StrategyProfile(std::move(s)), fams) - f.at("expected").get<double>());
    ctx.record("fixtures", "residual_" + std::to_string(k++), d <= tol, d, tol);
  }
}

}  // namespace detail

// Runs the named scope ("all" for every scope) and returns the manifest.
// Malformed fixtures throw InvalidInput.
inline Json run_verify(const std::string& scope, const Json& fixtures, std::uint64_t seed) {
  const auto& scopes = verify_scopes();
  if (scope != "all" && std::find(scopes.begin(), scopes.end(), scope) == scopes.end()) {
    throw InvalidInput("unknown verify scope \"" + scope + "\"");
  }
  using Runner = void (*)(detail::VerifyContext&);
  const std::map<std::string, Runner> runners = {
      {"sparsemax", detail::verify_sparsemax},   {"softmax", detail::verify_softmax},
      {"regularizer", detail::verify_regularizer}, {"coupling", detail::verify_coupling},
      {"gumbel", detail::verify_gumbel},         {"gradient", detail::verify_gradient},
      {"fixed_point", detail::verify_fixed_point}, {"fixtures", detail::verify_fixtures}};
  Json ran = Json::array();
  detail::VerifyContext ctx{fixtures, Rng(seed)};
  try {
    for (const auto& name : scopes) {
      if (scope != "all" && scope != name) continue;
      // Each scope gets its own stream so subsets reproduce the full run.
      ctx.rng = Rng(seed).split(static_cast<std::uint64_t>(&name - scopes.data()));
      runners.at(name)(ctx);
      ran.push_back(name);
    }
  } catch (const Json::exception& e) {
    throw InvalidInput(std::string("malformed fixtures: ") + e.what());
  }
  bool pass = true;
  for (const auto& c : ctx.checks) pass = pass && c.at("pass").get<bool>();
  return {{"scope", scope}, {"scopes_run", ran}, {"seed", seed}, {"checks", ctx.checks}, {"pass", pass}};
}

}  // namespace seob
