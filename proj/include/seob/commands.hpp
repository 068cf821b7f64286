#pragma once

// Subcommand implementations shared by the `seob` executable and the tests.
// Exit codes: 0 ok, 1 error, 2 warning, 3 check failed.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "seob/analysis.hpp"
#include "seob/dynamics.hpp"
#include "seob/errors.hpp"
#include "seob/io.hpp"
#include "seob/verify.hpp"

namespace seob {

enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitWarning = 2, kExitCheckFailed = 3 };

struct CommandOptions {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<long> downsample;
  bool dry_run = false;
  bool quiet = false;
  // verify only
  std::string scope = "all";
  std::optional<std::string> fixtures;
};

namespace detail {

inline ExperimentConfig resolve_config(const CommandOptions& opt) {
  if (opt.config.empty()) throw InvalidInput("--config is required");
  ExperimentConfig c = load_experiment(opt.config);
  if (opt.out) c.output_dir = *opt.out;
  if (opt.seed) c.seed = *opt.seed;
  if (opt.downsample) c.downsample = *opt.downsample;
  return c;
}

inline Json plan(const std::string& command, const ExperimentConfig& c,
                 const std::vector<std::string>& outputs) {
  Json files = Json::array();
  for (const auto& f : outputs) files.push_back((c.output_dir / f).string());
  return {{"command", command}, {"dry_run", true}, {"config", experiment_to_json(c)}, {"outputs", files}};
}

inline void write_outputs_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InvalidInput("cannot create output directory " + dir.string() + ": " + ec.message());
}

template <class Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitError;
}

}  // namespace detail

// Warnings about a step schedule that does not meet the convergence conditions.
inline std::vector<std::string> schedule_warnings(const StepSchedule& s) {
  std::vector<std::string> w;
  const auto rep = schedule_validate(s);
  if (!rep.sum_diverges) {
    w.push_back("step schedule " + s.describe() +
                " violates the divergence condition: sum of lambda_t converges");
  }
  if (!rep.ratio_vanishes) {
    w.push_back("step schedule " + s.describe() +
                " violates the vanishing-ratio condition: sum lambda_t^2 / sum lambda_t does not tend to 0");
  }
  return w;
}

inline int cmd_simulate(const CommandOptions& opt, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    const ExperimentConfig c = detail::resolve_config(opt);
    const RunConfig rc = run_config(c);
    validate_run_config(c.game, rc);
    std::vector<std::string> warnings = schedule_warnings(c.schedule);
    if (opt.dry_run) {
      Json p = detail::plan("simulate", c, {"trace.csv", "summary.json"});
      p["warnings"] = warnings;
      out << p.dump(2) << '\n';
      return int{kExitOk};
    }
    const Trace trace = run_repeated_game(c.game, rc);
    if (trace.final_residual > c.tolerances.residual) {
      warnings.push_back("final SE-OB residual " + format_double(trace.final_residual) +
                         " exceeds tolerance " + format_double(c.tolerances.residual));
    }
    detail::write_outputs_dir(c.output_dir);
    write_text_file(c.output_dir / "trace.csv", trace_csv(trace));
    const auto sched = schedule_validate(c.schedule);
    const Json summary = {
        {"horizon", trace.horizon},
        {"downsample", trace.downsample},
        {"seed", c.seed},
        {"schedule", schedule_to_json(c.schedule)},
        {"schedule_report", {{"sum_diverges", sched.sum_diverges}, {"ratio_vanishes", sched.ratio_vanishes}}},
        {"final_profile", profile_to_json(trace.final_profile)},
        {"final_residual", trace.final_residual},
        {"residual_tolerance", c.tolerances.residual},
        {"last_movement", trace.last_movement},
        {"tail_movement", trace.tail_movement},
        {"clamp_triggers", trace.clamp_triggers},
        {"warnings", warnings}};
    write_text_file(c.output_dir / "summary.json", summary.dump(2) + "\n");
    for (const auto& w : warnings) err << "warning: " << w << '\n';
    if (!opt.quiet) {
      out << "residual " << format_double(trace.final_residual) << " after " << trace.horizon
          << " rounds; wrote " << (c.output_dir / "trace.csv").string() << '\n';
    }
    return warnings.empty() ? int{kExitOk} : int{kExitWarning};
  });
}

inline int cmd_solve(const CommandOptions& opt, std::ostream& out = std::cout,
                     std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    const ExperimentConfig c = detail::resolve_config(opt);
    if (opt.dry_run) {
      out << detail::plan("solve", c, {"equilibrium.json"}).dump(2) << '\n';
      return int{kExitOk};
    }
    const auto fp = fixed_point_iterate(c.game, c.risk_families, c.solver.damping, c.solver.tol,
                                        static_cast<int>(c.solver.max_iter));
    const double residual = seob_residual(c.game, fp.profile, c.risk_families);
    std::vector<std::string> warnings;
    if (!fp.converged) warnings.push_back("fixed-point iteration did not converge");
    if (residual > c.tolerances.solve_residual) {
      warnings.push_back("SE-OB residual " + format_double(residual) + " exceeds tolerance " +
                         format_double(c.tolerances.solve_residual));
    }
    Json payoffs = Json::array();
    for (int j = 0; j < c.game.num_players(); ++j) payoffs.push_back(expected_payoff(c.game, j, fp.profile));
    const Json result = {{"profile", profile_to_json(fp.profile)},
                         {"residual", residual},
                         {"iterations", fp.iterations},
                         {"converged", fp.converged},
                         {"last_step", fp.last_step},
                         {"expected_payoffs", payoffs},
                         {"warnings", warnings}};
    detail::write_outputs_dir(c.output_dir);
    write_text_file(c.output_dir / "equilibrium.json", result.dump(2) + "\n");
    for (const auto& w : warnings) err << "warning: " << w << '\n';
    if (!opt.quiet) out << "residual " << format_double(residual) << " after " << fp.iterations << " iterations\n";
    return warnings.empty() ? int{kExitOk} : int{kExitWarning};
  });
}

inline Json stability_to_json(const StabilityReport& a1, const Assumption2Report& a2) {
  Json p1 = Json::array();
  for (const auto& p : a1.players) {
    p1.push_back({{"lhs", p.lhs}, {"lhs_grid", p.lhs_grid}, {"lhs_closed_form", p.lhs_closed_form},
                  {"rhs", p.rhs}, {"pass", p.pass}});
  }
  Json p2 = Json::array();
  for (const auto& p : a2.players) {
    p2.push_back({{"lipschitz", std::isfinite(p.lipschitz) ? Json(p.lipschitz) : Json("inf")},
                  {"lipschitz_closed_form", p.lipschitz_closed_form},
                  {"strong_concavity_verified", p.strong_concavity_verified},
                  {"worst_slack", p.worst_slack}});
  }
  return {{"assumption1",
           {{"pass", a1.pass},
            {"players", p1},
            {"grid_fallback", a1.grid_fallback},
            {"hessian_samples", a1.hessian_samples},
            {"hessian_negdef_on_tangent", a1.hessian_negdef_on_tangent},
            {"diag_dominant", a1.diag_dominant},
            {"worst_tangent_eigenvalue", a1.worst_tangent_eigenvalue}}},
          {"assumption2", {{"pass", a2.pass}, {"players", p2}}},
          {"pass", a1.pass && a2.pass}};
}

inline int cmd_check(const CommandOptions& opt, std::ostream& out = std::cout,
                     std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    const ExperimentConfig c = detail::resolve_config(opt);
    if (opt.dry_run) {
      out << detail::plan("check", c, {"stability.json"}).dump(2) << '\n';
      return int{kExitOk};
    }
    const auto a1 = assumption1_check(c.game, c.risk_families, c.hessian_samples, c.seed);
    const auto a2 = assumption2_check(c.belief_families, c.assumption2_draws, c.seed);
    const Json report = stability_to_json(a1, a2);
    detail::write_outputs_dir(c.output_dir);
    write_text_file(c.output_dir / "stability.json", report.dump(2) + "\n");
    const bool pass = report.at("pass").get<bool>();
    if (!opt.quiet) {
      out << "assumption 1 " << (a1.pass ? "holds" : "fails") << ", assumption 2 "
          << (a2.pass ? "holds" : "fails") << '\n';
    }
    return pass ? int{kExitOk} : int{kExitCheckFailed};
  });
}

inline int cmd_verify(const CommandOptions& opt, std::ostream& out = std::cout,
                      std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    const auto& scopes = verify_scopes();
    if (opt.scope != "all" && std::find(scopes.begin(), scopes.end(), opt.scope) == scopes.end()) {
      throw InvalidInput("unknown verify scope \"" + opt.scope + "\"");
    }
    const Json fixtures = opt.fixtures ? read_json_file(*opt.fixtures) : default_verify_fixtures();
    if (!fixtures.is_object()) throw InvalidInput("fixtures must be a JSON object");
    const std::uint64_t seed =
        opt.seed ? *opt.seed : detail::optional_value<std::uint64_t>(fixtures, "seed", 0, "fixtures");
    if (opt.dry_run) {
      Json run = Json::array();
      for (const auto& s : scopes) {
        if (opt.scope == "all" || opt.scope == s) run.push_back(s);
      }
      out << Json{{"command", "verify"}, {"dry_run", true}, {"scopes", run}, {"seed", seed},
                  {"fixtures", opt.fixtures ? *opt.fixtures : std::string("built-in")}}
                 .dump(2)
          << '\n';
      return int{kExitOk};
    }
    const Json manifest = run_verify(opt.scope, fixtures, seed);
    const bool pass = manifest.at("pass").get<bool>();
    if (opt.out) {
      detail::write_outputs_dir(*opt.out);
      write_text_file(std::filesystem::path(*opt.out) / "manifest.json", manifest.dump(2) + "\n");
    }
    if (!opt.quiet || !pass) out << manifest.dump(2) << '\n';
    return pass ? int{kExitOk} : int{kExitCheckFailed};
  });
}

}  // namespace seob
