#pragma once

// Marginal belief families. A family fixes one CDF F_i per action; the set of
// all joint perturbation laws with these marginals is the belief set, and
// h(p) = sum_i int_{1-p_i}^1 F_i^{-1}(t) dt is the regularizer it induces.
//
// Most routines here take the upper-tail probability p = 1 - t rather than t,
// because the quantities that matter (F^{-1}(1 - p) for small p) lose all
// precision if 1 - p is formed first.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "seob/errors.hpp"
#include "seob/game.hpp"

namespace seob {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// F_i(s) = max{0, 1 - eta_i exp(-s/gamma - 1)}
struct ExponentialFamily {
  double gamma;
  Vector eta;
};

// F(s) = clip(1 - (1/2 - s/(2 gamma)) / N) on [gamma(1 - 2N), gamma], same for every action.
struct UniformFamily {
  double gamma;
  int actions;
};

// F_i(s) = max{0, 1 - eta_i ((1 - s(q-1)/gamma) / q)^{1/(q-1)}}, q > 0, q != 1.
struct ParetoFamily {
  double gamma;
  double q;
  Vector eta;
};

// Quantile given as a piecewise-linear function of t through (t, value) knots.
// Each table starts at t = 0, ends at t = 1, and has nondecreasing values.
struct TabulatedFamily {
  using Table = std::vector<std::pair<double, double>>;
  std::vector<Table> tables;
};

enum class FamilyKind { Exponential, Uniform, Pareto, Tabulated };

inline std::string to_string(FamilyKind k) {
  switch (k) {
    case FamilyKind::Exponential: return "exponential";
    case FamilyKind::Uniform: return "uniform";
    case FamilyKind::Pareto: return "pareto";
    case FamilyKind::Tabulated: return "tabulated";
  }
  return "unknown";
}

class MarginalFamily {
 public:
  using Variant = std::variant<ExponentialFamily, UniformFamily, ParetoFamily, TabulatedFamily>;

  static MarginalFamily exponential(double gamma, Vector eta) {
    check_gamma(gamma);
    check_weights(eta);
    return MarginalFamily(ExponentialFamily{gamma, std::move(eta)});
  }
  static MarginalFamily exponential(double gamma, int actions) {
    return exponential(gamma, Vector::Ones(actions));
  }

  static MarginalFamily uniform(double gamma, int actions) {
    check_gamma(gamma);
    if (actions < 1) throw InvalidInput("uniform family needs at least one action");
    return MarginalFamily(UniformFamily{gamma, actions});
  }

  static MarginalFamily pareto(double gamma, double q, Vector eta) {
    check_gamma(gamma);
    check_weights(eta);
    if (!(q > 0.0) || q == 1.0 || !std::isfinite(q)) {
      throw InvalidInput("pareto shape q must be positive and different from 1");
    }
    return MarginalFamily(ParetoFamily{gamma, q, std::move(eta)});
  }

  static MarginalFamily tabulated(std::vector<TabulatedFamily::Table> tables) {
    if (tables.empty()) throw InvalidInput("tabulated family needs at least one table");
    for (std::size_t i = 0; i < tables.size(); ++i) {
      const auto& tab = tables[i];
      const std::string name = "table for action " + std::to_string(i);
      if (tab.size() < 2) throw InvalidInput(name + " needs at least two knots");
      if (tab.front().first != 0.0 || tab.back().first != 1.0) {
        throw InvalidInput(name + " must span t in [0, 1]");
      }
      for (std::size_t k = 0; k < tab.size(); ++k) {
        if (!std::isfinite(tab[k].second)) throw InvalidInput(name + " has a non-finite value");
        if (k > 0 && !(tab[k].first > tab[k - 1].first)) {
          throw InvalidInput(name + " grid must be strictly increasing in t");
        }
        if (k > 0 && tab[k].second < tab[k - 1].second) {
          throw InvalidInput(name + " quantile values must be nondecreasing");
        }
      }
    }
    return MarginalFamily(TabulatedFamily{std::move(tables)});
  }

  FamilyKind kind() const { return static_cast<FamilyKind>(v_.index()); }
  const Variant& variant() const { return v_; }

  int num_actions() const {
    return std::visit(
        [](const auto& f) -> int {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, UniformFamily>) {
            return f.actions;
          } else if constexpr (std::is_same_v<T, TabulatedFamily>) {
            return static_cast<int>(f.tables.size());
          } else {
            return static_cast<int>(f.eta.size());
          }
        },
        v_);
  }

  std::string describe() const {
    return std::visit(
        [this](const auto& f) -> std::string {
          using T = std::decay_t<decltype(f)>;
          std::string s = to_string(kind()) + "(N=" + std::to_string(num_actions());
          if constexpr (!std::is_same_v<T, TabulatedFamily>) {
            s += ", gamma=" + std::to_string(f.gamma);
          }
          if constexpr (std::is_same_v<T, ParetoFamily>) s += ", q=" + std::to_string(f.q);
          return s + ")";
        },
        v_);
  }

  void check_action(int i) const {
    if (i < 0 || i >= num_actions()) {
      throw InvalidInput("action index " + std::to_string(i) + " out of range for " + describe());
    }
  }

  // True when density and regularizer have closed forms (everything but tables).
  bool has_closed_form_density() const { return kind() != FamilyKind::Tabulated; }

 private:
  explicit MarginalFamily(Variant v) : v_(std::move(v)) {}

  static void check_gamma(double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidInput("scale gamma must be positive");
  }
  static void check_weights(const Vector& eta) {
    if (eta.size() < 1) throw InvalidInput("family needs at least one action");
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      if (!(eta[i] > 0.0) || !std::isfinite(eta[i])) {
        throw InvalidInput("weight eta_" + std::to_string(i) + " must be positive");
      }
    }
  }

  Variant v_;
};

namespace detail {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline double table_quantile(const TabulatedFamily::Table& tab, double t) {
  auto it = std::upper_bound(tab.begin(), tab.end(), t,
                             [](double x, const auto& knot) { return x < knot.first; });
  if (it == tab.begin()) return tab.front().second;
  if (it == tab.end()) return tab.back().second;
  const auto& [t1, v1] = *it;
  const auto& [t0, v0] = *(it - 1);
  return v0 + (t - t0) / (t1 - t0) * (v1 - v0);
}

inline double table_cdf(const TabulatedFamily::Table& tab, double s) {
  if (s < tab.front().second) return 0.0;
  if (s >= tab.back().second) return 1.0;
  // Last knot with value <= s; the following knot has value > s.
  auto it = std::upper_bound(tab.begin(), tab.end(), s,
                             [](double x, const auto& knot) { return x < knot.second; });
  const auto& [t1, v1] = *it;
  const auto& [t0, v0] = *(it - 1);
  return t0 + (s - v0) / (v1 - v0) * (t1 - t0);
}

// int_{1-x}^{1} of the piecewise-linear quantile, exactly.
inline double table_upper_integral(const TabulatedFamily::Table& tab, double x) {
  const double lo = 1.0 - x;
  double total = 0.0;
  for (std::size_t k = 1; k < tab.size(); ++k) {
    double a = std::max(tab[k - 1].first, lo);
    double b = tab[k].first;
    if (b <= a) continue;
    total += 0.5 * (b - a) * (table_quantile(tab, a) + table_quantile(tab, b));
  }
  return total;
}

inline void check_tail_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InvalidInput("tail probability " + std::to_string(p) + " outside [0,1]");
  }
}

}  // namespace detail

// F_i(s), clipped to [0,1].
inline double cdf(const MarginalFamily& fam, int i, double s) {
  fam.check_action(i);
  if (std::isnan(s)) throw InvalidInput("cdf evaluated at NaN");
  const auto ui = static_cast<Eigen::Index>(i);
  double v = std::visit(
      detail::overloaded{
          [&](const ExponentialFamily& f) {
            return 1.0 - f.eta[ui] * std::exp(-s / f.gamma - 1.0);
          },
          [&](const UniformFamily& f) {
            return 1.0 - (0.5 - s / (2.0 * f.gamma)) / f.actions;
          },
          [&](const ParetoFamily& f) {
            const double base = (1.0 - s * (f.q - 1.0) / f.gamma) / f.q;
            if (base <= 0.0) return f.q > 1.0 ? 1.0 : 0.0;
            return 1.0 - f.eta[ui] * std::pow(base, 1.0 / (f.q - 1.0));
          },
          [&](const TabulatedFamily& f) {
            return detail::table_cdf(f.tables[static_cast<std::size_t>(i)], s);
          }},
      fam.variant());
  return std::clamp(v, 0.0, 1.0);
}

// F_i^{-1}(1 - p), computed directly from the upper-tail probability p.
// Returns +infinity at p = 0 for families with unbounded upper support.
inline double tail_quantile(const MarginalFamily& fam, int i, double p) {
  fam.check_action(i);
  detail::check_tail_probability(p);
  const auto ui = static_cast<Eigen::Index>(i);
  return std::visit(
      detail::overloaded{
          [&](const ExponentialFamily& f) {
            if (p == 0.0) return kInfinity;
            return f.gamma * (std::log(f.eta[ui] / p) - 1.0);
          },
          [&](const UniformFamily& f) { return f.gamma * (1.0 - 2.0 * f.actions * p); },
          [&](const ParetoFamily& f) {
            if (p == 0.0) return f.q > 1.0 ? f.gamma / (f.q - 1.0) : kInfinity;
            return f.gamma / (f.q - 1.0) * (1.0 - f.q * std::pow(p / f.eta[ui], f.q - 1.0));
          },
          [&](const TabulatedFamily& f) {
            return detail::table_quantile(f.tables[static_cast<std::size_t>(i)], 1.0 - p);
          }},
      fam.variant());
}

// Left quantile F_i^{-1}(t). At t = 0 the lower end of the support is
// returned; at t = 1 unbounded families return +infinity.
inline double quantile(const MarginalFamily& fam, int i, double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw InvalidInput("quantile level " + std::to_string(t) + " outside [0,1]");
  }
  if (fam.kind() == FamilyKind::Tabulated) {
    fam.check_action(i);
    const auto& tab = std::get<TabulatedFamily>(fam.variant()).tables[static_cast<std::size_t>(i)];
    return detail::table_quantile(tab, t);
  }
  return tail_quantile(fam, i, 1.0 - t);
}

// Central finite difference of the CDF at F^{-1}(1 - p).
inline double numeric_density_at_quantile(const MarginalFamily& fam, int i, double p) {
  const double s = tail_quantile(fam, i, p);
  const double h = 1e-6 * std::max(1.0, std::abs(s));
  return (cdf(fam, i, s + h) - cdf(fam, i, s - h)) / (2.0 * h);
}

// F_i'(F_i^{-1}(1 - p)) for p in (0,1). Tabulated families fall back to the
// numeric derivative.
inline double density_at_quantile(const MarginalFamily& fam, int i, double p) {
  fam.check_action(i);
  if (!(p > 0.0 && p < 1.0)) {
    throw InvalidInput("density requested at p = " + std::to_string(p) + ", need p in (0,1)");
  }
  const auto ui = static_cast<Eigen::Index>(i);
  return std::visit(
      detail::overloaded{
          [&](const ExponentialFamily& f) { return p / f.gamma; },
          [&](const UniformFamily& f) { return 1.0 / (2.0 * f.gamma * f.actions); },
          [&](const ParetoFamily& f) {
            return std::pow(p, 2.0 - f.q) * std::pow(f.eta[ui], f.q - 1.0) / (f.gamma * f.q);
          },
          [&](const TabulatedFamily&) { return numeric_density_at_quantile(fam, i, p); }},
      fam.variant());
}

// int_{1-x}^{1} F_i^{-1}(t) dt for x in [0,1]. Defined off the simplex too, so
// that finite differences can perturb one coordinate at a time.
inline double regularizer_term(const MarginalFamily& fam, int i, double x) {
  fam.check_action(i);
  detail::check_tail_probability(x);
  const auto ui = static_cast<Eigen::Index>(i);
  return std::visit(
      detail::overloaded{
          [&](const ExponentialFamily& f) {
            return x == 0.0 ? 0.0 : f.gamma * x * std::log(f.eta[ui] / x);
          },
          [&](const UniformFamily& f) { return f.gamma * (x - f.actions * x * x); },
          [&](const ParetoFamily& f) {
            return f.gamma / (f.q - 1.0) * (x - f.eta[ui] * std::pow(x / f.eta[ui], f.q));
          },
          [&](const TabulatedFamily& f) {
            return detail::table_upper_integral(f.tables[static_cast<std::size_t>(i)], x);
          }},
      fam.variant());
}

inline double regularizer_unchecked(const MarginalFamily& fam, const Vector& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    h += regularizer_term(fam, static_cast<int>(i), std::clamp(p[i], 0.0, 1.0));
  }
  return h;
}

// h(p) = sum_i int_{1-p_i}^1 F_i^{-1}(t) dt on the simplex.
inline double regularizer(const MarginalFamily& fam, const Vector& p) {
  if (p.size() != fam.num_actions()) {
    throw InvalidInput("probability vector length does not match " + fam.describe());
  }
  validate_simplex(p, 1e-9, "regularizer argument");
  return regularizer_unchecked(fam, p);
}

// Lower end of the support of F_i (value of the quantile at t = 0).
inline double support_lower(const MarginalFamily& fam, int i) { return quantile(fam, i, 0.0); }

// Upper end of the support of F_i; +infinity if unbounded.
inline double support_upper(const MarginalFamily& fam, int i) { return tail_quantile(fam, i, 0.0); }

}  // namespace seob
