#pragma once

#include <array>
#include <cmath>
#include <numbers>

namespace seob {

namespace detail {

inline constexpr int kGaussOrder = 10;

struct GaussRule {
  std::array<double, kGaussOrder> nodes{};
  std::array<double, kGaussOrder> weights{};
};

// Legendre nodes on [-1, 1] by Newton iteration on P_n.
inline GaussRule make_gauss_rule() {
  GaussRule rule;
  constexpr int n = kGaussOrder;
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[static_cast<std::size_t>(i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

inline const GaussRule& gauss_rule() {
  static const GaussRule rule = make_gauss_rule();
  return rule;
}

template <class F>
double gauss_panel(const F& f, double a, double b) {
  const auto& rule = gauss_rule();
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < kGaussOrder; ++i) {
    s += rule.weights[static_cast<std::size_t>(i)] *
         f(mid + half * rule.nodes[static_cast<std::size_t>(i)]);
  }
  return s * half;
}

template <class F>
double adaptive_gauss(const F& f, double a, double b, double whole, double tol, int depth) {
  const double mid = 0.5 * (a + b);
  const double left = gauss_panel(f, a, mid);
  const double right = gauss_panel(f, mid, b);
  const double refined = left + right;
  if (depth <= 0 || std::abs(refined - whole) <= tol || !(mid > a && mid < b)) {
    return refined;
  }
  return adaptive_gauss(f, a, mid, left, 0.5 * tol, depth - 1) +
         adaptive_gauss(f, mid, b, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Composite Gauss-Legendre quadrature with dyadic refinement. Panels are
// bisected until the two-half estimate agrees with the parent to within the
// panel's share of `abs_tol`. Integrable endpoint singularities are handled by
// refinement toward the endpoint (nodes never touch it).
template <class F>
double integrate(const F& f, double a, double b, double abs_tol = 1e-10, int max_depth = 80) {
  if (a == b) return 0.0;
  if (a > b) return -integrate(f, b, a, abs_tol, max_depth);
  return detail::adaptive_gauss(f, a, b, detail::gauss_panel(f, a, b), abs_tol, max_depth);
}

}  // namespace seob
