#pragma once

// Adaptive Gauss-Legendre quadrature on panels.
//
// Each panel is integrated with an n-point rule and with the same rule on its
// two halves; the difference is the panel's error estimate. Panels whose
// estimate exceeds their share of the absolute tolerance are split again.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

namespace ringcut::quad {

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussLegendreRule make_rule(int n) {
  if (n < 1) throw std::invalid_argument("Gauss-Legendre rule needs at least one node");
  GaussLegendreRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0, p1 = x;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = r.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

inline const GaussLegendreRule& rule20() {
  static const GaussLegendreRule r = make_rule(20);
  return r;
}

struct Options {
  double abs_tol = 1e-10;
  long max_evaluations = 1'000'000;
  int max_depth = 60;
};

template <class T>
struct Result {
  T value{};
  double error = 0.0;
  long evaluations = 0;
  bool converged = true;
};

template <class F>
auto fixed_rule(F& f, double a, double b, const GaussLegendreRule& rule) {
  using T = std::invoke_result_t<F&, double>;
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  T sum{};
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return T(sum * half);
}

/// Integrates f over [a, b]. The interval is first cut at `breaks` (points
/// where f has a kink or rapid variation); each piece is refined adaptively.
template <class F>
auto integrate(F&& f, double a, double b, std::vector<double> breaks = {}, Options opt = {}) {
  using T = std::invoke_result_t<F&, double>;
  Result<T> res;
  if (b == a) return res;
  if (b < a) throw std::invalid_argument("integrate expects a <= b");
  const auto& rule = rule20();
  const long per_panel = static_cast<long>(rule.nodes.size());

  std::vector<double> cuts{a};
  for (double x : breaks)
    if (x > a && x < b) cuts.push_back(x);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());

  struct Panel {
    double lo, hi;
    T whole;
    int depth;
  };
  std::vector<Panel> stack;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    stack.push_back({cuts[i], cuts[i + 1], fixed_rule(f, cuts[i], cuts[i + 1], rule), 0});
    res.evaluations += per_panel;
  }
  const double width = b - a;
  while (!stack.empty()) {
    Panel p = stack.back();
    stack.pop_back();
    const double mid = 0.5 * (p.lo + p.hi);
    const T left = fixed_rule(f, p.lo, mid, rule);
    const T right = fixed_rule(f, mid, p.hi, rule);
    res.evaluations += 2 * per_panel;
    const double err = std::abs(left + right - p.whole);
    const double allowed = opt.abs_tol * (p.hi - p.lo) / width;
    const bool out_of_budget = res.evaluations >= opt.max_evaluations || p.depth >= opt.max_depth;
    if (err <= allowed || out_of_budget) {
      res.value += left + right;
      res.error += err;
      if (err > allowed) res.converged = false;
      continue;
    }
    stack.push_back({p.lo, mid, left, p.depth + 1});
    stack.push_back({mid, p.hi, right, p.depth + 1});
  }
  return res;
}

}  // namespace ringcut::quad
