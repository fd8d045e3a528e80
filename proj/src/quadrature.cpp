#include "polaron/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "polaron/errors.hpp"

namespace polaron {

Rule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw PolaronError(ErrorCode::InvalidArgument, "gauss_legendre: n < 1");
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  Rule rule;
  if (n == 1) {
    rule.nodes = {mid};
    rule.weights = {b - a};
    return rule;
  }
  rule.nodes.resize(n);
  rule.weights.resize(n);
  // Returns (P_n(x), P_n'(x)).
  auto legendre = [n](double x) {
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    return std::pair{p1, n * (x * p1 - p0) / (x * x - 1.0)};
  };
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = mid - half * x;
    rule.nodes[n - 1 - i] = mid + half * x;
    rule.weights[i] = half * w;
    rule.weights[n - 1 - i] = half * w;
  }
  return rule;
}

Rule composite_gauss_legendre(int panels, int n, double a, double b) {
  const Rule ref = gauss_legendre(n);
  Rule rule;
  rule.nodes.reserve(static_cast<std::size_t>(panels) * n);
  rule.weights.reserve(static_cast<std::size_t>(panels) * n);
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    for (int i = 0; i < n; ++i) {
      rule.nodes.push_back(lo + 0.5 * h * (ref.nodes[i] + 1.0));
      rule.weights.push_back(0.5 * h * ref.weights[i]);
    }
  }
  return rule;
}

Rule angular_rule(int d, int n) {
  Rule rule;
  switch (d) {
    case 1:
      rule.nodes = {-1.0, 1.0};
      rule.weights = {1.0, 1.0};
      return rule;
    case 2: {
      // Integral over the circle reduces to 2 * int_{-1}^{1} f(t) / sqrt(1 - t^2) dt.
      rule.nodes.resize(n);
      rule.weights.assign(n, 2.0 * std::numbers::pi / n);
      for (int i = 0; i < n; ++i) rule.nodes[i] = std::cos((2.0 * i + 1.0) * std::numbers::pi / (2.0 * n));
      std::reverse(rule.nodes.begin(), rule.nodes.end());
      return rule;
    }
    case 3: {
      rule = gauss_legendre(n);
      for (double& w : rule.weights) w *= 2.0 * std::numbers::pi;
      return rule;
    }
    default:
      throw PolaronError(ErrorCode::InvalidArgument, "angular_rule: dimension must be 1, 2 or 3");
  }
}

Estimate integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                            double rel_tol, double abs_tol, int max_depth) {
  if (b <= a) return {};
  double error = 0.0;
  double l1 = 0.0;
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  // Boost's estimate on a resolved piece sits near rel_tol·L1 and doubles with
  // every bisection, so a single unsplit pass is tried first.
  double value = GK::integrate(f, a, b, 0, rel_tol, &error, &l1);
  if (std::isfinite(value) && error > 10.0 * std::max(abs_tol, rel_tol * std::abs(value))) {
    value = GK::integrate(f, a, b, static_cast<unsigned>(max_depth), rel_tol, &error, &l1);
  }
  if (!std::isfinite(value)) {
    throw PolaronError(ErrorCode::NonConvergent, "integrand produced a non-finite value");
  }
  const double target = std::max(abs_tol, rel_tol * std::abs(value));
  // Gauss–Kronrod's estimate is pessimistic by construction; accept up to 10x the target.
  if (error > 10.0 * target && error > 1e-14 * l1) {
    std::ostringstream os;
    os << "adaptive quadrature on [" << a << ", " << b << "] reached error " << error
       << " (target " << target << ")";
    throw PolaronError(ErrorCode::NonConvergent, os.str());
  }
  return {value, error};
}

Estimate integrate_panels(const std::function<double(double)>& f, double a, double b,
                          double panel, double rel_tol, double abs_tol) {
  if (b <= a) return {};
  const int n = std::max(1, static_cast<int>(std::ceil((b - a) / panel)));
  const double h = (b - a) / n;
  Estimate total;
  for (int i = 0; i < n; ++i) {
    const Estimate part = integrate_adaptive(f, a + i * h, a + (i + 1) * h, rel_tol, abs_tol / n);
    total.value += part.value;
    total.error += part.error;
  }
  return total;
}

Estimate integrate_breakpoints(const std::function<double(double)>& f, const std::vector<double>& breaks,
                               double rel_tol, double abs_tol) {
  Estimate total;
  if (breaks.size() < 2) return total;
  const double share = abs_tol / static_cast<double>(breaks.size() - 1);
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const Estimate part = integrate_adaptive(f, breaks[i], breaks[i + 1], rel_tol, share);
    total.value += part.value;
    total.error += part.error;
  }
  return total;
}

double golden_section_max(const std::function<double(double)>& f, double a, double b,
                          double x_tol, int max_iter) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < max_iter && (b - a) > x_tol; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    }
  }
  return f1 > f2 ? x1 : x2;
}

}  // namespace polaron
