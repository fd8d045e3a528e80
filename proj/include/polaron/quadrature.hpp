#pragma once

#include <functional>
#include <numbers>
#include <vector>

namespace polaron {

/// A value together with an absolute error estimate.
struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

/// Nodes and weights of a one-dimensional quadrature rule.
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// Gauss–Legendre rule with n nodes on [a, b].
Rule gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// Composite Gauss–Legendre: `panels` equal panels on [a, b], n nodes each.
Rule composite_gauss_legendre(int panels, int n, double a, double b);

/// Surface area of the unit sphere S^{d-1} in R^d.
constexpr double sphere_area(int d) {
  switch (d) {
    case 1:
      return 2.0;
    case 2:
      return 2.0 * std::numbers::pi;
    default:
      return 4.0 * std::numbers::pi;
  }
}

/// Rule over t = cos(angle to a fixed axis) for isotropic integrals in R^d.
/// The weights sum to sphere_area(d):
///   d = 1: t = ±1, weight 1 each;
///   d = 2: Gauss–Chebyshev nodes (the 1/sqrt(1 - t^2) Jacobian is in the weights);
///   d = 3: Gauss–Legendre scaled by 2π.
Rule angular_rule(int d, int n);

/// Adaptive Gauss–Kronrod integration of f over [a, b].
/// Throws PolaronError(NonConvergent) when the requested tolerance is not met.
Estimate integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                            double rel_tol, double abs_tol, int max_depth = 18);

/// Adaptive integration over consecutive intervals [breaks[i], breaks[i+1]].
Estimate integrate_breakpoints(const std::function<double(double)>& f, const std::vector<double>& breaks,
                               double rel_tol, double abs_tol);

/// Same as integrate_adaptive but splits [a, b] into panels no longer than `panel`
/// (used for oscillatory integrands).
Estimate integrate_panels(const std::function<double(double)>& f, double a, double b,
                          double panel, double rel_tol, double abs_tol);

/// Golden-section maximisation of a unimodal function on [a, b].
/// Returns the abscissa of the maximum.
double golden_section_max(const std::function<double(double)>& f, double a, double b,
                          double x_tol, int max_iter = 200);

}  // namespace polaron
