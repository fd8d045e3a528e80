#pragma once

#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace polaron {

enum class ProfileKind {
  Gaussian,           ///< A·exp(-r²/(2w²)); params [A, w]
  PowerWithCutoff,    ///< A·r^p·exp(-(r/Λ)²), Λ <= 0 disables the cutoff; params [A, p, Λ]
  GappedLinear,       ///< sqrt(Δ² + c²r²); params [Δ, c]
  Tabulated,          ///< monotone cubic through (r, value) knots
};

std::string_view to_string(ProfileKind kind);
ProfileKind profile_kind_from_string(std::string_view name);

/// A function of |k| only. Immutable after construction; copies share the
/// interpolant of tabulated profiles.
class RadialProfile {
 public:
  RadialProfile(ProfileKind kind, std::vector<double> params, double decay_scale,
                std::vector<std::pair<double, double>> table = {});

  static RadialProfile gaussian(double amplitude, double width);
  static RadialProfile constant(double value);
  static RadialProfile power(double amplitude, double exponent, double cutoff = 0.0,
                             double decay_scale = 1.0);
  static RadialProfile gapped_linear(double gap, double slope, double decay_scale = 1.0);
  static RadialProfile tabulated(std::vector<std::pair<double, double>> table, double decay_scale);

  /// Value at radius r >= 0. Tabulated profiles throw beyond 1.5× the last knot.
  double operator()(double r) const;

  /// This profile multiplied by s.
  RadialProfile scaled(double s) const;

  ProfileKind kind() const { return kind_; }
  const std::vector<double>& params() const { return params_; }
  const std::vector<std::pair<double, double>>& table() const { return table_; }
  double decay_scale() const { return decay_scale_; }

  /// Largest radius at which the profile may be evaluated.
  double support_limit() const;

  /// True when the profile vanishes identically.
  bool is_zero() const;

 private:
  ProfileKind kind_;
  std::vector<double> params_;
  double decay_scale_;
  double scale_ = 1.0;
  std::vector<std::pair<double, double>> table_;
  std::function<double(double)> interp_;
};

}  // namespace polaron
