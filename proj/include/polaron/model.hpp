#pragma once

#include <map>
#include <string>
#include <vector>

#include "polaron/profile.hpp"
#include "polaron/quadrature.hpp"

namespace polaron {

enum class RadialRule { AdaptivePanelGauss, FixedGaussLegendre };

struct QuadratureSpec {
  RadialRule radial_rule = RadialRule::AdaptivePanelGauss;
  int radial_points = 256;
  double r_max_multiplier = 12.0;
  int angular_points = 48;
  double rel_tol = 1e-12;
  double abs_tol = 1e-15;

  void validate() const;
};

/// A polaron model with isotropic form factor v and dispersion ε in d dimensions.
struct PolaronModel {
  PolaronModel(int d, double m, double alpha, RadialProfile v, RadialProfile eps);

  int d;
  double m;
  double alpha;
  RadialProfile v;
  RadialProfile eps;

  /// Same model at a different coupling.
  PolaronModel with_alpha(double a) const;
  /// Radius beyond which |v| is treated as negligible.
  double cutoff(const QuadratureSpec& quad) const;
};

/// Derived scalars of a regular model. Integrals are over R^d in momentum space.
struct ModelConstants {
  int d = 3;
  double m = 1.0;
  double alpha = 1.0;

  double h_sq = 0.0;              ///< ∫ v²/ε
  double grad_h_sq = 0.0;         ///< ∫ k² v²/ε
  double lap_h_sq = 0.0;          ///< ∫ k⁴ v²/ε
  double grad_eta_sq = 0.0;       ///< ∫ k² v²
  double quartic_over_eps = 0.0;  ///< ∫ k⁴ v²/ε
  double omega = 0.0;             ///< sqrt(2α/(d m) · grad_h_sq)
  double m_pek = 0.0;             ///< (2/d) ∫ k² v²/ε³
  double lambda_c = 0.0;          ///< (1/2d) ∫ k² v²/ε²
  double theta_c = 0.0;           ///< (1/24d) ∫ k⁴ v²/ε²
  double mu_c = 0.0;              ///< (1/(2d m_pek²)) ∫ k⁴ v²/ε⁴
  double j0 = 0.0;                ///< ∫ v²/ε²
  double alpha_m = 0.0;           ///< coupling above which the strong-coupling branch of the lower bound is optimal
  double gap = 0.0;               ///< sampled inf ε
  double crit_velocity = 0.0;     ///< sampled inf ε(k)/|k|; 0 when not of superfluid type

  std::map<std::string, double> err_estimates;

  /// ‖∇η‖² / ‖∇h‖².
  double eta_ratio() const { return grad_eta_sq / grad_h_sq; }
  /// ω at another coupling.
  double omega_at(double a) const;
  /// Constant gap between the ground-state upper and lower bounds (valid for α ≥ alpha_m).
  double thm1_gap() const;

  /// Rows name,value,err_estimate in a fixed order.
  std::vector<std::pair<std::string, double>> named_values() const;
};

/// S_{d-1} ∫_0^∞ r^{power+d-1} |v(r)|² ε(r)^{-eps_power} dr with an error estimate.
Estimate radial_integral(const PolaronModel& model, int power, int eps_power, const QuadratureSpec& quad);

/// Same integral for an arbitrary radial weight w(r) multiplying r^{power+d-1}|v|²ε^{-eps_power}.
Estimate radial_integral_weighted(const PolaronModel& model, int power, int eps_power,
                                  const std::function<double(double)>& weight, const QuadratureSpec& quad);

ModelConstants compute_constants(const PolaronModel& model, const QuadratureSpec& quad = {});

struct IntegralVerdict {
  std::string name;
  bool finite = false;
  double value = 0.0;
  double error = 0.0;
  std::string detail;
};

struct SampledInfimum {
  double value = 0.0;
  double argmin = 0.0;
  int grid_points = 0;
  double grid_lo = 0.0;
  double grid_hi = 0.0;
  std::string note;
};

struct RegularityReport {
  std::vector<IntegralVerdict> integrals;
  bool massive = false;
  SampledInfimum gap;
  bool superfluid = false;
  SampledInfimum crit_velocity;
  bool subadditive_sampled = false;
  int subadditivity_pairs = 0;
  std::string subadditivity_detail;

  bool integrals_finite() const;
  /// Finite integrals and a massive dispersion.
  bool regular() const { return integrals_finite() && massive; }
  std::string failure_summary() const;
};

RegularityReport validate_regularity(const PolaronModel& model, const QuadratureSpec& quad = {});

/// inf ε over a geometric grid with golden-section refinement.
SampledInfimum sampled_gap(const PolaronModel& model);
/// inf ε(r)/r over a geometric grid; value 0 when the ratio keeps falling at the grid end.
SampledInfimum sampled_critical_velocity(const PolaronModel& model);

/// g(r) = ∫ v²/ε e^{ik·x} dk at |x| = r (no (2π) factors).
Estimate kernel_g(const PolaronModel& model, double r, const QuadratureSpec& quad = {});
/// R(r) = ∫ p² v²/ε³ e^{ip·x} dp at |x| = r.
Estimate kernel_R(const PolaronModel& model, double r, const QuadratureSpec& quad = {});

/// ∫_{R^d} f(|k|) e^{ik·x} dk at |x| = r for a radial f supported on [0, k_max].
Estimate radial_fourier(int d, const std::function<double(double)>& f, double r, double k_max,
                        const QuadratureSpec& quad);

}  // namespace polaron
