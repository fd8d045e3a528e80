#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polaron/model.hpp"

namespace polaron {

enum class BoundKind { Upper, Lower };
enum class BoundTarget { E0, EP };

struct EnergyBound {
  double value = 0.0;
  BoundKind kind = BoundKind::Upper;
  BoundTarget target = BoundTarget::E0;
  double P = 0.0;
  std::vector<std::pair<std::string, double>> components;
  bool valid = true;
  std::string reason;
};

EnergyBound thm1_upper(const ModelConstants& consts, double alpha);
EnergyBound thm1_lower(const ModelConstants& consts, double alpha);

/// Ground-state lower bound for an arbitrary particle mass (both branches).
double thm1_lower_value(int d, double m, double alpha, double h_sq, double grad_h_sq, double lap_h_sq,
                        double grad_eta_sq);

struct VelocityShiftNorms {
  double u = 0.0;
  double h_u_sq = 0.0;
  double grad_h_u_sq = 0.0;
  double lap_h_u_sq = 0.0;
  double err = 0.0;
};

/// Norms of h_u for a velocity u along a fixed axis, |u| < 0.99 c.
VelocityShiftNorms hu_norms(const PolaronModel& model, const ModelConstants& consts, double u,
                            const QuadratureSpec& quad = {});

/// Value of the E(P) lower-bound expression at a fixed velocity u (λ optimized in closed form).
double eP_lower_at(const PolaronModel& model, const ModelConstants& consts, double alpha, double P, double u,
                   const QuadratureSpec& quad = {});
/// Largest admissible λ for velocity u.
double lambda_max(const ModelConstants& consts, double alpha, double u);

EnergyBound eP_lower(const PolaronModel& model, const ModelConstants& consts, double alpha, double P,
                     const QuadratureSpec& quad = {});
EnergyBound eP_upper_asymptotic(const ModelConstants& consts, double alpha, double P);

struct WindowSources {
  /// Rigorous upper bound on E(P); eP_upper_asymptotic is used when empty.
  std::function<double(double)> upper;
  /// Pekar energy, tightening the upper bound on E(0).
  std::optional<double> e_pek;
  double min_ratio_sqrt = 10.0;  ///< window needs |P|/sqrt(α) ≥ this
  double max_ratio_alpha = 0.1;  ///< window needs |P|/α ≤ this
};

struct WindowEntry {
  double P = 0.0;
  EnergyBound upper;
  EnergyBound lower;
  double M_lower = 0.0;
  double M_upper = 0.0;
  double ratio_sqrt = 0.0;   ///< |P|/sqrt(α)
  double ratio_alpha = 0.0;  ///< |P|/α
  bool in_window = false;
  bool degenerate = false;
  /// Both denominators positive and the lower bound admissible.
  bool bracket_ok = false;
  /// bracket_ok and inside the window.
  bool valid = false;
  std::string reason;
};

struct MomentumWindowReport {
  double alpha = 0.0;
  double m_pek = 0.0;
  double e0_lower = 0.0;
  double e0_upper = 0.0;
  std::vector<WindowEntry> entries;
};

MomentumWindowReport mass_quotient_window(const PolaronModel& model, const ModelConstants& consts, double alpha,
                                          const std::vector<double>& P_grid, const WindowSources& sources = {},
                                          const QuadratureSpec& quad = {});

struct MassCertificate {
  double alpha = 0.0;
  double pf2_lower = 0.0;
  double w_upper = 0.0;
  double meff_lower = 0.0;
  double lambda_star = 0.0;
  double mu_star = 0.0;
  bool vacuous = false;
};

MassCertificate meff_divergence_certificate(const ModelConstants& consts, double alpha);

double essential_spectrum_ceiling(const PolaronModel& model, double e0_upper, double P);

/// Lower convex hull of an even function sampled at |P| ≥ 0, evaluated at the sample points.
std::vector<std::pair<double, double>> convex_envelope(const std::vector<std::pair<double, double>>& samples);

}  // namespace polaron
