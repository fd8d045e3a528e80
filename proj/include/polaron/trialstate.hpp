#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "polaron/model.hpp"

namespace polaron {

enum class TrialMethod { TensorQuadrature, MonteCarlo };

std::string_view to_string(TrialMethod method);

struct TrialSpec {
  TrialMethod method = TrialMethod::TensorQuadrature;
  int radial_panels = 24;
  int radial_order = 16;
  int angular_points = 24;   ///< cosθ nodes for d ≥ 2
  int momentum_order = 16;   ///< Gauss nodes per momentum panel
  /// Multiplies every node count; refinement compares level k with 2k.
  int refine = 1;
  bool estimate_error = true;
  long node_budget = 50'000'000;  ///< radial × angular × momentum products
  long mc_samples = 200'000;
  std::uint64_t seed = 20240611;
  /// |P| ≤ cap_fraction·α·m_pek·c for superfluid dispersions, |P| ≤ α otherwise.
  double cap_fraction = 0.5;
  bool enforce_cap = true;
};

/// The probability measure m(x)dx ∝ exp(-mω|x|²/4 + Re F(x)) of the trial state,
/// tabulated on (r, t) with t the cosine between x and P.
struct WeightMeasure {
  int d = 3;
  double alpha = 0.0;
  double P = 0.0;
  double omega = 0.0;
  double r_max = 0.0;
  Rule radial;
  Rule angular;
  std::vector<double> J;        ///< J(r) per radial node
  double J0 = 0.0;
  std::vector<double> K;        ///< K_P(r, t), row-major [radial][angular]
  double K0 = 0.0;
  std::vector<double> A;        ///< A(r, t), same layout
  double F0 = 0.0;              ///< αJ(0) + K_P(0)/α
  /// exp(-F0)·∫ exp(-mω|x|²/4 + Re F) dx.
  double Z0 = 0.0;
  /// Normalisation N_α·∫ exp(-mω|x|²/4 + Re F) dx of the trial state.
  double I = 0.0;
  /// Probability mass of each (r, t) node, same layout; sums to 1.
  std::vector<double> mass;
  std::vector<double> moments;  ///< ⟨|x|^r⟩ for r = 0..8

  std::size_t index(std::size_t i, std::size_t j) const { return i * angular.size() + j; }
  /// exp(-F0)·∫|x|^r exp(-mω|x|²/4 + Re F) dx.
  double scaled_integral(int r) const { return Z0 * moments.at(r); }
};

WeightMeasure build_weight(const PolaronModel& model, const ModelConstants& consts, double alpha, double P,
                           const QuadratureSpec& quad = {}, const TrialSpec& spec = {});

/// ⟨|x|^r⟩ for 0 ≤ r ≤ 8.
double weight_moments(const WeightMeasure& w, int r);

struct TrialStateReport {
  double alpha = 0.0;
  double P = 0.0;
  double omega = 0.0;
  double cos_mean = 0.0;      ///< ⟨cos A⟩ = G(P)/I
  double norm_ratio = 0.0;    ///< I/G(P)
  double norm_bound = 0.0;    ///< 1/(1 - C_A²P²⟨|x|⁶⟩/2), +∞ when the bracket is vacuous
  double c_A = 0.0;           ///< |A(x)| ≤ c_A·|P|·|x|³
  double kinetic_term = 0.0;
  double field_term = 0.0;
  double interaction_term = 0.0;
  double energy = 0.0;
  double quadrature_error = 0.0;
  TrialMethod method = TrialMethod::TensorQuadrature;
  long nodes = 0;
  long samples = 0;
  std::uint64_t seed = 0;
};

/// Energy of the trial state ψ(P - P_f)|φ⟩ with Gaussian ψ and the coherent
/// state φ = -sqrt(α) v/ε (1 + p·P/(α m_pek ε)). A variational upper bound on E(P).
TrialStateReport variational_energy(const PolaronModel& model, const ModelConstants& consts, double alpha,
                                    double P, const QuadratureSpec& quad = {}, const TrialSpec& spec = {});

struct LemmaReport {
  int d = 3;
  double lambda = 0.0;
  double theta = 0.0;
  double mu = 0.0;
  double eps_tilde = 0.0;
  double delta = 0.0;
  double xi = 0.0;
  double xi_radius = 0.0;   ///< where the grid infimum sits
  double grid_max = 0.0;
  double tail_J = 0.0;      ///< max |J| on the outer part of the grid
};

/// λ, θ, δ and ξ = inf_{|x|>δ}(J(0) - J(x)) for ε̃ = eps_fraction·λ.
LemmaReport lemma_constants(const PolaronModel& model, const ModelConstants& consts, const QuadratureSpec& quad = {},
                            double eps_fraction = 0.5);

/// Bounds (lower, upper) on exp(-F0)·∫|x|^r exp(-mω|x|²/4 + Re F) dx from the lemma construction.
std::pair<double, double> lemma_bounds(const LemmaReport& lemma, const ModelConstants& consts, double alpha,
                                       double P, int r);

}  // namespace polaron
