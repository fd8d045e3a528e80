#pragma once

#include <vector>

#include "polaron/model.hpp"

namespace polaron {

/// Cell-centred radial grid r_j = (j - 1/2)·h on [0, r_max] with d-dimensional
/// volume weights S_{d-1} r_j^{d-1} h.
struct RadialGrid {
  int d = 3;
  double r_max = 0.0;
  int n = 0;
  std::vector<double> nodes;
  std::vector<double> weights;

  static RadialGrid uniform(int d, double r_max, int n);
  double spacing() const { return r_max / n; }
};

struct SolverSpec {
  double mixing = 0.5;
  double energy_tol = 1e-9;
  double defect_tol = 1e-7;
  int max_iter = 500;
  int nodes_per_width = 20;
  /// Largest allowed |ψ|² mass in the outer tenth of the grid.
  double boundary_mass_tol = 1e-10;
};

struct PekarEnergy {
  double kinetic = 0.0;
  double potential = 0.0;
  double total() const { return kinetic + potential; }
};

struct PekarSolution {
  RadialGrid grid;
  std::vector<double> psi;
  double energy = 0.0;
  double kinetic = 0.0;
  double potential = 0.0;
  /// Momentum grid (radial nodes and weights without the sphere factor) and ρ_ψ on it.
  std::vector<double> p_nodes;
  std::vector<double> p_weights;
  std::vector<double> rho;
  /// φ(p) = -√α ρ(p) v(p) / ε(p) on p_nodes.
  std::vector<double> field;
  double m_pek_alpha = 0.0;
  int iterations = 0;
  double residual = 0.0;
  double boundary_mass = 0.0;
  std::vector<double> energy_history;
};

/// Grid of n nodes covering `widths` harmonic lengths 1/sqrt(mω).
RadialGrid default_grid(const PolaronModel& model, const ModelConstants& consts, int n = 2048,
                        double widths = 16.0);

/// Discrete Pekar energy of a radial ψ given on `grid` (ψ need not be normalized; it is
/// normalized internally).
PekarEnergy pekar_energy(const PolaronModel& model, const RadialGrid& grid, const std::vector<double>& psi,
                         const QuadratureSpec& quad = {});

/// Self-consistent field minimization of the Pekar functional on `grid`.
PekarSolution minimize_pekar(const PolaronModel& model, const RadialGrid& grid, const SolverSpec& solver = {},
                             const QuadratureSpec& quad = {});
/// Same, starting from a caller-supplied ψ.
PekarSolution minimize_pekar(const PolaronModel& model, const RadialGrid& grid, std::vector<double> initial,
                             const SolverSpec& solver, const QuadratureSpec& quad);

/// Builds a default grid and enlarges it while mass reaches the boundary.
PekarSolution solve_pekar(const PolaronModel& model, const ModelConstants& consts, int n = 2048,
                          const SolverSpec& solver = {}, const QuadratureSpec& quad = {});

/// (2α/d) ∫ p² v² ρ² / ε³ dp.
double pekar_mass(const PekarSolution& sol, const PolaronModel& model, const QuadratureSpec& quad = {});
/// (2α/d) ∬ |ψ(x)|² R(x - y) |ψ(y)|² dx dy with a tabulated kernel R.
double pekar_mass_position(const PekarSolution& sol, const PolaronModel& model, const QuadratureSpec& quad = {});
/// -α ∬ |ψ(x)|² g(x - y) |ψ(y)|² dx dy with a tabulated kernel g.
double pekar_potential_position(const PekarSolution& sol, const PolaronModel& model,
                                const QuadratureSpec& quad = {});
/// (2/d) ∫ p² |φ(p)|² / ε(p) dp, the field form of the same mass.
double pekar_mass_from_field(const PekarSolution& sol, const PolaronModel& model);

/// d/dλ of the energy of λ^{d/2} ψ(λ x) at λ = 1.
double virial_derivative(const PekarSolution& sol, const PolaronModel& model, const QuadratureSpec& quad = {});

struct SemiclassicalState {
  double P = 0.0;
  double u = 0.0;
  double energy = 0.0;
  double linearized_u = 0.0;
  double residual = 0.0;
};

/// Right-hand side m u + α ∫ (p·P̂) v² ρ² / (ε - u p·P̂)² dp of the velocity equation.
double velocity_rhs(const PolaronModel& model, const PekarSolution& sol, double u, const QuadratureSpec& quad = {});

SemiclassicalState solve_velocity(const PolaronModel& model, const PekarSolution& sol, double P,
                                  const ModelConstants& consts, const QuadratureSpec& quad = {});

/// Value of the constrained semiclassical functional at the boosted minimizer and
/// the optimal field for velocity u.
double semiclassical_energy_at(const PolaronModel& model, const PekarSolution& sol, double u, double P,
                               const QuadratureSpec& quad = {});
double semiclassical_energy(const PolaronModel& model, const PekarSolution& sol, double P,
                            const ModelConstants& consts, const QuadratureSpec& quad = {});

}  // namespace polaron
