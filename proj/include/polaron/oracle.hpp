#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "polaron/model.hpp"

namespace polaron {

struct ModePoint {
  std::array<double, 3> k{};  ///< momentum; components beyond d are zero
  double weight = 0.0;        ///< quadrature weight of the mode cell
};

/// Discretized field modes plus a cap on the total boson number.
struct FockTruncation {
  int d = 1;
  std::vector<ModePoint> modes;
  int n_max = 2;
  std::size_t basis_cap = 2'000'000;

  /// Uniform symmetric grid on [-k_max, k_max] with trapezoid weights,
  /// k_max = k_max_factor · decay scale of v.
  static FockTruncation symmetric_1d(const PolaronModel& model, int n_modes, int n_max,
                                     double k_max_factor = 6.0);
  /// Gauss radial nodes on [0, k_max] times a Lebedev rule with 6, 14 or 26 points (d = 3).
  static FockTruncation product_3d(const PolaronModel& model, int n_radial, int n_angular, int n_max,
                                   double k_max_factor = 6.0);

  /// Σ_{n ≤ n_max} multisets of size n; saturates at SIZE_MAX.
  std::size_t basis_size() const;
};

/// Occupation-multiset basis, ordered by particle number and then
/// lexicographically over the sorted mode indices.
class FockBasis {
 public:
  FockBasis(std::size_t n_modes, int n_max);

  std::size_t size() const { return offsets_.back(); }
  std::size_t n_modes() const { return modes_; }
  int n_max() const { return n_max_; }

  /// Sorted mode indices of state i.
  std::vector<std::uint32_t> state(std::size_t i) const;
  /// Index of a sorted multiset; it must have at most n_max entries.
  std::size_t rank(const std::vector<std::uint32_t>& sorted) const;

 private:
  std::size_t count(std::size_t n, std::size_t k) const;  // C(n, k) from the table

  std::size_t modes_;
  int n_max_;
  std::size_t width_;
  std::vector<std::size_t> binom_;
  std::vector<std::size_t> offsets_;
};

/// The fiber Hamiltonian on a truncated Fock space. Rows are produced by
/// `row`; `apply` either uses a stored CSR copy or regenerates rows.
class SparseOperator {
 public:
  SparseOperator(const PolaronModel& model, double alpha, double P, const FockTruncation& trunc,
                 std::size_t csr_limit = 100'000);

  std::size_t size() const { return basis_.size(); }
  const FockBasis& basis() const { return basis_; }
  bool stored() const { return !row_ptr_.empty(); }
  double diagonal(std::size_t i) const { return diag_[i]; }

  /// Off-diagonal entries (column, value) of row i, columns ascending.
  void row(std::size_t i, std::vector<std::pair<std::size_t, double>>& out) const;
  /// y = H x using `threads` fixed chunks.
  void apply(const std::vector<double>& x, std::vector<double>& y, int threads = 1) const;
  /// Dense copy for small operators (tests).
  std::vector<double> dense() const;

 private:
  FockBasis basis_;
  int d_;
  std::vector<ModePoint> modes_;
  std::vector<double> coupling_;  // sqrt(α w_j) v(k_j)
  std::vector<double> diag_;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> cols_;
  std::vector<double> vals_;
};

SparseOperator build_fiber_hamiltonian(const PolaronModel& model, double alpha, double P,
                                       const FockTruncation& trunc);

struct EigSpec {
  double tol = 1e-8;  ///< relative residual target ‖Hx - Ex‖ ≤ tol·max(1, |E|)
  int krylov = 64;
  int max_restarts = 400;
  int threads = 1;
};

struct SpectrumEstimate {
  double P = 0.0;
  double ground_energy = 0.0;
  double residual = 0.0;
  int iterations = 0;
  std::size_t basis_size = 0;
  int n_max = 0;
  std::size_t n_modes = 0;
  /// (n_max, energy) along the nested bases n_max = 0, 1, ...
  std::vector<std::pair<int, double>> truncation_trend;
};

/// Lowest eigenvalue by explicitly restarted Lanczos with full reorthogonalization.
SpectrumEstimate ground_energy(const SparseOperator& H, const EigSpec& solver = {});

/// Ground energy at one P with the nested n_max trend filled in.
SpectrumEstimate fiber_ground_energy(const PolaronModel& model, double alpha, double P,
                                     const FockTruncation& trunc, const EigSpec& solver = {});

std::vector<SpectrumEstimate> scan_dispersion(const PolaronModel& model, double alpha,
                                              const std::vector<double>& P_grid, const FockTruncation& trunc,
                                              const EigSpec& solver = {});

}  // namespace polaron
