#include "polaron/pekar.hpp"

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "polaron/errors.hpp"
#include "polaron/special.hpp"

namespace polaron {

RadialGrid RadialGrid::uniform(int d, double r_max, int n) {
  if (d < 1 || d > 3) throw PolaronError(ErrorCode::InvalidArgument, "RadialGrid: d must be 1, 2 or 3");
  if (!(r_max > 0.0) || n < 8) throw PolaronError(ErrorCode::InvalidArgument, "RadialGrid: need r_max > 0, n >= 8");
  RadialGrid g;
  g.d = d;
  g.r_max = r_max;
  g.n = n;
  const double h = r_max / n;
  const double area = sphere_area(d);
  g.nodes.resize(n);
  g.weights.resize(n);
  for (int j = 0; j < n; ++j) {
    const double r = (j + 0.5) * h;
    g.nodes[j] = r;
    g.weights[j] = area * std::pow(r, d - 1) * h;
  }
  return g;
}

RadialGrid default_grid(const PolaronModel& model, const ModelConstants& consts, int n, double widths) {
  const double width = 1.0 / std::sqrt(model.m * consts.omega_at(model.alpha));
  return RadialGrid::uniform(model.d, widths * width, n);
}

namespace {

// Discretized Pekar functional on a fixed radial grid: a symmetric tridiagonal
// kinetic form plus the convolution potential evaluated through ρ on a
// composite Gauss–Legendre momentum grid.
class PekarOperator {
 public:
  PekarOperator(const PolaronModel& model, const RadialGrid& grid, const QuadratureSpec& quad)
      : model_(model), grid_(grid) {
    const int d = model.d;
    const int n = grid.n;
    const double h = grid.spacing();
    const double area = sphere_area(d);
    coupling_.assign(n, 0.0);
    for (int j = 0; j < n; ++j) {
      const double r_half = (j + 1) * h;
      coupling_[j] = area * std::pow(r_half, d - 1) / (2.0 * model.m * h);
    }

    const double k_max = model.cutoff(quad);
    const int panels = std::max(32, static_cast<int>(std::ceil(k_max * grid.r_max / std::numbers::pi)));
    const Rule rule = composite_gauss_legendre(panels, 16, 0.0, k_max);
    k_ = rule.nodes;
    k_weights_ = rule.weights;
    const std::size_t nk = k_.size();
    fk_.resize(nk);
    for (std::size_t i = 0; i < nk; ++i) {
      const double vk = model.v(k_[i]);
      fk_[i] = area * k_weights_[i] * std::pow(k_[i], d - 1) * vk * vk / model.eps(k_[i]);
    }
    kernel_.resize(nk * static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < nk; ++i) {
      for (int j = 0; j < n; ++j) kernel_[i * n + j] = special::cos_kernel(d, k_[i] * grid.nodes[j]);
    }
  }

  const std::vector<double>& k() const { return k_; }
  const std::vector<double>& k_weights() const { return k_weights_; }

  void normalize(std::vector<double>& psi) const {
    double norm = 0.0;
    for (int j = 0; j < grid_.n; ++j) norm += grid_.weights[j] * psi[j] * psi[j];
    if (!(norm > 0.0)) throw PolaronError(ErrorCode::InvalidArgument, "pekar: ψ has zero norm");
    const double s = 1.0 / std::sqrt(norm);
    for (double& x : psi) x *= s;
  }

  std::vector<double> rho(const std::vector<double>& psi) const {
    const int n = grid_.n;
    std::vector<double> density(n);
    for (int j = 0; j < n; ++j) density[j] = grid_.weights[j] * psi[j] * psi[j];
    std::vector<double> out(k_.size());
    for (std::size_t i = 0; i < k_.size(); ++i) {
      const double* row = &kernel_[i * n];
      out[i] = std::inner_product(density.begin(), density.end(), row, 0.0);
    }
    return out;
  }

  double kinetic(const std::vector<double>& psi) const {
    double t = 0.0;
    const int n = grid_.n;
    for (int j = 0; j < n; ++j) {
      const double next = j + 1 < n ? psi[j + 1] : 0.0;
      t += coupling_[j] * (next - psi[j]) * (next - psi[j]);
    }
    return t;
  }

  double potential(const std::vector<double>& rho) const {
    double s = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) s += fk_[i] * rho[i] * rho[i];
    return -model_.alpha * s;
  }

  PekarEnergy energy(std::vector<double> psi) const {
    normalize(psi);
    return {kinetic(psi), potential(rho(psi))};
  }

  std::vector<double> mean_field(const std::vector<double>& rho) const {
    const int n = grid_.n;
    std::vector<double> v(n, 0.0);
    for (std::size_t i = 0; i < rho.size(); ++i) {
      const double c = -2.0 * model_.alpha * fk_[i] * rho[i];
      const double* row = &kernel_[i * n];
      for (int j = 0; j < n; ++j) v[j] += c * row[j];
    }
    return v;
  }

  // Lowest eigenvector of -Δ/2m + V in the grid inner product, normalized and positive.
  std::vector<double> ground_state(const std::vector<double>& potential, const std::vector<double>& guess) const {
    const int n = grid_.n;
    std::vector<double> diag(n);
    std::vector<double> off(n > 0 ? n - 1 : 0);
    for (int j = 0; j < n; ++j) {
      const double left = j > 0 ? coupling_[j - 1] : 0.0;
      diag[j] = (left + coupling_[j]) / grid_.weights[j] + potential[j];
      if (j + 1 < n) off[j] = -coupling_[j] / std::sqrt(grid_.weights[j] * grid_.weights[j + 1]);
    }
    auto count_below = [&](double x) {
      int count = 0;
      double q = diag[0] - x;
      if (q < 0.0) ++count;
      for (int j = 1; j < n; ++j) {
        const double denom = q != 0.0 ? q : 1e-300;
        q = diag[j] - x - off[j - 1] * off[j - 1] / denom;
        if (q < 0.0) ++count;
      }
      return count;
    };
    double lo = diag[0];
    double hi = diag[0];
    for (int j = 0; j < n; ++j) {
      const double radius = (j > 0 ? std::abs(off[j - 1]) : 0.0) + (j + 1 < n ? std::abs(off[j]) : 0.0);
      lo = std::min(lo, diag[j] - radius);
      hi = std::max(hi, diag[j] + radius);
    }
    const double scale = std::max(std::abs(lo), std::abs(hi));
    for (int it = 0; it < 200 && hi - lo > 4e-16 * scale; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (count_below(mid) >= 1) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    // Shift strictly below the lowest eigenvalue so the factorization stays positive definite.
    const double sigma = lo - 1e-13 * scale;
    std::vector<double> x(n);
    for (int j = 0; j < n; ++j) x[j] = guess[j] * std::sqrt(grid_.weights[j]);
    std::vector<double> c(n);
    std::vector<double> dd(n);
    for (int sweep = 0; sweep < 3; ++sweep) {
      // Thomas algorithm on (T - σ) y = x.
      dd[0] = diag[0] - sigma;
      c[0] = x[0];
      for (int j = 1; j < n; ++j) {
        const double l = off[j - 1] / dd[j - 1];
        dd[j] = diag[j] - sigma - l * off[j - 1];
        c[j] = x[j] - l * c[j - 1];
      }
      x[n - 1] = c[n - 1] / dd[n - 1];
      for (int j = n - 2; j >= 0; --j) x[j] = (c[j] - off[j] * x[j + 1]) / dd[j];
      const double norm = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
      for (double& xi : x) xi /= norm;
    }
    const double sum = std::accumulate(x.begin(), x.end(), 0.0);
    std::vector<double> psi(n);
    for (int j = 0; j < n; ++j) psi[j] = (sum < 0.0 ? -x[j] : x[j]) / std::sqrt(grid_.weights[j]);
    return psi;
  }

  double distance(const std::vector<double>& a, const std::vector<double>& b) const {
    double s = 0.0;
    for (int j = 0; j < grid_.n; ++j) s += grid_.weights[j] * (a[j] - b[j]) * (a[j] - b[j]);
    return std::sqrt(s);
  }

 private:
  const PolaronModel& model_;
  const RadialGrid& grid_;
  std::vector<double> coupling_;
  std::vector<double> k_;
  std::vector<double> k_weights_;
  std::vector<double> fk_;
  std::vector<double> kernel_;
};

double boundary_mass(const RadialGrid& grid, const std::vector<double>& psi) {
  double s = 0.0;
  for (int j = grid.n - grid.n / 10; j < grid.n; ++j) s += grid.weights[j] * psi[j] * psi[j];
  return s;
}

// Four-point Lagrange interpolation of a radial grid function, extended evenly
// through r = 0 and by zero beyond r_max.
double sample_even(const RadialGrid& grid, const std::vector<double>& f, double r) {
  r = std::abs(r);
  if (r >= grid.r_max) return 0.0;
  const double h = grid.spacing();
  auto at = [&](int j) {
    if (j < 0) j = -j - 1;
    return j < grid.n ? f[j] : 0.0;
  };
  const double s = r / h - 0.5;
  const int j0 = static_cast<int>(std::floor(s));
  const double t = s - j0;
  const double fm = at(j0 - 1);
  const double f0 = at(j0);
  const double f1 = at(j0 + 1);
  const double f2 = at(j0 + 2);
  return -t * (t - 1.0) * (t - 2.0) / 6.0 * fm + (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0 * f0 -
         (t + 1.0) * t * (t - 2.0) / 2.0 * f1 + (t + 1.0) * t * (t - 1.0) / 6.0 * f2;
}

void fill_momentum_data(PekarSolution& sol, const PolaronModel& model, const PekarOperator& op) {
  sol.p_nodes = op.k();
  sol.p_weights = op.k_weights();
  sol.rho = op.rho(sol.psi);
  sol.field.resize(sol.p_nodes.size());
  const double sa = std::sqrt(model.alpha);
  for (std::size_t i = 0; i < sol.p_nodes.size(); ++i) {
    const double p = sol.p_nodes[i];
    sol.field[i] = -sa * sol.rho[i] * model.v(p) / model.eps(p);
  }
}

}  // namespace

PekarEnergy pekar_energy(const PolaronModel& model, const RadialGrid& grid, const std::vector<double>& psi,
                         const QuadratureSpec& quad) {
  if (static_cast<int>(psi.size()) != grid.n) {
    throw PolaronError(ErrorCode::InvalidArgument, "pekar_energy: ψ size does not match the grid");
  }
  const PekarOperator op(model, grid, quad);
  return op.energy(psi);
}

PekarSolution minimize_pekar(const PolaronModel& model, const RadialGrid& grid, const SolverSpec& solver,
                             const QuadratureSpec& quad) {
  const ModelConstants consts = compute_constants(model, quad);
  const double mw = model.m * consts.omega;
  std::vector<double> initial(grid.n);
  for (int j = 0; j < grid.n; ++j) initial[j] = std::exp(-0.5 * mw * grid.nodes[j] * grid.nodes[j]);
  return minimize_pekar(model, grid, std::move(initial), solver, quad);
}

PekarSolution minimize_pekar(const PolaronModel& model, const RadialGrid& grid, std::vector<double> psi,
                             const SolverSpec& solver, const QuadratureSpec& quad) {
  if (grid.d != model.d) throw PolaronError(ErrorCode::InvalidArgument, "minimize_pekar: grid dimension mismatch");
  if (static_cast<int>(psi.size()) != grid.n) {
    throw PolaronError(ErrorCode::InvalidArgument, "minimize_pekar: initial ψ size does not match the grid");
  }
  const ModelConstants consts = compute_constants(model, quad);
  const double width = 1.0 / std::sqrt(model.m * consts.omega);
  if (grid.spacing() > width / solver.nodes_per_width) {
    std::ostringstream os;
    os << "grid spacing " << grid.spacing() << " exceeds 1/sqrt(m omega)/" << solver.nodes_per_width << " = "
       << width / solver.nodes_per_width;
    throw PolaronError(ErrorCode::GridTooCoarse, os.str());
  }

  const PekarOperator op(model, grid, quad);
  op.normalize(psi);
  std::vector<double> rho = op.rho(psi);
  double energy = op.kinetic(psi) + op.potential(rho);

  PekarSolution sol;
  sol.grid = grid;
  sol.energy_history.push_back(energy);
  double beta = solver.mixing;
  bool converged = false;
  int iter = 0;
  double defect = 0.0;
  for (; iter < solver.max_iter; ++iter) {
    const std::vector<double> fresh = op.ground_state(op.mean_field(rho), psi);
    defect = op.distance(fresh, psi);

    std::vector<double> next(grid.n);
    double next_energy = 0.0;
    std::vector<double> next_rho;
    bool accepted = false;
    for (int halving = 0; halving < 40; ++halving) {
      for (int j = 0; j < grid.n; ++j) next[j] = (1.0 - beta) * psi[j] + beta * fresh[j];
      op.normalize(next);
      next_rho = op.rho(next);
      next_energy = op.kinetic(next) + op.potential(next_rho);
      if (next_energy <= energy + 1e-14 * std::abs(energy)) {
        accepted = true;
        break;
      }
      beta *= 0.5;
    }
    if (!accepted) {
      std::ostringstream os;
      os << "SCF step raised the energy at iteration " << iter << " even after backtracking (E = " << energy << ")";
      throw PolaronError(ErrorCode::EnergyIncrease, os.str());
    }
    const double change = std::abs(next_energy - energy);
    psi = std::move(next);
    rho = std::move(next_rho);
    energy = next_energy;
    sol.energy_history.push_back(energy);
    beta = std::min(solver.mixing, 2.0 * beta);
    if (change <= solver.energy_tol * std::abs(energy) && defect <= solver.defect_tol) {
      converged = true;
      ++iter;
      break;
    }
  }

  sol.boundary_mass = boundary_mass(grid, psi);
  if (!converged) {
    std::ostringstream os;
    os << "SCF did not converge in " << solver.max_iter << " iterations (defect " << defect
       << ", boundary mass " << sol.boundary_mass << ")";
    throw PolaronError(ErrorCode::NoConvergence, os.str());
  }
  if (sol.boundary_mass > solver.boundary_mass_tol) {
    std::ostringstream os;
    os << "boundary mass " << sol.boundary_mass << ": minimizer reaches the outer tenth of the grid (r_max = " << grid.r_max
       << ")";
    throw PolaronError(ErrorCode::NoConvergence, os.str());
  }
  sol.psi = std::move(psi);
  sol.kinetic = op.kinetic(sol.psi);
  sol.potential = op.potential(rho);
  sol.energy = sol.kinetic + sol.potential;
  sol.iterations = iter;
  sol.residual = defect;
  fill_momentum_data(sol, model, op);
  sol.m_pek_alpha = pekar_mass(sol, model, quad);
  return sol;
}

PekarSolution solve_pekar(const PolaronModel& model, const ModelConstants& consts, int n, const SolverSpec& solver,
                          const QuadratureSpec& quad) {
  double widths = 16.0;
  for (int attempt = 0;; ++attempt) {
    const RadialGrid grid = default_grid(model, consts, n, widths);
    try {
      return minimize_pekar(model, grid, solver, quad);
    } catch (const PolaronError& e) {
      const bool escaping = e.code() == ErrorCode::NoConvergence &&
                            std::string(e.what()).find("boundary") != std::string::npos;
      if (!escaping || attempt >= 3) throw;
      widths *= 2.0;
      n *= 2;
    }
  }
}

double pekar_mass(const PekarSolution& sol, const PolaronModel& model, const QuadratureSpec&) {
  const int d = model.d;
  const double area = sphere_area(d);
  double s = 0.0;
  for (std::size_t i = 0; i < sol.p_nodes.size(); ++i) {
    const double p = sol.p_nodes[i];
    const double vp = model.v(p);
    const double e = model.eps(p);
    s += sol.p_weights[i] * std::pow(p, d + 1) * vp * vp * sol.rho[i] * sol.rho[i] / (e * e * e);
  }
  return 2.0 * model.alpha / d * area * s;
}

double pekar_mass_from_field(const PekarSolution& sol, const PolaronModel& model) {
  const int d = model.d;
  const double area = sphere_area(d);
  double s = 0.0;
  for (std::size_t i = 0; i < sol.p_nodes.size(); ++i) {
    const double p = sol.p_nodes[i];
    s += sol.p_weights[i] * std::pow(p, d + 1) * sol.field[i] * sol.field[i] / model.eps(p);
  }
  return 2.0 / d * area * s;
}

namespace {

// ∬ a(x) K(x - y) a(y) for the radial density a = |ψ|² and a radial kernel K
// tabulated on [0, 2 r_max] and evaluated through a cubic B-spline.
double position_double_integral(const PekarSolution& sol, const PolaronModel& model,
                                const std::function<double(double)>& kernel, const QuadratureSpec& quad) {
  const RadialGrid& grid = sol.grid;
  std::vector<double> a;
  std::vector<double> r;
  double peak = 0.0;
  for (int j = 0; j < grid.n; ++j) peak = std::max(peak, grid.weights[j] * sol.psi[j] * sol.psi[j]);
  for (int j = 0; j < grid.n; ++j) {
    const double mass = grid.weights[j] * sol.psi[j] * sol.psi[j];
    if (mass > 1e-20 * peak) {
      a.push_back(mass);
      r.push_back(grid.nodes[j]);
    }
  }
  const double s_max = 2.0 * r.back();
  const int samples = std::max(513, static_cast<int>(std::ceil(20.0 * s_max / model.v.decay_scale())));
  const double ds = s_max / (samples - 1);
  std::vector<double> table(samples);
  for (int i = 0; i < samples; ++i) table[i] = kernel(i * ds);
  const boost::math::interpolators::cardinal_cubic_b_spline<double> spline(table.begin(), table.end(), 0.0, ds, 0.0);

  const Rule ang = angular_rule(model.d, quad.angular_points);
  const double total = std::accumulate(ang.weights.begin(), ang.weights.end(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i; j < a.size(); ++j) {
      double avg = 0.0;
      for (std::size_t t = 0; t < ang.size(); ++t) {
        const double s2 = r[i] * r[i] + r[j] * r[j] - 2.0 * r[i] * r[j] * ang.nodes[t];
        avg += ang.weights[t] * spline(std::sqrt(std::max(0.0, s2)));
      }
      sum += (i == j ? 1.0 : 2.0) * a[i] * a[j] * avg / total;
    }
  }
  return sum;
}

}  // namespace

double pekar_mass_position(const PekarSolution& sol, const PolaronModel& model, const QuadratureSpec& quad) {
  const double integral =
      position_double_integral(sol, model, [&](double s) { return kernel_R(model, s, quad).value; }, quad);
  return 2.0 * model.alpha / model.d * integral;
}

double pekar_potential_position(const PekarSolution& sol, const PolaronModel& model, const QuadratureSpec& quad) {
  const double integral =
      position_double_integral(sol, model, [&](double s) { return kernel_g(model, s, quad).value; }, quad);
  return -model.alpha * integral;
}

double virial_derivative(const PekarSolution& sol, const PolaronModel& model, const QuadratureSpec& quad) {
  const PekarOperator op(model, sol.grid, quad);
  const double delta = 1e-4;
  auto energy_at = [&](double lambda) {
    std::vector<double> scaled(sol.grid.n);
    for (int j = 0; j < sol.grid.n; ++j) scaled[j] = sample_even(sol.grid, sol.psi, lambda * sol.grid.nodes[j]);
    return op.energy(scaled).total();
  };
  return (energy_at(1.0 + delta) - energy_at(1.0 - delta)) / (2.0 * delta);
}

namespace {

// Σ over the stored momentum grid and the angular rule of F(p, t) p^{d-1}.
template <typename F>
double momentum_angular_sum(const PolaronModel& model, const PekarSolution& sol, const QuadratureSpec& quad, F f) {
  const Rule ang = angular_rule(model.d, quad.angular_points);
  double s = 0.0;
  for (std::size_t i = 0; i < sol.p_nodes.size(); ++i) {
    const double p = sol.p_nodes[i];
    const double vp = model.v(p);
    const double weight = sol.p_weights[i] * std::pow(p, model.d - 1) * vp * vp * sol.rho[i] * sol.rho[i];
    if (weight == 0.0) continue;
    const double e = model.eps(p);
    double inner = 0.0;
    for (std::size_t t = 0; t < ang.size(); ++t) inner += ang.weights[t] * f(p, ang.nodes[t], e);
    s += weight * inner;
  }
  return s;
}

}  // namespace

double velocity_rhs(const PolaronModel& model, const PekarSolution& sol, double u, const QuadratureSpec& quad) {
  const double field = momentum_angular_sum(model, sol, quad, [u](double p, double t, double e) {
    const double den = e - u * p * t;
    if (!(den > 0.0)) throw PolaronError(ErrorCode::VelocityTooLarge, "ε(p) - u·p vanishes on the momentum grid");
    return p * t / (den * den);
  });
  return model.m * u + model.alpha * field;
}

SemiclassicalState solve_velocity(const PolaronModel& model, const PekarSolution& sol, double P,
                                  const ModelConstants& consts, const QuadratureSpec& quad) {
  SemiclassicalState state;
  state.P = P;
  state.linearized_u = P / (model.m + sol.m_pek_alpha);
  if (P == 0.0) {
    state.energy = sol.energy;
    return state;
  }
  if (!(consts.crit_velocity > 0.0)) {
    throw PolaronError(ErrorCode::InvalidArgument, "solve_velocity needs a dispersion of superfluid type");
  }
  const double target = std::abs(P);
  double lo = 0.0;
  double hi = 0.99 * consts.crit_velocity;
  const double rhs_hi = velocity_rhs(model, sol, hi, quad);
  if (rhs_hi < target) {
    std::ostringstream os;
    os << "velocity equation has no root: RHS(u) < |P| for all u in [0, 0.99c); RHS(0.99c) = " << rhs_hi
       << ", so only |P| < " << rhs_hi << " is reachable";
    throw PolaronError(ErrorCode::NoRoot, os.str());
  }
  double u = 0.0;
  double residual = 0.0;
  for (int it = 0; it < 200; ++it) {
    u = 0.5 * (lo + hi);
    residual = velocity_rhs(model, sol, u, quad) - target;
    if (std::abs(residual) <= 1e-8 * target) break;
    if (residual < 0.0) {
      lo = u;
    } else {
      hi = u;
    }
  }
  state.u = P > 0.0 ? u : -u;
  state.residual = residual;
  state.energy = semiclassical_energy_at(model, sol, state.u, P, quad);
  return state;
}

double semiclassical_energy_at(const PolaronModel& model, const PekarSolution& sol, double u, double P,
                               const QuadratureSpec& quad) {
  const double field = momentum_angular_sum(model, sol, quad, [u](double p, double t, double e) {
    const double den = e - u * p * t;
    return (2.0 * u * p * t - e) / (den * den);
  });
  const double rhs = velocity_rhs(model, sol, u, quad);
  return sol.kinetic + 0.5 * model.m * u * u + model.alpha * field + u * (P - rhs);
}

double semiclassical_energy(const PolaronModel& model, const PekarSolution& sol, double P,
                            const ModelConstants& consts, const QuadratureSpec& quad) {
  return solve_velocity(model, sol, P, consts, quad).energy;
}

}  // namespace polaron
