#include "polaron/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "polaron/errors.hpp"
#include "polaron/special.hpp"

namespace polaron {

void QuadratureSpec::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
    throw PolaronError(ErrorCode::InvalidArgument, "quadrature tolerances must be positive");
  }
  if (radial_points < 8) throw PolaronError(ErrorCode::InvalidArgument, "radial_points must be >= 8");
  if (!(r_max_multiplier > 0.0)) throw PolaronError(ErrorCode::InvalidArgument, "r_max_multiplier must be positive");
  if (angular_points < 2) throw PolaronError(ErrorCode::InvalidArgument, "angular_points must be >= 2");
}

PolaronModel::PolaronModel(int d_, double m_, double alpha_, RadialProfile v_, RadialProfile eps_)
    : d(d_), m(m_), alpha(alpha_), v(std::move(v_)), eps(std::move(eps_)) {
  if (d < 1 || d > 3) throw PolaronError(ErrorCode::InvalidModel, "dimension must be 1, 2 or 3");
  if (!(m > 0.0)) throw PolaronError(ErrorCode::InvalidModel, "particle mass must be positive");
  if (!(alpha > 0.0)) throw PolaronError(ErrorCode::InvalidModel, "coupling must be positive");
  if (v.is_zero()) throw PolaronError(ErrorCode::InvalidModel, "form factor vanishes identically");
}

PolaronModel PolaronModel::with_alpha(double a) const {
  PolaronModel copy = *this;
  if (!(a > 0.0)) throw PolaronError(ErrorCode::InvalidModel, "coupling must be positive");
  copy.alpha = a;
  return copy;
}

double PolaronModel::cutoff(const QuadratureSpec& quad) const {
  return std::min({quad.r_max_multiplier * v.decay_scale(), v.support_limit(), eps.support_limit()});
}

double ModelConstants::omega_at(double a) const { return std::sqrt(2.0 * a / (d * m) * grad_h_sq); }

double ModelConstants::thm1_gap() const {
  return 0.5 * d * grad_eta_sq / grad_h_sq + d / (8.0 * m) * lap_h_sq / grad_h_sq;
}

std::vector<std::pair<std::string, double>> ModelConstants::named_values() const {
  return {{"h_sq", h_sq},
          {"grad_h_sq", grad_h_sq},
          {"lap_h_sq", lap_h_sq},
          {"grad_eta_sq", grad_eta_sq},
          {"quartic_over_eps", quartic_over_eps},
          {"omega", omega},
          {"m_pek", m_pek},
          {"lambda_c", lambda_c},
          {"theta_c", theta_c},
          {"mu_c", mu_c},
          {"j0", j0},
          {"alpha_m", alpha_m},
          {"gap", gap},
          {"crit_velocity", crit_velocity},
          {"eta_ratio", eta_ratio()}};
}

namespace {

Estimate integrate_fixed(const std::function<double(double)>& f, double a, double b, int points) {
  const int per_panel = 16;
  const int panels = std::max(1, points / per_panel);
  auto apply = [&](const Rule& rule) {
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) s += rule.weights[i] * f(rule.nodes[i]);
    return s;
  };
  const double fine = apply(composite_gauss_legendre(panels, per_panel, a, b));
  const double coarse = apply(composite_gauss_legendre(panels, per_panel / 2, a, b));
  return {fine, std::abs(fine - coarse)};
}

// Panel edges on [a, b]; knots of tabulated profiles become edges so each
// panel sees a smooth piece of the interpolant.
std::vector<double> panel_edges(const PolaronModel& model, double a, double b, double panel) {
  std::vector<double> edges;
  const int n = std::max(1, static_cast<int>(std::ceil((b - a) / panel)));
  for (int i = 0; i <= n; ++i) edges.push_back(a + (b - a) * i / n);
  for (const RadialProfile* p : {&model.v, &model.eps}) {
    for (const auto& knot : p->table()) {
      if (knot.first > a && knot.first < b) edges.push_back(knot.first);
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

Estimate integrate_core(const PolaronModel& model, const std::function<double(double)>& f, double a, double b,
                        double panel, const QuadratureSpec& quad) {
  if (quad.radial_rule == RadialRule::FixedGaussLegendre) return integrate_fixed(f, a, b, quad.radial_points);
  return integrate_breakpoints(f, panel_edges(model, a, b, panel), quad.rel_tol, quad.abs_tol);
}

}  // namespace

Estimate radial_integral_weighted(const PolaronModel& model, int power, int eps_power,
                                  const std::function<double(double)>& weight, const QuadratureSpec& quad) {
  quad.validate();
  if (power < 0) throw PolaronError(ErrorCode::InvalidArgument, "radial_integral: power must be >= 0");
  const int d = model.d;
  const double area = sphere_area(d);
  auto integrand = [&](double r) {
    const double vr = model.v(r);
    const double er = model.eps(r);
    return std::pow(r, power + d - 1) * vr * vr * std::pow(er, -eps_power) * weight(r);
  };

  const double decay = model.v.decay_scale();
  const double support = std::min(model.v.support_limit(), model.eps.support_limit());
  const double r_max = model.cutoff(quad);
  const double r0 = std::min(1e-3 * decay, 0.5 * r_max);

  Estimate core = integrate_core(model, integrand, r0, r_max, decay, quad);

  // Infrared: dyadic shells towards 0 must shrink.
  std::vector<double> shells;
  for (int j = 0; j < 4; ++j) {
    const double hi = r0 / std::pow(2.0, j);
    shells.push_back(integrate_adaptive(integrand, 0.5 * hi, hi, 1e-8, 1e-300).value);
  }
  const double scale = std::max(std::abs(core.value), quad.abs_tol);
  if (std::abs(shells[3]) > 0.97 * std::abs(shells[2]) && std::abs(shells[3]) > 1e-10 * scale) {
    std::ostringstream os;
    os << "integrand r^" << power << "|v|^2 eps^-" << eps_power << " is not integrable at r -> 0";
    throw PolaronError(ErrorCode::DivergentIntegrand, os.str());
  }
  Estimate ir = integrate_adaptive(integrand, 0.0, r0, quad.rel_tol, quad.abs_tol, 30);

  // Ultraviolet: the contribution beyond r_max must decay.
  Estimate tail;
  if (r_max < support) {
    const double t1 = integrate_adaptive(integrand, r_max, std::min(2.0 * r_max, support), 1e-8, 1e-300).value;
    const double t2 = 2.0 * r_max < support
                          ? integrate_adaptive(integrand, 2.0 * r_max, std::min(4.0 * r_max, support), 1e-8, 1e-300).value
                          : 0.0;
    const double target = std::max(quad.abs_tol, quad.rel_tol * scale);
    if (std::abs(t1) > target) {
      if (std::abs(t2) >= 0.97 * std::abs(t1)) {
        std::ostringstream os;
        os << "integrand r^" << power << "|v|^2 eps^-" << eps_power << " does not decay beyond r = " << r_max
           << " (shell integrals " << t1 << ", " << t2 << ")";
        throw PolaronError(ErrorCode::DivergentIntegrand, os.str());
      }
      const double q = std::abs(t2 / t1);
      const double rest = std::abs(t2) * q / (1.0 - q);
      tail.value = t1 + t2;
      tail.error = rest;
    } else {
      tail.error = std::abs(t1) + std::abs(t2);
    }
  }

  Estimate out;
  out.value = area * (core.value + ir.value + tail.value);
  out.error = area * (core.error + ir.error + tail.error);
  return out;
}

Estimate radial_integral(const PolaronModel& model, int power, int eps_power, const QuadratureSpec& quad) {
  return radial_integral_weighted(model, power, eps_power, [](double) { return 1.0; }, quad);
}

SampledInfimum sampled_gap(const PolaronModel& model) {
  const double decay = model.v.decay_scale();
  const double lo = 1e-6 * decay;
  const double hi = std::min(1e3 * decay, model.eps.support_limit());
  const int n = 4096;
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i) grid[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));

  SampledInfimum out{model.eps(0.0), 0.0, n + 1, lo, hi, {}};
  int best = -1;
  for (int i = 0; i < n; ++i) {
    const double e = model.eps(grid[i]);
    if (e < out.value) {
      out.value = e;
      out.argmin = grid[i];
      best = i;
    }
  }
  if (best >= 0) {
    const double a = best > 0 ? grid[best - 1] : 0.0;
    const double b = best + 1 < n ? grid[best + 1] : grid[best];
    const double x = golden_section_max([&](double r) { return -model.eps(r); }, a, b, 1e-12 * (b - a + 1e-300));
    const double e = model.eps(x);
    if (e < out.value) {
      out.value = e;
      out.argmin = x;
    }
    if (best == n - 1) out.note = "minimum attained at the grid end";
  }
  return out;
}

SampledInfimum sampled_critical_velocity(const PolaronModel& model) {
  const double decay = model.v.decay_scale();
  const double lo = 1e-6 * decay;
  const double hi = std::min(1e3 * decay, model.eps.support_limit());
  const int n = 4096;
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i) grid[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  auto ratio = [&](double r) { return model.eps(r) / r; };

  SampledInfimum out{std::numeric_limits<double>::infinity(), 0.0, n, lo, hi, {}};
  int best = 0;
  for (int i = 0; i < n; ++i) {
    const double c = ratio(grid[i]);
    if (c < out.value) {
      out.value = c;
      out.argmin = grid[i];
      best = i;
    }
  }
  if (best == n - 1) {
    // Linear growth keeps ε(r)/r bounded away from 0; slower growth drives it down.
    const double decade = ratio(hi / 10.0);
    if (out.value < 0.9 * decade) {
      out.note = "eps(r)/r still decreasing at the grid end; treated as 0";
      out.value = 0.0;
    } else {
      out.note = "infimum approached at the grid end";
    }
    return out;
  }
  const double a = best > 0 ? grid[best - 1] : grid[0];
  const double b = grid[best + 1];
  const double x = golden_section_max([&](double r) { return -ratio(r); }, a, b, 1e-12 * (b - a));
  if (ratio(x) < out.value) {
    out.value = ratio(x);
    out.argmin = x;
  }
  return out;
}

ModelConstants compute_constants(const PolaronModel& model, const QuadratureSpec& quad) {
  ModelConstants c;
  c.d = model.d;
  c.m = model.m;
  c.alpha = model.alpha;
  const double d = model.d;

  auto take = [&](const char* name, int power, int eps_power) {
    const Estimate e = radial_integral(model, power, eps_power, quad);
    c.err_estimates[name] = e.error;
    return e;
  };

  c.h_sq = take("h_sq", 0, 1).value;
  c.grad_h_sq = take("grad_h_sq", 2, 1).value;
  c.lap_h_sq = take("lap_h_sq", 4, 1).value;
  c.grad_eta_sq = take("grad_eta_sq", 2, 0).value;
  c.quartic_over_eps = c.lap_h_sq;
  c.err_estimates["quartic_over_eps"] = c.err_estimates["lap_h_sq"];

  const Estimate k2e3 = take("m_pek", 2, 3);
  c.m_pek = 2.0 / d * k2e3.value;
  c.err_estimates["m_pek"] = 2.0 / d * k2e3.error;

  const Estimate k2e2 = radial_integral(model, 2, 2, quad);
  c.lambda_c = k2e2.value / (2.0 * d);
  c.err_estimates["lambda_c"] = k2e2.error / (2.0 * d);

  const Estimate k4e2 = radial_integral(model, 4, 2, quad);
  c.theta_c = k4e2.value / (24.0 * d);
  c.err_estimates["theta_c"] = k4e2.error / (24.0 * d);

  const Estimate k4e4 = radial_integral(model, 4, 4, quad);
  c.mu_c = k4e4.value / (2.0 * d * c.m_pek * c.m_pek);
  c.err_estimates["mu_c"] = k4e4.error / (2.0 * d * c.m_pek * c.m_pek);

  const Estimate e2 = radial_integral(model, 0, 2, quad);
  c.j0 = e2.value;
  c.err_estimates["j0"] = e2.error;

  c.omega = c.omega_at(model.alpha);
  c.err_estimates["omega"] = 0.5 * c.omega * c.err_estimates["grad_h_sq"] / c.grad_h_sq;

  const double ratio = (4.0 * model.m * c.grad_eta_sq + c.lap_h_sq) / std::pow(c.grad_h_sq, 1.5);
  c.alpha_m = d / (8.0 * model.m) * ratio * ratio;
  c.err_estimates["alpha_m"] =
      c.alpha_m * (2.0 * (4.0 * model.m * c.err_estimates["grad_eta_sq"] + c.err_estimates["lap_h_sq"]) /
                       (4.0 * model.m * c.grad_eta_sq + c.lap_h_sq) +
                   3.0 * c.err_estimates["grad_h_sq"] / c.grad_h_sq);

  const SampledInfimum gap = sampled_gap(model);
  c.gap = gap.value;
  c.err_estimates["gap"] = 0.0;
  const SampledInfimum crit = sampled_critical_velocity(model);
  c.crit_velocity = crit.value;
  c.err_estimates["crit_velocity"] = 0.0;
  c.err_estimates["eta_ratio"] =
      c.eta_ratio() * (c.err_estimates["grad_eta_sq"] / c.grad_eta_sq + c.err_estimates["grad_h_sq"] / c.grad_h_sq);
  return c;
}

bool RegularityReport::integrals_finite() const {
  return std::all_of(integrals.begin(), integrals.end(), [](const IntegralVerdict& v) { return v.finite; });
}

std::string RegularityReport::failure_summary() const {
  std::ostringstream os;
  for (const auto& v : integrals) {
    if (!v.finite) os << v.name << " divergent (" << v.detail << "); ";
  }
  if (!massive) os << "dispersion not massive (inf eps = " << gap.value << "); ";
  return os.str();
}

RegularityReport validate_regularity(const PolaronModel& model, const QuadratureSpec& quad) {
  RegularityReport report;
  struct Spec {
    const char* name;
    int power;
    int eps_power;
  };
  const Spec specs[] = {{"h_sq", 0, 1},
                        {"grad_h_sq", 2, 1},
                        {"lap_h_sq", 4, 1},
                        {"grad_eta_sq", 2, 0},
                        {"quartic_over_eps", 4, 1}};
  for (const auto& s : specs) {
    IntegralVerdict verdict;
    verdict.name = s.name;
    try {
      const Estimate e = radial_integral(model, s.power, s.eps_power, quad);
      verdict.value = e.value;
      verdict.error = e.error;
      verdict.finite = std::isfinite(e.value);
    } catch (const PolaronError& err) {
      verdict.finite = false;
      verdict.detail = err.what();
    }
    report.integrals.push_back(verdict);
  }

  report.gap = sampled_gap(model);
  report.massive = report.gap.value > 0.0;
  report.crit_velocity = sampled_critical_velocity(model);
  report.superfluid = report.crit_velocity.value > 0.0;

  // Subadditivity over |k1 + k2| ∈ [|r1 - r2|, r1 + r2], sampled.
  const double decay = model.v.decay_scale();
  const double lo = 1e-3 * decay;
  const double hi = std::min(1e2 * decay, model.eps.support_limit() / 2.0);
  const int n = 64;
  int violations = 0;
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r1 = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    for (int j = i; j < n; ++j) {
      const double r2 = lo * std::pow(hi / lo, static_cast<double>(j) / (n - 1));
      const double bound = model.eps(r1) + model.eps(r2);
      for (int s = 0; s <= 4; ++s) {
        const double k = std::abs(r1 - r2) + (2.0 * std::min(r1, r2)) * s / 4.0;
        const double excess = model.eps(k) - bound;
        if (excess > 1e-12 * std::abs(bound)) {
          ++violations;
          worst = std::max(worst, excess);
        }
      }
      ++report.subadditivity_pairs;
    }
  }
  report.subadditive_sampled = violations == 0;
  std::ostringstream os;
  os << "sampled " << report.subadditivity_pairs << " radius pairs";
  if (violations > 0) os << "; " << violations << " violations, worst excess " << worst;
  report.subadditivity_detail = os.str();
  return report;
}

Estimate radial_fourier(int d, const std::function<double(double)>& f, double r, double k_max,
                        const QuadratureSpec& quad) {
  auto integrand = [&](double k) { return f(k) * std::pow(k, d - 1) * special::cos_kernel(d, k * r); };
  auto magnitude = [&](double k) { return std::abs(f(k)) * std::pow(k, d - 1); };
  const double area = sphere_area(d);
  const double panel0 = k_max / 12.0;
  const Estimate scale = integrate_panels(magnitude, 0.0, k_max, panel0, 1e-8, 1e-300);
  const double panel = r > 0.0 ? std::min(panel0, std::numbers::pi / r) : panel0;
  const Estimate e = integrate_panels(integrand, 0.0, k_max, panel, quad.rel_tol,
                                      std::max(quad.abs_tol, quad.rel_tol * scale.value));
  return {area * e.value, area * e.error};
}

Estimate kernel_g(const PolaronModel& model, double r, const QuadratureSpec& quad) {
  const double k_max = model.cutoff(quad);
  return radial_fourier(
      model.d,
      [&](double k) {
        const double vk = model.v(k);
        return vk * vk / model.eps(k);
      },
      r, k_max, quad);
}

Estimate kernel_R(const PolaronModel& model, double r, const QuadratureSpec& quad) {
  const double k_max = model.cutoff(quad);
  return radial_fourier(
      model.d,
      [&](double k) {
        const double vk = model.v(k);
        const double e = model.eps(k);
        return k * k * vk * vk / (e * e * e);
      },
      r, k_max, quad);
}

}  // namespace polaron
