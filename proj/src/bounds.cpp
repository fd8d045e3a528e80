#include "polaron/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "polaron/errors.hpp"

namespace polaron {

EnergyBound thm1_upper(const ModelConstants& consts, double alpha) {
  EnergyBound b;
  b.kind = BoundKind::Upper;
  b.target = BoundTarget::E0;
  const double leading = -alpha * consts.h_sq;
  const double harmonic = std::sqrt(consts.d * alpha / (2.0 * consts.m)) * std::sqrt(consts.grad_h_sq);
  b.value = leading + harmonic;
  b.components = {{"leading", leading}, {"harmonic", harmonic}};
  return b;
}

double thm1_lower_value(int d, double m, double alpha, double h_sq, double grad_h_sq, double lap_h_sq,
                        double grad_eta_sq) {
  const double q = 4.0 * m * grad_eta_sq + lap_h_sq;
  const double ratio = q / std::pow(grad_h_sq, 1.5);
  const double alpha_m = d / (8.0 * m) * ratio * ratio;
  if (alpha >= alpha_m) {
    return -alpha * h_sq + std::sqrt(d * alpha / (2.0 * m)) * std::sqrt(grad_h_sq) -
           0.5 * d * grad_eta_sq / grad_h_sq - d / (8.0 * m) * lap_h_sq / grad_h_sq;
  }
  return -alpha * h_sq + alpha * grad_h_sq * grad_h_sq / q;
}

EnergyBound thm1_lower(const ModelConstants& consts, double alpha) {
  EnergyBound b;
  b.kind = BoundKind::Lower;
  b.target = BoundTarget::E0;
  const double leading = -alpha * consts.h_sq;
  b.value = thm1_lower_value(consts.d, consts.m, alpha, consts.h_sq, consts.grad_h_sq, consts.lap_h_sq,
                             consts.grad_eta_sq);
  if (alpha >= consts.alpha_m) {
    const double harmonic = std::sqrt(consts.d * alpha / (2.0 * consts.m)) * std::sqrt(consts.grad_h_sq);
    b.components = {{"leading", leading},
                    {"harmonic", harmonic},
                    {"eta_term", -0.5 * consts.d * consts.eta_ratio()},
                    {"laplacian_term", -consts.d / (8.0 * consts.m) * consts.lap_h_sq / consts.grad_h_sq}};
    b.reason = "alpha >= alpha_m";
  } else {
    b.components = {{"leading", leading}, {"correction", b.value - leading}};
    b.reason = "alpha < alpha_m";
  }
  return b;
}

VelocityShiftNorms hu_norms(const PolaronModel& model, const ModelConstants& consts, double u,
                            const QuadratureSpec& quad) {
  VelocityShiftNorms out;
  out.u = u;
  const double a = std::abs(u);
  if (a == 0.0) {
    out.h_u_sq = consts.h_sq;
    out.grad_h_u_sq = consts.grad_h_sq;
    out.lap_h_u_sq = consts.lap_h_sq;
    return out;
  }
  if (!(consts.crit_velocity > 0.0) || a >= 0.99 * consts.crit_velocity) {
    std::ostringstream os;
    os << "|u| = " << a << " must stay below 0.99 c = " << 0.99 * consts.crit_velocity;
    throw PolaronError(ErrorCode::VelocityTooLarge, os.str());
  }
  const Rule ang = angular_rule(model.d, quad.angular_points);
  const double area = sphere_area(model.d);
  // 1/(ε - u k t) = 1/ε + u k t/ε² + (u k t)²/(ε²(ε - u k t)); the odd term integrates to zero.
  auto weight = [&](double r) {
    const double e = model.eps(r);
    double s = 0.0;
    for (std::size_t i = 0; i < ang.size(); ++i) {
      const double x = a * r * ang.nodes[i];
      s += ang.weights[i] * (1.0 + x * x / (e * (e - x)));
    }
    return s / area;
  };
  const Estimate h = radial_integral_weighted(model, 0, 1, weight, quad);
  const Estimate g = radial_integral_weighted(model, 2, 1, weight, quad);
  const Estimate l = radial_integral_weighted(model, 4, 1, weight, quad);
  out.h_u_sq = h.value;
  out.grad_h_u_sq = g.value;
  out.lap_h_u_sq = l.value;
  out.err = h.error + g.error + l.error;
  return out;
}

double lambda_max(const ModelConstants& consts, double alpha, double u) {
  const double a = std::abs(u);
  const double c = consts.crit_velocity;
  const double kappa = a == 0.0 ? 0.0 : a * a / (c * (c - a));
  return 1.0 / (std::sqrt(1.0 + kappa) * 2.0 * consts.m * consts.omega_at(alpha));
}

double eP_lower_at(const PolaronModel& model, const ModelConstants& consts, double alpha, double P, double u,
                   const QuadratureSpec& quad) {
  const VelocityShiftNorms n = hu_norms(model, consts, u, quad);
  const double q = n.lap_h_u_sq + 4.0 * consts.m * consts.grad_eta_sq;
  const double lambda = std::clamp(n.grad_h_u_sq / q, 0.0, lambda_max(consts, alpha, u));
  return P * u - 0.5 * consts.m * u * u - alpha * n.h_u_sq +
         alpha * (2.0 * lambda * n.grad_h_u_sq - lambda * lambda * q);
}

EnergyBound eP_lower(const PolaronModel& model, const ModelConstants& consts, double alpha, double P,
                     const QuadratureSpec& quad) {
  if (!(consts.crit_velocity > 0.0)) {
    throw PolaronError(ErrorCode::InvalidArgument, "eP_lower needs a dispersion of superfluid type");
  }
  EnergyBound b;
  b.kind = BoundKind::Lower;
  b.target = BoundTarget::EP;
  b.P = P;
  const double p = std::abs(P);
  const double u_max = 0.99 * consts.crit_velocity;
  auto f = [&](double u) { return eP_lower_at(model, consts, alpha, p, u, quad); };

  const double u_pek = p / (alpha * consts.m_pek);
  double pek_value = -std::numeric_limits<double>::infinity();
  if (u_pek < u_max) pek_value = f(u_pek);

  double best_u = 0.0;
  double best = f(0.0);
  if (p > 0.0) {
    const int scan = 48;
    const double du = u_max / scan;
    int best_i = 0;
    for (int i = 1; i < scan; ++i) {
      const double value = f(i * du);
      if (value > best) {
        best = value;
        best_i = i;
      }
    }
    const double lo = std::max(0.0, (best_i - 1) * du);
    const double hi = std::min(u_max * (1.0 - 1e-12), (best_i + 1) * du);
    const double u_ref = golden_section_max(f, lo, hi, 1e-10 * u_max);
    const double refined = f(u_ref);
    if (refined > best) {
      best = refined;
      best_u = u_ref;
    } else {
      best_u = best_i * du;
    }
    if (pek_value > best) {
      best = pek_value;
      best_u = u_pek;
    }
  }
  b.value = best;
  b.components = {{"u_opt", best_u}, {"u_pek", u_pek}, {"value_at_u_pek", pek_value},
                  {"lambda_max", lambda_max(consts, alpha, best_u)}};
  if (best_u >= u_max * (1.0 - 1e-6)) {
    b.valid = false;
    b.reason = "optimal velocity reached the 0.99c edge";
  }
  if (!std::isfinite(b.value)) {
    throw PolaronError(ErrorCode::WindowViolation, "no admissible velocity gives a finite lower bound");
  }
  return b;
}

EnergyBound eP_upper_asymptotic(const ModelConstants& consts, double alpha, double P) {
  EnergyBound b;
  b.kind = BoundKind::Upper;
  b.target = BoundTarget::EP;
  b.P = P;
  const double leading = -alpha * consts.h_sq;
  const double harmonic = consts.d * consts.omega_at(alpha) / 2.0;
  const double kinetic = P * P / (2.0 * alpha * consts.m_pek);
  b.value = leading + harmonic + kinetic;
  b.components = {{"leading", leading}, {"harmonic", harmonic}, {"kinetic", kinetic}};
  b.reason = "asymptotic, remainder excluded";
  return b;
}

MomentumWindowReport mass_quotient_window(const PolaronModel& model, const ModelConstants& consts, double alpha,
                                          const std::vector<double>& P_grid, const WindowSources& sources,
                                          const QuadratureSpec& quad) {
  MomentumWindowReport report;
  report.alpha = alpha;
  report.m_pek = consts.m_pek;
  report.e0_lower = thm1_lower(consts, alpha).value;
  report.e0_upper = thm1_upper(consts, alpha).value;
  if (sources.e_pek) report.e0_upper = std::min(report.e0_upper, *sources.e_pek);
  if (sources.upper) report.e0_upper = std::min(report.e0_upper, sources.upper(0.0));

  for (double P : P_grid) {
    WindowEntry e;
    e.P = P;
    const double p = std::abs(P);
    e.ratio_sqrt = p / std::sqrt(alpha);
    e.ratio_alpha = p / alpha;
    e.in_window = e.ratio_sqrt >= sources.min_ratio_sqrt && e.ratio_alpha <= sources.max_ratio_alpha;
    e.lower = eP_lower(model, consts, alpha, p, quad);
    if (sources.upper) {
      e.upper.kind = BoundKind::Upper;
      e.upper.target = BoundTarget::EP;
      e.upper.P = P;
      e.upper.value = sources.upper(p);
      e.upper.reason = "trial state";
    } else {
      e.upper = eP_upper_asymptotic(consts, alpha, p);
    }
    const double num = 0.5 * P * P;
    const double den_lo = e.upper.value - report.e0_lower;
    const double den_hi = e.lower.value - report.e0_upper;
    e.M_lower = den_lo > 0.0 ? num / den_lo : 0.0;
    if (den_hi > 0.0) {
      e.M_upper = num / den_hi;
    } else {
      e.M_upper = std::numeric_limits<double>::infinity();
      e.degenerate = true;
    }
    std::ostringstream why;
    if (e.degenerate) why << "E(P)-E(0) bracket contains 0; ";
    if (!e.in_window) {
      why << "window violated (|P|/sqrt(alpha) = " << e.ratio_sqrt << ", |P|/alpha = " << e.ratio_alpha << "); ";
    }
    if (!e.lower.valid) why << e.lower.reason << "; ";
    e.bracket_ok = !e.degenerate && e.lower.valid;
    e.valid = e.bracket_ok && e.in_window;
    e.reason = why.str();
    report.entries.push_back(std::move(e));
  }
  return report;
}

MassCertificate meff_divergence_certificate(const ModelConstants& consts, double alpha) {
  MassCertificate cert;
  cert.alpha = alpha;
  const int d = consts.d;
  const double m = consts.m;
  const double omega = consts.omega_at(alpha);
  const double q = consts.quartic_over_eps;
  cert.w_upper = d * m * omega * omega / 2.0 + std::sqrt(alpha * q * d * omega / 2.0);
  cert.mu_star = -std::sqrt(2.0 * d * omega / (alpha * q));

  const double e0_upper = thm1_upper(consts, alpha).value;
  // λ <P_f²> ≥ E_0(λ) - E_0 with E_0(λ) bounded below by thm1_lower_value at mass m/(1+2λm).
  auto bound = [&](double lambda) {
    const double mass = m / (1.0 + 2.0 * m * lambda);
    const double lower = thm1_lower_value(d, mass, alpha, consts.h_sq, consts.grad_h_sq, consts.lap_h_sq,
                                          consts.grad_eta_sq);
    return (lower - e0_upper) / lambda;
  };
  const int scan = 600;
  const double lo = std::log(1e-9 / m);
  const double hi = std::log(1e6 / m);
  double best = -std::numeric_limits<double>::infinity();
  int best_i = 0;
  for (int i = 0; i <= scan; ++i) {
    const double value = bound(std::exp(lo + (hi - lo) * i / scan));
    if (value > best) {
      best = value;
      best_i = i;
    }
  }
  const double a = lo + (hi - lo) * std::max(0, best_i - 1) / scan;
  const double b = lo + (hi - lo) * std::min(scan, best_i + 1) / scan;
  const double t = golden_section_max([&](double s) { return bound(std::exp(s)); }, a, b, 1e-12);
  if (bound(std::exp(t)) > best) {
    best = bound(std::exp(t));
    cert.lambda_star = std::exp(t);
  } else {
    cert.lambda_star = std::exp(lo + (hi - lo) * best_i / scan);
  }
  cert.pf2_lower = best;
  if (!(cert.pf2_lower > 0.0)) {
    cert.vacuous = true;
    cert.meff_lower = m;
    return cert;
  }
  const double ratio = 2.0 / (d * m) * cert.pf2_lower * cert.pf2_lower / cert.w_upper;
  cert.meff_lower = m / std::max(1e-12, 1.0 - ratio);
  return cert;
}

double essential_spectrum_ceiling(const PolaronModel& model, double e0_upper, double P) {
  return e0_upper + model.eps(std::abs(P));
}

std::vector<std::pair<double, double>> convex_envelope(const std::vector<std::pair<double, double>>& samples) {
  if (samples.size() < 3) throw PolaronError(ErrorCode::TooFewSamples, "convex_envelope needs at least 3 samples");
  std::vector<std::pair<double, double>> pts;
  for (const auto& [p, e] : samples) {
    const double a = std::abs(p);
    pts.emplace_back(a, e);
    if (a > 0.0) pts.emplace_back(-a, e);
  }
  std::sort(pts.begin(), pts.end());
  // Keep the lowest value at repeated abscissae.
  std::vector<std::pair<double, double>> uniq;
  for (const auto& pt : pts) {
    if (!uniq.empty() && uniq.back().first == pt.first) {
      uniq.back().second = std::min(uniq.back().second, pt.second);
    } else {
      uniq.push_back(pt);
    }
  }
  // Monotone chain, lower hull.
  std::vector<std::pair<double, double>> hull;
  auto cross = [](const auto& o, const auto& a, const auto& b) {
    return (a.first - o.first) * (b.second - o.second) - (a.second - o.second) * (b.first - o.first);
  };
  for (const auto& pt : uniq) {
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), pt) <= 0.0) hull.pop_back();
    hull.push_back(pt);
  }
  std::vector<std::pair<double, double>> out;
  for (const auto& [p, e] : samples) {
    const double a = std::abs(p);
    auto it = std::lower_bound(hull.begin(), hull.end(), a, [](const auto& h, double x) { return h.first < x; });
    double value = e;
    if (it != hull.end() && it->first == a) {
      value = it->second;
    } else if (it != hull.begin() && it != hull.end()) {
      const auto& right = *it;
      const auto& left = *(it - 1);
      const double t = (a - left.first) / (right.first - left.first);
      value = left.second + t * (right.second - left.second);
    }
    out.emplace_back(p, std::min(value, e));
  }
  return out;
}

}  // namespace polaron
