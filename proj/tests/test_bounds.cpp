#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "polaron/bounds.hpp"
#include "polaron/errors.hpp"

using namespace polaron;

namespace {

const double kPi32 = std::pow(std::numbers::pi, 1.5);

PolaronModel gaussian_model(double alpha = 100.0) {
  return {3, 1.0, alpha, RadialProfile::gaussian(1.0, 1.0), RadialProfile::constant(1.0)};
}

PolaronModel superfluid_model(double alpha = 1e3) {
  return {3, 1.0, alpha, RadialProfile::gaussian(1.0, 1.0), RadialProfile::gapped_linear(1.0, 1.0)};
}

}  // namespace

TEST_CASE("ground-state bounds on the Gaussian model") {
  const auto c = compute_constants(gaussian_model());
  const EnergyBound up = thm1_upper(c, 100.0);
  const EnergyBound lo = thm1_lower(c, 100.0);
  CHECK(up.value == doctest::Approx(-100.0 * kPi32 + std::sqrt(150.0) * std::sqrt(1.5 * kPi32)).epsilon(1e-12));
  CHECK(up.value == doctest::Approx(-521.4368).epsilon(1e-7));
  CHECK(lo.value == doctest::Approx(-523.8743).epsilon(1e-7));
  CHECK(up.value - lo.value == doctest::Approx(1.5 + 0.9375).epsilon(1e-12));
  CHECK(thm1_upper(c, 0.0).value == 0.0);
  const double a = 37.0;
  CHECK(thm1_upper(c, 4 * a).value - thm1_upper(c, a).value ==
        doctest::Approx(-3.0 * a * c.h_sq + std::sqrt(1.5 * a) * std::sqrt(c.grad_h_sq)).epsilon(1e-12));

  for (double alpha : {10.0, 1e2, 1e3, 1e4}) {
    CAPTURE(alpha);
    CHECK(thm1_upper(c, alpha).value - thm1_lower(c, alpha).value == doctest::Approx(2.4375).epsilon(1e-12));
    CHECK((thm1_upper(c, alpha).value + alpha * c.h_sq) / std::sqrt(alpha) == doctest::Approx(3.5396).epsilon(1e-4));
  }
  SUBCASE("branches agree at alpha_m") {
    const double am = c.alpha_m;
    const double strong = -am * c.h_sq + std::sqrt(1.5 * am) * std::sqrt(c.grad_h_sq) - c.thm1_gap();
    const double weak = -am * c.h_sq + am * c.grad_h_sq * c.grad_h_sq / (4.0 * c.grad_eta_sq + c.lap_h_sq);
    CHECK(strong == doctest::Approx(weak).epsilon(1e-10));
    CHECK(thm1_lower(c, am).value == doctest::Approx(weak).epsilon(1e-10));
    CHECK(thm1_lower(c, 0.999 * am).reason == "alpha < alpha_m");
  }
  SUBCASE("sandwich for all couplings") {
    for (double alpha = 1e-3; alpha < 1e6; alpha *= 3.7) CHECK(thm1_upper(c, alpha).value >= thm1_lower(c, alpha).value);
  }
}

TEST_CASE("velocity-shifted norms") {
  const auto model = superfluid_model();
  const auto c = compute_constants(model);
  const VelocityShiftNorms zero = hu_norms(model, c, 0.0);
  CHECK(zero.h_u_sq == c.h_sq);
  CHECK(zero.grad_h_u_sq == c.grad_h_sq);
  CHECK(zero.lap_h_u_sq == c.lap_h_sq);

  for (double u : {0.1, 0.3, 0.6, 0.9}) {
    CAPTURE(u);
    const VelocityShiftNorms n = hu_norms(model, c, u);
    const VelocityShiftNorms nm = hu_norms(model, c, -u);
    CHECK(nm.h_u_sq == doctest::Approx(n.h_u_sq).epsilon(1e-14));
    CHECK(n.h_u_sq <= c.h_sq + u * u * c.m_pek / (2.0 * (1.0 - u / c.crit_velocity)) + 1e-8 * c.h_sq);
    CHECK(n.lap_h_u_sq <= c.lap_h_sq * (1.0 + u * u / (c.crit_velocity * (c.crit_velocity - u))) * (1.0 + 1e-8));
    CHECK(n.grad_h_u_sq >= c.grad_h_sq);
    CHECK(n.h_u_sq >= c.h_sq);
  }
  CHECK_THROWS_AS(hu_norms(model, c, 0.995), PolaronError);

  SUBCASE("Monte Carlo oracle at u = 0.3") {
    // v² = e^{-k²}: sample k ~ N(0, I/2) so that ∫ e^{-k²} F = π^{3/2} E[F], with F = 1/(ε - u k_1).
    const VelocityShiftNorms n = hu_norms(model, c, 0.3);
    std::mt19937_64 rng(20240611);
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    const int samples = 2'000'000;
    double s[3] = {0, 0, 0};
    double s2[3] = {0, 0, 0};
    for (int i = 0; i < samples; ++i) {
      const double x = normal(rng);
      const double y = normal(rng);
      const double z = normal(rng);
      const double k2 = x * x + y * y + z * z;
      const double f = 1.0 / (std::sqrt(1.0 + k2) - 0.3 * x);
      const double vals[3] = {f, k2 * f, k2 * k2 * f};
      for (int j = 0; j < 3; ++j) {
        s[j] += vals[j];
        s2[j] += vals[j] * vals[j];
      }
    }
    const double exact[3] = {n.h_u_sq, n.grad_h_u_sq, n.lap_h_u_sq};
    for (int j = 0; j < 3; ++j) {
      const double mean = s[j] / samples;
      const double sigma = std::sqrt((s2[j] / samples - mean * mean) / samples);
      CAPTURE(j);
      CHECK(std::abs(kPi32 * mean - exact[j]) <= 3.0 * kPi32 * sigma);
    }
  }
}

TEST_CASE("momentum-resolved lower bound") {
  const double alpha = 1e3;
  const auto model = superfluid_model(alpha);
  const auto c = compute_constants(model);

  const EnergyBound zero = eP_lower(model, c, alpha, 0.0);
  CHECK(zero.value == doctest::Approx(thm1_lower(c, alpha).value).epsilon(1e-13));

  const double P = 100.0;
  const EnergyBound b = eP_lower(model, c, alpha, P);
  CHECK(b.valid);
  CHECK(eP_lower(model, c, alpha, -P).value == doctest::Approx(b.value).epsilon(1e-14));
  // Dense scan oracle over u.
  double scan_best = -1e300;
  for (int i = 0; i <= 400; ++i) {
    const double u = 0.99 * c.crit_velocity * i / 401.0;
    scan_best = std::max(scan_best, eP_lower_at(model, c, alpha, P, u));
  }
  CHECK(b.value >= scan_best - 1e-9 * std::abs(scan_best));
  // A grid of spacing Δu misses a quadratic maximum of curvature ~αM^Pek by at most αM^Pek Δu²/8.
  const double du = 0.99 * c.crit_velocity / 401.0;
  CHECK(b.value <= scan_best + (alpha * c.m_pek + c.m) * du * du / 8.0);
  // Never worse than the velocity choice P/(α M^Pek).
  CHECK(b.value >= eP_lower_at(model, c, alpha, P, P / (alpha * c.m_pek)));
  // Leading asymptotics: thm1_lower + P²/(2αM^Pek) up to small corrections.
  const double leading = thm1_lower(c, alpha).value + P * P / (2.0 * alpha * c.m_pek);
  CHECK(std::abs(b.value - leading) < 0.1 * P * P / (2.0 * alpha * c.m_pek));

  SUBCASE("nondecreasing in |P|") {
    double prev = -1e300;
    for (double p = 0.0; p <= 600.0; p += 50.0) {
      const double v = eP_lower(model, c, alpha, p).value;
      CHECK(v >= prev - 1e-9);
      prev = v;
      CHECK(eP_upper_asymptotic(c, alpha, p).value >= eP_upper_asymptotic(c, alpha, std::max(0.0, p - 50.0)).value);
    }
  }
  CHECK_THROWS_AS(eP_lower(gaussian_model(), compute_constants(gaussian_model()), 100.0, 1.0), PolaronError);
}

TEST_CASE("asymptotic upper bound") {
  const auto c = compute_constants(gaussian_model());
  CHECK(eP_upper_asymptotic(c, 100.0, 0.0).value == doctest::Approx(thm1_upper(c, 100.0).value).epsilon(1e-14));
  CHECK(eP_upper_asymptotic(c, 100.0, 50.0).value == doctest::Approx(-519.1920).epsilon(1e-7));
  const double q = eP_upper_asymptotic(c, 100.0, 3.0).value - eP_upper_asymptotic(c, 100.0, 0.0).value;
  CHECK(q == doctest::Approx(9.0 / (200.0 * c.m_pek)).epsilon(1e-10));
}

TEST_CASE("effective mass quotient window") {
  const double alpha = 1e4;
  const auto model = superfluid_model(alpha);
  const auto c = compute_constants(model);
  const MomentumWindowReport r = mass_quotient_window(model, c, alpha, {-1e3, 1e2, 1e3, 2e3});
  REQUIRE(r.entries.size() == 4);
  CHECK(r.entries[0].M_lower == doctest::Approx(r.entries[2].M_lower).epsilon(1e-12));
  CHECK(r.entries[0].M_upper == doctest::Approx(r.entries[2].M_upper).epsilon(1e-12));
  CHECK_FALSE(r.entries[1].valid);
  CHECK_FALSE(r.entries[1].in_window);
  for (std::size_t i : {2u, 3u}) {
    const WindowEntry& e = r.entries[i];
    CAPTURE(e.P);
    CHECK(e.bracket_ok);
    CHECK(e.valid == (e.P <= 1e3));
    CHECK(e.M_lower <= e.M_upper);
    CHECK(e.M_lower / alpha <= c.m_pek);
    CHECK(e.M_upper / alpha >= c.m_pek);
  }
  CHECK(r.e0_lower <= r.e0_upper);
}

TEST_CASE("effective mass divergence certificate") {
  const auto c = compute_constants(gaussian_model());
  const MassCertificate small = meff_divergence_certificate(c, 1.0);
  CHECK(small.vacuous);
  CHECK(small.meff_lower == c.m);

  std::vector<double> xs;
  std::vector<double> ys;
  double prev = 0.0;
  for (double alpha = 1e4; alpha <= 1.0001e8; alpha *= 10.0) {
    const MassCertificate cert = meff_divergence_certificate(c, alpha);
    CAPTURE(alpha);
    CHECK_FALSE(cert.vacuous);
    CHECK(cert.pf2_lower > 0.0);
    CHECK(cert.w_upper > 0.0);
    CHECK(cert.meff_lower >= c.m);
    CHECK(cert.meff_lower >= prev);
    CHECK(cert.mu_star < 0.0);
    prev = cert.meff_lower;
    xs.push_back(std::log(alpha));
    ys.push_back(std::log(cert.meff_lower));
    // The closed-form optimum over μ equals 1 + C α^{-1/4} times the harmonic value.
    const double omega = c.omega_at(alpha);
    const double C = std::sqrt(c.lap_h_sq) * std::pow(1.5, 0.25) / std::pow(c.grad_h_sq, 0.75);
    CHECK(cert.w_upper / (1.5 * omega * omega) == doctest::Approx(1.0 + C * std::pow(alpha, -0.25)).epsilon(1e-12));
  }
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(std::abs(slope - 0.25) <= 0.05);
  const double omega = c.omega_at(1e8);
  CHECK(meff_divergence_certificate(c, 1e8).w_upper / (1.5 * omega * omega) < 1.011);
}

TEST_CASE("essential spectrum ceiling") {
  const auto model = superfluid_model();
  CHECK(essential_spectrum_ceiling(model, -10.0, 0.0) == doctest::Approx(-9.0));
  double prev = -1e300;
  for (double p = 0.0; p < 50.0; p += 1.0) {
    const double v = essential_spectrum_ceiling(model, -10.0, p);
    CHECK(v >= prev);
    CHECK(v - (-10.0) >= p);
    prev = v;
  }
}

TEST_CASE("convex envelope") {
  std::vector<std::pair<double, double>> convex;
  for (int i = 0; i < 10; ++i) convex.emplace_back(0.5 * i, 0.25 * i * i - 3.0);
  const auto same = convex_envelope(convex);
  for (std::size_t i = 0; i < convex.size(); ++i) CHECK(same[i].second == doctest::Approx(convex[i].second));

  // Dip then bump: the bump is replaced by the chord. Oracle: brute force over all pairs.
  const std::vector<std::pair<double, double>> bumpy = {{0.0, 0.0}, {1.0, 0.5}, {2.0, -1.0}, {3.0, 2.0},
                                                        {4.0, 1.0}, {5.0, 1.5}, {6.0, 4.0}};
  const auto env = convex_envelope(bumpy);
  std::vector<std::pair<double, double>> mirrored;
  for (const auto& [p, e] : bumpy) {
    mirrored.emplace_back(p, e);
    mirrored.emplace_back(-p, e);
  }
  for (std::size_t k = 0; k < bumpy.size(); ++k) {
    const double x = bumpy[k].first;
    double best = bumpy[k].second;
    for (const auto& a : mirrored) {
      for (const auto& b : mirrored) {
        if (a.first < x && b.first > x) {
          const double t = (x - a.first) / (b.first - a.first);
          best = std::min(best, a.second + t * (b.second - a.second));
        }
      }
    }
    CAPTURE(x);
    CHECK(env[k].second == doctest::Approx(best).epsilon(1e-12));
    CHECK(env[k].second <= bumpy[k].second);
  }
  CHECK_THROWS_AS(convex_envelope({{0.0, 1.0}, {1.0, 2.0}}), PolaronError);
}
