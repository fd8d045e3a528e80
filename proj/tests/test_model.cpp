#include <cmath>
#include <numbers>

#include "doctest.h"
#include "polaron/errors.hpp"
#include "polaron/model.hpp"

using namespace polaron;

namespace {

const double kPi32 = std::pow(std::numbers::pi, 1.5);

PolaronModel gaussian_model(int d, double alpha = 100.0, double m = 1.0) {
  return {d, m, alpha, RadialProfile::gaussian(1.0, 1.0), RadialProfile::constant(1.0)};
}

PolaronModel superfluid_model(double alpha = 100.0) {
  return {3, 1.0, alpha, RadialProfile::gaussian(1.0, 1.0), RadialProfile::gapped_linear(1.0, 1.0)};
}

PolaronModel froehlich_model() {
  return {3, 1.0, 1.0, RadialProfile::power(1.0 / (std::sqrt(2.0) * std::numbers::pi), -1.0),
          RadialProfile::constant(1.0)};
}

}  // namespace

TEST_CASE("radial_integral reproduces Gaussian moments") {
  const auto model = gaussian_model(3);
  const QuadratureSpec quad;
  // ∫_{R^3} e^{-k²} dk = π^{3/2}; ∫ k² e^{-k²} dk = (3/2) π^{3/2}
  CHECK(radial_integral(model, 0, 1, quad).value == doctest::Approx(kPi32).epsilon(1e-12));
  CHECK(radial_integral(model, 2, 1, quad).value == doctest::Approx(1.5 * kPi32).epsilon(1e-12));
  CHECK(radial_integral(model, 4, 1, quad).value == doctest::Approx(3.75 * kPi32).epsilon(1e-12));

  SUBCASE("scaling the form factor by s scales every integral by s²") {
    PolaronModel scaled = model;
    scaled.v = model.v.scaled(2.0);
    for (int p : {0, 2, 4}) {
      CHECK(radial_integral(scaled, p, 1, quad).value ==
            doctest::Approx(4.0 * radial_integral(model, p, 1, quad).value).epsilon(1e-13));
    }
  }
  SUBCASE("fixed Gauss–Legendre rule agrees") {
    QuadratureSpec fixed;
    fixed.radial_rule = RadialRule::FixedGaussLegendre;
    fixed.radial_points = 192;
    CHECK(radial_integral(model, 2, 1, fixed).value == doctest::Approx(1.5 * kPi32).epsilon(1e-12));
  }
  CHECK_THROWS_AS(radial_integral(model, -1, 1, quad), PolaronError);
}

TEST_CASE("compute_constants: d=3 Gaussian model") {
  const auto c = compute_constants(gaussian_model(3, 100.0));
  const double grad = 1.5 * kPi32;
  CHECK(c.h_sq == doctest::Approx(kPi32).epsilon(1e-10));
  CHECK(c.grad_h_sq == doctest::Approx(grad).epsilon(1e-10));
  CHECK(c.lap_h_sq == doctest::Approx(3.75 * kPi32).epsilon(1e-10));
  CHECK(c.grad_eta_sq == doctest::Approx(grad).epsilon(1e-10));
  CHECK(c.quartic_over_eps == doctest::Approx(c.lap_h_sq));
  CHECK(c.m_pek == doctest::Approx(kPi32).epsilon(1e-10));
  CHECK(c.omega == doctest::Approx(std::sqrt(200.0 / 3.0 * grad)).epsilon(1e-10));
  CHECK(c.omega == doctest::Approx(23.5973).epsilon(1e-5));
  const double ratio = (4.0 * grad + 3.75 * kPi32) / std::pow(grad, 1.5);
  CHECK(c.alpha_m == doctest::Approx(3.0 / 8.0 * ratio * ratio).epsilon(1e-10));
  CHECK(c.alpha_m == doctest::Approx(1.8970).epsilon(1e-4));
  CHECK(c.lambda_c == doctest::Approx(kPi32 / 4.0).epsilon(1e-10));
  CHECK(c.theta_c == doctest::Approx(15.0 / 288.0 * kPi32).epsilon(1e-10));
  // ∫ k⁴ e^{-k²} / (2 d m_pek²) with ε ≡ 1
  CHECK(c.mu_c == doctest::Approx(3.75 * kPi32 / (6.0 * kPi32 * kPi32)).epsilon(1e-10));
  CHECK(c.gap == doctest::Approx(1.0));
  CHECK(c.crit_velocity == 0.0);
  CHECK(c.omega * c.omega == doctest::Approx(2.0 * 100.0 / 3.0 * c.grad_h_sq).epsilon(1e-14));
  CHECK(c.thm1_gap() == doctest::Approx(2.4375).epsilon(1e-10));
}

TEST_CASE("compute_constants: d=1 Gaussian model") {
  const auto c = compute_constants(gaussian_model(1, 1.0));
  const double sqrt_pi = std::sqrt(std::numbers::pi);
  CHECK(c.h_sq == doctest::Approx(sqrt_pi).epsilon(1e-10));
  CHECK(c.grad_h_sq == doctest::Approx(sqrt_pi / 2.0).epsilon(1e-10));
  CHECK(c.m_pek == doctest::Approx(sqrt_pi).epsilon(1e-10));
}

TEST_CASE("compute_constants: coupling and form-factor scaling") {
  const auto base = compute_constants(gaussian_model(3, 100.0));
  const auto quad = compute_constants(gaussian_model(3, 400.0));
  CHECK(quad.omega == doctest::Approx(2.0 * base.omega).epsilon(1e-13));
  CHECK(quad.h_sq == doctest::Approx(base.h_sq).epsilon(1e-14));
  CHECK(quad.alpha_m == doctest::Approx(base.alpha_m).epsilon(1e-14));
  CHECK(quad.m_pek == doctest::Approx(base.m_pek).epsilon(1e-14));

  for (double s : {0.5, 2.0, 10.0}) {
    PolaronModel model = gaussian_model(3, 100.0);
    model.v = model.v.scaled(s);
    const auto c = compute_constants(model);
    const double s2 = s * s;
    CHECK(c.h_sq == doctest::Approx(s2 * base.h_sq).epsilon(1e-12));
    CHECK(c.grad_h_sq == doctest::Approx(s2 * base.grad_h_sq).epsilon(1e-12));
    CHECK(c.lap_h_sq == doctest::Approx(s2 * base.lap_h_sq).epsilon(1e-12));
    CHECK(c.grad_eta_sq == doctest::Approx(s2 * base.grad_eta_sq).epsilon(1e-12));
    CHECK(c.m_pek == doctest::Approx(s2 * base.m_pek).epsilon(1e-12));
    CHECK(c.omega == doctest::Approx(s * base.omega).epsilon(1e-12));
    CHECK(c.alpha_m == doctest::Approx(base.alpha_m / s2).epsilon(1e-12));
  }
}

TEST_CASE("doubling radial points moves constants by less than the reported error") {
  QuadratureSpec coarse;
  coarse.radial_rule = RadialRule::FixedGaussLegendre;
  coarse.radial_points = 32;
  QuadratureSpec fine = coarse;
  fine.radial_points = 64;
  const auto model = superfluid_model();
  const auto a = compute_constants(model, coarse);
  const auto b = compute_constants(model, fine);
  for (const char* name : {"h_sq", "grad_h_sq", "lap_h_sq", "grad_eta_sq", "m_pek"}) {
    const auto va = a.named_values();
    const auto vb = b.named_values();
    for (std::size_t i = 0; i < va.size(); ++i) {
      if (va[i].first != name) continue;
      CAPTURE(name);
      CHECK(std::abs(va[i].second - vb[i].second) <= a.err_estimates.at(name) + 1e-14 * std::abs(va[i].second));
    }
  }
}

TEST_CASE("radial_integral matches a Cartesian lattice sum") {
  // Coarse Riemann sums over a cube; surface factors 2, 2π, 4π enter only the radial route.
  const auto f = [](double k2) { return std::exp(-k2) / std::sqrt(1.0 + k2); };
  for (int d : {1, 2, 3}) {
    PolaronModel model{d, 1.0, 1.0, RadialProfile::gaussian(1.0, 1.0), RadialProfile::gapped_linear(1.0, 1.0)};
    const double radial = radial_integral(model, 2, 1, QuadratureSpec{}).value;
    const double h = d == 3 ? 0.1 : 0.02;
    const int n = static_cast<int>(6.0 / h);
    double sum = 0.0;
    if (d == 1) {
      for (int i = -n; i <= n; ++i) {
        const double k2 = (i * h) * (i * h);
        sum += k2 * f(k2) * h;
      }
    } else if (d == 2) {
      for (int i = -n; i <= n; ++i)
        for (int j = -n; j <= n; ++j) {
          const double k2 = h * h * (i * i + j * j);
          sum += k2 * f(k2) * h * h;
        }
    } else {
      for (int i = -n; i <= n; ++i)
        for (int j = -n; j <= n; ++j)
          for (int k = -n; k <= n; ++k) {
            const double k2 = h * h * (i * i + j * j + k * k);
            sum += k2 * f(k2) * h * h * h;
          }
    }
    CAPTURE(d);
    CHECK(std::abs(sum - radial) < 0.01 * radial);
  }
}

TEST_CASE("validate_regularity verdicts") {
  const QuadratureSpec quad;
  SUBCASE("Fröhlich form factor is not regular") {
    const auto report = validate_regularity(froehlich_model(), quad);
    CHECK_FALSE(report.regular());
    CHECK_FALSE(report.integrals[0].finite);
    CHECK(report.integrals[0].name == "h_sq");
    CHECK(report.failure_summary().find("h_sq divergent") != std::string::npos);
  }
  SUBCASE("Gaussian form factor with gapped linear dispersion") {
    const auto report = validate_regularity(superfluid_model(), quad);
    CHECK(report.regular());
    CHECK(report.massive);
    CHECK(report.gap.value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(report.superfluid);
    CHECK(report.crit_velocity.value == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(report.subadditive_sampled);
  }
  SUBCASE("constant dispersion is massive but not superfluid") {
    const auto report = validate_regularity(gaussian_model(3), quad);
    CHECK(report.regular());
    CHECK_FALSE(report.superfluid);
    CHECK(report.subadditive_sampled);
  }
  SUBCASE("non-subadditive dispersion is flagged") {
    PolaronModel model{3, 1.0, 1.0, RadialProfile::gaussian(1.0, 1.0), RadialProfile::power(1.0, 2.0, 0.0)};
    const auto report = validate_regularity(model, quad);
    CHECK_FALSE(report.subadditive_sampled);
    CHECK_FALSE(report.massive);
  }
  SUBCASE("infrared divergence is detected") {
    // d=1, v ~ 1/k: ∫ v²/ε diverges at the origin.
    PolaronModel model{1, 1.0, 1.0, RadialProfile::power(1.0, -1.0, 2.0), RadialProfile::constant(1.0)};
    const auto report = validate_regularity(model, quad);
    CHECK_FALSE(report.integrals[0].finite);
    CHECK(report.integrals[0].detail.find("r -> 0") != std::string::npos);
  }
}

TEST_CASE("model construction rejects degenerate input") {
  CHECK_THROWS_AS(PolaronModel(4, 1.0, 1.0, RadialProfile::gaussian(1.0, 1.0), RadialProfile::constant(1.0)),
                  PolaronError);
  CHECK_THROWS_AS(PolaronModel(3, 0.0, 1.0, RadialProfile::gaussian(1.0, 1.0), RadialProfile::constant(1.0)),
                  PolaronError);
  CHECK_THROWS_AS(PolaronModel(3, 1.0, 1.0, RadialProfile::gaussian(0.0, 1.0), RadialProfile::constant(1.0)),
                  PolaronError);
  CHECK_THROWS_AS(RadialProfile::gaussian(1.0, -1.0), PolaronError);
  CHECK_THROWS_AS(RadialProfile(ProfileKind::Gaussian, {1.0, 1.0}, 0.0), PolaronError);
}

TEST_CASE("tabulated profiles") {
  std::vector<std::pair<double, double>> table;
  for (int i = 0; i <= 400; ++i) {
    const double r = 0.02 * i;
    table.emplace_back(r, std::exp(-0.5 * r * r));
  }
  const auto v = RadialProfile::tabulated(table, 1.0);
  CHECK(v(1.0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-6));
  CHECK(v(11.9) == doctest::Approx(table.back().second));
  CHECK_THROWS_AS(v(12.1), PolaronError);
  PolaronModel model{3, 1.0, 1.0, v, RadialProfile::constant(1.0)};
  QuadratureSpec quad;
  quad.r_max_multiplier = 8.0;
  CHECK(radial_integral(model, 2, 1, quad).value == doctest::Approx(1.5 * kPi32).epsilon(1e-6));
}

TEST_CASE("kernels g and R") {
  const QuadratureSpec quad;
  const auto model = gaussian_model(3);
  const auto c = compute_constants(model, quad);
  CHECK(kernel_g(model, 0.0, quad).value == doctest::Approx(c.h_sq).epsilon(1e-12));
  CHECK(kernel_g(model, 1.0, quad).value == doctest::Approx(kPi32 * std::exp(-0.25)).epsilon(1e-10));
  CHECK(kernel_g(model, 1.0, quad).value == doctest::Approx(4.336).epsilon(1e-3));
  CHECK(kernel_R(model, 0.0, quad).value == doctest::Approx(1.5 * c.m_pek).epsilon(1e-12));
  CHECK(kernel_R(model, 0.0, quad).value == doctest::Approx(1.5 * kPi32).epsilon(1e-10));

  SUBCASE("Gaussian transforms in d = 1, 2") {
    for (int d : {1, 2}) {
      const auto m = gaussian_model(d);
      for (double r : {0.3, 2.0, 7.0}) {
        CAPTURE(d);
        CAPTURE(r);
        const double exact = std::pow(std::numbers::pi, 0.5 * d) * std::exp(-0.25 * r * r);
        CHECK(kernel_g(m, r, quad).value == doctest::Approx(exact).epsilon(1e-9).scale(1.0));
      }
    }
  }
  SUBCASE("maximum at the origin") {
    for (int d : {1, 2, 3}) {
      PolaronModel m{d, 1.0, 1.0, RadialProfile::gaussian(1.0, 1.0), RadialProfile::gapped_linear(1.0, 1.0)};
      const double g0 = kernel_g(m, 0.0, quad).value;
      const double r0 = kernel_R(m, 0.0, quad).value;
      for (double r = 0.25; r < 20.0; r *= 1.7) {
        CHECK(std::abs(kernel_g(m, r, quad).value) <= g0);
        CHECK(std::abs(kernel_R(m, r, quad).value) <= r0);
      }
    }
  }
}
