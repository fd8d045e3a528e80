// Acceptance run: one PASS/FAIL line per criterion with the measured numbers.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "polaron/bounds.hpp"
#include "polaron/errors.hpp"
#include "polaron/model.hpp"
#include "polaron/oracle.hpp"
#include "polaron/pekar.hpp"
#include "polaron/trialstate.hpp"

using namespace polaron;

namespace {

const double kPi32 = std::pow(std::numbers::pi, 1.5);

PolaronModel gaussian_model(int d, double alpha) {
  return {d, 1.0, alpha, RadialProfile::gaussian(1.0, 1.0), RadialProfile::constant(1.0)};
}

PolaronModel superfluid_model(double alpha) {
  return {3, 1.0, alpha, RadialProfile::gaussian(1.0, 1.0), RadialProfile::gapped_linear(1.0, 1.0)};
}

double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

double rel(double x, double ref) { return std::abs(x / ref - 1.0); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double time_limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs <= time_limit_s;
  const bool pass = out.pass && in_time;
  if (!pass) ++failures;
  std::printf("[%s] criterion %d: %s | %s | %.2f s (limit %.0f s)\n", pass ? "PASS" : "FAIL", id, title,
              out.detail.c_str(), secs, time_limit_s);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

}  // namespace

int main() {
  criterion(1, "Gaussian closed-form constants", 1.0, [] {
    const auto c = compute_constants(gaussian_model(3, 1.0));
    const double e1 = rel(c.h_sq, kPi32);
    const double e2 = rel(c.grad_h_sq, 1.5 * kPi32);
    const double e3 = rel(c.lap_h_sq, 3.75 * kPi32);
    const double e4 = rel(c.m_pek, kPi32);
    const double worst = std::max({e1, e2, e3, e4});
    return Outcome{worst <= 1e-8, fmt("max relative error %.2e (tol 1e-8)", worst)};
  });

  criterion(2, "ground-state sandwich gap and strong-coupling constant", 1.0, [] {
    const auto c = compute_constants(gaussian_model(3, 1.0));
    const double limit = std::sqrt(1.5 * 1.5 * kPi32);
    double gap_err = 0.0, scaled_err = 0.0, lo = 1e300, hi = -1e300;
    for (double alpha : {10.0, 1e2, 1e3, 1e4}) {
      gap_err = std::max(gap_err, std::abs(thm1_upper(c, alpha).value - thm1_lower(c, alpha).value - 2.4375));
      const double s = (thm1_upper(c, alpha).value + alpha * c.h_sq) / std::sqrt(alpha);
      scaled_err = std::max(scaled_err, std::abs(s - limit));
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    const bool ok = gap_err <= 1e-10 && scaled_err <= 1e-10 && std::abs(lo - 3.5396) < 5e-5 && c.alpha_m < 10.0;
    return Outcome{ok, fmt("gap error %.1e, scaled value %.10f (spread %.1e, analytic %.10f), alpha_m %.4f", gap_err,
                           lo, hi - lo, limit, c.alpha_m)};
  });

  criterion(3, "Pekar minimizer inside the sandwich", 180.0, [] {
    bool ok = true;
    std::string detail;
    for (double alpha : {1e2, 1e3, 1e4}) {
      const auto model = gaussian_model(3, alpha);
      const auto c = compute_constants(model);
      const PekarSolution s = solve_pekar(model, c);
      const bool inside = s.energy >= thm1_lower(c, alpha).value && s.energy <= thm1_upper(c, alpha).value;
      ok = ok && inside;
      detail += fmt("a=%g E=%.6f %s; ", alpha, s.energy, inside ? "in" : "OUT");
      if (alpha == 1e4) {
        const double scaled = (s.energy + alpha * c.h_sq) / std::sqrt(alpha);
        const double m_ratio = s.m_pek_alpha / alpha;
        ok = ok && rel(scaled, 3.5396) < 0.05 && rel(m_ratio, kPi32) < 0.02;
        detail += fmt("scaled %.4f (%.2f%% off), M/alpha %.4f (%.2f%% off)", scaled, 100 * rel(scaled, 3.5396),
                      m_ratio, 100 * rel(m_ratio, kPi32));
      }
    }
    return Outcome{ok, detail};
  });

  criterion(4, "Fock-space oracle at weak coupling", 300.0, [] {
    const double alpha = 0.01;
    const auto model = gaussian_model(1, alpha);
    const FockTruncation t = FockTruncation::symmetric_1d(model, 48, 3);
    const SpectrumEstimate e = fiber_ground_energy(model, alpha, 0.0, t);
    const double pt2 = -alpha * simpson([](double k) { return std::exp(-k * k) / (1.0 + 0.5 * k * k); }, -12.0, 12.0);
    double mono = 0.0;
    for (std::size_t i = 1; i < e.truncation_trend.size(); ++i) {
      mono = std::max(mono, e.truncation_trend[i].second - e.truncation_trend[i - 1].second);
    }
    const double plus = fiber_ground_energy(model, alpha, 0.5, t).ground_energy;
    const double minus = fiber_ground_energy(model, alpha, -0.5, t).ground_energy;
    const double err = rel(e.ground_energy, pt2);
    const bool ok = err < 0.05 && std::abs(plus - minus) <= 1e-8 && mono <= 1e-10;
    return Outcome{ok, fmt("E=%.8f vs second order %.8f (%.2f%%), |E(P)-E(-P)|=%.1e, worst trend rise %.1e",
                           e.ground_energy, pt2, 100 * err, std::abs(plus - minus), mono)};
  });

  criterion(5, "effective-mass certificate scaling", 1.0, [] {
    const auto c = compute_constants(gaussian_model(3, 1.0));
    std::vector<double> xs, ys;
    bool monotone = true;
    double prev = 0.0;
    for (double alpha = 1e4; alpha <= 1.0001e8; alpha *= std::sqrt(10.0)) {
      const double m = meff_divergence_certificate(c, alpha).meff_lower;
      monotone = monotone && m >= prev;
      prev = m;
      xs.push_back(std::log(alpha));
      ys.push_back(std::log(m));
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
    return Outcome{std::abs(slope - 0.25) <= 0.05 && monotone,
                   fmt("slope %.4f (target 0.25 +- 0.05), nondecreasing %s", slope, monotone ? "yes" : "no")};
  });

  criterion(6, "momentum window on the superfluid model", 1800.0, [] {
    const double alpha = 1e4;
    const auto model = superfluid_model(alpha);
    const auto c = compute_constants(model);
    const std::vector<double> grid{100.0, 1e3, 2e3};
    std::vector<std::pair<double, double>> upper;
    for (double P : {0.0, 100.0, 1e3, 2e3}) {
      const TrialStateReport r = variational_energy(model, c, alpha, P);
      upper.emplace_back(P, r.energy + r.quadrature_error);
    }
    WindowSources src;
    src.upper = [upper](double P) {
      for (const auto& [p, e] : upper)
        if (p == P) return e;
      throw PolaronError(ErrorCode::InvalidArgument, "no trial energy");
    };
    src.e_pek = solve_pekar(model, c).energy;
    const MomentumWindowReport w = mass_quotient_window(model, c, alpha, grid, src);
    bool ok = !w.entries[0].valid;
    std::string detail = fmt("P=100 valid=%s; ", w.entries[0].valid ? "true" : "false");
    for (std::size_t i = 1; i < 3; ++i) {
      const WindowEntry& e = w.entries[i];
      const double lo = e.M_lower / alpha, hi = e.M_upper / alpha;
      const double width = (hi - lo) / (0.5 * (hi + lo));
      const bool good = e.bracket_ok && lo <= c.m_pek && c.m_pek <= hi && width <= 0.25;
      ok = ok && good;
      detail += fmt("P=%g [%.4f, %.4f] width %.1f%%; ", e.P, lo, hi, 100 * width);
    }
    detail += fmt("m_pek %.4f", c.m_pek);
    return Outcome{ok, detail};
  });

  criterion(7, "trial-state variational energy", 600.0, [] {
    const double alpha = 100.0;
    const auto model = gaussian_model(3, alpha);
    const auto c = compute_constants(model);
    const TrialStateReport r = variational_energy(model, c, alpha, 0.0);
    const double lo = thm1_lower(c, alpha).value, up = thm1_upper(c, alpha).value;
    const TrialStateReport plus = variational_energy(model, c, alpha, 20.0);
    const TrialStateReport minus = variational_energy(model, c, alpha, -20.0);
    TrialSpec finer;
    finer.refine = 2;
    const TrialStateReport ref = variational_energy(model, c, alpha, 0.0, {}, finer);
    const double parity = std::abs(plus.energy - minus.energy);
    const double parity_tol = std::max(plus.quadrature_error, minus.quadrature_error);
    const double shift = std::abs(ref.energy - r.energy);
    const bool ok = r.energy + r.quadrature_error >= lo && r.energy <= up + 2.5 && parity <= parity_tol &&
                    shift < r.quadrature_error;
    return Outcome{ok, fmt("E=%.8f err %.1e in [%.4f, %.4f]; parity %.1e (tol %.1e); refinement shift %.1e", r.energy,
                           r.quadrature_error, lo, up + 2.5, parity, parity_tol, shift)};
  });

  criterion(8, "trial-state moment scaling", 120.0, [] {
    const auto model = gaussian_model(3, 1.0);
    const auto c = compute_constants(model);
    double worst = 0.0;
    std::vector<std::vector<double>> scaled;
    for (double alpha : {1e4, 4e4, 1.6e5}) {
      const WeightMeasure w = build_weight(model, c, alpha, 0.0);
      scaled.push_back({});
      for (int r : {2, 4, 6}) scaled.back().push_back(std::pow(alpha, 0.5 * r) * weight_moments(w, r));
    }
    for (std::size_t k = 0; k < 3; ++k) {
      const double lo = std::min({scaled[0][k], scaled[1][k], scaled[2][k]});
      const double hi = std::max({scaled[0][k], scaled[1][k], scaled[2][k]});
      worst = std::max(worst, hi / lo - 1.0);
    }
    return Outcome{worst < 0.15, fmt("largest variation %.2f%% (limit 15%%)", 100 * worst)};
  });

  criterion(9, "convex envelope below the Pekar dispersion", 600.0, [] {
    const double alpha = 0.1;
    const auto model = gaussian_model(1, alpha);
    const auto c = compute_constants(model);
    const FockTruncation t = FockTruncation::symmetric_1d(model, 32, 3);
    std::vector<double> grid;
    for (double P = -2.0; P <= 2.0001; P += 0.25) grid.push_back(P);
    const auto scan = scan_dispersion(model, alpha, grid, t);
    std::vector<std::pair<double, double>> samples;
    for (const auto& s : scan) samples.emplace_back(std::abs(s.P), s.ground_energy);
    const auto hull = convex_envelope(samples);
    const PekarSolution pek = solve_pekar(model, c);
    double worst = -1e300;
    for (const auto& [P, E] : hull) worst = std::max(worst, E - (pek.energy + P * P / (2.0 * pek.m_pek_alpha)));
    return Outcome{worst <= 0.0, fmt("%zu samples, max(E* - Pekar bound) = %.4f", hull.size(), worst)};
  });

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
