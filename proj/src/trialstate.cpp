#include "polaron/trialstate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "polaron/errors.hpp"
#include "polaron/special.hpp"

namespace polaron {

std::string_view to_string(TrialMethod method) {
  return method == TrialMethod::MonteCarlo ? "monte-carlo" : "tensor-quadrature";
}

namespace {

// Radial transforms of the trial state at one radius. Each is S_d ∫ (...) p^k dp
// over a Gauss momentum grid; see special.hpp for the kernels.
struct Radial {
  double dJ = 0;  // J(r) - J(0)
  double ka = 0;  // isotropic part of K_P - K_P(0), per (P/M)²
  double kb = 0;  // t² part
  double a = 0;   // A = -(2P/M) t a
  double g = 0;   // ∫ v²/ε cos(p·x)
  double fa = 0;  // ∫ v²/ε³ (p·P̂)² cos(p·x), isotropic part
  double fb = 0;
  double fs = 0;  // ∫ v²/ε² (p·P̂) sin(p·x) / t
  double vc = 0;  // ∫ v² e^{-p²/4mω}/ε cos(p·x/2)
  double vs = 0;  // ∫ v² e^{-p²/4mω}/ε² (p·P̂) sin(p·x/2) / t
};

class Transforms {
 public:
  Transforms(const PolaronModel& model, double omega, double r_max, int order, int refine,
             const QuadratureSpec& quad)
      : d_(model.d) {
    const double k_max = model.cutoff(quad);
    const int panels = refine * std::max(32, static_cast<int>(std::ceil(k_max * r_max / std::numbers::pi)));
    std::vector<double> edges;
    for (int i = 0; i <= panels; ++i) edges.push_back(k_max * i / panels);
    for (const RadialProfile* prof : {&model.v, &model.eps}) {
      for (const auto& knot : prof->table()) {
        if (knot.first > 0.0 && knot.first < k_max) edges.push_back(knot.first);
      }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    const double area = sphere_area(d_);
    const double mw = model.m * omega;
    for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
      const Rule rule = gauss_legendre(order, edges[e], edges[e + 1]);
      for (std::size_t i = 0; i < rule.size(); ++i) {
        const double p = rule.nodes[i];
        const double v = model.v(p);
        const double eps = model.eps(p);
        const double base = area * rule.weights[i] * std::pow(p, d_ - 1) * v * v;
        const double damp = std::exp(-p * p / (4.0 * mw));
        p_.push_back(p);
        cJ_.push_back(base / (eps * eps));
        cK_.push_back(base * p * p / std::pow(eps, 4));
        cA_.push_back(base * p / (eps * eps * eps));
        cG_.push_back(base / eps);
        cF_.push_back(base * p * p / (eps * eps * eps));
        cFs_.push_back(base * p / (eps * eps));
        cVc_.push_back(base * damp / eps);
        cVs_.push_back(base * damp * p / (eps * eps));
      }
    }
    for (std::size_t i = 0; i < p_.size(); ++i) {
      J0_ += cJ_[i];
      K0_ += cK_[i] / d_;
    }
  }

  std::size_t size() const { return p_.size(); }
  double J0() const { return J0_; }
  /// K_P(0) per (P/M)².
  double K0() const { return K0_; }

  double dJ(double r) const {
    double s = 0.0;
    for (std::size_t i = 0; i < p_.size(); ++i) s += cJ_[i] * special::cos_kernel_minus(d_, p_[i] * r);
    return s;
  }

  Radial at(double r) const {
    Radial out;
    for (std::size_t i = 0; i < p_.size(); ++i) {
      const double z = p_[i] * r;
      const double qb = special::quad_b(d_, z);
      out.dJ += cJ_[i] * special::cos_kernel_minus(d_, z);
      out.ka += cK_[i] * special::quad_a_minus(d_, z);
      out.kb += cK_[i] * qb;
      out.a += cA_[i] * special::sin_kernel_minus(d_, z);
      out.g += cG_[i] * special::cos_kernel(d_, z);
      out.fa += cF_[i] * special::quad_a(d_, z);
      out.fb += cF_[i] * qb;
      out.fs += cFs_[i] * special::sin_kernel(d_, z);
      out.vc += cVc_[i] * special::cos_kernel(d_, 0.5 * z);
      out.vs += cVs_[i] * special::sin_kernel(d_, 0.5 * z);
    }
    return out;
  }

 private:
  int d_;
  std::vector<double> p_, cJ_, cK_, cA_, cG_, cF_, cFs_, cVc_, cVs_;
  double J0_ = 0.0;
  double K0_ = 0.0;
};

// Parameters of the trial state that do not depend on the integration grid.
struct Setup {
  int d;
  double m;
  double alpha;
  double P;
  double omega;
  double M;  // m_pek
};

struct Point {
  double log_weight;
  double cosA;
  double sinA;
  double field;        // cos A·Fc + sin A·Fs
  double interaction;  // cos A·Vc + sin A·Vs
};

Point evaluate(const Setup& s, const Radial& rv, double r, double t) {
  const double pm = s.P / s.M;
  const double dK = pm * pm * (rv.ka + t * t * rv.kb);
  const double A = -2.0 * pm * t * rv.a;
  Point pt;
  pt.log_weight = -0.25 * s.m * s.omega * r * r + s.alpha * rv.dJ + dK / s.alpha;
  pt.cosA = std::cos(A);
  pt.sinA = std::sin(A);
  const double fc = s.alpha * rv.g + pm * pm / s.alpha * (rv.fa + t * t * rv.fb);
  const double fs = 2.0 * pm * t * rv.fs;
  pt.field = pt.cosA * fc + pt.sinA * fs;
  const double vc = rv.vc;
  const double vs = pm / s.alpha * t * rv.vs;
  pt.interaction = pt.cosA * vc + pt.sinA * vs;
  return pt;
}

// Weighted sums over the measure; everything the energy and moments need.
struct Sums {
  double z = 0;
  std::array<double, 9> rk{};
  double cosA = 0;
  double r2cosA = 0;
  double field = 0;
  double interaction = 0;

  void add(double w, double r, const Point& pt) {
    z += w;
    double rp = 1.0;
    for (double& x : rk) {
      x += w * rp;
      rp *= r;
    }
    cosA += w * pt.cosA;
    r2cosA += w * r * r * pt.cosA;
    field += w * pt.field;
    interaction += w * pt.interaction;
  }
};

struct Terms {
  double kinetic = 0;
  double field = 0;
  double interaction = 0;
  double cos_mean = 0;
  double energy() const { return kinetic + field + interaction; }
};

Terms terms_from(const Setup& s, const Sums& sums) {
  Terms t;
  t.cos_mean = sums.cosA / sums.z;
  if (!(t.cos_mean > 0.0)) {
    std::ostringstream os;
    os << "trial-state norm <cos A> = " << t.cos_mean << " is not positive at P = " << s.P;
    throw PolaronError(ErrorCode::OscillatoryFailure, os.str());
  }
  t.kinetic = s.d * s.omega / 4.0 - s.m * s.omega * s.omega / 8.0 * sums.r2cosA / sums.cosA;
  t.field = sums.field / sums.cosA;
  t.interaction = -2.0 * s.alpha * sums.interaction / sums.cosA;
  return t;
}

Setup make_setup(const PolaronModel& model, const ModelConstants& consts, double alpha, double P,
                 const TrialSpec& spec) {
  if (!(alpha > 0.0)) throw PolaronError(ErrorCode::InvalidArgument, "trial state needs alpha > 0");
  if (spec.refine < 1 || spec.radial_panels < 1 || spec.radial_order < 2 || spec.angular_points < 2 ||
      spec.momentum_order < 2) {
    throw PolaronError(ErrorCode::InvalidArgument, "trial-state grid sizes must be positive");
  }
  if (spec.enforce_cap) {
    const bool superfluid = consts.crit_velocity > 0.0;
    const double cap =
        superfluid ? spec.cap_fraction * alpha * consts.m_pek * consts.crit_velocity : alpha;
    if (std::abs(P) > cap) {
      std::ostringstream os;
      os << "|P| = " << std::abs(P) << " exceeds the trial-state validity cap " << cap;
      throw PolaronError(ErrorCode::WindowViolation, os.str());
    }
  }
  return {model.d, model.m, alpha, P, consts.omega_at(alpha), consts.m_pek};
}

// Radius beyond which the P = 0 weight is below e^{-80}; K_P - K_P(0) ≤ 0 covers P ≠ 0.
double weight_radius(const PolaronModel& model, const ModelConstants& consts, const Setup& s,
                     const QuadratureSpec& quad) {
  double r = 12.0 / std::sqrt(s.alpha * consts.lambda_c);
  for (int it = 0; it < 60; ++it) {
    const Transforms tr(model, s.omega, r, 16, 1, quad);
    const double lw = -0.25 * s.m * s.omega * r * r + s.alpha * tr.dJ(r);
    if (lw < -80.0) return r;
    r *= 1.5;
  }
  throw PolaronError(ErrorCode::QuadratureBudgetExceeded, "trial-state weight does not decay");
}

struct TensorState {
  WeightMeasure w;
  Sums sums;
  long nodes = 0;
};

TensorState tensor_state(const PolaronModel& model, const Setup& s, double r_max,
                         const QuadratureSpec& quad, const TrialSpec& spec, int level) {
  TensorState st;
  WeightMeasure& w = st.w;
  w.d = s.d;
  w.alpha = s.alpha;
  w.P = s.P;
  w.omega = s.omega;
  w.r_max = r_max;
  w.radial = composite_gauss_legendre(spec.radial_panels * level, spec.radial_order, 0.0, r_max);
  w.angular = angular_rule(s.d, s.d == 1 ? 2 : spec.angular_points * level);

  const Transforms tr(model, s.omega, r_max, spec.momentum_order, level, quad);
  const std::size_t nr = w.radial.size();
  const std::size_t nt = w.angular.size();
  const long cost = static_cast<long>(nr) * static_cast<long>(tr.size() + nt);
  if (cost > spec.node_budget) {
    std::ostringstream os;
    os << "tensor grid needs " << cost << " evaluations, budget " << spec.node_budget;
    throw PolaronError(ErrorCode::QuadratureBudgetExceeded, os.str());
  }
  st.nodes = static_cast<long>(nr * nt);

  const double pm = s.P / s.M;
  w.J0 = tr.J0();
  w.K0 = pm * pm * tr.K0();
  w.F0 = s.alpha * w.J0 + w.K0 / s.alpha;
  w.J.resize(nr);
  w.K.resize(nr * nt);
  w.A.resize(nr * nt);
  w.mass.resize(nr * nt);

  for (std::size_t i = 0; i < nr; ++i) {
    const double r = w.radial.nodes[i];
    const Radial rv = tr.at(r);
    w.J[i] = w.J0 + rv.dJ;
    const double radial_weight = w.radial.weights[i] * std::pow(r, s.d - 1);
    for (std::size_t j = 0; j < nt; ++j) {
      const double t = w.angular.nodes[j];
      const Point pt = evaluate(s, rv, r, t);
      const std::size_t k = w.index(i, j);
      w.K[k] = w.K0 + pm * pm * (rv.ka + t * t * rv.kb);
      w.A[k] = -2.0 * pm * t * rv.a;
      const double mass = radial_weight * w.angular.weights[j] * std::exp(pt.log_weight);
      w.mass[k] = mass;
      st.sums.add(mass, r, pt);
    }
  }
  w.Z0 = st.sums.z;
  w.I = std::pow(model.m * s.omega / (4.0 * std::numbers::pi), 0.5 * s.d) * w.Z0;
  for (double& x : w.mass) x /= w.Z0;
  w.moments.resize(9);
  for (int r = 0; r <= 8; ++r) w.moments[r] = st.sums.rk[r] / st.sums.z;
  return st;
}

// |A(x)| ≤ c_A |P| |x|³ from |sin z - z| ≤ |z|³/6.
double c_A(const PolaronModel& model, const ModelConstants& consts, const QuadratureSpec& quad) {
  return radial_integral(model, 4, 3, quad).value / (3.0 * consts.m_pek);
}

void fill_norm(TrialStateReport& rep, double P, double c, double m6) {
  rep.c_A = c;
  const double x = 0.5 * c * c * P * P * m6;
  rep.norm_bound = x < 1.0 ? 1.0 / (1.0 - x) : std::numeric_limits<double>::infinity();
}

TrialStateReport tensor_energy(const PolaronModel& model, const ModelConstants& consts, const Setup& s,
                               const QuadratureSpec& quad, const TrialSpec& spec) {
  const double r_max = weight_radius(model, consts, s, quad);
  const TensorState coarse = tensor_state(model, s, r_max, quad, spec, spec.refine);
  Terms t = terms_from(s, coarse.sums);
  TrialStateReport rep;
  rep.method = TrialMethod::TensorQuadrature;
  rep.nodes = coarse.nodes;
  double m6 = coarse.w.moments[6];
  double err = 0.0;
  if (spec.estimate_error) {
    const TensorState fine = tensor_state(model, s, r_max, quad, spec, 2 * spec.refine);
    const Terms tf = terms_from(s, fine.sums);
    err = std::abs(tf.kinetic - t.kinetic) + std::abs(tf.field - t.field) +
          std::abs(tf.interaction - t.interaction);
    t = tf;
    rep.nodes = fine.nodes;
    m6 = fine.w.moments[6];
  }
  // Rounding floor of the cancelling sums.
  const double scale = std::abs(t.kinetic) + std::abs(t.field) + std::abs(t.interaction);
  rep.quadrature_error = std::max(err, 1e-12 * scale);
  rep.kinetic_term = t.kinetic;
  rep.field_term = t.field;
  rep.interaction_term = t.interaction;
  rep.cos_mean = t.cos_mean;
  fill_norm(rep, s.P, c_A(model, consts, quad), m6);
  return rep;
}

// Monte Carlo over x with a defensive Gaussian mixture: a core matched to
// exp(-(αλ + mω/4)|x|²) and a tail matched to exp(-mω|x|²/4), so the
// importance ratio stays bounded.
TrialStateReport monte_carlo_energy(const PolaronModel& model, const ModelConstants& consts, const Setup& s,
                                    const QuadratureSpec& quad, const TrialSpec& spec) {
  using Spline = boost::math::interpolators::cardinal_cubic_b_spline<double>;
  const double mw = s.m * s.omega;
  const double var_core = 1.0 / (2.0 * (s.alpha * consts.lambda_c + 0.25 * mw));
  const double var_tail = 2.0 / mw;
  const double tail_share = 0.05;
  const double r_tab = std::max(weight_radius(model, consts, s, quad), std::sqrt(200.0 / mw));

  const Transforms tr(model, s.omega, r_tab, spec.momentum_order, spec.refine, quad);
  const int n_tab = std::max(4097, static_cast<int>(std::ceil(8.0 * model.cutoff(quad) * r_tab)) + 1);
  const double h = r_tab / (n_tab - 1);
  std::array<std::vector<double>, 10> tab;
  for (auto& v : tab) v.resize(n_tab);
  for (int i = 0; i < n_tab; ++i) {
    const Radial rv = tr.at(i * h);
    const std::array<double, 10> vals{rv.dJ, rv.ka, rv.kb, rv.a, rv.g, rv.fa, rv.fb, rv.fs, rv.vc, rv.vs};
    for (int k = 0; k < 10; ++k) tab[k][i] = vals[k];
  }
  std::vector<Spline> splines;
  for (int k = 0; k < 10; ++k) {
    // Even transforms have zero slope at the origin.
    const bool odd = k == 3 || k == 7 || k == 9;
    const double left = odd ? std::numeric_limits<double>::quiet_NaN() : 0.0;
    splines.emplace_back(tab[k].begin(), tab[k].end(), 0.0, h, left);
  }

  const int d = s.d;
  const double log_norm_core = -0.5 * d * std::log(2.0 * std::numbers::pi * var_core);
  const double log_norm_tail = -0.5 * d * std::log(2.0 * std::numbers::pi * var_tail);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;

  const long n = std::max<long>(spec.mc_samples * spec.refine, 1000);
  const int batches = 20;
  std::vector<Sums> batch(batches);
  Sums total;
  for (long k = 0; k < n; ++k) {
    const double sd = std::sqrt(uniform(rng) < tail_share ? var_tail : var_core);
    double r2 = 0.0;
    double z = 0.0;
    for (int c = 0; c < d; ++c) {
      const double x = sd * normal(rng);
      r2 += x * x;
      z = x;
    }
    const double r = std::sqrt(r2);
    if (r >= r_tab || r == 0.0) continue;
    const double t = d == 1 ? (z > 0 ? 1.0 : -1.0) : z / r;
    Radial rv{splines[0](r), splines[1](r), splines[2](r), splines[3](r), splines[4](r),
              splines[5](r), splines[6](r), splines[7](r), splines[8](r), splines[9](r)};
    const Point pt = evaluate(s, rv, r, t);
    const double lq_core = std::log1p(-tail_share) + log_norm_core - 0.5 * r2 / var_core;
    const double lq_tail = std::log(tail_share) + log_norm_tail - 0.5 * r2 / var_tail;
    const double lq = std::max(lq_core, lq_tail) + std::log1p(std::exp(-std::abs(lq_core - lq_tail)));
    const double ratio = std::exp(pt.log_weight - lq);
    batch[k % batches].add(ratio, r, pt);
    total.add(ratio, r, pt);
  }

  const Terms t = terms_from(s, total);
  double mean = 0.0;
  double sq = 0.0;
  for (const Sums& b : batch) {
    const double e = terms_from(s, b).energy();
    mean += e / batches;
    sq += e * e / batches;
  }
  const double stderr_ = std::sqrt(std::max(0.0, sq - mean * mean) / (batches - 1));

  TrialStateReport rep;
  rep.method = TrialMethod::MonteCarlo;
  rep.samples = n;
  rep.seed = spec.seed;
  rep.kinetic_term = t.kinetic;
  rep.field_term = t.field;
  rep.interaction_term = t.interaction;
  rep.cos_mean = t.cos_mean;
  rep.quadrature_error = 3.0 * stderr_;
  fill_norm(rep, s.P, c_A(model, consts, quad), total.rk[6] / total.z);
  return rep;
}

}  // namespace

WeightMeasure build_weight(const PolaronModel& model, const ModelConstants& consts, double alpha, double P,
                           const QuadratureSpec& quad, const TrialSpec& spec) {
  TrialSpec relaxed = spec;
  relaxed.enforce_cap = false;
  const Setup s = make_setup(model, consts, alpha, P, relaxed);
  const double r_max = weight_radius(model, consts, s, quad);
  return tensor_state(model, s, r_max, quad, spec, spec.refine).w;
}

double weight_moments(const WeightMeasure& w, int r) {
  if (r < 0 || r > 8) throw PolaronError(ErrorCode::InvalidArgument, "weight_moments: r must lie in [0, 8]");
  return w.moments.at(r);
}

TrialStateReport variational_energy(const PolaronModel& model, const ModelConstants& consts, double alpha,
                                    double P, const QuadratureSpec& quad, const TrialSpec& spec) {
  const Setup s = make_setup(model, consts, alpha, P, spec);
  TrialStateReport rep = spec.method == TrialMethod::MonteCarlo ? monte_carlo_energy(model, consts, s, quad, spec)
                                                                : tensor_energy(model, consts, s, quad, spec);
  rep.alpha = alpha;
  rep.P = P;
  rep.omega = s.omega;
  rep.norm_ratio = 1.0 / rep.cos_mean;
  rep.energy = rep.kinetic_term + rep.field_term + rep.interaction_term;
  return rep;
}

LemmaReport lemma_constants(const PolaronModel& model, const ModelConstants& consts, const QuadratureSpec& quad,
                            double eps_fraction) {
  if (!(eps_fraction > 0.0 && eps_fraction < 1.0)) {
    throw PolaronError(ErrorCode::InvalidArgument, "lemma_constants: eps_fraction must lie in (0, 1)");
  }
  LemmaReport rep;
  rep.d = model.d;
  rep.lambda = consts.lambda_c;
  rep.theta = consts.theta_c;
  rep.mu = consts.mu_c;
  rep.eps_tilde = eps_fraction * rep.lambda;
  rep.delta = std::sqrt(rep.eps_tilde / rep.theta);

  const double decay = model.v.decay_scale();
  rep.grid_max = 1e3 * decay;
  const double near_max = std::max(50.0 * decay, 2.0 * rep.delta);
  rep.xi = std::numeric_limits<double>::infinity();
  auto visit = [&](double r, double dj) {
    if (-dj < rep.xi) {
      rep.xi = -dj;
      rep.xi_radius = r;
    }
  };
  // Uniform grid near the origin, then geometric out to the grid end where J has decayed.
  {
    const Transforms tr(model, 1.0, near_max, 16, 1, quad);
    const double step = std::min(rep.delta, decay) / 32.0;
    for (double r = rep.delta; r <= near_max; r += step) visit(r, tr.dJ(r));
  }
  double J0 = 0.0;
  for (double r = near_max; r <= rep.grid_max * 1.0000001; r *= 1.02) {
    const Transforms tr(model, 1.0, r, 16, 1, quad);
    J0 = tr.J0();
    const double dj = tr.dJ(r);
    visit(r, dj);
    rep.tail_J = std::max(rep.tail_J, std::abs(J0 + dj));
  }
  if (!(rep.xi > 0.0) || !std::isfinite(rep.xi)) {
    std::ostringstream os;
    os << "grid infimum of J(0) - J(x) over |x| > delta is " << rep.xi << " at |x| = " << rep.xi_radius;
    throw PolaronError(ErrorCode::XiNotResolved, os.str());
  }
  return rep;
}

std::pair<double, double> lemma_bounds(const LemmaReport& lemma, const ModelConstants& consts, double alpha,
                                       double P, int r) {
  const int d = lemma.d;
  const double s = 0.5 * (r + d);
  // ∫|u|^r e^{-u²} du over R^d.
  const double c_r = std::pow(std::numbers::pi, 0.5 * d) * std::tgamma(s) / std::tgamma(0.5 * d);
  const double quarter = 0.25 * consts.m * consts.omega_at(alpha);
  const double lower = c_r * std::pow(alpha * lemma.lambda + P * P * lemma.mu / alpha + quarter, -s);
  const double upper = c_r * (std::pow(alpha * (lemma.lambda - lemma.eps_tilde) + quarter, -s) +
                              std::exp(-alpha * lemma.xi) * std::pow(quarter, -s));
  return {lower, upper};
}

}  // namespace polaron
