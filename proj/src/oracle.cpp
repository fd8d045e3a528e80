#include "polaron/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include <Eigen/Dense>

#include "polaron/errors.hpp"

namespace polaron {

namespace {

std::size_t multisets(std::size_t modes, int n) {
  // C(modes + n - 1, n) with saturation.
  if (n == 0) return 1;
  if (modes == 0) return 0;
  long double c = 1.0L;
  for (int i = 1; i <= n; ++i) c = c * static_cast<long double>(modes + i - 1) / i;
  if (c > static_cast<long double>(std::numeric_limits<std::size_t>::max() / 4)) {
    return std::numeric_limits<std::size_t>::max();
  }
  return static_cast<std::size_t>(std::llround(c));
}

// Lebedev rules of degree 3, 5 and 7 on the unit sphere; weights sum to 1.
std::vector<std::pair<std::array<double, 3>, double>> lebedev(int n) {
  std::vector<std::pair<std::array<double, 3>, double>> out;
  auto octahedron = [&](double w) {
    for (int axis = 0; axis < 3; ++axis) {
      for (double s : {1.0, -1.0}) {
        std::array<double, 3> k{};
        k[axis] = s;
        out.push_back({k, w});
      }
    }
  };
  auto cube = [&](double w) {
    const double c = 1.0 / std::sqrt(3.0);
    for (double x : {c, -c})
      for (double y : {c, -c})
        for (double z : {c, -c}) out.push_back({{x, y, z}, w});
  };
  auto edges = [&](double w) {
    const double c = 1.0 / std::sqrt(2.0);
    for (int skip = 0; skip < 3; ++skip) {
      for (double s1 : {c, -c}) {
        for (double s2 : {c, -c}) {
          std::array<double, 3> k{};
          const int i = (skip + 1) % 3;
          const int j = (skip + 2) % 3;
          k[std::min(i, j)] = s1;
          k[std::max(i, j)] = s2;
          out.push_back({k, w});
        }
      }
    }
  };
  switch (n) {
    case 6:
      octahedron(1.0 / 6.0);
      break;
    case 14:
      octahedron(1.0 / 15.0);
      cube(3.0 / 40.0);
      break;
    case 26:
      octahedron(1.0 / 21.0);
      edges(4.0 / 105.0);
      cube(9.0 / 280.0);
      break;
    default:
      throw PolaronError(ErrorCode::InvalidArgument, "Lebedev rule must have 6, 14 or 26 points");
  }
  return out;
}

double norm(const std::vector<double>& x) { return std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0)); }

}  // namespace

FockTruncation FockTruncation::symmetric_1d(const PolaronModel& model, int n_modes, int n_max, double k_max_factor) {
  if (model.d != 1) throw PolaronError(ErrorCode::InvalidArgument, "symmetric_1d needs a d = 1 model");
  if (n_modes < 2 || n_max < 0 || n_max > 4) {
    throw PolaronError(ErrorCode::InvalidArgument, "symmetric_1d: need n_modes >= 2 and 0 <= n_max <= 4");
  }
  FockTruncation t;
  t.d = 1;
  t.n_max = n_max;
  const double k_max = k_max_factor * model.v.decay_scale();
  const double h = 2.0 * k_max / (n_modes - 1);
  for (int j = 0; j < n_modes; ++j) {
    ModePoint mp;
    // Mirror the left half so the grid is exactly symmetric.
    mp.k[0] = j < n_modes / 2 ? -k_max + j * h : k_max - (n_modes - 1 - j) * h;
    if (n_modes % 2 == 1 && j == n_modes / 2) mp.k[0] = 0.0;
    mp.weight = (j == 0 || j == n_modes - 1) ? 0.5 * h : h;
    t.modes.push_back(mp);
  }
  return t;
}

FockTruncation FockTruncation::product_3d(const PolaronModel& model, int n_radial, int n_angular, int n_max,
                                          double k_max_factor) {
  if (model.d != 3) throw PolaronError(ErrorCode::InvalidArgument, "product_3d needs a d = 3 model");
  if (n_radial < 1 || n_max < 0 || n_max > 4) {
    throw PolaronError(ErrorCode::InvalidArgument, "product_3d: need n_radial >= 1 and 0 <= n_max <= 4");
  }
  FockTruncation t;
  t.d = 3;
  t.n_max = n_max;
  const Rule radial = gauss_legendre(n_radial, 0.0, k_max_factor * model.v.decay_scale());
  const auto sphere = lebedev(n_angular);
  for (std::size_t i = 0; i < radial.size(); ++i) {
    const double r = radial.nodes[i];
    for (const auto& [dir, w] : sphere) {
      ModePoint mp;
      for (int c = 0; c < 3; ++c) mp.k[c] = r * dir[c];
      mp.weight = radial.weights[i] * r * r * w * sphere_area(3);
      t.modes.push_back(mp);
    }
  }
  return t;
}

std::size_t FockTruncation::basis_size() const {
  std::size_t total = 0;
  for (int n = 0; n <= n_max; ++n) {
    const std::size_t c = multisets(modes.size(), n);
    if (c == std::numeric_limits<std::size_t>::max() || total > std::numeric_limits<std::size_t>::max() - c) {
      return std::numeric_limits<std::size_t>::max();
    }
    total += c;
  }
  return total;
}

FockBasis::FockBasis(std::size_t n_modes, int n_max) : modes_(n_modes), n_max_(n_max), width_(n_max + 2) {
  const std::size_t rows = n_modes + n_max + 1;
  binom_.assign(rows * width_, 0);
  for (std::size_t n = 0; n < rows; ++n) {
    binom_[n * width_] = 1;
    for (std::size_t k = 1; k < width_ && k <= n; ++k) {
      binom_[n * width_ + k] = binom_[(n - 1) * width_ + k - 1] + (k < n ? binom_[(n - 1) * width_ + k] : 0);
    }
  }
  offsets_.assign(1, 0);
  for (int n = 0; n <= n_max; ++n) offsets_.push_back(offsets_.back() + multisets(n_modes, n));
}

std::size_t FockBasis::count(std::size_t n, std::size_t k) const {
  if (k > n) return 0;
  return binom_[n * width_ + k];
}

// A multiset a_0 ≤ … ≤ a_{n-1} maps to the combination b_i = a_i + i of
// {0, …, N-1}, N = modes + n - 1, preserving lexicographic order.
std::size_t FockBasis::rank(const std::vector<std::uint32_t>& sorted) const {
  const std::size_t n = sorted.size();
  const std::size_t N = modes_ + n - 1;
  std::size_t r = offsets_[n];
  long prev = -1;
  for (std::size_t i = 0; i < n; ++i) {
    const long b = static_cast<long>(sorted[i] + i);
    const std::size_t k = n - i;
    // Σ_{x = prev+1}^{b-1} C(N-1-x, k-1) by the hockey-stick identity.
    r += count(N - prev - 1, k) - count(N - b, k);
    prev = b;
  }
  return r;
}

std::vector<std::uint32_t> FockBasis::state(std::size_t index) const {
  int n = 0;
  while (index >= offsets_[n + 1]) ++n;
  std::size_t r = index - offsets_[n];
  const std::size_t N = modes_ + n - 1;
  std::vector<std::uint32_t> out(n);
  std::size_t x = 0;
  for (int i = 0; i < n; ++i) {
    for (;; ++x) {
      const std::size_t c = count(N - 1 - x, n - 1 - i);
      if (r < c) break;
      r -= c;
    }
    out[i] = static_cast<std::uint32_t>(x - i);
    ++x;
  }
  return out;
}

SparseOperator::SparseOperator(const PolaronModel& model, double alpha, double P, const FockTruncation& trunc,
                               std::size_t csr_limit)
    : basis_(trunc.modes.size(), trunc.n_max), d_(trunc.d), modes_(trunc.modes) {
  for (const ModePoint& mp : modes_) {
    if (!(mp.weight > 0.0)) throw PolaronError(ErrorCode::InvalidArgument, "mode weights must be positive");
    double k = 0.0;
    for (double c : mp.k) k += c * c;
    coupling_.push_back(std::sqrt(alpha * mp.weight) * model.v(std::sqrt(k)));
  }
  const std::size_t n = basis_.size();
  diag_.resize(n);
  std::vector<double> eps(modes_.size());
  for (std::size_t j = 0; j < modes_.size(); ++j) {
    double k = 0.0;
    for (double c : modes_[j].k) k += c * c;
    eps[j] = model.eps(std::sqrt(k));
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::array<double, 3> total{P, 0.0, 0.0};
    double field = 0.0;
    for (std::uint32_t j : basis_.state(i)) {
      for (int c = 0; c < 3; ++c) total[c] -= modes_[j].k[c];
      field += eps[j];
    }
    const double q2 = total[0] * total[0] + total[1] * total[1] + total[2] * total[2];
    diag_[i] = q2 / (2.0 * model.m) + field;
  }
  if (n <= csr_limit) {
    row_ptr_.push_back(0);
    std::vector<std::pair<std::size_t, double>> entries;
    for (std::size_t i = 0; i < n; ++i) {
      row(i, entries);
      for (const auto& [c, v] : entries) {
        cols_.push_back(c);
        vals_.push_back(v);
      }
      row_ptr_.push_back(cols_.size());
    }
  }
}

void SparseOperator::row(std::size_t i, std::vector<std::pair<std::size_t, double>>& out) const {
  out.clear();
  const std::vector<std::uint32_t> s = basis_.state(i);
  std::vector<std::uint32_t> t;
  // Annihilate one boson from each occupied mode.
  for (std::size_t p = 0; p < s.size(); ++p) {
    if (p > 0 && s[p] == s[p - 1]) continue;
    const std::uint32_t j = s[p];
    const auto occ = std::count(s.begin(), s.end(), j);
    t = s;
    t.erase(t.begin() + static_cast<long>(p));
    out.push_back({basis_.rank(t), coupling_[j] * std::sqrt(static_cast<double>(occ))});
  }
  if (static_cast<int>(s.size()) < basis_.n_max()) {
    for (std::uint32_t j = 0; j < modes_.size(); ++j) {
      const auto occ = std::count(s.begin(), s.end(), j);
      t = s;
      t.insert(std::upper_bound(t.begin(), t.end(), j), j);
      out.push_back({basis_.rank(t), coupling_[j] * std::sqrt(static_cast<double>(occ + 1))});
    }
  }
  std::sort(out.begin(), out.end());
}

void SparseOperator::apply(const std::vector<double>& x, std::vector<double>& y, int threads) const {
  const std::size_t n = size();
  y.assign(n, 0.0);
  auto work = [&](std::size_t lo, std::size_t hi) {
    std::vector<std::pair<std::size_t, double>> entries;
    for (std::size_t i = lo; i < hi; ++i) {
      double s = diag_[i] * x[i];
      if (stored()) {
        for (std::size_t e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e) s += vals_[e] * x[cols_[e]];
      } else {
        row(i, entries);
        for (const auto& [c, v] : entries) s += v * x[c];
      }
      y[i] = s;
    }
  };
  const std::size_t chunks = static_cast<std::size_t>(std::max(1, threads));
  if (chunks == 1 || n < 4096) {
    work(0, n);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t c = 0; c < chunks; ++c) pool.emplace_back(work, n * c / chunks, n * (c + 1) / chunks);
  for (auto& th : pool) th.join();
}

std::vector<double> SparseOperator::dense() const {
  const std::size_t n = size();
  std::vector<double> out(n * n, 0.0);
  std::vector<std::pair<std::size_t, double>> entries;
  for (std::size_t i = 0; i < n; ++i) {
    out[i * n + i] = diag_[i];
    row(i, entries);
    for (const auto& [c, v] : entries) out[i * n + c] = v;
  }
  return out;
}

SparseOperator build_fiber_hamiltonian(const PolaronModel& model, double alpha, double P,
                                       const FockTruncation& trunc) {
  const std::size_t size = trunc.basis_size();
  if (size > trunc.basis_cap) {
    std::ostringstream os;
    os << "basis of " << size << " states exceeds the cap " << trunc.basis_cap;
    throw PolaronError(ErrorCode::BasisOverflow, os.str());
  }
  return SparseOperator(model, alpha, P, trunc);
}

SpectrumEstimate ground_energy(const SparseOperator& H, const EigSpec& solver) {
  const std::size_t n = H.size();
  SpectrumEstimate est;
  est.basis_size = n;
  est.n_max = H.basis().n_max();
  est.n_modes = H.basis().n_modes();

  std::vector<double> x(n), y;
  if (n <= 400) {
    const std::vector<double> d = H.dense();
    Eigen::Map<const Eigen::MatrixXd> M(d.data(), static_cast<long>(n), static_cast<long>(n));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    est.ground_energy = es.eigenvalues()(0);
    for (std::size_t i = 0; i < n; ++i) x[i] = es.eigenvectors()(static_cast<long>(i), 0);
    H.apply(x, y, solver.threads);
    for (std::size_t i = 0; i < n; ++i) y[i] -= est.ground_energy * x[i];
    est.residual = norm(y);
    return est;
  }

  // Start from the vacuum plus a small deterministic spread.
  for (std::size_t i = 0; i < n; ++i) x[i] = 1e-3 * std::sin(1.0 + static_cast<double>(i));
  x[0] += 1.0;
  const double x0 = norm(x);
  for (double& v : x) v /= x0;

  const int krylov = static_cast<int>(std::min<std::size_t>(
      static_cast<std::size_t>(solver.krylov), std::max<std::size_t>(12, 32'000'000 / n)));
  std::vector<std::vector<double>> V;
  for (int restart = 0; restart < solver.max_restarts; ++restart) {
    V.assign(1, x);
    std::vector<double> a, b;
    std::vector<double> w;
    for (int j = 0; j < krylov; ++j) {
      H.apply(V[j], w, solver.threads);
      ++est.iterations;
      a.push_back(std::inner_product(w.begin(), w.end(), V[j].begin(), 0.0));
      // Two passes of classical Gram–Schmidt against the whole basis.
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& v : V) {
          const double c = std::inner_product(w.begin(), w.end(), v.begin(), 0.0);
          for (std::size_t i = 0; i < n; ++i) w[i] -= c * v[i];
        }
      }
      const double beta = norm(w);
      if (beta <= 1e-14 * std::max(1.0, std::abs(a.back())) || j + 1 == krylov) {
        b.push_back(beta);
        break;
      }
      b.push_back(beta);
      for (double& v : w) v /= beta;
      V.push_back(w);
    }
    const long m = static_cast<long>(a.size());
    Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(a.data(), m);
    Eigen::VectorXd sub = m > 1 ? Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(b.data(), m - 1)) : Eigen::VectorXd();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub);
    std::fill(x.begin(), x.end(), 0.0);
    for (long i = 0; i < m; ++i) {
      const double s = es.eigenvectors()(i, 0);
      for (std::size_t k = 0; k < n; ++k) x[k] += s * V[i][k];
    }
    const double xn = norm(x);
    for (double& v : x) v /= xn;
    H.apply(x, y, solver.threads);
    const double rq = std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
    for (std::size_t i = 0; i < n; ++i) y[i] -= rq * x[i];
    est.ground_energy = rq;
    est.residual = norm(y);
    if (est.residual <= solver.tol * std::max(1.0, std::abs(rq))) return est;
  }
  std::ostringstream os;
  os.precision(12);
  os << "Lanczos stopped after " << solver.max_restarts << " restarts; best Ritz value " << est.ground_energy
     << ", residual " << est.residual;
  throw PolaronError(ErrorCode::NoConvergence, os.str());
}

SpectrumEstimate fiber_ground_energy(const PolaronModel& model, double alpha, double P, const FockTruncation& trunc,
                                     const EigSpec& solver) {
  SpectrumEstimate est;
  for (int n = 0; n <= trunc.n_max; ++n) {
    FockTruncation t = trunc;
    t.n_max = n;
    const SpectrumEstimate e = ground_energy(build_fiber_hamiltonian(model, alpha, P, t), solver);
    est.truncation_trend.push_back({n, e.ground_energy});
    if (n == trunc.n_max) {
      auto trend = std::move(est.truncation_trend);
      est = e;
      est.truncation_trend = std::move(trend);
    }
  }
  est.P = P;
  return est;
}

std::vector<SpectrumEstimate> scan_dispersion(const PolaronModel& model, double alpha,
                                              const std::vector<double>& P_grid, const FockTruncation& trunc,
                                              const EigSpec& solver) {
  std::vector<SpectrumEstimate> out;
  for (double P : P_grid) out.push_back(fiber_ground_energy(model, alpha, P, trunc, solver));
  return out;
}

}  // namespace polaron
