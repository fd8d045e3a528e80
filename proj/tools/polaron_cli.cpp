#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "polaron/bounds.hpp"
#include "polaron/errors.hpp"
#include "polaron/io.hpp"
#include "polaron/model.hpp"
#include "polaron/oracle.hpp"
#include "polaron/pekar.hpp"
#include "polaron/trialstate.hpp"

#ifndef POLARON_VERSION
#define POLARON_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace polaron;
using io::format_double;
using io::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct RunConfig {
  std::string model_path;
  std::string command;
  std::string alpha_text;
  std::string P_text;
  std::string output_dir = ".";
  std::uint64_t seed = 20240611;
  std::optional<double> quad_rel_tol;
  // oracle
  int modes = 32;
  int n_max = 2;
  int angular = 6;
  // trial
  std::string trial_method = "tensor";
  std::size_t samples = 200000;
  int refine = 1;
  // mass-window
  std::string window_upper = "asymptotic";
};

int worker_count() {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("POLARON_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return std::min<int>(n, 256);
  }
  return static_cast<int>(hw);
}

/// Runs task(i) for i < n on up to `threads` workers. Results are stored by index,
/// so output order never depends on scheduling.
/// The first exception thrown by a task is rethrown on the calling thread.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& task) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!first) first = std::current_exception();
      }
    }
  };
  const int t = static_cast<int>(std::min<std::size_t>(n, std::max(1, threads)));
  {
    std::vector<std::jthread> pool;
    for (int k = 1; k < t; ++k) pool.emplace_back(worker);
    worker();
  }
  if (first) std::rethrow_exception(first);
}

/// Per-point failure captured by the pool.
struct Failure {
  std::string where;
  std::string what;
  bool validation = false;
};

bool is_validation(ErrorCode c) { return c == ErrorCode::InvalidModel || c == ErrorCode::InvalidArgument; }

template <class T>
struct Slot {
  std::optional<T> value;
  std::optional<Failure> failure;
};

template <class T>
std::vector<Slot<T>> run_points(std::size_t n, int threads, const std::function<std::string(std::size_t)>& label,
                                const std::function<T(std::size_t)>& body) {
  std::vector<Slot<T>> out(n);
  parallel_for(n, threads, [&](std::size_t i) {
    try {
      out[i].value = body(i);
    } catch (const PolaronError& e) {
      out[i].failure = Failure{label(i), e.what(), is_validation(e.code())};
    } catch (const std::exception& e) {
      out[i].failure = Failure{label(i), e.what(), false};
    }
  });
  return out;
}

class Run {
 public:
  Run(RunConfig cfg, PolaronModel model) : cfg_(std::move(cfg)), model_(std::move(model)) {
    if (cfg_.quad_rel_tol) quad_.rel_tol = *cfg_.quad_rel_tol;
    threads_ = worker_count();
  }

  int execute();

  const std::vector<Failure>& failures() const { return failures_; }
  const std::map<std::string, std::string>& files() const { return files_; }
  const QuadratureSpec& quad() const { return quad_; }
  int threads() const { return threads_; }
  const std::vector<double>& alphas() const { return alphas_; }
  const std::vector<double>& momenta() const { return momenta_; }
  const PolaronModel& model() const { return model_; }

 private:
  int validate();
  int constants();
  int bounds();
  int pekar();
  int mass_window();
  int certificate();
  int trial();
  int oracle_scan();
  int envelope();

  void emit(const std::string& name, const std::string& content) {
    files_[name] = io::write_file(fs::path(cfg_.output_dir) / name, content);
  }
  template <class T>
  void collect(const std::vector<Slot<T>>& slots) {
    for (const auto& s : slots)
      if (s.failure) failures_.push_back(*s.failure);
  }
  int status() const {
    if (failures_.empty()) return kExitOk;
    const bool all_validation =
        std::all_of(failures_.begin(), failures_.end(), [](const Failure& f) { return f.validation; });
    return all_validation ? kExitValidation : kExitNumerical;
  }
  ModelConstants constants_at(double alpha) const { return compute_constants(model_.with_alpha(alpha), quad_); }
  TrialSpec trial_spec() const;
  FockTruncation truncation() const;

  RunConfig cfg_;
  PolaronModel model_;
  QuadratureSpec quad_;
  int threads_ = 1;
  std::vector<double> alphas_;
  std::vector<double> momenta_;
  std::vector<Failure> failures_;
  std::map<std::string, std::string> files_;
};

TrialSpec Run::trial_spec() const {
  TrialSpec spec;
  spec.method = cfg_.trial_method == "mc" ? TrialMethod::MonteCarlo : TrialMethod::TensorQuadrature;
  spec.mc_samples = cfg_.samples;
  spec.seed = cfg_.seed;
  spec.refine = cfg_.refine;
  return spec;
}

FockTruncation Run::truncation() const {
  if (model_.d == 1) return FockTruncation::symmetric_1d(model_, cfg_.modes, cfg_.n_max);
  if (model_.d == 3) return FockTruncation::product_3d(model_, cfg_.modes, cfg_.angular, cfg_.n_max);
  throw PolaronError(ErrorCode::InvalidArgument, "oracle mode grids exist for d = 1 and d = 3 only");
}

int Run::execute() {
  alphas_ = cfg_.alpha_text.empty() ? std::vector<double>{model_.alpha} : io::parse_list(cfg_.alpha_text);
  momenta_ = cfg_.P_text.empty() ? std::vector<double>{0.0} : io::parse_list(cfg_.P_text);
  for (double a : alphas_)
    if (!(a > 0.0)) throw PolaronError(ErrorCode::InvalidArgument, "alpha values must be positive");

  if (cfg_.command == "validate") return validate();

  const RegularityReport report = validate_regularity(model_, quad_);
  if (!report.regular()) {
    failures_.push_back({"regularity", "model is not regular: " + report.failure_summary(), true});
    return kExitValidation;
  }
  if (cfg_.command == "constants") return constants();
  if (cfg_.command == "bounds") return bounds();
  if (cfg_.command == "pekar") return pekar();
  if (cfg_.command == "mass-window") return mass_window();
  if (cfg_.command == "certificate") return certificate();
  if (cfg_.command == "trial") return trial();
  if (cfg_.command == "oracle-scan") return oracle_scan();
  if (cfg_.command == "envelope") return envelope();
  throw PolaronError(ErrorCode::InvalidArgument, "unknown command " + cfg_.command);
}

int Run::validate() {
  const RegularityReport r = validate_regularity(model_, quad_);
  json j;
  j["regular"] = r.regular();
  j["integrals"] = json::array();
  for (const auto& v : r.integrals) {
    j["integrals"].push_back(
        {{"name", v.name}, {"finite", v.finite}, {"value", v.value}, {"error", v.error}, {"detail", v.detail}});
  }
  j["massive"] = r.massive;
  j["gap"] = {{"value", r.gap.value}, {"argmin", r.gap.argmin}, {"note", r.gap.note}};
  j["superfluid"] = r.superfluid;
  j["crit_velocity"] = {{"value", r.crit_velocity.value}, {"argmin", r.crit_velocity.argmin},
                        {"note", r.crit_velocity.note}};
  j["subadditive_sampled"] = r.subadditive_sampled;
  j["subadditivity_pairs"] = r.subadditivity_pairs;
  j["subadditivity_detail"] = r.subadditivity_detail;
  emit("validation.json", j.dump(2) + "\n");
  if (!r.regular()) {
    failures_.push_back({"validate", r.failure_summary(), true});
    return kExitValidation;
  }
  std::cout << "model is regular\n";
  return kExitOk;
}

int Run::constants() {
  if (alphas_.size() != 1) throw PolaronError(ErrorCode::InvalidArgument, "constants takes a single alpha");
  const ModelConstants c = constants_at(alphas_.front());
  io::CsvTable t({"name", "value", "err_estimate"});
  for (const auto& [name, value] : c.named_values()) {
    const auto it = c.err_estimates.find(name);
    t.row({name, format_double(value), it == c.err_estimates.end() ? "" : format_double(it->second)});
  }
  emit("constants.csv", t.str());
  return kExitOk;
}

int Run::bounds() {
  const ModelConstants c = constants_at(model_.alpha);
  struct Row {
    EnergyBound upper, lower;
  };
  const std::size_t nP = momenta_.size();
  const auto rows = run_points<Row>(
      alphas_.size() * nP, threads_,
      [&](std::size_t i) {
        return "bounds alpha=" + format_double(alphas_[i / nP]) + " P=" + format_double(momenta_[i % nP]);
      },
      [&](std::size_t i) {
        const double a = alphas_[i / nP], P = momenta_[i % nP];
        if (P == 0.0) return Row{thm1_upper(c, a), thm1_lower(c, a)};
        return Row{eP_upper_asymptotic(c, a, P), eP_lower(model_, c, a, P, quad_)};
      });
  io::CsvTable t({"alpha", "P", "upper", "lower", "valid", "reason"});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].value) continue;
    const auto& r = *rows[i].value;
    const bool valid = r.upper.valid && r.lower.valid && r.lower.value <= r.upper.value;
    std::string reason = r.upper.reason;
    if (!r.lower.reason.empty()) reason += (reason.empty() ? "" : "; ") + r.lower.reason;
    t.row({format_double(alphas_[i / nP]), format_double(momenta_[i % nP]), format_double(r.upper.value),
           format_double(r.lower.value), valid ? "true" : "false", reason});
  }
  emit("bounds.csv", t.str());
  collect(rows);
  return status();
}

int Run::pekar() {
  const auto sols = run_points<PekarSolution>(
      alphas_.size(), threads_, [&](std::size_t i) { return "pekar alpha=" + format_double(alphas_[i]); },
      [&](std::size_t i) {
        const double a = alphas_[i];
        return solve_pekar(model_.with_alpha(a), constants_at(a), 2048, {}, quad_);
      });
  for (std::size_t i = 0; i < sols.size(); ++i) {
    if (!sols[i].value) continue;
    const auto& s = *sols[i].value;
    const std::string stem = "pekar_alpha_" + format_double(alphas_[i]);
    io::CsvTable t({"r", "psi"});
    for (std::size_t k = 0; k < s.psi.size(); ++k) t.row({format_double(s.grid.nodes[k]), format_double(s.psi[k])});
    emit(stem + ".csv", t.str());
    const json side = {{"energy", s.energy},           {"kinetic", s.kinetic},     {"potential", s.potential},
                       {"m_pek_alpha", s.m_pek_alpha}, {"iterations", s.iterations}, {"residual", s.residual}};
    emit(stem + ".json", side.dump(2) + "\n");
  }
  collect(sols);
  return status();
}

int Run::mass_window() {
  const ModelConstants c = constants_at(model_.alpha);
  const bool use_trial = cfg_.window_upper == "trial";
  // Window reports per α. With trial upper bounds each α also needs a Pekar energy.
  const auto reports = run_points<MomentumWindowReport>(
      alphas_.size(), 1, [&](std::size_t i) { return "mass-window alpha=" + format_double(alphas_[i]); },
      [&](std::size_t i) {
        const double a = alphas_[i];
        WindowSources src;
        if (use_trial) {
          const ModelConstants ca = constants_at(a);
          src.e_pek = solve_pekar(model_.with_alpha(a), ca, 2048, {}, quad_).energy;
          // The window also bounds E(0) from above.
          std::vector<double> points = momenta_;
          points.push_back(0.0);
          std::vector<double> upper(points.size());
          const TrialSpec spec = trial_spec();
          parallel_for(points.size(), threads_, [&](std::size_t k) {
            const auto rep = variational_energy(model_, c, a, points[k], quad_, spec);
            upper[k] = rep.energy + rep.quadrature_error;
          });
          std::map<double, double> by_P;
          for (std::size_t k = 0; k < points.size(); ++k) by_P[points[k]] = upper[k];
          src.upper = [by_P](double P) {
            const auto it = by_P.find(P);
            if (it == by_P.end()) throw PolaronError(ErrorCode::InvalidArgument, "no trial energy at this P");
            return it->second;
          };
        }
        return mass_quotient_window(model_, c, a, momenta_, src, quad_);
      });
  io::CsvTable t({"alpha", "P", "upper", "lower", "M_lower", "M_upper", "m_pek", "ratio_sqrt", "ratio_alpha",
                  "in_window", "bracket_ok", "valid", "reason"});
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (!reports[i].value) continue;
    const auto& r = *reports[i].value;
    for (const auto& e : r.entries) {
      t.row({format_double(r.alpha), format_double(e.P), format_double(e.upper.value), format_double(e.lower.value),
             format_double(e.M_lower), format_double(e.M_upper), format_double(r.m_pek), format_double(e.ratio_sqrt),
             format_double(e.ratio_alpha), e.in_window ? "true" : "false", e.bracket_ok ? "true" : "false",
             e.valid ? "true" : "false", e.reason});
    }
  }
  emit("mass_window.csv", t.str());
  collect(reports);
  return status();
}

int Run::certificate() {
  const ModelConstants c = constants_at(model_.alpha);
  io::CsvTable t({"alpha", "pf2_lower", "w_upper", "meff_lower", "lambda_star", "mu_star"});
  for (double a : alphas_) {
    const MassCertificate m = meff_divergence_certificate(c, a);
    t.row({format_double(a), format_double(m.pf2_lower), format_double(m.w_upper), format_double(m.meff_lower),
           format_double(m.lambda_star), format_double(m.mu_star)});
  }
  emit("certificate.csv", t.str());
  return kExitOk;
}

int Run::trial() {
  const ModelConstants c = constants_at(model_.alpha);
  const TrialSpec spec = trial_spec();
  const std::size_t nP = momenta_.size();
  const auto reps = run_points<TrialStateReport>(
      alphas_.size() * nP, threads_,
      [&](std::size_t i) {
        return "trial alpha=" + format_double(alphas_[i / nP]) + " P=" + format_double(momenta_[i % nP]);
      },
      [&](std::size_t i) { return variational_energy(model_, c, alphas_[i / nP], momenta_[i % nP], quad_, spec); });
  json arr = json::array();
  for (const auto& s : reps) {
    if (!s.value) continue;
    const auto& r = *s.value;
    arr.push_back({{"alpha", r.alpha},
                   {"P", r.P},
                   {"omega", r.omega},
                   {"terms", {{"kinetic", r.kinetic_term}, {"field", r.field_term}, {"interaction", r.interaction_term}}},
                   {"cos_mean", r.cos_mean},
                   {"norm_ratio", r.norm_ratio},
                   {"norm_bound", std::isfinite(r.norm_bound) ? json(r.norm_bound) : json(nullptr)},
                   {"energy", r.energy},
                   {"quadrature_error", r.quadrature_error},
                   {"method", std::string(to_string(r.method))},
                   {"nodes", r.nodes},
                   {"samples", r.samples},
                   {"seed", r.seed}});
  }
  emit("trial.json", arr.dump(2) + "\n");
  collect(reps);
  return status();
}

int Run::oracle_scan() {
  const FockTruncation trunc = truncation();
  EigSpec solver;
  // Inner matvec threads only when the pool has a single point to work on.
  solver.threads = alphas_.size() == 1 ? threads_ : 1;
  const auto scans = run_points<std::vector<SpectrumEstimate>>(
      alphas_.size(), threads_, [&](std::size_t i) { return "oracle-scan alpha=" + format_double(alphas_[i]); },
      [&](std::size_t i) { return scan_dispersion(model_, alphas_[i], momenta_, trunc, solver); });
  for (std::size_t i = 0; i < scans.size(); ++i) {
    if (!scans[i].value) continue;
    io::CsvTable t({"P", "energy", "residual", "basis_size", "n_max"});
    for (const auto& e : *scans[i].value) {
      t.row({format_double(e.P), format_double(e.ground_energy), format_double(e.residual),
             std::to_string(e.basis_size), std::to_string(e.n_max)});
    }
    emit("oracle_scan_alpha_" + format_double(alphas_[i]) + ".csv", t.str());
  }
  collect(scans);
  return status();
}

int Run::envelope() {
  const FockTruncation trunc = truncation();
  EigSpec solver;
  solver.threads = alphas_.size() == 1 ? threads_ : 1;
  struct Env {
    std::vector<SpectrumEstimate> scan;
    std::vector<std::pair<double, double>> hull;
    double e_pek = 0.0;
    double m_pek_alpha = 0.0;
  };
  const auto envs = run_points<Env>(
      alphas_.size(), threads_, [&](std::size_t i) { return "envelope alpha=" + format_double(alphas_[i]); },
      [&](std::size_t i) {
        const double a = alphas_[i];
        Env e;
        e.scan = scan_dispersion(model_, a, momenta_, trunc, solver);
        std::vector<std::pair<double, double>> samples;
        for (const auto& s : e.scan) samples.emplace_back(std::abs(s.P), s.ground_energy);
        e.hull = convex_envelope(samples);
        const auto sol = solve_pekar(model_.with_alpha(a), constants_at(a), 2048, {}, quad_);
        e.e_pek = sol.energy;
        e.m_pek_alpha = sol.m_pek_alpha;
        return e;
      });
  io::CsvTable t({"alpha", "P", "energy", "envelope", "pekar_bound", "below_bound"});
  for (std::size_t i = 0; i < envs.size(); ++i) {
    if (!envs[i].value) continue;
    const auto& e = *envs[i].value;
    for (std::size_t k = 0; k < e.scan.size(); ++k) {
      const double P = e.scan[k].P;
      const double bound = e.e_pek + P * P / (2.0 * e.m_pek_alpha);
      t.row({format_double(alphas_[i]), format_double(P), format_double(e.scan[k].ground_energy),
             format_double(e.hull[k].second), format_double(bound), e.hull[k].second <= bound ? "true" : "false"});
    }
  }
  emit("envelope.csv", t.str());
  collect(envs);
  return status();
}

json quad_json(const QuadratureSpec& q) {
  return {{"radial_points", q.radial_points}, {"r_max_multiplier", q.r_max_multiplier},
          {"angular_points", q.angular_points}, {"rel_tol", q.rel_tol}, {"abs_tol", q.abs_tol}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polaron energy bounds, trial states and Fock-space oracle"};
  RunConfig cfg;
  double quad_rel_tol = 0.0;
  app.add_option("--model", cfg.model_path, "model JSON file")->required();
  app.add_option("--command", cfg.command, "computation to run")
      ->required()
      ->check(CLI::IsMember({"validate", "constants", "bounds", "pekar", "mass-window", "certificate", "trial",
                             "oracle-scan", "envelope"}));
  app.add_option("--alpha", cfg.alpha_text, "comma-separated coupling grid (default: the model's alpha)");
  app.add_option("--P", cfg.P_text, "comma-separated momentum grid (default: 0)");
  app.add_option("--out", cfg.output_dir, "output directory");
  app.add_option("--seed", cfg.seed, "seed for Monte Carlo trial evaluations");
  auto* tol_opt = app.add_option("--quad-rel-tol", quad_rel_tol, "relative tolerance of adaptive quadrature")
                      ->check(CLI::PositiveNumber);
  app.add_option("--modes", cfg.modes, "oracle modes (d=1) or radial nodes (d=3)")->check(CLI::PositiveNumber);
  app.add_option("--nmax", cfg.n_max, "oracle boson-number cap")->check(CLI::NonNegativeNumber);
  app.add_option("--angular", cfg.angular, "oracle angular rule for d=3")->check(CLI::IsMember({6, 14, 26}));
  app.add_option("--trial-method", cfg.trial_method, "trial-state integrator")
      ->check(CLI::IsMember({"tensor", "mc"}));
  app.add_option("--samples", cfg.samples, "Monte Carlo samples")->check(CLI::PositiveNumber);
  app.add_option("--refine", cfg.refine, "trial-state grid refinement level")->check(CLI::PositiveNumber);
  app.add_option("--window-upper", cfg.window_upper, "upper bound on E(P) used by mass-window")
      ->check(CLI::IsMember({"asymptotic", "trial"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }
  if (*tol_opt) cfg.quad_rel_tol = quad_rel_tol;

  const auto t0 = std::chrono::steady_clock::now();
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec || !fs::is_directory(cfg.output_dir)) {
    std::cerr << "error: cannot create output directory " << cfg.output_dir << "\n";
    return kExitValidation;
  }

  int rc = kExitOk;
  std::vector<Failure> failures;
  std::map<std::string, std::string> files;
  json manifest;
  manifest["tool"] = "polaron_cli";
  manifest["version"] = POLARON_VERSION;
  manifest["command"] = cfg.command;
  manifest["model_path"] = cfg.model_path;
  manifest["seed"] = cfg.seed;

  std::optional<Run> run;
  try {
    run.emplace(cfg, io::load_model(cfg.model_path));
    rc = run->execute();
  } catch (const PolaronError& e) {
    failures.push_back({"run", e.what(), is_validation(e.code())});
    rc = is_validation(e.code()) ? kExitValidation : kExitNumerical;
  } catch (const std::exception& e) {
    failures.push_back({"run", e.what(), false});
    rc = kExitNumerical;
  }
  if (run) {
    failures.insert(failures.begin(), run->failures().begin(), run->failures().end());
    files = run->files();
    manifest["model"] = io::model_to_json(run->model());
    manifest["alpha_grid"] = run->alphas();
    manifest["P_grid"] = run->momenta();
    manifest["quadrature"] = quad_json(run->quad());
    manifest["threads"] = run->threads();
  }
  manifest["options"] = {{"modes", cfg.modes},       {"n_max", cfg.n_max},     {"angular", cfg.angular},
                         {"trial_method", cfg.trial_method}, {"samples", cfg.samples}, {"refine", cfg.refine},
                         {"window_upper", cfg.window_upper}};

  std::ostringstream log;
  for (const auto& f : failures) {
    log << f.where << ": " << f.what << "\n";
    std::cerr << "error: " << f.where << ": " << f.what << "\n";
  }
  try {
    files["errors.log"] = io::write_file(fs::path(cfg.output_dir) / "errors.log", log.str());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }

  manifest["exit_status"] = rc;
  manifest["files"] = json::array();
  for (const auto& [name, hash] : files) manifest["files"].push_back({{"name", name}, {"fnv1a64", hash}});
  manifest["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  try {
    io::write_file(fs::path(cfg.output_dir) / "manifest.json", manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return rc;
}
