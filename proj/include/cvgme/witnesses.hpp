#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cvgme/errors.hpp"
#include "cvgme/families.hpp"
#include "cvgme/fock.hpp"
#include "cvgme/gaussian_ops.hpp"
#include "cvgme/numerics.hpp"
#include "cvgme/phase_space.hpp"

namespace cvgme {

inline constexpr double kGuardBand = 1e-12;

enum class Direction { Above, Below };

struct WitnessReport {
  std::string witness;
  std::string family;
  nlohmann::json params = nlohmann::json::object();
  double value = 0.0;
  double threshold = 0.0;
  Direction direction = Direction::Above;
  std::optional<double> rigorous_error;
  std::optional<double> heuristic_error;
  std::optional<double> stderr_value;
  bool rigorous = true;
  bool certified = false;
  int n_settings = 0;
  std::optional<std::uint64_t> seed;
  std::vector<cplx> xi_points;
  std::string kernel;

  // Error subtracted from the value before comparing with the threshold.
  double error_budget() const {
    if (rigorous_error) return *rigorous_error;
    if (heuristic_error) return *heuristic_error;
    if (stderr_value) return 3.0 * *stderr_value;
    return 0.0;
  }

  // Positive when the certified side of the threshold is reached.
  double margin() const {
    return direction == Direction::Above ? value - error_budget() - threshold
                                         : threshold - (value + error_budget());
  }

  void decide() { certified = margin() > kGuardBand; }
};

inline double threshold_a(int M) { return std::numbers::pi / (4.0 * std::sqrt(M - 1.0)); }
inline double threshold_b(int M) { return M / (2.0 * std::sqrt(M - 1.0)); }
inline double witness_d_factor(int M) { return std::numbers::pi * M / (4.0 * (M - 1.0)); }

inline void require_hermitian(const Eigen::MatrixXcd& a, double tol = 1e-10) {
  if (a.rows() != a.cols()) throw ContractViolation("matrix is not square");
  if (a.size() > 0 && (a - a.adjoint()).cwiseAbs().maxCoeff() > tol)
    throw ContractViolation("matrix is not Hermitian");
}

inline double trace_norm_hermitian(const Eigen::MatrixXcd& a) {
  require_hermitian(a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

inline double min_eigenvalue_hermitian(const Eigen::MatrixXcd& a) {
  require_hermitian(a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

using SettingsSet = std::vector<cplx>;
using EntryFunction = std::function<cplx(cplx)>;
using ShotFunction = std::function<double(cplx)>;

inline void validate_settings(const SettingsSet& xi) {
  if (xi.size() < 2) throw DomainError("settings set needs N >= 2 points");
  for (cplx p : xi)
    if (!std::isfinite(p.real()) || !std::isfinite(p.imag())) throw DomainError("non-finite settings point");
}

// scale * entry(xi_n - xi_n'), upper triangle evaluated and mirrored.
inline Eigen::MatrixXcd settings_matrix(const EntryFunction& entry, const SettingsSet& xi, double scale) {
  const int n = static_cast<int>(xi.size());
  Eigen::MatrixXcd c(n, n);
  const double diag = entry(0.0).real() * scale;
  for (int i = 0; i < n; ++i) {
    c(i, i) = diag;
    for (int j = i + 1; j < n; ++j) {
      const cplx v = entry(xi[i] - xi[j]) * scale;
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw DomainError("non-finite settings-matrix entry");
      c(i, j) = v;
      c(j, i) = std::conj(v);
    }
  }
  return c;
}

// Distinct differences xi_n - xi_n' (zero included, d and -d identified).
inline int count_settings(const SettingsSet& xi, double tol = 1e-6) {
  std::vector<cplx> seen{0.0};
  for (std::size_t i = 0; i < xi.size(); ++i)
    for (std::size_t j = i + 1; j < xi.size(); ++j) {
      const cplx d = xi[i] - xi[j];
      bool dup = false;
      for (cplx e : seen)
        if (std::abs(d - e) < tol || std::abs(d + e) < tol) {
          dup = true;
          break;
        }
      if (!dup) seen.push_back(d);
    }
  return static_cast<int>(seen.size());
}

struct WitnessAOptions {
  bool heuristic = true;
  int threads = 1;
};

// Integrates |(pi/2)^M W| over the grid with a per-cell discretization bound.
inline WitnessReport witness_a(const SliceFunction& slice, const GridSpec& grid, int M,
                               const WitnessAOptions& opt = {}) {
  if (M < 2) throw DomainError("witness A needs M >= 2");
  if (!grid.energy && !opt.heuristic)
    throw ConfigurationError("witness A needs an energy bound or the heuristic error path");
  const double scale = std::pow(std::numbers::pi / 2.0, M);
  auto f = [&](cplx a) { return scale * slice(a); };
  WitnessReport r;
  r.witness = "A";
  r.value = grid_abs_integral(grid, f, opt.threads);
  r.threshold = threshold_a(M);
  r.params["delta"] = grid.delta;
  r.params["radius"] = grid.radius;
  r.params["cells"] = grid.cells.size();
  r.params["v2d"] = 2.0 / std::numbers::pi * r.value;
  if (grid.energy) {
    r.params["energy"] = *grid.energy;
    r.rigorous_error = rigorous_error(grid, M, *grid.energy);
    r.rigorous = true;
  } else {
    const GridSpec fine = disc_grid(grid.delta / 2.0, grid.radius);
    r.heuristic_error = std::abs(r.value - grid_abs_integral(fine, f, opt.threads));
    r.rigorous = false;
  }
  r.decide();
  return r;
}

inline WitnessReport witness_b(const EntryFunction& entry, const SettingsSet& xi, int M) {
  validate_settings(xi);
  if (M < 2) throw DomainError("witness B needs M >= 2");
  const Eigen::MatrixXcd c = settings_matrix(entry, xi, 1.0 / xi.size());
  WitnessReport r;
  r.witness = "B";
  r.value = trace_norm_hermitian(c);
  r.threshold = threshold_b(M);
  r.n_settings = count_settings(xi);
  r.xi_points = xi;
  r.params["N"] = xi.size();
  r.decide();
  return r;
}

inline Eigen::MatrixXcd witness_e_matrix(const EntryFunction& c_entry, const SettingsSet& xi,
                                         const KernelSpec& kernel) {
  const Eigen::MatrixXcd c = settings_matrix(c_entry, xi, 1.0 / xi.size());
  const Eigen::MatrixXcd k = settings_matrix([&](cplx d) { return cplx(kernel_c_entry(kernel, d)); }, xi, 1.0);
  return c.cwiseProduct(k);
}

inline WitnessReport witness_e(const EntryFunction& c_entry, const SettingsSet& xi, const KernelSpec& kernel,
                               int M) {
  validate_settings(xi);
  if (kernel.size() != M - 2) throw DomainError("kernel needs exactly M - 2 ancillas");
  WitnessReport r;
  r.witness = "E";
  r.value = trace_norm_hermitian(witness_e_matrix(c_entry, xi, kernel));
  r.threshold = 1.0;
  r.n_settings = count_settings(xi);
  r.xi_points = xi;
  r.kernel = kernel.name();
  r.params["N"] = xi.size();
  r.decide();
  return r;
}

// (pi/2) times the smoothed Wigner function, via rho (x) ancillas and Pi_{+(2M-2)}.
inline double witness_c_value(const MixedState& rho, const std::vector<PureState>& ancillas, cplx alpha = 0.0,
                              const OracleBudget& budget = {}) {
  const int M = rho.modes();
  if (M < 2) throw DomainError("witness C needs M >= 2");
  if (static_cast<int>(ancillas.size()) != M - 2) throw DomainError("witness C needs exactly M - 2 ancillas");
  int cutoff = rho.cutoff();
  int anc_photons = 0;
  for (const auto& a : ancillas) {
    if (a.modes() != 1) throw DimensionError("ancillas must be single-mode states");
    cutoff = std::max(cutoff, a.cutoff());
    anc_photons += a.max_total_photons();
  }
  int photons = 0;
  for (const auto& b : rho.branches()) photons = std::max(photons, b.state.max_total_photons());
  if (photons + anc_photons > budget.max_photons)
    throw ResourceError("witness C input carries " + std::to_string(photons + anc_photons) +
                        " photons, above the oracle budget of " + std::to_string(budget.max_photons) +
                        "; use the closed-form family_smoothed_wigner path");
  const int K = 2 * M - 2;
  const LinearOpticalUnitary v = beamsplitter_matrix(K, +1);
  const cplx delta = alpha * std::sqrt(double(M)) / double(K);
  double value = 0.0;
  for (const auto& b : rho.branches()) {
    PureState psi = normalize(with_cutoff(b.state, cutoff));
    for (const auto& a : ancillas) psi = tensor(psi, normalize(with_cutoff(a, cutoff)));
    const PureState image = apply_linear_optical(v, psi, budget);
    double ev;
    if (delta == cplx{}) {
      ev = inner_product(psi, image).real();
    } else {
      const int dim = std::max(psi.cutoff(), image.cutoff()) + 1;
      std::vector<Eigen::MatrixXcd> ops(K, displacement_matrix(dim, dim, 2.0 * delta));
      ev = local_expectation(psi, image, ops, budget).real();
    }
    value += b.weight * ev;
  }
  return value;
}

inline WitnessReport witness_c(const MixedState& rho, const std::vector<PureState>& ancillas, cplx alpha = 0.0,
                               const OracleBudget& budget = {}) {
  WitnessReport r;
  r.witness = "C";
  r.value = witness_c_value(rho, ancillas, alpha, budget);
  r.threshold = 0.0;
  r.direction = Direction::Below;
  r.params["alpha_re"] = alpha.real();
  r.params["alpha_im"] = alpha.imag();
  r.decide();
  return r;
}

inline WitnessReport witness_c(const FamilySpec& spec, const KernelSpec& kernel, cplx alpha = 0.0) {
  WitnessReport r;
  r.witness = "C";
  r.family = spec.name();
  r.kernel = kernel.name();
  r.value = std::numbers::pi / 2.0 * family_smoothed_wigner(spec, kernel, alpha);
  r.threshold = 0.0;
  r.direction = Direction::Below;
  r.params["alpha_re"] = alpha.real();
  r.params["alpha_im"] = alpha.imag();
  r.decide();
  return r;
}

struct RandomDisplacementScheme {
  cplx alpha{};
  Eigen::Matrix2d sigma = Eigen::Matrix2d::Identity();
  int modes = 3;

  static double min_sqrt_det(int M) { return (M - 2.0) / (4.0 * M * M); }

  // Covariance saturating the bound, sigma = (M-2)/(4M^2) I.
  static RandomDisplacementScheme minimal(cplx alpha, int M) {
    return {alpha, min_sqrt_det(M) * Eigen::Matrix2d::Identity(), M};
  }

  void validate() const {
    if (modes < 2) throw DomainError("witness D needs M >= 2");
    const double det = sigma.determinant();
    if (!(det >= 0.0) || std::sqrt(det) < min_sqrt_det(modes) - 1e-12)
      throw ContractViolation("covariance violates sqrt(det Sigma) >= (M-2)/(4M^2)");
  }

  // Sampling mean of beta.
  cplx mean() const { return -alpha / std::sqrt(double(modes)); }
};

struct WitnessDOptions {
  std::size_t batch = 4096;
  int threads = 1;
};

// Monte-Carlo mean of the per-shot observable; one RNG stream per batch,
// batches merged in index order.
inline WitnessReport witness_d(const ShotFunction& shot, const RandomDisplacementScheme& scheme,
                               std::size_t n_samples, std::uint64_t seed, const WitnessDOptions& opt = {}) {
  scheme.validate();
  if (n_samples < 1000) throw DomainError("witness D needs at least 1000 samples");
  const std::size_t batch = std::max<std::size_t>(opt.batch, 1);
  const std::size_t nb = (n_samples + batch - 1) / batch;
  struct Moments {
    double n = 0.0, mean = 0.0, m2 = 0.0;
  };
  std::vector<Moments> parts(nb);
  const cplx mu = scheme.mean();
  parallel_for(nb, opt.threads, [&](std::size_t b) {
    GaussianSampler sampler({mu.real(), mu.imag()}, scheme.sigma, stream_seed(seed, b));
    const std::size_t count = std::min(batch, n_samples - b * batch);
    Moments m;
    for (std::size_t i = 0; i < count; ++i) {
      const double x = shot(sampler.next());
      m.n += 1.0;
      const double d = x - m.mean;
      m.mean += d / m.n;
      m.m2 += d * (x - m.mean);
    }
    parts[b] = m;
  });
  Moments tot;
  for (const auto& p : parts) {
    const double n = tot.n + p.n;
    const double d = p.mean - tot.mean;
    tot.mean += d * p.n / n;
    tot.m2 += p.m2 + d * d * tot.n * p.n / n;
    tot.n = n;
  }
  WitnessReport r;
  r.witness = "D";
  r.value = tot.mean;
  r.threshold = 0.0;
  r.direction = Direction::Below;
  r.stderr_value = std::sqrt(tot.m2 / (tot.n - 1.0) / tot.n);
  r.rigorous = false;
  r.seed = seed;
  r.params["n_samples"] = n_samples;
  r.params["alpha_re"] = scheme.alpha.real();
  r.params["alpha_im"] = scheme.alpha.imag();
  r.params["sigma"] = {scheme.sigma(0, 0), scheme.sigma(0, 1), scheme.sigma(1, 1)};
  r.decide();
  return r;
}

inline WitnessReport witness_d(const FamilySpec& spec, const RandomDisplacementScheme& scheme,
                               std::size_t n_samples, std::uint64_t seed, const WitnessDOptions& opt = {}) {
  if (spec.modes() != scheme.modes) throw DimensionError("scheme and family differ in mode count");
  family_shot_value(spec, 0.0);
  WitnessReport r =
      witness_d([&](cplx b) { return family_shot_value(spec, b); }, scheme, n_samples, seed, opt);
  r.family = spec.name();
  return r;
}

inline WitnessReport witness_d(const MixedState& rho, const RandomDisplacementScheme& scheme,
                               std::size_t n_samples, std::uint64_t seed, const WitnessDOptions& opt = {},
                               const OracleBudget& budget = {}) {
  if (rho.modes() != scheme.modes) throw DimensionError("scheme and state differ in mode count");
  const ParityShotOracle oracle(rho, budget);
  return witness_d([&](cplx b) { return oracle(b); }, scheme, n_samples, seed, opt);
}

// Restarted simplex ascent of the trace norm, warmed up on -lambda_min.
inline SettingsOptimum optimize_matrix_norm(const std::function<Eigen::MatrixXcd(const SettingsSet&)>& build,
                                            int N, const OptimizerBudget& budget) {
  auto objective = [&](const std::vector<cplx>& x) { return trace_norm_hermitian(build(x)); };
  auto warmup = [&](const std::vector<cplx>& x) { return -min_eigenvalue_hermitian(build(x)); };
  return optimize_settings(objective, N, budget, warmup);
}

inline SettingsOptimum optimize_witness_b(const EntryFunction& entry, int N, const OptimizerBudget& budget) {
  if (N < 2) throw DomainError("settings set needs N >= 2 points");
  return optimize_matrix_norm([&](const SettingsSet& x) { return settings_matrix(entry, x, 1.0 / x.size()); }, N,
                              budget);
}

inline SettingsOptimum optimize_witness_e(const EntryFunction& c_entry, const KernelSpec& kernel, int N,
                                          const OptimizerBudget& budget) {
  if (N < 2) throw DomainError("settings set needs N >= 2 points");
  return optimize_matrix_norm([&](const SettingsSet& x) { return witness_e_matrix(c_entry, x, kernel); }, N,
                              budget);
}

inline EntryFunction family_entry(const FamilySpec& spec) {
  family_c_entry(spec, 0.0);
  return [spec](cplx d) { return cplx(family_c_entry(spec, d)); };
}

// tr[rho Pi_{-M} D(xi 1)] from the Fock oracle.
inline EntryFunction oracle_b_entry(const MixedState& rho, const OracleBudget& budget = {}) {
  const LinearOpticalUnitary v = beamsplitter_matrix(rho.modes(), -1);
  return [rho, v, budget](cplx d) {
    return hybrid_expectation(rho, v, std::vector<cplx>(rho.modes(), d), budget);
  };
}

// chi_rho(xi 1) from the Fock oracle.
inline EntryFunction oracle_e_entry(const MixedState& rho, const OracleBudget& budget = {}) {
  return [rho, budget](cplx d) { return characteristic_point(rho, std::vector<cplx>(rho.modes(), d), budget); };
}

// Single-mode effective state (1 - zeta)|1><1| + zeta|0><0| after the rescaling of Xi.
inline double zeta_entry(double zeta, cplx d) {
  const double x = std::norm(d);
  return std::exp(-0.5 * x) * (1.0 - (1.0 - zeta) * x);
}

inline double zeta_of_w(int M, double eta) { return (1.0 + eta) / 2.0 - (1.0 - eta) / (2.0 * (M - 1.0)); }

}  // namespace cvgme
