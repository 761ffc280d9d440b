#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "cvgme/errors.hpp"
#include "cvgme/fock.hpp"

namespace cvgme {

struct OracleBudget {
  int max_photons = 8;
  std::size_t max_dimension = std::size_t{1} << 22;
};

// <m|D(beta)|n> via associated Laguerre polynomials.
inline cplx displacement_matrix_element(int m, int n, cplx beta) {
  const double x = std::norm(beta);
  const double g = std::exp(-0.5 * x);
  if (m >= n) {
    double r = std::exp(0.5 * (std::lgamma(n + 1.0) - std::lgamma(m + 1.0)));
    return r * std::pow(beta, m - n) * g *
           std::assoc_laguerre(static_cast<unsigned>(n), static_cast<unsigned>(m - n), x);
  }
  double r = std::exp(0.5 * (std::lgamma(m + 1.0) - std::lgamma(n + 1.0)));
  return r * std::pow(-std::conj(beta), n - m) * g *
         std::assoc_laguerre(static_cast<unsigned>(m), static_cast<unsigned>(n - m), x);
}

inline Eigen::MatrixXcd displacement_matrix(int rows, int cols, cplx beta) {
  Eigen::MatrixXcd d(rows, cols);
  for (int m = 0; m < rows; ++m)
    for (int n = 0; n < cols; ++n) d(m, n) = displacement_matrix_element(m, n, beta);
  return d;
}

inline Eigen::MatrixXcd parity_matrix(int dim) {
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) p(n, n) = (n % 2 == 0) ? 1.0 : -1.0;
  return p;
}

inline int displacement_headroom(cplx beta) {
  double a = std::abs(beta);
  return static_cast<int>(std::ceil(4.0 * a * a + 6.0 * a + 6.0));
}

inline PureState apply_displacement(const PureState& s, const std::vector<cplx>& beta,
                                    const OracleBudget& budget = {}) {
  if (static_cast<int>(beta.size()) != s.modes())
    throw DimensionError("displacement vector length differs from mode count");
  int head = 0;
  for (cplx b : beta) head = std::max(head, displacement_headroom(b));
  const int in_dim = s.cutoff() + 1;
  const int out_cut = s.cutoff() + head;
  detail::Dense t = detail::to_dense(s, in_dim, budget.max_dimension);
  for (int m = 0; m < s.modes(); ++m)
    t = detail::apply_mode(t, m, displacement_matrix(out_cut + 1, in_dim, beta[m]),
                           budget.max_dimension);
  PureState out = detail::from_dense(t, out_cut, 1e-18);
  if (s.norm_squared() - out.norm_squared() > 1e-6)
    throw ResourceError("cutoff too small for displacement");
  return out;
}

class LinearOpticalUnitary {
 public:
  explicit LinearOpticalUnitary(Eigen::MatrixXcd u) : u_(std::move(u)) {
    if (u_.rows() != u_.cols() || u_.rows() < 1) throw DimensionError("unitary must be square");
    Eigen::MatrixXcd e = u_.adjoint() * u_ - Eigen::MatrixXcd::Identity(u_.rows(), u_.cols());
    if (e.cwiseAbs().maxCoeff() > 1e-12) throw DomainError("matrix is not unitary");
  }

  int modes() const { return static_cast<int>(u_.rows()); }
  const Eigen::MatrixXcd& matrix() const { return u_; }
  LinearOpticalUnitary adjoint() const { return LinearOpticalUnitary(u_.adjoint()); }

 private:
  Eigen::MatrixXcd u_;
};

// sign * (I - (2/M) J)
inline LinearOpticalUnitary beamsplitter_matrix(int modes, int sign) {
  if (modes < 2) throw DomainError("multiport beamsplitter needs at least 2 modes");
  if (sign != 1 && sign != -1) throw DomainError("sign must be +1 or -1");
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(modes, modes);
  u.array() -= 2.0 / modes;
  return LinearOpticalUnitary(static_cast<double>(sign) * u);
}

namespace detail {

using Poly = std::map<OccupationVector, cplx>;

inline Poly poly_mul(const Poly& a, const Poly& b) {
  Poly out;
  for (const auto& [ea, ca] : a) {
    for (const auto& [eb, cb] : b) {
      OccupationVector e(ea);
      for (std::size_t i = 0; i < e.size(); ++i) e[i] += eb[i];
      out[e] += ca * cb;
    }
  }
  return out;
}

inline double sqrt_factorial(int n) { return std::exp(0.5 * std::lgamma(n + 1.0)); }

}  // namespace detail

// V|n> = prod_m (sum_k U_km a_k^dag)^{n_m} / sqrt(n_m!) |0>
inline PureState apply_linear_optical(const LinearOpticalUnitary& u, const PureState& s,
                                      const OracleBudget& budget = {}) {
  const int modes = s.modes();
  if (u.modes() != modes) throw DimensionError("unitary size differs from mode count");
  const int n_tot = s.max_total_photons();
  if (n_tot > budget.max_photons)
    throw ResourceError("total photon number " + std::to_string(n_tot) +
                        " exceeds the linear-optics budget of " +
                        std::to_string(budget.max_photons));
  const Eigen::MatrixXcd& U = u.matrix();
  std::vector<std::vector<detail::Poly>> powers(modes);
  auto power = [&](int m, int k) -> const detail::Poly& {
    auto& p = powers[m];
    if (p.empty()) p.push_back({{OccupationVector(modes, 0), cplx{1.0}}});
    if (p.size() == 1) {
      detail::Poly lin;
      for (int j = 0; j < modes; ++j) {
        if (U(j, m) == cplx{}) continue;
        OccupationVector e(modes, 0);
        e[j] = 1;
        lin.emplace(std::move(e), U(j, m));
      }
      p.push_back(std::move(lin));
    }
    while (static_cast<int>(p.size()) <= k) p.push_back(detail::poly_mul(p.back(), p[1]));
    return p[k];
  };
  AmplitudeMap out;
  for (const auto& [n, amp] : s.amplitudes()) {
    if (amp == cplx{}) continue;
    double denom = 1.0;
    for (int k : n) denom *= detail::sqrt_factorial(k);
    detail::Poly poly{{OccupationVector(modes, 0), amp / denom}};
    for (int m = 0; m < modes; ++m)
      if (n[m] > 0) poly = detail::poly_mul(poly, power(m, n[m]));
    for (const auto& [e, c] : poly) {
      double f = 1.0;
      for (int k : e) f *= detail::sqrt_factorial(k);
      out[e] += c * f;
    }
  }
  return PureState(modes, std::max(s.cutoff(), n_tot), std::move(out));
}

// Per-mode Kraus operators K_k = sum_n sqrt(C(n,k) eta^k (1-eta)^{n-k}) |n-k><n|.
inline MixedState apply_amplitude_damping(const MixedState& rho, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("loss parameter must lie in [0, 1]");
  auto kraus = [eta](int n, int k) {
    double lc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    double p = std::exp(lc) * std::pow(eta, k) * std::pow(1.0 - eta, n - k);
    return std::sqrt(p);
  };
  std::vector<Branch> out;
  for (const auto& br : rho.branches()) {
    const PureState psi = normalize(br.state);
    std::map<OccupationVector, AmplitudeMap> by_loss;
    for (const auto& [n, a] : psi.amplitudes()) {
      OccupationVector k(n.size(), 0);
      while (true) {
        double f = 1.0;
        OccupationVector rest(n);
        for (std::size_t m = 0; m < n.size(); ++m) {
          f *= kraus(n[m], k[m]);
          rest[m] -= k[m];
        }
        if (f != 0.0) by_loss[k][rest] += f * a;
        std::size_t m = 0;
        while (m < n.size() && k[m] == n[m]) k[m++] = 0;
        if (m == n.size()) break;
        ++k[m];
      }
    }
    for (auto& [k, amps] : by_loss) {
      PureState st(psi.modes(), psi.cutoff(), std::move(amps));
      double w = br.weight * st.norm_squared();
      if (w < 1e-15) continue;
      out.push_back(Branch{w, normalize(st)});
    }
  }
  double total = 0.0;
  for (const auto& b : out) total += b.weight;
  for (auto& b : out) b.weight /= total;
  return MixedState(std::move(out));
}

inline double parity_expectation(const MixedState& rho) {
  double p = 0.0;
  for (const auto& b : rho.branches()) {
    double s = 0.0;
    for (const auto& [n, a] : b.state.amplitudes())
      s += (total_photons(n) % 2 == 0 ? 1.0 : -1.0) * std::norm(a);
    p += b.weight * s / b.state.norm_squared();
  }
  return p;
}

}  // namespace cvgme
