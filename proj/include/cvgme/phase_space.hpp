#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "cvgme/errors.hpp"
#include "cvgme/fock.hpp"
#include "cvgme/gaussian_ops.hpp"

namespace cvgme {

using SliceFunction = std::function<double(cplx)>;

// <bra| (x)_m ops[m] |ket>, both states embedded at a common cutoff.
inline cplx local_expectation(const PureState& bra, const PureState& ket,
                              const std::vector<Eigen::MatrixXcd>& ops,
                              const OracleBudget& budget = {}) {
  if (bra.modes() != ket.modes() || static_cast<int>(ops.size()) != ket.modes())
    throw DimensionError("operator list and states disagree on mode count");
  const int dim = std::max(bra.cutoff(), ket.cutoff()) + 1;
  detail::Dense t = detail::to_dense(ket, dim, budget.max_dimension);
  for (int m = 0; m < ket.modes(); ++m) {
    if (ops[m].rows() != dim || ops[m].cols() != dim)
      throw DimensionError("local operator size differs from the embedding dimension");
    t = detail::apply_mode(t, m, ops[m], budget.max_dimension);
  }
  cplx s{};
  for (const auto& [n, a] : bra.amplitudes()) {
    std::size_t idx = 0;
    for (int k : n) idx = idx * dim + k;
    s += std::conj(a) * t.data[idx];
  }
  return s;
}

inline int common_dim(const MixedState& rho) { return rho.cutoff() + 1; }

// D(a) Pi D(-a) = D(2a) Pi, evaluated inside the truncated space.
inline double displaced_parity_expectation(const MixedState& rho, const std::vector<cplx>& alpha,
                                           const OracleBudget& budget = {}) {
  if (static_cast<int>(alpha.size()) != rho.modes())
    throw DimensionError("phase-space point length differs from mode count");
  const int dim = common_dim(rho);
  std::vector<Eigen::MatrixXcd> ops;
  for (cplx a : alpha) ops.push_back(displacement_matrix(dim, dim, 2.0 * a) * parity_matrix(dim));
  double v = 0.0;
  for (const auto& b : rho.branches())
    v += b.weight * local_expectation(b.state, b.state, ops, budget).real() /
         b.state.norm_squared();
  return v;
}

inline double wigner_point(const MixedState& rho, const std::vector<cplx>& alpha,
                           const OracleBudget& budget = {}) {
  return std::pow(2.0 / std::numbers::pi, rho.modes()) *
         displaced_parity_expectation(rho, alpha, budget);
}

inline cplx characteristic_point(const MixedState& rho, const std::vector<cplx>& xi,
                                 const OracleBudget& budget = {}) {
  if (static_cast<int>(xi.size()) != rho.modes())
    throw DimensionError("phase-space point length differs from mode count");
  const int dim = common_dim(rho);
  std::vector<Eigen::MatrixXcd> ops;
  for (cplx x : xi) ops.push_back(displacement_matrix(dim, dim, x));
  cplx v{};
  for (const auto& b : rho.branches())
    v += b.weight * local_expectation(b.state, b.state, ops, budget) / b.state.norm_squared();
  return v;
}

// tr[rho V D(xi)] = <V^dag psi| D(xi) |psi>
inline cplx hybrid_expectation(const MixedState& rho, const LinearOpticalUnitary& u,
                               const std::vector<cplx>& xi, const OracleBudget& budget = {}) {
  if (static_cast<int>(xi.size()) != rho.modes())
    throw DimensionError("phase-space point length differs from mode count");
  const LinearOpticalUnitary ud = u.adjoint();
  cplx v{};
  for (const auto& b : rho.branches()) {
    PureState phi = apply_linear_optical(ud, b.state, budget);
    const int dim = std::max(phi.cutoff(), b.state.cutoff()) + 1;
    std::vector<Eigen::MatrixXcd> ops;
    for (cplx x : xi) ops.push_back(displacement_matrix(dim, dim, x));
    v += b.weight * local_expectation(phi, b.state, ops, budget) / b.state.norm_squared();
  }
  return v;
}

// Per-shot observable tr[D(b1) rho D(b1)^dag Pi_{+M}] = Re <psi| D(-2b 1) V |psi>.
class ParityShotOracle {
 public:
  explicit ParityShotOracle(const MixedState& rho, const OracleBudget& budget = {})
      : rho_(rho), budget_(budget) {
    const LinearOpticalUnitary v = beamsplitter_matrix(rho.modes(), +1);
    for (const auto& b : rho.branches()) images_.push_back(apply_linear_optical(v, b.state, budget));
  }

  double operator()(cplx beta) const {
    double s = 0.0;
    const auto& br = rho_.branches();
    for (std::size_t i = 0; i < br.size(); ++i) {
      const int dim = std::max(images_[i].cutoff(), br[i].state.cutoff()) + 1;
      std::vector<Eigen::MatrixXcd> ops(rho_.modes(), displacement_matrix(dim, dim, -2.0 * beta));
      s += br[i].weight * local_expectation(br[i].state, images_[i], ops, budget_).real() /
           br[i].state.norm_squared();
    }
    return s;
  }

 private:
  MixedState rho_;
  OracleBudget budget_;
  std::vector<PureState> images_;
};

struct Region {
  enum class Kind { Disc, Rectangle };
  Kind kind = Kind::Disc;
  cplx center{};
  double radius = 1.0;
  double x0 = -1.0, x1 = 1.0, y0 = -1.0, y1 = 1.0;

  static Region disc(cplx c, double r) {
    if (!(r > 0.0)) throw DomainError("disc radius must be positive");
    Region g;
    g.center = c;
    g.radius = r;
    return g;
  }

  static Region rectangle(double x0, double x1, double y0, double y1) {
    if (!(x1 > x0 && y1 > y0)) throw DomainError("empty rectangle");
    Region g;
    g.kind = Kind::Rectangle;
    g.x0 = x0;
    g.x1 = x1;
    g.y0 = y0;
    g.y1 = y1;
    return g;
  }

  bool contains(cplx a) const {
    if (kind == Kind::Disc) return std::abs(a - center) <= radius;
    return a.real() >= x0 && a.real() <= x1 && a.imag() >= y0 && a.imag() <= y1;
  }
};

// Points alpha y + conj(alpha) z with |y_m|^2 - |z_m|^2 = 1.
struct SliceSpec {
  std::vector<cplx> y;
  std::vector<cplx> z;
  Region region = Region::disc(0.0, 1.0);

  SliceSpec(std::vector<cplx> y_, std::vector<cplx> z_, Region r = Region::disc(0.0, 1.0))
      : y(std::move(y_)), z(std::move(z_)), region(r) {
    if (y.size() != z.size() || y.empty()) throw DimensionError("slice vectors differ in length");
    for (std::size_t m = 0; m < y.size(); ++m)
      if (std::abs(std::norm(y[m]) - std::norm(z[m]) - 1.0) > 1e-12)
        throw DomainError("slice coefficients violate |y|^2 - |z|^2 = 1");
  }

  static SliceSpec diagonal(int modes, Region r = Region::disc(0.0, 1.0)) {
    return SliceSpec(std::vector<cplx>(modes, 1.0), std::vector<cplx>(modes, 0.0), r);
  }

  int modes() const { return static_cast<int>(y.size()); }

  std::vector<cplx> point(cplx alpha) const {
    std::vector<cplx> a(y.size());
    for (std::size_t m = 0; m < y.size(); ++m) a[m] = alpha * y[m] + std::conj(alpha) * z[m];
    return a;
  }
};

inline double wigner_slice_point(const MixedState& rho, const SliceSpec& slice, cplx alpha,
                                 const OracleBudget& budget = {}) {
  if (slice.modes() != rho.modes()) throw DimensionError("slice and state differ in mode count");
  return wigner_point(rho, slice.point(alpha), budget);
}

inline SliceFunction oracle_slice_function(const MixedState& rho, const SliceSpec& slice,
                                           const OracleBudget& budget = {}) {
  return [rho, slice, budget](cplx a) { return wigner_slice_point(rho, slice, a, budget); };
}

}  // namespace cvgme
