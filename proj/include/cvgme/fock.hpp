#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cvgme/errors.hpp"

namespace cvgme {

using cplx = std::complex<double>;
using OccupationVector = std::vector<int>;
using AmplitudeMap = std::map<OccupationVector, cplx>;

inline int total_photons(const OccupationVector& n) {
  return std::accumulate(n.begin(), n.end(), 0);
}

// Sparse amplitude map over a truncated multimode Fock space.
class PureState {
 public:
  PureState(int modes, int cutoff, AmplitudeMap amplitudes = {})
      : modes_(modes), cutoff_(cutoff), amps_(std::move(amplitudes)) {
    if (modes < 1) throw DimensionError("mode count must be at least 1");
    if (cutoff < 0) throw DimensionError("cutoff must be nonnegative");
    for (const auto& [n, a] : amps_) {
      if (static_cast<int>(n.size()) != modes)
        throw DimensionError("occupation vector length differs from mode count");
      for (int k : n)
        if (k < 0 || k > cutoff)
          throw DimensionError("occupation " + std::to_string(k) + " outside [0, " +
                               std::to_string(cutoff) + "]");
    }
  }

  int modes() const { return modes_; }
  int cutoff() const { return cutoff_; }
  const AmplitudeMap& amplitudes() const { return amps_; }

  cplx amplitude(const OccupationVector& n) const {
    auto it = amps_.find(n);
    return it == amps_.end() ? cplx{} : it->second;
  }

  double norm_squared() const {
    double s = 0.0;
    for (const auto& [n, a] : amps_) s += std::norm(a);
    return s;
  }

  double norm() const { return std::sqrt(norm_squared()); }

  int max_total_photons() const {
    int m = 0;
    for (const auto& [n, a] : amps_)
      if (a != cplx{}) m = std::max(m, total_photons(n));
    return m;
  }

 private:
  int modes_;
  int cutoff_;
  AmplitudeMap amps_;
};

inline PureState normalize(const PureState& s) {
  double nrm = s.norm();
  if (!(nrm > 0.0)) throw NullStateError("null state: all amplitudes vanish");
  AmplitudeMap out;
  for (const auto& [n, a] : s.amplitudes()) out.emplace(n, a / nrm);
  return PureState(s.modes(), s.cutoff(), std::move(out));
}

// Conjugate-linear in the first argument; cutoffs may differ.
inline cplx inner_product(const PureState& a, const PureState& b) {
  if (a.modes() != b.modes())
    throw DimensionError("inner product of states with different mode counts");
  const auto& small = a.amplitudes().size() <= b.amplitudes().size() ? a : b;
  const auto& large = &small == &a ? b : a;
  cplx s{};
  for (const auto& [n, x] : small.amplitudes()) {
    cplx y = large.amplitude(n);
    s += &small == &a ? std::conj(x) * y : std::conj(y) * x;
  }
  return s;
}

inline PureState tensor(const PureState& a, const PureState& b) {
  if (a.cutoff() != b.cutoff()) throw DimensionError("tensor of states with different cutoffs");
  AmplitudeMap out;
  for (const auto& [na, xa] : a.amplitudes()) {
    for (const auto& [nb, xb] : b.amplitudes()) {
      OccupationVector n(na);
      n.insert(n.end(), nb.begin(), nb.end());
      out.emplace(std::move(n), xa * xb);
    }
  }
  return PureState(a.modes() + b.modes(), a.cutoff(), std::move(out));
}

inline PureState with_cutoff(const PureState& s, int cutoff) {
  return PureState(s.modes(), cutoff, s.amplitudes());
}

inline PureState fock_state(const OccupationVector& n, int cutoff = -1) {
  int c = cutoff < 0 ? (n.empty() ? 0 : *std::max_element(n.begin(), n.end())) : cutoff;
  return PureState(static_cast<int>(n.size()), c, {{n, cplx{1.0}}});
}

inline PureState vacuum(int modes, int cutoff = 0) {
  return fock_state(OccupationVector(modes, 0), cutoff);
}

// Smallest cutoff with coherent tail sum_{n>c} |b|^{2n}/n! below tol.
inline int coherent_cutoff(double abs_beta, double tol = 1e-14) {
  double x = abs_beta * abs_beta;
  if (x == 0.0) return 0;
  for (int c = 0; c < 400; ++c) {
    double term = std::exp((c + 1) * std::log(x) - std::lgamma(c + 2.0));
    double tail = 0.0;
    for (int k = c + 1; k < c + 400; ++k) {
      tail += term;
      term *= x / (k + 1);
      if (term < 1e-30 * tail) break;
    }
    if (tail < tol) return c;
  }
  throw ResourceError("coherent amplitude too large for a truncated expansion");
}

inline PureState coherent_state(cplx beta, int cutoff = -1) {
  int c = cutoff < 0 ? coherent_cutoff(std::abs(beta)) : cutoff;
  AmplitudeMap out;
  double pref = std::exp(-0.5 * std::norm(beta));
  cplx pw{1.0};
  for (int n = 0; n <= c; ++n) {
    out.emplace(OccupationVector{n}, pref * pw / std::sqrt(std::exp(std::lgamma(n + 1.0))));
    pw *= beta;
  }
  return PureState(1, c, std::move(out));
}

// Projection onto total photon number <= n_max, renormalized.
inline PureState project_total_photons(const PureState& s, int n_max) {
  AmplitudeMap out;
  for (const auto& [n, a] : s.amplitudes())
    if (total_photons(n) <= n_max) out.emplace(n, a);
  return normalize(PureState(s.modes(), s.cutoff(), std::move(out)));
}

struct Branch {
  double weight;
  PureState state;
};

// Weighted ensemble of pure states sharing mode count and cutoff.
class MixedState {
 public:
  MixedState(const PureState& s) : branches_{Branch{1.0, s}} {}  // NOLINT

  explicit MixedState(std::vector<Branch> branches) : branches_(std::move(branches)) {
    if (branches_.empty()) throw DomainError("mixed state needs at least one branch");
    double total = 0.0;
    for (const auto& b : branches_) {
      if (!(b.weight >= 0.0)) throw DomainError("negative branch weight");
      if (b.state.modes() != branches_.front().state.modes() ||
          b.state.cutoff() != branches_.front().state.cutoff())
        throw DimensionError("branches must share mode count and cutoff");
      total += b.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) throw DomainError("branch weights must sum to 1");
  }

  int modes() const { return branches_.front().state.modes(); }
  int cutoff() const { return branches_.front().state.cutoff(); }
  const std::vector<Branch>& branches() const { return branches_; }

 private:
  std::vector<Branch> branches_;
};

inline double mean_photon_number(const MixedState& rho) {
  double e = 0.0;
  for (const auto& b : rho.branches()) {
    double s = 0.0;
    for (const auto& [n, a] : b.state.amplitudes()) s += total_photons(n) * std::norm(a);
    e += b.weight * s / b.state.norm_squared();
  }
  return e;
}

namespace detail {

// Dense row-major tensor, mode 0 most significant.
struct Dense {
  std::vector<int> dims;
  std::vector<cplx> data;
};

inline std::size_t dense_size(const std::vector<int>& dims, std::size_t limit) {
  std::size_t n = 1;
  for (int d : dims) {
    if (n > limit / static_cast<std::size_t>(d))
      throw ResourceError("dense oracle dimension exceeds budget; lower the cutoff or use the "
                          "closed-form family path");
    n *= static_cast<std::size_t>(d);
  }
  if (n > limit)
    throw ResourceError("dense oracle dimension exceeds budget; lower the cutoff or use the "
                        "closed-form family path");
  return n;
}

inline Dense to_dense(const PureState& s, int dim, std::size_t limit) {
  if (dim < s.cutoff() + 1) {
    for (const auto& [n, a] : s.amplitudes())
      for (int k : n)
        if (k >= dim) throw DimensionError("state does not fit the dense dimension");
  }
  Dense t{std::vector<int>(s.modes(), dim), {}};
  t.data.assign(dense_size(t.dims, limit), cplx{});
  for (const auto& [n, a] : s.amplitudes()) {
    std::size_t idx = 0;
    for (int k : n) idx = idx * dim + k;
    t.data[idx] += a;
  }
  return t;
}

// Contract a (rows x dims[m]) operator into mode m.
inline Dense apply_mode(const Dense& t, int m, const Eigen::MatrixXcd& op, std::size_t limit) {
  const int cols = t.dims[m];
  const int rows = static_cast<int>(op.rows());
  std::size_t outer = 1, inner = 1;
  for (int i = 0; i < m; ++i) outer *= t.dims[i];
  for (std::size_t i = m + 1; i < t.dims.size(); ++i) inner *= t.dims[i];
  Dense out{t.dims, {}};
  out.dims[m] = rows;
  out.data.assign(dense_size(out.dims, limit), cplx{});
  for (std::size_t o = 0; o < outer; ++o) {
    for (int c = 0; c < cols; ++c) {
      const cplx* src = &t.data[(o * cols + c) * inner];
      bool any = false;
      for (std::size_t i = 0; i < inner && !any; ++i) any = src[i] != cplx{};
      if (!any) continue;
      for (int r = 0; r < rows; ++r) {
        cplx a = op(r, c);
        if (a == cplx{}) continue;
        cplx* dst = &out.data[(o * rows + r) * inner];
        for (std::size_t i = 0; i < inner; ++i) dst[i] += a * src[i];
      }
    }
  }
  return out;
}

inline PureState from_dense(const Dense& t, int cutoff, double drop = 0.0) {
  AmplitudeMap out;
  const int modes = static_cast<int>(t.dims.size());
  OccupationVector n(modes, 0);
  for (std::size_t idx = 0; idx < t.data.size(); ++idx) {
    if (std::abs(t.data[idx]) > drop) {
      std::size_t r = idx;
      for (int m = modes - 1; m >= 0; --m) {
        n[m] = static_cast<int>(r % t.dims[m]);
        r /= t.dims[m];
      }
      out.emplace(n, t.data[idx]);
    }
  }
  return PureState(modes, cutoff, std::move(out));
}

}  // namespace detail

}  // namespace cvgme
