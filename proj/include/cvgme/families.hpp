#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/minima.hpp>

#include "cvgme/errors.hpp"
#include "cvgme/fock.hpp"
#include "cvgme/gaussian_ops.hpp"
#include "cvgme/numerics.hpp"
#include "cvgme/phase_space.hpp"

namespace cvgme {

enum class FamilyTag { W, Cat, Dicke2, Noon3, Psi1, Psi2, Psi4, Psi5 };

struct FamilySpec {
  FamilyTag tag = FamilyTag::W;
  int m = 3;  // mode count for W, Cat, Dicke2; photon number N for Noon3
  cplx gamma{};
  double eta = 0.0;

  static FamilySpec w(int modes, double eta = 0.0) { return make(FamilyTag::W, modes, {}, eta); }
  static FamilySpec cat(int modes, cplx gamma, double eta = 0.0) {
    return make(FamilyTag::Cat, modes, gamma, eta);
  }
  static FamilySpec dicke2(int modes) { return make(FamilyTag::Dicke2, modes, {}, 0.0); }
  static FamilySpec noon3(int n) { return make(FamilyTag::Noon3, n, {}, 0.0); }
  static FamilySpec psi1() { return make(FamilyTag::Psi1, 3, {}, 0.0); }
  static FamilySpec psi2() { return make(FamilyTag::Psi2, 3, {}, 0.0); }
  static FamilySpec psi4() { return make(FamilyTag::Psi4, 4, {}, 0.0); }
  static FamilySpec psi5() { return make(FamilyTag::Psi5, 5, {}, 0.0); }

  int modes() const {
    switch (tag) {
      case FamilyTag::W:
      case FamilyTag::Cat:
      case FamilyTag::Dicke2:
        return m;
      case FamilyTag::Noon3:
      case FamilyTag::Psi1:
      case FamilyTag::Psi2:
        return 3;
      case FamilyTag::Psi4:
        return 4;
      case FamilyTag::Psi5:
        return 5;
    }
    return m;
  }

  std::string name() const {
    std::ostringstream os;
    os.precision(12);
    switch (tag) {
      case FamilyTag::W:
        os << "w:M=" << m << ",eta=" << eta;
        break;
      case FamilyTag::Cat:
        os << "cat:M=" << m << ",gamma=" << gamma.real();
        if (gamma.imag() != 0.0) os << ",gamma_im=" << gamma.imag();
        os << ",eta=" << eta;
        break;
      case FamilyTag::Dicke2:
        os << "dicke2:M=" << m;
        break;
      case FamilyTag::Noon3:
        os << "noon3:N=" << m;
        break;
      case FamilyTag::Psi1:
        os << "psi1";
        break;
      case FamilyTag::Psi2:
        os << "psi2";
        break;
      case FamilyTag::Psi4:
        os << "psi4";
        break;
      case FamilyTag::Psi5:
        os << "psi5";
        break;
    }
    return os.str();
  }

 private:
  static FamilySpec make(FamilyTag t, int m, cplx g, double eta) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("loss parameter must lie in [0, 1]");
    if ((t == FamilyTag::W || t == FamilyTag::Cat || t == FamilyTag::Dicke2) && m < 2)
      throw DomainError("family needs at least 2 modes");
    if (t == FamilyTag::Noon3 && m < 1) throw DomainError("N00N photon number must be >= 1");
    if (!std::isfinite(g.real()) || !std::isfinite(g.imag())) throw DomainError("non-finite cat amplitude");
    FamilySpec s;
    s.tag = t;
    s.m = m;
    s.gamma = g;
    s.eta = eta;
    return s;
  }
};

// Parses e.g. "w:M=3,eta=0.1", "cat:M=3,gamma=1.0", "noon3:N=4", "psi1", "dicke2:M=4".
inline FamilySpec parse_family(const std::string& text) {
  const auto colon = text.find(':');
  const std::string tag = text.substr(0, colon);
  std::map<std::string, double> kv;
  if (colon != std::string::npos) {
    std::stringstream ss(text.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw DomainError("malformed family parameter '" + item + "'");
      try {
        kv[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
      } catch (const std::exception&) {
        throw DomainError("malformed family parameter '" + item + "'");
      }
    }
  }
  auto get = [&](const std::string& k, double def) {
    auto it = kv.find(k);
    return it == kv.end() ? def : it->second;
  };
  auto need = [&](const std::string& k) {
    auto it = kv.find(k);
    if (it == kv.end()) throw DomainError("family '" + tag + "' needs parameter " + k);
    return it->second;
  };
  if (tag == "w") return FamilySpec::w(static_cast<int>(need("M")), get("eta", 0.0));
  if (tag == "cat")
    return FamilySpec::cat(static_cast<int>(need("M")), {need("gamma"), get("gamma_im", 0.0)},
                           get("eta", 0.0));
  if (tag == "dicke2") return FamilySpec::dicke2(static_cast<int>(need("M")));
  if (tag == "noon3") return FamilySpec::noon3(static_cast<int>(need("N")));
  if (tag == "psi1") return FamilySpec::psi1();
  if (tag == "psi2") return FamilySpec::psi2();
  if (tag == "psi4") return FamilySpec::psi4();
  if (tag == "psi5") return FamilySpec::psi5();
  throw DomainError("unknown family '" + tag + "'");
}

struct Ancilla {
  enum class Kind { Vacuum, Fock, Squeezed };
  Kind kind = Kind::Vacuum;
  int n = 0;
  double s = 1.0;

  static Ancilla vacuum() { return {}; }
  static Ancilla fock(int n) {
    if (n < 0) throw DomainError("Fock ancilla needs n >= 0");
    return {Kind::Fock, n, 1.0};
  }
  static Ancilla squeezed(double s) {
    if (!(s > 0.0)) throw DomainError("squeezing parameter must be positive");
    return {Kind::Squeezed, 0, s};
  }

  // Equal to the vacuum state (fock(0) or s = 1)
  bool is_vacuum() const {
    return kind == Kind::Vacuum || (kind == Kind::Fock && n == 0) || (kind == Kind::Squeezed && s == 1.0);
  }

  std::string name() const {
    std::ostringstream os;
    os.precision(12);
    if (kind == Kind::Vacuum) os << "vacuum";
    if (kind == Kind::Fock) os << "fock(" << n << ")";
    if (kind == Kind::Squeezed) os << "squeezed(" << s << ")";
    return os.str();
  }
};

struct KernelSpec {
  std::vector<Ancilla> ancillas;

  static KernelSpec uniform(Ancilla a, int count) { return {std::vector<Ancilla>(std::max(count, 0), a)}; }
  static KernelSpec vacuum(int count) { return uniform(Ancilla::vacuum(), count); }
  static KernelSpec fock(int n, int count) { return uniform(Ancilla::fock(n), count); }
  static KernelSpec squeezed(double s, int count) { return uniform(Ancilla::squeezed(s), count); }

  int size() const { return static_cast<int>(ancillas.size()); }

  bool all_vacuum() const {
    return std::all_of(ancillas.begin(), ancillas.end(), [](const Ancilla& a) { return a.is_vacuum(); });
  }

  bool all_fock(int n) const {
    return std::all_of(ancillas.begin(), ancillas.end(), [n](const Ancilla& a) {
      return (a.kind == Ancilla::Kind::Fock && a.n == n) || (n == 0 && a.is_vacuum());
    });
  }

  std::string name() const {
    std::string s = "[";
    for (std::size_t i = 0; i < ancillas.size(); ++i) s += (i ? "," : "") + ancillas[i].name();
    return s + "]";
  }
};

// Parses "vacuum", "fock1", "fock:2", "squeezed:0.535".
inline Ancilla parse_ancilla(const std::string& text) {
  if (text == "vacuum") return Ancilla::vacuum();
  try {
    if (text.rfind("fock:", 0) == 0) return Ancilla::fock(std::stoi(text.substr(5)));
    if (text.rfind("fock", 0) == 0) return Ancilla::fock(std::stoi(text.substr(4)));
    if (text.rfind("squeezed:", 0) == 0) return Ancilla::squeezed(std::stod(text.substr(9)));
  } catch (const std::logic_error&) {
  }
  throw DomainError("unknown ancilla '" + text + "'");
}

namespace detail {

inline AmplitudeMap symmetrized(const OccupationVector& occ, double weight) {
  OccupationVector p(occ);
  std::sort(p.begin(), p.end());
  std::vector<OccupationVector> perms;
  do perms.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  AmplitudeMap out;
  for (auto& q : perms) out[q] += weight / std::sqrt(static_cast<double>(perms.size()));
  return out;
}

inline void accumulate(AmplitudeMap& into, const AmplitudeMap& from, cplx c = 1.0) {
  for (const auto& [n, a] : from) into[n] += c * a;
}

inline OccupationVector unit(int modes, std::initializer_list<std::pair<int, int>> entries) {
  OccupationVector n(modes, 0);
  for (auto [m, k] : entries) n[m] = k;
  return n;
}

// (|G>^M + s|-G>^M) truncated to total photon number <= cutoff.
inline PureState cat_branch(int modes, cplx gamma, int sign, int cutoff) {
  std::vector<cplx> c(cutoff + 1);
  const double pref = std::exp(-0.5 * std::norm(gamma));
  cplx pw{1.0};
  for (int n = 0; n <= cutoff; ++n) {
    c[n] = pref * pw / std::exp(0.5 * std::lgamma(n + 1.0));
    pw *= gamma;
  }
  AmplitudeMap out;
  OccupationVector n(modes, 0);
  int tot = 0;
  while (true) {
    if ((sign > 0) == (tot % 2 == 0)) {
      cplx a = 2.0;
      for (int k : n) a *= c[k];
      out.emplace(n, a);
    }
    int m = 0;
    while (m < modes && tot == cutoff) {
      tot -= n[m];
      n[m++] = 0;
      if (m < modes && tot < cutoff) break;
    }
    if (m == modes) break;
    ++n[m];
    ++tot;
    if (out.size() > (std::size_t{1} << 22)) throw ResourceError("cat expansion exceeds the oracle budget");
  }
  return normalize(PureState(modes, cutoff, std::move(out)));
}

}  // namespace detail

inline MixedState family_fock_expansion(const FamilySpec& spec, int cutoff = -1) {
  const double r2 = std::sqrt(2.0), r3 = std::sqrt(3.0), s23 = std::sqrt(23.0);
  const int M = spec.modes();
  auto fit = [&](int needed) {
    if (cutoff >= 0 && cutoff < needed)
      throw DomainError("cutoff " + std::to_string(cutoff) + " below the family's photon number " +
                        std::to_string(needed));
    return std::max(cutoff, needed);
  };
  switch (spec.tag) {
    case FamilyTag::W: {
      const int c = fit(1);
      AmplitudeMap amps;
      for (int m = 0; m < M; ++m) amps[detail::unit(M, {{m, 1}})] = 1.0 / std::sqrt(double(M));
      PureState w(M, c, std::move(amps));
      if (spec.eta == 0.0) return w;
      if (spec.eta == 1.0) return vacuum(M, c);
      return MixedState({Branch{1.0 - spec.eta, w}, Branch{spec.eta, vacuum(M, c)}});
    }
    case FamilyTag::Cat: {
      const double g2 = std::norm(spec.gamma);
      if (g2 == 0.0) throw DomainError("cat amplitude must be nonzero");
      const int c = cutoff >= 0 ? cutoff : coherent_cutoff(std::sqrt(double(M)) * std::abs(spec.gamma));
      if (spec.eta == 0.0) return detail::cat_branch(M, spec.gamma, +1, c);
      const cplx gl = std::sqrt(1.0 - spec.eta) * spec.gamma;
      const double coh = std::exp(-2.0 * M * spec.eta * g2);
      const double ov = std::exp(-2.0 * M * (1.0 - spec.eta) * g2);
      const double den = 2.0 * (1.0 + std::exp(-2.0 * M * g2));
      const double pp = (1.0 + coh) * (1.0 + ov) / den;
      const double pm = (1.0 - coh) * (1.0 - ov) / den;
      if (pm < 1e-15 || gl == cplx{}) return detail::cat_branch(M, gl == cplx{} ? spec.gamma : gl, +1, c);
      return MixedState({Branch{pp, detail::cat_branch(M, gl, +1, c)},
                         Branch{1.0 - pp, detail::cat_branch(M, gl, -1, c)}});
    }
    case FamilyTag::Dicke2: {
      const int c = fit(1);
      AmplitudeMap amps;
      const double a = std::sqrt(2.0 / M / (M - 1));
      for (int i = 0; i < M; ++i)
        for (int j = i + 1; j < M; ++j) amps[detail::unit(M, {{i, 1}, {j, 1}})] = a;
      return PureState(M, c, std::move(amps));
    }
    case FamilyTag::Noon3: {
      const int N = spec.m;
      const int c = fit(N);
      AmplitudeMap amps;
      for (int m = 0; m < 3; ++m) amps[detail::unit(3, {{m, N}})] = 1.0 / r3;
      return PureState(3, c, std::move(amps));
    }
    case FamilyTag::Psi1: {
      const int c = fit(2);
      AmplitudeMap a;
      detail::accumulate(a, detail::symmetrized({1, 0, 0}, 1.0), (3.0 + s23) / (8.0 * r2));
      detail::accumulate(a, detail::symmetrized({1, 1, 0}, 1.0), r3 / 4.0);
      a[{0, 1, 1}] += (s23 - 3.0) / 8.0;
      a[{2, 0, 0}] += (s23 - 1.0) / (8.0 * r2);
      a[{0, 2, 0}] += 1.0 / (4.0 * r2);
      a[{0, 0, 2}] += 1.0 / (4.0 * r2);
      return PureState(3, c, std::move(a));
    }
    case FamilyTag::Psi2: {
      const int c = fit(3);
      const double r6 = std::sqrt(6.0);
      AmplitudeMap a;
      a[{3, 0, 0}] += 1.0 / (3.0 * r2);
      detail::accumulate(a, detail::symmetrized({1, 1, 0}, 1.0), 1.0 / r2);
      a[{1, 2, 0}] += -1.0 / (2.0 * r6);
      a[{1, 0, 2}] += -1.0 / (2.0 * r6);
      a[{2, 0, 0}] += 1.0 / (2.0 * r3);
      a[{0, 2, 0}] += 1.0 / (2.0 * r3);
      a[{0, 0, 2}] += 1.0 / (2.0 * r3);
      a[{0, 1, 2}] += r3 / (6.0 * r2);
      a[{0, 2, 1}] += r3 / (6.0 * r2);
      a[{0, 3, 0}] += -1.0 / (6.0 * r2);
      a[{0, 0, 3}] += -1.0 / (6.0 * r2);
      return PureState(3, c, std::move(a));
    }
    case FamilyTag::Psi4: {
      const int c = fit(2);
      AmplitudeMap a;
      detail::accumulate(a, detail::symmetrized({2, 1, 0, 0}, 1.0 / r2));
      detail::accumulate(a, detail::symmetrized({1, 1, 1, 0}, 1.0 / r2));
      return PureState(4, c, std::move(a));
    }
    case FamilyTag::Psi5: {
      const int c = fit(2);
      AmplitudeMap a;
      detail::accumulate(a, detail::symmetrized({2, 1, 1, 0, 0}, 1.0 / r2));
      detail::accumulate(a, detail::symmetrized({1, 1, 1, 1, 0}, 1.0 / r2));
      return PureState(5, c, std::move(a));
    }
  }
  throw UnsupportedError("unknown family");
}

// Wigner function at alpha * (1, ..., 1).
inline double family_wigner_slice(const FamilySpec& spec, cplx alpha) {
  const double pi = std::numbers::pi;
  const double x = std::norm(alpha);
  const int M = spec.modes();
  const double pref = std::pow(2.0 / pi, M) * std::exp(-2.0 * M * x);
  switch (spec.tag) {
    case FamilyTag::W:
      return pref * ((1.0 - spec.eta) * 4.0 * M * x + 2.0 * spec.eta - 1.0);
    case FamilyTag::Cat: {
      const double g2 = std::norm(spec.gamma);
      const cplx ag = alpha * std::conj(spec.gamma);
      const double k = 4.0 * M * std::sqrt(1.0 - spec.eta);
      return pref / (1.0 + std::exp(-2.0 * M * g2)) *
             (std::exp(-2.0 * M * g2 * (1.0 - spec.eta)) * std::cosh(k * ag.real()) +
              std::exp(-2.0 * M * g2 * spec.eta) * std::cos(k * ag.imag()));
    }
    case FamilyTag::Dicke2:
      return pref * (1.0 + 8.0 * (M - 1) * x * (M * x - 1.0));
    case FamilyTag::Psi1: {
      const double s23 = std::sqrt(23.0), A = 16.0 + 3.0 * s23;
      return std::exp(-6.0 * x) / (16.0 * pi * pi * pi) *
             (A * (12.0 * x - 1.0) * (12.0 * x - 1.0) +
              8.0 * std::sqrt(6.0) * alpha.real() * A * (6.0 * x - 1.0) + 48.0 - 15.0 * s23);
    }
    case FamilyTag::Psi2:
      return 4.0 * std::exp(-6.0 * x) / (pi * pi * pi) * (1.0 - 30.0 * x + 108.0 * x * x);
    default:
      throw UnsupportedError("no slice closed form for " + spec.name());
  }
}

inline SliceFunction family_slice_function(const FamilySpec& spec) {
  family_wigner_slice(spec, 0.0);
  return [spec](cplx a) { return family_wigner_slice(spec, a); };
}

// Upper bound on (pi/2)^(M-1) |W(alpha 1)| at |alpha| = rho.
inline double family_slice_envelope(const FamilySpec& spec, double rho) {
  const double pi = std::numbers::pi;
  const double x = rho * rho;
  const int M = spec.modes();
  switch (spec.tag) {
    case FamilyTag::W:
      return 2.0 / pi * std::exp(-2.0 * M * x) * (4.0 * M * x + 1.0);
    case FamilyTag::Cat: {
      const double k = 4.0 * M * std::sqrt(1.0 - spec.eta) * std::abs(spec.gamma);
      return 2.0 / pi * (std::exp(-2.0 * M * x + k * rho) + std::exp(-2.0 * M * x));
    }
    case FamilyTag::Dicke2:
      return 2.0 / pi * std::exp(-2.0 * M * x) * (1.0 + 8.0 * (M - 1) * x * (M * x + 1.0));
    case FamilyTag::Psi1: {
      const double s23 = std::sqrt(23.0), A = 16.0 + 3.0 * s23;
      return std::exp(-6.0 * x) / (64.0 * pi) *
             (A * (12.0 * x + 1.0) * (12.0 * x + 1.0) + 8.0 * std::sqrt(6.0) * rho * A * (6.0 * x + 1.0) +
              std::abs(48.0 - 15.0 * s23));
    }
    case FamilyTag::Psi2:
      return std::exp(-6.0 * x) / pi * (1.0 + 30.0 * x + 108.0 * x * x);
    default:
      throw UnsupportedError("no slice envelope for " + spec.name());
  }
}

inline double family_tail_radius(const FamilySpec& spec, double tol = 1e-6) {
  return tail_radius([&](double rho) { return family_slice_envelope(spec, rho); }, tol);
}

// Settings-matrix entry chi_rho(xi 1), equal to tr[rho Pi_{-M} D(xi 1)] for these families.
inline double family_c_entry(const FamilySpec& spec, cplx xi) {
  const double x = std::norm(xi);
  const int M = spec.modes();
  switch (spec.tag) {
    case FamilyTag::W:
      return std::exp(-0.5 * M * x) * (1.0 - M * (1.0 - spec.eta) * x);
    case FamilyTag::Cat: {
      const double g2 = std::norm(spec.gamma);
      const cplx dg = xi * std::conj(spec.gamma);
      const double k = 2.0 * M * std::sqrt(1.0 - spec.eta);
      return std::exp(-0.5 * M * x) / (1.0 + std::exp(-2.0 * M * g2)) *
             (std::cos(k * dg.imag()) + std::exp(-2.0 * M * g2) * std::cosh(k * dg.real()));
    }
    default:
      throw UnsupportedError("no settings-matrix closed form for " + spec.name());
  }
}

inline double ancilla_characteristic(const Ancilla& a, cplx xi) {
  const double x = std::norm(xi);
  switch (a.kind) {
    case Ancilla::Kind::Vacuum:
      return std::exp(-0.5 * x);
    case Ancilla::Kind::Fock:
      return std::assoc_laguerre(static_cast<unsigned>(a.n), 0u, x) * std::exp(-0.5 * x);
    case Ancilla::Kind::Squeezed:
      return std::exp(-0.5 * a.s * a.s * xi.real() * xi.real()) *
             std::exp(-0.5 * xi.imag() * xi.imag() / (a.s * a.s));
  }
  return 0.0;
}

inline double kernel_c_entry(const KernelSpec& kernel, cplx xi) {
  double v = 1.0;
  for (const auto& a : kernel.ancillas) v *= ancilla_characteristic(a, xi);
  return v;
}

// Single-mode ancilla in the Fock basis; squeezed vacuum uses
// (1/sqrt(cosh r)) sum_n (-tanh r)^n sqrt((2n)!)/(2^n n!) |2n>, r = ln s.
inline PureState ancilla_state(const Ancilla& a, int cutoff = -1) {
  switch (a.kind) {
    case Ancilla::Kind::Vacuum:
      return vacuum(1, std::max(cutoff, 0));
    case Ancilla::Kind::Fock:
      return fock_state({a.n}, std::max(cutoff, a.n));
    case Ancilla::Kind::Squeezed: {
      const double r = std::log(a.s), t = std::tanh(r);
      int c = cutoff;
      if (c < 0) {
        c = 0;
        while (std::pow(std::abs(t), c + 2) > 1e-9 && c < 200) c += 2;
      }
      AmplitudeMap amps;
      for (int n = 0; 2 * n <= c; ++n)
        amps[{2 * n}] = std::pow(-t, n) *
                        std::exp(0.5 * std::lgamma(2.0 * n + 1) - n * std::log(2.0) - std::lgamma(n + 1.0)) /
                        std::sqrt(std::cosh(r));
      return normalize(PureState(1, c, std::move(amps)));
    }
  }
  throw UnsupportedError("unknown ancilla");
}

inline double psi4_smoothed_origin() {
  return -2.0 * (11.0 * std::sqrt(6.0) - 4.0) / (81.0 * std::numbers::pi);
}

inline double psi5_smoothed_origin() {
  return -(139.0 * std::sqrt(3.0) - 144.0) / (512.0 * std::numbers::pi);
}

// Smoothed centre-of-mass Wigner function for the tabulated (family, kernel) pairs.
inline double family_smoothed_wigner(const FamilySpec& spec, const KernelSpec& kernel, cplx alpha) {
  const double pi = std::numbers::pi;
  const double x = std::norm(alpha);
  const int M = spec.modes();
  if (kernel.size() != M - 2) throw DomainError("kernel needs exactly M - 2 ancillas");
  const double e3 = std::exp(-1.5 * x);
  auto unsupported = [&]() {
    return UnsupportedError("no smoothed closed form for " + spec.name() + " with kernel " + kernel.name() +
                            "; use the Fock-oracle witness_c path");
  };
  switch (spec.tag) {
    case FamilyTag::W: {
      if (!kernel.all_vacuum()) throw unsupported();
      const double k = M / (M - 1.0);
      return 4.0 * std::exp(-k * x) / (pi * (M - 1)) *
             (M * M * (1.0 - spec.eta) * x / (2.0 * (M - 1)) + (M * spec.eta - 1.0) / 2.0);
    }
    case FamilyTag::Dicke2:
      if (M != 3) throw unsupported();
      if (kernel.all_fock(1)) return e3 / (32.0 * pi) * (81.0 * x * x * x - 234.0 * x * x + 216.0 * x - 16.0);
      if (kernel.all_vacuum()) return e3 / (24.0 * pi) * (8.0 + (9.0 * x - 4.0) * (9.0 * x - 4.0));
      throw unsupported();
    case FamilyTag::Psi1: {
      if (!kernel.all_vacuum()) throw unsupported();
      const double s23 = std::sqrt(23.0), A = 16.0 + 3.0 * s23;
      return e3 / (1024.0 * pi) *
             (896.0 - 216.0 * s23 + 81.0 * x * x * A + 12.0 * std::sqrt(2.0) * alpha.real() * A * (9.0 * x - 4.0));
    }
    case FamilyTag::Psi2:
      if (!kernel.all_vacuum()) throw unsupported();
      return e3 / (64.0 * pi) * (243.0 * x * x - 144.0 * x + 8.0);
    case FamilyTag::Noon3: {
      const int N = spec.m;
      const int matched = (N % 2 == 0) ? 1 : 0;
      if (x == 0.0) {
        if (kernel.all_fock(matched))
          return -std::pow(2.0, -N) / pi * ((N % 2 == 1) ? 2.0 : N - 3.0);
        if (kernel.all_vacuum()) {
          const double s = (N % 2 == 0) ? 1.0 : -1.0;
          return s * (2.0 + s) / (std::pow(2.0, N - 1) * pi);
        }
        throw unsupported();
      }
      if (!kernel.all_fock(matched)) throw unsupported();
      const double x2 = x * x, x3 = x2 * x, x4 = x3 * x, x5 = x4 * x;
      switch (N) {
        case 2:
          return e3 / (64.0 * pi) * (16.0 + 264.0 * x - 234.0 * x2 + 81.0 * x3);
        case 3:
          return e3 / (64.0 * pi) * (-16.0 + 216.0 * x - 54.0 * x2 + 27.0 * x3);
        case 4:
          return e3 / (4096.0 * pi) *
                 (-256.0 + 16512.0 * x - 21312.0 * x2 + 12384.0 * x3 - 1998.0 * x4 + 243.0 * x5);
        case 5:
          return e3 / (20480.0 * pi) *
                 (-1280.0 + 28800.0 * x - 14400.0 * x2 + 21600.0 * x3 - 1350.0 * x4 + 243.0 * x5);
        default:
          throw unsupported();
      }
    }
    case FamilyTag::Psi4:
      if (x != 0.0 || !kernel.all_fock(1)) throw unsupported();
      return psi4_smoothed_origin();
    case FamilyTag::Psi5:
      if (x != 0.0 || !kernel.all_fock(1)) throw unsupported();
      return psi5_smoothed_origin();
    default:
      throw unsupported();
  }
}

// Per-shot value tr[D(b1) rho D(b1)^dag Pi_{+M}] for vacuum-interference families.
inline double family_shot_value(const FamilySpec& spec, cplx beta) {
  if (spec.tag != FamilyTag::W && spec.tag != FamilyTag::Cat)
    throw UnsupportedError("no per-shot closed form for " + spec.name());
  return std::pow(std::numbers::pi / 2.0, spec.modes()) * family_wigner_slice(spec, -beta);
}

inline double v2d_closed_form(const FamilySpec& spec) {
  const int M = spec.modes();
  const double e = std::numbers::e;
  if (spec.tag == FamilyTag::W && spec.eta == 0.0) return 4.0 / (M * std::sqrt(e)) - 1.0 / M;
  if (spec.tag == FamilyTag::Dicke2) {
    const double q = std::sqrt((M - 2.0) / (2.0 * (M - 1.0)));
    return 1.0 / M - 16.0 * (M - 1) / (e * M * M) * std::sinh(q) +
           8.0 * std::sqrt(2.0 * (M - 2) * (M - 1)) / (e * M * M) * std::cosh(q);
  }
  throw UnsupportedError("no absolute-volume closed form for " + spec.name() + "; use numeric integration");
}

namespace detail {

// 2 int_0^umax e^{-c u} |p(u)| du with p given by ascending coefficients.
inline double radial_abs_volume(double c, const std::vector<double>& p, double umax, double scale) {
  auto poly = [&](double u) {
    double v = 0.0;
    for (std::size_t i = p.size(); i-- > 0;) v = v * u + p[i];
    return v;
  };
  std::vector<double> roots;
  if (p.size() == 2 && p[1] != 0.0) roots.push_back(-p[0] / p[1]);
  if (p.size() == 3 && p[2] != 0.0) {
    const double d = p[1] * p[1] - 4.0 * p[2] * p[0];
    if (d >= 0.0) {
      roots.push_back((-p[1] - std::sqrt(d)) / (2.0 * p[2]));
      roots.push_back((-p[1] + std::sqrt(d)) / (2.0 * p[2]));
    }
  }
  auto f = [&](double u) { return std::exp(-c * u) * std::abs(poly(u)); };
  const double hi = std::min(umax, 60.0 / c);
  return scale * integrate_piecewise(f, 0.0, hi, roots, 1e-11);
}

// int_0^{2 pi} |P + Q cos t| dt
inline double abs_cos_integral(double P, double Q) {
  const double pi = std::numbers::pi;
  if (std::abs(P) >= std::abs(Q)) return 2.0 * pi * std::abs(P);
  const double t0 = std::acos(-P / Q);
  const double s = (P + Q) > 0.0 ? 1.0 : -1.0;
  return 2.0 * s * (2.0 * (P * t0 + Q * std::sin(t0)) - P * pi);
}

}  // namespace detail

// Full-slice absolute volume of a lossy cat: analytic Gaussian part plus
// quadrature over the negative lobes.
inline double cat_v2d(int M, double gamma_abs, double eta) {
  const double pi = std::numbers::pi;
  const double g2 = gamma_abs * gamma_abs;
  const double c = 2.0 * M;
  const double k = 4.0 * M * std::sqrt(1.0 - eta) * gamma_abs;
  const double a = std::exp(-2.0 * M * g2 * (1.0 - eta));
  const double b = std::exp(-2.0 * M * g2 * eta);
  const double nrm = 1.0 + std::exp(-2.0 * M * g2);
  const double total = pi / c * (a * std::exp(k * k / (4.0 * c)) + b * std::exp(-k * k / (4.0 * c)));
  if (!(b > a) || k == 0.0) return 2.0 / pi * total / nrm;
  const double x0 = std::acosh(b / a) / k;
  const double ymax = std::sqrt(45.0 / c);
  auto inner = [&](double X) {
    const double t = a / b * std::cosh(k * X);
    if (t >= 1.0) return 0.0;
    const double phi = std::acos(-t);
    const int jmax = static_cast<int>(k * ymax / (2.0 * pi)) + 2;
    double res = 0.0;
    for (int j = -jmax; j <= jmax; ++j) {
      const double lo = (phi + 2.0 * pi * j) / k, hi = (2.0 * pi - phi + 2.0 * pi * j) / k;
      if (hi < -ymax || lo > ymax) continue;
      auto g = [&](double y) { return std::exp(-c * y * y) * (-a * std::cosh(k * X) - b * std::cos(k * y)); };
      res += boost::math::quadrature::gauss<double, 30>::integrate(g, lo, hi);
    }
    return std::exp(-c * X * X) * res;
  };
  const double neg = 2.0 * integrate_1d(inner, 0.0, x0, 1e-11);
  return 2.0 / pi * (total + 2.0 * neg) / nrm;
}

// Absolute Wigner volume along the diagonal slice over the disc |alpha| <= r.
inline double family_v2d_numeric(const FamilySpec& spec,
                                 double r = std::numeric_limits<double>::infinity()) {
  const int M = spec.modes();
  const double umax = r * r;
  switch (spec.tag) {
    case FamilyTag::W:
      return detail::radial_abs_volume(2.0 * M, {2.0 * spec.eta - 1.0, (1.0 - spec.eta) * 4.0 * M}, umax, 2.0);
    case FamilyTag::Dicke2:
      return detail::radial_abs_volume(2.0 * M, {1.0, -8.0 * (M - 1.0), 8.0 * (M - 1.0) * M}, umax, 2.0);
    case FamilyTag::Psi2:
      return detail::radial_abs_volume(6.0, {1.0, -30.0, 108.0}, umax, 1.0);
    case FamilyTag::Psi1: {
      const double pi = std::numbers::pi;
      const double s23 = std::sqrt(23.0), A = 16.0 + 3.0 * s23;
      auto f = [&](double rho) {
        const double x = rho * rho;
        const double e = std::exp(-6.0 * x) / (64.0 * pi);
        const double P = e * (A * (12.0 * x - 1.0) * (12.0 * x - 1.0) + 48.0 - 15.0 * s23);
        const double Q = e * 8.0 * std::sqrt(6.0) * rho * A * (6.0 * x - 1.0);
        return rho * detail::abs_cos_integral(P, Q);
      };
      return integrate_1d(f, 0.0, std::min(r, 4.0), 1e-11);
    }
    case FamilyTag::Cat:
      if (std::isfinite(r)) throw UnsupportedError("cat volumes are computed over the full slice only");
      return cat_v2d(M, std::abs(spec.gamma), spec.eta);
    default:
      throw UnsupportedError("no slice volume for " + spec.name());
  }
}

inline double gme_volume_threshold(int M) { return 1.0 / (2.0 * std::sqrt(M - 1.0)); }

inline double family_violation(const FamilySpec& spec) {
  return family_v2d_numeric(spec) - gme_volume_threshold(spec.modes());
}

// Largest loss keeping the full-slice volume above threshold; 0 if the lossless state fails.
inline double eta_max(const std::function<FamilySpec(double)>& family, double tol = 1e-7) {
  auto ok = [&](double eta) { return family_violation(family(eta)) > 0.0; };
  if (!ok(0.0)) return 0.0;
  if (ok(1.0)) return 1.0;
  return scanned_bisect(ok, 0.0, 1.0, tol, 11);
}

inline double w_eta_max(int M, double tol = 1e-7) {
  return eta_max([M](double eta) { return FamilySpec::w(M, eta); }, tol);
}

inline double cat_eta_max(int M, double gamma, double tol = 1e-7) {
  return eta_max([M, gamma](double eta) { return FamilySpec::cat(M, gamma, eta); }, tol);
}

// Smallest disc radius whose slice volume exceeds threshold; NaN if none below r_hi.
inline double volume_rmin(const FamilySpec& spec, double r_hi = 5.0, double tol = 1e-7) {
  const double thr = gme_volume_threshold(spec.modes());
  auto ok = [&](double r) { return r > 0.0 && family_v2d_numeric(spec, r) > thr; };
  if (!ok(r_hi)) return std::numeric_limits<double>::quiet_NaN();
  return scanned_bisect(ok, 0.0, r_hi, tol, 26);
}

struct ScalarOptimum {
  double x;
  double value;
};

// Maximizes f on a uniform grid over [lo, hi], then refines around the best node.
template <class F>
ScalarOptimum grid_brent_maximize(F&& f, double lo, double hi, int nodes) {
  const double h = (hi - lo) / (nodes - 1);
  int best = 0;
  double bv = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < nodes; ++i) {
    const double v = f(lo + i * h);
    if (v > bv) {
      bv = v;
      best = i;
    }
  }
  const double a = std::max(lo, lo + (best - 1) * h), b = std::min(hi, lo + (best + 1) * h);
  std::uintmax_t iters = 200;
  auto r = boost::math::tools::brent_find_minima([&](double x) { return -f(x); }, a, b, 40, iters);
  if (-r.second >= bv) return {r.first, -r.second};
  return {lo + best * h, bv};
}

// Cat size maximizing the lossless violation over [lo, hi].
inline ScalarOptimum cat_best_violation(int M, double lo = 0.05, double hi = 2.0) {
  return grid_brent_maximize([M](double g) { return family_violation(FamilySpec::cat(M, g)); }, lo, hi, 40);
}

// Cat size maximizing the tolerable loss.
inline ScalarOptimum cat_most_robust(int M, double lo = 0.3, double hi = 1.5) {
  return grid_brent_maximize([M](double g) { return cat_eta_max(M, g, 1e-9); }, lo, hi, 25);
}

}  // namespace cvgme
