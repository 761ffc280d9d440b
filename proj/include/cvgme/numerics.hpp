#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cvgme/errors.hpp"
#include "cvgme/fock.hpp"

namespace cvgme {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

// Uniform in (0, 1] from 53 random bits.
inline double uniform_open(std::mt19937_64& g) {
  return (static_cast<double>(g() >> 11) + 1.0) * 0x1.0p-53;
}

// Runs f(i) for i in [0, n) on up to `threads` workers.
template <class F>
void parallel_for(std::size_t n, int threads, F&& f) {
  const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) f(i);
    });
  for (auto& t : pool) t.join();
}

// Pairwise sum in fixed order.
inline double tree_sum(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  if (hi - lo <= 8) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += v[i];
    return s;
  }
  std::size_t mid = lo + (hi - lo) / 2;
  return tree_sum(v, lo, mid) + tree_sum(v, mid, hi);
}

inline double tree_sum(const std::vector<double>& v) { return v.empty() ? 0.0 : tree_sum(v, 0, v.size()); }

struct GridCell {
  int n_r;
  int n_i;
};

struct GridSpec {
  double delta;
  double radius;
  std::optional<double> energy;
  std::vector<GridCell> cells;

  cplx center(const GridCell& c) const { return {c.n_r * delta, c.n_i * delta}; }
};

// Square cells of spacing delta whose centers lie in the disc of radius r.
inline GridSpec disc_grid(double delta, double r, std::optional<double> energy = std::nullopt) {
  if (!(delta > 0.0) || !(r > 0.0)) throw DomainError("grid spacing and radius must be positive");
  if (delta > r * (1.0 + 1e-12)) throw DomainError("grid spacing exceeds the disc radius");
  if (energy && *energy < 0.0) throw DomainError("energy bound must be nonnegative");
  GridSpec g{delta, r, energy, {}};
  const int n = static_cast<int>(std::floor(r / delta * (1.0 + 1e-12)));
  const double lim = (r / delta) * (r / delta) * (1.0 + 1e-12);
  for (int a = -n; a <= n; ++a)
    for (int b = -n; b <= n; ++b)
      if (static_cast<double>(a) * a + static_cast<double>(b) * b <= lim) g.cells.push_back({a, b});
  if (g.cells.empty()) throw DomainError("empty grid");
  return g;
}

inline double rigorous_error(const GridSpec& grid, int modes, double energy) {
  const double d = grid.delta;
  const double d3 = 2.0 * d * d * d * std::sqrt(2.0 * modes * energy);
  const double d4 = 2.0 * modes * d * d * d * d;
  std::vector<double> terms;
  terms.reserve(grid.cells.size());
  for (const auto& c : grid.cells)
    terms.push_back(d3 + d4 * (1.0 + std::sqrt(2.0 * (static_cast<double>(c.n_r) * c.n_r +
                                                      static_cast<double>(c.n_i) * c.n_i))));
  return tree_sum(terms);
}

// Midpoint rule Delta^2 sum |f(center)|, chunked so the result is thread-count independent.
template <class F>
double grid_abs_integral(const GridSpec& grid, F&& f, int threads = 1) {
  constexpr std::size_t chunk = 2048;
  const std::size_t n = grid.cells.size();
  const std::size_t chunks = (n + chunk - 1) / chunk;
  std::vector<double> partial(chunks, 0.0);
  parallel_for(chunks, threads, [&](std::size_t k) {
    std::vector<double> v;
    for (std::size_t i = k * chunk; i < std::min(n, (k + 1) * chunk); ++i)
      v.push_back(std::abs(f(grid.center(grid.cells[i]))));
    partial[k] = tree_sum(v);
  });
  return grid.delta * grid.delta * tree_sum(partial);
}

template <class F>
double integrate_1d(F&& f, double a, double b, double tol = 1e-12) {
  if (a == b) return 0.0;
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, tol, &err);
}

// Integral of f over [a, b] split at the given interior breakpoints.
template <class F>
double integrate_piecewise(F&& f, double a, double b, std::vector<double> breaks, double tol = 1e-12) {
  std::vector<double> pts{a};
  std::sort(breaks.begin(), breaks.end());
  for (double x : breaks)
    if (x > a && x < b) pts.push_back(x);
  pts.push_back(b);
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) s += integrate_1d(f, pts[i], pts[i + 1], tol);
  return s;
}

// Returns the predicate boundary; predicate evaluated at both ends and at most
// ceil(log2((hi - lo) / tol)) interior points.
template <class P>
double bisect_threshold(P&& pred, double lo, double hi, double tol, int* calls = nullptr) {
  if (!(hi > lo) || !(tol > 0.0)) throw DomainError("bisection needs lo < hi and tol > 0");
  int n = 0;
  const bool plo = pred(lo);
  const bool phi = pred(hi);
  if (plo == phi) throw BracketError("predicate takes the same value at both bracket ends");
  while (hi - lo > 2.0 * tol) {
    double mid = 0.5 * (lo + hi);
    ++n;
    if (pred(mid) == plo)
      lo = mid;
    else
      hi = mid;
  }
  if (calls) *calls = n;
  return 0.5 * (lo + hi);
}

// Coarse scan confirming a single predicate change, then bisection inside it.
template <class P>
double scanned_bisect(P&& pred, double lo, double hi, double tol, int scan_points = 16) {
  if (scan_points < 2) throw DomainError("scan needs at least 2 points");
  std::vector<double> xs(scan_points);
  std::vector<char> vs(scan_points);
  for (int i = 0; i < scan_points; ++i) {
    xs[i] = lo + (hi - lo) * i / (scan_points - 1);
    vs[i] = pred(xs[i]);
  }
  int changes = 0, at = -1;
  for (int i = 1; i < scan_points; ++i)
    if (vs[i] != vs[i - 1]) {
      ++changes;
      at = i;
    }
  if (changes == 0) throw BracketError("predicate takes the same value across the scan");
  if (changes > 1) throw DomainError("predicate is not monotone across the scan");
  return bisect_threshold(pred, xs[at - 1], xs[at], tol);
}

// Smallest r with integral of envelope(rho) over |alpha| > r below tol.
template <class F>
double tail_radius(F&& envelope, double tol = 1e-6, double r_max = 50.0) {
  auto tail = [&](double r) {
    auto g = [&](double rho) { return 2.0 * std::numbers::pi * rho * envelope(rho); };
    return integrate_1d(g, r, std::numeric_limits<double>::infinity(), 1e-10);
  };
  if (tail(r_max) >= tol) throw DomainError("envelope tail does not decay within r_max");
  if (tail(0.0) < tol) return 0.0;
  double r = bisect_threshold([&](double x) { return tail(x) < tol; }, 0.0, r_max, 1e-6);
  return r + 1e-6;
}

struct NelderMeadResult {
  std::vector<double> x;
  double value;
  int evaluations;
};

// Maximizes f with adaptive coefficients; restarts the simplex at the best
// vertex until the evaluation budget or `cycles` is exhausted.
template <class F>
NelderMeadResult nelder_mead_maximize(F&& f, std::vector<double> x0, double step, int max_evals,
                                      double tol = 1e-10, int cycles = 3) {
  const std::size_t n = x0.size();
  const double dn = static_cast<double>(n);
  const double ca = 1.0, cg = 1.0 + 2.0 / dn, cc = 0.75 - 0.5 / dn, cs = 1.0 - 1.0 / dn;
  int evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    double v = f(x);
    if (!std::isfinite(v)) throw DomainError("objective returned a non-finite value");
    return -v;
  };
  std::vector<double> best_x = x0;
  double best = eval(x0);
  for (int cycle = 0; cycle < cycles && evals < max_evals; ++cycle) {
    std::vector<std::vector<double>> s(n + 1, best_x);
    std::vector<double> fv(n + 1, best);
    for (std::size_t i = 0; i < n && evals < max_evals; ++i) {
      s[i + 1][i] += step;
      fv[i + 1] = eval(s[i + 1]);
    }
    std::vector<std::size_t> order(n + 1);
    while (evals < max_evals) {
      for (std::size_t i = 0; i <= n; ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
      const std::size_t lo = order[0], hi = order[n], nh = order[n - 1];
      double size = 0.0;
      for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = 0; j < n; ++j) size = std::max(size, std::abs(s[order[i]][j] - s[lo][j]));
      if (fv[hi] - fv[lo] <= tol && size <= tol) break;
      std::vector<double> c(n, 0.0);
      for (std::size_t i = 0; i <= n; ++i)
        if (i != hi)
          for (std::size_t j = 0; j < n; ++j) c[j] += s[i][j] / dn;
      auto along = [&](double t) {
        std::vector<double> p(n);
        for (std::size_t j = 0; j < n; ++j) p[j] = c[j] + t * (s[hi][j] - c[j]);
        return p;
      };
      std::vector<double> r = along(-ca);
      double fr = eval(r);
      if (fr < fv[lo]) {
        std::vector<double> e = along(-ca * cg);
        double fe = eval(e);
        if (fe < fr) {
          s[hi] = e;
          fv[hi] = fe;
        } else {
          s[hi] = r;
          fv[hi] = fr;
        }
      } else if (fr < fv[nh]) {
        s[hi] = r;
        fv[hi] = fr;
      } else {
        bool outside = fr < fv[hi];
        std::vector<double> k = along(outside ? -ca * cc : cc);
        double fk = eval(k);
        if (fk < (outside ? fr : fv[hi])) {
          s[hi] = k;
          fv[hi] = fk;
        } else {
          for (std::size_t i = 0; i <= n; ++i) {
            if (i == lo) continue;
            for (std::size_t j = 0; j < n; ++j) s[i][j] = s[lo][j] + cs * (s[i][j] - s[lo][j]);
            fv[i] = eval(s[i]);
          }
        }
      }
    }
    for (std::size_t i = 0; i <= n; ++i)
      if (fv[i] < best) {
        best = fv[i];
        best_x = s[i];
      }
    step *= 0.5;
  }
  return {best_x, -best, evals};
}

struct OptimizerBudget {
  int restarts = 32;
  int max_evals = 4000;
  double tolerance = 1e-10;
  std::uint64_t seed = 1;
  double init_radius = 1.0;
  int threads = 1;
};

struct SettingsOptimum {
  std::vector<cplx> points;
  double value = -std::numeric_limits<double>::infinity();
  std::vector<double> restart_values;
  int discarded = 0;
};

using SettingsObjective = std::function<double(const std::vector<cplx>&)>;

inline std::vector<cplx> unpack_points(const std::vector<double>& x) {
  const std::size_t n = x.size() / 2;
  std::vector<cplx> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = {x[i], x[n + i]};
  return p;
}

inline std::vector<double> pack_points(const std::vector<cplx>& p) {
  std::vector<double> x(2 * p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    x[i] = p[i].real();
    x[p.size() + i] = p[i].imag();
  }
  return x;
}

// Multi-restart simplex ascent over the 2N real coordinates of Xi. An optional
// warmup objective is climbed first from each random start.
inline SettingsOptimum optimize_settings(const SettingsObjective& objective, int n_points,
                                         const OptimizerBudget& budget,
                                         const SettingsObjective& warmup = nullptr) {
  if (n_points < 1 || budget.restarts < 1 || budget.max_evals < 1)
    throw DomainError("optimizer needs N >= 1, R >= 1, B >= 1");
  struct Run {
    std::vector<cplx> pts;
    double value;
    bool ok;
  };
  std::vector<Run> runs(budget.restarts);
  auto f = [&](const std::vector<double>& x) { return objective(unpack_points(x)); };
  parallel_for(runs.size(), budget.threads, [&](std::size_t r) {
    std::mt19937_64 g(stream_seed(budget.seed, r));
    std::vector<cplx> init(n_points);
    for (auto& p : init) {
      double rad = budget.init_radius * std::sqrt(uniform_open(g));
      double th = 2.0 * std::numbers::pi * uniform_open(g);
      p = std::polar(rad, th);
    }
    try {
      std::vector<double> x = pack_points(init);
      double v0 = objective(init);
      if (!std::isfinite(v0)) throw DomainError("non-finite objective at start");
      if (warmup) {
        auto w = [&](const std::vector<double>& y) { return warmup(unpack_points(y)); };
        x = nelder_mead_maximize(w, x, 0.1 * budget.init_radius, budget.max_evals, budget.tolerance).x;
      }
      NelderMeadResult res =
          nelder_mead_maximize(f, x, 0.1 * budget.init_radius, budget.max_evals, budget.tolerance);
      if (res.value >= v0)
        runs[r] = {unpack_points(res.x), res.value, true};
      else
        runs[r] = {init, v0, true};
    } catch (const DomainError&) {
      runs[r] = {{}, 0.0, false};
    }
  });
  SettingsOptimum out;
  for (const auto& run : runs) {
    if (!run.ok) {
      ++out.discarded;
      out.restart_values.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    out.restart_values.push_back(run.value);
    if (run.value > out.value) {
      out.value = run.value;
      out.points = run.pts;
    }
  }
  if (out.points.empty()) throw DomainError("every optimizer restart was discarded");
  return out;
}

// Jointly normal (Re, Im) with Box-Muller draws and a 2x2 Cholesky factor of sigma.
class GaussianSampler {
 public:
  GaussianSampler(Eigen::Vector2d mean, Eigen::Matrix2d sigma, std::uint64_t seed)
      : mean_(std::move(mean)), gen_(seed) {
    if (std::abs(sigma(0, 1) - sigma(1, 0)) > 1e-12 * (1.0 + sigma.cwiseAbs().maxCoeff()))
      throw DomainError("covariance must be symmetric");
    const double det = sigma(0, 0) * sigma(1, 1) - sigma(0, 1) * sigma(1, 0);
    const double eps = 1e-14 * (1.0 + sigma.cwiseAbs().maxCoeff());
    if (sigma(0, 0) < -eps || sigma(1, 1) < -eps || det < -eps)
      throw DomainError("covariance must be positive semidefinite");
    const double l00 = std::sqrt(std::max(0.0, sigma(0, 0)));
    const double l10 = l00 > 0.0 ? sigma(1, 0) / l00 : 0.0;
    const double l11 = std::sqrt(std::max(0.0, sigma(1, 1) - l10 * l10));
    chol_ << l00, 0.0, l10, l11;
  }

  cplx next() {
    const double u1 = uniform_open(gen_);
    const double u2 = uniform_open(gen_);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    Eigen::Vector2d z(r * std::cos(t), r * std::sin(t));
    Eigen::Vector2d x = mean_ + chol_ * z;
    return {x(0), x(1)};
  }

 private:
  Eigen::Vector2d mean_;
  Eigen::Matrix2d chol_;
  std::mt19937_64 gen_;
};

}  // namespace cvgme
