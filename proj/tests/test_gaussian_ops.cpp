#include <gtest/gtest.h>

#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "cvgme/families.hpp"
#include "cvgme/gaussian_ops.hpp"
#include "cvgme/phase_space.hpp"

using namespace cvgme;

namespace {

Eigen::MatrixXcd expm_displacement(int dim, cplx beta) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(double(n));
  Eigen::MatrixXcd g = beta * a.adjoint() - std::conj(beta) * a;
  return g.exp();
}

PureState random_sector_state(int modes, int photons, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  AmplitudeMap amps;
  OccupationVector n(modes, 0);
  std::function<void(int, int)> rec = [&](int m, int left) {
    if (m == modes - 1) {
      n[m] = left;
      amps[n] = {nd(rng), nd(rng)};
      return;
    }
    for (int k = 0; k <= left; ++k) {
      n[m] = k;
      rec(m + 1, left - k);
    }
  };
  rec(0, photons);
  return normalize(PureState(modes, photons, std::move(amps)));
}

}  // namespace

TEST(Displacement, VacuumAndFirstElements) {
  for (cplx b : {cplx(0.3, 0.1), cplx(-1.2, 0.7), cplx(0.0, 2.0)}) {
    const double g = std::exp(-0.5 * std::norm(b));
    EXPECT_NEAR(std::abs(displacement_matrix_element(0, 0, b) - g), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(displacement_matrix_element(1, 0, b) - b * g), 0.0, 1e-15);
  }
}

TEST(Displacement, MatchesMatrixExponentialOracle) {
  const int big = 60;
  for (cplx b : {cplx(0.4, -0.2), cplx(1.1, 0.5), cplx(-0.7, 1.3)}) {
    Eigen::MatrixXcd ex = expm_displacement(big, b);
    for (int m = 0; m <= 20; ++m)
      for (int n = 0; n <= 20; ++n)
        EXPECT_NEAR(std::abs(displacement_matrix_element(m, n, b) - ex(m, n)), 0.0, 1e-10)
            << m << "," << n << " beta=" << b;
  }
}

TEST(Displacement, DiagonalIsLaguerre) {
  const cplx b(0.8, 0.3);
  const double x = std::norm(b);
  for (int n = 0; n <= 20; ++n)
    EXPECT_NEAR(std::abs(displacement_matrix_element(n, n, b) - std::assoc_laguerre(n, 0, x) * std::exp(-0.5 * x)),
                0.0, 1e-12);
}

TEST(Displacement, VacuumGivesCoherentState) {
  const cplx b(0.9, -0.4);
  PureState d = apply_displacement(vacuum(1), {b});
  PureState c = coherent_state(b, d.cutoff());
  for (int n = 0; n <= d.cutoff(); ++n)
    EXPECT_NEAR(std::abs(d.amplitude({n}) - c.amplitude({n})), 0.0, 1e-13);
}

TEST(Displacement, ZeroIsIdentity) {
  PureState psi = family_fock_expansion(FamilySpec::w(3)).branches().front().state;
  PureState d = apply_displacement(psi, {0.0, 0.0, 0.0});
  EXPECT_NEAR(std::abs(inner_product(psi, d)), 1.0, 1e-14);
}

TEST(Displacement, FockOneExpectation) {
  for (cplx xi : {cplx(0.2, 0.0), cplx(0.6, -0.9), cplx(1.5, 0.4)}) {
    PureState one = fock_state({1});
    PureState d = apply_displacement(one, {xi});
    const double x = std::norm(xi);
    EXPECT_NEAR(std::abs(inner_product(one, d) - (1.0 - x) * std::exp(-0.5 * x)), 0.0, 1e-12);
  }
}

TEST(Displacement, CompositionAgreesUpToPhase) {
  PureState psi = normalize(PureState(1, 2, {{{0}, 0.6}, {{1}, cplx(0.0, 0.5)}, {{2}, 0.3}}));
  const cplx b1(0.3, 0.4), b2(-0.5, 0.2);
  PureState two = apply_displacement(apply_displacement(psi, {b1}), {b2});
  PureState one = apply_displacement(psi, {b1 + b2});
  const int dim = std::max(two.cutoff(), one.cutoff());
  PureState a = with_cutoff(two, dim), b = with_cutoff(one, dim);
  EXPECT_NEAR(std::abs(inner_product(a, b)), 1.0, 1e-9);
}

TEST(Displacement, SmallBudgetThrows) {
  EXPECT_THROW(apply_displacement(fock_state({6}), {cplx(3.0, 0.0)}, OracleBudget{8, 5}), ResourceError);
}

TEST(Beamsplitter, TwoModeSwapNegate) {
  Eigen::MatrixXcd u = beamsplitter_matrix(2, +1).matrix();
  EXPECT_NEAR(std::abs(u(0, 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(u(0, 1) + 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(u(1, 0) + 1.0), 0.0, 1e-15);
}

TEST(Beamsplitter, UnitaryHermitianInvolutory) {
  for (int M = 2; M <= 16; ++M)
    for (int s : {+1, -1}) {
      Eigen::MatrixXcd u = beamsplitter_matrix(M, s).matrix();
      Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(M, M);
      EXPECT_LT((u * u.adjoint() - id).cwiseAbs().maxCoeff(), 1e-14);
      EXPECT_LT((u - u.adjoint()).cwiseAbs().maxCoeff(), 1e-15);
      EXPECT_LT((u * u - id).cwiseAbs().maxCoeff(), 1e-14);
    }
  EXPECT_THROW(beamsplitter_matrix(1, +1), DomainError);
  EXPECT_THROW(beamsplitter_matrix(3, 0), DomainError);
}

TEST(LinearOptics, IdentityLeavesStateUnchanged) {
  PureState psi = family_fock_expansion(FamilySpec::psi1()).branches().front().state;
  PureState out = apply_linear_optical(LinearOpticalUnitary(Eigen::MatrixXcd::Identity(3, 3)), psi);
  EXPECT_NEAR(std::abs(inner_product(psi, out)), 1.0, 1e-14);
}

TEST(LinearOptics, PreservesInnerProducts) {
  std::mt19937_64 rng(7);
  for (int M = 2; M <= 4; ++M) {
    const LinearOpticalUnitary v = beamsplitter_matrix(M, +1);
    for (int N = 1; N <= 4; ++N) {
      PureState a = random_sector_state(M, N, rng), b = random_sector_state(M, N, rng);
      cplx before = inner_product(a, b);
      cplx after = inner_product(apply_linear_optical(v, a), apply_linear_optical(v, b));
      EXPECT_NEAR(std::abs(before - after), 0.0, 1e-10);
    }
  }
}

TEST(LinearOptics, NoonCenterOfMassParity) {
  const double pi = std::numbers::pi;
  const LinearOpticalUnitary v = beamsplitter_matrix(4, +1);
  for (int N = 1; N <= 6; ++N) {
    PureState nu = family_fock_expansion(FamilySpec::noon3(N)).branches().front().state;
    PureState in = tensor(nu, vacuum(1, nu.cutoff()));
    cplx ov = inner_product(in, apply_linear_optical(v, in));
    const double s = (N % 2 == 0) ? 1.0 : -1.0;
    EXPECT_NEAR(ov.real() * 2.0 / pi, s * (2.0 + s) / (std::pow(2.0, N - 1) * pi), 1e-12) << N;
  }
}

TEST(LinearOptics, WStateWithVacuumAncilla) {
  PureState w = family_fock_expansion(FamilySpec::w(3)).branches().front().state;
  PureState in = tensor(w, vacuum(1, 1));
  cplx ov = inner_product(in, apply_linear_optical(beamsplitter_matrix(4, +1), in));
  EXPECT_NEAR(ov.real() * 2.0 / std::numbers::pi, -1.0 / std::numbers::pi, 1e-13);
}

TEST(LinearOptics, BudgetExceededThrows) {
  EXPECT_THROW(apply_linear_optical(beamsplitter_matrix(3, +1), fock_state({3, 3, 3}), OracleBudget{8}),
               ResourceError);
}

TEST(Damping, ZeroLossIsIdentity) {
  PureState psi = family_fock_expansion(FamilySpec::w(3)).branches().front().state;
  MixedState out = apply_amplitude_damping(psi, 0.0);
  ASSERT_EQ(out.branches().size(), 1u);
  EXPECT_NEAR(std::abs(inner_product(psi, out.branches()[0].state)), 1.0, 1e-14);
}

TEST(Damping, WStateMixesWithVacuum) {
  PureState w = family_fock_expansion(FamilySpec::w(3)).branches().front().state;
  MixedState out = apply_amplitude_damping(w, 0.3);
  double wv = 0.0, vv = 0.0;
  for (const auto& b : out.branches()) {
    if (std::abs(std::abs(inner_product(w, b.state)) - 1.0) < 1e-12) wv += b.weight;
    if (b.state.amplitude({0, 0, 0}) != cplx{}) vv += b.weight;
  }
  EXPECT_NEAR(wv, 0.7, 1e-12);
  EXPECT_NEAR(vv, 0.3, 1e-12);
}

TEST(Damping, MeanEnergy) {
  EXPECT_NEAR(mean_photon_number(apply_amplitude_damping(fock_state({2}), 0.3)), 1.4, 1e-12);
}

TEST(Damping, ParityOfHalfDampedFockOne) {
  EXPECT_NEAR(parity_expectation(vacuum(1)), 1.0, 1e-15);
  EXPECT_NEAR(parity_expectation(fock_state({1})), -1.0, 1e-15);
  EXPECT_NEAR(parity_expectation(apply_amplitude_damping(fock_state({1}), 0.5)), 0.0, 1e-15);
}

TEST(Damping, Composition) {
  PureState psi = normalize(PureState(2, 3, {{{2, 1}, 0.5}, {{0, 3}, cplx(0.2, 0.7)}, {{1, 0}, 0.4}}));
  const double e1 = 0.2, e2 = 0.35;
  MixedState twice = apply_amplitude_damping(apply_amplitude_damping(psi, e1), e2);
  MixedState once = apply_amplitude_damping(psi, 1.0 - (1.0 - e1) * (1.0 - e2));
  for (cplx a : {cplx(0.0, 0.0), cplx(0.3, -0.2), cplx(-0.5, 0.4)}) {
    std::vector<cplx> pt{a, 0.5 * a};
    EXPECT_NEAR(wigner_point(twice, pt), wigner_point(once, pt), 1e-10);
  }
  EXPECT_NEAR(mean_photon_number(twice), mean_photon_number(once), 1e-12);
}

TEST(Damping, RejectsOutOfRangeLoss) {
  EXPECT_THROW(apply_amplitude_damping(vacuum(1), 1.5), DomainError);
  EXPECT_THROW(apply_amplitude_damping(vacuum(1), -0.1), DomainError);
}
