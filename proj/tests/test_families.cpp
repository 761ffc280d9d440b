#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "cvgme/families.hpp"
#include "cvgme/witnesses.hpp"

using namespace cvgme;

namespace {

const double kPi = std::numbers::pi;

std::vector<cplx> random_points(int n, double radius, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> u(-radius, radius);
  std::vector<cplx> p;
  while (static_cast<int>(p.size()) < n) {
    cplx a(u(g), u(g));
    if (std::abs(a) <= radius) p.push_back(a);
  }
  return p;
}

double slice_oracle(const MixedState& rho, cplx a) {
  return wigner_point(rho, std::vector<cplx>(rho.modes(), a), OracleBudget{16});
}

}  // namespace

TEST(Families, FockExpansionExamples) {
  PureState w = family_fock_expansion(FamilySpec::w(3)).branches().front().state;
  for (OccupationVector n : {OccupationVector{1, 0, 0}, {0, 1, 0}, {0, 0, 1}})
    EXPECT_NEAR(std::abs(w.amplitude(n)), 1.0 / std::sqrt(3.0), 1e-15);
  PureState nu = family_fock_expansion(FamilySpec::noon3(2)).branches().front().state;
  for (OccupationVector n : {OccupationVector{2, 0, 0}, {0, 2, 0}, {0, 0, 2}})
    EXPECT_NEAR(std::abs(nu.amplitude(n)), 1.0 / std::sqrt(3.0), 1e-15);
}

TEST(Families, TabulatedStatesAreNormalized) {
  for (const FamilySpec& s : {FamilySpec::psi1(), FamilySpec::psi2(), FamilySpec::psi4(), FamilySpec::psi5(),
                              FamilySpec::dicke2(4), FamilySpec::noon3(5)})
    EXPECT_NEAR(family_fock_expansion(s).branches().front().state.norm_squared(), 1.0, 1e-12) << s.name();
}

TEST(Families, WAndDickeAreOrthogonal) {
  PureState w = family_fock_expansion(FamilySpec::w(3)).branches().front().state;
  PureState d = family_fock_expansion(FamilySpec::dicke2(3)).branches().front().state;
  EXPECT_EQ(inner_product(w, d), cplx{});
  PureState wa = tensor(w, vacuum(1, 1));
  EXPECT_EQ(wa.modes(), 4);
  EXPECT_NEAR(std::abs(wa.amplitude({1, 0, 0, 0})), 1.0 / std::sqrt(3.0), 1e-15);
}

TEST(Families, LossyWIsMixtureWithVacuum) {
  MixedState rho = family_fock_expansion(FamilySpec::w(4, 0.3));
  MixedState damped = apply_amplitude_damping(family_fock_expansion(FamilySpec::w(4)), 0.3);
  for (cplx a : random_points(5, 0.8, 11))
    EXPECT_NEAR(slice_oracle(rho, a), slice_oracle(damped, a), 1e-12);
}

TEST(Families, LossyCatMatchesDampedCat) {
  const FamilySpec spec = FamilySpec::cat(2, cplx(0.6, 0.2), 0.25);
  MixedState lossless = family_fock_expansion(FamilySpec::cat(2, cplx(0.6, 0.2)));
  MixedState damped = apply_amplitude_damping(lossless, 0.25);
  for (cplx a : random_points(5, 0.8, 12))
    EXPECT_NEAR(family_wigner_slice(spec, a), slice_oracle(damped, a), 1e-10);
}

TEST(Families, SliceExamples) {
  EXPECT_NEAR(family_wigner_slice(FamilySpec::w(3), 0.0), -std::pow(2.0 / kPi, 3), 1e-15);
  EXPECT_NEAR(family_wigner_slice(FamilySpec::w(3), 0.0), -0.25801, 1e-5);
  for (int M = 2; M <= 6; ++M) EXPECT_NEAR(family_wigner_slice(FamilySpec::w(M, 0.5), 0.0), 0.0, 1e-15);
  EXPECT_THROW(family_wigner_slice(FamilySpec::noon3(2), 0.0), UnsupportedError);
}

TEST(Families, SlicesMatchOracle) {
  std::vector<FamilySpec> specs{FamilySpec::w(2),        FamilySpec::w(3),        FamilySpec::w(4, 0.15),
                                FamilySpec::cat(3, 0.4), FamilySpec::cat(2, cplx(0.5, -0.3), 0.2),
                                FamilySpec::dicke2(3),   FamilySpec::dicke2(4),   FamilySpec::psi1(),
                                FamilySpec::psi2()};
  std::uint64_t seed = 100;
  for (const auto& spec : specs) {
    MixedState rho = family_fock_expansion(spec);
    for (cplx a : random_points(20, 0.9, ++seed))
      EXPECT_NEAR(family_wigner_slice(spec, a), slice_oracle(rho, a), 1e-8) << spec.name() << " at " << a;
  }
}

TEST(Families, CEntryExamples) {
  for (int M = 2; M <= 6; ++M) EXPECT_NEAR(family_c_entry(FamilySpec::w(M, 0.2), 0.0), 1.0, 1e-15);
  EXPECT_NEAR(family_c_entry(FamilySpec::w(3), 1.0), -2.0 * std::exp(-1.5), 1e-15);
  EXPECT_NEAR(family_c_entry(FamilySpec::cat(3, 0.7), 0.0), 1.0, 1e-15);
  const cplx x(0.3, -0.4);
  EXPECT_NEAR(family_c_entry(FamilySpec::cat(3, cplx(0.7, 0.2), 0.1), x),
              family_c_entry(FamilySpec::cat(3, cplx(0.7, 0.2), 0.1), -x), 1e-15);
  EXPECT_THROW(family_c_entry(FamilySpec::psi1(), 0.0), UnsupportedError);
}

TEST(Families, CEntriesMatchOracles) {
  std::vector<FamilySpec> specs{FamilySpec::w(2), FamilySpec::w(3, 0.3), FamilySpec::w(4),
                                FamilySpec::cat(3, 0.4), FamilySpec::cat(2, cplx(0.4, 0.3), 0.1)};
  std::uint64_t seed = 200;
  for (const auto& spec : specs) {
    MixedState rho = family_fock_expansion(spec);
    const EntryFunction b = oracle_b_entry(rho, OracleBudget{16});
    const EntryFunction e = oracle_e_entry(rho, OracleBudget{16});
    for (cplx d : random_points(20, 1.2, ++seed)) {
      const double cf = family_c_entry(spec, d);
      EXPECT_NEAR(std::abs(b(d) - cf), 0.0, 1e-8) << spec.name();
      EXPECT_NEAR(std::abs(e(d) - cf), 0.0, 1e-8) << spec.name();
    }
  }
}

TEST(Families, KernelEntryExamples) {
  const cplx xi(0.7, -0.3);
  const double x = std::norm(xi);
  for (int M = 3; M <= 6; ++M) {
    EXPECT_NEAR(kernel_c_entry(KernelSpec::vacuum(M - 2), xi), std::exp(-(M - 2) * x / 2.0), 1e-15);
    EXPECT_NEAR(kernel_c_entry(KernelSpec::squeezed(1.0, M - 2), xi), std::exp(-(M - 2) * x / 2.0), 1e-15);
    EXPECT_NEAR(kernel_c_entry(KernelSpec::fock(1, M - 2), xi),
                std::pow((1.0 - x) * std::exp(-x / 2.0), M - 2), 1e-15);
  }
}

TEST(Families, AncillaCharacteristicMatchesOracle) {
  for (const Ancilla& a : {Ancilla::vacuum(), Ancilla::fock(1), Ancilla::fock(2), Ancilla::squeezed(0.535),
                           Ancilla::squeezed(1.6)}) {
    const PureState psi = ancilla_state(a);
    for (cplx xi : random_points(20, 1.5, 300))
      EXPECT_NEAR(std::abs(characteristic_point(psi, {xi}) - ancilla_characteristic(a, xi)), 0.0, 1e-8)
          << a.name() << " at " << xi;
  }
}

TEST(Families, SmoothedExamples) {
  EXPECT_NEAR(family_smoothed_wigner(FamilySpec::dicke2(3), KernelSpec::fock(1, 1), 0.0), -1.0 / (2.0 * kPi),
              1e-15);
  EXPECT_NEAR(family_smoothed_wigner(FamilySpec::noon3(4), KernelSpec::fock(1, 1), 0.0), -1.0 / (16.0 * kPi),
              1e-15);
  EXPECT_NEAR(family_smoothed_wigner(FamilySpec::psi2(), KernelSpec::vacuum(1), 0.5), -0.04, 5e-3);
  EXPECT_THROW(family_smoothed_wigner(FamilySpec::dicke2(3), KernelSpec::fock(2, 1), 0.0), UnsupportedError);
  EXPECT_THROW(family_smoothed_wigner(FamilySpec::w(4), KernelSpec::vacuum(1), 0.0), DomainError);
}

TEST(Families, SmoothedMatchesOracle) {
  struct Case {
    FamilySpec spec;
    KernelSpec kernel;
    bool origin_only;
  };
  std::vector<Case> cases{
      {FamilySpec::w(3), KernelSpec::vacuum(1), false},
      {FamilySpec::w(3, 0.2), KernelSpec::vacuum(1), false},
      {FamilySpec::w(4, 0.1), KernelSpec::vacuum(2), false},
      {FamilySpec::dicke2(3), KernelSpec::fock(1, 1), false},
      {FamilySpec::dicke2(3), KernelSpec::vacuum(1), false},
      {FamilySpec::psi1(), KernelSpec::vacuum(1), false},
      {FamilySpec::psi2(), KernelSpec::vacuum(1), false},
      {FamilySpec::noon3(2), KernelSpec::fock(1, 1), false},
      {FamilySpec::noon3(3), KernelSpec::fock(0, 1), false},
      {FamilySpec::noon3(4), KernelSpec::fock(1, 1), false},
      {FamilySpec::noon3(5), KernelSpec::fock(0, 1), false},
      {FamilySpec::psi4(), KernelSpec::fock(1, 2), true},
  };
  std::uint64_t seed = 400;
  for (const auto& c : cases) {
    MixedState rho = family_fock_expansion(c.spec);
    std::vector<PureState> anc;
    for (const auto& a : c.kernel.ancillas) anc.push_back(ancilla_state(a));
    std::vector<cplx> pts = c.origin_only ? std::vector<cplx>{0.0} : random_points(20, 0.8, ++seed);
    for (cplx a : pts)
      EXPECT_NEAR(witness_c_value(rho, anc, a, OracleBudget{12}),
                  kPi / 2.0 * family_smoothed_wigner(c.spec, c.kernel, a), 1e-8)
          << c.spec.name() << " " << c.kernel.name() << " at " << a;
  }
}

TEST(Families, SmoothedLossyWRootIsOneOverM) {
  for (int M = 3; M <= 8; ++M) {
    auto neg = [M](double eta) {
      return family_smoothed_wigner(FamilySpec::w(M, eta), KernelSpec::vacuum(M - 2), 0.0) < 0.0;
    };
    EXPECT_NEAR(bisect_threshold(neg, 0.0, 1.0, 1e-12), 1.0 / M, 1e-10) << M;
  }
}

TEST(Families, NoonParityRule) {
  for (int N = 1; N <= 8; ++N) {
    const int matched = (N % 2 == 0) ? 1 : 0;
    const double v = family_smoothed_wigner(FamilySpec::noon3(N), KernelSpec::fock(matched, 1), 0.0);
    if (N == 2)
      EXPECT_GE(v, 0.0);
    else
      EXPECT_LT(v, 0.0) << N;
  }
}

TEST(Families, Psi4Psi5Constants) {
  EXPECT_NEAR(psi4_smoothed_origin(), -2.0 * (11.0 * std::sqrt(6.0) - 4.0) / (81.0 * kPi), 1e-15);
  EXPECT_NEAR(psi5_smoothed_origin(), -(139.0 * std::sqrt(3.0) - 144.0) / (512.0 * kPi), 1e-15);
  EXPECT_LT(psi4_smoothed_origin(), 0.0);
  EXPECT_LT(psi5_smoothed_origin(), 0.0);
}

TEST(Families, Psi5OracleAtRaisedBudget) {
  MixedState rho = family_fock_expansion(FamilySpec::psi5());
  std::vector<PureState> anc(3, ancilla_state(Ancilla::fock(1)));
  EXPECT_NEAR(witness_c_value(rho, anc, 0.0, OracleBudget{8}), kPi / 2.0 * psi5_smoothed_origin(), 1e-10);
}

TEST(Families, V2dClosedFormExamples) {
  EXPECT_NEAR(v2d_closed_form(FamilySpec::w(3)), 0.475374, 1e-6);
  EXPECT_NEAR(v2d_closed_form(FamilySpec::w(7)), 0.203732, 1e-6);
  EXPECT_LT(v2d_closed_form(FamilySpec::w(7)), gme_volume_threshold(7));
  EXPECT_NEAR(gme_volume_threshold(7), 0.204124, 1e-6);
  EXPECT_NEAR(v2d_closed_form(FamilySpec::dicke2(3)), 0.3892087, 1e-6);
  EXPECT_THROW(v2d_closed_form(FamilySpec::w(3, 0.1)), UnsupportedError);
}

TEST(Families, V2dQuadratureMatchesClosedForm) {
  for (int M = 3; M <= 8; ++M) {
    EXPECT_NEAR(family_v2d_numeric(FamilySpec::w(M)), v2d_closed_form(FamilySpec::w(M)), 1e-9) << M;
    EXPECT_NEAR(family_v2d_numeric(FamilySpec::dicke2(M)), v2d_closed_form(FamilySpec::dicke2(M)), 1e-9) << M;
  }
}

TEST(Families, V2dGridMatchesQuadrature) {
  const GridSpec g = disc_grid(0.005, 3.0);
  for (const FamilySpec& s : {FamilySpec::w(3), FamilySpec::psi1(), FamilySpec::cat(3, 1.0, 0.1)}) {
    const double scale = std::pow(kPi / 2.0, s.modes());
    const double I = grid_abs_integral(g, [&](cplx a) { return scale * family_wigner_slice(s, a); }, 4);
    EXPECT_NEAR(2.0 / kPi * I, family_v2d_numeric(s), 1e-4) << s.name();
  }
}

TEST(Families, VolumeIsSingleModeVolumeOverM) {
  auto w1 = [](double rho) {
    const double x = rho * rho;
    return 2.0 * kPi * rho * (2.0 / kPi) * std::abs(4.0 * x - 1.0) * std::exp(-2.0 * x);
  };
  const double fock_volume = integrate_piecewise(w1, 0.0, 8.0, {0.5});
  for (int M = 3; M <= 6; ++M) EXPECT_NEAR(family_v2d_numeric(FamilySpec::w(M)), fock_volume / M, 1e-4);

  const int M = 3;
  const double gamma = 0.8;
  const cplx b = std::sqrt(double(M)) * gamma;
  const int cut = coherent_cutoff(std::abs(b));
  const PureState coh = coherent_state(b, cut);
  AmplitudeMap amps;
  for (const auto& [n, a] : coh.amplitudes())
    amps[n] += a * (1.0 + ((n[0] % 2) ? -1.0 : 1.0));
  const MixedState cat1(normalize(PureState(1, cut, std::move(amps))));
  const GridSpec g = disc_grid(0.01, 4.0);
  const double single = grid_abs_integral(g, [&](cplx a) { return wigner_point(cat1, {a}); }, 4);
  EXPECT_NEAR(family_v2d_numeric(FamilySpec::cat(M, gamma)), single / M, 1e-4);
}

TEST(Families, LossThresholdsForWStates) {
  const double expected[] = {0.3548, 0.2446, 0.1522, 0.0710};
  for (int M = 3; M <= 6; ++M) EXPECT_NEAR(w_eta_max(M), expected[M - 3], 5e-4) << M;
  EXPECT_EQ(w_eta_max(7), 0.0);
}

TEST(Families, TailRadiusBoundsEnvelope) {
  for (const FamilySpec& s : {FamilySpec::w(3), FamilySpec::cat(4, 1.5), FamilySpec::psi1()}) {
    const double r = family_tail_radius(s, 1e-6);
    auto g = [&](double rho) { return 2.0 * kPi * rho * family_slice_envelope(s, rho); };
    EXPECT_LT(integrate_1d(g, r, std::numeric_limits<double>::infinity()), 1e-6) << s.name();
  }
}

TEST(Families, EnvelopeDominatesSlice) {
  for (const FamilySpec& s : {FamilySpec::w(3, 0.2), FamilySpec::cat(3, cplx(1.0, 0.5), 0.1),
                              FamilySpec::dicke2(4), FamilySpec::psi1(), FamilySpec::psi2()}) {
    const double scale = std::pow(kPi / 2.0, s.modes() - 1);
    for (cplx a : random_points(50, 2.0, 500))
      EXPECT_LE(scale * std::abs(family_wigner_slice(s, a)), family_slice_envelope(s, std::abs(a)) + 1e-14)
          << s.name();
  }
}

TEST(Families, ParseFamily) {
  FamilySpec w = parse_family("w:M=3,eta=0.1");
  EXPECT_EQ(w.tag, FamilyTag::W);
  EXPECT_EQ(w.modes(), 3);
  EXPECT_DOUBLE_EQ(w.eta, 0.1);
  FamilySpec c = parse_family("cat:M=4,gamma=1.0,gamma_im=0.5");
  EXPECT_EQ(c.modes(), 4);
  EXPECT_EQ(c.gamma, cplx(1.0, 0.5));
  EXPECT_EQ(parse_family("noon3:N=4").m, 4);
  EXPECT_EQ(parse_family("psi1").tag, FamilyTag::Psi1);
  EXPECT_EQ(parse_family("dicke2:M=4").modes(), 4);
  EXPECT_EQ(parse_family(w.name()).name(), w.name());
  EXPECT_THROW(parse_family("ghz:M=3"), DomainError);
  EXPECT_THROW(parse_family("w:eta=0.1"), DomainError);
  EXPECT_THROW(parse_family("w:M=3,eta"), DomainError);
  EXPECT_THROW(parse_family("w:M=3,eta=x"), DomainError);
  EXPECT_THROW(parse_family("w:M=3,eta=1.5"), DomainError);
  EXPECT_THROW(parse_family("w:M=1"), DomainError);
}

TEST(Families, ParseAncilla) {
  EXPECT_TRUE(parse_ancilla("vacuum").is_vacuum());
  EXPECT_EQ(parse_ancilla("fock1").n, 1);
  EXPECT_EQ(parse_ancilla("fock:2").n, 2);
  EXPECT_DOUBLE_EQ(parse_ancilla("squeezed:0.535").s, 0.535);
  EXPECT_THROW(parse_ancilla("thermal"), DomainError);
  EXPECT_THROW(parse_ancilla("squeezed:-1"), DomainError);
}
