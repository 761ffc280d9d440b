#include <iostream>

#include "cvgme/cvgme.hpp"

using namespace cvgme;

int main() {
  const FamilySpec spec = FamilySpec::w(3);
  const MixedState rho = family_fock_expansion(spec);

  std::cout.precision(10);
  std::cout << "W slice at alpha = 0.3 + 0.1i\n";
  const cplx a(0.3, 0.1);
  std::cout << "  oracle      " << wigner_slice_point(rho, SliceSpec::diagonal(3), a) << '\n';
  std::cout << "  closed form " << family_wigner_slice(spec, a) << "\n\n";

  std::cout << "absolute volume " << v2d_closed_form(spec) << " threshold " << gme_volume_threshold(3) << "\n\n";

  for (double delta : {0.01, 0.005}) {
    const WitnessReport r = witness_a(family_slice_function(spec), disc_grid(delta, 0.9, 1.0), 3);
    std::cout << "witness A, delta " << delta << ": I = " << r.value << ", error " << r.error_budget()
              << ", threshold " << r.threshold << ", certified " << std::boolalpha << r.certified << '\n';
  }

  const WitnessReport c = witness_c(rho, {vacuum(1)});
  std::cout << "\nwitness C with a vacuum ancilla: " << c.value << ", certified " << c.certified << '\n';

  const WitnessReport d = witness_d(spec, RandomDisplacementScheme::minimal(0.0, 3), 100000, 7);
  std::cout << "witness D: mean " << d.value << " +/- " << *d.stderr_value << ", certified " << d.certified << '\n';
  return 0;
}
