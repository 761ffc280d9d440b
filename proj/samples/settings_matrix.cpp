#include <iostream>

#include "cvgme/cvgme.hpp"

using namespace cvgme;

int main() {
  const FamilySpec spec = FamilySpec::w(3, 0.03);
  const EntryFunction entry = family_entry(spec);

  OptimizerBudget budget;
  budget.restarts = 16;
  budget.seed = 11;
  budget.init_radius = 3.0 / std::sqrt(3.0);
  const SettingsOptimum opt = optimize_witness_b(entry, 4, budget);
  const WitnessReport r = witness_b(entry, opt.points, 3);

  std::cout.precision(6);
  std::cout << "settings points\n";
  for (cplx p : opt.points) std::cout << "  " << p.real() << " " << p.imag() << '\n';
  std::cout << "\nC matrix\n" << settings_matrix(entry, opt.points, 1.0 / opt.points.size()).real() << "\n\n";
  std::cout << "trace norm " << r.value << ", threshold " << r.threshold << ", distinct settings " << r.n_settings
            << ", certified " << std::boolalpha << r.certified << "\n\n";
  std::cout << to_json(r).dump(2) << '\n';
  return 0;
}
