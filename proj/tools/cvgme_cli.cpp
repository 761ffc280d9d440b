#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cvgme/cvgme.hpp"

namespace {

using namespace cvgme;
using nlohmann::json;

struct ExperimentConfig {
  std::string name;
  std::string family;
  std::string kernel;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 1;
  std::string format = "csv";
  bool gnuplot = false;
  std::string m_range, n_range, s_range, eta_range, g_range, r_range, zeta_range, a_range, delta_range;
  double delta = 0.01;
  double radius = 0.9;
  std::optional<double> energy;
  int n = 4;
  int restarts = 32;
  int evals = 4000;
  std::optional<double> init_radius;
  std::size_t samples = 100000;
  double alpha_re = 0.0, alpha_im = 0.0;
  std::optional<double> sigma;
  bool oracle = false;
};

struct ExperimentResult {
  CsvTable table{CsvTable::report_header("x")};
  std::vector<WitnessReport> reports;
  json summary = json::object();
  std::string x_label = "x";
  std::string y_label = "value";
};

struct ExperimentInfo {
  std::string name;
  std::string reproduces;
  std::string parameters;
  bool stochastic;
  std::function<ExperimentResult(const ExperimentConfig&)> run;
};

std::vector<int> parse_int_range(const std::string& text, int lo, int hi) {
  if (text.empty()) {
    std::vector<int> v;
    for (int i = lo; i <= hi; ++i) v.push_back(i);
    return v;
  }
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) return {std::stoi(text)};
    const int a = std::stoi(text.substr(0, dots)), b = std::stoi(text.substr(dots + 2));
    if (b < a) throw DomainError("empty integer range '" + text + "'");
    std::vector<int> v;
    for (int i = a; i <= b; ++i) v.push_back(i);
    return v;
  } catch (const std::logic_error&) {
    throw DomainError("malformed integer range '" + text + "'; use lo..hi");
  }
}

// start:stop:step with stop included when it lies on the lattice.
std::vector<double> parse_real_range(const std::string& text, const std::string& fallback) {
  const std::string t = text.empty() ? fallback : text;
  std::vector<double> parts;
  std::stringstream ss(t);
  std::string item;
  try {
    while (std::getline(ss, item, ':')) parts.push_back(std::stod(item));
  } catch (const std::logic_error&) {
    throw DomainError("malformed real range '" + t + "'; use start:stop:step");
  }
  if (parts.size() == 1) return parts;
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0])
    throw DomainError("malformed real range '" + t + "'; use start:stop:step");
  const long count = std::lround(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9)) + 1;
  std::vector<double> v;
  for (long i = 0; i < count; ++i) v.push_back(parts[0] + i * parts[2]);
  return v;
}

FamilySpec family_or(const ExperimentConfig& c, const std::string& fallback) {
  return parse_family(c.family.empty() ? fallback : c.family);
}

KernelSpec kernel_for(const ExperimentConfig& c, int M, const std::string& fallback) {
  return KernelSpec::uniform(parse_ancilla(c.kernel.empty() ? fallback : c.kernel), M - 2);
}

OptimizerBudget budget_for(const ExperimentConfig& c, double radius) {
  OptimizerBudget b;
  b.restarts = c.restarts;
  b.max_evals = c.evals;
  b.seed = *c.seed;
  b.threads = c.threads;
  b.init_radius = c.init_radius.value_or(radius);
  return b;
}

WitnessReport volume_report(const FamilySpec& spec, double v2d) {
  WitnessReport r;
  r.witness = "A";
  r.family = spec.name();
  r.value = v2d;
  r.threshold = gme_volume_threshold(spec.modes());
  r.params["quantity"] = "v2d";
  r.decide();
  return r;
}

ExperimentResult run_wstate_violation(const ExperimentConfig& c) {
  ExperimentResult res;
  res.table = CsvTable(CsvTable::report_header("M"));
  res.x_label = "M";
  res.y_label = "V_2D";
  for (int M : parse_int_range(c.m_range, 3, 8)) {
    const FamilySpec spec = FamilySpec::w(M);
    WitnessReport r = volume_report(spec, v2d_closed_form(spec));
    res.table.add_report(M, r);
    res.reports.push_back(r);
  }
  return res;
}

ExperimentResult run_dicke_violation(const ExperimentConfig& c) {
  ExperimentResult res;
  res.table = CsvTable(CsvTable::report_header("M"));
  res.x_label = "M";
  res.y_label = "V_2D";
  for (int M : parse_int_range(c.m_range, 3, 8)) {
    const FamilySpec spec = FamilySpec::dicke2(M);
    WitnessReport r = volume_report(spec, v2d_closed_form(spec));
    res.table.add_report(M, r);
    res.reports.push_back(r);
  }
  return res;
}

ExperimentResult run_cat_violation(const ExperimentConfig& c) {
  ExperimentResult res;
  res.table = CsvTable(CsvTable::report_header("gamma", {"M"}));
  res.x_label = "gamma";
  res.y_label = "V_2D";
  const std::vector<double> gammas = parse_real_range(c.g_range, "0.05:2:0.05");
  json best = json::object();
  for (int M : parse_int_range(c.m_range, 3, 10)) {
    for (double g : gammas) {
      const FamilySpec spec = FamilySpec::cat(M, g);
      WitnessReport r = volume_report(spec, family_v2d_numeric(spec));
      res.table.add_report(g, r, {std::to_string(M)});
      res.reports.push_back(r);
    }
    const ScalarOptimum opt = cat_best_violation(M, gammas.front(), gammas.back());
    best[std::to_string(M)] = {{"gamma", opt.x}, {"max_violation", opt.value}};
  }
  res.summary["best_violation"] = best;
  return res;
}

ExperimentResult run_wstate_loss(const ExperimentConfig& c) {
  ExperimentResult res;
  res.table = CsvTable(CsvTable::report_header("eta", {"M"}));
  res.x_label = "eta";
  res.y_label = "V_2D";
  json etas = json::object();
  for (int M : parse_int_range(c.m_range, 3, 6)) {
    for (double eta : parse_real_range(c.eta_range, "0:0.4:0.01")) {
      const FamilySpec spec = FamilySpec::w(M, eta);
      WitnessReport r = volume_report(spec, family_v2d_numeric(spec));
      res.table.add_report(eta, r, {std::to_string(M)});
      res.reports.push_back(r);
    }
    etas[std::to_string(M)] = w_eta_max(M);
  }
  res.summary["eta_max"] = etas;
  return res;
}

ExperimentResult run_cat_loss_threshold(const ExperimentConfig& c) {
  ExperimentResult res;
  res.table = CsvTable(CsvTable::report_header("gamma", {"M", "eta_max"}));
  res.x_label = "gamma";
  res.y_label = "V_2D";
  const std::vector<double> gammas = parse_real_range(c.g_range, "0.3:1.5:0.05");
  json robust = json::object();
  for (int M : parse_int_range(c.m_range, 3, 9)) {
    for (double g : gammas) {
      const FamilySpec spec = FamilySpec::cat(M, g);
      WitnessReport r = volume_report(spec, family_v2d_numeric(spec));
      const double em = cat_eta_max(M, g);
      r.params["eta_max"] = em;
      res.table.add_report(g, r, {std::to_string(M), format_number(em)});
      res.reports.push_back(r);
    }
    const ScalarOptimum opt = cat_most_robust(M, gammas.front(), gammas.back());
    robust[std::to_string(M)] = {{"gamma", opt.x}, {"eta_max", opt.value}};
  }
  res.summary["most_robust"] = robust;
  return res;
}

ExperimentResult run_rmin(const ExperimentConfig& c) {
  ExperimentResult res;
  res.table = CsvTable(CsvTable::report_header("r", {"M"}));
  res.x_label = "r";
  res.y_label = "V_2D(r)";
  json rmins = json::object();
  for (int M : parse_int_range(c.m_range, 3, 6)) {
    const FamilySpec spec = FamilySpec::w(M);
    for (double r : parse_real_range(c.r_range, "0.1:1.5:0.02")) {
      WitnessReport rep = volume_report(spec, family_v2d_numeric(spec, r));
      rep.params["radius"] = r;
      res.table.add_report(r, rep, {std::to_string(M)});
      res.reports.push_back(rep);
    }
    const double rm = volume_rmin(spec);
    rmins[std::to_string(M)] = std::isnan(rm) ? json(nullptr) : json(rm);
  }
  res.summary["r_min"] = rmins;
  return res;
}

ExperimentResult run_numint(const ExperimentConfig& c) {
  ExperimentResult res;
  res.table = CsvTable(CsvTable::report_header("delta", {"rigorous", "error"}));
  res.x_label = "delta";
  res.y_label = "I";
  const FamilySpec spec = family_or(c, "w:M=3");
  const SliceFunction slice = family_slice_function(spec);
  const std::vector<double> deltas =
      c.delta_range.empty() ? std::vector<double>{c.delta} : parse_real_range(c.delta_range, "");
  for (double d : deltas) {
    WitnessReport r = witness_a(slice, disc_grid(d, c.radius, c.energy), spec.modes(), {true, c.threads});
    r.family = spec.name();
    res.table.add_report(d, r, {r.rigorous ? "true" : "false", format_number(r.error_budget())});
    res.reports.push_back(r);
  }
  return res;
}

ExperimentResult run_witness_b(const ExperimentConfig& c, const std::string& fallback) {
  ExperimentResult res;
  res.table = CsvTable(CsvTable::report_header("eta", {"N", "n_settings"}));
  res.x_label = "eta";
  res.y_label = "trace norm";
  const FamilySpec base = family_or(c, fallback);
  const int M = base.modes();
  const std::vector<double> etas =
      c.eta_range.empty() ? std::vector<double>{base.eta} : parse_real_range(c.eta_range, "");
  for (int N : parse_int_range(c.n_range, c.n, c.n)) {
    for (double eta : etas) {
      FamilySpec spec = base;
      spec.eta = eta;
      const EntryFunction entry = family_entry(spec);
      const SettingsOptimum opt = optimize_witness_b(entry, N, budget_for(c, 3.0 / std::sqrt(double(M))));
      WitnessReport r = witness_b(entry, opt.points, M);
      r.family = spec.name();
      r.seed = c.seed;
      r.params["restarts"] = c.restarts;
      r.params["discarded"] = opt.discarded;
      res.table.add_report(eta, r, {std::to_string(N), std::to_string(r.n_settings)});
      res.reports.push_back(r);
    }
  }
  return res;
}

ExperimentResult run_witness_e_zeta(const ExperimentConfig& c) {
  ExperimentResult res;
  res.table = CsvTable(CsvTable::report_header("zeta", {"N", "n_settings"}));
  res.x_label = "zeta";
  res.y_label = "trace norm";
  json bounds = json::object();
  for (int N : parse_int_range(c.n_range, 4, 8)) {
    double last_certified = std::numeric_limits<double>::quiet_NaN();
    for (double zeta : parse_real_range(c.zeta_range, "0:0.5:0.025")) {
      const EntryFunction entry = [zeta](cplx d) { return cplx(zeta_entry(zeta, d)); };
      const SettingsOptimum opt = optimize_witness_e(entry, KernelSpec{}, N, budget_for(c, 2.0));
      WitnessReport r = witness_e(entry, opt.points, KernelSpec{}, 2);
      r.family = "zeta";
      r.seed = c.seed;
      r.params["zeta"] = zeta;
      if (r.certified) last_certified = zeta;
      res.table.add_report(zeta, r, {std::to_string(N), std::to_string(r.n_settings)});
      res.reports.push_back(r);
    }
    bounds[std::to_string(N)] = std::isnan(last_certified) ? json(nullptr) : json(last_certified);
  }
  res.summary["largest_certified_zeta"] = bounds;
  return res;
}

SettingsSet kernel_scan_points() {
  const cplx x0(10.0 / 11.0, 7.0 / 17.0);
  return {x0, -x0, std::conj(x0), -std::conj(x0), x0.real(), -x0.real()};
}

ExperimentResult run_kernel_scan(const ExperimentConfig& c) {
  ExperimentResult res;
  res.table = CsvTable(CsvTable::report_header("s"));
  res.x_label = "s";
  res.y_label = "trace norm";
  const FamilySpec spec = family_or(c, "cat:M=3,gamma=1");
  const EntryFunction entry = family_entry(spec);
  const SettingsSet xi = kernel_scan_points();
  double best_s = 0.0, best_v = -1.0;
  std::optional<double> lo, hi;
  for (double s : parse_real_range(c.s_range, "0.2:1.2:0.005")) {
    WitnessReport r = witness_e(entry, xi, KernelSpec::squeezed(s, spec.modes() - 2), spec.modes());
    r.family = spec.name();
    r.params["s"] = s;
    if (r.value > best_v) {
      best_v = r.value;
      best_s = s;
    }
    if (r.certified) {
      if (!lo) lo = s;
      hi = s;
    }
    res.table.add_report(s, r);
    res.reports.push_back(r);
  }
  res.summary["best"] = {{"s", best_s}, {"value", best_v}};
  res.summary["window"] = lo ? json{*lo, *hi} : json(nullptr);
  return res;
}

ExperimentResult run_mc_witness4(const ExperimentConfig& c) {
  ExperimentResult res;
  res.table = CsvTable(CsvTable::report_header("alpha_re", {"alpha_im", "stderr", "analytic"}));
  res.x_label = "alpha";
  res.y_label = "mean";
  const FamilySpec spec = family_or(c, "w:M=3");
  const int M = spec.modes();
  RandomDisplacementScheme scheme = RandomDisplacementScheme::minimal({c.alpha_re, c.alpha_im}, M);
  if (c.sigma) scheme.sigma = *c.sigma * Eigen::Matrix2d::Identity();
  WitnessReport r = witness_d(spec, scheme, c.samples, *c.seed, {4096, c.threads});
  std::string analytic = "";
  if (spec.tag == FamilyTag::W && scheme.sigma.isApprox(RandomDisplacementScheme::minimal(0.0, M).sigma)) {
    const double v = witness_d_factor(M) * family_smoothed_wigner(spec, KernelSpec::vacuum(M - 2), scheme.alpha);
    r.params["analytic_mean"] = v;
    analytic = format_number(v);
  }
  res.table.add_report(c.alpha_re, r, {format_number(c.alpha_im), format_number(*r.stderr_value), analytic});
  res.reports.push_back(r);
  return res;
}

ExperimentResult run_smoothed_wigner(const ExperimentConfig& c) {
  ExperimentResult res;
  res.table = CsvTable(CsvTable::report_header("alpha"));
  res.x_label = "alpha";
  res.y_label = "(pi/2) W~";
  const FamilySpec spec = family_or(c, "dicke2:M=3");
  const int M = spec.modes();
  const KernelSpec kernel = kernel_for(c, M, "fock1");
  for (double a : parse_real_range(c.a_range, "0:1.5:0.05")) {
    WitnessReport r;
    if (c.oracle) {
      std::vector<PureState> anc;
      for (const auto& k : kernel.ancillas) anc.push_back(ancilla_state(k));
      r = witness_c(family_fock_expansion(spec), anc, a);
      r.kernel = kernel.name();
    } else {
      r = witness_c(spec, kernel, a);
    }
    r.family = spec.name();
    res.table.add_report(a, r);
    res.reports.push_back(r);
  }
  return res;
}

ExperimentResult run_asym_volumes(const ExperimentConfig& c) {
  ExperimentResult res;
  res.table = CsvTable(CsvTable::report_header("state", {"grid_v2d"}));
  res.x_label = "state";
  res.y_label = "V_2D";
  int idx = 1;
  for (const FamilySpec& spec : {FamilySpec::psi1(), FamilySpec::psi2()}) {
    WitnessReport r = volume_report(spec, family_v2d_numeric(spec));
    const WitnessReport g =
        witness_a(family_slice_function(spec), disc_grid(c.delta, std::max(c.radius, family_tail_radius(spec))),
                  spec.modes(), {true, c.threads});
    const double grid_v = 2.0 / std::numbers::pi * g.value;
    r.params["grid_v2d"] = grid_v;
    res.table.add_report(idx++, r, {format_number(grid_v)});
    res.reports.push_back(r);
  }
  return res;
}

const std::vector<ExperimentInfo>& experiments() {
  static const std::vector<ExperimentInfo> list = {
      {"wstate-violation", "W-state volume violation against M", "--m-range", false,
       run_wstate_violation},
      {"cat-violation", "cat-state volume violation against cat size", "--m-range --g-range", false,
       run_cat_violation},
      {"dicke-violation", "Dicke-state volume violation against M", "--m-range", false,
       run_dicke_violation},
      {"wstate-loss", "lossy W-state volume against eta, eta_max per M", "--m-range --eta-range", false,
       run_wstate_loss},
      {"cat-loss-threshold", "threshold loss eta_max against cat size", "--m-range --g-range",
       false, run_cat_loss_threshold},
      {"rmin", "W-state volume over a finite disc, minimal radius", "--m-range --r-range", false,
       run_rmin},
      {"numint", "grid integration with rigorous or heuristic error",
       "--family --delta --delta-range --r --energy", false, run_numint},
      {"witness-b-w", "optimized settings matrix for lossy W states",
       "--family --n --n-range --eta-range --restarts --evals", true,
       [](const ExperimentConfig& c) { return run_witness_b(c, "w:M=3,eta=0.03"); }},
      {"witness-b-cat", "optimized settings matrix for lossy cat states",
       "--family --n --n-range --eta-range --restarts --evals", true,
       [](const ExperimentConfig& c) { return run_witness_b(c, "cat:M=3,gamma=1,eta=0.1"); }},
      {"witness-e-zeta", "kernel witness against the effective noise zeta",
       "--zeta-range --n-range --restarts --evals", true, run_witness_e_zeta},
      {"kernel-scan", "squeezed-kernel scan at fixed settings", "--family --s-range", false,
       run_kernel_scan},
      {"mc-witness4", "random-displacement Monte-Carlo estimate",
       "--family --alpha-re --alpha-im --sigma --samples", true, run_mc_witness4},
      {"smoothed-wigner", "smoothed Wigner values with ancilla kernels (witness C)",
       "--family --kernel --a-range --oracle", false, run_smoothed_wigner},
      {"asym-volumes", "volumes of the asymmetric tripartite states psi1 and psi2", "--delta --r", false,
       run_asym_volumes},
  };
  return list;
}

void write_gnuplot(std::ostream& os, const std::string& csv, const ExperimentResult& res) {
  os << "set datafile separator ','\n"
     << "set key autotitle columnhead\n"
     << "set xlabel '" << res.x_label << "'\n"
     << "set ylabel '" << res.y_label << "'\n"
     << "plot '" << csv << "' using 1:2 with linespoints, '' using 1:3 with lines\n";
}

json experiment_json(const ExperimentConfig& c, const ExperimentResult& res) {
  json j;
  j["experiment"] = c.name;
  j["config"] = {{"family", c.family},
                 {"kernel", c.kernel},
                 {"seed", c.seed ? json(*c.seed) : json(nullptr)},
                 {"threads", c.threads}};
  j["summary"] = res.summary;
  json reps = json::array();
  for (const auto& r : res.reports) reps.push_back(to_json(r));
  j["reports"] = reps;
  return j;
}

int run(const ExperimentConfig& c) {
  if (c.name == "list") {
    CsvTable t({"name", "reproduces", "parameters", "stochastic"});
    for (const auto& e : experiments()) t.add({e.name, e.reproduces, e.parameters,
                                               e.stochastic ? "true" : "false"});
    t.write(std::cout);
    return 0;
  }
  const ExperimentInfo* info = nullptr;
  for (const auto& e : experiments())
    if (e.name == c.name) info = &e;
  if (!info) throw ConfigurationError("unknown experiment '" + c.name + "'; run 'list' for the catalogue");
  if (info->stochastic && !c.seed)
    throw ConfigurationError("experiment '" + c.name + "' is stochastic and needs --seed");
  if (c.format != "csv" && c.format != "json" && c.format != "both")
    throw ConfigurationError("--format must be csv, json or both");
  const ExperimentResult res = info->run(c);
  const bool csv = c.format != "json", js = c.format != "csv";
  if (c.out.empty()) {
    if (csv) res.table.write(std::cout);
    if (js) std::cout << experiment_json(c, res).dump(2) << '\n';
  } else {
    std::filesystem::create_directories(c.out);
    const std::filesystem::path base = std::filesystem::path(c.out) / c.name;
    if (csv) {
      std::ofstream f(base.string() + ".csv");
      res.table.write(f);
    }
    if (js) {
      std::ofstream f(base.string() + ".json");
      f << experiment_json(c, res).dump(2) << '\n';
    }
    if (c.gnuplot) {
      std::ofstream f(base.string() + ".gp");
      write_gnuplot(f, c.name + ".csv", res);
    }
  }
  if (c.gnuplot && c.out.empty()) write_gnuplot(std::cerr, c.name + ".csv", res);
  for (const auto& r : res.reports)
    if (r.certified) return 0;
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  ExperimentConfig c;
  CLI::App app{"Phase-space GME certification experiments"};
  app.add_option("experiment", c.name, "Experiment name, or 'list'")->required();
  app.add_option("--family", c.family, "Family string, e.g. w:M=3,eta=0.1");
  app.add_option("--kernel", c.kernel, "Ancilla: vacuum, fock<n>, squeezed:<s>");
  app.add_option("--seed", c.seed, "RNG seed (required for stochastic experiments)");
  app.add_option("--out", c.out, "Output directory (stdout when omitted)");
  app.add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--format", c.format, "csv, json or both");
  app.add_flag("--gnuplot", c.gnuplot, "Also emit a gnuplot script");
  app.add_option("--m-range", c.m_range, "Mode counts lo..hi");
  app.add_option("--n-range", c.n_range, "Matrix dimensions lo..hi");
  app.add_option("--s-range", c.s_range, "Squeezing start:stop:step");
  app.add_option("--eta-range", c.eta_range, "Loss start:stop:step");
  app.add_option("--g-range", c.g_range, "Cat size start:stop:step");
  app.add_option("--r-range", c.r_range, "Disc radius start:stop:step");
  app.add_option("--zeta-range", c.zeta_range, "Effective noise start:stop:step");
  app.add_option("--a-range", c.a_range, "Phase-space amplitude start:stop:step");
  app.add_option("--delta-range", c.delta_range, "Grid spacing start:stop:step");
  app.add_option("--delta", c.delta, "Grid spacing");
  app.add_option("--r", c.radius, "Integration disc radius");
  app.add_option("--energy", c.energy, "Mean-energy bound for the rigorous error");
  app.add_option("--n", c.n, "Settings-matrix dimension N");
  app.add_option("--restarts", c.restarts, "Optimizer restarts");
  app.add_option("--evals", c.evals, "Optimizer evaluations per phase");
  app.add_option("--init-radius", c.init_radius, "Radius of random optimizer starts");
  app.add_option("--samples", c.samples, "Monte-Carlo samples");
  app.add_option("--alpha-re", c.alpha_re, "Target point, real part");
  app.add_option("--alpha-im", c.alpha_im, "Target point, imaginary part");
  app.add_option("--sigma", c.sigma, "Isotropic displacement covariance");
  app.add_flag("--oracle", c.oracle, "Use the Fock-space oracle instead of closed forms");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    return run(c);
  } catch (const ResourceError& e) {
    std::cerr << "resource error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return 1;
}
