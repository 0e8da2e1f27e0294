// Copyright 2026 The dewijs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// dewijs_cli: reproduction runs and verification suites.
//
// Exit status: 0 when every check passes, 1 when a check fails or a
// computation breaks down, 2 on bad arguments.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dewijs/dewijs.hpp"

namespace {

using namespace dewijs;

struct BadArguments : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

// PASS/FAIL lines with measured value and tolerance.
class Checks {
 public:
  void below(const std::string& name, double measured, double tol, bool inclusive = true) {
    const bool ok = inclusive ? measured <= tol : measured < tol;
    add(ok, name, measured, inclusive ? "<=" : "<", tol);
  }
  void above(const std::string& name, double measured, double tol) { add(measured >= tol, name, measured, ">=", tol); }

  bool all_passed() const { return failed_.empty(); }
  const std::vector<std::string>& failures() const { return failed_; }

 private:
  void add(bool ok, const std::string& name, double measured, const char* rel, double tol) {
    // NaN never passes.
    ok = ok && !std::isnan(measured);
    std::cout << (ok ? "PASS " : "FAIL ") << name << " = " << fmt(measured) << ' ' << rel << ' ' << fmt(tol)
              << '\n';
    if (!ok) failed_.push_back(name + " = " + fmt(measured));
  }
  std::vector<std::string> failed_;
};

// Buffered output file. Written on close; a failed run appends a marker line.
class Artifact {
 public:
  explicit Artifact(std::string path) : path_(std::move(path)) { out_.precision(12); }
  Artifact(const Artifact&) = delete;
  Artifact& operator=(const Artifact&) = delete;

  // Reached without close() only when the run threw.
  ~Artifact() {
    try {
      close({"run aborted before completion"});
    } catch (...) {
    }
  }
  std::ostream& stream() { return out_; }

  void close(const std::vector<std::string>& failures) {
    if (path_.empty() || closed_) return;
    closed_ = true;
    std::ofstream file(path_, std::ios::binary);
    if (!file) throw Error(ErrorCode::IOFailure, "cannot open " + path_ + " for writing");
    file << out_.str();
    for (const auto& f : failures) file << "# FAILED " << f << '\n';
    if (!file.flush()) throw Error(ErrorCode::IOFailure, "write to " + path_ + " failed");
  }

 private:
  std::string path_;
  std::ostringstream out_;
  bool closed_ = false;
};

Point parse_point(const std::string& text) {
  std::istringstream in(text);
  Point p;
  char comma = 0;
  if (!(in >> p.x >> comma >> p.y) || comma != ',' || !(in >> std::ws).eof() || !std::isfinite(p.x) ||
      !std::isfinite(p.y)) {
    throw BadArguments("expected a point x,y but got '" + text + "'");
  }
  return p;
}

Lag parse_lag(const std::string& text) {
  const Point p = parse_point(text);
  if (p.x != std::nearbyint(p.x) || p.y != std::nearbyint(p.y)) {
    throw BadArguments("expected an integer site s,t but got '" + text + "'");
  }
  return {static_cast<int>(p.x), static_cast<int>(p.y)};
}

Contrast load_contrast(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw BadArguments("cannot read contrast file " + path);
  return read_contrast_csv(in);
}

// Values from a flat `key = value` file fill options not given as flags.
void apply_config(CLI::App& sub, const std::string& path) {
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_file(path);
  } catch (const CLI::ParseError& e) {
    throw BadArguments(std::string("config file: ") + e.what());
  }
  for (const CLI::ConfigItem& item : items) {
    if (!item.parents.empty() || item.name == "config") {
      throw BadArguments("config file: unsupported key '" + item.fullname() + "'");
    }
    CLI::Option* opt = sub.get_option_no_throw("--" + item.name);
    if (opt == nullptr) throw BadArguments("config file: unknown key '" + item.name + "'");
    if (opt->count() > 0) continue;
    if (opt->get_type_size() == 0) {
      // Flag.
      if (item.inputs.size() != 1) throw BadArguments("config file: bad flag value for '" + item.name + "'");
      opt->add_result(item.inputs.front());
    } else {
      // The reader splits on commas; points are single values.
      std::string joined;
      for (const auto& s : item.inputs) joined += (joined.empty() ? "" : ",") + s;
      opt->add_result(joined);
    }
    try {
      opt->run_callback();
    } catch (const CLI::ParseError& e) {
      throw BadArguments(std::string("config file: ") + e.what());
    }
  }
}

// ---------------------------------------------------------------------------

struct Table1Args {
  int half_width = 8;
  double tol = 0.001;
  std::string out = "table1.csv";
};

int run_table1(const Table1Args& a) {
  Checks checks;
  Artifact csv(a.out);
  const Table1Result r = reproduce_table1(a.half_width);
  write_table1_csv(csv.stream(), r);
  write_table1_report(std::cout, r);
  checks.below("weight_sum_error", std::abs(r.solution.weight_sum() - 1.0), 1e-10);
  checks.below("max_orbit_spread", r.max_orbit_spread, 1e-8);
  if (a.half_width == 8) {
    checks.below("max_abs_error", r.max_abs_error, a.tol);
    std::cout << "screening_beyond_radius_2 = " << fmt(screening_report(r.sites, {0, 0}, r.solution, 2)) << '\n';
  }
  csv.close(checks.failures());
  return checks.all_passed() ? 0 : 1;
}

struct HittingArgs {
  std::string x0 = "0.5,0";
  std::size_t n = 1000000;
  std::string method = "wos";
  double step = 1e-4;
  int bins = 36;
  double quantile = 0.999;
  bool compare = false;
  double tv_tol = 0.01;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out = "hitting.csv";
};

int run_hitting(const HittingArgs& a) {
  const Point x0 = parse_point(a.x0);
  if (!(norm(x0) < 1.0)) throw BadArguments("--x0 must lie inside the unit disk");
  if (a.method == "euler" && !(a.step > 0.0 && a.step <= 1e-3)) throw BadArguments("--step must be in (0, 1e-3]");
  Checks checks;
  Artifact csv(a.out);
  continuum::SamplerOptions opt;
  opt.method = a.method == "wos" ? continuum::Method::wos : continuum::Method::euler;
  opt.step = a.step;
  opt.seed = a.seed;
  opt.workers = a.workers;
  const auto dist = continuum::sample_hitting(x0, a.n, opt);
  const auto hist = continuum::angular_histogram(dist, a.bins);
  continuum::write_histogram_csv(csv.stream(), hist);
  std::cout << "samples = " << a.n << ", capped = " << dist.capped
            << ", max_radius_error = " << fmt(dist.max_radius_error) << '\n';
  checks.below("chi_square", hist.chi_square, continuum::chi_square_quantile(a.quantile, hist.degrees_of_freedom));
  if (a.compare) {
    continuum::SamplerOptions other = opt;
    other.method = opt.method == continuum::Method::wos ? continuum::Method::euler : continuum::Method::wos;
    other.seed = a.seed + 1;
    const auto hist2 = continuum::angular_histogram(continuum::sample_hitting(x0, a.n, other), a.bins);
    checks.below("total_variation", continuum::total_variation(hist, hist2), a.tv_tol, false);
  }
  csv.close(checks.failures());
  return checks.all_passed() ? 0 : 1;
}

struct PoissonArgs {
  int pairs = 50;
  double tol = 1e-6;
  double norm_tol = 1e-10;
  bool convergence = false;
  std::uint64_t seed = 0;
  std::string out = "poisson_check.csv";
};

int run_poisson(const PoissonArgs& a) {
  Checks checks;
  Artifact csv(a.out);
  csv.stream() << "pair,x0_x,x0_y,y_x,y_y,normalization_error,harmonic_residual\n";
  Engine engine = make_stream(a.seed, 0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_norm = 0.0;
  double worst_harmonic = 0.0;
  for (int i = 0; i < a.pairs; ++i) {
    const double r0 = 0.95 * std::sqrt(u(engine));
    const double a0 = continuum::kTwoPi * u(engine);
    const double r1 = 1.0 + 3.0 * u(engine);
    const double a1 = continuum::kTwoPi * u(engine);
    const Point x0{r0 * std::cos(a0), r0 * std::sin(a0)};
    const Point y{r1 * std::cos(a1), r1 * std::sin(a1)};
    const double norm_err = std::abs(continuum::poisson_normalization(x0) - 1.0);
    const double harm = continuum::harmonic_identity_check(x0, y);
    worst_norm = std::max(worst_norm, norm_err);
    worst_harmonic = std::max(worst_harmonic, harm);
    csv.stream() << i << ',' << x0.x << ',' << x0.y << ',' << y.x << ',' << y.y << ',' << norm_err << ','
                 << harm << '\n';
  }
  if (a.pairs > 0) {
    checks.below("max_normalization_error", worst_norm, a.norm_tol);
    checks.below("max_harmonic_residual", worst_harmonic, a.tol, false);
  }
  if (a.convergence) {
    const Point x0{0.5, 0.0};
    const double e90 = continuum::segment_kriging_error(x0, 90);
    const double e180 = continuum::segment_kriging_error(x0, 180);
    const double e360 = continuum::segment_kriging_error(x0, 360);
    std::cout << "segment errors 90/180/360 = " << fmt(e90) << ' ' << fmt(e180) << ' ' << fmt(e360) << '\n';
    checks.above("reduction_90_to_180", e90 / e180, 1.8);
    checks.above("reduction_180_to_360", e180 / e360, 1.8);
  }
  csv.close(checks.failures());
  return checks.all_passed() ? 0 : 1;
}

struct LatticeArgs {
  std::optional<int> box;
  bool no_corners = false;
  std::optional<std::size_t> random_cells;
  std::string domain;
  bool all_interior = false;
  std::string x;
  double tol = 1e-8;
  std::uint64_t seed = 0;
  std::string out = "lattice_check.csv";
};

int run_lattice(const LatticeArgs& a) {
  const int sources = (a.box ? 1 : 0) + (a.random_cells ? 1 : 0) + (a.domain.empty() ? 0 : 1);
  if (sources != 1) throw BadArguments("give exactly one of --box, --random-cells, --domain");
  if (a.all_interior == !a.x.empty()) throw BadArguments("give exactly one of --all-interior, --x");
  auto dom = [&]() -> lattice::LatticeDomain {
    if (a.box) return lattice::LatticeDomain::box(*a.box, !a.no_corners);
    if (a.random_cells) return lattice::random_simply_connected_domain(*a.random_cells, a.seed);
    std::ifstream in(a.domain);
    if (!in) throw BadArguments("cannot read domain file " + a.domain);
    return lattice::read_domain_csv(in);
  }();
  std::vector<Lag> targets;
  if (a.all_interior) {
    targets = dom.interior();
  } else {
    targets.push_back(parse_lag(a.x));
    if (!dom.is_interior(targets.front())) throw BadArguments("--x is not an interior site");
  }
  if (dom.diameter() > lattice::kMaxPotentialLag) throw BadArguments("domain is wider than the potential table");

  Checks checks;
  Artifact csv(a.out);
  csv.stream() << "s,t,max_deviation\n";
  const lattice::PotentialKernelTable table(std::max(1, dom.diameter()));
  const lattice::HittingSolver solver(dom);
  double worst = 0.0;
  for (Lag x : targets) {
    const double dev = lattice::dynkin_crosscheck(dom, x, table, &solver).max_deviation;
    worst = std::max(worst, dev);
    csv.stream() << x.s << ',' << x.t << ',' << dev << '\n';
  }
  std::cout << "interior = " << dom.interior().size() << ", boundary = " << dom.boundary().size()
            << ", points checked = " << targets.size() << '\n';
  checks.below("max_deviation", worst, a.tol, false);
  csv.close(checks.failures());
  return checks.all_passed() ? 0 : 1;
}

struct PotentialArgs {
  int max_lag = 64;
  std::string out = "potential.csv";
};

int run_potential(const PotentialArgs& a) {
  Checks checks;
  Artifact csv(a.out);
  const lattice::PotentialKernelTable table(a.max_lag);
  table.write_csv(csv.stream());
  checks.below("a(1,0)_error", std::abs(table({1, 0}) - 1.0), 1e-8, false);
  checks.below("a(1,1)_error", std::abs(table({1, 1}) - 4.0 / std::numbers::pi), 1e-8, false);
  checks.below("laplacian_residual", table.laplacian_residual(), 1e-10, false);
  csv.close(checks.failures());
  return checks.all_passed() ? 0 : 1;
}

struct OccupationArgs {
  std::string sigma;
  std::string nu;
  std::uint64_t horizon = 100000;
  std::size_t walks = 1000000;
  double tol = 0.05;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out = "occupation.csv";
};

int run_occupation(const OccupationArgs& a) {
  const Contrast dipole = make_contrast(
      {Atom{{0, 0}, Support::point, 1.0}, Atom{{1, 0}, Support::point, -1.0}}, Space::lattice);
  const Contrast sigma = a.sigma.empty() ? dipole : load_contrast(a.sigma);
  const Contrast nu = a.nu.empty() ? dipole : load_contrast(a.nu);
  int reach = 1;
  for (const Contrast* c : {&sigma, &nu}) {
    for (const Atom& s : sigma.atoms()) {
      for (const Atom& t : c->atoms()) {
        reach = std::max(reach, chebyshev({static_cast<int>(s.location.x - t.location.x),
                                           static_cast<int>(s.location.y - t.location.y)}));
      }
    }
  }
  if (reach > lattice::kMaxPotentialLag) throw BadArguments("contrasts are farther apart than the potential table");

  Checks checks;
  Artifact csv(a.out);
  lattice::OccupationOptions opt;
  opt.horizon = a.horizon;
  opt.walks = a.walks;
  opt.seed = a.seed;
  opt.workers = a.workers;
  const lattice::PotentialKernelTable table(reach);
  const auto r = lattice::occupation_identity_check(sigma, nu, opt, table);
  csv.stream() << "estimate,standard_error,kernel_value,calibrated_constant,relative_error\n";
  csv.stream() << r.estimate << ',' << r.standard_error << ',' << r.kernel_value << ','
               << r.calibrated_constant << ',' << r.relative_error << '\n';
  std::cout << "estimate = " << fmt(r.estimate) << " +- " << fmt(r.standard_error)
            << ", kernel = " << fmt(r.kernel_value) << ", calibrated constant = " << fmt(r.calibrated_constant)
            << '\n';
  checks.below("relative_error", r.relative_error, a.tol);
  csv.close(checks.failures());
  return checks.all_passed() ? 0 : 1;
}

bool is_argument_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::NonzeroMass:
    case ErrorCode::MixedSupport:
    case ErrorCode::IncompatibleKernel:
    case ErrorCode::NotInterior:
      return true;
    default:
      return false;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"de Wijs process and Dynkin isomorphism toolkit"};
  app.require_subcommand(1);
  std::string config;

  Table1Args t1;
  auto* table1 = app.add_subcommand("table1", "krige the centre cell of a square grid of unit cells");
  table1->add_option("--grid-half-width", t1.half_width, "grid half width h (grid is 2h+1 square)")
      ->check(CLI::Range(1, 64));
  table1->add_option("--tol", t1.tol, "tolerance against the reference weights")->check(CLI::PositiveNumber);
  table1->add_option("--out", t1.out, "CSV of folded weights");

  HittingArgs hit;
  auto* hitting = app.add_subcommand("hitting", "sample Brownian exit angles from the unit disk");
  hitting->add_option("--x0", hit.x0, "start point x,y");
  hitting->add_option("--n", hit.n, "number of samples")->check(CLI::Range(std::size_t{1}, std::size_t{1} << 40));
  hitting->add_option("--method", hit.method, "wos or euler")->check(CLI::IsMember({"wos", "euler"}));
  hitting->add_option("--step", hit.step, "Euler increment variance per coordinate");
  hitting->add_option("--bins", hit.bins, "angular bins")->check(CLI::Range(2, 100000));
  hitting->add_option("--quantile", hit.quantile, "chi-square acceptance quantile")->check(CLI::Range(0.5, 0.999999));
  hitting->add_flag("--compare", hit.compare, "also run the other sampler and compare histograms");
  hitting->add_option("--tv-tol", hit.tv_tol, "total-variation tolerance for --compare");
  hitting->add_option("--seed", hit.seed);
  hitting->add_option("--workers", hit.workers)->check(CLI::Range(1, 1024));
  hitting->add_option("--out", hit.out, "histogram CSV");

  PoissonArgs poi;
  auto* poisson = app.add_subcommand("poisson-check", "Poisson-kernel normalization and harmonic identity");
  poisson->add_option("--pairs", poi.pairs, "random (x0, y) pairs")->check(CLI::Range(0, 1000000));
  poisson->add_option("--tol", poi.tol, "harmonic-identity tolerance")->check(CLI::PositiveNumber);
  poisson->add_option("--norm-tol", poi.norm_tol, "normalization tolerance")->check(CLI::PositiveNumber);
  poisson->add_flag("--convergence", poi.convergence, "also run the 90/180/360 segment-kriging order test");
  poisson->add_option("--seed", poi.seed);
  poisson->add_option("--out", poi.out, "per-pair CSV");

  LatticeArgs lat;
  auto* lattice_cmd = app.add_subcommand("lattice-check", "kriging weights versus hitting probabilities");
  lattice_cmd->add_option("--box", lat.box, "n x n interior box")->check(CLI::Range(1, 60));
  lattice_cmd->add_flag("--no-corners", lat.no_corners, "leave the box's corner sites out of the boundary");
  lattice_cmd->add_option("--random-cells", lat.random_cells, "random simply connected domain of this many cells")
      ->check(CLI::Range(std::size_t{1}, std::size_t{2000}));
  lattice_cmd->add_option("--domain", lat.domain, "domain CSV with rows s,t,role");
  lattice_cmd->add_flag("--all-interior", lat.all_interior, "check every interior site");
  lattice_cmd->add_option("--x", lat.x, "single interior site s,t");
  lattice_cmd->add_option("--tol", lat.tol)->check(CLI::PositiveNumber);
  lattice_cmd->add_option("--seed", lat.seed);
  lattice_cmd->add_option("--out", lat.out, "per-site CSV");

  PotentialArgs pot;
  auto* potential = app.add_subcommand("potential", "tabulate the random-walk potential kernel");
  potential->add_option("--max-lag", pot.max_lag)->check(CLI::Range(1, lattice::kMaxPotentialLag));
  potential->add_option("--out", pot.out, "CSV s,t,a");

  OccupationArgs occ;
  auto* occupation = app.add_subcommand("occupation", "occupation-time Monte Carlo against the potential kernel");
  occupation->add_option("--sigma", occ.sigma, "contrast CSV (default: dipole at (0,0), (1,0))");
  occupation->add_option("--nu", occ.nu, "contrast CSV (default: same dipole)");
  occupation->add_option("--horizon", occ.horizon)->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1} << 40));
  occupation->add_option("--walks", occ.walks)->check(CLI::Range(std::size_t{1}, std::size_t{1} << 40));
  occupation->add_option("--tol", occ.tol, "relative tolerance")->check(CLI::PositiveNumber);
  occupation->add_option("--seed", occ.seed);
  occupation->add_option("--workers", occ.workers)->check(CLI::Range(1, 1024));
  occupation->add_option("--out", occ.out, "result CSV");

  for (CLI::App* sub : app.get_subcommands({})) {
    sub->add_option("--config", config, "file of key = value lines; flags take precedence");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    if (!config.empty()) apply_config(*sub, config);
    if (sub == table1) return run_table1(t1);
    if (sub == hitting) return run_hitting(hit);
    if (sub == poisson) return run_poisson(poi);
    if (sub == lattice_cmd) return run_lattice(lat);
    if (sub == potential) return run_potential(pot);
    if (sub == occupation) return run_occupation(occ);
  } catch (const BadArguments& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return is_argument_error(e.code()) ? 2 : 1;
  }
  return 2;
}
