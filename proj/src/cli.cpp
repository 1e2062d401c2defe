#include "mcfs/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "CLI11.hpp"
#include "acceptance/acceptance.hpp"
#include "mcfs/error.hpp"
#include "mcfs/io.hpp"
#include "mcfs/linflow.hpp"
#include "mcfs/model.hpp"
#include "mcfs/orbits.hpp"
#include "mcfs/parallel.hpp"
#include "mcfs/signature.hpp"
#include "mcfs/spectra.hpp"

namespace mcfs::cli {
namespace {

namespace fs = std::filesystem;
using io::Json;

constexpr const char* kVersion = "0.1.0";
constexpr const char* kDefaultModel = R"({"name": "goodwin", "params": {"n": 3, "p": 10, "b": 0.4}})";

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::invalid_input:
    case ErrorCode::unsupported_feedback_sign:
    case ErrorCode::not_in_lambda:
    case ErrorCode::precondition_violation:
    case ErrorCode::missing_period:
    case ErrorCode::dependent_basis:
      return kInvalidInput;
    case ErrorCode::cone_consistency_violation:
      return kPropertyViolated;
    default:
      return kNumericalFailure;
  }
}

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
};

struct Context {
  std::ostream& out;
  std::ostream& err;
  std::string command;
  std::vector<std::string> args;
  Common common;

  std::optional<fs::path> out_dir(bool by_default) const {
    if (!common.out.empty()) return fs::path(common.out);
    if (by_default) return fs::path("mcfs_out");
    return std::nullopt;
  }

  // report.json holds only deterministic content; run details go to metadata.json.
  void write_report(const fs::path& dir, const Json& report) const {
    io::write_json(dir / "report.json", report);
    Json meta;
    meta["tool"] = "mcfs";
    meta["version"] = kVersion;
    meta["command"] = command;
    meta["args"] = args;
    meta["seed"] = common.seed;
    meta["threads"] = thread_count();
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    meta["timestamp"] = stamp;
    io::write_json(dir / "metadata.json", meta);
  }

  void write_witness(const fs::path& dir, const Json& witness) const {
    io::write_json(dir / "witness.json", witness);
    err << "property violated; witness written to " << (dir / "witness.json").string() << "\n";
  }
};

model::CyclicSystem load_model(const std::string& spec) {
  const std::string text = spec.empty() ? kDefaultModel : spec;
  Json j;
  if (text.find('{') != std::string::npos) {
    try {
      j = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::invalid_input, std::string("malformed model JSON: ") + e.what());
    }
  } else {
    j = io::read_json(text);
  }
  return model::from_json(nlohmann::json::parse(j.dump()));
}

Vector default_start(int n) {
  Vector x(n);
  for (int i = 0; i < n; ++i) x(i) = 0.1 * (i + 1);
  return x;
}

std::string join(const Json& arr) {
  std::string s;
  for (const auto& e : arr) {
    if (!s.empty()) s += ',';
    s += e.is_number_float() ? io::dump(e) : e.dump();
  }
  return s;
}

// Turns a JSON config object into "--key=value" arguments. Unknown keys are
// rejected later by the parser like unknown flags.
std::vector<std::string> config_args(const fs::path& path) {
  const Json cfg = io::read_json(path);
  if (!cfg.is_object()) throw Error(ErrorCode::invalid_input, "config must be a JSON object");
  std::vector<std::string> out;
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    const Json& v = it.value();
    const std::string flag = "--" + it.key();
    if (v.is_boolean()) {
      if (v.get<bool>()) out.push_back(flag);
    } else if (v.is_object()) {
      out.push_back(flag + "=" + v.dump());
    } else if (v.is_array()) {
      out.push_back(flag + "=" + join(v));
    } else if (v.is_string()) {
      out.push_back(flag + "=" + v.get<std::string>());
    } else if (v.is_number()) {
      out.push_back(flag + "=" + (v.is_number_float() ? io::dump(v) : v.dump()));
    } else {
      throw Error(ErrorCode::invalid_input, "config key '" + it.key() + "' has an unsupported value");
    }
  }
  return out;
}

Json bounds_json(const signature::LyapunovBounds& b) { return io::to_json(b); }

// ---- simulate ---------------------------------------------------------------

struct SimulateOpts {
  std::string model;
  std::string x0;
  double t0 = 0.0;
  double t1 = 100.0;
  double tol = 1e-10;
};

int simulate(const Context& ctx, const SimulateOpts& o) {
  const auto sys = load_model(o.model);
  const Vector x0 = o.x0.empty() ? default_start(sys.dimension()) : io::parse_vector(o.x0);
  const auto traj = orbits::integrate(sys, x0, o.t0, o.t1, o.tol);
  const Signs mu = model::normalizing_signs(sys.delta());

  std::string series = "t,N_min,N_max\n";
  for (std::size_t k = 0; k < traj.t.size(); ++k) {
    Vector v = traj.dy[k];
    for (std::size_t i = 0; i < mu.size(); ++i) v(static_cast<Eigen::Index>(i)) *= mu[i];
    const auto b = signature::bounds_N(v);
    series += io::dump(Json(traj.t[k])) + "," + std::to_string(b.n_min) + "," + std::to_string(b.n_max) + "\n";
  }
  Json report;
  report["model"] = sys.label();
  report["n"] = sys.dimension();
  report["t0"] = o.t0;
  report["t1"] = o.t1;
  report["x0"] = io::to_json(x0);
  report["steps"] = traj.accepted;
  report["final_state"] = io::to_json(traj.final_state());
  const fs::path dir = *ctx.out_dir(true);
  io::write_text(dir / "trajectory.csv", io::trajectory_csv(traj));
  io::write_text(dir / "n_series.csv", series);
  ctx.write_report(dir, report);
  ctx.out << "steps=" << traj.accepted << " final=" << io::dump(io::to_json(traj.final_state()), -1) << "\n";
  return kOk;
}

// ---- lyapunov ---------------------------------------------------------------

struct LyapunovOpts {
  std::string x;
};

int lyapunov(const Context& ctx, const LyapunovOpts& o) {
  const Vector x = io::parse_vector(o.x);
  if (x.size() < 3) throw Error(ErrorCode::invalid_input, "vector needs at least 3 entries");
  const auto b = signature::bounds_N(x);
  if (b.exact) {
    ctx.out << "N=" << b.n_min << "\n";
  } else {
    ctx.out << "N_m=" << b.n_min << " N_M=" << b.n_max << "\n";
  }
  if (const auto dir = ctx.out_dir(false)) {
    Json report;
    report["x"] = io::to_json(x);
    report["signs"] = io::to_json(signature::sign_vector(x));
    report["bounds"] = bounds_json(b);
    ctx.write_report(*dir, report);
  }
  return kOk;
}

// ---- split ------------------------------------------------------------------

struct SplitOpts {
  int reference = 0;
  std::string matrix;
  std::string linear;
  double t = 1.0;
  std::size_t samples = 200;
};

int split(const Context& ctx, const SplitOpts& o) {
  const int sources = (o.reference > 0) + !o.matrix.empty() + !o.linear.empty();
  if (sources != 1) throw Error(ErrorCode::invalid_input, "give exactly one of --reference, --matrix, --linear");
  if (!(o.t > 0.0)) throw Error(ErrorCode::invalid_input, "--t must be positive");
  Matrix l;
  if (o.reference > 0) {
    if (o.reference < 3) throw Error(ErrorCode::invalid_input, "--reference needs n >= 3");
    l = (o.t * spectra::reference_matrix(o.reference)).exp();
  } else if (!o.matrix.empty()) {
    l = io::matrix_from_json(io::read_json(o.matrix));
  } else {
    const linflow::LinearCyclicSystem sys(io::coefficient_spec_from_json(io::read_json(o.linear)));
    l = sys.period() ? linflow::monodromy(sys, 1e-10).value : linflow::transition(sys, 0.0, o.t, 1e-10).value;
  }
  const auto s = spectra::split(l);
  const auto check = spectra::verify_split_cones(s, o.samples, ctx.common.seed);

  Json report = io::to_json(s);
  report["cone_check"] = io::to_json(check);
  std::string spectrum = "h,re,im,modulus\n";
  for (int h = 0; h < s.block_count(); ++h) {
    for (const Complex& z : s.eigenvalues[static_cast<std::size_t>(h)]) {
      spectrum += std::to_string(h + 1) + "," + io::dump(Json(z.real())) + "," + io::dump(Json(z.imag())) + "," +
                  io::dump(Json(std::abs(z))) + "\n";
    }
  }
  const fs::path dir = *ctx.out_dir(true);
  io::write_text(dir / "matrix.csv", io::matrix_csv(l));
  io::write_text(dir / "spectrum.csv", spectrum);
  ctx.write_report(dir, report);
  ctx.out << "blocks=" << s.block_count() << " moduli=";
  for (int h = 0; h < s.block_count(); ++h) ctx.out << (h ? "," : "") << s.mu[static_cast<std::size_t>(h)];
  ctx.out << " violations=" << check.violations << "\n";
  if (!check.ok()) {
    ctx.write_witness(dir, io::to_json(check));
    return kPropertyViolated;
  }
  return kOk;
}

// ---- verify-cones -----------------------------------------------------------

struct ConesOpts {
  int n = 5;
  int h = 1;
  double t = 1.0;
  std::size_t samples = 1000;
  std::string linear;
};

int verify_cones(const Context& ctx, const ConesOpts& o) {
  const auto sys = o.linear.empty() ? linflow::random_periodic(o.n, ctx.common.seed)
                                    : linflow::LinearCyclicSystem(io::coefficient_spec_from_json(io::read_json(o.linear)));
  const auto rep = linflow::verify_cone_invariance(sys, o.h, o.t, o.samples, ctx.common.seed);
  Json report;
  if (sys.spec()) report["system"] = io::to_json(*sys.spec());
  report["cones"] = io::to_json(rep);
  const fs::path dir = *ctx.out_dir(true);
  ctx.write_report(dir, report);
  ctx.out << "n=" << sys.dimension() << " h=" << o.h << " t=" << o.t << " samples=" << rep.samples
          << " boundary=" << rep.boundary_samples << " violations=" << rep.failures << "\n";
  if (!rep.ok()) {
    ctx.write_witness(dir, io::to_json(rep));
    return kPropertyViolated;
  }
  return kOk;
}

// ---- verify-monotone --------------------------------------------------------

struct MonotoneOpts {
  int n = 4;
  int systems = 10;
  int grid = 500;
  double span = 20.0;
  std::string linear;
};

int verify_monotone(const Context& ctx, const MonotoneOpts& o) {
  if (o.systems < 1 || o.grid < 2 || !(o.span > 0.0)) throw Error(ErrorCode::invalid_input, "bad monotonicity options");
  std::vector<double> grid(static_cast<std::size_t>(o.grid));
  for (int k = 0; k < o.grid; ++k) grid[static_cast<std::size_t>(k)] = -o.span + 2.0 * o.span * k / (o.grid - 1);

  Json runs = Json::array();
  Json witnesses = Json::array();
  std::string series = "system,t,N_min,N_max\n";
  std::size_t increases = 0;
  const int count = o.linear.empty() ? o.systems : 1;
  for (int k = 0; k < count; ++k) {
    const std::uint64_t sub = ctx.common.seed + static_cast<std::uint64_t>(k);
    const auto sys = o.linear.empty() ? linflow::random_periodic(o.n, sub)
                                      : linflow::LinearCyclicSystem(io::coefficient_spec_from_json(io::read_json(o.linear)));
    Rng rng(ctx.common.seed, 1000 + static_cast<std::uint64_t>(k));
    Vector x0(sys.dimension());
    for (Eigen::Index i = 0; i < x0.size(); ++i) x0(i) = rng.normal();
    const auto trace = linflow::sample_N_along(sys, x0, grid);
    increases += trace.increases.size();
    for (const auto& s : trace.samples) {
      series += std::to_string(k) + "," + io::dump(Json(s.t)) + "," + std::to_string(s.bounds.n_min) + "," +
                std::to_string(s.bounds.n_max) + "\n";
    }
    Json r;
    r["system"] = k;
    r["x0"] = io::to_json(x0);
    r["nonincreasing"] = trace.nonincreasing;
    r["eventually_constant"] = trace.eventually_constant;
    r["initial_N"] = trace.samples.front().bounds.n_max;
    r["final_N"] = trace.samples.back().bounds.n_min;
    r["increases"] = trace.increases.size();
    runs.push_back(r);
    if (!trace.nonincreasing) {
      Json w = io::to_json(trace);
      w["system"] = k;
      if (sys.spec()) w["coefficients"] = io::to_json(*sys.spec());
      witnesses.push_back(w);
    }
  }
  Json report;
  report["grid"] = {{"from", -o.span}, {"to", o.span}, {"points", o.grid}};
  report["runs"] = runs;
  report["increases"] = increases;
  const fs::path dir = *ctx.out_dir(true);
  io::write_text(dir / "n_series.csv", series);
  ctx.write_report(dir, report);
  ctx.out << "systems=" << count << " increases=" << increases << "\n";
  if (increases > 0) {
    ctx.write_witness(dir, witnesses);
    return kPropertyViolated;
  }
  return kOk;
}

// ---- floquet ----------------------------------------------------------------

struct FloquetOpts {
  std::string model;
  std::string x0;
  double period = 0.0;
  double transient = 600.0;
};

int floquet(const Context& ctx, const FloquetOpts& o) {
  const auto sys = load_model(o.model);
  const Vector start = o.x0.empty() ? default_start(sys.dimension()) : io::parse_vector(o.x0);
  Vector guess = start;
  if (o.transient > 0.0) guess = orbits::integrate(sys, start, 0.0, o.transient).final_state();
  double period = o.period;
  if (!(period > 0.0)) {
    const auto est = orbits::estimate_period(sys, guess, std::max(o.transient, 100.0));
    if (!est) throw Error(ErrorCode::not_found, "no return to the section; give --period");
    period = *est;
  }
  const auto orbit = orbits::find_periodic(sys, guess, period);

  std::string spectrum = "index,re,im,modulus\n";
  for (std::size_t i = 0; i < orbit.multipliers.size(); ++i) {
    const Complex z = orbit.multipliers[i];
    spectrum += std::to_string(i) + "," + io::dump(Json(z.real())) + "," + io::dump(Json(z.imag())) + "," +
                io::dump(Json(std::abs(z))) + "\n";
  }
  const fs::path dir = *ctx.out_dir(true);
  io::write_text(dir / "orbit.csv", io::trajectory_csv(orbit.samples));
  io::write_text(dir / "multipliers.csv", spectrum);
  Json report = io::to_json(orbit);
  if (orbit.split) report["split"] = io::to_json(*orbit.split);
  ctx.write_report(dir, report);
  ctx.out << "period=" << io::dump(Json(orbit.period)) << " trivial_error=" << orbit.trivial_multiplier_error
          << " alignment=" << orbit.trivial_alignment << " hyperbolic=" << (orbit.hyperbolic ? "yes" : "no")
          << " h=" << orbit.h << "\n";
  if (orbit.trivial_alignment > 1e-4) {
    ctx.write_witness(dir, report);
    return kPropertyViolated;
  }
  return kOk;
}

// ---- transversality ---------------------------------------------------------

struct TransOpts {
  std::string model;
  double offset = 1e-6;
  double horizon = 3000.0;
  double transient = 600.0;
  std::size_t pairs = 1000;
};

int transversality(const Context& ctx, const TransOpts& o) {
  const auto sys = load_model(o.model);
  orbits::StudyOptions so;
  so.offset = o.offset;
  so.horizon = o.horizon;
  so.transient_time = o.transient;
  const auto study = orbits::study_equilibrium_to_orbit(sys, so);
  const auto& r = study.report;

  Json report;
  report["model"] = sys.label();
  report["equilibrium"] = io::to_json(study.equilibrium);
  Json multipliers = Json::array();
  for (const Complex& z : study.orbit.multipliers) multipliers.push_back(io::to_json(z));
  report["orbit"] = {{"base_point", io::to_json(study.orbit.base_point)},
                     {"period", study.orbit.period},
                     {"multipliers", multipliers},
                     {"hyperbolic", study.orbit.hyperbolic},
                     {"h", study.orbit.h}};
  report["connection"] = {{"offset", o.offset},
                          {"horizon", o.horizon},
                          {"connected", study.connection.connected},
                          {"terminal_distance", study.connection.terminal_distance}};
  report["transversality"] = io::to_json(r);
  std::optional<orbits::DifferenceReport> diff;
  if (r.h_minus > 0 && r.h_minus == r.h_plus) {
    diff = orbits::difference_signature(orbits::omega_points(study, 500), r.h_minus, r.h_plus,
                                        model::normalizing_signs(sys.delta()), o.pairs, ctx.common.seed);
    report["difference_signature"] = io::to_json(*diff);
  }

  std::string approach = "t,to_source,to_target\n";
  for (const auto& a : study.connection.approach) {
    approach += io::dump(Json(a.t)) + "," + io::dump(Json(a.to_source)) + "," + io::dump(Json(a.to_target)) + "\n";
  }
  std::string sigma = "index,singular_value,margin\n";
  for (std::size_t i = 0; i < r.singular_values.size(); ++i) {
    sigma += std::to_string(i) + "," + io::dump(Json(r.singular_values[i])) + "," +
             io::dump(Json(r.singular_values[i] - orbits::kTransversalTolerance)) + "\n";
  }
  const fs::path dir = *ctx.out_dir(true);
  io::write_text(dir / "connection.csv", io::trajectory_csv(study.connection.trajectory));
  io::write_text(dir / "orbit.csv", io::trajectory_csv(study.orbit.samples));
  io::write_text(dir / "approach.csv", approach);
  io::write_text(dir / "sigma.csv", sigma);
  ctx.write_report(dir, report);

  ctx.out << "verdict=" << orbits::to_string(r.verdict) << " sigma_min=" << r.sigma_min << " rank=" << r.stacked_rank
          << " h-=" << r.h_minus << " h+=" << r.h_plus << " dimWu(source)=" << r.source_unstable_dim
          << " dimWu(target)=" << r.target_unstable_dim << "\n";
  if (r.verdict == orbits::Verdict::inconclusive) return kNumericalFailure;
  if (r.verdict == orbits::Verdict::not_transversal || (diff && !diff->ok())) {
    ctx.write_witness(dir, report);
    return kPropertyViolated;
  }
  return kOk;
}

// ---- selftest ---------------------------------------------------------------

int selftest(const Context& ctx, bool seeded) {
  const std::uint64_t seed = seeded ? ctx.common.seed : acceptance::kDefaultSeed;
  int failed = 0;
  Json results = Json::array();
  for (int id = 1; id <= acceptance::kCriterionCount; ++id) {
    const auto r = acceptance::run(id, seed);
    ctx.out << acceptance::format(r) << "\n" << std::flush;
    failed += !r.passed;
    results.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
  }
  ctx.out << (acceptance::kCriterionCount - failed) << " of " << acceptance::kCriterionCount << " criteria passed\n";
  if (const auto dir = ctx.out_dir(false)) ctx.write_report(*dir, Json{{"seed", seed}, {"criteria", results}});
  return failed == 0 ? kOk : kPropertyViolated;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON file with option values (flags on the command line win)");
  sub->add_option("--seed", c.seed, "Random seed");
  sub->add_option("--out", c.out, "Output directory");
}

// Splices config-file arguments in front of the command-line ones so that
// explicit flags override them.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      continue;
    }
    const auto extra = config_args(path);
    auto command = std::find_if(args.begin(), args.end(), [](const std::string& a) { return a.rfind('-', 0) != 0; });
    if (command == args.end()) return args;
    std::vector<std::string> out(args.begin(), command + 1);
    out.insert(out.end(), extra.begin(), extra.end());
    out.insert(out.end(), command + 1, args.end());
    return out;
  }
  return args;
}

}  // namespace

int run(const std::vector<std::string>& raw, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monotone cyclic feedback systems: Lyapunov function, cones, Floquet splitting, transversality"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_version_flag("--version", kVersion);

  Common common;
  SimulateOpts sim;
  auto* s_sim = app.add_subcommand("simulate", "Integrate a nonlinear model; writes trajectory and N(t) series");
  add_common(s_sim, common);
  s_sim->add_option("--model", sim.model, "Model JSON (inline or file); default goodwin n=3 p=10 b=0.4");
  s_sim->add_option("--x0", sim.x0, "Initial state, comma separated");
  s_sim->add_option("--t0", sim.t0, "Start time");
  s_sim->add_option("--t1", sim.t1, "End time");
  s_sim->add_option("--tol", sim.tol, "Relative tolerance")->check(CLI::PositiveNumber);

  LyapunovOpts lyap;
  auto* s_lyap = app.add_subcommand("lyapunov", "Evaluate N (or its envelopes) at a vector");
  add_common(s_lyap, common);
  s_lyap->add_option("--x", lyap.x, "Vector, comma separated")->required();

  SplitOpts sp;
  auto* s_split = app.add_subcommand("split", "Spectral splitting of a cone-preserving matrix");
  add_common(s_split, common);
  s_split->add_option("--reference", sp.reference, "Use exp(t R) for the reference matrix of size n");
  s_split->add_option("--matrix", sp.matrix, "JSON file with a matrix (array of rows)");
  s_split->add_option("--linear", sp.linear, "JSON linear cyclic system; monodromy if periodic, else Phi(t, 0)");
  s_split->add_option("--t", sp.t, "Time");
  s_split->add_option("--samples", sp.samples, "Random vectors per block check");

  ConesOpts cones;
  auto* s_cones = app.add_subcommand("verify-cones", "Monte Carlo check that Phi(t) maps K_h into its interior");
  s_cones->set_help_flag("--help", "Print this help message and exit");
  add_common(s_cones, common);
  s_cones->add_option("--n", cones.n, "Dimension of the random periodic system")->check(CLI::Range(3, 64));
  s_cones->add_option("--h", cones.h, "Cone index");
  s_cones->add_option("--t", cones.t, "Time")->check(CLI::PositiveNumber);
  s_cones->add_option("--samples", cones.samples, "Number of cone points");
  s_cones->add_option("--linear", cones.linear, "JSON linear cyclic system instead of a random one");

  MonotoneOpts mono;
  auto* s_mono = app.add_subcommand("verify-monotone", "Check that N is nonincreasing along linear solutions");
  add_common(s_mono, common);
  s_mono->add_option("--n", mono.n, "Dimension of the random periodic systems")->check(CLI::Range(3, 64));
  s_mono->add_option("--systems", mono.systems, "Number of random systems");
  s_mono->add_option("--grid", mono.grid, "Grid points on [-span, span]");
  s_mono->add_option("--span", mono.span, "Half width of the time grid");
  s_mono->add_option("--linear", mono.linear, "JSON linear cyclic system instead of random ones");

  FloquetOpts fl;
  auto* s_fl = app.add_subcommand("floquet", "Locate a periodic orbit and its Floquet multipliers");
  add_common(s_fl, common);
  s_fl->add_option("--model", fl.model, "Model JSON (inline or file)");
  s_fl->add_option("--x0", fl.x0, "Start of the transient");
  s_fl->add_option("--period", fl.period, "Period guess (estimated if omitted)");
  s_fl->add_option("--transient", fl.transient, "Transient length before shooting");

  TransOpts tr;
  auto* s_tr = app.add_subcommand("transversality", "Equilibrium-to-orbit connection and transversality verdict");
  add_common(s_tr, common);
  s_tr->add_option("--model", tr.model, "Model JSON (inline or file)");
  s_tr->add_option("--offset", tr.offset, "Launch offset along the unstable direction");
  s_tr->add_option("--horizon", tr.horizon, "Integration horizon")->check(CLI::PositiveNumber);
  s_tr->add_option("--transient", tr.transient, "Transient length before shooting");
  s_tr->add_option("--pairs", tr.pairs, "Random pairs for the difference-signature check");

  bool seeded = false;
  auto* s_self = app.add_subcommand("selftest", "Run the acceptance suite");
  add_common(s_self, common);
  s_self->callback([&] { seeded = s_self->get_option("--seed")->count() > 0; });

  std::vector<std::string> args;
  try {
    args = raw.empty() ? raw : expand_config(raw);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidInput;
  }
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, x;
    const int code = app.exit(e, o, x);
    out << o.str();
    err << x.str();
    return code == 0 ? kOk : kInvalidInput;
  }

  CLI::App* sub = app.get_subcommands().front();
  const Context ctx{out, err, sub->get_name(), raw, common};
  try {
    if (sub == s_sim) return simulate(ctx, sim);
    if (sub == s_lyap) return lyapunov(ctx, lyap);
    if (sub == s_split) return split(ctx, sp);
    if (sub == s_cones) return verify_cones(ctx, cones);
    if (sub == s_mono) return verify_monotone(ctx, mono);
    if (sub == s_fl) return floquet(ctx, fl);
    if (sub == s_tr) return transversality(ctx, tr);
    return selftest(ctx, seeded);
  } catch (const Error& e) {
    err << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumericalFailure;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace mcfs::cli
