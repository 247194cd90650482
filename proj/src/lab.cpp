#include "chanstab/lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>

#include "chanstab/error.hpp"
#include "chanstab/snapshot.hpp"
#include "chanstab/spectra.hpp"

namespace chanstab {

namespace {

constexpr double kPi = std::numbers::pi;

const Json& section(const Json& j, const char* key) {
  static const Json empty = Json::object();
  return j.contains(key) ? j.at(key) : empty;
}

std::string get_string(const Json& j, const std::string& key, const std::string& fallback) {
  return j.is_object() && j.contains(key) ? j.at(key).get<std::string>() : fallback;
}

bool is_monotone_shear(const Field& w) {
  const GridSpec& g = w.grid();
  const double scale = std::max(w.max_abs(), 1e-300);
  std::vector<double> rows(g.n2);
  for (int j = 0; j < g.n2; ++j) {
    double lo = w(0, j);
    double hi = lo;
    for (int i = 1; i < g.n1; ++i) {
      lo = std::min(lo, w(i, j));
      hi = std::max(hi, w(i, j));
    }
    if (hi - lo > 1e-12 * scale) return false;
    rows[j] = w(0, j);
  }
  bool up = true;
  bool down = true;
  for (int j = 1; j < g.n2; ++j) {
    if (rows[j] < rows[j - 1]) up = false;
    if (rows[j] > rows[j - 1]) down = false;
  }
  return up || down;
}

Field random_smooth(const GridSpec& g, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  Field rho(g);
  for (int m = 0; m <= 3; ++m) {
    for (int k = 1; k <= 4; ++k) {
      const double amp = normal(rng) / (1.0 + m + k);
      const double ph = phase(rng);
      for (int j = 0; j < g.n2; ++j) {
        const double sy = std::sin(k * kPi * g.x2(j) / g.H);
        for (int i = 0; i < g.n1; ++i) rho(i, j) += amp * std::cos(2.0 * kPi * m * g.x1(i) / g.L + ph) * sy;
      }
    }
  }
  return rho;
}

double lp_distance_any(const Field& a, const Field& b, double p) {
  return p == 1.0 ? lp_norm(a - b, 1.0) : lp_distance(a, b, p);
}

double sup_of(const std::vector<DiagnosticsRecord>& records, std::optional<double> DiagnosticsRecord::*field) {
  double s = 0.0;
  for (const auto& r : records) {
    if (r.*field) s = std::max(s, *(r.*field));
  }
  return s;
}

StabilityReport run_experiment(const ExperimentConfig& cfg, bool monotone) {
  const SteadySpec flow = build_flow(cfg.flow, cfg.grid);
  if (monotone && !is_monotone_shear(flow.vorticity)) {
    throw PreconditionError("monotone-shear experiment: vorticity is not a monotone function of x2");
  }
  const PoissonSolver solver(cfg.grid);
  StabilityReport rep;
  rep.name = cfg.name;
  rep.experiment = monotone ? "monotone-shear" : "stability";
  rep.lambda1 = lambda1(cfg.grid.L, cfg.grid.H).value;
  if (flow.g.value) {
    rep.classification = to_string(classify_conditions(flow, cfg.grid.L, cfg.grid.H));
    rep.gprime_range = flow.gprime_range;
    const double norm = l2_norm(flow.vorticity);
    rep.steady_residual_scale = norm > 0.0 ? residual_tvs1(flow) / norm : 0.0;
  } else {
    rep.classification = "monotone-shear";
    rep.gprime_range = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  }

  const Perturbed pert = perturb(flow.vorticity, cfg.perturbation, cfg.p);
  rep.initial_distance = pert.distance;
  const FlowState s0{pert.omega, flow.flux()};

  double dt = cfg.dt ? *cfg.dt : 0.9 * cfl_time_step(solver, s0, cfg.cfl);
  if (!std::isfinite(dt)) dt = cfg.T > 0.0 ? cfg.T / 16.0 : 1.0;
  const int n = cfg.T > 0.0 ? std::max(1, static_cast<int>(std::ceil(cfg.T / dt - 1e-9))) : 0;
  const int every = cfg.every > 0 ? cfg.every : std::max(1, n / 200);

  SimulationOptions opts;
  opts.step.cfl_limit = std::max(cfg.cfl, 0.5);
  opts.step.hyperviscosity = cfg.hyperviscosity;
  opts.reference = flow.vorticity;
  opts.p = cfg.p;
  std::vector<double> pending = cfg.snapshot_times;
  if (!cfg.out.empty() && !pending.empty()) {
    std::filesystem::create_directories(cfg.out);
    const double half = 0.5 * (n > 0 ? cfg.T / n : dt) * every;
    opts.on_record = [&](const DiagnosticsRecord& r, const FlowState& s) {
      for (auto it = pending.begin(); it != pending.end();) {
        if (std::abs(*it - r.t) <= half) {
          char name[64];
          std::snprintf(name, sizeof name, "omega_t%.6g.snap", *it);
          write_snapshot(cfg.out / name, s.vorticity, "omega");
          it = pending.erase(it);
        } else {
          ++it;
        }
      }
    };
  }

  SimulationResult sim = simulate(solver, s0, cfg.T, dt, every, opts);
  rep.dt = sim.dt;
  rep.hyperviscosity = cfg.hyperviscosity;
  rep.aborted = sim.aborted;
  rep.abort_reason = sim.abort_reason;
  rep.sup_plain = sup_of(sim.records, &DiagnosticsRecord::plain_distance);
  rep.sup_orbital = sup_of(sim.records, &DiagnosticsRecord::orbital_distance);
  if (sim.records.size() >= 2) rep.admissibility = admissibility_report(sim.records, s0.vorticity);
  rep.records = std::move(sim.records);
  return rep;
}

Json range_json(std::pair<double, double> r) {
  auto v = [](double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); };
  return Json::array({v(r.first), v(r.second)});
}

}  // namespace

std::string version_string() { return "chanstab 1.0.0"; }

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

GridSpec grid_from_json(const Json& j) {
  return GridSpec(require_number(j, "L"), require_number(j, "H"),
                  static_cast<int>(require_number(j, "n1")), static_cast<int>(require_number(j, "n2")));
}

SteadySpec build_flow(const Json& flow, const GridSpec& grid) {
  const std::string kind = get_string(flow, "kind", "");
  if (kind == "shear") {
    return shear_flow(get_number(flow, "a", 1.0), get_number(flow, "m", 1.0), get_number(flow, "alpha", 0.0),
                      get_number(flow, "b", 0.0), get_number(flow, "c", 0.0), grid);
  }
  if (kind == "hyperbolic-shear") {
    return hyperbolic_shear_flow(get_number(flow, "a", 1.0), get_number(flow, "m", 1.0),
                                 get_number(flow, "b", 0.0), get_number(flow, "c", 0.0), grid);
  }
  if (kind == "e1") {
    return e1_traveling_flow(get_number(flow, "a", 1.0), get_number(flow, "b", 0.0), get_number(flow, "c", 0.0),
                             get_number(flow, "d", 0.0), grid);
  }
  if (kind == "monotone") {
    const std::string profile = get_string(flow, "profile", "tanh");
    Field w;
    if (profile == "tanh") {
      const double amp = get_number(flow, "amplitude", 1.0);
      const double width = get_number(flow, "width", 0.3);
      if (!(width > 0.0)) throw PreconditionError("monotone flow: width must be positive");
      w = Field::from_function(grid, [&](double, double y) { return amp * std::tanh((y - 0.5 * grid.H) / width); });
    } else if (profile == "linear") {
      const double slope = get_number(flow, "slope", 1.0);
      const double offset = get_number(flow, "offset", 0.0);
      w = Field::from_function(grid, [&](double, double y) { return slope * y + offset; });
    } else {
      throw PreconditionError("monotone flow: unknown profile '" + profile + "'");
    }
    SteadySpec s;
    s.kind = "monotone";
    s.psi = PoissonSolver(grid).green_apply(w);
    s.vorticity = std::move(w);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.gprime_range = {nan, nan};
    return s;
  }
  throw PreconditionError("unknown flow kind '" + kind + "'");
}

Perturbed perturb(const Field& omega_bar, const PerturbationConfig& cfg, double p) {
  if (!(cfg.amplitude >= 0.0)) throw PreconditionError("perturbation amplitude must be >= 0");
  const GridSpec& g = omega_bar.grid();
  Perturbed out{omega_bar, 0.0};
  if (cfg.amplitude == 0.0) return out;
  std::mt19937_64 rng(cfg.seed);
  if (cfg.mode == "random-smooth" || cfg.mode == "e1-mode") {
    Field rho = cfg.mode == "random-smooth" ? random_smooth(g, rng) : lambda1(g.L, g.H).basis(g).front();
    rho *= cfg.amplitude / lp_norm(rho, p);
    out.omega += rho;
  } else if (cfg.mode == "rearranged") {
    // Random neighbour swaps until the class-preserving perturbation reaches the amplitude.
    std::uniform_int_distribution<int> pick_i(0, g.n1 - 1);
    std::uniform_int_distribution<int> pick_j(0, g.n2 - 1);
    std::uniform_int_distribution<int> pick_dir(0, 3);
    double acc = 0.0;
    const double target = std::pow(cfg.amplitude, p);
    const long long limit = 1000LL * static_cast<long long>(g.size()) + 1000;
    Field& w = out.omega;
    for (long long it = 0; acc < target; ++it) {
      if (it > limit) throw PreconditionError("rearranged perturbation: amplitude not reachable by swaps");
      const int i = pick_i(rng);
      const int j = pick_j(rng);
      int i2 = i;
      int j2 = j;
      switch (pick_dir(rng)) {
        case 0: i2 = (i + 1) % g.n1; break;
        case 1: i2 = (i + g.n1 - 1) % g.n1; break;
        case 2: j2 = j + 1; break;
        default: j2 = j - 1; break;
      }
      if (j2 < 0 || j2 >= g.n2) continue;
      if (w(i, j) == w(i2, j2)) continue;
      std::swap(w(i, j), w(i2, j2));
      acc = std::pow(lp_distance_any(w, omega_bar, p), p);
    }
  } else {
    throw PreconditionError("unknown perturbation mode '" + cfg.mode + "'");
  }
  out.distance = lp_distance_any(out.omega, omega_bar, p);
  return out;
}

ExperimentConfig ExperimentConfig::from_json(const Json& j) {
  ExperimentConfig c;
  c.name = get_string(j, "name", c.name);
  c.experiment = get_string(j, "experiment", c.experiment);
  c.grid = grid_from_json(section(j, "grid"));
  c.flow = section(j, "flow");
  const Json& pert = section(j, "perturbation");
  c.perturbation.mode = get_string(pert, "mode", c.perturbation.mode);
  c.perturbation.amplitude = get_number(pert, "amplitude", c.perturbation.amplitude);
  if (pert.contains("seed")) c.perturbation.seed = pert.at("seed").get<std::uint64_t>();
  const Json& run = section(j, "run");
  c.T = get_number(run, "T", c.T);
  if (run.contains("dt")) c.dt = get_number(run, "dt", 0.0);
  c.cfl = get_number(run, "cfl", c.cfl);
  c.every = static_cast<int>(get_number(run, "every", 0.0));
  c.p = get_number(run, "p", c.p);
  c.hyperviscosity = get_number(run, "hyperviscosity", 0.0);
  const Json& output = section(j, "output");
  if (output.contains("dir")) c.out = output.at("dir").get<std::string>();
  if (output.contains("snapshots")) {
    for (const auto& t : output.at("snapshots")) c.snapshot_times.push_back(t.get<double>());
  }
  if (!(c.p >= 1.0) || !std::isfinite(c.p)) throw PreconditionError("run.p must be finite and >= 1");
  if (!(c.T >= 0.0)) throw PreconditionError("run.T must be >= 0");
  if (!(c.perturbation.amplitude >= 0.0)) throw PreconditionError("perturbation.amplitude must be >= 0");
  return c;
}

Json StabilityReport::to_json() const {
  Json j;
  j["name"] = name;
  j["experiment"] = experiment;
  j["classification"] = classification;
  j["lambda1"] = lambda1;
  j["gprime_range"] = range_json(gprime_range);
  j["initial_distance"] = initial_distance;
  j["sup_plain_distance"] = sup_plain;
  j["sup_orbital_distance"] = sup_orbital;
  j["steady_residual_scale"] = steady_residual_scale;
  j["dt"] = dt;
  j["hyperviscosity"] = hyperviscosity;
  j["records"] = records.size();
  j["final_time"] = records.empty() ? 0.0 : records.back().t;
  j["aborted"] = aborted;
  if (aborted) j["abort_reason"] = abort_reason;
  Json a;
  a["energy"] = admissibility.energy_drift;
  a["kinetic"] = admissibility.kinetic_drift;
  a["impulse"] = admissibility.impulse_drift;
  a["flux"] = admissibility.flux_drift;
  a["moments"] = admissibility.moment_drift;
  a["rearrangement"] = admissibility.rearrangement_drift;
  j["admissibility_drift"] = a;
  return j;
}

StabilityReport run_stability_experiment(const ExperimentConfig& cfg) { return run_experiment(cfg, false); }

StabilityReport run_monotone_shear_experiment(const ExperimentConfig& cfg) { return run_experiment(cfg, true); }

StabilityReport run_and_write(const ExperimentConfig& cfg, const Json& raw_config) {
  StabilityReport rep = cfg.experiment == "monotone-shear" ? run_monotone_shear_experiment(cfg)
                                                           : run_stability_experiment(cfg);
  if (!cfg.out.empty()) {
    std::filesystem::create_directories(cfg.out);
    write_diagnostics_csv(cfg.out / "diagnostics.csv", rep.records);
    Json j = rep.to_json();
    j["config_hash"] = config_hash(raw_config);
    j["version"] = version_string();
    write_json(cfg.out / "report.json", j);
  }
  return rep;
}

Json ArnoldRow::to_json() const {
  Json j;
  j["flow"] = flow;
  j["gprime"] = gprime;
  j["lambda1"] = lambda1;
  j["c_ar"] = c_ar;
  j["arnold1"] = arnold1;
  j["arnold2"] = arnold2;
  j["arnold2_as_printed"] = arnold2_as_printed;
  j["theorem1"] = theorem1;
  j["theorem2"] = theorem2;
  j["classification"] = classification;
  return j;
}

ArnoldRow arnold_row(const SteadySpec& spec, double L, double H) {
  if (!spec.g.value || !spec.g.is_affine()) {
    throw PreconditionError("Arnold comparison needs a flow with affine g");
  }
  ArnoldRow r;
  r.flow = spec.kind;
  r.gprime = *spec.g.slope;
  r.lambda1 = lambda1(L, H).value;
  r.c_ar = H * H / (kPi * kPi);
  r.arnold1 = r.gprime < 0.0;
  r.arnold2 = r.gprime > 0.0 && r.gprime < 1.0 / r.c_ar;
  r.arnold2_as_printed = r.gprime > 0.0 && r.gprime < r.c_ar;
  const StabilityClass c = classify_gprime({r.gprime, r.gprime}, L, H);
  r.theorem1 = c == StabilityClass::Theorem1;
  r.theorem2 = c != StabilityClass::Outside;
  r.classification = to_string(c);
  return r;
}

ArnoldReport run_arnold_comparison(const ExperimentConfig& cfg, bool run_experiment) {
  const SteadySpec flow = build_flow(cfg.flow, cfg.grid);
  ArnoldReport rep;
  rep.row = arnold_row(flow, cfg.grid.L, cfg.grid.H);
  if (run_experiment) rep.run = run_stability_experiment(cfg);
  return rep;
}

MaximizeReport run_multistart_maximization(const PoissonSolver& solver, const Field& reference, int starts,
                                           std::uint64_t seed, const MaximizeOptions& opts,
                                           std::optional<double> target_impulse) {
  if (starts < 1) throw PreconditionError("multi-start maximization needs at least one start");
  MaximizeReport rep;
  rep.target_impulse = target_impulse ? *target_impulse : impulse(reference);
  rep.reference_norm = l2_norm(reference);
  const RearrangementProfile profile = RearrangementProfile::of(reference);
  std::mt19937_64 rng(seed);
  for (int k = 0; k < starts; ++k) {
    std::vector<double> values(profile.sorted_values);
    std::shuffle(values.begin(), values.end(), rng);
    const Field init(solver.grid(), std::move(values));
    MaximizeRun run;
    run.start = k;
    run.result = maximize_energy_constrained(
        solver, profile, rep.target_impulse, init, opts,
        [&](int, const Field& v, double, double) { run.distance_trace.push_back(lp_distance(v, reference, 2.0)); });
    run.final_distance = lp_distance(run.result.omega, reference, 2.0);
    run.final_distance_negated = l2_norm(run.result.omega + reference);
    rep.runs.push_back(std::move(run));
  }
  return rep;
}

void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<DiagnosticsRecord>& records) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  os << "t,energy,kinetic,impulse,flux,m1,m2,m3,m4";
  for (int q = 1; q <= 9; ++q) os << ",q" << q;
  os << ",rearrangement_drift,plain_distance,orbital_distance,orbital_shift\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  for (const auto& r : records) {
    os << format_number(r.t) << ',' << format_number(r.energy) << ',' << format_number(r.kinetic) << ','
       << format_number(r.impulse) << ',' << format_number(r.flux);
    for (double m : r.moments) os << ',' << format_number(m);
    for (double q : r.deciles) os << ',' << format_number(q);
    os << ',' << format_number(r.rearrangement_drift) << ',' << opt(r.plain_distance) << ','
       << opt(r.orbital_distance) << ',' << opt(r.orbital_shift) << '\n';
  }
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

}  // namespace chanstab
