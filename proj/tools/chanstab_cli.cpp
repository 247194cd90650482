// chanstab: command-line driver for the channel-flow stability toolkit.
//
//   chanstab eigen          --config eigen.toml     --out dir
//   chanstab steady         --config flow.toml      --out dir
//   chanstab simulate       --config run.toml       --out dir
//   chanstab maximize       --config max.toml       --out dir --seed 7
//   chanstab stability      --config exp.toml       --out dir --threads 2
//   chanstab compare-arnold --config flows.toml     --out dir

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "chanstab/config.hpp"
#include "chanstab/dynamics.hpp"
#include "chanstab/error.hpp"
#include "chanstab/flows.hpp"
#include "chanstab/green.hpp"
#include "chanstab/lab.hpp"
#include "chanstab/rearrange.hpp"
#include "chanstab/snapshot.hpp"
#include "chanstab/spectra.hpp"

namespace fs = std::filesystem;
using namespace chanstab;

namespace {

struct Globals {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

Json load(const Globals& g) {
  if (g.config.empty()) throw PreconditionError("--config is required");
  return load_config(g.config);
}

fs::path out_dir(const Globals& g, const Json& cfg) {
  fs::path dir = !g.out.empty() ? fs::path(g.out)
                 : cfg.contains("output") && cfg["output"].contains("dir")
                     ? fs::path(cfg["output"]["dir"].get<std::string>())
                     : fs::path("out");
  fs::create_directories(dir);
  return dir;
}

Json provenance(const Json& cfg, Json j) {
  j["config_hash"] = config_hash(cfg);
  j["version"] = version_string();
  return j;
}

int cmd_eigen(const Globals& g) {
  const Json cfg = load(g);
  const Json dom = cfg.contains("domain") ? cfg["domain"] : cfg.value("grid", Json::object());
  const double L = require_number(dom, "L");
  const double H = require_number(dom, "H");
  const int count = static_cast<int>(get_number(cfg, "count", 8.0));
  const fs::path dir = out_dir(g, cfg);

  std::ofstream csv(dir / "eigen.csv");
  csv << "eigenvalue,family,n,k,multiplicity\n";
  for (const auto& mode : eigenvalue_table(L, H, count)) {
    for (const auto& c : mode.components) {
      csv << format_number(mode.eigenvalue) << ',' << to_string(c.family) << ',' << c.n << ',' << c.k << ','
          << mode.dimension() << '\n';
    }
  }
  const FirstEigen first = lambda1(L, H);
  Json rep;
  rep["L"] = L;
  rep["H"] = H;
  rep["lambda1"] = first.value;
  rep["regime"] = to_string(first.regime);
  rep["e1_dimension"] = first.mode.dimension();
  rep["c_ar"] = H * H / (std::numbers::pi * std::numbers::pi);
  if (cfg.contains("verify")) {
    const Json& v = cfg["verify"];
    const GridSpec grid(L, H, static_cast<int>(get_number(v, "n1", 128)), static_cast<int>(get_number(v, "n2", 128)));
    const PoissonSolver solver(grid);
    PowerIterationOptions opts;
    if (g.seed) opts.seed = *g.seed;
    rep["lambda1_numeric"] = verify_lambda1_numeric(solver, opts);
    rep["arnold_constant_numeric"] = arnold_constant(solver, opts);
    rep["grid"] = {grid.n1, grid.n2};
  }
  write_json(dir / "report.json", provenance(cfg, rep));
  std::cout << "lambda1 = " << format_number(first.value) << " (" << to_string(first.regime) << ", dim "
            << first.mode.dimension() << ")\n";
  return 0;
}

int cmd_steady(const Globals& g) {
  const Json cfg = load(g);
  const GridSpec grid = grid_from_json(cfg.at("grid"));
  const SteadySpec spec = build_flow(cfg.at("flow"), grid);
  const fs::path dir = out_dir(g, cfg);
  write_snapshot(dir / "omega.snap", spec.vorticity, "omega");
  write_snapshot(dir / "psi.snap", spec.psi, "psi");
  Json rep;
  rep["kind"] = spec.kind;
  rep["lambda"] = spec.lam;
  rep["flux"] = spec.flux();
  rep["psi_bottom"] = spec.psi_bottom;
  rep["psi_top"] = spec.psi_top;
  rep["lambda1"] = lambda1(grid.L, grid.H).value;
  if (spec.g.value) {
    rep["residual"] = residual_tvs1(spec);
    rep["gprime_range"] = {spec.gprime_range.first, spec.gprime_range.second};
    rep["classification"] = to_string(classify_conditions(spec, grid.L, grid.H));
  } else {
    rep["classification"] = "monotone-shear";
  }
  write_json(dir / "report.json", provenance(cfg, rep));
  std::cout << spec.kind << ": " << rep["classification"].get<std::string>() << '\n';
  return 0;
}

int cmd_simulate(const Globals& g) {
  Json cfg = load(g);
  ExperimentConfig ec = ExperimentConfig::from_json(cfg);
  if (g.seed) ec.perturbation.seed = *g.seed;
  ec.out = out_dir(g, cfg);
  const StabilityReport rep = run_and_write(ec, cfg);
  std::cout << "records: " << rep.records.size() << (rep.aborted ? " (aborted: " + rep.abort_reason + ")" : "")
            << "\nenergy drift: " << format_number(rep.admissibility.energy_drift)
            << "\nimpulse drift: " << format_number(rep.admissibility.impulse_drift) << '\n';
  return rep.aborted ? 2 : 0;
}

int cmd_maximize(const Globals& g) {
  const Json cfg = load(g);
  const GridSpec grid = grid_from_json(cfg.at("grid"));
  const PoissonSolver solver(grid);
  Field reference;
  if (cfg.contains("profile") && cfg["profile"].contains("snapshot")) {
    reference = read_snapshot(cfg["profile"]["snapshot"].get<std::string>()).field;
    if (!(reference.grid() == grid)) throw PreconditionError("profile snapshot grid differs from [grid]");
  } else {
    reference = build_flow(cfg.at("flow"), grid).vorticity;
  }
  const Json& run = cfg.contains("maximize") ? cfg["maximize"] : Json::object();
  const int starts = static_cast<int>(get_number(run, "starts", 1.0));
  std::uint64_t seed = run.contains("seed") ? run["seed"].get<std::uint64_t>() : 1;
  if (g.seed) seed = *g.seed;
  MaximizeOptions opts;
  opts.tolerance = get_number(run, "tolerance", opts.tolerance);
  opts.max_iterations = static_cast<int>(get_number(run, "max_iterations", opts.max_iterations));
  std::optional<double> target;
  if (run.contains("target_impulse")) target = get_number(run, "target_impulse", 0.0);

  const MaximizeReport rep = run_multistart_maximization(solver, reference, starts, seed, opts, target);
  const fs::path dir = out_dir(g, cfg);
  Json runs = Json::array();
  for (const auto& r : rep.runs) {
    std::ofstream csv(dir / ("run_" + std::to_string(r.start) + ".csv"));
    csv << "iteration,energy,impulse,distance\n";
    for (std::size_t k = 0; k < r.result.energy_trace.size(); ++k) {
      csv << k << ',' << format_number(r.result.energy_trace[k]) << ',' << format_number(r.result.impulse_trace[k])
          << ',' << format_number(r.distance_trace[k]) << '\n';
    }
    write_snapshot(dir / ("final_" + std::to_string(r.start) + ".snap"), r.result.omega, "omega");
    runs.push_back({{"start", r.start},
                    {"iterations", r.result.iterations},
                    {"converged", r.result.converged},
                    {"impulse_exact", r.result.impulse_exact},
                    {"final_energy", r.result.energy_trace.empty() ? 0.0 : r.result.energy_trace.back()},
                    {"distance", r.final_distance},
                    {"distance_to_negated", r.final_distance_negated}});
  }
  Json j;
  j["target_impulse"] = rep.target_impulse;
  j["reference_norm"] = rep.reference_norm;
  j["seed"] = seed;
  j["runs"] = runs;
  write_json(dir / "report.json", provenance(cfg, j));
  std::cout << rep.runs.size() << " runs written to " << dir.string() << '\n';
  return 0;
}

int cmd_stability(const Globals& g) {
  const Json cfg = load(g);
  std::vector<Json> items;
  if (cfg.contains("experiments")) {
    for (const auto& e : cfg["experiments"]) items.push_back(e);
  } else {
    items.push_back(cfg);
  }
  const fs::path root = out_dir(g, cfg);
  std::vector<ExperimentConfig> exps;
  for (std::size_t k = 0; k < items.size(); ++k) {
    ExperimentConfig ec = ExperimentConfig::from_json(items[k]);
    if (g.seed) ec.perturbation.seed = *g.seed;
    ec.out = items.size() == 1 ? root : root / (ec.name + "_" + std::to_string(k));
    exps.push_back(std::move(ec));
  }
  std::vector<std::optional<StabilityReport>> reports(exps.size());
  std::vector<std::string> errors(exps.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next++) < exps.size();) {
      try {
        reports[k] = run_and_write(exps[k], items[k]);
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  const int nthreads = std::clamp(g.threads, 1, static_cast<int>(exps.size()));
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int status = 0;
  Json summary = Json::array();
  for (std::size_t k = 0; k < exps.size(); ++k) {
    if (!reports[k]) {
      std::cerr << exps[k].name << ": " << errors[k] << '\n';
      summary.push_back({{"name", exps[k].name}, {"error", errors[k]}});
      status = 1;
      continue;
    }
    const auto& r = *reports[k];
    std::cout << r.name << " [" << r.classification << "] initial " << format_number(r.initial_distance)
              << "  sup plain " << format_number(r.sup_plain) << "  sup orbital " << format_number(r.sup_orbital)
              << (r.aborted ? "  (aborted)" : "") << '\n';
    summary.push_back(r.to_json());
  }
  if (items.size() > 1) write_json(root / "report.json", provenance(cfg, {{"experiments", summary}}));
  return status;
}

int cmd_compare_arnold(const Globals& g) {
  const Json cfg = load(g);
  std::vector<Json> items;
  if (cfg.contains("flows")) {
    for (const auto& f : cfg["flows"]) {
      Json e = cfg;
      e.erase("flows");
      if (f.contains("grid")) e["grid"] = f["grid"];
      e["flow"] = f.contains("flow") ? f["flow"] : f;
      items.push_back(e);
    }
  } else {
    items.push_back(cfg);
  }
  const bool run = cfg.contains("run") && cfg["run"].value("simulate", false);
  const fs::path dir = out_dir(g, cfg);
  std::ofstream csv(dir / "arnold.csv");
  csv << "flow,L,H,gprime,lambda1,c_ar,arnold1,arnold2,arnold2_as_printed,theorem1,theorem2,classification,"
         "sup_plain,sup_orbital\n";
  Json rows = Json::array();
  for (const auto& item : items) {
    ExperimentConfig ec = ExperimentConfig::from_json(item);
    if (g.seed) ec.perturbation.seed = *g.seed;
    const ArnoldReport rep = run_arnold_comparison(ec, run);
    const ArnoldRow& r = rep.row;
    csv << r.flow << ',' << format_number(ec.grid.L) << ',' << format_number(ec.grid.H) << ','
        << format_number(r.gprime) << ',' << format_number(r.lambda1) << ',' << format_number(r.c_ar) << ','
        << r.arnold1 << ',' << r.arnold2 << ',' << r.arnold2_as_printed << ',' << r.theorem1 << ',' << r.theorem2
        << ',' << r.classification << ',' << (rep.run ? format_number(rep.run->sup_plain) : "") << ','
        << (rep.run ? format_number(rep.run->sup_orbital) : "") << '\n';
    Json j = r.to_json();
    j["L"] = ec.grid.L;
    j["H"] = ec.grid.H;
    if (rep.run) j["experiment"] = rep.run->to_json();
    rows.push_back(j);
    std::cout << r.flow << ": g' = " << format_number(r.gprime) << "  Arnold-1 " << r.arnold1 << "  Arnold-2 "
              << r.arnold2 << "  Theorem-1 " << r.theorem1 << "  Theorem-2 " << r.theorem2 << '\n';
  }
  write_json(dir / "report.json", provenance(cfg, {{"rows", rows}}));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stability experiments for ideal flow in a periodic channel"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config, "TOML or JSON configuration file");
  app.add_option("--out", g.out, "Output directory");
  auto* seed_opt = app.add_option("--seed", seed, "Seed overriding the configuration");
  app.add_option("--threads", g.threads, "Concurrent experiments for batch configurations")
      ->check(CLI::PositiveNumber);

  struct Entry {
    const char* name;
    const char* help;
    int (*fn)(const Globals&);
  };
  const Entry entries[] = {
      {"eigen", "Closed-form eigenvalue table and numeric check", cmd_eigen},
      {"steady", "Build a steady or traveling flow and report its residual", cmd_steady},
      {"simulate", "Integrate a perturbed flow and write diagnostics", cmd_simulate},
      {"maximize", "Multi-start impulse-constrained energy maximization", cmd_maximize},
      {"stability", "Run stability experiments (single or batch)", cmd_stability},
      {"compare-arnold", "Tabulate Arnold's conditions against Lambda_1", cmd_compare_arnold},
  };
  int (*chosen)(const Globals&) = nullptr;
  for (const auto& e : entries) {
    auto* sub = app.add_subcommand(e.name, e.help);
    sub->fallthrough();
    sub->callback([&chosen, fn = e.fn] { chosen = fn; });
  }
  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) g.seed = seed;
  try {
    return chosen(g);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
