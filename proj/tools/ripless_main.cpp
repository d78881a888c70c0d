// ripless: command-line driver for solves, golfing certificates, estimate
// sweeps and seeded experiments.

#include "ripless/certificates.hpp"
#include "ripless/ensembles.hpp"
#include "ripless/harness.hpp"
#include "ripless/matrix_io.hpp"
#include "ripless/parallel.hpp"
#include "ripless/signal_ops.hpp"
#include "ripless/solvers.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ripless;

namespace {

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  return json::parse(in);
}

// Inline JSON or a path to a JSON file.
json json_argument(const std::string& text) {
  if (!text.empty() && (text.front() == '{' || text.front() == '[')) return json::parse(text);
  return read_json_file(text);
}

RealMatrix load_matrix(const json& j, const fs::path& base, Field& field, MeasurementMatrix* full) {
  if (j.is_string()) {
    MeasurementMatrix A = io::read_matrix_csv((base / j.get<std::string>()).string());
    field = A.field();
    if (full) *full = A;
    return real_system(A);
  }
  const auto rows = j.get<std::vector<std::vector<double>>>();
  if (rows.empty() || rows.front().empty()) throw InvalidArgument("problem: A must be nonempty");
  RealMatrix A(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < A.rows(); ++i) {
    if (static_cast<Index>(rows[static_cast<std::size_t>(i)].size()) != A.cols())
      throw InvalidArgument("problem: ragged matrix rows");
    for (Index k = 0; k < A.cols(); ++k) A(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
  }
  field = Field::Real;
  return A;
}

RealVector load_vector(const json& j, const fs::path& base) {
  if (j.is_string()) {
    std::ifstream in(base / j.get<std::string>());
    if (!in) throw InvalidArgument("cannot open " + (base / j.get<std::string>()).string());
    const MeasurementVector y = io::read_vector_csv(in);
    return y.field() == Field::Real ? y.real() : realify(y.entries());
  }
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const RealVector>(v.data(), static_cast<Index>(v.size()));
}

json vector_json(const RealVector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

int cmd_solve(const std::string& program_name, const std::string& problem_path, std::optional<double> lambda,
              std::optional<double> tol) {
  const json p = read_json_file(problem_path);
  const fs::path base = fs::path(problem_path).parent_path();
  Field field = Field::Real;
  RealMatrix A = load_matrix(p.at("A"), base, field, nullptr);
  RealVector y = load_vector(p.at("y"), base);
  const double sigma_m = p.value("sigma_m", 0.0);
  if (!lambda && p.contains("lambda") && !p.at("lambda").is_null()) lambda = p.at("lambda").get<double>();
  const solvers::RecoveryProblem problem(A, y, sigma_m, lambda);
  solvers::SolverOptions opts;
  if (tol) opts.rel_tol = *tol;
  const solvers::Program program = solvers::program_from_string(program_name);
  const solvers::SolverResult r = solvers::solve(problem, program, opts);

  json out;
  out["program"] = solvers::to_string(program);
  out["x_hat"] = vector_json(r.x_hat);
  out["iterations"] = r.iterations;
  out["converged"] = r.converged;
  out["status"] = solvers::to_string(r.status);
  out["polished"] = r.polished;
  out["objective"] = r.objective;
  out["dual_objective"] = r.dual_objective;
  out["kkt_residual"] = r.kkt_residual;
  out["primal_residual"] = r.primal_residual;
  out["tube_value"] = r.tube_value;
  out["lambda"] = problem.effective_lambda();
  out["sigma_m"] = sigma_m;
  if (p.contains("x")) {
    const RealVector x = load_vector(p.at("x"), base);
    const solvers::TubeDiagnostic t = solvers::tube_diagnostic(A, r.x_hat, x, problem.effective_lambda(), sigma_m);
    out["tube_diagnostic"] = json{{"value", t.value}, {"threshold", t.threshold}, {"pass", t.pass}};
    out["l2_error"] = (r.x_hat - x).norm();
  }
  std::cout << out.dump(2) << "\n";
  return r.converged ? 0 : 3;
}

int cmd_certify(const std::string& ensemble, Index n, Index s, Index m, Index trials, std::uint64_t seed,
                std::optional<double> prefactor, unsigned threads) {
  json e = json_argument(ensemble);
  e["n"] = n;
  json cfg{{"kind", "certificate_rate"},
           {"ensemble", e},
           {"cells", json::array({json{{"n", n}, {"s", s}, {"m", m}}})},
           {"trials", trials},
           {"seed", seed},
           {"golfing_fit_budget", !prefactor.has_value()}};
  if (prefactor) cfg["golfing_prefactor"] = *prefactor;
  const harness::ExperimentConfig config = harness::ExperimentConfig::from_json(cfg);
  std::vector<json> results(static_cast<std::size_t>(trials));
  parallel_for(results.size(), threads, [&](std::size_t t) { results[t] = harness::run_trial(config, 0, t); });
  std::cout << json(results).dump(2) << "\n";
  return 0;
}

int finish_run(const harness::ExperimentConfig& config, const harness::ExperimentResult& result,
               const std::optional<fs::path>& out) {
  if (out) {
    const harness::OutputPaths p = harness::write_outputs(config, result, *out);
    std::cerr << "wrote " << p.csv.string() << " (" << result.records.size() << " cells, "
              << result.wall_seconds << " s)\n";
  } else {
    harness::write_csv(std::cout, result);
  }
  for (const auto& r : result.records)
    if (r.value("errors", 0) != 0) return 1;
  return 0;
}

int cmd_estimate(const std::string& which, const std::string& grid_path, Index trials, std::uint64_t seed,
                 unsigned threads, const std::string& out) {
  json g = read_json_file(grid_path);
  g["kind"] = "estimate_sweep";
  g["trials"] = trials;
  g["seed"] = seed;
  g["threads"] = threads;
  if (g.contains("cells")) {
    for (auto& c : g["cells"]) c["which"] = which;
  } else {
    if (!g.contains("grid")) g["grid"] = json::object();
    g["grid"]["which"] = which;
  }
  const harness::ExperimentConfig config = harness::ExperimentConfig::from_json(g);
  const harness::ExperimentResult result = harness::run_experiment(config);
  return finish_run(config, result, out.empty() ? std::nullopt : std::optional<fs::path>(out));
}

int cmd_run(const std::string& config_path, const std::string& out_dir, std::optional<unsigned> threads) {
  harness::ExperimentConfig config = harness::ExperimentConfig::load(config_path);
  if (threads) config.threads = *threads;
  fs::path out;
  if (!out_dir.empty())
    out = fs::path(out_dir) / (config.name + ".csv");
  else if (!config.output.empty())
    out = config.output;
  else
    out = config.name + ".csv";
  const harness::ExperimentResult result = harness::run_experiment(config);
  return finish_run(config, result, out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ripless: sparse recovery, golfing certificates and tail-bound validation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(harness::version()));

  std::string program = "bp", problem;
  std::optional<double> lambda, tol;
  auto* solve = app.add_subcommand("solve", "Solve one recovery problem and print a JSON result");
  solve->add_option("--program", program, "bp | lasso | dantzig")->check(CLI::IsMember({"bp", "lasso", "dantzig"}));
  solve->add_option("--problem", problem, "problem JSON: {A, y, sigma_m, lambda, x}")->required();
  solve->add_option("--lambda", lambda, "regularization level (default 10 sqrt(log n))");
  solve->add_option("--tol", tol, "relative stopping tolerance");

  std::string ensemble;
  Index n = 0, s = 1, m = 1, trials = 1;
  std::uint64_t seed = 0;
  std::optional<double> prefactor;
  unsigned threads = 1;
  auto* certify = app.add_subcommand("certify", "Run the golfing construction and print per-trial JSON");
  certify->add_option("--ensemble", ensemble, "EnsembleSpec JSON, inline or a file path")->required();
  certify->add_option("--n", n)->required();
  certify->add_option("--s", s)->required();
  certify->add_option("--m", m, "total row budget")->required();
  certify->add_option("--trials", trials)->default_val(1);
  certify->add_option("--seed", seed)->default_val(0);
  certify->add_option("--prefactor", prefactor, "batch-size prefactor (default: fit the schedule to m)");
  certify->add_option("--threads", threads)->default_val(1);

  std::string which, grid, out;
  auto* estimate = app.add_subcommand("estimate", "Monte Carlo validation of tail bounds; CSV output");
  estimate->add_option("--which", which, "e1 | e2 | e3 | e4 | weakrip | noise")
      ->required()
      ->check(CLI::IsMember({"e1", "e2", "e3", "e4", "weakrip", "noise"}));
  estimate->add_option("--grid", grid, "grid JSON (ensemble(s) plus cells or cartesian grid)")->required();
  estimate->add_option("--trials", trials)->default_val(100);
  estimate->add_option("--seed", seed)->default_val(0);
  estimate->add_option("--threads", threads)->default_val(1);
  estimate->add_option("--out", out, "write CSV plus sidecars here instead of stdout");

  std::string config, out_dir;
  std::optional<unsigned> run_threads;
  auto* run = app.add_subcommand("run", "Run an experiment configuration");
  run->add_option("--config", config, "experiment JSON")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--threads", run_threads, "worker threads (0 = all cores)");

  std::string result;
  std::size_t cell = 0, trial = 0;
  auto* replay = app.add_subcommand("replay", "Re-execute one trial of a finished run");
  replay->add_option("--result", result, "results CSV (its .meta.json sidecar must exist)")->required();
  replay->add_option("--cell", cell)->required();
  replay->add_option("--trial", trial)->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*solve) return cmd_solve(program, problem, lambda, tol);
    if (*certify) return cmd_certify(ensemble, n, s, m, trials, seed, prefactor, threads);
    if (*estimate) return cmd_estimate(which, grid, trials, seed, threads, out);
    if (*run) return cmd_run(config, out_dir, run_threads);
    if (*replay) {
      std::cout << harness::replay(result, cell, trial).dump(2) << "\n";
      return 0;
    }
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
