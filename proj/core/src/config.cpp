#include "ripless/harness.hpp"

#include "ripless/estimates.hpp"

#include <cstdio>
#include <fstream>

namespace ripless::harness {

using nlohmann::json;

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::PhaseTransition: return "phase_transition";
    case ExperimentKind::ErrorScaling: return "error_scaling";
    case ExperimentKind::CertificateRate: return "certificate_rate";
    case ExperimentKind::EstimateSweep: return "estimate_sweep";
    case ExperimentKind::EnsembleCompare: return "ensemble_compare";
  }
  return "unknown";
}

ExperimentKind kind_from_string(const std::string& name) {
  for (auto k : {ExperimentKind::PhaseTransition, ExperimentKind::ErrorScaling, ExperimentKind::CertificateRate,
                 ExperimentKind::EstimateSweep, ExperimentKind::EnsembleCompare})
    if (to_string(k) == name) return k;
  throw InvalidArgument("invalid config: unknown experiment kind '" + name + "'");
}

std::string to_string(Amplitude amplitude) {
  switch (amplitude) {
    case Amplitude::Rademacher: return "rademacher";
    case Amplitude::Gaussian: return "gaussian";
    case Amplitude::Decaying: return "decaying";
  }
  return "unknown";
}

Amplitude amplitude_from_string(const std::string& name) {
  if (name == "rademacher") return Amplitude::Rademacher;
  if (name == "gaussian") return Amplitude::Gaussian;
  if (name == "decaying") return Amplitude::Decaying;
  throw InvalidArgument("invalid config: unknown amplitude model '" + name + "'");
}

namespace {

json as_list(const json& v) { return v.is_array() ? v : json::array({v}); }

GridCell cell_from_json(const json& j, const GridCell& defaults) {
  GridCell c = defaults;
  c.n = j.value("n", c.n);
  c.s = j.value("s", c.s);
  c.m = j.value("m", c.m);
  c.sigma = j.value("sigma", c.sigma);
  c.level = j.value("level", c.level);
  c.which = j.value("which", c.which);
  c.r = j.value("r", c.r);
  return c;
}

json cell_to_json(const GridCell& c) {
  return json{{"n", c.n}, {"s", c.s}, {"m", c.m}, {"sigma", c.sigma},
              {"level", c.level}, {"which", c.which}, {"r", c.r}};
}

std::vector<GridCell> expand_grid(const json& grid) {
  std::vector<GridCell> cells;
  const GridCell d;
  for (const auto& n : as_list(grid.value("n", json(d.n))))
    for (const auto& s : as_list(grid.value("s", json(d.s))))
      for (const auto& m : as_list(grid.value("m", json(d.m))))
        for (const auto& sigma : as_list(grid.value("sigma", json(d.sigma))))
          for (const auto& level : as_list(grid.value("level", json(d.level))))
            for (const auto& which : as_list(grid.value("which", json(d.which))))
              for (const auto& r : as_list(grid.value("r", json(d.r))))
                cells.push_back(cell_from_json(
                    json{{"n", n}, {"s", s}, {"m", m}, {"sigma", sigma}, {"level", level}, {"which", which}, {"r", r}},
                    d));
  return cells;
}

bool known_estimate(const std::string& w) {
  return w == "e1" || w == "e2" || w == "e3" || w == "e4" || w == "weakrip" || w == "noise";
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("invalid config: expected a JSON object");
  ExperimentConfig c;
  c.kind = kind_from_string(j.at("kind").get<std::string>());
  c.name = j.value("name", to_string(c.kind));

  if (j.contains("cells")) {
    for (const auto& cell : j.at("cells")) c.cells.push_back(cell_from_json(cell, GridCell{}));
  } else if (j.contains("grid")) {
    c.cells = expand_grid(j.at("grid"));
  }
  if (c.cells.empty()) throw InvalidArgument("invalid config: empty grid");

  json ens = j.contains("ensembles") ? j.at("ensembles") : json::array();
  if (j.contains("ensemble")) ens.push_back(j.at("ensemble"));
  for (json e : ens) {
    if (e.is_string()) e = json{{"family", e}};
    if (!e.contains("n")) e["n"] = c.cells.front().n;
    c.ensembles.push_back(ensembles::EnsembleSpec::from_json(e));
  }

  c.trials = j.value("trials", c.trials);
  c.seed = j.value("seed", c.seed);
  c.output = j.value("output", c.output);
  c.threads = j.value("threads", c.threads);
  if (j.contains("program")) c.program = solvers::program_from_string(j.at("program").get<std::string>());
  if (j.contains("compare_program") && !j.at("compare_program").is_null())
    c.compare_program = solvers::program_from_string(j.at("compare_program").get<std::string>());
  if (j.contains("lambda") && !j.at("lambda").is_null()) c.lambda = j.at("lambda").get<double>();
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    c.solver.abs_tol = s.value("abs_tol", c.solver.abs_tol);
    c.solver.rel_tol = s.value("rel_tol", c.solver.rel_tol);
    c.solver.max_iterations = s.value("max_iterations", c.solver.max_iterations);
    c.solver.polish = s.value("polish", c.solver.polish);
    c.solver.polish_interval = s.value("polish_interval", c.solver.polish_interval);
  }
  c.success_threshold = j.value("success_threshold", c.success_threshold);
  c.agreement_ratio = j.value("agreement_ratio", c.agreement_ratio);
  if (j.contains("amplitude")) c.amplitude = amplitude_from_string(j.at("amplitude").get<std::string>());
  c.amplitude_scale = j.value("amplitude_scale", c.amplitude_scale);
  c.decay = j.value("decay", c.decay);
  c.beta = j.value("beta", c.beta);
  if (j.contains("mu") && !j.at("mu").is_null()) c.mu = j.at("mu").get<double>();
  c.golfing_prefactor = j.value("golfing_prefactor", c.golfing_prefactor);
  c.golfing_fit_budget = j.value("golfing_fit_budget", c.golfing_fit_budget);
  c.weakrip_budget = j.value("weakrip_budget", c.weakrip_budget);
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw InvalidArgument("invalid config JSON in " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

void ExperimentConfig::validate() const {
  if (ensembles.empty()) throw InvalidArgument("invalid config: no ensemble given");
  if (cells.empty()) throw InvalidArgument("invalid config: empty grid");
  if (trials < 1) throw InvalidArgument("invalid config: trials must be >= 1");
  if (!(success_threshold > 0.0)) throw InvalidArgument("invalid config: success_threshold must be > 0");
  if (!(amplitude_scale > 0.0)) throw InvalidArgument("invalid config: amplitude_scale must be > 0");
  if (!(beta > 0.0)) throw InvalidArgument("invalid config: beta must be > 0");
  if (mu && !(*mu >= 1.0)) throw InvalidArgument("invalid config: mu must be >= 1");
  if (!(golfing_prefactor > 0.0)) throw InvalidArgument("invalid config: golfing_prefactor must be > 0");
  if (kind == ExperimentKind::EnsembleCompare && ensembles.size() < 2)
    throw InvalidArgument("invalid config: ensemble_compare needs at least two ensembles");
  for (const GridCell& c : cells) {
    if (c.n < 1 || c.m < 1) throw InvalidArgument("invalid config: n and m must be >= 1");
    if (c.s < 0 || c.s > c.n) throw InvalidArgument("invalid config: need 0 <= s <= n");
    if (!(c.sigma >= 0.0)) throw InvalidArgument("invalid config: sigma must be >= 0");
    switch (kind) {
      case ExperimentKind::PhaseTransition:
      case ExperimentKind::EnsembleCompare:
        if (c.sigma != 0.0 && kind == ExperimentKind::PhaseTransition)
          throw InvalidArgument("invalid config: phase_transition is noiseless (sigma = 0)");
        break;
      case ExperimentKind::ErrorScaling:
        if (!(c.sigma > 0.0)) throw InvalidArgument("invalid config: error_scaling needs sigma > 0");
        break;
      case ExperimentKind::CertificateRate:
        if (c.s < 1) throw InvalidArgument("invalid config: certificate_rate needs s >= 1");
        break;
      case ExperimentKind::EstimateSweep:
        if (!known_estimate(c.which)) throw InvalidArgument("invalid config: unknown estimate '" + c.which + "'");
        if (c.s < 1) throw InvalidArgument("invalid config: estimate_sweep needs s >= 1");
        if (c.which == "weakrip" && (c.r < 0 || c.s + c.r > c.n))
          throw InvalidArgument("invalid config: weak RIP needs s + r <= n");
        if (!(c.level >= 0.0)) throw InvalidArgument("invalid config: level must be >= 0");
        break;
    }
  }
}

json ExperimentConfig::to_json() const {
  json j;
  j["kind"] = to_string(kind);
  j["name"] = name;
  json ens = json::array();
  for (const auto& e : ensembles) ens.push_back(e.to_json());
  j["ensembles"] = ens;
  json cs = json::array();
  for (const auto& c : cells) cs.push_back(cell_to_json(c));
  j["cells"] = cs;
  j["trials"] = trials;
  j["seed"] = seed;
  j["output"] = output;
  j["threads"] = threads;
  j["program"] = solvers::to_string(program);
  j["compare_program"] = compare_program ? json(solvers::to_string(*compare_program)) : json(nullptr);
  j["lambda"] = lambda ? json(*lambda) : json(nullptr);
  j["solver"] = json{{"abs_tol", solver.abs_tol},
                     {"rel_tol", solver.rel_tol},
                     {"max_iterations", solver.max_iterations},
                     {"polish", solver.polish},
                     {"polish_interval", solver.polish_interval}};
  j["success_threshold"] = success_threshold;
  j["agreement_ratio"] = agreement_ratio;
  j["amplitude"] = to_string(amplitude);
  j["amplitude_scale"] = amplitude_scale;
  j["decay"] = decay;
  j["beta"] = beta;
  j["mu"] = mu ? json(*mu) : json(nullptr);
  j["golfing_prefactor"] = golfing_prefactor;
  j["golfing_fit_budget"] = golfing_fit_budget;
  j["weakrip_budget"] = weakrip_budget;
  return j;
}

std::string ExperimentConfig::hash() const {
  json j = to_json();
  j.erase("output");
  j.erase("threads");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ensembles::EnsembleSpec ExperimentConfig::cell_spec(std::size_t cell) const {
  const auto& spec = ensembles[cell / cells.size()];
  return spec.with_dimension(cell_grid(cell).n);
}

const GridCell& ExperimentConfig::cell_grid(std::size_t cell) const { return cells[cell % cells.size()]; }

}  // namespace ripless::harness
