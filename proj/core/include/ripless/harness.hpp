#pragma once

#include "ripless/ensembles.hpp"
#include "ripless/rng.hpp"
#include "ripless/solvers.hpp"
#include "ripless/types.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ripless::harness {

const char* version();

enum class ExperimentKind { PhaseTransition, ErrorScaling, CertificateRate, EstimateSweep, EnsembleCompare };

std::string to_string(ExperimentKind kind);
ExperimentKind kind_from_string(const std::string& name);

/// Planted-signal amplitude model.
enum class Amplitude { Rademacher, Gaussian, Decaying };

std::string to_string(Amplitude amplitude);
Amplitude amplitude_from_string(const std::string& name);

/// One grid point. `level` and `which` are only read by estimate sweeps,
/// `r` only by weak-RIP sweeps.
struct GridCell {
  Index n = 1;
  Index s = 0;
  Index m = 1;
  double sigma = 0.0;
  double level = 0.5;
  std::string which = "e1";
  Index r = 0;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::PhaseTransition;
  std::string name;
  std::vector<ensembles::EnsembleSpec> ensembles;
  std::vector<GridCell> cells;
  Index trials = 1;
  std::uint64_t seed = 0;
  std::string output;
  unsigned threads = 1;

  solvers::Program program = solvers::Program::BasisPursuit;
  std::optional<solvers::Program> compare_program;
  std::optional<double> lambda;
  solvers::SolverOptions solver;
  double success_threshold = 1e-5;
  /// Per-trial ratio used by the program comparison: err(compare) <= ratio * err(program).
  double agreement_ratio = 4.0;

  Amplitude amplitude = Amplitude::Rademacher;
  double amplitude_scale = 1.0;
  double decay = 1.0;

  double beta = 1.0;
  std::optional<double> mu;
  double golfing_prefactor = 2.0;
  /// Golfing cells treat m as the total row budget. With fit_budget the
  /// prefactor is chosen so the base schedule fills m; otherwise
  /// golfing_prefactor is used and m only caps resampling.
  bool golfing_fit_budget = false;
  std::int64_t weakrip_budget = 1000;

  /// Parses and validates. Grid either as "cells": [{...}] or as a
  /// cartesian "grid": {"n": [...], "s": [...], "m": [...], ...}.
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& path);
  /// Canonical form with every default filled in.
  nlohmann::json to_json() const;
  /// FNV-1a of the canonical form without output and threads.
  std::string hash() const;
  void validate() const;

  std::size_t cell_count() const { return ensembles.size() * cells.size(); }
  /// Spec and grid point of a global cell index (ensemble-major).
  ensembles::EnsembleSpec cell_spec(std::size_t cell) const;
  const GridCell& cell_grid(std::size_t cell) const;
};

struct ExperimentResult {
  ExperimentKind kind = ExperimentKind::PhaseTransition;
  std::vector<std::string> columns;
  std::vector<nlohmann::ordered_json> records;  // one per cell, keyed by `columns`
  nlohmann::json summary = nlohmann::json::object();
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version;
  double wall_seconds = 0.0;
  std::vector<double> cell_wall_seconds;
};

/// Signal of length n: s-sparse with uniform random support (Rademacher or
/// Gaussian amplitudes), or compressible |x|_(k) = k^-p with random
/// placement and signs (Decaying; s is ignored).
RealVector plant_signal(Index n, Index s, Amplitude amplitude, double scale, double decay, Rng& rng);

/// Stream owned by one trial.
Rng trial_stream(std::uint64_t seed, std::size_t cell, std::size_t trial);

/// Executes one trial; the record is what replay prints.
nlohmann::json run_trial(const ExperimentConfig& config, std::size_t cell, std::size_t trial);

ExperimentResult run_experiment(const ExperimentConfig& config);
ExperimentResult run_phase_transition(const ExperimentConfig& config);
ExperimentResult run_error_scaling(const ExperimentConfig& config);
ExperimentResult run_certificate_rate(const ExperimentConfig& config);
ExperimentResult run_estimate_sweep(const ExperimentConfig& config);
ExperimentResult run_ensemble_compare(const ExperimentConfig& config);

/// RFC 4180 CSV (CRLF line ends, quoting where needed).
void write_csv(std::ostream& out, const ExperimentResult& result);
std::string csv_escape(const std::string& field);
std::vector<std::vector<std::string>> read_csv(std::istream& in);

nlohmann::json meta_json(const ExperimentConfig& config, const ExperimentResult& result);

struct OutputPaths {
  std::filesystem::path csv, meta, dat, gp;
};

OutputPaths output_paths(const std::filesystem::path& csv);

/// Writes the CSV, the .meta.json sidecar, gnuplot data and script.
OutputPaths write_outputs(const ExperimentConfig& config, const ExperimentResult& result,
                          const std::filesystem::path& csv);

/// Re-executes one trial of a finished run from its CSV path (the
/// .meta.json sidecar holds the configuration).
nlohmann::json replay(const std::filesystem::path& result_csv, std::size_t cell, std::size_t trial);

}  // namespace ripless::harness
