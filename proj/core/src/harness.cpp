#include "ripless/harness.hpp"

#include "ripless/certificates.hpp"
#include "ripless/estimates.hpp"
#include "ripless/parallel.hpp"
#include "ripless/signal_ops.hpp"
#include "ripless/stats.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace ripless::harness {

using nlohmann::json;
using nlohmann::ordered_json;

const char* version() { return RIPLESS_VERSION; }

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double log_of(Index n) { return std::log(static_cast<double>(n)); }

std::vector<Index> random_subset(Index n, Index s, Rng& rng) {
  std::vector<Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index i = 0; i < s; ++i) {
    const auto j = i + static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  std::vector<Index> out(pool.begin(), pool.begin() + s);
  std::sort(out.begin(), out.end());
  return out;
}

double coherence_or_nan(const ExperimentConfig& cfg, const ensembles::EnsembleSpec& spec, Index m) {
  if (cfg.mu) return *cfg.mu;
  try {
    return estimates::default_mu(spec, m);
  } catch (const Error&) {
    return kNaN;
  }
}

// y = A x + sigma_m z with sigma_m = sigma / sqrt(m); complex noise has
// E|z_k|^2 = 1.
MeasurementVector measure(const MeasurementMatrix& A, const RealVector& x, double sigma, Rng& rng) {
  ComplexVector y = A.entries() * x.cast<Complex>();
  const double sigma_m = sigma / std::sqrt(static_cast<double>(A.rows()));
  if (sigma > 0.0) {
    for (Index k = 0; k < y.size(); ++k) {
      if (A.field() == Field::Real) {
        y[k] += sigma_m * rng.normal();
      } else {
        const double re = rng.normal(), im = rng.normal();
        y[k] += sigma_m * Complex(re, im) / std::sqrt(2.0);
      }
    }
  }
  return MeasurementVector(y, A.field(), sigma_m);
}

json trial_recovery(const ExperimentConfig& cfg, const ensembles::EnsembleSpec& spec, const GridCell& g,
                    Rng base) {
  Rng signal_rng = base.split(1), matrix_rng = base.split(2), noise_rng = base.split(3);
  const RealVector x = plant_signal(g.n, g.s, cfg.amplitude, cfg.amplitude_scale, cfg.decay, signal_rng);
  const MeasurementMatrix A = ensembles::build_matrix(spec, g.m, matrix_rng);
  const MeasurementVector y = measure(A, x, g.sigma, noise_rng);
  const solvers::RecoveryProblem problem = solvers::RecoveryProblem::from_measurements(A, y, cfg.lambda);

  json out;
  auto run = [&](solvers::Program program, const std::string& prefix) {
    const solvers::SolverResult r = solvers::solve(problem, program, cfg.solver);
    const RealVector h = r.x_hat - x;
    const double l2 = h.norm();
    out[prefix + "converged"] = r.converged;
    out[prefix + "status"] = solvers::to_string(r.status);
    out[prefix + "iterations"] = r.iterations;
    out[prefix + "l2_error"] = l2;
    out[prefix + "l1_error"] = h.lpNorm<1>();
    out[prefix + "success"] = r.converged && l2 <= cfg.success_threshold * x.norm();
    if (g.sigma > 0.0) {
      const solvers::TubeDiagnostic tube =
          solvers::tube_diagnostic(problem.A, r.x_hat, x, problem.effective_lambda(), problem.sigma_m);
      out[prefix + "tube_value"] = tube.value;
      out[prefix + "tube_threshold"] = tube.threshold;
      out[prefix + "tube_pass"] = tube.pass;
    }
    return l2;
  };
  const double l2 = run(cfg.program, "");
  if (cfg.compare_program) {
    const double l2b = run(*cfg.compare_program, "compare_");
    out["agree"] = l2b <= cfg.agreement_ratio * l2;
  }
  if (cfg.program != solvers::Program::BasisPursuit && g.s >= 1) {
    solvers::ErrorBoundInputs in;
    in.s_bar = g.s;
    in.m = g.m;
    in.n = g.n;
    in.sigma = g.sigma;
    in.beta = cfg.beta;
    in.x = x;
    out["l2_bound"] = solvers::l2_error_bound(in, cfg.program);
    out["l1_bound"] = solvers::l1_error_bound(in, cfg.program);
  }
  return out;
}

json trial_certificate(const ExperimentConfig& cfg, const ensembles::EnsembleSpec& spec, const GridCell& g,
                       Rng base) {
  Rng signal_rng = base.split(1);
  const std::vector<Index> support = random_subset(g.n, g.s, signal_rng);
  RealVector x = RealVector::Zero(g.n);
  for (Index i : support) x[i] = signal_rng.rademacher();
  const SupportSet T(support, g.n);
  const double mu = cfg.mu ? *cfg.mu : 1.0;
  certificates::GolfingConfig golf = cfg.golfing_fit_budget
                                         ? certificates::GolfingConfig::fit_to_budget(g.n, g.s, g.m, mu)
                                         : certificates::GolfingConfig::standard(g.n, g.s, cfg.golfing_prefactor, mu);
  golf.row_budget = g.m;
  const certificates::GolfingRun run = certificates::golfing_from_ensemble(spec, T, x, golf, base.split(2));
  const certificates::DualCertificate& cert = run.certificate;
  const RealMatrix Ar = real_system(run.A);
  const certificates::InexactDualityReport inexact = certificates::verify_inexact_duality(cert, Ar, T, x);

  json out;
  out["success"] = cert.success;
  out["rows_used"] = cert.rows_used;
  out["batches_used"] = cert.batches_used;
  out["q_norms"] = cert.q_norms;
  json log = json::array();
  for (const auto& b : cert.batch_log)
    log.push_back(json{{"stage", b.stage}, {"rows", b.rows}, {"accepted", b.accepted},
                       {"q_ratio", b.q_norm_after / b.q_norm_before},
                       {"off_ratio", b.off_support_inf / b.q_norm_before}});
  out["batch_log"] = log;
  out["reconstruction_residual"] = cert.reconstruction_residual;
  out["margins"] = json{{"gram", inexact.gram_margin},
                        {"cross", inexact.cross_margin},
                        {"sign", inexact.sign_margin},
                        {"off_support", inexact.off_support_margin}};
  out["inexact_pass"] = inexact.pass;
  if (cert.success) {
    out["w_ratio"] = certificates::certificate_w_norm_check(cert, g.s).ratio;
    const solvers::SolverResult bp = solvers::basis_pursuit(Ar, Ar * x, cfg.solver);
    out["sound"] = (bp.x_hat - x).norm() <= 1e-6;
  }
  return out;
}

json trial_estimate(const ExperimentConfig& cfg, const ensembles::EnsembleSpec& spec, const GridCell& g,
                    Rng stream) {
  const MeasurementMatrix A = ensembles::build_matrix(spec, g.m, stream);
  std::vector<Index> first(static_cast<std::size_t>(g.s));
  std::iota(first.begin(), first.end(), Index{0});
  const SupportSet T(first, g.n);
  json out;
  if (g.which == "weakrip") {
    const double count = std::tgamma(static_cast<double>(g.n - g.s + 1)) /
                         (std::tgamma(static_cast<double>(g.r + 1)) * std::tgamma(static_cast<double>(g.n - g.s - g.r + 1)));
    const auto mode = count <= 1e5 ? estimates::WeakRipMode::Exhaustive : estimates::WeakRipMode::Sampled;
    const estimates::WeakRipReport rep =
        estimates::weak_rip_empirical(A.entries(), T, g.r, g.level, mode, cfg.weakrip_budget, stream);
    out["event"] = rep.violates;
    out["max_deviation"] = rep.max_deviation;
    out["witness"] = rep.witness;
    out["lower_bound_estimate"] = rep.lower_bound_estimate;
  } else if (g.which == "noise") {
    const RealMatrix M = real_system(A);
    const double threshold = 2.0 * max_column_norm(M) * std::sqrt(log_of(g.n));
    RealVector z(M.rows());
    for (Index i = 0; i < z.size(); ++i) z[i] = stream.normal();
    const double stat = (M.transpose() * z).cwiseAbs().maxCoeff();
    out["event"] = stat > threshold;
    out["statistic"] = stat;
    out["threshold"] = threshold;
  } else {
    RealVector ind = RealVector::Zero(g.n);
    ind(first).setOnes();
    out["event"] = estimates::estimate_event(estimates::estimate_from_string(g.which), A.entries(), T, ind, g.level);
  }
  return out;
}

json dispatch(const ExperimentConfig& cfg, const ensembles::EnsembleSpec& spec, std::size_t cell,
              std::size_t trial) {
  const GridCell& g = cfg.cell_grid(cell);
  const Rng base = trial_stream(cfg.seed, cell, trial);
  json out;
  try {
    switch (cfg.kind) {
      case ExperimentKind::PhaseTransition:
      case ExperimentKind::ErrorScaling:
      case ExperimentKind::EnsembleCompare: out = trial_recovery(cfg, spec, g, base); break;
      case ExperimentKind::CertificateRate: out = trial_certificate(cfg, spec, g, base); break;
      case ExperimentKind::EstimateSweep: out = trial_estimate(cfg, spec, g, base); break;
    }
  } catch (const std::exception& e) {
    out = json::object();
    out["error"] = e.what();
  }
  out["cell"] = cell;
  out["trial"] = trial;
  return out;
}

// ------------------------------------------------------------------ aggregation

struct CellTrials {
  std::size_t cell;
  const GridCell* grid;
  ensembles::EnsembleSpec spec;
  std::vector<json> trials;
};

std::int64_t count_true(const std::vector<json>& ts, const char* key) {
  return std::count_if(ts.begin(), ts.end(), [&](const json& t) { return t.value(key, false); });
}

std::int64_t count_errors(const std::vector<json>& ts) {
  return std::count_if(ts.begin(), ts.end(), [](const json& t) { return t.contains("error"); });
}

std::vector<double> collect(const std::vector<json>& ts, const char* key) {
  std::vector<double> v;
  for (const auto& t : ts)
    if (t.contains(key) && t.at(key).is_number()) v.push_back(t.at(key).get<double>());
  return v;
}

double median_or_nan(const std::vector<double>& v) { return v.empty() ? kNaN : stats::median(v); }

ordered_json cell_head(const CellTrials& c) {
  ordered_json r;
  r["cell"] = c.cell;
  r["ensemble"] = ensembles::to_string(c.spec.family());
  return r;
}

void aggregate_recovery(const ExperimentConfig& cfg, const std::vector<CellTrials>& cells, ExperimentResult& res) {
  for (const auto& c : cells) {
    const GridCell& g = *c.grid;
    ordered_json r = cell_head(c);
    r["n"] = g.n;
    r["s"] = g.s;
    r["m"] = g.m;
    r["sigma"] = g.sigma;
    r["program"] = solvers::to_string(cfg.program);
    r["trials"] = c.trials.size();
    const std::int64_t successes = count_true(c.trials, "success");
    const auto trials = static_cast<std::int64_t>(c.trials.size());
    const std::int64_t converged = count_true(c.trials, "converged");
    const std::int64_t errors = count_errors(c.trials);
    r["successes"] = successes;
    r["success_rate"] = static_cast<double>(successes) / static_cast<double>(trials);
    const stats::Interval ci = stats::clopper_pearson(successes, trials);
    r["ci_lower"] = ci.lower;
    r["ci_upper"] = ci.upper;
    r["nonconverged"] = trials - converged - errors;
    r["errors"] = errors;
    const double mu = coherence_or_nan(cfg, c.spec, g.m);
    r["mu"] = mu;
    r["reference_m"] = mu * static_cast<double>(g.s) * log_of(g.n);
    res.records.push_back(std::move(r));
  }
}

void aggregate_error_scaling(const ExperimentConfig& cfg, const std::vector<CellTrials>& cells,
                             ExperimentResult& res) {
  for (const auto& c : cells) {
    const GridCell& g = *c.grid;
    ordered_json r = cell_head(c);
    r["program"] = solvers::to_string(cfg.program);
    r["n"] = g.n;
    r["s"] = g.s;
    r["m"] = g.m;
    r["sigma"] = g.sigma;
    r["lambda"] = cfg.lambda ? *cfg.lambda : solvers::default_lambda(g.n);
    r["trials"] = c.trials.size();
    std::vector<double> sq = collect(c.trials, "l2_error");
    for (double& v : sq) v *= v;
    r["median_l2_sq"] = median_or_nan(sq);
    r["median_l1"] = median_or_nan(collect(c.trials, "l1_error"));
    r["l2_bound"] = median_or_nan(collect(c.trials, "l2_bound"));
    r["l1_bound"] = median_or_nan(collect(c.trials, "l1_bound"));
    const auto trials = static_cast<std::int64_t>(c.trials.size());
    const std::int64_t errors = count_errors(c.trials);
    r["nonconverged"] = trials - count_true(c.trials, "converged") - errors;
    r["errors"] = errors;
    r["tube_pass_rate"] = static_cast<double>(count_true(c.trials, "tube_pass")) / static_cast<double>(trials);
    if (cfg.compare_program) {
      std::vector<double> sqb = collect(c.trials, "compare_l2_error");
      for (double& v : sqb) v *= v;
      r["compare_program"] = solvers::to_string(*cfg.compare_program);
      r["compare_median_l2_sq"] = median_or_nan(sqb);
      r["compare_nonconverged"] = trials - count_true(c.trials, "compare_converged") - errors;
      r["agreement_rate"] = static_cast<double>(count_true(c.trials, "agree")) / static_cast<double>(trials);
    } else {
      r["compare_program"] = "";
      r["compare_median_l2_sq"] = nullptr;
      r["compare_nonconverged"] = nullptr;
      r["agreement_rate"] = nullptr;
    }
    res.records.push_back(std::move(r));
  }

  // Least-squares slopes per (ensemble, n, s, sigma) and per (ensemble, n, sigma).
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_m, by_ratio;
  for (const auto& r : res.records) {
    const double e = r["median_l2_sq"].get<double>();
    if (!(e > 0.0)) continue;
    const auto n = r["n"].get<Index>(), s = r["s"].get<Index>(), m = r["m"].get<Index>();
    const double sigma = r["sigma"].get<double>();
    std::ostringstream key_m, key_r;
    key_m << r["ensemble"].get<std::string>() << " n=" << n << " s=" << s << " sigma=" << sigma;
    key_r << r["ensemble"].get<std::string>() << " n=" << n << " sigma=" << sigma;
    by_m[key_m.str()].first.push_back(std::log(static_cast<double>(m)));
    by_m[key_m.str()].second.push_back(std::log(e));
    by_ratio[key_r.str()].first.push_back(std::log(static_cast<double>(s) / static_cast<double>(m)));
    by_ratio[key_r.str()].second.push_back(std::log(e));
  }
  json fits = json::array();
  auto add_fits = [&](auto& groups, const char* label) {
    for (auto& [key, xy] : groups) {
      std::vector<double> xs = xy.first;
      std::sort(xs.begin(), xs.end());
      if (std::unique(xs.begin(), xs.end()) - xs.begin() < 2) continue;
      const stats::LinearFit fit = stats::least_squares(xy.first, xy.second);
      fits.push_back(json{{"group", key}, {"regressor", label}, {"slope", fit.slope}, {"intercept", fit.intercept}});
    }
  };
  add_fits(by_m, "log_m");
  add_fits(by_ratio, "log_s_over_m");
  res.summary["fits"] = fits;
}

void aggregate_certificates(const ExperimentConfig& cfg, const std::vector<CellTrials>& cells,
                            ExperimentResult& res) {
  json histograms = json::array();
  const std::vector<double> edges = {-1.0, -0.75, -0.5, -0.25, 0.0, 0.25};
  for (const auto& c : cells) {
    const GridCell& g = *c.grid;
    ordered_json r = cell_head(c);
    r["n"] = g.n;
    r["s"] = g.s;
    r["m"] = g.m;
    r["trials"] = c.trials.size();
    const auto trials = static_cast<std::int64_t>(c.trials.size());
    const std::int64_t successes = count_true(c.trials, "success");
    r["successes"] = successes;
    r["success_rate"] = static_cast<double>(successes) / static_cast<double>(trials);
    const stats::Interval ci = stats::clopper_pearson(successes, trials);
    r["ci_lower"] = ci.lower;
    r["ci_upper"] = ci.upper;
    r["reference_rate"] = std::max(0.0, 1.0 - std::exp(-cfg.beta) - 1.0 / static_cast<double>(g.n));
    r["median_rows_used"] = median_or_nan(collect(c.trials, "rows_used"));
    r["median_batches_used"] = median_or_nan(collect(c.trials, "batches_used"));
    const std::vector<double> resid = collect(c.trials, "reconstruction_residual");
    r["max_reconstruction_residual"] = resid.empty() ? kNaN : *std::max_element(resid.begin(), resid.end());
    r["inexact_pass_rate"] = static_cast<double>(count_true(c.trials, "inexact_pass")) / static_cast<double>(trials);
    std::int64_t checked = 0, unsound = 0;
    std::vector<double> sign_m, off_m;
    for (const auto& t : c.trials) {
      if (t.contains("sound")) {
        ++checked;
        if (!t.at("sound").get<bool>()) ++unsound;
      }
      if (t.contains("margins")) {
        sign_m.push_back(t.at("margins").at("sign").get<double>());
        off_m.push_back(t.at("margins").at("off_support").get<double>());
      }
    }
    r["soundness_checked"] = checked;
    r["soundness_failures"] = unsound;
    r["median_w_ratio"] = median_or_nan(collect(c.trials, "w_ratio"));
    r["median_sign_margin"] = median_or_nan(sign_m);
    r["median_off_support_margin"] = median_or_nan(off_m);
    r["errors"] = count_errors(c.trials);
    res.records.push_back(std::move(r));

    auto histogram = [&](const std::vector<double>& v) {
      std::vector<std::int64_t> counts(edges.size() + 1, 0);
      for (double x : v)
        ++counts[static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), x) - edges.begin())];
      return counts;
    };
    histograms.push_back(json{{"cell", c.cell}, {"sign_margin", histogram(sign_m)}, {"off_support_margin", histogram(off_m)}});
  }
  res.summary["margin_histogram_edges"] = edges;
  res.summary["margin_histograms"] = histograms;
}

void aggregate_estimates(const ExperimentConfig& cfg, const std::vector<CellTrials>& cells, ExperimentResult& res) {
  for (const auto& c : cells) {
    const GridCell& g = *c.grid;
    ordered_json r = cell_head(c);
    r["which"] = g.which;
    r["n"] = g.n;
    r["s"] = g.s;
    r["m"] = g.m;
    r["r"] = g.r;
    r["level"] = g.level;
    const auto trials = static_cast<std::int64_t>(c.trials.size());
    const std::int64_t failures = count_true(c.trials, "event");
    double bound = kNaN, mu = kNaN;
    bool in_range = true;
    if (g.which == "noise") {
      bound = 1.0 / (2.0 * static_cast<double>(g.n));
    } else if (g.which != "weakrip") {
      mu = coherence_or_nan(cfg, c.spec, g.m);
      if (std::isfinite(mu)) {
        estimates::TailBoundQuery q;
        q.which = estimates::estimate_from_string(g.which);
        q.m = g.m;
        q.s = g.s;
        q.n = g.n;
        q.mu = mu;
        q.level = g.level;
        const estimates::TailBound b = estimates::tail(q);
        bound = b.value;
        in_range = b.in_stated_range;
      }
    }
    r["mu"] = mu;
    r["trials"] = trials;
    r["failures"] = failures;
    r["empirical_rate"] = static_cast<double>(failures) / static_cast<double>(trials);
    r["bound"] = bound;
    const stats::Interval ci = stats::clopper_pearson(failures, trials);
    r["ci_lower"] = ci.lower;
    r["ci_upper"] = ci.upper;
    r["in_stated_range"] = in_range;
    if (std::isfinite(bound))
      r["pass"] = ci.lower <= bound;
    else
      r["pass"] = nullptr;
    r["errors"] = count_errors(c.trials);
    res.records.push_back(std::move(r));
  }
}

ExperimentResult execute(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t ncell = cfg.cell_count();
  const auto ntrial = static_cast<std::size_t>(cfg.trials);

  std::vector<CellTrials> cells;
  cells.reserve(ncell);
  for (std::size_t c = 0; c < ncell; ++c)
    cells.push_back(CellTrials{c, &cfg.cell_grid(c), cfg.cell_spec(c), std::vector<json>(ntrial)});

  std::vector<double> seconds(ncell * ntrial, 0.0);
  parallel_for(ncell * ntrial, cfg.threads, [&](std::size_t task) {
    const std::size_t c = task / ntrial, t = task % ntrial;
    const auto t0 = std::chrono::steady_clock::now();
    cells[c].trials[t] = dispatch(cfg, cells[c].spec, c, t);
    seconds[task] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  });

  ExperimentResult res;
  res.kind = cfg.kind;
  res.config_hash = cfg.hash();
  res.seed = cfg.seed;
  res.version = version();
  switch (cfg.kind) {
    case ExperimentKind::PhaseTransition:
    case ExperimentKind::EnsembleCompare: aggregate_recovery(cfg, cells, res); break;
    case ExperimentKind::ErrorScaling: aggregate_error_scaling(cfg, cells, res); break;
    case ExperimentKind::CertificateRate: aggregate_certificates(cfg, cells, res); break;
    case ExperimentKind::EstimateSweep: aggregate_estimates(cfg, cells, res); break;
  }
  for (const auto& item : res.records.front().items()) res.columns.push_back(item.key());
  for (std::size_t c = 0; c < ncell; ++c)
    res.cell_wall_seconds.push_back(
        std::accumulate(seconds.begin() + static_cast<std::ptrdiff_t>(c * ntrial),
                        seconds.begin() + static_cast<std::ptrdiff_t>((c + 1) * ntrial), 0.0));
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

ExperimentResult run_checked(const ExperimentConfig& cfg, std::initializer_list<ExperimentKind> kinds) {
  if (std::find(kinds.begin(), kinds.end(), cfg.kind) == kinds.end())
    throw InvalidArgument("experiment kind mismatch: config is '" + to_string(cfg.kind) + "'");
  return execute(cfg);
}

// ------------------------------------------------------------------ output

std::string format_number(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "" : (v > 0 ? "inf" : "-inf");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string format_field(const ordered_json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_float()) return format_number(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

double dat_value(const ordered_json& v) {
  if (v.is_boolean()) return v.get<bool>() ? 1.0 : 0.0;
  if (v.is_number()) return v.get<double>();
  return kNaN;
}

bool numeric_column(const ExperimentResult& res, const std::string& col) {
  for (const auto& r : res.records) {
    const auto& v = r.at(col);
    if (v.is_string()) return false;
  }
  return true;
}

struct PlotSpec {
  std::string x, y, y2, title;
  bool logx = false, logy = false;
};

PlotSpec plot_spec(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::PhaseTransition:
    case ExperimentKind::EnsembleCompare: return {"m", "success_rate", "", "exact recovery rate", false, false};
    case ExperimentKind::ErrorScaling: return {"m", "median_l2_sq", "", "median squared l2 error", true, true};
    case ExperimentKind::CertificateRate: return {"m", "success_rate", "reference_rate", "golfing success rate", false, false};
    case ExperimentKind::EstimateSweep: return {"m", "empirical_rate", "bound", "event frequency vs tail bound", true, true};
  }
  return {};
}

}  // namespace

RealVector plant_signal(Index n, Index s, Amplitude amplitude, double scale, double decay, Rng& rng) {
  if (n < 1 || s < 0 || s > n) throw InvalidArgument("plant_signal: need 0 <= s <= n");
  RealVector x = RealVector::Zero(n);
  if (amplitude == Amplitude::Decaying) {
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    for (Index i = n - 1; i > 0; --i)
      std::swap(perm[static_cast<std::size_t>(i)],
                perm[static_cast<std::size_t>(rng.uniform_index(static_cast<std::uint64_t>(i + 1)))]);
    for (Index k = 0; k < n; ++k)
      x[perm[static_cast<std::size_t>(k)]] = scale * rng.rademacher() * std::pow(static_cast<double>(k + 1), -decay);
    return x;
  }
  for (Index i : random_subset(n, s, rng))
    x[i] = scale * (amplitude == Amplitude::Rademacher ? rng.rademacher() : rng.normal());
  return x;
}

Rng trial_stream(std::uint64_t seed, std::size_t cell, std::size_t trial) { return Rng(seed).split(cell).split(trial); }

json run_trial(const ExperimentConfig& config, std::size_t cell, std::size_t trial) {
  config.validate();
  if (cell >= config.cell_count()) throw InvalidArgument("run_trial: cell index out of range");
  if (trial >= static_cast<std::size_t>(config.trials)) throw InvalidArgument("run_trial: trial index out of range");
  return dispatch(config, config.cell_spec(cell), cell, trial);
}

ExperimentResult run_experiment(const ExperimentConfig& config) { return execute(config); }
ExperimentResult run_phase_transition(const ExperimentConfig& c) { return run_checked(c, {ExperimentKind::PhaseTransition}); }
ExperimentResult run_error_scaling(const ExperimentConfig& c) { return run_checked(c, {ExperimentKind::ErrorScaling}); }
ExperimentResult run_certificate_rate(const ExperimentConfig& c) { return run_checked(c, {ExperimentKind::CertificateRate}); }
ExperimentResult run_estimate_sweep(const ExperimentConfig& c) { return run_checked(c, {ExperimentKind::EstimateSweep}); }
ExperimentResult run_ensemble_compare(const ExperimentConfig& c) { return run_checked(c, {ExperimentKind::EnsembleCompare}); }

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

void write_csv(std::ostream& out, const ExperimentResult& result) {
  for (std::size_t i = 0; i < result.columns.size(); ++i)
    out << (i ? "," : "") << csv_escape(result.columns[i]);
  out << "\r\n";
  for (const auto& r : result.records) {
    for (std::size_t i = 0; i < result.columns.size(); ++i)
      out << (i ? "," : "") << csv_escape(format_field(r.at(result.columns[i])));
    out << "\r\n";
  }
}

std::vector<std::vector<std::string>> read_csv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  char ch;
  while (in.get(ch)) {
    any = true;
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (ch == '\r' || ch == '\n') {
      if (ch == '\r' && in.peek() == '\n') in.get(ch);
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else {
      field += ch;
    }
  }
  if (quoted) throw InvalidArgument("read_csv: unterminated quoted field");
  if (any) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

json meta_json(const ExperimentConfig& config, const ExperimentResult& result) {
  json j;
  j["artifact"] = "ripless";
  j["version"] = result.version;
  j["kind"] = to_string(result.kind);
  j["config_hash"] = result.config_hash;
  j["seed"] = result.seed;
  j["config"] = config.to_json();
  j["columns"] = result.columns;
  j["success_threshold"] = config.success_threshold;
  j["amplitude"] = to_string(config.amplitude);
  j["trial_stream"] = "Rng(seed).split(cell).split(trial)";
  j["summary"] = result.summary;
  j["wall_seconds"] = result.wall_seconds;
  j["cell_wall_seconds"] = result.cell_wall_seconds;
  return j;
}

OutputPaths output_paths(const std::filesystem::path& csv) {
  OutputPaths p;
  p.csv = csv;
  std::filesystem::path stem = csv;
  stem.replace_extension();
  p.meta = stem.string() + ".meta.json";
  p.dat = stem.string() + ".dat";
  p.gp = stem.string() + ".gp";
  return p;
}

OutputPaths write_outputs(const ExperimentConfig& config, const ExperimentResult& result,
                          const std::filesystem::path& csv) {
  const OutputPaths p = output_paths(csv);
  if (p.csv.has_parent_path()) std::filesystem::create_directories(p.csv.parent_path());
  {
    std::ofstream out(p.csv, std::ios::binary);
    write_csv(out, result);
    if (!out) throw Error("cannot write " + p.csv.string());
  }
  {
    std::ofstream out(p.meta);
    out << meta_json(config, result).dump(2) << "\n";
  }

  // gnuplot data: numeric columns, one block per ensemble.
  std::vector<std::string> cols;
  for (const auto& c : result.columns)
    if (numeric_column(result, c)) cols.push_back(c);
  std::vector<std::string> blocks;
  {
    std::ofstream out(p.dat);
    out << "#";
    for (const auto& c : cols) out << ' ' << c;
    out << "\n";
    std::string current;
    for (const auto& r : result.records) {
      const std::string ens = r.at("ensemble").get<std::string>();
      if (blocks.empty() || ens != current) {
        if (!blocks.empty()) out << "\n\n";
        out << "# ensemble " << ens << "\n";
        blocks.push_back(ens);
        current = ens;
      }
      for (std::size_t i = 0; i < cols.size(); ++i) {
        const double v = dat_value(r.at(cols[i]));
        out << (i ? " " : "") << (std::isnan(v) ? std::string("NaN") : format_number(v));
      }
      out << "\n";
    }
  }
  {
    const PlotSpec ps = plot_spec(result.kind);
    auto col = [&](const std::string& name) {
      return static_cast<int>(std::find(cols.begin(), cols.end(), name) - cols.begin()) + 1;
    };
    std::ofstream out(p.gp);
    out << "# " << to_string(result.kind) << " (config " << result.config_hash << ")\n";
    out << "set terminal pngcairo size 900,600\n";
    out << "set output '" << p.gp.stem().string() << ".png'\n";
    out << "set datafile missing 'NaN'\n";
    out << "set title '" << ps.title << "'\n";
    out << "set xlabel '" << ps.x << "'\nset ylabel '" << ps.y << "'\n";
    if (ps.logx) out << "set logscale x\n";
    if (ps.logy) out << "set logscale y\n";
    out << "set key outside\n";
    out << "plot \\\n";
    const std::string dat = p.dat.filename().string();
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      out << "  '" << dat << "' index " << b << " using " << col(ps.x) << ":" << col(ps.y)
          << " with linespoints title '" << blocks[b] << " " << ps.y << "'";
      if (!ps.y2.empty())
        out << ", \\\n  '" << dat << "' index " << b << " using " << col(ps.x) << ":" << col(ps.y2)
            << " with lines dashtype 2 title '" << blocks[b] << " " << ps.y2 << "'";
      out << (b + 1 < blocks.size() ? ", \\\n" : "\n");
    }
  }
  return p;
}

json replay(const std::filesystem::path& result_csv, std::size_t cell, std::size_t trial) {
  const OutputPaths p = output_paths(result_csv);
  std::ifstream in(p.meta);
  if (!in) throw InvalidArgument("replay: missing metadata file " + p.meta.string());
  json meta;
  in >> meta;
  const ExperimentConfig config = ExperimentConfig::from_json(meta.at("config"));
  if (config.hash() != meta.at("config_hash").get<std::string>())
    throw InvalidArgument("replay: configuration hash mismatch in " + p.meta.string());
  return run_trial(config, cell, trial);
}

}  // namespace ripless::harness
