#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mpmcmc/sampler.hpp"
#include "mpmcmc/types.hpp"

namespace mpmcmc {

struct EsjdResult {
  double value = 0.0;
  double stderr_ = 0.0;
};

/// Expected squared jump distance per coordinate over a run of states,
/// (1 / (T d)) sum_t |x_{t+1} - x_t|^2, with a batch-means standard error
/// using ceil(sqrt(T)) batches. `states` should already exclude burn-in.
EsjdResult esjd(std::span<const Vector> states, int dim);

/// Convenience overload: drops the first `burnin` transitions of a trace.
EsjdResult esjd(const ChainTrace& trace, int burnin, int dim);

/// Flat key/value experiment description. Parsed from a dotted-key text
/// file; unknown keys are errors so checked-in configs rerun bit-exactly.
struct ExperimentConfig {
  std::string target_kind = "logistic";  // logistic | gaussian
  int dim = 50;
  int num_observations = 50;
  std::uint64_t data_seed = 1;
  std::string dataset_csv;      // optional import path
  double gaussian_variance = 1.0;

  std::vector<std::string> samplers = {"mtm-iid-gb", "mtm-iid-lb", "mtm-anti-gb",
                                       "mtm-anti-lb", "gmh-star"};
  std::vector<int> k_grid = {1, 2, 4, 8, 16, 32, 64};
  std::vector<double> sigma_grid;  // empty: auto-tune

  int iterations = 20000;
  int burnin = 2000;
  int replicates = 5;
  int tune_iterations = 0;  // 0: iterations / 4
  int tune_points_per_decade = 12;
  double tune_decades = 2.0;

  std::uint64_t seed = 20240;
  unsigned workers = 0;  // 0: MPMCMC_WORKERS env, else hardware
  std::string output_csv = "results.csv";
  std::string output_plot;
  bool include_timings = false;

  void validate() const;
};

ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

/// Resolves the worker count: explicit > environment > hardware.
unsigned resolve_workers(const ExperimentConfig& config);

/// Builds the sampler description named by an id such as "mtm-iid-gb",
/// "mtm-langevin-lb", "gmh-star", "mh-rw" or "mh-mala".
SamplerSpec sampler_from_id(const std::string& id, TargetPtr target, double step,
                            int k);

/// Per-iteration density-evaluation contract of a sampler id: 2K-1 for
/// MTM/MH forms, K for GMH.
std::uint64_t expected_density_evals_per_iter(const std::string& id, int k);

struct TunePoint {
  double sigma = 0.0;
  double esjd = 0.0;
  double stderr_ = 0.0;
  double accept = 0.0;
};

struct TuneResult {
  double sigma_star = 0.0;
  std::vector<TunePoint> table;
};

/// Step size maximizing estimated ESJD over a log grid (ties toward the
/// smaller step). The grid defaults to tune_decades decades centred at
/// 2.38 / sqrt(L d), tune_points_per_decade points per decade.
TuneResult tune_step(const ExperimentConfig& config, const std::string& sampler_id,
                     int k, TargetPtr target, const Vector& x0,
                     const WorkerPool* pool = nullptr);

struct ExperimentRow {
  std::string sampler;
  int k = 1;
  double sigma = 0.0;
  double esjd = 0.0;
  double esjd_stderr = 0.0;
  double accept_rate = 0.0;
  std::uint64_t density_evals = 0;
  std::uint64_t gradient_evals = 0;
  std::int64_t wall_ms = 0;
  std::uint64_t seed = 0;

  bool operator==(const ExperimentRow&) const = default;
};

struct ExperimentReport {
  std::vector<ExperimentRow> rows;  // baselines first, then samplers x K
  double e_rw = 0.0;                // tuned K=1 random-walk MH ESJD
  std::optional<double> e_mala;     // tuned K=1 Langevin MH ESJD
  int iterations = 0;
  int replicates = 0;
};

/// Runs the full benchmark: baselines, per-(sampler, K) tuning, replicate
/// chains, reference constants. Deterministic given (config, seed)
/// whatever the worker count.
ExperimentReport run_experiment(const ExperimentConfig& config,
                                const WorkerPool* pool = nullptr);

/// Reference curves from the report's own baselines: 2.3 E_RW (1 + log K)
/// and E_MALA sqrt(1 + log K).
double reference_rw(const ExperimentReport& report, int k);
std::optional<double> reference_mala(const ExperimentReport& report, int k);

void write_rows_csv(const std::string& path, const std::vector<ExperimentRow>& rows);
std::vector<ExperimentRow> read_rows_csv(const std::string& path);
std::string rows_to_csv(const std::vector<ExperimentRow>& rows);
std::vector<ExperimentRow> rows_from_csv(const std::string& text);

void write_plot_data(const std::string& path, const ExperimentReport& report,
                     const std::vector<std::string>& samplers,
                     const std::vector<int>& k_grid);

/// Builds the configured target (generated or imported dataset).
TargetPtr build_target(const ExperimentConfig& config);

/// Starting point: the target mode when computable, the origin otherwise.
Vector initial_point(const ExperimentConfig& config, const Target& target);

}  // namespace mpmcmc
