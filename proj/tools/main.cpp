#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mpmcmc/bounds.hpp"
#include "mpmcmc/experiment.hpp"
#include "mpmcmc/target.hpp"
#include "mpmcmc/validation.hpp"

namespace {

int cmd_run(const std::string& config_path, unsigned workers_override) {
  using namespace mpmcmc;
  ExperimentConfig config = parse_config_file(config_path);
  if (workers_override > 0) config.workers = workers_override;
  const WorkerPool pool(resolve_workers(config));
  std::fprintf(stderr, "running experiment with %u workers\n", pool.size());
  const ExperimentReport report = run_experiment(config, &pool);
  write_rows_csv(config.output_csv, report.rows);
  std::string mala;
  if (report.e_mala) mala = ", E_MALA=" + std::to_string(*report.e_mala);
  std::fprintf(stderr, "wrote %zu rows to %s (E_RW=%g%s)\n", report.rows.size(),
               config.output_csv.c_str(), report.e_rw, mala.c_str());
  if (!config.output_plot.empty()) {
    write_plot_data(config.output_plot, report, config.samplers, config.k_grid);
    std::fprintf(stderr, "wrote plot data to %s\n", config.output_plot.c_str());
  }
  return 0;
}

int cmd_tune(const std::string& config_path, const std::string& sampler, int k,
             unsigned workers_override) {
  using namespace mpmcmc;
  ExperimentConfig config = parse_config_file(config_path);
  if (workers_override > 0) config.workers = workers_override;
  const WorkerPool pool(resolve_workers(config));
  const TargetPtr target = build_target(config);
  const Vector x0 = initial_point(config, *target);
  const TuneResult result = tune_step(config, sampler, k, target, x0, &pool);
  std::printf("sigma,esjd,esjd_stderr,accept\n");
  for (const auto& p : result.table)
    std::printf("%.17g,%.17g,%.17g,%.17g\n", p.sigma, p.esjd, p.stderr_, p.accept);
  std::printf("# sigma_star=%.17g\n", result.sigma_star);
  return 0;
}

int cmd_bounds(const std::vector<int>& k_grid, int d, double m, double l,
               const std::vector<double>& sigma_grid) {
  using namespace mpmcmc;
  std::printf("k,d,sigma,m,l,grw_bound,grw_sup_bound,mgf_term\n");
  for (int k : k_grid) {
    for (double sigma : sigma_grid) {
      BoundQuery q{k, d, sigma, m, l};
      const double b = grw_bound(q);
      std::string sup = "";
      if (k > 2 && d > 2) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", grw_sup_bound(k, d, m, l));
        sup = buf;
      }
      q.mgf_point = gaussian_mgf_point(sigma);
      q.mgf_value = kGaussianLogMgfValue;
      const double mgf = mgf_gap_bound(q);
      std::printf("%d,%d,%.17g,%.17g,%.17g,%.17g,%s,%.17g\n", k, d, sigma, m, l, b,
                  sup.c_str(), mgf);
    }
  }
  return 0;
}

int cmd_validate(const std::string& level, unsigned workers) {
  using namespace mpmcmc;
  const WorkerPool pool(workers);
  std::vector<CheckResult> results = quick_checks(&pool);
  if (level == "full") {
    const auto more = full_checks(&pool);
    results.insert(results.end(), more.begin(), more.end());
  }
  print_results(results);
  return all_pass(results) ? 0 : 1;
}

int cmd_dataset(std::uint64_t seed, const std::string& out, int n, int d) {
  using namespace mpmcmc;
  const LogisticData data = generate_experiment_data(n, d, seed);
  write_dataset_csv(out, data.design, data.responses);
  std::fprintf(stderr, "wrote %dx%d dataset to %s\n", n, d, out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multiproposal MCMC benchmark harness"};
  app.require_subcommand(1);

  unsigned workers = 0;
  app.add_option("--workers", workers, "worker threads (overrides MPMCMC_WORKERS)");

  std::string config_path;
  auto* run = app.add_subcommand("run", "run the configured experiment");
  run->add_option("config", config_path, "experiment config file")->required();

  std::string tune_sampler;
  int tune_k = 1;
  std::string tune_config;
  auto* tune = app.add_subcommand("tune", "step-size grid for one sampler");
  tune->add_option("config", tune_config, "experiment config file")->required();
  tune->add_option("--sampler", tune_sampler, "sampler id")->required();
  tune->add_option("--k", tune_k, "number of candidates")->required();

  std::vector<int> k_grid{1, 2, 4, 8, 16, 32, 64};
  int bd = 50;
  double bm = 1.0, bl = 1.0;
  std::vector<double> sigma_grid{0.1, 0.5, 1.0};
  auto* bounds = app.add_subcommand("bounds", "closed-form gap bound table");
  bounds->add_option("--k-grid", k_grid, "K values");
  bounds->add_option("--d", bd, "dimension");
  bounds->add_option("--m", bm, "strong convexity constant");
  bounds->add_option("--l", bl, "smoothness constant");
  bounds->add_option("--sigma-grid", sigma_grid, "step sizes");

  std::string level = "quick";
  auto* validate = app.add_subcommand("validate", "exact + statistical check battery");
  validate->add_option("--level", level, "quick or full")
      ->check(CLI::IsMember({"quick", "full"}));

  std::uint64_t ds_seed = 1;
  std::string ds_out = "dataset.csv";
  int ds_n = 50, ds_d = 50;
  auto* dataset = app.add_subcommand("dataset", "export a synthetic dataset");
  dataset->add_option("--seed", ds_seed, "generation seed");
  dataset->add_option("--out", ds_out, "output CSV path")->required();
  dataset->add_option("--n", ds_n, "observations");
  dataset->add_option("--d", ds_d, "dimension");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, workers);
    if (tune->parsed()) return cmd_tune(tune_config, tune_sampler, tune_k, workers);
    if (bounds->parsed()) return cmd_bounds(k_grid, bd, bm, bl, sigma_grid);
    if (validate->parsed()) {
      unsigned w = workers;
      if (w == 0) {
        mpmcmc::ExperimentConfig probe;
        w = mpmcmc::resolve_workers(probe);
      }
      return cmd_validate(level, w);
    }
    if (dataset->parsed()) return cmd_dataset(ds_seed, ds_out, ds_n, ds_d);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
