#include "mpmcmc/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "mpmcmc/numeric.hpp"

namespace mpmcmc {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

constexpr std::uint64_t kTunePhase = 0x7e57;
constexpr std::uint64_t kRunPhase = 0xf17a;

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw Error("bad number '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t next = s.find(sep, pos);
    out.push_back(s.substr(pos, next == std::string::npos ? std::string::npos
                                                          : next - pos));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

EsjdResult esjd(std::span<const Vector> states, int dim) {
  if (states.size() < 2) throw InvalidConfigError("esjd: need at least 2 states");
  const std::size_t n = states.size() - 1;  // jumps
  std::vector<double> jump(n);
  CompensatedSum total;
  for (std::size_t t = 0; t < n; ++t) {
    jump[t] = (states[t + 1] - states[t]).squaredNorm() / static_cast<double>(dim);
    total.add(jump[t]);
  }
  EsjdResult out;
  out.value = total.value() / static_cast<double>(n);

  const std::size_t batches = static_cast<std::size_t>(
      std::ceil(std::sqrt(static_cast<double>(n))));
  const std::size_t len = n / batches;
  if (batches >= 2 && len >= 1) {
    std::vector<double> means(batches);
    for (std::size_t b = 0; b < batches; ++b) {
      double s = 0.0;
      for (std::size_t t = b * len; t < (b + 1) * len; ++t) s += jump[t];
      means[b] = s / static_cast<double>(len);
    }
    double mu = 0.0;
    for (double m : means) mu += m;
    mu /= static_cast<double>(batches);
    double var = 0.0;
    for (double m : means) var += (m - mu) * (m - mu);
    var /= static_cast<double>(batches - 1);
    out.stderr_ = std::sqrt(var / static_cast<double>(batches));
  }
  return out;
}

EsjdResult esjd(const ChainTrace& trace, int burnin, int dim) {
  if (burnin < 0 || static_cast<std::size_t>(burnin) + 2 > trace.states.size())
    throw InvalidConfigError("esjd: burn-in leaves fewer than 2 states");
  return esjd(std::span<const Vector>(trace.states.data() + burnin,
                                      trace.states.size() - static_cast<std::size_t>(burnin)),
              dim);
}

void ExperimentConfig::validate() const {
  if (target_kind != "logistic" && target_kind != "gaussian")
    throw InvalidConfigError("config: target.kind must be logistic or gaussian");
  if (dim < 1) throw InvalidConfigError("config: target.dim must be >= 1");
  if (num_observations < 1) throw InvalidConfigError("config: target.n must be >= 1");
  if (k_grid.empty()) throw InvalidConfigError("config: k.grid must be nonempty");
  for (int k : k_grid)
    if (k < 1) throw InvalidConfigError("config: k.grid entries must be >= 1");
  if (iterations <= burnin)
    throw InvalidConfigError("config: run.iterations must exceed run.burnin");
  if (burnin < 0) throw InvalidConfigError("config: run.burnin must be >= 0");
  if (replicates < 1) throw InvalidConfigError("config: run.replicates must be >= 1");
  if (tune_points_per_decade < 1)
    throw InvalidConfigError("config: tune.points_per_decade must be >= 1");
  if (tune_decades <= 0) throw InvalidConfigError("config: tune.decades must be > 0");
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw InvalidConfigError("config line " + std::to_string(lineno) +
                               ": expected key = value");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));

    if (key == "target.kind") cfg.target_kind = value;
    else if (key == "target.dim") cfg.dim = static_cast<int>(parse_double(value));
    else if (key == "target.n") cfg.num_observations = static_cast<int>(parse_double(value));
    else if (key == "target.data_seed") cfg.data_seed = static_cast<std::uint64_t>(parse_double(value));
    else if (key == "target.csv") cfg.dataset_csv = value;
    else if (key == "target.variance") cfg.gaussian_variance = parse_double(value);
    else if (key == "samplers") {
      cfg.samplers.clear();
      for (const auto& tok : split(value, ',')) {
        const std::string t = trim(tok);
        if (!t.empty()) cfg.samplers.push_back(t);
      }
    } else if (key == "k.grid") {
      cfg.k_grid.clear();
      for (const auto& tok : split(value, ','))
        cfg.k_grid.push_back(static_cast<int>(parse_double(trim(tok))));
    } else if (key == "sigma.grid") {
      cfg.sigma_grid.clear();
      for (const auto& tok : split(value, ','))
        if (!trim(tok).empty()) cfg.sigma_grid.push_back(parse_double(trim(tok)));
    } else if (key == "tune.iterations") cfg.tune_iterations = static_cast<int>(parse_double(value));
    else if (key == "tune.points_per_decade") cfg.tune_points_per_decade = static_cast<int>(parse_double(value));
    else if (key == "tune.decades") cfg.tune_decades = parse_double(value);
    else if (key == "run.iterations") cfg.iterations = static_cast<int>(parse_double(value));
    else if (key == "run.burnin") cfg.burnin = static_cast<int>(parse_double(value));
    else if (key == "run.replicates") cfg.replicates = static_cast<int>(parse_double(value));
    else if (key == "run.seed") cfg.seed = static_cast<std::uint64_t>(parse_double(value));
    else if (key == "workers") cfg.workers = static_cast<unsigned>(parse_double(value));
    else if (key == "output.csv") cfg.output_csv = value;
    else if (key == "output.plot") cfg.output_plot = value;
    else if (key == "output.timings") cfg.include_timings = (value == "true" || value == "1");
    else throw InvalidConfigError("config: unknown key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

unsigned resolve_workers(const ExperimentConfig& config) {
  if (config.workers > 0) return config.workers;
  if (const char* env = std::getenv("MPMCMC_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

SamplerSpec sampler_from_id(const std::string& id, TargetPtr target, double step,
                            int k) {
  SamplerSpec spec;
  spec.target = std::move(target);
  spec.proposal.step = step;
  spec.proposal.num_candidates = k;

  if (id == "mh-rw") {
    spec.algorithm = Algorithm::Mh;
    spec.proposal.kind = ProposalKind::IidGaussian;
  } else if (id == "mh-mala") {
    spec.algorithm = Algorithm::Mh;
    spec.proposal.kind = ProposalKind::Langevin;
  } else {
    const auto parts = split(id, '-');
    if (parts.size() < 2) throw InvalidConfigError("unknown sampler id '" + id + "'");
    const std::string& algo = parts[0];
    const std::string& kind = parts[1];

    if (kind == "iid") spec.proposal.kind = ProposalKind::IidGaussian;
    else if (kind == "anti") spec.proposal.kind = ProposalKind::AntitheticGaussian;
    else if (kind == "star") spec.proposal.kind = ProposalKind::Star;
    else if (kind == "langevin") spec.proposal.kind = ProposalKind::Langevin;
    else if (kind == "simplicial") spec.proposal.kind = ProposalKind::Simplicial;
    else throw InvalidConfigError("unknown proposal kind in sampler id '" + id + "'");

    if (algo == "mtm") {
      spec.algorithm = Algorithm::Mtm;
      if (parts.size() != 3)
        throw InvalidConfigError("mtm sampler id needs a weight suffix: '" + id + "'");
      if (parts[2] == "gb") spec.weights = WeightRule::globally_balanced();
      else if (parts[2] == "lb") spec.weights = WeightRule::locally_balanced_sqrt();
      else throw InvalidConfigError("unknown weight rule in sampler id '" + id + "'");
    } else if (algo == "gmh") {
      spec.algorithm = Algorithm::Gmh;
      if (parts.size() != 2)
        throw InvalidConfigError("gmh sampler id takes no weight suffix: '" + id + "'");
    } else {
      throw InvalidConfigError("unknown algorithm in sampler id '" + id + "'");
    }
  }
  spec.validate();
  return spec;
}

std::uint64_t expected_density_evals_per_iter(const std::string& id, int k) {
  if (id.rfind("gmh", 0) == 0) return static_cast<std::uint64_t>(k);
  return static_cast<std::uint64_t>(2 * k - 1);
}

namespace {

// The antithetic kind needs K >= 2; its K=1 column is the shared
// Gaussian marginal, identical in law to the iid kind.
SamplerSpec row_spec(const std::string& id, TargetPtr target, double step, int k) {
  if (k == 1 && id.rfind("mtm-anti", 0) == 0) {
    const std::string fallback = "mtm-iid" + id.substr(8);
    return sampler_from_id(fallback, std::move(target), step, k);
  }
  return sampler_from_id(id, std::move(target), step, k);
}

std::vector<double> sigma_grid_for(const ExperimentConfig& config,
                                   const Target& target) {
  if (!config.sigma_grid.empty()) {
    std::vector<double> grid = config.sigma_grid;
    std::sort(grid.begin(), grid.end());
    return grid;
  }
  const double d = static_cast<double>(target.dim());
  const double l = target.smoothness().value_or(1.0);
  const double centre = 2.38 / std::sqrt(l * d);
  const int n = static_cast<int>(std::lround(config.tune_decades *
                                             config.tune_points_per_decade));
  std::vector<double> grid(static_cast<std::size_t>(n) + 1);
  for (int j = 0; j <= n; ++j) {
    const double exponent =
        static_cast<double>(j) / config.tune_points_per_decade - 0.5 * config.tune_decades;
    grid[static_cast<std::size_t>(j)] = centre * std::pow(10.0, exponent);
  }
  return grid;
}

struct ChainStats {
  double esjd = 0.0;
  double esjd_stderr = 0.0;
  double accept = 0.0;
  EvalBudget budget;
};

ChainStats run_one_chain(const SamplerSpec& spec, const Vector& x0, int iterations,
                         int burnin, std::uint64_t seed) {
  const ChainTrace trace = run_chain(spec, x0, iterations, seed);
  ChainStats st;
  const EsjdResult e = esjd(trace, burnin, spec.target->dim());
  st.esjd = e.value;
  st.esjd_stderr = e.stderr_;
  std::uint64_t acc = 0;
  for (std::size_t t = static_cast<std::size_t>(burnin); t < trace.accepted.size(); ++t)
    acc += trace.accepted[t];
  st.accept = static_cast<double>(acc) /
              static_cast<double>(trace.accepted.size() - static_cast<std::size_t>(burnin));
  st.budget = trace.budget;
  return st;
}

}  // namespace

TuneResult tune_step(const ExperimentConfig& config, const std::string& sampler_id,
                     int k, TargetPtr target, const Vector& x0,
                     const WorkerPool* pool) {
  const std::vector<double> grid = sigma_grid_for(config, *target);
  const int tune_iters =
      config.tune_iterations > 0 ? config.tune_iterations : config.iterations / 4;
  if (tune_iters < 2) throw InvalidConfigError("tune: too few iterations");
  const int tune_burn = tune_iters / 10;

  TuneResult result;
  result.table.resize(grid.size());
  parallel_for(pool, grid.size(), [&](std::size_t j) {
    const SamplerSpec spec = row_spec(sampler_id, target, grid[j], k);
    const std::uint64_t seed =
        derive_key(config.seed, kTunePhase, fnv1a(sampler_id),
                   static_cast<std::uint64_t>(k), j);
    const ChainStats st = run_one_chain(spec, x0, tune_iters, tune_burn, seed);
    result.table[j] = {grid[j], st.esjd, st.esjd_stderr, st.accept};
  });

  double best = 0.0;
  double sigma_star = 0.0;
  for (const auto& p : result.table) {  // ascending grid: ties keep smaller sigma
    if (p.esjd > best) {
      best = p.esjd;
      sigma_star = p.sigma;
    }
  }
  if (best <= 0.0) {
    std::string diag = "tuning failed for " + sampler_id + " K=" + std::to_string(k) +
                       ": ESJD is zero on the whole grid [";
    diag += format_double(grid.front()) + ", " + format_double(grid.back()) + "]";
    throw TuningError(diag);
  }
  result.sigma_star = sigma_star;
  return result;
}

TargetPtr build_target(const ExperimentConfig& config) {
  if (config.target_kind == "gaussian")
    return std::make_shared<GaussianTarget>(config.dim, config.gaussian_variance);
  if (!config.dataset_csv.empty()) {
    auto [design, responses] = read_dataset_csv(config.dataset_csv);
    return LogisticRegressionPosterior::standard(std::move(design), std::move(responses));
  }
  LogisticData data =
      generate_experiment_data(config.num_observations, config.dim, config.data_seed);
  return LogisticRegressionPosterior::standard(std::move(data.design),
                                               std::move(data.responses));
}

Vector initial_point(const ExperimentConfig& config, const Target& target) {
  if (const auto* logistic = dynamic_cast<const LogisticRegressionPosterior*>(&target))
    return logistic->mode();
  (void)config;
  return Vector::Zero(target.dim());
}

ExperimentReport run_experiment(const ExperimentConfig& config,
                                const WorkerPool* pool) {
  config.validate();
  const TargetPtr target = build_target(config);
  const Vector x0 = initial_point(config, *target);

  struct RowDesc {
    std::string id;
    int k;
  };
  std::vector<RowDesc> descs;
  descs.push_back({"mh-rw", 1});
  const bool any_langevin =
      std::any_of(config.samplers.begin(), config.samplers.end(), [](const auto& s) {
        return s.find("langevin") != std::string::npos;
      });
  const bool want_mala = target->has_gradient() && any_langevin;
  if (want_mala) descs.push_back({"mh-mala", 1});
  for (const auto& id : config.samplers)
    for (int k : config.k_grid) descs.push_back({id, k});

  // Phase 1: tune every row. One flat task list over (row, grid point)
  // keeps all workers busy; seeds depend only on (seed, id, K, point).
  const std::vector<double> grid = sigma_grid_for(config, *target);
  const int tune_iters =
      config.tune_iterations > 0 ? config.tune_iterations : config.iterations / 4;
  const int tune_burn = tune_iters / 10;
  std::vector<std::vector<TunePoint>> tune_tables(descs.size());
  for (auto& t : tune_tables) t.resize(grid.size());

  parallel_for(pool, descs.size() * grid.size(), [&](std::size_t task) {
    const std::size_t r = task / grid.size();
    const std::size_t j = task % grid.size();
    const auto& rd = descs[r];
    const SamplerSpec spec = row_spec(rd.id, target, grid[j], rd.k);
    const std::uint64_t seed = derive_key(config.seed, kTunePhase, fnv1a(rd.id),
                                          static_cast<std::uint64_t>(rd.k), j);
    const ChainStats st = run_one_chain(spec, x0, tune_iters, tune_burn, seed);
    tune_tables[r][j] = {grid[j], st.esjd, st.esjd_stderr, st.accept};
  });

  std::vector<double> sigma_star(descs.size());
  for (std::size_t r = 0; r < descs.size(); ++r) {
    double best = 0.0;
    for (const auto& p : tune_tables[r]) {
      if (p.esjd > best) {
        best = p.esjd;
        sigma_star[r] = p.sigma;
      }
    }
    if (best <= 0.0)
      throw TuningError("tuning failed for " + descs[r].id + " K=" +
                        std::to_string(descs[r].k) + ": ESJD zero on the whole grid");
  }

  // Phase 2: replicate chains at the tuned step.
  const std::size_t reps = static_cast<std::size_t>(config.replicates);
  std::vector<ChainStats> stats(descs.size() * reps);
  std::vector<std::int64_t> wall(descs.size() * reps, 0);
  parallel_for(pool, descs.size() * reps, [&](std::size_t task) {
    const std::size_t r = task / reps;
    const std::size_t rep = task % reps;
    const auto& rd = descs[r];
    const SamplerSpec spec = row_spec(rd.id, target, sigma_star[r], rd.k);
    const std::uint64_t seed = derive_key(config.seed, kRunPhase, fnv1a(rd.id),
                                          static_cast<std::uint64_t>(rd.k), rep);
    const auto t0 = std::chrono::steady_clock::now();
    stats[task] = run_one_chain(spec, x0, config.iterations, config.burnin, seed);
    const auto t1 = std::chrono::steady_clock::now();
    wall[task] = std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
  });

  ExperimentReport report;
  report.iterations = config.iterations;
  report.replicates = config.replicates;
  for (std::size_t r = 0; r < descs.size(); ++r) {
    ExperimentRow row;
    row.sampler = descs[r].id;
    row.k = descs[r].k;
    row.sigma = sigma_star[r];
    row.seed = derive_key(config.seed, kRunPhase, fnv1a(descs[r].id),
                          static_cast<std::uint64_t>(descs[r].k));
    double esjd_sum = 0.0, accept_sum = 0.0;
    std::int64_t wall_sum = 0;
    std::vector<double> rep_esjd(reps);
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const ChainStats& st = stats[r * reps + rep];
      rep_esjd[rep] = st.esjd;
      esjd_sum += st.esjd;
      accept_sum += st.accept;
      row.density_evals += st.budget.density_evals;
      row.gradient_evals += st.budget.gradient_evals;
      wall_sum += wall[r * reps + rep];
    }
    row.esjd = esjd_sum / static_cast<double>(reps);
    row.accept_rate = accept_sum / static_cast<double>(reps);
    if (reps >= 2) {
      double var = 0.0;
      for (double e : rep_esjd) var += (e - row.esjd) * (e - row.esjd);
      var /= static_cast<double>(reps - 1);
      row.esjd_stderr = std::sqrt(var / static_cast<double>(reps));
    } else {
      row.esjd_stderr = stats[r * reps].esjd_stderr;
    }
    row.wall_ms = config.include_timings ? wall_sum : 0;
    report.rows.push_back(std::move(row));
  }

  report.e_rw = report.rows[0].esjd;
  if (want_mala) report.e_mala = report.rows[1].esjd;
  return report;
}

double reference_rw(const ExperimentReport& report, int k) {
  return 2.3 * report.e_rw * (1.0 + std::log(static_cast<double>(k)));
}

std::optional<double> reference_mala(const ExperimentReport& report, int k) {
  if (!report.e_mala) return std::nullopt;
  return *report.e_mala * std::sqrt(1.0 + std::log(static_cast<double>(k)));
}

std::string rows_to_csv(const std::vector<ExperimentRow>& rows) {
  std::string out = "# schema=v1\n";
  out += "sampler,k,sigma,esjd,esjd_stderr,accept_rate,density_evals,"
         "gradient_evals,wall_ms,seed\n";
  for (const auto& r : rows) {
    out += r.sampler;
    out += ',' + std::to_string(r.k);
    out += ',' + format_double(r.sigma);
    out += ',' + format_double(r.esjd);
    out += ',' + format_double(r.esjd_stderr);
    out += ',' + format_double(r.accept_rate);
    out += ',' + std::to_string(r.density_evals);
    out += ',' + std::to_string(r.gradient_evals);
    out += ',' + std::to_string(r.wall_ms);
    out += ',' + std::to_string(r.seed);
    out += '\n';
  }
  return out;
}

std::vector<ExperimentRow> rows_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "# schema=v1")
    throw Error("rows csv: missing schema tag v1");
  if (!std::getline(in, line) ||
      trim(line) != "sampler,k,sigma,esjd,esjd_stderr,accept_rate,density_evals,"
                    "gradient_evals,wall_ms,seed")
    throw Error("rows csv: unexpected header");
  std::vector<ExperimentRow> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto f = split(trim(line), ',');
    if (f.size() != 10) throw Error("rows csv: expected 10 fields");
    ExperimentRow r;
    r.sampler = f[0];
    r.k = static_cast<int>(parse_double(f[1]));
    r.sigma = parse_double(f[2]);
    r.esjd = parse_double(f[3]);
    r.esjd_stderr = parse_double(f[4]);
    r.accept_rate = parse_double(f[5]);
    r.density_evals = static_cast<std::uint64_t>(std::stoull(f[6]));
    r.gradient_evals = static_cast<std::uint64_t>(std::stoull(f[7]));
    r.wall_ms = static_cast<std::int64_t>(std::stoll(f[8]));
    r.seed = static_cast<std::uint64_t>(std::stoull(f[9]));
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_rows_csv(const std::string& path, const std::vector<ExperimentRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << rows_to_csv(rows);
}

std::vector<ExperimentRow> read_rows_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return rows_from_csv(buf.str());
}

void write_plot_data(const std::string& path, const ExperimentReport& report,
                     const std::vector<std::string>& samplers,
                     const std::vector<int>& k_grid) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  std::map<std::pair<std::string, int>, double> esjd_by_key;
  for (const auto& r : report.rows) esjd_by_key[{r.sampler, r.k}] = r.esjd;

  out << "k";
  for (const auto& s : samplers) out << ',' << s;
  out << ",ref_rw";
  if (report.e_mala) out << ",ref_mala";
  out << '\n';
  for (int k : k_grid) {
    out << k;
    for (const auto& s : samplers) {
      out << ',';
      const auto it = esjd_by_key.find({s, k});
      if (it != esjd_by_key.end()) out << format_double(it->second);
    }
    out << ',' << format_double(reference_rw(report, k));
    if (const auto rm = reference_mala(report, k)) out << ',' << format_double(*rm);
    out << '\n';
  }
}

}  // namespace mpmcmc
