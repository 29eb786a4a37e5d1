#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "config.hpp"
#include "rgt/rgt.hpp"
#include "verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rgt;

namespace {

constexpr const char* kVersion = "1.0.0";

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::string> schedule;
  std::optional<double> beta_max;
  std::optional<double> omega;
  std::optional<std::string> out;
  bool full_trace = false;
};

json effective_config(const Overrides& o) {
  json cfg = cli::load_config(o.config);
  // File datasets are resolved relative to the config file.
  if (!o.config.empty()) {
    const fs::path data = cli::get<std::string>(cfg, "dataset.path");
    if (!data.empty() && data.is_relative())
      cfg["dataset"]["path"] = (fs::path(o.config).parent_path() / data).lexically_normal().string();
  }
  if (o.seed) cfg["run"]["seed"] = *o.seed;
  if (o.trials) cfg["run"]["trials"] = *o.trials;
  if (o.schedule) cfg["schedule"]["kind"] = *o.schedule;
  if (o.beta_max) {
    cfg["schedule"]["beta_max"] = *o.beta_max;
    cfg["schedule"]["beta"] = *o.beta_max;
  }
  if (o.omega) cfg["solver"]["omega"] = *o.omega;
  if (o.out) cfg["output"]["dir"] = *o.out;
  if (o.full_trace) cfg["output"]["full_trace"] = true;
  return cfg;
}

fs::path output_dir(const json& cfg) {
  fs::path dir = cli::get<std::string>(cfg, "output.dir");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("output.dir", "cannot create " + dir.string());
  return dir;
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream out(p);
  if (!out) throw Error("cannot write " + p.string());
  out << j.dump(2) << '\n';
}

void write_manifest(const fs::path& dir, const std::string& command, const json& cfg) {
  write_json(dir / "manifest.json", {{"command", command},
                                     {"config", cfg},
                                     {"seed", cfg["run"]["seed"]},
                                     {"versions",
                                      {{"rgt", kVersion},
                                       {"compiler", __VERSION__},
                                       {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                                     std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                                     std::to_string(EIGEN_MINOR_VERSION)}}}});
}

std::size_t worker_count(std::size_t jobs) {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("RGT_THREADS")) {
    try {
      n = std::max<long>(1, std::stol(env));
    } catch (const std::exception&) {
      throw ConfigError("RGT_THREADS", "expected a positive integer");
    }
  }
  return std::min(n, std::max<std::size_t>(jobs, 1));
}

/// Runs job(0..n-1) on up to worker_count(n) threads; rethrows the first failure.
template <class Job>
void parallel_for(std::size_t n, Job job) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex m;
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < worker_count(n); ++w)
    pool.emplace_back([&] {
      for (std::size_t k; (k = next++) < n;) {
        try {
          job(k);
        } catch (...) {
          std::lock_guard lock(m);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

json stats(const std::vector<double>& v) {
  double mean = 0.0, var = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  for (double x : v) var += (x - mean) * (x - mean);
  var = v.size() > 1 ? var / static_cast<double>(v.size() - 1) : 0.0;
  return {{"mean", mean},
          {"std", std::sqrt(var)},
          {"min", *std::min_element(v.begin(), v.end())},
          {"max", *std::max_element(v.begin(), v.end())}};
}

// ---------------------------------------------------------------------------

int cmd_quadratic(const json& cfg) {
  const SolverConfig solver = cli::solver_config(cfg);
  const BetaSchedule resonant = cli::schedule(cfg);
  const BetaSchedule non_resonant = BetaSchedule::constant(0.0, resonant.start_time());
  const auto n = cli::get<std::size_t>(cfg, "objective.nodes");
  if (n < 1) throw ConfigError("objective.nodes", "must be >= 1");
  const auto trials = cli::get<std::size_t>(cfg, "run.trials");
  if (trials < 1) throw ConfigError("run.trials", "must be >= 1");
  const auto seed = cli::get<std::uint64_t>(cfg, "run.seed");
  const bool full = cli::get<bool>(cfg, "output.full_trace");
  const fs::path dir = output_dir(cfg);
  write_manifest(dir, "quadratic", cfg);

  struct Final {
    double h, d, active, apparent;
    std::size_t steps;
    bool converged;
  };
  std::vector<Final> nr(trials), r(trials);
  const auto obj = quadratic_multi(n);

  parallel_for(2 * trials, [&](std::size_t job) {
    const std::size_t trial = job / 2;
    const bool resonant_run = job % 2 == 1;
    Rng rng(seed, trial + 1);
    NetworkState init = random_state(n, rng);
    const fs::path file = dir / ((resonant_run ? "mr_trial" : "mnr_trial") + std::to_string(trial) + ".csv");
    std::ofstream out(file);
    if (!out) throw Error("cannot write " + file.string());
    CsvTraceWriter writer(out, n, full);
    const SolveResult s = solve(obj, std::move(init), solver, resonant_run ? resonant : non_resonant, writer);
    const auto& st = s.final.state;
    const double beta = resonant_run ? resonant.beta_max() : 0.0;
    const Evaluation ev = obj.with_beta(beta).evaluate(st);
    (resonant_run ? r : nr)[trial] = {ev.cost, ev.dissipation, power_report(st).total_active_abs,
                                      power_report(st, PowerConvention::NonResonant).total_active_abs,
                                      s.steps, s.converged};
  });

  auto summarize = [](const std::vector<Final>& v) {
    std::vector<double> h, d, a, s, steps;
    std::size_t conv = 0;
    for (const auto& f : v) {
      h.push_back(f.h), d.push_back(f.d), a.push_back(f.active), s.push_back(f.apparent);
      steps.push_back(static_cast<double>(f.steps));
      conv += f.converged;
    }
    return json{{"final_H", stats(h)},
                {"final_D", stats(d)},
                {"final_total_active_abs", stats(a)},
                {"final_sum_VI", stats(s)},
                {"steps", stats(steps)},
                {"converged", conv}};
  };
  const json summary{{"nodes", n}, {"trials", trials}, {"M_nr", summarize(nr)}, {"M_r", summarize(r)}};
  write_json(dir / "summary.json", summary);
  std::cout << summary.dump(2) << '\n';
  return 0;
}

int cmd_ocsvm(const json& cfg) {
  Dataset data;
  try {
    data = cli::dataset(cfg);
  } catch (const DomainError& e) {
    throw ConfigError("dataset", e.what());
  }
  const json sig = cli::get<json>(cfg, "svm.sigma");
  double sigma = 0.0;
  if (sig.is_string() && sig.get<std::string>() == "median")
    sigma = median_pairwise_distance(data.x);
  else if (sig.is_number())
    sigma = sig.get<double>();
  else
    throw ConfigError("svm.sigma", "expected a number or \"median\"");
  const json hj = cli::get<json>(cfg, "svm.h");
  std::optional<double> h;
  if (hj.is_number()) h = hj.get<double>();
  else if (!hj.is_null()) throw ConfigError("svm.h", "expected a number or null");
  const json hs = cli::get<json>(cfg, "svm.h_start");
  BarrierPath path;
  if (hs.is_number()) path.h_start = hs.get<double>();
  else if (!hs.is_null()) throw ConfigError("svm.h_start", "expected a number or null");

  std::optional<OcsvmProblem> problem;
  try {
    problem.emplace(data.x, cli::get<double>(cfg, "svm.nu"), KernelSpec{sigma}, h);
  } catch (const DomainError& e) {
    throw ConfigError("svm", e.what());
  }
  const SolverConfig solver = cli::solver_config(cfg);
  const BetaSchedule sched = cli::schedule(cfg);
  const auto seed = cli::get<std::uint64_t>(cfg, "run.seed");
  const fs::path dir = output_dir(cfg);
  json effective = cfg;
  effective["svm"]["sigma_resolved"] = sigma;
  write_manifest(dir, "ocsvm", effective);

  std::ofstream trace(dir / "trace.csv");
  CsvTraceWriter writer(trace, static_cast<std::size_t>(problem->size()), cli::get<bool>(cfg, "output.full_trace"));
  const TrainResult t = train(*problem, solver, sched, seed, writer, path);
  write_json(dir / "model.json", to_json(t.model));

  const ClassifyReport rep = classify_dataset(t.model, data.x);
  const PowerReport pw = power_report(t.run.final.state);
  json svs = json::array();
  for (auto k : t.model.sv_indices)
    svs.push_back({{"index", k},
                   {"alpha", t.model.alphas[k]},
                   {"active", pw.per_node_active[k]},
                   {"reactive", pw.per_node_reactive[k]}});
  const json report{{"dataset", data.name},
                    {"n", data.size()},
                    {"dim", data.dim()},
                    {"sigma", sigma},
                    {"nu", problem->nu()},
                    {"h", problem->h()},
                    {"correct", rep.correct},
                    {"outliers", rep.outliers},
                    {"svs", rep.sv_count},
                    {"converged", t.run.converged},
                    {"steps", t.run.steps},
                    {"barrier_stages", t.stages},
                    {"total_steps", t.total_steps},
                    {"total_active_abs", pw.total_active_abs},
                    {"support_vectors", svs}};
  write_json(dir / "report.json", report);

  const auto grid = cli::get<std::size_t>(cfg, "svm.grid");
  if (grid > 1 && data.dim() == 2) {
    const double margin = cli::get<double>(cfg, "svm.grid_margin");
    const Eigen::RowVectorXd lo = data.x.colwise().minCoeff().array() - margin;
    const Eigen::RowVectorXd hi = data.x.colwise().maxCoeff().array() + margin;
    std::ofstream g(dir / "decision_grid.csv");
    g << "x,y,f\n";
    for (std::size_t i = 0; i < grid; ++i)
      for (std::size_t j = 0; j < grid; ++j) {
        Eigen::Vector2d x(lo[0] + (hi[0] - lo[0]) * static_cast<double>(i) / static_cast<double>(grid - 1),
                          lo[1] + (hi[1] - lo[1]) * static_cast<double>(j) / static_cast<double>(grid - 1));
        g << format_double(x[0]) << ',' << format_double(x[1]) << ',' << format_double(decision_function(t.model, x))
          << '\n';
      }
  }
  std::cout << "correct " << rep.correct << "  outliers " << rep.outliers << "  SVs " << rep.sv_count
            << (t.run.converged ? "" : "  (max steps reached)") << '\n';
  return 0;
}

int cmd_verify(bool corrupt) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto results = cli::run_verify({corrupt});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return cli::print_verify(results, secs, std::cout) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resonant growth-transform optimizer"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Overrides o;
  bool corrupt = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON config file");
    sub->add_option("--seed", o.seed, "run seed");
    sub->add_option("--beta-schedule", o.schedule, "constant | logistic | switching")
        ->check(CLI::IsMember({"constant", "logistic", "switching"}));
    sub->add_option("--beta-max", o.beta_max, "final regularization weight");
    sub->add_option("--omega", o.omega, "angular frequency");
    sub->add_option("--out", o.out, "output directory");
    sub->add_flag("--full-trace", o.full_trace, "per-node |V|, |I|, phi columns");
  };
  auto* quad = app.add_subcommand("quadratic", "resonant vs non-resonant quadratic experiment");
  add_common(quad);
  quad->add_option("--trials", o.trials, "number of random starts");
  auto* svm = app.add_subcommand("ocsvm", "train a resonant one-class SVM");
  add_common(svm);
  auto* ver = app.add_subcommand("verify", "oracle and invariant suites");
  ver->add_flag("--corrupt-gradient", corrupt)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return e.get_exit_code() == 0 ? app.exit(e) : (app.exit(e), 2);
  }

  try {
    if (*ver) return cmd_verify(corrupt);
    const json cfg = effective_config(o);
    if (*quad) return cmd_quadratic(cfg);
    return cmd_ocsvm(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
