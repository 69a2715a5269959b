// colearn: collaborative principal-agent fitting experiments.
//
//   colearn run <config.cfg>     run an experiment, emit csv/json outputs
//   colearn gen-data ...         sample a synthetic logistic dataset to csv
//   colearn verify <sum> <traj>  recheck the loss bound on emitted files
//
// Exit codes: 0 ok, 1 usage, 2 validation/parse, 3 numeric failure,
// 4 bound violation.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "colearn/experiment_config.hpp"
#include "colearn/orchestrator.hpp"
#include "colearn/run_io.hpp"
#include "colearn/synthetic.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitBound = 4;

struct RunOptions {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 1;
  bool quiet = false;
};

std::string default_out_dir() {
  const char* env = std::getenv("COLEARN_OUT_DIR");
  return env && *env ? env : ".";
}

int cmd_run(const RunOptions& opt) {
  colearn::ExperimentConfig cfg = colearn::load_experiment_config(opt.config_path);
  if (opt.seed_given) cfg.run.seed = opt.seed;
  if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
  if (cfg.out_dir.empty()) cfg.out_dir = default_out_dir();

  const colearn::ModelSpec model = cfg.make_model_spec();
  const colearn::Dataset source = cfg.load_source();
  const auto parts = colearn::partition(source, cfg.split);
  std::vector<colearn::Dataset> trains(parts.begin(), parts.end() - 1);
  const colearn::Dataset& test = parts.back();

  colearn::ThreadPool pool(opt.threads);
  const colearn::TrajectoryRecord record =
      colearn::run(cfg.run, model, trains, test, &pool);

  const colearn::BoundReport report = colearn::verify_bound(record, cfg.run.principal.beta);
  if (!report.ok) {
    std::fprintf(stderr, "bound violation: loss %.17g exceeds bound %.17g\n",
                 report.cumulative_loss, report.bound);
    return kExitBound;
  }

  std::filesystem::create_directories(cfg.out_dir);
  const auto in_dir = [&](const char* name) {
    return (std::filesystem::path(cfg.out_dir) / name).string();
  };
  colearn::write_trajectory(in_dir("trajectory.csv"), record, model.param_dim, cfg.run.agent_count);
  colearn::write_summary(in_dir("summary.json"), record, cfg);
  colearn::write_fit_curve(in_dir("fit_curve.csv"), model, record.final_theta_bar, source);
  colearn::write_estimates(in_dir("estimates.csv"), record, model.param_dim);

  if (!opt.quiet) {
    std::printf("steps executed : %ld (%s)\n", record.steps_executed,
                colearn::to_string(record.terminated_by));
    std::printf("theta*         :");
    for (double v : record.final_theta_bar) std::printf(" %.10g", v);
    std::printf("\n");
    std::printf("mixture loss   : %.10g\n", report.cumulative_loss);
    std::printf("loss bound     : %.10g\n", report.bound);
    std::printf("outputs        : %s/{trajectory,fit_curve,estimates}.csv, summary.json\n",
                cfg.out_dir.c_str());
  }
  return kExitOk;
}

struct GenOptions {
  double n0 = 0, ne = 0, rate = 0;
  int days = 24;
  double noise_sd = 0.0;
  std::uint64_t seed = 0;
  std::string out_path;
  bool quiet = false;
};

int cmd_gen_data(const GenOptions& opt) {
  const colearn::LogisticGrowthParams params{opt.n0, opt.ne, opt.rate};
  params.validate();
  if (opt.days < 1) throw std::invalid_argument("--days must be >= 1");
  std::vector<double> times;
  for (int t = 0; t < opt.days; ++t) times.push_back(t);
  const colearn::Dataset data = colearn::generate_logistic(params, times, opt.noise_sd, opt.seed);
  colearn::save_csv(data, opt.out_path);
  if (!opt.quiet) {
    std::printf("wrote %zu points to %s\n", data.size(), opt.out_path.c_str());
  }
  return kExitOk;
}

int cmd_verify(const std::string& summary_path, const std::string& trajectory_path, bool quiet) {
  const colearn::SummaryFile summary = colearn::read_summary(summary_path);
  const std::vector<double> losses = colearn::read_trajectory_losses(trajectory_path);
  double total = 0.0;
  for (double l : losses) total += l;
  const bool ok = total <= summary.bound + 1e-9;
  if (!quiet) {
    std::printf("recorded loss  : %.17g (%zu rows)\n", total, losses.size());
    std::printf("declared bound : %.17g\n", summary.bound);
    std::printf("verdict        : %s\n", ok ? "ok" : "VIOLATED");
  }
  return ok ? kExitOk : kExitBound;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"collaborative principal-agent learning experiments"};
  app.require_subcommand(1);

  RunOptions run_opt;
  CLI::App* run_cmd = app.add_subcommand("run", "run an experiment from a config file");
  run_cmd->add_option("config", run_opt.config_path, "experiment config file")->required();
  run_cmd->add_option("--seed", run_opt.seed, "override the config seed");
  run_cmd->add_option("--out-dir", run_opt.out_dir, "output directory (default: config, then $COLEARN_OUT_DIR)");
  run_cmd->add_option("--threads", run_opt.threads, "worker threads for agent updates")
      ->check(CLI::PositiveNumber);
  run_cmd->add_flag("--quiet", run_opt.quiet, "suppress the summary printout");

  GenOptions gen_opt;
  CLI::App* gen_cmd = app.add_subcommand("gen-data", "sample a synthetic logistic dataset");
  gen_cmd->add_option("--n0", gen_opt.n0, "initial population")->required();
  gen_cmd->add_option("--ne", gen_opt.ne, "equilibrium population")->required();
  gen_cmd->add_option("--r", gen_opt.rate, "growth rate per day")->required();
  gen_cmd->add_option("--days", gen_opt.days, "number of daily samples starting at t=0");
  gen_cmd->add_option("--noise-sd", gen_opt.noise_sd, "gaussian noise level");
  gen_cmd->add_option("--seed", gen_opt.seed, "noise seed");
  gen_cmd->add_option("--out", gen_opt.out_path, "output csv path")->required();
  gen_cmd->add_flag("--quiet", gen_opt.quiet, "suppress the report line");

  std::string summary_path, trajectory_path;
  bool verify_quiet = false;
  CLI::App* verify_cmd = app.add_subcommand("verify", "recheck the loss bound on run outputs");
  verify_cmd->add_option("summary", summary_path, "summary.json from a run")->required();
  verify_cmd->add_option("trajectory", trajectory_path, "trajectory.csv from the same run")->required();
  verify_cmd->add_flag("--quiet", verify_quiet, "suppress the report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  run_opt.seed_given = run_cmd->count("--seed") > 0;

  try {
    if (*run_cmd) return cmd_run(run_opt);
    if (*gen_cmd) return cmd_gen_data(gen_opt);
    return cmd_verify(summary_path, trajectory_path, verify_quiet);
  } catch (const colearn::NumericFailure& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return kExitNumeric;
  } catch (const colearn::DegenerateWeights& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return kExitNumeric;
  } catch (const colearn::ValidationError& e) {
    std::fprintf(stderr, "invalid config: %s\n", e.what());
    return kExitValidation;
  } catch (const colearn::ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid argument: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  }
}
