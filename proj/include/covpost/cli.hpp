#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "covpost/experiments.hpp"
#include "covpost/verify.hpp"

namespace covpost::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUserError = 2 };

/// Runs `body`, printing any exception to `err` and mapping it to an exit
/// code: parse, plan, preset, range and I/O errors are user errors (2),
/// everything else is an internal failure (1).
int guarded(std::ostream& err, const std::function<int()>& body);

/// Value of COVPOST_SEED / COVPOST_WORKERS, or nullopt when unset. Throws
/// ParseError on a malformed value.
std::optional<std::uint64_t> env_seed();
std::optional<int> env_workers();

/// Plan JSON → ExperimentPlan. Unknown keys and wrong types throw PlanError.
/// `default_seed` and `default_workers` fill absent "seed" and "workers".
ExperimentPlan parse_plan(const nlohmann::json& j, std::uint64_t default_seed = 0, int default_workers = 1);
nlohmann::json plan_to_json(const ExperimentPlan& plan);

/// Metric table CSV. wall_time_s is written as NA unless `timing` is set, so
/// reruns are byte-identical; means of rows with no replicates are NA too.
void write_metric_csv(std::ostream& out, const std::vector<MetricRow>& rows, bool timing = false);
std::vector<MetricRow> read_metric_csv(std::istream& in);

/// One chart per metric: "<stem>_tail_prob.svg" and "<stem>_rel_error.svg".
/// Returns the written paths.
std::vector<std::filesystem::path> write_metric_charts(const std::vector<MetricRow>& rows,
                                                       const std::filesystem::path& dir, const std::string& stem,
                                                       const std::string& title, bool log_x,
                                                       std::optional<std::pair<double, double>> error_band = {});

nlohmann::json report_to_json(const std::vector<CheckReport>& reports, std::uint64_t seed, double c);

struct SimulateArgs {
  Index n = 100;
  Index q = 2;
  std::uint64_t seed = 0;
  Sigma0Spec sigma0;
  ErrorDist error_dist = ErrorDist::Gaussian;
  std::filesystem::path out;
};

struct FitArgs {
  std::filesystem::path data;
  std::string prior = "IG_DSIW";
  PresetOverrides overrides;
  ChainConfig chain;
  double lambda = 1.0;
  std::filesystem::path summary_out;
  std::optional<std::filesystem::path> chain_dump;
};

struct ExperimentArgs {
  std::optional<std::string> kind;
  std::filesystem::path plan;
  std::filesystem::path out_dir = ".";
  std::optional<int> workers;
  bool log_x = true;
  bool timing = false;
};

struct VerifyArgs {
  std::uint64_t seed = 20240601;
  double c = 4.0;
  bool quick = false;
  std::optional<std::filesystem::path> out;
};

struct PlotArgs {
  std::filesystem::path metrics;
  std::filesystem::path out_dir = ".";
  std::string stem = "metrics";
  std::string title;
  bool log_x = true;
};

int cmd_simulate(const SimulateArgs& args, std::ostream& err);
int cmd_fit(const FitArgs& args, std::ostream& err);
int cmd_experiment(const ExperimentArgs& args, std::ostream& err);
int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err);
int cmd_plot(const PlotArgs& args, std::ostream& err);

}  // namespace covpost::cli
