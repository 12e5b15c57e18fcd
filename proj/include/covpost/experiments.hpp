#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "covpost/gibbs.hpp"
#include "covpost/model.hpp"
#include "covpost/priors.hpp"
#include "covpost/rng.hpp"

namespace covpost {

struct Sigma0Spec {
  enum class Kind { Identity, Toeplitz, Spectral };
  Kind kind = Kind::Identity;
  double rho = 0.9;     // Toeplitz
  double eig_lo = 1.0;  // Spectral
  double eig_hi = 2.0;

  std::string label() const;
};

/// n ↦ q_n. Power: n^exponent, Linear: gamma·n, rounded to nearest (or up
/// when `ceil` is set) and never below 1.
struct QSchedule {
  enum class Kind { Power, Linear };
  Kind kind = Kind::Power;
  double value = 0.5;
  bool ceil = false;

  Index q_for(Index n) const;
  std::string label() const;
};

enum class ErrorDist { Gaussian, ScaledRademacher };
enum class ExperimentKind { Consistency, Inconsistency };

struct ExperimentPlan {
  ExperimentKind kind = ExperimentKind::Consistency;
  std::vector<Index> n_grid;
  QSchedule q_schedule;
  Sigma0Spec sigma0;
  std::vector<PresetName> priors;
  int replicates = 1;
  ChainConfig chain;
  double M = 2.0;
  std::uint64_t master_seed = 0;
  ErrorDist error_dist = ErrorDist::Gaussian;
  int workers = 1;

  /// Throws PlanError on any invalid field.
  void validate() const;
};

struct MetricRow {
  std::string prior_name;
  Index n = 0;
  Index q_n = 0;
  int replicates_done = 0;
  double mean_tail_prob = 0.0;
  double mean_rel_error = 0.0;
  double se_tail_prob = 0.0;
  double se_rel_error = 0.0;
  double wall_time_s = 0.0;
};

/// Coordinates of one (prior, n, replicate) task.
struct TaskKey {
  std::size_t prior_index;
  std::size_t n_index;
  int replicate;
};

struct TaskOutcome {
  TaskKey key;
  bool ok = false;
  double tail_prob = 0.0;
  double rel_error = 0.0;
  double wall_time_s = 0.0;
  std::string error;
};

struct ExperimentResult {
  std::vector<MetricRow> rows;
  std::vector<TaskOutcome> failures;
};

PDMatrix make_sigma0(const Sigma0Spec& spec, Index q, RngStream& rng);

/// Rows Σ0^{1/2}·z with z standard normal or i.i.d. Rademacher. No design.
Dataset generate_iid_data(Index n, const PDMatrix& sigma0, ErrorDist dist, RngStream& rng);

/// X with N(0,1) entries, B0 with N(0, b0_scale²) entries, rows of E ~ N(0, Σ0).
std::pair<Dataset, TrueParams> generate_regression_data(Index n, Index p, Index q, double b0_scale,
                                                        const PDMatrix& sigma0, RngStream& rng);

/// Stream ids for the data of (n, replicate) and for the chain of
/// (prior, n, replicate). Datasets are shared across priors.
std::uint64_t data_stream_id(std::uint64_t master_seed, std::size_t n_index, int replicate);
std::uint64_t chain_stream_id(std::uint64_t master_seed, PresetName prior, std::size_t n_index, int replicate);

std::vector<TaskKey> enumerate_tasks(const ExperimentPlan& plan);

/// Runs one task: draws Σ0 and data, runs the chain, computes the tail
/// probability at M·√(q_n/n) and the relative error of the Rao-Blackwellized
/// posterior mean. Errors are captured in the outcome.
TaskOutcome run_task(const ExperimentPlan& plan, const TaskKey& key);

/// Means and standard errors over successful replicates; rows sorted by
/// (prior order in the plan, n).
std::vector<MetricRow> aggregate(const ExperimentPlan& plan, const std::vector<TaskOutcome>& outcomes);

/// Runs every task on `plan.workers` threads.
ExperimentResult run_experiment(const ExperimentPlan& plan);

/// Requires a Power schedule.
ExperimentResult run_consistency(const ExperimentPlan& plan);
/// Requires a Linear schedule and Identity Σ0.
ExperimentResult run_inconsistency(const ExperimentPlan& plan);

}  // namespace covpost
