#include "covpost/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

#include "covpost/io.hpp"
#include "covpost/randmat.hpp"
#include "covpost/stats.hpp"

namespace covpost {

namespace {

constexpr std::uint64_t kDataTag = 0xDA7A5E7ull;
constexpr std::uint64_t kChainTag = 0xC4A125ull;

}  // namespace

std::string Sigma0Spec::label() const {
  switch (kind) {
    case Kind::Identity: return "identity";
    case Kind::Toeplitz: return "toeplitz(rho=" + format_double(rho) + ")";
    case Kind::Spectral: return "spectral(" + format_double(eig_lo) + "," + format_double(eig_hi) + ")";
  }
  return "?";
}

Index QSchedule::q_for(Index n) const {
  const double raw = kind == Kind::Power ? std::pow(static_cast<double>(n), value) : value * static_cast<double>(n);
  const double r = ceil ? std::ceil(raw - 1e-9) : std::round(raw);
  return std::max<Index>(1, static_cast<Index>(r));
}

std::string QSchedule::label() const {
  const std::string r = ceil ? "ceil" : "round";
  return kind == Kind::Power ? "q=" + r + "(n^" + format_double(value) + ")"
                             : "q=" + r + "(" + format_double(value) + "n)";
}

void ExperimentPlan::validate() const {
  const auto fail = [](const std::string& msg) { throw PlanError("plan: " + msg); };
  if (n_grid.empty()) fail("n_grid is empty");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 2) fail("every n must be >= 2");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) fail("n_grid must be strictly ascending");
  }
  if (priors.empty()) fail("prior list is empty");
  if (replicates < 1) fail("replicates must be >= 1");
  if (!(M > 0.0)) fail("M must be positive");
  if (workers < 1) fail("workers must be >= 1");
  try {
    chain.validate();
  } catch (const Error& e) {
    fail(e.what());
  }
  if (q_schedule.kind == QSchedule::Kind::Power) {
    if (!(q_schedule.value > 0.0 && q_schedule.value < 1.0)) fail("power exponent must lie in (0, 1)");
    for (Index n : n_grid)
      if (q_schedule.q_for(n) >= n) fail("q_n must be < n for n = " + std::to_string(n));
  } else {
    if (!(q_schedule.value > 0.0)) fail("linear gamma must be positive");
    if (q_schedule.value * static_cast<double>(n_grid.front()) < 1.0) fail("gamma * min(n) must be >= 1");
  }
  switch (sigma0.kind) {
    case Sigma0Spec::Kind::Toeplitz:
      if (!(sigma0.rho > 0.0 && sigma0.rho < 1.0)) fail("toeplitz rho must lie in (0, 1)");
      break;
    case Sigma0Spec::Kind::Spectral:
      if (!(sigma0.eig_lo > 0.0 && sigma0.eig_hi > sigma0.eig_lo)) fail("spectral needs 0 < lo < hi");
      break;
    case Sigma0Spec::Kind::Identity: break;
  }
}

PDMatrix make_sigma0(const Sigma0Spec& spec, Index q, RngStream& rng) {
  if (q < 1) throw ParameterOutOfRange("make_sigma0: q must be >= 1");
  switch (spec.kind) {
    case Sigma0Spec::Kind::Identity: return PDMatrix::identity(q);
    case Sigma0Spec::Kind::Toeplitz: {
      if (!(spec.rho > 0.0 && spec.rho < 1.0)) throw ParameterOutOfRange("toeplitz rho must lie in (0, 1)");
      Matrix t(q, q);
      for (Index i = 0; i < q; ++i)
        for (Index j = 0; j < q; ++j) t(i, j) = std::pow(spec.rho, static_cast<double>(std::abs(i - j)));
      return PDMatrix(t);
    }
    case Sigma0Spec::Kind::Spectral: {
      if (!(spec.eig_lo > 0.0 && spec.eig_hi > spec.eig_lo)) {
        throw ParameterOutOfRange("spectral form needs 0 < eig_lo < eig_hi");
      }
      // Haar orthogonal factor: QR of a Gaussian matrix with R's diagonal made positive.
      const Matrix g = std_normal_matrix(q, q, rng);
      Eigen::HouseholderQR<Matrix> qr(g);
      Matrix u = qr.householderQ();
      const Matrix& r = qr.matrixQR();
      for (Index j = 0; j < q; ++j)
        if (r(j, j) < 0.0) u.col(j) *= -1.0;
      Vector lambda(q);
      for (Index i = 0; i < q; ++i) lambda(i) = uniform(spec.eig_lo, spec.eig_hi, rng);
      return PDMatrix(u * lambda.asDiagonal() * u.transpose());
    }
  }
  throw ParameterOutOfRange("make_sigma0: unknown kind");
}

Dataset generate_iid_data(Index n, const PDMatrix& sigma0, ErrorDist dist, RngStream& rng) {
  if (n < 2) throw ParameterOutOfRange("generate_iid_data: n must be >= 2");
  const Index q = sigma0.dim();
  Matrix z(n, q);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < q; ++j) z(i, j) = dist == ErrorDist::Gaussian ? rng.normal() : rademacher(rng);
  return Dataset{z * sqrt_pd(sigma0), std::nullopt};
}

std::pair<Dataset, TrueParams> generate_regression_data(Index n, Index p, Index q, double b0_scale,
                                                        const PDMatrix& sigma0, RngStream& rng) {
  if (p < 1 || n <= p) throw ParameterOutOfRange("generate_regression_data: need p >= 1 and n > p");
  if (sigma0.dim() != q) throw DimensionMismatch("generate_regression_data: Sigma0 must be q x q");
  if (!(b0_scale >= 0.0)) throw ParameterOutOfRange("generate_regression_data: b0_scale must be >= 0");
  const Matrix x = std_normal_matrix(n, p, rng);
  const Matrix b0 = b0_scale * std_normal_matrix(p, q, rng);
  const Matrix e = std_normal_matrix(n, q, rng) * sigma0.cholesky_factor().transpose();
  const Vector ev = eigvals_sym(sigma0);
  const double k_sigma = std::min({1.0, ev(0), 1.0 / ev(ev.size() - 1)});
  TrueParams truth{b0, sigma0, k_sigma, 1.0};
  return {Dataset{x * b0 + e, x}, std::move(truth)};
}

std::uint64_t data_stream_id(std::uint64_t master_seed, std::size_t n_index, int replicate) {
  return derive_stream_id(master_seed, {kDataTag, n_index, static_cast<std::uint64_t>(replicate)});
}

std::uint64_t chain_stream_id(std::uint64_t master_seed, PresetName prior, std::size_t n_index, int replicate) {
  return derive_stream_id(master_seed, {kChainTag, static_cast<std::uint64_t>(prior), n_index,
                                        static_cast<std::uint64_t>(replicate)});
}

std::vector<TaskKey> enumerate_tasks(const ExperimentPlan& plan) {
  std::vector<TaskKey> keys;
  for (std::size_t pi = 0; pi < plan.priors.size(); ++pi)
    for (std::size_t ni = 0; ni < plan.n_grid.size(); ++ni)
      for (int r = 0; r < plan.replicates; ++r) keys.push_back({pi, ni, r});
  return keys;
}

TaskOutcome run_task(const ExperimentPlan& plan, const TaskKey& key) {
  const auto start = std::chrono::steady_clock::now();
  TaskOutcome out;
  out.key = key;
  try {
    const Index n = plan.n_grid.at(key.n_index);
    const Index q = plan.q_schedule.q_for(n);
    const PresetName prior_id = plan.priors.at(key.prior_index);

    RngStream data_rng(plan.master_seed, data_stream_id(plan.master_seed, key.n_index, key.replicate));
    const PDMatrix sigma0 = make_sigma0(plan.sigma0, q, data_rng);
    const Dataset data = generate_iid_data(n, sigma0, plan.error_dist, data_rng);
    const SufficientStats stats = compute_stats(data, 0.0);

    const Prior prior = preset(prior_id, q);
    ChainConfig cfg = plan.chain;
    cfg.seed = plan.master_seed;
    cfg.stream_id = chain_stream_id(plan.master_seed, prior_id, key.n_index, key.replicate);
    cfg.sample_B = false;
    const PosteriorSamples samples = run_chain(stats, prior, cfg);

    const double threshold = plan.M * std::sqrt(static_cast<double>(q) / static_cast<double>(n));
    out.tail_prob = tail_probability(samples, sigma0, threshold);
    const PDMatrix pm = posterior_mean_sigma(samples, stats, prior, true);
    out.rel_error = spectral_norm(pm.matrix() - sigma0.matrix()) / spectral_norm(sigma0.matrix());
    out.ok = true;
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = e.what();
  }
  out.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::vector<MetricRow> aggregate(const ExperimentPlan& plan, const std::vector<TaskOutcome>& outcomes) {
  std::vector<MetricRow> rows;
  for (std::size_t pi = 0; pi < plan.priors.size(); ++pi) {
    for (std::size_t ni = 0; ni < plan.n_grid.size(); ++ni) {
      std::vector<double> tails, errs;
      double wall = 0.0;
      for (const auto& o : outcomes) {
        if (o.key.prior_index != pi || o.key.n_index != ni) continue;
        wall += o.wall_time_s;
        if (!o.ok) continue;
        tails.push_back(o.tail_prob);
        errs.push_back(o.rel_error);
      }
      MetricRow row;
      row.prior_name = to_string(plan.priors[pi]);
      row.n = plan.n_grid[ni];
      row.q_n = plan.q_schedule.q_for(row.n);
      row.replicates_done = static_cast<int>(tails.size());
      row.mean_tail_prob = mean(tails);
      row.mean_rel_error = mean(errs);
      row.se_tail_prob = standard_error(tails);
      row.se_rel_error = standard_error(errs);
      row.wall_time_s = wall;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

ExperimentResult run_experiment(const ExperimentPlan& plan) {
  plan.validate();
  const std::vector<TaskKey> keys = enumerate_tasks(plan);
  std::vector<TaskOutcome> outcomes(keys.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < keys.size(); i = next++) outcomes[i] = run_task(plan, keys[i]);
  };
  const int threads = std::min<int>(plan.workers, static_cast<int>(keys.size()));
  {
    std::vector<std::jthread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  ExperimentResult result;
  result.rows = aggregate(plan, outcomes);
  for (auto& o : outcomes)
    if (!o.ok) result.failures.push_back(std::move(o));
  return result;
}

ExperimentResult run_consistency(const ExperimentPlan& plan) {
  if (plan.q_schedule.kind != QSchedule::Kind::Power) {
    throw PlanError("consistency experiments need a power q schedule");
  }
  return run_experiment(plan);
}

ExperimentResult run_inconsistency(const ExperimentPlan& plan) {
  if (plan.q_schedule.kind != QSchedule::Kind::Linear) {
    throw PlanError("inconsistency experiments need a linear q schedule (q_n = gamma n)");
  }
  if (plan.sigma0.kind != Sigma0Spec::Kind::Identity) {
    throw PlanError("inconsistency experiments use Sigma0 = I");
  }
  return run_experiment(plan);
}

}  // namespace covpost
