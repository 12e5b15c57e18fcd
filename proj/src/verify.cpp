#include "covpost/verify.hpp"

#include <cmath>
#include <limits>

#include "covpost/experiments.hpp"
#include "covpost/gibbs.hpp"
#include "covpost/model.hpp"
#include "covpost/randmat.hpp"
#include "covpost/stats.hpp"

namespace covpost {

double CheckReport::detail(const std::string& key) const {
  for (const auto& [k, v] : details)
    if (k == key) return v;
  return std::numeric_limits<double>::quiet_NaN();
}

namespace {

// Extreme singular values from the eigenvalues of AᵀA.
std::pair<double, double> extreme_singular_values(const Matrix& gram) {
  const Vector ev = eigvals_sym(gram);
  return {std::sqrt(std::max(ev(0), 0.0)), std::sqrt(std::max(ev(ev.size() - 1), 0.0))};
}

Matrix random_pd(Index dim, RngStream& rng) {
  const Matrix a = std_normal_matrix(dim, dim + 2, rng);
  Matrix s = a * a.transpose();
  s.diagonal().array() += 0.1;
  return s;
}

}  // namespace

CheckReport check_gaussian_singular_values(Index n, Index q, int trials, RngStream& rng, double c) {
  if (q < 1 || q >= n || trials < 1) throw ParameterOutOfRange("gaussian singular values: need 1 <= q < n, trials >= 1");
  const double width = c * std::sqrt(static_cast<double>(q) / static_cast<double>(n));
  const double lower = std::pow(1.0 + width, -0.5);
  const double upper = width < 1.0 ? std::pow(1.0 - width, -0.5) : std::numeric_limits<double>::infinity();
  const double root_n = std::sqrt(static_cast<double>(n));

  int passes = 0;
  double worst_min = std::numeric_limits<double>::infinity(), worst_max = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Matrix a = std_normal_matrix(n + q, q, rng);
    auto [smin, smax] = extreme_singular_values(a.transpose() * a);
    smin /= root_n;
    smax /= root_n;
    worst_min = std::min(worst_min, smin);
    worst_max = std::max(worst_max, smax);
    if (smin >= lower && smax <= upper) ++passes;
  }
  CheckReport r;
  r.check_name = "gaussian_singular_values";
  r.trials = trials;
  r.pass_fraction = static_cast<double>(passes) / trials;
  r.nominal_bound = 1.0 - 2.0 * std::exp(-0.5 * static_cast<double>(q));
  r.required_fraction = 0.95;
  r.details = {{"n", double(n)}, {"q", double(q)}, {"c", c}, {"lower", lower}, {"upper", upper},
               {"min_smin", worst_min}, {"max_smax", worst_max}};
  return r;
}

CheckReport check_subgaussian_singular_values(Index n, Index p, Index q, int trials, RngStream& rng, double c,
                                              SubGaussianRows rows, bool project) {
  if (p < 0 || q < 1 || n - p <= q || trials < 1) {
    throw ParameterOutOfRange("sub-Gaussian singular values: need n - p > q >= 1, trials >= 1");
  }
  const double width = c * std::sqrt(static_cast<double>(q) / static_cast<double>(n));
  const double lower = width < 1.0 ? std::sqrt(1.0 - width) : 0.0;
  const double upper = std::sqrt(1.0 + width);
  const double root = std::sqrt(static_cast<double>(n - p));
  const auto entry = [&] { return rows == SubGaussianRows::Rademacher ? rademacher(rng) : rng.normal(); };

  int passes = 0;
  double worst_min = std::numeric_limits<double>::infinity(), worst_max = 0.0;
  for (int t = 0; t < trials; ++t) {
    Matrix gram;
    if (project && p > 0) {
      Matrix z(n, q);
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < q; ++j) z(i, j) = entry();
      const Matrix x = std_normal_matrix(n, p, rng);
      const PDMatrix xtx(x.transpose() * x);
      const Matrix xtz = x.transpose() * z;
      gram = z.transpose() * z - xtz.transpose() * xtx.solve(xtz);
    } else {
      Matrix a(n - p, q);
      for (Index i = 0; i < n - p; ++i)
        for (Index j = 0; j < q; ++j) a(i, j) = entry();
      gram = a.transpose() * a;
    }
    auto [smin, smax] = extreme_singular_values(gram);
    smin /= root;
    smax /= root;
    worst_min = std::min(worst_min, smin);
    worst_max = std::max(worst_max, smax);
    if (smin >= lower && smax <= upper) ++passes;
  }
  CheckReport r;
  r.check_name = std::string("subgaussian_singular_values") + (project ? "_projected" : "") +
                 (rows == SubGaussianRows::Gaussian ? "_gaussian_rows" : "");
  r.trials = trials;
  r.pass_fraction = static_cast<double>(passes) / trials;
  r.nominal_bound = 1.0 - 2.0 * std::exp(-0.5 * static_cast<double>(q));
  r.required_fraction = 0.95;
  r.details = {{"n", double(n)}, {"p", double(p)}, {"q", double(q)}, {"c", c}, {"lower", lower},
               {"upper", upper}, {"min_smin", worst_min}, {"max_smax", worst_max}};
  return r;
}

CheckReport check_chisq_extremes(Index n, double gamma, int trials, RngStream& rng, double c) {
  if (!(gamma > 0.0 && gamma <= 1.0) || n < 2 || trials < 1) {
    throw ParameterOutOfRange("chi-square extremes: need gamma in (0, 1], n >= 2, trials >= 1");
  }
  const Index q = std::max<Index>(1, static_cast<Index>(std::llround(gamma * static_cast<double>(n))));
  const double envelope =
      (6.0 * c / 4.0) * std::sqrt(std::log(static_cast<double>(q)) / static_cast<double>(n));
  const double df = static_cast<double>(n);

  int passes = 0;
  double max_dev_hi = 0.0, max_dev_lo = 0.0;
  for (int t = 0; t < trials; ++t) {
    double hi = -std::numeric_limits<double>::infinity(), lo = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < q; ++i) {
      const double s = chi_square(df, rng) / df;
      hi = std::max(hi, s);
      lo = std::min(lo, s);
    }
    max_dev_hi = std::max(max_dev_hi, hi - 1.0);
    max_dev_lo = std::max(max_dev_lo, 1.0 - lo);
    if (std::abs(hi - 1.0) <= envelope && std::abs(lo - 1.0) <= envelope) ++passes;
  }
  CheckReport r;
  r.check_name = "chisq_extremes";
  r.trials = trials;
  r.pass_fraction = static_cast<double>(passes) / trials;
  r.nominal_bound = envelope;
  r.required_fraction = 0.9;
  r.asserted = n >= 1000;
  r.details = {{"n", double(n)}, {"q", double(q)}, {"envelope", envelope},
               {"max_upper_deviation", max_dev_hi}, {"max_lower_deviation", max_dev_lo}};
  return r;
}

CheckReport check_bai_yin(Index n, double gamma, int trials, RngStream& rng) {
  if (!(gamma > 0.0 && gamma < 1.0) || trials < 1) {
    throw ParameterOutOfRange("Bai-Yin check: need gamma in (0, 1) and trials >= 1");
  }
  const Index q = static_cast<Index>(std::floor(gamma * static_cast<double>(n)));
  if (q < 1) throw ParameterOutOfRange("Bai-Yin check: floor(gamma n) must be >= 1");
  const double limit = gamma + 2.0 * std::sqrt(gamma);
  const double nd = static_cast<double>(n);

  std::vector<double> deviations;
  int passes = 0;
  for (int t = 0; t < trials; ++t) {
    const Matrix y = std_normal_matrix(n, q, rng);
    Matrix s = y.transpose() * y / (nd - 1.0);  // nS/(n−1) with S = YᵀY/n
    s.diagonal().array() -= 1.0;
    const double dev = std::abs(spectral_norm(symmetrize(s)) - limit);
    deviations.push_back(dev);
    if (dev <= 0.1) ++passes;
  }
  CheckReport r;
  r.check_name = "bai_yin";
  r.trials = trials;
  r.pass_fraction = static_cast<double>(passes) / trials;
  r.nominal_bound = 0.1;
  r.required_fraction = 0.9;
  r.asserted = n >= 2000;
  r.details = {{"n", nd}, {"q", double(q)}, {"limit", limit}, {"mean_deviation", mean(deviations)},
               {"max_deviation", *std::max_element(deviations.begin(), deviations.end())}};
  return r;
}

CheckReport check_posterior_mean_formula(Index n, Index q, const Prior& prior, RngStream& rng, int iterations,
                                         int burn_in) {
  if (prior_nu(prior) != 1.0) throw PreconditionError("posterior mean formula check needs nu = 1");
  if (prior_q(prior) != q) throw DimensionMismatch("posterior mean formula check: prior dimension differs from q");
  const Dataset data = generate_iid_data(n, PDMatrix::identity(q), ErrorDist::Gaussian, rng);
  const SufficientStats stats = compute_stats(data, 0.0);
  ChainConfig cfg;
  cfg.iterations = iterations;
  cfg.burn_in = burn_in;
  cfg.thin = 1;
  cfg.seed = rng();
  cfg.stream_id = rng();
  const PosteriorSamples samples = run_chain(stats, prior, cfg);

  const double denom = static_cast<double>(n) - 1.0;
  const double c_nu = std::holds_alternative<DsiwPrior>(prior) ? std::get<DsiwPrior>(prior).c_nu : 1.0;
  int entries = 0, passes = 0;
  double worst_z = 0.0;
  for (Index i = 0; i < q; ++i) {
    for (Index j = i; j < q; ++j) {
      std::vector<double> diff;
      diff.reserve(samples.size());
      for (std::size_t k = 0; k < samples.size(); ++k) {
        double mix = samples.matrix_f ? samples.delta_bar[k](i, j) : (i == j ? c_nu * samples.delta[k](i) : 0.0);
        diff.push_back(samples.sigma[k](i, j) - (stats.S_Y(i, j) + mix) / denom);
      }
      const double se = batch_means_se(diff);
      const double z = se > 0.0 ? std::abs(mean(diff)) / se : 0.0;
      worst_z = std::max(worst_z, z);
      ++entries;
      if (z <= 4.0) ++passes;
    }
  }
  CheckReport r;
  r.check_name = "posterior_mean_formula_" + prior_name(prior);
  r.trials = entries;
  r.pass_fraction = static_cast<double>(passes) / entries;
  r.nominal_bound = 4.0;
  r.required_fraction = 1.0;
  r.details = {{"n", double(n)}, {"q", double(q)}, {"kept", double(samples.size())}, {"max_abs_z", worst_z}};
  return r;
}

CheckReport check_identities(RngStream& rng, int instances, Index max_dim) {
  if (instances < 1 || max_dim < 2) throw ParameterOutOfRange("identities: need instances >= 1, max_dim >= 2");
  const auto pick = [&rng](Index lo, Index hi) {
    return lo + static_cast<Index>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
  };
  int passes = 0;
  for (int t = 0; t < instances; ++t) {
    const Index q = pick(2, max_dim);
    const PDMatrix s(random_pd(q, rng));
    std::vector<double> rest;
    for (Index i = 1; i < q; ++i) rest.push_back(uniform(0.01, 5.0, rng));
    if (schur_det_identity_check(s, uniform(0.01, 5.0, rng), rest)) ++passes;
  }
  for (int t = 0; t < instances; ++t) {
    const Index p = pick(1, std::min<Index>(5, max_dim));
    const Index q = pick(2, std::min<Index>(6, max_dim));
    const Index n = pick(p + q + 2, 60);
    Dataset d{std_normal_matrix(n, q, rng), std_normal_matrix(n, p, rng)};
    const double lambda = std::exp(uniform(std::log(1e-3), std::log(1e3), rng));
    if (woodbury_check(compute_stats(d, lambda))) ++passes;
  }
  CheckReport r;
  r.check_name = "identities";
  r.trials = 2 * instances;
  r.pass_fraction = static_cast<double>(passes) / r.trials;
  r.nominal_bound = 1.0;
  r.required_fraction = 1.0;
  r.details = {{"schur_instances", double(instances)}, {"woodbury_instances", double(instances)},
               {"max_dim", double(max_dim)}};
  return r;
}

CheckReport check_least_squares_rate(const std::vector<Index>& n_grid, Index p, Index q, int trials,
                                     RngStream& rng) {
  CheckReport r;
  r.check_name = "least_squares_rate";
  r.asserted = false;
  r.trials = 0;
  for (Index n : n_grid) {
    std::vector<double> ls, ridge;
    for (int t = 0; t < trials; ++t) {
      auto [data, truth] = generate_regression_data(n, p, q, 1.0, PDMatrix::identity(q), rng);
      const SufficientStats s = compute_stats(data, 1.0);
      const double scale = std::pow(static_cast<double>(n) / static_cast<double>(q), 0.25);
      ls.push_back(spectral_norm(*s.B_ls - *truth.B0) * scale);
      ridge.push_back(spectral_norm(s.B_tilde - *truth.B0) * scale);
      ++r.trials;
    }
    r.details.emplace_back("ls_scaled_error_n" + std::to_string(n), mean(ls));
    r.details.emplace_back("ridge_scaled_error_n" + std::to_string(n), mean(ridge));
  }
  r.pass_fraction = 1.0;
  return r;
}

std::vector<CheckReport> run_verify_suite(const VerifySuiteOptions& opts) {
  std::vector<CheckReport> out;
  const auto stream = [&](std::uint64_t tag) { return RngStream(opts.seed, derive_stream_id(opts.seed, {tag})); };
  const int sv_trials = opts.quick ? 40 : 200;
  {
    auto rng = stream(1);
    out.push_back(check_identities(rng, opts.quick ? 100 : 500));
  }
  {
    auto rng = stream(2);
    out.push_back(check_gaussian_singular_values(2000, 40, sv_trials, rng, opts.c));
  }
  {
    auto rng = stream(3);
    out.push_back(check_subgaussian_singular_values(2000, 10, 40, sv_trials, rng, opts.c));
  }
  {
    auto rng = stream(4);
    out.push_back(check_subgaussian_singular_values(2000, 10, 40, sv_trials, rng, opts.c,
                                                    SubGaussianRows::Rademacher, true));
  }
  {
    auto rng = stream(5);
    out.push_back(check_chisq_extremes(5000, 0.5, opts.quick ? 10 : 50, rng, opts.c));
  }
  {
    auto rng = stream(6);
    out.push_back(check_bai_yin(opts.quick ? 2000 : 4000, 0.1, opts.quick ? 4 : 20, rng));
  }
  {
    auto rng = stream(7);
    PresetOverrides o;
    o.nu = 1.0;
    out.push_back(check_posterior_mean_formula(200, 5, preset(PresetName::IgDsiw, 5, o), rng,
                                               opts.quick ? 6000 : 20000, 1000));
  }
  {
    auto rng = stream(8);
    out.push_back(check_posterior_mean_formula(200, 5, preset(PresetName::MatrixF, 5), rng,
                                               opts.quick ? 6000 : 20000, 1000));
  }
  {
    auto rng = stream(9);
    out.push_back(check_least_squares_rate({100, 400, 1600}, 3, 4, opts.quick ? 5 : 20, rng));
  }
  return out;
}

}  // namespace covpost
