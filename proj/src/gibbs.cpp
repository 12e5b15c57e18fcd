#include "covpost/gibbs.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "covpost/io.hpp"
#include "covpost/randmat.hpp"

namespace covpost {

int ChainConfig::kept() const {
  if (thin < 1 || iterations < 1 || burn_in < 0 || burn_in >= iterations) return 0;
  return (iterations - burn_in) / thin;
}

void ChainConfig::validate() const {
  if (iterations < 1 || burn_in < 0 || burn_in >= iterations || thin < 1 || kept() < 1) {
    throw ParameterOutOfRange("chain config needs iterations > burn_in >= 0, thin >= 1 and at least one kept draw");
  }
}

double delta_conditional_log_density(const MixingDensity& mixing, double nu, double c_nu, Index q,
                                     double precision_ii, double delta) {
  if (!(delta > 0.0)) return -std::numeric_limits<double>::infinity();
  return -0.5 * c_nu * precision_ii * delta + 0.5 * (nu + static_cast<double>(q) - 1.0) * std::log(delta) +
         log_mixing_density(mixing, delta);
}

double sample_delta_gamma(const GammaMixing& mixing, double nu, double c_nu, Index q, double precision_ii,
                          RngStream& rng) {
  const double shape = mixing.shape + 0.5 * (nu + static_cast<double>(q) - 1.0);
  const double rate = 1.0 / mixing.scale + 0.5 * c_nu * precision_ii;
  return gamma(shape, 1.0 / rate, rng);
}

double sample_delta(const MixingDensity& mixing, double nu, double c_nu, Index q, double precision_ii,
                    double current, MixingUpdate mode, RngStream& rng, ChainDiagnostics& diag) {
  if (mode == MixingUpdate::Auto) {
    if (const auto* g = std::get_if<GammaMixing>(&mixing)) {
      return sample_delta_gamma(*g, nu, c_nu, q, precision_ii, rng);
    }
  }
  const auto target = [&](double d) {
    return delta_conditional_log_density(mixing, nu, c_nu, q, precision_ii, d);
  };
  // Width from the scale of the δ^k·exp(−rδ) factor, independent of `current`.
  const double k = 0.5 * (nu + static_cast<double>(q) - 1.0);
  const double r = 0.5 * c_nu * precision_ii;
  const SliceStep step = slice_sample(target, current, std::sqrt(k + 1.0) / r, rng);
  ++diag.slice_transitions;
  diag.slice_expansions += step.expansions;
  diag.slice_shrinks += step.shrinks;
  return step.value;
}

namespace {

void check_dims(const SufficientStats& stats, Index prior_q) {
  if (stats.q != prior_q) {
    throw DimensionMismatch("prior has dimension " + std::to_string(prior_q) + ", data has q = " +
                            std::to_string(stats.q));
  }
}

bool keep_iteration(const ChainConfig& cfg, int it) {
  return it > cfg.burn_in && (it - cfg.burn_in) % cfg.thin == 0;
}

Matrix initial_sigma(const SufficientStats& stats) {
  try {
    return PDMatrix(stats.S_Y.matrix() / static_cast<double>(stats.n)).matrix();
  } catch (const NotPositiveDefinite&) {
    return Matrix::Identity(stats.q, stats.q);
  }
}

// B | Σ, Y ~ MN(B̃, X_λ⁻¹, Σ), drawn as B̃ + L_λ⁻ᵀ Z L_Σᵀ with X_λ = L_λL_λᵀ.
Matrix draw_coefficients(const SufficientStats& stats, const Matrix& sigma, RngStream& rng) {
  const Matrix z = std_normal_matrix(stats.p, stats.q, rng);
  const Matrix& l_lambda = stats.X_lambda->cholesky_factor();
  const Matrix rows = l_lambda.transpose().triangularView<Eigen::Upper>().solve(z);
  return stats.B_tilde + rows * cholesky(sigma).transpose();
}

template <typename Fn>
void annotate(int it, Fn&& fn) {
  try {
    fn();
  } catch (const NotPositiveDefinite& e) {
    throw NotPositiveDefinite("iteration " + std::to_string(it) + ": " + e.what());
  } catch (const NonFiniteDensity& e) {
    throw NonFiniteDensity("iteration " + std::to_string(it) + ": " + e.what());
  }
}

}  // namespace

PosteriorSamples gibbs_dsiw(const SufficientStats& stats, const DsiwPrior& prior, const ChainConfig& cfg,
                            const GibbsOptions& opts) {
  prior.validate();
  cfg.validate();
  check_dims(stats, prior.q());
  const Index q = stats.q;
  const double df = prior.nu + static_cast<double>(q) + static_cast<double>(stats.n) - 1.0;
  const bool draw_b = cfg.sample_B && stats.p > 0;

  RngStream rng(cfg.seed, cfg.stream_id);
  Vector delta = opts.initial_delta.value_or(Vector::Ones(q));
  if (delta.size() != q) throw DimensionMismatch("initial delta must have q entries");
  Matrix sigma = initial_sigma(stats);
  Matrix precision = PDMatrix(sigma).inverse();

  PosteriorSamples out;
  out.config = cfg;
  const auto kept = static_cast<std::size_t>(cfg.kept());
  out.iteration.reserve(kept);
  out.sigma.reserve(kept);
  out.delta.reserve(kept);

  const auto sigma_step = [&] {
    Matrix scale = stats.S_Y.matrix();
    scale.diagonal() += prior.c_nu * delta;
    auto draw = inverse_wishart_with_precision(df, cholesky(scale), rng);
    sigma = std::move(draw.sigma);
    precision = std::move(draw.precision);
  };
  const auto mixing_step = [&] {
    if (!opts.update_mixing) return;
    for (Index i = 0; i < q; ++i) {
      delta(i) = sample_delta(prior.mixing[static_cast<std::size_t>(i)], prior.nu, prior.c_nu, q, precision(i, i),
                              delta(i), opts.mixing_update, rng, out.diagnostics);
    }
  };

  for (int it = 1; it <= cfg.iterations; ++it) {
    annotate(it, [&] {
      if (opts.order == SweepOrder::SigmaFirst) {
        sigma_step();
        mixing_step();
      } else {
        mixing_step();
        sigma_step();
      }
      if (keep_iteration(cfg, it)) {
        out.iteration.push_back(it);
        out.sigma.emplace_back(sigma);
        out.delta.push_back(delta);
        if (draw_b) out.B.push_back(draw_coefficients(stats, sigma, rng));
      }
    });
  }
  return out;
}

PosteriorSamples gibbs_matrixf(const SufficientStats& stats, const MatrixFPrior& prior, const ChainConfig& cfg,
                               const GibbsOptions& opts) {
  prior.validate();
  cfg.validate();
  check_dims(stats, prior.q());
  const Index q = stats.q;
  const double df_sigma = prior.nu + static_cast<double>(q) + static_cast<double>(stats.n) - 1.0;
  const double df_mix = prior.nu + prior.nu_q_star + static_cast<double>(q) - 1.0;
  if (!(df_mix > static_cast<double>(q) - 1.0)) {
    throw DegreesOfFreedomTooSmall("matrix-F conditional needs nu + nu_q_star + q - 1 > q - 1");
  }
  const bool draw_b = cfg.sample_B && stats.p > 0;
  const Matrix psi_inv = prior.Psi.inverse();

  RngStream rng(cfg.seed, cfg.stream_id);
  Matrix delta_bar = opts.initial_delta_bar.value_or(Matrix::Identity(q, q));
  if (delta_bar.rows() != q || delta_bar.cols() != q) throw DimensionMismatch("initial delta_bar must be q x q");
  Matrix sigma = initial_sigma(stats);
  Matrix precision = PDMatrix(sigma).inverse();

  PosteriorSamples out;
  out.config = cfg;
  out.matrix_f = true;
  const auto kept = static_cast<std::size_t>(cfg.kept());
  out.iteration.reserve(kept);
  out.sigma.reserve(kept);
  out.delta_bar.reserve(kept);

  const auto sigma_step = [&] {
    auto draw = inverse_wishart_with_precision(df_sigma, cholesky(stats.S_Y.matrix() + delta_bar), rng);
    sigma = std::move(draw.sigma);
    precision = std::move(draw.precision);
  };
  // Δ̄ | Σ ~ W(df_mix, (Σ⁻¹ + Ψ⁻¹)⁻¹): with Σ⁻¹ + Ψ⁻¹ = LLᵀ the scale factor is L⁻ᵀ.
  const auto mixing_step = [&] {
    if (!opts.update_mixing) return;
    const Matrix l = cholesky(precision + psi_inv);
    const Matrix fa = l.transpose().triangularView<Eigen::Upper>().solve(bartlett_factor(df_mix, q, rng));
    delta_bar = fa * fa.transpose();
  };

  for (int it = 1; it <= cfg.iterations; ++it) {
    annotate(it, [&] {
      if (opts.order == SweepOrder::SigmaFirst) {
        sigma_step();
        mixing_step();
      } else {
        mixing_step();
        sigma_step();
      }
      if (keep_iteration(cfg, it)) {
        out.iteration.push_back(it);
        out.sigma.emplace_back(sigma);
        out.delta_bar.push_back(delta_bar);
        if (draw_b) out.B.push_back(draw_coefficients(stats, sigma, rng));
      }
    });
  }
  return out;
}

PosteriorSamples run_chain(const SufficientStats& stats, const Prior& prior, const ChainConfig& cfg,
                           const GibbsOptions& opts) {
  return std::visit(
      [&](const auto& p) -> PosteriorSamples {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, DsiwPrior>) return gibbs_dsiw(stats, p, cfg, opts);
        else return gibbs_matrixf(stats, p, cfg, opts);
      },
      prior);
}

PDMatrix posterior_mean_sigma(const PosteriorSamples& samples, const SufficientStats& stats, const Prior& prior,
                              bool rao_blackwell) {
  if (samples.size() == 0) throw EmptyChain("posterior_mean_sigma: chain has no kept draws");
  const Index q = stats.q;
  const double count = static_cast<double>(samples.size());
  if (!rao_blackwell) {
    Matrix acc = Matrix::Zero(q, q);
    for (const auto& s : samples.sigma) acc += s.matrix();
    return PDMatrix(acc / count);
  }
  const double denom = static_cast<double>(stats.n) + prior_nu(prior) - 2.0;
  Matrix acc = stats.S_Y.matrix();
  if (const auto* dsiw = std::get_if<DsiwPrior>(&prior)) {
    if (samples.delta.size() != samples.size()) throw EmptyChain("posterior_mean_sigma: chain has no delta draws");
    Vector mean_delta = Vector::Zero(q);
    for (const auto& d : samples.delta) mean_delta += d;
    acc.diagonal() += dsiw->c_nu * mean_delta / count;
  } else {
    if (samples.delta_bar.size() != samples.size()) {
      throw EmptyChain("posterior_mean_sigma: chain has no delta_bar draws");
    }
    Matrix mean_bar = Matrix::Zero(q, q);
    for (const auto& d : samples.delta_bar) mean_bar += d;
    acc += mean_bar / count;
  }
  return PDMatrix(acc / denom);
}

double tail_probability(const PosteriorSamples& samples, const PDMatrix& sigma0, double threshold) {
  if (samples.size() == 0) throw EmptyChain("tail_probability: chain has no kept draws");
  std::size_t hits = 0;
  for (const auto& s : samples.sigma) {
    if (s.dim() != sigma0.dim()) throw DimensionMismatch("tail_probability: Sigma0 dimension differs from draws");
    if (spectral_norm(s.matrix() - sigma0.matrix()) > threshold) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

void write_chain_dump(std::ostream& out, const PosteriorSamples& samples) {
  if (samples.size() == 0) throw EmptyChain("write_chain_dump: chain has no kept draws");
  const Index q = samples.sigma.front().dim();
  out << "iter";
  for (Index i = 0; i < q; ++i)
    for (Index j = i; j < q; ++j) out << ",s_" << i + 1 << '_' << j + 1;
  if (samples.matrix_f) {
    for (Index i = 0; i < q; ++i)
      for (Index j = i; j < q; ++j) out << ",dbar_" << i + 1 << '_' << j + 1;
  } else {
    for (Index i = 0; i < q; ++i) out << ",d_" << i + 1;
  }
  out << '\n';
  for (std::size_t k = 0; k < samples.size(); ++k) {
    out << samples.iteration[k];
    const Matrix& s = samples.sigma[k].matrix();
    for (Index i = 0; i < q; ++i)
      for (Index j = i; j < q; ++j) out << ',' << format_double(s(i, j));
    if (samples.matrix_f) {
      const Matrix& d = samples.delta_bar[k];
      for (Index i = 0; i < q; ++i)
        for (Index j = i; j < q; ++j) out << ',' << format_double(d(i, j));
    } else {
      for (Index i = 0; i < q; ++i) out << ',' << format_double(samples.delta[k](i));
    }
    out << '\n';
  }
}

}  // namespace covpost
