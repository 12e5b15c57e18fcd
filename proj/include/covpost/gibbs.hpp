#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "covpost/linalg.hpp"
#include "covpost/model.hpp"
#include "covpost/priors.hpp"
#include "covpost/rng.hpp"

namespace covpost {

struct ChainConfig {
  int iterations = 10000;
  int burn_in = 5000;
  int thin = 5;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  bool sample_B = false;

  /// floor((iterations − burn_in)/thin)
  int kept() const;
  /// Throws ParameterOutOfRange unless kept() >= 1.
  void validate() const;
};

enum class SweepOrder { SigmaFirst, MixingFirst };

/// How the δ_i conditionals are drawn. Auto uses the closed-form Gamma update
/// for Gamma mixing densities and slice sampling for everything else.
enum class MixingUpdate { Auto, Slice };

struct GibbsOptions {
  /// false freezes Δ (or Δ̄) at its initial value, turning the chain into
  /// i.i.d. draws from Σ | Y, Δ.
  bool update_mixing = true;
  SweepOrder order = SweepOrder::SigmaFirst;
  MixingUpdate mixing_update = MixingUpdate::Auto;
  std::optional<Vector> initial_delta;
  std::optional<Matrix> initial_delta_bar;
};

struct ChainDiagnostics {
  long slice_transitions = 0;
  long slice_expansions = 0;
  long slice_shrinks = 0;
};

/// Thinned post-burn-in draws. DSIW chains fill `delta`, matrix-F chains fill
/// `delta_bar`; `B` is filled only when the config asks for it and the data
/// has a design.
struct PosteriorSamples {
  std::vector<int> iteration;
  std::vector<PDMatrix> sigma;
  std::vector<Vector> delta;
  std::vector<Matrix> delta_bar;
  std::vector<Matrix> B;
  ChainConfig config;
  ChainDiagnostics diagnostics;
  bool matrix_f = false;

  std::size_t size() const { return sigma.size(); }
};

/// Log density (up to a constant) of δ_i | Σ, Y:
///   −c_ν·(Σ⁻¹)_ii·δ/2 + ((ν+q−1)/2)·log δ + log π_i(δ).
double delta_conditional_log_density(const MixingDensity& mixing, double nu, double c_nu, Index q,
                                     double precision_ii, double delta);

/// Closed-form draw for Gamma(a, θ) mixing:
///   Gamma(shape a + (ν+q−1)/2, rate 1/θ + c_ν(Σ⁻¹)_ii/2).
double sample_delta_gamma(const GammaMixing& mixing, double nu, double c_nu, Index q, double precision_ii,
                          RngStream& rng);

/// One δ_i update. Uses the closed form when allowed and available, otherwise
/// one slice-sampling transition from `current`.
double sample_delta(const MixingDensity& mixing, double nu, double c_nu, Index q, double precision_ii,
                    double current, MixingUpdate mode, RngStream& rng, ChainDiagnostics& diag);

PosteriorSamples gibbs_dsiw(const SufficientStats& stats, const DsiwPrior& prior, const ChainConfig& cfg,
                            const GibbsOptions& opts = {});

PosteriorSamples gibbs_matrixf(const SufficientStats& stats, const MatrixFPrior& prior, const ChainConfig& cfg,
                               const GibbsOptions& opts = {});

PosteriorSamples run_chain(const SufficientStats& stats, const Prior& prior, const ChainConfig& cfg,
                           const GibbsOptions& opts = {});

/// Rao-Blackwell: mean of (S_Y + c_νΔ⁽ⁱ⁾)/(n+ν−2) (or (S_Y + Δ̄⁽ⁱ⁾)/(n+ν−2));
/// otherwise the plain average of the Σ draws.
PDMatrix posterior_mean_sigma(const PosteriorSamples& samples, const SufficientStats& stats, const Prior& prior,
                              bool rao_blackwell);

/// Fraction of draws with ‖Σ⁽ⁱ⁾ − Σ0‖ > threshold (spectral norm).
double tail_probability(const PosteriorSamples& samples, const PDMatrix& sigma0, double threshold);

/// CSV: iter, upper-triangle Σ entries row by row, then δ_1..δ_q or the
/// upper triangle of Δ̄.
void write_chain_dump(std::ostream& out, const PosteriorSamples& samples);

}  // namespace covpost
