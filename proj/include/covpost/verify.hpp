#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "covpost/priors.hpp"
#include "covpost/rng.hpp"

namespace covpost {

struct CheckReport {
  std::string check_name;
  int trials = 0;
  double pass_fraction = 0.0;
  double nominal_bound = 0.0;
  /// Whether the check asserts anything, and the pass_fraction it requires.
  bool asserted = true;
  double required_fraction = 1.0;
  std::vector<std::pair<std::string, double>> details;

  bool passed() const { return !asserted || pass_fraction >= required_fraction; }
  double detail(const std::string& key) const;
};

/// Extreme singular values of an (n+q)×q standard Gaussian A, scaled by √n,
/// inside [(1 + c√(q/n))^{-1/2}, (1 − c√(q/n))^{-1/2}]. Nominal 1 − 2e^{−q/2}.
CheckReport check_gaussian_singular_values(Index n, Index q, int trials, RngStream& rng, double c = 4.0);

enum class SubGaussianRows { Rademacher, Gaussian };

/// (n−p)×q matrix with isotropic sub-Gaussian rows, scaled by √(n−p), inside
/// [(1 − c√(q/n))^{1/2}, (1 + c√(q/n))^{1/2}]. With `project` the matrix is
/// built as the square root of ZᵀPZ, where Z is n×q and P projects out p
/// random Gaussian directions.
CheckReport check_subgaussian_singular_values(Index n, Index p, Index q, int trials, RngStream& rng,
                                              double c = 4.0, SubGaussianRows rows = SubGaussianRows::Rademacher,
                                              bool project = false);

/// q = round(γn) draws of χ²_n/n; a trial passes when both the maximum and
/// minimum lie within 6√(log q / n) of 1 (envelope scaled by c/4).
CheckReport check_chisq_extremes(Index n, double gamma, int trials, RngStream& rng, double c = 4.0);

/// |‖nS/(n−1) − I‖ − (γ + 2√γ)| for S = YᵀY/n, Y n×⌊γn⌋ Gaussian. A trial
/// passes at deviation <= 0.1; details carry the mean deviation.
CheckReport check_bai_yin(Index n, double gamma, int trials, RngStream& rng);

/// With ν = 1, compares the plain average of the Σ draws against
/// (nS + c_ν·mean Δ)/(n − 1) (or with mean Δ̄) entry by entry, using batch
/// means standard errors of the per-draw difference. pass_fraction is the
/// share of upper-triangle entries within 4 SE.
CheckReport check_posterior_mean_formula(Index n, Index q, const Prior& prior, RngStream& rng,
                                         int iterations = 20000, int burn_in = 2000);

/// Woodbury and Schur determinant identities on `instances` random inputs
/// each. Dimensions range over [2, max_dim].
CheckReport check_identities(RngStream& rng, int instances = 500, Index max_dim = 10);

/// ‖B_ls − B0‖·(n/q)^{1/4} across a grid of n (reported, not asserted).
CheckReport check_least_squares_rate(const std::vector<Index>& n_grid, Index p, Index q, int trials,
                                     RngStream& rng);

struct VerifySuiteOptions {
  std::uint64_t seed = 20240601;
  double c = 4.0;
  bool quick = false;
};

/// The default suite: identities, both singular-value checks, chi-square
/// extremes, Bai–Yin, posterior-mean formula for IG-DSIW and matrix-F.
std::vector<CheckReport> run_verify_suite(const VerifySuiteOptions& opts);

}  // namespace covpost
