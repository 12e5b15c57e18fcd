#pragma once

#include <functional>
#include <span>
#include <vector>

namespace covpost {

double mean(std::span<const double> x);
/// Sample standard deviation (n − 1 denominator); 0 for fewer than two values.
double sample_sd(std::span<const double> x);
/// sd/√n.
double standard_error(std::span<const double> x);

/// Standard error of the mean from non-overlapping batch means, for
/// autocorrelated chains.
double batch_means_se(std::span<const double> x, int batches = 25);

/// Effective sample size from the initial positive sequence of
/// autocorrelation pairs (Geyer 1992).
double effective_sample_size(std::span<const double> x);

/// Linear-interpolation quantile (type 7), p in [0, 1].
double quantile(std::vector<double> x, double p);

/// Asymptotic Kolmogorov survival function with the Stephens small-sample
/// correction applied by the callers below.
double kolmogorov_survival(double lambda);

struct KsResult {
  double statistic;
  double p_value;
};

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);
KsResult ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf);

/// Least-squares slope of y on x.
double ols_slope(std::span<const double> x, std::span<const double> y);

}  // namespace covpost
