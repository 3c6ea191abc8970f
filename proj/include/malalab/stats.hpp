#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "malalab/rng.hpp"

namespace malalab {

// Pairwise (cascade) summation; error grows like O(log n) in ulps instead of
// O(n) for naive left-to-right accumulation.
double pairwise_sum(std::span<const double> xs);

double mean(std::span<const double> xs);

// log(sum(exp(ls))) tolerating -inf entries; returns -inf for an all--inf or
// empty input.
double log_sum_exp(std::span<const double> ls);

// Standard normal CDF.
double normal_cdf(double x);

// Total variation distance between N(m1, s^2) and N(m2, s^2).
double gaussian_tv_equal_var(double m1, double m2, double sigma);

struct PowerMeanEstimate {
  double estimate;  // [mean of x_i]^(1/ell)
  double ci_lo;     // percentile bootstrap interval for the same functional
  double ci_hi;
  int resamples;
  double ci_level;
};

// Input is log(x_i) for nonnegative x_i (use -inf for x_i == 0). The
// functional is exp((logmeanexp)/ell); resampling and the point estimate run
// in log space with compensated partial sums so ell up to 8 on heavy-tailed
// powers does not overflow or lose the head of the sum.
PowerMeanEstimate power_mean_bootstrap(std::span<const double> log_powers, int ell,
                                       int resamples, double ci_level, RngStream& rng);

struct BatchStats {
  double mean;
  double stderr_mean;  // batch-means standard error (autocorrelation robust)
  int batches;
};

BatchStats batch_mean_stderr(std::span<const double> xs, int n_batches);

struct LineFit {
  double slope;
  double intercept;
  double slope_stderr;
  double slope_ci_lo;  // 95% t-interval
  double slope_ci_hi;
  int n;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

}
