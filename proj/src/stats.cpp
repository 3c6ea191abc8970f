#include "malalab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "malalab/errors.hpp"

namespace malalab {

namespace {

double pairwise_sum_impl(const double* xs, std::size_t n) {
  if (n <= 128) {
    double s = 0.0, c = 0.0;  // Neumaier at the leaves: compensates even when
    for (std::size_t i = 0; i < n; ++i) {  // the addend dominates the sum
      const double x = xs[i];
      const double t = s + x;
      if (std::abs(s) >= std::abs(x))
        c += (s - t) + x;
      else
        c += (x - t) + s;
      s = t;
    }
    return s + c;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_impl(xs, half) + pairwise_sum_impl(xs + half, n - half);
}

}

double pairwise_sum(std::span<const double> xs) {
  return pairwise_sum_impl(xs.data(), xs.size());
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw precondition_error("mean of empty sample");
  return pairwise_sum(xs) / double(xs.size());
}

double log_sum_exp(std::span<const double> ls) {
  double m = -std::numeric_limits<double>::infinity();
  for (double l : ls) m = std::max(m, l);
  if (!std::isfinite(m)) return m;  // empty or all -inf
  double s = 0.0, c = 0.0;
  for (double l : ls) {
    const double y = std::exp(l - m) - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return m + std::log(s);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double gaussian_tv_equal_var(double m1, double m2, double sigma) {
  if (sigma <= 0.0) throw precondition_error("gaussian_tv_equal_var: sigma must be positive");
  return 2.0 * normal_cdf(std::abs(m1 - m2) / (2.0 * sigma)) - 1.0;
}

PowerMeanEstimate power_mean_bootstrap(std::span<const double> log_powers, int ell,
                                       int resamples, double ci_level, RngStream& rng) {
  const std::size_t n = log_powers.size();
  if (n == 0) throw precondition_error("power_mean_bootstrap: empty sample");
  if (ell < 1) throw precondition_error("power_mean_bootstrap: ell must be >= 1");
  if (resamples < 2) throw precondition_error("power_mean_bootstrap: need >= 2 resamples");
  if (!(ci_level > 0.0 && ci_level < 1.0))
    throw precondition_error("power_mean_bootstrap: ci_level in (0,1)");

  double m = -std::numeric_limits<double>::infinity();
  for (double l : log_powers) m = std::max(m, l);

  const double log_n = std::log(double(n));
  PowerMeanEstimate out;
  out.resamples = resamples;
  out.ci_level = ci_level;

  if (!std::isfinite(m)) {  // every x_i == 0
    out.estimate = out.ci_lo = out.ci_hi = 0.0;
    return out;
  }

  // Shift once by the global max; the shifted weights are <= 1 so plain
  // compensated sums cannot overflow, and resampling reuses them.
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = std::exp(log_powers[i] - m);

  out.estimate = std::exp((m + std::log(pairwise_sum(w)) - log_n) / double(ell));

  std::vector<double> boot(resamples);
  for (int b = 0; b < resamples; ++b) {
    rng.set_step(std::uint64_t(b));
    double s = 0.0, c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = std::size_t(rng.next_u64() % n);
      const double y = w[j] - c;
      const double t = s + y;
      c = (t - s) - y;
      s = t;
    }
    boot[b] = (s > 0.0) ? std::exp((m + std::log(s) - log_n) / double(ell)) : 0.0;
  }
  std::sort(boot.begin(), boot.end());
  const double alpha = (1.0 - ci_level) / 2.0;
  const auto rank = [&](double q) {
    const double r = q * double(resamples - 1);
    return std::size_t(std::clamp(r, 0.0, double(resamples - 1)));
  };
  out.ci_lo = boot[rank(alpha)];
  out.ci_hi = boot[std::min<std::size_t>(resamples - 1, rank(1.0 - alpha) + 1)];
  return out;
}

BatchStats batch_mean_stderr(std::span<const double> xs, int n_batches) {
  const std::size_t n = xs.size();
  if (n_batches < 2 || n < std::size_t(n_batches))
    throw precondition_error("batch_mean_stderr: need >= 2 batches and n >= batches");
  const std::size_t bsz = n / std::size_t(n_batches);
  std::vector<double> bm(n_batches);
  for (int b = 0; b < n_batches; ++b)
    bm[b] = mean(xs.subspan(std::size_t(b) * bsz, bsz));
  BatchStats st;
  st.batches = n_batches;
  st.mean = mean(bm);
  double ss = 0.0;
  for (double v : bm) ss += (v - st.mean) * (v - st.mean);
  st.stderr_mean = std::sqrt(ss / double(n_batches - 1) / double(n_batches));
  return st;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 3) throw precondition_error("fit_line: need n >= 3 matched points");
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw precondition_error("fit_line: degenerate x values");
  LineFit f;
  f.n = int(n);
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ssr += r * r;
  }
  const double sigma2 = ssr / double(n - 2);
  f.slope_stderr = std::sqrt(sigma2 / sxx);
  // two-sided 97.5% Student-t quantiles for small residual dof
  static constexpr double kT975[] = {0.0,   12.706, 4.303, 3.182, 2.776, 2.571,
                                     2.447, 2.365,  2.306, 2.262, 2.228};
  const std::size_t dof = n - 2;
  const double t = dof < std::size(kT975) ? kT975[dof] : 1.984;
  f.slope_ci_lo = f.slope - t * f.slope_stderr;
  f.slope_ci_hi = f.slope + t * f.slope_stderr;
  return f;
}

}
