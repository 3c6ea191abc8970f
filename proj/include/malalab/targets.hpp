#pragma once

#include <memory>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "malalab/rng.hpp"

namespace malalab {

// Curvature summary of a potential f: L bounds the Hessian operator norm,
// upsilon bounds its trace (upsilon <= L * dim always), psi is the target's
// isoperimetric coefficient when known.
struct SmoothnessProfile {
  double L = 0.0;
  double upsilon = 0.0;
  std::optional<double> psi;
};

// An unnormalized log-concave-ish density exp(-f). Hessians are exposed only
// through matrix-vector products.
class Target {
 public:
  virtual ~Target() = default;

  virtual Eigen::Index dim() const = 0;
  virtual double potential(const Eigen::VectorXd& q) const = 0;
  virtual Eigen::VectorXd gradient(const Eigen::VectorXd& q) const = 0;
  virtual Eigen::VectorXd hessian_vp(const Eigen::VectorXd& q,
                                     const Eigen::VectorXd& v) const = 0;
  virtual const SmoothnessProfile& profile() const = 0;
  virtual const std::string& name() const = 0;

  virtual bool has_exact_sampler() const { return false; }
  // Draws one point from the normalized density; throws precondition_error
  // when has_exact_sampler() is false.
  virtual Eigen::VectorXd sample(RngStream& rng) const;

  // Per-coordinate marginal law, available for product-form targets; used by
  // the marginal total-variation estimator.
  virtual bool has_marginal_law() const { return false; }
  virtual double marginal_cdf(Eigen::Index coord, double x) const;
  virtual double marginal_stddev(Eigen::Index coord) const;
};

using TargetPtr = std::shared_ptr<const Target>;

// f(q) = sum_i eig_i q_i^2 / 2. Profile is exact: L = max eig,
// upsilon = sum eig, psi = sqrt(min eig). Exact sampler: q_i ~ N(0, 1/eig_i).
TargetPtr make_quadratic(const Eigen::VectorXd& eigenvalues, std::string name = "");

// Isotropic Gaussian N(0, sigma^2 I): quadratic with eig_i = 1/sigma^2.
TargetPtr make_isotropic_gaussian(Eigen::Index dim, double sigma, std::string name = "");

// f(q) = |q|^2/2 + a * sum_i cos(q_i), |a| < 1. L = 1+|a|,
// upsilon = dim*(1+|a|), psi unknown, no exact sampler.
TargetPtr make_cosine_perturbed(Eigen::Index dim, double a, std::string name = "");

struct ProfileCheck {
  bool pass = false;
  // bound minus estimate; negative means the estimate exceeded the bound
  double worst_eig_margin = 0.0;
  double worst_trace_margin = 0.0;
  double trace_stderr = 0.0;  // nonzero only on the randomized trace path
  std::string trace_estimator;
  int n_probes = 0;
};

// Empirically checks profile().L and profile().upsilon against the Hessian
// at n_probes random points: power iteration for the top eigenvalue, exact
// basis trace for dim <= 64 and a Rademacher-probe estimator (>= 256 probes)
// above that. Tolerance 1e-6 plus, on the randomized path, 3 standard errors.
// Throws precondition_error naming the probe point on violation.
ProfileCheck validate_profile(const Target& target, int n_probes, std::uint64_t seed);

}
