#include "malalab/targets.hpp"

#include <cmath>
#include <sstream>

#include "malalab/errors.hpp"
#include "malalab/stats.hpp"

namespace malalab {

Eigen::VectorXd Target::sample(RngStream&) const {
  throw precondition_error("target '" + name() + "' has no exact sampler");
}

double Target::marginal_cdf(Eigen::Index, double) const {
  throw precondition_error("target '" + name() + "' has no closed-form marginal law");
}

double Target::marginal_stddev(Eigen::Index) const {
  throw precondition_error("target '" + name() + "' has no closed-form marginal law");
}

namespace {

class QuadraticTarget final : public Target {
 public:
  QuadraticTarget(Eigen::VectorXd eig, std::string name)
      : eig_(std::move(eig)), name_(std::move(name)) {
    profile_.L = eig_.maxCoeff();
    profile_.upsilon = eig_.sum();
    profile_.psi = std::sqrt(eig_.minCoeff());
    inv_sd_ = eig_.cwiseSqrt();
  }

  Eigen::Index dim() const override { return eig_.size(); }

  double potential(const Eigen::VectorXd& q) const override {
    return 0.5 * q.cwiseProduct(q).dot(eig_);
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& q) const override {
    return eig_.cwiseProduct(q);
  }

  Eigen::VectorXd hessian_vp(const Eigen::VectorXd&, const Eigen::VectorXd& v) const override {
    return eig_.cwiseProduct(v);
  }

  const SmoothnessProfile& profile() const override { return profile_; }
  const std::string& name() const override { return name_; }

  bool has_exact_sampler() const override { return true; }

  Eigen::VectorXd sample(RngStream& rng) const override {
    Eigen::VectorXd q(eig_.size());
    for (Eigen::Index i = 0; i < eig_.size(); ++i) q[i] = rng.normal() / inv_sd_[i];
    return q;
  }

  bool has_marginal_law() const override { return true; }

  double marginal_cdf(Eigen::Index coord, double x) const override {
    return normal_cdf(x * inv_sd_[coord]);
  }

  double marginal_stddev(Eigen::Index coord) const override { return 1.0 / inv_sd_[coord]; }

 private:
  Eigen::VectorXd eig_;
  Eigen::VectorXd inv_sd_;
  SmoothnessProfile profile_;
  std::string name_;
};

class CosinePerturbedTarget final : public Target {
 public:
  CosinePerturbedTarget(Eigen::Index dim, double a, std::string name)
      : dim_(dim), a_(a), name_(std::move(name)) {
    profile_.L = 1.0 + std::abs(a_);
    profile_.upsilon = double(dim_) * (1.0 + std::abs(a_));
    // psi left unset: not known in closed form for this family
  }

  Eigen::Index dim() const override { return dim_; }

  double potential(const Eigen::VectorXd& q) const override {
    return 0.5 * q.squaredNorm() + a_ * q.array().cos().sum();
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& q) const override {
    return q - a_ * q.array().sin().matrix();
  }

  Eigen::VectorXd hessian_vp(const Eigen::VectorXd& q, const Eigen::VectorXd& v) const override {
    return v - a_ * q.array().cos().cwiseProduct(v.array()).matrix();
  }

  const SmoothnessProfile& profile() const override { return profile_; }
  const std::string& name() const override { return name_; }

 private:
  Eigen::Index dim_;
  double a_;
  SmoothnessProfile profile_;
  std::string name_;
};

std::string default_quadratic_name(const Eigen::VectorXd& eig) {
  std::ostringstream os;
  os << "quadratic_d" << eig.size();
  if ((eig.array() != eig[0]).any())
    os << "_L" << eig.maxCoeff();
  else
    os << "_iso" << eig[0];
  return os.str();
}

}

TargetPtr make_quadratic(const Eigen::VectorXd& eigenvalues, std::string name) {
  if (eigenvalues.size() < 1) throw precondition_error("make_quadratic: empty eigenvalue list");
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i)
    if (!(eigenvalues[i] > 0.0))
      throw precondition_error("make_quadratic: eigenvalues must be positive, got " +
                               std::to_string(eigenvalues[i]) + " at index " + std::to_string(i));
  if (name.empty()) name = default_quadratic_name(eigenvalues);
  return std::make_shared<QuadraticTarget>(eigenvalues, std::move(name));
}

TargetPtr make_isotropic_gaussian(Eigen::Index dim, double sigma, std::string name) {
  if (dim < 1) throw precondition_error("make_isotropic_gaussian: dim must be >= 1");
  if (!(sigma > 0.0)) throw precondition_error("make_isotropic_gaussian: sigma must be positive");
  if (name.empty()) {
    std::ostringstream os;
    os << "gauss_d" << dim << "_s" << sigma;
    name = os.str();
  }
  return make_quadratic(Eigen::VectorXd::Constant(dim, 1.0 / (sigma * sigma)), std::move(name));
}

TargetPtr make_cosine_perturbed(Eigen::Index dim, double a, std::string name) {
  if (dim < 1) throw precondition_error("make_cosine_perturbed: dim must be >= 1");
  if (!(std::abs(a) < 1.0))
    throw precondition_error("make_cosine_perturbed: need |a| < 1, got " + std::to_string(a));
  if (name.empty()) {
    std::ostringstream os;
    os << "cosine_d" << dim << "_a" << a;
    name = os.str();
  }
  return std::make_shared<CosinePerturbedTarget>(dim, a, std::move(name));
}

namespace {

std::string point_to_string(const Eigen::VectorXd& q) {
  std::ostringstream os;
  os << "(";
  for (Eigen::Index i = 0; i < q.size(); ++i) os << (i ? ", " : "") << q[i];
  os << ")";
  return os.str();
}

}

ProfileCheck validate_profile(const Target& target, int n_probes, std::uint64_t seed) {
  if (n_probes < 32) throw precondition_error("validate_profile: need at least 32 probes");
  const Eigen::Index d = target.dim();
  const SmoothnessProfile& prof = target.profile();

  ProfileCheck out;
  out.n_probes = n_probes;
  out.worst_eig_margin = std::numeric_limits<double>::infinity();
  out.worst_trace_margin = std::numeric_limits<double>::infinity();
  const bool exact_trace = d <= 64;
  out.trace_estimator = exact_trace ? "basis" : "rademacher";
  constexpr double kTol = 1e-6;

  RngStream rng(seed, stream_area::kProbes);
  for (int probe = 0; probe < n_probes; ++probe) {
    rng.set_step(std::uint64_t(probe));
    const Eigen::VectorXd q = 2.0 * rng.normal_vector(d);

    // Power iteration: Rayleigh quotients of a PSD-dominant operator
    // approach the top eigenvalue from below, so the estimate cannot
    // spuriously exceed L.
    Eigen::VectorXd v = rng.normal_vector(d).normalized();
    double lam = 0.0;
    for (int it = 0; it < 300; ++it) {
      Eigen::VectorXd hv = target.hessian_vp(q, v);
      const double nrm = hv.norm();
      if (nrm == 0.0) break;
      v = hv / nrm;
      const double next = v.dot(target.hessian_vp(q, v));
      if (std::abs(next - lam) <= 1e-13 * std::max(1.0, std::abs(next))) {
        lam = next;
        break;
      }
      lam = next;
    }
    const double eig_margin = prof.L - lam;
    out.worst_eig_margin = std::min(out.worst_eig_margin, eig_margin);
    if (eig_margin < -kTol)
      throw precondition_error("validate_profile: top Hessian eigenvalue " + std::to_string(lam) +
                               " exceeds declared L=" + std::to_string(prof.L) + " at q=" +
                               point_to_string(q) + " for target '" + target.name() + "'");

    double tr, tr_se = 0.0;
    if (exact_trace) {
      tr = 0.0;
      for (Eigen::Index i = 0; i < d; ++i) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
        e[i] = 1.0;
        tr += target.hessian_vp(q, e)[i];
      }
    } else {
      const int m = 256;
      std::vector<double> est(m);
      Eigen::VectorXd z(d);
      for (int j = 0; j < m; ++j) {
        for (Eigen::Index i = 0; i < d; ++i) z[i] = rng.next_u32() & 1u ? 1.0 : -1.0;
        est[j] = z.dot(target.hessian_vp(q, z));
      }
      tr = mean(est);
      double ss = 0.0;
      for (double e : est) ss += (e - tr) * (e - tr);
      tr_se = std::sqrt(ss / double(m - 1) / double(m));
    }
    out.trace_stderr = std::max(out.trace_stderr, tr_se);
    const double trace_margin = prof.upsilon - tr;
    out.worst_trace_margin = std::min(out.worst_trace_margin, trace_margin);
    if (trace_margin < -(kTol + 3.0 * tr_se))
      throw precondition_error("validate_profile: Hessian trace " + std::to_string(tr) +
                               " exceeds declared upsilon=" + std::to_string(prof.upsilon) +
                               " at q=" + point_to_string(q) + " for target '" + target.name() +
                               "'");
  }
  out.pass = true;
  return out;
}

}
