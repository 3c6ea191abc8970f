#include <doctest.h>

#include <cmath>
#include <vector>

#include "malalab/errors.hpp"
#include "malalab/rng.hpp"
#include "malalab/stats.hpp"
#include "malalab/targets.hpp"

using namespace malalab;

namespace {

std::vector<TargetPtr> catalog() {
  Eigen::VectorXd eig(4);
  eig << 1.0, 0.5, 0.25, 0.0625;
  return {
      make_quadratic(eig),
      make_isotropic_gaussian(3, 2.0),
      make_cosine_perturbed(5, 0.5),
      make_cosine_perturbed(2, -0.9),
  };
}

// central differences
void check_gradient_fd(const Target& t, const Eigen::VectorXd& q) {
  const Eigen::VectorXd g = t.gradient(q);
  const double h = 1e-5;
  for (Eigen::Index i = 0; i < t.dim(); ++i) {
    Eigen::VectorXd qp = q, qm = q;
    qp[i] += h;
    qm[i] -= h;
    const double fd = (t.potential(qp) - t.potential(qm)) / (2.0 * h);
    CHECK(g[i] == doctest::Approx(fd).epsilon(1e-5));
  }
}

void check_hvp_fd(const Target& t, const Eigen::VectorXd& q, const Eigen::VectorXd& v) {
  const Eigen::VectorXd hv = t.hessian_vp(q, v);
  const double h = 1e-5;
  const Eigen::VectorXd fd = (t.gradient(q + h * v) - t.gradient(q - h * v)) / (2.0 * h);
  for (Eigen::Index i = 0; i < t.dim(); ++i)
    CHECK(hv[i] == doctest::Approx(fd[i]).epsilon(1e-4).scale(1.0));
}

}

TEST_CASE("gradients and hessian products match finite differences") {
  RngStream rng(17, stream_area::kProbes);
  for (const TargetPtr& t : catalog()) {
    for (int rep = 0; rep < 8; ++rep) {
      rng.set_step(std::uint64_t(rep));
      const Eigen::VectorXd q = 2.0 * rng.normal_vector(t->dim());
      const Eigen::VectorXd v = rng.normal_vector(t->dim());
      const Eigen::VectorXd w = rng.normal_vector(t->dim());
      check_gradient_fd(*t, q);
      check_hvp_fd(*t, q, v);
      // symmetry of the quadratic form
      CHECK(v.dot(t->hessian_vp(q, w)) ==
            doctest::Approx(w.dot(t->hessian_vp(q, v))).epsilon(1e-10));
      // linearity
      const Eigen::VectorXd lhs = t->hessian_vp(q, v + 2.0 * w);
      const Eigen::VectorXd rhs = t->hessian_vp(q, v) + 2.0 * t->hessian_vp(q, w);
      CHECK((lhs - rhs).norm() < 1e-10 * (1.0 + rhs.norm()));
    }
  }
}

TEST_CASE("quadratic profile is exact") {
  Eigen::VectorXd eig(4);
  eig << 1.0, 0.5, 0.25, 0.0625;
  const TargetPtr t = make_quadratic(eig);
  CHECK(t->dim() == 4);
  CHECK(t->profile().L == 1.0);
  CHECK(t->profile().upsilon == doctest::Approx(1.8125).epsilon(1e-15));
  REQUIRE(t->profile().psi.has_value());
  CHECK(*t->profile().psi == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(t->name() == "quadratic_d4_L1");

  // potential and gradient closed forms
  Eigen::VectorXd q(4);
  q << 1.0, -2.0, 3.0, 4.0;
  CHECK(t->potential(q) == doctest::Approx(0.5 * (1.0 + 0.5 * 4.0 + 0.25 * 9.0 + 0.0625 * 16.0)));
  CHECK(t->gradient(q)[1] == doctest::Approx(-1.0));
}

TEST_CASE("isotropic gaussian is the sigma^-2 quadratic") {
  const TargetPtr t = make_isotropic_gaussian(3, 2.0);
  CHECK(t->profile().L == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(t->profile().upsilon == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(t->name() == "gauss_d3_s2");
  CHECK(t->marginal_stddev(0) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("cosine perturbation profile") {
  const TargetPtr t = make_cosine_perturbed(5, 0.5);
  CHECK(t->profile().L == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(t->profile().upsilon == doctest::Approx(7.5).epsilon(1e-15));
  CHECK_FALSE(t->profile().psi.has_value());
  CHECK(t->name() == "cosine_d5_a0.5");
  CHECK_FALSE(t->has_exact_sampler());
  CHECK_FALSE(t->has_marginal_law());
  RngStream rng(1, 0);
  CHECK_THROWS_AS((void)t->sample(rng), precondition_error);
  CHECK_THROWS_AS((void)t->marginal_cdf(0, 0.0), precondition_error);

  // upsilon <= L * dim for every catalog entry
  for (const TargetPtr& c : catalog())
    CHECK(c->profile().upsilon <= c->profile().L * double(c->dim()) + 1e-12);
}

TEST_CASE("exact sampler matches the marginal law") {
  Eigen::VectorXd eig(3);
  eig << 1.0, 0.25, 4.0;
  const TargetPtr t = make_quadratic(eig);
  REQUIRE(t->has_exact_sampler());
  REQUIRE(t->has_marginal_law());

  const int n = 100000;
  RngStream rng(99, stream_area::kEstimators);
  Eigen::MatrixXd qs(n, 3);
  for (int i = 0; i < n; ++i) {
    rng.set_step(std::uint64_t(i));
    qs.row(i) = t->sample(rng).transpose();
  }
  for (Eigen::Index j = 0; j < 3; ++j) {
    const double var_want = 1.0 / eig[j];
    const double mu = qs.col(j).mean();
    const double var = (qs.col(j).array() - mu).square().sum() / (n - 1);
    // var(sample variance) ~ 2 var^2 / n
    const double se = var_want * std::sqrt(2.0 / double(n));
    CHECK(std::abs(mu) < 5.0 * std::sqrt(var_want / n));
    CHECK(std::abs(var - var_want) < 5.0 * se);
    CHECK(t->marginal_stddev(j) == doctest::Approx(std::sqrt(var_want)).epsilon(1e-14));

    // empirical CDF against marginal_cdf at a few fixed points
    for (double x : {-1.0, 0.0, 0.7}) {
      const double want = t->marginal_cdf(j, x);
      const double emp = double((qs.col(j).array() <= x).count()) / n;
      CHECK(std::abs(emp - want) < 0.01);  // binomial se ~ 0.0016
    }
  }
}

TEST_CASE("marginal_cdf frozen values") {
  const TargetPtr t = make_isotropic_gaussian(2, 2.0);
  CHECK(t->marginal_cdf(0, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(t->marginal_cdf(1, 2.0) == doctest::Approx(0.84134474606854293).epsilon(1e-13));
  const TargetPtr q = make_quadratic(Eigen::VectorXd::Constant(1, 4.0));
  // stddev 1/2: P(X <= 1) = Phi(2)
  CHECK(q->marginal_cdf(0, 1.0) == doctest::Approx(0.97724986805182079).epsilon(1e-13));
}

TEST_CASE("factory preconditions") {
  Eigen::VectorXd eig(3);
  eig << 1.0, -0.5, 0.25;
  CHECK_THROWS_WITH_AS(make_quadratic(eig), doctest::Contains("index 1"), precondition_error);
  eig << 1.0, 0.5, 0.0;
  CHECK_THROWS_AS(make_quadratic(eig), precondition_error);
  CHECK_THROWS_AS(make_quadratic(Eigen::VectorXd()), precondition_error);
  CHECK_THROWS_AS(make_isotropic_gaussian(0, 1.0), precondition_error);
  CHECK_THROWS_AS(make_isotropic_gaussian(2, 0.0), precondition_error);
  CHECK_THROWS_AS(make_cosine_perturbed(2, 1.0), precondition_error);
  CHECK_THROWS_AS(make_cosine_perturbed(2, -1.3), precondition_error);
  CHECK_THROWS_AS(make_cosine_perturbed(0, 0.5), precondition_error);
}

TEST_CASE("validate_profile accepts the catalog") {
  for (const TargetPtr& t : catalog()) {
    const ProfileCheck pc = validate_profile(*t, 32, 2024);
    CHECK(pc.pass);
    CHECK(pc.worst_eig_margin >= -1e-6);
    CHECK(pc.n_probes == 32);
    CHECK(pc.trace_estimator == "basis");  // all catalog dims <= 64
  }
}

TEST_CASE("validate_profile catches a lying profile") {
  // quadratic claiming half its true curvature
  struct Liar : Target {
    TargetPtr inner = make_isotropic_gaussian(2, 1.0);
    SmoothnessProfile lie{0.5, 1.0, 1.0};
    Eigen::Index dim() const override { return inner->dim(); }
    double potential(const Eigen::VectorXd& q) const override { return inner->potential(q); }
    Eigen::VectorXd gradient(const Eigen::VectorXd& q) const override {
      return inner->gradient(q);
    }
    Eigen::VectorXd hessian_vp(const Eigen::VectorXd& q, const Eigen::VectorXd& v) const override {
      return inner->hessian_vp(q, v);
    }
    const SmoothnessProfile& profile() const override { return lie; }
    const std::string& name() const override { return inner->name(); }
  } liar;
  CHECK_THROWS_AS((void)validate_profile(liar, 32, 1), precondition_error);
}

TEST_CASE("validate_profile randomized trace path on a big target") {
  const TargetPtr t = make_isotropic_gaussian(128, 1.0);
  const ProfileCheck pc = validate_profile(*t, 32, 7);
  CHECK(pc.pass);
  CHECK(pc.trace_estimator == "rademacher");
}

TEST_CASE("validate_profile rejects too few probes") {
  const TargetPtr t = make_isotropic_gaussian(2, 1.0);
  CHECK_THROWS_AS((void)validate_profile(*t, 8, 1), precondition_error);
}
