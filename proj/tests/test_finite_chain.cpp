#include <doctest.h>

#include <cmath>

#include "malalab/errors.hpp"
#include "malalab/finite_chain.hpp"
#include "malalab/rng.hpp"
#include "malalab/stats.hpp"

using namespace malalab;

namespace {

FiniteChain two_state(double p) {
  FiniteChain c;
  c.P.resize(2, 2);
  c.P << 1.0 - p, p, p, 1.0 - p;
  c.pi.resize(2);
  c.pi << 0.5, 0.5;
  return c;
}

// Metropolis chain with uniform proposals, then lazified; reversible for any
// positive weights
FiniteChain metropolis_chain(const Eigen::VectorXd& pi_raw) {
  const Eigen::Index k = pi_raw.size();
  const Eigen::VectorXd pi = pi_raw / pi_raw.sum();
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    double out = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (i == j) continue;
      P(i, j) = std::min(1.0, pi[j] / pi[i]) / double(k);
      out += P(i, j);
    }
    P(i, i) = 1.0 - out;
  }
  FiniteChain c;
  c.P = 0.5 * (Eigen::MatrixXd::Identity(k, k) + P);
  c.pi = pi;
  c.validate();
  return c;
}

// direct bitmask enumeration, independently of the incremental version
double conductance_brute(const FiniteChain& c, double s) {
  const int k = int(c.k());
  double best = std::numeric_limits<double>::infinity();
  bool any = false;
  for (unsigned mask = 1; mask + 1 < (1u << k); ++mask) {
    double pis = 0.0, cut = 0.0;
    for (int i = 0; i < k; ++i)
      if (mask >> i & 1) pis += c.pi[i];
    const double m = std::min(pis, 1.0 - pis);
    if (!(m > s)) continue;
    any = true;
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        if ((mask >> i & 1) && !(mask >> j & 1)) cut += c.pi[i] * c.P(i, j);
    best = std::min(best, cut / (m - s));
  }
  REQUIRE(any);
  return best;
}

}

TEST_CASE("two-state chain conductance closed form") {
  const FiniteChain c = two_state(0.3);
  c.validate();
  CHECK(s_conductance_exact(c, 0.0) == doctest::Approx(0.3).epsilon(1e-14));
  // flow = 0.15, denominator 0.5 - s
  CHECK(s_conductance_exact(c, 0.25) == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(s_conductance_exact(c, 0.4) == doctest::Approx(1.5).epsilon(1e-14));
}

TEST_CASE("two-state lovasz rows follow the spectral decay") {
  const double p = 0.3;
  const FiniteChain c = two_state(p);
  Eigen::VectorXd mu0(2);
  mu0 << 1.0, 0.0;
  const LovaszReport rep = lovasz_bound_check(c, mu0, 2.0, 0.1, 24);
  REQUIRE(rep.rows.size() == 25);
  for (std::uint64_t n = 0; n <= 24; ++n) {
    const LovaszRow& row = rep.rows[n];
    CHECK(row.n == n);
    // d_TV(mu_n, pi) = (1/2) (1-2p)^n
    CHECK(row.tv == doctest::Approx(0.5 * std::pow(1.0 - 2.0 * p, double(n))).epsilon(1e-12));
    CHECK(row.bound ==
          doctest::Approx(2.0 * 0.1 +
                          2.0 * std::pow(1.0 - rep.phi_s * rep.phi_s / 2.0, double(n)))
              .epsilon(1e-12));
    CHECK(row.slack == doctest::Approx(row.bound - row.tv).epsilon(1e-12));
  }
  CHECK(rep.pass);
  CHECK(rep.M == doctest::Approx(2.0));
  // phi_s at s=0.1: 0.15/0.4
  CHECK(rep.phi_s == doctest::Approx(0.375).epsilon(1e-14));
  CHECK(rep.min_slack > 0.0);
}

TEST_CASE("incremental conductance equals brute force on random chains") {
  RngStream rng(33, stream_area::kProbes);
  for (int rep = 0; rep < 6; ++rep) {
    rng.set_step(std::uint64_t(rep));
    const int k = 3 + int(rng.next_u32() % 6);  // 3..8
    Eigen::VectorXd w(k);
    for (int i = 0; i < k; ++i) w[i] = 0.2 + rng.uniform();
    const FiniteChain c = metropolis_chain(w);
    for (double s : {0.0, 0.03, 0.1}) {
      const double fast = s_conductance_exact(c, s);
      const double slow = conductance_brute(c, s);
      CHECK(fast == doctest::Approx(slow).epsilon(1e-12));
    }
  }
}

TEST_CASE("conductance rejects infeasible s") {
  Eigen::VectorXd w(3);
  w << 0.98, 0.01, 0.01;
  const FiniteChain c = metropolis_chain(w);
  CHECK_THROWS_AS((void)s_conductance_exact(c, 0.05), precondition_error);
  CHECK_THROWS_AS((void)s_conductance_exact(c, 0.5), precondition_error);
  CHECK_THROWS_AS((void)s_conductance_exact(c, -0.01), precondition_error);
  CHECK_NOTHROW((void)s_conductance_exact(c, 0.005));
}

TEST_CASE("validate catches broken chains") {
  FiniteChain c = two_state(0.3);
  c.P(0, 0) = 0.6;  // row sum 0.9
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("row"), precondition_error);

  FiniteChain lazyless = two_state(0.3);
  lazyless.P << 0.4, 0.6, 0.6, 0.4;
  CHECK_THROWS_WITH_AS(lazyless.validate(), doctest::Contains("lazy"), precondition_error);

  FiniteChain unbalanced = two_state(0.3);
  unbalanced.pi << 0.8, 0.2;  // pi no longer reversible for symmetric P
  CHECK_THROWS_WITH_AS(unbalanced.validate(), doctest::Contains("balance"), precondition_error);

  FiniteChain badpi = two_state(0.3);
  badpi.pi << 0.7, 0.2;
  CHECK_THROWS_AS(badpi.validate(), precondition_error);

  FiniteChain one;
  one.P = Eigen::MatrixXd::Identity(1, 1);
  one.pi = Eigen::VectorXd::Constant(1, 1.0);
  CHECK_THROWS_AS(one.validate(), precondition_error);
}

TEST_CASE("discretized gaussian matches erf bin masses") {
  const TargetPtr t = make_isotropic_gaussian(1, 1.0);
  const int k = 12;
  const double a = -5.0, b = 5.0;
  const FiniteChain c = discretize_1d(*t, a, b, k, manual_policy(0.5));
  c.validate();
  const double width = (b - a) / k;
  const double total = normal_cdf(b) - normal_cdf(a);
  for (int i = 0; i < k; ++i) {
    const double lo = a + i * width;
    const double want = (normal_cdf(lo + width) - normal_cdf(lo)) / total;
    CHECK(c.pi[i] == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("discretized chain conductance is positive and monotone in s") {
  const TargetPtr t = make_isotropic_gaussian(1, 1.0);
  const FiniteChain c = discretize_1d(*t, -5.0, 5.0, 14, manual_policy(0.4));
  double prev = 0.0;
  for (double s : {0.0, 0.01, 0.02, 0.05, 0.1, 0.2}) {
    const double phi = s_conductance_exact(c, s);
    CHECK(phi >= prev - 1e-15);
    CHECK(phi > 0.0);
    prev = phi;
  }
}

TEST_CASE("discretize_1d rejects bad grids") {
  const TargetPtr t = make_isotropic_gaussian(1, 1.0);
  CHECK_THROWS_WITH_AS((void)discretize_1d(*t, -4.0, 4.0, 10, manual_policy(0.5)),
                       doctest::Contains("covers"), precondition_error);
  CHECK_THROWS_AS((void)discretize_1d(*t, -5.0, 5.0, 1, manual_policy(0.5)),
                  precondition_error);
  CHECK_THROWS_AS((void)discretize_1d(*t, -5.0, 5.0, 21, manual_policy(0.5)),
                  precondition_error);
  CHECK_THROWS_AS((void)discretize_1d(*t, 5.0, -5.0, 10, manual_policy(0.5)),
                  precondition_error);
  const TargetPtr t2 = make_isotropic_gaussian(2, 1.0);
  CHECK_THROWS_AS((void)discretize_1d(*t2, -5.0, 5.0, 10, manual_policy(0.5)),
                  precondition_error);
}

TEST_CASE("lovasz_bound_check input validation") {
  const FiniteChain c = two_state(0.3);
  Eigen::VectorXd mu0(2);
  mu0 << 1.0, 0.0;
  // claimed M below the true warmness 2
  CHECK_THROWS_WITH_AS((void)lovasz_bound_check(c, mu0, 1.5, 0.1, 5),
                       doctest::Contains("warmness"), precondition_error);
  Eigen::VectorXd negative(2);
  negative << 1.2, -0.2;
  CHECK_THROWS_AS((void)lovasz_bound_check(c, negative, 10.0, 0.1, 5), precondition_error);
  Eigen::VectorXd not_prob(2);
  not_prob << 0.6, 0.6;
  CHECK_THROWS_AS((void)lovasz_bound_check(c, not_prob, 10.0, 0.1, 5), precondition_error);
  Eigen::VectorXd wrong_size(3);
  wrong_size << 1.0, 0.0, 0.0;
  CHECK_THROWS_AS((void)lovasz_bound_check(c, wrong_size, 10.0, 0.1, 5), precondition_error);
}

TEST_CASE("lovasz row zero is the initial distance") {
  const FiniteChain c = two_state(0.2);
  Eigen::VectorXd mu0(2);
  mu0 << 0.9, 0.1;
  const LovaszReport rep = lovasz_bound_check(c, mu0, 1.8, 0.05, 0);
  REQUIRE(rep.rows.size() == 1);
  CHECK(rep.rows[0].n == 0);
  CHECK(rep.rows[0].tv == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(rep.pass);
}

TEST_CASE("warm start exactly at the claimed M is accepted") {
  const FiniteChain c = two_state(0.3);
  Eigen::VectorXd mu0(2);
  mu0 << 1.0, 0.0;
  CHECK_NOTHROW((void)lovasz_bound_check(c, mu0, 2.0, 0.1, 3));
}
