#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "malalab/errors.hpp"
#include "malalab/kernel.hpp"
#include "malalab/stats.hpp"
#include "malalab/targets.hpp"

using namespace malalab;

namespace {

TargetPtr unit_1d() { return make_quadratic(Eigen::VectorXd::Constant(1, 1.0)); }

Eigen::VectorXd vec1(double x) { return Eigen::VectorXd::Constant(1, x); }

// gradient blows up outside |q| < 2; for exercising the numeric_error path
struct Blowup : Target {
  TargetPtr inner = make_isotropic_gaussian(1, 1.0);
  std::string name_ = "blowup";
  Eigen::Index dim() const override { return 1; }
  double potential(const Eigen::VectorXd& q) const override { return inner->potential(q); }
  Eigen::VectorXd gradient(const Eigen::VectorXd& q) const override {
    if (std::abs(q[0]) > 2.0) return vec1(std::nan(""));
    return inner->gradient(q);
  }
  Eigen::VectorXd hessian_vp(const Eigen::VectorXd& q, const Eigen::VectorXd& v) const override {
    return inner->hessian_vp(q, v);
  }
  const SmoothnessProfile& profile() const override { return inner->profile(); }
  const std::string& name() const override { return name_; }
};

}

TEST_CASE("leapfrog frozen 1d step") {
  const TargetPtr t = unit_1d();
  const PhasePoint z1 = leapfrog(*t, {vec1(1.0), vec1(0.5)}, 0.3);
  // q = 1 + 0.3*0.5 - 0.045*1, p = 0.5 - 0.15*(1 + 1.105)
  CHECK(z1.q[0] == doctest::Approx(1.105).epsilon(1e-14));
  CHECK(z1.p[0] == doctest::Approx(0.18425).epsilon(1e-14));
  CHECK(energy_difference(*t, {vec1(1.0), vec1(0.5)}, 0.3) ==
        doctest::Approx(0.00248653125).epsilon(1e-11));
}

TEST_CASE("leapfrog is the harmonic-oscillator velocity verlet map") {
  Eigen::VectorXd eig(2);
  eig << 1.0, 0.25;
  const TargetPtr t = make_quadratic(eig);
  Eigen::VectorXd q0(2), p0(2);
  q0 << 0.7, -1.3;
  p0 << -0.2, 0.9;
  const double eta = 0.4;
  const PhasePoint z1 = leapfrog(*t, {q0, p0}, eta);
  for (int j = 0; j < 2; ++j) {
    const double lam = eig[j];
    const double qw = (1.0 - lam * eta * eta / 2.0) * q0[j] + eta * p0[j];
    const double pw = (1.0 - lam * eta * eta / 2.0) * p0[j] -
                      eta * lam * (1.0 - lam * eta * eta / 4.0) * q0[j];
    CHECK(z1.q[j] == doctest::Approx(qw).epsilon(1e-14));
    CHECK(z1.p[j] == doctest::Approx(pw).epsilon(1e-14));
  }
}

TEST_CASE("leapfrog makes exactly two gradient calls") {
  struct Counting : Target {
    TargetPtr inner = make_isotropic_gaussian(2, 1.0);
    mutable int calls = 0;
    Eigen::Index dim() const override { return 2; }
    double potential(const Eigen::VectorXd& q) const override { return inner->potential(q); }
    Eigen::VectorXd gradient(const Eigen::VectorXd& q) const override {
      ++calls;
      return inner->gradient(q);
    }
    Eigen::VectorXd hessian_vp(const Eigen::VectorXd& q,
                               const Eigen::VectorXd& v) const override {
      return inner->hessian_vp(q, v);
    }
    const SmoothnessProfile& profile() const override { return inner->profile(); }
    const std::string& name() const override { return inner->name(); }
  } counting;
  RngStream rng(4, 0);
  (void)leapfrog(counting, {rng.normal_vector(2), rng.normal_vector(2)}, 0.3);
  CHECK(counting.calls == 2);
}

TEST_CASE("leapfrog reversibility") {
  const TargetPtr t = make_cosine_perturbed(3, 0.5);
  RngStream rng(8, stream_area::kProbes);
  for (int rep = 0; rep < 10; ++rep) {
    rng.set_step(std::uint64_t(rep));
    const PhasePoint z0{rng.normal_vector(3), rng.normal_vector(3)};
    const PhasePoint z1 = leapfrog(*t, z0, 0.37);
    const PhasePoint back = leapfrog(*t, {z1.q, -z1.p}, 0.37);
    CHECK((back.q - z0.q).norm() < 1e-12);
    CHECK((back.p + z0.p).norm() < 1e-12);
  }
}

TEST_CASE("energy difference equals the random-walk Metropolis-Hastings log ratio") {
  // the single-leapfrog chain is the Gaussian-proposal chain in disguise:
  //   y ~ N(x - h grad f(x), 2h I), h = eta^2/2,
  //   log ratio = f(y) - f(x) + (|x-y+h grad f(y)|^2 - |y-x+h grad f(x)|^2)/(4h)
  const TargetPtr t = make_cosine_perturbed(4, 0.7);
  RngStream rng(6, stream_area::kProbes);
  for (int rep = 0; rep < 10; ++rep) {
    rng.set_step(std::uint64_t(rep));
    const double eta = 0.1 + 0.5 * rng.uniform();
    const double h = 0.5 * eta * eta;
    const PhasePoint z0{rng.normal_vector(4), rng.normal_vector(4)};
    const PhasePoint z1 = leapfrog(*t, z0, eta);
    const Eigen::VectorXd x = z0.q, y = z1.q;
    const double mh = t->potential(y) - t->potential(x) +
                      ((x - y + h * t->gradient(y)).squaredNorm() -
                       (y - x + h * t->gradient(x)).squaredNorm()) /
                          (4.0 * h);
    const double hmc = energy_difference(*t, z0, eta);
    CHECK(hmc == doctest::Approx(mh).epsilon(1e-10));
  }
}

TEST_CASE("leapfrog preconditions and numeric errors") {
  const TargetPtr t = unit_1d();
  CHECK_THROWS_AS((void)leapfrog(*t, {vec1(0.0), vec1(0.0)}, 0.0), precondition_error);
  CHECK_THROWS_AS((void)leapfrog(*t, {vec1(0.0), vec1(0.0)}, -0.1), precondition_error);
  CHECK_THROWS_AS((void)leapfrog(*t, {Eigen::VectorXd::Zero(2), vec1(0.0)}, 0.1),
                  precondition_error);
  Blowup bad;
  CHECK_THROWS_WITH_AS((void)leapfrog(bad, {vec1(3.0), vec1(0.0)}, 0.1),
                       doctest::Contains("blowup"), numeric_error);
}

TEST_CASE("manual policy") {
  const StepSizePolicy p = manual_policy(0.3);
  CHECK(p.eta == 0.3);
  CHECK(p.h == doctest::Approx(0.045).epsilon(1e-15));
  CHECK(p.provenance == "manual");
  CHECK_FALSE(p.c0.has_value());
  CHECK_THROWS_AS((void)p.predicted_iterations(1.0), precondition_error);
  CHECK_THROWS_AS(manual_policy(0.0), precondition_error);
  CHECK_THROWS_AS(manual_policy(-1.0), precondition_error);
}

TEST_CASE("tail condition eta frozen values") {
  const SmoothnessProfile unit{1.0, 1.0, 1.0};
  CHECK(tail_condition_max_eta(unit, 0.5) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(tail_condition_max_eta(unit, 0.05) ==
        doctest::Approx(0.09501326963466711).epsilon(1e-14));
  const SmoothnessProfile p23{2.0, 3.0, {}};
  CHECK(tail_condition_max_eta(p23, 0.2) ==
        doctest::Approx(0.07847412072884824).epsilon(1e-14));

  // defining identity: eta^4 * 4096 * max{L^2 log(1/delta), L ups} = 1
  for (double delta : {0.01, 0.05, 0.3, 0.9}) {
    const double eta = tail_condition_max_eta(p23, delta);
    const double cap = std::max(4.0 * std::log(1.0 / delta), 6.0);
    CHECK(std::pow(eta, 4.0) * 4096.0 * cap == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS((void)tail_condition_max_eta(unit, 0.0), precondition_error);
  CHECK_THROWS_AS((void)tail_condition_max_eta(unit, 1.0), precondition_error);
}

TEST_CASE("theorem1 policy sqrt-dominated branch") {
  // sqrt(L ups) = 2 beats L log((L ups)^(1/4) / psi * M / eps) = 1.3466
  const SmoothnessProfile prof{1.0, 4.0, 1.0};
  const StepSizePolicy p = theorem1_policy(prof, std::exp(1.0), 1.0, 1.0);
  CHECK(p.provenance == "theorem1");
  REQUIRE(p.denominator.has_value());
  CHECK(*p.denominator == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(p.h == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(p.eta == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(p.predicted_iterations(2.0) == doctest::Approx(4.0).epsilon(1e-13));
}

TEST_CASE("theorem1 policy log-dominated branch") {
  const SmoothnessProfile prof{2.0, 8.0, 0.5};
  const StepSizePolicy p = theorem1_policy(prof, 10.0, 0.1, 1.0);
  REQUIRE(p.denominator.has_value());
  CHECK(*p.denominator == doctest::Approx(11.982929094215963).epsilon(1e-13));
  CHECK(p.h == doctest::Approx(0.08345205017383352).epsilon(1e-13));
  CHECK(p.eta == doctest::Approx(0.4085389826536349).epsilon(1e-13));
  // predicted iterations: c1 * denom / psi^2 * log(M/eps)
  CHECK(p.predicted_iterations(1.0) ==
        doctest::Approx(11.982929094215963 / 0.25 * std::log(100.0)).epsilon(1e-12));
}

TEST_CASE("theorem1 default c0 lands on the 5% tail step size") {
  const SmoothnessProfile prof{1.0, 1.0, 1.0};
  const StepSizePolicy p = theorem1_policy(prof, 20.0, 1.0);
  CHECK(p.eta == doctest::Approx(0.09501326963466711).epsilon(1e-14));
  CHECK(p.h == doctest::Approx(0.004513760703334977).epsilon(1e-14));
  REQUIRE(p.c0.has_value());
  CHECK(*p.c0 == doctest::Approx(0.013522018614080353).epsilon(1e-13));
  REQUIRE(p.denominator.has_value());
  CHECK(*p.denominator == doctest::Approx(2.995732273553991).epsilon(1e-13));
  CHECK(p.predicted_iterations(1.0) == doctest::Approx(8.974411854812963).epsilon(1e-13));
  CHECK(default_c0(prof, 20.0, 1.0) == doctest::Approx(*p.c0).epsilon(1e-15));
}

TEST_CASE("theorem1 policy preconditions") {
  const SmoothnessProfile no_psi{1.0, 1.0, {}};
  CHECK_THROWS_WITH_AS((void)theorem1_policy(no_psi, 2.0, 0.5), doctest::Contains("psi"),
                       precondition_error);
  const SmoothnessProfile ok{1.0, 1.0, 1.0};
  CHECK_THROWS_AS((void)theorem1_policy(ok, 0.5, 0.5), precondition_error);
  CHECK_THROWS_AS((void)theorem1_policy(ok, 2.0, 0.0), precondition_error);
  CHECK_THROWS_AS((void)theorem1_policy(ok, 2.0, 0.5, 0.0), precondition_error);
}

TEST_CASE("run_chain is deterministic in the seed") {
  const TargetPtr t = make_quadratic((Eigen::VectorXd(2) << 1.0, 0.25).finished());
  const StepSizePolicy pol = manual_policy(0.5);
  const Eigen::VectorXd q0 = Eigen::VectorXd::Zero(2);
  const Trajectory a = run_chain(*t, q0, pol, 400, 77, 1, true);
  const Trajectory b = run_chain(*t, q0, pol, 400, 77, 1, true);
  CHECK(a.positions == b.positions);
  CHECK(a.accepted_total == b.accepted_total);
  CHECK(a.held_total == b.held_total);
  const Trajectory c = run_chain(*t, q0, pol, 400, 78, 1, true);
  CHECK(a.positions != c.positions);
}

TEST_CASE("lazy chain holds about half the time and plain chain never") {
  const TargetPtr t = unit_1d();
  const StepSizePolicy pol = manual_policy(0.5);
  const Trajectory lazy = run_chain(*t, vec1(0.0), pol, 20000, 5, 1, true);
  CHECK(lazy.held_total + lazy.accepted_total + lazy.rejected_total == 20000);
  // binomial(20000, 1/2): 5 sigma ~ 354
  CHECK(std::abs(double(lazy.held_total) - 10000.0) < 354.0);
  const Trajectory plain = run_chain(*t, vec1(0.0), pol, 2000, 5, 1, false);
  CHECK(plain.held_total == 0);
  CHECK(plain.accepted_total + plain.rejected_total == 2000);
}

TEST_CASE("acceptance rate matches the stationary expectation of min(1, exp(-delta))") {
  const TargetPtr t = unit_1d();
  const double eta = 0.5;
  // direct two-sided estimate over (q, p) ~ pi x N(0,1)
  RngStream rng(13, stream_area::kEstimators);
  const int n = 200000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    rng.set_step(std::uint64_t(i));
    const PhasePoint z0{t->sample(rng), rng.normal_vector(1)};
    acc += std::min(1.0, std::exp(-energy_difference(*t, z0, eta)));
  }
  acc /= n;

  RngStream init(14, stream_area::kWarmInit);
  const Trajectory traj = run_chain(*t, t->sample(init), manual_policy(eta), 200000, 15, 1,
                                    false);
  CHECK(traj.acceptance_rate() == doctest::Approx(acc).epsilon(0.01));
  CHECK(acc > 0.95);  // eta^2 L = 1/4 keeps rejections rare
}

TEST_CASE("chain preserves the stationary law") {
  // second moment of N(0,1) along a long chain started in stationarity
  const TargetPtr t = unit_1d();
  RngStream init(3, stream_area::kWarmInit);
  const Trajectory traj = run_chain(*t, t->sample(init), manual_policy(0.8), 1000000, 21, 1,
                                    false);
  std::vector<double> q2(std::size_t(traj.positions.rows()));
  for (Eigen::Index i = 0; i < traj.positions.rows(); ++i)
    q2[std::size_t(i)] = traj.positions(i, 0) * traj.positions(i, 0);
  const BatchStats s = batch_mean_stderr(q2, 32);
  CHECK(std::abs(s.mean - 1.0) < 5.0 * s.stderr_mean);
  CHECK(s.stderr_mean < 0.02);
}

TEST_CASE("numeric blowups reject instead of crashing") {
  Blowup bad;
  // eta large enough that proposals frequently leave |q| < 2
  const Trajectory traj = run_chain(bad, vec1(0.0), manual_policy(1.9), 3000, 9, 1, false);
  CHECK(traj.accepted_total + traj.rejected_total == 3000);
  CHECK(traj.rejected_total > 0);
  for (Eigen::Index i = 0; i < traj.positions.rows(); ++i)
    CHECK(std::abs(traj.positions(i, 0)) <= 2.0);
}

TEST_CASE("mala_step bookkeeping on hold") {
  const TargetPtr t = unit_1d();
  ChainState st(vec1(0.7), 123, 0);
  const StepSizePolicy pol = manual_policy(0.4);
  std::uint64_t holds = 0, moves = 0;
  for (int i = 0; i < 50 && holds < 3; ++i) {
    const Eigen::VectorXd before = st.q;
    const std::uint64_t held_before = st.held;
    mala_step(*t, st, pol, true);
    if (st.held > held_before) {
      ++holds;
      CHECK(st.q == before);
    } else {
      ++moves;
    }
  }
  CHECK(holds >= 3);  // 50 fair coins virtually never give fewer
  CHECK(st.iteration == holds + moves);
}

TEST_CASE("thinning keeps every k-th state") {
  const TargetPtr t = unit_1d();
  const Trajectory traj = run_chain(*t, vec1(0.0), manual_policy(0.5), 10, 31, 3, true);
  REQUIRE(traj.steps.size() == 3);
  CHECK(traj.steps[0] == 3);
  CHECK(traj.steps[1] == 6);
  CHECK(traj.steps[2] == 9);
  CHECK(traj.positions.rows() == 3);
  CHECK(traj.n_steps == 10);
}

TEST_CASE("trajectory binary roundtrip is exact") {
  const TargetPtr t = make_quadratic((Eigen::VectorXd(3) << 1.0, 0.5, 0.25).finished());
  const Trajectory traj =
      run_chain(*t, Eigen::VectorXd::Zero(3), manual_policy(0.6), 50, 17, 2, true);
  std::stringstream buf;
  write_trajectory_bin(buf, traj);
  const Eigen::MatrixXd m = read_trajectory_bin(buf);
  REQUIRE(m.rows() == traj.positions.rows());
  REQUIRE(m.cols() == 3);
  CHECK(m == traj.positions);

  std::stringstream corrupt;
  corrupt << "NOPE1";
  CHECK_THROWS_AS((void)read_trajectory_bin(corrupt), precondition_error);

  std::stringstream trunc(buf.str().substr(0, 40));
  CHECK_THROWS_AS((void)read_trajectory_bin(trunc), precondition_error);
}

TEST_CASE("trajectory csv layout") {
  const TargetPtr t = make_quadratic((Eigen::VectorXd(2) << 1.0, 0.5).finished());
  const Trajectory traj =
      run_chain(*t, Eigen::VectorXd::Zero(2), manual_policy(0.5), 6, 3, 2, false);
  std::ostringstream os;
  write_trajectory_csv(os, traj, {"alpha", "beta"});
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "# alpha");
  std::getline(is, line);
  CHECK(line == "# beta");
  std::getline(is, line);
  CHECK(line == "step,q_1,q_2,accepted");
  int rows = 0;
  while (std::getline(is, line)) {
    CHECK(std::count(line.begin(), line.end(), ',') == 3);
    ++rows;
  }
  CHECK(rows == 3);
}

TEST_CASE("run_chain rejects bad arguments") {
  const TargetPtr t = unit_1d();
  CHECK_THROWS_AS((void)run_chain(*t, vec1(0.0), manual_policy(0.5), 0, 1), precondition_error);
  CHECK_THROWS_AS((void)run_chain(*t, vec1(0.0), manual_policy(0.5), 10, 1, 0),
                  precondition_error);
  CHECK_THROWS_AS((void)run_chain(*t, Eigen::VectorXd::Zero(2), manual_policy(0.5), 10, 1),
                  precondition_error);
}
