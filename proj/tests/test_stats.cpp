#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "flagsim/charfn.hpp"
#include "flagsim/rng.hpp"
#include "flagsim/stats.hpp"

using namespace flagsim;

TEST_CASE("verdict derives its pass flag and prints one stable line") {
  const TestVerdict v = TestVerdict::make("x", 0.5, 1.0, 42, 100);
  CHECK(v.pass);
  CHECK(v.line() == "x 0.5 1 pass 42 100");
  const TestVerdict w = TestVerdict::make("y", 2.0, 1.0, 7, 10);
  CHECK_FALSE(w.pass);
  CHECK(w.line() == "y 2 1 fail 7 10");
  // boundary counts as pass (statistic <= threshold)
  CHECK(TestVerdict::make("z", 1.0, 1.0, 0, 1).pass);
}

TEST_CASE("empirical cf at zero frequency is exactly one") {
  std::vector<Eigen::VectorXd> samples;
  PathRng rng(71, 0);
  for (int i = 0; i < 500; ++i)
    samples.push_back(Eigen::VectorXd::Constant(2, rng.gaussian()));
  std::vector<Eigen::VectorXd> grid{Eigen::VectorXd::Zero(2)};
  const EmpiricalCF cf = empirical_cf(samples, grid);
  CHECK(cf.values[0].real() == 1.0);
  CHECK(cf.values[0].imag() == 0.0);
  CHECK(cf.stderrs[0] == 0.0);
}

TEST_CASE("empirical cf of a standard gaussian matches exp(-u^2/2)") {
  std::vector<double> samples;
  PathRng rng(72, 0);
  for (int i = 0; i < 50000; ++i) samples.push_back(rng.gaussian());
  const EmpiricalCF cf = empirical_cf_1d(samples, {1.0, 2.0});
  const double targets[2] = {std::exp(-0.5), std::exp(-2.0)};
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(cf.values[i] - targets[i]) < 3.0 * cf.stderrs[i] + 1e-12);
    CHECK(cf.stderrs[i] > 0.0);
    CHECK(cf.stderrs[i] < 0.01);
  }
}

TEST_CASE("empirical cf refuses tiny ensembles") {
  std::vector<Eigen::VectorXd> samples(50, Eigen::VectorXd::Zero(1));
  std::vector<Eigen::VectorXd> grid{Eigen::VectorXd::Zero(1)};
  CHECK_THROWS_AS((void)empirical_cf(samples, grid), std::invalid_argument);
}

TEST_CASE("ks statistic on a tiny hand-solved sample") {
  // Two points 0.25, 0.75 against the uniform cdf: sup gap is exactly 1/4.
  std::vector<double> s(100);
  for (int i = 0; i < 100; ++i) s[i] = (i % 2 == 0) ? 0.25 : 0.75;
  const double d = ks_statistic(s, [](double x) { return x; });
  CHECK(d == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("ks accepts its own distribution and rejects a point mass") {
  PathRng rng(73, 0);
  std::vector<double> cauchy(10000);
  for (auto& v : cauchy)
    v = 2.0 * std::tan(M_PI * (rng.uniform() - 0.5));  // inverse-cdf Cauchy(2)
  const double d_ok =
      ks_statistic(cauchy, [](double x) { return cauchy_cdf(x, 2.0); });
  CHECK(d_ok < 0.02);

  std::vector<double> constant(1000, 0.0);
  const double d_bad =
      ks_statistic(constant, [](double x) { return cauchy_cdf(x, 1.0); });
  CHECK(d_bad >= 0.5);
}

TEST_CASE("two-sample ks separates shifted ensembles") {
  PathRng rng(74, 0);
  std::vector<double> a(5000), b(5000), c(5000);
  for (int i = 0; i < 5000; ++i) {
    a[i] = rng.gaussian();
    b[i] = rng.gaussian();
    c[i] = rng.gaussian() + 3.0;
  }
  CHECK(ks_two_sample(a, b) < 0.04);
  CHECK(ks_two_sample(a, c) > 0.8);
}

TEST_CASE("moments and median helpers") {
  const std::vector<double> x{1.0, 2.0, 3.0};
  CHECK(sample_mean(x) == doctest::Approx(2.0));
  CHECK(sample_variance(x) == doctest::Approx(1.0));
  CHECK(sample_median(x) == doctest::Approx(2.0));
  CHECK(sample_median({4.0, 1.0, 3.0, 2.0}) == doctest::Approx(2.5));
  CHECK_THROWS_AS((void)sample_median({}), std::invalid_argument);
}

TEST_CASE("realized qv on deterministic ramps") {
  const int steps = 20;
  Eigen::VectorXd x(steps + 1), y(steps + 1);
  for (int k = 0; k <= steps; ++k) {
    x(k) = static_cast<double>(k);
    y(k) = 2.0 * k;
  }
  const Eigen::VectorXd rates = realized_qv(x, y, 10, 1.0);
  CHECK(rates.size() == 2);
  CHECK(rates(0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(rates(1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS((void)realized_qv(x, y, 5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS((void)realized_qv(x.head(5), y.head(5), 10, 1.0),
                  std::invalid_argument);
}

TEST_CASE("realized qv recovers brownian rates") {
  PathRng rng(75, 0);
  const int steps = 20000;
  const double dt = 1e-3;
  Eigen::VectorXd x(steps + 1);
  Eigen::VectorXcd z(steps + 1);
  x(0) = 0.0;
  z(0) = 0.0;
  const double sd = std::sqrt(dt);
  for (int k = 0; k < steps; ++k) {
    x(k + 1) = x(k) + rng.gaussian(sd);
    z(k + 1) = z(k) + std::complex<double>(rng.gaussian(sd), rng.gaussian(sd));
  }
  const Eigen::VectorXd rx = realized_qv(x, x, steps, dt);
  CHECK(rx(0) == doctest::Approx(1.0).epsilon(0.05));
  const Eigen::VectorXd rz = realized_qv(z, steps, dt);
  CHECK(rz(0) == doctest::Approx(2.0).epsilon(0.05));
  // windowed version agrees with the whole-series average
  const Eigen::VectorXd windowed = realized_qv(x, x, 100, dt);
  CHECK(windowed.size() == 200);
  CHECK(windowed.mean() == doctest::Approx(rx(0)).epsilon(1e-12));
}

TEST_CASE("generator check handles constants and flags bad generators") {
  const std::vector<double> constant(200, 5.0);
  const TestVerdict ok =
      generator_check("const", constant, 5.0, 0.0, 1e-2, 1.0, 9);
  CHECK(ok.pass);
  CHECK(ok.statistic == 0.0);

  // slope is exactly 0, claiming generator 10 must fail at h = 1e-2
  const TestVerdict bad =
      generator_check("wrong", constant, 5.0, 10.0, 1e-2, 1.0, 9);
  CHECK_FALSE(bad.pass);
}
