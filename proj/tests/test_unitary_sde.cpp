#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "flagsim/flag_area.hpp"
#include "flagsim/rng.hpp"
#include "flagsim/unitary_sde.hpp"

using namespace flagsim;
using std::complex;

namespace {

double unitarity_gap(const Eigen::MatrixXcd& U) {
  Eigen::MatrixXcd E = U.adjoint() * U;
  E.diagonal().array() -= 1.0;
  return E.norm();
}

// Plain Taylor series, accurate for small ||A||; reference for expm_skew.
Eigen::MatrixXcd expm_series(const Eigen::MatrixXcd& A, int terms) {
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Identity(A.rows(), A.cols());
  Eigen::MatrixXcd term = sum;
  for (int k = 1; k <= terms; ++k) {
    term = (term * A) / static_cast<double>(k);
    sum += term;
  }
  return sum;
}

}  // namespace

TEST_CASE("increment has the exact skew-Hermitian structure") {
  PathRng rng(11, 0);
  for (int n : {2, 3, 5}) {
    const SkewHermitianIncrement inc = sample_increment(n, 0.01, rng);
    CHECK(inc.dt == 0.01);
    for (int l = 0; l < n; ++l) {
      CHECK(inc.A(l, l).real() == 0.0);
      for (int j = l + 1; j < n; ++j) {
        CHECK(inc.A(j, l).real() == -inc.A(l, j).real());
        CHECK(inc.A(j, l).imag() == inc.A(l, j).imag());
      }
    }
  }
}

TEST_CASE("increment moments match the entry law") {
  PathRng rng(12, 0);
  const int draws = 100000;
  const double dt = 0.01;
  double sum_re = 0.0, sum_re2 = 0.0, sum_diag2 = 0.0;
  SkewHermitianIncrement inc{Eigen::MatrixXcd::Zero(3, 3), dt};
  for (int i = 0; i < draws; ++i) {
    sample_increment_into(inc, rng);
    const double re = inc.A(0, 1).real();
    sum_re += re;
    sum_re2 += re * re;
    sum_diag2 += (inc.A(0, 0) * inc.A(0, 0)).real();
  }
  const double mean_re = sum_re / draws;
  const double var_re = sum_re2 / draws - mean_re * mean_re;
  const double mean_diag2 = sum_diag2 / draws;
  // Var(Re A_12) = dt; SE(var) ~ sqrt(2/N) dt.
  CHECK(std::abs(var_re - dt) < 3.0 * std::sqrt(2.0 / draws) * dt);
  // E[A_11^2] = -2 dt (purely imaginary diagonal); SE = 2 sqrt(2/N) dt.
  CHECK(std::abs(mean_diag2 + 2.0 * dt) <
        3.0 * 2.0 * std::sqrt(2.0 / draws) * dt);
}

TEST_CASE("expm_skew is unitary and matches the Taylor series") {
  PathRng rng(13, 0);
  for (int n : {2, 3, 4}) {
    for (int rep = 0; rep < 5; ++rep) {
      const SkewHermitianIncrement inc = sample_increment(n, 0.05, rng);
      const Eigen::MatrixXcd E = expm_skew(inc.A);
      CHECK(unitarity_gap(E) < 1e-13);
      const Eigen::MatrixXcd ref = expm_series(inc.A, 30);
      CHECK((E - ref).norm() < 1e-12);
    }
  }
}

TEST_CASE("zero increment leaves the state unchanged") {
  const UnitaryState s{fourier_start(3), 0.25};
  const SkewHermitianIncrement zero{Eigen::MatrixXcd::Zero(3, 3), 0.01};
  const UnitaryState s2 = step_unitary(s, zero);
  CHECK((s2.U - s.U).norm() == 0.0);
  CHECK(s2.t == doctest::Approx(0.26));
}

TEST_CASE("stepper drift matches the Ito form in expectation") {
  // E[U exp(A)] = U (1 - n dt) + O(dt^2) entrywise.
  const int n = 3;
  const double dt = 1e-3;
  const int draws = 100000;
  const Eigen::MatrixXcd U0 = fourier_start(n);
  PathRng rng(14, 0);
  UnitaryStepper stepper(n);
  SkewHermitianIncrement inc{Eigen::MatrixXcd::Zero(n, n), dt};
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < draws; ++i) {
    Eigen::MatrixXcd U = U0;
    sample_increment_into(inc, rng);
    stepper.apply(U, inc.A);
    sum += U;
  }
  const Eigen::MatrixXcd mean = sum / static_cast<double>(draws);
  const Eigen::MatrixXcd target = U0 * (1.0 - n * dt);
  // Each entry of U exp(A) fluctuates with sd ~ sqrt(2 dt); allow 4 SE
  // since 2 n^2 real components are checked at once.
  const double se = std::sqrt(2.0 * dt / draws);
  CHECK((mean - target).cwiseAbs().maxCoeff() < 4.0 * se);
}

TEST_CASE("unitarity is preserved to 1e-8 over ten thousand steps") {
  const int n = 3;
  const double dt = 1e-3;
  PathRng rng(15, 0);
  double worst = 0.0;
  simulate_unitary_path({fourier_start(n), 0.0}, 10.0, dt, rng,
                        [&](const UnitaryState& s) {
                          worst = std::max(worst, unitarity_gap(s.U));
                        });
  CHECK(worst <= 1e-8);
}

TEST_CASE("path layout: start plus one state per step") {
  PathRng rng(16, 0);
  const auto path = unitary_path({fourier_start(2), 0.0}, 0.01, 0.01, rng);
  CHECK(path.size() == 2);  // start and the single step
  CHECK(path.front().t == 0.0);
  CHECK(path.back().t == doctest::Approx(0.01));

  PathRng rng2(16, 1);
  const auto longer = unitary_path({fourier_start(2), 0.0}, 1.0, 1e-2, rng2);
  CHECK(longer.size() == 101);
  const Eigen::VectorXd lam = lambda_from_U(longer.back().U);
  CHECK(std::abs(lam.sum() - 1.0) <= 1e-12);
}

TEST_CASE("fourier start is unitary with a flat last row") {
  for (int n : {2, 3, 6}) {
    const Eigen::MatrixXcd F = fourier_start(n);
    CHECK(unitarity_gap(F) < 1e-14);
    for (int j = 0; j < n; ++j)
      CHECK(std::abs(F(n - 1, j)) ==
            doctest::Approx(1.0 / std::sqrt(double(n))).epsilon(1e-14));
  }
}

TEST_CASE("start_with_lambda hits the requested radial point") {
  Eigen::VectorXd lam0(3);
  lam0 << 0.2, 0.5, 0.3;
  const Eigen::MatrixXcd U = start_with_lambda(lam0);
  CHECK(unitarity_gap(U) < 1e-14);
  const Eigen::VectorXd lam = lambda_from_U(U);
  CHECK((lam - lam0).cwiseAbs().maxCoeff() < 1e-14);

  Eigen::VectorXd center2(2);
  center2 << 0.5, 0.5;
  const Eigen::VectorXd lam2 = lambda_from_U(start_with_lambda(center2));
  CHECK((lam2 - center2).cwiseAbs().maxCoeff() < 1e-14);

  Eigen::VectorXd bad(2);
  bad << 1.0, 0.0;
  CHECK_THROWS_AS((void)start_with_lambda(bad), std::invalid_argument);
  Eigen::VectorXd off(2);
  off << 0.4, 0.4;
  CHECK_THROWS_AS((void)start_with_lambda(off), std::invalid_argument);
}

TEST_CASE("chart stays valid on almost every seed") {
  // Fourier start, t_end 1, dt 1e-3: the last row should keep every modulus
  // positive on at least 99% of a thousand seeds (here: all margins stay
  // clear of the hard floor).
  const int n = 3;
  int ok = 0;
  for (int seedling = 0; seedling < 1000; ++seedling) {
    PathRng rng(777, static_cast<std::uint64_t>(seedling));
    double min_margin = 1.0;
    simulate_unitary_path({fourier_start(n), 0.0}, 1.0, 1e-3, rng,
                          [&](const UnitaryState& s) {
                            min_margin = std::min(min_margin, chart_margin(s.U));
                          });
    if (min_margin > kChartFloor) ++ok;
  }
  CHECK(ok >= 990);
}

TEST_CASE("flat complex path has Brownian moments") {
  const double dt = 1e-2;
  const double t_end = 1.0;
  const int paths = 20000;
  Eigen::VectorXcd z0(2);
  z0 << complex<double>(1.0, 0.0), complex<double>(0.0, 2.0);

  double sum_mod2 = 0.0;
  double cov_re_im = 0.0;
  for (int p = 0; p < paths; ++p) {
    PathRng rng(909, static_cast<std::uint64_t>(p));
    const FlatComplexPath path = simulate_flat_complex(z0, t_end, dt, rng);
    CHECK(path.z.size() == 101);
    sum_mod2 += std::norm(path.z.back()(0));
    // Realized covariation of Re Z_1 and Im Z_1 along the path.
    for (std::size_t k = 1; k < path.z.size(); ++k) {
      const complex<double> d = path.z[k](0) - path.z[k - 1](0);
      cov_re_im += d.real() * d.imag();
    }
  }
  const double mean_mod2 = sum_mod2 / paths;
  // E|Z_1(t)|^2 = |Z_1(0)|^2 + 2t; Var(|Z|^2) ~ 8t^2 + 8t|z0|^2 at t=1.
  const double se_mod2 = std::sqrt(16.0 / paths);
  CHECK(std::abs(mean_mod2 - (1.0 + 2.0 * t_end)) < 3.0 * se_mod2);
  // Covariation per path has mean zero, variance ~ t dt; averaged over paths.
  const double mean_cov = cov_re_im / paths;
  const double se_cov = std::sqrt(t_end * dt / paths);
  CHECK(std::abs(mean_cov) < 3.0 * se_cov);
}
