#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace flagsim {

// One pass/fail line of a run report. pass is derived, never set directly.
struct TestVerdict {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::uint64_t seed = 0;
  long n_samples = 0;

  static TestVerdict make(std::string name, double statistic, double threshold,
                          std::uint64_t seed, long n_samples);
  // "name statistic threshold pass seed N", floats at 17 significant digits
  std::string line() const;
};

// Empirical characteristic function on a frequency grid, with the standard
// error of the complex mean: sqrt(Var(cos) + Var(sin)) / sqrt(N).
struct EmpiricalCF {
  std::vector<Eigen::VectorXd> grid;
  std::vector<std::complex<double>> values;
  std::vector<double> stderrs;
};

EmpiricalCF empirical_cf(const std::vector<Eigen::VectorXd>& samples,
                         const std::vector<Eigen::VectorXd>& grid);

// Scalar samples against a scalar frequency grid.
EmpiricalCF empirical_cf_1d(const std::vector<double>& samples,
                            const std::vector<double>& grid);

// Sup distance between the empirical CDF of the samples and a reference CDF.
double ks_statistic(std::vector<double> samples,
                    const std::function<double(double)>& cdf);

// Sup distance between two empirical CDFs.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

double sample_mean(const std::vector<double>& x);
double sample_variance(const std::vector<double>& x);  // unbiased
double sample_median(std::vector<double> x);

// Windowed realized covariation rates of two real series on a uniform grid:
// entry w is sum over the window of dx*dy divided by the window's time span.
// Refuses windows shorter than 10 steps.
Eigen::VectorXd realized_qv(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                            int window, double dt);

// Same for one complex series against its own conjugate: sum |dz|^2 per window.
Eigen::VectorXd realized_qv(const Eigen::VectorXcd& z, int window, double dt);

// Monte Carlo generator check: compares the finite-horizon slope
// (E[f(X_h)] - f(x))/h against the generator applied to f at x. The threshold
// is 3 standard errors of the slope plus an explicit discretization allowance
// disc_coeff * h.
TestVerdict generator_check(const std::string& name,
                            const std::vector<double>& f_at_h, double f_at_x,
                            double generator_value, double h, double disc_coeff,
                            std::uint64_t seed);

}  // namespace flagsim
