#pragma once

#include <stdexcept>
#include <string>

namespace flagsim {

// Thrown when a path leaves the affine chart: some last-row modulus |U(n-1,j)|
// fell below the hard floor and the column coordinates w(:,j) are meaningless.
struct ChartExitError : std::runtime_error {
  int column;
  double modulus;
  ChartExitError(int column_, double modulus_)
      : std::runtime_error("chart exit: |U(n-1," + std::to_string(column_) +
                           ")| = " + std::to_string(modulus_)),
        column(column_), modulus(modulus_) {}
};

// A series/quadrature could not reach the requested tolerance within its cap.
// Carries the bound that was actually achieved so callers can decide.
struct ToleranceNotMet : std::runtime_error {
  double achieved;
  double requested;
  ToleranceNotMet(const std::string& what_, double achieved_, double requested_)
      : std::runtime_error(what_ + ": achieved " + std::to_string(achieved_) +
                           ", requested " + std::to_string(requested_)),
        achieved(achieved_), requested(requested_) {}
};

// Conditional area covariance came out indefinite beyond the clip threshold.
struct CovarianceNotPsd : std::runtime_error {
  double min_eigenvalue;
  explicit CovarianceNotPsd(double min_eig)
      : std::runtime_error("area covariance not PSD: min eigenvalue " +
                           std::to_string(min_eig)),
        min_eigenvalue(min_eig) {}
};

}  // namespace flagsim
