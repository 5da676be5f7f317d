#pragma once

#include <Eigen/Dense>

#include "flagsim/jacobi_simplex.hpp"

namespace flagsim {

struct CFResult {
  double value = 0.0;
  double tail_bound = 0.0;   // kernel truncation bound actually achieved
  double quad_error = 0.0;   // last refinement change of the quadrature
};

// Characteristic function of the joint area limit law: n independent
// Cauchy(n-1) coordinates, evaluated at frequency vector u.
double limit_cf(const Eigen::VectorXd& u);

// E[exp(i u.theta(t)) | lambda(0), lambda(t)]: the conditional CF given both
// radial endpoints. Real and positive for valid arguments.
CFResult conditional_cf(const Eigen::VectorXd& u, double t,
                        const Eigen::VectorXd& lambda0,
                        const Eigen::VectorXd& lambda_t);

// E[exp(i u.theta(t)) | lambda(0)]: conditional CF integrated against the
// radial transition law, reduced to a single tilted-kernel quadrature.
CFResult unconditional_cf(const Eigen::VectorXd& u, double t,
                          const Eigen::VectorXd& lambda0);

double cauchy_pdf(double x, double scale);
double cauchy_cdf(double x, double scale);

}  // namespace flagsim
