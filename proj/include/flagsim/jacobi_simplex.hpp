#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace flagsim {

// Weight multi-parameter for the simplex: one kappa per ambient coordinate
// (n entries for the (n-1)-dimensional simplex), each > -1/2.
struct JacobiParams {
  Eigen::VectorXd kappa;
  explicit JacobiParams(Eigen::VectorXd k);
  int n() const { return static_cast<int>(kappa.size()); }
  double total() const { return kappa.sum(); }
};

using MultiIndex = std::vector<int>;
int degree(const MultiIndex& tau);

// Classical Jacobi polynomial P_m^{(a,b)} at x in [-1,1], by recurrence.
double jacobi_poly_1d(int m, double a, double b, double x);

// Density of the normalized Dirichlet-type weight with respect to Lebesgue
// measure on the open simplex, evaluated at the first n-1 coordinates.
double dirichlet_weight(const JacobiParams& p, const Eigen::VectorXd& lam);

// Generator eigenvalue on the degree-d eigenspace: -d(d + |kappa| + (n-2)/2).
double eigenvalue(const JacobiParams& p, int deg);

// Orthonormal simplex Jacobi polynomial indexed by tau (n-1 entries),
// evaluated at an interior point lam (n-1 entries).
double simplex_jacobi(const JacobiParams& p, const MultiIndex& tau,
                      const Eigen::VectorXd& lam);

// All orthonormal basis polynomials up to a total degree, grouped by level.
// Normalization constants are precomputed in log-gamma space.
class SimplexBasis {
 public:
  SimplexBasis(const JacobiParams& p, int max_degree);
  const std::vector<MultiIndex>& indices() const { return indices_; }
  int max_degree() const { return max_degree_; }
  // values of every basis polynomial at an interior point
  Eigen::VectorXd evaluate(const Eigen::VectorXd& lam) const;
  double evaluate_one(std::size_t idx, const Eigen::VectorXd& lam) const;
  // sup-norm bound over the closed simplex (product of 1-d Jacobi maxima)
  double sup_bound(std::size_t idx) const { return sup_bound_[idx]; }

 private:
  JacobiParams params_;
  int max_degree_;
  std::vector<MultiIndex> indices_;        // sorted by degree
  std::vector<Eigen::VectorXd> a_param_;   // per index: 1-d alpha parameters
  std::vector<double> inv_sqrt_norm_;      // per index: exp(-log C_tau / 2)
  std::vector<double> sup_bound_;          // per index: sup-norm envelope
};

struct KernelResult {
  double value = 0.0;
  double tail_bound = 0.0;  // a-priori bound on the discarded tail
  int max_degree = 0;       // highest degree included
};

// Spectral heat kernel density (with respect to the normalized weight),
// truncated once the remaining tail sum N(J) * M(J) * exp(-J(J+|kappa|+
// (n-2)/2)t) over levels J above the cut drops below tol, where M(J) is a
// sup-norm envelope of the level (valid at every evaluation point, including
// zeros of individual basis polynomials); hard cap at degree 60. Throws
// ToleranceNotMet if the cap is reached first. Reliable for t >= 0.25 at
// default tolerance; shorter times may throw.
KernelResult heat_kernel(const JacobiParams& p, double t,
                         const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                         double tol = 1e-9, int degree_cap = 60);

// Product Gauss-Jacobi rule on the simplex through stick-breaking coordinates.
// Weights include the normalized Dirichlet density: sum(weights) == 1 and
// sum_i w_i f(node_i) integrates polynomials of total degree <= poly_degree
// against the normalized weight exactly.
struct Quadrature {
  Eigen::MatrixXd nodes;    // one row per node, n-1 columns
  Eigen::VectorXd weights;
};
Quadrature simplex_quadrature(const JacobiParams& p, int poly_degree);

// Central finite-difference application of the simplex generator
//   G f = sum_j l_j(1-l_j) f_jj + sum_j [(kappa_j+1/2) - (|kappa|+n/2) l_j] f_j
//         - sum_{j != l} l_j l_l f_jl
// at an interior point; h must keep the stencil inside the simplex.
double apply_generator_fd(const JacobiParams& p,
                          const std::function<double(const Eigen::VectorXd&)>& f,
                          const Eigen::VectorXd& lam, double h = 1e-4);

}  // namespace flagsim
