#include "flagsim/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "flagsim/charfn.hpp"
#include "flagsim/errors.hpp"
#include "flagsim/flag_area.hpp"
#include "flagsim/jacobi_simplex.hpp"
#include "flagsim/parallel.hpp"
#include "flagsim/rng.hpp"
#include "flagsim/unitary_sde.hpp"
#include "flagsim/windings.hpp"

namespace flagsim {

namespace {

using Verdicts = std::vector<TestVerdict>;

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

Eigen::VectorXd simplex_center(int n) {
  return Eigen::VectorXd::Constant(n, 1.0 / n);
}

std::string dat(const std::string& dir, const std::string& name) {
  return dir + "/" + name;
}

void emit(const std::string& path, const std::vector<std::string>& columns,
          const std::vector<std::vector<double>>& rows,
          std::vector<std::string>& artifacts) {
  emit_plot_data(path, columns, rows);
  artifacts.push_back(path);
}

// 1001 evenly spaced empirical quantiles of each column, for plotting CDFs.
void emit_quantiles(const std::string& path,
                    const std::vector<std::string>& names,
                    std::vector<std::vector<double>> cols,
                    std::vector<std::string>& artifacts) {
  for (auto& c : cols) std::sort(c.begin(), c.end());
  std::vector<std::string> columns;
  columns.push_back("quantile");
  for (const auto& nm : names) columns.push_back(nm);
  std::vector<std::vector<double>> rows;
  const long steps = 1000;
  for (long i = 0; i <= steps; ++i) {
    const double q = static_cast<double>(i) / steps;
    std::vector<double> row{q};
    for (const auto& c : cols) {
      const long idx = std::lround(q * (static_cast<double>(c.size()) - 1.0));
      row.push_back(c[static_cast<std::size_t>(idx)]);
    }
    rows.push_back(std::move(row));
  }
  emit(path, columns, rows, artifacts);
}

void emit_histogram(const std::string& path, const std::vector<double>& x,
                    double lo, double hi, int bins,
                    std::vector<std::string>& artifacts) {
  std::vector<long> count(bins, 0);
  const double width = (hi - lo) / bins;
  for (double v : x) {
    if (v < lo || v >= hi) continue;
    ++count[static_cast<int>((v - lo) / width)];
  }
  std::vector<std::vector<double>> rows;
  for (int b = 0; b < bins; ++b)
    rows.push_back({lo + b * width, lo + (b + 1) * width,
                    static_cast<double>(count[b])});
  emit(path, {"bin_left", "bin_right", "count"}, rows, artifacts);
}

RadialOptions radial_options(const ExperimentConfig& cfg) {
  RadialOptions opt;
  opt.dt = cfg.get_double("dt", opt.dt);
  opt.dip_enter = cfg.get_double("dip_enter", opt.dip_enter);
  opt.dip_exit = cfg.get_double("dip_exit", opt.dip_exit);
  opt.bulk_refine = cfg.get_double("bulk_refine", opt.bulk_refine);
  require(opt.dt > 0 && opt.dip_enter > 0 && opt.dip_exit > opt.dip_enter,
          "radial options: need dt > 0 and dip_exit > dip_enter > 0");
  return opt;
}

// Conditional CF of theta(t)/t (optionally with independent torus phases of
// speed mu) given one radial path's clock vector:
//   exp(-[sum_j u_j^2 (clock_j + mu_j^2 t) + t((sum u)^2 - sum u^2)] / (2 t^2))
double conditional_cf_given_clock(const Eigen::VectorXd& clock,
                                  const Eigen::VectorXd& u, double t,
                                  const Eigen::VectorXd* mu) {
  const int n = static_cast<int>(u.size());
  double q = 0.0, us = 0.0, u2 = 0.0;
  for (int j = 0; j < n; ++j) {
    double cj = clock(j);
    if (mu != nullptr) cj += (*mu)(j) * (*mu)(j) * t;
    q += u(j) * u(j) * cj;
    us += u(j);
    u2 += u(j) * u(j);
  }
  q += t * (us * us - u2);
  return std::exp(-std::max(0.0, q) / (2.0 * t * t));
}

// ---------------------------------------------------------------------------
// unitary-check: integrator stays on the group, last row stays on the simplex

Verdicts exp_unitary_check(const ExperimentConfig& cfg, const std::string& dir,
                           std::vector<std::string>& artifacts) {
  const int n = static_cast<int>(cfg.get_long("n", 3));
  const double dt = cfg.get_double("dt", 1e-3);
  const double t_end = cfg.get_double("t_end", 10.0);
  const long paths = cfg.get_long("paths", 100);
  const std::uint64_t seed = cfg.get_seed(101);
  const bool store = cfg.get_long("store", 0) != 0;
  require(n >= 2 && dt > 0 && t_end > 0 && paths > 0,
          "unitary-check: need n >= 2, dt > 0, t_end > 0, paths > 0");

  std::vector<double> max_drift(paths, 0.0), max_gap(paths, 0.0);
  std::vector<std::vector<double>> traj;
  parallel_paths(static_cast<std::size_t>(paths), [&](std::size_t pi) {
    PathRng rng(seed, pi);
    UnitaryState st{fourier_start(n), 0.0};
    double drift = 0.0, gap = 0.0;
    Eigen::MatrixXcd E(n, n);
    simulate_unitary_path(st, t_end, dt, rng, [&](const UnitaryState& s) {
      E.noalias() = s.U.adjoint() * s.U;
      E.diagonal().array() -= 1.0;
      const double d = E.norm();
      const double g = std::abs(lambda_from_U(s.U).sum() - 1.0);
      drift = std::max(drift, d);
      gap = std::max(gap, g);
      if (store && pi == 0) traj.push_back({s.t, d, g});
    });
    max_drift[pi] = drift;
    max_gap[pi] = gap;
  });

  std::vector<std::vector<double>> rows;
  for (long p = 0; p < paths; ++p)
    rows.push_back({static_cast<double>(p), max_drift[p], max_gap[p]});
  emit(dat(dir, "unitary-check_paths.dat"),
       {"path", "max_unitarity_drift", "max_simplex_gap"}, rows, artifacts);
  if (store)
    emit(dat(dir, "unitary-check_path0.dat"),
         {"t", "unitarity_drift", "simplex_gap"}, traj, artifacts);

  Verdicts v;
  v.push_back(TestVerdict::make(
      "unitarity_frobenius", *std::max_element(max_drift.begin(), max_drift.end()),
      1e-8, seed, paths));
  v.push_back(TestVerdict::make(
      "simplex_sum_gap", *std::max_element(max_gap.begin(), max_gap.end()),
      1e-12, seed, paths));
  return v;
}

// ---------------------------------------------------------------------------
// qv-check: windowed realized covariation rates of the chart entries and the
// areas against the coefficient fields frozen at each window start (the
// integrated left-point form is emitted alongside for reference)

Verdicts exp_qv_check(const ExperimentConfig& cfg, const std::string& dir,
                      std::vector<std::string>& artifacts) {
  const int n = static_cast<int>(cfg.get_long("n", 2));
  const double dt = cfg.get_double("dt", 1e-4);
  const double t_end = cfg.get_double("t_end", 0.2);
  const long paths = cfg.get_long("paths", 1000);
  const long window = cfg.get_long("window", 1000);
  const std::uint64_t seed = cfg.get_seed(202);
  const bool store = cfg.get_long("store", 0) != 0;
  require(n >= 2 && dt > 0 && t_end > 0 && paths > 0,
          "qv-check: need n >= 2, dt > 0, t_end > 0, paths > 0");
  require(window >= 10, "qv-check: window must be at least 10 steps");
  const long steps = std::lround(t_end / dt);
  const long nw = steps / window;
  require(nw >= 1, "qv-check: horizon shorter than one window");

  const int m_dw = (n - 1) * n;
  const int m_cross = n * (n - 1) / 2;
  const int members = m_dw + n + m_cross;
  // Per path, window and member: realized covariation sum and the coefficient
  // field integrated left-point over the same window. The comparison is the
  // per-path ratio of the two; coefficients like 2(1+r^2)(1+|w|^2) have heavy
  // ensemble tails (inverse powers of lambda), so across-path means of the
  // raw rates do not converge, while the ratio is scale-free with mean one.
  std::vector<double> slab(
      static_cast<std::size_t>(paths) * nw * members * 2, 0.0);
  std::vector<std::vector<double>> traj;

  parallel_paths(static_cast<std::size_t>(paths), [&](std::size_t pi) {
    PathRng rng(seed, pi);
    UnitaryStepper stepper(n);
    SkewHermitianIncrement inc{Eigen::MatrixXcd::Zero(n, n), dt};
    Eigen::MatrixXcd U = fourier_start(n);
    FlagPoint cur = project_to_flag(U);
    FlagPoint next = cur;
    AreaAccumulator acc(cur);
    Eigen::VectorXd theta_prev = acc.state().theta;
    double* base = slab.data() +
                   static_cast<std::size_t>(pi) * nw * members * 2;
    for (long k = 0; k < window * nw; ++k) {
      double* row = base + static_cast<std::size_t>(k / window) * members * 2;
      int mi = 0;
      for (int kk = 0; kk < n - 1; ++kk)
        for (int j = 0; j < n; ++j, ++mi) {
          const double c =
              2.0 * (1.0 + cur.r2(j)) * (1.0 + std::norm(cur.w(kk, j)));
          row[2 * mi + 1] += c * dt;
        }
      for (int j = 0; j < n; ++j, ++mi) row[2 * mi + 1] += cur.r2(j) * dt;
      for (int j = 0; j < n; ++j)
        for (int m2 = j + 1; m2 < n; ++m2, ++mi)
          row[2 * mi + 1] += dt;  // cross rate is identically 1

      sample_increment_into(inc, rng);
      stepper.apply(U, inc.A);
      project_to_flag_into(U, next);
      acc.step(next, dt);
      const Eigen::VectorXd& theta_now = acc.state().theta;
      mi = 0;
      for (int kk = 0; kk < n - 1; ++kk)
        for (int j = 0; j < n; ++j, ++mi)
          row[2 * mi] += std::norm(next.w(kk, j) - cur.w(kk, j));
      for (int j = 0; j < n; ++j, ++mi) {
        const double d = theta_now(j) - theta_prev(j);
        row[2 * mi] += d * d;
      }
      for (int j = 0; j < n; ++j)
        for (int m2 = j + 1; m2 < n; ++m2, ++mi)
          row[2 * mi] += (theta_now(j) - theta_prev(j)) *
                         (theta_now(m2) - theta_prev(m2));
      theta_prev = theta_now;
      std::swap(cur, next);
      if (store && pi == 0) {
        std::vector<double> tr{acc.state().t};
        for (int j = 0; j < n; ++j) tr.push_back(theta_now(j));
        for (int j = 0; j < n; ++j) tr.push_back(cur.r2(j));
        traj.push_back(std::move(tr));
      }
    }
  });

  // serial reduction: across-path mean of the realized/predicted ratio plus
  // informational mean rates, per (window, member)
  const double span = window * dt;
  std::vector<double> mean_ratio(static_cast<std::size_t>(nw) * members, 0.0);
  std::vector<double> mean_real(mean_ratio.size(), 0.0);
  std::vector<double> mean_pred(mean_ratio.size(), 0.0);
  for (long p = 0; p < paths; ++p) {
    const double* base =
        slab.data() + static_cast<std::size_t>(p) * nw * members * 2;
    for (std::size_t i = 0; i < mean_ratio.size(); ++i) {
      mean_ratio[i] += base[2 * i] / base[2 * i + 1];
      mean_real[i] += base[2 * i] / span;
      mean_pred[i] += base[2 * i + 1] / span;
    }
  }
  for (auto& m : mean_ratio) m /= static_cast<double>(paths);
  for (auto& m : mean_real) m /= static_cast<double>(paths);
  for (auto& m : mean_pred) m /= static_cast<double>(paths);

  double stat_dw = 0.0, stat_diag = 0.0, stat_cross = 0.0;
  std::vector<std::vector<double>> rows;
  for (long w = 0; w < nw; ++w) {
    for (int mi = 0; mi < members; ++mi) {
      const std::size_t cell = static_cast<std::size_t>(w) * members + mi;
      const double rel = std::abs(mean_ratio[cell] - 1.0);
      const int family = mi < m_dw ? 0 : (mi < m_dw + n ? 1 : 2);
      if (family == 0) stat_dw = std::max(stat_dw, rel);
      if (family == 1) stat_diag = std::max(stat_diag, rel);
      if (family == 2) stat_cross = std::max(stat_cross, rel);
      rows.push_back({static_cast<double>(w), w * span,
                      static_cast<double>(family), static_cast<double>(mi),
                      mean_ratio[cell], mean_real[cell], mean_pred[cell]});
    }
  }
  emit(dat(dir, "qv-check_rates.dat"),
       {"window", "t_start", "family", "member", "mean_ratio",
        "mean_realized_rate", "mean_predicted_rate"},
       rows, artifacts);
  if (store) {
    std::vector<std::string> cols{"t"};
    for (int j = 1; j <= n; ++j) cols.push_back("theta_" + std::to_string(j));
    for (int j = 1; j <= n; ++j) cols.push_back("r2_" + std::to_string(j));
    emit(dat(dir, "qv-check_path0.dat"), cols, traj, artifacts);
  }

  Verdicts v;
  v.push_back(TestVerdict::make("qv_chart_rate", stat_dw, 0.10, seed, paths));
  v.push_back(
      TestVerdict::make("qv_area_diag_rate", stat_diag, 0.10, seed, paths));
  v.push_back(
      TestVerdict::make("qv_area_cross_rate", stat_cross, 0.10, seed, paths));
  return v;
}

// ---------------------------------------------------------------------------
// radial-agreement: lambda_1(t) marginal from the unitary projection vs the
// direct simplex SDE

Verdicts exp_radial_agreement(const ExperimentConfig& cfg,
                              const std::string& dir,
                              std::vector<std::string>& artifacts) {
  const int n = static_cast<int>(cfg.get_long("n", 3));
  const double t_end = cfg.get_double("t_end", 1.0);
  const double dt_u = cfg.get_double("dt", 2e-3);
  const long paths = cfg.get_long("paths", 50000);
  const std::uint64_t seed = cfg.get_seed(303);
  const bool store = cfg.get_long("store", 0) != 0;
  require(n >= 2 && dt_u > 0 && t_end > 0 && paths > 0,
          "radial-agreement: need n >= 2, dt > 0, t_end > 0, paths > 0");
  ExperimentConfig sde_cfg = cfg;
  sde_cfg.set("dt", cfg.get_string("sde_dt", "1e-3"));
  const RadialOptions opt = radial_options(sde_cfg);

  std::vector<double> lam_u(paths), lam_s(paths);
  parallel_paths(static_cast<std::size_t>(paths), [&](std::size_t pi) {
    PathRng rng(seed, pi);
    UnitaryStepper stepper(n);
    SkewHermitianIncrement inc{Eigen::MatrixXcd::Zero(n, n), dt_u};
    Eigen::MatrixXcd U = fourier_start(n);
    const long steps = std::lround(t_end / dt_u);
    for (long k = 0; k < steps; ++k) {
      sample_increment_into(inc, rng);
      stepper.apply(U, inc.A);
    }
    lam_u[pi] = std::norm(U(n - 1, 0));
  });
  parallel_paths(static_cast<std::size_t>(paths), [&](std::size_t pi) {
    PathRng rng(seed, static_cast<std::uint64_t>(paths) + pi);
    lam_s[pi] = run_radial_clock(simplex_center(n), t_end, opt, rng).lambda(0);
  });

  const double ks = ks_two_sample(lam_u, lam_s);
  emit_quantiles(dat(dir, "radial-agreement_quantiles.dat"),
                 {"lambda1_unitary", "lambda1_sde"}, {lam_u, lam_s}, artifacts);
  if (store) {
    std::vector<std::vector<double>> rows;
    for (long p = 0; p < paths; ++p)
      rows.push_back({static_cast<double>(p), lam_u[p], lam_s[p]});
    emit(dat(dir, "radial-agreement_samples.dat"),
         {"path", "lambda1_unitary", "lambda1_sde"}, rows, artifacts);
  }

  Verdicts v;
  v.push_back(
      TestVerdict::make("radial_two_route_ks", ks, 0.02, seed, 2 * paths));
  return v;
}

// ---------------------------------------------------------------------------
// stationarity: lambda_1 at a long horizon against its Beta(1, n-1) marginal
// under the uniform stationary law

Verdicts exp_stationarity(const ExperimentConfig& cfg, const std::string& dir,
                          std::vector<std::string>& artifacts) {
  const int n = static_cast<int>(cfg.get_long("n", 3));
  const double t_end = cfg.get_double("t_end", 5.0);
  const long paths = cfg.get_long("paths", 50000);
  const std::uint64_t seed = cfg.get_seed(404);
  const bool store = cfg.get_long("store", 0) != 0;
  require(n >= 2 && t_end > 0 && paths > 0,
          "stationarity: need n >= 2, t_end > 0, paths > 0");
  const RadialOptions opt = radial_options(cfg);

  std::vector<double> lam(paths);
  parallel_paths(static_cast<std::size_t>(paths), [&](std::size_t pi) {
    PathRng rng(seed, pi);
    lam[pi] = run_radial_clock(simplex_center(n), t_end, opt, rng).lambda(0);
  });

  const double shape = n - 1.0;
  const double ks = ks_statistic(lam, [shape](double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return 1.0 - std::pow(1.0 - x, shape);
  });
  emit_histogram(dat(dir, "stationarity_hist.dat"), lam, 0.0, 1.0, 50,
                 artifacts);
  if (store) {
    std::vector<std::vector<double>> rows;
    for (long p = 0; p < paths; ++p)
      rows.push_back({static_cast<double>(p), lam[p]});
    emit(dat(dir, "stationarity_samples.dat"), {"path", "lambda1"}, rows,
         artifacts);
  }

  Verdicts v;
  v.push_back(TestVerdict::make("stationarity_ks", ks, 0.015, seed, paths));
  return v;
}

// ---------------------------------------------------------------------------
// jacobi-spectral: orthonormality, eigenfunction residuals, heat-kernel mass,
// Chapman-Kolmogorov

Verdicts exp_jacobi_spectral(const ExperimentConfig& cfg,
                             const std::string& dir,
                             std::vector<std::string>& artifacts) {
  const std::uint64_t seed = cfg.get_seed(505);
  const double tol = cfg.get_double("tol", 1e-9);

  struct SetSpec {
    std::string tag;
    Eigen::VectorXd kappa;
  };
  std::vector<SetSpec> sets;
  if (cfg.has("kappa")) {
    const Eigen::VectorXd kp = cfg.get_vector("kappa", Eigen::VectorXd());
    require(kp.size() >= 2, "jacobi-spectral: kappa needs >= 2 entries");
    if (cfg.has("n"))
      require(cfg.get_long("n", 0) == kp.size(),
              "jacobi-spectral: n and kappa length disagree");
    sets.push_back({"custom", kp});
  } else {
    sets.push_back({"n2_half", Eigen::VectorXd::Constant(2, 0.5)});
    sets.push_back({"n3_half", Eigen::VectorXd::Constant(3, 0.5)});
    Eigen::VectorXd mixed(3);
    mixed << 0.5, 1.5, 1.0;
    sets.push_back({"n3_mixed", mixed});
  }

  Verdicts v;
  std::vector<std::vector<double>> summary;
  for (std::size_t si = 0; si < sets.size(); ++si) {
    const JacobiParams p{sets[si].kappa};
    const std::string& tag = sets[si].tag;
    const int n = p.n();
    const int d = n - 1;

    const Eigen::VectorXd xc = Eigen::VectorXd::Constant(d, 1.0 / n);
    Eigen::VectorXd xo(d);
    if (d == 1)
      xo << 0.3;
    else {
      xo.setZero();
      xo(0) = 0.2;
      xo(1) = 0.3;
      for (int j = 2; j < d; ++j) xo(j) = 0.4 / (d - 1);
    }

    SimplexBasis basis(p, 3);
    const auto& idx = basis.indices();
    const long nb = static_cast<long>(idx.size());

    // orthonormality against the weight, by an exact product rule
    const Quadrature q6 = simplex_quadrature(p, 6);
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(nb, nb);
    for (long r = 0; r < q6.weights.size(); ++r) {
      const Eigen::VectorXd vals = basis.evaluate(q6.nodes.row(r));
      gram.noalias() += q6.weights(r) * vals * vals.transpose();
    }
    gram -= Eigen::MatrixXd::Identity(nb, nb);
    const double stat_gram = gram.cwiseAbs().maxCoeff();

    // finite-difference eigenfunction residuals at two interior points
    double stat_eig = 0.0;
    for (const Eigen::VectorXd& x : {xc, xo}) {
      for (long i = 0; i < nb; ++i) {
        const double val = basis.evaluate_one(i, x);
        const double eig = eigenvalue(p, degree(idx[i]));
        const double fd = apply_generator_fd(
            p,
            [&](const Eigen::VectorXd& y) { return basis.evaluate_one(i, y); },
            x);
        stat_eig = std::max(stat_eig, std::abs(fd - eig * val) /
                                          std::max(1.0, std::abs(eig * val)));
      }
    }

    // heat-kernel mass at three horizons and two base points
    double stat_mass = 0.0;
    for (double t : {0.25, 0.5, 1.0}) {
      for (const Eigen::VectorXd& x : {xc, xo}) {
        const KernelResult probe = heat_kernel(p, t, x, xc, tol);
        const Quadrature qm = simplex_quadrature(p, probe.max_degree + 2);
        double mass = 0.0;
        for (long r = 0; r < qm.weights.size(); ++r)
          mass += qm.weights(r) * heat_kernel(p, t, x, qm.nodes.row(r), tol).value;
        stat_mass = std::max(stat_mass, std::abs(mass - 1.0));
      }
    }

    v.push_back(
        TestVerdict::make("jacobi_gram_" + tag, stat_gram, 1e-8, seed, 0));
    v.push_back(TestVerdict::make("jacobi_eigen_residual_" + tag, stat_eig,
                                  1e-4, seed, 0));
    v.push_back(TestVerdict::make("jacobi_heat_mass_" + tag, stat_mass, 1e-6,
                                  seed, 0));

    double stat_ck = 0.0;
    if (n == 2) {
      const double lhs = heat_kernel(p, 0.5, xc, xo, tol).value;
      const KernelResult probe = heat_kernel(p, 0.25, xc, xo, tol);
      const Quadrature qc = simplex_quadrature(p, 2 * probe.max_degree + 2);
      double rhs = 0.0;
      for (long r = 0; r < qc.weights.size(); ++r) {
        const Eigen::VectorXd z = qc.nodes.row(r);
        rhs += qc.weights(r) * heat_kernel(p, 0.25, xc, z, tol).value *
               heat_kernel(p, 0.25, z, xo, tol).value;
      }
      stat_ck = std::abs(lhs - rhs);
      v.push_back(TestVerdict::make("jacobi_chapman_kolmogorov_" + tag,
                                    stat_ck, 1e-6, seed, 0));
    }
    summary.push_back({static_cast<double>(si), static_cast<double>(n),
                       stat_gram, stat_eig, stat_mass, stat_ck});
  }
  emit(dat(dir, "jacobi-spectral_summary.dat"),
       {"set", "n", "gram_gap", "eigen_residual", "mass_gap", "ck_gap"},
       summary, artifacts);
  return v;
}

// ---------------------------------------------------------------------------
// cf-compare: empirical CF of the areas against the spectral formula

Verdicts exp_cf_compare(const ExperimentConfig& cfg, const std::string& dir,
                        std::vector<std::string>& artifacts) {
  const int n = static_cast<int>(cfg.get_long("n", 2));
  const double t_end = cfg.get_double("t_end", 0.5);
  const double dt = cfg.get_double("dt", 1e-3);
  const long paths = cfg.get_long("paths", 200000);
  const std::uint64_t seed = cfg.get_seed(606);
  const bool store = cfg.get_long("store", 0) != 0;
  require(n >= 2 && dt > 0 && t_end > 0 && paths > 0,
          "cf-compare: need n >= 2, dt > 0, t_end > 0, paths > 0");
  const Eigen::VectorXd lambda0 =
      cfg.get_vector("lambda0", simplex_center(n));
  require(lambda0.size() == n && lambda0.minCoeff() > 0 &&
              std::abs(lambda0.sum() - 1.0) < 1e-9,
          "cf-compare: lambda0 must be interior and sum to 1");
  const auto grid = cfg.get_grid("u_grid", n, "pm:1,2");

  std::vector<Eigen::VectorXd> samples(paths);
  const Eigen::MatrixXcd U0 = start_with_lambda(lambda0);
  parallel_paths(static_cast<std::size_t>(paths), [&](std::size_t pi) {
    PathRng rng(seed, pi);
    UnitaryStepper stepper(n);
    SkewHermitianIncrement inc{Eigen::MatrixXcd::Zero(n, n), dt};
    Eigen::MatrixXcd U = U0;
    FlagPoint cur = project_to_flag(U);
    FlagPoint next = cur;
    AreaAccumulator acc(cur);
    const long steps = std::lround(t_end / dt);
    for (long k = 0; k < steps; ++k) {
      sample_increment_into(inc, rng);
      stepper.apply(U, inc.A);
      project_to_flag_into(U, next);
      acc.step(next, dt);
      std::swap(cur, next);
    }
    samples[pi] = acc.state().theta;
  });

  const EmpiricalCF emp = empirical_cf(samples, grid);
  double stat = -1.0;
  std::vector<std::vector<double>> rows;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const CFResult analytic = unconditional_cf(grid[g], t_end, lambda0);
    const double gap = std::abs(analytic.value - emp.values[g]);
    stat = std::max(stat, gap - 3.0 * emp.stderrs[g]);
    std::vector<double> row;
    for (int j = 0; j < n; ++j) row.push_back(grid[g](j));
    row.push_back(analytic.value);
    row.push_back(emp.values[g].real());
    row.push_back(emp.stderrs[g]);
    rows.push_back(std::move(row));
  }
  std::vector<std::string> cols;
  for (int j = 1; j <= n; ++j) cols.push_back("u" + std::to_string(j));
  cols.insert(cols.end(), {"analytic", "empirical_re", "stderr"});
  emit(dat(dir, "cf-compare_grid.dat"), cols, rows, artifacts);
  if (store) {
    std::vector<std::vector<double>> srows;
    for (long p = 0; p < paths; ++p) {
      std::vector<double> r{static_cast<double>(p)};
      for (int j = 0; j < n; ++j) r.push_back(samples[p](j));
      srows.push_back(std::move(r));
    }
    std::vector<std::string> scols{"path"};
    for (int j = 1; j <= n; ++j) scols.push_back("theta_" + std::to_string(j));
    emit(dat(dir, "cf-compare_samples.dat"), scols, srows, artifacts);
  }

  Verdicts v;
  v.push_back(TestVerdict::make("cf_grid_agreement", stat, 5e-3, seed, paths));
  return v;
}

// ---------------------------------------------------------------------------
// area-limit: theta(t)/t against the independent-Cauchy limit, via the radial
// clock and the conditional Gaussian law

Verdicts exp_area_limit(const ExperimentConfig& cfg, const std::string& dir,
                        std::vector<std::string>& artifacts) {
  const int n = static_cast<int>(cfg.get_long("n", 2));
  const double t_end = cfg.get_double("t_end", 30.0);
  const long paths = cfg.get_long("paths", 20000);
  const std::uint64_t seed = cfg.get_seed(707);
  const bool store = cfg.get_long("store", 0) != 0;
  require(n >= 2 && t_end > 0 && paths > 0,
          "area-limit: need n >= 2, t_end > 0, paths > 0");
  const RadialOptions opt = radial_options(cfg);
  const auto grid = cfg.get_grid("u_grid", n, "pm:0.5,1");

  std::vector<Eigen::VectorXd> clocks(paths);
  std::vector<double> theta1_scaled(paths);
  parallel_paths(static_cast<std::size_t>(paths), [&](std::size_t pi) {
    PathRng rng(seed, pi);
    const RadialClockState rc =
        run_radial_clock(simplex_center(n), t_end, opt, rng);
    clocks[pi] = rc.diag_clock;
    theta1_scaled[pi] =
        std::sqrt(std::max(0.0, rc.diag_clock(0))) * rng.gaussian() / t_end;
  });

  const double scale = n - 1.0;
  const double ks = ks_statistic(
      theta1_scaled, [scale](double x) { return cauchy_cdf(x, scale); });

  double stat_cf = 0.0;
  std::vector<std::vector<double>> rows;
  for (const auto& u : grid) {
    double s = 0.0, s2 = 0.0;
    for (long p = 0; p < paths; ++p) {
      const double vcf = conditional_cf_given_clock(clocks[p], u, t_end, nullptr);
      s += vcf;
      s2 += vcf * vcf;
    }
    const double mean = s / paths;
    const double var = (s2 - paths * mean * mean) / (paths - 1.0);
    const double se = std::sqrt(std::max(0.0, var) / paths);
    const double lim = limit_cf(u);
    stat_cf = std::max(stat_cf, std::abs(mean - lim));
    std::vector<double> row;
    for (int j = 0; j < n; ++j) row.push_back(u(j));
    row.insert(row.end(), {lim, mean, se});
    rows.push_back(std::move(row));
  }
  std::vector<std::string> cols;
  for (int j = 1; j <= n; ++j) cols.push_back("u" + std::to_string(j));
  cols.insert(cols.end(), {"limit", "conditional_mean", "stderr"});
  emit(dat(dir, "area-limit_cf.dat"), cols, rows, artifacts);
  emit_quantiles(dat(dir, "area-limit_quantiles.dat"), {"theta1_over_t"},
                 {theta1_scaled}, artifacts);
  if (store) {
    std::vector<std::vector<double>> srows;
    for (long p = 0; p < paths; ++p) {
      std::vector<double> r{static_cast<double>(p)};
      for (int j = 0; j < n; ++j) r.push_back(clocks[p](j));
      r.push_back(theta1_scaled[p]);
      srows.push_back(std::move(r));
    }
    std::vector<std::string> scols{"path"};
    for (int j = 1; j <= n; ++j) scols.push_back("clock_" + std::to_string(j));
    scols.push_back("theta1_over_t");
    emit(dat(dir, "area-limit_samples.dat"), scols, srows, artifacts);
  }

  const std::string suffix = "_n" + std::to_string(n);
  Verdicts v;
  v.push_back(
      TestVerdict::make("area_limit_ks" + suffix, ks, 0.02, seed, paths));
  v.push_back(
      TestVerdict::make("area_limit_cf" + suffix, stat_cf, 0.03, seed, paths));
  return v;
}

// ---------------------------------------------------------------------------
// winding-limit: eta(t)/t for deformed-sphere windings against the same
// Cauchy limit, for two deformation choices (the limit ignores mu)

Verdicts exp_winding_limit(const ExperimentConfig& cfg, const std::string& dir,
                           std::vector<std::string>& artifacts) {
  const int n = static_cast<int>(cfg.get_long("n", 2));
  const double t_end = cfg.get_double("t_end", 30.0);
  const long paths = cfg.get_long("paths", 20000);
  const std::uint64_t seed = cfg.get_seed(808);
  require(n >= 2 && t_end > 0 && paths > 0,
          "winding-limit: need n >= 2, t_end > 0, paths > 0");
  const RadialOptions opt = radial_options(cfg);
  const auto grid = cfg.get_grid("u_grid", n, "pm:0.5,1");

  struct MuSet {
    std::string tag;
    Eigen::VectorXd mu;
  };
  std::vector<MuSet> mus;
  if (cfg.has("mu")) {
    const Eigen::VectorXd mu = cfg.get_vector("mu", Eigen::VectorXd());
    require(mu.size() == n && mu.minCoeff() > 0,
            "winding-limit: mu needs n positive entries");
    mus.push_back({"custom", mu});
  } else {
    mus.push_back({"unit", Eigen::VectorXd::Ones(n)});
    Eigen::VectorXd ht(n);
    for (int j = 0; j < n; ++j) ht(j) = (j % 2 == 0) ? 0.5 : 2.0;
    mus.push_back({"half_two", ht});
  }

  std::vector<Eigen::VectorXd> clocks(paths);
  parallel_paths(static_cast<std::size_t>(paths), [&](std::size_t pi) {
    PathRng rng(seed, pi);
    clocks[pi] =
        run_radial_clock(simplex_center(n), t_end, opt, rng).diag_clock;
  });

  Verdicts v;
  std::vector<std::vector<double>> rows;
  for (const auto& ms : mus) {
    double stat_cf = 0.0;
    for (const auto& u : grid) {
      double s = 0.0, s2 = 0.0;
      for (long p = 0; p < paths; ++p) {
        const double vcf =
            conditional_cf_given_clock(clocks[p], u, t_end, &ms.mu);
        s += vcf;
        s2 += vcf * vcf;
      }
      const double mean = s / paths;
      const double var = (s2 - paths * mean * mean) / (paths - 1.0);
      const double se = std::sqrt(std::max(0.0, var) / paths);
      const double lim = limit_cf(u);
      stat_cf = std::max(stat_cf, std::abs(mean - lim));
      std::vector<double> row;
      for (int j = 0; j < n; ++j) row.push_back(u(j));
      row.insert(row.end(),
                 {static_cast<double>(&ms - mus.data()), lim, mean, se});
      rows.push_back(std::move(row));
    }
    v.push_back(TestVerdict::make("winding_cf_mu_" + ms.tag, stat_cf, 0.03,
                                  seed, paths));
  }
  std::vector<std::string> cols;
  for (int j = 1; j <= n; ++j) cols.push_back("u" + std::to_string(j));
  cols.insert(cols.end(), {"mu_set", "limit", "conditional_mean", "stderr"});
  emit(dat(dir, "winding-limit_cf.dat"), cols, rows, artifacts);
  return v;
}

// ---------------------------------------------------------------------------
// spitzer: winding and clock functionals of flat complex Brownian motion at a
// log-scale horizon

Verdicts exp_spitzer(const ExperimentConfig& cfg, const std::string& dir,
                     std::vector<std::string>& artifacts) {
  const int n = static_cast<int>(cfg.get_long("n", 2));
  const double t_end = cfg.get_double("t_end", std::exp(10.0));
  const long paths = cfg.get_long("paths", 10000);
  const std::uint64_t seed = cfg.get_seed(909);
  const bool store = cfg.get_long("store", 0) != 0;
  require(n >= 2 && t_end > 1.0 && paths > 0,
          "spitzer: need n >= 2, t_end > 1, paths > 0");
  SpitzerOptions opt;
  opt.target_phase_var = cfg.get_double("phase_var", opt.target_phase_var);
  opt.max_steps = cfg.get_long("max_steps", opt.max_steps);
  require(opt.target_phase_var > 0 && opt.max_steps > 0,
          "spitzer: need phase_var > 0 and max_steps > 0");

  std::vector<double> zeta1(paths), clock(paths);
  std::vector<long> steps(paths);
  std::vector<char> aborted(paths);
  const Eigen::VectorXcd z0 = Eigen::VectorXcd::Ones(n);
  parallel_paths(static_cast<std::size_t>(paths), [&](std::size_t pi) {
    PathRng rng(seed, pi);
    const SpitzerState s = simulate_spitzer(z0, t_end, opt, rng);
    zeta1[pi] = s.zeta(0);
    clock[pi] = s.clock;
    steps[pi] = s.steps;
    aborted[pi] = s.aborted ? 1 : 0;
  });

  const double lnt = std::log(t_end);
  std::vector<double> wind_scaled, clock_scaled;
  long n_aborted = 0;
  for (long p = 0; p < paths; ++p) {
    if (aborted[p]) {
      ++n_aborted;
      continue;
    }
    wind_scaled.push_back(2.0 * zeta1[p] / lnt);
    clock_scaled.push_back(clock[p] / lnt);
  }
  const long used = paths - n_aborted;
  require(used >= 100, "spitzer: too many aborted paths");

  const double clock_target = 1.0 / (2.0 * (n - 1.0));
  const double stat_median =
      std::abs(sample_median(clock_scaled) - clock_target);

  const EmpiricalCF cf = empirical_cf_1d(wind_scaled, {1.0});
  const double stat_cf = std::abs(cf.values[0] - std::exp(-1.0));

  emit_quantiles(dat(dir, "spitzer_quantiles.dat"),
                 {"winding_scaled", "clock_scaled"},
                 {wind_scaled, clock_scaled}, artifacts);
  if (store) {
    std::vector<std::vector<double>> rows;
    for (long p = 0; p < paths; ++p)
      rows.push_back({static_cast<double>(p), zeta1[p], clock[p],
                      static_cast<double>(steps[p]),
                      static_cast<double>(aborted[p])});
    emit(dat(dir, "spitzer_samples.dat"),
         {"path", "zeta1", "clock", "steps", "aborted"}, rows, artifacts);
  }

  Verdicts v;
  v.push_back(TestVerdict::make("spitzer_clock_median", stat_median,
                                0.15 * clock_target, seed, used));
  v.push_back(
      TestVerdict::make("spitzer_winding_cf", stat_cf, 0.05, seed, used));
  return v;
}

}  // namespace

bool RunReport::all_pass() const {
  if (verdicts.empty()) return false;
  for (const auto& v : verdicts)
    if (!v.pass) return false;
  return true;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{
      "unitary-check",  "qv-check",       "radial-agreement",
      "stationarity",   "jacobi-spectral", "cf-compare",
      "area-limit",     "winding-limit",   "spitzer"};
  return names;
}

RunReport run_experiment(const ExperimentConfig& cfg) {
  const auto& names = experiment_names();
  require(std::find(names.begin(), names.end(), cfg.experiment) != names.end(),
          "unknown experiment: " + cfg.experiment);

  RunReport rep;
  rep.config = cfg;
  const std::string dir = cfg.out_dir();
  const auto t0 = std::chrono::steady_clock::now();

  if (cfg.experiment == "unitary-check")
    rep.verdicts = exp_unitary_check(cfg, dir, rep.artifacts);
  else if (cfg.experiment == "qv-check")
    rep.verdicts = exp_qv_check(cfg, dir, rep.artifacts);
  else if (cfg.experiment == "radial-agreement")
    rep.verdicts = exp_radial_agreement(cfg, dir, rep.artifacts);
  else if (cfg.experiment == "stationarity")
    rep.verdicts = exp_stationarity(cfg, dir, rep.artifacts);
  else if (cfg.experiment == "jacobi-spectral")
    rep.verdicts = exp_jacobi_spectral(cfg, dir, rep.artifacts);
  else if (cfg.experiment == "cf-compare")
    rep.verdicts = exp_cf_compare(cfg, dir, rep.artifacts);
  else if (cfg.experiment == "area-limit")
    rep.verdicts = exp_area_limit(cfg, dir, rep.artifacts);
  else if (cfg.experiment == "winding-limit")
    rep.verdicts = exp_winding_limit(cfg, dir, rep.artifacts);
  else
    rep.verdicts = exp_spitzer(cfg, dir, rep.artifacts);

  const std::string report_path = dir + "/" + cfg.experiment + "_report.txt";
  write_report(report_path, rep.verdicts);
  rep.artifacts.push_back(report_path);

  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return rep;
}

}  // namespace flagsim
