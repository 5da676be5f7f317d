// Acceptance gate: one pass/fail line per criterion, exit 0 only if all pass.
// Tolerances are pinned here and cross-checked against the verdicts the
// experiments emit, so a silent threshold change in the library fails loudly.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "flagsim/experiments.hpp"
#include "flagsim/io.hpp"

namespace fs = std::filesystem;
using flagsim::ExperimentConfig;
using flagsim::RunReport;
using flagsim::TestVerdict;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& what,
            double seconds) {
  std::printf("criterion %2d: %s  %s  (%.1f s)\n", criterion,
              pass ? "PASS" : "FAIL", what.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++failures;
}

void report_error(int criterion, const std::string& what,
                  const std::string& err) {
  std::printf("criterion %2d: FAIL  %s  (error: %s)\n", criterion, what.c_str(),
              err.c_str());
  std::fflush(stdout);
  ++failures;
}

fs::path out_root() {
  static const fs::path root = [] {
    fs::path p = "acceptance_out";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

RunReport run(const std::string& experiment, const std::string& subdir,
              const std::map<std::string, std::string>& kv = {}) {
  ExperimentConfig cfg;
  cfg.experiment = experiment;
  for (const auto& [k, v] : kv) cfg.set(k, v);
  cfg.set("out", (out_root() / subdir).string());
  return flagsim::run_experiment(cfg);
}

// A verdict passes the gate only if it passed and its threshold equals the
// value pinned in this file.
bool gate(const RunReport& rep, const std::string& name, double threshold) {
  for (const auto& v : rep.verdicts)
    if (v.name == name) return v.pass && v.threshold == threshold;
  return false;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  // 1 + 2: unitarity drift and simplex closure over one long ensemble.
  try {
    const RunReport rep = run("unitary-check", "unitary");
    report(1, gate(rep, "unitarity_frobenius", 1e-8),
           "max |U*U - I|_F <= 1e-8 (n=3, dt=1e-3, t_end=10, 100 paths)",
           rep.wall_seconds);
    report(2, gate(rep, "simplex_sum_gap", 1e-12),
           "radial coordinates sum to 1 within 1e-12 at every step",
           rep.wall_seconds);
  } catch (const std::exception& e) {
    report_error(1, "unitarity drift", e.what());
    report_error(2, "simplex closure", e.what());
  }

  // 3: realized quadratic variation against the closed-form rates.
  try {
    const RunReport rep = run("qv-check", "qv");
    const bool pass = gate(rep, "qv_chart_rate", 0.10) &&
                      gate(rep, "qv_area_diag_rate", 0.10) &&
                      gate(rep, "qv_area_cross_rate", 0.10);
    report(3, pass,
           "windowed realized rates within 10% (n=2, dt=1e-4, t=0.2, 1000 "
           "paths)",
           rep.wall_seconds);
  } catch (const std::exception& e) {
    report_error(3, "quadratic variation rates", e.what());
  }

  // 4: spectral toolkit: orthonormality, eigenfunctions, kernel mass, CK.
  try {
    const RunReport rep = run("jacobi-spectral", "jacobi");
    bool pass = !rep.verdicts.empty();
    for (const auto& v : rep.verdicts) {
      double want = 0.0;
      if (v.name.rfind("jacobi_gram_", 0) == 0) want = 1e-8;
      else if (v.name.rfind("jacobi_eigen_residual_", 0) == 0) want = 1e-4;
      else if (v.name.rfind("jacobi_heat_mass_", 0) == 0) want = 1e-6;
      else if (v.name.rfind("jacobi_chapman_kolmogorov_", 0) == 0) want = 1e-6;
      pass = pass && v.pass && v.threshold == want;
    }
    report(4, pass,
           "gram 1e-8, eigenresiduals 1e-4, kernel mass 1e-6, CK 1e-6",
           rep.wall_seconds);
  } catch (const std::exception& e) {
    report_error(4, "jacobi spectral suite", e.what());
  }

  // 5: law of lambda_1(1) from the unitary route vs the radial SDE route.
  try {
    const RunReport rep = run("radial-agreement", "radial");
    report(5, gate(rep, "radial_two_route_ks", 0.02),
           "two-route CDF sup-distance <= 0.02 (n=3, 5e4 paths per route)",
           rep.wall_seconds);
  } catch (const std::exception& e) {
    report_error(5, "radial two-route agreement", e.what());
  }

  // 6: long-run law of lambda_1 against the flat stationary measure.
  try {
    const RunReport rep = run("stationarity", "stationarity");
    report(6, gate(rep, "stationarity_ks", 0.015),
           "KS vs Beta(1,2) <= 0.015 (n=3, t=5, 5e4 paths)", rep.wall_seconds);
  } catch (const std::exception& e) {
    report_error(6, "stationarity", e.what());
  }

  // 7: closed-form area CF against the simulated empirical CF.
  try {
    const RunReport rep = run("cf-compare", "cf");
    report(7, gate(rep, "cf_grid_agreement", 5e-3),
           "|analytic - empirical| <= 3 SE + 5e-3 on {+-1,+-2}^2 (2e5 paths)",
           rep.wall_seconds);
  } catch (const std::exception& e) {
    report_error(7, "characteristic function agreement", e.what());
  }

  // 8: Cauchy limit of theta_1(t)/t for n = 2 and n = 3.
  try {
    const RunReport rep2 = run("area-limit", "area_n2", {{"n", "2"}});
    const RunReport rep3 = run("area-limit", "area_n3", {{"n", "3"}});
    const bool pass = gate(rep2, "area_limit_ks_n2", 0.02) &&
                      gate(rep2, "area_limit_cf_n2", 0.03) &&
                      gate(rep3, "area_limit_ks_n3", 0.02) &&
                      gate(rep3, "area_limit_cf_n3", 0.03);
    report(8, pass,
           "KS vs Cauchy(n-1) <= 0.02 and CF gap <= 0.03 (t=30, 2e4 paths)",
           rep2.wall_seconds + rep3.wall_seconds);
  } catch (const std::exception& e) {
    report_error(8, "area Cauchy limit", e.what());
  }

  // 9: deformed-sphere winding limit is mu-independent.
  try {
    const RunReport rep = run("winding-limit", "winding");
    const bool pass = gate(rep, "winding_cf_mu_unit", 0.03) &&
                      gate(rep, "winding_cf_mu_half_two", 0.03);
    report(9, pass,
           "winding CF gap <= 0.03 for mu=(1,1) and mu=(0.5,2) (t=30)",
           rep.wall_seconds);
  } catch (const std::exception& e) {
    report_error(9, "sphere winding limit", e.what());
  }

  // 10: flat-plane winding and clock functionals at a log-scale horizon.
  try {
    const RunReport rep = run("spitzer", "spitzer");
    const bool pass = gate(rep, "spitzer_clock_median", 0.15 * 0.5) &&
                      gate(rep, "spitzer_winding_cf", 0.05);
    report(10, pass,
           "clock median within 15% of 1/2, winding CF within 0.05 of e^-1",
           rep.wall_seconds);
  } catch (const std::exception& e) {
    report_error(10, "flat winding functionals", e.what());
  }

  // 11: bitwise determinism of artifacts under a fixed seed.
  try {
    const std::map<std::string, std::string> kv{{"n", "2"},
                                                {"dt", "0.01"},
                                                {"t_end", "0.2"},
                                                {"paths", "50"},
                                                {"seed", "7777"}};
    const RunReport ra = run("unitary-check", "det_a", kv);
    const RunReport rb = run("unitary-check", "det_b", kv);
    bool pass = ra.artifacts.size() == rb.artifacts.size() &&
                !ra.artifacts.empty();
    for (std::size_t i = 0; pass && i < ra.artifacts.size(); ++i) {
      const std::string a = slurp(ra.artifacts[i]);
      const std::string b = slurp(rb.artifacts[i]);
      pass = !a.empty() && a == b;
    }
    report(11, pass, "repeated fixed-seed runs are byte-identical",
           ra.wall_seconds + rb.wall_seconds);
  } catch (const std::exception& e) {
    report_error(11, "determinism", e.what());
  }

  std::printf("%s (%d of 11 criteria failed)\n",
              failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL", failures);
  return failures == 0 ? 0 : 1;
}
