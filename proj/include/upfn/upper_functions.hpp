#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "upfn/bandwidth.hpp"
#include "upfn/kernel.hpp"

namespace upfn {

struct LambdaTableEntry {
  double omega = 0.0, mu = 0.0, value = 0.0;
};

// All scalar parameters and tolerances feeding the envelope constants.
struct UpperFnConfig {
  double p = 2.0, q = 2.0;     // norm order and moment order
  double epsilon = 0.018315638888734179;  // e^{-4}
  double b = 0.5;
  int d = 1;
  double h_base = 0.1353352832366127;  // e^{-2}
  double tau = 0.5;
  double class_bound = 2.0;  // script-L
  double A = 8886110.520507872;  // e^{16}

  // resolution / truncation knobs
  double quad_div = 512.0;      // kernel quadrature step = a / quad_div
  double series_rel_tol = 1e-10;
  int omega_grid = 64;
  int r_scan_cap = 200;   // envelope scans
  int r_a_cap = 10000;    // membership scan
  int table_depth = 6;    // rows in the reported constant tables
  bool check_omega_refinement = true;

  // externally supplied constants
  std::optional<double> lambda_star_scalar;
  std::vector<LambdaTableEntry> lambda_star_table;           // (omega, mu, value)
  std::optional<double> lambda_star_d_scalar;
  std::vector<std::pair<int, double>> lambda_star_d_table;   // (r, value)
  std::optional<double> maximal_const;  // c(d); default 2 * 5^{d/2}
  double C_tilde = 1.0;
  int calibration_budget = 48;
  std::uint64_t calibration_seed = 20240801;

  double q_tilde() const { return (q / p) > 1.0 ? (q / p) : 1.0; }
  double maximal_const_value() const;
};

struct C2Breakdown {
  int r = 0;
  double mu = 0.0;
  double R_mu = 0.0;
  double C_mu = 0.0;
  double omega1 = 0.0, omega2 = 0.0;  // minimising pair
  double C_tilde_mu = 0.0;
  double C_hat_mu = 0.0;
  double value = 0.0;
  bool lambda_calibrated = false;
  double refinement_rel_change = 0.0;
};

struct C2StarBreakdown {
  int r = 0;
  double gamma_r = 0.0;
  double alpha = 0.0;
  double T_star = 0.0;
  double T = 0.0;
  double lambda_d = 0.0;
  double value = 0.0;
  bool lambda_calibrated = false;
};

struct PsiResult {
  double value = 0.0;
  int argmin_r = 0;
  bool relation_warning = false;  // the net/thickness parameter relation failed
  std::vector<std::pair<int, double>> scanned;  // (r, candidate value)
};

struct CombinedPsi {
  double value = 0.0;
  std::string branch;           // which envelope achieved the minimum
  double psi_eps_value = 0.0;
  std::optional<double> second_value;
  bool second_available = false;
};

enum class MomentBound { Level, ClassNet, Isotropic, IsotropicProofVariant, Combined, CombinedIsotropic };

struct ConstantsReport {
  // echo of the configuration
  double p = 0, q = 0, epsilon = 0, b = 0, tau = 0, class_bound = 0, A = 0, h_base = 0;
  int d = 1;
  std::string kernel_id;
  double kernel_a = 0, kernel_L = 0;

  double C1 = 0, C3 = 0, C4 = 0, C5 = 0, sigma_star = 0, gamma_q1 = 0;
  int c4_truncation_r = 0;
  int c5_truncation_r = 0, c5_truncation_l = 0;
  std::vector<C2Breakdown> c2_table;
  std::vector<C2StarBreakdown> c2_star_table;
  bool c2_table_tail_increasing = false;       // divergence check past the argmin
  bool c2_star_table_tail_increasing = false;
  double bound_t1 = 0, bound_t2 = 0, bound_t3 = 0, bound_t3_proof_variant = 0;
  double bound_cor1 = 0, bound_cor2 = 0;
  std::vector<std::string> provenance;
  std::string to_json(int indent = 2) const;
};

// Deterministic evaluator for every envelope constant; kernel norms,
// entropy-constant lookups and per-r breakdowns are memoised.
class ConstantsEngine {
 public:
  ConstantsEngine(UpperFnConfig cfg, Kernel kernel);

  const UpperFnConfig& config() const { return cfg_; }
  const Kernel& kernel() const { return kernel_; }

  double c1();
  double c3();             // gamma-form closed expression (cross-checked)
  double c3_quadrature();  // independent log-substitution quadrature
  C2Breakdown c2(int r);
  double c4();
  int c4_truncation_index();
  double sigma_star();
  double c5();
  C2StarBreakdown c2_star(int r);

  double psi_eps(const MultiBandwidth& h);
  PsiResult psi(const MultiBandwidth& h);
  PsiResult psi_exhaustive(const MultiBandwidth& h, int r_max);  // oracle: no early stop
  PsiResult psi_star(const MultiBandwidth& h);
  PsiResult psi_star_exhaustive(const MultiBandwidth& h, int r_max);
  CombinedPsi combined_psi(const MultiBandwidth& h, bool isotropic_branch = false);

  double moment_bound(MomentBound which);
  double log_moment_bound_class(double h_base, double A) const;  // ln of the bound, overflow-safe

  // ||K||_m and factor norms at the configured step (memoised, gate-checked).
  double kernel_norm_at(double m);
  double factor_norm_at(double m);
  double deriv_sup();  // C(K)

  double lambda_star(double omega, double mu, bool* calibrated = nullptr);
  double lambda_star_d(int r, bool* calibrated = nullptr);

  // provenance of externally supplied constants; reflects only work done so
  // far and never triggers new computation
  std::vector<std::string> provenance_lines() const;
  ConstantsReport report();

 private:
  UpperFnConfig cfg_;
  Kernel kernel_;
  std::map<double, double> norm_cache_, factor_norm_cache_;
  std::map<std::pair<std::int64_t, std::int64_t>, double> lambda_cache_;
  std::map<int, double> lambda_d_cache_;
  std::map<int, C2Breakdown> c2_cache_;
  std::map<int, C2StarBreakdown> c2_star_cache_;
  std::optional<double> c1_, c3_, c4_, c5_, sigma_star_, deriv_sup_;
  int c4_trunc_ = 0, c5_trunc_r_ = 0, c5_trunc_l_ = 0;
  bool lambda_was_calibrated_ = false;
  bool lambda_d_was_calibrated_ = false;

  double mu_of(int r) const;
  double c_mu(int r, double mu, double R_mu, int grid, double* omega1, double* omega2,
              bool* calibrated);
  double gauss_tail_power_integral(double power, double scale, double shift) const;
};

// Single-shot helpers mirroring the engine methods.
double const_C1(const UpperFnConfig& cfg, const Kernel& k);
double const_C3(const UpperFnConfig& cfg, const Kernel& k);

}  // namespace upfn
