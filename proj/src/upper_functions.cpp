#include "upfn/upper_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "upfn/entropy.hpp"
#include "upfn/quadrature.hpp"

#include "json.hpp"

namespace upfn {

namespace {
constexpr double kPi = std::numbers::pi;

double pow_int(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}
}  // namespace

double UpperFnConfig::maximal_const_value() const {
  // Any valid upper bound for the (2,2) maximal constant keeps the envelope
  // an upper function; this default only loosens it.
  return maximal_const.value_or(2.0 * std::pow(5.0, static_cast<double>(d) / 2.0));
}

ConstantsEngine::ConstantsEngine(UpperFnConfig cfg, Kernel kernel)
    : cfg_(std::move(cfg)), kernel_(std::move(kernel)) {
  if (!(cfg_.p >= 1.0)) throw std::domain_error("ConstantsEngine: p must be >= 1");
  if (!(cfg_.q >= 1.0)) throw std::domain_error("ConstantsEngine: q must be >= 1");
  if (!(cfg_.epsilon > 0.0 && cfg_.epsilon < std::exp(-2.0) * (1.0 + 1e-12)))
    throw std::domain_error("ConstantsEngine: epsilon must lie in (0, e^-2)");
  if (!(cfg_.tau > 0.0 && cfg_.tau < 1.0))
    throw std::domain_error("ConstantsEngine: tau must lie in (0,1)");
  if (!(cfg_.b > 0.0)) throw std::domain_error("ConstantsEngine: b must be positive");
  if (cfg_.d != kernel_.dim) throw std::domain_error("ConstantsEngine: dimension mismatch");
}

namespace {

// Halve the step until two successive quadratures agree to gate_tol; sign
// changes of combined kernels put kinks in |K|^m, which a fixed step cannot
// always resolve.
template <class NormFn>
double gated_norm(NormFn&& norm_at_step, double step, double gate_tol, const char* who) {
  double coarse = norm_at_step(step);
  for (int level = 0; level < 8; ++level) {
    const double fine = norm_at_step(step / 2.0);
    if (std::abs(coarse - fine) <= gate_tol * std::max(std::abs(fine), 1e-300)) return fine;
    coarse = fine;
    step /= 2.0;
  }
  throw std::runtime_error(std::string(who) + ": norm quadrature not converged");
}

}  // namespace

double ConstantsEngine::kernel_norm_at(double m) {
  const auto it = norm_cache_.find(m);
  if (it != norm_cache_.end()) return it->second;
  const double step = kernel_.support_radius / cfg_.quad_div;
  const double value = gated_norm([&](double s) { return kernel_norm(kernel_, m, s); }, step,
                                  1e-7, "ConstantsEngine");
  norm_cache_[m] = value;
  return value;
}

double ConstantsEngine::factor_norm_at(double m) {
  const auto it = factor_norm_cache_.find(m);
  if (it != factor_norm_cache_.end()) return it->second;
  if (!kernel_.has_factor())
    throw std::domain_error("ConstantsEngine: anisotropic constants need a product kernel");
  const double step = kernel_.support_radius / cfg_.quad_div;
  const double value = gated_norm([&](double s) { return factor_norm(kernel_, m, s); }, step,
                                  1e-7, "ConstantsEngine");
  factor_norm_cache_[m] = value;
  return value;
}

double ConstantsEngine::deriv_sup() {
  if (!deriv_sup_) {
    bool fd = false;
    deriv_sup_ = deriv_norm_sup(kernel_, kernel_.support_radius / cfg_.quad_div, &fd);
  }
  return *deriv_sup_;
}

double ConstantsEngine::c1() {
  if (!c1_) {
    const double k2 = kernel_norm_at(2.0);
    const double logarg = std::abs(std::log(4.0 * cfg_.b * kernel_.lipschitz * k2));
    c1_ = 2.0 * std::max(cfg_.q, cfg_.p) +
          2.0 * std::sqrt(2.0 * cfg_.d) * (std::sqrt(kPi) + k2 * (std::sqrt(logarg) + 1.0));
  }
  return *c1_;
}

double ConstantsEngine::c3() {
  if (!c3_) {
    const double k2 = kernel_norm_at(2.0);
    const double qt = cfg_.q_tilde();
    const double c = 8.0 * k2 * k2;
    // int_0^inf z^{qt-1} exp(-z^{2/p}/c) dz = (p/2) Gamma(p qt / 2) c^{p qt / 2}
    const double integral =
        0.5 * cfg_.p * std::tgamma(0.5 * cfg_.p * qt) * std::pow(c, 0.5 * cfg_.p * qt);
    const double closed = std::pow(2.0, cfg_.d / cfg_.p) *
                          std::pow(2.0 * qt * integral, 1.0 / (cfg_.p * qt));
    const double quad = c3_quadrature();
    if (std::abs(closed - quad) > 1e-8 * std::max(closed, 1e-300))
      throw std::runtime_error("ConstantsEngine: tail-integral routes disagree");
    c3_ = closed;
  }
  return *c3_;
}

double ConstantsEngine::c3_quadrature() {
  const double k2 = kernel_norm_at(2.0);
  const double qt = cfg_.q_tilde();
  const double c = 8.0 * k2 * k2;
  // upper cutoff where the exponent reaches ~ -120
  const double z_hi = std::pow(120.0 * c, cfg_.p / 2.0);
  const double ln_hi = std::log(z_hi);
  const double ln_lo = ln_hi - 60.0;  // z^qt weight kills the lower tail
  const double integral = converge_quadrature(
      [&](std::int64_t n) {
        return integrate_halfline_log(
            [&](double z) { return std::pow(z, qt - 1.0) * std::exp(-std::pow(z, 2.0 / cfg_.p) / c); },
            ln_lo, ln_hi, n);
      },
      1 << 12, 1e-12);
  return std::pow(2.0, cfg_.d / cfg_.p) * std::pow(2.0 * qt * integral, 1.0 / (cfg_.p * qt));
}

double ConstantsEngine::mu_of(int r) const {
  // dual-exponent relation: 1/mu = (1 - 1/r) + tau/r
  return 1.0 / ((1.0 - 1.0 / r) + cfg_.tau / r);
}

double ConstantsEngine::lambda_star(double omega, double mu, bool* calibrated) {
  if (calibrated) *calibrated = false;
  if (cfg_.lambda_star_scalar) return *cfg_.lambda_star_scalar;
  for (const auto& e : cfg_.lambda_star_table)
    if (std::abs(e.omega - omega) <= 1e-9 && std::abs(e.mu - mu) <= 1e-9) return e.value;
  const auto key = std::make_pair(static_cast<std::int64_t>(std::llround(omega * 1e12)),
                                  static_cast<std::int64_t>(std::llround(mu * 1e12)));
  const auto it = lambda_cache_.find(key);
  if (calibrated) *calibrated = true;
  lambda_was_calibrated_ = true;
  if (it != lambda_cache_.end()) return it->second;
  const double span = kernel_.support_radius + cfg_.b;
  // coarse tabulation: the estimate is a heuristic scale, not a certified bound
  const auto domain = TabulationGrid::interval(-span, span, 65);
  const auto est =
      estimate_lambda_star(omega, mu, domain, cfg_.calibration_budget, cfg_.calibration_seed);
  lambda_cache_[key] = est.value;
  return est.value;
}

double ConstantsEngine::lambda_star_d(int r, bool* calibrated) {
  if (calibrated) *calibrated = false;
  if (cfg_.lambda_star_d_scalar) return *cfg_.lambda_star_d_scalar;
  for (const auto& [rr, v] : cfg_.lambda_star_d_table)
    if (rr == r) return v;
  const auto it = lambda_d_cache_.find(r);
  if (calibrated) *calibrated = true;
  lambda_d_was_calibrated_ = true;
  if (it != lambda_d_cache_.end()) return it->second;
  const double gamma_r = 0.5 * cfg_.d + 0.5 * cfg_.d / (cfg_.p * r);
  const double span = kernel_.support_radius + cfg_.b;
  TabulationGrid domain;
  domain.k = cfg_.d;
  domain.lo.assign(static_cast<std::size_t>(cfg_.d), -span);
  domain.hi.assign(static_cast<std::size_t>(cfg_.d), span);
  domain.n.assign(static_cast<std::size_t>(cfg_.d), cfg_.d == 1 ? 65 : 17);
  const auto est =
      estimate_lambda_star(gamma_r, 1.0, domain, cfg_.calibration_budget, cfg_.calibration_seed);
  lambda_d_cache_[r] = est.value;
  return est.value;
}

// Sum of the two Dudley branch minima over the admissible split exponents.
// The integrated entropy bound gives delta0^{1 - 1/(2w)} / |1 - 1/(2w)|; both
// branch factors enter through their reciprocals.
double ConstantsEngine::c_mu(int r, double mu, double R_mu, int grid, double* omega1,
                             double* omega2, bool* calibrated) {
  const double lo = 1.0 / mu - 0.5;
  // The span endpoints are fixed by the base grid; refinements insert
  // midpoints only, so the probed set is nested and the minimum converges.
  const int base = cfg_.omega_grid;
  const double pad1 = (0.5 - lo) / (4.0 * base);
  const double pad2 = 0.5 / (4.0 * base);
  double best1 = std::numeric_limits<double>::infinity();
  double best2 = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= grid; ++i) {
    const double t = static_cast<double>(i) / grid;
    const double w1 = (lo + pad1) + t * (0.5 - pad1 - (lo + pad1));
    const double w2 = (0.5 + pad2) + t * (1.0 - pad2 - (0.5 + pad2));
    const double l1 = lambda_star(w1, mu, calibrated);
    const double l2 = lambda_star(w2, mu, calibrated);
    const double f1 = std::sqrt(l1) * std::pow(R_mu, 1.0 / (2.0 * w1)) / (1.0 / (2.0 * w1) - 1.0);
    const double f2 = std::sqrt(l2) * std::pow(R_mu, 1.0 / (2.0 * w2)) / (1.0 - 1.0 / (2.0 * w2));
    if (f1 < best1) {
      best1 = f1;
      if (omega1) *omega1 = w1;
    }
    if (f2 < best2) {
      best2 = f2;
      if (omega2) *omega2 = w2;
    }
  }
  (void)r;
  return 4.0 * std::sqrt(2.0) * std::pow(factor_norm_at(2.0), cfg_.d - 1) * (best1 + best2);
}

// ln of int_0^infty (u + shift)^power exp(-u^2 / (2 scale)) du, evaluated in
// log space around the integrand mode.
double ConstantsEngine::gauss_tail_power_integral(double power, double scale,
                                                  double shift) const {
  const auto g = [&](double u) {
    return power * std::log(u + shift) - u * u / (2.0 * scale);
  };
  const double u_star = 0.5 * (-shift + std::sqrt(shift * shift + 4.0 * power * scale));
  const double peak = g(std::max(u_star, 0.0));
  const double u_hi = std::max(u_star, 0.0) + 14.0 * std::sqrt(scale);
  const double integral = converge_quadrature(
      [&](std::int64_t n) {
        return integrate_midpoint([&](double u) { return std::exp(g(u) - peak); }, 0.0, u_hi,
                                  u_hi / static_cast<double>(n));
      },
      1 << 12, 1e-12);
  return peak + std::log(integral);
}

C2Breakdown ConstantsEngine::c2(int r) {
  const auto it = c2_cache_.find(r);
  if (it != c2_cache_.end()) return it->second;
  const int r0 = static_cast<int>(std::floor(cfg_.p)) + 1;
  if (r < r0) throw std::domain_error("c2: r below floor(p)+1");
  C2Breakdown out;
  out.r = r;
  const double mu = mu_of(r);
  out.mu = mu;
  const double a = kernel_.support_radius;
  const double L = kernel_.lipschitz;
  const double k1 = factor_norm_at(1.0);
  const double k_mu = factor_norm_at(2.0 * mu / (3.0 * mu - 2.0));
  out.R_mu = std::max(
      0.5 * k_mu,
      k1 + 2.0 * std::pow(5.0 * std::pow(4.0 * L * (a + 1.0), mu) +
                              4.0 * std::pow(2.0 * k1, mu) / (2.0 - mu),
                          1.0 / mu));
  bool calibrated = false;
  out.C_mu = c_mu(r, mu, out.R_mu, cfg_.omega_grid, &out.omega1, &out.omega2, &calibrated);
  if (cfg_.check_omega_refinement) {
    // double the nested grid until the minimum settles below 1e-4 relative;
    // calibrated entropy constants get one recorded refinement instead (their
    // per-omega estimates are not smooth enough to iterate against)
    int grid = cfg_.omega_grid;
    double rel = std::numeric_limits<double>::infinity();
    for (int pass = 0; pass < 6; ++pass) {
      grid *= 2;
      const double refined = c_mu(r, mu, out.R_mu, grid, &out.omega1, &out.omega2, &calibrated);
      rel = std::abs(refined - out.C_mu) / std::max(refined, 1e-300);
      out.C_mu = refined;
      if (calibrated || rel < 1e-4) break;
    }
    out.refinement_rel_change = rel;
    if (!calibrated && rel > 1e-4)
      throw std::runtime_error("c2: split-exponent grid not converged");
  }
  out.lambda_calibrated = calibrated;
  const double kd2 = std::pow(factor_norm_at(2.0), cfg_.d - 1);
  out.C_tilde_mu = out.C_mu + pow_int(4.0, cfg_.d) *
                                  (std::sqrt(2.0 * std::exp(static_cast<double>(r))) +
                                   std::sqrt(8.0 * kPi)) *
                                  kd2 * k_mu;
  const double power = (r + cfg_.tau - 1.0) / (1.0 - cfg_.tau);
  const double scale = kd2 * k_mu;  // exp(-u^2 [2 scale]^{-1})
  const double log_integral = gauss_tail_power_integral(power, scale, out.C_tilde_mu);
  out.C_hat_mu = std::exp((1.0 - cfg_.tau) / r *
                          (std::log(r / (1.0 - cfg_.tau)) + log_integral));
  const double front = std::max(1.0, std::pow(2.0 * cfg_.b, cfg_.d - 1));
  const double class_f =
      std::pow(cfg_.class_bound, 1.0 / r) +
      std::pow(cfg_.class_bound, cfg_.tau / r) *
          std::pow(1.0 - std::exp(-cfg_.tau * cfg_.p / 4.0), (cfg_.tau - 1.0) / r);
  const double k_r = factor_norm_at(2.0 * r / (r + 2.0));
  out.value = front * class_f * (out.C_tilde_mu + out.C_hat_mu) +
              std::exp(static_cast<double>(r)) * std::sqrt(2.0 * (1.0 + cfg_.q)) *
                  std::pow(r * std::sqrt(std::exp(1.0)), cfg_.d) * std::pow(k_r, cfg_.d);
  c2_cache_[r] = out;
  return out;
}

double ConstantsEngine::c4() {
  if (!c4_) {
    const double gamma_q1 = gaussian_abs_moment(cfg_.q + 1.0);
    const int r0 = static_cast<int>(std::floor(cfg_.p)) + 1;
    double sum = 0.0;
    int r = r0;
    for (; r < r0 + 400; ++r) {
      const double k_r = factor_norm_at(2.0 * r / (r + 2.0));
      const double term =
          std::exp(-std::exp(static_cast<double>(r))) *
          std::pow(std::pow(r * std::sqrt(std::exp(1.0)), cfg_.d) * std::pow(k_r, cfg_.d),
                   cfg_.q / 2.0);
      sum += term;
      if (r > r0 && term < cfg_.series_rel_tol * sum) break;
    }
    c4_trunc_ = r;
    const double front = gamma_q1 * std::sqrt(kPi / 2.0) *
                         std::max(1.0, std::pow(2.0 * cfg_.b, cfg_.q * cfg_.d));
    c4_ = std::pow(front * sum, 1.0 / cfg_.q);
  }
  return *c4_;
}

int ConstantsEngine::c4_truncation_index() {
  c4();
  return c4_trunc_;
}

double ConstantsEngine::sigma_star() {
  if (!sigma_star_) {
    const double a = kernel_.support_radius;
    const double kinf = kernel_norm_at(std::numeric_limits<double>::infinity());
    const double k1 = kernel_norm_at(1.0);
    sigma_star_ = std::sqrt(std::pow(2.0, cfg_.d + 1) * std::pow(a, cfg_.d) * kinf * k1 *
                            cfg_.maximal_const_value()) *
                  std::pow(2.0 * cfg_.b, cfg_.d * (cfg_.p - 1.0) / cfg_.p);
  }
  return *sigma_star_;
}

double ConstantsEngine::c5() {
  if (!c5_) {
    double total = 0.0;
    int used_r = cfg_.d, used_l = 0;
    for (int r = cfg_.d + 1; r < cfg_.d + 200; ++r) {
      double row = 0.0;
      int l = 1;
      for (; l < 200; ++l) {
        const double term = std::exp(-std::pow(2.0, l) * std::exp(static_cast<double>(r)));
        row += term;
        if (term < cfg_.series_rel_tol * std::max(row, 1e-300)) break;
      }
      total += row;
      used_r = r;
      used_l = std::max(used_l, l);
      if (row < cfg_.series_rel_tol * std::max(total, 1e-300)) break;
    }
    c5_trunc_r_ = used_r;
    c5_trunc_l_ = used_l;
    const double gamma_q1 = gaussian_abs_moment(cfg_.q + 1.0);
    c5_ = std::pow(std::sqrt(8.0 * kPi) * std::pow(sigma_star(), cfg_.q - 1.0) * gamma_q1,
                   1.0 / cfg_.q) *
          total;
  }
  return *c5_;
}

C2StarBreakdown ConstantsEngine::c2_star(int r) {
  const auto it = c2_star_cache_.find(r);
  if (it != c2_star_cache_.end()) return it->second;
  if (r <= cfg_.d) throw std::domain_error("c2_star: requires r > d");
  C2StarBreakdown out;
  out.r = r;
  out.gamma_r = 0.5 * cfg_.d + 0.5 * cfg_.d / (cfg_.p * r);
  out.alpha = out.gamma_r - std::floor(out.gamma_r);
  if (out.alpha < 1e-9 || out.alpha > 1.0 - 1e-9)
    throw std::domain_error("c2_star: fractional part of gamma_r degenerates");
  const double a = kernel_.support_radius;
  const double L = kernel_.lipschitz;
  const double surf = unit_sphere_area(cfg_.d);
  const double inner_closed = surf / (1.0 - out.alpha);  // int_{|z|<=1} |z|^{-d-alpha+1}
  const double outer_closed = surf / out.alpha;          // int_{|z|>1} |z|^{-d-alpha}
  // independent radial quadrature cross-check
  const double inner_quad =
      surf * integrate_halfline_log([&](double rho) { return std::pow(rho, -out.alpha); },
                                    -80.0 / (1.0 - out.alpha), 0.0, 1 << 14);
  const double outer_quad =
      surf * integrate_halfline_log([&](double rho) { return std::pow(rho, -1.0 - out.alpha); },
                                    0.0, 80.0 / out.alpha, 1 << 14);
  if (std::abs(inner_closed - inner_quad) > 1e-6 * inner_closed ||
      std::abs(outer_closed - outer_quad) > 1e-6 * outer_closed)
    throw std::runtime_error("c2_star: radial integral routes disagree");
  out.T_star = std::pow(2.0, 1.0 - cfg_.d) *
               (L * std::pow(a + 2.0, cfg_.d) * inner_closed + deriv_sup() * outer_closed);
  out.T = std::max(0.5 * sigma_star(),
                   std::pow(0.5 * cfg_.d + 1.0, cfg_.d) * out.T_star +
                       kernel_norm_at(1.0) * std::pow(2.0 * cfg_.b, 1.0 / cfg_.p));
  bool calibrated = false;
  out.lambda_d = lambda_star_d(r, &calibrated);
  out.lambda_calibrated = calibrated;
  out.value = 8.0 * std::sqrt(2.0 * out.lambda_d) *
                  std::pow(out.T, cfg_.d / (2.0 * out.gamma_r)) *
                  std::pow(0.5 * sigma_star(), 1.0 / (2.0 * cfg_.p * r)) +
              4.0 * std::sqrt(cfg_.q * std::exp(static_cast<double>(r))) * sigma_star();
  c2_star_cache_[r] = out;
  return out;
}

double ConstantsEngine::psi_eps(const MultiBandwidth& h) {
  double sum = 0.0;
  for (const auto& [levels, measure] : h.level_sets()) {
    const double vol = h.volume_of_levels(levels);
    const double lg = std::abs(std::log(cfg_.epsilon * vol));
    sum += std::pow(lg, cfg_.p / 2.0) * std::pow(vol, -cfg_.p / 2.0) * measure;
  }
  return c1() * std::pow(sum, 1.0 / cfg_.p);
}

namespace {

double scan_norm_lower_bound(const MultiBandwidth& h, double m, double b, int d) {
  // ||V^{-1/2}||_m >= min(V^{-1/2}) (2b)^{d/m}
  return std::pow(h.max_volume(), -0.5) * std::pow(2.0 * b, static_cast<double>(d) / m);
}

}  // namespace

PsiResult ConstantsEngine::psi(const MultiBandwidth& h) {
  const ClassParams cp(cfg_.tau, cfg_.class_bound, cfg_.A, cfg_.p, cfg_.h_base, cfg_.d);
  const auto membership = r_A(h, cp, cfg_.r_a_cap);
  if (!membership.member)
    throw std::domain_error("psi: bandwidth is not in the thickness class (r_A scan exhausted)");
  PsiResult res;
  res.relation_warning = !check_param_relation(cfg_.h_base, cfg_.A, cfg_.tau, cfg_.d).holds;
  double best = std::numeric_limits<double>::infinity();
  int best_r = membership.r;
  for (int r = membership.r; r <= cfg_.r_scan_cap; ++r) {
    const double m = static_cast<double>(r) * cfg_.p / (r - cfg_.p);
    const double c2r = c2(r).value;
    if (c2r * scan_norm_lower_bound(h, m, cfg_.b, cfg_.d) > best) break;
    const double value = c2r * v_norm(h, m);
    res.scanned.emplace_back(r, value);
    if (value < best) {
      best = value;
      best_r = r;
    }
  }
  res.value = best;
  res.argmin_r = best_r;
  return res;
}

PsiResult ConstantsEngine::psi_exhaustive(const MultiBandwidth& h, int r_max) {
  const ClassParams cp(cfg_.tau, cfg_.class_bound, cfg_.A, cfg_.p, cfg_.h_base, cfg_.d);
  const auto membership = r_A(h, cp, cfg_.r_a_cap);
  if (!membership.member) throw std::domain_error("psi_exhaustive: not in the thickness class");
  PsiResult res;
  double best = std::numeric_limits<double>::infinity();
  int best_r = membership.r;
  for (int r = membership.r; r <= r_max; ++r) {
    const double m = static_cast<double>(r) * cfg_.p / (r - cfg_.p);
    const double value = c2(r).value * v_norm(h, m);
    res.scanned.emplace_back(r, value);
    if (value < best) {
      best = value;
      best_r = r;
    }
  }
  res.value = best;
  res.argmin_r = best_r;
  return res;
}

PsiResult ConstantsEngine::psi_star(const MultiBandwidth& h) {
  if (!h.isotropic()) throw std::domain_error("psi_star: requires an isotropic bandwidth");
  if (cfg_.p > 2.0) throw std::domain_error("psi_star: requires p in [1,2]");
  PsiResult res;
  double best = std::numeric_limits<double>::infinity();
  int best_r = cfg_.d + 1;
  for (int r = cfg_.d + 1; r <= cfg_.r_scan_cap; ++r) {
    const double m = cfg_.p + 1.0 / r;
    const double c2r = c2_star(r).value;
    if (c2r * scan_norm_lower_bound(h, m, cfg_.b, cfg_.d) > best) break;
    const double value = c2r * v_norm(h, m);
    res.scanned.emplace_back(r, value);
    if (value < best) {
      best = value;
      best_r = r;
    }
  }
  res.value = best;
  res.argmin_r = best_r;
  return res;
}

PsiResult ConstantsEngine::psi_star_exhaustive(const MultiBandwidth& h, int r_max) {
  if (!h.isotropic()) throw std::domain_error("psi_star: requires an isotropic bandwidth");
  if (cfg_.p > 2.0) throw std::domain_error("psi_star: requires p in [1,2]");
  PsiResult res;
  double best = std::numeric_limits<double>::infinity();
  int best_r = cfg_.d + 1;
  for (int r = cfg_.d + 1; r <= r_max; ++r) {
    const double value = c2_star(r).value * v_norm(h, cfg_.p + 1.0 / r);
    res.scanned.emplace_back(r, value);
    if (value < best) {
      best = value;
      best_r = r;
    }
  }
  res.value = best;
  res.argmin_r = best_r;
  return res;
}

CombinedPsi ConstantsEngine::combined_psi(const MultiBandwidth& h, bool isotropic_branch) {
  CombinedPsi out;
  out.psi_eps_value = psi_eps(h);
  out.value = out.psi_eps_value;
  out.branch = "psi_eps";
  try {
    const auto second = isotropic_branch ? psi_star(h) : psi(h);
    out.second_available = true;
    out.second_value = second.value;
    if (second.value < out.value) {
      out.value = second.value;
      out.branch = isotropic_branch ? "psi_star" : "psi";
    }
  } catch (const std::domain_error&) {
    out.second_available = false;
  }
  return out;
}

double ConstantsEngine::log_moment_bound_class(double h_base, double A) const {
  ConstantsEngine& self = const_cast<ConstantsEngine&>(*this);
  return cfg_.q * (std::log(self.c4()) + std::log(A) -
                   std::exp(2.0 * std::sqrt(2.0 * cfg_.d * std::abs(std::log(h_base)))));
}

double ConstantsEngine::moment_bound(MomentBound which) {
  switch (which) {
    case MomentBound::Level:
      return std::pow(c3() * cfg_.epsilon, cfg_.q);
    case MomentBound::ClassNet:
      return std::exp(log_moment_bound_class(cfg_.h_base, cfg_.A));
    case MomentBound::Isotropic:
      return std::pow(c5() * std::exp(std::pow(cfg_.h_base, -static_cast<double>(cfg_.d))),
                      cfg_.q);
    case MomentBound::IsotropicProofVariant:
      return std::pow(c5() * std::exp(-std::pow(cfg_.h_base, -static_cast<double>(cfg_.d))),
                      cfg_.q);
    case MomentBound::Combined:
      return std::pow((c3() + c4()) * cfg_.epsilon, cfg_.q);
    case MomentBound::CombinedIsotropic:
      return std::pow((c3() + c5()) * cfg_.epsilon, cfg_.q);
  }
  throw std::logic_error("moment_bound: unknown selector");
}

ConstantsReport ConstantsEngine::report() {
  ConstantsReport rep;
  rep.p = cfg_.p;
  rep.q = cfg_.q;
  rep.epsilon = cfg_.epsilon;
  rep.b = cfg_.b;
  rep.tau = cfg_.tau;
  rep.class_bound = cfg_.class_bound;
  rep.A = cfg_.A;
  rep.h_base = cfg_.h_base;
  rep.d = cfg_.d;
  rep.kernel_id = kernel_.id;
  rep.kernel_a = kernel_.support_radius;
  rep.kernel_L = kernel_.lipschitz;
  rep.gamma_q1 = gaussian_abs_moment(cfg_.q + 1.0);
  rep.C1 = c1();
  rep.C3 = c3();
  rep.sigma_star = sigma_star();
  rep.C5 = c5();
  rep.c5_truncation_r = c5_trunc_r_;
  rep.c5_truncation_l = c5_trunc_l_;
  const int r0 = static_cast<int>(std::floor(cfg_.p)) + 1;
  if (kernel_.has_factor()) {
    rep.C4 = c4();
    rep.c4_truncation_r = c4_trunc_;
    for (int r = r0; r < r0 + cfg_.table_depth; ++r) rep.c2_table.push_back(c2(r));
    rep.bound_t2 = moment_bound(MomentBound::ClassNet);
    rep.bound_cor1 = moment_bound(MomentBound::Combined);
  } else {
    rep.provenance.push_back("anisotropic constants skipped: kernel has no product factor");
  }
  for (int r = cfg_.d + 1; r < cfg_.d + 1 + cfg_.table_depth; ++r)
    rep.c2_star_table.push_back(c2_star(r));
  rep.bound_t1 = moment_bound(MomentBound::Level);
  rep.bound_t3 = moment_bound(MomentBound::Isotropic);
  rep.bound_t3_proof_variant = moment_bound(MomentBound::IsotropicProofVariant);
  rep.bound_cor2 = moment_bound(MomentBound::CombinedIsotropic);
  for (const auto& line : provenance_lines()) rep.provenance.push_back(line);

  auto tail_increasing = [](const auto& table, auto value_of) {
    std::size_t argmin = 0;
    for (std::size_t i = 1; i < table.size(); ++i)
      if (value_of(table[i]) < value_of(table[argmin])) argmin = i;
    for (std::size_t i = argmin + 1; i < table.size(); ++i)
      if (!(value_of(table[i]) > value_of(table[i - 1]))) return false;
    return true;
  };
  rep.c2_table_tail_increasing =
      tail_increasing(rep.c2_table, [](const C2Breakdown& r) { return r.value; });
  rep.c2_star_table_tail_increasing =
      tail_increasing(rep.c2_star_table, [](const C2StarBreakdown& r) { return r.value; });

  // every constant must be a positive finite number
  auto require_pf = [](double v, const char* who) {
    if (!(std::isfinite(v) && v > 0.0))
      throw std::runtime_error(std::string("ConstantsReport: ") + who +
                               " is not positive finite");
  };
  require_pf(rep.C1, "C1");
  require_pf(rep.C3, "C3");
  require_pf(rep.C5, "C5");
  require_pf(rep.sigma_star, "sigma_star");
  if (kernel_.has_factor()) require_pf(rep.C4, "C4");
  for (const auto& row : rep.c2_table) require_pf(row.value, "C2 row");
  for (const auto& row : rep.c2_star_table) require_pf(row.value, "C2* row");
  return rep;
}

std::vector<std::string> ConstantsEngine::provenance_lines() const {
  std::vector<std::string> out;
  if (cfg_.lambda_star_scalar)
    out.push_back("lambda_star: scalar override");
  else if (!cfg_.lambda_star_table.empty())
    out.push_back("lambda_star: table override");
  if (lambda_was_calibrated_)
    out.push_back("lambda_star: calibrated, not proved (heuristic lower bound)");
  if (cfg_.lambda_star_d_scalar)
    out.push_back("lambda_star_d: scalar override");
  else if (!cfg_.lambda_star_d_table.empty())
    out.push_back("lambda_star_d: table override");
  if (lambda_d_was_calibrated_)
    out.push_back("lambda_star_d: calibrated, not proved (heuristic lower bound)");
  {
    std::ostringstream os;
    os << "maximal-operator constant c(d) = " << cfg_.maximal_const_value()
       << (cfg_.maximal_const ? " (override)" : " (default upper bound)");
    out.push_back(os.str());
  }
  {
    std::ostringstream os;
    os << "bias constant C~ = " << cfg_.C_tilde << " (configured)";
    out.push_back(os.str());
  }
  {
    std::ostringstream os;
    os << "quadrature step = a/" << cfg_.quad_div
       << ", series tail tolerance = " << cfg_.series_rel_tol;
    out.push_back(os.str());
  }
  out.push_back(
      "isotropic tail bound reported verbatim and with the sign-flipped exponent variant");
  return out;
}

std::string ConstantsReport::to_json(int indent) const {
  nlohmann::ordered_json j;
  j["config"] = {{"p", p},       {"q", q},           {"epsilon", epsilon},
                 {"b", b},       {"d", d},           {"tau", tau},
                 {"class_bound", class_bound},       {"A", A},
                 {"h_base", h_base}};
  j["kernel"] = {{"id", kernel_id}, {"support_radius", kernel_a}, {"lipschitz", kernel_L}};
  j["constants"] = {{"C1", C1},
                    {"C3", C3},
                    {"C4", C4},
                    {"C5", C5},
                    {"sigma_star", sigma_star},
                    {"gamma_q_plus_1", gamma_q1},
                    {"c4_truncation_r", c4_truncation_r},
                    {"c5_truncation_r", c5_truncation_r},
                    {"c5_truncation_l", c5_truncation_l}};
  auto& c2j = j["c2_table"];
  c2j = nlohmann::ordered_json::array();
  for (const auto& row : c2_table)
    c2j.push_back({{"r", row.r},
                   {"mu", row.mu},
                   {"R_mu", row.R_mu},
                   {"C_mu", row.C_mu},
                   {"omega1", row.omega1},
                   {"omega2", row.omega2},
                   {"C_tilde_mu", row.C_tilde_mu},
                   {"C_hat_mu", row.C_hat_mu},
                   {"value", row.value},
                   {"lambda_calibrated", row.lambda_calibrated},
                   {"refinement_rel_change", row.refinement_rel_change}});
  auto& c2sj = j["c2_star_table"];
  c2sj = nlohmann::ordered_json::array();
  for (const auto& row : c2_star_table)
    c2sj.push_back({{"r", row.r},
                    {"gamma_r", row.gamma_r},
                    {"alpha", row.alpha},
                    {"T_star", row.T_star},
                    {"T", row.T},
                    {"lambda_d", row.lambda_d},
                    {"value", row.value},
                    {"lambda_calibrated", row.lambda_calibrated}});
  j["moment_bounds"] = {{"level", bound_t1},
                        {"class_net", bound_t2},
                        {"isotropic_verbatim", bound_t3},
                        {"isotropic_proof_variant", bound_t3_proof_variant},
                        {"combined", bound_cor1},
                        {"combined_isotropic", bound_cor2}};
  j["checks"] = {{"c2_table_tail_increasing", c2_table_tail_increasing},
                 {"c2_star_table_tail_increasing", c2_star_table_tail_increasing}};
  j["provenance"] = provenance;
  return j.dump(indent);
}

double const_C1(const UpperFnConfig& cfg, const Kernel& k) {
  return ConstantsEngine(cfg, k).c1();
}

double const_C3(const UpperFnConfig& cfg, const Kernel& k) {
  return ConstantsEngine(cfg, k).c3();
}

}  // namespace upfn
