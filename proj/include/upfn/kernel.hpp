#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace upfn {

enum class KernelStructure { generic, product, smooth };
enum class KernelAssumption { A1, A2, A3 };

// Compactly supported kernel on [-a, a]^d with a declared Lipschitz constant.
// Product kernels carry their univariate factor (and optionally its first two
// derivatives); smooth kernels expose partial derivatives up to total order
// floor(d/2)+1, analytically when available.
struct Kernel {
  int dim = 1;
  double support_radius = 1.0;  // a
  double lipschitz = 1.0;       // declared L
  KernelStructure structure = KernelStructure::generic;
  std::string id = "custom";

  std::function<double(std::span<const double>)> evaluate;
  std::function<double(double)> factor;                   // product kernels
  std::vector<std::function<double(double)>> factor_derivs;  // factor', factor''

  double operator()(std::span<const double> t) const { return evaluate(t); }
  double at(double t) const;  // univariate evaluation (dim==1 or the factor)
  bool has_factor() const { return static_cast<bool>(factor); }
};

// Table of kernel norms ||K||_m plus the derivative norm used by the
// isotropic constants. A norm is only stored after the convergence gate
// (halving the step moves it by < 1e-6 relative) has passed.
struct KernelNorms {
  double quadrature_step = 0.0;
  std::map<double, double> by_exponent;  // key may be +infinity
  double deriv_norm_sup = 0.0;           // sup_{|n| = floor(d/2)} ||D^n K||_1
  bool derivative_fd = false;            // derivatives came from finite differences
};

struct AssumptionReport {
  bool passed = false;
  bool support_ok = false;
  double declared_lipschitz = 0.0;
  double estimated_lipschitz = 0.0;
  std::vector<double> worst_a, worst_b;  // probe pair realising the max slope
  bool approximate_derivatives = false;
  std::string detail;
};

// ||K||_m = (int |K|^m)^{1/m} by composite midpoint quadrature over the
// support; m = +infinity is the sup over an endpoint-inclusive probe grid.
double kernel_norm(const Kernel& k, double m, double step);
double kernel_norm(const Kernel& k, double m);  // step = a/512

// Norm of the univariate factor of a product kernel.
double factor_norm(const Kernel& k, double m, double step);
double factor_norm(const Kernel& k, double m);

// C(K) = sup over |n| = floor(d/2) of ||D^n K||_1 (the kernel itself in d<=1).
double deriv_norm_sup(const Kernel& k, double step, bool* used_fd = nullptr);

KernelNorms compute_kernel_norms(const Kernel& k, const std::vector<double>& exponents,
                                 double step);

// Numerical validation of the three kernel assumptions: support containment
// plus a max finite-difference slope estimate against the declared constant.
AssumptionReport check_assumptions(const Kernel& k, KernelAssumption level,
                                   int probe_density = 1024, double tol = 1e-3);

// Product kernel from a univariate factor.
Kernel make_product_kernel(std::function<double(double)> factor, double support_radius,
                           double factor_lipschitz, int dim, std::string id);

// w_ell(y) = sum_{i=1}^{ell} binom(ell,i) (-1)^{i+1} (1/i) w(y/i), extended to
// the product kernel prod_j w_ell(t_j).
Kernel build_w_kernel(const std::function<double(double)>& w, double w_support,
                      double w_lipschitz, int ell, int dim);

// Named catalog: "triangle", "epanechnikov", "quartic", "bump",
// "w_ell:<base>:<ell>".
Kernel kernel_from_name(const std::string& name, int dim);

// Tabulated univariate kernel (CSV rows "t,value"), linearly interpolated and
// extended to a product kernel.
Kernel kernel_from_samples(const std::vector<double>& t, const std::vector<double>& v, int dim,
                           std::string id);
Kernel kernel_from_samples_csv(const std::string& path, int dim);

}  // namespace upfn
