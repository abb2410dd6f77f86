#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace upfn {

// Composite midpoint rule over [lo, hi]. The requested step is rounded so an
// integer number of cells tiles the interval exactly; deterministic for a
// fixed step.
template <class F>
double integrate_midpoint(F&& f, double lo, double hi, double step) {
  if (!(hi > lo)) return 0.0;
  if (!(step > 0.0)) throw std::invalid_argument("integrate_midpoint: nonpositive step");
  const auto n = static_cast<std::int64_t>(std::ceil((hi - lo) / step - 1e-12));
  const double h = (hi - lo) / static_cast<double>(n);
  double sum = 0.0;
  for (std::int64_t i = 0; i < n; ++i) sum += f(lo + (static_cast<double>(i) + 0.5) * h);
  return sum * h;
}

// Midpoint rule on the box prod_j [lo_j, hi_j]; f takes the point as a span.
inline double integrate_midpoint_nd(const std::function<double(std::span<const double>)>& f,
                                    std::span<const double> lo, std::span<const double> hi,
                                    double step,
                                    std::int64_t cell_cap = (std::int64_t{1} << 26)) {
  const int d = static_cast<int>(lo.size());
  if (d == 0) throw std::invalid_argument("integrate_midpoint_nd: empty box");
  std::vector<std::int64_t> n(d);
  std::vector<double> h(d);
  std::int64_t cells = 1;
  for (int j = 0; j < d; ++j) {
    if (!(hi[j] > lo[j])) return 0.0;
    n[j] = static_cast<std::int64_t>(std::ceil((hi[j] - lo[j]) / step - 1e-12));
    h[j] = (hi[j] - lo[j]) / static_cast<double>(n[j]);
    cells *= n[j];
    if (cells > cell_cap)
      throw std::runtime_error("integrate_midpoint_nd: cell count exceeds cap");
  }
  std::vector<std::int64_t> idx(d, 0);
  std::vector<double> x(d);
  double sum = 0.0;
  double vol = 1.0;
  for (int j = 0; j < d; ++j) vol *= h[j];
  for (std::int64_t c = 0; c < cells; ++c) {
    for (int j = 0; j < d; ++j) x[j] = lo[j] + (static_cast<double>(idx[j]) + 0.5) * h[j];
    sum += f(x);
    for (int j = d - 1; j >= 0; --j) {
      if (++idx[j] < n[j]) break;
      idx[j] = 0;
    }
  }
  return sum * vol;
}

// int_0^infty f(z) dz via the substitution z = e^v; suited to integrands with
// power-law behaviour near zero and fast decay at infinity.
template <class F>
double integrate_halfline_log(F&& f, double ln_lo, double ln_hi, std::int64_t n) {
  if (!(ln_hi > ln_lo) || n < 1) return 0.0;
  const double h = (ln_hi - ln_lo) / static_cast<double>(n);
  double sum = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double z = std::exp(ln_lo + (static_cast<double>(i) + 0.5) * h);
    sum += f(z) * z;
  }
  return sum * h;
}

// Doubles the resolution until two successive values agree to rel_tol;
// returns the finer value.
template <class Q>
double converge_quadrature(Q&& quad, std::int64_t n0, double rel_tol, int max_doublings = 14) {
  double prev = quad(n0);
  for (int k = 1; k <= max_doublings; ++k) {
    n0 *= 2;
    const double cur = quad(n0);
    const double scale = std::max({std::abs(cur), std::abs(prev), 1e-300});
    if (std::abs(cur - prev) <= rel_tol * scale) return cur;
    prev = cur;
  }
  return prev;
}

// E|N(0,1)|^p = 2^{p/2} Gamma((p+1)/2) / sqrt(pi)
inline double gaussian_abs_moment(double p) {
  if (!(p >= 0.0)) throw std::domain_error("gaussian_abs_moment: p must be nonnegative");
  return std::pow(2.0, p / 2.0) * std::tgamma((p + 1.0) / 2.0) / std::sqrt(std::numbers::pi);
}

// Surface area of the unit sphere S^{d-1} in R^d.
inline double unit_sphere_area(int d) {
  if (d < 1) throw std::domain_error("unit_sphere_area: dimension must be positive");
  return 2.0 * std::pow(std::numbers::pi, static_cast<double>(d) / 2.0) /
         std::tgamma(static_cast<double>(d) / 2.0);
}

}  // namespace upfn
