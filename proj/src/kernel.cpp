#include "upfn/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "upfn/quadrature.hpp"

namespace upfn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

void require_finite(double v, const std::string& who) {
  if (!std::isfinite(v))
    throw std::runtime_error("invalid kernel: " + who + " evaluated to a non-finite value");
}

// Probe nodes including both endpoints (and zero when n is even).
std::vector<double> probe_nodes(double lo, double hi, int n) {
  std::vector<double> t(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i)
    t[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / n;
  return t;
}

double sup_abs_1d(const std::function<double(double)>& f, double a, int n) {
  double best = 0.0;
  for (double t : probe_nodes(-a, a, n)) {
    const double v = std::abs(f(t));
    require_finite(v, "kernel");
    best = std::max(best, v);
  }
  return best;
}

int scaled_density(int requested, int dim) {
  if (dim <= 1) return requested;
  if (dim == 2) return std::min(requested, 256);
  return std::min(requested, 48);
}

}  // namespace

double Kernel::at(double t) const {
  if (factor) return factor(t);
  if (dim != 1) throw std::logic_error("Kernel::at: univariate access on a generic kernel");
  const double x[1] = {t};
  return evaluate(std::span<const double>(x, 1));
}

double kernel_norm(const Kernel& k, double m, double step) {
  if (!(m >= 1.0) && m != kInf)
    throw std::domain_error("kernel_norm: exponent must be >= 1 or infinity");
  const double a = k.support_radius;
  if (m == kInf) {
    const int n = static_cast<int>(std::llround(2.0 * a / step));
    if (k.has_factor())
      return std::pow(sup_abs_1d(k.factor, a, std::max(n, 16)), k.dim);
    if (k.dim == 1)
      return sup_abs_1d([&k](double t) { return k.at(t); }, a, std::max(n, 16));
    // Generic multivariate sup over an endpoint-inclusive grid.
    const int nd = scaled_density(std::max(n, 16), k.dim);
    std::vector<double> axis = probe_nodes(-a, a, nd);
    std::vector<int> idx(static_cast<std::size_t>(k.dim), 0);
    std::vector<double> x(static_cast<std::size_t>(k.dim));
    double best = 0.0;
    while (true) {
      for (int j = 0; j < k.dim; ++j) x[static_cast<std::size_t>(j)] = axis[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
      const double v = std::abs(k.evaluate(x));
      require_finite(v, k.id);
      best = std::max(best, v);
      int j = k.dim - 1;
      for (; j >= 0; --j) {
        if (++idx[static_cast<std::size_t>(j)] <= nd) break;
        idx[static_cast<std::size_t>(j)] = 0;
      }
      if (j < 0) break;
    }
    return best;
  }
  if (k.has_factor()) {
    // |K|^m factorises across coordinates for product kernels.
    const double f1 = integrate_midpoint(
        [&](double t) {
          const double v = std::abs(k.factor(t));
          require_finite(v, k.id);
          return std::pow(v, m);
        },
        -a, a, step);
    return std::pow(f1, static_cast<double>(k.dim) / m);
  }
  std::vector<double> lo(static_cast<std::size_t>(k.dim), -a), hi(static_cast<std::size_t>(k.dim), a);
  const double integral = integrate_midpoint_nd(
      [&](std::span<const double> x) {
        const double v = std::abs(k.evaluate(x));
        require_finite(v, k.id);
        return std::pow(v, m);
      },
      lo, hi, step);
  return std::pow(integral, 1.0 / m);
}

double kernel_norm(const Kernel& k, double m) {
  return kernel_norm(k, m, k.support_radius / 512.0);
}

double factor_norm(const Kernel& k, double m, double step) {
  if (!k.has_factor())
    throw std::domain_error("factor_norm: kernel has no product structure");
  Kernel one = k;
  one.dim = 1;
  return kernel_norm(one, m, step);
}

double factor_norm(const Kernel& k, double m) {
  return factor_norm(k, m, k.support_radius / 512.0);
}

namespace {

// D^n K on a point, preferring analytic factor derivatives for product
// kernels and falling back to central finite differences.
double partial_derivative(const Kernel& k, const std::vector<int>& n, std::span<const double> x,
                          double fd_step, bool* used_fd) {
  if (k.has_factor()) {
    double prod = 1.0;
    for (int j = 0; j < k.dim; ++j) {
      const int order = n[static_cast<std::size_t>(j)];
      const double t = x[static_cast<std::size_t>(j)];
      if (order == 0) {
        prod *= k.factor(t);
      } else if (order <= static_cast<int>(k.factor_derivs.size()) &&
                 k.factor_derivs[static_cast<std::size_t>(order - 1)]) {
        prod *= k.factor_derivs[static_cast<std::size_t>(order - 1)](t);
      } else {
        if (used_fd) *used_fd = true;
        if (order == 1) {
          prod *= (k.factor(t + fd_step) - k.factor(t - fd_step)) / (2.0 * fd_step);
        } else if (order == 2) {
          prod *= (k.factor(t + fd_step) - 2.0 * k.factor(t) + k.factor(t - fd_step)) /
                  (fd_step * fd_step);
        } else {
          throw std::domain_error("partial_derivative: order > 2 unsupported");
        }
      }
    }
    return prod;
  }
  // Generic kernel: nested central differences, stripping one axis per call.
  if (used_fd) *used_fd = true;
  int axis = 0;
  while (axis < k.dim && n[static_cast<std::size_t>(axis)] == 0) ++axis;
  if (axis >= k.dim) return k.evaluate(x);
  std::vector<int> rest = n;
  rest[static_cast<std::size_t>(axis)] = 0;
  std::vector<double> pt(x.begin(), x.end());
  const int order = n[static_cast<std::size_t>(axis)];
  if (order == 1) {
    pt[static_cast<std::size_t>(axis)] += fd_step;
    const double up = partial_derivative(k, rest, pt, fd_step, nullptr);
    pt[static_cast<std::size_t>(axis)] -= 2.0 * fd_step;
    const double dn = partial_derivative(k, rest, pt, fd_step, nullptr);
    return (up - dn) / (2.0 * fd_step);
  }
  if (order == 2) {
    const double mid = partial_derivative(k, rest, pt, fd_step, nullptr);
    pt[static_cast<std::size_t>(axis)] += fd_step;
    const double up = partial_derivative(k, rest, pt, fd_step, nullptr);
    pt[static_cast<std::size_t>(axis)] -= 2.0 * fd_step;
    const double dn = partial_derivative(k, rest, pt, fd_step, nullptr);
    return (up - 2.0 * mid + dn) / (fd_step * fd_step);
  }
  throw std::domain_error("partial_derivative: order > 2 unsupported");
}

std::vector<std::vector<int>> multi_indices_of_order(int dim, int total) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(static_cast<std::size_t>(dim), 0);
  std::function<void(int, int)> rec = [&](int axis, int left) {
    if (axis == dim - 1) {
      cur[static_cast<std::size_t>(axis)] = left;
      out.push_back(cur);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      cur[static_cast<std::size_t>(axis)] = v;
      rec(axis + 1, left - v);
    }
  };
  rec(0, total);
  return out;
}

}  // namespace

double deriv_norm_sup(const Kernel& k, double step, bool* used_fd) {
  const int order = k.dim / 2;
  if (used_fd) *used_fd = false;
  if (order == 0) return kernel_norm(k, 1.0, step);
  const double a = k.support_radius;
  const double fd_step = 1e-5 * a;
  double best = 0.0;
  std::vector<double> lo(static_cast<std::size_t>(k.dim), -a), hi(static_cast<std::size_t>(k.dim), a);
  for (const auto& n : multi_indices_of_order(k.dim, order)) {
    const double l1 = integrate_midpoint_nd(
        [&](std::span<const double> x) {
          return std::abs(partial_derivative(k, n, x, fd_step, used_fd));
        },
        lo, hi, std::max(step, a / scaled_density(512, k.dim)));
    best = std::max(best, l1);
  }
  return best;
}

KernelNorms compute_kernel_norms(const Kernel& k, const std::vector<double>& exponents,
                                 double step) {
  KernelNorms out;
  out.quadrature_step = step;
  for (double m : exponents) {
    // convergence gate: the step is halved until halving it again moves the
    // norm by less than 1e-6 relative
    double cur_step = step;
    double coarse = kernel_norm(k, m, cur_step);
    bool converged = false;
    for (int level = 0; level < 8 && !converged; ++level) {
      const double fine = kernel_norm(k, m, cur_step / 2.0);
      const double scale = std::max(std::abs(fine), 1e-300);
      if (std::abs(coarse - fine) <= 1e-6 * scale) {
        converged = true;
        coarse = fine;
      } else {
        coarse = fine;
        cur_step /= 2.0;
      }
    }
    if (!converged)
      throw std::runtime_error("compute_kernel_norms: quadrature not converged");
    if (!(coarse >= 0.0)) throw std::runtime_error("compute_kernel_norms: negative norm");
    out.by_exponent[m] = coarse;
    out.quadrature_step = std::min(out.quadrature_step, cur_step / 2.0);
  }
  out.deriv_norm_sup = deriv_norm_sup(k, step, &out.derivative_fd);
  return out;
}

namespace {

struct SlopeScan {
  double max_slope = 0.0;
  std::vector<double> at_a, at_b;
};

// Max |f(x) - f(y)| / |x - y| over axis-adjacent pairs of an inclusive grid
// slightly wider than the support.
SlopeScan lipschitz_scan(const std::function<double(std::span<const double>)>& f, int dim,
                         double a, int density) {
  const int n = scaled_density(density, dim);
  const double pad = a / 16.0;
  const auto axis = probe_nodes(-a - pad, a + pad, n);
  SlopeScan scan;
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  std::vector<double> x(static_cast<std::size_t>(dim)), y(static_cast<std::size_t>(dim));
  const double h = axis[1] - axis[0];
  while (true) {
    for (int j = 0; j < dim; ++j) x[static_cast<std::size_t>(j)] = axis[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
    const double fx = f(x);
    require_finite(fx, "kernel");
    for (int j = 0; j < dim; ++j) {
      if (idx[static_cast<std::size_t>(j)] + 1 > n) continue;
      y = x;
      y[static_cast<std::size_t>(j)] += h;
      const double fy = f(y);
      const double slope = std::abs(fy - fx) / h;
      if (slope > scan.max_slope) {
        scan.max_slope = slope;
        scan.at_a = x;
        scan.at_b = y;
      }
    }
    int j = dim - 1;
    for (; j >= 0; --j) {
      if (++idx[static_cast<std::size_t>(j)] <= n) break;
      idx[static_cast<std::size_t>(j)] = 0;
    }
    if (j < 0) break;
  }
  return scan;
}

bool support_check(const Kernel& k, int density) {
  const double a = k.support_radius;
  const int n = scaled_density(density, k.dim);
  const auto axis = probe_nodes(-1.5 * a, 1.5 * a, n);
  std::vector<int> idx(static_cast<std::size_t>(k.dim), 0);
  std::vector<double> x(static_cast<std::size_t>(k.dim));
  while (true) {
    double maxc = 0.0;
    for (int j = 0; j < k.dim; ++j) {
      x[static_cast<std::size_t>(j)] = axis[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
      maxc = std::max(maxc, std::abs(x[static_cast<std::size_t>(j)]));
    }
    if (maxc > a * (1.0 + 1e-12)) {
      if (std::abs(k.evaluate(x)) > 1e-12) return false;
    }
    int j = k.dim - 1;
    for (; j >= 0; --j) {
      if (++idx[static_cast<std::size_t>(j)] <= n) break;
      idx[static_cast<std::size_t>(j)] = 0;
    }
    if (j < 0) break;
  }
  return true;
}

}  // namespace

AssumptionReport check_assumptions(const Kernel& k, KernelAssumption level, int probe_density,
                                   double tol) {
  AssumptionReport rep;
  rep.declared_lipschitz = k.lipschitz;
  rep.support_ok = support_check(k, probe_density / 4);

  if (level == KernelAssumption::A3) {
    if (!k.has_factor())
      throw std::domain_error("check_assumptions: A3 requires a product-structure kernel");
    // Factorisation probe.
    const auto axis = probe_nodes(-k.support_radius, k.support_radius, 64);
    std::vector<double> x(static_cast<std::size_t>(k.dim));
    for (std::size_t i = 0; i < axis.size(); ++i) {
      for (int j = 0; j < k.dim; ++j)
        x[static_cast<std::size_t>(j)] = axis[(i + static_cast<std::size_t>(7 * j + 1)) % axis.size()];
      double prod = 1.0;
      for (int j = 0; j < k.dim; ++j) prod *= k.factor(x[static_cast<std::size_t>(j)]);
      if (std::abs(k.evaluate(x) - prod) > 1e-10 * std::max(1.0, std::abs(prod))) {
        rep.detail = "product factorisation mismatch";
        rep.passed = false;
        return rep;
      }
    }
    const auto scan = lipschitz_scan(
        [&k](std::span<const double> t) { return k.factor(t[0]); }, 1, k.support_radius,
        probe_density);
    rep.estimated_lipschitz = scan.max_slope;
    rep.worst_a = scan.at_a;
    rep.worst_b = scan.at_b;
    rep.passed = rep.support_ok && scan.max_slope <= k.lipschitz * (1.0 + tol);
    return rep;
  }

  if (level == KernelAssumption::A2) {
    if (k.structure != KernelStructure::smooth)
      throw std::domain_error("check_assumptions: A2 requires a smooth-structure kernel");
    const int max_order = k.dim / 2 + 1;
    const double fd_step = 1e-5 * k.support_radius;
    double worst = 0.0;
    bool used_fd = false;
    for (int total = 0; total <= max_order; ++total) {
      for (const auto& n : multi_indices_of_order(k.dim, total)) {
        const auto scan = lipschitz_scan(
            [&](std::span<const double> t) {
              return partial_derivative(k, n, t, fd_step, &used_fd);
            },
            k.dim, k.support_radius, probe_density / 4);
        if (scan.max_slope > worst) {
          worst = scan.max_slope;
          rep.worst_a = scan.at_a;
          rep.worst_b = scan.at_b;
        }
      }
    }
    rep.approximate_derivatives = used_fd;
    rep.estimated_lipschitz = worst;
    rep.passed = rep.support_ok && worst <= k.lipschitz * (1.0 + tol);
    return rep;
  }

  // A1
  const auto scan = lipschitz_scan([&k](std::span<const double> t) { return k.evaluate(t); },
                                   k.dim, k.support_radius, probe_density);
  rep.estimated_lipschitz = scan.max_slope;
  rep.worst_a = scan.at_a;
  rep.worst_b = scan.at_b;
  rep.passed = rep.support_ok && scan.max_slope <= k.lipschitz * (1.0 + tol);
  return rep;
}

Kernel make_product_kernel(std::function<double(double)> factor, double support_radius,
                           double factor_lipschitz, int dim, std::string id) {
  if (dim < 1) throw std::domain_error("make_product_kernel: dimension must be positive");
  Kernel k;
  k.dim = dim;
  k.support_radius = support_radius;
  k.structure = KernelStructure::product;
  k.id = std::move(id);
  k.factor = std::move(factor);
  double sup = 0.0;
  for (double t : probe_nodes(-support_radius, support_radius, 4096))
    sup = std::max(sup, std::abs(k.factor(t)));
  k.lipschitz =
      std::sqrt(static_cast<double>(dim)) * factor_lipschitz * std::pow(std::max(1.0, sup), dim - 1);
  auto f = k.factor;
  k.evaluate = [f, dim](std::span<const double> t) {
    double prod = 1.0;
    for (int j = 0; j < dim; ++j) prod *= f(t[static_cast<std::size_t>(j)]);
    return prod;
  };
  return k;
}

Kernel build_w_kernel(const std::function<double(double)>& w, double w_support,
                      double w_lipschitz, int ell, int dim) {
  if (ell < 1) throw std::domain_error("build_w_kernel: ell must be a positive integer");
  std::vector<double> coef(static_cast<std::size_t>(ell) + 1, 0.0);
  double lip = 0.0;
  for (int i = 1; i <= ell; ++i) {
    const double c = binomial(ell, i) * ((i % 2 == 1) ? 1.0 : -1.0) / static_cast<double>(i);
    coef[static_cast<std::size_t>(i)] = c;
    lip += std::abs(c) * w_lipschitz / static_cast<double>(i);
  }
  auto w_ell = [w, coef, ell](double y) {
    double s = 0.0;
    for (int i = 1; i <= ell; ++i)
      s += coef[static_cast<std::size_t>(i)] * w(y / static_cast<double>(i));
    return s;
  };
  Kernel k = make_product_kernel(w_ell, w_support * static_cast<double>(ell), lip, dim,
                                 "w_ell:" + std::to_string(ell));
  return k;
}

namespace {

double triangle_fn(double t) { return std::max(0.0, 1.0 - std::abs(t)); }
double epanechnikov_fn(double t) { return std::abs(t) < 1.0 ? 0.75 * (1.0 - t * t) : 0.0; }
double quartic_fn(double t) {
  if (std::abs(t) >= 1.0) return 0.0;
  const double u = 1.0 - t * t;
  return 15.0 / 16.0 * u * u;
}
double quartic_d1(double t) {
  if (std::abs(t) >= 1.0) return 0.0;
  return -15.0 / 4.0 * t * (1.0 - t * t);
}
double quartic_d2(double t) {
  if (std::abs(t) >= 1.0) return 0.0;
  return -15.0 / 4.0 * (1.0 - 3.0 * t * t);
}

// C^infinity bump, normalised to unit integral. int exp(-1/(1-t^2)) dt over
// (-1,1) = 0.443993816168... (frozen once from converged quadrature).
constexpr double kBumpMass = 0.44399381616807968;
double bump_raw(double t) {
  const double u = 1.0 - t * t;
  if (u < 1e-8) return 0.0;
  return std::exp(-1.0 / u);
}
double bump_fn(double t) { return bump_raw(t) / kBumpMass; }
double bump_d1(double t) {
  const double u = 1.0 - t * t;
  if (u < 1e-8) return 0.0;
  return bump_fn(t) * (-2.0 * t) / (u * u);
}
double bump_d2(double t) {
  const double u = 1.0 - t * t;
  if (u < 1e-8) return 0.0;
  const double g = -2.0 * t / (u * u);
  const double gp = (-2.0 * u - 8.0 * t * t) / (u * u * u);
  return bump_fn(t) * (g * g + gp);
}

double scanned_lipschitz(const std::function<double(double)>& f, double a) {
  double best = 0.0;
  const int n = 1 << 15;
  const double h = 2.0 * (a + a / 16.0) / n;
  double prev = f(-a - a / 16.0);
  for (int i = 1; i <= n; ++i) {
    const double cur = f(-a - a / 16.0 + i * h);
    best = std::max(best, std::abs(cur - prev) / h);
    prev = cur;
  }
  return best * 1.005;
}

// Declared L for a smooth factor: covers the slopes of all derivative orders
// the dimension requires, with the product-structure inflation factor.
double smooth_product_lipschitz(const std::vector<std::function<double(double)>>& levels,
                                double a, int dim) {
  const std::size_t orders_needed =
      std::min(levels.size(), static_cast<std::size_t>(dim / 2 + 2));
  double max_slope = 0.0, max_sup = 0.0;
  for (std::size_t j = 0; j < orders_needed; ++j) {
    max_slope = std::max(max_slope, scanned_lipschitz(levels[j], a));
    double sup = 0.0;
    for (double t : probe_nodes(-a, a, 4096)) sup = std::max(sup, std::abs(levels[j](t)));
    max_sup = std::max(max_sup, sup);
  }
  return std::sqrt(static_cast<double>(dim)) * max_slope *
         std::pow(std::max(1.0, max_sup), dim - 1);
}

Kernel named_univariate(const std::string& name, int dim) {
  if (name == "triangle") {
    return make_product_kernel(triangle_fn, 1.0, 1.0, dim, "triangle");
  }
  if (name == "epanechnikov") {
    return make_product_kernel(epanechnikov_fn, 1.0, 1.5, dim, "epanechnikov");
  }
  if (name == "quartic") {
    Kernel k = make_product_kernel(quartic_fn, 1.0, 5.0 / (2.0 * std::sqrt(3.0)), dim, "quartic");
    k.structure = KernelStructure::smooth;
    k.factor_derivs = {quartic_d1, quartic_d2};
    k.lipschitz = std::max(
        k.lipschitz, smooth_product_lipschitz({quartic_fn, quartic_d1, quartic_d2}, 1.0, dim));
    return k;
  }
  if (name == "bump") {
    Kernel k = make_product_kernel(bump_fn, 1.0, scanned_lipschitz(bump_fn, 1.0), dim, "bump");
    k.structure = KernelStructure::smooth;
    k.factor_derivs = {bump_d1, bump_d2};
    k.lipschitz =
        std::max(k.lipschitz, smooth_product_lipschitz({bump_fn, bump_d1, bump_d2}, 1.0, dim));
    return k;
  }
  throw std::domain_error("kernel_from_name: unknown kernel '" + name + "'");
}

}  // namespace

Kernel kernel_from_name(const std::string& name, int dim) {
  if (name.rfind("w_ell:", 0) == 0) {
    const auto rest = name.substr(6);
    const auto colon = rest.find(':');
    if (colon == std::string::npos)
      throw std::domain_error("kernel_from_name: expected w_ell:<base>:<ell>");
    const std::string base = rest.substr(0, colon);
    const int ell = std::stoi(rest.substr(colon + 1));
    const Kernel b = named_univariate(base, 1);
    Kernel k = build_w_kernel(b.factor, b.support_radius, b.lipschitz, ell, dim);
    k.id = name;
    if (b.structure == KernelStructure::smooth && !b.factor_derivs.empty()) {
      // Derivatives of w_ell follow the same binomial combination.
      std::vector<std::function<double(double)>> derivs;
      for (std::size_t order = 1; order <= b.factor_derivs.size(); ++order) {
        auto wd = b.factor_derivs[order - 1];
        const int e = ell;
        derivs.push_back([wd, e, order](double y) {
          double s = 0.0;
          for (int i = 1; i <= e; ++i) {
            const double c = binomial(e, i) * ((i % 2 == 1) ? 1.0 : -1.0) /
                             std::pow(static_cast<double>(i), static_cast<double>(order) + 1.0);
            s += c * wd(y / static_cast<double>(i));
          }
          return s;
        });
      }
      k.factor_derivs = std::move(derivs);
      k.structure = KernelStructure::smooth;
      double lip = k.lipschitz;
      for (const auto& fd : k.factor_derivs)
        lip = std::max(lip, scanned_lipschitz(fd, k.support_radius));
      k.lipschitz = lip;
    }
    return k;
  }
  return named_univariate(name, dim);
}

Kernel kernel_from_samples(const std::vector<double>& t, const std::vector<double>& v, int dim,
                           std::string id) {
  if (t.size() != v.size() || t.size() < 2)
    throw std::domain_error("kernel_from_samples: need matching t/value columns, >= 2 rows");
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1])) throw std::domain_error("kernel_from_samples: t must be increasing");
  const double a = std::max(std::abs(t.front()), std::abs(t.back()));
  auto ts = t;
  auto vs = v;
  auto interp = [ts, vs](double x) {
    if (x <= ts.front() || x >= ts.back()) return 0.0;
    const auto it = std::upper_bound(ts.begin(), ts.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - ts.begin());
    const double w = (x - ts[i - 1]) / (ts[i] - ts[i - 1]);
    return vs[i - 1] * (1.0 - w) + vs[i] * w;
  };
  double lip = 0.0;
  for (std::size_t i = 1; i < ts.size(); ++i)
    lip = std::max(lip, std::abs(vs[i] - vs[i - 1]) / (ts[i] - ts[i - 1]));
  return make_product_kernel(interp, a, lip * 1.0001, dim, std::move(id));
}

Kernel kernel_from_samples_csv(const std::string& path, int dim) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("kernel_from_samples_csv: cannot open " + path);
  std::vector<double> t, v;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double a, b;
    if (row >> a >> b) {
      t.push_back(a);
      v.push_back(b);
    }
  }
  return kernel_from_samples(t, v, dim, "csv:" + path);
}

}  // namespace upfn
