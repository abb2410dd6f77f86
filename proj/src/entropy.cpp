#include "upfn/entropy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "upfn/rng.hpp"

namespace upfn {

TabulationGrid TabulationGrid::interval(double lo_, double hi_, int n_) {
  TabulationGrid g;
  g.k = 1;
  g.lo = {lo_};
  g.hi = {hi_};
  g.n = {n_};
  return g;
}

std::int64_t TabulationGrid::node_count() const {
  std::int64_t c = 1;
  for (int nj : n) c *= nj;
  return c;
}

double TabulationGrid::node_weight() const {
  double w = 1.0;
  for (int j = 0; j < k; ++j)
    w *= (hi[static_cast<std::size_t>(j)] - lo[static_cast<std::size_t>(j)]) /
         static_cast<double>(n[static_cast<std::size_t>(j)]);
  return w;
}

std::vector<double> TabulationGrid::node(std::int64_t flat) const {
  std::vector<double> x(static_cast<std::size_t>(k));
  for (int j = k - 1; j >= 0; --j) {
    const std::int64_t i = flat % n[static_cast<std::size_t>(j)];
    flat /= n[static_cast<std::size_t>(j)];
    const double w = (hi[static_cast<std::size_t>(j)] - lo[static_cast<std::size_t>(j)]) /
                     static_cast<double>(n[static_cast<std::size_t>(j)]);
    x[static_cast<std::size_t>(j)] = lo[static_cast<std::size_t>(j)] + (static_cast<double>(i) + 0.5) * w;
  }
  return x;
}

FunctionCloud::FunctionCloud(TabulationGrid grid, std::vector<std::vector<double>> samples,
                             std::string descriptor)
    : grid_(std::move(grid)), samples_(std::move(samples)), descriptor_(std::move(descriptor)) {
  if (samples_.empty()) throw std::domain_error("FunctionCloud: no samples");
  const auto nodes = static_cast<std::size_t>(grid_.node_count());
  for (const auto& s : samples_)
    if (s.size() != nodes) throw std::domain_error("FunctionCloud: tabulation size mismatch");
  const std::size_t n = samples_.size();
  dist_.assign(n * n, 0.0);
  const double w = grid_.node_weight();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < nodes; ++t) {
        const double diff = samples_[i][t] - samples_[j][t];
        acc += diff * diff;
      }
      const double dij = std::sqrt(acc * w);
      dist_[i * n + j] = dij;
      dist_[j * n + i] = dij;
    }
  }
}

double FunctionCloud::distance(std::size_t i, std::size_t j) const {
  return dist_[i * samples_.size() + j];
}

double FunctionCloud::diameter() const {
  double d = 0.0;
  for (double v : dist_) d = std::max(d, v);
  return d;
}

double FunctionCloud::resolution() const {
  double d = std::numeric_limits<double>::infinity();
  const std::size_t n = samples_.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (dist_[i * n + j] > 0.0) d = std::min(d, dist_[i * n + j]);
  return std::isfinite(d) ? d : 0.0;
}

FunctionCloud FunctionCloud::scaled(double c) const {
  auto scaled_samples = samples_;
  for (auto& s : scaled_samples)
    for (auto& v : s) v *= c;
  return FunctionCloud(grid_, std::move(scaled_samples), descriptor_);
}

int covering_number_greedy(const FunctionCloud& cloud, double delta) {
  const std::size_t n = cloud.size();
  // Farthest-point traversal; ties broken toward the lowest sample index.
  std::vector<double> to_center(n, std::numeric_limits<double>::infinity());
  std::size_t next = 0;  // first center is sample 0
  int count = 0;
  while (true) {
    ++count;
    for (std::size_t i = 0; i < n; ++i)
      to_center[i] = std::min(to_center[i], cloud.distance(next, i));
    double far = 0.0;
    std::size_t far_i = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (to_center[i] > far * (1.0 + 1e-15) && to_center[i] > delta) {
        far = to_center[i];
        far_i = i;
      }
    }
    if (far_i == n) return count;
    next = far_i;
  }
}

namespace {

// Circumcenter data for a support subset, derived from pairwise distances
// only: with convex weights w on the support (sum 1), the squared distance of
// point j to the center is sum_k w_k d(j,k)^2 - Q, Q = (1/2) sum w w d^2.
struct SupportBall {
  bool valid = false;  // solvable with nonnegative weights
  std::vector<double> w;
  double q = 0.0;
};

bool solve_linear(std::vector<std::vector<double>>& a, std::vector<double>& rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-12) return false;
    std::swap(a[piv], a[col]);
    std::swap(rhs[piv], rhs[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  for (std::size_t r = 0; r < n; ++r) rhs[r] /= a[r][r];
  return true;
}

}  // namespace

const std::vector<double>& FunctionCloud::enclosing_radius2() const {
  if (!meb_rad2_.empty()) return meb_rad2_;
  const std::size_t n = samples_.size();
  if (n > 16) throw std::domain_error("enclosing_radius2: cloud too large");
  const std::uint32_t masks = 1u << n;
  auto d2 = [&](std::size_t i, std::size_t j) {
    const double d = dist_[i * n + j];
    return d * d;
  };
  // circumcenter weights per support subset
  std::vector<SupportBall> balls(masks);
  for (std::uint32_t t = 1; t < masks; ++t) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      if (t & (1u << i)) idx.push_back(i);
    const std::size_t k = idx.size();
    SupportBall ball;
    ball.w.assign(k, 0.0);
    if (k == 1) {
      ball.w[0] = 1.0;
      ball.q = 0.0;
      ball.valid = true;
    } else {
      std::vector<std::vector<double>> a(k, std::vector<double>(k, 0.0));
      std::vector<double> rhs(k, 0.0);
      for (std::size_t row = 0; row + 1 < k; ++row) {
        for (std::size_t col = 0; col < k; ++col)
          a[row][col] = d2(idx[0], idx[col]) - d2(idx[row + 1], idx[col]);
        rhs[row] = 0.0;
      }
      for (std::size_t col = 0; col < k; ++col) a[k - 1][col] = 1.0;
      rhs[k - 1] = 1.0;
      if (solve_linear(a, rhs)) {
        ball.valid = true;
        for (double wv : rhs)
          if (wv < -1e-9) ball.valid = false;
        if (ball.valid) {
          ball.w = rhs;
          double q = 0.0;
          for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j)
              q += ball.w[i] * ball.w[j] * d2(idx[i], idx[j]);
          ball.q = 0.5 * q;
        }
      }
    }
    balls[t] = std::move(ball);
  }
  // distance of every cloud point to every valid circumcenter
  std::vector<std::vector<double>> center_d2(masks);
  for (std::uint32_t t = 1; t < masks; ++t) {
    if (!balls[t].valid) continue;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      if (t & (1u << i)) idx.push_back(i);
    center_d2[t].assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < idx.size(); ++i) acc += balls[t].w[i] * d2(j, idx[i]);
      center_d2[t][j] = acc - balls[t].q;
    }
  }
  // minimum enclosing radius per subset: best valid support inside the subset
  meb_rad2_.assign(masks, 0.0);
  for (std::uint32_t mask = 1; mask < masks; ++mask) {
    double best = std::numeric_limits<double>::infinity();
    for (std::uint32_t t = mask;; t = (t - 1) & mask) {
      if (t == 0) break;
      if (balls[t].valid) {
        double worst = 0.0;
        for (std::size_t j = 0; j < n; ++j)
          if (mask & (1u << j)) worst = std::max(worst, center_d2[t][j]);
        // the support's circumradius must realise the subset maximum
        double support_r2 = 0.0;
        for (std::size_t j = 0; j < n; ++j)
          if (t & (1u << j)) support_r2 = std::max(support_r2, center_d2[t][j]);
        if (worst <= support_r2 * (1.0 + 1e-9) + 1e-15) best = std::min(best, support_r2);
      }
    }
    meb_rad2_[mask] = best;
  }
  return meb_rad2_;
}

int covering_number_exact(const FunctionCloud& cloud, double delta) {
  const std::size_t n = cloud.size();
  if (n > 16) throw std::domain_error("covering_number_exact: cloud too large");
  const auto& rad2 = cloud.enclosing_radius2();
  const std::uint32_t all = (1u << n) - 1u;
  const double lim = delta * delta * (1.0 + 1e-12);
  // partition into coverable parts: exact set-cover DP over bitmasks
  std::vector<int> dp(all + 1u, 1 << 20);
  dp[0] = 0;
  for (std::uint32_t mask = 1; mask <= all; ++mask) {
    const std::uint32_t low = mask & (~mask + 1u);
    for (std::uint32_t part = mask;; part = (part - 1) & mask) {
      if (part == 0) break;
      if ((part & low) && rad2[part] <= lim)
        dp[mask] = std::min(dp[mask], dp[mask ^ part] + 1);
    }
  }
  return dp[all];
}

int covering_number(const FunctionCloud& cloud, double delta) {
  if (!(delta > 0.0)) throw std::domain_error("covering_number: delta must be positive");
  if (cloud.size() <= 12) return covering_number_exact(cloud, delta);
  return covering_number_greedy(cloud, delta);
}

double dudley_integral(const FunctionCloud& cloud, double sigma_top, int points_per_decade,
                       double* delta_min_out) {
  if (!(sigma_top > 0.0)) throw std::domain_error("dudley_integral: sigma_top must be positive");
  const double upper = 0.5 * sigma_top;
  const double res = cloud.resolution();
  if (cloud.size() < 2 || res <= 0.0) {
    if (delta_min_out) *delta_min_out = upper;
    return 0.0;
  }
  // below half the minimal pairwise distance every ball holds one point, so
  // the covering count is constant and that stretch integrates in closed form
  const double delta_min = std::min(0.5 * res, upper);
  if (delta_min_out) *delta_min_out = delta_min;
  // Below the resolution the covering count is constant; integrate exactly.
  const double n_small = covering_number(cloud, delta_min * (1.0 - 1e-9));
  double integral = delta_min * std::sqrt(std::log(n_small));
  if (upper > delta_min) {
    const auto decades = std::log10(upper / delta_min);
    const int pts = std::max(4, static_cast<int>(std::ceil(decades * points_per_decade)));
    double prev_delta = delta_min;
    double prev_val = std::sqrt(std::log(static_cast<double>(covering_number(cloud, delta_min))));
    for (int i = 1; i <= pts; ++i) {
      const double delta =
          delta_min * std::pow(upper / delta_min, static_cast<double>(i) / pts);
      const double val = std::sqrt(std::log(static_cast<double>(covering_number(cloud, delta))));
      integral += 0.5 * (val + prev_val) * (delta - prev_delta);
      prev_delta = delta;
      prev_val = val;
    }
  }
  return 4.0 * std::sqrt(2.0) * integral;
}

namespace {

// Central differences (one-sided at the edges) along one axis.
std::vector<double> grid_derivative(std::span<const double> values, const TabulationGrid& grid,
                                    int axis) {
  const std::int64_t nodes = grid.node_count();
  std::vector<double> out(static_cast<std::size_t>(nodes));
  const int k = grid.k;
  std::int64_t stride = 1;
  for (int j = k - 1; j > axis; --j) stride *= grid.n[static_cast<std::size_t>(j)];
  const int naxis = grid.n[static_cast<std::size_t>(axis)];
  const double w = (grid.hi[static_cast<std::size_t>(axis)] - grid.lo[static_cast<std::size_t>(axis)]) /
                   naxis;
  for (std::int64_t i = 0; i < nodes; ++i) {
    const std::int64_t pos = (i / stride) % naxis;
    if (pos == 0)
      out[static_cast<std::size_t>(i)] =
          (values[static_cast<std::size_t>(i + stride)] - values[static_cast<std::size_t>(i)]) / w;
    else if (pos == naxis - 1)
      out[static_cast<std::size_t>(i)] =
          (values[static_cast<std::size_t>(i)] - values[static_cast<std::size_t>(i - stride)]) / w;
    else
      out[static_cast<std::size_t>(i)] = (values[static_cast<std::size_t>(i + stride)] -
                                          values[static_cast<std::size_t>(i - stride)]) /
                                         (2.0 * w);
  }
  return out;
}

double seminorm_term(std::span<const double> values, const TabulationGrid& grid, double m,
                     double alpha) {
  const std::int64_t nodes = grid.node_count();
  const double w = grid.node_weight();
  const double expo = static_cast<double>(grid.k) + m * alpha;
  double acc = 0.0;
  std::vector<std::vector<double>> pts(static_cast<std::size_t>(nodes));
  for (std::int64_t i = 0; i < nodes; ++i) pts[static_cast<std::size_t>(i)] = grid.node(i);
  for (std::int64_t i = 0; i < nodes; ++i) {
    for (std::int64_t j = i + 1; j < nodes; ++j) {
      double d2 = 0.0;
      for (int t = 0; t < grid.k; ++t) {
        const double diff = pts[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)] -
                            pts[static_cast<std::size_t>(j)][static_cast<std::size_t>(t)];
        d2 += diff * diff;
      }
      const double dist = std::sqrt(d2);
      acc += 2.0 *
             std::pow(std::abs(values[static_cast<std::size_t>(i)] -
                               values[static_cast<std::size_t>(j)]),
                      m) /
             std::pow(dist, expo);
    }
  }
  return acc * w * w;
}

}  // namespace

double ss_norm(std::span<const double> values, const TabulationGrid& grid, double gamma,
               double m) {
  if (!(m >= 1.0)) throw std::domain_error("ss_norm: m must be >= 1");
  if (!(gamma > 0.0) || std::abs(gamma - std::round(gamma)) < 1e-12)
    throw std::domain_error("ss_norm: gamma must be positive and non-integer");
  const int floor_gamma = static_cast<int>(std::floor(gamma));
  if (floor_gamma > 1) throw std::domain_error("ss_norm: floor(gamma) > 1 unsupported");
  const double alpha = gamma - floor_gamma;
  const double w = grid.node_weight();
  double lm = 0.0;
  for (double v : values) lm += std::pow(std::abs(v), m);
  lm = std::pow(lm * w, 1.0 / m);
  double semi = 0.0;
  if (floor_gamma == 0) {
    semi = seminorm_term(values, grid, m, alpha);
  } else {
    for (int axis = 0; axis < grid.k; ++axis) {
      const auto dv = grid_derivative(values, grid, axis);
      semi += seminorm_term(dv, grid, m, alpha);
    }
  }
  return lm + std::pow(semi, 1.0 / m);
}

namespace {

// Decaying cosine expansion; coefficients are sign-heavy uniforms so the
// sampled set reaches toward the corners of the coefficient ellipsoid.
std::vector<double> sample_expansion(const TabulationGrid& grid, double gamma,
                                     std::uint64_t seed, int sample_index, int n_basis) {
  const std::int64_t nodes = grid.node_count();
  std::vector<double> f(static_cast<std::size_t>(nodes), 0.0);
  const int k = grid.k;
  // frequency multi-indices ordered by max coordinate
  std::vector<std::vector<int>> freqs;
  for (int total = 1; static_cast<int>(freqs.size()) < n_basis && total < 4 * n_basis; ++total) {
    std::vector<int> idx(static_cast<std::size_t>(k), 0);
    std::function<void(int, int)> rec = [&](int axis, int maxc) {
      if (static_cast<int>(freqs.size()) >= n_basis) return;
      if (axis == k) {
        int mc = 0;
        for (int v : idx) mc = std::max(mc, v);
        if (mc == maxc) freqs.push_back(idx);
        return;
      }
      for (int v = 0; v <= maxc; ++v) {
        idx[static_cast<std::size_t>(axis)] = v;
        rec(axis + 1, maxc);
      }
    };
    rec(0, total);
  }
  for (std::size_t q = 0; q < freqs.size(); ++q) {
    const auto [u1, u2] = uniform_pair(seed, static_cast<std::uint64_t>(sample_index),
                                       static_cast<std::uint64_t>(q));
    const double sign = u1 < 0.5 ? -1.0 : 1.0;
    const double mag = 0.25 + 0.75 * u2;
    double order = 0.0;
    for (int v : freqs[q]) order = std::max(order, static_cast<double>(v));
    const double coef = sign * mag * std::pow(order, -gamma - 0.5);
    for (std::int64_t i = 0; i < nodes; ++i) {
      const auto x = grid.node(i);
      double basis = 1.0;
      for (int j = 0; j < k; ++j) {
        const double len = grid.hi[static_cast<std::size_t>(j)] - grid.lo[static_cast<std::size_t>(j)];
        basis *= std::cos(std::numbers::pi * freqs[q][static_cast<std::size_t>(j)] *
                          (x[static_cast<std::size_t>(j)] - grid.lo[static_cast<std::size_t>(j)]) / len);
      }
      f[static_cast<std::size_t>(i)] += coef * basis;
    }
  }
  return f;
}

std::vector<double> log_spaced(double lo, double hi, int per_decade) {
  const double decades = std::log10(hi / lo);
  const int pts = std::max(6, static_cast<int>(std::ceil(decades * per_decade)));
  std::vector<double> out(static_cast<std::size_t>(pts) + 1);
  for (int i = 0; i <= pts; ++i)
    out[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, static_cast<double>(i) / pts);
  return out;
}

struct SlopeFit {
  double slope = 0.0;
  double residual = 0.0;
  int usable = 0;
};

// Growth exponent of the entropy ln N(delta) ~ c delta^{-slope}: least squares
// of ln ln N against ln(1/delta). The fit window keeps the resolved scales
// (4 <= N <= n/4) away from the top-level cluster plateau and the sample
// saturation; it widens when too few points qualify.
SlopeFit fit_entropy_slope(const std::vector<double>& deltas, const std::vector<int>& covering,
                           std::size_t cloud_size) {
  SlopeFit fit;
  auto collect = [&](int n_lo, int n_hi, std::vector<double>& xs, std::vector<double>& ys) {
    xs.clear();
    ys.clear();
    for (std::size_t i = 0; i < deltas.size(); ++i) {
      if (covering[i] >= n_lo && covering[i] <= n_hi) {
        xs.push_back(std::log(1.0 / deltas[i]));
        ys.push_back(std::log(std::log(static_cast<double>(covering[i]))));
      }
    }
  };
  std::vector<double> xs, ys;
  const int n = static_cast<int>(cloud_size);
  collect(4, std::max(8, n / 4), xs, ys);
  if (xs.size() < 4) collect(2, n - 1, xs, ys);
  fit.usable = static_cast<int>(xs.size());
  if (fit.usable < 2) return fit;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(ys.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  fit.slope = sxy / sxx;
  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - my - fit.slope * (xs[i] - mx);
    rss += e * e;
  }
  fit.residual = std::sqrt(rss / static_cast<double>(xs.size()));
  return fit;
}

}  // namespace

double lambda_star_radius_scaling(double lambda_unit, double radius, double gamma, int k) {
  return std::pow(radius, static_cast<double>(k) / gamma) * lambda_unit;
}

LambdaStarEstimate estimate_lambda_star(double gamma, double m, const TabulationGrid& domain,
                                        int budget, std::uint64_t seed, double radius) {
  LambdaStarEstimate est;
  est.gamma = gamma;
  est.m = m;
  est.k = domain.k;
  est.budget = budget;
  const double hypothesis = static_cast<double>(domain.k) / m - static_cast<double>(domain.k) / 2.0;
  if (!(gamma > hypothesis))
    throw std::domain_error("estimate_lambda_star: requires gamma > k/m - k/2");
  if (budget < 1) throw std::domain_error("estimate_lambda_star: budget must be positive");

  std::vector<std::vector<double>> samples;
  samples.reserve(static_cast<std::size_t>(budget));
  const int n_basis = std::max(24, 8 * domain.k * domain.k);
  for (int i = 0; i < budget; ++i) {
    auto f = sample_expansion(domain, gamma, seed, i, n_basis);
    const double norm = ss_norm(f, domain, gamma, m);
    const double scale = norm > 0.0 ? radius / norm : 0.0;
    for (auto& v : f) v *= scale;
    samples.push_back(std::move(f));
  }
  // The sup runs over dyadic prefix sub-clouds as well, so enlarging the
  // budget extends the family of sub-clouds and the estimate cannot drop.
  double sup = 0.0;
  for (int size = budget; size >= 2; size /= 2) {
    std::vector<std::vector<double>> prefix(samples.begin(), samples.begin() + size);
    FunctionCloud cloud(domain, std::move(prefix), "ss-ball calibration");
    if (cloud.resolution() <= 0.0) continue;
    const auto deltas = log_spaced(cloud.resolution(), std::max(cloud.diameter(), radius), 32);
    std::vector<int> covering;
    for (double delta : deltas) {
      const int nd = covering_number_greedy(cloud, delta);
      covering.push_back(nd);
      sup = std::max(sup, std::pow(delta, static_cast<double>(domain.k) / gamma) *
                              std::log(static_cast<double>(nd)));
    }
    if (size == budget) {
      est.deltas = deltas;
      est.covering = covering;
      est.fitted_slope = fit_entropy_slope(deltas, covering, cloud.size()).slope;
    }
  }
  est.value = sup;
  return est;
}

ScalingCheck check_entropy_scaling_ss(double gamma, double m, const TabulationGrid& domain,
                                      int budget, std::uint64_t seed) {
  const auto est = estimate_lambda_star(gamma, m, domain, budget, seed, 1.0);
  ScalingCheck check;
  check.reference_slope = static_cast<double>(domain.k) / gamma;
  const auto fit = fit_entropy_slope(est.deltas, est.covering, static_cast<std::size_t>(budget));
  check.fitted_slope = fit.slope;
  check.residual = fit.residual;
  check.usable_points = fit.usable;
  if (fit.usable < 4) throw std::runtime_error("check_entropy_scaling: insufficient resolution");
  check.pass = check.fitted_slope <= check.reference_slope * 1.25;
  return check;
}

ScalingCheck check_entropy_scaling_qclass(const QClassParams& params, int budget,
                                          std::uint64_t seed) {
  const double hs = params.h_base * std::exp(-static_cast<double>(params.s1));
  const double q = 1.0 / (1.0 - 1.0 / static_cast<double>(params.r));  // dual exponent of r
  const double lambda = std::pow(2.0 * params.b, params.tau / static_cast<double>(params.r));
  const auto domain = TabulationGrid::interval(-params.kernel_radius - params.b,
                                               params.kernel_radius + params.b, 257);
  const auto inner = TabulationGrid::interval(-params.b, params.b, 257);
  const double wcell = inner.node_weight();
  std::vector<std::vector<double>> samples;
  samples.reserve(static_cast<std::size_t>(budget));
  for (int i = 0; i < budget; ++i) {
    // random dual-ball element: cosine expansion rescaled to unit L_q norm
    std::vector<double> ell(static_cast<std::size_t>(inner.node_count()), 0.0);
    for (int freq = 0; freq < 16; ++freq) {
      const auto [u1, u2] =
          uniform_pair(seed ^ 0x51C0FFEEu, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(freq));
      const double coef = (u1 < 0.5 ? -1.0 : 1.0) * (0.25 + 0.75 * u2);
      for (std::int64_t t = 0; t < inner.node_count(); ++t) {
        const double x = inner.node(t)[0];
        ell[static_cast<std::size_t>(t)] +=
            coef * std::cos(std::numbers::pi * freq * (x + params.b) / (2.0 * params.b));
      }
    }
    double lq = 0.0;
    for (double v : ell) lq += std::pow(std::abs(v), q);
    lq = std::pow(lq * wcell, 1.0 / q);
    if (lq > 0.0)
      for (auto& v : ell) v /= lq;
    std::vector<double> qfun(static_cast<std::size_t>(domain.node_count()), 0.0);
    for (std::int64_t t = 0; t < domain.node_count(); ++t) {
      const double y = domain.node(t)[0];
      double conv = 0.0;
      for (std::int64_t u = 0; u < inner.node_count(); ++u) {
        const double x = inner.node(u)[0];
        conv += params.factor((y - x) / hs) * ell[static_cast<std::size_t>(u)];
      }
      qfun[static_cast<std::size_t>(t)] = conv * wcell / (lambda * std::sqrt(hs));
    }
    samples.push_back(std::move(qfun));
  }
  FunctionCloud cloud(domain, std::move(samples), "convolution class");
  std::vector<double> deltas;
  std::vector<int> covering;
  ScalingCheck check;
  check.reference_slope = 1.0 / params.omega;
  if (cloud.resolution() <= 0.0) {
    check.fitted_slope = 0.0;
    check.usable_points = 0;
    check.pass = true;  // degenerate cloud: nothing to resolve
    return check;
  }
  for (double delta : log_spaced(cloud.resolution(), cloud.diameter(), 32)) {
    deltas.push_back(delta);
    covering.push_back(covering_number_greedy(cloud, delta));
  }
  const auto fit = fit_entropy_slope(deltas, covering, cloud.size());
  check.fitted_slope = fit.slope;
  check.residual = fit.residual;
  check.usable_points = fit.usable;
  if (fit.usable < 4 && cloud.size() > 1)
    throw std::runtime_error("check_entropy_scaling: insufficient resolution");
  check.pass = check.fitted_slope <= check.reference_slope * 1.25;
  return check;
}

}  // namespace upfn
