#include "upfn/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace upfn {

namespace {
constexpr double kEps = 1e-12;
}

GeometricNet::GeometricNet(double base_, int s_max_) : base(base_), s_max(s_max_) {
  if (!(base > 0.0) || base > std::exp(-2.0) * (1.0 + 1e-12))
    throw std::domain_error("GeometricNet: base must lie in (0, e^-2]");
  if (s_max < 0) throw std::domain_error("GeometricNet: s_max must be nonnegative");
}

double GeometricNet::value(int s) const {
  if (s < 0 || s > s_max) throw std::domain_error("GeometricNet: index outside [0, s_max]");
  return base * std::exp(-static_cast<double>(s));
}

double BandwidthBox::volume() const {
  double v = 1.0;
  for (std::size_t j = 0; j < lo.size(); ++j) v *= (hi[j] - lo[j]);
  return v;
}

bool BandwidthBox::contains(std::span<const double> x) const {
  for (std::size_t j = 0; j < lo.size(); ++j)
    if (x[j] < lo[j] || x[j] >= hi[j]) return false;
  return true;
}

MultiBandwidth::MultiBandwidth(GeometricNet net, double half_width, int dim,
                               std::vector<BandwidthBox> boxes, std::string id)
    : net_(net), b_(half_width), d_(dim), boxes_(std::move(boxes)), id_(std::move(id)) {
  validate_and_index();
}

MultiBandwidth MultiBandwidth::constant(GeometricNet net, double half_width, int dim,
                                        std::vector<int> levels, std::string id) {
  BandwidthBox box;
  box.lo.assign(static_cast<std::size_t>(dim), -half_width);
  box.hi.assign(static_cast<std::size_t>(dim), half_width);
  box.levels = std::move(levels);
  return MultiBandwidth(net, half_width, dim, {box}, std::move(id));
}

MultiBandwidth MultiBandwidth::on_grid(GeometricNet net, double half_width, int dim,
                                       int cells_per_axis,
                                       std::vector<std::vector<int>> levels_raster,
                                       std::string id) {
  std::int64_t cells = 1;
  for (int j = 0; j < dim; ++j) cells *= cells_per_axis;
  if (static_cast<std::int64_t>(levels_raster.size()) != cells)
    throw std::invalid_argument("MultiBandwidth::on_grid: raster size mismatch");
  const double w = 2.0 * half_width / cells_per_axis;
  std::vector<BandwidthBox> boxes(static_cast<std::size_t>(cells));
  for (std::int64_t c = 0; c < cells; ++c) {
    std::int64_t rem = c;
    BandwidthBox& box = boxes[static_cast<std::size_t>(c)];
    box.lo.resize(static_cast<std::size_t>(dim));
    box.hi.resize(static_cast<std::size_t>(dim));
    for (int j = dim - 1; j >= 0; --j) {
      const std::int64_t i = rem % cells_per_axis;
      rem /= cells_per_axis;
      box.lo[static_cast<std::size_t>(j)] = -half_width + static_cast<double>(i) * w;
      box.hi[static_cast<std::size_t>(j)] = -half_width + static_cast<double>(i + 1) * w;
    }
    box.levels = std::move(levels_raster[static_cast<std::size_t>(c)]);
  }
  MultiBandwidth h;
  h.net_ = net;
  h.b_ = half_width;
  h.d_ = dim;
  h.boxes_ = std::move(boxes);
  h.id_ = std::move(id);
  h.grid_cells_ = cells_per_axis;  // disjoint by construction: skip the pair scan
  h.validate_and_index();
  return h;
}

void MultiBandwidth::validate_and_index() {
  if (!(b_ > 0.0)) throw std::domain_error("MultiBandwidth: half-width must be positive");
  if (d_ < 1) throw std::domain_error("MultiBandwidth: dimension must be positive");
  if (boxes_.empty()) throw std::domain_error("MultiBandwidth: empty partition");
  double total = 0.0;
  for (const auto& box : boxes_) {
    if (static_cast<int>(box.lo.size()) != d_ || static_cast<int>(box.hi.size()) != d_ ||
        static_cast<int>(box.levels.size()) != d_)
      throw std::domain_error("MultiBandwidth: box arity mismatch");
    for (int j = 0; j < d_; ++j) {
      if (!(box.hi[static_cast<std::size_t>(j)] > box.lo[static_cast<std::size_t>(j)]))
        throw std::domain_error("MultiBandwidth: degenerate box");
      const int s = box.levels[static_cast<std::size_t>(j)];
      if (s < 0 || s > net_.s_max)
        throw std::domain_error("MultiBandwidth: level index outside the net");
    }
    total += box.volume();
  }
  const double domain = std::pow(2.0 * b_, d_);
  if (std::abs(total - domain) > 1e-9 * domain)
    throw std::domain_error("MultiBandwidth: box volumes do not tile the domain");
  // Pairwise overlaps must have zero measure.
  for (std::size_t i = 0; grid_cells_ == 0 && i < boxes_.size(); ++i) {
    for (std::size_t k = i + 1; k < boxes_.size(); ++k) {
      double overlap = 1.0;
      for (int j = 0; j < d_ && overlap > 0.0; ++j) {
        const double lo = std::max(boxes_[i].lo[static_cast<std::size_t>(j)],
                                   boxes_[k].lo[static_cast<std::size_t>(j)]);
        const double hi = std::min(boxes_[i].hi[static_cast<std::size_t>(j)],
                                   boxes_[k].hi[static_cast<std::size_t>(j)]);
        overlap *= std::max(0.0, hi - lo);
      }
      if (overlap > 1e-12 * domain)
        throw std::domain_error("MultiBandwidth: overlapping boxes");
    }
  }
  level_sets_.clear();
  min_volume_ = std::numeric_limits<double>::infinity();
  max_volume_ = 0.0;
  for (const auto& box : boxes_) {
    level_sets_[box.levels] += box.volume();
    double vol = 1.0;
    for (int j = 0; j < d_; ++j) vol *= net_.value(box.levels[static_cast<std::size_t>(j)]);
    min_volume_ = std::min(min_volume_, vol);
    max_volume_ = std::max(max_volume_, vol);
  }
}

bool MultiBandwidth::isotropic() const {
  for (const auto& box : boxes_)
    for (int j = 1; j < d_; ++j)
      if (box.levels[static_cast<std::size_t>(j)] != box.levels[0]) return false;
  return true;
}

std::size_t MultiBandwidth::box_index_at(std::span<const double> x) const {
  if (grid_cells_ > 0) {
    const double w = 2.0 * b_ / grid_cells_;
    std::int64_t flat = 0;
    for (int j = 0; j < d_; ++j) {
      auto i = static_cast<std::int64_t>(std::floor((x[static_cast<std::size_t>(j)] + b_) / w));
      i = std::clamp<std::int64_t>(i, 0, grid_cells_ - 1);
      flat = flat * grid_cells_ + i;
    }
    return static_cast<std::size_t>(flat);
  }
  for (std::size_t i = 0; i < boxes_.size(); ++i)
    if (boxes_[i].contains(x)) return i;
  // Right-boundary points belong to the closure of the last box along an axis.
  for (std::size_t i = 0; i < boxes_.size(); ++i) {
    bool ok = true;
    for (int j = 0; j < d_ && ok; ++j) {
      const double v = x[static_cast<std::size_t>(j)];
      ok = v >= boxes_[i].lo[static_cast<std::size_t>(j)] - kEps &&
           v <= boxes_[i].hi[static_cast<std::size_t>(j)] + kEps;
    }
    if (ok) return i;
  }
  throw std::domain_error("MultiBandwidth: point outside the partition");
}

std::vector<double> MultiBandwidth::value_at(std::span<const double> x) const {
  const auto& box = boxes_[box_index_at(x)];
  std::vector<double> h(static_cast<std::size_t>(d_));
  for (int j = 0; j < d_; ++j)
    h[static_cast<std::size_t>(j)] = net_.value(box.levels[static_cast<std::size_t>(j)]);
  return h;
}

double MultiBandwidth::volume_of_levels(std::span<const int> s) const {
  double v = 1.0;
  for (int j = 0; j < d_; ++j) v *= net_.value(s[static_cast<std::size_t>(j)]);
  return v;
}

double MultiBandwidth::volume_at(std::span<const double> x) const {
  const auto& box = boxes_[box_index_at(x)];
  return volume_of_levels(box.levels);
}

double MultiBandwidth::level_set_measure(std::span<const int> s) const {
  const std::vector<int> key(s.begin(), s.end());
  const auto it = level_sets_.find(key);
  return it == level_sets_.end() ? 0.0 : it->second;
}

double MultiBandwidth::max_value() const {
  int smallest = net_.s_max;
  for (const auto& box : boxes_)
    for (int s : box.levels) smallest = std::min(smallest, s);
  return net_.value(smallest);
}

double v_norm(const MultiBandwidth& h, double m) {
  if (!(m >= 1.0)) throw std::domain_error("v_norm: exponent must be >= 1");
  double sum = 0.0;
  for (const auto& [levels, measure] : h.level_sets()) {
    const double vol = h.volume_of_levels(levels);
    sum += std::pow(vol, -m / 2.0) * measure;
  }
  return std::pow(sum, 1.0 / m);
}

double class_h_functional(const MultiBandwidth& h, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw std::domain_error("class_h_functional: tau in (0,1)");
  double sum = 0.0;
  for (const auto& [levels, measure] : h.level_sets()) sum += std::pow(measure, tau);
  return sum;
}

ClassParams::ClassParams(double tau_, double class_bound_, double A_, double p_, double h_base,
                         int dim)
    : tau(tau_), class_bound(class_bound_), A(A_), p(p_) {
  if (!(tau > 0.0 && tau < 1.0)) throw std::domain_error("ClassParams: tau must lie in (0,1)");
  if (!(class_bound > 0.0)) throw std::domain_error("ClassParams: class bound must be positive");
  if (!(p >= 1.0)) throw std::domain_error("ClassParams: p must be >= 1");
  const double lower = std::pow(h_base, -0.5 * dim);
  if (!(A >= lower * (1.0 - 1e-12)))
    throw std::domain_error("ClassParams: A must be >= h0^{-d/2}");
}

RAResult r_A(const MultiBandwidth& h, const ClassParams& cp, int r_cap) {
  RAResult out;
  const int r0 = static_cast<int>(std::floor(cp.p)) + 1;
  for (int r = r0; r <= r_cap; ++r) {
    const double m = static_cast<double>(r) * cp.p / (static_cast<double>(r) - cp.p);
    if (v_norm(h, m) <= cp.A) {
      out.member = true;
      out.r = r;
      out.scanned_up_to = r;
      return out;
    }
  }
  out.member = false;
  out.scanned_up_to = r_cap;
  return out;
}

ParamRelationResult check_param_relation_log(double ln_h_base, double ln_A, double tau, int d) {
  ParamRelationResult res;
  res.rhs = 2.0 * std::sqrt(2.0 * (1.0 - tau) * std::abs(ln_h_base)) -
            static_cast<double>(d) * std::log(4.0);
  if (!(ln_A > 1.0)) {  // A <= e: ln ln A undefined or nonpositive
    res.warning = true;
    res.holds = true;
    res.lhs = -std::numeric_limits<double>::infinity();
    return res;
  }
  res.lhs = static_cast<double>(d) * std::log(ln_A);
  res.holds = res.lhs <= res.rhs;
  return res;
}

ParamRelationResult check_param_relation(double h_base, double A, double tau, int d) {
  if (!(h_base > 0.0 && h_base < std::exp(-2.0) * (1.0 + 1e-12)))
    throw std::domain_error("check_param_relation: h0 must lie in (0, e^-2)");
  if (!std::isfinite(A)) {
    ParamRelationResult res;
    res.holds = false;
    res.lhs = std::numeric_limits<double>::infinity();
    res.rhs = 2.0 * std::sqrt(2.0 * (1.0 - tau) * std::abs(std::log(h_base))) -
              static_cast<double>(d) * std::log(4.0);
    return res;
  }
  return check_param_relation_log(std::log(h_base), std::log(A), tau, d);
}

EpsilonDrivenParams epsilon_driven_params(double eps) {
  if (!(eps > 0.0) || eps > std::exp(-2.0) * (1.0 + 1e-12))
    throw std::domain_error("epsilon_driven_params: eps must lie in (0, e^-2]");
  const double l = std::abs(std::log(eps));
  return {std::exp(-std::sqrt(l)), std::exp(l * l)};
}

double NikolskiiParams::beta_harmonic() const {
  double inv = 0.0;
  for (double bj : beta) inv += 1.0 / bj;
  return 1.0 / inv;
}

double NikolskiiParams::upsilon() const {
  double inv = 0.0;
  for (std::size_t j = 0; j < beta.size(); ++j) inv += 1.0 / (r[j] * beta[j]);
  return 1.0 / inv;
}

void NikolskiiParams::validate(double p) const {
  if (beta.empty() || beta.size() != r.size() || beta.size() != L.size())
    throw std::domain_error("NikolskiiParams: beta/r/L arity mismatch");
  if (ell < 1) throw std::domain_error("NikolskiiParams: ell must be positive");
  for (std::size_t j = 0; j < beta.size(); ++j) {
    if (!(beta[j] > 0.0 && beta[j] <= static_cast<double>(ell)))
      throw std::domain_error("NikolskiiParams: beta_j must lie in (0, ell]");
    if (!(r[j] >= 1.0 && r[j] <= p))
      throw std::domain_error("NikolskiiParams: r_j must lie in [1, p]");
    if (!(L[j] > 0.0)) throw std::domain_error("NikolskiiParams: L_j must be positive");
  }
}

int s_epsilon_grid(const NikolskiiParams& np, double eps, double h_base, int j) {
  if (j < 0 || j >= np.dim()) throw std::domain_error("s_epsilon_grid: axis out of range");
  const double beta = np.beta_harmonic();
  const double expo = 2.0 * beta / ((2.0 * beta + 1.0) * np.beta[static_cast<std::size_t>(j)]);
  const double target = std::pow(eps, expo);
  // h0 e^{-S} in (target/e, target]  <=>  S = ceil(ln h0 - ln target)
  const double u = std::log(h_base) - std::log(target);
  auto S = static_cast<int>(std::ceil(u - 1e-12));
  if (!(h_base * std::exp(-static_cast<double>(S)) <= target * (1.0 + 1e-12)) ||
      !(h_base * std::exp(-static_cast<double>(S)) > target / std::exp(1.0) * (1.0 - 1e-12)))
    throw std::domain_error("s_epsilon_grid: no net value in the window for axis " +
                            std::to_string(j + 1));
  if (S < 1)
    throw std::domain_error("s_epsilon_grid: eps too large, no positive index for axis " +
                            std::to_string(j + 1));
  return S;
}

std::int64_t GriddedFunction::point_count() const {
  std::int64_t c = 1;
  for (int j = 0; j < d; ++j) c *= n;
  return c;
}

std::vector<double> GriddedFunction::point(std::int64_t flat) const {
  std::vector<double> x(static_cast<std::size_t>(d));
  const double w = cell_width();
  for (int j = d - 1; j >= 0; --j) {
    const std::int64_t i = flat % n;
    flat /= n;
    x[static_cast<std::size_t>(j)] = -b + (static_cast<double>(i) + 0.5) * w;
  }
  return x;
}

GriddedFunction GriddedFunction::tabulate(double b, int d, int n,
                                          const std::function<double(std::span<const double>)>& f) {
  GriddedFunction g;
  g.b = b;
  g.d = d;
  g.n = n;
  g.values.resize(static_cast<std::size_t>(g.point_count()));
  for (std::int64_t i = 0; i < g.point_count(); ++i)
    g.values[static_cast<std::size_t>(i)] = f(g.point(i));
  return g;
}

namespace {

// Discrete convolution (K_h * f)(x) over the tabulation, zero extension
// outside the domain; flags when the kernel support leaves the domain.
double discrete_bias(const GriddedFunction& f, const Kernel& K, std::span<const double> h,
                     std::span<const double> x, double fx, bool* boundary) {
  const int d = f.d;
  const double w = f.cell_width();
  const double a = K.support_radius;
  std::vector<std::int64_t> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
  double vol = 1.0;
  for (int j = 0; j < d; ++j) {
    const double radius = a * h[static_cast<std::size_t>(j)];
    if (x[static_cast<std::size_t>(j)] - radius < -f.b ||
        x[static_cast<std::size_t>(j)] + radius > f.b)
      *boundary = true;
    lo[static_cast<std::size_t>(j)] = static_cast<std::int64_t>(
        std::floor((x[static_cast<std::size_t>(j)] - radius + f.b) / w - 0.5));
    hi[static_cast<std::size_t>(j)] = static_cast<std::int64_t>(
        std::ceil((x[static_cast<std::size_t>(j)] + radius + f.b) / w - 0.5));
    lo[static_cast<std::size_t>(j)] = std::max<std::int64_t>(lo[static_cast<std::size_t>(j)], 0);
    hi[static_cast<std::size_t>(j)] = std::min<std::int64_t>(hi[static_cast<std::size_t>(j)], f.n - 1);
    if (lo[static_cast<std::size_t>(j)] > hi[static_cast<std::size_t>(j)]) return std::abs(fx);
    vol *= h[static_cast<std::size_t>(j)];
  }
  double conv = 0.0;
  std::vector<std::int64_t> idx(lo.begin(), lo.end());
  std::vector<double> t(static_cast<std::size_t>(d));
  const double cell = std::pow(w, d);
  while (true) {
    std::int64_t flat = 0;
    for (int j = 0; j < d; ++j) {
      flat = flat * f.n + idx[static_cast<std::size_t>(j)];
      t[static_cast<std::size_t>(j)] =
          (-f.b + (static_cast<double>(idx[static_cast<std::size_t>(j)]) + 0.5) * w -
           x[static_cast<std::size_t>(j)]) /
          h[static_cast<std::size_t>(j)];
    }
    conv += K.evaluate(t) * f.at(flat);
    int j = d - 1;
    for (; j >= 0; --j) {
      if (++idx[static_cast<std::size_t>(j)] <= hi[static_cast<std::size_t>(j)]) break;
      idx[static_cast<std::size_t>(j)] = lo[static_cast<std::size_t>(j)];
    }
    if (j < 0) break;
  }
  conv *= cell / vol;
  return std::abs(conv - fx);
}

}  // namespace

SelectorResult nikolskii_select(const NikolskiiParams& np, const GriddedFunction& f,
                                const Kernel& K, double eps, const GeometricNet& net,
                                int s_max) {
  const int d = f.d;
  if (np.dim() != d) throw std::domain_error("nikolskii_select: dimension mismatch");
  if (s_max > net.s_max) throw std::domain_error("nikolskii_select: s_max outside the net");
  std::vector<int> s_lo(static_cast<std::size_t>(d));
  std::int64_t n_candidates = 1;
  for (int j = 0; j < d; ++j) {
    s_lo[static_cast<std::size_t>(j)] = s_epsilon_grid(np, eps, net.base, j);
    if (s_lo[static_cast<std::size_t>(j)] > s_max)
      throw std::domain_error("nikolskii_select: empty candidate grid for axis " +
                              std::to_string(j + 1));
    n_candidates *= (s_max - s_lo[static_cast<std::size_t>(j)] + 1);
  }

  // Enumerate candidates in lexicographic order of the index vector so the
  // first strict minimum is the tie-break winner.
  std::vector<std::vector<int>> candidates;
  candidates.reserve(static_cast<std::size_t>(n_candidates));
  std::vector<int> cur(s_lo.begin(), s_lo.end());
  while (true) {
    candidates.push_back(cur);
    int j = d - 1;
    for (; j >= 0; --j) {
      if (++cur[static_cast<std::size_t>(j)] <= s_max) break;
      cur[static_cast<std::size_t>(j)] = s_lo[static_cast<std::size_t>(j)];
    }
    if (j < 0) break;
  }
  std::vector<std::vector<double>> cand_h(candidates.size());
  std::vector<double> cand_penalty(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    double vol = 1.0;
    cand_h[c].resize(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
      cand_h[c][static_cast<std::size_t>(j)] = net.value(candidates[c][static_cast<std::size_t>(j)]);
      vol *= cand_h[c][static_cast<std::size_t>(j)];
    }
    cand_penalty[c] = eps / std::sqrt(vol);
  }

  const std::int64_t points = f.point_count();
  std::vector<std::vector<int>> chosen(static_cast<std::size_t>(points));
  std::vector<std::uint8_t> boundary(static_cast<std::size_t>(points), 0);
  for (std::int64_t i = 0; i < points; ++i) {
    const auto x = f.point(i);
    const double fx = f.at(i);
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_c = 0;
    bool best_boundary = false;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      bool bd = false;
      const double objective = discrete_bias(f, K, cand_h[c], x, fx, &bd) + cand_penalty[c];
      if (objective < best * (1.0 - 1e-15)) {
        best = objective;
        best_c = c;
        best_boundary = bd;
      }
    }
    chosen[static_cast<std::size_t>(i)] = candidates[best_c];
    boundary[static_cast<std::size_t>(i)] = best_boundary ? 1 : 0;
  }
  MultiBandwidth h = MultiBandwidth::on_grid(net, f.b, d, f.n, std::move(chosen), "selector");
  return SelectorResult{std::move(h), std::move(boundary)};
}

double nikolskii_class_bound(const NikolskiiParams& np, double tau, double b, int d) {
  if (!(tau > 0.0 && tau < 1.0)) throw std::domain_error("nikolskii_class_bound: tau in (0,1)");
  double sum = std::pow(2.0 * b, d);
  for (std::size_t j = 0; j < np.beta.size(); ++j) {
    const double kappa =
        std::pow(static_cast<double>(d) *
                     (std::exp(np.beta[j]) - std::exp(np.beta[j] - 0.5)) * np.C_tilde * np.L[j],
                 np.r[j]);
    sum += std::pow(kappa, tau) * std::pow(1.0 - std::exp(-tau * np.r[j] / 2.0), -d);
  }
  return sum;
}

double nikolskii_membership_radius(const NikolskiiParams& np, double p,
                                   std::optional<double> frak_p) {
  const double beta = np.beta_harmonic();
  const double upsilon = np.upsilon();
  const double top = upsilon * (2.0 + 1.0 / beta);
  if (!(top > p))
    throw std::domain_error("nikolskii_membership_radius: requires upsilon(2+1/beta) > p");
  const double fp = frak_p.value_or(0.5 * (p + top));
  if (!(fp > p && fp < top))
    throw std::domain_error("nikolskii_membership_radius: dual exponent outside (p, upsilon(2+1/beta))");
  const int d = np.dim();
  double tail = 0.0;
  for (std::size_t j = 0; j < np.r.size(); ++j)
    tail += std::pow(np.C_tilde * np.L[j], np.r[j]);
  const double gap = top - fp;
  const double series = 1.0 / (1.0 - std::exp(-gap));
  const double base = std::pow(2.0 * std::exp(0.5 * d), fp) +
                      std::pow(2.0 * std::exp(0.5 * d + 1.0), fp) * series * tail;
  return std::pow(base, 1.0 / fp);
}

void save_multibandwidth_csv(const MultiBandwidth& h, std::ostream& out) {
  const int d = h.dim();
  for (int j = 1; j <= d; ++j) out << "box_min_" << j << ",";
  for (int j = 1; j <= d; ++j) out << "box_max_" << j << ",";
  for (int j = 1; j <= d; ++j) out << "s_" << j << (j == d ? "" : ",");
  out << "\n";
  out.precision(17);
  for (const auto& box : h.boxes()) {
    for (int j = 0; j < d; ++j) out << box.lo[static_cast<std::size_t>(j)] << ",";
    for (int j = 0; j < d; ++j) out << box.hi[static_cast<std::size_t>(j)] << ",";
    for (int j = 0; j < d; ++j)
      out << box.levels[static_cast<std::size_t>(j)] << (j == d - 1 ? "" : ",");
    out << "\n";
  }
}

MultiBandwidth load_multibandwidth_csv(std::istream& in, const GeometricNet& net,
                                       double half_width, int dim) {
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("load_multibandwidth_csv: empty input");
  std::vector<BandwidthBox> boxes;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    BandwidthBox box;
    box.lo.resize(static_cast<std::size_t>(dim));
    box.hi.resize(static_cast<std::size_t>(dim));
    box.levels.resize(static_cast<std::size_t>(dim));
    for (int j = 0; j < dim; ++j) row >> box.lo[static_cast<std::size_t>(j)];
    for (int j = 0; j < dim; ++j) row >> box.hi[static_cast<std::size_t>(j)];
    for (int j = 0; j < dim; ++j) row >> box.levels[static_cast<std::size_t>(j)];
    if (!row) throw std::runtime_error("load_multibandwidth_csv: malformed row");
    boxes.push_back(std::move(box));
  }
  return MultiBandwidth(net, half_width, dim, std::move(boxes), "csv");
}

void save_gridded_csv(const GriddedFunction& f, std::ostream& out) {
  out.precision(17);
  out << "b," << f.b << ",d," << f.d << ",n," << f.n << "\n";
  const double w = f.cell_width();
  for (int i = 0; i < f.n; ++i) out << (-f.b + (i + 0.5) * w) << (i == f.n - 1 ? "\n" : ",");
  for (std::int64_t i = 0; i < f.point_count(); ++i)
    out << f.values[static_cast<std::size_t>(i)] << ((i + 1) % f.n == 0 ? "\n" : ",");
}

GriddedFunction load_gridded_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_gridded_csv: empty input");
  GriddedFunction g;
  {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream head(line);
    std::string kb, kd, kn;
    head >> kb >> g.b >> kd >> g.d >> kn >> g.n;
    if (!head || kb != "b" || kd != "d" || kn != "n")
      throw std::runtime_error("load_gridded_csv: malformed header");
  }
  std::getline(in, line);  // axis coordinates; recomputed from (b, n)
  g.values.reserve(static_cast<std::size_t>(g.point_count()));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double v;
    while (row >> v) g.values.push_back(v);
  }
  if (static_cast<std::int64_t>(g.values.size()) != g.point_count())
    throw std::runtime_error("load_gridded_csv: value count mismatch");
  return g;
}

}  // namespace upfn
