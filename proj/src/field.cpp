#include "upfn/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "upfn/quadrature.hpp"
#include "upfn/rng.hpp"

namespace upfn {

std::int64_t LatticeGeometry::cell_count() const {
  std::int64_t c = 1;
  for (auto n : dims) c *= n;
  return c;
}

double LatticeGeometry::cell_volume() const {
  return std::pow(spacing, static_cast<double>(dims.size()));
}

std::vector<double> LatticeGeometry::center(std::int64_t flat) const {
  const int d = static_cast<int>(dims.size());
  std::vector<double> x(static_cast<std::size_t>(d));
  for (int j = d - 1; j >= 0; --j) {
    const std::int64_t i = flat % dims[static_cast<std::size_t>(j)];
    flat /= dims[static_cast<std::size_t>(j)];
    x[static_cast<std::size_t>(j)] = lo[static_cast<std::size_t>(j)] + (static_cast<double>(i) + 0.5) * spacing;
  }
  return x;
}

LatticeGeometry make_noise_geometry(double b, int d, double kernel_radius, double h_top,
                                    double spacing) {
  if (!(spacing > 0.0)) throw std::domain_error("make_noise_geometry: spacing must be positive");
  LatticeGeometry g;
  g.spacing = spacing;
  const double half = b + kernel_radius * h_top + spacing;
  const auto n = static_cast<std::int64_t>(std::ceil(2.0 * half / spacing));
  g.lo.assign(static_cast<std::size_t>(d), -0.5 * static_cast<double>(n) * spacing);
  g.dims.assign(static_cast<std::size_t>(d), n);
  return g;
}

NoiseLattice sample_noise(const LatticeGeometry& geom, std::uint64_t seed,
                          std::uint64_t replicate, std::int64_t cell_cap) {
  const std::int64_t cells = geom.cell_count();
  if (cells > cell_cap)
    throw std::runtime_error("sample_noise: lattice of " + std::to_string(cells) +
                             " cells exceeds the capacity cap");
  NoiseLattice noise;
  noise.geom = geom;
  noise.seed = seed;
  noise.replicate = replicate;
  noise.increments.resize(static_cast<std::size_t>(cells));
  const double sd = std::sqrt(geom.cell_volume());
  for (std::int64_t c = 0; c < cells; ++c)
    noise.increments[static_cast<std::size_t>(c)] =
        sd * normal_variate(seed, replicate, static_cast<std::uint64_t>(c));
  return noise;
}

std::int64_t EvalGrid::point_count() const {
  std::int64_t c = 1;
  for (int j = 0; j < d; ++j) c *= n;
  return c;
}

double EvalGrid::cell_volume() const { return std::pow(2.0 * b / n, static_cast<double>(d)); }

std::vector<double> EvalGrid::point(std::int64_t flat) const {
  std::vector<double> x(static_cast<std::size_t>(d));
  const double w = 2.0 * b / n;
  for (int j = d - 1; j >= 0; --j) {
    const std::int64_t i = flat % n;
    flat /= n;
    x[static_cast<std::size_t>(j)] = -b + (static_cast<double>(i) + 0.5) * w;
  }
  return x;
}

FieldEvaluator::FieldEvaluator(const Kernel& k, const MultiBandwidth& h, const EvalGrid& grid,
                               const LatticeGeometry& geom, std::int64_t weight_cap) {
  if (h.dim() != grid.d || k.dim != grid.d)
    throw std::domain_error("FieldEvaluator: dimension mismatch");
  points_ = grid.point_count();
  offsets_.assign(static_cast<std::size_t>(points_) + 1, 0);
  const int d = grid.d;
  const double a = k.support_radius;
  std::vector<double> t(static_cast<std::size_t>(d));
  for (std::int64_t i = 0; i < points_; ++i) {
    const auto x = grid.point(i);
    const auto hv = h.value_at(x);
    double vol = 1.0;
    std::vector<std::int64_t> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
      const double radius = a * hv[static_cast<std::size_t>(j)];
      vol *= hv[static_cast<std::size_t>(j)];
      const double xl = x[static_cast<std::size_t>(j)] - radius;
      const double xh = x[static_cast<std::size_t>(j)] + radius;
      if (xl < geom.lo[static_cast<std::size_t>(j)] || xh > geom.hi(j))
        throw std::runtime_error("FieldEvaluator: kernel support exits the noise lattice");
      lo[static_cast<std::size_t>(j)] = static_cast<std::int64_t>(
          std::floor((xl - geom.lo[static_cast<std::size_t>(j)]) / geom.spacing - 0.5));
      hi[static_cast<std::size_t>(j)] = static_cast<std::int64_t>(
          std::ceil((xh - geom.lo[static_cast<std::size_t>(j)]) / geom.spacing - 0.5));
      lo[static_cast<std::size_t>(j)] = std::max<std::int64_t>(lo[static_cast<std::size_t>(j)], 0);
      hi[static_cast<std::size_t>(j)] = std::min<std::int64_t>(
          hi[static_cast<std::size_t>(j)], geom.dims[static_cast<std::size_t>(j)] - 1);
    }
    const double inv_vol = 1.0 / vol;
    std::vector<std::int64_t> idx(lo.begin(), lo.end());
    while (true) {
      std::int64_t flat = 0;
      for (int j = 0; j < d; ++j) {
        flat = flat * geom.dims[static_cast<std::size_t>(j)] + idx[static_cast<std::size_t>(j)];
        t[static_cast<std::size_t>(j)] =
            (geom.lo[static_cast<std::size_t>(j)] +
             (static_cast<double>(idx[static_cast<std::size_t>(j)]) + 0.5) * geom.spacing -
             x[static_cast<std::size_t>(j)]) /
            hv[static_cast<std::size_t>(j)];
      }
      const double w = k.evaluate(t) * inv_vol;
      if (w != 0.0) {
        if (static_cast<std::int64_t>(weights_.size()) >= weight_cap)
          throw std::runtime_error("FieldEvaluator: weight table exceeds the capacity cap");
        cells_.push_back(static_cast<std::uint32_t>(flat));
        weights_.push_back(w);
      }
      int j = d - 1;
      for (; j >= 0; --j) {
        if (++idx[static_cast<std::size_t>(j)] <= hi[static_cast<std::size_t>(j)]) break;
        idx[static_cast<std::size_t>(j)] = lo[static_cast<std::size_t>(j)];
      }
      if (j < 0) break;
    }
    offsets_[static_cast<std::size_t>(i) + 1] = static_cast<std::int64_t>(weights_.size());
  }
}

void FieldEvaluator::evaluate(const NoiseLattice& noise, std::span<double> out) const {
  if (static_cast<std::int64_t>(out.size()) != points_)
    throw std::invalid_argument("FieldEvaluator::evaluate: output size mismatch");
  const double* inc = noise.increments.data();
  for (std::int64_t i = 0; i < points_; ++i) {
    double acc = 0.0;
    for (std::int64_t kk = offsets_[static_cast<std::size_t>(i)];
         kk < offsets_[static_cast<std::size_t>(i) + 1]; ++kk)
      acc += weights_[static_cast<std::size_t>(kk)] * inc[cells_[static_cast<std::size_t>(kk)]];
    out[static_cast<std::size_t>(i)] = acc;
  }
}

std::vector<double> FieldEvaluator::evaluate(const NoiseLattice& noise) const {
  std::vector<double> out(static_cast<std::size_t>(points_));
  evaluate(noise, out);
  return out;
}

std::vector<double> evaluate_field(const Kernel& k, const MultiBandwidth& h,
                                   const NoiseLattice& noise, const EvalGrid& grid) {
  return FieldEvaluator(k, h, grid, noise.geom).evaluate(noise);
}

FieldSample evaluate_field_sample(const Kernel& k,
                                  const std::vector<MultiBandwidth>& collection,
                                  const NoiseLattice& noise, const EvalGrid& grid) {
  FieldSample sample;
  sample.grid = grid;
  sample.seed = noise.seed;
  sample.replicate = noise.replicate;
  sample.delta = noise.geom.spacing;
  sample.kernel_id = k.id;
  for (const auto& h : collection) {
    sample.bandwidth_ids.push_back(h.id().empty() ? "h" : h.id());
    sample.values.push_back(evaluate_field(k, h, noise, grid));
  }
  return sample;
}

double lp_norm(std::span<const double> values, const EvalGrid& grid, double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::domain_error("lp_norm: p must lie in [1, inf)");
  double sum = 0.0;
  for (double v : values) sum += std::pow(std::abs(v), p);
  return std::pow(sum * grid.cell_volume(), 1.0 / p);
}

double discrete_v_norm(const MultiBandwidth& h, double m, const EvalGrid& grid) {
  double sum = 0.0;
  for (std::int64_t i = 0; i < grid.point_count(); ++i) {
    const auto x = grid.point(i);
    sum += std::pow(h.volume_at(x), -m / 2.0);
  }
  return std::pow(sum * grid.cell_volume(), 1.0 / m);
}

double exact_covariance(const Kernel& k, const MultiBandwidth& h, std::span<const double> x,
                        std::span<const double> y, double step) {
  const int d = h.dim();
  const auto hx = h.value_at(x);
  const auto hy = h.value_at(y);
  double vx = 1.0, vy = 1.0;
  std::vector<double> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
  const double a = k.support_radius;
  for (int j = 0; j < d; ++j) {
    vx *= hx[static_cast<std::size_t>(j)];
    vy *= hy[static_cast<std::size_t>(j)];
    lo[static_cast<std::size_t>(j)] = std::max(x[static_cast<std::size_t>(j)] - a * hx[static_cast<std::size_t>(j)],
                                               y[static_cast<std::size_t>(j)] - a * hy[static_cast<std::size_t>(j)]);
    hi[static_cast<std::size_t>(j)] = std::min(x[static_cast<std::size_t>(j)] + a * hx[static_cast<std::size_t>(j)],
                                               y[static_cast<std::size_t>(j)] + a * hy[static_cast<std::size_t>(j)]);
    if (!(hi[static_cast<std::size_t>(j)] > lo[static_cast<std::size_t>(j)])) return 0.0;
  }
  if (step <= 0.0) {
    double hmin = hx[0];
    for (int j = 0; j < d; ++j)
      hmin = std::min({hmin, hx[static_cast<std::size_t>(j)], hy[static_cast<std::size_t>(j)]});
    step = a * hmin / 512.0;
  }
  std::vector<double> tx(static_cast<std::size_t>(d)), ty(static_cast<std::size_t>(d));
  const double integral = integrate_midpoint_nd(
      [&](std::span<const double> t) {
        for (int j = 0; j < d; ++j) {
          tx[static_cast<std::size_t>(j)] = (t[static_cast<std::size_t>(j)] - x[static_cast<std::size_t>(j)]) / hx[static_cast<std::size_t>(j)];
          ty[static_cast<std::size_t>(j)] = (t[static_cast<std::size_t>(j)] - y[static_cast<std::size_t>(j)]) / hy[static_cast<std::size_t>(j)];
        }
        return k.evaluate(tx) * k.evaluate(ty);
      },
      lo, hi, step);
  return integral / (vx * vy);
}

double exact_lp_moment(const Kernel& k, const MultiBandwidth& h, double p, double step) {
  if (!(p >= 1.0) || !std::isfinite(p))
    throw std::domain_error("exact_lp_moment: p must lie in [1, inf)");
  const double k2 = step > 0.0 ? kernel_norm(k, 2.0, step) : kernel_norm(k, 2.0);
  const double vp = v_norm(h, p);
  return gaussian_abs_moment(p) * std::pow(k2, p) * std::pow(vp, p);
}

namespace {
void put_u32(std::ostream& out, std::uint32_t v) {
  char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(buf, 4);
}
std::uint32_t get_u32(std::istream& in) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
  return v;
}
}  // namespace

void write_field_dump(std::ostream& out, const EvalGrid& grid, std::int64_t replicates,
                      std::span<const double> values) {
  out.write("UPFN", 4);
  put_u32(out, 1u);  // version
  put_u32(out, static_cast<std::uint32_t>(grid.d));
  put_u32(out, static_cast<std::uint32_t>(grid.n));
  put_u32(out, static_cast<std::uint32_t>(replicates));
  for (double v : values) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
    out.write(buf, 8);
  }
}

std::vector<double> read_field_dump(std::istream& in, EvalGrid* grid_out,
                                    std::int64_t* replicates_out) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "UPFN")
    throw std::runtime_error("read_field_dump: bad magic");
  const std::uint32_t version = get_u32(in);
  if (version != 1u) throw std::runtime_error("read_field_dump: unsupported version");
  EvalGrid grid;
  grid.d = static_cast<int>(get_u32(in));
  grid.n = static_cast<int>(get_u32(in));
  const auto reps = static_cast<std::int64_t>(get_u32(in));
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(reps * grid.point_count()));
  while (true) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    if (!in) break;
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    values.push_back(v);
  }
  if (grid_out) *grid_out = grid;
  if (replicates_out) *replicates_out = reps;
  return values;
}

}  // namespace upfn
