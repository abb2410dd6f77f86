#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "upfn/bandwidth.hpp"
#include "upfn/kernel.hpp"

namespace upfn {

// Uniform cell grid on the noise domain; increments live on cell centers.
struct LatticeGeometry {
  std::vector<double> lo;
  double spacing = 0.0;
  std::vector<std::int64_t> dims;

  std::int64_t cell_count() const;
  double cell_volume() const;
  std::vector<double> center(std::int64_t flat) const;
  double hi(int axis) const {
    return lo[static_cast<std::size_t>(axis)] +
           spacing * static_cast<double>(dims[static_cast<std::size_t>(axis)]);
  }
};

// Box covering (-b - a*h_top, b + a*h_top)^d with a one-cell margin.
LatticeGeometry make_noise_geometry(double b, int d, double kernel_radius, double h_top,
                                    double spacing);

// Discretised white noise: independent N(0, spacing^d) increments per cell,
// addressed by (seed, replicate, cell) through the counter-based generator.
struct NoiseLattice {
  LatticeGeometry geom;
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;
  std::vector<double> increments;
};

NoiseLattice sample_noise(const LatticeGeometry& geom, std::uint64_t seed,
                          std::uint64_t replicate,
                          std::int64_t cell_cap = (std::int64_t{1} << 24));

// Uniform evaluation grid on (-b,b)^d (cell centers).
struct EvalGrid {
  double b = 0.5;
  int d = 1;
  int n = 256;

  std::int64_t point_count() const;
  double cell_volume() const;
  std::vector<double> point(std::int64_t flat) const;
};

// Precomputed convolution weights xi_h(x_i) = sum_c w_{ic} W_c for one
// bandwidth; the weights are noise-independent, so a replicate evaluation is
// a sparse dot product.
class FieldEvaluator {
 public:
  FieldEvaluator(const Kernel& k, const MultiBandwidth& h, const EvalGrid& grid,
                 const LatticeGeometry& geom,
                 std::int64_t weight_cap = (std::int64_t{1} << 26));
  void evaluate(const NoiseLattice& noise, std::span<double> out) const;
  std::vector<double> evaluate(const NoiseLattice& noise) const;
  std::int64_t weight_count() const { return static_cast<std::int64_t>(weights_.size()); }

 private:
  std::int64_t points_ = 0;
  std::vector<std::int64_t> offsets_;
  std::vector<std::uint32_t> cells_;
  std::vector<double> weights_;
};

// One-shot evaluation of the field for a single bandwidth.
std::vector<double> evaluate_field(const Kernel& k, const MultiBandwidth& h,
                                   const NoiseLattice& noise, const EvalGrid& grid);

// Riemann-sum L_p norm on the evaluation grid.
double lp_norm(std::span<const double> values, const EvalGrid& grid, double p);

// Discrete counterpart of the level-set norm, on the evaluation grid weights.
double discrete_v_norm(const MultiBandwidth& h, double m, const EvalGrid& grid);

// Covariance of the field at two points by quadrature over the overlap of the
// two shifted kernel supports.
double exact_covariance(const Kernel& k, const MultiBandwidth& h, std::span<const double> x,
                        std::span<const double> y, double step = 0.0);

// E ||xi_h||_p^p = gamma_p ||K||_2^p ||V_h^{-1/2}||_p^p  (pointwise the field
// is N(0, ||K||_2^2 / V_h)).
double exact_lp_moment(const Kernel& k, const MultiBandwidth& h, double p, double step = 0.0);

// Samples for a bandwidth collection on a shared noise realisation.
struct FieldSample {
  EvalGrid grid;
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;
  double delta = 0.0;
  std::string kernel_id;
  std::vector<std::string> bandwidth_ids;
  std::vector<std::vector<double>> values;  // per bandwidth
};

// Evaluate the whole collection on one noise draw; the shared lattice couples
// every bandwidth on the same probability space.
FieldSample evaluate_field_sample(const Kernel& k,
                                  const std::vector<MultiBandwidth>& collection,
                                  const NoiseLattice& noise, const EvalGrid& grid);

// Raw dump: magic "UPFN", version, d, grid dims, replicate count, then
// little-endian doubles in replicate-major order.
void write_field_dump(std::ostream& out, const EvalGrid& grid, std::int64_t replicates,
                      std::span<const double> values);
std::vector<double> read_field_dump(std::istream& in, EvalGrid* grid_out,
                                    std::int64_t* replicates_out);

}  // namespace upfn
