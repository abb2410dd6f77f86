#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "upfn/kernel.hpp"

namespace upfn {

// Admissible bandwidth values h0 * e^{-s}, s = 0..s_max.
struct GeometricNet {
  double base = 0.0;  // h0, must lie in (0, e^{-2}]
  int s_max = 40;

  GeometricNet() = default;
  GeometricNet(double base_, int s_max_ = 40);
  double value(int s) const;
};

// Axis-aligned box [lo, hi) carrying one net index per coordinate.
struct BandwidthBox {
  std::vector<double> lo, hi;
  std::vector<int> levels;  // s_j
  double volume() const;
  bool contains(std::span<const double> x) const;
};

// Piecewise-constant multi-bandwidth on a finite box partition of (-b,b)^d.
// All class functionals are exact sums over the level-set decomposition.
class MultiBandwidth {
 public:
  MultiBandwidth(GeometricNet net, double half_width, int dim, std::vector<BandwidthBox> boxes,
                 std::string id = "");
  static MultiBandwidth constant(GeometricNet net, double half_width, int dim,
                                 std::vector<int> levels, std::string id = "");
  // Regular-grid partition (cells_per_axis^d cells in raster order); O(1) lookup.
  static MultiBandwidth on_grid(GeometricNet net, double half_width, int dim, int cells_per_axis,
                                std::vector<std::vector<int>> levels_raster, std::string id = "");

  const GeometricNet& net() const { return net_; }
  double half_width() const { return b_; }
  int dim() const { return d_; }
  const std::vector<BandwidthBox>& boxes() const { return boxes_; }
  const std::string& id() const { return id_; }
  bool isotropic() const;

  std::size_t box_index_at(std::span<const double> x) const;
  std::vector<double> value_at(std::span<const double> x) const;  // h_j(x)
  double volume_at(std::span<const double> x) const;              // V_h(x)
  double volume_of_levels(std::span<const int> s) const;

  // nu_d(Lambda_s), exact over the partition.
  double level_set_measure(std::span<const int> s) const;
  const std::map<std::vector<int>, double>& level_sets() const { return level_sets_; }

  double min_volume() const { return min_volume_; }
  double max_volume() const { return max_volume_; }
  double max_value() const;  // largest coordinate bandwidth anywhere

 private:
  MultiBandwidth() = default;
  GeometricNet net_;
  double b_ = 0.0;
  int d_ = 1;
  std::vector<BandwidthBox> boxes_;
  std::map<std::vector<int>, double> level_sets_;
  double min_volume_ = 0.0, max_volume_ = 0.0;
  int grid_cells_ = 0;  // >0 when the partition is a raster grid
  std::string id_;
  void validate_and_index();
};

// ||V_h^{-1/2}||_m over (-b,b)^d, exact over the level sets.
double v_norm(const MultiBandwidth& h, double m);

// sum_s nu_d(Lambda_s)^tau; membership in the tau/L class means <= L.
double class_h_functional(const MultiBandwidth& h, double tau);

struct ClassParams {
  double tau = 0.5;
  double class_bound = 1.0;  // script-L
  double A = 1.0;
  double p = 2.0;
  ClassParams(double tau_, double class_bound_, double A_, double p_, double h_base, int dim);
};

struct RAResult {
  bool member = false;
  int r = 0;           // valid when member
  int scanned_up_to = 0;
};

// Smallest integer r > p with ||V_h^{-1/2}||_{rp/(r-p)} <= A; explicit
// not-a-member result when the scan cap is exhausted.
RAResult r_A(const MultiBandwidth& h, const ClassParams& cp, int r_cap = 10000);

struct ParamRelationResult {
  bool holds = false;
  bool warning = false;  // A <= e: log-log undefined or nonpositive
  double lhs = 0.0, rhs = 0.0;
};

// d ln ln A <= 2 sqrt(2 (1-tau) |ln h0|) - d ln 4
ParamRelationResult check_param_relation(double h_base, double A, double tau, int d);
ParamRelationResult check_param_relation_log(double ln_h_base, double ln_A, double tau, int d);

struct EpsilonDrivenParams {
  double h_base = 0.0;
  double A = 0.0;
};
// h0 = exp(-sqrt|ln eps|), A = exp(ln^2 eps).
EpsilonDrivenParams epsilon_driven_params(double eps);

// Anisotropic smoothness-class data driving the bandwidth selector.
struct NikolskiiParams {
  std::vector<double> beta;  // in (0, ell]
  std::vector<double> r;     // in [1, p]
  std::vector<double> L;     // positive
  int ell = 1;
  double C_tilde = 1.0;  // bias constant in the class bound; not derivable here

  int dim() const { return static_cast<int>(beta.size()); }
  double beta_harmonic() const;  // 1/beta = sum_j 1/beta_j
  double upsilon() const;        // 1/upsilon = sum_j 1/(r_j beta_j)
  void validate(double p) const;
};

// Unique integer S with e^{-1} eps^{2beta/((2beta+1)beta_j)} < h0 e^{-S}
//                                      <= eps^{2beta/((2beta+1)beta_j)}.
int s_epsilon_grid(const NikolskiiParams& np, double eps, double h_base, int j);

// Function tabulated at the centers of a uniform cell grid on (-b,b)^d.
struct GriddedFunction {
  double b = 0.5;
  int d = 1;
  int n = 256;  // cells per axis
  std::vector<double> values;

  std::int64_t point_count() const;
  double cell_width() const { return 2.0 * b / n; }
  std::vector<double> point(std::int64_t flat) const;
  double at(std::int64_t flat) const { return values[static_cast<std::size_t>(flat)]; }
  static GriddedFunction tabulate(double b, int d, int n,
                                  const std::function<double(std::span<const double>)>& f);
};

struct SelectorResult {
  MultiBandwidth bandwidth;
  std::vector<std::uint8_t> boundary_flag;  // kernel support left the domain
};

// Pointwise argmin over the candidate net grid of
//   |(K_h * f)(x) - f(x)| + eps V_h^{-1/2},
// ties broken toward the lexicographically smallest index vector.
SelectorResult nikolskii_select(const NikolskiiParams& np, const GriddedFunction& f,
                                const Kernel& K, double eps, const GeometricNet& net, int s_max);

// Closed-form class bound sum_j kappa_j^tau (1-e^{-tau r_j/2})^{-d} + (2b)^d
// with kappa_j = {d (e^{beta_j} - e^{beta_j - 1/2}) C~ L_j}^{r_j}.
double nikolskii_class_bound(const NikolskiiParams& np, double tau, double b, int d);

// Norm-class radius C such that ||V^{-1/2}|| <= C eps^{-1/(2beta+1)} for the
// selector family, evaluated at a chosen dual exponent (default: midpoint of
// the admissible interval (p, upsilon(2+1/beta))).
double nikolskii_membership_radius(const NikolskiiParams& np, double p,
                                   std::optional<double> frak_p = std::nullopt);

// CSV: box_min_1..d, box_max_1..d, s_1..d
void save_multibandwidth_csv(const MultiBandwidth& h, std::ostream& out);
MultiBandwidth load_multibandwidth_csv(std::istream& in, const GeometricNet& net,
                                       double half_width, int dim);

// CSV grid dump with a header row of axis coordinates.
void save_gridded_csv(const GriddedFunction& f, std::ostream& out);
GriddedFunction load_gridded_csv(std::istream& in);

}  // namespace upfn
