#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace upfn {

// Uniform cell-centered tabulation grid on a box in R^k.
struct TabulationGrid {
  int k = 1;
  std::vector<double> lo, hi;
  std::vector<int> n;  // cells per axis

  static TabulationGrid interval(double lo, double hi, int n);
  std::int64_t node_count() const;
  double node_weight() const;  // quadrature weight per node
  std::vector<double> node(std::int64_t flat) const;
};

// Finite set of tabulated functions with the weighted-L2 metric.
class FunctionCloud {
 public:
  FunctionCloud(TabulationGrid grid, std::vector<std::vector<double>> samples,
                std::string descriptor = "");
  const TabulationGrid& grid() const { return grid_; }
  std::size_t size() const { return samples_.size(); }
  const std::vector<std::vector<double>>& samples() const { return samples_; }
  const std::string& descriptor() const { return descriptor_; }
  double distance(std::size_t i, std::size_t j) const;
  double diameter() const;
  double resolution() const;  // smallest positive pairwise distance
  FunctionCloud scaled(double c) const;
  // squared enclosing-ball radius per subset bitmask (size <= 16; lazy)
  const std::vector<double>& enclosing_radius2() const;

 private:
  TabulationGrid grid_;
  std::vector<std::vector<double>> samples_;
  std::string descriptor_;
  std::vector<double> dist_;  // dense pairwise distances
  mutable std::vector<double> meb_rad2_;  // single-threaded lazy cache
};

// Covering by balls of radius delta with unconstrained centers. The greedy
// farthest-point pass (centers on the cloud) is an upper bound on the true
// minimum; clouds of at most 12 points are resolved exactly by enclosing-ball
// set cover.
int covering_number(const FunctionCloud& cloud, double delta);
int covering_number_greedy(const FunctionCloud& cloud, double delta);
int covering_number_exact(const FunctionCloud& cloud, double delta);  // size <= 16

// 4 sqrt(2) int_0^{sigma/2} sqrt(ln N(delta)) d delta with a log-spaced grid
// above the cloud resolution; the region below the resolution (constant N) is
// added in closed form. The cutoff used is reported through delta_min_out.
double dudley_integral(const FunctionCloud& cloud, double sigma_top, int points_per_decade = 32,
                       double* delta_min_out = nullptr);

// Sobolev-Slobodetskii norm of a tabulated function: L_m part plus the
// double-integral seminorm with exponent k + m(gamma - floor(gamma)); the
// diagonal is excluded. Supports floor(gamma) in {0, 1} (derivatives by
// central differences).
double ss_norm(std::span<const double> values, const TabulationGrid& grid, double gamma,
               double m);

struct LambdaStarEstimate {
  double value = 0.0;  // sup over the delta grid of delta^{k/gamma} ln N(delta)
  double gamma = 0.0, m = 0.0;
  int k = 1;
  int budget = 0;
  bool heuristic_lower_bound = true;  // finite-sample calibration, not a proof
  std::vector<double> deltas;
  std::vector<int> covering;
  double fitted_slope = 0.0;  // ln N vs ln(1/delta) regression
};

// Calibration estimate of the entropy constant of the radius-R ball: samples
// `budget` functions from a decaying cosine expansion rescaled onto the
// sphere of the norm, then takes the sup of delta^{k/gamma} ln N(delta).
LambdaStarEstimate estimate_lambda_star(double gamma, double m, const TabulationGrid& domain,
                                        int budget, std::uint64_t seed, double radius = 1.0);

// Entropy scaling across radii: lambda(R) = R^{k/gamma} lambda(1).
double lambda_star_radius_scaling(double lambda_unit, double radius, double gamma, int k);

struct ScalingCheck {
  double fitted_slope = 0.0;
  double reference_slope = 0.0;
  bool pass = false;
  double residual = 0.0;  // rms residual of the fit
  int usable_points = 0;
};

// Fits ln N(delta) ~ slope * ln(1/delta) on a sampled ball and compares the
// slope against the predicted exponent (one-sided, 25% headroom).
ScalingCheck check_entropy_scaling_ss(double gamma, double m, const TabulationGrid& domain,
                                      int budget, std::uint64_t seed);

// Convolution-class samples Q = lambda^{-1} h_s^{-1/2} int k((y-x)/h_s) l(x) dx
// with l ranging over the unit dual ball; checks the fitted slope against 1/omega.
struct QClassParams {
  std::function<double(double)> factor;  // univariate kernel factor
  double kernel_radius = 1.0;
  double h_base = 0.0;
  int s1 = 0;
  double tau = 0.5;
  int r = 2;
  double b = 0.5;
  double omega = 0.6;
};
ScalingCheck check_entropy_scaling_qclass(const QClassParams& params, int budget,
                                          std::uint64_t seed);

}  // namespace upfn
