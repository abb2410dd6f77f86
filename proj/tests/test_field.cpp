#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "upfn/field.hpp"
#include "upfn/quadrature.hpp"

using namespace upfn;

namespace {

const double kH0 = std::exp(-2.0);

struct Setup {
  Kernel kernel = kernel_from_name("epanechnikov", 1);
  GeometricNet net{kH0};
  MultiBandwidth h = MultiBandwidth::constant(net, 0.5, 1, {1}, "h1");
  EvalGrid grid{0.5, 1, 64};
  LatticeGeometry geom;
  Setup() { geom = make_noise_geometry(0.5, 1, 1.0, kH0, net.value(1) / 64.0); }
};

double mean_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  return m / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("noise sampling: determinism, independence, moments") {
  Setup s;
  const auto n1 = sample_noise(s.geom, 42, 7);
  const auto n2 = sample_noise(s.geom, 42, 7);
  CHECK(n1.increments == n2.increments);  // bitwise

  const auto n3 = sample_noise(s.geom, 42, 8);
  const std::size_t count = n1.increments.size();
  double dot = 0.0, v1 = 0.0, v3 = 0.0, m1 = 0.0, m3 = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    m1 += n1.increments[i];
    m3 += n3.increments[i];
  }
  m1 /= count;
  m3 /= count;
  for (std::size_t i = 0; i < count; ++i) {
    dot += (n1.increments[i] - m1) * (n3.increments[i] - m3);
    v1 += (n1.increments[i] - m1) * (n1.increments[i] - m1);
    v3 += (n3.increments[i] - m3) * (n3.increments[i] - m3);
  }
  const double corr = dot / std::sqrt(v1 * v3);
  CHECK(std::abs(corr) < 3.0 / std::sqrt(static_cast<double>(count)));

  // standardized increments: mean within 5/sqrt(count), variance within 1 +- 5/sqrt(count)
  const double cell = s.geom.cell_volume();
  double mean = 0.0, var = 0.0;
  for (double x : n1.increments) mean += x / std::sqrt(cell);
  mean /= static_cast<double>(count);
  for (double x : n1.increments) {
    const double z = x / std::sqrt(cell) - mean;
    var += z * z;
  }
  var /= static_cast<double>(count - 1);
  CHECK(std::abs(mean) < 5.0 / std::sqrt(static_cast<double>(count)));
  CHECK(std::abs(var - 1.0) < 5.0 / std::sqrt(static_cast<double>(count)));
}

TEST_CASE("noise lattice capacity cap") {
  Setup s;
  CHECK_THROWS_AS(sample_noise(s.geom, 1, 0, 10), std::runtime_error);
}

TEST_CASE("field evaluation is linear in the increments") {
  Setup s;
  auto noise = sample_noise(s.geom, 3, 0);
  FieldEvaluator eval(s.kernel, s.h, s.grid, s.geom);

  auto zero = noise;
  for (auto& x : zero.increments) x = 0.0;
  for (double v : eval.evaluate(zero)) CHECK(v == 0.0);

  auto twice = noise;
  for (auto& x : twice.increments) x *= 2.0;
  const auto base = eval.evaluate(noise);
  const auto doubled = eval.evaluate(twice);
  for (std::size_t i = 0; i < base.size(); ++i)
    CHECK(doubled[i] == doctest::Approx(2.0 * base[i]).epsilon(1e-14));

  // superposition across two independent draws
  const auto other = sample_noise(s.geom, 3, 1);
  auto sum = noise;
  for (std::size_t i = 0; i < sum.increments.size(); ++i)
    sum.increments[i] += other.increments[i];
  const auto fsum = eval.evaluate(sum);
  const auto fother = eval.evaluate(other);
  for (std::size_t i = 0; i < base.size(); ++i)
    CHECK(fsum[i] == doctest::Approx(base[i] + fother[i]).epsilon(1e-12));
}

TEST_CASE("pointwise variance approaches the covariance diagonal") {
  Setup s;
  FieldEvaluator eval(s.kernel, s.h, s.grid, s.geom);
  const int reps = 5000;
  const std::int64_t probe = s.grid.point_count() / 2;
  std::vector<double> samples(static_cast<std::size_t>(reps));
  std::vector<double> values(static_cast<std::size_t>(s.grid.point_count()));
  for (int i = 0; i < reps; ++i) {
    const auto noise = sample_noise(s.geom, 11, static_cast<std::uint64_t>(i));
    eval.evaluate(noise, values);
    samples[static_cast<std::size_t>(i)] = values[static_cast<std::size_t>(probe)];
  }
  double var = 0.0;
  const double mean = mean_of(samples);
  for (double v : samples) var += (v - mean) * (v - mean);
  var /= reps - 1;
  const double k2 = kernel_norm(s.kernel, 2.0);
  const double target = k2 * k2 / s.net.value(1);
  const double mc_se = target * std::sqrt(2.0 / reps);
  CHECK(std::abs(var - target) < 0.02 * target + 3.0 * mc_se);
}

TEST_CASE("coverage violations are loud") {
  Setup s;
  LatticeGeometry tight = s.geom;
  tight.dims[0] /= 2;
  CHECK_THROWS_AS(FieldEvaluator(s.kernel, s.h, s.grid, tight), std::runtime_error);
}

TEST_CASE("grid L_p norms") {
  EvalGrid grid{1.0, 1, 128};
  std::vector<double> zero(static_cast<std::size_t>(grid.point_count()), 0.0);
  CHECK(lp_norm(zero, grid, 2.0) == 0.0);
  std::vector<double> ones(static_cast<std::size_t>(grid.point_count()), 1.0);
  CHECK(lp_norm(ones, grid, 2.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

  // pathwise comparison of L1 and L2 on the half-width 1/2 domain
  Setup s;
  FieldEvaluator eval(s.kernel, s.h, s.grid, s.geom);
  for (int i = 0; i < 20; ++i) {
    const auto noise = sample_noise(s.geom, 5, static_cast<std::uint64_t>(i));
    const auto values = eval.evaluate(noise);
    const double l1 = lp_norm(values, s.grid, 1.0);
    const double l2 = lp_norm(values, s.grid, 2.0);
    CHECK(l1 <= l2 * std::sqrt(1.0) * (1.0 + 1e-12));
  }
}

TEST_CASE("exact covariance") {
  Setup s;
  const double x0[] = {0.1};
  SUBCASE("diagonal equals the norm ratio") {
    const double cov = exact_covariance(s.kernel, s.h, x0, x0);
    const double k2 = kernel_norm(s.kernel, 2.0);
    CHECK(cov == doctest::Approx(k2 * k2 / s.net.value(1)).epsilon(1e-6));
  }
  SUBCASE("disjoint supports vanish") {
    const double y0[] = {0.1 + 2.5 * s.net.value(1)};
    CHECK(exact_covariance(s.kernel, s.h, x0, y0) == 0.0);
  }
  SUBCASE("symmetry") {
    const double y0[] = {0.1 + 0.4 * s.net.value(1)};
    CHECK(exact_covariance(s.kernel, s.h, x0, y0) ==
          doctest::Approx(exact_covariance(s.kernel, s.h, y0, x0)).epsilon(1e-12));
  }
  SUBCASE("matches the Monte Carlo covariance") {
    const std::int64_t ix = s.grid.point_count() / 2;
    const double hv = s.net.value(1);
    const auto px = s.grid.point(ix);
    std::int64_t iy = ix;
    for (std::int64_t t = ix; t < s.grid.point_count(); ++t) {
      if (s.grid.point(t)[0] >= px[0] + 0.5 * hv) {
        iy = t;
        break;
      }
    }
    const auto py = s.grid.point(iy);
    const double target = exact_covariance(s.kernel, s.h, px, py);
    FieldEvaluator eval(s.kernel, s.h, s.grid, s.geom);
    const int reps = 5000;
    std::vector<double> prods(static_cast<std::size_t>(reps));
    std::vector<double> values(static_cast<std::size_t>(s.grid.point_count()));
    for (int i = 0; i < reps; ++i) {
      const auto noise = sample_noise(s.geom, 21, static_cast<std::uint64_t>(i));
      eval.evaluate(noise, values);
      prods[static_cast<std::size_t>(i)] =
          values[static_cast<std::size_t>(ix)] * values[static_cast<std::size_t>(iy)];
    }
    const double mean = mean_of(prods);
    double var = 0.0;
    for (double v : prods) var += (v - mean) * (v - mean);
    var /= reps - 1;
    CHECK(std::abs(mean - target) <= 5.0 * std::sqrt(var / reps));
  }
}

TEST_CASE("closed-form L_p moment") {
  Setup s;
  SUBCASE("p = 2 on the unit-volume domain") {
    const double k2 = kernel_norm(s.kernel, 2.0);
    CHECK(exact_lp_moment(s.kernel, s.h, 2.0) ==
          doctest::Approx(k2 * k2 / s.net.value(1)).epsilon(1e-6));
  }
  SUBCASE("p = 1 uses the absolute-moment constant") {
    const double k2 = kernel_norm(s.kernel, 2.0);
    CHECK(gaussian_abs_moment(1.0) == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)));
    CHECK(exact_lp_moment(s.kernel, s.h, 1.0) ==
          doctest::Approx(std::sqrt(2.0 / std::numbers::pi) * k2 * v_norm(s.h, 1.0))
              .epsilon(1e-6));
  }
  SUBCASE("piecewise bandwidth matches Monte Carlo") {
    GeometricNet net(kH0);
    BandwidthBox left{{-0.5}, {0.0}, {1}};
    BandwidthBox right{{0.0}, {0.5}, {2}};
    const MultiBandwidth h2(net, 0.5, 1, {left, right}, "two-box");
    const auto geom = make_noise_geometry(0.5, 1, 1.0, kH0, net.value(2) / 64.0);
    FieldEvaluator eval(s.kernel, h2, s.grid, geom);
    const int reps = 2000;
    std::vector<double> samples(static_cast<std::size_t>(reps));
    std::vector<double> values(static_cast<std::size_t>(s.grid.point_count()));
    for (int i = 0; i < reps; ++i) {
      const auto noise = sample_noise(geom, 33, static_cast<std::uint64_t>(i));
      eval.evaluate(noise, values);
      samples[static_cast<std::size_t>(i)] = std::pow(lp_norm(values, s.grid, 2.0), 2.0);
    }
    const double mean = mean_of(samples);
    double var = 0.0;
    for (double v : samples) var += (v - mean) * (v - mean);
    var /= reps - 1;
    const double target = exact_lp_moment(s.kernel, h2, 2.0);
    CHECK(std::abs(mean - target) <= 3.0 * std::sqrt(var / reps) + 0.02 * target);
  }
}

TEST_CASE("gaussianity proxy: pointwise kurtosis") {
  Setup s;
  FieldEvaluator eval(s.kernel, s.h, s.grid, s.geom);
  const int reps = 10000;
  const std::int64_t probes[] = {3, 17, 31, 45, 60};
  std::vector<std::vector<double>> tracks(5);
  std::vector<double> values(static_cast<std::size_t>(s.grid.point_count()));
  for (int i = 0; i < reps; ++i) {
    const auto noise = sample_noise(s.geom, 77, static_cast<std::uint64_t>(i));
    eval.evaluate(noise, values);
    for (int t = 0; t < 5; ++t)
      tracks[static_cast<std::size_t>(t)].push_back(
          values[static_cast<std::size_t>(probes[t])]);
  }
  for (const auto& track : tracks) {
    double m2 = 0.0, m4 = 0.0;
    for (double v : track) {
      m2 += v * v;
      m4 += v * v * v * v;
    }
    m2 /= reps;
    m4 /= reps;
    CHECK(std::abs(m4 / (m2 * m2) - 3.0) < 0.3);
  }
}

TEST_CASE("pathwise norm interpolation inequality on matched grids") {
  GeometricNet net(kH0);
  BandwidthBox left{{-0.5}, {0.0}, {0}};
  BandwidthBox right{{0.0}, {0.5}, {3}};
  const MultiBandwidth h(net, 0.5, 1, {left, right}, "split");
  const auto kernel = kernel_from_name("triangle", 1);
  EvalGrid grid{0.5, 1, 64};
  const auto geom = make_noise_geometry(0.5, 1, 1.0, kH0, net.value(3) / 64.0);
  FieldEvaluator eval(kernel, h, grid, geom);
  const double p = 2.0;
  std::vector<double> vhalf(static_cast<std::size_t>(grid.point_count()));
  for (int i = 0; i < 50; ++i) {
    const auto noise = sample_noise(geom, 9, static_cast<std::uint64_t>(i));
    const auto values = eval.evaluate(noise);
    const double lhs = lp_norm(values, grid, p);
    for (int r = 3; r <= 7; ++r) {
      const double m = r * p / (r - p);
      for (std::int64_t t = 0; t < grid.point_count(); ++t)
        vhalf[static_cast<std::size_t>(t)] =
            std::sqrt(h.volume_at(grid.point(t))) * values[static_cast<std::size_t>(t)];
      const double rhs =
          lp_norm(vhalf, grid, static_cast<double>(r)) * discrete_v_norm(h, m, grid);
      CHECK(lhs <= rhs * (1.0 + 1e-10));
    }
  }
}

TEST_CASE("raw dump round trip") {
  EvalGrid grid{0.5, 1, 16};
  std::vector<double> values;
  for (int i = 0; i < 32; ++i) values.push_back(std::sin(0.1 * i) * 1e3);
  std::stringstream ss;
  write_field_dump(ss, grid, 2, values);
  EvalGrid back;
  std::int64_t reps = 0;
  const auto restored = read_field_dump(ss, &back, &reps);
  CHECK(back.d == grid.d);
  CHECK(back.n == grid.n);
  CHECK(reps == 2);
  REQUIRE(restored.size() == values.size());
  for (std::size_t i = 0; i < values.size(); ++i) CHECK(restored[i] == values[i]);
}

TEST_CASE("collection samples carry provenance") {
  Setup s;
  GeometricNet net(kH0);
  std::vector<MultiBandwidth> collection = {
      MultiBandwidth::constant(net, 0.5, 1, {0}, "a"),
      MultiBandwidth::constant(net, 0.5, 1, {1}, "b")};
  const auto noise = sample_noise(s.geom, 9001, 4);
  const auto sample = evaluate_field_sample(s.kernel, collection, noise, s.grid);
  CHECK(sample.seed == 9001);
  CHECK(sample.replicate == 4);
  CHECK(sample.kernel_id == "epanechnikov");
  REQUIRE(sample.values.size() == 2);
  CHECK(sample.bandwidth_ids == std::vector<std::string>{"a", "b"});
  // rows agree with the single-bandwidth path on the same noise
  const auto direct = evaluate_field(s.kernel, collection[1], noise, s.grid);
  CHECK(sample.values[1] == direct);
}
