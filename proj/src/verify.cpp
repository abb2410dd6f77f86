#include "upfn/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "upfn/quadrature.hpp"
#include "upfn/rng.hpp"

namespace upfn {

double Scenario::resolved_delta() const {
  if (delta > 0.0) return delta;
  double hmin = std::numeric_limits<double>::infinity();
  for (const auto& h : collection)
    for (const auto& box : h.boxes())
      for (int s : box.levels) hmin = std::min(hmin, h.net().value(s));
  return hmin / 64.0;
}

void Scenario::validate() const {
  if (collection.empty()) throw std::domain_error("scenario: empty bandwidth collection");
  if (cfg.d > caps.max_dim) throw std::runtime_error("scenario: dimension above the desk cap");
  if (static_cast<int>(collection.size()) > caps.max_collection)
    throw std::runtime_error("scenario: collection above the desk cap");
  if (replicates > caps.max_replicates)
    throw std::runtime_error("scenario: replicate count above the desk cap");
  if (eval_points > caps.max_eval_points)
    throw std::runtime_error("scenario: evaluation grid above the desk cap");
  for (const auto& h : collection) {
    if (h.dim() != cfg.d || std::abs(h.half_width() - cfg.b) > 1e-12 ||
        std::abs(h.net().base - cfg.h_base) > 1e-12)
      throw std::domain_error("scenario: collection must share (b, d, h0)");
  }
  if (upper_functions.count("psi")) {
    if (!kernel.has_factor())
      throw std::domain_error("scenario: the class envelope needs a product kernel");
    const auto rep = check_assumptions(kernel, KernelAssumption::A3, 512);
    if (!rep.passed)
      throw std::domain_error("scenario: product-kernel assumption failed numerically");
  }
  if (upper_functions.count("psi_star")) {
    if (!(cfg.p >= 1.0 && cfg.p <= 2.0))
      throw std::domain_error("scenario: isotropic envelope needs p in [1,2]");
    for (const auto& h : collection)
      if (!h.isotropic())
        throw std::domain_error("scenario: isotropic envelope needs isotropic bandwidths");
    if (kernel.structure != KernelStructure::smooth)
      throw std::domain_error("scenario: isotropic envelope needs a smooth-structure kernel");
  }
  // A1 is the baseline hypothesis for every envelope.
  const auto a1 = check_assumptions(kernel, KernelAssumption::A1, 512);
  if (!a1.passed)
    throw std::domain_error("scenario: kernel support/Lipschitz validation failed");
}

namespace {

MultiBandwidth bandwidth_from_json(const nlohmann::json& j, const GeometricNet& net, double b,
                                   int d) {
  const std::string kind = j.value("kind", "constant");
  if (kind == "constant") {
    std::vector<int> levels;
    if (j["s"].is_array())
      levels = j["s"].get<std::vector<int>>();
    else
      levels.assign(static_cast<std::size_t>(d), j["s"].get<int>());
    return MultiBandwidth::constant(net, b, d, levels, j.value("id", "constant"));
  }
  if (kind == "boxes") {
    std::vector<BandwidthBox> boxes;
    for (const auto& bj : j["boxes"]) {
      BandwidthBox box;
      box.lo = bj["lo"].get<std::vector<double>>();
      box.hi = bj["hi"].get<std::vector<double>>();
      box.levels = bj["s"].get<std::vector<int>>();
      boxes.push_back(std::move(box));
    }
    return MultiBandwidth(net, b, d, std::move(boxes), j.value("id", "boxes"));
  }
  if (kind == "random_partition") {
    // d=1 only: split (-b,b) into n random segments with random levels.
    if (d != 1) throw std::domain_error("random_partition bandwidths are 1-d only");
    const int n = j.value("boxes", 4);
    const int s_lo = j.value("s_min", 0);
    const int s_hi = j.value("s_max", 3);
    const auto seed = j.value("seed", 7u);
    std::vector<double> cuts = {-b, b};
    for (int i = 0; i < n - 1; ++i)
      cuts.push_back(-b + 2.0 * b * uniform_variate(seed, 0, static_cast<std::uint64_t>(i)));
    std::sort(cuts.begin(), cuts.end());
    std::vector<BandwidthBox> boxes;
    for (int i = 0; i < n; ++i) {
      if (!(cuts[static_cast<std::size_t>(i) + 1] > cuts[static_cast<std::size_t>(i)] + 1e-9))
        continue;
      BandwidthBox box;
      box.lo = {cuts[static_cast<std::size_t>(i)]};
      box.hi = {cuts[static_cast<std::size_t>(i) + 1]};
      const double u = uniform_variate(seed, 1, static_cast<std::uint64_t>(i));
      box.levels = {s_lo + static_cast<int>(u * (s_hi - s_lo + 1))};
      boxes.push_back(std::move(box));
    }
    // ensure exact tiling at the ends
    boxes.front().lo[0] = -b;
    boxes.back().hi[0] = b;
    return MultiBandwidth(net, b, d, std::move(boxes), j.value("id", "random"));
  }
  throw std::domain_error("scenario: unknown bandwidth kind '" + kind + "'");
}

}  // namespace

Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario sc;
  sc.name = j.value("name", "scenario");
  auto& cfg = sc.cfg;
  const auto& cj = j.at("config");
  cfg.p = cj.value("p", 2.0);
  cfg.q = cj.value("q", 2.0);
  cfg.epsilon = cj.value("epsilon", std::exp(-4.0));
  cfg.b = cj.value("b", 0.5);
  cfg.d = cj.value("d", 1);
  cfg.h_base = cj.value("h_base", std::exp(-2.0));
  cfg.tau = cj.value("tau", 0.5);
  cfg.class_bound = cj.value("class_bound", 2.0);
  cfg.A = cj.value("A", std::exp(16.0));
  if (cj.contains("tolerances")) {
    const auto& t = cj["tolerances"];
    cfg.quad_div = t.value("quad_div", cfg.quad_div);
    cfg.series_rel_tol = t.value("series_rel_tol", cfg.series_rel_tol);
    cfg.omega_grid = t.value("omega_grid", cfg.omega_grid);
    cfg.r_scan_cap = t.value("r_scan_cap", cfg.r_scan_cap);
    cfg.r_a_cap = t.value("r_a_cap", cfg.r_a_cap);
  }
  if (cj.contains("overrides")) {
    const auto& o = cj["overrides"];
    if (o.contains("lambda_star_scalar")) cfg.lambda_star_scalar = o["lambda_star_scalar"].get<double>();
    if (o.contains("lambda_star_d_scalar"))
      cfg.lambda_star_d_scalar = o["lambda_star_d_scalar"].get<double>();
    if (o.contains("maximal_const")) cfg.maximal_const = o["maximal_const"].get<double>();
    cfg.C_tilde = o.value("C_tilde", cfg.C_tilde);
    if (o.contains("lambda_star_table"))
      for (const auto& row : o["lambda_star_table"])
        cfg.lambda_star_table.push_back({row[0].get<double>(), row[1].get<double>(),
                                         row[2].get<double>()});
    if (o.contains("lambda_star_d_table"))
      for (const auto& row : o["lambda_star_d_table"])
        cfg.lambda_star_d_table.emplace_back(row[0].get<int>(), row[1].get<double>());
  }
  const auto& kj = j.at("kernel");
  if (kj.contains("name"))
    sc.kernel = kernel_from_name(kj["name"].get<std::string>(), cfg.d);
  else if (kj.contains("csv"))
    sc.kernel = kernel_from_samples_csv(kj["csv"].get<std::string>(), cfg.d);
  else
    throw std::domain_error("scenario: kernel needs 'name' or 'csv'");

  GeometricNet net(cfg.h_base, j.value("s_net_max", 40));
  for (const auto& bj : j.at("bandwidths"))
    sc.collection.push_back(bandwidth_from_json(bj, net, cfg.b, cfg.d));
  sc.replicates = j.value("replicates", 200);
  sc.delta = j.value("delta", 0.0);
  sc.eval_points = j.value("eval_points", 256);
  sc.seed = j.value("seed", 1u);
  if (j.contains("upper_functions"))
    for (const auto& u : j["upper_functions"]) sc.upper_functions.insert(u.get<std::string>());
  else
    sc.upper_functions = {"psi_eps"};
  sc.bound = j.value("bound", "level");
  sc.run_oracles = j.value("oracles", false);
  return sc;
}

nlohmann::json scenario_to_json(const Scenario& sc) {
  nlohmann::json j;
  j["name"] = sc.name;
  j["config"] = {{"p", sc.cfg.p},     {"q", sc.cfg.q},       {"epsilon", sc.cfg.epsilon},
                 {"b", sc.cfg.b},     {"d", sc.cfg.d},       {"h_base", sc.cfg.h_base},
                 {"tau", sc.cfg.tau}, {"class_bound", sc.cfg.class_bound}, {"A", sc.cfg.A}};
  j["kernel"] = {{"name", sc.kernel.id}};
  j["replicates"] = sc.replicates;
  j["delta"] = sc.delta;
  j["eval_points"] = sc.eval_points;
  j["seed"] = sc.seed;
  j["bound"] = sc.bound;
  j["oracles"] = sc.run_oracles;
  auto arr = nlohmann::json::array();
  for (const auto& u : sc.upper_functions) arr.push_back(u);
  j["upper_functions"] = arr;
  return j;
}

bool VerificationReport::all_pass() const {
  for (const auto& u : upper)
    if (!u.pass) return false;
  for (const auto& o : oracles)
    if (!o.pass) return false;
  return true;
}

std::string VerificationReport::to_json(bool include_runtime, int indent) const {
  nlohmann::ordered_json j;
  j["scenario"] = scenario_name;
  j["seed"] = seed;
  j["replicates"] = replicates;
  j["delta"] = delta;
  j["eval_points"] = eval_points;
  j["bandwidths"] = bandwidth_ids;
  auto& uj = j["upper_functions"];
  uj = nlohmann::ordered_json::array();
  for (const auto& u : upper)
    uj.push_back({{"name", u.name},
                  {"e_hat", u.e_hat},
                  {"std_error", u.std_error},
                  {"bound", u.bound},
                  {"margin", u.margin},
                  {"pass", u.pass},
                  {"tightness_max", u.tightness_max},
                  {"positive_deficit_replicates", u.positive_deficit_replicates}});
  auto& oj = j["oracles"];
  oj = nlohmann::ordered_json::array();
  for (const auto& o : oracles)
    oj.push_back({{"name", o.name},
                  {"pass", o.pass},
                  {"observed", o.observed},
                  {"expected", o.expected},
                  {"tolerance", o.tolerance},
                  {"detail", o.detail}});
  j["provenance"] = provenance;
  if (include_runtime) j["runtime_seconds"] = runtime_seconds;
  return j.dump(indent);
}

namespace {

struct EnvelopeSet {
  std::vector<std::string> names;
  // per name, per bandwidth: the envelope value
  std::vector<std::vector<double>> values;
  std::vector<double> bounds;
};

double bound_for(ConstantsEngine& engine, const std::string& bound) {
  if (bound == "level") return engine.moment_bound(MomentBound::Level);
  if (bound == "class") return engine.moment_bound(MomentBound::ClassNet);
  if (bound == "isotropic") return engine.moment_bound(MomentBound::Isotropic);
  if (bound == "combined") return engine.moment_bound(MomentBound::Combined);
  if (bound == "combined_isotropic") return engine.moment_bound(MomentBound::CombinedIsotropic);
  throw std::domain_error("scenario: unknown bound selector '" + bound + "'");
}

}  // namespace

VerificationReport run_scenario(const Scenario& sc) {
  const auto t0 = std::chrono::steady_clock::now();
  sc.validate();
  VerificationReport rep;
  rep.scenario_name = sc.name;
  rep.seed = sc.seed;
  rep.replicates = sc.replicates;
  rep.eval_points = sc.eval_points;
  const double delta = sc.resolved_delta();
  rep.delta = delta;

  ConstantsEngine engine(sc.cfg, sc.kernel);
  const std::size_t nh = sc.collection.size();
  for (const auto& h : sc.collection)
    rep.bandwidth_ids.push_back(h.id().empty() ? "h" : h.id());

  EnvelopeSet env;
  for (const auto& name : sc.upper_functions) {
    env.names.push_back(name);
    std::vector<double> values(nh, 0.0);
    for (std::size_t i = 0; i < nh; ++i) {
      const auto& h = sc.collection[i];
      if (name == "psi_eps")
        values[i] = engine.psi_eps(h);
      else if (name == "psi")
        values[i] = engine.psi(h).value;
      else if (name == "psi_star")
        values[i] = engine.psi_star(h).value;
      else if (name == "combined")
        values[i] = engine.combined_psi(h, sc.bound == "combined_isotropic").value;
      else
        throw std::domain_error("scenario: unknown upper function '" + name + "'");
    }
    env.values.push_back(std::move(values));
    env.bounds.push_back(bound_for(engine, sc.bound));
  }

  // shared-noise geometry: one lattice serves the whole collection, so the
  // supremum couples all bandwidths on a common probability space
  const auto geom =
      make_noise_geometry(sc.cfg.b, sc.cfg.d, sc.kernel.support_radius, sc.cfg.h_base, delta);
  if (geom.cell_count() > sc.caps.max_noise_cells)
    throw std::runtime_error("scenario: noise lattice above the desk cap");
  EvalGrid grid{sc.cfg.b, sc.cfg.d, sc.eval_points};
  std::vector<FieldEvaluator> evals;
  evals.reserve(nh);
  for (const auto& h : sc.collection)
    evals.emplace_back(sc.kernel, h, grid, geom, sc.caps.max_weights);

  const std::size_t nf = env.names.size();
  std::vector<std::vector<double>> deficits(nf);  // per function, per replicate
  for (auto& v : deficits) v.reserve(static_cast<std::size_t>(sc.replicates));
  std::vector<double> tightness(nf, 0.0);
  std::vector<int> positive(nf, 0);

  // pathwise-inequality bookkeeping (shares the replicate loop); the volume
  // factors are replicate-independent, so they are tabulated once
  long long holder_checks = 0, holder_violations = 0;
  const int r_lo = static_cast<int>(std::floor(sc.cfg.p)) + 1;
  std::vector<std::vector<double>> holder_vnorm(nh);
  std::vector<std::vector<double>> sqrt_volume(nh);
  if (sc.run_oracles)
    for (std::size_t i = 0; i < nh; ++i) {
      for (int r = r_lo; r < r_lo + sc.holder_r_span; ++r) {
        const double m = static_cast<double>(r) * sc.cfg.p / (r - sc.cfg.p);
        holder_vnorm[i].push_back(discrete_v_norm(sc.collection[i], m, grid));
      }
      sqrt_volume[i].resize(static_cast<std::size_t>(grid.point_count()));
      for (std::int64_t t = 0; t < grid.point_count(); ++t)
        sqrt_volume[i][static_cast<std::size_t>(t)] =
            std::sqrt(sc.collection[i].volume_at(grid.point(t)));
    }

  std::vector<double> values(static_cast<std::size_t>(grid.point_count()));
  std::vector<double> vhalf(static_cast<std::size_t>(grid.point_count()));

  for (int rep_i = 0; rep_i < sc.replicates; ++rep_i) {
    const auto noise = sample_noise(geom, sc.seed, static_cast<std::uint64_t>(rep_i),
                                    sc.caps.max_noise_cells);
    std::vector<double> norms(nh, 0.0);
    for (std::size_t i = 0; i < nh; ++i) {
      evals[i].evaluate(noise, values);
      norms[i] = lp_norm(values, grid, sc.cfg.p);
      if (sc.run_oracles) {
        // ||xi||_p <= ||V^{1/2} xi||_r ||V^{-1/2}||_{rp/(r-p)} on matched grids
        for (std::int64_t t = 0; t < grid.point_count(); ++t)
          vhalf[static_cast<std::size_t>(t)] = sqrt_volume[i][static_cast<std::size_t>(t)] *
                                               values[static_cast<std::size_t>(t)];
        for (int ri = 0; ri < sc.holder_r_span; ++ri) {
          const int r = r_lo + ri;
          const double rhs =
              lp_norm(vhalf, grid, static_cast<double>(r)) * holder_vnorm[i][static_cast<std::size_t>(ri)];
          ++holder_checks;
          if (norms[i] > rhs * (1.0 + 1e-10)) ++holder_violations;
        }
      }
    }
    for (std::size_t f = 0; f < nf; ++f) {
      double deficit = 0.0;
      for (std::size_t i = 0; i < nh; ++i) {
        deficit = std::max(deficit, norms[i] - env.values[f][i]);
        tightness[f] = std::max(tightness[f], norms[i] / env.values[f][i]);
      }
      if (deficit > 0.0) ++positive[f];
      deficits[f].push_back(std::pow(deficit, sc.cfg.q));
    }
  }

  for (std::size_t f = 0; f < nf; ++f) {
    UpperFnOutcome out;
    out.name = env.names[f];
    double mean = 0.0;
    for (double v : deficits[f]) mean += v;
    mean /= static_cast<double>(sc.replicates);
    double var = 0.0;
    for (double v : deficits[f]) var += (v - mean) * (v - mean);
    var /= std::max(1, sc.replicates - 1);
    out.e_hat = mean;
    out.std_error = std::sqrt(var / sc.replicates);
    out.bound = env.bounds[f];
    out.margin = out.bound - out.e_hat;
    out.pass = out.e_hat <= out.bound;
    out.tightness_max = tightness[f];
    out.positive_deficit_replicates = positive[f];
    rep.upper.push_back(std::move(out));
  }

  if (sc.run_oracles) {
    auto oracles = oracle_suite(sc);
    OracleOutcome holder;
    holder.name = "pathwise_holder";
    holder.observed = static_cast<double>(holder_violations);
    holder.expected = 0.0;
    holder.tolerance = 0.0;
    std::ostringstream os;
    os << holder_checks << " checks across replicates/bandwidths/r";
    holder.detail = os.str();
    holder.pass = holder_violations == 0;
    oracles.push_back(std::move(holder));
    rep.oracles = std::move(oracles);
  }

  for (const auto& line : engine.provenance_lines()) rep.provenance.push_back(line);
  {
    std::ostringstream os;
    os << "noise spacing delta = " << delta << " (" << (sc.delta > 0.0 ? "explicit" : "min bandwidth / 64")
       << "), lattice cells = " << geom.cell_count();
    rep.provenance.push_back(os.str());
  }
  {
    std::ostringstream os;
    os << "eval grid " << sc.eval_points << "^" << sc.cfg.d << ", split-exponent grid "
       << sc.cfg.omega_grid << ", index caps r<=" << sc.cfg.r_scan_cap << " (scan), r<="
       << sc.cfg.r_a_cap << " (membership)";
    rep.provenance.push_back(os.str());
  }
  rep.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

ExceedanceCurve exceedance_curve(const Scenario& sc, std::size_t h_index,
                                 const std::vector<double>& levels) {
  if (h_index >= sc.collection.size())
    throw std::domain_error("exceedance_curve: bandwidth index out of range");
  const auto& h = sc.collection[h_index];
  const double delta = sc.resolved_delta();
  const auto geom =
      make_noise_geometry(sc.cfg.b, sc.cfg.d, sc.kernel.support_radius, sc.cfg.h_base, delta);
  EvalGrid grid{sc.cfg.b, sc.cfg.d, sc.eval_points};
  FieldEvaluator eval(sc.kernel, h, grid, geom, sc.caps.max_weights);
  std::vector<double> norms(static_cast<std::size_t>(sc.replicates));
  std::vector<double> values(static_cast<std::size_t>(grid.point_count()));
  for (int i = 0; i < sc.replicates; ++i) {
    const auto noise =
        sample_noise(geom, sc.seed, static_cast<std::uint64_t>(i), sc.caps.max_noise_cells);
    eval.evaluate(noise, values);
    norms[static_cast<std::size_t>(i)] = lp_norm(values, grid, sc.cfg.p);
  }
  ExceedanceCurve curve;
  curve.levels = levels;
  double mean = 0.0;
  for (double v : norms) mean += v;
  mean /= static_cast<double>(sc.replicates);
  curve.mean = mean;
  const double k2 = kernel_norm(sc.kernel, 2.0, sc.kernel.support_radius / sc.cfg.quad_div);
  curve.sigma = std::sqrt(k2 * k2 / h.min_volume());
  for (double u : levels) {
    int count = 0;
    for (double v : norms)
      if (v >= u) ++count;
    curve.empirical.push_back(static_cast<double>(count) / sc.replicates);
    const double excess = u - mean;
    curve.reference.push_back(excess <= 0.0 ? 1.0
                                            : std::exp(-excess * excess /
                                                       (2.0 * curve.sigma * curve.sigma)));
  }
  return curve;
}

std::vector<OracleOutcome> oracle_suite(const Scenario& sc) {
  std::vector<OracleOutcome> out;
  const auto& h = sc.collection.front();
  const double delta = sc.resolved_delta();
  const auto geom =
      make_noise_geometry(sc.cfg.b, sc.cfg.d, sc.kernel.support_radius, sc.cfg.h_base, delta);
  EvalGrid grid{sc.cfg.b, sc.cfg.d, sc.eval_points};
  FieldEvaluator eval(sc.kernel, h, grid, geom, sc.caps.max_weights);

  // moment oracle at the scenario p
  {
    const double exact = exact_lp_moment(sc.kernel, h, sc.cfg.p,
                                         sc.kernel.support_radius / sc.cfg.quad_div);
    std::vector<double> samples(static_cast<std::size_t>(sc.replicates));
    std::vector<double> values(static_cast<std::size_t>(grid.point_count()));
    for (int i = 0; i < sc.replicates; ++i) {
      const auto noise =
          sample_noise(geom, sc.seed ^ 0xA5A5A5A5ull, static_cast<std::uint64_t>(i),
                       sc.caps.max_noise_cells);
      eval.evaluate(noise, values);
      samples[static_cast<std::size_t>(i)] =
          std::pow(lp_norm(values, grid, sc.cfg.p), sc.cfg.p);
    }
    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= static_cast<double>(sc.replicates);
    double var = 0.0;
    for (double v : samples) var += (v - mean) * (v - mean);
    var /= std::max(1, sc.replicates - 1);
    const double se = std::sqrt(var / sc.replicates);
    OracleOutcome o;
    o.name = "lp_moment";
    o.observed = mean;
    o.expected = exact;
    o.tolerance = 3.0 * se;
    o.pass = std::abs(mean - exact) <= 3.0 * se;
    std::ostringstream os;
    os << "se = " << se;
    o.detail = os.str();
    out.push_back(std::move(o));
  }

  // covariance oracle at a pair straddling one bandwidth
  {
    const auto x0 = grid.point(grid.point_count() / 2);
    auto y0 = x0;
    const double hval = h.value_at(x0)[0];
    y0[0] = std::min(x0[0] + 0.5 * hval, sc.cfg.b * 0.999);
    const double exact = exact_covariance(sc.kernel, h, x0, y0);
    // locate the two grid points nearest x0, y0
    std::vector<double> values(static_cast<std::size_t>(grid.point_count()));
    std::int64_t ix = grid.point_count() / 2, iy = ix;
    double besty = std::numeric_limits<double>::infinity();
    for (std::int64_t t = 0; t < grid.point_count(); ++t) {
      const auto pt = grid.point(t);
      double dist = 0.0;
      for (int j = 0; j < grid.d; ++j) dist += std::abs(pt[static_cast<std::size_t>(j)] - y0[static_cast<std::size_t>(j)]);
      if (dist < besty) {
        besty = dist;
        iy = t;
      }
    }
    const auto px = grid.point(ix);
    const auto py = grid.point(iy);
    const double exact_grid = exact_covariance(sc.kernel, h, px, py);
    (void)exact;
    std::vector<double> prods(static_cast<std::size_t>(sc.replicates));
    for (int i = 0; i < sc.replicates; ++i) {
      const auto noise =
          sample_noise(geom, sc.seed ^ 0x5A5A5A5Aull, static_cast<std::uint64_t>(i),
                       sc.caps.max_noise_cells);
      eval.evaluate(noise, values);
      prods[static_cast<std::size_t>(i)] = values[static_cast<std::size_t>(ix)] *
                                           values[static_cast<std::size_t>(iy)];
    }
    double mean = 0.0;
    for (double v : prods) mean += v;
    mean /= static_cast<double>(sc.replicates);
    double var = 0.0;
    for (double v : prods) var += (v - mean) * (v - mean);
    var /= std::max(1, sc.replicates - 1);
    const double se = std::sqrt(var / sc.replicates);
    OracleOutcome o;
    o.name = "covariance";
    o.observed = mean;
    o.expected = exact_grid;
    o.tolerance = 5.0 * se;
    o.pass = std::abs(mean - exact_grid) <= 5.0 * se;
    o.detail = "pair at half-bandwidth separation";
    out.push_back(std::move(o));
  }
  return out;
}

std::string exceedance_svg(const ExceedanceCurve& curve, const std::string& title) {
  const int w = 640, hgt = 420, margin = 50;
  std::ostringstream os;
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << hgt << "'>\n";
  os << "<rect width='100%' height='100%' fill='white'/>\n";
  os << "<text x='" << w / 2 << "' y='20' text-anchor='middle' font-size='14'>" << title
     << "</text>\n";
  if (curve.levels.size() >= 2) {
    const double xlo = curve.levels.front(), xhi = curve.levels.back();
    auto xmap = [&](double x) {
      return margin + (x - xlo) / (xhi - xlo) * (w - 2 * margin);
    };
    auto ymap = [&](double y) { return hgt - margin - y * (hgt - 2 * margin); };
    auto draw = [&](const std::vector<double>& ys, const char* color) {
      os << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
      for (std::size_t i = 0; i < curve.levels.size(); ++i)
        os << xmap(curve.levels[i]) << "," << ymap(std::min(1.0, ys[i])) << " ";
      os << "'/>\n";
    };
    draw(curve.empirical, "#1f77b4");
    draw(curve.reference, "#d62728");
    os << "<line x1='" << margin << "' y1='" << hgt - margin << "' x2='" << w - margin
       << "' y2='" << hgt - margin << "' stroke='black'/>\n";
    os << "<line x1='" << margin << "' y1='" << margin << "' x2='" << margin << "' y2='"
       << hgt - margin << "' stroke='black'/>\n";
    os << "<text x='" << w - margin << "' y='" << hgt - margin + 30
       << "' text-anchor='end' font-size='11'>level</text>\n";
    os << "<text x='" << margin << "' y='" << margin - 10
       << "' font-size='11'>survival (blue: empirical, red: concentration)</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace upfn
