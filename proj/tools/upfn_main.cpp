#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "upfn/entropy.hpp"
#include "upfn/field.hpp"
#include "upfn/verify.hpp"

namespace fs = std::filesystem;

namespace {

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

upfn::UpperFnConfig config_from_json(const nlohmann::json& j) {
  // reuse the scenario parser with a stub collection
  nlohmann::json sj;
  sj["config"] = j.at("config");
  sj["kernel"] = j.at("kernel");
  sj["bandwidths"] = nlohmann::json::array({{{"kind", "constant"}, {"s", 0}}});
  return upfn::scenario_from_json(sj).cfg;
}

void apply_lambda_override(upfn::UpperFnConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double a, b, c;
    if (row >> a >> b) {
      if (row >> c)
        cfg.lambda_star_table.push_back({a, b, c});  // (omega, mu, value)
      else
        cfg.lambda_star_d_table.emplace_back(static_cast<int>(a), b);  // (r, value)
    }
  }
}

int cmd_constants(const std::string& config_path, const std::string& out_path,
                  const std::string& lambda_override) {
  const auto j = load_json(config_path);
  auto cfg = config_from_json(j);
  if (!lambda_override.empty()) apply_lambda_override(cfg, lambda_override);
  const auto kernel = upfn::kernel_from_name(j.at("kernel").at("name").get<std::string>(), cfg.d);
  upfn::ConstantsEngine engine(cfg, kernel);
  const auto text = engine.report().to_json();
  if (out_path.empty())
    std::cout << text << "\n";
  else
    write_text(out_path, text);
  return 0;
}

int cmd_verify(const std::string& scenario_path, const std::string& out_dir, bool svg) {
  const auto sc = upfn::scenario_from_json(load_json(scenario_path));
  const auto report = upfn::run_scenario(sc);
  fs::create_directories(out_dir);
  write_text(fs::path(out_dir) / "report.json", report.to_json());
  {
    std::ostringstream csv;
    csv << "name,e_hat,std_error,bound,margin,pass,tightness_max\n";
    for (const auto& u : report.upper)
      csv << u.name << "," << u.e_hat << "," << u.std_error << "," << u.bound << "," << u.margin
          << "," << (u.pass ? 1 : 0) << "," << u.tightness_max << "\n";
    write_text(fs::path(out_dir) / "upper_functions.csv", csv.str());
  }
  if (svg && !sc.collection.empty() &&
      (sc.upper_functions.count("psi") || sc.upper_functions.count("psi_star"))) {
    upfn::ConstantsEngine engine(sc.cfg, sc.kernel);
    const auto scan = sc.upper_functions.count("psi")
                          ? engine.psi(sc.collection.front())
                          : engine.psi_star(sc.collection.front());
    upfn::ExceedanceCurve table;
    for (const auto& [r, value] : scan.scanned) {
      table.levels.push_back(static_cast<double>(r));
      table.empirical.push_back(value / scan.scanned.front().second);
      table.reference.push_back(1.0);
    }
    if (table.levels.size() >= 2)
      write_text(fs::path(out_dir) / "envelope_scan.svg",
                 upfn::exceedance_svg(table, "envelope candidates by dual index (rescaled)"));
    std::ostringstream csv;
    csv << "r,envelope_candidate\n";
    for (const auto& [r, value] : scan.scanned) csv << r << "," << value << "\n";
    write_text(fs::path(out_dir) / "envelope_scan.csv", csv.str());
  }
  if (svg && !sc.collection.empty()) {
    std::vector<double> levels;
    upfn::Scenario probe = sc;
    probe.replicates = std::min(sc.replicates, 2000);
    const double k2 = upfn::kernel_norm(sc.kernel, 2.0);
    const double scale = std::sqrt(k2 * k2 / sc.collection.front().min_volume());
    for (int i = 0; i <= 80; ++i) levels.push_back(scale * 0.05 * i);
    const auto curve = upfn::exceedance_curve(probe, 0, levels);
    write_text(fs::path(out_dir) / "exceedance.svg",
               upfn::exceedance_svg(curve, "norm exceedance, first bandwidth"));
    std::ostringstream csv;
    csv << "level,empirical,reference\n";
    for (std::size_t i = 0; i < levels.size(); ++i)
      csv << curve.levels[i] << "," << curve.empirical[i] << "," << curve.reference[i] << "\n";
    write_text(fs::path(out_dir) / "exceedance.csv", csv.str());
  }
  std::cout << report.to_json() << "\n";
  return report.all_pass() ? 0 : 2;
}

int cmd_simulate(const std::string& scenario_path, const std::string& out_dir, bool dump) {
  auto sc = upfn::scenario_from_json(load_json(scenario_path));
  sc.validate();
  fs::create_directories(out_dir);
  const double delta = sc.resolved_delta();
  const auto geom = upfn::make_noise_geometry(sc.cfg.b, sc.cfg.d, sc.kernel.support_radius,
                                              sc.cfg.h_base, delta);
  upfn::EvalGrid grid{sc.cfg.b, sc.cfg.d, sc.eval_points};
  std::vector<upfn::FieldEvaluator> evals;
  for (const auto& h : sc.collection) evals.emplace_back(sc.kernel, h, grid, geom);
  std::ostringstream csv;
  csv << "replicate";
  for (const auto& h : sc.collection) csv << ",lp_norm_" << (h.id().empty() ? "h" : h.id());
  csv << "\n";
  std::vector<double> all;
  std::vector<double> values(static_cast<std::size_t>(grid.point_count()));
  for (int i = 0; i < sc.replicates; ++i) {
    const auto noise = upfn::sample_noise(geom, sc.seed, static_cast<std::uint64_t>(i));
    csv << i;
    for (auto& ev : evals) {
      ev.evaluate(noise, values);
      csv << "," << upfn::lp_norm(values, grid, sc.cfg.p);
      if (dump) all.insert(all.end(), values.begin(), values.end());
    }
    csv << "\n";
  }
  write_text(fs::path(out_dir) / "norms.csv", csv.str());
  if (dump) {
    std::ofstream bin(fs::path(out_dir) / "fields.bin", std::ios::binary);
    upfn::write_field_dump(bin, grid, sc.replicates, all);
  }
  return 0;
}

int cmd_select(const std::string& config_path, const std::string& out_path) {
  const auto j = load_json(config_path);
  const auto& cj = j.at("config");
  const double b = cj.value("b", 0.5);
  const int d = cj.value("d", 1);
  const double eps = cj.value("epsilon", std::exp(-6.0));
  const double h_base = cj.value("h_base", std::exp(-2.0));
  const int s_max = j.value("s_max", 12);
  const int n = j.value("eval_points", 256);
  upfn::NikolskiiParams np;
  np.beta = j.at("beta").get<std::vector<double>>();
  np.r = j.at("r").get<std::vector<double>>();
  np.L = j.at("L").get<std::vector<double>>();
  np.ell = j.value("ell", 1);
  np.C_tilde = j.value("C_tilde", 1.0);
  const auto kernel = upfn::kernel_from_name(j.at("kernel").at("name").get<std::string>(), d);
  upfn::GriddedFunction f;
  if (j.contains("function_csv")) {
    std::ifstream in(j["function_csv"].get<std::string>());
    f = upfn::load_gridded_csv(in);
  } else {
    // default target: smooth bump scaled to the first class radius
    const double scale = j.value("function_scale", 1.0);
    f = upfn::GriddedFunction::tabulate(b, d, n, [&](std::span<const double> x) {
      double prod = 1.0;
      for (double xi : x) {
        const double u = 1.0 - (xi / (0.8 * b)) * (xi / (0.8 * b));
        prod *= u > 1e-8 ? std::exp(-1.0 / u) : 0.0;
      }
      return scale * prod;
    });
  }
  upfn::GeometricNet net(h_base, 40);
  const auto result = upfn::nikolskii_select(np, f, kernel, eps, net, s_max);
  std::ofstream out(out_path);
  upfn::save_multibandwidth_csv(result.bandwidth, out);
  const double tau = cj.value("tau", 0.5);
  nlohmann::ordered_json summary;
  summary["class_functional"] = upfn::class_h_functional(result.bandwidth, tau);
  summary["class_bound"] = upfn::nikolskii_class_bound(np, tau, b, d);
  summary["boundary_cells"] =
      static_cast<int>(std::count(result.boundary_flag.begin(), result.boundary_flag.end(), 1));
  const double p = cj.value("p", 2.0);
  try {
    summary["membership_radius"] = upfn::nikolskii_membership_radius(np, p);
    summary["membership_A"] = summary["membership_radius"].get<double>() *
                              std::pow(eps, -1.0 / (2.0 * np.beta_harmonic() + 1.0));
  } catch (const std::domain_error&) {
    summary["membership_radius"] = nullptr;
  }
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_entropy(const std::string& spec_path, const std::string& out_path,
                const std::string& override_out) {
  const auto j = load_json(spec_path);
  const std::string cls = j.value("class", "ss_ball");
  const int budget = j.value("budget", 96);
  const std::uint64_t seed = j.value("seed", 20240801u);
  std::ostringstream csv;
  if (cls == "ss_ball") {
    const double gamma = j.value("gamma", 0.75);
    const double m = j.value("m", 2.0);
    const auto domain =
        upfn::TabulationGrid::interval(j.value("lo", -1.5), j.value("hi", 1.5),
                                       j.value("grid", 129));
    const auto est = upfn::estimate_lambda_star(gamma, m, domain, budget, seed);
    csv << "# lambda_star estimate " << est.value << " (heuristic lower bound), slope "
        << est.fitted_slope << "\n";
    csv << "delta,N,lnN\n";
    for (std::size_t i = 0; i < est.deltas.size(); ++i)
      csv << est.deltas[i] << "," << est.covering[i] << ","
          << std::log(static_cast<double>(est.covering[i])) << "\n";
    if (!override_out.empty()) {
      // calibration row in the override format the constants command consumes
      std::ostringstream row;
      row.precision(17);
      row << gamma << "," << m << "," << est.value << "\n";
      write_text(override_out, row.str());
    }
  } else if (cls == "qclass") {
    upfn::QClassParams params;
    const auto kernel = upfn::kernel_from_name(j.value("kernel", "triangle"), 1);
    params.factor = kernel.factor;
    params.kernel_radius = kernel.support_radius;
    params.h_base = j.value("h_base", std::exp(-2.0));
    params.s1 = j.value("s1", 1);
    params.tau = j.value("tau", 0.5);
    params.r = j.value("r", 2);
    params.b = j.value("b", 0.5);
    params.omega = j.value("omega", 0.6);
    const auto check = upfn::check_entropy_scaling_qclass(params, budget, seed);
    csv << "fitted_slope,reference_slope,pass,usable_points\n";
    csv << check.fitted_slope << "," << check.reference_slope << "," << (check.pass ? 1 : 0)
        << "," << check.usable_points << "\n";
  } else {
    throw std::domain_error("entropy: unknown class '" + cls + "'");
  }
  if (out_path.empty())
    std::cout << csv.str();
  else
    write_text(out_path, csv.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"upper-function toolkit for kernel-type gaussian random fields"};
  app.require_subcommand(1);

  std::string config_path, scenario_path, out_path, out_dir = "out", lambda_override;
  bool svg = false, dump = false;

  auto* constants = app.add_subcommand("constants", "emit the constants report as JSON");
  constants->add_option("--config", config_path, "config JSON")->required();
  constants->add_option("--out", out_path, "output file (stdout if omitted)");
  constants->add_option("--override", lambda_override,
                        "lambda_star=<csv> entropy-constant override table");

  auto* verify = app.add_subcommand("verify", "run a Monte Carlo verification scenario");
  verify->add_option("--scenario", scenario_path, "scenario JSON")->required();
  verify->add_option("--out", out_dir, "output directory");
  verify->add_flag("--svg", svg, "emit static plots");

  auto* simulate = app.add_subcommand("simulate", "sample fields and write norm tables");
  simulate->add_option("--scenario", scenario_path, "scenario JSON")->required();
  simulate->add_option("--out", out_dir, "output directory");
  simulate->add_flag("--dump", dump, "write the raw field dump");

  auto* select = app.add_subcommand("select-bandwidth", "run the smoothness-driven selector");
  select->add_option("--config", config_path, "selector config JSON")->required();
  select->add_option("--out", out_path, "bandwidth CSV output")->required();

  std::string override_out;
  auto* entropy = app.add_subcommand("entropy", "covering-number scans and calibration");
  entropy->add_option("--class", config_path, "class description JSON")->required();
  entropy->add_option("--out", out_path, "CSV output (stdout if omitted)");
  entropy->add_option("--override-out", override_out,
                      "write the calibration row in override-table format");

  CLI11_PARSE(app, argc, argv);

  try {
    if (constants->parsed()) {
      std::string table;
      if (!lambda_override.empty()) {
        const auto eq = lambda_override.find('=');
        table = eq == std::string::npos ? lambda_override : lambda_override.substr(eq + 1);
      }
      return cmd_constants(config_path, out_path, table);
    }
    if (verify->parsed()) return cmd_verify(scenario_path, out_dir, svg);
    if (simulate->parsed()) return cmd_simulate(scenario_path, out_dir, dump);
    if (select->parsed()) return cmd_select(config_path, out_path);
    if (entropy->parsed()) return cmd_entropy(config_path, out_path, override_out);
  } catch (const std::domain_error& e) {
    std::cerr << "contract error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
