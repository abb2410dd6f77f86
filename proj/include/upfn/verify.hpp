#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "upfn/field.hpp"
#include "upfn/upper_functions.hpp"

#include "json.hpp"

namespace upfn {

// Hard desk-scale caps; violating any of them is a capacity error.
struct ScenarioCaps {
  int max_dim = 2;
  int max_collection = 64;
  int max_replicates = 10000;
  int max_eval_points = 256;
  std::int64_t max_noise_cells = std::int64_t{1} << 24;
  std::int64_t max_weights = std::int64_t{1} << 26;
};

struct Scenario {
  std::string name = "scenario";
  Kernel kernel;
  UpperFnConfig cfg;
  std::vector<MultiBandwidth> collection;
  int replicates = 200;
  double delta = 0.0;  // noise spacing; 0 = min bandwidth / 64
  int eval_points = 256;
  std::uint64_t seed = 1;
  std::set<std::string> upper_functions;  // "psi_eps", "psi", "psi_star", "combined"
  std::string bound = "level";               // level | class | isotropic | combined | combined_isotropic
  bool run_oracles = false;
  int holder_r_span = 5;
  ScenarioCaps caps;

  double resolved_delta() const;
  void validate() const;
};

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& sc);

struct UpperFnOutcome {
  std::string name;
  double e_hat = 0.0;       // mean of (sup positive deficit)^q
  double std_error = 0.0;
  double bound = 0.0;
  double margin = 0.0;      // bound - e_hat
  bool pass = false;
  double tightness_max = 0.0;  // diagnostic: max over replicates of max_h ||xi||_p / Psi(h)
  int positive_deficit_replicates = 0;
};

struct OracleOutcome {
  std::string name;
  bool pass = false;
  double observed = 0.0, expected = 0.0, tolerance = 0.0;
  std::string detail;
};

struct VerificationReport {
  std::string scenario_name;
  std::uint64_t seed = 0;
  int replicates = 0;
  double delta = 0.0;
  int eval_points = 0;
  std::vector<std::string> bandwidth_ids;
  std::vector<UpperFnOutcome> upper;
  std::vector<OracleOutcome> oracles;
  std::vector<std::string> provenance;
  double runtime_seconds = 0.0;

  bool all_pass() const;
  // runtime metadata is excluded from the reproducibility contract
  std::string to_json(bool include_runtime = true, int indent = 2) const;
};

VerificationReport run_scenario(const Scenario& sc);

struct ExceedanceCurve {
  std::vector<double> levels;
  std::vector<double> empirical;  // P{ ||xi_h||_p >= u }
  std::vector<double> reference;  // Gaussian concentration curve above the mean
  double mean = 0.0;
  double sigma = 0.0;
};

ExceedanceCurve exceedance_curve(const Scenario& sc, std::size_t h_index,
                                 const std::vector<double>& levels);

std::vector<OracleOutcome> oracle_suite(const Scenario& sc);

// Minimal static SVG polyline plot (levels vs curves), for the CLI --svg path.
std::string exceedance_svg(const ExceedanceCurve& curve, const std::string& title);

}  // namespace upfn
