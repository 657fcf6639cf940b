#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "renormlab/measure.hpp"

namespace renormlab {

enum class Command {
  solve,
  verify,
  structure,
  refine,
  reconstruct,
  occupation,
  mc,
  semilinear,
  aab,
  capacity,
};

Command command_from_string(const std::string& name);
const char* to_string(Command cmd);

struct FormSpec {
  enum class Type { local, fractional };
  Type type = Type::local;
  int dim = 1;
  int n = 3;
  double extent_lo = 0.0;
  double extent_hi = 1.0;
  double conductance = 1.0; // local forms
  double alpha = 0.5;       // fractional forms
  double constant = 1.0;    // fractional kernel constant c
};

struct DensitySpec {
  std::string name = "zero"; // zero | uniform | bump | dipole
  double scale = 1.0;
};

struct MeasureSpec {
  std::vector<Atom> atoms;
  DensitySpec density;
};

struct KScheduleSpec {
  std::vector<double> values;  // explicit, strictly increasing; wins over rule
  std::string rule = "sup-fractions";  // sup-fractions | quantiles
  double theta = 0.75;         // top fraction for sup-fractions
  int count = 5;
};

struct DictionarySpec {
  int tents_per_side = 5;
  bool include_atom_tents = true;
};

struct MeshFamilySpec {
  std::string kind = "local2d"; // local2d | local1d | fractional1d
  std::vector<int> n_values;
  double extent_lo = 0.0;
  double extent_hi = 1.0;
  double theta = 0.5;
  double alpha = 0.5;
  double constant = 1.0;
};

struct McSpec {
  long n_paths = 10000;
  std::uint64_t seed = 20260810;
  int start_node = -1; // -1: first atom node, else node of max |u|
  double max_time = 1e9;
  int battery_seeds = 20;
  double k_fraction = 0.75; // exit level as a fraction of sup |u|
};

struct SemilinearSpec {
  std::string f_name = "minus-u"; // zero | minus-u | minus-u-cubed
  double two_start_tolerance = 1e-8;
};

struct AabSpec {
  int k_count = 6;
};

struct ContinuumSpec {
  std::string kind = "log2d"; // log2d | riesz1d
  std::vector<std::pair<double, double>> level_pairs;
  std::vector<double> la_levels;
  int radial_nodes = 512;
  std::vector<double> eval_points; // riesz evaluation positions
  double k_fraction = 0.5;
};

struct Tolerances {
  double solver = 1e-10;
  double identity = 1e-9;
  double structure = 1e-10;
  double quadrature = 1e-6;
  double mc_sigma = 3.0;
  double refine_bl_max = 0.1;
  double refine_tv_rel = 0.10;
  double riesz_rel = 0.02;
};

struct OutputSpec {
  bool measures_csv = false;
  std::vector<int> green_columns; // Green columns to export as CSV
};

struct Scenario {
  std::string name = "scenario";
  FormSpec form;
  MeasureSpec measure;
  KScheduleSpec k_schedule;
  DictionarySpec dictionary;
  std::optional<MeshFamilySpec> mesh_family;
  McSpec mc;
  SemilinearSpec semilinear;
  AabSpec aab;
  ContinuumSpec continuum;
  Tolerances tolerances;
  OutputSpec output;
};

/// Parses and validates a scenario file; throws ConfigError with the file,
/// field and every violation found. Unknown keys are rejected.
Scenario parse_scenario(const std::string& path);
Scenario parse_scenario_text(const std::string& text,
                             const std::string& origin = "<memory>");

struct RunOptions {
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed; // overrides the scenario MC seed
  int threads = 1;
  bool dump_form = false;
  bool write_report = true;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct RunOutcome {
  int exit_code = 0; // 0 pass, 1 check failure, 2 config error, 3 numerical
  bool all_passed = false;
  std::vector<CheckResult> checks;
  std::string report_json;
  std::string report_path;
  std::string error; // set when exit_code is 2 or 3
};

/// Runs one command pipeline against the scenario, writes the JSON report to
/// out_dir and returns the structured outcome. Module errors are captured in
/// the report's error block with the matching exit code.
RunOutcome run(const Scenario& scenario, Command command,
               const RunOptions& options = {});

}  // namespace renormlab
