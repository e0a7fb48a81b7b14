#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "spdreg/spdreg.hpp"

namespace spdreg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

struct GenerateOptions {
  std::string phantom = "staircase";
  int n = 10;
  double sigma2 = 40.0;
  std::uint64_t seed = 0;
  double b_value = kDefaultBValue;
  double a0 = kDefaultA0;
  double z = kDefaultLogBound;
  double epsilon = kDefaultEpsilon;
  std::string out_dir = ".";
  std::string prefix;  // defaults to the phantom name
  bool write_dwi = false;
  int mask_side = 0;   // > 0 also writes a centered square mask
};

struct SolveOptions {
  std::string input;
  std::string mask;    // inpaint only
  std::string output;
  std::string report;  // defaults to <output>.json
  std::string objective = "loglog";
  FunctionalParams params;
  SolverConfig solver;
  std::string sweep;   // "name=v1,v2,..."
  bool report_timing = false;
};

struct EvaluateOptions {
  std::string reference;
  std::string candidate;
  std::string profile;
};

struct RenderOptions {
  std::string input;
  std::string output;
};

struct StudyOptions {
  std::string phantom = "staircase";
  int n = 10;
  std::vector<double> deltas{30.0, 10.0, 3.0};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  FunctionalParams params;
  SolverConfig solver;
  std::string output;  // stdout when empty
};

Objective parse_objective(const std::string& name);
TensorField make_phantom(const std::string& name, int n);

int run_generate(const GenerateOptions& o, std::ostream& out);
int run_solve(const SolveOptions& o, bool inpaint, std::ostream& out);
int run_evaluate(const EvaluateOptions& o, std::ostream& out);
int run_render(const RenderOptions& o);
int run_study(const StudyOptions& o, std::ostream& out);

/// One `key = value` line of a config file.
struct ConfigEntry {
  std::string key;
  std::string value;
  int line;
};

/// Reads `key = value` lines; blank lines and lines starting with '#' are
/// skipped, values may be double-quoted. Throws InvalidInput on syntax errors
/// or repeated keys.
std::vector<ConfigEntry> parse_config(std::istream& in);
std::vector<ConfigEntry> read_config_file(const std::string& path);

}  // namespace spdreg::cli
