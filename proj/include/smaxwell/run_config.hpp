#ifndef SMAXWELL_RUN_CONFIG_HPP
#define SMAXWELL_RUN_CONFIG_HPP

#include <cstdint>
#include <string>

#include "smaxwell/fields.hpp"
#include "smaxwell/inner_solver.hpp"
#include "smaxwell/nonlinearity.hpp"
#include "smaxwell/outer_solver.hpp"

namespace smaxwell
{

struct RunConfig
{
  NonlinearityParams params;
  GridSpec grid;
  InnerConfig inner;
  OuterConfig outer;
  SeedProfile seed{{1.0, 1.0}, 3.0};
  std::string output_dir = "out";
  std::uint64_t rng_seed = 1;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// Missing keys keep their defaults; unknown keys are rejected. Throws
// std::invalid_argument for malformed or invalid configurations.
RunConfig parse_run_config(const std::string &json_text);
RunConfig load_run_config(const std::string &path);
std::string run_config_json(const RunConfig &cfg);

std::string to_string(SymmetryGroup group);
SymmetryGroup symmetry_from_string(const std::string &name);

// Report JSON for a finished solve; numbers are printed with round-trip precision.
std::string report_json(const RunConfig &cfg, const MountainPassResult &result);

// Writes report.json, u.bin, w.bin, a.bin, sweeps.csv, path.csv, ps.csv and
// inner_trace.csv into `dir`, creating it if needed.
void write_solve_outputs(const std::string &dir, const RunConfig &cfg,
                         const MountainPassResult &result, const ConvergenceTrace &inner_trace);

}  // namespace smaxwell

#endif  // SMAXWELL_RUN_CONFIG_HPP
