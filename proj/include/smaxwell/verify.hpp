#ifndef SMAXWELL_VERIFY_HPP
#define SMAXWELL_VERIFY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "smaxwell/fields.hpp"
#include "smaxwell/inner_solver.hpp"
#include "smaxwell/nonlinearity.hpp"
#include "smaxwell/orlicz.hpp"

namespace smaxwell
{

struct CheckResult
{
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string note;
};

struct SuiteReport
{
  std::string suite;
  std::vector<CheckResult> checks;

  bool passed() const;
  std::vector<std::string> failed() const;
  std::string csv() const;  // suite,check,pass,value,threshold,note
  void append(const SuiteReport &other);
};

struct VerifyOptions
{
  // Suite-specific sample count; 0 selects the suite default.
  std::uint64_t samples = 0;
  std::uint64_t seed = 1;
  NonlinearityParams params;
  GridSpec grid;
  InnerConfig inner;
  SeedProfile seed_profile{{1.0, 1.0}, 3.0};
};

const std::vector<std::string> &suite_names();
// Throws std::invalid_argument for an unknown suite name.
SuiteReport run_suite(const std::string &name, const VerifyOptions &opt);

SuiteReport verify_nonlinearity(const VerifyOptions &opt);
SuiteReport verify_orlicz(const VerifyOptions &opt);
SuiteReport verify_calculus(const VerifyOptions &opt);
// Envelope gradient against central differences.
SuiteReport verify_gradient(const VerifyOptions &opt);
// Small-sphere positivity, far point and the growth envelope along the seed.
SuiteReport verify_mountain_geometry(const VerifyOptions &opt);
// verify_gradient followed by verify_mountain_geometry.
SuiteReport verify_geometry(const VerifyOptions &opt);

// Exhaustive search over collinear splittings t_i in {0, 1/(levels-1), ..., 1}.
double brute_force_norm(const SampledMagnitudes &field, const OrliczPair &pair, int levels = 51);

}  // namespace smaxwell

#endif  // SMAXWELL_VERIFY_HPP
