#ifndef SMAXWELL_ORLICZ_HPP
#define SMAXWELL_ORLICZ_HPP

#include <span>
#include <string>
#include <vector>

namespace smaxwell
{

// Exponent pair of the sum space L^p + L^q and its dual L^{p'} ∩ L^{q'}.
struct OrliczPair
{
  double p = 3.0;
  double q = 6.0;

  static OrliczPair make(double p, double q);
  void validate() const;

  double p_dual() const { return p / (p - 1.0); }
  double q_dual() const { return q / (q - 1.0); }
  // Interpolation exponent r = pq/(q-p).
  double r() const { return p * q / (q - p); }
};

//
// Pointwise magnitudes |ξ(x)| of a sampled field together with the quadrature weight of
// one lattice cell. All norms below are midpoint-rule integrals.
//
struct SampledMagnitudes
{
  std::vector<double> values;
  double weight = 1.0;
};

double lebesgue_norm(const SampledMagnitudes &field, double r);

// Sites where |ξ| exceeds the threshold.
std::vector<bool> omega_set(const SampledMagnitudes &field, double threshold = 1.0);

struct NormBounds
{
  double lower = 0.0;
  double upper = 0.0;
  // ‖ξ‖_{Lp(Ω)} + ‖ξ‖_{Lq(Ωᶜ)}: the norm of the indicator splitting.
  double indicator_split = 0.0;
  double lq_outside = 0.0;
  double lp_inside = 0.0;
  std::size_t omega_sites = 0;
  double omega_measure = 0.0;
};

// Two-sided estimate built from Ω = {|ξ| > 1}; the lower side is clamped at 0.
NormBounds norm_bounds(const SampledMagnitudes &field, const OrliczPair &pair);

// ξ₁ = t ξ and ξ₂ = (1 - t) ξ with 0 <= t <= 1 per site.
struct SplitDecomposition
{
  std::vector<double> t;

  double mean_fraction() const;
  std::size_t saturated_sites(double eps = 1e-12) const;
};

struct NormTraceRow
{
  int iteration;
  double objective;
  double step;
};

struct NormResult
{
  double value = 0.0;  // ‖ξ₁‖_p + ‖ξ₂‖_q of the returned split
  double lower = 0.0;  // certified lower bound from a dual element
  double part_p = 0.0;
  double part_q = 0.0;
  SplitDecomposition split;
  // Dual element η = dual[x] ξ(x)/|ξ(x)| with max(‖η‖_{p'}, ‖η‖_{q'}) <= 1 and
  // <ξ, η> = lower. At the optimum it is the derivative of the norm.
  std::vector<double> dual;
  bool converged = false;
  int iterations = 0;
  std::vector<NormTraceRow> trace;

  double gap() const { return value - lower; }
  std::string trace_csv() const;
};

// ‖ξ‖_{L^p+L^q} = inf ‖ξ₁‖_p + ‖ξ₂‖_q over collinear splittings, to absolute tolerance tol
// (the certified bracket [lower, value] has width <= tol when converged).
NormResult norm_exact(const SampledMagnitudes &field, const OrliczPair &pair,
                      double tol = 1e-12, int max_iter = 400);

// Objective of a given collinear split; used by the brute-force oracle and tests.
double split_objective(const SampledMagnitudes &field, const OrliczPair &pair,
                       std::span<const double> t);

// ‖ξ‖_{L^{p'}} + ‖ξ‖_{L^{q'}}.
double dual_norm(const SampledMagnitudes &field, const OrliczPair &pair);

}  // namespace smaxwell

#endif  // SMAXWELL_ORLICZ_HPP
