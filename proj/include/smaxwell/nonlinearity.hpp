#ifndef SMAXWELL_NONLINEARITY_HPP
#define SMAXWELL_NONLINEARITY_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "smaxwell/rng.hpp"

namespace smaxwell
{

//
// Two-branch power nonlinearity acting on the squared magnitude s = <A, A>:
//
//   f(s) = a s^{p/2} + b   for s > 1
//   f(s) = c s^{q/2}       for s <= 1
//
// with a + b = c and a p = c q, so that f is C^1 at the knot s = 1.
//
struct NonlinearityParams
{
  int n = 4;
  double p = 3.0;
  double q = 6.0;
  double a = 2.0;
  double b = -1.0;
  double c = 1.0;
  double alpha = 3.0;
  double R = 0.1;

  // Builds a parameter set with (a, b) solved from (p, q, c).
  static NonlinearityParams from_exponents(int n, double p, double q, double c = 1.0,
                                           double alpha = -1.0, double R = 0.1);

  // Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

// Critical Sobolev exponent 2n/(n-2); +infinity for n = 2.
double critical_exponent(int n);

struct BranchCoefficients
{
  double a;
  double b;
};

// Unique solution of a + b = c, a p = c q.
BranchCoefficients solve_coefficients(double p, double q, double c);

double f_eval(const NonlinearityParams &params, double s);
double f_prime(const NonlinearityParams &params, double s);
// One-sided second derivative (right limit at the knot); used by the Newton inner solver.
double f_second(const NonlinearityParams &params, double s);

// Form acting on the unsquared magnitude: x -> f(x^2).
double f_unsquared(const NonlinearityParams &params, double x);
double f_unsquared_prime(const NonlinearityParams &params, double x);

struct KnotResiduals
{
  double value;       // |f(1-) - f(1+)|
  double derivative;  // |f'(1-) - f'(1+)|
};
KnotResiduals knot_residuals(const NonlinearityParams &params);

// sup of f'(t) / min(t^{p/2-1}, t^{q/2-1}) over log-spaced t in [t_lo, t_hi].
double certify_f3(const NonlinearityParams &params, int sample_count, double t_lo = 1e-6,
                  double t_hi = 1e6);

// sup of f(s) / min(s^{p/2}, s^{q/2}); the upper growth constant c2'.
double measure_growth_upper(const NonlinearityParams &params, int sample_count,
                            double s_lo = 1e-8, double s_hi = 1e8);
// inf of the same ratio.
double measure_growth_lower(const NonlinearityParams &params, int sample_count,
                            double s_lo = 1e-8, double s_hi = 1e8);

struct F4Certificate
{
  bool holds = false;
  double margin = 0.0;     // min of f'(t) t - (alpha/2) f(t) over samples
  double t_at_margin = 0.0;
  double min_f = 0.0;      // min of f(t) over samples
};
F4Certificate certify_f4(const NonlinearityParams &params, double alpha, double R,
                         int sample_count, double t_hi = 1e8);

struct GapValue
{
  double gap;
  double bound;
};

// gap = f(|x|^2) - f(|y|^2) - 2 f'(|y|^2) (y | x - y), bound = min(|x-y|^p, |x-y|^q).
//
// The gap is evaluated as D_f(|x|^2, |y|^2) + f'(|y|^2) |x - y|^2, where D_f is the
// one-dimensional Bregman divergence of f; same-branch divergences use a series for
// nearby arguments so near-diagonal pairs do not lose all digits to cancellation.
GapValue convexity_gap(const NonlinearityParams &params, std::span<const double> x,
                       std::span<const double> y);

// Sampling families used to stress the convexity-gap inequality.
enum class GapRegime : int
{
  generic = 0,
  near_knot,
  straddle_knot,
  collinear_positive,
  collinear_negative,
  orthogonal_split,
  origin,
  unit_distance,
  count
};
std::string to_string(GapRegime regime);

struct GapSample
{
  std::uint64_t index;
  GapRegime regime;
  double gap;
  double bound;
  double ratio;
};

struct C1Certificate
{
  double c1 = 0.0;
  std::uint64_t samples = 0;
  std::vector<double> x_min, y_min;
  GapRegime regime_min = GapRegime::generic;
  std::vector<double> regime_infimum;  // indexed by GapRegime
  bool violated = false;
  double worst_gap = 0.0;
  std::vector<double> x_bad, y_bad;
};

// Infimum of gap/bound over structured samples. near_knot_fraction of the samples go to
// the knot families; the rest are spread over the other families. Deterministic for a
// fixed seed regardless of thread count. When `rows` is non-null every sample is appended.
C1Certificate certify_c1(const NonlinearityParams &params, std::uint64_t sample_count,
                         double near_knot_fraction, std::uint64_t seed,
                         std::vector<GapSample> *rows = nullptr);

// Draws one pair from a sampling family; exposed for tests.
void sample_gap_pair(const NonlinearityParams &params, GapRegime regime, Rng &rng,
                     std::vector<double> &x, std::vector<double> &y);

// inf over u != 0 of (|1+u|^r - 1 - r u) / |u|^r, r > 2.
double kantorovich_constant(double r);
double kantorovich_ratio(double r, double u);

// h(x, y) = (f(x) - f(y) - f'(y)(x - y)) / |x - y|^q with the unsquared form,
// for x > 1 >= y > 0.
double lemma_a1_ratio(const NonlinearityParams &params, double x, double y);

// f(sqrt(a + b)) >= f(sqrt(a)) + f(sqrt(b)) up to -1e-12 slack (unsquared form).
bool superadditivity_check(const NonlinearityParams &params, double a_val, double b_val);

}  // namespace smaxwell

#endif  // SMAXWELL_NONLINEARITY_HPP
