#ifndef SMAXWELL_INNER_SOLVER_HPP
#define SMAXWELL_INNER_SOLVER_HPP

#include <optional>
#include <string>
#include <vector>

#include "smaxwell/fields.hpp"
#include "smaxwell/nonlinearity.hpp"
#include "smaxwell/orlicz.hpp"

namespace smaxwell
{

struct InnerConfig
{
  double grad_tol = 1e-10;  // on the L2 norm of the reduced gradient
  int max_iter = 200;
  double ls_shrink = 0.5;
  double ls_slope = 1e-4;
  // Orlicz-norm problem: tolerance on the L2 norm of its gradient and iteration cap.
  double gamma_tol = 1e-9;
  int gamma_max_iter = 2000;
  SymmetryGroup group = SymmetryGroup::cyclic;

  void validate() const;
};

struct TraceRow
{
  int iter;
  double objective;
  double grad_norm;
  double step;
};

struct ConvergenceTrace
{
  std::vector<TraceRow> rows;
  std::string csv() const;  // iter,objective,grad_norm,step
};

// F(A) = int f(|A|^2).
double F_total(const NonlinearityParams &params, const OneForm &A);
// Density 2 f'(|A|^2) A of DF.
OneForm dF_field(const NonlinearityParams &params, const OneForm &A);
// L2 gradient of w -> F(u + grad w): -div(2 f'(|v|^2) v), v = u + grad w.
ScalarField reduced_gradient(const NonlinearityParams &params, const OneForm &u,
                             const ScalarField &w);

struct PhiResult
{
  ScalarField w;
  double objective = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  ConvergenceTrace trace;
};

// Minimizer of the strictly convex map w -> F(u + grad w) over zero-mean invariant w,
// by damped Newton with the Hessian assembled in the basis of orbit indicator functions.
PhiResult phi(const NonlinearityParams &params, const OneForm &u, const InnerConfig &cfg,
              const ScalarField *warm_start = nullptr);

// Minimizer of w -> |u + grad w|^gamma in L^p + L^q. The power does not move the
// minimizer, so by default the norm itself is minimized; `apply_power` minimizes the
// powered objective instead.
PhiResult phi_gamma(const OneForm &u, const OrliczPair &pair, double gamma,
                    const InnerConfig &cfg, bool apply_power = false);

struct CTildeResult
{
  double value = 0.0;
  std::vector<double> coefficients;  // minimizing direction in the D-orthonormalized basis
  OneForm direction;                 // same direction as a field, unit D-norm
  int samples = 0;
  bool converged = true;             // every inner problem converged
};

// min over the D-unit sphere of span(basis) of |u + grad Phi_gamma(u)|^gamma. A basis of
// one element is evaluated at +-u; otherwise `samples` nested random directions are used.
CTildeResult c_tilde(const std::vector<OneForm> &basis, const OrliczPair &pair, double gamma,
                     const InnerConfig &cfg, int samples = 64, std::uint64_t seed = 1);

}  // namespace smaxwell

#endif  // SMAXWELL_INNER_SOLVER_HPP
