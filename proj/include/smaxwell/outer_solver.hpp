#ifndef SMAXWELL_OUTER_SOLVER_HPP
#define SMAXWELL_OUTER_SOLVER_HPP

#include <string>
#include <vector>

#include "smaxwell/fields.hpp"
#include "smaxwell/inner_solver.hpp"
#include "smaxwell/nonlinearity.hpp"

namespace smaxwell
{

struct OuterConfig
{
  int path_points = 12;
  // Descent steps applied to the path maximizer per sweep.
  int deform_steps = 1;
  // Stop when |grad J|_L2 <= mp_tol * |Lap u|_L2 at the path maximizer.
  double mp_tol = 1e-4;
  // Growth factor of the ray parameter when searching for the far endpoint.
  double ray_scale = 2.0;
  int max_sweeps = 500;

  void validate() const;
};

// Everything the reduced functional needs besides the field itself.
struct ReducedProblem
{
  NonlinearityParams params;
  InnerConfig inner;
};

struct JHatValue
{
  double value = 0.0;
  ScalarField w;  // Phi(u)
  bool inner_converged = true;
};

// J(u) = 1/2 dirichlet(u) - 1/2 F(u + grad Phi(u)).
JHatValue j_hat_eval(const ReducedProblem &prob, const OneForm &u,
                     const ScalarField *warm_start = nullptr);
double j_hat(const ReducedProblem &prob, const OneForm &u);

// L2 representative of DJ(u) projected to V, with w = Phi(u) already known.
OneForm grad_j_hat(const ReducedProblem &prob, const OneForm &u, const ScalarField &w);
OneForm grad_j_hat(const ReducedProblem &prob, const OneForm &u);

struct FarPoint
{
  OneForm e;
  double t = 0.0;
  int doublings = 0;
  std::vector<double> t_samples;
  std::vector<double> j_samples;
};

// e = t direction with J(e) < 0, t = t0 ray_scale^k. Throws std::runtime_error when no
// sign change appears within 60 steps.
FarPoint find_far_point(const ReducedProblem &prob, const OneForm &direction,
                        const OuterConfig &cfg, double t0 = 1.0);

// Test fields: symmetrized Fourier modes with every wavenumber index in {-1, 0, 1}.
std::vector<OneForm> test_battery(const GridSpec &g, SymmetryGroup group);

// max over the battery of |int <dA, dphi> - int f'(|A|^2)(A | phi)| / (|phi|_D (1 + |A|_D)).
double weak_residual(const NonlinearityParams &params, const OneForm &A,
                     const std::vector<OneForm> &battery);

struct NontrivialityReport
{
  double norm_a = 0.0;       // |u + grad w|
  double norm_u = 0.0;
  double norm_grad_w = 0.0;
  double orthogonality = 0.0;  // |<u, grad w>| / (|u| |grad w|), 0 when either vanishes
};
NontrivialityReport nontriviality_check(const OneForm &u, const ScalarField &w);

struct PSEntry
{
  double j_value;
  double grad_dual;  // |DJ(u)|_{D*}
  double d_norm;     // |u|_D
  double excess;     // int f'(|v|^2)|v|^2 - (alpha/2) f(|v|^2)
};

struct PSRow
{
  int index;
  double lhs;  // (alpha/2 - 1)|u|_D^2 + excess
  double rhs;  // M + eps |u|_D
  bool violated;
};

struct PSReport
{
  double alpha = 0.0;
  double m_bound = 0.0;  // alpha * max J over the trace
  std::vector<PSRow> rows;
  int violations = 0;
};

PSEntry ps_entry(const ReducedProblem &prob, const OneForm &u, const ScalarField &w,
                 const OneForm &grad);
PSReport ps_diagnostic(const std::vector<PSEntry> &trace, double alpha);

struct SolutionReport
{
  OneForm u;
  ScalarField w;
  double j_value = 0.0;
  double grad_norm = 0.0;
  double grad_scale = 0.0;  // |Lap u|_L2
  double weak_residual = 0.0;
  double nontriviality = 0.0;
  double u_norm = 0.0;      // |u|_L2
  double equivariance_residual = 0.0;
  double div_residual = 0.0;
  bool converged = false;
  std::vector<std::string> flags;
};

// Flags every threshold that the report misses.
void apply_flags(SolutionReport &report, const OuterConfig &cfg, bool inner_ok);

struct SweepRow
{
  int sweep;
  double path_max;
  double grad_norm;
  double t_star;
  double step;
};

struct MountainPassResult
{
  SolutionReport report;
  std::vector<SweepRow> sweeps;
  // Path at the first and last sweep: ray parameters and J values of the nodes.
  std::vector<double> initial_t, initial_j, final_t, final_j;
  PSReport ps;
  int phi_solves = 0;

  std::string sweeps_csv() const;  // sweep,path_max,grad_norm,t_star,step
  std::string path_csv() const;    // stage,node,t,j
  std::string ps_csv() const;      // index,lhs,rhs,violated
};

// Minimax over paths from 0 to a far point. The paths are rays: each sweep samples the
// current ray, moves its maximizer along the D-Riesz gradient tangent to the ray and
// takes the ray through the moved node. Steps are accepted only if the path maximum
// decreases.
MountainPassResult mountain_pass(const ReducedProblem &prob, const OneForm &seed,
                                 const OuterConfig &cfg);

// min over sign and half-period block shifts of |A1 - s T A2|_L2.
double aligned_distance(const OneForm &a, const OneForm &b);

}  // namespace smaxwell

#endif  // SMAXWELL_OUTER_SOLVER_HPP
