#include "smaxwell/outer_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "smaxwell/parallel.hpp"

namespace smaxwell
{

void OuterConfig::validate() const
{
  if (path_points < 8)
  {
    throw std::invalid_argument("OuterConfig: path_points must be at least 8");
  }
  if (deform_steps < 1)
  {
    throw std::invalid_argument("OuterConfig: deform_steps must be positive");
  }
  if (!(mp_tol > 0.0))
  {
    throw std::invalid_argument("OuterConfig: mp_tol must be positive");
  }
  if (!(ray_scale > 1.0) || !std::isfinite(ray_scale))
  {
    throw std::invalid_argument("OuterConfig: ray_scale must exceed 1");
  }
  if (max_sweeps < 1)
  {
    throw std::invalid_argument("OuterConfig: max_sweeps must be positive");
  }
}

namespace
{

ScalarField scaled_scalar(const ScalarField &w, double alpha)
{
  ScalarField r = w;
  for (auto &x : r.values)
  {
    x *= alpha;
  }
  return r;
}

double excess_integral(const NonlinearityParams &params, const OneForm &v, double alpha)
{
  const std::size_t S = v.grid.sites();
  double sum = 0.0;
  for (std::size_t x = 0; x < S; ++x)
  {
    double s = 0.0;
    for (int i = 0; i < v.grid.n; ++i)
    {
      s += v.data[i * S + x] * v.data[i * S + x];
    }
    sum += f_prime(params, s) * s - 0.5 * alpha * f_eval(params, s);
  }
  return v.grid.cell_volume() * sum;
}

OneForm riesz(const OneForm &G, SymmetryGroup group)
{
  return project_to_v(inverse_neg_laplacian(G), group);
}

OneForm shift_blocks(const OneForm &A, unsigned mask)
{
  const GridSpec &g = A.grid;
  const std::size_t S = g.sites();
  const int m = g.m;
  OneForm out(g);
  std::vector<int> idx(g.n);
  for (std::size_t s = 0; s < S; ++s)
  {
    std::size_t rest = s;
    for (int a = g.n - 1; a >= 0; --a)
    {
      idx[a] = static_cast<int>(rest % m);
      rest /= m;
    }
    std::size_t target = 0;
    for (int a = 0; a < g.n; ++a)
    {
      const int j = (mask >> (a / 2)) & 1u ? (idx[a] + m / 2) % m : idx[a];
      target = target * m + j;
    }
    for (int i = 0; i < g.n; ++i)
    {
      out.data[i * S + target] = A.data[i * S + s];
    }
  }
  return out;
}

}  // namespace

JHatValue j_hat_eval(const ReducedProblem &prob, const OneForm &u, const ScalarField *warm_start)
{
  JHatValue out;
  const auto res = phi(prob.params, u, prob.inner, warm_start);
  out.value = 0.5 * dirichlet_energy(u) - 0.5 * res.objective;
  out.w = res.w;
  out.inner_converged = res.converged;
  return out;
}

double j_hat(const ReducedProblem &prob, const OneForm &u)
{
  return j_hat_eval(prob, u).value;
}

OneForm grad_j_hat(const ReducedProblem &prob, const OneForm &u, const ScalarField &w)
{
  OneForm v = gradient(w);
  axpy(1.0, u, v);
  OneForm r = scaled(laplacian(u), -1.0);
  axpy(-0.5, dF_field(prob.params, v), r);
  return project_to_v(r, prob.inner.group);
}

OneForm grad_j_hat(const ReducedProblem &prob, const OneForm &u)
{
  return grad_j_hat(prob, u, j_hat_eval(prob, u).w);
}

FarPoint find_far_point(const ReducedProblem &prob, const OneForm &direction,
                        const OuterConfig &cfg, double t0)
{
  cfg.validate();
  if (!(l2_norm(direction) > 0.0))
  {
    throw std::invalid_argument("find_far_point: direction must be nonzero");
  }
  if (!(t0 > 0.0))
  {
    throw std::invalid_argument("find_far_point: start must be positive");
  }
  FarPoint fp;
  double t = t0;
  ScalarField warm;
  double t_warm = 0.0;
  for (int k = 0; k <= 60; ++k)
  {
    const OneForm e = scaled(direction, t);
    const ScalarField guess = t_warm > 0.0 ? scaled_scalar(warm, t / t_warm) : ScalarField();
    const auto jv = j_hat_eval(prob, e, t_warm > 0.0 ? &guess : nullptr);
    fp.t_samples.push_back(t);
    fp.j_samples.push_back(jv.value);
    if (jv.value < 0.0)
    {
      fp.e = e;
      fp.t = t;
      fp.doublings = k;
      return fp;
    }
    warm = jv.w;
    t_warm = t;
    t *= cfg.ray_scale;
  }
  throw std::runtime_error(
      "find_far_point: no sign change of J along the ray within 60 steps; the nonlinearity "
      "may be mis-scaled for this grid");
}

std::vector<OneForm> test_battery(const GridSpec &g, SymmetryGroup group)
{
  g.validate();
  const std::size_t S = g.sites();
  const double k0 = std::numbers::pi / g.L;
  std::vector<OneForm> out;
  int total = 1;
  for (int a = 0; a < g.n; ++a)
  {
    total *= 3;
  }
  std::vector<double> phase(S);
  for (int code = 0; code < total; ++code)
  {
    std::vector<int> k(g.n);
    int rest = code;
    for (int a = 0; a < g.n; ++a)
    {
      k[a] = rest % 3 - 1;
      rest /= 3;
    }
    for (std::size_t s = 0; s < S; ++s)
    {
      std::size_t r = s;
      double ph = 0.0;
      for (int a = g.n - 1; a >= 0; --a)
      {
        ph += k[a] * g.coord(static_cast<int>(r % g.m));
        r /= g.m;
      }
      phase[s] = k0 * ph;
    }
    for (int c = 0; c < g.n; ++c)
    {
      for (int trig = 0; trig < 2; ++trig)
      {
        OneForm phi(g);
        auto comp = phi.component(c);
        for (std::size_t s = 0; s < S; ++s)
        {
          comp[s] = trig == 0 ? std::cos(phase[s]) : std::sin(phase[s]);
        }
        OneForm sym = symmetrize_oneform(phi, group);
        if (d_norm(sym) > 1e-8 * std::sqrt(static_cast<double>(S)) * g.cell_volume())
        {
          out.push_back(std::move(sym));
        }
      }
    }
  }
  return out;
}

double weak_residual(const NonlinearityParams &params, const OneForm &A,
                     const std::vector<OneForm> &battery)
{
  OneForm r = codifferential(exterior_derivative(A));
  axpy(-0.5, dF_field(params, A), r);
  const double denom_a = 1.0 + d_norm(A);
  double worst = 0.0;
  for (const auto &phi : battery)
  {
    const double dn = d_norm(phi);
    if (!(dn > 0.0))
    {
      continue;
    }
    worst = std::max(worst, std::abs(inner(r, phi)) / (dn * denom_a));
  }
  return worst;
}

NontrivialityReport nontriviality_check(const OneForm &u, const ScalarField &w)
{
  NontrivialityReport out;
  const OneForm gw = gradient(w);
  out.norm_u = l2_norm(u);
  out.norm_grad_w = l2_norm(gw);
  out.norm_a = l2_norm(add(u, gw));
  if (out.norm_u > 0.0 && out.norm_grad_w > 0.0)
  {
    out.orthogonality = std::abs(inner(u, gw)) / (out.norm_u * out.norm_grad_w);
  }
  return out;
}

PSEntry ps_entry(const ReducedProblem &prob, const OneForm &u, const ScalarField &w,
                 const OneForm &grad)
{
  PSEntry e;
  OneForm v = gradient(w);
  axpy(1.0, u, v);
  e.j_value = 0.5 * dirichlet_energy(u) - 0.5 * F_total(prob.params, v);
  e.grad_dual = std::sqrt(std::max(0.0, inner(grad, inverse_neg_laplacian(grad))));
  e.d_norm = d_norm(u);
  e.excess = excess_integral(prob.params, v, prob.params.alpha);
  return e;
}

PSReport ps_diagnostic(const std::vector<PSEntry> &trace, double alpha)
{
  PSReport rep;
  rep.alpha = alpha;
  if (trace.empty())
  {
    return rep;
  }
  double jmax = 0.0;
  for (const auto &e : trace)
  {
    jmax = std::max(jmax, e.j_value);
  }
  rep.m_bound = alpha * jmax;
  for (std::size_t k = 0; k < trace.size(); ++k)
  {
    const auto &e = trace[k];
    PSRow row;
    row.index = static_cast<int>(k);
    row.lhs = (0.5 * alpha - 1.0) * e.d_norm * e.d_norm + e.excess;
    row.rhs = rep.m_bound + e.grad_dual * e.d_norm;
    // Relative slack for rounding in the two sides.
    row.violated = row.lhs > row.rhs + 1e-9 * std::max(std::abs(row.lhs), std::abs(row.rhs));
    rep.violations += row.violated ? 1 : 0;
    rep.rows.push_back(row);
  }
  return rep;
}

void apply_flags(SolutionReport &r, const OuterConfig &cfg, bool inner_ok)
{
  r.flags.clear();
  const auto check = [&](bool ok, const char *name)
  {
    if (!ok || std::isnan(r.grad_norm))
    {
      r.flags.emplace_back(name);
    }
  };
  check(r.grad_norm <= cfg.mp_tol * r.grad_scale, "grad_norm");
  check(r.weak_residual <= 1e-3, "weak_residual");
  check(r.div_residual <= 1e-8, "div_residual");
  check(r.equivariance_residual <= 1e-10, "equivariance_residual");
  check(r.j_value > 0.0, "j_value");
  check(r.nontriviality > 0.1 * r.u_norm, "nontriviality");
  check(inner_ok, "inner_solver");
  r.converged = r.flags.empty();
}

std::string MountainPassResult::sweeps_csv() const
{
  std::ostringstream os;
  os.precision(17);
  os << "sweep,path_max,grad_norm,t_star,step\n";
  for (const auto &r : sweeps)
  {
    os << r.sweep << ',' << r.path_max << ',' << r.grad_norm << ',' << r.t_star << ','
       << r.step << '\n';
  }
  return os.str();
}

std::string MountainPassResult::path_csv() const
{
  std::ostringstream os;
  os.precision(17);
  os << "stage,node,t,j\n";
  for (std::size_t k = 0; k < initial_t.size(); ++k)
  {
    os << "initial," << k << ',' << initial_t[k] << ',' << initial_j[k] << '\n';
  }
  for (std::size_t k = 0; k < final_t.size(); ++k)
  {
    os << "final," << k << ',' << final_t[k] << ',' << final_j[k] << '\n';
  }
  return os.str();
}

std::string MountainPassResult::ps_csv() const
{
  std::ostringstream os;
  os.precision(17);
  os << "index,lhs,rhs,violated\n";
  for (const auto &r : ps.rows)
  {
    os << r.index << ',' << r.lhs << ',' << r.rhs << ',' << (r.violated ? 1 : 0) << '\n';
  }
  return os.str();
}

namespace
{

struct RayPoint
{
  double t = 0.0;
  OneForm u;  // t * direction
  ScalarField w;
  double j = 0.0;
  OneForm grad;
  double slope = 0.0;  // d/dt J(t direction)
  bool inner_ok = true;
};

class RaySearch
{
public:
  RaySearch(const ReducedProblem &prob, int &solves) : prob_(prob), solves_(solves) {}

  RayPoint eval(const OneForm &dir, double t, const RayPoint *near) const
  {
    RayPoint p;
    p.t = t;
    p.u = scaled(dir, t);
    ScalarField guess;
    if (near && near->t > 0.0)
    {
      guess = scaled_scalar(near->w, t / near->t);
    }
    const auto jv = j_hat_eval(prob_, p.u, near ? &guess : nullptr);
    ++solves_;
    p.w = jv.w;
    p.j = jv.value;
    p.inner_ok = jv.inner_converged;
    p.grad = grad_j_hat(prob_, p.u, p.w);
    p.slope = inner(p.grad, dir);
    return p;
  }

  // Maximizer of t -> J(t dir). Along every ray J(t u)/t^2 decreases, so the slope has a
  // single sign change; it is bracketed from t0 and then located by regula falsi.
  RayPoint maximize(const OneForm &dir, double t0, const RayPoint *near) const
  {
    const double dd = d_inner(dir, dir);
    RayPoint a = eval(dir, t0, near);
    const auto done = [&](const RayPoint &p)
    { return std::abs(p.slope) <= 1e-11 * p.t * dd; };
    if (done(a))
    {
      return a;
    }
    RayPoint b;
    double factor = 1.02;
    for (int k = 0;; ++k)
    {
      const double t = a.slope > 0.0 ? a.t * factor : a.t / factor;
      b = eval(dir, t, &a);
      if (done(b))
      {
        return b;
      }
      if ((a.slope > 0.0) != (b.slope > 0.0))
      {
        break;
      }
      if (k > 200)
      {
        throw std::runtime_error("mountain_pass: no maximum of J along the ray");
      }
      a = std::move(b);
      factor *= factor;
    }
    const bool a_low = a.slope > 0.0;
    RayPoint lo = a_low ? a : b;
    RayPoint hi = a_low ? b : a;
    double flo = lo.slope, fhi = hi.slope;
    int side = 0;
    RayPoint best = std::abs(lo.slope) < std::abs(hi.slope) ? lo : hi;
    for (int k = 0; k < 100; ++k)
    {
      double t = (lo.t * fhi - hi.t * flo) / (fhi - flo);
      if (!(t > std::min(lo.t, hi.t) && t < std::max(lo.t, hi.t)))
      {
        t = 0.5 * (lo.t + hi.t);
      }
      const RayPoint &nearest = std::abs(t - lo.t) < std::abs(t - hi.t) ? lo : hi;
      RayPoint c = eval(dir, t, &nearest);
      if (std::abs(c.slope) < std::abs(best.slope))
      {
        best = c;
      }
      if (done(c) || std::abs(hi.t - lo.t) <= 1e-15 * c.t)
      {
        return c;
      }
      if (c.slope > 0.0)
      {
        lo = std::move(c);
        flo = lo.slope;
        if (side == -1)
        {
          fhi *= 0.5;
        }
        side = -1;
      }
      else
      {
        hi = std::move(c);
        fhi = hi.slope;
        if (side == 1)
        {
          flo *= 0.5;
        }
        side = 1;
      }
    }
    return best;
  }

private:
  const ReducedProblem &prob_;
  int &solves_;
};

std::vector<double> path_values(const ReducedProblem &prob, const OneForm &dir,
                                const std::vector<double> &ts, int &solves)
{
  std::vector<double> js(ts.size(), 0.0);
  const int count = static_cast<int>(ts.size());
  for_each_shard(count,
                 [&](int k)
                 {
                   if (ts[k] > 0.0)
                   {
                     js[k] = j_hat(prob, scaled(dir, ts[k]));
                   }
                 });
  for (double t : ts)
  {
    solves += t > 0.0 ? 1 : 0;
  }
  return js;
}

std::vector<double> path_nodes(double t_far, int points)
{
  std::vector<double> ts(points);
  for (int k = 0; k < points; ++k)
  {
    ts[k] = t_far * k / (points - 1);
  }
  return ts;
}

}  // namespace

MountainPassResult mountain_pass(const ReducedProblem &prob, const OneForm &seed,
                                 const OuterConfig &cfg)
{
  cfg.validate();
  prob.params.validate();
  prob.inner.validate();
  const SymmetryGroup group = prob.inner.group;
  if (!(l2_norm(seed) > 0.0))
  {
    throw std::invalid_argument("mountain_pass: seed must be nonzero");
  }
  MountainPassResult out;
  int &solves = out.phi_solves;
  const RaySearch ray(prob, solves);

  // Initial path: nodes on the segment from 0 to the far point along the seed.
  OneForm dir = project_to_v(seed, group);
  dir = scaled(dir, 1.0 / d_norm(dir));
  const FarPoint far = find_far_point(prob, dir, cfg);
  solves += static_cast<int>(far.t_samples.size());
  out.initial_t = path_nodes(far.t, cfg.path_points);
  out.initial_j = path_values(prob, dir, out.initial_t, solves);
  // Lowest index wins ties.
  int kmax = 0;
  for (int k = 1; k < cfg.path_points; ++k)
  {
    if (out.initial_j[k] > out.initial_j[kmax])
    {
      kmax = k;
    }
  }
  RayPoint cur = ray.maximize(dir, std::max(out.initial_t[kmax], out.initial_t[1]), nullptr);
  bool inner_ok = cur.inner_ok;

  std::vector<PSEntry> ps_trace;
  OneForm prev_u, prev_g;
  double tau = 1.0;
  double step = 0.0;
  bool stalled = false;
  int sweep = 0;
  for (;; ++sweep)
  {
    const double gn = l2_norm(cur.grad);
    const double scale = l2_norm(laplacian(cur.u));
    out.sweeps.push_back({sweep, cur.j, gn, cur.t, step});
    ps_trace.push_back(ps_entry(prob, cur.u, cur.w, cur.grad));
    if (gn <= cfg.mp_tol * scale || sweep >= cfg.max_sweeps || stalled)
    {
      break;
    }
    for (int d = 0; d < cfg.deform_steps && !stalled; ++d)
    {
      // D-Riesz gradient, tangent to the ray.
      OneForm g = riesz(cur.grad, group);
      axpy(-d_inner(g, cur.u) / d_inner(cur.u, cur.u), cur.u, g);
      const double gg = d_inner(g, g);
      if (!prev_u.data.empty())
      {
        const OneForm s = sub(cur.u, prev_u);
        const OneForm y = sub(g, prev_g);
        const double sy = d_inner(s, y);
        if (sy > 0.0)
        {
          tau = std::clamp(d_inner(s, s) / sy, 1e-3, 1e3);
        }
      }
      bool accepted = false;
      for (int ls = 0; ls < 40; ++ls)
      {
        OneForm trial = cur.u;
        axpy(-tau, g, trial);
        trial = project_to_v(trial, group);
        RayPoint next = ray.maximize(trial, 1.0, &cur);
        if (next.j <= cur.j - 1e-4 * tau * gg)
        {
          prev_u = cur.u;
          prev_g = g;
          step = tau;
          cur = std::move(next);
          inner_ok = inner_ok && cur.inner_ok;
          accepted = true;
          break;
        }
        tau *= 0.5;
      }
      stalled = !accepted;
    }
  }

  // Final path along the ray through the maximizer.
  const OneForm unit = scaled(cur.u, 1.0 / d_norm(cur.u));
  const double t_star = d_norm(cur.u);
  try
  {
    const FarPoint far_end = find_far_point(prob, unit, cfg, t_star * cfg.ray_scale);
    solves += static_cast<int>(far_end.t_samples.size());
    out.final_t = path_nodes(far_end.t, cfg.path_points);
    out.final_j = path_values(prob, unit, out.final_t, solves);
  }
  catch (const std::runtime_error &)
  {
    out.final_t.clear();
    out.final_j.clear();
  }

  SolutionReport &rep = out.report;
  rep.u = cur.u;
  rep.w = cur.w;
  rep.j_value = cur.j;
  rep.grad_norm = l2_norm(cur.grad);
  rep.grad_scale = l2_norm(laplacian(cur.u));
  const OneForm A = add(cur.u, gradient(cur.w));
  rep.weak_residual = weak_residual(prob.params, A, test_battery(A.grid, group));
  const auto nt = nontriviality_check(cur.u, cur.w);
  rep.nontriviality = nt.norm_a;
  rep.u_norm = nt.norm_u;
  rep.equivariance_residual =
      std::max(equivariance_residual(cur.u, group), equivariance_residual(A, group));
  rep.div_residual = max_abs(divergence(cur.u).values);
  apply_flags(rep, cfg, inner_ok);
  if (stalled)
  {
    rep.flags.emplace_back("stalled");
    rep.converged = false;
  }
  if (sweep >= cfg.max_sweeps && !(rep.grad_norm <= cfg.mp_tol * rep.grad_scale))
  {
    rep.flags.emplace_back("max_sweeps");
    rep.converged = false;
  }
  out.ps = ps_diagnostic(ps_trace, prob.params.alpha);
  return out;
}

double aligned_distance(const OneForm &a, const OneForm &b)
{
  if (!(a.grid == b.grid))
  {
    throw std::invalid_argument("aligned_distance: grids differ");
  }
  double best = std::numeric_limits<double>::infinity();
  const unsigned masks = 1u << (a.grid.n / 2);
  for (unsigned mask = 0; mask < masks; ++mask)
  {
    const OneForm t = shift_blocks(b, mask);
    best = std::min({best, l2_norm(sub(a, t)), l2_norm(add(a, t))});
  }
  return best;
}

}  // namespace smaxwell
