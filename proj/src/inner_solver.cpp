#include "smaxwell/inner_solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace smaxwell
{

void InnerConfig::validate() const
{
  if (!(grad_tol > 0.0))
  {
    throw std::invalid_argument("InnerConfig: grad_tol must be positive");
  }
  if (!(ls_shrink > 0.0 && ls_shrink < 1.0))
  {
    throw std::invalid_argument("InnerConfig: ls_shrink must lie in (0, 1)");
  }
  if (!(ls_slope > 0.0 && ls_slope < 0.5))
  {
    throw std::invalid_argument("InnerConfig: ls_slope must lie in (0, 0.5)");
  }
  if (max_iter < 1 || gamma_max_iter < 1)
  {
    throw std::invalid_argument("InnerConfig: iteration caps must be positive");
  }
  if (!(gamma_tol > 0.0))
  {
    throw std::invalid_argument("InnerConfig: gamma_tol must be positive");
  }
}

std::string ConvergenceTrace::csv() const
{
  std::ostringstream os;
  os.precision(17);
  os << "iter,objective,grad_norm,step\n";
  for (const auto &r : rows)
  {
    os << r.iter << ',' << r.objective << ',' << r.grad_norm << ',' << r.step << '\n';
  }
  return os.str();
}

namespace
{

std::vector<double> squared_magnitudes(const OneForm &A)
{
  const std::size_t S = A.grid.sites();
  std::vector<double> s(S, 0.0);
  for (int i = 0; i < A.grid.n; ++i)
  {
    auto c = A.component(i);
    for (std::size_t x = 0; x < S; ++x)
    {
      s[x] += c[x] * c[x];
    }
  }
  return s;
}

OneForm add_gradient(const OneForm &u, const ScalarField &w)
{
  OneForm v = gradient(w);
  axpy(1.0, u, v);
  return v;
}

ScalarField neg_div(const OneForm &A)
{
  ScalarField d = divergence(A);
  for (auto &x : d.values)
  {
    x = -x;
  }
  return d;
}

void remove_mean(ScalarField &w)
{
  double mean = 0.0;
  for (double x : w.values)
  {
    mean += x;
  }
  mean /= static_cast<double>(w.values.size());
  for (auto &x : w.values)
  {
    x -= mean;
  }
}

ScalarField scaled(const ScalarField &w, double alpha)
{
  ScalarField r = w;
  for (auto &x : r.values)
  {
    x *= alpha;
  }
  return r;
}

// Gradients of the orbit indicator functions, sampled at the orbit representatives:
// row r * n + i, column j holds d_i e_j at representative r.
struct ReducedGradients
{
  Eigen::MatrixXd at_reps;
};

const ReducedGradients &reduced_gradients(const GridSpec &g, SymmetryGroup group)
{
  static std::mutex mtx;
  static std::map<std::tuple<int, int, double, int>, ReducedGradients> cache;
  const auto key = std::make_tuple(g.n, g.m, g.L, static_cast<int>(group));
  {
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(key);
    if (it != cache.end())
    {
      return it->second;
    }
  }
  const OrbitTable &orbits = orbit_table(g, group);
  const int K = orbits.count();
  const std::size_t S = g.sites();
  ReducedGradients out;
  out.at_reps.resize(static_cast<Eigen::Index>(K) * g.n, K);
  ScalarField e(g);
  for (int j = 0; j < K; ++j)
  {
    for (std::size_t x = 0; x < S; ++x)
    {
      e.values[x] = orbits.orbit_of[x] == j ? 1.0 : 0.0;
    }
    const OneForm ge = gradient(e);
    for (int r = 0; r < K; ++r)
    {
      for (int i = 0; i < g.n; ++i)
      {
        out.at_reps(r * g.n + i, j) = ge.data[i * S + orbits.representative[r]];
      }
    }
  }
  std::lock_guard<std::mutex> lock(mtx);
  return cache.emplace(key, std::move(out)).first->second;
}

}  // namespace

double F_total(const NonlinearityParams &params, const OneForm &A)
{
  const auto s = squared_magnitudes(A);
  double sum = 0.0;
  for (double x : s)
  {
    sum += f_eval(params, x);
  }
  return A.grid.cell_volume() * sum;
}

OneForm dF_field(const NonlinearityParams &params, const OneForm &A)
{
  const auto s = squared_magnitudes(A);
  OneForm out = A;
  const std::size_t S = A.grid.sites();
  for (int i = 0; i < A.grid.n; ++i)
  {
    auto c = out.component(i);
    for (std::size_t x = 0; x < S; ++x)
    {
      c[x] *= 2.0 * f_prime(params, s[x]);
    }
  }
  return out;
}

ScalarField reduced_gradient(const NonlinearityParams &params, const OneForm &u,
                             const ScalarField &w)
{
  return neg_div(dF_field(params, add_gradient(u, w)));
}

PhiResult phi(const NonlinearityParams &params, const OneForm &u, const InnerConfig &cfg,
              const ScalarField *warm_start)
{
  cfg.validate();
  const GridSpec &g = u.grid;
  const std::size_t S = g.sites();
  const int n = g.n;
  PhiResult res;
  res.w = warm_start ? symmetrize_scalar(*warm_start, cfg.group) : ScalarField(g);
  remove_mean(res.w);

  double step = 0.0;
  for (int it = 0;; ++it)
  {
    const OneForm v = add_gradient(u, res.w);
    const auto s = squared_magnitudes(v);
    double F = 0.0;
    for (double x : s)
    {
      F += f_eval(params, x);
    }
    F *= g.cell_volume();
    const ScalarField grad = symmetrize_scalar(neg_div(dF_field(params, v)), cfg.group);
    const double gn = l2_norm(grad);
    res.objective = F;
    res.grad_norm = gn;
    res.iterations = it;
    res.trace.rows.push_back({it, F, gn, step});
    if (gn <= cfg.grad_tol)
    {
      res.converged = true;
      break;
    }
    if (it >= cfg.max_iter)
    {
      break;
    }

    // Newton step in the basis of orbit indicators. The Hessian integrand
    // grad(e_i) . (a I + b v v^T) grad(e_j) is invariant, so one site per orbit suffices.
    const OrbitTable &orbits = orbit_table(g, cfg.group);
    const ReducedGradients &rg = reduced_gradients(g, cfg.group);
    const int K = orbits.count();
    const double vol = g.cell_volume();
    Eigen::MatrixXd weighted(K * n, K);
    Eigen::MatrixXd rank_one(K, K);
    Eigen::VectorXd rhs(K);
    for (int r = 0; r < K; ++r)
    {
      const std::size_t x = orbits.representative[r];
      const double w = vol * orbits.size[r];
      const double ax = 2.0 * f_prime(params, s[x]);
      const double bx = 4.0 * f_second(params, s[x]);
      const double sa = std::sqrt(w * std::max(ax, 0.0));
      const double sb = std::sqrt(w * std::max(bx, 0.0));
      rank_one.row(r).setZero();
      for (int i = 0; i < n; ++i)
      {
        weighted.row(r * n + i) = sa * rg.at_reps.row(r * n + i);
        rank_one.row(r) += (sb * v.data[i * S + x]) * rg.at_reps.row(r * n + i);
      }
      rhs[r] = -w * grad.values[x];
    }
    Eigen::MatrixXd H(K, K);
    H.setZero();
    H.selfadjointView<Eigen::Lower>().rankUpdate(weighted.transpose());
    H.selfadjointView<Eigen::Lower>().rankUpdate(rank_one.transpose());
    // The kernel of the gradient makes H singular; a small mass-matrix shift keeps the
    // factorization definite.
    const double shift = 1e-13 * H.diagonal().maxCoeff();
    for (int r = 0; r < K; ++r)
    {
      H(r, r) += shift * vol * orbits.size[r];
    }
    const Eigen::LDLT<Eigen::MatrixXd, Eigen::Lower> ldlt(H);
    const Eigen::VectorXd dc = ldlt.solve(rhs);
    ScalarField dir(g);
    for (std::size_t x = 0; x < S; ++x)
    {
      dir.values[x] = dc[orbits.orbit_of[x]];
    }
    // Drop the kernel of the gradient (modes with every index 0 or m/2).
    dir = inverse_neg_laplacian(scaled(laplacian(dir), -1.0));
    double slope = inner(grad, dir);
    if (!std::isfinite(slope) || !(slope < 0.0))
    {
      double cbar = 0.0;
      for (std::size_t x = 0; x < S; ++x)
      {
        cbar += 2.0 * f_prime(params, s[x]) + 4.0 * f_second(params, s[x]) * s[x];
      }
      cbar /= static_cast<double>(S);
      if (!(cbar > 0.0))
      {
        break;
      }
      dir = scaled(inverse_neg_laplacian(grad), -1.0 / cbar);
      slope = inner(grad, dir);
    }

    // Armijo backtracking. Near the minimizer F stops resolving the decrease, so a step is
    // also accepted when the directional derivative at the trial point is still <= 0;
    // convexity along the line then guarantees F did not increase.
    step = 1.0;
    bool accepted = false;
    ScalarField trial = res.w;
    for (int ls = 0; ls < 60; ++ls)
    {
      trial = res.w;
      axpy(step, dir, trial);
      const OneForm vt = add_gradient(u, trial);
      if (F_total(params, vt) <= F + cfg.ls_slope * step * slope)
      {
        accepted = true;
        break;
      }
      const ScalarField gt = neg_div(dF_field(params, vt));
      if (inner(gt, dir) <= 0.0)
      {
        accepted = true;
        break;
      }
      step *= cfg.ls_shrink;
    }
    if (!accepted)
    {
      res.converged = gn <= cfg.grad_tol;
      break;
    }
    res.w = std::move(trial);
    remove_mean(res.w);
  }
  return res;
}

namespace
{

struct NormEval
{
  double value;
  ScalarField grad;  // L2 gradient with respect to w
};

NormEval norm_and_gradient(const OneForm &u, const ScalarField &w, const OrliczPair &pair,
                           const InnerConfig &cfg)
{
  const OneForm v = add_gradient(u, w);
  const auto mags = magnitudes(v);
  const double scale = 1.0 + lebesgue_norm(mags, pair.q);
  const auto nr = norm_exact(mags, pair, 1e-13 * scale);
  OneForm eta(v.grid);
  const std::size_t S = v.grid.sites();
  for (std::size_t x = 0; x < S; ++x)
  {
    const double m = mags.values[x];
    if (m <= 1e-12)
    {
      continue;
    }
    for (int i = 0; i < v.grid.n; ++i)
    {
      eta.data[i * S + x] = nr.dual[x] * v.data[i * S + x] / m;
    }
  }
  return {nr.value, symmetrize_scalar(neg_div(eta), cfg.group)};
}

}  // namespace

PhiResult phi_gamma(const OneForm &u, const OrliczPair &pair, double gamma,
                    const InnerConfig &cfg, bool apply_power)
{
  cfg.validate();
  if (!(gamma > 1.0))
  {
    throw std::invalid_argument("phi_gamma: gamma must exceed 1");
  }
  const GridSpec &g = u.grid;
  PhiResult res;
  res.w = ScalarField(g);

  auto eval = [&](const ScalarField &w)
  {
    auto e = norm_and_gradient(u, w, pair, cfg);
    if (apply_power)
    {
      const double factor = gamma * std::pow(e.value, gamma - 1.0);
      e.value = std::pow(e.value, gamma);
      for (auto &x : e.grad.values)
      {
        x *= factor;
      }
    }
    return e;
  };

  NormEval cur = eval(res.w);
  const double g0 = l2_norm(cur.grad);
  const double tol = cfg.gamma_tol * std::max(1.0, g0);
  double alpha = 1.0;
  ScalarField prev_w, prev_g;
  double step = 0.0;
  int stagnant = 0;
  for (int it = 0;; ++it)
  {
    const double gn = l2_norm(cur.grad);
    res.objective = cur.value;
    res.grad_norm = gn;
    res.iterations = it;
    res.trace.rows.push_back({it, cur.value, gn, step});
    if (gn <= tol || cur.value == 0.0)
    {
      res.converged = true;
      break;
    }
    if (it >= cfg.gamma_max_iter || stagnant >= 8)
    {
      break;
    }
    const ScalarField dir = scaled(inverse_neg_laplacian(cur.grad), -1.0);
    const double slope = inner(cur.grad, dir);
    if (it > 0)
    {
      // Barzilai-Borwein step in the preconditioned metric.
      ScalarField sdiff = res.w;
      axpy(-1.0, prev_w, sdiff);
      ScalarField ydiff = cur.grad;
      axpy(-1.0, prev_g, ydiff);
      const double sy = inner(sdiff, ydiff);
      const double ss = -inner(sdiff, laplacian(sdiff));
      alpha = sy > 0.0 ? ss / sy : 2.0 * alpha;
    }
    step = alpha;
    bool accepted = false;
    ScalarField trial;
    NormEval next;
    for (int ls = 0; ls < 60; ++ls)
    {
      trial = res.w;
      axpy(step, dir, trial);
      next = eval(trial);
      if (next.value <= cur.value + cfg.ls_slope * step * slope)
      {
        accepted = true;
        break;
      }
      step *= cfg.ls_shrink;
    }
    if (!accepted)
    {
      break;
    }
    stagnant = (cur.value - next.value) <= 1e-15 * cur.value ? stagnant + 1 : 0;
    prev_w = std::move(res.w);
    prev_g = std::move(cur.grad);
    res.w = std::move(trial);
    remove_mean(res.w);
    cur = std::move(next);
    alpha = step;
  }
  return res;
}

CTildeResult c_tilde(const std::vector<OneForm> &basis, const OrliczPair &pair, double gamma,
                     const InnerConfig &cfg, int samples, std::uint64_t seed)
{
  if (basis.empty())
  {
    throw std::invalid_argument("c_tilde: empty basis");
  }
  // D-orthonormalize (modified Gram-Schmidt), dropping dependent elements.
  std::vector<OneForm> e;
  for (const auto &b : basis)
  {
    OneForm v = b;
    for (const auto &q : e)
    {
      axpy(-d_inner(v, q), q, v);
    }
    const double nv = std::sqrt(std::max(0.0, d_inner(v, v)));
    if (nv > 1e-10 * std::max(1.0, std::sqrt(std::max(0.0, d_inner(b, b)))))
    {
      e.push_back(scaled(v, 1.0 / nv));
    }
  }
  if (e.empty())
  {
    throw std::invalid_argument("c_tilde: basis has zero D-norm");
  }
  const int dim = static_cast<int>(e.size());
  std::vector<std::vector<double>> dirs;
  if (dim == 1)
  {
    dirs = {{1.0}, {-1.0}};
  }
  else
  {
    Rng rng(mix_seed(seed));
    for (int k = 0; k < samples; ++k)
    {
      dirs.push_back(rng.unit_vector(dim));
    }
  }

  CTildeResult res;
  res.value = std::numeric_limits<double>::infinity();
  for (const auto &c : dirs)
  {
    OneForm u(e[0].grid);
    for (int i = 0; i < dim; ++i)
    {
      axpy(c[i], e[i], u);
    }
    const auto pr = phi_gamma(u, pair, gamma, cfg);
    res.converged = res.converged && pr.converged;
    const double val = std::pow(pr.objective, gamma);
    ++res.samples;
    if (val < res.value)
    {
      res.value = val;
      res.coefficients = c;
      res.direction = u;
    }
  }
  return res;
}

}  // namespace smaxwell
