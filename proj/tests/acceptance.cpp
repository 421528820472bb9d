// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "smaxwell/fields.hpp"
#include "smaxwell/outer_solver.hpp"
#include "smaxwell/run_config.hpp"
#include "smaxwell/verify.hpp"

using namespace smaxwell;

namespace
{

struct Outcome
{
  bool pass = false;
  std::string detail;
  std::string fingerprint;  // compared across reruns
};

double seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const CheckResult &find(const SuiteReport &rep, const std::string &name)
{
  for (const auto &c : rep.checks)
  {
    if (c.name == name)
    {
      return c;
    }
  }
  throw std::runtime_error("missing check " + name);
}

std::string fmt(const char *f, double x)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

Outcome checks_outcome(const SuiteReport &rep, const std::vector<std::string> &names)
{
  Outcome o{true, "", rep.csv()};
  for (const auto &n : names)
  {
    const auto &c = find(rep, n);
    o.pass = o.pass && c.pass;
    o.detail += n + "=" + fmt("%.3g", c.value) + (c.pass ? " " : " (fail) ");
  }
  return o;
}

VerifyOptions base_options(const RunConfig &cfg)
{
  VerifyOptions opt;
  opt.params = cfg.params;
  opt.grid = cfg.grid;
  opt.inner = cfg.inner;
  opt.seed_profile = cfg.seed;
  return opt;
}

Outcome criterion1(const RunConfig &cfg)
{
  return checks_outcome(verify_nonlinearity(base_options(cfg)),
                        {"knot_value", "knot_derivative", "f4", "c1_measured", "C2_p"});
}

Outcome criterion2(const RunConfig &cfg)
{
  return checks_outcome(verify_orlicz(base_options(cfg)),
                        {"brute_force_bundled", "brute_force_random", "sandwich_violations"});
}

Outcome criterion3(const RunConfig &cfg)
{
  return checks_outcome(verify_calculus(base_options(cfg)),
                        {"dd_zero", "adjoint_d_delta", "adjoint_grad_div", "hodge_reconstruction",
                         "hodge_divergence", "laplace_beltrami", "energy_identity"});
}

Outcome criterion4(const RunConfig &cfg)
{
  return checks_outcome(verify_gradient(base_options(cfg)), {"envelope_gradient"});
}

Outcome criterion5(const RunConfig &cfg)
{
  return checks_outcome(verify_mountain_geometry(base_options(cfg)),
                        {"small_sphere_min_j", "far_point", "envelope_excess"});
}

MountainPassResult solve(const RunConfig &cfg)
{
  const ReducedProblem prob{cfg.params, cfg.inner};
  return mountain_pass(prob, seed_form(cfg.grid, cfg.seed, cfg.inner.group), cfg.outer);
}

Outcome criterion6(const RunConfig &cfg)
{
  const auto res = solve(cfg);
  const auto &r = res.report;
  Outcome o;
  const bool grad_ok = r.grad_norm <= 1e-4 * r.grad_scale;
  const bool weak_ok = r.weak_residual <= 1e-3;
  const bool div_ok = r.div_residual <= 1e-8;
  const bool eq_ok = r.equivariance_residual <= 1e-10;
  const bool j_ok = r.j_value > 0.0;
  const bool nt_ok = r.nontriviality > 0.1 * r.u_norm;
  o.pass = grad_ok && weak_ok && div_ok && eq_ok && j_ok && nt_ok;
  std::ostringstream d;
  d << "J=" << fmt("%.6g", r.j_value) << " grad/scale=" << fmt("%.2e", r.grad_norm / r.grad_scale)
    << " weak=" << fmt("%.2e", r.weak_residual) << " div=" << fmt("%.2e", r.div_residual)
    << " equiv=" << fmt("%.2e", r.equivariance_residual)
    << " nontriv/|u|=" << fmt("%.3f", r.nontriviality / r.u_norm);
  o.detail = d.str();
  o.fingerprint = report_json(cfg, res) + res.sweeps_csv() + res.path_csv() + res.ps_csv();
  return o;
}

Outcome criterion7(const RunConfig &cfg)
{
  RunConfig a = cfg, b = cfg;
  a.seed.amplitudes = {1.0, 1.0};
  b.seed.amplitudes = {1.0, 0.0};
  const auto ra = solve(a);
  const auto rb = solve(b);
  const double dist = aligned_distance(ra.report.u, rb.report.u);
  Outcome o;
  o.pass = ra.report.converged && rb.report.converged && dist > 1e-2;
  o.detail = "J_a=" + fmt("%.6g", ra.report.j_value) + " J_b=" + fmt("%.6g", rb.report.j_value) +
             " aligned_L2=" + fmt("%.4g", dist);
  return o;
}

}  // namespace

int main(int argc, char **argv)
{
  const std::string config_path =
      argc > 1 ? argv[1] : std::string(SMAXWELL_CONFIG_DIR) + "/n4m8.json";
  const RunConfig cfg = load_run_config(config_path);

  struct Criterion
  {
    int id;
    std::string title;
    double budget_s;
    std::function<Outcome(const RunConfig &)> run;
  };
  const std::vector<Criterion> criteria{
      {1, "nonlinearity certification", 60.0, criterion1},
      {2, "Orlicz norm", 120.0, criterion2},
      {3, "calculus identities", 1e300, criterion3},
      {4, "envelope gradient", 120.0, criterion4},
      {5, "mountain-pass geometry", 300.0, criterion5},
      {6, "flagship solve", 1800.0, criterion6},
      {7, "multiplicity", 1e300, criterion7},
  };

  bool all = true;
  std::vector<std::string> prints;
  for (const auto &c : criteria)
  {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try
    {
      o = c.run(cfg);
    }
    catch (const std::exception &e)
    {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double dt = seconds_since(t0);
    const bool in_time = dt <= c.budget_s;
    const bool pass = o.pass && in_time;
    all = all && pass;
    if (c.id <= 6)
    {
      prints.push_back(o.fingerprint);
    }
    std::printf("criterion %d %s: %s (%.1f s%s) %s\n", c.id, c.title.c_str(),
                pass ? "PASS" : "FAIL", dt, in_time ? "" : ", over budget", o.detail.c_str());
    std::fflush(stdout);
  }

  // Rerun criteria 1-6 and compare their reports byte for byte.
  const auto t0 = std::chrono::steady_clock::now();
  int mismatches = 0;
  for (std::size_t i = 0; i < 6; ++i)
  {
    std::string again;
    try
    {
      again = criteria[i].run(cfg).fingerprint;
    }
    catch (const std::exception &)
    {
      again = "exception";
    }
    if (again != prints[i] || prints[i].empty())
    {
      ++mismatches;
    }
  }
  const bool det = mismatches == 0;
  all = all && det;
  std::printf("criterion 8 determinism: %s (%.1f s) mismatching criteria=%d\n",
              det ? "PASS" : "FAIL", seconds_since(t0), mismatches);
  return all ? 0 : 1;
}
