#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "smaxwell/fields.hpp"
#include "smaxwell/orlicz.hpp"
#include "smaxwell/outer_solver.hpp"
#include "smaxwell/run_config.hpp"
#include "smaxwell/verify.hpp"

using namespace smaxwell;

namespace
{

int cmd_solve(const std::string &config_path, const std::string &out_dir)
{
  RunConfig cfg;
  try
  {
    cfg = load_run_config(config_path);
    if (!out_dir.empty())
    {
      cfg.output_dir = out_dir;
    }
    std::filesystem::create_directories(cfg.output_dir);
    const auto probe = std::filesystem::path(cfg.output_dir) / ".write_probe";
    {
      std::ofstream os(probe);
      if (!os)
      {
        throw std::invalid_argument("config: output directory is not writable: " +
                                    cfg.output_dir);
      }
    }
    std::filesystem::remove(probe);
  }
  catch (const std::exception &e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  const ReducedProblem prob{cfg.params, cfg.inner};
  MountainPassResult result;
  try
  {
    const OneForm seed = seed_form(cfg.grid, cfg.seed, cfg.inner.group);
    result = mountain_pass(prob, seed, cfg.outer);
  }
  catch (const std::exception &e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  const auto inner = phi(cfg.params, result.report.u, cfg.inner, &result.report.w);
  write_solve_outputs(cfg.output_dir, cfg, result, inner.trace);

  const auto &r = result.report;
  std::printf("j_value %.17g\n", r.j_value);
  std::printf("grad_norm %.6e (threshold %.6e)\n", r.grad_norm, cfg.outer.mp_tol * r.grad_scale);
  std::printf("weak_residual %.6e\n", r.weak_residual);
  std::printf("nontriviality %.6e (|u| %.6e)\n", r.nontriviality, r.u_norm);
  std::printf("equivariance_residual %.3e\n", r.equivariance_residual);
  std::printf("div_residual %.3e\n", r.div_residual);
  std::printf("sweeps %d, phi solves %d\n", static_cast<int>(result.sweeps.size()) - 1,
              result.phi_solves);
  if (!r.converged)
  {
    std::string flags;
    for (const auto &f : r.flags)
    {
      flags += (flags.empty() ? "" : ",") + f;
    }
    std::printf("not converged: %s\n", flags.c_str());
    return 3;
  }
  std::printf("converged\n");
  return 0;
}

int cmd_verify(const std::string &suite, std::uint64_t samples, std::uint64_t seed,
               const std::string &out_path)
{
  VerifyOptions opt;
  opt.samples = samples;
  opt.seed = seed;
  SuiteReport rep;
  try
  {
    rep = run_suite(suite, opt);
  }
  catch (const std::invalid_argument &e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  const std::string csv = rep.csv();
  std::cout << csv;
  if (!out_path.empty())
  {
    std::ofstream os(out_path, std::ios::binary);
    os << csv;
    if (!os)
    {
      std::cerr << "error: cannot write " << out_path << '\n';
      return 2;
    }
  }
  if (!rep.passed())
  {
    for (const auto &name : rep.failed())
    {
      std::cerr << "FAILED: " << suite << '.' << name << '\n';
    }
    return 1;
  }
  return 0;
}

int cmd_norm(const std::string &path, double p, double q)
{
  FieldDump dump;
  OrliczPair pair;
  try
  {
    pair = OrliczPair::make(p, q);
    dump = read_field(path);
  }
  catch (const std::exception &e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  const auto mags = magnitudes(dump);
  const auto bounds = norm_bounds(mags, pair);
  const auto nr = norm_exact(mags, pair);
  std::printf("%.17g %.17g %.17g\n", bounds.lower, nr.value, bounds.upper);
  std::printf("lower %.17g\n", bounds.lower);
  std::printf("exact %.17g\n", nr.value);
  std::printf("upper %.17g\n", bounds.upper);
  std::printf("certified_lower %.17g\n", nr.lower);
  std::printf("indicator_split %.17g\n", bounds.indicator_split);
  std::printf("part_p %.17g\n", nr.part_p);
  std::printf("part_q %.17g\n", nr.part_q);
  std::printf("mean_fraction %.17g\n", nr.split.mean_fraction());
  std::printf("saturated_sites %zu\n", nr.split.saturated_sites());
  std::printf("omega_sites %zu\n", bounds.omega_sites);
  std::printf("omega_measure %.17g\n", bounds.omega_measure);
  std::printf("sites %zu\n", mags.values.size());
  return 0;
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Semilinear Maxwell solver on a periodic lattice"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  auto *solve = app.add_subcommand("solve", "Mountain-pass solve from a JSON config");
  solve->add_option("--config", config_path, "Run configuration (JSON)")->required();
  solve->add_option("--out", out_dir, "Output directory (overrides output_dir)");

  std::string suite, verify_out;
  std::uint64_t samples = 0, seed = 1;
  auto *verify = app.add_subcommand("verify", "Run a certification suite");
  verify->add_option("--suite", suite, "nonlinearity | orlicz | calculus | geometry")
      ->required();
  verify->add_option("--samples", samples, "Suite-specific sample count (0: default)");
  verify->add_option("--seed", seed, "RNG seed");
  verify->add_option("--out", verify_out, "Also write the CSV report here");

  std::string field_path;
  double p = 3.0, q = 6.0;
  auto *norm = app.add_subcommand("norm", "L^p + L^q norm of a field dump");
  norm->add_option("--field", field_path, "Field dump")->required();
  norm->add_option("--p", p, "Lower exponent");
  norm->add_option("--q", q, "Upper exponent");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (solve->parsed())
  {
    return cmd_solve(config_path, out_dir);
  }
  if (verify->parsed())
  {
    return cmd_verify(suite, samples, seed, verify_out);
  }
  return cmd_norm(field_path, p, q);
}
