#include "smaxwell/run_config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace smaxwell
{

using nlohmann::ordered_json;

namespace
{

void reject_unknown(const ordered_json &obj, const std::string &where,
                    const std::set<std::string> &known)
{
  if (!obj.is_object())
  {
    throw std::invalid_argument("config: '" + where + "' must be an object");
  }
  for (const auto &item : obj.items())
  {
    if (!known.count(item.key()))
    {
      throw std::invalid_argument("config: unknown key '" + where + "." + item.key() + "'");
    }
  }
}

template <typename T>
void read(const ordered_json &obj, const char *key, T &out)
{
  if (obj.contains(key))
  {
    out = obj.at(key).get<T>();
  }
}

// Integers must be given as JSON integers so that 8.5 is not silently truncated.
void read_int(const ordered_json &obj, const char *key, int &out)
{
  if (obj.contains(key))
  {
    if (!obj.at(key).is_number_integer())
    {
      throw std::invalid_argument(std::string("config: '") + key + "' must be an integer");
    }
    out = obj.at(key).get<int>();
  }
}

}  // namespace

std::string to_string(SymmetryGroup group)
{
  return group == SymmetryGroup::cyclic ? "cyclic" : "dihedral";
}

SymmetryGroup symmetry_from_string(const std::string &name)
{
  if (name == "cyclic")
  {
    return SymmetryGroup::cyclic;
  }
  if (name == "dihedral")
  {
    return SymmetryGroup::dihedral;
  }
  throw std::invalid_argument("config: symmetry must be 'cyclic' or 'dihedral'");
}

void RunConfig::validate() const
{
  grid.validate();
  params.validate();
  if (params.n != grid.n)
  {
    throw std::invalid_argument("config: nonlinearity dimension differs from grid.n");
  }
  inner.validate();
  outer.validate();
  if (static_cast<int>(seed.amplitudes.size()) != grid.n / 2)
  {
    throw std::invalid_argument("config: seed.amplitudes needs one entry per coordinate block");
  }
  bool any = false;
  for (double a : seed.amplitudes)
  {
    if (!std::isfinite(a))
    {
      throw std::invalid_argument("config: seed amplitudes must be finite");
    }
    any = any || a != 0.0;
  }
  if (!any)
  {
    throw std::invalid_argument("config: seed amplitudes are all zero");
  }
  if (!(seed.radius > 0.0 && seed.radius < grid.L))
  {
    throw std::invalid_argument("config: seed.radius must lie in (0, L)");
  }
  if (output_dir.empty())
  {
    throw std::invalid_argument("config: output_dir is empty");
  }
}

RunConfig parse_run_config(const std::string &json_text)
{
  RunConfig cfg;
  try
  {
    const auto root = ordered_json::parse(json_text);
    reject_unknown(root, "root",
                   {"grid", "nonlinearity", "inner", "outer", "seed", "output_dir", "rng_seed"});
    if (root.contains("grid"))
    {
      const auto &g = root.at("grid");
      reject_unknown(g, "grid", {"n", "m", "L"});
      read_int(g, "n", cfg.grid.n);
      read_int(g, "m", cfg.grid.m);
      read(g, "L", cfg.grid.L);
    }
    double p = cfg.params.p, q = cfg.params.q, c = cfg.params.c, alpha = cfg.params.alpha,
           R = cfg.params.R;
    if (root.contains("nonlinearity"))
    {
      const auto &nl = root.at("nonlinearity");
      reject_unknown(nl, "nonlinearity", {"p", "q", "c", "alpha", "R"});
      read(nl, "p", p);
      read(nl, "q", q);
      read(nl, "c", c);
      read(nl, "alpha", alpha);
      read(nl, "R", R);
    }
    cfg.grid.validate();
    cfg.params = NonlinearityParams::from_exponents(cfg.grid.n, p, q, c, alpha, R);
    if (root.contains("inner"))
    {
      const auto &in = root.at("inner");
      reject_unknown(in, "inner",
                     {"grad_tol", "max_iter", "ls_shrink", "ls_slope", "gamma_tol",
                      "gamma_max_iter", "symmetry"});
      read(in, "grad_tol", cfg.inner.grad_tol);
      read_int(in, "max_iter", cfg.inner.max_iter);
      read(in, "ls_shrink", cfg.inner.ls_shrink);
      read(in, "ls_slope", cfg.inner.ls_slope);
      read(in, "gamma_tol", cfg.inner.gamma_tol);
      read_int(in, "gamma_max_iter", cfg.inner.gamma_max_iter);
      if (in.contains("symmetry"))
      {
        cfg.inner.group = symmetry_from_string(in.at("symmetry").get<std::string>());
      }
    }
    if (root.contains("outer"))
    {
      const auto &out = root.at("outer");
      reject_unknown(out, "outer",
                     {"path_points", "deform_steps", "mp_tol", "ray_scale", "max_sweeps"});
      read_int(out, "path_points", cfg.outer.path_points);
      read_int(out, "deform_steps", cfg.outer.deform_steps);
      read(out, "mp_tol", cfg.outer.mp_tol);
      read(out, "ray_scale", cfg.outer.ray_scale);
      read_int(out, "max_sweeps", cfg.outer.max_sweeps);
    }
    if (root.contains("seed"))
    {
      const auto &s = root.at("seed");
      reject_unknown(s, "seed", {"amplitudes", "radius"});
      read(s, "amplitudes", cfg.seed.amplitudes);
      read(s, "radius", cfg.seed.radius);
    }
    read(root, "output_dir", cfg.output_dir);
    if (root.contains("rng_seed"))
    {
      if (!root.at("rng_seed").is_number_unsigned())
      {
        throw std::invalid_argument("config: 'rng_seed' must be a non-negative integer");
      }
      cfg.rng_seed = root.at("rng_seed").get<std::uint64_t>();
    }
  }
  catch (const nlohmann::json::exception &e)
  {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string &path)
{
  std::ifstream is(path);
  if (!is)
  {
    throw std::invalid_argument("config: cannot open " + path);
  }
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_run_config(ss.str());
}

namespace
{

ordered_json config_object(const RunConfig &cfg)
{
  ordered_json j;
  j["grid"] = {{"n", cfg.grid.n}, {"m", cfg.grid.m}, {"L", cfg.grid.L}};
  j["nonlinearity"] = {{"p", cfg.params.p},         {"q", cfg.params.q},
                       {"c", cfg.params.c},         {"alpha", cfg.params.alpha},
                       {"R", cfg.params.R}};
  j["inner"] = {{"grad_tol", cfg.inner.grad_tol},
                {"max_iter", cfg.inner.max_iter},
                {"ls_shrink", cfg.inner.ls_shrink},
                {"ls_slope", cfg.inner.ls_slope},
                {"gamma_tol", cfg.inner.gamma_tol},
                {"gamma_max_iter", cfg.inner.gamma_max_iter},
                {"symmetry", to_string(cfg.inner.group)}};
  j["outer"] = {{"path_points", cfg.outer.path_points},
                {"deform_steps", cfg.outer.deform_steps},
                {"mp_tol", cfg.outer.mp_tol},
                {"ray_scale", cfg.outer.ray_scale},
                {"max_sweeps", cfg.outer.max_sweeps}};
  j["seed"] = {{"amplitudes", cfg.seed.amplitudes}, {"radius", cfg.seed.radius}};
  j["output_dir"] = cfg.output_dir;
  j["rng_seed"] = cfg.rng_seed;
  return j;
}

void write_text(const std::filesystem::path &path, const std::string &text)
{
  std::ofstream os(path, std::ios::binary);
  os << text;
  if (!os)
  {
    throw std::runtime_error("cannot write " + path.string());
  }
}

}  // namespace

std::string run_config_json(const RunConfig &cfg)
{
  return config_object(cfg).dump(2) + "\n";
}

std::string report_json(const RunConfig &cfg, const MountainPassResult &result)
{
  const SolutionReport &r = result.report;
  ordered_json j;
  j["config"] = config_object(cfg);
  j["rng_seed"] = cfg.rng_seed;
  j["converged"] = r.converged;
  j["flags"] = r.flags;
  j["j_value"] = r.j_value;
  j["grad_norm"] = r.grad_norm;
  j["grad_scale"] = r.grad_scale;
  j["grad_threshold"] = cfg.outer.mp_tol * r.grad_scale;
  j["weak_residual"] = r.weak_residual;
  j["nontriviality"] = r.nontriviality;
  j["u_norm"] = r.u_norm;
  j["u_d_norm"] = d_norm(r.u);
  j["equivariance_residual"] = r.equivariance_residual;
  j["div_residual"] = r.div_residual;
  j["sweeps"] = static_cast<int>(result.sweeps.size()) - 1;
  j["phi_solves"] = result.phi_solves;
  j["palais_smale"] = {{"alpha", result.ps.alpha},
                       {"m_bound", result.ps.m_bound},
                       {"violations", result.ps.violations}};
  return j.dump(2) + "\n";
}

void write_solve_outputs(const std::string &dir, const RunConfig &cfg,
                         const MountainPassResult &result, const ConvergenceTrace &inner_trace)
{
  namespace fs = std::filesystem;
  const fs::path base(dir);
  fs::create_directories(base);
  write_text(base / "report.json", report_json(cfg, result));
  write_text(base / "sweeps.csv", result.sweeps_csv());
  write_text(base / "path.csv", result.path_csv());
  write_text(base / "ps.csv", result.ps_csv());
  write_text(base / "inner_trace.csv", inner_trace.csv());
  const auto &r = result.report;
  write_field((base / "u.bin").string(), r.u);
  write_field((base / "w.bin").string(), r.w);
  write_field((base / "a.bin").string(), add(r.u, gradient(r.w)));
}

}  // namespace smaxwell
