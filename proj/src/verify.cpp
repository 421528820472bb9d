#include "smaxwell/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "smaxwell/outer_solver.hpp"
#include "smaxwell/parallel.hpp"

namespace smaxwell
{

bool SuiteReport::passed() const
{
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult &c) { return c.pass; });
}

std::vector<std::string> SuiteReport::failed() const
{
  std::vector<std::string> out;
  for (const auto &c : checks)
  {
    if (!c.pass)
    {
      out.push_back(c.name);
    }
  }
  return out;
}

std::string SuiteReport::csv() const
{
  std::ostringstream os;
  os.precision(17);
  os << "suite,check,pass,value,threshold,note\n";
  for (const auto &c : checks)
  {
    os << suite << ',' << c.name << ',' << (c.pass ? "pass" : "fail") << ',' << c.value << ','
       << c.threshold << ',' << c.note << '\n';
  }
  return os.str();
}

void SuiteReport::append(const SuiteReport &other)
{
  checks.insert(checks.end(), other.checks.begin(), other.checks.end());
}

const std::vector<std::string> &suite_names()
{
  static const std::vector<std::string> names{"nonlinearity", "orlicz", "calculus", "geometry"};
  return names;
}

SuiteReport run_suite(const std::string &name, const VerifyOptions &opt)
{
  if (name == "nonlinearity")
  {
    return verify_nonlinearity(opt);
  }
  if (name == "orlicz")
  {
    return verify_orlicz(opt);
  }
  if (name == "calculus")
  {
    return verify_calculus(opt);
  }
  if (name == "geometry")
  {
    return verify_geometry(opt);
  }
  throw std::invalid_argument("unknown suite '" + name + "'");
}

namespace
{

// value <= threshold
CheckResult at_most(const std::string &name, double value, double threshold,
                    const std::string &note = "")
{
  return {name, value <= threshold, value, threshold, note};
}

// value > threshold
CheckResult above(const std::string &name, double value, double threshold,
                  const std::string &note = "")
{
  return {name, value > threshold, value, threshold, note};
}

}  // namespace

SuiteReport verify_nonlinearity(const VerifyOptions &opt)
{
  const NonlinearityParams &prm = opt.params;
  prm.validate();
  SuiteReport rep{"nonlinearity", {}};
  const auto knot = knot_residuals(prm);
  rep.checks.push_back(at_most("knot_value", knot.value, 1e-12));
  rep.checks.push_back(at_most("knot_derivative", knot.derivative, 1e-12));

  const auto f4 = certify_f4(prm, prm.alpha, prm.R, 10000);
  std::ostringstream f4note;
  f4note.precision(6);
  f4note << "alpha=" << prm.alpha << " R=" << prm.R << " min_f=" << f4.min_f;
  rep.checks.push_back({"f4", f4.holds, f4.margin, 0.0, f4note.str()});

  // Monotonicity of f on a log grid.
  double min_fp = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 10000; ++k)
  {
    const double s = std::pow(10.0, -8.0 + 16.0 * k / 10000.0);
    min_fp = std::min(min_fp, f_prime(prm, s));
  }
  rep.checks.push_back({"f_prime_nonnegative", min_fp >= 0.0, min_fp, 0.0, ""});

  const double c2 = certify_f3(prm, 10000);
  rep.checks.push_back(
      {"c2_measured", std::isfinite(c2) && c2 >= 0.5 * prm.a * prm.p * (1.0 - 1e-12), c2,
       0.5 * prm.a * prm.p, "sup f'(t)/min(t^{p/2-1},t^{q/2-1})"});

  const std::uint64_t count = std::max<std::uint64_t>(opt.samples, 100000);
  const auto c1 = certify_c1(prm, count, 0.3, opt.seed);
  std::ostringstream c1note;
  c1note << "samples=" << c1.samples << " regime=" << to_string(c1.regime_min);
  rep.checks.push_back({"c1_measured", c1.c1 > 0.0 && !c1.violated, c1.c1, 0.0, c1note.str()});

  const double lower = measure_growth_lower(prm, 10000);
  const double upper = measure_growth_upper(prm, 10000);
  rep.checks.push_back({"growth_lower_vs_c1", lower >= c1.c1, lower, c1.c1,
                        "inf f(s)/min(s^{p/2},s^{q/2})"});
  rep.checks.push_back({"growth_upper", std::isfinite(upper) && upper >= lower, upper, lower,
                        "sup f(s)/min(s^{p/2},s^{q/2})"});

  const double kp = kantorovich_constant(prm.p);
  rep.checks.push_back(above("C2_p", kp, 0.0, "inf (|1+u|^p-1-pu)/|u|^p"));
  const double kq = kantorovich_constant(prm.q);
  rep.checks.push_back(above("C2_q", kq, 0.0, "inf (|1+u|^q-1-qu)/|u|^q"));

  int super_fail = 0;
  for (int i = 0; i <= 100; ++i)
  {
    for (int j = 0; j <= 100; ++j)
    {
      super_fail += superadditivity_check(prm, 0.1 * i, 0.1 * j) ? 0 : 1;
    }
  }
  rep.checks.push_back(at_most("superadditivity_failures", super_fail, 0.0, "grid [0,10]^2"));
  return rep;
}

double brute_force_norm(const SampledMagnitudes &field, const OrliczPair &pair, int levels)
{
  pair.validate();
  if (levels < 2)
  {
    throw std::invalid_argument("brute_force_norm: need at least 2 levels");
  }
  const std::size_t sites = field.values.size();
  if (sites > 6)
  {
    throw std::invalid_argument("brute_force_norm: at most 6 sites");
  }
  // Per site and level: weighted |t x|^p and |(1-t) x|^q.
  std::vector<std::vector<double>> pp(sites, std::vector<double>(levels));
  std::vector<std::vector<double>> qq(sites, std::vector<double>(levels));
  for (std::size_t i = 0; i < sites; ++i)
  {
    for (int l = 0; l < levels; ++l)
    {
      const double t = static_cast<double>(l) / (levels - 1);
      pp[i][l] = field.weight * std::pow(t * field.values[i], pair.p);
      qq[i][l] = field.weight * std::pow((1.0 - t) * field.values[i], pair.q);
    }
  }
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> idx(sites, 0);
  while (true)
  {
    double sp = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < sites; ++i)
    {
      sp += pp[i][idx[i]];
      sq += qq[i][idx[i]];
    }
    best = std::min(best, std::pow(sp, 1.0 / pair.p) + std::pow(sq, 1.0 / pair.q));
    std::size_t k = 0;
    while (k < sites && ++idx[k] == levels)
    {
      idx[k] = 0;
      ++k;
    }
    if (k == sites)
    {
      break;
    }
  }
  return best;
}

SuiteReport verify_orlicz(const VerifyOptions &opt)
{
  const OrliczPair pair = OrliczPair::make(opt.params.p, opt.params.q);
  SuiteReport rep{"orlicz", {}};
  Rng rng(mix_seed(opt.seed));

  // Brute-force equivalence on the bundled field and ten random 4-site fields.
  std::vector<SampledMagnitudes> small{{{1.5, 0.5, 2.0, 0.1}, 1.0}};
  for (int k = 0; k < 10; ++k)
  {
    SampledMagnitudes f{std::vector<double>(4), 1.0};
    for (auto &v : f.values)
    {
      v = rng.log_uniform(0.05, 4.0);
    }
    small.push_back(std::move(f));
  }
  std::vector<double> errs(small.size());
  for_each_shard(static_cast<int>(small.size()),
                 [&](int k)
                 {
                   const double exact = norm_exact(small[k], pair).value;
                   errs[k] = std::abs(exact - brute_force_norm(small[k], pair));
                 });
  rep.checks.push_back(at_most("brute_force_bundled", errs[0], 1e-3, "(1.5,0.5,2.0,0.1)"));
  rep.checks.push_back(at_most("brute_force_random", *std::max_element(errs.begin() + 1, errs.end()),
                               1e-3, "ten 4-site fields, 51 levels"));

  const int fields = opt.samples > 0 ? static_cast<int>(opt.samples) : 100;
  std::vector<SampledMagnitudes> random_fields;
  for (int k = 0; k < fields; ++k)
  {
    const int sites = 2 + static_cast<int>(rng.uniform() * 31.0);
    SampledMagnitudes f{std::vector<double>(sites), rng.log_uniform(0.05, 2.0)};
    for (auto &v : f.values)
    {
      v = rng.log_uniform(0.01, 10.0);
    }
    random_fields.push_back(std::move(f));
  }
  std::vector<int> low_bad(fields, 0), up_bad(fields, 0);
  std::vector<double> gaps(fields, 0.0), bracket_bad(fields, 0.0);
  for_each_shard(fields,
                 [&](int k)
                 {
                   const auto &f = random_fields[k];
                   const auto nr = norm_exact(f, pair);
                   const auto b = norm_bounds(f, pair);
                   const double slack = 1e-9 * std::max(1.0, nr.value);
                   low_bad[k] = b.lower > nr.value + slack ? 1 : 0;
                   up_bad[k] = nr.lower > b.upper + slack ? 1 : 0;
                   gaps[k] = nr.gap();
                   bracket_bad[k] = nr.lower <= nr.value + slack ? 0.0 : 1.0;
                 });
  int lows = 0, ups = 0;
  for (int k = 0; k < fields; ++k)
  {
    lows += low_bad[k];
    ups += up_bad[k];
  }
  rep.checks.push_back(at_most("sandwich_violations", lows + ups, 0.0,
                               "fields=" + std::to_string(fields)));
  rep.checks.push_back(at_most("sandwich_lower_side", lows, 0.0));
  rep.checks.push_back(at_most("sandwich_upper_side", ups, 0.0,
                               "certified lower bound of the exact norm above the upper bound"));
  rep.checks.push_back(at_most("certified_gap", *std::max_element(gaps.begin(), gaps.end()), 1e-9));
  rep.checks.push_back(at_most("bracket_order", *std::max_element(bracket_bad.begin(),
                                                                  bracket_bad.end()), 0.0));
  return rep;
}

SuiteReport verify_calculus(const VerifyOptions &opt)
{
  const GridSpec &g = opt.grid;
  g.validate();
  SuiteReport rep{"calculus", {}};
  const int fields = opt.samples > 0 ? static_cast<int>(opt.samples) : 20;
  std::vector<std::array<double, 7>> res(fields);
  for_each_shard(fields,
                 [&](int k)
                 {
                   Rng rng(mix_seed(opt.seed * 1000003ULL + k));
                   const ScalarField w = random_scalar(g, rng);
                   const OneForm A = random_oneform(g, rng);
                   const OneForm B = random_oneform(g, rng);
                   const TwoForm F = exterior_derivative(B);
                   auto &r = res[k];
                   // d(d w)
                   r[0] = l2_norm(exterior_derivative(gradient(w))) / l2_norm(laplacian(w));
                   // <dA, F> = <A, delta F>
                   const TwoForm dA = exterior_derivative(A);
                   double lhs = 0.0;
                   for (std::size_t i = 0; i < dA.data.size(); ++i)
                   {
                     lhs += dA.data[i] * F.data[i];
                   }
                   lhs *= g.cell_volume();
                   r[1] = std::abs(lhs - inner(A, codifferential(F))) /
                          (l2_norm(dA) * l2_norm(F));
                   // <grad w, A> = <w, delta A>
                   const OneForm gw = gradient(w);
                   r[2] = std::abs(inner(gw, A) - inner(w, codifferential(A))) /
                          (l2_norm(gw) * l2_norm(A));
                   const HodgeSplit hs = hodge_split(A);
                   r[3] = l2_norm(sub(add(hs.u, gradient(hs.w)), A)) / l2_norm(A);
                   r[4] = l2_norm(divergence(hs.u)) / l2_norm(divergence(A));
                   r[5] = laplace_beltrami_residual(A) / max_abs(laplacian(A).data);
                   const double de = dirichlet_energy(A);
                   const double dv = l2_norm(divergence(A));
                   r[6] = std::abs(curl_energy(A) + dv * dv - de) / de;
                 });
  const char *names[7] = {"dd_zero",       "adjoint_d_delta",      "adjoint_grad_div",
                          "hodge_reconstruction", "hodge_divergence", "laplace_beltrami",
                          "energy_identity"};
  for (int c = 0; c < 7; ++c)
  {
    double worst = 0.0;
    for (const auto &r : res)
    {
      worst = std::max(worst, r[c]);
    }
    rep.checks.push_back(at_most(names[c], worst, 1e-9,
                                 "relative, fields=" + std::to_string(fields)));
  }
  return rep;
}

namespace
{

OneForm random_v_direction(const GridSpec &g, Rng &rng, SymmetryGroup group)
{
  OneForm d = project_to_v(random_oneform(g, rng), group);
  return scaled(d, 1.0 / d_norm(d));
}

}  // namespace

SuiteReport verify_gradient(const VerifyOptions &opt)
{
  const GridSpec &g = opt.grid;
  const ReducedProblem prob{opt.params, opt.inner};
  SuiteReport rep{"geometry", {}};
  const OneForm seed = seed_form(g, opt.seed_profile, opt.inner.group);
  Rng rng(mix_seed(opt.seed + 17));

  std::vector<OneForm> bases{seed, scaled(seed, 0.5)};
  {
    const OneForm pert = random_v_direction(g, rng, opt.inner.group);
    bases.push_back(add(seed, scaled(pert, 0.3 * d_norm(seed))));
  }
  const double e0 = std::abs(j_hat(prob, seed) - j_hat(prob, scaled(seed, -1.0)));
  rep.checks.push_back(at_most("evenness", e0, 1e-10 * (1.0 + std::abs(j_hat(prob, seed)))));

  const int directions = 5;
  std::vector<OneForm> dirs;
  for (int k = 0; k < directions; ++k)
  {
    dirs.push_back(random_v_direction(g, rng, opt.inner.group));
  }
  const int jobs = static_cast<int>(bases.size()) * directions;
  std::vector<double> errs(jobs, 0.0);
  for_each_shard(jobs,
                 [&](int job)
                 {
                   const OneForm &u = bases[job / directions];
                   const OneForm &d = dirs[job % directions];
                   const double pairing = inner(grad_j_hat(prob, u), d);
                   double best = std::numeric_limits<double>::infinity();
                   for (double h : {1e-3, 1e-4, 1e-5, 1e-6})
                   {
                     const double fd =
                         (j_hat(prob, add(u, scaled(d, h))) - j_hat(prob, sub(u, scaled(d, h)))) /
                         (2.0 * h);
                     best = std::min(best, std::abs(pairing - fd) / (1.0 + std::abs(fd)));
                   }
                   errs[job] = best;
                 });
  rep.checks.push_back(at_most("envelope_gradient", *std::max_element(errs.begin(), errs.end()),
                               1e-4, "3 base points x 5 directions, steps 1e-3..1e-6"));
  return rep;
}

SuiteReport verify_mountain_geometry(const VerifyOptions &opt)
{
  const GridSpec &g = opt.grid;
  const ReducedProblem prob{opt.params, opt.inner};
  SuiteReport rep{"geometry", {}};
  const OneForm seed = seed_form(g, opt.seed_profile, opt.inner.group);
  Rng rng(mix_seed(opt.seed + 29));

  // Small sphere: J > 0 on every sampled direction at radius rho.
  const int count = opt.samples > 0 ? static_cast<int>(opt.samples) : 20;
  std::vector<OneForm> dirs;
  for (int k = 0; k < count; ++k)
  {
    dirs.push_back(random_v_direction(g, rng, opt.inner.group));
  }
  auto sphere_min = [&](double rho)
  {
    std::vector<double> js(count);
    for_each_shard(count, [&](int k) { js[k] = j_hat(prob, scaled(dirs[k], rho)); });
    return *std::min_element(js.begin(), js.end());
  };
  // Bisection on log rho between a radius where every sample is positive and one where
  // some sample is not.
  double good = 0.0, bad = d_norm(seed);
  double good_min = 0.0;
  double bad_min = sphere_min(bad);
  if (bad_min > 0.0)
  {
    good = bad;
    good_min = bad_min;
  }
  else
  {
    double rho = bad;
    for (int k = 0; k < 60 && good == 0.0; ++k)
    {
      rho *= 0.5;
      const double mn = sphere_min(rho);
      if (mn > 0.0)
      {
        good = rho;
        good_min = mn;
      }
      else
      {
        bad = rho;
      }
    }
    for (int k = 0; k < 6 && good > 0.0; ++k)
    {
      const double mid = std::sqrt(good * bad);
      const double mn = sphere_min(mid);
      if (mn > 0.0)
      {
        good = mid;
        good_min = mn;
      }
      else
      {
        bad = mid;
      }
    }
  }
  std::ostringstream note;
  note.precision(6);
  note << "rho=" << good << " directions=" << count;
  rep.checks.push_back(above("small_sphere_min_j", good_min, 0.0, note.str()));

  // Far point along the seed and the growth envelope.
  const double sd = d_norm(seed);
  const OneForm unit = scaled(seed, 1.0 / sd);
  OuterConfig oc;
  FarPoint far;
  bool far_ok = true;
  try
  {
    far = find_far_point(prob, unit, oc);
  }
  catch (const std::runtime_error &)
  {
    far_ok = false;
  }
  rep.checks.push_back({"far_point", far_ok, far_ok ? far.j_samples.back() : 0.0, 0.0,
                        far_ok ? "t=" + std::to_string(far.t) : "no sign change"});
  if (!far_ok)
  {
    return rep;
  }
  const OrliczPair pair = OrliczPair::make(opt.params.p, opt.params.q);
  const auto cp = c_tilde({seed}, pair, opt.params.p, opt.inner);
  const auto cq = c_tilde({seed}, pair, opt.params.q, opt.inner);
  const double c1 = certify_c1(opt.params, 100000, 0.3, opt.seed).c1;
  const double cmin = std::min(cp.value, cq.value);
  std::vector<double> ts;
  for (int k = 1; k <= 24; ++k)
  {
    ts.push_back(far.t * k / 16.0);
  }
  std::vector<double> excess(ts.size());
  for_each_shard(static_cast<int>(ts.size()),
                 [&](int k)
                 {
                   const double t = ts[k];
                   const double env = 0.5 * t * t -
                                      0.5 * c1 * cmin * std::min(std::pow(t, opt.params.p),
                                                                 std::pow(t, opt.params.q));
                   const double jv = j_hat(prob, scaled(unit, t));
                   excess[k] = (jv - env) / (1.0 + std::abs(env));
                 });
  std::ostringstream env_note;
  env_note.precision(6);
  env_note << "c1=" << c1 << " Cp=" << cp.value << " Cq=" << cq.value;
  rep.checks.push_back(at_most("envelope_excess", *std::max_element(excess.begin(), excess.end()),
                               1e-9, env_note.str()));
  return rep;
}

SuiteReport verify_geometry(const VerifyOptions &opt)
{
  SuiteReport rep = verify_gradient(opt);
  rep.append(verify_mountain_geometry(opt));
  return rep;
}

}  // namespace smaxwell
