#include "smaxwell/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "smaxwell/parallel.hpp"

namespace smaxwell
{

namespace
{

constexpr double kCoefficientTol = 1e-12;

// x^k - 1 - k x... in the form (1+u)^k - 1 - k u, accurate for small |u|.
double power_bregman_unit(double k, double u)
{
  if (std::abs(u) <= 0.5)
  {
    // Binomial series from the quadratic term on.
    double term = k * (k - 1.0) / 2.0 * u * u;
    double sum = term;
    for (int j = 3; j < 400; ++j)
    {
      term *= (k - (j - 1)) / j * u;
      sum += term;
      if (std::abs(term) <= 1e-18 * std::abs(sum))
      {
        break;
      }
    }
    return sum;
  }
  return std::pow(1.0 + u, k) - 1.0 - k * u;
}

// s^k - sigma^k - k sigma^{k-1} (s - sigma) for s, sigma >= 0.
double power_bregman(double k, double s, double sigma)
{
  if (sigma == 0.0)
  {
    return std::pow(s, k);
  }
  const double u = (s - sigma) / sigma;
  return std::pow(sigma, k) * power_bregman_unit(k, u);
}

// One-dimensional Bregman divergence f(s) - f(sigma) - f'(sigma)(s - sigma).
double bregman_f(const NonlinearityParams &prm, double s, double sigma)
{
  if (s <= 1.0 && sigma <= 1.0)
  {
    return prm.c * power_bregman(prm.q / 2.0, s, sigma);
  }
  if (s > 1.0 && sigma > 1.0)
  {
    return prm.a * power_bregman(prm.p / 2.0, s, sigma);
  }
  const long double fs = f_eval(prm, s);
  const long double fsig = f_eval(prm, sigma);
  const long double dfsig = f_prime(prm, sigma);
  return static_cast<double>(fs - fsig - dfsig * (static_cast<long double>(s) - sigma));
}

double min_power(double d, double p, double q)
{
  return std::min(std::pow(d, p), std::pow(d, q));
}

void check_nonnegative(double s, const char *what)
{
  if (!(s >= 0.0))
  {
    throw std::invalid_argument(std::string(what) + ": argument must be >= 0");
  }
}

}  // namespace

NonlinearityParams NonlinearityParams::from_exponents(int n, double p, double q, double c,
                                                      double alpha, double R)
{
  const auto coef = solve_coefficients(p, q, c);
  NonlinearityParams prm;
  prm.n = n;
  prm.p = p;
  prm.q = q;
  prm.a = coef.a;
  prm.b = coef.b;
  prm.c = c;
  prm.alpha = alpha > 0.0 ? alpha : p;
  prm.R = R;
  prm.validate();
  return prm;
}

double critical_exponent(int n)
{
  if (n <= 2)
  {
    return std::numeric_limits<double>::infinity();
  }
  return 2.0 * n / (n - 2.0);
}

void NonlinearityParams::validate() const
{
  if (n < 2 || n % 2 != 0)
  {
    throw std::invalid_argument("nonlinearity: n must be an even integer >= 2");
  }
  const double crit = critical_exponent(n);
  if (!(p > 2.0 && p < q))
  {
    throw std::invalid_argument("nonlinearity: require 2 < p < q");
  }
  if (!(p < crit && crit < q))
  {
    throw std::invalid_argument("nonlinearity: require p < 2n/(n-2) < q");
  }
  if (!(c > 0.0))
  {
    throw std::invalid_argument("nonlinearity: c must be positive");
  }
  const double scale = std::max({1.0, std::abs(a), std::abs(c), std::abs(c * q)});
  if (std::abs(a + b - c) > kCoefficientTol * scale ||
      std::abs(a * p - c * q) > kCoefficientTol * scale)
  {
    throw std::invalid_argument("nonlinearity: coefficients violate a + b = c, a p = c q");
  }
  if (!(a > 0.0))
  {
    throw std::invalid_argument("nonlinearity: a must be positive");
  }
  if (!(alpha > 2.0))
  {
    throw std::invalid_argument("nonlinearity: alpha must exceed 2");
  }
  if (!(R >= 0.0))
  {
    throw std::invalid_argument("nonlinearity: R must be >= 0");
  }
}

BranchCoefficients solve_coefficients(double p, double q, double c)
{
  if (!(p > 2.0) || !(p < q))
  {
    throw std::invalid_argument("solve_coefficients: require 2 < p < q");
  }
  if (!(c > 0.0))
  {
    throw std::invalid_argument("solve_coefficients: require c > 0");
  }
  const double a = c * q / p;
  return {a, c - a};
}

double f_eval(const NonlinearityParams &prm, double s)
{
  check_nonnegative(s, "f_eval");
  if (s <= 1.0)
  {
    return prm.c * std::pow(s, prm.q / 2.0);
  }
  return prm.a * std::pow(s, prm.p / 2.0) + prm.b;
}

double f_prime(const NonlinearityParams &prm, double s)
{
  check_nonnegative(s, "f_prime");
  if (s <= 1.0)
  {
    if (s == 0.0)
    {
      return prm.q > 2.0 ? 0.0 : prm.c * prm.q / 2.0;
    }
    return prm.c * prm.q / 2.0 * std::pow(s, prm.q / 2.0 - 1.0);
  }
  return prm.a * prm.p / 2.0 * std::pow(s, prm.p / 2.0 - 1.0);
}

double f_second(const NonlinearityParams &prm, double s)
{
  check_nonnegative(s, "f_second");
  if (s < 1.0)
  {
    const double e = prm.q / 2.0 - 2.0;
    if (s == 0.0)
    {
      return e > 0.0 ? 0.0 : (e == 0.0 ? prm.c * prm.q / 2.0 * (prm.q / 2.0 - 1.0)
                                       : std::numeric_limits<double>::infinity());
    }
    return prm.c * prm.q / 2.0 * (prm.q / 2.0 - 1.0) * std::pow(s, e);
  }
  return prm.a * prm.p / 2.0 * (prm.p / 2.0 - 1.0) * std::pow(s, prm.p / 2.0 - 2.0);
}

double f_unsquared(const NonlinearityParams &prm, double x)
{
  return f_eval(prm, x * x);
}

double f_unsquared_prime(const NonlinearityParams &prm, double x)
{
  // d/dx f(x^2) = 2 x f'(x^2)
  return 2.0 * x * f_prime(prm, x * x);
}

KnotResiduals knot_residuals(const NonlinearityParams &prm)
{
  const double f_left = prm.c;
  const double f_right = prm.a + prm.b;
  const double df_left = prm.c * prm.q / 2.0;
  const double df_right = prm.a * prm.p / 2.0;
  return {std::abs(f_left - f_right), std::abs(df_left - df_right)};
}

double certify_f3(const NonlinearityParams &prm, int sample_count, double t_lo, double t_hi)
{
  const double l0 = std::log(t_lo);
  const double l1 = std::log(t_hi);
  double sup = 0.0;
  auto visit = [&](double t)
  {
    const double g = std::min(std::pow(t, prm.p / 2.0 - 1.0), std::pow(t, prm.q / 2.0 - 1.0));
    sup = std::max(sup, std::abs(f_prime(prm, t)) / g);
  };
  for (int i = 0; i < sample_count; ++i)
  {
    visit(std::exp(l0 + (l1 - l0) * i / std::max(1, sample_count - 1)));
  }
  if (t_lo <= 1.0 && 1.0 <= t_hi)
  {
    visit(1.0);
  }
  return sup;
}

namespace
{

template <typename Reduce>
double growth_ratio_sweep(const NonlinearityParams &prm, int count, double s_lo, double s_hi,
                          double init, Reduce reduce)
{
  const double l0 = std::log(s_lo);
  const double l1 = std::log(s_hi);
  double acc = init;
  for (int i = 0; i < count; ++i)
  {
    const double s = std::exp(l0 + (l1 - l0) * i / std::max(1, count - 1));
    const double g = std::min(std::pow(s, prm.p / 2.0), std::pow(s, prm.q / 2.0));
    acc = reduce(acc, f_eval(prm, s) / g);
  }
  return acc;
}

}  // namespace

double measure_growth_upper(const NonlinearityParams &prm, int count, double s_lo, double s_hi)
{
  return growth_ratio_sweep(prm, count, s_lo, s_hi, 0.0,
                            [](double a, double b) { return std::max(a, b); });
}

double measure_growth_lower(const NonlinearityParams &prm, int count, double s_lo, double s_hi)
{
  return growth_ratio_sweep(prm, count, s_lo, s_hi, std::numeric_limits<double>::infinity(),
                            [](double a, double b) { return std::min(a, b); });
}

F4Certificate certify_f4(const NonlinearityParams &prm, double alpha, double R,
                         int sample_count, double t_hi)
{
  F4Certificate cert;
  cert.margin = std::numeric_limits<double>::infinity();
  cert.min_f = std::numeric_limits<double>::infinity();
  if (!(alpha > 2.0) || !(R > 0.0))
  {
    throw std::invalid_argument("certify_f4: require alpha > 2 and R > 0");
  }
  const double l0 = std::log(R);
  const double l1 = std::log(std::max(t_hi, R));
  bool ok = true;
  for (int i = 0; i < sample_count; ++i)
  {
    const double t = std::exp(l0 + (l1 - l0) * i / std::max(1, sample_count - 1));
    const double f = f_eval(prm, t);
    const double lhs = f_prime(prm, t) * t;
    const double m = lhs - alpha / 2.0 * f;
    if (m < cert.margin)
    {
      cert.margin = m;
      cert.t_at_margin = t;
    }
    cert.min_f = std::min(cert.min_f, f);
    // Rounding slack relative to the size of the compared terms.
    if (m < -1e-13 * std::max(1.0, lhs) || !(f > 0.0))
    {
      ok = false;
    }
  }
  cert.holds = ok;
  return cert;
}

GapValue convexity_gap(const NonlinearityParams &prm, std::span<const double> x,
                       std::span<const double> y)
{
  if (x.size() != y.size())
  {
    throw std::invalid_argument("convexity_gap: dimension mismatch");
  }
  double s = 0.0, sigma = 0.0, d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
  {
    s += x[i] * x[i];
    sigma += y[i] * y[i];
    d2 += (x[i] - y[i]) * (x[i] - y[i]);
  }
  // f(s) - f(sigma) - 2 f'(sigma)(y|x-y) = D_f(s, sigma) + f'(sigma)|x-y|^2,
  // using s - sigma - 2(y|x-y) = |x-y|^2.
  const double gap = bregman_f(prm, s, sigma) + f_prime(prm, sigma) * d2;
  return {gap, min_power(std::sqrt(d2), prm.p, prm.q)};
}

std::string to_string(GapRegime regime)
{
  switch (regime)
  {
    case GapRegime::generic:
      return "generic";
    case GapRegime::near_knot:
      return "near_knot";
    case GapRegime::straddle_knot:
      return "straddle_knot";
    case GapRegime::collinear_positive:
      return "collinear_positive";
    case GapRegime::collinear_negative:
      return "collinear_negative";
    case GapRegime::orthogonal_split:
      return "orthogonal_split";
    case GapRegime::origin:
      return "origin";
    case GapRegime::unit_distance:
      return "unit_distance";
    default:
      return "unknown";
  }
}

void sample_gap_pair(const NonlinearityParams &prm, GapRegime regime, Rng &rng,
                     std::vector<double> &x, std::vector<double> &y)
{
  const int n = prm.n;
  x.assign(n, 0.0);
  y.assign(n, 0.0);
  auto scaled = [&](std::vector<double> &out, double mag)
  {
    out = rng.unit_vector(n);
    for (auto &v : out)
    {
      v *= mag;
    }
  };
  auto wide = [&]() { return rng.log_uniform(1e-4, 1e4); };
  // Magnitude 1 +/- eps with eps spread logarithmically down to 1e-6.
  auto near_one = [&]()
  {
    const double eps = rng.log_uniform(1e-6, 0.3);
    return rng.uniform() < 0.5 ? 1.0 - eps : 1.0 + eps;
  };
  // Rotate a fraction of the way from `dir` towards a random orthogonal direction.
  auto tilt = [&](const std::vector<double> &dir, double angle)
  {
    auto r = rng.unit_vector(n);
    double dot = 0.0;
    for (int i = 0; i < n; ++i)
    {
      dot += r[i] * dir[i];
    }
    double nr = 0.0;
    for (int i = 0; i < n; ++i)
    {
      r[i] -= dot * dir[i];
      nr += r[i] * r[i];
    }
    nr = std::sqrt(nr);
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i)
    {
      out[i] = std::cos(angle) * dir[i] + (nr > 0 ? std::sin(angle) * r[i] / nr : 0.0);
    }
    return out;
  };

  switch (regime)
  {
    case GapRegime::generic:
      scaled(x, wide());
      scaled(y, wide());
      break;
    case GapRegime::near_knot:
    {
      const auto dir = rng.unit_vector(n);
      const double angle = rng.uniform() < 0.5 ? 0.0 : rng.log_uniform(1e-6, 3.14159);
      const auto xdir = tilt(dir, angle);
      const double rx = near_one();
      const double ry = near_one();
      for (int i = 0; i < n; ++i)
      {
        x[i] = rx * xdir[i];
        y[i] = ry * dir[i];
      }
      break;
    }
    case GapRegime::straddle_knot:
    {
      const auto dir = rng.unit_vector(n);
      const double inside = rng.log_uniform(1e-4, 1.0);
      const double outside = rng.log_uniform(1.0, 1e4);
      const bool x_outside = rng.uniform() < 0.5;
      const double angle = rng.uniform() < 0.5 ? 0.0 : rng.uniform(0.0, 3.14159);
      const auto xdir = tilt(dir, angle);
      for (int i = 0; i < n; ++i)
      {
        x[i] = (x_outside ? outside : inside) * xdir[i];
        y[i] = (x_outside ? inside : outside) * dir[i];
      }
      break;
    }
    case GapRegime::collinear_positive:
    case GapRegime::collinear_negative:
    {
      scaled(y, wide());
      const double t = rng.log_uniform(1e-4, 1e4);
      const double sign = regime == GapRegime::collinear_positive ? 1.0 : -1.0;
      for (int i = 0; i < n; ++i)
      {
        x[i] = sign * t * y[i];
      }
      break;
    }
    case GapRegime::orthogonal_split:
    {
      const auto dir = rng.unit_vector(n);
      const double ry = wide();
      const double t = (rng.uniform() < 0.5 ? 1.0 : -1.0) * rng.log_uniform(1e-4, 1e4);
      const auto perp = tilt(dir, 3.14159265358979323846 / 2.0);
      const double r2 = wide();
      for (int i = 0; i < n; ++i)
      {
        y[i] = ry * dir[i];
        x[i] = t * y[i] + r2 * perp[i];
      }
      break;
    }
    case GapRegime::origin:
    {
      auto &other = rng.uniform() < 0.5 ? x : y;
      scaled(other, wide());
      break;
    }
    case GapRegime::unit_distance:
    {
      scaled(y, wide() < 1.0 ? rng.log_uniform(1e-2, 1.0) : rng.log_uniform(1.0, 1e2));
      std::vector<double> d;
      scaled(d, rng.log_uniform(0.3, 3.0));
      for (int i = 0; i < n; ++i)
      {
        x[i] = y[i] + d[i];
      }
      break;
    }
    default:
      throw std::invalid_argument("sample_gap_pair: unknown regime");
  }
}

C1Certificate certify_c1(const NonlinearityParams &prm, std::uint64_t sample_count,
                         double near_knot_fraction, std::uint64_t seed,
                         std::vector<GapSample> *rows)
{
  if (!(near_knot_fraction >= 0.0 && near_knot_fraction <= 1.0))
  {
    throw std::invalid_argument("certify_c1: near_knot_fraction must lie in [0, 1]");
  }
  constexpr int kShards = 64;
  constexpr int kRegimes = static_cast<int>(GapRegime::count);
  const double inf = std::numeric_limits<double>::infinity();

  struct ShardResult
  {
    double c1 = std::numeric_limits<double>::infinity();
    std::vector<double> x_min, y_min;
    GapRegime regime_min = GapRegime::generic;
    std::vector<double> regime_inf = std::vector<double>(kRegimes, std::numeric_limits<double>::infinity());
    bool violated = false;
    double worst_gap = 0.0;
    std::vector<double> x_bad, y_bad;
    std::vector<GapSample> rows;
  };
  std::vector<ShardResult> shards(kShards);

  // Families other than the two knot families share the remaining probability mass.
  const GapRegime others[] = {GapRegime::generic,           GapRegime::collinear_positive,
                              GapRegime::collinear_negative, GapRegime::orthogonal_split,
                              GapRegime::origin,             GapRegime::unit_distance};
  constexpr int kOthers = 6;

  for_each_shard(kShards,
                 [&](int shard)
                 {
                   ShardResult &res = shards[shard];
                   Rng rng(mix_seed(seed ^ mix_seed(static_cast<std::uint64_t>(shard) + 1)));
                   const std::uint64_t begin = sample_count * shard / kShards;
                   const std::uint64_t end = sample_count * (shard + 1) / kShards;
                   std::vector<double> x, y;
                   for (std::uint64_t i = begin; i < end; ++i)
                   {
                     const double pick = rng.uniform();
                     GapRegime regime;
                     if (pick < near_knot_fraction)
                     {
                       regime = pick < 0.5 * near_knot_fraction ? GapRegime::near_knot
                                                                : GapRegime::straddle_knot;
                     }
                     else
                     {
                       const double rest = (pick - near_knot_fraction) /
                                           std::max(1e-300, 1.0 - near_knot_fraction);
                       regime = others[std::min(kOthers - 1, static_cast<int>(rest * kOthers))];
                     }
                     sample_gap_pair(prm, regime, rng, x, y);
                     const auto gv = convexity_gap(prm, x, y);
                     double sx = 0.0, sy = 0.0;
                     for (int k = 0; k < prm.n; ++k)
                     {
                       sx += x[k] * x[k];
                       sy += y[k] * y[k];
                     }
                     const double tol =
                         1e-13 * (1.0 + f_eval(prm, sx) + f_eval(prm, sy));
                     if (gv.gap < -tol && gv.gap < res.worst_gap)
                     {
                       res.violated = true;
                       res.worst_gap = gv.gap;
                       res.x_bad = x;
                       res.y_bad = y;
                     }
                     double ratio = inf;
                     if (gv.bound > 0.0)
                     {
                       ratio = gv.gap / gv.bound;
                       auto &rinf = res.regime_inf[static_cast<int>(regime)];
                       rinf = std::min(rinf, ratio);
                       if (ratio < res.c1)
                       {
                         res.c1 = ratio;
                         res.x_min = x;
                         res.y_min = y;
                         res.regime_min = regime;
                       }
                     }
                     if (rows)
                     {
                       res.rows.push_back({i, regime, gv.gap, gv.bound, ratio});
                     }
                   }
                 });

  C1Certificate cert;
  cert.c1 = inf;
  cert.samples = sample_count;
  cert.regime_infimum.assign(kRegimes, inf);
  for (auto &res : shards)
  {
    if (res.c1 < cert.c1)
    {
      cert.c1 = res.c1;
      cert.x_min = res.x_min;
      cert.y_min = res.y_min;
      cert.regime_min = res.regime_min;
    }
    for (int r = 0; r < kRegimes; ++r)
    {
      cert.regime_infimum[r] = std::min(cert.regime_infimum[r], res.regime_inf[r]);
    }
    if (res.violated && res.worst_gap < cert.worst_gap)
    {
      cert.violated = true;
      cert.worst_gap = res.worst_gap;
      cert.x_bad = res.x_bad;
      cert.y_bad = res.y_bad;
    }
    if (rows)
    {
      rows->insert(rows->end(), res.rows.begin(), res.rows.end());
    }
  }
  return cert;
}

double kantorovich_ratio(double r, double u)
{
  if (u == 0.0)
  {
    return std::numeric_limits<double>::infinity();
  }
  const double num = u >= -0.5 ? power_bregman_unit(r, u)
                                : std::pow(std::abs(1.0 + u), r) - 1.0 - r * u;
  return num / std::pow(std::abs(u), r);
}

double kantorovich_constant(double r)
{
  if (!(r > 2.0))
  {
    throw std::invalid_argument("kantorovich_constant: require r > 2");
  }
  // Scan log|u| on both sides of the origin, then golden-section refine around the best.
  constexpr int kScan = 4001;
  const double l0 = std::log(1e-6);
  const double l1 = std::log(1e6);
  double best = std::numeric_limits<double>::infinity();
  int best_i = 0;
  double best_sign = 1.0;
  for (double sign : {-1.0, 1.0})
  {
    for (int i = 0; i < kScan; ++i)
    {
      const double u = sign * std::exp(l0 + (l1 - l0) * i / (kScan - 1));
      const double v = kantorovich_ratio(r, u);
      if (v < best)
      {
        best = v;
        best_i = i;
        best_sign = sign;
      }
    }
  }
  const double step = (l1 - l0) / (kScan - 1);
  double lo = l0 + step * std::max(0, best_i - 1);
  double hi = l0 + step * std::min(kScan - 1, best_i + 1);
  auto g = [&](double l) { return kantorovich_ratio(r, best_sign * std::exp(l)); };
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double g1 = g(x1), g2 = g(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it)
  {
    if (g1 < g2)
    {
      hi = x2;
      x2 = x1;
      g2 = g1;
      x1 = hi - phi * (hi - lo);
      g1 = g(x1);
    }
    else
    {
      lo = x1;
      x1 = x2;
      g1 = g2;
      x2 = lo + phi * (hi - lo);
      g2 = g(x2);
    }
  }
  best = std::min({best, g1, g2});
  // The ratio tends to 1 as |u| -> infinity.
  return std::min(best, 1.0);
}

double lemma_a1_ratio(const NonlinearityParams &prm, double x, double y)
{
  if (!(x > 1.0) || !(y > 0.0 && y <= 1.0) || x == y)
  {
    throw std::invalid_argument("lemma_a1_ratio: require x > 1 >= y > 0");
  }
  const long double fx = f_unsquared(prm, x);
  const long double fy = f_unsquared(prm, y);
  const long double dfy = f_unsquared_prime(prm, y);
  const long double num = fx - fy - dfy * (static_cast<long double>(x) - y);
  return static_cast<double>(num / std::pow(static_cast<long double>(x - y), prm.q));
}

bool superadditivity_check(const NonlinearityParams &prm, double a_val, double b_val)
{
  if (!(a_val >= 0.0) || !(b_val >= 0.0))
  {
    throw std::invalid_argument("superadditivity_check: arguments must be >= 0");
  }
  const double lhs = f_unsquared(prm, std::sqrt(a_val + b_val));
  const double rhs = f_unsquared(prm, std::sqrt(a_val)) + f_unsquared(prm, std::sqrt(b_val));
  return lhs - rhs >= -1e-12 * std::max(1.0, std::abs(lhs));
}

}  // namespace smaxwell
