#include "smaxwell/orlicz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace smaxwell
{

OrliczPair OrliczPair::make(double p, double q)
{
  OrliczPair pair{p, q};
  pair.validate();
  return pair;
}

void OrliczPair::validate() const
{
  if (!(p > 2.0 && p < q))
  {
    throw std::invalid_argument("OrliczPair: require 2 < p < q");
  }
}

double lebesgue_norm(const SampledMagnitudes &field, double r)
{
  double sum = 0.0;
  for (double m : field.values)
  {
    if (m > 0.0)
    {
      sum += std::pow(m, r);
    }
  }
  return std::pow(field.weight * sum, 1.0 / r);
}

std::vector<bool> omega_set(const SampledMagnitudes &field, double threshold)
{
  std::vector<bool> mask(field.values.size());
  for (std::size_t i = 0; i < mask.size(); ++i)
  {
    mask[i] = field.values[i] > threshold;
  }
  return mask;
}

NormBounds norm_bounds(const SampledMagnitudes &field, const OrliczPair &pair)
{
  NormBounds nb;
  double sum_p = 0.0, sum_q = 0.0;
  for (double m : field.values)
  {
    if (m > 1.0)
    {
      sum_p += std::pow(m, pair.p);
      ++nb.omega_sites;
    }
    else if (m > 0.0)
    {
      sum_q += std::pow(m, pair.q);
    }
  }
  nb.lp_inside = std::pow(field.weight * sum_p, 1.0 / pair.p);
  nb.lq_outside = std::pow(field.weight * sum_q, 1.0 / pair.q);
  nb.omega_measure = static_cast<double>(nb.omega_sites) * field.weight;
  const double shrink = 1.0 + std::pow(nb.omega_measure, 1.0 / pair.r());
  nb.lower = std::max({0.0, nb.lq_outside - 1.0, nb.lp_inside / shrink});
  nb.upper = std::max(nb.lq_outside, nb.lp_inside);
  nb.indicator_split = nb.lq_outside + nb.lp_inside;
  return nb;
}

double SplitDecomposition::mean_fraction() const
{
  if (t.empty())
  {
    return 0.0;
  }
  double s = 0.0;
  for (double v : t)
  {
    s += v;
  }
  return s / static_cast<double>(t.size());
}

std::size_t SplitDecomposition::saturated_sites(double eps) const
{
  return static_cast<std::size_t>(
      std::count_if(t.begin(), t.end(), [eps](double v) { return v <= eps || v >= 1.0 - eps; }));
}

std::string NormResult::trace_csv() const
{
  std::ostringstream os;
  os.precision(17);
  os << "iteration,objective,step\n";
  for (const auto &row : trace)
  {
    os << row.iteration << ',' << row.objective << ',' << row.step << '\n';
  }
  return os.str();
}

double split_objective(const SampledMagnitudes &field, const OrliczPair &pair,
                       std::span<const double> t)
{
  double sp = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < field.values.size(); ++i)
  {
    const double m = field.values[i];
    if (m <= 0.0)
    {
      continue;
    }
    sp += std::pow(t[i] * m, pair.p);
    sq += std::pow((1.0 - t[i]) * m, pair.q);
  }
  return std::pow(field.weight * sp, 1.0 / pair.p) + std::pow(field.weight * sq, 1.0 / pair.q);
}

double dual_norm(const SampledMagnitudes &field, const OrliczPair &pair)
{
  return lebesgue_norm(field, pair.p_dual()) + lebesgue_norm(field, pair.q_dual());
}

namespace
{

struct SplitState
{
  std::vector<double> t;
  std::vector<double> s;  // 1 - t, kept separately for accuracy near t = 1
};

// Value and certified lower bound of a split. Two dual candidates are tried: the
// derivatives of ‖ξ₁‖_p and of ‖ξ₂‖_q, each rescaled to unit dual norm.
struct Certificate
{
  double value;
  double lower;
  double part_p;
  double part_q;
  std::vector<double> dual;
};

Certificate certify(const SampledMagnitudes &field, const OrliczPair &pair,
                    const SplitState &st)
{
  const auto &m = field.values;
  const double w = field.weight;
  const double p = pair.p, q = pair.q, pd = pair.p_dual(), qd = pair.q_dual();
  double sp = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i)
  {
    if (m[i] > 0.0)
    {
      sp += std::pow(st.t[i] * m[i], p);
      sq += std::pow(st.s[i] * m[i], q);
    }
  }
  const double A = std::pow(w * sp, 1.0 / p);
  const double B = std::pow(w * sq, 1.0 / q);
  Certificate best{A + B, 0.0, A, B, std::vector<double>(m.size(), 0.0)};

  auto try_dual = [&](auto density)
  {
    double pair_sum = 0.0, np = 0.0, nq = 0.0;
    std::vector<double> eta(m.size(), 0.0);
    for (std::size_t i = 0; i < m.size(); ++i)
    {
      if (m[i] <= 0.0)
      {
        continue;
      }
      eta[i] = density(i);
      pair_sum += eta[i] * m[i];
      np += std::pow(eta[i], pd);
      nq += std::pow(eta[i], qd);
    }
    const double scale =
        std::max(std::pow(w * np, 1.0 / pd), std::pow(w * nq, 1.0 / qd));
    if (!(scale > 0.0) || !std::isfinite(scale))
    {
      return;
    }
    const double lower = w * pair_sum / scale;
    if (lower > best.lower)
    {
      best.lower = lower;
      for (auto &e : eta)
      {
        e /= scale;
      }
      best.dual = std::move(eta);
    }
  };
  if (A > 0.0)
  {
    try_dual([&](std::size_t i) { return std::pow(st.t[i] * m[i], p - 1.0); });
  }
  if (B > 0.0)
  {
    try_dual([&](std::size_t i) { return std::pow(st.s[i] * m[i], q - 1.0); });
  }
  best.lower = std::min(best.lower, best.value);
  return best;
}

// Per-site KKT point on the Pareto curve: t^{p-1}/(1-t)^{q-1} = exp(c).
// With t = 1/(1+e^{-z}) the map G(z) = -(p-1) log1p(e^{-z}) + (q-1) log1p(e^{z}) is convex
// and increasing with slope in [p-1, q-1], so Newton from the right converges
// monotonically.
void pareto_site(double p, double q, double c, double &t, double &s)
{
  const double shift = (p - 1.0) * std::log(2.0);
  double z = c + shift >= 0.0 ? (c + shift) / (q - 1.0) : (c + shift) / (p - 1.0);
  auto softplus = [](double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); };
  for (int it = 0; it < 100; ++it)
  {
    const double G = -(p - 1.0) * softplus(-z) + (q - 1.0) * softplus(z);
    const double tz = 1.0 / (1.0 + std::exp(-z));
    const double dG = (p - 1.0) * (1.0 - tz) + (q - 1.0) * tz;
    const double dz = (G - c) / dG;
    z -= dz;
    if (std::abs(dz) <= 1e-15 * std::max(1.0, std::abs(z)))
    {
      break;
    }
  }
  t = 1.0 / (1.0 + std::exp(-z));
  s = 1.0 / (1.0 + std::exp(z));
}

void fill_curve(const SampledMagnitudes &field, const OrliczPair &pair, double log_lambda,
                SplitState &st)
{
  const auto &m = field.values;
  for (std::size_t i = 0; i < m.size(); ++i)
  {
    if (m[i] > 0.0)
    {
      pareto_site(pair.p, pair.q, log_lambda + (pair.q - pair.p) * std::log(m[i]), st.t[i],
                  st.s[i]);
    }
    else
    {
      st.t[i] = 0.0;
      st.s[i] = 1.0;
    }
  }
}

// log κ = log λ + (q-1) log B - (p-1) log A; κ = 1 exactly at the optimal split.
double log_kappa(const SampledMagnitudes &field, const OrliczPair &pair, double log_lambda,
                 const SplitState &st, double &objective)
{
  const auto &m = field.values;
  double sp = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i)
  {
    if (m[i] > 0.0)
    {
      sp += std::pow(st.t[i] * m[i], pair.p);
      sq += std::pow(st.s[i] * m[i], pair.q);
    }
  }
  const double A = std::pow(field.weight * sp, 1.0 / pair.p);
  const double B = std::pow(field.weight * sq, 1.0 / pair.q);
  objective = A + B;
  if (!(A > 0.0))
  {
    return std::numeric_limits<double>::infinity();
  }
  if (!(B > 0.0))
  {
    return -std::numeric_limits<double>::infinity();
  }
  return log_lambda + (pair.q - 1.0) * std::log(B) - (pair.p - 1.0) * std::log(A);
}

NormResult finish(const SampledMagnitudes &field, const OrliczPair &pair, SplitState &&st,
                  double tol, NormResult res)
{
  auto cert = certify(field, pair, st);
  res.value = cert.value;
  res.lower = cert.lower;
  res.part_p = cert.part_p;
  res.part_q = cert.part_q;
  res.dual = std::move(cert.dual);
  res.split.t = std::move(st.t);
  res.converged = res.value - res.lower <= tol;
  return res;
}

// Projected gradient descent on t with Armijo backtracking.
void projected_descent(const SampledMagnitudes &field, const OrliczPair &pair, SplitState &st,
                       double tol, int max_iter, NormResult &res)
{
  const auto &m = field.values;
  const std::size_t N = m.size();
  const double w = field.weight;
  std::vector<double> grad(N), trial(N);
  double step = 1.0;
  for (int it = 0; it < max_iter; ++it)
  {
    const auto cert = certify(field, pair, st);
    res.trace.push_back({res.iterations++, cert.value, step});
    if (cert.value - cert.lower <= tol)
    {
      return;
    }
    const double A = cert.part_p, B = cert.part_q;
    for (std::size_t i = 0; i < N; ++i)
    {
      grad[i] = 0.0;
      if (m[i] <= 0.0)
      {
        continue;
      }
      if (A > 1e-12)
      {
        grad[i] += w * m[i] * std::pow(st.t[i] * m[i], pair.p - 1.0) / std::pow(A, pair.p - 1.0);
      }
      if (B > 1e-12)
      {
        grad[i] -= w * m[i] * std::pow(st.s[i] * m[i], pair.q - 1.0) / std::pow(B, pair.q - 1.0);
      }
    }
    const double f0 = cert.value;
    step = std::min(1.0, step * 4.0);
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls)
    {
      double decrease = 0.0;
      for (std::size_t i = 0; i < N; ++i)
      {
        trial[i] = std::clamp(st.t[i] - step * grad[i], 0.0, 1.0);
        decrease += grad[i] * (st.t[i] - trial[i]);
      }
      const double f1 = split_objective(field, pair, trial);
      if (f1 <= f0 - 1e-4 * decrease)
      {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted)
    {
      return;
    }
    for (std::size_t i = 0; i < N; ++i)
    {
      st.t[i] = trial[i];
      st.s[i] = 1.0 - trial[i];
    }
  }
}

}  // namespace

NormResult norm_exact(const SampledMagnitudes &field, const OrliczPair &pair, double tol,
                      int max_iter)
{
  if (!(tol > 0.0))
  {
    throw std::invalid_argument("norm_exact: tol must be positive");
  }
  pair.validate();
  const auto &m = field.values;
  const std::size_t N = m.size();
  NormResult res;
  SplitState st{std::vector<double>(N, 0.0), std::vector<double>(N, 1.0)};
  if (std::none_of(m.begin(), m.end(), [](double v) { return v > 0.0; }))
  {
    res.split.t = std::move(st.t);
    res.dual.assign(N, 0.0);
    res.converged = true;
    return res;
  }

  // Trivial splittings first: either one is optimal exactly when its own dual element is
  // feasible for the other norm.
  {
    auto cert_q = certify(field, pair, st);
    if (cert_q.value - cert_q.lower <= tol)
    {
      return finish(field, pair, std::move(st), tol, res);
    }
    SplitState all_p{std::vector<double>(N, 1.0), std::vector<double>(N, 0.0)};
    auto cert_p = certify(field, pair, all_p);
    if (cert_p.value - cert_p.lower <= tol)
    {
      return finish(field, pair, std::move(all_p), tol, res);
    }
  }

  // Bracket the root of log κ(log λ) by expanding from 0.
  double obj = 0.0;
  double lo = -1.0, hi = 1.0;
  fill_curve(field, pair, lo, st);
  double k_lo = log_kappa(field, pair, lo, st, obj);
  fill_curve(field, pair, hi, st);
  double k_hi = log_kappa(field, pair, hi, st, obj);
  for (int it = 0; it < 200 && !(k_lo < 0.0); ++it)
  {
    lo = 2.0 * lo - 1.0;
    fill_curve(field, pair, lo, st);
    k_lo = log_kappa(field, pair, lo, st, obj);
  }
  for (int it = 0; it < 200 && !(k_hi > 0.0); ++it)
  {
    hi = 2.0 * hi + 1.0;
    fill_curve(field, pair, hi, st);
    k_hi = log_kappa(field, pair, hi, st, obj);
  }

  if (k_lo < 0.0 && k_hi > 0.0)
  {
    // Illinois-modified regula falsi on log κ, falling back to bisection for infinite ends.
    int side = 0;
    double prev = 0.5 * (lo + hi);
    for (int it = 0; it < max_iter; ++it)
    {
      double mid;
      if (std::isfinite(k_lo) && std::isfinite(k_hi))
      {
        mid = (lo * k_hi - hi * k_lo) / (k_hi - k_lo);
        if (!(mid > lo && mid < hi))
        {
          mid = 0.5 * (lo + hi);
        }
      }
      else
      {
        mid = 0.5 * (lo + hi);
      }
      fill_curve(field, pair, mid, st);
      const double k_mid = log_kappa(field, pair, mid, st, obj);
      res.trace.push_back({res.iterations++, obj, std::abs(mid - prev)});
      prev = mid;
      if (k_mid == 0.0)
      {
        break;
      }
      if (k_mid < 0.0)
      {
        lo = mid;
        k_lo = k_mid;
        if (side == -1)
        {
          k_hi *= 0.5;
        }
        side = -1;
      }
      else
      {
        hi = mid;
        k_hi = k_mid;
        if (side == 1)
        {
          k_lo *= 0.5;
        }
        side = 1;
      }
      if (it % 4 == 3 || hi - lo < 1e-14 * std::max(1.0, std::abs(mid)))
      {
        const auto cert = certify(field, pair, st);
        if (cert.value - cert.lower <= tol || hi - lo < 1e-14 * std::max(1.0, std::abs(mid)))
        {
          break;
        }
      }
    }
  }

  auto cert = certify(field, pair, st);
  if (cert.value - cert.lower > tol)
  {
    projected_descent(field, pair, st, tol, max_iter * 20, res);
  }
  return finish(field, pair, std::move(st), tol, res);
}

}  // namespace smaxwell
