#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "smaxwell/orlicz.hpp"
#include "smaxwell/rng.hpp"
#include "smaxwell/verify.hpp"

using namespace smaxwell;

namespace
{

const OrliczPair kPair = OrliczPair::make(3.0, 6.0);

// min over arbitrary (not necessarily collinear) xi1 in a 2-D box grid, sites of R^2.
double unrestricted_norm(const std::vector<std::array<double, 2>> &xi, double weight, int levels)
{
  const std::size_t S = xi.size();
  std::vector<std::vector<std::array<double, 2>>> cand(S);
  for (std::size_t i = 0; i < S; ++i)
  {
    const double r = std::hypot(xi[i][0], xi[i][1]);
    for (int a = 0; a < levels; ++a)
    {
      for (int b = 0; b < levels; ++b)
      {
        const double sx = -1.5 * r + 3.0 * r * a / (levels - 1);
        const double sy = -1.5 * r + 3.0 * r * b / (levels - 1);
        cand[i].push_back({sx, sy});
      }
    }
  }
  double best = 1e300;
  const std::size_t K = cand[0].size();
  for (std::size_t k0 = 0; k0 < K; ++k0)
  {
    for (std::size_t k1 = 0; k1 < K; ++k1)
    {
      const std::array<std::size_t, 2> ks{k0, k1};
      double sp = 0.0, sq = 0.0;
      for (std::size_t i = 0; i < S; ++i)
      {
        const auto &c = cand[i][ks[i]];
        const double m1 = std::hypot(c[0], c[1]);
        const double m2 = std::hypot(xi[i][0] - c[0], xi[i][1] - c[1]);
        sp += weight * std::pow(m1, 3.0);
        sq += weight * std::pow(m2, 6.0);
      }
      best = std::min(best, std::cbrt(sp) + std::pow(sq, 1.0 / 6.0));
    }
  }
  return best;
}

}  // namespace

TEST_SUITE("orlicz")
{
  TEST_CASE("pair invariants")
  {
    CHECK_THROWS(OrliczPair::make(3.0, 3.0));
    CHECK_THROWS(OrliczPair::make(0.5, 3.0));
    CHECK(kPair.p_dual() == doctest::Approx(1.5));
    CHECK(kPair.q_dual() == doctest::Approx(1.2));
  }

  TEST_CASE("Lebesgue norms")
  {
    const SampledMagnitudes f{{1.0, 2.0, 2.0}, 0.5};
    CHECK(lebesgue_norm(f, 2.0) == doctest::Approx(std::sqrt(0.5 * 9.0)));
    CHECK(lebesgue_norm(f, 3.0) == doctest::Approx(std::cbrt(0.5 * 17.0)));
  }

  TEST_CASE("zero and single-site fields")
  {
    const SampledMagnitudes zero{{0.0, 0.0, 0.0, 0.0}, 1.0};
    const auto z = norm_exact(zero, kPair);
    CHECK(z.value == 0.0);
    CHECK(norm_bounds(zero, kPair).lower == 0.0);
    CHECK(norm_bounds(zero, kPair).upper == 0.0);
    // One site: the split objective is linear in t, so the norm is min(w^{1/p}, w^{1/q}) x.
    for (double w : {0.3, 1.0, 2.5})
    {
      for (double x : {0.2, 1.0, 7.0})
      {
        const SampledMagnitudes f{{x}, w};
        const double expect = std::min(std::cbrt(w), std::pow(w, 1.0 / 6.0)) * x;
        CHECK(norm_exact(f, kPair).value == doctest::Approx(expect).epsilon(1e-10));
      }
    }
  }

  TEST_CASE("bundled 4-site field against the 51-level brute force")
  {
    const SampledMagnitudes f{{1.5, 0.5, 2.0, 0.1}, 1.0};
    const auto nr = norm_exact(f, kPair);
    const double brute = brute_force_norm(f, kPair, 51);
    CHECK(nr.converged);
    CHECK(std::abs(nr.value - brute) <= 1e-3);
    // Any grid split is feasible, so the optimum cannot exceed it.
    CHECK(nr.value <= brute + 1e-12);
    CHECK(nr.lower <= nr.value);
    CHECK(nr.gap() <= 1e-9);
  }

  TEST_CASE("random 4-site fields against the brute force")
  {
    Rng rng(11);
    for (int k = 0; k < 10; ++k)
    {
      SampledMagnitudes f{std::vector<double>(4), rng.uniform(0.2, 2.0)};
      for (auto &v : f.values)
      {
        v = rng.log_uniform(0.05, 4.0);
      }
      const auto nr = norm_exact(f, kPair);
      const double brute = brute_force_norm(f, kPair, 51);
      CHECK(nr.value <= brute + 1e-12);
      CHECK(std::abs(nr.value - brute) <= 1e-3);
      // A finer oracle grid tightens the agreement.
      if (k < 3)
      {
        CHECK(std::abs(nr.value - brute_force_norm(f, kPair, 101)) <=
              std::abs(nr.value - brute) + 1e-12);
      }
    }
  }

  TEST_CASE("collinear splits lose nothing on 2-site vector fields")
  {
    Rng rng(5);
    for (int k = 0; k < 4; ++k)
    {
      std::vector<std::array<double, 2>> xi(2);
      SampledMagnitudes mags{std::vector<double>(2), 1.0};
      for (int i = 0; i < 2; ++i)
      {
        const double r = rng.log_uniform(0.3, 3.0);
        const double th = rng.uniform(0.0, 6.283185307179586);
        xi[i] = {r * std::cos(th), r * std::sin(th)};
        mags.values[i] = r;
      }
      const double collinear = norm_exact(mags, kPair).value;
      const double free_search = unrestricted_norm(xi, 1.0, 31);
      // The unrestricted grid search can only match or exceed the collinear optimum.
      CHECK(free_search >= collinear - 1e-12);
      CHECK(free_search - collinear <= 0.05 * collinear);
    }
  }

  TEST_CASE("certified bracket and lower sandwich side")
  {
    Rng rng(3);
    for (int k = 0; k < 50; ++k)
    {
      const int sites = 2 + static_cast<int>(rng.uniform() * 40.0);
      SampledMagnitudes f{std::vector<double>(sites), rng.log_uniform(0.05, 2.0)};
      for (auto &v : f.values)
      {
        v = rng.log_uniform(0.01, 10.0);
      }
      const auto nr = norm_exact(f, kPair);
      const auto b = norm_bounds(f, kPair);
      CHECK(nr.converged);
      CHECK(nr.lower <= nr.value + 1e-12 * nr.value);
      CHECK(nr.gap() <= 1e-9 * std::max(1.0, nr.value));
      CHECK(b.lower <= nr.value * (1.0 + 1e-12));
      CHECK(split_objective(f, kPair, nr.split.t) == doctest::Approx(nr.value).epsilon(1e-12));
    }
  }

  TEST_CASE("max-form upper bound fails when both regions carry mass")
  {
    // |xi| = (2, 1), unit weights: the exact norm exceeds max(|xi|_{Lq(out)}, |xi|_{Lp(in)}).
    const SampledMagnitudes f{{2.0, 1.0}, 1.0};
    const auto nr = norm_exact(f, kPair);
    const auto b = norm_bounds(f, kPair);
    CHECK(b.upper == doctest::Approx(2.0));
    CHECK(nr.lower > b.upper);
    CHECK(nr.value == doctest::Approx(2.00517).epsilon(1e-5));
  }
}
