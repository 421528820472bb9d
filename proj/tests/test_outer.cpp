#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "smaxwell/fields.hpp"
#include "smaxwell/outer_solver.hpp"
#include "smaxwell/rng.hpp"

using namespace smaxwell;

namespace
{

const GridSpec kGrid{4, 8, 4.0};

ReducedProblem problem()
{
  return {NonlinearityParams::from_exponents(4, 3.0, 6.0), InnerConfig{}};
}

OneForm unit_seed()
{
  const OneForm s = seed_form(kGrid, {{1.0, 1.0}, 3.0});
  return scaled(s, 1.0 / d_norm(s));
}

}  // namespace

TEST_SUITE("outer")
{
  TEST_CASE("reduced functional basics")
  {
    const auto prob = problem();
    const OneForm zero(kGrid);
    CHECK(j_hat(prob, zero) == 0.0);
    CHECK(l2_norm(grad_j_hat(prob, zero)) == 0.0);
    const OneForm u = scaled(unit_seed(), 2.0);
    const double j = j_hat(prob, u);
    CHECK(j == doctest::Approx(j_hat(prob, scaled(u, -1.0))).epsilon(1e-10));
    // Small multiples are dominated by the quadratic part.
    const OneForm small = scaled(unit_seed(), 1e-2);
    CHECK(j_hat(prob, small) > 0.0);
    CHECK(j_hat(prob, small) <= 0.5 * 1e-4);
    const OneForm g = grad_j_hat(prob, u);
    CHECK(l2_norm(sub(project_to_v(g), g)) <= 1e-12 * l2_norm(g));
  }

  TEST_CASE("gradient matches differences of the reduced functional")
  {
    const auto prob = problem();
    Rng rng(17);
    const OneForm u = scaled(unit_seed(), 3.0);
    const OneForm g = grad_j_hat(prob, u);
    for (int k = 0; k < 2; ++k)
    {
      OneForm d = project_to_v(random_oneform(kGrid, rng));
      d = scaled(d, 1.0 / d_norm(d));
      const double eps = 1e-4;
      const double fd =
          (j_hat(prob, add(u, scaled(d, eps))) - j_hat(prob, sub(u, scaled(d, eps)))) /
          (2.0 * eps);
      CHECK(inner(g, d) == doctest::Approx(fd).epsilon(1e-5));
    }
  }

  TEST_CASE("far point")
  {
    const auto prob = problem();
    const OuterConfig cfg;
    const OneForm dir = unit_seed();
    const auto fp = find_far_point(prob, dir, cfg);
    CHECK(fp.t > 0.0);
    CHECK(j_hat(prob, fp.e) < 0.0);
    CHECK(fp.j_samples.back() < 0.0);
    for (std::size_t i = 0; i + 1 < fp.j_samples.size(); ++i)
    {
      CHECK(fp.j_samples[i] >= 0.0);
    }
    // Starting beyond the sign change returns at once.
    const auto late = find_far_point(prob, dir, cfg, 2.0 * fp.t);
    CHECK(late.doublings == 0);
    CHECK_THROWS_AS(find_far_point(prob, OneForm(kGrid), cfg), std::invalid_argument);
    CHECK_THROWS_AS(find_far_point(prob, dir, cfg, 0.0), std::invalid_argument);
  }

  TEST_CASE("weak residual")
  {
    const auto prob = problem();
    const auto battery = test_battery(kGrid, SymmetryGroup::cyclic);
    CHECK(!battery.empty());
    for (const auto &phi : battery)
    {
      CHECK(equivariance_residual(phi) <= 1e-13);
    }
    CHECK(weak_residual(prob.params, OneForm(kGrid), battery) == 0.0);
    CHECK(weak_residual(prob.params, scaled(unit_seed(), 2.0), battery) > 1e-2);
  }

  TEST_CASE("nontriviality report")
  {
    Rng rng(3);
    const OneForm u = unit_seed();
    const auto zero = nontriviality_check(u, ScalarField(kGrid));
    CHECK(zero.norm_grad_w == 0.0);
    CHECK(zero.orthogonality == 0.0);
    CHECK(zero.norm_a == doctest::Approx(l2_norm(u)));
    const ScalarField w = random_scalar(kGrid, rng);
    const auto r = nontriviality_check(u, w);
    // u is divergence free, so it is orthogonal to every gradient.
    CHECK(r.orthogonality <= 1e-12);
    CHECK(r.norm_a * r.norm_a ==
          doctest::Approx(r.norm_u * r.norm_u + r.norm_grad_w * r.norm_grad_w).epsilon(1e-12));
  }

  TEST_CASE("Palais-Smale diagnostic")
  {
    CHECK(ps_diagnostic({}, 3.0).rows.empty());
    // (alpha/2 - 1) |u|^2 + excess <= alpha max J + eps |u| holds along a consistent trace.
    std::vector<PSEntry> ok{{1.0, 0.0, 1.0, 0.0}, {1.0, 0.1, 2.0, 0.5}};
    const auto good = ps_diagnostic(ok, 3.0);
    CHECK(good.violations == 0);
    CHECK(good.m_bound == doctest::Approx(3.0));
    // Inflating the norm tenfold without moving J must be flagged.
    std::vector<PSEntry> bad = ok;
    bad[1].d_norm *= 10.0;
    CHECK(ps_diagnostic(bad, 3.0).violations >= 1);
  }

  TEST_CASE("alignment")
  {
    Rng rng(1);
    const OneForm a = project_to_v(random_oneform(kGrid, rng));
    CHECK(aligned_distance(a, a) == 0.0);
    CHECK(aligned_distance(a, scaled(a, -1.0)) == 0.0);
    CHECK(aligned_distance(a, OneForm(kGrid)) == doctest::Approx(l2_norm(a)));
    CHECK_THROWS_AS(aligned_distance(a, OneForm(GridSpec{4, 4, 4.0})), std::invalid_argument);
  }

  TEST_CASE("mountain pass converges and is stable in the tolerance")
  {
    const auto prob = problem();
    OuterConfig cfg;
    CHECK_THROWS_AS(mountain_pass(prob, OneForm(kGrid), cfg), std::invalid_argument);
    const OneForm seed = seed_form(kGrid, {{1.0, 1.0}, 3.0});
    const auto res = mountain_pass(prob, seed, cfg);
    CHECK(res.report.converged);
    CHECK(res.report.j_value > 0.0);
    CHECK(res.report.grad_norm <= cfg.mp_tol * res.report.grad_scale);
    CHECK(res.report.nontriviality > 0.1 * res.report.u_norm);
    // Path maxima do not increase across sweeps.
    for (std::size_t i = 1; i < res.sweeps.size(); ++i)
    {
      CHECK(res.sweeps[i].path_max <= res.sweeps[i - 1].path_max * (1.0 + 1e-12));
    }
    cfg.mp_tol *= 0.1;
    const auto tight = mountain_pass(prob, seed, cfg);
    CHECK(tight.report.converged);
    CHECK(std::abs(tight.report.j_value - res.report.j_value) <= 1e-2 * res.report.j_value);
  }
}
