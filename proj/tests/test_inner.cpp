#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "smaxwell/fields.hpp"
#include "smaxwell/inner_solver.hpp"
#include "smaxwell/rng.hpp"

using namespace smaxwell;

namespace
{

const GridSpec kGrid{4, 8, 4.0};
const NonlinearityParams kParams = NonlinearityParams::from_exponents(4, 3.0, 6.0);

OneForm test_u(double scale)
{
  return scaled(seed_form(kGrid, {{1.0, 1.0}, 3.0}), scale);
}

OneForm with_gradient(const OneForm &u, const ScalarField &w)
{
  OneForm v = gradient(w);
  axpy(1.0, u, v);
  return v;
}

}  // namespace

TEST_SUITE("inner")
{
  TEST_CASE("config validation")
  {
    InnerConfig c;
    CHECK_NOTHROW(c.validate());
    c.grad_tol = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = InnerConfig{};
    c.ls_shrink = 1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  }

  TEST_CASE("reduced gradient matches differences of F")
  {
    Rng rng(6);
    const OneForm u = test_u(0.8);
    const ScalarField w = symmetrize_scalar(random_scalar(kGrid, rng));
    const ScalarField eta = random_scalar(kGrid, rng);
    const ScalarField g = reduced_gradient(kParams, u, w);
    const double eps = 1e-5;
    ScalarField wp = w, wm = w;
    axpy(eps, eta, wp);
    axpy(-eps, eta, wm);
    const double fd = (F_total(kParams, with_gradient(u, wp)) -
                       F_total(kParams, with_gradient(u, wm))) /
                      (2.0 * eps);
    CHECK(inner(g, eta) == doctest::Approx(fd).epsilon(1e-6));
  }

  TEST_CASE("phi of zero is zero")
  {
    const auto r = phi(kParams, OneForm(kGrid), InnerConfig{});
    CHECK(r.converged);
    CHECK(max_abs(r.w.values) == 0.0);
    CHECK(r.objective == 0.0);
  }

  TEST_CASE("phi converges to an invariant minimizer")
  {
    const OneForm u = test_u(1.5);
    const InnerConfig cfg;
    const auto r = phi(kParams, u, cfg);
    CHECK(r.converged);
    CHECK(r.grad_norm <= cfg.grad_tol);
    CHECK(invariance_residual(r.w) <= 1e-12 * std::max(1.0, max_abs(r.w.values)));
    CHECK(r.objective == doctest::Approx(F_total(kParams, with_gradient(u, r.w))).epsilon(1e-12));
    CHECK(r.objective <= F_total(kParams, u));
    // Objective is nonincreasing along the trace.
    for (std::size_t i = 1; i < r.trace.rows.size(); ++i)
    {
      CHECK(r.trace.rows[i].objective <= r.trace.rows[i - 1].objective * (1.0 + 1e-14));
    }
    // Random invariant perturbations do not lower the objective.
    Rng rng(9);
    for (int k = 0; k < 5; ++k)
    {
      ScalarField w = r.w;
      axpy(1e-3, symmetrize_scalar(random_scalar(kGrid, rng)), w);
      CHECK(F_total(kParams, with_gradient(u, w)) >= r.objective * (1.0 - 1e-13));
    }
    // Warm start lands on the same gradient field.
    const auto again = phi(kParams, u, cfg, &r.w);
    CHECK(again.iterations <= 2);
    CHECK(l2_norm(sub(gradient(again.w), gradient(r.w))) <= 1e-8 * l2_norm(gradient(r.w)));
  }

  TEST_CASE("phi is odd in u")
  {
    const OneForm u = test_u(1.2);
    const auto a = phi(kParams, u, InnerConfig{});
    const auto b = phi(kParams, scaled(u, -1.0), InnerConfig{});
    CHECK(b.objective == doctest::Approx(a.objective).epsilon(1e-10));
    ScalarField s = a.w;
    axpy(1.0, b.w, s);
    CHECK(l2_norm(gradient(s)) <= 1e-7 * l2_norm(gradient(a.w)));
  }

  TEST_CASE("gamma power does not move the minimizer")
  {
    const GridSpec g{4, 4, 4.0};
    const OneForm u = seed_form(g, {{1.0, 0.5}, 3.0});
    const OrliczPair pair = OrliczPair::make(3.0, 6.0);
    InnerConfig cfg;
    cfg.gamma_tol = 1e-8;
    const auto plain = phi_gamma(u, pair, 2.5, cfg, false);
    const auto powered = phi_gamma(u, pair, 2.5, cfg, true);
    CHECK(plain.converged);
    CHECK(powered.converged);
    CHECK(std::pow(plain.objective, 2.5) == doctest::Approx(powered.objective).epsilon(1e-6));
    CHECK_THROWS_AS(phi_gamma(u, pair, 1.0, cfg), std::invalid_argument);
  }

  TEST_CASE("c_tilde on a single direction")
  {
    const GridSpec g{4, 4, 4.0};
    const OneForm u = seed_form(g, {{1.0, 1.0}, 3.0});
    const OrliczPair pair = OrliczPair::make(3.0, 6.0);
    const auto ct = c_tilde({u}, pair, 3.0, InnerConfig{});
    CHECK(ct.converged);
    CHECK(ct.value > 0.0);
    CHECK(d_norm(ct.direction) == doctest::Approx(1.0).epsilon(1e-12));
  }
}
