#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "smaxwell/nonlinearity.hpp"

using namespace smaxwell;

namespace
{

const NonlinearityParams kDefault = NonlinearityParams::from_exponents(4, 3.0, 6.0);

// Direct transcription of the two branches, kept separate from the library code.
double f_ref(double s) { return s <= 1.0 ? s * s * s : 2.0 * std::pow(s, 1.5) - 1.0; }
double fp_ref(double s) { return s <= 1.0 ? 3.0 * s * s : 3.0 * std::sqrt(s); }

}  // namespace

TEST_SUITE("nonlinearity")
{
  TEST_CASE("branch coefficients")
  {
    const auto c1 = solve_coefficients(3.0, 6.0, 1.0);
    CHECK(c1.a == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(c1.b == doctest::Approx(-1.0).epsilon(1e-15));
    const auto c2 = solve_coefficients(2.5, 5.0, 2.0);
    CHECK(c2.a == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(c2.b == doctest::Approx(-2.0).epsilon(1e-15));
    CHECK(std::abs(c2.a + c2.b - 2.0) <= 1e-12);
    CHECK(std::abs(c2.a * 2.5 - 2.0 * 5.0) <= 1e-12);
    CHECK_THROWS_AS(solve_coefficients(3.0, 3.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(solve_coefficients(3.0, 6.0, 0.0), std::invalid_argument);
  }

  TEST_CASE("parameter invariants")
  {
    CHECK_THROWS(NonlinearityParams::from_exponents(3, 3.0, 6.0));
    CHECK_THROWS(NonlinearityParams::from_exponents(4, 4.5, 6.0));  // p above 2n/(n-2)
    CHECK_THROWS(NonlinearityParams::from_exponents(4, 3.0, 3.5));  // q below 2n/(n-2)
    CHECK_THROWS(NonlinearityParams::from_exponents(2, 3.0, 6.0));   // no finite critical exponent
    CHECK_NOTHROW(NonlinearityParams::from_exponents(6, 2.5, 4.0));
  }

  TEST_CASE("values and derivatives")
  {
    CHECK(f_eval(kDefault, 0.0) == 0.0);
    CHECK(f_eval(kDefault, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(f_eval(kDefault, 4.0) == doctest::Approx(15.0).epsilon(1e-15));
    CHECK(f_prime(kDefault, 0.0) == 0.0);
    CHECK(f_prime(kDefault, 1.0) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(f_prime(kDefault, 4.0) == doctest::Approx(6.0).epsilon(1e-15));
    CHECK_THROWS_AS(f_eval(kDefault, -1e-3), std::invalid_argument);
    CHECK_THROWS_AS(f_prime(kDefault, -1e-3), std::invalid_argument);
    for (double s : {1e-3, 0.2, 0.7, 0.999, 1.001, 2.0, 37.0, 1e4})
    {
      CHECK(f_eval(kDefault, s) == doctest::Approx(f_ref(s)).epsilon(1e-13));
      CHECK(f_prime(kDefault, s) == doctest::Approx(fp_ref(s)).epsilon(1e-13));
    }
  }

  TEST_CASE("second derivative matches differences of f'")
  {
    for (double s : {0.05, 0.5, 0.9, 1.2, 3.0, 50.0})
    {
      const double h = 1e-6 * s;
      const double fd = (f_prime(kDefault, s + h) - f_prime(kDefault, s - h)) / (2.0 * h);
      CHECK(f_second(kDefault, s) == doctest::Approx(fd).epsilon(1e-6));
    }
  }

  TEST_CASE("knot is C1")
  {
    const auto k = knot_residuals(kDefault);
    CHECK(k.value <= 1e-12);
    CHECK(k.derivative <= 1e-12);
    const auto other = knot_residuals(NonlinearityParams::from_exponents(4, 2.5, 5.0, 2.0));
    CHECK(other.value <= 1e-12);
    CHECK(other.derivative <= 1e-12);
  }

  TEST_CASE("f3 and growth constants")
  {
    const double c2 = certify_f3(kDefault, 10000);
    CHECK(std::isfinite(c2));
    CHECK(c2 >= 3.0 * (1.0 - 1e-12));
    CHECK(certify_f3(kDefault, 1000, 0.9, 1.1) >= 3.0 * (1.0 - 1e-12));
    CHECK(measure_growth_upper(kDefault, 10000) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(measure_growth_lower(kDefault, 10000) == doctest::Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("f4")
  {
    const auto ok = certify_f4(kDefault, 3.0, 0.1, 10000);
    CHECK(ok.holds);
    CHECK(ok.margin >= 0.0);
    CHECK(ok.min_f > 0.0);
    CHECK_FALSE(certify_f4(kDefault, 6.0, 10.0, 10000).holds);
    CHECK(certify_f4(kDefault, 2.000001, 1.0, 10000).holds);
  }

  TEST_CASE("convexity gap")
  {
    const std::vector<double> x{0.3, -1.2, 0.4, 0.9}, zero(4, 0.0);
    const auto same = convexity_gap(kDefault, x, x);
    CHECK(same.gap == 0.0);
    CHECK(same.bound == 0.0);
    // x = 0: gap = -f(|y|^2) + 2 f'(|y|^2) |y|^2.
    double s = 0.0;
    for (double v : x)
    {
      s += v * v;
    }
    const auto at0 = convexity_gap(kDefault, zero, x);
    CHECK(at0.gap == doctest::Approx(-f_ref(s) + 2.0 * fp_ref(s) * s).epsilon(1e-12));
    CHECK(at0.gap >= 0.0);
    // Well-separated pair against the literal formula.
    const std::vector<double> y{1.5, 0.2, -0.7, 0.1};
    double sy = 0.0, dot = 0.0, d2 = 0.0;
    for (int i = 0; i < 4; ++i)
    {
      sy += y[i] * y[i];
      dot += y[i] * (x[i] - y[i]);
      d2 += (x[i] - y[i]) * (x[i] - y[i]);
    }
    const auto g = convexity_gap(kDefault, x, y);
    CHECK(g.gap == doctest::Approx(f_ref(s) - f_ref(sy) - 2.0 * fp_ref(sy) * dot).epsilon(1e-12));
    const double dist = std::sqrt(d2);
    CHECK(g.bound == doctest::Approx(std::min(std::pow(dist, 3.0), std::pow(dist, 6.0))));
  }

  TEST_CASE("c1 certification")
  {
    const auto c = certify_c1(kDefault, 100000, 0.3, 7);
    CHECK(c.samples >= 100000);
    CHECK_FALSE(c.violated);
    CHECK(c.c1 > 0.0);
    // Antipodal pairs against the measured constant.
    for (double r : {0.1, 0.5, 0.9, 1.1, 3.0})
    {
      const std::vector<double> y{r, 0.0, 0.0, 0.0}, x{-r, 0.0, 0.0, 0.0};
      const auto g = convexity_gap(kDefault, x, y);
      CHECK(g.gap >= c.c1 * g.bound * (1.0 - 1e-12));
    }
  }

  TEST_CASE("Kantorovich constant against a dense scan")
  {
    CHECK_THROWS_AS(kantorovich_constant(2.0), std::invalid_argument);
    for (double r : {3.0, 6.0})
    {
      double best = 1e300;
      for (int k = -200000; k <= 200000; ++k)
      {
        const double u = k * 1e-4;  // [-20, 20]
        if (k == 0)
        {
          continue;
        }
        const double val =
            (std::pow(std::abs(1.0 + u), r) - 1.0 - r * u) / std::pow(std::abs(u), r);
        best = std::min(best, val);
      }
      const double c = kantorovich_constant(r);
      CHECK(c > 0.0);
      CHECK(c <= best + 1e-12);
      CHECK(c == doctest::Approx(best).epsilon(1e-6));
    }
    // Far tails tend to 1.
    CHECK(kantorovich_ratio(3.0, 1e6) == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(kantorovich_ratio(3.0, -1e6) == doctest::Approx(1.0).epsilon(1e-5));
  }

  TEST_CASE("Bregman ratio blows up at the knot")
  {
    CHECK(lemma_a1_ratio(kDefault, 1.1, 0.9) > 0.0);
    double prev = 0.0;
    for (double k : {10.0, 100.0, 1000.0})
    {
      const double h = lemma_a1_ratio(kDefault, 1.0 + 1.0 / k, 1.0 - 1.0 / k);
      CHECK(h > prev);
      prev = h;
    }
    CHECK(std::isfinite(lemma_a1_ratio(kDefault, 2.0, 1.0)));
    CHECK_THROWS(lemma_a1_ratio(kDefault, 0.5, 0.4));
  }

  TEST_CASE("superadditivity")
  {
    CHECK(superadditivity_check(kDefault, 0.0, 2.5));
    CHECK(superadditivity_check(kDefault, 1.0, 1.0));
    for (int i = 0; i <= 40; ++i)
    {
      for (int j = 0; j <= 40; ++j)
      {
        CHECK(superadditivity_check(kDefault, 0.25 * i, 0.25 * j));
      }
    }
  }
}
