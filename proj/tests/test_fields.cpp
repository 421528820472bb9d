#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "smaxwell/fields.hpp"
#include "smaxwell/rng.hpp"

using namespace smaxwell;

namespace
{

const GridSpec kGrid{4, 8, 4.0};

std::size_t site_index(const GridSpec &g, const std::vector<int> &idx)
{
  std::size_t s = 0;
  for (int a = 0; a < g.n; ++a)
  {
    s = s * g.m + idx[a];
  }
  return s;
}

std::string temp_path(const std::string &name)
{
  return (std::filesystem::temp_directory_path() / ("smaxwell_test_" + name)).string();
}

}  // namespace

TEST_SUITE("fields")
{
  TEST_CASE("grid invariants")
  {
    CHECK_THROWS_AS((GridSpec{4, 7, 4.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((GridSpec{3, 8, 4.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((GridSpec{4, 8, 0.0}.validate()), std::invalid_argument);
    CHECK(kGrid.h() == 1.0);
    CHECK(kGrid.sites() == 4096);
    CHECK(kGrid.coord(4) == 0.0);
    CHECK(kGrid.coord(0) == -4.0);
  }

  TEST_CASE("spectral derivative of a resolved mode is exact")
  {
    // w = sin(k x_1) cos(k x_2) with k = pi/L; grad_1 w = k cos cos, grad_2 w = -k sin sin.
    ScalarField w(kGrid);
    const double k = std::numbers::pi / kGrid.L;
    const std::size_t S = kGrid.sites();
    for (std::size_t s = 0; s < S; ++s)
    {
      const int j0 = static_cast<int>(s / (8 * 8 * 8));
      const int j1 = static_cast<int>((s / (8 * 8)) % 8);
      w.values[s] = std::sin(k * kGrid.coord(j0)) * std::cos(k * kGrid.coord(j1));
    }
    const OneForm g = gradient(w);
    double err = 0.0;
    for (std::size_t s = 0; s < S; ++s)
    {
      const int j0 = static_cast<int>(s / (8 * 8 * 8));
      const int j1 = static_cast<int>((s / (8 * 8)) % 8);
      const double x0 = kGrid.coord(j0), x1 = kGrid.coord(j1);
      err = std::max(err, std::abs(g.component(0)[s] - k * std::cos(k * x0) * std::cos(k * x1)));
      err = std::max(err, std::abs(g.component(1)[s] + k * std::sin(k * x0) * std::sin(k * x1)));
      err = std::max(err, std::abs(g.component(2)[s]) + std::abs(g.component(3)[s]));
    }
    CHECK(err <= 1e-13);
    // Laplacian of the same mode is -2 k^2 w.
    const ScalarField lap = laplacian(w);
    double lerr = 0.0;
    for (std::size_t s = 0; s < S; ++s)
    {
      lerr = std::max(lerr, std::abs(lap.values[s] + 2.0 * k * k * w.values[s]));
    }
    CHECK(lerr <= 1e-13);
  }

  TEST_CASE("calculus identities on random fields")
  {
    Rng rng(21);
    for (int trial = 0; trial < 5; ++trial)
    {
      const ScalarField w = random_scalar(kGrid, rng);
      const OneForm A = random_oneform(kGrid, rng);
      const OneForm B = random_oneform(kGrid, rng);
      CHECK(l2_norm(exterior_derivative(gradient(w))) <= 1e-12 * l2_norm(laplacian(w)));
      const TwoForm dA = exterior_derivative(A), dB = exterior_derivative(B);
      double lhs = 0.0;
      for (std::size_t i = 0; i < dA.data.size(); ++i)
      {
        lhs += dA.data[i] * dB.data[i];
      }
      lhs *= kGrid.cell_volume();
      CHECK(std::abs(lhs - inner(A, codifferential(dB))) <= 1e-12 * l2_norm(dA) * l2_norm(dB));
      const OneForm gw = gradient(w);
      CHECK(std::abs(inner(gw, A) - inner(w, codifferential(A))) <=
            1e-12 * l2_norm(gw) * l2_norm(A));
      const HodgeSplit hs = hodge_split(A);
      CHECK(l2_norm(sub(add(hs.u, gradient(hs.w)), A)) <= 1e-12 * l2_norm(A));
      CHECK(max_abs(divergence(hs.u).values) <= 1e-12 * max_abs(divergence(A).values));
      CHECK(std::abs(inner(hs.u, gradient(hs.w))) <= 1e-12 * l2_norm(A) * l2_norm(A));
      CHECK(laplace_beltrami_residual(A) <= 1e-12 * max_abs(laplacian(A).data));
      const double dv = l2_norm(divergence(A));
      CHECK(curl_energy(A) + dv * dv == doctest::Approx(dirichlet_energy(A)).epsilon(1e-12));
      CHECK(d_inner(A, B) == doctest::Approx(-inner(laplacian(A), B)).epsilon(1e-12));
      CHECK(d_norm(A) * d_norm(A) == doctest::Approx(d_inner(A, A)).epsilon(1e-12));
    }
  }

  TEST_CASE("inverse Laplacian and Leray projection")
  {
    Rng rng(4);
    const OneForm A = random_oneform(kGrid, rng);
    const ScalarField w = random_scalar(kGrid, rng);
    // -Lap x = -Lap w recovers w up to the kernel (constants and all-Nyquist modes).
    ScalarField rhs = laplacian(w);
    for (auto &v : rhs.values)
    {
      v = -v;
    }
    const ScalarField x = inverse_neg_laplacian(rhs);
    CHECK(l2_norm(sub(gradient(x), gradient(w))) <= 1e-12 * l2_norm(gradient(w)));
    const OneForm P = leray_project(A);
    CHECK(max_abs(divergence(P).values) <= 1e-12);
    CHECK(l2_norm(sub(leray_project(P), P)) <= 1e-13 * l2_norm(P));
  }

  TEST_CASE("symmetrization")
  {
    Rng rng(8);
    const OneForm A = random_oneform(kGrid, rng);
    for (auto group : {SymmetryGroup::cyclic, SymmetryGroup::dihedral})
    {
      const OneForm S1 = symmetrize_oneform(A, group);
      CHECK(equivariance_residual(S1, group) <= 1e-14);
      CHECK(l2_norm(sub(symmetrize_oneform(S1, group), S1)) <= 1e-14 * l2_norm(S1));
      // Orthogonal projection: the residual is orthogonal to the image.
      CHECK(std::abs(inner(sub(A, S1), S1)) <= 1e-12 * l2_norm(A) * l2_norm(S1));
      const ScalarField w = symmetrize_scalar(random_scalar(kGrid, rng), group);
      CHECK(invariance_residual(w, group) <= 1e-14);
    }
    CHECK(equivariance_residual(A) > 1e-3);
  }

  TEST_CASE("orbit table")
  {
    for (auto group : {SymmetryGroup::cyclic, SymmetryGroup::dihedral})
    {
      const auto &t = orbit_table(kGrid, group);
      std::size_t total = 0;
      for (int sz : t.size)
      {
        total += sz;
      }
      CHECK(total == kGrid.sites());
      for (int o = 0; o < t.count(); ++o)
      {
        CHECK(t.orbit_of[t.representative[o]] == o);
      }
      // Invariant fields are constant on orbits.
      Rng rng(2);
      const ScalarField w = symmetrize_scalar(random_scalar(kGrid, rng), group);
      double spread = 0.0;
      for (std::size_t s = 0; s < kGrid.sites(); ++s)
      {
        spread = std::max(spread, std::abs(w.values[s] - w.values[t.representative[t.orbit_of[s]]]));
      }
      CHECK(spread <= 1e-14);
    }
    // C4 x C4 on an 8^4 lattice: 18 orbits per block plane, 18^2 in total.
    CHECK(orbit_table(kGrid, SymmetryGroup::cyclic).count() == 324);
  }

  TEST_CASE("projection onto V")
  {
    Rng rng(13);
    const OneForm A = random_oneform(kGrid, rng);
    const OneForm P = project_to_v(A);
    CHECK(max_abs(divergence(P).values) <= 1e-12);
    CHECK(equivariance_residual(P) <= 1e-14);
    CHECK(l2_norm(sub(project_to_v(P), P)) <= 1e-13 * l2_norm(P));
    CHECK(l2_norm(sub(nyquist_filter(P), P)) <= 1e-13 * l2_norm(P));
    // A checkerboard in one component is removed entirely.
    OneForm cb(kGrid);
    for (std::size_t s = 0; s < kGrid.sites(); ++s)
    {
      cb.data[s] = (s % 2 == 0) ? 1.0 : -1.0;
    }
    CHECK(l2_norm(nyquist_filter(cb)) <= 1e-13);
  }

  TEST_CASE("seed form")
  {
    const OneForm seed = seed_form(kGrid, {{1.0, 1.0}, 3.0});
    CHECK(l2_norm(seed) > 1.0);
    CHECK(max_abs(divergence(seed).values) <= 1e-12);
    CHECK(equivariance_residual(seed) <= 1e-14);
    CHECK(l2_norm(sub(project_to_v(seed), seed)) <= 1e-13 * l2_norm(seed));
    // Rotational in each block: A_0 = -a x_1, A_1 = a x_0 near the origin.
    const std::size_t s = site_index(kGrid, {5, 4, 4, 4});  // x = (1, 0, 0, 0)
    CHECK(std::abs(seed.component(1)[s]) > 0.1);
    CHECK(std::abs(seed.component(0)[s]) < std::abs(seed.component(1)[s]));
    CHECK_THROWS_AS(seed_form(kGrid, {{1.0}, 3.0}), std::invalid_argument);
    CHECK_THROWS_AS(seed_form(kGrid, {{1.0, 1.0}, 4.0}), std::invalid_argument);
  }

  TEST_CASE("reflection average annihilates the rotational seed")
  {
    const OneForm seed = seed_form(kGrid, {{1.0, 1.0}, 3.0});
    const OneForm d = symmetrize_oneform(seed, SymmetryGroup::dihedral);
    CHECK(l2_norm(d) <= 1e-14 * l2_norm(seed));
  }

  TEST_CASE("field dump round trip")
  {
    Rng rng(1);
    const OneForm A = random_oneform(kGrid, rng);
    const std::string path = temp_path("roundtrip.bin");
    write_field(path, A);
    const FieldDump d = read_field(path);
    CHECK(d.grid == kGrid);
    CHECK(d.kind == "oneform");
    CHECK(d.components == 4);
    CHECK(d.data == A.data);
    const auto mags = magnitudes(d);
    const auto direct = magnitudes(A);
    CHECK(mags.values == direct.values);
    CHECK(mags.weight == direct.weight);
    std::filesystem::remove(path);
  }

  TEST_CASE("malformed dumps are rejected")
  {
    const GridSpec g{2, 2, 1.0};
    const std::string good = temp_path("good.bin");
    write_field(good, g, "scalar", 1, std::vector<double>{1.5, 0.5, 2.0, 0.1});
    CHECK_NOTHROW(read_field(good));
    std::string bytes;
    {
      std::ifstream is(good, std::ios::binary);
      bytes.assign(std::istreambuf_iterator<char>(is), {});
    }
    const auto write_bytes = [](const std::string &path, const std::string &b)
    {
      std::ofstream os(path, std::ios::binary);
      os << b;
    };
    const std::string bad = temp_path("bad.bin");
    write_bytes(bad, bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS_AS(read_field(bad), std::runtime_error);
    write_bytes(bad, bytes + "x");
    CHECK_THROWS_AS(read_field(bad), std::runtime_error);
    write_bytes(bad, "not json\n");
    CHECK_THROWS_AS(read_field(bad), std::runtime_error);
    write_bytes(bad, "{\"n\":2,\"m\":2,\"L\":1.0,\"kind\":\"vector\",\"components\":1}\n");
    CHECK_THROWS_AS(read_field(bad), std::runtime_error);
    write_bytes(bad, "{\"n\":2,\"m\":3,\"L\":1.0,\"kind\":\"scalar\",\"components\":1}\n");
    CHECK_THROWS_AS(read_field(bad), std::runtime_error);
    std::string nan_bytes = bytes;
    const double nan = std::nan("");
    nan_bytes.replace(nan_bytes.size() - 8, 8, reinterpret_cast<const char *>(&nan), 8);
    write_bytes(bad, nan_bytes);
    CHECK_THROWS_AS(read_field(bad), std::runtime_error);
    CHECK_THROWS_AS(read_field(temp_path("does_not_exist.bin")), std::runtime_error);
    std::filesystem::remove(good);
    std::filesystem::remove(bad);
  }
}
