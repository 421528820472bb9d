#include "smaxwell/fields.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "spectral.hpp"

namespace smaxwell
{

using detail::cplx;
using detail::SpectralLayout;

void GridSpec::validate() const
{
  if (n < 2 || n % 2 != 0)
  {
    throw std::invalid_argument("GridSpec: n must be even and >= 2");
  }
  if (m < 2 || m % 2 != 0)
  {
    throw std::invalid_argument("GridSpec: m must be even and >= 2");
  }
  if (!(L > 0.0) || !std::isfinite(L))
  {
    throw std::invalid_argument("GridSpec: L must be positive");
  }
}

double GridSpec::cell_volume() const { return std::pow(h(), n); }

std::size_t GridSpec::sites() const
{
  std::size_t s = 1;
  for (int i = 0; i < n; ++i)
  {
    s *= static_cast<std::size_t>(m);
  }
  return s;
}

ScalarField::ScalarField(const GridSpec &g) : grid(g), values(g.sites(), 0.0) {}

OneForm::OneForm(const GridSpec &g) : grid(g), data(g.sites() * g.n, 0.0) {}

std::span<double> OneForm::component(int i)
{
  const std::size_t S = grid.sites();
  return {data.data() + i * S, S};
}

std::span<const double> OneForm::component(int i) const
{
  const std::size_t S = grid.sites();
  return {data.data() + i * S, S};
}

TwoForm::TwoForm(const GridSpec &g) : grid(g), data(g.sites() * (g.n * (g.n - 1) / 2), 0.0) {}

int TwoForm::pair_index(int n, int i, int j)
{
  // Rows i = 0..n-2 hold n-1-i entries each.
  return i * (2 * n - i - 1) / 2 + (j - i - 1);
}

std::span<double> TwoForm::component(int i, int j)
{
  const std::size_t S = grid.sites();
  return {data.data() + pair_index(grid.n, i, j) * S, S};
}

std::span<const double> TwoForm::component(int i, int j) const
{
  const std::size_t S = grid.sites();
  return {data.data() + pair_index(grid.n, i, j) * S, S};
}

namespace
{

double raw_dot(std::span<const double> a, std::span<const double> b)
{
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
  {
    s += a[i] * b[i];
  }
  return s;
}

void require_same(const GridSpec &a, const GridSpec &b)
{
  if (!(a == b))
  {
    throw std::invalid_argument("fields: grid mismatch");
  }
}

}  // namespace

double inner(const ScalarField &a, const ScalarField &b)
{
  require_same(a.grid, b.grid);
  return a.grid.cell_volume() * raw_dot(a.values, b.values);
}

double inner(const OneForm &a, const OneForm &b)
{
  require_same(a.grid, b.grid);
  return a.grid.cell_volume() * raw_dot(a.data, b.data);
}

double l2_norm(const ScalarField &a) { return std::sqrt(inner(a, a)); }
double l2_norm(const OneForm &a) { return std::sqrt(inner(a, a)); }
double l2_norm(const TwoForm &a)
{
  return std::sqrt(a.grid.cell_volume() * raw_dot(a.data, a.data));
}

double max_abs(std::span<const double> v)
{
  double r = 0.0;
  for (double x : v)
  {
    r = std::max(r, std::abs(x));
  }
  return r;
}

void axpy(double alpha, const OneForm &x, OneForm &y)
{
  require_same(x.grid, y.grid);
  for (std::size_t i = 0; i < y.data.size(); ++i)
  {
    y.data[i] += alpha * x.data[i];
  }
}

void axpy(double alpha, const ScalarField &x, ScalarField &y)
{
  require_same(x.grid, y.grid);
  for (std::size_t i = 0; i < y.values.size(); ++i)
  {
    y.values[i] += alpha * x.values[i];
  }
}

OneForm scaled(const OneForm &x, double alpha)
{
  OneForm r = x;
  for (auto &v : r.data)
  {
    v *= alpha;
  }
  return r;
}

OneForm add(const OneForm &x, const OneForm &y)
{
  OneForm r = y;
  axpy(1.0, x, r);
  return r;
}

OneForm sub(const OneForm &x, const OneForm &y)
{
  OneForm r = x;
  axpy(-1.0, y, r);
  return r;
}

SampledMagnitudes magnitudes(const OneForm &A)
{
  const std::size_t S = A.grid.sites();
  SampledMagnitudes out{std::vector<double>(S, 0.0), A.grid.cell_volume()};
  for (int i = 0; i < A.grid.n; ++i)
  {
    auto c = A.component(i);
    for (std::size_t s = 0; s < S; ++s)
    {
      out.values[s] += c[s] * c[s];
    }
  }
  for (auto &v : out.values)
  {
    v = std::sqrt(v);
  }
  return out;
}

SampledMagnitudes magnitudes(const ScalarField &w)
{
  SampledMagnitudes out{std::vector<double>(w.values.size()), w.grid.cell_volume()};
  for (std::size_t s = 0; s < w.values.size(); ++s)
  {
    out.values[s] = std::abs(w.values[s]);
  }
  return out;
}

ScalarField random_scalar(const GridSpec &g, Rng &rng)
{
  ScalarField w(g);
  for (auto &v : w.values)
  {
    v = rng.uniform(-1.0, 1.0);
  }
  return w;
}

OneForm random_oneform(const GridSpec &g, Rng &rng)
{
  OneForm A(g);
  for (auto &v : A.data)
  {
    v = rng.uniform(-1.0, 1.0);
  }
  return A;
}

// --- spectral calculus ----------------------------------------------------------------

namespace
{

const cplx I(0.0, 1.0);

}  // namespace

OneForm gradient(const ScalarField &w)
{
  w.grid.validate();
  const auto &lay = detail::layout(w.grid);
  const std::size_t S = lay.spec_size;
  std::vector<cplx> hat(S), buf(S);
  detail::forward(lay, w.values.data(), hat.data());
  OneForm out(w.grid);
  for (int a = 0; a < w.grid.n; ++a)
  {
    for (std::size_t k = 0; k < S; ++k)
    {
      buf[k] = I * lay.wave(a, k) * hat[k];
    }
    detail::inverse(lay, buf.data(), out.component(a).data());
  }
  return out;
}

ScalarField divergence(const OneForm &A)
{
  A.grid.validate();
  const auto &lay = detail::layout(A.grid);
  const std::size_t S = lay.spec_size;
  std::vector<cplx> hat(S), acc(S, cplx(0.0, 0.0));
  for (int a = 0; a < A.grid.n; ++a)
  {
    detail::forward(lay, A.component(a).data(), hat.data());
    for (std::size_t k = 0; k < S; ++k)
    {
      acc[k] += I * lay.wave(a, k) * hat[k];
    }
  }
  ScalarField out(A.grid);
  detail::inverse(lay, acc.data(), out.values.data());
  return out;
}

TwoForm exterior_derivative(const OneForm &A)
{
  A.grid.validate();
  const auto &lay = detail::layout(A.grid);
  const std::size_t S = lay.spec_size;
  const int n = A.grid.n;
  auto hat = detail::forward_components(lay, A.data.data(), n);
  TwoForm out(A.grid);
  std::vector<cplx> buf(S);
  for (int i = 0; i < n; ++i)
  {
    for (int j = i + 1; j < n; ++j)
    {
      for (std::size_t k = 0; k < S; ++k)
      {
        buf[k] = I * (lay.wave(i, k) * hat[j * S + k] - lay.wave(j, k) * hat[i * S + k]);
      }
      detail::inverse(lay, buf.data(), out.component(i, j).data());
    }
  }
  return out;
}

ScalarField codifferential(const OneForm &A)
{
  ScalarField d = divergence(A);
  for (auto &v : d.values)
  {
    v = -v;
  }
  return d;
}

OneForm codifferential(const TwoForm &F)
{
  F.grid.validate();
  const auto &lay = detail::layout(F.grid);
  const std::size_t S = lay.spec_size;
  const int n = F.grid.n;
  const int pairs = n * (n - 1) / 2;
  auto hat = detail::forward_components(lay, F.data.data(), pairs);
  OneForm out(F.grid);
  std::vector<cplx> buf(S);
  for (int j = 0; j < n; ++j)
  {
    std::fill(buf.begin(), buf.end(), cplx(0.0, 0.0));
    for (int i = 0; i < n; ++i)
    {
      if (i == j)
      {
        continue;
      }
      // F_ij = -F_ji for the stored i < j entries.
      const double sign = i < j ? 1.0 : -1.0;
      const int pi = i < j ? TwoForm::pair_index(n, i, j) : TwoForm::pair_index(n, j, i);
      for (std::size_t k = 0; k < S; ++k)
      {
        buf[k] -= sign * I * lay.wave(i, k) * hat[pi * S + k];
      }
    }
    detail::inverse(lay, buf.data(), out.component(j).data());
  }
  return out;
}

ScalarField laplacian(const ScalarField &w)
{
  w.grid.validate();
  const auto &lay = detail::layout(w.grid);
  const std::size_t S = lay.spec_size;
  std::vector<cplx> hat(S);
  detail::forward(lay, w.values.data(), hat.data());
  for (std::size_t k = 0; k < S; ++k)
  {
    hat[k] *= -lay.k2[k];
  }
  ScalarField out(w.grid);
  detail::inverse(lay, hat.data(), out.values.data());
  return out;
}

OneForm laplacian(const OneForm &A)
{
  A.grid.validate();
  const auto &lay = detail::layout(A.grid);
  const std::size_t S = lay.spec_size;
  std::vector<cplx> hat(S);
  OneForm out(A.grid);
  for (int a = 0; a < A.grid.n; ++a)
  {
    detail::forward(lay, A.component(a).data(), hat.data());
    for (std::size_t k = 0; k < S; ++k)
    {
      hat[k] *= -lay.k2[k];
    }
    detail::inverse(lay, hat.data(), out.component(a).data());
  }
  return out;
}

namespace
{

struct EnergyParts
{
  double curl = 0.0;
  double dirichlet = 0.0;
  double div = 0.0;
};

// Parseval sums over the half spectrum.
EnergyParts spectral_energies(const OneForm &A)
{
  A.grid.validate();
  const auto &lay = detail::layout(A.grid);
  const std::size_t S = lay.spec_size;
  const int n = A.grid.n;
  auto hat = detail::forward_components(lay, A.data.data(), n);
  EnergyParts e;
  for (std::size_t k = 0; k < S; ++k)
  {
    double amp2 = 0.0, curl = 0.0;
    cplx div(0.0, 0.0);
    for (int i = 0; i < n; ++i)
    {
      const cplx ai = hat[i * S + k];
      amp2 += std::norm(ai);
      div += lay.wave(i, k) * ai;
      for (int j = i + 1; j < n; ++j)
      {
        curl += std::norm(lay.wave(i, k) * hat[j * S + k] - lay.wave(j, k) * ai);
      }
    }
    e.dirichlet += lay.mult[k] * lay.k2[k] * amp2;
    e.curl += lay.mult[k] * curl;
    e.div += lay.mult[k] * std::norm(div);
  }
  const double scale = A.grid.cell_volume() / static_cast<double>(lay.real_size);
  e.curl *= scale;
  e.dirichlet *= scale;
  e.div *= scale;
  return e;
}

}  // namespace

double curl_energy(const OneForm &A) { return spectral_energies(A).curl; }

double dirichlet_energy(const OneForm &A) { return spectral_energies(A).dirichlet; }

double d_norm(const OneForm &u)
{
  const auto e = spectral_energies(u);
  return std::sqrt(e.curl + e.div);
}

double d_inner(const OneForm &a, const OneForm &b) { return -inner(laplacian(a), b); }

HodgeSplit hodge_split(const OneForm &A)
{
  A.grid.validate();
  const auto &lay = detail::layout(A.grid);
  const std::size_t S = lay.spec_size;
  const int n = A.grid.n;
  auto hat = detail::forward_components(lay, A.data.data(), n);
  std::vector<cplx> what(S, cplx(0.0, 0.0));
  for (std::size_t k = 0; k < S; ++k)
  {
    if (lay.k2[k] <= 0.0)
    {
      continue;
    }
    cplx div(0.0, 0.0);
    for (int i = 0; i < n; ++i)
    {
      div += I * lay.wave(i, k) * hat[i * S + k];
    }
    what[k] = -div / lay.k2[k];
  }
  HodgeSplit out{OneForm(A.grid), ScalarField(A.grid)};
  std::vector<cplx> buf(S);
  for (int i = 0; i < n; ++i)
  {
    for (std::size_t k = 0; k < S; ++k)
    {
      buf[k] = I * lay.wave(i, k) * what[k];
    }
    auto ui = out.u.component(i);
    detail::inverse(lay, buf.data(), ui.data());
    auto ai = A.component(i);
    for (std::size_t s = 0; s < ui.size(); ++s)
    {
      ui[s] = ai[s] - ui[s];
    }
  }
  buf = what;
  detail::inverse(lay, buf.data(), out.w.values.data());
  return out;
}

OneForm leray_project(const OneForm &A) { return hodge_split(A).u; }

ScalarField inverse_neg_laplacian(const ScalarField &g)
{
  g.grid.validate();
  const auto &lay = detail::layout(g.grid);
  const std::size_t S = lay.spec_size;
  std::vector<cplx> hat(S);
  detail::forward(lay, g.values.data(), hat.data());
  for (std::size_t k = 0; k < S; ++k)
  {
    hat[k] = lay.k2[k] > 0.0 ? hat[k] / lay.k2[k] : cplx(0.0, 0.0);
  }
  ScalarField out(g.grid);
  detail::inverse(lay, hat.data(), out.values.data());
  return out;
}

OneForm inverse_neg_laplacian(const OneForm &g)
{
  g.grid.validate();
  const auto &lay = detail::layout(g.grid);
  const std::size_t S = lay.spec_size;
  std::vector<cplx> hat(S);
  OneForm out(g.grid);
  for (int a = 0; a < g.grid.n; ++a)
  {
    detail::forward(lay, g.component(a).data(), hat.data());
    for (std::size_t k = 0; k < S; ++k)
    {
      hat[k] = lay.k2[k] > 0.0 ? hat[k] / lay.k2[k] : cplx(0.0, 0.0);
    }
    detail::inverse(lay, hat.data(), out.component(a).data());
  }
  return out;
}

double laplace_beltrami_residual(const OneForm &A)
{
  OneForm lhs = gradient(codifferential(A));
  axpy(1.0, codifferential(exterior_derivative(A)), lhs);
  axpy(1.0, laplacian(A), lhs);
  return max_abs(lhs.data);
}

// --- lattice symmetries ----------------------------------------------------------------

namespace
{

using Mat2 = std::array<int, 4>;  // row-major {m00, m01, m10, m11}

// Dihedral group of the square: rotations R^k and R^k S with S = diag(1, -1).
std::array<Mat2, 8> group_table()
{
  const Mat2 rot = {0, -1, 1, 0};
  const Mat2 refl = {1, 0, 0, -1};
  auto mul = [](const Mat2 &x, const Mat2 &y)
  {
    return Mat2{x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3],
                x[2] * y[0] + x[3] * y[2], x[2] * y[1] + x[3] * y[3]};
  };
  std::array<Mat2, 8> out;
  Mat2 r = {1, 0, 0, 1};
  for (int k = 0; k < 4; ++k)
  {
    out[k] = r;
    out[k + 4] = mul(r, refl);
    r = mul(rot, r);
  }
  return out;
}

struct BlockGeometry
{
  std::size_t stride0, stride1;
  int axis0, axis1;
};

BlockGeometry block_geometry(const GridSpec &g, int block)
{
  BlockGeometry bg{};
  bg.axis0 = 2 * block;
  bg.axis1 = 2 * block + 1;
  std::size_t stride = 1;
  for (int a = g.n - 1; a >= 0; --a)
  {
    if (a == bg.axis0)
    {
      bg.stride0 = stride;
    }
    if (a == bg.axis1)
    {
      bg.stride1 = stride;
    }
    stride *= static_cast<std::size_t>(g.m);
  }
  return bg;
}

// Index of g x for every site x.
std::vector<std::size_t> build_site_map(const GridSpec &g, const BlockGeometry &bg, const Mat2 &M)
{
  const std::size_t S = g.sites();
  const int m = g.m, half = g.m / 2;
  std::vector<std::size_t> map(S);
  for (std::size_t s = 0; s < S; ++s)
  {
    const int j0 = static_cast<int>((s / bg.stride0) % m);
    const int j1 = static_cast<int>((s / bg.stride1) % m);
    const int c0 = j0 - half, c1 = j1 - half;
    const int d0 = M[0] * c0 + M[1] * c1;
    const int d1 = M[2] * c0 + M[3] * c1;
    const int k0 = ((d0 + half) % m + m) % m;
    const int k1 = ((d1 + half) % m + m) % m;
    map[s] = s + (static_cast<std::ptrdiff_t>(k0) - j0) * static_cast<std::ptrdiff_t>(bg.stride0) +
             (static_cast<std::ptrdiff_t>(k1) - j1) * static_cast<std::ptrdiff_t>(bg.stride1);
  }
  return map;
}

// Site maps of all eight group elements for every block, cached per lattice shape.
const std::vector<std::size_t> &site_map(const GridSpec &g, int block, int element)
{
  static std::mutex mtx;
  static std::map<std::pair<int, int>, std::vector<std::vector<std::size_t>>> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto key = std::make_pair(g.n, g.m);
  auto it = cache.find(key);
  if (it == cache.end())
  {
    const auto table = group_table();
    std::vector<std::vector<std::size_t>> maps;
    for (int b = 0; b < g.n / 2; ++b)
    {
      const auto bg = block_geometry(g, b);
      for (const auto &M : table)
      {
        maps.push_back(build_site_map(g, bg, M));
      }
    }
    it = cache.emplace(key, std::move(maps)).first;
  }
  return it->second[block * 8 + element];
}

void require_even_grid(const GridSpec &g)
{
  g.validate();
}

int group_order(SymmetryGroup group) { return group == SymmetryGroup::cyclic ? 4 : 8; }

// Indices into group_table(): rotation by pi/2, then the reflection.
std::vector<int> generators(SymmetryGroup group)
{
  if (group == SymmetryGroup::cyclic)
  {
    return {1};
  }
  return {1, 4};
}

}  // namespace

OneForm symmetrize_oneform(const OneForm &A, SymmetryGroup which)
{
  require_even_grid(A.grid);
  const auto table = group_table();
  const int order = group_order(which);
  const std::size_t S = A.grid.sites();
  const int n = A.grid.n;
  OneForm cur = A;
  for (int b = 0; b < n / 2; ++b)
  {
    const auto bg = block_geometry(A.grid, b);
    OneForm next(A.grid);
    for (int e = 0; e < order; ++e)
    {
      const Mat2 &M = table[e];
      const auto &map = site_map(A.grid, b, e);
      for (int c = 0; c < n; ++c)
      {
        auto dst = next.component(c);
        if (c == bg.axis0 || c == bg.axis1)
        {
          // (M^T A(gx))_r = sum_s M[s][r] A_s(gx)
          const int r = c - bg.axis0;
          auto a0 = cur.component(bg.axis0);
          auto a1 = cur.component(bg.axis1);
          const double w0 = M[0 * 2 + r], w1 = M[1 * 2 + r];
          for (std::size_t s = 0; s < S; ++s)
          {
            dst[s] += w0 * a0[map[s]] + w1 * a1[map[s]];
          }
        }
        else
        {
          auto src = cur.component(c);
          for (std::size_t s = 0; s < S; ++s)
          {
            dst[s] += src[map[s]];
          }
        }
      }
    }
    for (auto &v : next.data)
    {
      v /= order;
    }
    cur = std::move(next);
  }
  return cur;
}

ScalarField symmetrize_scalar(const ScalarField &w, SymmetryGroup which)
{
  require_even_grid(w.grid);
  const int order = group_order(which);
  const std::size_t S = w.grid.sites();
  ScalarField cur = w;
  for (int b = 0; b < w.grid.n / 2; ++b)
  {
    ScalarField next(w.grid);
    for (int e = 0; e < order; ++e)
    {
      const auto &map = site_map(w.grid, b, e);
      for (std::size_t s = 0; s < S; ++s)
      {
        next.values[s] += cur.values[map[s]];
      }
    }
    for (auto &v : next.values)
    {
      v /= order;
    }
    cur = std::move(next);
  }
  return cur;
}

double equivariance_residual(const OneForm &A, SymmetryGroup which)
{
  require_even_grid(A.grid);
  const auto gens = generators(which);
  const auto table = group_table();
  const std::size_t S = A.grid.sites();
  const int n = A.grid.n;
  double res = 0.0;
  for (int b = 0; b < n / 2; ++b)
  {
    const auto bg = block_geometry(A.grid, b);
    for (int e : gens)
    {
      const Mat2 &M = table[e];
      const auto &map = site_map(A.grid, b, e);
      auto a0 = A.component(bg.axis0);
      auto a1 = A.component(bg.axis1);
      for (std::size_t s = 0; s < S; ++s)
      {
        const double g0 = M[0] * a0[s] + M[1] * a1[s];
        const double g1 = M[2] * a0[s] + M[3] * a1[s];
        res = std::max({res, std::abs(a0[map[s]] - g0), std::abs(a1[map[s]] - g1)});
      }
      for (int c = 0; c < n; ++c)
      {
        if (c == bg.axis0 || c == bg.axis1)
        {
          continue;
        }
        auto ac = A.component(c);
        for (std::size_t s = 0; s < S; ++s)
        {
          res = std::max(res, std::abs(ac[map[s]] - ac[s]));
        }
      }
    }
  }
  return res;
}

double invariance_residual(const ScalarField &w, SymmetryGroup which)
{
  require_even_grid(w.grid);
  const auto gens = generators(which);
  double res = 0.0;
  for (int b = 0; b < w.grid.n / 2; ++b)
  {
    for (int e : gens)
    {
      const auto &map = site_map(w.grid, b, e);
      for (std::size_t s = 0; s < w.values.size(); ++s)
      {
        res = std::max(res, std::abs(w.values[map[s]] - w.values[s]));
      }
    }
  }
  return res;
}

namespace
{

std::vector<char> non_nyquist_modes(const SpectralLayout &lay)
{
  const int m = lay.grid.m;
  std::vector<char> keep(lay.spec_size, 1);
  for (std::size_t idx = 0; idx < lay.spec_size; ++idx)
  {
    std::size_t rest = idx;
    if (static_cast<int>(rest % (m / 2 + 1)) == m / 2)
    {
      keep[idx] = 0;
    }
    rest /= (m / 2 + 1);
    for (int a = 0; a + 1 < lay.grid.n; ++a)
    {
      if (static_cast<int>(rest % m) == m / 2)
      {
        keep[idx] = 0;
      }
      rest /= m;
    }
  }
  return keep;
}

void filter_component(const SpectralLayout &lay, const std::vector<char> &keep, const double *in,
                      double *out)
{
  std::vector<cplx> hat(lay.spec_size);
  detail::forward(lay, in, hat.data());
  for (std::size_t k = 0; k < lay.spec_size; ++k)
  {
    if (!keep[k])
    {
      hat[k] = cplx(0.0, 0.0);
    }
  }
  detail::inverse(lay, hat.data(), out);
}

}  // namespace

OneForm nyquist_filter(const OneForm &A)
{
  A.grid.validate();
  const auto &lay = detail::layout(A.grid);
  const auto keep = non_nyquist_modes(lay);
  OneForm out(A.grid);
  for (int a = 0; a < A.grid.n; ++a)
  {
    filter_component(lay, keep, A.component(a).data(), out.component(a).data());
  }
  return out;
}

ScalarField nyquist_filter(const ScalarField &w)
{
  w.grid.validate();
  const auto &lay = detail::layout(w.grid);
  ScalarField out(w.grid);
  filter_component(lay, non_nyquist_modes(lay), w.values.data(), out.values.data());
  return out;
}

const OrbitTable &orbit_table(const GridSpec &g, SymmetryGroup group)
{
  g.validate();
  static std::mutex mtx;
  static std::map<std::tuple<int, int, int>, OrbitTable> cache;
  const auto key = std::make_tuple(g.n, g.m, static_cast<int>(group));
  {
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(key);
    if (it != cache.end())
    {
      return it->second;
    }
  }
  const std::size_t S = g.sites();
  // Union-find over the generator maps.
  std::vector<std::size_t> parent(S);
  for (std::size_t s = 0; s < S; ++s)
  {
    parent[s] = s;
  }
  auto find = [&](std::size_t x)
  {
    while (parent[x] != x)
    {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (int b = 0; b < g.n / 2; ++b)
  {
    for (int e : generators(group))
    {
      const auto &map = site_map(g, b, e);
      for (std::size_t s = 0; s < S; ++s)
      {
        const std::size_t ra = find(s), rb = find(map[s]);
        if (ra != rb)
        {
          parent[std::max(ra, rb)] = std::min(ra, rb);
        }
      }
    }
  }
  OrbitTable table;
  table.orbit_of.assign(S, -1);
  std::map<std::size_t, int> root_index;
  for (std::size_t s = 0; s < S; ++s)
  {
    const std::size_t r = find(s);
    auto it = root_index.find(r);
    if (it == root_index.end())
    {
      it = root_index.emplace(r, table.count()).first;
      table.size.push_back(0);
      table.representative.push_back(s);
    }
    table.orbit_of[s] = it->second;
    ++table.size[it->second];
  }
  std::lock_guard<std::mutex> lock(mtx);
  return cache.emplace(key, std::move(table)).first->second;
}

OneForm project_to_v(const OneForm &A, SymmetryGroup group)
{
  return symmetrize_oneform(leray_project(nyquist_filter(A)), group);
}

OneForm seed_form(const GridSpec &g, const SeedProfile &profile, SymmetryGroup group)
{
  g.validate();
  const int blocks = g.n / 2;
  if (static_cast<int>(profile.amplitudes.size()) != blocks)
  {
    throw std::invalid_argument("seed_form: need one amplitude per coordinate block");
  }
  if (!(profile.radius > 0.0))
  {
    throw std::invalid_argument("seed_form: radius must be positive");
  }
  if (profile.radius >= g.L)
  {
    throw std::invalid_argument("seed_form: bump support touches the box boundary");
  }
  const std::size_t S = g.sites();
  const int m = g.m;
  OneForm A(g);
  std::vector<double> x(g.n);
  for (std::size_t s = 0; s < S; ++s)
  {
    std::size_t rest = s;
    for (int a = g.n - 1; a >= 0; --a)
    {
      x[a] = g.coord(static_cast<int>(rest % m));
      rest /= m;
    }
    double bump = 1.0;
    for (int b = 0; b < blocks; ++b)
    {
      const double r = std::hypot(x[2 * b], x[2 * b + 1]) / profile.radius;
      bump *= r < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r * r)) : 0.0;
    }
    for (int b = 0; b < blocks; ++b)
    {
      const double a = profile.amplitudes[b] * bump;
      A.component(2 * b)[s] = -a * x[2 * b + 1];
      A.component(2 * b + 1)[s] = a * x[2 * b];
    }
  }
  return project_to_v(A, group);
}

}  // namespace smaxwell
