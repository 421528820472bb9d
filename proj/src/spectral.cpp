#include "spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

namespace smaxwell::detail
{

namespace
{

std::mutex &planner_mutex()
{
  static std::mutex mtx;
  return mtx;
}

std::unique_ptr<SpectralLayout> build_layout(const GridSpec &g)
{
  auto lay = std::make_unique<SpectralLayout>();
  lay->grid = g;
  const int n = g.n, m = g.m;
  lay->real_size = g.sites();
  lay->spec_size = lay->real_size / m * (m / 2 + 1);
  const std::size_t S = lay->spec_size;
  lay->k.assign(static_cast<std::size_t>(n) * S, 0.0);
  lay->k2.assign(S, 0.0);
  lay->mult.assign(S, 1.0);
  const double base = std::numbers::pi / g.L;
  for (std::size_t idx = 0; idx < S; ++idx)
  {
    std::size_t rest = idx;
    const int last = static_cast<int>(rest % (m / 2 + 1));
    rest /= (m / 2 + 1);
    lay->mult[idx] = (last == 0 || last == m / 2) ? 1.0 : 2.0;
    for (int a = n - 1; a >= 0; --a)
    {
      int j;
      if (a == n - 1)
      {
        j = last;
      }
      else
      {
        j = static_cast<int>(rest % m);
        rest /= m;
      }
      int kk = j <= m / 2 ? j : j - m;
      if (kk == m / 2 || kk == -m / 2)
      {
        kk = 0;
      }
      const double kv = base * kk;
      lay->k[a * S + idx] = kv;
      lay->k2[idx] += kv * kv;
    }
  }

  std::vector<int> dims(n, m);
  std::vector<double> rbuf(lay->real_size);
  std::vector<fftw_complex> cbuf(S);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  lay->plan_forward = fftw_plan_dft_r2c(n, dims.data(), rbuf.data(), cbuf.data(), flags);
  lay->plan_inverse = fftw_plan_dft_c2r(n, dims.data(), cbuf.data(), rbuf.data(), flags);
  return lay;
}

}  // namespace

const SpectralLayout &layout(const GridSpec &g)
{
  static std::map<std::tuple<int, int, double>, std::unique_ptr<SpectralLayout>> cache;
  std::lock_guard<std::mutex> lock(planner_mutex());
  const auto key = std::make_tuple(g.n, g.m, g.L);
  auto it = cache.find(key);
  if (it == cache.end())
  {
    it = cache.emplace(key, build_layout(g)).first;
  }
  return *it->second;
}

void forward(const SpectralLayout &lay, const double *in, cplx *out)
{
  fftw_execute_dft_r2c(static_cast<fftw_plan>(lay.plan_forward), const_cast<double *>(in),
                       reinterpret_cast<fftw_complex *>(out));
}

void inverse(const SpectralLayout &lay, cplx *in, double *out)
{
  fftw_execute_dft_c2r(static_cast<fftw_plan>(lay.plan_inverse),
                       reinterpret_cast<fftw_complex *>(in), out);
  const double scale = 1.0 / static_cast<double>(lay.real_size);
  for (std::size_t i = 0; i < lay.real_size; ++i)
  {
    out[i] *= scale;
  }
}

std::vector<cplx> forward_components(const SpectralLayout &lay, const double *data, int count)
{
  std::vector<cplx> spec(static_cast<std::size_t>(count) * lay.spec_size);
  for (int c = 0; c < count; ++c)
  {
    forward(lay, data + c * lay.real_size, spec.data() + c * lay.spec_size);
  }
  return spec;
}

}  // namespace smaxwell::detail
