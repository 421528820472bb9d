#ifndef SMAXWELL_RNG_HPP
#define SMAXWELL_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace smaxwell
{

// SplitMix64 finalizer; used to derive independent per-shard seeds.
inline std::uint64_t mix_seed(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

//
// Portable sampling on top of std::mt19937_64. The standard distributions are
// implementation-defined, so every variate is derived from raw 64-bit draws here to keep
// reports byte-identical across toolchains.
//
class Rng
{
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double log_uniform(double lo, double hi)
  {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }

  // Box-Muller; the second variate is discarded so the stream position depends only on
  // the number of calls.
  double normal()
  {
    double u1 = uniform();
    while (u1 <= 0.0)
    {
      u1 = uniform();
    }
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::vector<double> unit_vector(int dim)
  {
    std::vector<double> v(dim);
    double norm2 = 0.0;
    do
    {
      norm2 = 0.0;
      for (auto &x : v)
      {
        x = normal();
        norm2 += x * x;
      }
    } while (norm2 < 1e-24);
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto &x : v)
    {
      x *= inv;
    }
    return v;
  }

private:
  std::mt19937_64 engine_;
};

}  // namespace smaxwell

#endif  // SMAXWELL_RNG_HPP
