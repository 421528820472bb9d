#ifndef SMAXWELL_SRC_SPECTRAL_HPP
#define SMAXWELL_SRC_SPECTRAL_HPP

#include <complex>
#include <memory>
#include <vector>

#include "smaxwell/fields.hpp"

namespace smaxwell::detail
{

using cplx = std::complex<double>;

// Half-spectrum of a real transform: dims m x ... x m x (m/2 + 1).
struct SpectralLayout
{
  GridSpec grid;
  std::size_t real_size = 0;
  std::size_t spec_size = 0;
  // k[a * spec_size + idx]: wavenumber along axis a, Nyquist set to zero.
  std::vector<double> k;
  // |k|^2 of the same symbol.
  std::vector<double> k2;
  // Parseval multiplicity of each stored mode (1 or 2).
  std::vector<double> mult;
  void *plan_forward = nullptr;
  void *plan_inverse = nullptr;

  double wave(int axis, std::size_t idx) const { return k[axis * spec_size + idx]; }
};

const SpectralLayout &layout(const GridSpec &g);

void forward(const SpectralLayout &lay, const double *in, cplx *out);
// Destroys `in`; output is normalized.
void inverse(const SpectralLayout &lay, cplx *in, double *out);

// Transforms of every component of a one-form, stored component-major.
std::vector<cplx> forward_components(const SpectralLayout &lay, const double *data, int count);

}  // namespace smaxwell::detail

#endif  // SMAXWELL_SRC_SPECTRAL_HPP
