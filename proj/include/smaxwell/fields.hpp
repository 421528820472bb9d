#ifndef SMAXWELL_FIELDS_HPP
#define SMAXWELL_FIELDS_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "smaxwell/orlicz.hpp"
#include "smaxwell/rng.hpp"

namespace smaxwell
{

//
// Periodic box [-L, L)^n with m sites per axis. Site j on an axis sits at (j - m/2) h,
// so the lattice is closed under negation and under the pi/2 block rotations.
// Sites are stored row-major with axis 0 slowest.
//
struct GridSpec
{
  int n = 4;
  int m = 8;
  double L = 4.0;

  void validate() const;  // n even >= 2, m even >= 2, L > 0
  double h() const { return 2.0 * L / m; }
  double cell_volume() const;
  std::size_t sites() const;
  double coord(int j) const { return (j - m / 2) * h(); }
  bool operator==(const GridSpec &other) const = default;
};

struct ScalarField
{
  GridSpec grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const GridSpec &g);
};

// Components stored one after another: data[i * sites + site].
struct OneForm
{
  GridSpec grid;
  std::vector<double> data;

  OneForm() = default;
  explicit OneForm(const GridSpec &g);

  std::span<double> component(int i);
  std::span<const double> component(int i) const;
};

// Components (i, j) with i < j in lexicographic order.
struct TwoForm
{
  GridSpec grid;
  std::vector<double> data;

  TwoForm() = default;
  explicit TwoForm(const GridSpec &g);

  static int pair_index(int n, int i, int j);
  std::span<double> component(int i, int j);
  std::span<const double> component(int i, int j) const;
};

// L2 pairings with quadrature weight h^n.
double inner(const ScalarField &a, const ScalarField &b);
double inner(const OneForm &a, const OneForm &b);
double l2_norm(const ScalarField &a);
double l2_norm(const OneForm &a);
double l2_norm(const TwoForm &a);
double max_abs(std::span<const double> v);

// y += alpha x
void axpy(double alpha, const OneForm &x, OneForm &y);
void axpy(double alpha, const ScalarField &x, ScalarField &y);
OneForm scaled(const OneForm &x, double alpha);
OneForm add(const OneForm &x, const OneForm &y);
OneForm sub(const OneForm &x, const OneForm &y);

// Pointwise |A(x)| with the cell volume as quadrature weight.
SampledMagnitudes magnitudes(const OneForm &A);
SampledMagnitudes magnitudes(const ScalarField &w);

ScalarField random_scalar(const GridSpec &g, Rng &rng);
OneForm random_oneform(const GridSpec &g, Rng &rng);

// Spectral calculus. First derivatives drop the Nyquist wavenumber; the Laplacian is
// div(grad), so every identity below holds to rounding.
OneForm gradient(const ScalarField &w);
ScalarField divergence(const OneForm &A);
TwoForm exterior_derivative(const OneForm &A);
// delta on 1-forms is -div; on 2-forms (delta F)_j = -sum_i d_i F_ij.
ScalarField codifferential(const OneForm &A);
OneForm codifferential(const TwoForm &F);
ScalarField laplacian(const ScalarField &w);
OneForm laplacian(const OneForm &A);

double curl_energy(const OneForm &A);      // sum_{i<j} |d_i A_j - d_j A_i|^2
double dirichlet_energy(const OneForm &A); // sum_{i,j} |d_i A_j|^2
double d_norm(const OneForm &u);           // sqrt(curl_energy + |div u|^2)
// Polarization of the Dirichlet energy: <-Lap a, b>.
double d_inner(const OneForm &a, const OneForm &b);

struct HodgeSplit
{
  OneForm u;
  ScalarField w;
};
HodgeSplit hodge_split(const OneForm &A);
OneForm leray_project(const OneForm &A);

// Solves -Lap x = g on the modes where the symbol is nonzero; other modes are zeroed.
ScalarField inverse_neg_laplacian(const ScalarField &g);
OneForm inverse_neg_laplacian(const OneForm &g);

// max |(d delta + delta d) A + Lap A|
double laplace_beltrami_residual(const OneForm &A);

// Lattice subgroup acting on every coordinate block (x_{2b}, x_{2b+1}): the pi/2 rotations
// alone (order 4 per block) or together with the reflections (order 8 per block). The
// rotational seed below changes sign under a reflection, so it only survives the cyclic
// average.
enum class SymmetryGroup
{
  cyclic,
  dihedral
};

OneForm symmetrize_oneform(const OneForm &A, SymmetryGroup group = SymmetryGroup::cyclic);
ScalarField symmetrize_scalar(const ScalarField &w, SymmetryGroup group = SymmetryGroup::cyclic);
// max over blocks and generators of |A(gx) - g A(x)|.
double equivariance_residual(const OneForm &A, SymmetryGroup group = SymmetryGroup::cyclic);
double invariance_residual(const ScalarField &w, SymmetryGroup group = SymmetryGroup::cyclic);

// Orbits of lattice sites under the symmetry group.
struct OrbitTable
{
  std::vector<int> orbit_of;                // per site
  std::vector<int> size;                    // per orbit
  std::vector<std::size_t> representative;  // lowest site index of each orbit
  int count() const { return static_cast<int>(size.size()); }
};
const OrbitTable &orbit_table(const GridSpec &g, SymmetryGroup group);

// Zeroes every Fourier mode with a Nyquist index on some axis.
OneForm nyquist_filter(const OneForm &A);
ScalarField nyquist_filter(const ScalarField &w);

// Nyquist filter, Leray projection and symmetrization.
OneForm project_to_v(const OneForm &A, SymmetryGroup group = SymmetryGroup::cyclic);

struct SeedProfile
{
  // One amplitude per coordinate block.
  std::vector<double> amplitudes;
  // Support radius of the bump in each block.
  double radius = 1.0;
};

// A_{2i} = -a_i x_{2i+1}, A_{2i+1} = a_i x_{2i} with a_i = amp_i prod_b bump(r_b / R),
// then projected to V.
OneForm seed_form(const GridSpec &g, const SeedProfile &profile,
                  SymmetryGroup group = SymmetryGroup::cyclic);

// Field dump: a JSON header line then components * m^n little-endian doubles.
void write_field(const std::string &path, const GridSpec &g, const std::string &kind,
                 int components, std::span<const double> data);
void write_field(const std::string &path, const ScalarField &w);
void write_field(const std::string &path, const OneForm &A);

struct FieldDump
{
  GridSpec grid;
  std::string kind;
  int components = 0;
  std::vector<double> data;
};
// Throws std::runtime_error on malformed input.
FieldDump read_field(const std::string &path);
// Pointwise magnitudes of a dump (scalar: |w|, oneform: Euclidean norm).
SampledMagnitudes magnitudes(const FieldDump &dump);

}  // namespace smaxwell

#endif  // SMAXWELL_FIELDS_HPP
