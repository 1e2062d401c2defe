#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "mcfs/schur.hpp"
#include "mcfs/signature.hpp"
#include "mcfs/types.hpp"

namespace mcfs::spectra {

/// Relative tolerance for the strict modulus gaps between blocks.
inline constexpr double kGapTolerance = 1e-6;

/// Constant cyclic matrix with unit subdiagonal and corner -1; its
/// characteristic polynomial is lambda^n + 1.
Matrix reference_matrix(int n);

struct ReferenceEigenpair {
  Complex lambda;
  ComplexVector eta;
};

/// Closed-form eigenpairs: lambda_k = exp(i (2k-1) pi / n),
/// eta_k = (lambda_k^{n-1}, ..., lambda_k, 1), k = 1..n.
std::vector<ReferenceEigenpair> reference_eigen(int n);

/// Invariant splitting R^n = W_1 + ... + W_H (H = (ñ+1)/2) of a matrix
/// that strictly maps the nested cones into themselves.
struct SpectralSplit {
  int n = 0;
  std::vector<Matrix> blocks;                     // orthonormal bases of W_h
  std::vector<std::vector<Complex>> eigenvalues;  // spectrum of L restricted to W_h
  std::vector<double> nu;                         // min modulus per block
  std::vector<double> mu;                         // max modulus per block
  std::vector<double> gaps;                       // nu_h / mu_{h+1}
  std::vector<Matrix> lower;                      // V_h^1 = W_1 + ... + W_h
  std::vector<Matrix> upper;                      // V_h^2 = W_{h+1} + ... + W_H
  double min_singular = 0.0;                      // of [W_1 | ... | W_H]

  int block_count() const { return static_cast<int>(blocks.size()); }
  /// 0-based index of the block whose modulus interval contains (or is nearest to) value.
  int block_containing_modulus(double value) const;
};

/// Groups eigenvalues by descending modulus into blocks of size 2 (last of
/// size 1 for odd n), extracts the real invariant subspaces by ordered real
/// Schur reordering, and verifies the gaps and the Lyapunov value of each block.
SpectralSplit split(const Matrix& l);

struct SplitConeWitness {
  int h_first = 0;  // 1-based block range
  int h_last = 0;
  Vector vector;
  signature::LyapunovBounds bounds;
};

struct SplitConeReport {
  std::size_t block_checks = 0;
  std::size_t sum_checks = 0;
  std::size_t violations = 0;
  std::vector<SplitConeWitness> witnesses;
  bool ok() const { return violations == 0; }
};

/// Samples W_h (expects exact N = 2h-1) and random sums W_h + ... + W_k
/// (expects N_m >= 2h-1 and N_M <= 2k-1).
SplitConeReport verify_split_cones(const SpectralSplit& s, std::size_t samples, std::uint64_t seed);

/// Combination y of the basis columns whose coordinates alternate in sign
/// on an invertible row selection, so that N_m(y) >= 2h+1. Returns nullopt
/// if every pivot order fails.
std::optional<Vector> rank_certificate(const Matrix& basis, int h, std::uint64_t seed = 0);

}  // namespace mcfs::spectra
