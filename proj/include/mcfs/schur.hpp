#pragma once

#include <functional>
#include <vector>

#include "mcfs/types.hpp"

namespace mcfs::spectra {

/// Real Schur form A = Z T Z^T with T quasi-upper-triangular. Diagonal blocks
/// are tracked explicitly together with their eigenvalues so that reordering
/// never has to re-detect block boundaries.
struct SchurForm {
  Matrix t;
  Matrix z;
  std::vector<int> block_sizes;
  std::vector<std::vector<Complex>> block_eigenvalues;

  static SchurForm of(const Matrix& a);

  int block_start(std::size_t block) const;
  std::vector<Complex> eigenvalues() const;
};

/// Swaps diagonal blocks b and b+1 by an orthogonal similarity.
void swap_adjacent_blocks(SchurForm& form, std::size_t b);

/// Moves the selected blocks to the top, keeping relative order within the
/// selected and the unselected groups. Returns the dimension of the leading
/// invariant subspace (first columns of z).
int reorder(SchurForm& form, const std::vector<bool>& selected);

/// Orthonormal basis of the invariant subspace for the blocks accepted by keep.
Matrix invariant_subspace(const SchurForm& base,
                          const std::function<bool(const std::vector<Complex>&)>& keep);

}  // namespace mcfs::spectra
