#include "mcfs/schur.hpp"

#include <cmath>
#include <numeric>
#include <utility>

#include "mcfs/error.hpp"

namespace mcfs::spectra {
namespace {

std::vector<Complex> block_eigs(const Matrix& t, int j, int size) {
  if (size == 1) return {Complex(t(j, j), 0.0)};
  const double a = t(j, j), b = t(j, j + 1), c = t(j + 1, j), d = t(j + 1, j + 1);
  const double mean = 0.5 * (a + d);
  const double disc = 0.25 * (a - d) * (a - d) + b * c;
  if (disc >= 0.0) {
    const double r = std::sqrt(disc);
    return {Complex(mean + r, 0.0), Complex(mean - r, 0.0)};
  }
  const double im = std::sqrt(-disc);
  return {Complex(mean, im), Complex(mean, -im)};
}

}  // namespace

SchurForm SchurForm::of(const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0) throw Error(ErrorCode::invalid_input, "Schur form needs a square matrix");
  if (!a.allFinite()) throw Error(ErrorCode::invalid_input, "matrix has non-finite entries");
  Eigen::RealSchur<Matrix> rs(a);
  if (rs.info() != Eigen::Success) throw Error(ErrorCode::numerical_failure, "real Schur iteration did not converge");
  SchurForm f;
  f.t = rs.matrixT();
  f.z = rs.matrixU();
  const auto n = static_cast<int>(a.rows());
  for (int j = 0; j < n;) {
    const int size = (j + 1 < n && f.t(j + 1, j) != 0.0) ? 2 : 1;
    f.block_sizes.push_back(size);
    f.block_eigenvalues.push_back(block_eigs(f.t, j, size));
    if (size == 2 && f.block_eigenvalues.back()[0].imag() == 0.0) {
      // Eigen standardizes real pairs into triangular form; guard anyway.
      f.block_sizes.back() = 1;
      f.block_eigenvalues.back() = {Complex(f.t(j, j), 0.0)};
      f.t(j + 1, j) = 0.0;
      j += 1;
      continue;
    }
    j += size;
  }
  return f;
}

int SchurForm::block_start(std::size_t block) const {
  return std::accumulate(block_sizes.begin(), block_sizes.begin() + static_cast<std::ptrdiff_t>(block), 0);
}

std::vector<Complex> SchurForm::eigenvalues() const {
  std::vector<Complex> out;
  for (const auto& e : block_eigenvalues) out.insert(out.end(), e.begin(), e.end());
  return out;
}

void swap_adjacent_blocks(SchurForm& f, std::size_t b) {
  if (b + 1 >= f.block_sizes.size()) throw Error(ErrorCode::invalid_input, "block index out of range");
  const int j = f.block_start(b);
  const int p = f.block_sizes[b];
  const int q = f.block_sizes[b + 1];
  const int m = p + q;

  const Matrix a11 = f.t.block(j, j, p, p);
  const Matrix a22 = f.t.block(j + p, j + p, q, q);
  const Matrix a12 = f.t.block(j, j + p, p, q);

  // Solve A11 X - X A22 = -A12 through its Kronecker form; [X; I] then spans
  // the invariant subspace belonging to A22.
  Matrix kron = Matrix::Zero(p * q, p * q);
  for (int c = 0; c < q; ++c) {
    kron.block(c * p, c * p, p, p) += a11;
    for (int r = 0; r < q; ++r) kron.block(r * p, c * p, p, p) -= a22(c, r) * Matrix::Identity(p, p);
  }
  Vector rhs(p * q);
  for (int c = 0; c < q; ++c) rhs.segment(c * p, p) = -a12.col(c);
  Eigen::FullPivLU<Matrix> lu(kron);
  if (lu.rank() < p * q) {
    throw Error(ErrorCode::numerical_failure, "cannot swap Schur blocks with equal eigenvalues");
  }
  const Vector vec_x = lu.solve(rhs);

  Matrix basis(m, q);
  for (int c = 0; c < q; ++c) basis.block(0, c, p, 1) = vec_x.segment(c * p, p);
  basis.bottomRows(q).setIdentity();
  Eigen::HouseholderQR<Matrix> qr(basis);
  const Matrix qm = qr.householderQ();

  f.t.middleCols(j, m) = f.t.middleCols(j, m) * qm;
  f.t.middleRows(j, m) = qm.transpose() * f.t.middleRows(j, m);
  f.z.middleCols(j, m) = f.z.middleCols(j, m) * qm;

  const double residual = f.t.block(j + q, j, p, q).norm();
  const double scale = std::max(1.0, f.t.norm());
  if (residual > 1e-8 * scale) {
    throw Error(ErrorCode::numerical_failure, "Schur block swap is too ill-conditioned");
  }
  f.t.block(j + q, j, p, q).setZero();

  std::swap(f.block_sizes[b], f.block_sizes[b + 1]);
  std::swap(f.block_eigenvalues[b], f.block_eigenvalues[b + 1]);
}

int reorder(SchurForm& f, const std::vector<bool>& selected) {
  if (selected.size() != f.block_sizes.size()) throw Error(ErrorCode::invalid_input, "selection size mismatch");
  std::vector<bool> sel = selected;
  std::size_t target = 0;
  int dim = 0;
  for (std::size_t b = 0; b < sel.size(); ++b) {
    if (!sel[b]) continue;
    for (std::size_t k = b; k > target; --k) {
      swap_adjacent_blocks(f, k - 1);
      std::swap(sel[k - 1], sel[k]);
    }
    dim += f.block_sizes[target];
    ++target;
  }
  return dim;
}

Matrix invariant_subspace(const SchurForm& base,
                          const std::function<bool(const std::vector<Complex>&)>& keep) {
  SchurForm f = base;
  std::vector<bool> sel(f.block_sizes.size());
  for (std::size_t b = 0; b < sel.size(); ++b) sel[b] = keep(f.block_eigenvalues[b]);
  const int dim = reorder(f, sel);
  return f.z.leftCols(dim);
}

}  // namespace mcfs::spectra
