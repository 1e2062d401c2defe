#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "mcfs/random.hpp"
#include "mcfs/schur.hpp"

using namespace mcfs;
using spectra::SchurForm;

namespace {

Matrix random_matrix(int n, Rng& rng) {
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
  return a;
}

double reconstruction_error(const SchurForm& f, const Matrix& a) {
  return (f.z * f.t * f.z.transpose() - a).norm() / std::max(1.0, a.norm());
}

bool quasi_triangular(const SchurForm& f) {
  for (std::size_t b = 0; b < f.block_sizes.size(); ++b) {
    const int start = f.block_start(b);
    const int end = start + f.block_sizes[b];
    for (int i = end; i < f.t.rows(); ++i) {
      for (int j = start; j < end; ++j) {
        if (std::abs(f.t(i, j)) > 1e-12 * std::max(1.0, f.t.norm())) return false;
      }
    }
  }
  return true;
}

}  // namespace

TEST_CASE("Schur form reconstructs the matrix") {
  Rng rng(1);
  for (int k = 0; k < 30; ++k) {
    const int n = rng.integer(2, 9);
    const Matrix a = random_matrix(n, rng);
    const auto f = SchurForm::of(a);
    CHECK(reconstruction_error(f, a) < 1e-12);
    CHECK((f.z.transpose() * f.z - Matrix::Identity(n, n)).norm() < 1e-12);
    int total = 0;
    for (int s : f.block_sizes) total += s;
    CHECK(total == n);
    CHECK(quasi_triangular(f));
  }
}

TEST_CASE("adjacent swaps preserve similarity and move eigenvalues") {
  Rng rng(2);
  for (int k = 0; k < 40; ++k) {
    const int n = rng.integer(3, 8);
    const Matrix a = random_matrix(n, rng);
    auto f = SchurForm::of(a);
    if (f.block_sizes.size() < 2) continue;
    const auto b = static_cast<std::size_t>(rng.integer(0, static_cast<int>(f.block_sizes.size()) - 2));
    const auto first = f.block_eigenvalues[b];
    const auto second = f.block_eigenvalues[b + 1];
    spectra::swap_adjacent_blocks(f, b);
    CHECK(reconstruction_error(f, a) < 1e-10);
    CHECK(quasi_triangular(f));
    REQUIRE(f.block_eigenvalues[b].size() == second.size());
    for (std::size_t i = 0; i < second.size(); ++i) CHECK(std::abs(f.block_eigenvalues[b][i] - second[i]) < 1e-12);
    for (std::size_t i = 0; i < first.size(); ++i) CHECK(std::abs(f.block_eigenvalues[b + 1][i] - first[i]) < 1e-12);
    // The diagonal block really carries the swapped eigenvalues.
    const int s = f.block_start(b);
    const int m = f.block_sizes[b];
    Eigen::EigenSolver<Matrix> es(f.t.block(s, s, m, m));
    for (Eigen::Index i = 0; i < m; ++i) {
      double best = 1e9;
      for (const Complex& z : second) best = std::min(best, std::abs(es.eigenvalues()(i) - z));
      CHECK(best < 1e-8 * std::max(1.0, a.norm()));
    }
  }
}

TEST_CASE("invariant subspace is invariant") {
  Rng rng(3);
  for (int k = 0; k < 30; ++k) {
    const int n = rng.integer(3, 9);
    const Matrix a = random_matrix(n, rng);
    const auto f = SchurForm::of(a);
    const Matrix q = spectra::invariant_subspace(f, [](const std::vector<Complex>& ev) { return ev.front().real() > 0.0; });
    int expected = 0;
    for (const auto& ev : f.block_eigenvalues) expected += ev.front().real() > 0.0 ? static_cast<int>(ev.size()) : 0;
    CHECK(q.cols() == expected);
    if (q.cols() == 0) continue;
    const Matrix image = a * q;
    const Matrix residual = image - q * (q.transpose() * image);
    CHECK(residual.norm() < 1e-9 * std::max(1.0, a.norm()));
    CHECK((q.transpose() * q - Matrix::Identity(q.cols(), q.cols())).norm() < 1e-10);
  }
}
