#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace mcfs {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ComplexVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Sign vector entries in {-1, 0, +1}.
using Signs = std::vector<int>;

/// Largest admissible value of the Lyapunov function: n for odd n, n-1 for even n.
constexpr int n_tilde(int n) noexcept { return (n % 2 == 1) ? n : n - 1; }

/// Number of blocks in the spectral splitting, (ñ+1)/2.
constexpr int block_count(int n) noexcept { return (n_tilde(n) + 1) / 2; }

/// Cyclic predecessor of a 0-based index.
constexpr int cyclic_prev(int i, int n) noexcept { return (i + n - 1) % n; }

}  // namespace mcfs
