#include "mcfs/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "mcfs/error.hpp"
#include "mcfs/parallel.hpp"
#include "mcfs/random.hpp"

namespace mcfs::spectra {

Matrix reference_matrix(int n) {
  if (n < 3) throw Error(ErrorCode::invalid_input, "reference matrix needs n >= 3");
  Matrix a = Matrix::Zero(n, n);
  for (int i = 1; i < n; ++i) a(i, i - 1) = 1.0;
  a(0, n - 1) = -1.0;
  return a;
}

std::vector<ReferenceEigenpair> reference_eigen(int n) {
  if (n < 3) throw Error(ErrorCode::invalid_input, "reference eigensystem needs n >= 3");
  // exp(i pi m / n) with the integer m reduced mod 2n first.
  auto unit = [n](long long m) {
    const long long r = ((m % (2LL * n)) + 2LL * n) % (2LL * n);
    const double angle = std::numbers::pi * static_cast<double>(r) / n;
    return Complex(std::cos(angle), std::sin(angle));
  };
  std::vector<ReferenceEigenpair> out;
  for (int k = 1; k <= n; ++k) {
    const long long odd = 2LL * k - 1;
    ReferenceEigenpair pair;
    pair.lambda = unit(odd);
    pair.eta.resize(n);
    for (int i = 0; i < n; ++i) pair.eta[i] = unit(odd * (n - 1 - i));
    out.push_back(std::move(pair));
  }
  return out;
}

int SpectralSplit::block_containing_modulus(double value) const {
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int h = 0; h < block_count(); ++h) {
    const double lo = nu[static_cast<std::size_t>(h)], hi = mu[static_cast<std::size_t>(h)];
    const double d = (value < lo) ? std::log(lo / value) : (value > hi ? std::log(value / hi) : 0.0);
    if (d < best_dist) {
      best_dist = d;
      best = h;
    }
  }
  return best;
}

namespace {

double block_modulus(const std::vector<Complex>& eigs) {
  double m = 0.0;
  for (const auto& e : eigs) m = std::max(m, std::abs(e));
  return m;
}

bool block_has_value(const Matrix& w, int value) {
  // A circle of directions for 2D blocks; the single direction otherwise.
  const int steps = w.cols() == 1 ? 1 : 24;
  for (int k = 0; k < steps; ++k) {
    const double th = std::numbers::pi * k / steps;
    Vector v = w.col(0) * std::cos(th);
    if (w.cols() > 1) v += w.col(1) * std::sin(th);
    const auto b = signature::bounds_N(v);
    if (!b.exact || b.n_min != value) return false;
  }
  return true;
}

}  // namespace

SpectralSplit split(const Matrix& l) {
  const auto n = static_cast<int>(l.rows());
  if (l.cols() != n || n < 3) throw Error(ErrorCode::invalid_input, "split needs a square matrix with n >= 3");
  const SchurForm base = SchurForm::of(l);
  const std::size_t nblocks = base.block_sizes.size();
  for (const auto& e : base.block_eigenvalues) {
    if (block_modulus(e) == 0.0) throw Error(ErrorCode::invalid_input, "matrix is singular");
  }

  std::vector<std::size_t> order(nblocks);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return block_modulus(base.block_eigenvalues[a]) > block_modulus(base.block_eigenvalues[b]);
  });

  const int nclusters = block_count(n);
  std::vector<int> cluster_of(nblocks, -1);
  std::vector<int> fill(static_cast<std::size_t>(nclusters), 0);
  auto capacity = [&](int c) { return (c == nclusters - 1 && n % 2 == 1) ? 1 : 2; };
  int current = 0;
  for (std::size_t b : order) {
    const int size = base.block_sizes[b];
    if (fill[static_cast<std::size_t>(current)] == capacity(current)) ++current;
    if (current >= nclusters || fill[static_cast<std::size_t>(current)] + size > capacity(current)) {
      throw Error(ErrorCode::spectral_gap_below_tolerance,
                  "a complex pair straddles the prescribed block boundary");
    }
    cluster_of[b] = current;
    fill[static_cast<std::size_t>(current)] += size;
  }

  SpectralSplit s;
  s.n = n;
  s.eigenvalues.resize(static_cast<std::size_t>(nclusters));
  s.nu.assign(static_cast<std::size_t>(nclusters), std::numeric_limits<double>::infinity());
  s.mu.assign(static_cast<std::size_t>(nclusters), 0.0);
  for (std::size_t b = 0; b < nblocks; ++b) {
    const auto c = static_cast<std::size_t>(cluster_of[b]);
    for (const auto& e : base.block_eigenvalues[b]) {
      s.eigenvalues[c].push_back(e);
      s.nu[c] = std::min(s.nu[c], std::abs(e));
      s.mu[c] = std::max(s.mu[c], std::abs(e));
    }
  }
  for (int h = 0; h + 1 < nclusters; ++h) {
    const double gap = s.nu[static_cast<std::size_t>(h)] / s.mu[static_cast<std::size_t>(h + 1)];
    s.gaps.push_back(gap);
    if (!(gap > 1.0 + kGapTolerance)) {
      throw Error(ErrorCode::spectral_gap_below_tolerance,
                  "gap ratio " + std::to_string(gap) + " between blocks " + std::to_string(h + 1) +
                      " and " + std::to_string(h + 2));
    }
  }

  // Each subspace is a fresh reordering of the base form, selecting clusters by index.
  auto subspace = [&](auto pred) {
    SchurForm f = base;
    std::vector<bool> sel(nblocks);
    for (std::size_t b = 0; b < nblocks; ++b) sel[b] = pred(cluster_of[b]);
    const int dim = reorder(f, sel);
    return Matrix(f.z.leftCols(dim));
  };
  for (int h = 0; h < nclusters; ++h) {
    s.blocks.push_back(subspace([h](int c) { return c == h; }));
    s.lower.push_back(subspace([h](int c) { return c <= h; }));
    s.upper.push_back(h + 1 < nclusters ? subspace([h](int c) { return c > h; }) : Matrix(n, 0));
  }

  Matrix all(n, n);
  int col = 0;
  for (const auto& w : s.blocks) {
    all.middleCols(col, w.cols()) = w;
    col += static_cast<int>(w.cols());
  }
  s.min_singular = Eigen::JacobiSVD<Matrix>(all).singularValues().minCoeff();
  if (!(s.min_singular > 1e-12)) {
    throw Error(ErrorCode::cone_consistency_violation, "blocks are not transversal");
  }
  for (int h = 0; h < nclusters; ++h) {
    if (!block_has_value(s.blocks[static_cast<std::size_t>(h)], 2 * h + 1)) {
      throw Error(ErrorCode::cone_consistency_violation,
                  "block " + std::to_string(h + 1) + " does not carry N = " + std::to_string(2 * h + 1));
    }
  }
  return s;
}

SplitConeReport verify_split_cones(const SpectralSplit& s, std::size_t samples, std::uint64_t seed) {
  const int nb = s.block_count();
  struct Outcome {
    std::vector<SplitConeWitness> bad;
    std::size_t block_checks = 0, sum_checks = 0;
  };
  std::vector<Outcome> outcomes(samples);
  parallel_for(samples, [&](std::size_t idx) {
    Rng rng(seed, idx);
    Outcome& out = outcomes[idx];
    for (int h = 0; h < nb; ++h) {
      const Matrix& w = s.blocks[static_cast<std::size_t>(h)];
      Vector coeff(w.cols());
      for (Eigen::Index j = 0; j < coeff.size(); ++j) coeff[j] = rng.normal();
      const Vector v = w * coeff;
      const auto b = signature::bounds_N(v);
      ++out.block_checks;
      if (!b.exact || b.n_min != 2 * h + 1) out.bad.push_back({h + 1, h + 1, v, b});
    }
    const int first = rng.integer(0, nb - 1);
    const int last = rng.integer(first, nb - 1);
    Vector v = Vector::Zero(s.n);
    for (int h = first; h <= last; ++h) {
      const Matrix& w = s.blocks[static_cast<std::size_t>(h)];
      for (Eigen::Index j = 0; j < w.cols(); ++j) v += rng.normal() * w.col(j);
    }
    const auto b = signature::bounds_N(v);
    ++out.sum_checks;
    if (b.n_min < 2 * first + 1 || b.n_max > 2 * last + 1) out.bad.push_back({first + 1, last + 1, v, b});
  });
  SplitConeReport report;
  for (auto& o : outcomes) {
    report.block_checks += o.block_checks;
    report.sum_checks += o.sum_checks;
    report.violations += o.bad.size();
    for (auto& w : o.bad) {
      if (report.witnesses.size() < 16) report.witnesses.push_back(std::move(w));
    }
  }
  return report;
}

namespace {

// Greedy pivoted elimination over the rows in the given visiting order.
// A row is accepted as pivot if it is within a factor of the best
// remaining candidate for the current column.
std::optional<std::vector<int>> select_rows(const Matrix& basis, const std::vector<int>& visit,
                                            double relative_threshold) {
  Matrix work = basis;
  const auto m = static_cast<int>(basis.cols());
  std::vector<int> chosen;
  std::vector<bool> used(static_cast<std::size_t>(basis.rows()), false);
  for (int c = 0; c < m; ++c) {
    double best = 0.0;
    for (int r : visit) {
      if (!used[static_cast<std::size_t>(r)]) best = std::max(best, std::abs(work(r, c)));
    }
    if (best <= 1e-12) return std::nullopt;
    int pivot = -1;
    for (int r : visit) {
      if (!used[static_cast<std::size_t>(r)] && std::abs(work(r, c)) >= relative_threshold * best) {
        pivot = r;
        break;
      }
    }
    used[static_cast<std::size_t>(pivot)] = true;
    chosen.push_back(pivot);
    for (Eigen::Index r = 0; r < work.rows(); ++r) {
      if (used[static_cast<std::size_t>(r)]) continue;
      const double factor = work(r, c) / work(pivot, c);
      work.row(r) -= factor * work.row(pivot);
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

}  // namespace

std::optional<Vector> rank_certificate(const Matrix& basis, int h, std::uint64_t seed) {
  const auto n = static_cast<int>(basis.rows());
  const auto m = static_cast<int>(basis.cols());
  if (h < 1 || m < 2 * h + 1) {
    throw Error(ErrorCode::precondition_violation, "rank certificate needs m >= 2h+1 basis vectors");
  }
  if (m > n) throw Error(ErrorCode::dependent_basis, "more basis vectors than dimensions");
  Matrix normalized = basis;
  for (int j = 0; j < m; ++j) normalized.col(j).normalize();
  if (!(Eigen::JacobiSVD<Matrix>(normalized).singularValues().minCoeff() > 1e-10)) {
    throw Error(ErrorCode::dependent_basis, "basis columns are linearly dependent");
  }

  std::vector<int> visit(static_cast<std::size_t>(n));
  std::iota(visit.begin(), visit.end(), 0);
  Rng rng(seed, 0x7a9bULL);
  constexpr int kAttempts = 50;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    // First attempt: plain partial pivoting; later ones visit rows in random order.
    const double threshold = attempt == 0 ? 1.0 : 0.1;
    if (attempt > 0) {
      for (int i = n - 1; i > 0; --i) std::swap(visit[static_cast<std::size_t>(i)], visit[static_cast<std::size_t>(rng.integer(0, i))]);
    }
    const auto rows = select_rows(normalized, visit, threshold);
    if (!rows) continue;
    Matrix sub(m, m);
    Vector target(m);
    for (int k = 0; k < m; ++k) {
      sub.row(k) = normalized.row((*rows)[static_cast<std::size_t>(k)]);
      target[k] = (k % 2 == 0) ? 1.0 : -1.0;
    }
    Eigen::FullPivLU<Matrix> lu(sub);
    if (!lu.isInvertible()) continue;
    const Vector y = normalized * lu.solve(target);
    if (signature::bounds_N(y).n_min >= 2 * h + 1) return y;
  }
  return std::nullopt;
}

}  // namespace mcfs::spectra
