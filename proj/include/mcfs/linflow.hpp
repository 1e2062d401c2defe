#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mcfs/model.hpp"
#include "mcfs/random.hpp"
#include "mcfs/signature.hpp"
#include "mcfs/types.hpp"

namespace mcfs::linflow {

/// c + sum_k cos_k cos((k+1) w t) + sin_k sin((k+1) w t).
struct TrigPoly {
  double constant = 0.0;
  std::vector<double> cos;
  std::vector<double> sin;

  double value(double t, double frequency) const;
  bool is_constant() const { return cos.empty() && sin.empty(); }
  /// Lower and upper bound from |cos|, |sin| <= 1.
  double lower_bound() const;
  double upper_bound() const;
};

/// Serializable description of A(t) for a linear cyclic system.
struct CoefficientSpec {
  int n = 0;
  std::vector<TrigPoly> diag;  // a_{ii}, n entries
  std::vector<TrigPoly> sub;   // a_{i+1,i}, n-1 entries
  TrigPoly corner;             // a_{1n}
  std::optional<double> period;
  double frequency = 0.0;      // angular frequency of the trig terms

  Matrix evaluate(double t) const;
};

/// x' = A(t) x with A(t) carrying the cyclic mask.
class LinearCyclicSystem {
 public:
  using CoefficientFn = std::function<Matrix(double)>;

  LinearCyclicSystem(int n, CoefficientFn a, std::optional<double> period = std::nullopt);
  explicit LinearCyclicSystem(CoefficientSpec spec);

  static LinearCyclicSystem constant(const Matrix& a, std::optional<double> period = std::nullopt);

  int dimension() const noexcept { return n_; }
  Matrix coefficients(double t) const { return a_(t); }
  const std::optional<double>& period() const noexcept { return period_; }
  const std::optional<CoefficientSpec>& spec() const noexcept { return spec_; }

 private:
  int n_;
  CoefficientFn a_;
  std::optional<double> period_;
  std::optional<CoefficientSpec> spec_;
};

struct TransitionMatrix {
  Matrix value;
  double t0 = 0.0;
  double t1 = 0.0;
  double abel_residual = 0.0;  // |det - exp(int tr A)| / exp(int tr A)
};

/// Default local error target for the matrix initial value problem.
inline constexpr double kDefaultTolerance = 1e-8;

/// Signs a_{1n} < 0, a_{i,i-1} > 0 and the cyclic mask at every grid time.
/// Violation::point holds the single time value.
model::ValidationReport validate_linear(const LinearCyclicSystem& sys, std::span<const double> grid);

/// Phi(t1, t0) from X' = A(t) X, X(t0) = I. Backward spans are integrated
/// backwards in time rather than inverted.
TransitionMatrix transition(const LinearCyclicSystem& sys, double t0, double t1,
                            double tol = kDefaultTolerance);

/// Transition over one period [0, w].
TransitionMatrix monodromy(const LinearCyclicSystem& sys, double tol = kDefaultTolerance);

/// Images of the columns of basis under Phi(t1, t0), re-orthonormalized every
/// time unit. Returns an orthonormal n x k matrix.
Matrix propagate_subspace(const LinearCyclicSystem& sys, const Matrix& basis, double t0, double t1,
                          double tol = kDefaultTolerance);

struct NSample {
  double t = 0.0;
  signature::LyapunovBounds bounds;
};

struct MonotonicityTrace {
  std::vector<NSample> samples;
  bool nonincreasing = true;
  /// (earlier exact index, later exact index) pairs where N went up.
  std::vector<std::pair<std::size_t, std::size_t>> increases;
  bool eventually_constant = false;  // exact values agree over the trailing 20%
};

/// Integrates x' = A(t) x with x(grid.front()) = x0 and evaluates the
/// Lyapunov envelopes at every grid time. grid must be increasing.
MonotonicityTrace sample_N_along(const LinearCyclicSystem& sys, const Vector& x0,
                                 std::span<const double> grid, double tol = 1e-10);

struct ConeWitness {
  Vector start;
  Vector image;
  signature::LyapunovBounds image_bounds;
  bool boundary_start = false;
};

struct ConeInvarianceReport {
  int h = 0;
  double t = 0.0;
  std::size_t samples = 0;
  std::size_t boundary_samples = 0;  // starts with a zero coordinate, N_m <= 2h-1
  std::size_t starved = 0;           // boundary draws that could not hit the stratum
  std::size_t failures = 0;
  std::vector<ConeWitness> witnesses;  // first few failures
  bool ok() const { return failures == 0; }
};

/// Draws random nonzero points of the closed cone and checks that Phi(t, 0)
/// maps each into the open cone (N_M <= 2h-1 and exact). Three in four
/// draws lie in Lambda with N <= 2h-1; the rest carry an isolated zero
/// coordinate with N_m <= 2h-1, so N_M may exceed 2h-1 at the start.
ConeInvarianceReport verify_cone_invariance(const LinearCyclicSystem& sys, int h, double t,
                                            std::size_t samples, std::uint64_t seed);

/// Random sign vector with exactly k discordant edges (k odd).
Signs random_sign_pattern(int n, int k, Rng& rng);

/// Random periodic system satisfying the sign condition for all t:
/// subdiagonal c + d sin(w t + phi) with c > |d| > 0, corner the negative of
/// such a term, diagonal an unconstrained trig polynomial.
LinearCyclicSystem random_periodic(int n, std::uint64_t seed);

}  // namespace mcfs::linflow
