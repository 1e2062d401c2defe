#pragma once

#include <vector>

#include "mcfs/types.hpp"

// Integer-valued Lyapunov function for the standard negative-feedback ring
// (delta = (-1, +1, ..., +1)). Indices are 0-based; edge i joins x_i and
// x_{i-1} cyclically, and edge 0 is the twisted one.
namespace mcfs::signature {

/// Coordinate i counts as zero iff |x_i| <= kZeroTolerance * max(1, |x|_inf).
inline constexpr double kZeroTolerance = 1e-9;

Signs sign_vector(const Vector& x);

/// Every coordinate is nonzero after thresholding.
bool in_lambda(const Vector& x);

/// Whether edge i is sign-discordant for the given (nonzero) neighbours.
constexpr bool discordant(int i, int s_i, int s_prev) noexcept {
  return i == 0 ? (s_i * s_prev > 0) : (s_i * s_prev < 0);
}

/// N on Lambda. Throws not-in-Lambda if any entry is zero.
int count_N(const Signs& signs);
int count_N(const Vector& x);

struct LyapunovBounds {
  int n_min = 1;
  int n_max = 1;
  bool exact = true;  // n_min == n_max, i.e. the point lies in the domain of continuity
};

/// Envelopes N_m / N_M over all sign assignments of the zero coordinates,
/// computed by a two-pass dynamic program around the cycle.
LyapunovBounds bounds_N(const Signs& signs);
LyapunovBounds bounds_N(const Vector& x);

enum class ConeSide { lower, upper };

/// lower: x = 0 or N_M(x) <= 2h-1.  upper: x = 0 or N_m(x) > 2h-1.
bool in_cone(const Vector& x, int h, ConeSide side);

/// Leading-order behaviour of one zero coordinate: x_j(t) ~ coefficient * t^m / m!.
struct DominantTerm {
  int index = 0;
  int source = 0;  // nearest nonzero cyclic predecessor
  int exponent = 0;
  double coefficient = 0.0;
};

struct ZeroSegment {
  int start = 0;  // first zero index (0-based)
  int length = 0;
};

struct CrossingPrediction {
  std::vector<ZeroSegment> zero_segments;
  Signs signs_plus;
  Signs signs_minus;
  int N_plus = 1;
  int N_minus = 1;
  std::vector<DominantTerm> dominant_terms;
};

/// Signs of x(t) for small t > 0 and t < 0 under x' = A0 x near x(0) = x0.
/// A0 must carry the cyclic mask with a_{1n} < 0 and a_{i,i-1} > 0.
CrossingPrediction predict_crossing(const Matrix& a0, const Vector& x0);

}  // namespace mcfs::signature
