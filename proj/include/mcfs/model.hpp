#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcfs/types.hpp"

namespace mcfs::model {

using VectorField = std::function<Vector(const Vector&)>;
using JacobianField = std::function<Matrix(const Vector&)>;

/// Absolute tolerance for Jacobian entries that must vanish structurally.
inline constexpr double kMaskTolerance = 1e-10;

/// True when entry (row, col) may be nonzero: the diagonal, the subdiagonal,
/// and the corner coupling row 0 to column n-1.
constexpr bool in_cyclic_mask(int row, int col, int n) noexcept {
  return col == row || col == cyclic_prev(row, n);
}

/// Central differences with step 1e-6 * (1 + |x_j|).
Matrix finite_difference_jacobian(const VectorField& f, const Vector& x);

/// x_i' = f_i(x_i, x_{i-1}) with fixed coupling signs delta_i.
class CyclicSystem {
 public:
  /// An empty jacobian selects the finite-difference fallback.
  CyclicSystem(int n, VectorField f, JacobianField jacobian, Signs delta,
               std::string label = "custom");

  int dimension() const noexcept { return n_; }
  const Signs& delta() const noexcept { return delta_; }
  const std::string& label() const noexcept { return label_; }
  bool has_analytic_jacobian() const noexcept { return analytic_jacobian_; }

  /// Product of the coupling signs.
  int feedback_sign() const noexcept;
  /// delta == (-1, +1, ..., +1).
  bool is_standard() const noexcept;

  Vector f(const Vector& x) const;
  Matrix jacobian(const Vector& x) const;

 private:
  void check_size(const Vector& x) const;

  int n_;
  VectorField f_;
  JacobianField jacobian_;
  Signs delta_;
  std::string label_;
  bool analytic_jacobian_;
};

/// Axis-aligned sampling region.
struct Box {
  Vector lower;
  Vector upper;

  static Box cube(int n, double lo, double hi) {
    return {Vector::Constant(n, lo), Vector::Constant(n, hi)};
  }
};

struct Violation {
  Vector point;
  int row = 0;  // 0-based equation index
  int column = 0;
  int observed_sign = 0;  // sign of the offending Jacobian entry
  double value = 0.0;
};

struct ValidationReport {
  bool ok = true;
  std::vector<Violation> violations;
  std::size_t samples_checked = 0;
};

/// Monte Carlo check of the coupling-sign condition and the cyclic mask.
ValidationReport validate_feedback(const CyclicSystem& system, const Box& box,
                                   std::size_t num_samples, std::uint64_t seed);

struct Normalized {
  CyclicSystem system;
  Signs mu;
};

/// Conjugates by x -> mu o x so that delta becomes (-1, +1, ..., +1).
/// mu_1 = 1, mu_i = delta_2 * ... * delta_i.
Normalized normalize(const CyclicSystem& system);

/// mu for a sign vector (no system needed); throws on positive feedback.
Signs normalizing_signs(const Signs& delta);

/// x_1' = 1/(1 + x_n^p) - b x_1,  x_i' = x_{i-1} - b x_i.
CyclicSystem goodwin(int n, double hill, double decay);

/// Constant linear ring x' = A x with standard signs (-1, +1, ..., +1).
/// A must respect the cyclic mask; the coupling signs are checked by
/// validate_feedback, not here.
CyclicSystem linear_ring(const Matrix& a);

/// Builtin models by name: "goodwin" {n, p, b} or "linear_ring" {matrix}.
CyclicSystem builtin(std::string_view name, const nlohmann::json& params);

/// Parses a model file object: {"name": ..., "params": {...}} or {"matrix": [[...]]}.
CyclicSystem from_json(const nlohmann::json& spec);

}  // namespace mcfs::model
