#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "mcfs/types.hpp"

namespace mcfs {

/// Right-hand side of y' = F(t, y); writes into dydt (pre-sized to y.size()).
using Rhs = std::function<void(double t, const Vector& y, Vector& dydt)>;

struct OdeOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double max_step = std::numeric_limits<double>::infinity();
  double initial_step = 0.0;  // 0 selects automatically
  std::size_t max_steps = 2'000'000;
  /// State norm above which integration stops with ErrorCode::divergence.
  double max_norm = std::numeric_limits<double>::infinity();
};

/// Accepted steps of an embedded Runge-Kutta 5(4) run with cubic Hermite
/// dense output between them. Time may run backwards (t1 < t0).
class OdeSolution {
 public:
  std::vector<double> t;
  std::vector<Vector> y;
  std::vector<Vector> dy;

  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t evaluations = 0;

  double t_begin() const { return t.front(); }
  double t_end() const { return t.back(); }
  const Vector& final_state() const { return y.back(); }

  /// Dense evaluation; t_query must lie in the integrated interval.
  Vector operator()(double t_query) const;

  /// Time derivative from the same Hermite interpolant.
  Vector derivative(double t_query) const;

 private:
  std::size_t locate(double t_query) const;
};

/// Dormand-Prince 5(4) with PI step-size control. When keep_steps is false
/// only the endpoints are stored.
OdeSolution solve_ivp(const Rhs& rhs, double t0, const Vector& y0, double t1,
                      const OdeOptions& options = {}, bool keep_steps = true);

/// Convenience wrapper returning only y(t1).
Vector flow(const Rhs& rhs, double t0, const Vector& y0, double t1,
            const OdeOptions& options = {});

}  // namespace mcfs
