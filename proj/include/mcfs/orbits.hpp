#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mcfs/linflow.hpp"
#include "mcfs/model.hpp"
#include "mcfs/ode.hpp"
#include "mcfs/signature.hpp"
#include "mcfs/spectra.hpp"
#include "mcfs/types.hpp"

namespace mcfs::orbits {

inline constexpr double kNewtonTolerance = 1e-10;
inline constexpr double kPeriodicTolerance = 1e-8;
inline constexpr double kHyperbolicTolerance = 1e-6;
inline constexpr double kTrivialTolerance = 1e-6;
inline constexpr double kConnectTolerance = 1e-5;
inline constexpr double kTransversalTolerance = 1e-3;

/// Sampled solution with cubic Hermite interpolation between stored steps.
using Trajectory = OdeSolution;

/// Solution of x' = f(x) from x(t0) = x0. States beyond 1e12 raise divergence.
Trajectory integrate(const model::CyclicSystem& sys, const Vector& x0, double t0, double t1,
                     double tol = 1e-10);

/// State and Jacobian of the flow, d phi(t1, x) / dx, by the variational equation.
struct FlowWithJacobian {
  Vector state;
  Matrix jacobian;
};
FlowWithJacobian flow_with_jacobian(const model::CyclicSystem& sys, const Vector& x0, double t0,
                                    double t1, double tol = 1e-11);

/// t -> D f(traj(t)) conjugated into the standard sign frame, as a linear
/// cyclic system. With a period, time is wrapped into [t_begin, t_begin + period).
/// Holds references to sys and traj.
linflow::LinearCyclicSystem linearization(const model::CyclicSystem& sys, const Trajectory& traj,
                                          std::optional<double> period = std::nullopt);

struct Equilibrium {
  Vector point;
  Matrix jacobian;
  std::vector<Complex> eigenvalues;
  int unstable_dim = 0;
  bool hyperbolic = false;
  std::optional<spectra::SpectralSplit> split;  // of exp(Df(e)) in the standard frame
  double residual = 0.0;
  int iterations = 0;
};

/// Jacobian, eigenvalues, hyperbolicity and split at a given point.
Equilibrium classify(const model::CyclicSystem& sys, const Vector& point);

/// Damped Newton on f; at most 100 iterations.
Equilibrium find_equilibrium(const model::CyclicSystem& sys, const Vector& guess);

struct PeriodicOrbit {
  Vector base_point;
  double period = 0.0;
  Trajectory samples;
  linflow::TransitionMatrix monodromy;  // standard sign frame
  std::vector<Complex> multipliers;
  std::optional<spectra::SpectralSplit> split;
  bool hyperbolic = false;
  int trivial_index = 0;
  double trivial_multiplier_error = 0.0;
  double trivial_alignment = 0.0;  // angle (rad) between the multiplier-1 direction and p'(0)
  int unstable_multipliers = 0;    // |mu| > 1
  int h = 0;                       // 1-based split block holding the trivial multiplier
  double closure_error = 0.0;
  int newton_iterations = 0;
};

/// Return time to the hyperplane through x orthogonal to f(x), searched up to max_time.
std::optional<double> estimate_period(const model::CyclicSystem& sys, const Vector& x,
                                      double max_time);

/// Newton on the return map; the section is re-chosen through each iterate.
PeriodicOrbit find_periodic(const model::CyclicSystem& sys, const Vector& guess_x, double guess_period);

using CriticalElement = std::variant<Equilibrium, PeriodicOrbit>;

/// Distance from x to the equilibrium point or to the closed orbit.
double distance_to(const CriticalElement& element, const Vector& x);

enum class Direction { forward, backward };

/// h with N(phi') = 2h - 1 on the trailing (forward) or leading (backward)
/// 20% of the trajectory; throws inconclusive if N is not settled there.
int h_index(const model::CyclicSystem& sys, const Trajectory& traj, Direction direction);

struct DifferencePair {
  Vector x;
  Vector y;
  signature::LyapunovBounds bounds;
};

struct DifferenceReport {
  int h = 0;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // pairs closer than min_separation
  std::size_t violations = 0;
  std::vector<DifferencePair> witnesses;
  bool ok() const { return violations == 0; }
};

/// Checks N(y - x) = 2h - 1 exactly on random distinct pairs of points.
/// Requires h_plus == h_minus. Points are given in the system's own frame;
/// mu (from the normalizing signs) maps them to the standard frame.
DifferenceReport difference_signature(const std::vector<Vector>& points, int h_plus, int h_minus,
                                      const Signs& mu, std::size_t pairs, std::uint64_t seed,
                                      double min_separation = 1e-6);

struct ApproachSample {
  double t = 0.0;
  double to_source = 0.0;
  double to_target = 0.0;
};

struct Connection {
  Trajectory trajectory;
  bool connected = false;
  double terminal_distance = 0.0;
  std::vector<ApproachSample> approach;
};

/// Launches from the source displaced by offset along the first unstable
/// tangent direction and integrates up to horizon.
Connection connect(const model::CyclicSystem& sys, const CriticalElement& source,
                   const CriticalElement& target, double offset, double horizon);

/// Orthonormal tangent basis of W^u (unstable = true) or W^s at the anchor
/// point of an element, in the system's own frame.
Matrix tangent_basis(const model::CyclicSystem& sys, const CriticalElement& element, bool unstable);

/// dim W^u of an element: unstable eigenvalues, or unstable multipliers plus the flow direction.
int unstable_manifold_dim(const CriticalElement& element);

/// Whether the transversality theorem covers this pair: always when a
/// periodic orbit is involved; for two equilibria only when the target has
/// strictly smaller unstable dimension.
bool theorem_applies(bool periodic_involved, int source_unstable_dim, int target_unstable_dim);

enum class Verdict { transversal, not_transversal, inconclusive };
std::string to_string(Verdict v);

struct TransversalityReport {
  std::string source_kind;
  std::string target_kind;
  Vector source_anchor;
  Vector target_anchor;
  int h_minus = 0;  // 0 when not settled
  int h_plus = 0;
  Matrix unstable_basis;  // at the connection midpoint
  Matrix stable_basis;
  double midpoint_time = 0.0;
  std::vector<double> singular_values;
  int stacked_rank = 0;
  double sigma_min = 0.0;
  Verdict verdict = Verdict::inconclusive;
  double manifold_distance = 0.0;
  int source_unstable_dim = 0;
  int target_unstable_dim = 0;
  bool theorem_applies = true;
  bool dimension_consistent = true;  // dim W^u(target) <= dim W^u(source)
};

/// Transports tangent bases of W^u(source) forward and W^s(target) backward
/// to the midpoint of the connection and measures how well they span R^n.
TransversalityReport transversality(const model::CyclicSystem& sys, const CriticalElement& source,
                                    const CriticalElement& target, const Trajectory& conn);

/// End-to-end equilibrium-to-orbit study used by the CLI and the acceptance suite.
struct ConnectionStudy {
  Equilibrium equilibrium;
  PeriodicOrbit orbit;
  Connection connection;
  TransversalityReport report;
  int h_source = 0;
  int h_target = 0;
};

struct StudyOptions {
  Vector equilibrium_guess;  // empty: all entries 0.5
  Vector transient_start;    // empty: 0.1, 0.2, ...
  double transient_time = 600.0;
  double offset = 1e-6;
  double horizon = 3000.0;
};

ConnectionStudy study_equilibrium_to_orbit(const model::CyclicSystem& sys, const StudyOptions& options = {});

/// Finite sample of the invariant set Omega = orbit + connection + equilibrium.
std::vector<Vector> omega_points(const ConnectionStudy& study, std::size_t per_part);

}  // namespace mcfs::orbits
