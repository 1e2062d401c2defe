#include "mcfs/orbits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include "mcfs/error.hpp"
#include "mcfs/random.hpp"
#include "mcfs/schur.hpp"

namespace mcfs::orbits {
namespace {

constexpr double kDivergenceNorm = 1e12;

Matrix sign_matrix(const Signs& mu) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(mu.size()), static_cast<Eigen::Index>(mu.size()));
  for (std::size_t i = 0; i < mu.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = mu[i];
  return m;
}

Vector apply_signs(const Signs& mu, const Vector& x) {
  Vector y = x;
  for (std::size_t i = 0; i < mu.size(); ++i) y(static_cast<Eigen::Index>(i)) *= mu[i];
  return y;
}

Signs frame_of(const model::CyclicSystem& sys) { return model::normalizing_signs(sys.delta()); }

std::vector<Complex> eigenvalues_of(const Matrix& a) {
  Eigen::EigenSolver<Matrix> es(a, false);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::numerical_failure, "eigenvalue iteration failed");
  std::vector<Complex> out(static_cast<std::size_t>(a.rows()));
  for (Eigen::Index i = 0; i < a.rows(); ++i) out[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
  return out;
}

bool all_finite(const Vector& v) { return v.allFinite(); }

// Closest point on the orbit to x: coarse scan, then golden-section refinement.
struct Nearest {
  double phase = 0.0;
  double distance = 0.0;
};

Nearest nearest_on_orbit(const PeriodicOrbit& orbit, const Vector& x) {
  const Trajectory& p = orbit.samples;
  const double t0 = p.t_begin();
  const double period = orbit.period;
  constexpr int coarse = 2000;
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int k = 0; k < coarse; ++k) {
    const double d = (p(t0 + period * k / coarse) - x).norm();
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  const double h = period / coarse;
  auto dist = [&](double s) {
    double u = std::fmod(s - t0, period);
    if (u < 0.0) u += period;
    return (p(t0 + u) - x).norm();
  };
  double a = t0 + period * best / coarse - h;
  double b = a + 2.0 * h;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = dist(c);
  double fd = dist(d);
  for (int it = 0; it < 80 && b - a > 1e-13 * std::max(1.0, period); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = dist(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = dist(d);
    }
  }
  double s = 0.5 * (a + b);
  double ds = dist(s);
  if (best_d < ds) {
    s = t0 + period * best / coarse;
    ds = best_d;
  }
  double u = std::fmod(s - t0, period);
  if (u < 0.0) u += period;
  return {u, ds};
}

// Orthonormal basis of the invariant subspace of a real matrix for the
// eigenvalue clusters accepted by keep.
Matrix subspace(const Matrix& a, const std::function<bool(const std::vector<Complex>&)>& keep) {
  return spectra::invariant_subspace(spectra::SchurForm::of(a), keep);
}

Matrix orthonormalize(const Matrix& m) {
  if (m.cols() == 0) return m;
  Eigen::HouseholderQR<Matrix> qr(m);
  return qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
}

// Monodromy based at the orbit point with the given phase, in the system's own frame.
Matrix monodromy_at(const model::CyclicSystem& sys, const PeriodicOrbit& orbit, double phase) {
  const Vector x = orbit.samples(orbit.samples.t_begin() + phase);
  return flow_with_jacobian(sys, x, 0.0, orbit.period, 1e-11).jacobian;
}

// Tangent basis at the orbit point with the given phase: multipliers off the
// unit circle on the requested side, plus the flow direction.
Matrix orbit_tangent(const model::CyclicSystem& sys, const PeriodicOrbit& orbit, double phase, bool unstable) {
  const Matrix m = monodromy_at(sys, orbit, phase);
  const Matrix hyper = subspace(m, [unstable](const std::vector<Complex>& ev) {
    const double r = std::abs(ev.front());
    if (std::abs(r - 1.0) <= kTrivialTolerance) return false;
    return unstable ? r > 1.0 : r < 1.0;
  });
  const Vector x = orbit.samples(orbit.samples.t_begin() + phase);
  Matrix stacked(m.rows(), hyper.cols() + 1);
  stacked << hyper, sys.f(x).normalized();
  return orthonormalize(stacked);
}

Matrix equilibrium_tangent(const Equilibrium& e, bool unstable) {
  return subspace(e.jacobian, [unstable](const std::vector<Complex>& ev) {
    return unstable ? ev.front().real() > 0.0 : ev.front().real() < 0.0;
  });
}

Vector anchor_of(const CriticalElement& element) {
  if (const auto* e = std::get_if<Equilibrium>(&element)) return e->point;
  const auto& p = std::get<PeriodicOrbit>(element);
  return p.samples(p.samples.t_begin());
}

bool hyperbolic(const CriticalElement& element) {
  if (const auto* e = std::get_if<Equilibrium>(&element)) return e->hyperbolic;
  return std::get<PeriodicOrbit>(element).hyperbolic;
}

const char* kind_of(const CriticalElement& element) {
  return std::holds_alternative<Equilibrium>(element) ? "equilibrium" : "periodic";
}

}  // namespace

Trajectory integrate(const model::CyclicSystem& sys, const Vector& x0, double t0, double t1, double tol) {
  if (x0.size() != sys.dimension()) throw Error(ErrorCode::invalid_input, "initial state has wrong dimension");
  if (!all_finite(x0)) throw Error(ErrorCode::invalid_input, "initial state is not finite");
  OdeOptions opt;
  opt.rtol = tol;
  opt.atol = tol * 1e-2;
  opt.max_norm = kDivergenceNorm;
  return solve_ivp([&sys](double, const Vector& y, Vector& dy) { dy = sys.f(y); }, t0, x0, t1, opt);
}

FlowWithJacobian flow_with_jacobian(const model::CyclicSystem& sys, const Vector& x0, double t0, double t1,
                                    double tol) {
  const Eigen::Index n = sys.dimension();
  if (x0.size() != n) throw Error(ErrorCode::invalid_input, "initial state has wrong dimension");
  Vector y0(n + n * n);
  y0.head(n) = x0;
  Eigen::Map<Matrix>(y0.data() + n, n, n).setIdentity();
  OdeOptions opt;
  opt.rtol = tol;
  opt.atol = tol * 1e-2;
  opt.max_norm = kDivergenceNorm;
  auto rhs = [&sys, n](double, const Vector& y, Vector& dy) {
    const Vector x = y.head(n);
    dy.head(n) = sys.f(x);
    Eigen::Map<Matrix>(dy.data() + n, n, n) = sys.jacobian(x) * Eigen::Map<const Matrix>(y.data() + n, n, n);
  };
  const Vector y1 = flow(rhs, t0, y0, t1, opt);
  return {y1.head(n), Eigen::Map<const Matrix>(y1.data() + n, n, n)};
}

linflow::LinearCyclicSystem linearization(const model::CyclicSystem& sys, const Trajectory& traj,
                                          std::optional<double> period) {
  const Matrix m = sign_matrix(frame_of(sys));
  const double t0 = std::min(traj.t_begin(), traj.t_end());
  const double t1 = std::max(traj.t_begin(), traj.t_end());
  auto coefficients = [&sys, &traj, m, t0, t1, period](double t) -> Matrix {
    double s = t;
    if (period) {
      s = std::fmod(t - t0, *period);
      if (s < 0.0) s += *period;
      s += t0;
    }
    s = std::clamp(s, t0, t1);
    return m * sys.jacobian(traj(s)) * m;
  };
  return linflow::LinearCyclicSystem(sys.dimension(), coefficients, period);
}

Equilibrium classify(const model::CyclicSystem& sys, const Vector& point) {
  Equilibrium e;
  e.point = point;
  e.jacobian = sys.jacobian(point);
  e.residual = sys.f(point).cwiseAbs().maxCoeff();
  e.eigenvalues = eigenvalues_of(e.jacobian);
  e.hyperbolic = true;
  for (const Complex& z : e.eigenvalues) {
    if (std::abs(z.real()) <= kHyperbolicTolerance) e.hyperbolic = false;
    if (z.real() > kHyperbolicTolerance) ++e.unstable_dim;
  }
  try {
    const Matrix m = sign_matrix(frame_of(sys));
    const Matrix l = (m * e.jacobian * m).exp();
    e.split = spectra::split(l);
  } catch (const Error&) {
    e.split.reset();
  }
  return e;
}

Equilibrium find_equilibrium(const model::CyclicSystem& sys, const Vector& guess) {
  if (guess.size() != sys.dimension()) throw Error(ErrorCode::invalid_input, "guess has wrong dimension");
  Vector x = guess;
  Vector fx = sys.f(x);
  for (int it = 0; it < 100; ++it) {
    if (!all_finite(fx)) throw Error(ErrorCode::not_found, "vector field not finite along Newton iterates");
    if (fx.cwiseAbs().maxCoeff() <= kNewtonTolerance) {
      Equilibrium e = classify(sys, x);
      e.iterations = it;
      return e;
    }
    Eigen::FullPivLU<Matrix> lu(sys.jacobian(x));
    if (!lu.isInvertible()) throw Error(ErrorCode::not_found, "singular Jacobian during Newton iteration");
    const Vector step = lu.solve(-fx);
    const double r0 = fx.norm();
    double lambda = 1.0;
    Vector trial;
    Vector ftrial;
    for (;;) {
      trial = x + lambda * step;
      ftrial = sys.f(trial);
      if (all_finite(ftrial) && ftrial.norm() < (1.0 - 1e-4 * lambda) * r0) break;
      lambda *= 0.5;
      if (lambda < 1e-8) throw Error(ErrorCode::not_found, "Newton line search stalled");
    }
    x = trial;
    fx = ftrial;
  }
  throw Error(ErrorCode::not_found, "Newton iteration did not converge in 100 steps");
}

std::optional<double> estimate_period(const model::CyclicSystem& sys, const Vector& x, double max_time) {
  const Vector normal = sys.f(x);
  if (normal.norm() < 1e-12) return std::nullopt;
  const Trajectory traj = integrate(sys, x, 0.0, max_time, 1e-10);
  auto g = [&](double t) { return normal.dot(traj(t) - x); };
  bool been_negative = false;
  for (std::size_t k = 1; k < traj.t.size(); ++k) {
    const double ga = g(traj.t[k - 1]);
    const double gb = g(traj.t[k]);
    if (gb < 0.0) been_negative = true;
    if (been_negative && ga < 0.0 && gb >= 0.0) {
      double a = traj.t[k - 1];
      double b = traj.t[k];
      for (int it = 0; it < 100 && b - a > 1e-14 * b; ++it) {
        const double m = 0.5 * (a + b);
        (g(m) < 0.0 ? a : b) = m;
      }
      return 0.5 * (a + b);
    }
  }
  return std::nullopt;
}

PeriodicOrbit find_periodic(const model::CyclicSystem& sys, const Vector& guess_x, double guess_period) {
  const Eigen::Index n = sys.dimension();
  if (guess_x.size() != n) throw Error(ErrorCode::invalid_input, "guess has wrong dimension");
  if (!(guess_period > 0.0)) throw Error(ErrorCode::invalid_input, "period guess must be positive");

  Vector x = guess_x;
  double period = guess_period;
  int iterations = 0;
  double residual = std::numeric_limits<double>::infinity();
  try {
    for (; iterations < 50; ++iterations) {
      const Vector fx = sys.f(x);
      if (fx.norm() < 1e-8) throw Error(ErrorCode::not_found, "iterate collapsed onto an equilibrium");
      const FlowWithJacobian fl = flow_with_jacobian(sys, x, 0.0, period, 1e-11);
      const Vector r = fl.state - x;
      residual = r.cwiseAbs().maxCoeff();
      if (residual <= 0.1 * kPeriodicTolerance) break;
      Matrix k(n + 1, n + 1);
      k.topLeftCorner(n, n) = fl.jacobian - Matrix::Identity(n, n);
      k.topRightCorner(n, 1) = sys.f(fl.state);
      k.bottomLeftCorner(1, n) = fx.transpose();
      k(n, n) = 0.0;
      Vector rhs = Vector::Zero(n + 1);
      rhs.head(n) = -r;
      Eigen::FullPivLU<Matrix> lu(k);
      if (!lu.isInvertible()) throw Error(ErrorCode::not_found, "singular shooting system");
      Vector step = lu.solve(rhs);
      const double scale = std::max(step.head(n).cwiseAbs().maxCoeff() / std::max(1.0, x.cwiseAbs().maxCoeff()),
                                    std::abs(step(n)) / period);
      if (scale > 0.5) step *= 0.5 / scale;
      x += step.head(n);
      period += step(n);
      if (!(period > 0.0) || !all_finite(x)) throw Error(ErrorCode::not_found, "shooting iterate left the domain");
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::not_found) throw;
    throw Error(ErrorCode::not_found, std::string("shooting failed: ") + e.what());
  }
  if (!(residual <= kPeriodicTolerance)) throw Error(ErrorCode::not_found, "shooting did not converge in 50 steps");
  if (period < 1e-3 * guess_period) throw Error(ErrorCode::not_found, "period collapsed towards zero");

  PeriodicOrbit orbit;
  orbit.base_point = x;
  orbit.period = period;
  orbit.newton_iterations = iterations;
  orbit.samples = integrate(sys, x, 0.0, period, 1e-12);
  orbit.closure_error = (orbit.samples.final_state() - x).cwiseAbs().maxCoeff();

  const linflow::LinearCyclicSystem lin = linearization(sys, orbit.samples, period);
  std::vector<double> grid(200);
  for (std::size_t k = 0; k < grid.size(); ++k) grid[k] = period * static_cast<double>(k) / static_cast<double>(grid.size());
  const model::ValidationReport check = linflow::validate_linear(lin, grid);
  if (!check.ok) throw Error(ErrorCode::invalid_input, "linearization along the orbit violates the cyclic sign condition");

  orbit.monodromy = linflow::monodromy(lin, 1e-11);
  orbit.multipliers = eigenvalues_of(orbit.monodromy.value);

  int near_one = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < orbit.multipliers.size(); ++i) {
    const double d = std::abs(orbit.multipliers[i] - 1.0);
    if (d <= kTrivialTolerance) ++near_one;
    if (d < best) {
      best = d;
      orbit.trivial_index = static_cast<int>(i);
    }
  }
  orbit.trivial_multiplier_error = best;
  if (near_one != 1) {
    throw Error(ErrorCode::degenerate_orbit,
                "expected exactly one multiplier within tolerance of 1, found " + std::to_string(near_one));
  }

  const Matrix& mono = orbit.monodromy.value;
  Eigen::JacobiSVD<Matrix> svd(mono - Matrix::Identity(n, n), Eigen::ComputeFullV);
  const Vector eig = svd.matrixV().col(n - 1);
  const Vector v = apply_signs(frame_of(sys), sys.f(x)).normalized();
  const double along = std::abs(eig.dot(v));
  orbit.trivial_alignment = std::atan2((eig - eig.dot(v) * v).norm(), along);

  orbit.hyperbolic = true;
  for (std::size_t i = 0; i < orbit.multipliers.size(); ++i) {
    if (static_cast<int>(i) == orbit.trivial_index) continue;
    const double r = std::abs(orbit.multipliers[i]);
    if (std::abs(r - 1.0) <= kHyperbolicTolerance) orbit.hyperbolic = false;
    if (r > 1.0) ++orbit.unstable_multipliers;
  }
  try {
    orbit.split = spectra::split(mono);
    orbit.h = orbit.split->block_containing_modulus(std::abs(orbit.multipliers[static_cast<std::size_t>(orbit.trivial_index)])) + 1;
  } catch (const Error&) {
    orbit.split.reset();
  }
  return orbit;
}

double distance_to(const CriticalElement& element, const Vector& x) {
  if (const auto* e = std::get_if<Equilibrium>(&element)) return (x - e->point).norm();
  return nearest_on_orbit(std::get<PeriodicOrbit>(element), x).distance;
}

int h_index(const model::CyclicSystem& sys, const Trajectory& traj, Direction direction) {
  const Signs mu = frame_of(sys);
  const double ta = traj.t_begin();
  const double tb = traj.t_end();
  const double span = tb - ta;
  double w0 = 0.0;
  double w1 = 0.0;
  if (direction == Direction::forward) {
    w0 = tb - 0.2 * span;
    w1 = tb;
  } else {
    w0 = ta;
    w1 = ta + 0.2 * span;
  }
  constexpr int samples = 100;
  int value = -1;
  for (int k = 0; k <= samples; ++k) {
    const double t = w0 + (w1 - w0) * k / samples;
    const Vector v = apply_signs(mu, sys.f(traj(t)));
    const signature::LyapunovBounds b = signature::bounds_N(v);
    if (!b.exact || (value >= 0 && b.n_min != value)) {
      throw Error(ErrorCode::inconclusive, "Lyapunov value of the velocity is not settled on the window");
    }
    value = b.n_min;
  }
  return (value + 1) / 2;
}

DifferenceReport difference_signature(const std::vector<Vector>& points, int h_plus, int h_minus, const Signs& mu,
                                      std::size_t pairs, std::uint64_t seed, double min_separation) {
  if (h_plus != h_minus) throw Error(ErrorCode::precondition_violation, "h indices at the two ends differ");
  if (points.size() < 2) throw Error(ErrorCode::invalid_input, "need at least two points");
  const int n = static_cast<int>(points.front().size());
  if (h_plus < 1 || h_plus > block_count(n)) throw Error(ErrorCode::invalid_input, "h out of range");
  if (static_cast<int>(mu.size()) != n) throw Error(ErrorCode::invalid_input, "sign frame has wrong dimension");

  DifferenceReport rep;
  rep.h = h_plus;
  const int target = 2 * h_plus - 1;
  Rng rng(seed);
  const int last = static_cast<int>(points.size()) - 1;
  for (std::size_t k = 0; k < pairs; ++k) {
    const auto i = static_cast<std::size_t>(rng.integer(0, last));
    auto j = static_cast<std::size_t>(rng.integer(0, last - 1));
    if (j >= i) ++j;
    const Vector d = points[j] - points[i];
    const double norm = d.norm();
    if (norm < min_separation) {
      ++rep.skipped;
      continue;
    }
    ++rep.checked;
    const signature::LyapunovBounds b = signature::bounds_N(apply_signs(mu, d / norm));
    if (!b.exact || b.n_min != target) {
      ++rep.violations;
      if (rep.witnesses.size() < 16) rep.witnesses.push_back({points[i], points[j], b});
    }
  }
  return rep;
}

Matrix tangent_basis(const model::CyclicSystem& sys, const CriticalElement& element, bool unstable) {
  if (const auto* e = std::get_if<Equilibrium>(&element)) return equilibrium_tangent(*e, unstable);
  return orbit_tangent(sys, std::get<PeriodicOrbit>(element), 0.0, unstable);
}

int unstable_manifold_dim(const CriticalElement& element) {
  if (const auto* e = std::get_if<Equilibrium>(&element)) return e->unstable_dim;
  return std::get<PeriodicOrbit>(element).unstable_multipliers + 1;
}

bool theorem_applies(bool periodic_involved, int source_unstable_dim, int target_unstable_dim) {
  return periodic_involved || target_unstable_dim < source_unstable_dim;
}

Connection connect(const model::CyclicSystem& sys, const CriticalElement& source, const CriticalElement& target,
                   double offset, double horizon) {
  if (!(horizon > 0.0)) throw Error(ErrorCode::invalid_input, "horizon must be positive");
  if (!(offset >= 0.0)) throw Error(ErrorCode::invalid_input, "offset must be nonnegative");
  Vector direction;
  if (const auto* e = std::get_if<Equilibrium>(&source)) {
    const Matrix u = equilibrium_tangent(*e, true);
    if (u.cols() == 0) throw Error(ErrorCode::precondition_violation, "source has no unstable directions");
    direction = u.col(0);
  } else {
    const auto& p = std::get<PeriodicOrbit>(source);
    const Matrix m = monodromy_at(sys, p, 0.0);
    const Matrix u = subspace(m, [](const std::vector<Complex>& ev) {
      return std::abs(ev.front()) > 1.0 + kTrivialTolerance;
    });
    if (u.cols() == 0) throw Error(ErrorCode::precondition_violation, "source has no unstable directions");
    direction = u.col(0);
  }
  if (direction.sum() < 0.0) direction = -direction;

  Connection c;
  c.trajectory = integrate(sys, anchor_of(source) + offset * direction, 0.0, horizon, 1e-10);
  constexpr int samples = 2000;
  c.approach.reserve(samples + 1);
  for (int k = 0; k <= samples; ++k) {
    const double t = horizon * k / samples;
    const Vector x = c.trajectory(t);
    c.approach.push_back({t, distance_to(source, x), distance_to(target, x)});
  }
  c.terminal_distance = distance_to(target, c.trajectory.final_state());
  c.connected = offset > 0.0 && c.terminal_distance < kConnectTolerance;
  return c;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::transversal: return "transversal";
    case Verdict::not_transversal: return "not-transversal";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

TransversalityReport transversality(const model::CyclicSystem& sys, const CriticalElement& source,
                                    const CriticalElement& target, const Trajectory& conn) {
  if (!hyperbolic(source) || !hyperbolic(target)) {
    throw Error(ErrorCode::invalid_input, "transversality needs hyperbolic critical elements");
  }
  const Eigen::Index n = sys.dimension();
  TransversalityReport rep;
  rep.source_kind = kind_of(source);
  rep.target_kind = kind_of(target);

  const Vector start = conn(conn.t_begin());
  const Vector end = conn.final_state();
  rep.manifold_distance = std::max(distance_to(source, start), distance_to(target, end));

  Matrix u0;
  if (const auto* e = std::get_if<Equilibrium>(&source)) {
    rep.source_anchor = e->point;
    u0 = equilibrium_tangent(*e, true);
  } else {
    const auto& p = std::get<PeriodicOrbit>(source);
    const double phase = nearest_on_orbit(p, start).phase;
    rep.source_anchor = p.samples(p.samples.t_begin() + phase);
    u0 = orbit_tangent(sys, p, phase, true);
  }
  Matrix s0;
  if (const auto* e = std::get_if<Equilibrium>(&target)) {
    rep.target_anchor = e->point;
    s0 = equilibrium_tangent(*e, false);
  } else {
    const auto& p = std::get<PeriodicOrbit>(target);
    const double phase = nearest_on_orbit(p, end).phase;
    rep.target_anchor = p.samples(p.samples.t_begin() + phase);
    s0 = orbit_tangent(sys, p, phase, false);
  }

  rep.source_unstable_dim = unstable_manifold_dim(source);
  rep.target_unstable_dim = unstable_manifold_dim(target);
  const bool periodic = std::holds_alternative<PeriodicOrbit>(source) || std::holds_alternative<PeriodicOrbit>(target);
  rep.theorem_applies = theorem_applies(periodic, rep.source_unstable_dim, rep.target_unstable_dim);
  rep.dimension_consistent = rep.target_unstable_dim <= rep.source_unstable_dim;

  try {
    rep.h_minus = h_index(sys, conn, Direction::backward);
  } catch (const Error&) {
    rep.h_minus = 0;
  }
  try {
    rep.h_plus = h_index(sys, conn, Direction::forward);
  } catch (const Error&) {
    rep.h_plus = 0;
  }

  // Transport in the system's own frame: the linearization is conjugated, so
  // map bases into the standard frame and back.
  const Matrix m = sign_matrix(frame_of(sys));
  const linflow::LinearCyclicSystem lin = linearization(sys, conn);
  rep.midpoint_time = 0.5 * (conn.t_begin() + conn.t_end());
  rep.unstable_basis = u0.cols() > 0
      ? Matrix(m * linflow::propagate_subspace(lin, m * u0, conn.t_begin(), rep.midpoint_time, 1e-10))
      : Matrix(n, 0);
  rep.stable_basis = s0.cols() > 0
      ? Matrix(m * linflow::propagate_subspace(lin, m * s0, conn.t_end(), rep.midpoint_time, 1e-10))
      : Matrix(n, 0);

  Matrix stacked(n, rep.unstable_basis.cols() + rep.stable_basis.cols());
  stacked << rep.unstable_basis, rep.stable_basis;
  if (stacked.cols() > 0) {
    Eigen::JacobiSVD<Matrix> svd(stacked);
    const Vector sv = svd.singularValues();
    rep.singular_values.assign(sv.data(), sv.data() + sv.size());
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > 1e-8 * std::max(smax, 1.0)) ++rep.stacked_rank;
    }
    rep.sigma_min = sv.size() >= n ? sv(n - 1) : 0.0;
  }

  if (rep.manifold_distance > 10.0 * kConnectTolerance) {
    rep.verdict = Verdict::inconclusive;
  } else if (rep.stacked_rank == n && rep.sigma_min > kTransversalTolerance) {
    rep.verdict = Verdict::transversal;
  } else {
    rep.verdict = Verdict::not_transversal;
  }
  return rep;
}

ConnectionStudy study_equilibrium_to_orbit(const model::CyclicSystem& sys, const StudyOptions& options) {
  const int n = sys.dimension();
  ConnectionStudy s;
  Vector guess = options.equilibrium_guess.size() > 0 ? options.equilibrium_guess : Vector::Constant(n, 0.5);
  s.equilibrium = find_equilibrium(sys, guess);

  Vector start = options.transient_start;
  if (start.size() == 0) {
    start.resize(n);
    for (int i = 0; i < n; ++i) start(i) = 0.1 * (i + 1);
  }
  const Vector settled = integrate(sys, start, 0.0, options.transient_time).final_state();
  const std::optional<double> period = estimate_period(sys, settled, options.transient_time);
  if (!period) throw Error(ErrorCode::not_found, "no return to the section after the transient");
  s.orbit = find_periodic(sys, settled, *period);

  const CriticalElement source = s.equilibrium;
  const CriticalElement target = s.orbit;
  s.connection = connect(sys, source, target, options.offset, options.horizon);
  if (!s.connection.connected) {
    throw Error(ErrorCode::not_connected, "trajectory from the equilibrium did not reach the orbit");
  }
  s.report = transversality(sys, source, target, s.connection.trajectory);
  s.h_source = s.report.h_minus;
  s.h_target = s.report.h_plus;
  return s;
}

std::vector<Vector> omega_points(const ConnectionStudy& study, std::size_t per_part) {
  std::vector<Vector> pts;
  pts.reserve(2 * per_part + 1);
  const Trajectory& p = study.orbit.samples;
  for (std::size_t k = 0; k < per_part; ++k) {
    pts.push_back(p(p.t_begin() + study.orbit.period * static_cast<double>(k) / static_cast<double>(per_part)));
  }
  const Trajectory& q = study.connection.trajectory;
  for (std::size_t k = 0; k < per_part; ++k) {
    pts.push_back(q(q.t_begin() + (q.t_end() - q.t_begin()) * static_cast<double>(k) / static_cast<double>(per_part)));
  }
  pts.push_back(study.equilibrium.point);
  return pts;
}

}  // namespace mcfs::orbits
