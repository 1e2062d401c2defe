#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "mcfs/error.hpp"
#include "mcfs/linflow.hpp"
#include "mcfs/model.hpp"
#include "mcfs/orbits.hpp"
#include "mcfs/random.hpp"
#include "mcfs/spectra.hpp"

using namespace mcfs;
using orbits::CriticalElement;

namespace {

const model::CyclicSystem& goodwin3() {
  static const auto sys = model::goodwin(3, 10.0, 0.4);
  return sys;
}

const orbits::ConnectionStudy& study() {
  static const auto s = orbits::study_equilibrium_to_orbit(goodwin3());
  return s;
}

// b^n z (1 + z^p) = 1 by bisection; the equilibrium chain is x_i = x_{i-1} / b.
double goodwin_root(int n, double p, double b) {
  double lo = 0.0;
  double hi = 1.0 / std::pow(b, n);
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (std::pow(b, n) * mid * (1.0 + std::pow(mid, p)) < 1.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

int expect_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return static_cast<int>(e.code());
  }
  return -1;
}

}  // namespace

TEST_CASE("integration from an equilibrium is constant") {
  const auto e = orbits::find_equilibrium(goodwin3(), Vector::Constant(3, 0.5));
  const auto traj = orbits::integrate(goodwin3(), e.point, 0.0, 50.0);
  CHECK((traj.final_state() - e.point).norm() < 1e-9);
}

TEST_CASE("linear ring trajectories match the transition matrix") {
  const Matrix a = spectra::reference_matrix(4) - 0.2 * Matrix::Identity(4, 4);
  const auto sys = model::linear_ring(a);
  const Vector x0 = (Vector(4) << 0.3, -1, 2, 0.5).finished();
  const auto traj = orbits::integrate(sys, x0, 0.0, 3.0, 1e-11);
  const auto phi = linflow::transition(linflow::LinearCyclicSystem::constant(a), 0.0, 3.0, 1e-11);
  CHECK((traj.final_state() - phi.value * x0).norm() < 1e-8);
}

TEST_CASE("goodwin forward trajectories stay bounded") {
  Rng rng(1);
  for (int k = 0; k < 5; ++k) {
    Vector x0(3);
    for (int i = 0; i < 3; ++i) x0(i) = rng.uniform(0.0, 3.0);
    const auto traj = orbits::integrate(goodwin3(), x0, 0.0, 300.0);
    for (const auto& y : traj.y) CHECK(y.cwiseAbs().maxCoeff() < 20.0);
  }
}

TEST_CASE("flow Jacobian matches finite differences of the flow") {
  const Vector x = (Vector(3) << 0.4, 0.8, 1.1).finished();
  const auto fj = orbits::flow_with_jacobian(goodwin3(), x, 0.0, 2.0);
  for (int j = 0; j < 3; ++j) {
    Vector xp = x, xm = x;
    xp(j) += 1e-6;
    xm(j) -= 1e-6;
    const Vector col = (orbits::integrate(goodwin3(), xp, 0.0, 2.0, 1e-12).final_state() -
                        orbits::integrate(goodwin3(), xm, 0.0, 2.0, 1e-12).final_state()) / 2e-6;
    CHECK((col - fj.jacobian.col(j)).norm() < 1e-5);
  }
}

TEST_CASE("goodwin equilibrium against the scalar root") {
  for (int n : {3, 4, 6}) {
    const auto sys = model::goodwin(n, 10.0, 0.4);
    const auto e = orbits::find_equilibrium(sys, Vector::Constant(n, 0.5));
    const double z = goodwin_root(n, 10.0, 0.4);
    CHECK(e.point(n - 1) == doctest::Approx(z).epsilon(1e-9));
    for (int i = 1; i < n; ++i) CHECK(e.point(i) == doctest::Approx(e.point(i - 1) / 0.4).epsilon(1e-9));
    CHECK(e.residual <= orbits::kNewtonTolerance);
  }
  const auto e = orbits::find_equilibrium(goodwin3(), Vector::Constant(3, 0.5));
  CHECK(e.unstable_dim == 2);
  CHECK(e.hyperbolic);
  REQUIRE(e.split);
  CHECK(e.split->block_count() == 2);
}

TEST_CASE("linear ring equilibrium is the origin") {
  const Matrix a = spectra::reference_matrix(5) - 0.1 * Matrix::Identity(5, 5);
  const auto e = orbits::find_equilibrium(model::linear_ring(a), Vector::Constant(5, 0.7));
  CHECK(e.point.norm() < 1e-10);
  Eigen::EigenSolver<Matrix> es(a);
  int positive = 0;
  for (Eigen::Index i = 0; i < 5; ++i) positive += es.eigenvalues()(i).real() > 0.0;
  CHECK(e.unstable_dim == positive);
}

TEST_CASE("equilibrium not found") {
  // f_1 = exp(-x_n) + 1 never vanishes.
  const model::CyclicSystem sys(
      3,
      [](const Vector& x) {
        Vector f(3);
        f << std::exp(-x(2)) + 1.0, x(0) - x(1), x(1) - x(2);
        return f;
      },
      {}, Signs{-1, 1, 1});
  CHECK(expect_code([&] { (void)orbits::find_equilibrium(sys, Vector::Constant(3, 1.0)); }) ==
        static_cast<int>(ErrorCode::not_found));
}

TEST_CASE("goodwin periodic orbit") {
  const auto& o = study().orbit;
  CHECK(o.period > 0.0);
  CHECK(o.closure_error < 1e-7);
  CHECK(o.trivial_multiplier_error <= orbits::kTrivialTolerance);
  CHECK(o.trivial_alignment <= 1e-4);
  CHECK(o.hyperbolic);
  CHECK(o.unstable_multipliers == 0);
  int near = 0;
  for (const Complex& m : o.multipliers) near += std::abs(m - 1.0) <= orbits::kTrivialTolerance;
  CHECK(near == 1);
  REQUIRE(o.split);
  // h from the split agrees with the Lyapunov value of the velocity.
  CHECK(o.h == orbits::h_index(goodwin3(), o.samples, orbits::Direction::forward));
  CHECK(o.h == 1);
  // Linearization along the orbit is a valid linear cyclic system.
  const auto lin = orbits::linearization(goodwin3(), o.samples, o.period);
  std::vector<double> grid(1000);
  for (std::size_t k = 0; k < grid.size(); ++k) grid[k] = o.period * static_cast<double>(k) / 1000.0;
  CHECK(linflow::validate_linear(lin, grid).ok);
  // Monodromy through the variational equation agrees.
  const auto fj = orbits::flow_with_jacobian(goodwin3(), o.base_point, 0.0, o.period);
  CHECK((fj.jacobian - o.monodromy.value).norm() < 1e-6);
}

TEST_CASE("N of the velocity is constant over the orbit") {
  const auto& o = study().orbit;
  for (int k = 0; k < 200; ++k) {
    const double t = o.period * k / 200.0;
    const auto b = signature::bounds_N(goodwin3().f(o.samples(t)));
    CHECK(b.exact);
    CHECK(b.n_min == 2 * o.h - 1);
  }
}

TEST_CASE("restart from a perturbed orbit point reproduces the period") {
  const auto& o = study().orbit;
  const Vector start = o.samples(0.37 * o.period) + Vector::Constant(3, 1e-4);
  const auto again = orbits::find_periodic(goodwin3(), start, o.period * 1.01);
  CHECK(std::abs(again.period - o.period) <= 1e-6 * o.period);
}

TEST_CASE("linear ring has no isolated periodic orbit") {
  const auto sys = model::linear_ring(spectra::reference_matrix(4) - 0.1 * Matrix::Identity(4, 4));
  CHECK(expect_code([&] { (void)orbits::find_periodic(sys, Vector::Constant(4, 1.0), 5.0); }) ==
        static_cast<int>(ErrorCode::not_found));
}

TEST_CASE("h_index on a constant trajectory is inconclusive") {
  const auto& e = study().equilibrium;
  const auto traj = orbits::integrate(goodwin3(), e.point, 0.0, 10.0);
  CHECK(expect_code([&] { (void)orbits::h_index(goodwin3(), traj, orbits::Direction::forward); }) ==
        static_cast<int>(ErrorCode::inconclusive));
}

TEST_CASE("difference signature") {
  const auto& s = study();
  CHECK(s.h_target == s.orbit.h);
  const auto pts = orbits::omega_points(s, 500);
  const auto rep = orbits::difference_signature(pts, s.h_source, s.h_target, Signs{1, 1, 1}, 1000, 3);
  CHECK(rep.ok());
  CHECK(rep.checked == 1000);
  // Nearby points on the orbit.
  std::vector<Vector> close;
  for (int k = 0; k < 50; ++k) close.push_back(s.orbit.samples(1e-3 * k));
  CHECK(orbits::difference_signature(close, 1, 1, Signs{1, 1, 1}, 200, 4).ok());
  CHECK(expect_code([&] { (void)orbits::difference_signature(pts, 1, 2, Signs{1, 1, 1}, 10, 1); }) ==
        static_cast<int>(ErrorCode::precondition_violation));
}

TEST_CASE("connection from the equilibrium reaches the orbit") {
  const auto& s = study();
  CHECK(s.connection.connected);
  CHECK(s.connection.terminal_distance < 1e-6);
  CHECK(s.connection.approach.front().to_source < 1e-5);
  const CriticalElement src = s.equilibrium;
  const CriticalElement dst = s.orbit;
  const auto idle = orbits::connect(goodwin3(), src, dst, 0.0, 50.0);
  CHECK_FALSE(idle.connected);
  CHECK((idle.trajectory.final_state() - s.equilibrium.point).norm() < 1e-9);
  CHECK(expect_code([&] { (void)orbits::connect(goodwin3(), dst, src, 1e-6, 10.0); }) ==
        static_cast<int>(ErrorCode::precondition_violation));
}

TEST_CASE("transversality verdict on the demo") {
  const auto& r = study().report;
  CHECK(r.verdict == orbits::Verdict::transversal);
  CHECK(r.sigma_min > orbits::kTransversalTolerance);
  CHECK(r.stacked_rank == 3);
  CHECK(r.unstable_basis.cols() == 2);
  CHECK(r.stable_basis.cols() == 3);
  CHECK(r.source_unstable_dim == 2);
  CHECK(r.target_unstable_dim == 1);
  CHECK(r.theorem_applies);
  CHECK(r.dimension_consistent);
  CHECK(r.h_minus == 1);
  CHECK(r.h_plus == 1);
}

TEST_CASE("transport keeps dimension") {
  const auto& s = study();
  const auto lin = orbits::linearization(goodwin3(), s.connection.trajectory);
  const double mid = 0.5 * (s.connection.trajectory.t_begin() + s.connection.trajectory.t_end());
  const Matrix full = linflow::propagate_subspace(lin, Matrix::Identity(3, 3), 0.0, mid, 1e-9);
  CHECK(Eigen::JacobiSVD<Matrix>(full).singularValues().minCoeff() > 1e-8);
  const Matrix u = orbits::tangent_basis(goodwin3(), s.equilibrium, true);
  const Matrix moved = linflow::propagate_subspace(lin, u, 0.0, mid, 1e-9);
  CHECK(moved.cols() == 2);
  CHECK(Eigen::JacobiSVD<Matrix>(moved).singularValues().minCoeff() > 1e-8);
}

TEST_CASE("connection that misses the target is inconclusive") {
  const auto& s = study();
  const CriticalElement src = s.equilibrium;
  const CriticalElement dst = s.orbit;
  const auto short_run = orbits::integrate(goodwin3(), s.connection.trajectory(0.0), 0.0, 5.0);
  const auto r = orbits::transversality(goodwin3(), src, dst, short_run);
  CHECK(r.verdict == orbits::Verdict::inconclusive);
}

TEST_CASE("theorem applicability for two equilibria") {
  CHECK_FALSE(orbits::theorem_applies(false, 2, 2));
  CHECK(orbits::theorem_applies(false, 2, 1));
  CHECK(orbits::theorem_applies(true, 1, 1));
}

TEST_CASE("non-hyperbolic input is rejected") {
  auto e = study().equilibrium;
  e.hyperbolic = false;
  const CriticalElement src = e;
  const CriticalElement dst = study().orbit;
  CHECK(expect_code([&] { (void)orbits::transversality(goodwin3(), src, dst, study().connection.trajectory); }) ==
        static_cast<int>(ErrorCode::invalid_input));
}
