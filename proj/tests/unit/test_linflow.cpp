#include <cmath>
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "mcfs/error.hpp"
#include "mcfs/linflow.hpp"
#include "mcfs/random.hpp"
#include "mcfs/spectra.hpp"

using namespace mcfs;
using linflow::LinearCyclicSystem;

namespace {

LinearCyclicSystem trig_example() {
  // subdiagonal 1.5 + sin t, corner -1 - 0.5 cos t, diagonal -0.2
  return LinearCyclicSystem(4, [](double t) {
    Matrix a = Matrix::Identity(4, 4) * -0.2;
    for (int i = 1; i < 4; ++i) a(i, i - 1) = 1.5 + std::sin(t);
    a(0, 3) = -1.0 - 0.5 * std::cos(t);
    return a;
  }, 2.0 * std::numbers::pi);
}

std::vector<double> grid(double a, double b, int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) g[static_cast<std::size_t>(k)] = a + (b - a) * k / (n - 1);
  return g;
}

}  // namespace

TEST_CASE("validate_linear") {
  const auto ref = LinearCyclicSystem::constant(spectra::reference_matrix(5));
  CHECK(linflow::validate_linear(ref, grid(0, 10, 50)).ok);
  CHECK(linflow::validate_linear(trig_example(), grid(0, 20, 400)).ok);
  const LinearCyclicSystem bad(3, [](double t) {
    Matrix a = spectra::reference_matrix(3);
    a(1, 0) = std::sin(t);
    return a;
  });
  const std::vector<double> g{0.5, std::numbers::pi + 0.1, 5.0};
  const auto rep = linflow::validate_linear(bad, g);
  CHECK_FALSE(rep.ok);
  REQUIRE_FALSE(rep.violations.empty());
  CHECK(rep.violations.front().point(0) == doctest::Approx(std::numbers::pi + 0.1));
}

TEST_CASE("transition basics") {
  const auto sys = trig_example();
  CHECK((linflow::transition(sys, 1.3, 1.3).value - Matrix::Identity(4, 4)).norm() == 0.0);
  const auto ref = LinearCyclicSystem::constant(spectra::reference_matrix(4));
  for (double t : {0.5, 2.0, 7.0}) {
    const auto phi = linflow::transition(ref, 0.0, t, 1e-10);
    CHECK(phi.value.determinant() == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(phi.abel_residual < 1e-7);
    const Matrix expm = (t * spectra::reference_matrix(4)).exp();
    CHECK((phi.value - expm).norm() < 1e-7 * expm.norm());
  }
}

TEST_CASE("quarter turn of the three-cycle reference flow") {
  // exp(tR) for R the 3x3 reference matrix has closed form through its eigenvalues.
  const double t = std::numbers::pi / 2;
  const auto ref = LinearCyclicSystem::constant(spectra::reference_matrix(3));
  const auto phi = linflow::transition(ref, 0.0, t, 1e-11);
  ComplexVector lambda(3);
  Eigen::MatrixXcd v(3, 3);
  const auto pairs = spectra::reference_eigen(3);
  for (int k = 0; k < 3; ++k) {
    lambda(k) = std::exp(t * pairs[static_cast<std::size_t>(k)].lambda);
    v.col(k) = pairs[static_cast<std::size_t>(k)].eta;
  }
  const Eigen::MatrixXcd closed = v * lambda.asDiagonal() * v.inverse();
  CHECK((phi.value.cast<Complex>() - closed).norm() < 1e-8);
}

TEST_CASE("cocycle, inverse and Abel identities") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto sys = linflow::random_periodic(3 + static_cast<int>(seed % 5), seed);
    const auto p20 = linflow::transition(sys, 0.0, 2.0, 1e-10);
    const auto p21 = linflow::transition(sys, 1.0, 2.0, 1e-10);
    const auto p10 = linflow::transition(sys, 0.0, 1.0, 1e-10);
    CHECK((p21.value * p10.value - p20.value).norm() <= 1e-8 * p20.value.norm());
    const auto p02 = linflow::transition(sys, 2.0, 0.0, 1e-10);
    const auto n = p20.value.rows();
    CHECK((p02.value * p20.value - Matrix::Identity(n, n)).norm() <= 1e-8 * p20.value.norm() * p02.value.norm());
    CHECK(p20.abel_residual <= 1e-7);
    CHECK(p02.abel_residual <= 1e-7);
  }
}

TEST_CASE("monodromy of a constant system is the matrix exponential") {
  const Matrix a = spectra::reference_matrix(5) - 0.3 * Matrix::Identity(5, 5);
  const auto sys = LinearCyclicSystem::constant(a, 1.7);
  const auto m = linflow::monodromy(sys, 1e-10);
  const Matrix e = (1.7 * a).exp();
  CHECK((m.value - e).norm() < 1e-8 * e.norm());
  try {
    (void)linflow::monodromy(LinearCyclicSystem::constant(a));
    FAIL("monodromy without period");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::missing_period);
  }
}

TEST_CASE("propagate_subspace") {
  const auto sys = linflow::random_periodic(5, 3);
  const Matrix full = linflow::propagate_subspace(sys, Matrix::Identity(5, 5), 0.0, 6.0);
  CHECK(Eigen::JacobiSVD<Matrix>(full).singularValues().minCoeff() > 1e-8);
  const Vector x = (Vector(5) << 1, 1, 1, 1, 1).finished();
  const Matrix one = linflow::propagate_subspace(sys, x, 0.0, 5.0);
  CHECK(signature::count_N(Vector(one.col(0))) == 1);
  Matrix dependent(5, 2);
  dependent.col(0) = x;
  dependent.col(1) = 2 * x;
  try {
    (void)linflow::propagate_subspace(sys, dependent, 0.0, 1.0);
    FAIL("dependent basis accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::dependent_basis);
  }
}

TEST_CASE("W1+W2 of the reference flow stays in K_2") {
  const int n = 7;
  const auto s = spectra::split((1.0 * spectra::reference_matrix(n)).exp());
  Matrix basis(n, 4);
  basis << s.blocks[0], s.blocks[1];
  const auto sys = LinearCyclicSystem::constant(spectra::reference_matrix(n));
  const Matrix moved = linflow::propagate_subspace(sys, basis, 0.0, 2.5);
  Rng rng(12);
  for (int k = 0; k < 200; ++k) {
    Vector c(4);
    for (int i = 0; i < 4; ++i) c(i) = rng.normal();
    CHECK(signature::in_cone((moved * c).normalized(), 2, signature::ConeSide::lower));
  }
}

TEST_CASE("sample_N_along") {
  const auto ref = LinearCyclicSystem::constant(spectra::reference_matrix(4));
  const auto g = grid(0.0, 5.0, 101);
  const auto one = linflow::sample_N_along(ref, (Vector(4) << 1, 1, 1, 1).finished(), g);
  for (const auto& s : one.samples) CHECK(s.bounds.n_max == 1);
  CHECK(one.nonincreasing);
  const auto jump = linflow::sample_N_along(ref, (Vector(4) << 1, 0, 0, 0).finished(), g);
  CHECK(jump.samples.front().bounds.n_max == 3);
  CHECK(jump.samples[1].bounds.exact);
  CHECK(jump.samples[1].bounds.n_min == 1);
}

TEST_CASE("monotonicity on random periodic systems") {
  const auto g = grid(-20.0, 20.0, 500);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const int n = 3 + static_cast<int>(seed % 6);
    const auto sys = linflow::random_periodic(n, 500 + seed);
    Rng rng(seed);
    Vector x0(n);
    for (int i = 0; i < n; ++i) x0(i) = rng.normal();
    const auto trace = linflow::sample_N_along(sys, x0, g);
    CHECK(trace.nonincreasing);
    CHECK(trace.increases.empty());
  }
}

TEST_CASE("cone invariance") {
  const auto ref = LinearCyclicSystem::constant(spectra::reference_matrix(5));
  const auto rep = linflow::verify_cone_invariance(ref, 1, 1.0, 1000, 1);
  CHECK(rep.ok());
  CHECK(rep.boundary_samples > 0);
  for (int n = 3; n <= 8; ++n) {
    const auto sys = linflow::random_periodic(n, 40 + static_cast<std::uint64_t>(n));
    for (int h = 1; h <= block_count(n); ++h) {
      for (double t : {0.1, 1.0, 5.0}) {
        const auto r = linflow::verify_cone_invariance(sys, h, t, 300, static_cast<std::uint64_t>(h));
        CHECK(r.ok());
      }
    }
  }
}

TEST_CASE("random sign patterns and coefficient bounds") {
  Rng rng(2);
  for (int k = 0; k < 200; ++k) {
    const int n = rng.integer(3, 10);
    const int target = 2 * rng.integer(0, block_count(n) - 1) + 1;
    const Signs s = linflow::random_sign_pattern(n, target, rng);
    CHECK(signature::count_N(s) == target);
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto sys = linflow::random_periodic(6, seed);
    REQUIRE(sys.period());
    REQUIRE(sys.spec());
    for (const auto& p : sys.spec()->sub) CHECK(p.lower_bound() > 0.0);
    CHECK(sys.spec()->corner.upper_bound() < 0.0);
    CHECK(linflow::validate_linear(sys, grid(0.0, *sys.period(), 200)).ok);
  }
}
