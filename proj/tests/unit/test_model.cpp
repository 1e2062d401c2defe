#include <cmath>

#include "doctest.h"
#include "mcfs/error.hpp"
#include "mcfs/model.hpp"
#include "mcfs/random.hpp"
#include "mcfs/spectra.hpp"

using namespace mcfs;

namespace {

Matrix ring(int n, double corner) {
  Matrix a = Matrix::Zero(n, n);
  for (int i = 1; i < n; ++i) a(i, i - 1) = 1.0;
  a(0, n - 1) = corner;
  return a;
}

// Ring with arbitrary coupling signs, built directly rather than via linear_ring.
model::CyclicSystem signed_ring(const Signs& delta) {
  const int n = static_cast<int>(delta.size());
  Matrix a = Matrix::Identity(n, n) * -0.5;
  for (int i = 0; i < n; ++i) a(i, (i + n - 1) % n) = 0.8 * delta[static_cast<std::size_t>(i)];
  model::VectorField f = [a](const Vector& x) -> Vector {
    Vector y = a * x;
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += 0.1 * std::sin(x(i));
    return y;
  };
  return model::CyclicSystem(n, f, {}, delta, "signed");
}

}  // namespace

TEST_CASE("linear ring validation") {
  const auto ok = model::validate_feedback(model::linear_ring(ring(4, -1.0)), model::Box::cube(4, -1, 1), 100, 1);
  CHECK(ok.ok);
  CHECK(ok.samples_checked == 100);
  CHECK_THROWS_AS(model::linear_ring(ring(4, 1.0)), Error);
}

TEST_CASE("flipped corner is reported at row 1") {
  const Matrix a = ring(4, 1.0);
  const model::CyclicSystem sys(4, [a](const Vector& x) -> Vector { return a * x; }, [a](const Vector&) -> Matrix { return a; },
                                Signs{-1, 1, 1, 1});
  const auto rep = model::validate_feedback(sys, model::Box::cube(4, -1, 1), 100, 1);
  CHECK_FALSE(rep.ok);
  REQUIRE_FALSE(rep.violations.empty());
  CHECK(rep.violations.front().row == 0);
  CHECK(rep.violations.front().column == 3);
}

TEST_CASE("mask violation is detected") {
  Matrix a = ring(4, -1.0);
  a(2, 0) = 0.3;
  const model::CyclicSystem sys(4, [a](const Vector& x) -> Vector { return a * x; }, [a](const Vector&) -> Matrix { return a; },
                                Signs{-1, 1, 1, 1});
  CHECK_FALSE(model::validate_feedback(sys, model::Box::cube(4, -1, 1), 20, 3).ok);
}

TEST_CASE("goodwin passes on the positive box") {
  const auto sys = model::goodwin(3, 10.0, 0.4);
  CHECK(sys.feedback_sign() == -1);
  CHECK(sys.is_standard());
  CHECK(model::validate_feedback(sys, model::Box::cube(3, 0.01, 5.0), 2000, 11).ok);
  for (int n : {4, 5, 8}) CHECK(model::validate_feedback(model::goodwin(n, 8.0, 0.5), model::Box::cube(n, 0.01, 5.0), 500, 2).ok);
  CHECK_THROWS_AS(model::goodwin(3, -1.0, 0.4), Error);
  CHECK_THROWS_AS(model::goodwin(3, 10.0, 0.0), Error);
  CHECK_THROWS_AS(model::goodwin(2, 10.0, 0.4), Error);
}

TEST_CASE("goodwin Jacobian matches finite differences") {
  const auto sys = model::goodwin(4, 10.0, 0.4);
  Rng rng(5);
  for (int k = 0; k < 20; ++k) {
    Vector x(4);
    for (int i = 0; i < 4; ++i) x(i) = rng.uniform(0.1, 2.0);
    const Matrix fd = model::finite_difference_jacobian([&](const Vector& y) { return sys.f(y); }, x);
    CHECK((fd - sys.jacobian(x)).cwiseAbs().maxCoeff() < 1e-6 * std::max(1.0, sys.jacobian(x).cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("reference ring is standard") {
  const auto sys = model::linear_ring(spectra::reference_matrix(5));
  CHECK(sys.delta() == Signs{-1, 1, 1, 1, 1});
}

TEST_CASE("normalizing signs") {
  CHECK(model::normalizing_signs({-1, 1, 1}) == Signs{1, 1, 1});
  CHECK(model::normalizing_signs({1, 1, -1}) == Signs{1, 1, -1});
  CHECK(model::normalizing_signs({1, -1, -1, -1}) == Signs{1, -1, 1, -1});
  try {
    (void)model::normalizing_signs({1, 1, 1});
    FAIL("positive feedback accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unsupported_feedback_sign);
  }
}

TEST_CASE("normalized delta is standard and conjugation is exact") {
  for (const Signs& delta : {Signs{1, 1, -1}, Signs{1, -1, -1, -1}, Signs{-1, -1, -1, 1, 1}, Signs{-1, 1, 1}}) {
    const auto sys = signed_ring(delta);
    const auto norm = model::normalize(sys);
    CHECK(norm.system.is_standard());
    const auto n = static_cast<Eigen::Index>(delta.size());
    // delta'_i = delta_i mu_i mu_{i-1}
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto prev = static_cast<std::size_t>((i + n - 1) % n);
      const int d = delta[static_cast<std::size_t>(i)] * norm.mu[static_cast<std::size_t>(i)] * norm.mu[prev];
      CHECK(d == norm.system.delta()[static_cast<std::size_t>(i)]);
    }
    CHECK(model::validate_feedback(norm.system, model::Box::cube(static_cast<int>(n), -2, 2), 200, 4).ok);
    Rng rng(9);
    for (int k = 0; k < 50; ++k) {
      Vector x(n);
      for (Eigen::Index i = 0; i < n; ++i) x(i) = rng.uniform(-2, 2);
      Vector mx = x;
      for (Eigen::Index i = 0; i < n; ++i) mx(i) *= norm.mu[static_cast<std::size_t>(i)];
      Vector lhs = sys.f(x);
      for (Eigen::Index i = 0; i < n; ++i) lhs(i) *= norm.mu[static_cast<std::size_t>(i)];
      const Vector rhs = norm.system.f(mx);
      for (Eigen::Index i = 0; i < n; ++i) CHECK(std::abs(lhs(i) - rhs(i)) <= 1e-12 * std::max(1.0, std::abs(lhs(i))));
    }
  }
}

TEST_CASE("normalizing a standard system is the identity") {
  const auto norm = model::normalize(model::goodwin(4, 10.0, 0.4));
  CHECK(norm.mu == Signs{1, 1, 1, 1});
}

TEST_CASE("system construction errors") {
  model::VectorField f = [](const Vector& x) { return x; };
  CHECK_THROWS_AS(model::CyclicSystem(2, f, {}, Signs{-1, 1}), Error);
  CHECK_THROWS_AS(model::CyclicSystem(3, f, {}, Signs{-1, 1}), Error);
  CHECK_THROWS_AS(model::CyclicSystem(3, f, {}, Signs{-1, 0, 1}), Error);
  const model::CyclicSystem sys(3, f, {}, Signs{-1, 1, 1});
  CHECK_FALSE(sys.has_analytic_jacobian());
  CHECK_THROWS_AS((void)sys.f(Vector::Zero(4)), Error);
}

TEST_CASE("model specs from JSON") {
  const auto g = model::from_json(nlohmann::json::parse(R"({"name": "goodwin", "params": {"n": 4, "p": 9, "b": 0.3}})"));
  CHECK(g.dimension() == 4);
  CHECK(g.label() == "goodwin");
  const auto r = model::from_json(nlohmann::json::parse(R"({"matrix": [[0,0,-1],[1,0,0],[0,1,0]]})"));
  CHECK(r.dimension() == 3);
  CHECK_THROWS_AS(model::from_json(nlohmann::json::parse(R"({"name": "lorenz"})")), Error);
  CHECK_THROWS_AS(model::from_json(nlohmann::json::parse(R"({"name": "goodwin", "params": {"n": 3}})")), Error);
  CHECK_THROWS_AS(model::from_json(nlohmann::json::parse(R"({"matrix": [[0,1],[1,0,0]]})")), Error);
}
