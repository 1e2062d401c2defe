#include "mcfs/model.hpp"

#include <cmath>
#include <utility>

#include "mcfs/error.hpp"
#include "mcfs/parallel.hpp"
#include "mcfs/random.hpp"

namespace mcfs::model {

Matrix finite_difference_jacobian(const VectorField& f, const Vector& x) {
  const Eigen::Index n = x.size();
  Matrix jac(n, n);
  Vector xp = x, xm = x;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = 1e-6 * (1.0 + std::abs(x[j]));
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    jac.col(j) = (f(xp) - f(xm)) / (2.0 * h);
    xp[j] = xm[j] = x[j];
  }
  return jac;
}

CyclicSystem::CyclicSystem(int n, VectorField f, JacobianField jacobian, Signs delta,
                           std::string label)
    : n_(n),
      f_(std::move(f)),
      jacobian_(std::move(jacobian)),
      delta_(std::move(delta)),
      label_(std::move(label)),
      analytic_jacobian_(static_cast<bool>(jacobian_)) {
  if (n_ < 3) throw Error(ErrorCode::invalid_input, "cyclic systems need n >= 3");
  if (static_cast<int>(delta_.size()) != n_) {
    throw Error(ErrorCode::invalid_input, "delta must have n entries");
  }
  for (int d : delta_) {
    if (d != 1 && d != -1) throw Error(ErrorCode::invalid_input, "delta entries must be +-1");
  }
  if (!f_) throw Error(ErrorCode::invalid_input, "vector field missing");
}

int CyclicSystem::feedback_sign() const noexcept {
  int prod = 1;
  for (int d : delta_) prod *= d;
  return prod;
}

bool CyclicSystem::is_standard() const noexcept {
  if (delta_[0] != -1) return false;
  for (int i = 1; i < n_; ++i) {
    if (delta_[i] != 1) return false;
  }
  return true;
}

void CyclicSystem::check_size(const Vector& x) const {
  if (x.size() != n_) {
    throw Error(ErrorCode::invalid_input, "state has dimension " + std::to_string(x.size()) +
                                              ", system has " + std::to_string(n_));
  }
}

Vector CyclicSystem::f(const Vector& x) const {
  check_size(x);
  return f_(x);
}

Matrix CyclicSystem::jacobian(const Vector& x) const {
  check_size(x);
  if (jacobian_) return jacobian_(x);
  return finite_difference_jacobian(f_, x);
}

ValidationReport validate_feedback(const CyclicSystem& system, const Box& box,
                                   std::size_t num_samples, std::uint64_t seed) {
  const int n = system.dimension();
  if (box.lower.size() != n || box.upper.size() != n) {
    throw Error(ErrorCode::invalid_input, "box dimension does not match the system");
  }
  if (!((box.upper - box.lower).array() > 0.0).all()) {
    throw Error(ErrorCode::invalid_input, "box is degenerate");
  }
  if (num_samples < 1) throw Error(ErrorCode::invalid_input, "num_samples must be >= 1");

  std::vector<std::vector<Violation>> per_sample(num_samples);
  parallel_for(num_samples, [&](std::size_t s) {
    Rng rng(seed, s);
    Vector x(n);
    for (int i = 0; i < n; ++i) x[i] = rng.uniform(box.lower[i], box.upper[i]);
    const Matrix jac = system.jacobian(x);
    auto& out = per_sample[s];
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double v = jac(i, j);
        const int sgn = (v > 0) - (v < 0);
        if (j == cyclic_prev(i, n)) {
          if (sgn != system.delta()[i] || !std::isfinite(v)) out.push_back({x, i, j, sgn, v});
        } else if (j != i && !(std::abs(v) <= kMaskTolerance)) {
          out.push_back({x, i, j, sgn, v});
        }
      }
    }
  });

  ValidationReport report;
  report.samples_checked = num_samples;
  for (auto& v : per_sample) {
    for (auto& item : v) report.violations.push_back(std::move(item));
  }
  report.ok = report.violations.empty();
  return report;
}

Signs normalizing_signs(const Signs& delta) {
  int prod = 1;
  for (int d : delta) prod *= d;
  if (prod != -1) {
    throw Error(ErrorCode::unsupported_feedback_sign, "only negative feedback (Delta = -1) is supported");
  }
  Signs mu(delta.size(), 1);
  for (std::size_t i = 1; i < delta.size(); ++i) mu[i] = mu[i - 1] * delta[i];
  return mu;
}

Normalized normalize(const CyclicSystem& system) {
  Signs mu = normalizing_signs(system.delta());
  const int n = system.dimension();
  Vector m(n);
  for (int i = 0; i < n; ++i) m[i] = mu[i];

  Signs delta(n, 1);
  delta[0] = -1;
  VectorField f = [system, m](const Vector& y) -> Vector {
    return m.cwiseProduct(system.f(m.cwiseProduct(y)));
  };
  JacobianField jac = [system, m](const Vector& y) -> Matrix {
    return m.asDiagonal() * system.jacobian(m.cwiseProduct(y)) * m.asDiagonal();
  };
  return {CyclicSystem(n, std::move(f), std::move(jac), std::move(delta), system.label()),
          std::move(mu)};
}

CyclicSystem goodwin(int n, double hill, double decay) {
  if (n < 3) throw Error(ErrorCode::invalid_input, "goodwin needs n >= 3");
  if (!(hill > 0.0)) throw Error(ErrorCode::invalid_input, "goodwin hill exponent must be > 0");
  if (!(decay > 0.0)) throw Error(ErrorCode::invalid_input, "goodwin decay must be > 0");
  VectorField f = [n, hill, decay](const Vector& x) -> Vector {
    Vector dx(n);
    dx[0] = 1.0 / (1.0 + std::pow(x[n - 1], hill)) - decay * x[0];
    for (int i = 1; i < n; ++i) dx[i] = x[i - 1] - decay * x[i];
    return dx;
  };
  JacobianField jac = [n, hill, decay](const Vector& x) -> Matrix {
    Matrix j = Matrix::Zero(n, n);
    const double z = x[n - 1];
    const double zp = std::pow(z, hill);
    const double denom = 1.0 + zp;
    j(0, 0) = -decay;
    j(0, n - 1) = -hill * std::pow(z, hill - 1.0) / (denom * denom);
    for (int i = 1; i < n; ++i) {
      j(i, i - 1) = 1.0;
      j(i, i) = -decay;
    }
    return j;
  };
  Signs delta(n, 1);
  delta[0] = -1;
  return CyclicSystem(n, std::move(f), std::move(jac), std::move(delta), "goodwin");
}

CyclicSystem linear_ring(const Matrix& a) {
  const auto n = static_cast<int>(a.rows());
  if (a.cols() != n) throw Error(ErrorCode::invalid_input, "linear_ring matrix must be square");
  if (n < 3) throw Error(ErrorCode::invalid_input, "linear_ring needs n >= 3");
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!in_cyclic_mask(i, j, n) && a(i, j) != 0.0) {
        throw Error(ErrorCode::invalid_input, "linear_ring matrix violates the cyclic mask");
      }
    }
  }
  if (!(a(0, n - 1) < 0.0)) throw Error(ErrorCode::invalid_input, "linear_ring needs a_{1n} < 0");
  for (int i = 1; i < n; ++i) {
    if (!(a(i, i - 1) > 0.0)) throw Error(ErrorCode::invalid_input, "linear_ring needs a_{i,i-1} > 0");
  }
  VectorField f = [a](const Vector& x) -> Vector { return a * x; };
  JacobianField jac = [a](const Vector&) -> Matrix { return a; };
  Signs delta(n, 1);
  delta[0] = -1;
  return CyclicSystem(n, std::move(f), std::move(jac), std::move(delta), "linear_ring");
}

namespace {

Matrix matrix_from_json(const nlohmann::json& rows) {
  if (!rows.is_array() || rows.empty()) throw Error(ErrorCode::invalid_input, "matrix must be a nonempty array");
  const auto n = static_cast<Eigen::Index>(rows.size());
  Matrix a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
      throw Error(ErrorCode::invalid_input, "matrix must be square");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!row[static_cast<std::size_t>(j)].is_number()) throw Error(ErrorCode::invalid_input, "matrix entries must be numbers");
      a(i, j) = row[static_cast<std::size_t>(j)].get<double>();
    }
  }
  return a;
}

double number_param(const nlohmann::json& params, const char* key) {
  if (!params.contains(key) || !params[key].is_number()) {
    throw Error(ErrorCode::invalid_input, std::string("missing numeric parameter '") + key + "'");
  }
  return params[key].get<double>();
}

}  // namespace

CyclicSystem builtin(std::string_view name, const nlohmann::json& params) {
  if (name == "goodwin") {
    const double n = number_param(params, "n");
    if (n != std::floor(n)) throw Error(ErrorCode::invalid_input, "goodwin n must be an integer");
    return goodwin(static_cast<int>(n), number_param(params, "p"), number_param(params, "b"));
  }
  if (name == "linear_ring") {
    if (!params.contains("matrix")) throw Error(ErrorCode::invalid_input, "linear_ring needs 'matrix'");
    return linear_ring(matrix_from_json(params["matrix"]));
  }
  throw Error(ErrorCode::invalid_input, "unknown builtin model '" + std::string(name) + "'");
}

CyclicSystem from_json(const nlohmann::json& spec) {
  if (!spec.is_object()) throw Error(ErrorCode::invalid_input, "model spec must be an object");
  if (spec.contains("matrix")) return linear_ring(matrix_from_json(spec["matrix"]));
  if (!spec.contains("name") || !spec["name"].is_string()) {
    throw Error(ErrorCode::invalid_input, "model spec needs 'name' or 'matrix'");
  }
  return builtin(spec["name"].get<std::string>(), spec.value("params", nlohmann::json::object()));
}

}  // namespace mcfs::model
