#include "mcfs/linflow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "mcfs/error.hpp"
#include "mcfs/ode.hpp"
#include "mcfs/parallel.hpp"
#include "mcfs/random.hpp"

namespace mcfs::linflow {

double TrigPoly::value(double t, double frequency) const {
  double v = constant;
  for (std::size_t k = 0; k < cos.size(); ++k) v += cos[k] * std::cos(static_cast<double>(k + 1) * frequency * t);
  for (std::size_t k = 0; k < sin.size(); ++k) v += sin[k] * std::sin(static_cast<double>(k + 1) * frequency * t);
  return v;
}

double TrigPoly::lower_bound() const {
  double amp = 0.0;
  for (double c : cos) amp += std::abs(c);
  for (double s : sin) amp += std::abs(s);
  return constant - amp;
}

double TrigPoly::upper_bound() const { return 2.0 * constant - lower_bound(); }

Matrix CoefficientSpec::evaluate(double t) const {
  Matrix a = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) a(i, i) = diag[static_cast<std::size_t>(i)].value(t, frequency);
  for (int i = 1; i < n; ++i) a(i, i - 1) = sub[static_cast<std::size_t>(i - 1)].value(t, frequency);
  a(0, n - 1) = corner.value(t, frequency);
  return a;
}

LinearCyclicSystem::LinearCyclicSystem(int n, CoefficientFn a, std::optional<double> period)
    : n_(n), a_(std::move(a)), period_(period) {
  if (n_ < 3) throw Error(ErrorCode::invalid_input, "linear cyclic systems need n >= 3");
  if (!a_) throw Error(ErrorCode::invalid_input, "coefficient function missing");
  if (period_ && !(*period_ > 0.0)) throw Error(ErrorCode::invalid_input, "period must be positive");
}

LinearCyclicSystem::LinearCyclicSystem(CoefficientSpec spec)
    : LinearCyclicSystem(spec.n, [spec](double t) { return spec.evaluate(t); }, spec.period) {
  if (static_cast<int>(spec.diag.size()) != spec.n || static_cast<int>(spec.sub.size()) != spec.n - 1) {
    throw Error(ErrorCode::invalid_input, "coefficient spec has wrong entry counts");
  }
  spec_ = std::move(spec);
}

LinearCyclicSystem LinearCyclicSystem::constant(const Matrix& a, std::optional<double> period) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::invalid_input, "matrix must be square");
  const auto n = static_cast<int>(a.rows());
  CoefficientSpec spec;
  spec.n = n;
  spec.period = period;
  spec.frequency = period ? 2.0 * std::numbers::pi / *period : 0.0;
  spec.diag.resize(static_cast<std::size_t>(n));
  spec.sub.resize(static_cast<std::size_t>(std::max(0, n - 1)));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!model::in_cyclic_mask(i, j, n) && a(i, j) != 0.0) {
        throw Error(ErrorCode::invalid_input, "matrix violates the cyclic mask");
      }
    }
    spec.diag[static_cast<std::size_t>(i)].constant = a(i, i);
    if (i > 0) spec.sub[static_cast<std::size_t>(i - 1)].constant = a(i, i - 1);
  }
  if (n >= 3) spec.corner.constant = a(0, n - 1);
  return LinearCyclicSystem(std::move(spec));
}

model::ValidationReport validate_linear(const LinearCyclicSystem& sys, std::span<const double> grid) {
  if (grid.empty()) throw Error(ErrorCode::invalid_input, "grid must be nonempty");
  const int n = sys.dimension();
  model::ValidationReport report;
  report.samples_checked = grid.size();
  for (double t : grid) {
    const Matrix a = sys.coefficients(t);
    if (a.rows() != n || a.cols() != n) throw Error(ErrorCode::invalid_input, "A(t) has wrong shape");
    Vector when(1);
    when[0] = t;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double v = a(i, j);
        const int sgn = (v > 0) - (v < 0);
        const bool corner = (i == 0 && j == n - 1);
        const bool sub = (i > 0 && j == i - 1);
        bool bad = false;
        if (corner) bad = !(v < 0.0);
        else if (sub) bad = !(v > 0.0);
        else if (i != j) bad = !(std::abs(v) <= model::kMaskTolerance);
        else bad = !std::isfinite(v);
        if (bad) report.violations.push_back({when, i, j, sgn, v});
      }
    }
  }
  report.ok = report.violations.empty();
  return report;
}

namespace {

OdeOptions options_for(double tol) {
  OdeOptions opt;
  opt.rtol = tol;
  opt.atol = tol * 1e-2;
  return opt;
}

}  // namespace

TransitionMatrix transition(const LinearCyclicSystem& sys, double t0, double t1, double tol) {
  const int n = sys.dimension();
  const Eigen::Index nn = static_cast<Eigen::Index>(n) * n;
  // State: column-major Phi followed by the running integral of tr A.
  Vector y0 = Vector::Zero(nn + 1);
  Eigen::Map<Matrix>(y0.data(), n, n).setIdentity();
  Rhs rhs = [&sys, n, nn](double t, const Vector& y, Vector& dy) {
    const Matrix a = sys.coefficients(t);
    Eigen::Map<Matrix>(dy.data(), n, n).noalias() = a * Eigen::Map<const Matrix>(y.data(), n, n);
    dy[nn] = a.trace();
  };
  const Vector y1 = flow(rhs, t0, y0, t1, options_for(tol));
  TransitionMatrix out;
  out.t0 = t0;
  out.t1 = t1;
  out.value = Eigen::Map<const Matrix>(y1.data(), n, n);
  const double det = out.value.determinant();
  const double liouville = std::exp(y1[nn]);
  out.abel_residual = std::abs(det - liouville) / liouville;
  if (!(det > 0.0)) {
    throw Error(ErrorCode::numerical_failure, "transition matrix lost orientation (det <= 0)");
  }
  return out;
}

TransitionMatrix monodromy(const LinearCyclicSystem& sys, double tol) {
  if (!sys.period()) throw Error(ErrorCode::missing_period, "monodromy needs a periodic system");
  return transition(sys, 0.0, *sys.period(), tol);
}

namespace {

Matrix orthonormalize(const Matrix& m) {
  Eigen::HouseholderQR<Matrix> qr(m);
  return qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
}

double min_singular_normalized(const Matrix& basis) {
  Matrix cols = basis;
  for (Eigen::Index j = 0; j < cols.cols(); ++j) {
    const double nrm = cols.col(j).norm();
    if (nrm == 0.0) return 0.0;
    cols.col(j) /= nrm;
  }
  Eigen::JacobiSVD<Matrix> svd(cols);
  return svd.singularValues().minCoeff();
}

}  // namespace

Matrix propagate_subspace(const LinearCyclicSystem& sys, const Matrix& basis, double t0, double t1,
                          double tol) {
  const int n = sys.dimension();
  if (basis.rows() != n || basis.cols() < 1 || basis.cols() > n) {
    throw Error(ErrorCode::invalid_input, "basis must be n x k with 1 <= k <= n");
  }
  if (!(min_singular_normalized(basis) > 1e-10)) {
    throw Error(ErrorCode::dependent_basis, "basis columns are linearly dependent");
  }
  const Eigen::Index k = basis.cols();
  Rhs rhs = [&sys, n, k](double t, const Vector& y, Vector& dy) {
    Eigen::Map<Matrix>(dy.data(), n, k).noalias() =
        sys.coefficients(t) * Eigen::Map<const Matrix>(y.data(), n, k);
  };
  Matrix q = orthonormalize(basis);
  const double dir = t1 >= t0 ? 1.0 : -1.0;
  double t = t0;
  while (dir * (t1 - t) > 0.0) {
    const double next = (std::abs(t1 - t) <= 1.0) ? t1 : t + dir * 1.0;
    Vector y = Eigen::Map<const Vector>(q.data(), q.size());
    const Vector y1 = flow(rhs, t, y, next, options_for(tol));
    q = orthonormalize(Eigen::Map<const Matrix>(y1.data(), n, k));
    t = next;
  }
  return q;
}

MonotonicityTrace sample_N_along(const LinearCyclicSystem& sys, const Vector& x0,
                                 std::span<const double> grid, double tol) {
  const int n = sys.dimension();
  if (x0.size() != n) throw Error(ErrorCode::invalid_input, "x0 has wrong dimension");
  if (grid.empty()) throw Error(ErrorCode::invalid_input, "grid must be nonempty");
  if (x0.lpNorm<Eigen::Infinity>() == 0.0) throw Error(ErrorCode::invalid_input, "x0 must be nonzero");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw Error(ErrorCode::invalid_input, "grid must be increasing");
  }
  Rhs rhs = [&sys](double t, const Vector& y, Vector& dy) { dy.noalias() = sys.coefficients(t) * y; };
  const OdeOptions opt = options_for(tol);

  MonotonicityTrace trace;
  trace.samples.reserve(grid.size());
  // N is invariant under positive scaling, so the state is renormalized at
  // every grid point to keep long spans in range.
  Vector x = x0 / x0.lpNorm<Eigen::Infinity>();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i > 0) {
      x = flow(rhs, grid[i - 1], x, grid[i], opt);
      x /= x.lpNorm<Eigen::Infinity>();
    }
    trace.samples.push_back({grid[i], signature::bounds_N(x)});
  }

  std::optional<std::size_t> last_exact;
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    if (!trace.samples[i].bounds.exact) continue;
    if (last_exact && trace.samples[i].bounds.n_min > trace.samples[*last_exact].bounds.n_min) {
      trace.increases.emplace_back(*last_exact, i);
    }
    last_exact = i;
  }
  trace.nonincreasing = trace.increases.empty();

  const std::size_t tail_start = trace.samples.size() - std::max<std::size_t>(1, trace.samples.size() / 5);
  std::optional<int> tail_value;
  trace.eventually_constant = true;
  for (std::size_t i = tail_start; i < trace.samples.size(); ++i) {
    const auto& b = trace.samples[i].bounds;
    if (!b.exact) continue;
    if (tail_value && *tail_value != b.n_min) trace.eventually_constant = false;
    tail_value = b.n_min;
  }
  if (!tail_value) trace.eventually_constant = false;
  return trace;
}

Signs random_sign_pattern(int n, int k, Rng& rng) {
  if (k < 1 || k % 2 == 0 || k > n) throw Error(ErrorCode::invalid_input, "k must be odd and <= n");
  std::vector<int> edges(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) edges[static_cast<std::size_t>(i)] = i;
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);
  for (int i = 0; i < k; ++i) {
    const int j = rng.integer(i, n - 1);
    std::swap(edges[static_cast<std::size_t>(i)], edges[static_cast<std::size_t>(j)]);
    chosen[static_cast<std::size_t>(edges[static_cast<std::size_t>(i)])] = true;
  }
  // Edge 0 closes consistently because k is odd.
  Signs s(static_cast<std::size_t>(n));
  s[0] = rng.sign();
  for (int i = 1; i < n; ++i) s[static_cast<std::size_t>(i)] = chosen[static_cast<std::size_t>(i)] ? -s[static_cast<std::size_t>(i - 1)] : s[static_cast<std::size_t>(i - 1)];
  return s;
}

ConeInvarianceReport verify_cone_invariance(const LinearCyclicSystem& sys, int h, double t,
                                            std::size_t samples, std::uint64_t seed) {
  const int n = sys.dimension();
  if (h < 1 || h > block_count(n)) throw Error(ErrorCode::invalid_input, "h out of range");
  if (!(t > 0.0)) throw Error(ErrorCode::invalid_input, "t must be positive");
  const Matrix phi = transition(sys, 0.0, t, 1e-11).value;
  const int top = std::min(2 * h - 1, n_tilde(n));

  struct Outcome {
    bool boundary = false;
    bool starved = false;
    bool failed = false;
    ConeWitness witness;
  };
  std::vector<Outcome> outcomes(samples);
  parallel_for(samples, [&](std::size_t idx) {
    Rng rng(seed, idx);
    Outcome& out = outcomes[idx];
    out.boundary = (idx % 4 == 3);
    Vector x(n);
    bool drawn = false;
    for (int attempt = 0; attempt < 64 && !drawn; ++attempt) {
      const int k = 2 * rng.integer(0, (top - 1) / 2) + 1;
      const Signs s = random_sign_pattern(n, k, rng);
      for (int i = 0; i < n; ++i) x[i] = s[static_cast<std::size_t>(i)] * rng.uniform(0.1, 1.0);
      if (!out.boundary) {
        drawn = true;
        break;
      }
      // Single zero coordinate; its neighbours stay nonzero.
      const int z = rng.integer(0, n - 1);
      x[z] = 0.0;
      drawn = signature::bounds_N(x).n_min <= 2 * h - 1;
    }
    if (!drawn) {
      out.starved = true;
      return;
    }
    const Vector y = phi * x;
    const auto b = signature::bounds_N(y);
    const bool nonzero = y.lpNorm<Eigen::Infinity>() > 0.0;
    if (!nonzero || !b.exact || b.n_max > 2 * h - 1 || !signature::in_cone(y, h, signature::ConeSide::lower)) {
      out.failed = true;
      out.witness = {x, y, b, out.boundary};
    }
  });

  ConeInvarianceReport report;
  report.h = h;
  report.t = t;
  report.samples = samples;
  for (auto& o : outcomes) {
    if (o.boundary && !o.starved) ++report.boundary_samples;
    if (o.starved) ++report.starved;
    if (o.failed) {
      ++report.failures;
      if (report.witnesses.size() < 16) report.witnesses.push_back(std::move(o.witness));
    }
  }
  return report;
}

LinearCyclicSystem random_periodic(int n, std::uint64_t seed) {
  if (n < 3) throw Error(ErrorCode::invalid_input, "n must be >= 3");
  Rng rng(seed, 0x11f10ULL);
  CoefficientSpec spec;
  spec.n = n;
  spec.period = rng.uniform(1.0, 3.0);
  spec.frequency = 2.0 * std::numbers::pi / *spec.period;

  auto bounded_positive = [&rng] {
    const double c = rng.uniform(0.5, 2.0);
    const double d = c * rng.uniform(0.05, 0.6);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    TrigPoly p;
    p.constant = c;
    p.cos = {d * std::sin(phase)};
    p.sin = {d * std::cos(phase)};
    return p;
  };
  for (int i = 0; i < n; ++i) {
    TrigPoly d;
    d.constant = rng.uniform(-1.0, 1.0);
    d.cos = {rng.uniform(-0.5, 0.5), rng.uniform(-0.25, 0.25)};
    d.sin = {rng.uniform(-0.5, 0.5), rng.uniform(-0.25, 0.25)};
    spec.diag.push_back(d);
  }
  for (int i = 1; i < n; ++i) spec.sub.push_back(bounded_positive());
  TrigPoly corner = bounded_positive();
  corner.constant = -corner.constant;
  for (double& c : corner.cos) c = -c;
  for (double& s : corner.sin) s = -s;
  spec.corner = corner;
  return LinearCyclicSystem(std::move(spec));
}

}  // namespace mcfs::linflow
