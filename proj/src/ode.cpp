#include "mcfs/ode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mcfs/error.hpp"

namespace mcfs {
namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

// PI controller constants.
constexpr double kBeta = 0.04;
constexpr double kExpo = 0.2 - kBeta * 0.75;
constexpr double kSafety = 0.9;
constexpr double kFacMin = 0.2;  // bounds on h_new / h
constexpr double kFacMax = 10.0;

double error_norm(const Vector& err, const Vector& y0, const Vector& y1, double atol, double rtol) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double r = err[i] / sc;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(std::max<Eigen::Index>(1, err.size())));
}

double rms_scaled(const Vector& v, const Vector& y0, double atol, double rtol) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double r = v[i] / (atol + rtol * std::abs(y0[i]));
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(std::max<Eigen::Index>(1, v.size())));
}

// Initial step heuristic from Hairer, Norsett & Wanner.
double initial_step(const Rhs& rhs, double t0, const Vector& y0, const Vector& f0, double dir,
                    const OdeOptions& opt, std::size_t& evals) {
  const double d0 = rms_scaled(y0, y0, opt.atol, opt.rtol);
  const double d1 = rms_scaled(f0, y0, opt.atol, opt.rtol);
  double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h = std::min(h, opt.max_step);
  Vector y1 = y0 + dir * h * f0;
  Vector f1(y0.size());
  rhs(t0 + dir * h, y1, f1);
  ++evals;
  const double d2 = rms_scaled(f1 - f0, y0, opt.atol, opt.rtol) / h;
  const double dm = std::max(d1, d2);
  const double h1 = (dm <= 1e-15) ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / dm, 0.2);
  return std::min({100.0 * h, h1, opt.max_step});
}

bool finite(const Vector& v) { return v.allFinite(); }

}  // namespace

std::size_t OdeSolution::locate(double t_query) const {
  if (t.size() < 2) return 0;
  const bool forward = t.back() >= t.front();
  const double lo = forward ? t.front() : t.back();
  const double hi = forward ? t.back() : t.front();
  const double slack = 1e-12 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
  if (t_query < lo - slack || t_query > hi + slack) {
    throw Error(ErrorCode::invalid_input,
                "dense output requested at t=" + std::to_string(t_query) + " outside [" +
                    std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  std::size_t k;
  if (forward) {
    k = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), t_query) - t.begin());
  } else {
    k = static_cast<std::size_t>(
        std::upper_bound(t.begin(), t.end(), t_query, std::greater<double>()) - t.begin());
  }
  if (k == 0) k = 1;
  if (k >= t.size()) k = t.size() - 1;
  return k - 1;
}

Vector OdeSolution::operator()(double t_query) const {
  if (t.size() == 1) return y.front();
  const std::size_t k = locate(t_query);
  const double h = t[k + 1] - t[k];
  const double s = (t_query - t[k]) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  return h00 * y[k] + h10 * h * dy[k] + h01 * y[k + 1] + h11 * h * dy[k + 1];
}

Vector OdeSolution::derivative(double t_query) const {
  if (t.size() == 1) return dy.front();
  const std::size_t k = locate(t_query);
  const double h = t[k + 1] - t[k];
  const double s = (t_query - t[k]) / h;
  const double s2 = s * s;
  const double d00 = (6 * s2 - 6 * s) / h;
  const double d10 = 3 * s2 - 4 * s + 1;
  const double d01 = (-6 * s2 + 6 * s) / h;
  const double d11 = 3 * s2 - 2 * s;
  return d00 * y[k] + d10 * dy[k] + d01 * y[k + 1] + d11 * dy[k + 1];
}

OdeSolution solve_ivp(const Rhs& rhs, double t0, const Vector& y0, double t1,
                      const OdeOptions& opt, bool keep_steps) {
  if (!(opt.rtol > 0.0) || !(opt.atol >= 0.0)) {
    throw Error(ErrorCode::invalid_input, "tolerances must be positive");
  }
  if (!finite(y0) || !std::isfinite(t0) || !std::isfinite(t1)) {
    throw Error(ErrorCode::invalid_input, "non-finite initial data");
  }
  const Eigen::Index dim = y0.size();
  OdeSolution sol;
  Vector f0(dim);
  rhs(t0, y0, f0);
  ++sol.evaluations;
  if (!finite(f0)) throw Error(ErrorCode::numerical_failure, "right-hand side not finite at start");
  sol.t.push_back(t0);
  sol.y.push_back(y0);
  sol.dy.push_back(f0);
  if (t1 == t0) return sol;

  const double dir = (t1 > t0) ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  double h = opt.initial_step > 0.0 ? opt.initial_step
                                    : initial_step(rhs, t0, y0, f0, dir, opt, sol.evaluations);
  h = std::min({h, opt.max_step, span});

  Vector y = y0, f = f0;
  Vector k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim), ytmp(dim), ynew(dim), err(dim);
  double t = t0;
  double facold = 1e-4;
  bool last_rejected = false;

  while (dir * (t1 - t) > 0.0) {
    if (sol.accepted + sol.rejected >= opt.max_steps) {
      throw Error(ErrorCode::numerical_failure, "step budget exhausted at t=" + std::to_string(t));
    }
    const double min_step = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
    if (h < min_step) {
      throw Error(ErrorCode::numerical_failure, "step size collapse at t=" + std::to_string(t));
    }
    bool final_step = false;
    if (h >= dir * (t1 - t) * (1.0 - 1e-12)) {
      h = dir * (t1 - t);
      final_step = true;
    }
    const double hs = dir * h;

    ytmp = y + hs * a21 * f;
    rhs(t + c2 * hs, ytmp, k2);
    ytmp = y + hs * (a31 * f + a32 * k2);
    rhs(t + c3 * hs, ytmp, k3);
    ytmp = y + hs * (a41 * f + a42 * k2 + a43 * k3);
    rhs(t + c4 * hs, ytmp, k4);
    ytmp = y + hs * (a51 * f + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * hs, ytmp, k5);
    ytmp = y + hs * (a61 * f + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t + hs, ytmp, k6);
    ynew = y + hs * (a71 * f + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const double tnew = final_step ? t1 : t + hs;
    rhs(tnew, ynew, k7);
    sol.evaluations += 6;

    err = hs * (e1 * f + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double enorm = error_norm(err, y, ynew, opt.atol, opt.rtol);
    if (!std::isfinite(enorm) || !finite(k7)) enorm = 1e10;

    const double fac11 = std::pow(std::max(enorm, 1e-300), kExpo);
    if (enorm <= 1.0) {
      double fac = fac11 / std::pow(facold, kBeta);
      fac = std::clamp(fac / kSafety, 1.0 / kFacMax, 1.0 / kFacMin);
      double hnew = h / fac;
      if (last_rejected) hnew = std::min(hnew, h);
      facold = std::max(enorm, 1e-4);
      t = tnew;
      y = ynew;
      f = k7;
      ++sol.accepted;
      last_rejected = false;
      if (y.lpNorm<Eigen::Infinity>() > opt.max_norm) {
        throw Error(ErrorCode::divergence, "state norm exceeded bound at t=" + std::to_string(t));
      }
      if (keep_steps || final_step) {
        sol.t.push_back(t);
        sol.y.push_back(y);
        sol.dy.push_back(f);
      }
      if (final_step) break;
      h = std::min(hnew, opt.max_step);
    } else {
      h = h / std::min(1.0 / kFacMin, fac11 / kSafety);
      ++sol.rejected;
      last_rejected = true;
    }
  }
  return sol;
}

Vector flow(const Rhs& rhs, double t0, const Vector& y0, double t1, const OdeOptions& options) {
  return solve_ivp(rhs, t0, y0, t1, options, false).final_state();
}

}  // namespace mcfs
