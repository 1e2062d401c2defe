#include "mcfs/signature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mcfs/error.hpp"
#include "mcfs/model.hpp"

namespace mcfs::signature {

Signs sign_vector(const Vector& x) {
  const double cutoff = kZeroTolerance * std::max(1.0, x.lpNorm<Eigen::Infinity>());
  Signs s(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    s[static_cast<std::size_t>(i)] = std::abs(x[i]) <= cutoff ? 0 : (x[i] > 0 ? 1 : -1);
  }
  return s;
}

bool in_lambda(const Vector& x) {
  const Signs s = sign_vector(x);
  return std::none_of(s.begin(), s.end(), [](int v) { return v == 0; });
}

int count_N(const Signs& s) {
  const int n = static_cast<int>(s.size());
  int count = 0;
  for (int i = 0; i < n; ++i) {
    if (s[i] == 0) {
      throw Error(ErrorCode::not_in_lambda, "coordinate " + std::to_string(i) + " is zero");
    }
    if (discordant(i, s[i], s[cyclic_prev(i, n)])) ++count;
  }
  return count;
}

int count_N(const Vector& x) { return count_N(sign_vector(x)); }

LyapunovBounds bounds_N(const Signs& s) {
  const int n = static_cast<int>(s.size());
  if (n == 0) throw Error(ErrorCode::invalid_input, "empty vector");
  if (std::all_of(s.begin(), s.end(), [](int v) { return v == 0; })) {
    return {1, n_tilde(n), n_tilde(n) == 1};
  }

  constexpr int kUnset = std::numeric_limits<int>::max();
  auto choices = [&](int i) {
    std::vector<int> c;
    if (s[i] >= 0) c.push_back(1);
    if (s[i] <= 0) c.push_back(-1);
    return c;
  };

  int best_min = kUnset;
  int best_max = -1;
  // Condition on the sign chosen for coordinate 0, then sweep the chain once.
  for (int first : choices(0)) {
    int lo[2] = {kUnset, kUnset};  // index 0: sign -1, index 1: sign +1
    int hi[2] = {-1, -1};
    lo[(first + 1) / 2] = 0;
    hi[(first + 1) / 2] = 0;
    for (int i = 1; i < n; ++i) {
      int nlo[2] = {kUnset, kUnset};
      int nhi[2] = {-1, -1};
      for (int cur : choices(i)) {
        for (int prev : {-1, 1}) {
          const int p = (prev + 1) / 2;
          if (hi[p] < 0) continue;
          const int add = discordant(i, cur, prev) ? 1 : 0;
          const int c = (cur + 1) / 2;
          nlo[c] = std::min(nlo[c], lo[p] + add);
          nhi[c] = std::max(nhi[c], hi[p] + add);
        }
      }
      std::copy(nlo, nlo + 2, lo);
      std::copy(nhi, nhi + 2, hi);
    }
    for (int last : {-1, 1}) {
      const int l = (last + 1) / 2;
      if (hi[l] < 0) continue;
      const int add = discordant(0, first, last) ? 1 : 0;
      best_min = std::min(best_min, lo[l] + add);
      best_max = std::max(best_max, hi[l] + add);
    }
  }
  return {best_min, best_max, best_min == best_max};
}

LyapunovBounds bounds_N(const Vector& x) { return bounds_N(sign_vector(x)); }

bool in_cone(const Vector& x, int h, ConeSide side) {
  const int n = static_cast<int>(x.size());
  if (h < 0 || h > block_count(n)) {
    throw Error(ErrorCode::invalid_input, "cone index h=" + std::to_string(h) + " out of range");
  }
  const Signs s = sign_vector(x);
  if (std::all_of(s.begin(), s.end(), [](int v) { return v == 0; })) return true;
  if (side == ConeSide::lower) {
    if (h == 0) return false;
    return bounds_N(s).n_max <= 2 * h - 1;
  }
  if (h == 0) return true;
  return bounds_N(s).n_min > 2 * h - 1;
}

CrossingPrediction predict_crossing(const Matrix& a0, const Vector& x0) {
  const int n = static_cast<int>(x0.size());
  if (n < 3 || a0.rows() != n || a0.cols() != n) {
    throw Error(ErrorCode::invalid_input, "A0 and x0 dimensions disagree");
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!model::in_cyclic_mask(i, j, n) && std::abs(a0(i, j)) > model::kMaskTolerance) {
        throw Error(ErrorCode::invalid_input, "A0 violates the cyclic mask");
      }
    }
  }
  if (!(a0(0, n - 1) < 0.0)) throw Error(ErrorCode::invalid_input, "A0 corner entry must be negative");
  for (int i = 1; i < n; ++i) {
    if (!(a0(i, i - 1) > 0.0)) throw Error(ErrorCode::invalid_input, "A0 subdiagonal must be positive");
  }

  const Signs s = sign_vector(x0);
  if (std::all_of(s.begin(), s.end(), [](int v) { return v == 0; })) {
    throw Error(ErrorCode::invalid_input, "x0 must be nonzero");
  }

  CrossingPrediction out;
  out.signs_plus = s;
  out.signs_minus = s;

  // Zero runs, started right after a nonzero coordinate.
  int anchor = 0;
  while (s[anchor] == 0) ++anchor;
  for (int k = 1; k <= n; ++k) {
    const int i = (anchor + k) % n;
    if (s[i] == 0 && s[cyclic_prev(i, n)] != 0) {
      int len = 0;
      while (s[(i + len) % n] == 0) ++len;
      out.zero_segments.push_back({i, len});
    }
  }

  for (const auto& seg : out.zero_segments) {
    const int source = cyclic_prev(seg.start, n);
    double coefficient = x0[source];
    int prev = source;
    for (int m = 1; m <= seg.length; ++m) {
      const int j = (source + m) % n;
      coefficient *= a0(j, prev);  // j == 0 picks up the corner a_{1n}
      if (coefficient == 0.0 || !std::isfinite(coefficient)) {
        throw Error(ErrorCode::numerical_degeneracy,
                    "dominant coefficient vanished at index " + std::to_string(j));
      }
      const int sgn = coefficient > 0 ? 1 : -1;
      out.signs_plus[j] = sgn;
      out.signs_minus[j] = (m % 2 == 0) ? sgn : -sgn;
      out.dominant_terms.push_back({j, source, m, coefficient});
      prev = j;
    }
  }
  std::sort(out.dominant_terms.begin(), out.dominant_terms.end(),
            [](const DominantTerm& a, const DominantTerm& b) { return a.index < b.index; });

  out.N_plus = count_N(out.signs_plus);
  out.N_minus = count_N(out.signs_minus);
  const LyapunovBounds env = bounds_N(s);
  if (out.N_plus != env.n_min || out.N_minus != env.n_max) {
    throw Error(ErrorCode::cone_consistency_violation,
                "crossing prediction disagrees with the envelope of x0");
  }
  return out;
}

}  // namespace mcfs::signature
