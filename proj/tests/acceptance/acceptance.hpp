#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mcfs::acceptance {

struct Result {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

inline constexpr int kCriterionCount = 10;
inline constexpr std::uint64_t kDefaultSeed = 20240611;

/// Runs one criterion (1..10). Never throws; failures land in detail.
Result run(int id, std::uint64_t seed = kDefaultSeed);
std::vector<Result> run_all(std::uint64_t seed = kDefaultSeed);

/// "PASS  3 reference-eigensystem  (0.01 s)  max rel err 2e-16 ..."
std::string format(const Result& r);

}  // namespace mcfs::acceptance
