#include <cstdio>
#include <cstdlib>
#include <string>

#include "acceptance/acceptance.hpp"

int main(int argc, char** argv) {
  std::uint64_t seed = mcfs::acceptance::kDefaultSeed;
  if (argc > 1) seed = std::strtoull(argv[1], nullptr, 10);
  int failed = 0;
  for (const auto& r : mcfs::acceptance::run_all(seed)) {
    std::printf("%s\n", mcfs::acceptance::format(r).c_str());
    std::fflush(stdout);
    failed += !r.passed;
  }
  std::printf("%d of %d criteria passed\n", mcfs::acceptance::kCriterionCount - failed,
              mcfs::acceptance::kCriterionCount);
  return failed == 0 ? 0 : 1;
}
