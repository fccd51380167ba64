// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Usage: acceptance [--seed N] [--threads N] [id ...]

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <vector>

#include "wiggly/wiggly.h"

namespace {

void report(const wg_criterion* c, void*) {
  std::printf("%s  criterion %2d  %-32s %7.1f s  %s\n", c->passed ? "PASS" : "FAIL", c->id, c->name, c->seconds,
              c->detail);
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
  unsigned long long seed = 20240611;
  int threads = 0;
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--seed") && i + 1 < argc)
      seed = std::strtoull(argv[++i], nullptr, 10);
    else if (!std::strcmp(argv[i], "--threads") && i + 1 < argc)
      threads = std::atoi(argv[++i]);
    else
      only.push_back(std::atoi(argv[i]));
  }

  int failures = 0;
  const wg_status s = wg_selftest(seed, threads, only.data(), only.size(), report, nullptr, &failures);
  if (s != WG_OK) {
    std::fprintf(stderr, "acceptance: %s: %s\n", wg_status_name(s), wg_last_error());
    return 2;
  }
  std::printf("%d failed\n", failures);
  return failures == 0 ? 0 : 1;
}
