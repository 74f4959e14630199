// Finite-key BB84 rate versus block size for a few error rates.

#include <cstdio>

#include "cqe/bb84.hpp"

int main() {
  using namespace cqe;
  const double errors[] = {0.01, 0.03, 0.05};
  std::printf("%12s", "n");
  for (double e : errors) std::printf("   rate@e=%.2f", e);
  std::printf("\n");
  for (std::int64_t n = 10000; n <= 1000000000; n *= 10) {
    std::printf("%12lld", static_cast<long long>(n));
    for (double e : errors) {
      Bb84Params p;
      p.n = n;
      p.k = n / 10;
      p.e_x = p.e_z = e;
      p.leak_ec = bb84_default_leak(n, e);
      std::printf("   %12.6f", bb84_key_length(p).rate());
    }
    std::printf("\n");
  }
}
