// Simulate a weak coherent source, size the output and hash the raw bits.

#include <cstdio>
#include <random>

#include "cqe/qrng.hpp"

int main() {
  using namespace cqe;
  const auto source = FockDiagonalState::poisson(0.01);
  const QrngSample sample = simulate_qrng(QrngSimConfig{50000, 200000, 2024}, source);

  QrngParams p;
  p.n = static_cast<std::int64_t>(sample.x.size());
  p.k = sample.test_rounds;
  p.q_obs = sample.click_frequency;
  const KeyRateReport r = qrng_output_length(p);

  const BitVector raw = symbols_to_bits(sample.x);
  std::mt19937_64 rng(7);
  const auto seed = ToeplitzSeed::random(raw.size(), static_cast<std::size_t>(r.ell), rng);
  const BitVector out = toeplitz_extract(raw, seed, static_cast<std::size_t>(r.ell));

  std::printf("click frequency   %.6f\n", sample.click_frequency);
  std::printf("Q_hat             %.6f\n", r.e_hat);
  std::printf("per-round bound   %.6f bits\n", qrng_hmin_per_round(residue_profile(source)));
  std::printf("raw bits          %zu\n", raw.size());
  std::printf("output bits       %zu\n", out.size());
  const auto bytes = pack_bits(out);
  std::printf("first bytes      ");
  for (std::size_t i = 0; i < std::min<std::size_t>(8, bytes.size()); ++i) std::printf(" %02x", bytes[i]);
  std::printf("\n");
}
