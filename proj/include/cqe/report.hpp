#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace cqe {

/// Output of a finite-size length calculation.
///
/// e_hat is the worst-case statistic that enters the entropy bound (bit or
/// phase error estimate, or click-frequency estimate for the QRNG). terms
/// holds every intermediate quantity under a stable name.
struct KeyRateReport {
  double hmin_smooth = 0.0;
  double e_hat = 0.0;
  std::int64_t ell = 0;
  double delta_sec = 0.0;
  std::int64_t raw_bits = 0;
  std::map<std::string, double> terms;

  /// ell per raw bit (key or generation round).
  double rate() const noexcept { return raw_bits > 0 ? static_cast<double>(ell) / static_cast<double>(raw_bits) : 0.0; }
};

}  // namespace cqe
