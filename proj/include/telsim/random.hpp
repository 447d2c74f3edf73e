#ifndef TELSIM_RANDOM_HPP
#define TELSIM_RANDOM_HPP

#include <cstdint>
#include <random>

#include "telsim/qmath.hpp"

namespace telsim {

struct KrausChannel;

// Seeded generator with platform-stable derived distributions. The standard
// library's distribution objects are implementation-defined, so uniform
// doubles come straight from the mt19937_64 bit stream and gaussians from an
// explicit Box-Muller transform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 random mantissa bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double gaussian();

  cxd complex_gaussian() { return {gaussian(), gaussian()}; }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Haar-random pure state: normalized vector of iid complex gaussians.
PureState haar_state(int dim, Rng& rng);

// Haar-random unitary: QR of a complex Ginibre matrix with the R diagonal
// phase fix.
Operator haar_unitary(int dim, Rng& rng);

// Random Kraus channel from a Haar-random isometry: draw a Haar unitary on
// dim*rank dimensions and slice its first dim columns into rank blocks of
// dim rows. Completeness sum F'F = 1 holds exactly up to numerics.
KrausChannel random_kraus_channel(int dim, int rank, Rng& rng);

}  // namespace telsim

#endif  // TELSIM_RANDOM_HPP
