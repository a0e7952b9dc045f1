#ifndef RTAPROP_RANDOM_HPP_
#define RTAPROP_RANDOM_HPP_

#include <array>
#include <cstdint>

namespace rtaprop {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// A (seed, stream) pair selects an independent substream, so sample i of a
/// Monte Carlo run can draw from stream i regardless of which worker runs it.
class Philox {
public:
  Philox(std::uint64_t seed, std::uint64_t stream);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  /// Uniform on (0, 1), 53-bit resolution; never returns 0.
  double uniform();
  /// Standard normal via Box-Muller; caches the second variate.
  double normal();

  /// One raw Philox block, exposed for known-answer tests.
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter,
                                            std::array<std::uint32_t, 2> key);

private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

} // namespace rtaprop

#endif // RTAPROP_RANDOM_HPP_
