#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace acid {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for the independent sub-stream `stream` of a run seeded with `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

// Stream ids. Workers use kWorkerStreamBase + i.
inline constexpr std::uint64_t kEventStream = 1;
inline constexpr std::uint64_t kMatchmakerStream = 2;
inline constexpr std::uint64_t kObjectiveStream = 3;
inline constexpr std::uint64_t kInitStream = 4;
inline constexpr std::uint64_t kDurationStream = 5;
inline constexpr std::uint64_t kWorkerStreamBase = 1000;

/// Random source owned by a single consumer: engine plus a Gaussian sampler
/// whose cached state must travel with the engine for reproducibility.
class RandomStream {
 public:
  RandomStream() : RandomStream(0) {}
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  double uniform() {
    // 53 random bits mapped to [0, 1).
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  double normal() { return normal_(engine_); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace acid
