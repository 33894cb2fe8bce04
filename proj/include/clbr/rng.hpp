#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace clbr {

// All randomness in the pipeline flows from one master seed through named
// sub-streams: sub_seed = splitmix64(master ^ fnv1a64(stream_name) [+ index]).
// Changing one stage's stream leaves every other stream untouched.

std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t splitmix64(std::uint64_t x);

std::uint64_t derive_seed(std::uint64_t master, std::string_view stream);
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream, std::uint64_t index);

// Seeded stream with stable draw semantics. Bounded and real draws are
// implemented by hand so streams do not depend on the standard library's
// unspecified distribution algorithms.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, n); rejection sampling removes modulo bias.
    std::uint64_t uniform_index(std::uint64_t n);

    // Uniform in [0, 1) with 53 bits of precision.
    double uniform_real();

    // Box-Muller; the spare draw is cached, so the stream advances by
    // exactly two u64 draws per pair of gaussians.
    double gaussian(double mean, double stddev);

  private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace clbr
