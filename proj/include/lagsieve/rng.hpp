#pragma once

#include <cstdint>
#include <random>

namespace lagsieve {

/// Seed for substream `stream` of `master`. Substreams are independent
/// functions of (master, stream), so any one of them can be reproduced in
/// isolation.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// mt19937_64 with a platform-independent conversion to doubles
/// (std::uniform_real_distribution is implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on the open interval (0, 1).
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace lagsieve
