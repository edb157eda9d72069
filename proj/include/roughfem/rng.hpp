#pragma once

#include <cstdint>
#include <random>

namespace roughfem {

/// Reproducible random stream addressed by (seed, substream).
///
/// The engine is std::mt19937_64 initialised through std::seed_seq, both of which
/// are fully specified by the standard. Uniforms and normals are derived here
/// rather than through <random> distributions, whose algorithms are left to the
/// library vendor.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t substream);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t substream() const { return substream_; }

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform();
    /// Standard normal by Box-Muller; the second variate of each pair is cached.
    double normal();

private:
    std::uint64_t seed_;
    std::uint64_t substream_;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace roughfem
