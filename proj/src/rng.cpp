#include "roughfem/rng.hpp"

#include <cmath>
#include <numbers>

namespace roughfem {

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t substream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(substream),
                      static_cast<std::uint32_t>(substream >> 32), 0x9e3779b9u};
    return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t substream)
    : seed_(seed), substream_(substream), engine_(make_engine(seed, substream)) {}

double RngStream::uniform() {
    // (k + 0.5) / 2^53 never hits 0 or 1.
    const std::uint64_t k = engine_() >> 11;
    return (static_cast<double>(k) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double theta = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

}  // namespace roughfem
