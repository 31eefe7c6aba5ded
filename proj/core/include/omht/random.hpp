#pragma once

#include <cstdint>

#include "omht/mmd.hpp"

namespace omht {

// Counter-based generator: the value at (seed, stream, index) is the
// splitmix64 output at counter stream * 2^40 + index, i.e.
//   mix64(seed + (counter + 1) * 0x9E3779B97F4A7C15).
// Pure function of its arguments, so prefixes of a stream never change when
// the stream is extended, and distinct counters give independent values.
std::uint64_t mix64(std::uint64_t z);
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

// Uniform in the open interval (0,1): ((h >> 11) + 0.5) * 2^-53.
double uniform_open01(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

// Inverse standard normal CDF: Acklam's rational approximation polished by
// one Halley step through erfc. Accurate to ~1 ulp over (0,1).
double normal_icdf(double p);

// N(mean, var) variate at (seed, stream, index) via the inverse CDF.
double normal_sample(std::uint64_t seed, std::uint64_t stream, std::uint64_t index, const GaussianSpec& dist);

}  // namespace omht
