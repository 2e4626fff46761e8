// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace doafoundry {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Counter-based derivation: the seed for (stream, index) depends only on the
// master seed and the two counters, never on the order trials are executed in.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                          std::uint64_t index = 0) noexcept;

/// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
std::complex<double> complex_normal(Rng& rng, double variance = 1.0);

/// Runs body(i) for i in [0, n) across the available hardware threads. Each
/// index is executed exactly once; the first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace doafoundry
