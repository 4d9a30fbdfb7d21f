// SPDX-License-Identifier: Apache-2.0
//
// beamtrack - angle-of-arrival beam tracking simulation library for mmWave systems
// Copyright (C) 2026 The beamtrack authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace beamtrack {

using Rng = std::mt19937_64;

// splitmix64, used only to mix a stream id into a base seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream)
{
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

// Independent, reproducible sub-stream for a given (seed, stream) pair.
inline Rng derive_rng(std::uint64_t seed, std::uint64_t stream)
{
    return Rng(mix_seed(seed, stream));
}

inline double draw_normal(Rng& rng, double stddev = 1.0)
{
    std::normal_distribution<double> dist(0.0, 1.0);
    return stddev * dist(rng);
}

// Circularly symmetric complex Gaussian with per-dimension standard deviation std_per_dim.
inline std::complex<double> draw_complex_gaussian(Rng& rng, double std_per_dim)
{
    const double re = draw_normal(rng, std_per_dim);
    const double im = draw_normal(rng, std_per_dim);
    return {re, im};
}

} // namespace beamtrack
