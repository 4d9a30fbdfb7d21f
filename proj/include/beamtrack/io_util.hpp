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

#include <bit>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace beamtrack {

namespace detail {

inline std::uint64_t byteswap64(std::uint64_t v)
{
    v = ((v & 0x00000000ffffffffULL) << 32) | (v >> 32);
    v = ((v & 0x0000ffff0000ffffULL) << 16) | ((v >> 16) & 0x0000ffff0000ffffULL);
    v = ((v & 0x00ff00ff00ff00ffULL) << 8) | ((v >> 8) & 0x00ff00ff00ff00ffULL);
    return v;
}

inline std::uint64_t to_le64(std::uint64_t v)
{
    if constexpr (std::endian::native == std::endian::big)
        return byteswap64(v);
    return v;
}

} // namespace detail

// Bulk little-endian float64 blob I/O.
inline void write_f64_le(std::ostream& os, const double* data, std::size_t count)
{
    if constexpr (std::endian::native == std::endian::little)
    {
        os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * 8));
    }
    else
    {
        for (std::size_t i = 0; i < count; ++i)
        {
            const std::uint64_t bits = detail::to_le64(std::bit_cast<std::uint64_t>(data[i]));
            os.write(reinterpret_cast<const char*>(&bits), 8);
        }
    }
    if (!os)
        throw std::runtime_error("write_f64_le: stream write failed");
}

inline void read_f64_le(std::istream& is, double* data, std::size_t count)
{
    is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * 8));
    if (!is)
        throw std::runtime_error("read_f64_le: stream read failed");
    if constexpr (std::endian::native == std::endian::big)
    {
        for (std::size_t i = 0; i < count; ++i)
        {
            const std::uint64_t bits =
                detail::byteswap64(std::bit_cast<std::uint64_t>(data[i]));
            data[i] = std::bit_cast<double>(bits);
        }
    }
}

// Round-trip-exact decimal formatting for CSV output.
inline std::string fmt_g17(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace beamtrack
