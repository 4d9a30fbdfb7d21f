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

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace beamtrack {

inline unsigned effective_threads(unsigned requested)
{
    if (requested != 0)
        return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Runs body(i) for i in [0, n). Work items must be independent; each item writes
// only to its own output slot, so results do not depend on the schedule.
template <typename Body>
void parallel_for(std::size_t n, unsigned n_threads, Body&& body)
{
    n_threads = effective_threads(n_threads);
    if (n == 0)
        return;
    if (n_threads <= 1 || n == 1)
    {
        for (std::size_t i = 0; i < n; ++i)
            body(i);
        return;
    }

    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(n_threads, n));
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
    {
        pool.emplace_back(
            [&, w]()
            {
                try
                {
                    for (std::size_t i = w; i < n; i += workers)
                        body(i);
                }
                catch (...)
                {
                    errors[w] = std::current_exception();
                }
            });
    }
    for (auto& t : pool)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

} // namespace beamtrack
