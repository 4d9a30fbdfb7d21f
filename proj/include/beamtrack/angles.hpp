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

#include <cmath>

namespace beamtrack {

inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr double two_pi = 2.0 * pi;

inline constexpr double deg2rad(double deg) { return deg * (pi / 180.0); }
inline constexpr double rad2deg(double rad) { return rad * (180.0 / pi); }

// Wrap an angle into [0, 2*pi).
inline double wrap_two_pi(double x)
{
    double r = std::fmod(x, two_pi);
    if (r < 0.0)
        r += two_pi;
    return (r >= two_pi) ? 0.0 : r;
}

// Wrap an angle into [-pi, pi).
inline double wrap_pm_pi(double x)
{
    double r = std::fmod(x + pi, two_pi);
    if (r < 0.0)
        r += two_pi;
    if (r >= two_pi)
        r = 0.0;
    return r - pi;
}

// Signed wrapped difference a - b, in [-pi, pi).
inline double angle_diff(double a, double b) { return wrap_pm_pi(a - b); }

// Absolute wrapped difference, in [0, pi].
inline double wrapped_abs_diff(double a, double b) { return std::abs(angle_diff(a, b)); }

// Periodic angle loss, bounded in [0, 1] and 2*pi-periodic in delta.
// delta is the signed angle error (true minus estimate); the loss is even in delta.
inline double cosine_loss(double delta) { return 0.5 * (1.0 - std::cos(delta)); }

// Derivative of cosine_loss with respect to the *estimate*, for delta = true - estimate.
inline double cosine_loss_grad(double delta) { return -0.5 * std::sin(delta); }

} // namespace beamtrack
