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

#include <catch2/catch_amalgamated.hpp>

#include "beamtrack/angles.hpp"
#include "beamtrack/rng.hpp"

using namespace beamtrack;

TEST_CASE("wrap_two_pi maps into [0, 2pi)")
{
    CHECK(wrap_two_pi(0.0) == 0.0);
    CHECK(wrap_two_pi(two_pi) == 0.0);
    CHECK(wrap_two_pi(-1e-16) < two_pi);
    CHECK(wrap_two_pi(-1e-16) >= 0.0);
    CHECK(wrap_two_pi(3.0 * pi) == Catch::Approx(pi));
    CHECK(wrap_two_pi(-pi / 2.0) == Catch::Approx(1.5 * pi));

    Rng rng(42);
    std::uniform_real_distribution<double> dist(-100.0, 100.0);
    for (int i = 0; i < 1000; ++i)
    {
        const double w = wrap_two_pi(dist(rng));
        REQUIRE(w >= 0.0);
        REQUIRE(w < two_pi);
    }
}

TEST_CASE("wrapped differencing")
{
    CHECK(wrapped_abs_diff(deg2rad(1.0), deg2rad(359.0)) == Catch::Approx(deg2rad(2.0)));
    CHECK(wrapped_abs_diff(0.0, pi) == Catch::Approx(pi));
    CHECK(angle_diff(deg2rad(10.0), deg2rad(350.0)) == Catch::Approx(deg2rad(20.0)));
    CHECK(angle_diff(deg2rad(350.0), deg2rad(10.0)) == Catch::Approx(deg2rad(-20.0)));

    Rng rng(7);
    std::uniform_real_distribution<double> dist(-50.0, 50.0);
    for (int i = 0; i < 1000; ++i)
    {
        const double d = wrapped_abs_diff(dist(rng), dist(rng));
        REQUIRE(d >= 0.0);
        REQUIRE(d <= pi);
    }
}

TEST_CASE("cosine loss identities")
{
    CHECK(cosine_loss(0.0) == 0.0);
    CHECK(cosine_loss(pi) == Catch::Approx(1.0));

    // 1 deg vs 359 deg is the same small error as 1 deg vs 3 deg.
    const double wrapped = angle_diff(deg2rad(1.0), deg2rad(359.0));
    CHECK(cosine_loss(wrapped) == Catch::Approx((1.0 - std::cos(deg2rad(2.0))) / 2.0));
    CHECK(cosine_loss(deg2rad(1.0) - deg2rad(359.0)) ==
          Catch::Approx(cosine_loss(deg2rad(1.0) - deg2rad(3.0))));

    // Small-angle behavior: loss ~ delta^2 / 4.
    const double delta = 0.01;
    CHECK(cosine_loss(delta) == Catch::Approx(delta * delta / 4.0).epsilon(0.01));
}

TEST_CASE("cosine loss periodicity and range")
{
    Rng rng(11);
    std::uniform_real_distribution<double> dist(-two_pi, two_pi);
    for (int i = 0; i < 200; ++i)
    {
        const double d = dist(rng);
        const double base = cosine_loss(d);
        REQUIRE(base >= 0.0);
        REQUIRE(base <= 1.0);
        for (int k = -3; k <= 3; ++k)
            REQUIRE(std::abs(cosine_loss(d + k * two_pi) - base) < 1e-12);
    }
}

TEST_CASE("cosine loss gradient vs finite differences")
{
    // Gradient is with respect to the estimate: loss(theta - theta_hat).
    Rng rng(13);
    std::uniform_real_distribution<double> dist(-two_pi, two_pi);
    const double h = 1e-6;
    for (int i = 0; i < 200; ++i)
    {
        const double theta = dist(rng);
        const double theta_hat = dist(rng);
        const double fd =
            (cosine_loss(theta - (theta_hat + h)) - cosine_loss(theta - (theta_hat - h))) /
            (2.0 * h);
        const double analytic = cosine_loss_grad(theta - theta_hat);
        REQUIRE(analytic == Catch::Approx(fd).margin(1e-8));
    }
}
