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

#include "beamtrack/channel.hpp"

using namespace beamtrack;

namespace {

// Independent oracle: the beam gain as an explicit geometric sum.
std::complex<double> beam_gain_by_sum(double theta, double theta_b, const ArrayGeometry& g)
{
    const double psi = two_pi * g.d_over_lambda * (std::cos(theta) - std::cos(theta_b));
    std::complex<double> acc(0.0, 0.0);
    for (int k = 0; k < g.n_r; ++k)
        acc += std::polar(1.0, psi * k);
    return acc / static_cast<double>(g.n_r);
}

} // namespace

TEST_CASE("steering vector broadside and degenerate cases")
{
    // Broadside: cos(theta) = 0 kills all phases.
    const auto a4 = steering_vector(pi / 2.0, {4, 0.5});
    for (int k = 0; k < 4; ++k)
    {
        CHECK(a4(k).real() == Catch::Approx(0.5).margin(1e-12));
        CHECK(a4(k).imag() == Catch::Approx(0.0).margin(1e-12));
    }

    const auto a1 = steering_vector(1.234, {1, 0.5});
    CHECK(a1(0) == std::complex<double>(1.0, 0.0));

    // theta = 0, n_r = 2: [1/sqrt(2), exp(j*pi)/sqrt(2)].
    const auto a2 = steering_vector(0.0, {2, 0.5});
    CHECK(a2(0).real() == Catch::Approx(1.0 / std::sqrt(2.0)));
    CHECK(a2(1).real() == Catch::Approx(-1.0 / std::sqrt(2.0)));
    CHECK(a2(1).imag() == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("steering vector has unit norm for random angles and sizes")
{
    Rng rng(21);
    std::uniform_real_distribution<double> theta_dist(-10.0, 10.0);
    std::uniform_int_distribution<int> n_dist(1, 64);
    for (int i = 0; i < 500; ++i)
    {
        const ArrayGeometry g{n_dist(rng), 0.5};
        const auto a = steering_vector(theta_dist(rng), g);
        REQUIRE(a.norm() == Catch::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("beam gain aligned and degenerate cases")
{
    const ArrayGeometry g8{8, 0.5};
    CHECK(beam_gain(1.0, 1.0, g8) == std::complex<double>(1.0, 0.0));
    CHECK(beam_gain(0.3, 2.2, {1, 0.5}) == std::complex<double>(1.0, 0.0));

    // Inner product with the steering vectors: g = a(theta_b)^H a(theta).
    const auto cross = steering_vector(deg2rad(90.0), g8).adjoint() * steering_vector(deg2rad(60.0), g8);
    const auto gain = beam_gain(deg2rad(60.0), deg2rad(90.0), g8);
    CHECK(gain.real() == Catch::Approx(cross(0).real()).margin(1e-12));
    CHECK(gain.imag() == Catch::Approx(cross(0).imag()).margin(1e-12));
}

TEST_CASE("beam gain matches the geometric-sum oracle")
{
    // Spot check from the closed form by hand.
    const ArrayGeometry g8{8, 0.5};
    const auto oracle = beam_gain_by_sum(deg2rad(60.0), deg2rad(90.0), g8);
    const auto closed = beam_gain(deg2rad(60.0), deg2rad(90.0), g8);
    CHECK(std::abs(closed - oracle) < 1e-12);

    Rng rng(33);
    std::uniform_real_distribution<double> angle(-two_pi, two_pi);
    std::uniform_int_distribution<int> n_dist(1, 32);
    for (int i = 0; i < 1000; ++i)
    {
        const ArrayGeometry g{n_dist(rng), 0.5};
        const double theta = angle(rng);
        const double theta_b = angle(rng);
        const auto a = beam_gain(theta, theta_b, g);
        const auto b = beam_gain_by_sum(theta, theta_b, g);
        REQUIRE(std::abs(a - b) < 1e-12);
        REQUIRE(std::abs(a) <= 1.0 + 1e-12);
    }
}

TEST_CASE("beam gain near the removable singularity")
{
    const ArrayGeometry g{16, 0.5};
    // Tiny angular separations around alignment. Inside the limit tolerance the
    // kernel snaps to exactly 1 (the sum oracle differs by at most ~n_r*psi/2);
    // outside it the stable closed form must track the sum to 1e-12.
    for (const double eps : {1e-12, 1e-10, 1e-8, 1e-6, 1e-4})
    {
        const double theta = 1.0;
        const double theta_b = theta + eps;
        const double psi = beam_phase(theta, theta_b, g);
        const auto a = beam_gain(theta, theta_b, g);
        const auto b = beam_gain_by_sum(theta, theta_b, g);
        if (std::abs(wrap_pm_pi(psi)) < 1e-9)
        {
            REQUIRE(a == std::complex<double>(1.0, 0.0));
            REQUIRE(std::abs(b - a) < g.n_r * 1e-9);
        }
        else
        {
            REQUIRE(std::abs(a - b) < 1e-12);
        }
    }
    // Grating-lobe alias: psi = 2*pi exactly (theta = 0 vs theta_b = pi).
    const auto alias = beam_gain(0.0, pi, {4, 0.5});
    CHECK(std::abs(alias - std::complex<double>(1.0, 0.0)) < 1e-12);
}

TEST_CASE("observation at the first array null is zero")
{
    const int n_r = 8;
    const ArrayGeometry g{n_r, 0.5};
    // cos(theta) - cos(theta_b) = 2 / (n_r * 2 * d_over_lambda) puts the beam on the first null.
    const double dcos = 2.0 / (n_r * 2.0 * g.d_over_lambda);
    const double theta = std::acos(dcos / 2.0);
    const double theta_b = std::acos(-dcos / 2.0);

    TrajectoryPoint p{theta, {0.8, -0.3}};
    ObservationParams params = ObservationParams::from_snr(g, 10.0);
    params.noise_std = 0.0;
    Rng rng(1);
    const auto y = observe(p, theta_b, params, rng);
    CHECK(std::abs(y) < 1e-12);
}

TEST_CASE("noiseless aligned observation returns alpha exactly")
{
    const ArrayGeometry g{8, 0.5};
    ObservationParams params{g, 100.0, 0.0};
    TrajectoryPoint p{2.1, {0.37, 0.91}};
    Rng rng(5);
    const auto y = observe(p, 2.1, params, rng);
    CHECK(y == p.alpha);
}

TEST_CASE("observation noise variance matches 2*noise_std^2")
{
    const ArrayGeometry g{8, 0.5};
    const ObservationParams params = ObservationParams::from_snr(g, 5.0);
    const TrajectoryPoint p{1.0, {1.0, 0.0}};
    const std::complex<double> mean = p.alpha * beam_gain(p.theta, 1.2, g);

    Rng rng(99);
    const int n = 100000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
    {
        const auto z = observe(p, 1.2, params, rng) - mean;
        acc += std::norm(z);
    }
    const double expected = 2.0 * params.noise_std * params.noise_std;
    CHECK(acc / n == Catch::Approx(expected).epsilon(0.02));
}

TEST_CASE("gain evolution limits and stationarity")
{
    Rng rng(123);

    // rho = 1: deterministic.
    CHECK(evolve_gain({0.5, -0.25}, {1.0}, rng) == std::complex<double>(0.5, -0.25));

    // rho = 0: pure noise with per-component variance 1/2.
    double var_re = 0.0, var_im = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i)
    {
        const auto a = evolve_gain({0.9, 0.9}, {0.0}, rng);
        var_re += a.real() * a.real();
        var_im += a.imag() * a.imag();
    }
    CHECK(var_re / n == Catch::Approx(0.5).epsilon(0.02));
    CHECK(var_im / n == Catch::Approx(0.5).epsilon(0.02));

    // Stationarity: starting at per-component variance 1/2, one step keeps it.
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
    {
        const auto a0 = draw_complex_gaussian(rng, std::sqrt(0.5));
        const auto a1 = evolve_gain(a0, {0.9}, rng);
        acc += a1.real() * a1.real();
    }
    CHECK(acc / n == Catch::Approx(0.5).epsilon(0.02));
}

TEST_CASE("snr to noise std convention")
{
    CHECK(snr_to_noise_std(0.0) == Catch::Approx(std::sqrt(0.5)));
    CHECK(snr_to_noise_std(7.0) == Catch::Approx(std::sqrt(1.0 / (2.0 * std::pow(10.0, 0.7)))));
    CHECK(snr_to_noise_std(7.0) == Catch::Approx(0.3158).epsilon(1e-3));
    CHECK(snr_to_noise_std(200.0) < 1e-9);
    CHECK_THROWS_AS(snr_to_noise_std(std::numeric_limits<double>::infinity()),
                    std::invalid_argument);
}
