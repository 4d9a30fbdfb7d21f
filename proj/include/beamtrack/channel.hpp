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

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "beamtrack/angles.hpp"
#include "beamtrack/rng.hpp"

namespace beamtrack {

// Uniform linear array at the UE. Element spacing enters only through d/lambda.
struct ArrayGeometry
{
    int n_r = 8;                // number of array elements
    double d_over_lambda = 0.5; // element spacing in carrier wavelengths

    void validate() const
    {
        if (n_r < 1)
            throw std::invalid_argument("ArrayGeometry: n_r must be >= 1");
        if (!(d_over_lambda > 0.0))
            throw std::invalid_argument("ArrayGeometry: d_over_lambda must be > 0");
    }
};

// One ground-truth sample of the dominant path: arrival angle and complex gain.
struct TrajectoryPoint
{
    double theta = 0.0;                   // AoA in radians, wrapped into [0, 2*pi)
    std::complex<double> alpha{0.0, 0.0}; // complex path gain
};

// AR(1) evolution of the complex path gain, stationary per-component variance 1/2.
struct GainModel
{
    double rho = 0.9;

    void validate() const
    {
        if (!(rho >= 0.0 && rho <= 1.0))
            throw std::invalid_argument("GainModel: rho must be in [0, 1]");
    }
};

// Noise convention: SNR is the mean aligned-beam signal power E|alpha|^2 = 1
// over the total complex noise power 2*noise_std^2.
inline double snr_to_noise_std(double snr_db)
{
    if (!std::isfinite(snr_db))
        throw std::invalid_argument("snr_to_noise_std: snr_db must be finite");
    return std::sqrt(0.5 * std::pow(10.0, -snr_db / 10.0));
}

struct ObservationParams
{
    ArrayGeometry geometry;
    double snr_db = 10.0;
    double noise_std = 0.0; // per real dimension

    static ObservationParams from_snr(const ArrayGeometry& geometry, double snr_db)
    {
        geometry.validate();
        return {geometry, snr_db, snr_to_noise_std(snr_db)};
    }

    void validate() const
    {
        geometry.validate();
        if (!(noise_std >= 0.0))
            throw std::invalid_argument("ObservationParams: noise_std must be >= 0");
    }
};

// Normalized ULA response for a plane wave from angle theta.
// Element k equals (1/sqrt(n_r)) * exp(j * 2*pi * d_over_lambda * k * cos(theta)).
inline Eigen::VectorXcd steering_vector(double theta, const ArrayGeometry& geometry)
{
    const int n = geometry.n_r;
    Eigen::VectorXcd a(n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    const double phase_step = two_pi * geometry.d_over_lambda * std::cos(theta);
    for (int k = 0; k < n; ++k)
        a(k) = std::polar(scale, phase_step * static_cast<double>(k));
    return a;
}

namespace detail {

// Tolerance below which the Dirichlet ratio is evaluated at its removable singularity.
inline constexpr double kDirichletLimitTol = 1e-9;
// Below this the derivative switches to a series expansion around the singularity.
inline constexpr double kDirichletSeriesTol = 1e-4;

} // namespace detail

// Normalized Dirichlet kernel D(psi) = (1/n) * (1 - e^{j n psi}) / (1 - e^{j psi}),
// evaluated in the cancellation-free product form
//   D(psi) = (1/n) * sin(n psi / 2) / sin(psi / 2) * e^{j (n-1) psi / 2},
// with the removable singularities at psi = 2*pi*m evaluated as the limit 1.
inline std::complex<double> dirichlet_kernel(double psi, int n)
{
    if (n == 1)
        return {1.0, 0.0};
    const double delta = wrap_pm_pi(psi);
    if (std::abs(delta) < detail::kDirichletLimitTol)
        return {1.0, 0.0};
    const double nd = static_cast<double>(n);
    const double ratio = std::sin(nd * delta / 2.0) / std::sin(delta / 2.0);
    return (ratio / nd) * std::polar(1.0, (nd - 1.0) * delta / 2.0);
}

// Derivative dD/dpsi. Quotient/product rule away from the singularity; second-order
// series in delta = psi wrapped to the nearest multiple of 2*pi when close to it.
inline std::complex<double> dirichlet_kernel_dpsi(double psi, int n)
{
    if (n == 1)
        return {0.0, 0.0};
    const double nd = static_cast<double>(n);
    const double delta = wrap_pm_pi(psi);
    if (std::abs(delta) < detail::kDirichletSeriesTol)
    {
        // D'(delta) = (j/n) * sum_k k e^{j k delta}; expand e^{j k delta} to second order.
        const double s1 = nd * (nd - 1.0) / 2.0;
        const double s2 = (nd - 1.0) * nd * (2.0 * nd - 1.0) / 6.0;
        const double s3 = s1 * s1;
        const double re = -delta * s2 / nd;
        const double im = s1 / nd - 0.5 * delta * delta * s3 / nd;
        return {re, im};
    }
    const double half = delta / 2.0;
    const double sin_h = std::sin(half);
    const double sin_nh = std::sin(nd * half);
    const double cos_h = std::cos(half);
    const double cos_nh = std::cos(nd * half);
    const double ratio = sin_nh / sin_h;
    const double dratio = 0.5 * (nd * cos_nh * sin_h - cos_h * sin_nh) / (sin_h * sin_h);
    const std::complex<double> rot = std::polar(1.0, (nd - 1.0) * half);
    const std::complex<double> jhalf(0.0, (nd - 1.0) / 2.0);
    return (dratio / nd) * rot + (ratio / nd) * jhalf * rot;
}

inline double beam_phase(double theta, double theta_b, const ArrayGeometry& geometry)
{
    return two_pi * geometry.d_over_lambda * (std::cos(theta) - std::cos(theta_b));
}

// Complex response of a beam pointed at theta_b to a wave arriving from theta.
// Equals 1 when aligned; |beam_gain| <= 1 for all inputs.
inline std::complex<double> beam_gain(double theta, double theta_b, const ArrayGeometry& geometry)
{
    return dirichlet_kernel(beam_phase(theta, theta_b, geometry), geometry.n_r);
}

// d beam_gain / d theta, used by the EKF linearization.
inline std::complex<double> beam_gain_dtheta(double theta, double theta_b,
                                             const ArrayGeometry& geometry)
{
    const double psi = beam_phase(theta, theta_b, geometry);
    const double dpsi_dtheta = -two_pi * geometry.d_over_lambda * std::sin(theta);
    return dirichlet_kernel_dpsi(psi, geometry.n_r) * dpsi_dtheta;
}

// Single-beam channel observation y = alpha * beam_gain(theta, theta_b) + z,
// with z circularly symmetric complex Gaussian, per-dimension std noise_std.
inline std::complex<double> observe(const TrajectoryPoint& point, double theta_b,
                                    const ObservationParams& params, Rng& rng)
{
    const std::complex<double> mean = point.alpha * beam_gain(point.theta, theta_b, params.geometry);
    if (params.noise_std == 0.0)
        return mean;
    return mean + draw_complex_gaussian(rng, params.noise_std);
}

// One AR(1) step per gain component: x' = rho * x - zeta, zeta ~ N(0, (1 - rho^2)/2).
inline std::complex<double> evolve_gain(std::complex<double> alpha, const GainModel& model, Rng& rng)
{
    model.validate();
    if (model.rho == 1.0)
        return alpha;
    const double zeta_std = std::sqrt((1.0 - model.rho * model.rho) / 2.0);
    const double re = model.rho * alpha.real() - draw_normal(rng, zeta_std);
    const double im = model.rho * alpha.imag() - draw_normal(rng, zeta_std);
    return {re, im};
}

} // namespace beamtrack
