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
#include <span>
#include <stdexcept>

#include "json.hpp"

#include "beamtrack/angles.hpp"
#include "beamtrack/channel.hpp"
#include "beamtrack/trajectory.hpp"

namespace beamtrack {

// Thrown when the innovation covariance is no longer invertible to working
// precision; the caller is expected to re-initialize the filter.
struct NumericalBreakdownError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

// Filter state over x = [alpha_R, alpha_I, theta].
struct EkfState
{
    Eigen::Vector3d x = Eigen::Vector3d::Zero();
    Eigen::Matrix3d p = Eigen::Matrix3d::Identity();
};

struct EkfParams
{
    double rho = 0.9;                              // AR(1) gain coefficient
    double q_theta = 0.0;                          // theta process noise, rad^2 per step
    Eigen::Matrix2d r = Eigen::Matrix2d::Identity(); // measurement noise (Re/Im of z)
    Eigen::Matrix3d p0 = default_p0();             // covariance used at (re-)initialization

    static Eigen::Matrix3d default_p0()
    {
        Eigen::Matrix3d p = Eigen::Matrix3d::Zero();
        p(0, 0) = 0.01;
        p(1, 1) = 0.01;
        p(2, 2) = deg2rad(1.0) * deg2rad(1.0);
        return p;
    }

    void validate() const
    {
        if (!(rho >= 0.0 && rho <= 1.0))
            throw std::invalid_argument("EkfParams: rho must be in [0, 1]");
        if (!(q_theta >= 0.0))
            throw std::invalid_argument("EkfParams: q_theta must be >= 0");
        if (!(r(0, 0) > 0.0 && r(1, 1) > 0.0))
            throw std::invalid_argument("EkfParams: r must be positive definite");
    }
};

inline void to_json(nlohmann::json& j, const EkfParams& p)
{
    j = nlohmann::json{{"rho", p.rho},
                       {"q_theta", p.q_theta},
                       {"r", {{p.r(0, 0), p.r(0, 1)}, {p.r(1, 0), p.r(1, 1)}}},
                       {"p0", nlohmann::json::array()}};
    for (int i = 0; i < 3; ++i)
        j["p0"].push_back({p.p0(i, 0), p.p0(i, 1), p.p0(i, 2)});
}

inline void from_json(const nlohmann::json& j, EkfParams& p)
{
    p.rho = j.at("rho").get<double>();
    p.q_theta = j.at("q_theta").get<double>();
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k)
            p.r(i, k) = j.at("r")[i][k].get<double>();
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k)
            p.p0(i, k) = j.at("p0")[i][k].get<double>();
}

// Filter statistics from training data: rho as the pooled lag-1 autocorrelation
// of alpha_R, q_theta as the variance of wrap-aware per-step theta increments,
// r from the configured observation noise level.
inline EkfParams estimate_params(std::span<const Trajectory> training, double noise_std)
{
    if (training.empty())
        throw std::invalid_argument("estimate_params: empty dataset");
    for (const auto& t : training)
        if (t.points.size() < 2)
            throw std::invalid_argument("estimate_params: trajectory with fewer than 2 steps");

    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& t : training)
        for (const auto& p : t.points)
        {
            sum += p.alpha.real();
            ++count;
        }
    const double mean = sum / static_cast<double>(count);

    double num = 0.0, den = 0.0;
    std::size_t pairs = 0;
    for (const auto& t : training)
        for (std::size_t n = 0; n + 1 < t.points.size(); ++n)
        {
            const double a = t.points[n].alpha.real() - mean;
            const double b = t.points[n + 1].alpha.real() - mean;
            num += a * b;
            ++pairs;
        }
    for (const auto& t : training)
        for (const auto& p : t.points)
        {
            const double a = p.alpha.real() - mean;
            den += a * a;
        }
    num /= static_cast<double>(pairs);
    den /= static_cast<double>(count);
    double rho = (den > 0.0) ? num / den : 0.0;
    rho = std::min(1.0, std::max(0.0, rho));

    double dsum = 0.0, dsq = 0.0;
    std::size_t dcount = 0;
    for (const auto& t : training)
        for (std::size_t n = 0; n + 1 < t.points.size(); ++n)
        {
            const double d = angle_diff(t.points[n + 1].theta, t.points[n].theta);
            dsum += d;
            dsq += d * d;
            ++dcount;
        }
    const double dmean = dsum / static_cast<double>(dcount);
    const double q_theta = dsq / static_cast<double>(dcount) - dmean * dmean;

    EkfParams params;
    params.rho = rho;
    params.q_theta = std::max(0.0, q_theta);
    params.r = Eigen::Matrix2d::Zero();
    params.r(0, 0) = noise_std * noise_std;
    params.r(1, 1) = noise_std * noise_std;
    return params;
}

// Time update: gains follow the AR(1) model, theta a random walk.
inline EkfState predict(const EkfState& state, const EkfParams& params)
{
    const double gain_q = (1.0 - params.rho * params.rho) / 2.0;
    Eigen::Vector3d f(params.rho, params.rho, 1.0);

    EkfState out;
    out.x = f.asDiagonal() * state.x;
    out.x(2) = wrap_two_pi(out.x(2));
    out.p = f.asDiagonal() * state.p * f.asDiagonal();
    out.p(0, 0) += gain_q;
    out.p(1, 1) += gain_q;
    out.p(2, 2) += params.q_theta;
    return out;
}

// Noiseless observation split into [Re(y), Im(y)].
inline Eigen::Vector2d observation_h(const Eigen::Vector3d& x, double theta_b,
                                     const ArrayGeometry& geometry)
{
    const std::complex<double> alpha(x(0), x(1));
    const std::complex<double> y = alpha * beam_gain(x(2), theta_b, geometry);
    return {y.real(), y.imag()};
}

// 2x3 Jacobian of observation_h. The gain columns are the real/imag split of
// the constant beam gain; the theta column uses the analytic kernel derivative.
inline Eigen::Matrix<double, 2, 3> jacobian_h(const Eigen::Vector3d& x, double theta_b,
                                              const ArrayGeometry& geometry)
{
    const std::complex<double> g = beam_gain(x(2), theta_b, geometry);
    const std::complex<double> alpha(x(0), x(1));
    const std::complex<double> dg = alpha * beam_gain_dtheta(x(2), theta_b, geometry);

    Eigen::Matrix<double, 2, 3> h;
    h(0, 0) = g.real();
    h(1, 0) = g.imag();
    h(0, 1) = -g.imag();
    h(1, 1) = g.real();
    h(0, 2) = dg.real();
    h(1, 2) = dg.imag();
    return h;
}

// Measurement update with Joseph-form covariance. Throws NumericalBreakdownError
// when the innovation covariance condition number exceeds 1e12.
inline EkfState update(const EkfState& state, std::complex<double> y_observed, double theta_b,
                       const EkfParams& params, const ArrayGeometry& geometry)
{
    const Eigen::Vector2d h = observation_h(state.x, theta_b, geometry);
    const Eigen::Matrix<double, 2, 3> hj = jacobian_h(state.x, theta_b, geometry);
    const Eigen::Vector2d innovation(y_observed.real() - h(0), y_observed.imag() - h(1));

    Eigen::Matrix2d s = hj * state.p * hj.transpose() + params.r;
    s = 0.5 * (s + s.transpose()).eval();

    const double tr = s.trace();
    const double det = s.determinant();
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    const double lmax = tr / 2.0 + disc;
    const double lmin = tr / 2.0 - disc;
    if (!(lmin > 0.0) || lmax > 1e12 * lmin)
        throw NumericalBreakdownError("ekf update: ill-conditioned innovation covariance");

    const Eigen::Matrix<double, 3, 2> k = state.p * hj.transpose() * s.inverse();

    EkfState out;
    out.x = state.x + k * innovation;
    out.x(2) = wrap_two_pi(out.x(2));
    const Eigen::Matrix3d a = Eigen::Matrix3d::Identity() - k * hj;
    out.p = a * state.p * a.transpose() + k * params.r * k.transpose();
    out.p = 0.5 * (out.p + out.p.transpose()).eval();
    return out;
}

} // namespace beamtrack
