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
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "beamtrack/angles.hpp"
#include "beamtrack/channel.hpp"
#include "beamtrack/rng.hpp"

namespace beamtrack {

struct TrajectoryMeta
{
    std::uint64_t seed = 0;
    double start_x = 0.0;
    double start_y = 0.0;
    double heading = 0.0; // UE motion direction, radians in the global frame
    double anchor_x = 0.0;
    double anchor_y = 0.0;
};

struct Trajectory
{
    std::vector<TrajectoryPoint> points;
    double step_length_m = 0.1;
    TrajectoryMeta meta;

    std::size_t size() const { return points.size(); }
};

// Scenario for the synthetic spatially consistent generator. The UE walks a
// straight line inside the cell; the dominant-path AoA is the bearing to an
// anchor point (the BS, or a random scatterer in NLOS mode) in the UE frame,
// plus an Ornstein-Uhlenbeck angular offset sampled along the walked distance.
struct TrajectoryConfig
{
    double cell_radius_m = 60.0;
    double carrier_ghz = 28.0; // metadata only; the physics depends on d/lambda
    double path_length_m = 20.0;
    double step_length_m = 0.1;
    bool nlos = true;
    double ou_reversion_per_m = 0.5;
    double ou_stationary_std_deg = 3.0;
    double gain_coherence_length_m = 1.0;
    double smoothness_bound_deg = 10.0; // max wrapped AoA change per step
    double anchor_clearance_m = 2.0;    // min distance between path and anchor

    void validate() const
    {
        if (!(cell_radius_m > 0.0))
            throw std::invalid_argument("TrajectoryConfig: cell_radius_m must be > 0");
        if (!(path_length_m > 0.0))
            throw std::invalid_argument("TrajectoryConfig: path_length_m must be > 0");
        if (!(step_length_m > 0.0))
            throw std::invalid_argument("TrajectoryConfig: step_length_m must be > 0");
        if (!(ou_reversion_per_m >= 0.0) || !(ou_stationary_std_deg >= 0.0))
            throw std::invalid_argument("TrajectoryConfig: OU parameters must be >= 0");
        if (!(gain_coherence_length_m > 0.0))
            throw std::invalid_argument("TrajectoryConfig: gain_coherence_length_m must be > 0");
        if (!(smoothness_bound_deg > 0.0))
            throw std::invalid_argument("TrajectoryConfig: smoothness_bound_deg must be > 0");
        // Start positions lie within the cell, so the worst-case path end sits at
        // cell_radius + path_length from the center. Reject geometries that could
        // leave the 3x cell-radius bounding box.
        if (cell_radius_m + path_length_m > 3.0 * cell_radius_m)
            throw std::invalid_argument("TrajectoryConfig: path may exit the 3x cell-radius box");
    }

    int n_points() const
    {
        return static_cast<int>(std::ceil(path_length_m / step_length_m)) + 1;
    }

    double gain_rho() const { return std::exp(-step_length_m / gain_coherence_length_m); }
};

// Deterministic core: integrate AoA and gain along a fixed start/heading/anchor.
// Consumes rng draws for the OU offset and the gain process only.
inline Trajectory generate_trajectory_from(double start_x, double start_y, double heading,
                                           double anchor_x, double anchor_y,
                                           const TrajectoryConfig& config, Rng& rng)
{
    config.validate();
    const int n = config.n_points();
    Trajectory traj;
    traj.points.resize(n);
    traj.step_length_m = config.step_length_m;
    traj.meta = {0, start_x, start_y, heading, anchor_x, anchor_y};

    const double dir_x = std::cos(heading);
    const double dir_y = std::sin(heading);
    const double ou_std = deg2rad(config.ou_stationary_std_deg);
    const double ou_a = std::exp(-config.ou_reversion_per_m * config.step_length_m);
    const double ou_innov = ou_std * std::sqrt(1.0 - ou_a * ou_a);

    double offset = draw_normal(rng, ou_std);
    for (int i = 0; i < n; ++i)
    {
        const double px = start_x + dir_x * config.step_length_m * i;
        const double py = start_y + dir_y * config.step_length_m * i;
        const double bearing = std::atan2(anchor_y - py, anchor_x - px) - heading;
        traj.points[i].theta = wrap_two_pi(bearing + offset);
        offset = ou_a * offset + draw_normal(rng, ou_innov);
    }

    const GainModel gain{config.gain_rho()};
    const double stationary_std = std::sqrt(0.5);
    traj.points[0].alpha = draw_complex_gaussian(rng, stationary_std);
    for (int i = 1; i < n; ++i)
        traj.points[i].alpha = evolve_gain(traj.points[i - 1].alpha, gain, rng);

    return traj;
}

// Samples start, heading and anchor, then integrates. Re-samples (from the same
// rng stream) until the wrapped per-step AoA change stays below the smoothness
// bound; pure function of (config, seed).
inline Trajectory generate_trajectory(const TrajectoryConfig& config, std::uint64_t seed)
{
    config.validate();
    Rng rng = make_rng(seed);
    const double bound = deg2rad(config.smoothness_bound_deg);

    for (int attempt = 0; attempt < 64; ++attempt)
    {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const double r = config.cell_radius_m * std::sqrt(unit(rng));
        const double phi = two_pi * unit(rng);
        const double sx = r * std::cos(phi);
        const double sy = r * std::sin(phi);
        const double heading = two_pi * unit(rng);

        double ax = 0.0, ay = 0.0;
        if (config.nlos)
        {
            const double ra = config.cell_radius_m * std::sqrt(unit(rng));
            const double pa = two_pi * unit(rng);
            ax = ra * std::cos(pa);
            ay = ra * std::sin(pa);
        }

        // Distance from the anchor to the path segment; reject close passes that
        // would make the bearing sweep faster than the smoothness bound allows.
        const double ex = sx + std::cos(heading) * config.path_length_m;
        const double ey = sy + std::sin(heading) * config.path_length_m;
        const double vx = ex - sx, vy = ey - sy;
        const double len2 = vx * vx + vy * vy;
        double t = ((ax - sx) * vx + (ay - sy) * vy) / len2;
        t = std::min(1.0, std::max(0.0, t));
        const double cx = sx + t * vx - ax;
        const double cy = sy + t * vy - ay;
        if (std::sqrt(cx * cx + cy * cy) < config.anchor_clearance_m)
            continue;

        Trajectory traj = generate_trajectory_from(sx, sy, heading, ax, ay, config, rng);
        traj.meta.seed = seed;

        bool smooth = true;
        for (std::size_t i = 1; i < traj.points.size() && smooth; ++i)
            smooth = wrapped_abs_diff(traj.points[i].theta, traj.points[i - 1].theta) < bound;
        if (smooth)
            return traj;
    }
    throw std::runtime_error("generate_trajectory: no smooth trajectory after 64 attempts");
}

// Keeps every stride-th sample so that the result has the requested density.
// The stored density must be an integer multiple of samples_per_meter.
inline Trajectory decimate(const Trajectory& traj, double samples_per_meter)
{
    if (!(samples_per_meter > 0.0))
        throw std::invalid_argument("decimate: samples_per_meter must be > 0");
    const double base = 1.0 / traj.step_length_m;
    const double ratio = base / samples_per_meter;
    const long stride = std::lround(ratio);
    if (stride < 1 || std::abs(ratio - static_cast<double>(stride)) > 1e-9)
        throw std::invalid_argument("decimate: stored density is not a multiple of the request");

    Trajectory out;
    out.step_length_m = traj.step_length_m * static_cast<double>(stride);
    out.meta = traj.meta;
    for (std::size_t i = 0; i < traj.points.size(); i += static_cast<std::size_t>(stride))
        out.points.push_back(traj.points[i]);
    if (out.points.size() < 2)
        throw std::invalid_argument("decimate: fewer than 2 points remain");
    return out;
}

} // namespace beamtrack
