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

#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "beamtrack/io_util.hpp"
#include "beamtrack/parallel.hpp"
#include "beamtrack/trajectory.hpp"

namespace beamtrack {

inline void to_json(nlohmann::json& j, const TrajectoryConfig& c)
{
    j = nlohmann::json{{"cell_radius_m", c.cell_radius_m},
                       {"carrier_ghz", c.carrier_ghz},
                       {"path_length_m", c.path_length_m},
                       {"step_length_m", c.step_length_m},
                       {"nlos", c.nlos},
                       {"ou_reversion_per_m", c.ou_reversion_per_m},
                       {"ou_stationary_std_deg", c.ou_stationary_std_deg},
                       {"gain_coherence_length_m", c.gain_coherence_length_m},
                       {"smoothness_bound_deg", c.smoothness_bound_deg},
                       {"anchor_clearance_m", c.anchor_clearance_m}};
}

inline void from_json(const nlohmann::json& j, TrajectoryConfig& c)
{
    c.cell_radius_m = j.value("cell_radius_m", c.cell_radius_m);
    c.carrier_ghz = j.value("carrier_ghz", c.carrier_ghz);
    c.path_length_m = j.value("path_length_m", c.path_length_m);
    c.step_length_m = j.value("step_length_m", c.step_length_m);
    c.nlos = j.value("nlos", c.nlos);
    c.ou_reversion_per_m = j.value("ou_reversion_per_m", c.ou_reversion_per_m);
    c.ou_stationary_std_deg = j.value("ou_stationary_std_deg", c.ou_stationary_std_deg);
    c.gain_coherence_length_m = j.value("gain_coherence_length_m", c.gain_coherence_length_m);
    c.smoothness_bound_deg = j.value("smoothness_bound_deg", c.smoothness_bound_deg);
    c.anchor_clearance_m = j.value("anchor_clearance_m", c.anchor_clearance_m);
}

struct DatasetConfig
{
    TrajectoryConfig trajectory;
    int trajectory_count = 2500;
    int train_count = 1750;
    std::uint64_t seed = 1;

    void validate() const
    {
        trajectory.validate();
        if (trajectory_count < 1)
            throw std::invalid_argument("DatasetConfig: trajectory_count must be >= 1");
        if (train_count < 0 || train_count > trajectory_count)
            throw std::invalid_argument("DatasetConfig: train_count must be <= trajectory_count");
    }
};

inline void to_json(nlohmann::json& j, const DatasetConfig& c)
{
    j = nlohmann::json{{"trajectory", c.trajectory},
                       {"trajectory_count", c.trajectory_count},
                       {"train_count", c.train_count},
                       {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, DatasetConfig& c)
{
    if (j.contains("trajectory"))
        c.trajectory = j.at("trajectory").get<TrajectoryConfig>();
    c.trajectory_count = j.value("trajectory_count", c.trajectory_count);
    c.train_count = j.value("train_count", c.train_count);
    c.seed = j.value("seed", c.seed);
}

struct Dataset
{
    DatasetConfig config;
    std::vector<Trajectory> trajectories;

    std::span<const Trajectory> train_split() const
    {
        return {trajectories.data(), static_cast<std::size_t>(config.train_count)};
    }

    std::span<const Trajectory> test_split() const
    {
        return {trajectories.data() + config.train_count,
                trajectories.size() - static_cast<std::size_t>(config.train_count)};
    }
};

// Deterministic for a fixed config regardless of the thread count: trajectory i
// always uses the sub-stream mix_seed(config.seed, i).
inline Dataset generate_dataset(const DatasetConfig& config, unsigned n_threads = 1)
{
    config.validate();
    Dataset ds;
    ds.config = config;
    ds.trajectories.resize(config.trajectory_count);
    parallel_for(static_cast<std::size_t>(config.trajectory_count), n_threads,
                 [&](std::size_t i)
                 { ds.trajectories[i] = generate_trajectory(config.trajectory, mix_seed(config.seed, i)); });
    return ds;
}

inline constexpr int kDatasetSchemaVersion = 1;

// Archive layout: one line of JSON (schema, config echo, per-trajectory meta),
// then per-trajectory records of float64 (theta, alpha_re, alpha_im) triples,
// little-endian, in header order.
inline void save_dataset(const Dataset& ds, const std::string& path)
{
    nlohmann::json header{{"magic", "btds"},
                          {"schema", kDatasetSchemaVersion},
                          {"seed", ds.config.seed},
                          {"config", ds.config}};
    nlohmann::json metas = nlohmann::json::array();
    for (const auto& t : ds.trajectories)
    {
        metas.push_back({{"n_points", t.points.size()},
                         {"step_length_m", t.step_length_m},
                         {"seed", t.meta.seed},
                         {"start_x", t.meta.start_x},
                         {"start_y", t.meta.start_y},
                         {"heading", t.meta.heading},
                         {"anchor_x", t.meta.anchor_x},
                         {"anchor_y", t.meta.anchor_y}});
    }
    header["trajectories"] = std::move(metas);

    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("save_dataset: cannot open " + path);
    os << header.dump() << '\n';

    std::vector<double> buf;
    for (const auto& t : ds.trajectories)
    {
        buf.clear();
        buf.reserve(t.points.size() * 3);
        for (const auto& p : t.points)
        {
            buf.push_back(p.theta);
            buf.push_back(p.alpha.real());
            buf.push_back(p.alpha.imag());
        }
        write_f64_le(os, buf.data(), buf.size());
    }
    if (!os)
        throw std::runtime_error("save_dataset: write failed for " + path);
}

inline Dataset load_dataset(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("load_dataset: cannot open " + path);
    std::string line;
    if (!std::getline(is, line))
        throw std::runtime_error("load_dataset: missing header line");
    const nlohmann::json header = nlohmann::json::parse(line);
    if (header.value("magic", "") != "btds")
        throw std::runtime_error("load_dataset: bad magic");
    if (header.value("schema", -1) != kDatasetSchemaVersion)
        throw std::runtime_error("load_dataset: unsupported schema version");

    Dataset ds;
    ds.config = header.at("config").get<DatasetConfig>();
    const auto& metas = header.at("trajectories");
    ds.trajectories.resize(metas.size());
    std::vector<double> buf;
    for (std::size_t i = 0; i < metas.size(); ++i)
    {
        const auto& m = metas[i];
        Trajectory& t = ds.trajectories[i];
        const std::size_t n = m.at("n_points").get<std::size_t>();
        t.step_length_m = m.at("step_length_m").get<double>();
        t.meta.seed = m.at("seed").get<std::uint64_t>();
        t.meta.start_x = m.at("start_x").get<double>();
        t.meta.start_y = m.at("start_y").get<double>();
        t.meta.heading = m.at("heading").get<double>();
        t.meta.anchor_x = m.at("anchor_x").get<double>();
        t.meta.anchor_y = m.at("anchor_y").get<double>();
        buf.resize(n * 3);
        read_f64_le(is, buf.data(), buf.size());
        t.points.resize(n);
        for (std::size_t k = 0; k < n; ++k)
            t.points[k] = {buf[3 * k], {buf[3 * k + 1], buf[3 * k + 2]}};
    }
    return ds;
}

// Plain-CSV export: one row per sample.
inline void export_dataset_csv(const Dataset& ds, const std::string& path)
{
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("export_dataset_csv: cannot open " + path);
    os << "traj_id,step,theta_rad,alpha_re,alpha_im\n";
    for (std::size_t i = 0; i < ds.trajectories.size(); ++i)
    {
        const auto& t = ds.trajectories[i];
        for (std::size_t k = 0; k < t.points.size(); ++k)
        {
            os << i << ',' << k << ',' << fmt_g17(t.points[k].theta) << ','
               << fmt_g17(t.points[k].alpha.real()) << ',' << fmt_g17(t.points[k].alpha.imag())
               << '\n';
        }
    }
    if (!os)
        throw std::runtime_error("export_dataset_csv: write failed for " + path);
}

} // namespace beamtrack
