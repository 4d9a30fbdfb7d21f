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
//
// Sweep experiments over test SNR, array size, observation density and
// training SNR. Every sweep point evaluates all requested trackers on the
// full test split with the same evaluation seed. The density sweep decimates
// the stored trajectories so the ground truth is shared across densities;
// the training-SNR sweep retrains the recurrent model per value.

#pragma once

#include <algorithm>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "beamtrack/dataset.hpp"
#include "beamtrack/eval.hpp"
#include "beamtrack/io_util.hpp"
#include "beamtrack/sweep_axis.hpp"

namespace beamtrack {

struct SweepPointResult
{
    std::string axis;
    double value = 0.0;
    std::string tracker;
    TrackerMetrics metrics;
    std::size_t episodes = 0;
};

struct SweepSetup
{
    ObservationParams base_obs;                      // geometry + test SNR
    NetworkArch arch;                                // of the supplied/retrained model
    TrainConfig train_config;                        // used where a sweep retrains
    std::vector<std::string> trackers = {"ekf", "ml"}; // subset of ekf | ml | oracle
    std::uint64_t eval_seed = 1;
    unsigned n_threads = 1;
    bool retrain_per_n_r = false;
};

inline std::unique_ptr<Tracker> make_tracker(const std::string& name, const EkfParams& ekf_params,
                                             const ArrayGeometry& geometry, const Network* net)
{
    if (name == "ekf")
        return std::make_unique<EkfTracker>(ekf_params, geometry);
    if (name == "oracle")
        return std::make_unique<OracleTracker>();
    if (name == "ml")
    {
        if (net == nullptr)
            throw std::invalid_argument("make_tracker: ml tracker requested without weights");
        return std::make_unique<MlTracker>(*net);
    }
    throw std::invalid_argument("make_tracker: unknown tracker '" + name + "'");
}

// Evaluates every requested tracker at one operating point.
inline std::vector<SweepPointResult> evaluate_point(
    const std::string& axis, double value, std::span<const Trajectory> train,
    std::span<const Trajectory> test, const ObservationParams& obs, double theta_th_deg,
    const SweepSetup& setup, const Network* net)
{
    const EkfParams ekf_params = estimate_params(train, obs.noise_std);
    std::vector<SweepPointResult> rows;
    for (const auto& name : setup.trackers)
    {
        const auto prototype = make_tracker(name, ekf_params, obs.geometry, net);
        const auto episodes =
            evaluate_tracker(*prototype, test, obs, theta_th_deg, setup.eval_seed, setup.n_threads);
        rows.push_back({axis, value, name, compute_metrics(episodes), episodes.size()});
    }
    return rows;
}

inline std::vector<SweepPointResult> run_sweep(SweepAxis axis, const std::vector<double>& values,
                                               const Dataset& dataset, const TrainedModel* model,
                                               const SweepSetup& setup)
{
    if (values.empty())
        throw std::invalid_argument("run_sweep: empty value grid");
    const std::string axis_str = axis_name(axis);
    const bool wants_ml =
        std::find(setup.trackers.begin(), setup.trackers.end(), "ml") != setup.trackers.end();
    if (wants_ml && model == nullptr)
        throw std::invalid_argument("run_sweep: ml tracker requested without a model");

    std::vector<SweepPointResult> all;
    for (const double value : values)
    {
        ObservationParams obs = setup.base_obs;
        double theta_th = outage_threshold_deg(obs.geometry.n_r);
        std::span<const Trajectory> train_set = dataset.train_split();
        std::span<const Trajectory> test_set = dataset.test_split();
        std::vector<Trajectory> train_dec, test_dec;
        std::optional<TrainedModel> retrained;
        const Network* net = model ? &model->net : nullptr;

        switch (axis)
        {
        case SweepAxis::TestSnrDb:
            obs = ObservationParams::from_snr(obs.geometry, value);
            break;
        case SweepAxis::NR:
        {
            ArrayGeometry g = obs.geometry;
            g.n_r = static_cast<int>(value);
            obs = ObservationParams::from_snr(g, obs.snr_db);
            theta_th = outage_threshold_deg(g.n_r);
            if (wants_ml && setup.retrain_per_n_r && g.n_r != setup.base_obs.geometry.n_r)
            {
                retrained = train(dataset.train_split(), setup.arch, setup.train_config, g);
                net = &retrained->net;
            }
            break;
        }
        case SweepAxis::SamplesPerMeter:
        {
            train_dec.reserve(train_set.size());
            for (const auto& t : train_set)
                train_dec.push_back(decimate(t, value));
            test_dec.reserve(test_set.size());
            for (const auto& t : test_set)
                test_dec.push_back(decimate(t, value));
            train_set = train_dec;
            test_set = test_dec;
            break;
        }
        case SweepAxis::TrainSnrDb:
        {
            if (wants_ml)
            {
                TrainConfig cfg = setup.train_config;
                cfg.train_snr_db = value;
                retrained = train(dataset.train_split(), setup.arch, cfg, obs.geometry);
                net = &retrained->net;
            }
            break;
        }
        }

        auto rows = evaluate_point(axis_str, value, train_set, test_set, obs, theta_th, setup, net);
        all.insert(all.end(), rows.begin(), rows.end());
    }
    return all;
}

inline void write_sweep_csv(const std::string& path, std::span<const SweepPointResult> rows,
                            std::uint64_t seed)
{
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("write_sweep_csv: cannot open " + path);
    os << "axis,value,tracker,p0,e_bar_incl,e_bar_excl,n_steps,n_outages,seed\n";
    for (const auto& r : rows)
    {
        os << r.axis << ',' << fmt_g17(r.value) << ',' << r.tracker << ',' << fmt_g17(r.metrics.p0)
           << ',' << fmt_g17(r.metrics.e_incl) << ',' << fmt_g17(r.metrics.e_excl) << ','
           << r.metrics.n_steps << ',' << r.metrics.n_outages << ',' << seed << '\n';
    }
    if (!os)
        throw std::runtime_error("write_sweep_csv: write failed for " + path);
}

inline void write_episode_csv(const std::string& path, std::span<const EpisodeResult> episodes)
{
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("write_episode_csv: cannot open " + path);
    os << "traj_id,step,theta_true,theta_hat,abs_err,in_outage,reset\n";
    for (const auto& ep : episodes)
        for (const auto& s : ep.steps)
        {
            os << ep.trajectory_id << ',' << s.n << ',' << fmt_g17(s.theta_true) << ','
               << fmt_g17(s.theta_hat) << ',' << fmt_g17(s.abs_err) << ',' << (s.in_outage ? 1 : 0)
               << ',' << (s.reset ? 1 : 0) << '\n';
        }
    if (!os)
        throw std::runtime_error("write_episode_csv: write failed for " + path);
}

} // namespace beamtrack
