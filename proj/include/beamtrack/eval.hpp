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
// Closed-loop test protocol: the beam points at the previous estimate; when
// the wrapped angle error exceeds the threshold the step is flagged as an
// outage and the next step's feedback is the true angle again (idealized
// re-acquisition). Both metrics pool all steps of all episodes.

#pragma once

#include <complex>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "beamtrack/angles.hpp"
#include "beamtrack/channel.hpp"
#include "beamtrack/ekf.hpp"
#include "beamtrack/parallel.hpp"
#include "beamtrack/tracker.hpp"
#include "beamtrack/trajectory.hpp"

namespace beamtrack {

// theta_Th = (2/3) * (360 / n_r) degrees, capped at 180 since wrapped errors
// cannot exceed 180 degrees.
inline double outage_threshold_deg(int n_r)
{
    if (n_r < 1)
        throw std::invalid_argument("outage_threshold_deg: n_r must be >= 1");
    return std::min(180.0, (2.0 * 360.0) / (3.0 * static_cast<double>(n_r)));
}

struct StepRecord
{
    int n = 0;
    double theta_true = 0.0;
    double theta_hat = 0.0;
    double abs_err = 0.0; // wrapped, in [0, pi]
    bool in_outage = false;
    bool reset = false;
};

struct EpisodeResult
{
    int trajectory_id = 0;
    std::vector<StepRecord> steps;
};

// Common step interface for the EKF, the ML tracker, and test stubs.
class Tracker
{
  public:
    virtual ~Tracker() = default;
    virtual std::string name() const = 0;
    virtual std::unique_ptr<Tracker> clone() const = 0;
    // Called once before n = 1 with the full ground truth; trackers other than
    // the oracle may only use point 0 (the known initial conditions).
    virtual void begin_episode(const Trajectory& truth) = 0;
    // Idealized re-acquisition after an outage at the current step.
    virtual void reset(const TrajectoryPoint& truth) = 0;
    virtual double step(std::complex<double> y, double theta_b) = 0;
};

class OracleTracker final : public Tracker
{
  public:
    std::string name() const override { return "oracle"; }
    std::unique_ptr<Tracker> clone() const override { return std::make_unique<OracleTracker>(); }

    void begin_episode(const Trajectory& truth) override
    {
        truth_ = &truth;
        index_ = 0;
    }

    void reset(const TrajectoryPoint&) override {}

    double step(std::complex<double>, double) override
    {
        ++index_;
        return truth_->points.at(index_).theta;
    }

  private:
    const Trajectory* truth_ = nullptr;
    std::size_t index_ = 0;
};

class EkfTracker final : public Tracker
{
  public:
    EkfTracker(const EkfParams& params, const ArrayGeometry& geometry)
        : params_(params), geometry_(geometry)
    {
    }

    std::string name() const override { return "ekf"; }
    std::unique_ptr<Tracker> clone() const override
    {
        return std::make_unique<EkfTracker>(params_, geometry_);
    }

    void begin_episode(const Trajectory& truth) override { reset(truth.points.at(0)); }

    void reset(const TrajectoryPoint& truth) override
    {
        state_.x = Eigen::Vector3d(truth.alpha.real(), truth.alpha.imag(), truth.theta);
        state_.p = params_.p0;
    }

    double step(std::complex<double> y, double theta_b) override
    {
        state_ = predict(state_, params_);
        state_ = update(state_, y, theta_b, params_, geometry_);
        return state_.x(2);
    }

    const EkfState& state() const { return state_; }

  private:
    EkfParams params_;
    ArrayGeometry geometry_;
    EkfState state_;
};

// Wraps the recurrent network. The LSTM state survives outage resets; only the
// angle feedback (supplied by the episode runner via theta_b) is corrected.
class MlTracker final : public Tracker
{
  public:
    explicit MlTracker(const Network& net) : net_(&net), state_(make_track_state(net.arch)) {}

    std::string name() const override { return "ml"; }
    std::unique_ptr<Tracker> clone() const override { return std::make_unique<MlTracker>(*net_); }

    void begin_episode(const Trajectory&) override { state_ = make_track_state(net_->arch); }

    void reset(const TrajectoryPoint&) override {}

    double step(std::complex<double> y, double theta_b) override
    {
        return track_step(*net_, state_, y, theta_b).theta_hat;
    }

  private:
    const Network* net_;
    TrackState state_;
};

// Runs one closed-loop episode over a trajectory. Observations are drawn from
// rng with the beam pointed at the previous estimate (the true angle right
// after a reset; the true initial angle at n = 1).
inline EpisodeResult run_episode(Tracker& tracker, const Trajectory& traj,
                                 const ObservationParams& params, double theta_th_deg, Rng& rng)
{
    if (traj.points.size() < 2)
        throw std::invalid_argument("run_episode: trajectory too short");
    params.validate();
    const double threshold = deg2rad(theta_th_deg);

    tracker.begin_episode(traj);
    EpisodeResult result;
    result.steps.reserve(traj.points.size() - 1);

    double feedback = traj.points[0].theta;
    for (std::size_t n = 1; n < traj.points.size(); ++n)
    {
        const std::complex<double> y = observe(traj.points[n], feedback, params, rng);
        const double theta_hat = tracker.step(y, feedback);
        const double err = wrapped_abs_diff(theta_hat, traj.points[n].theta);
        const bool outage = err > threshold;

        StepRecord rec{static_cast<int>(n), traj.points[n].theta, theta_hat, err, outage, outage};
        result.steps.push_back(rec);

        if (outage)
        {
            tracker.reset(traj.points[n]);
            feedback = traj.points[n].theta;
        }
        else
        {
            feedback = theta_hat;
        }
    }
    return result;
}

// ---------- metrics ----------

struct TrackerMetrics
{
    double p0 = 0.0;
    double e_incl = 0.0;
    double e_excl = 0.0;
    std::size_t n_steps = 0;
    std::size_t n_outages = 0;
};

inline double outage_probability(std::span<const EpisodeResult> results)
{
    if (results.empty())
        throw std::invalid_argument("outage_probability: no episodes");
    std::size_t outages = 0, steps = 0;
    for (const auto& ep : results)
        for (const auto& s : ep.steps)
        {
            outages += s.in_outage ? 1 : 0;
            ++steps;
        }
    return static_cast<double>(outages) / static_cast<double>(steps);
}

inline double average_error(std::span<const EpisodeResult> results, bool include_outage)
{
    if (results.empty())
        throw std::invalid_argument("average_error: no episodes");
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& ep : results)
        for (const auto& s : ep.steps)
        {
            if (!include_outage && s.in_outage)
                continue;
            sum += cosine_loss(s.abs_err);
            ++count;
        }
    if (count == 0)
        return std::numeric_limits<double>::quiet_NaN();
    return sum / static_cast<double>(count);
}

inline TrackerMetrics compute_metrics(std::span<const EpisodeResult> results)
{
    TrackerMetrics m;
    m.p0 = outage_probability(results);
    m.e_incl = average_error(results, true);
    m.e_excl = average_error(results, false);
    for (const auto& ep : results)
        for (const auto& s : ep.steps)
        {
            ++m.n_steps;
            m.n_outages += s.in_outage ? 1 : 0;
        }
    return m;
}

// Runs one episode per trajectory, each with its own tracker clone and the
// rng sub-stream (eval_seed, episode index); deterministic for any n_threads.
inline std::vector<EpisodeResult> evaluate_tracker(const Tracker& prototype,
                                                   std::span<const Trajectory> trajectories,
                                                   const ObservationParams& params,
                                                   double theta_th_deg, std::uint64_t eval_seed,
                                                   unsigned n_threads = 1)
{
    if (trajectories.empty())
        throw std::invalid_argument("evaluate_tracker: no trajectories");
    std::vector<EpisodeResult> results(trajectories.size());
    parallel_for(trajectories.size(), n_threads,
                 [&](std::size_t i)
                 {
                     auto tracker = prototype.clone();
                     Rng rng = derive_rng(eval_seed, i);
                     results[i] = run_episode(*tracker, trajectories[i], params, theta_th_deg, rng);
                     results[i].trajectory_id = static_cast<int>(i);
                 });
    return results;
}

} // namespace beamtrack
