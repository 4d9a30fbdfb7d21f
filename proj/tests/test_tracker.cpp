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

#include <filesystem>
#include <unistd.h>

#include "beamtrack/tracker.hpp"

using namespace beamtrack;

namespace {

Trajectory ramp_trajectory(int n_points, double theta0, double step_rad,
                           std::complex<double> alpha = {1.0, 0.0})
{
    Trajectory t;
    t.step_length_m = 0.1;
    t.points.resize(n_points);
    for (int i = 0; i < n_points; ++i)
        t.points[i] = {wrap_two_pi(theta0 + i * step_rad), alpha};
    return t;
}

ObservationParams noiseless_obs(int n_r = 8)
{
    ObservationParams obs{{n_r, 0.5}, 1e9, 0.0};
    return obs;
}

struct TempDir
{
    std::filesystem::path path;
    TempDir()
    {
        path = std::filesystem::temp_directory_path() /
               ("beamtrack_tracker_" + std::to_string(::getpid()) + "_" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

} // namespace

TEST_CASE("training features align labels one step ahead")
{
    const auto traj = ramp_trajectory(50, 0.5, 0.01);
    Rng rng(1);
    const auto seq = make_training_sequence(traj, 0.0, noiseless_obs(), rng);
    REQUIRE(seq.features.size() == 49);
    REQUIRE(seq.labels.size() == 49);
    for (std::size_t k = 0; k < seq.features.size(); ++k)
    {
        // theta_trn with zero pointing noise is the previous true angle.
        REQUIRE(seq.features[k](2) == Catch::Approx(traj.points[k].theta));
        REQUIRE(seq.labels[k](0) == Catch::Approx(traj.points[k + 1].theta));
    }
}

TEST_CASE("noiseless degenerate features reproduce the beam response")
{
    const auto traj = ramp_trajectory(20, 1.0, 0.02, {0.6, -0.8});
    Rng rng(2);
    const auto obs = noiseless_obs();
    const auto seq = make_training_sequence(traj, 0.0, obs, rng);
    for (std::size_t k = 0; k < seq.features.size(); ++k)
    {
        const auto expected = traj.points[k + 1].alpha *
                              beam_gain(traj.points[k + 1].theta, traj.points[k].theta,
                                        obs.geometry);
        REQUIRE(seq.features[k](0) == Catch::Approx(expected.real()).margin(1e-14));
        REQUIRE(seq.features[k](1) == Catch::Approx(expected.imag()).margin(1e-14));
    }
}

TEST_CASE("pointing-noise std matches sigma_psi")
{
    const auto traj = ramp_trajectory(1001, 2.0, 0.002);
    const double sigma = 5.0;
    double sq_sum = 0.0;
    std::size_t count = 0;
    for (int rep = 0; rep < 100; ++rep)
    {
        Rng rng = derive_rng(99, rep);
        const auto seq = make_training_sequence(traj, sigma, noiseless_obs(), rng);
        for (std::size_t k = 0; k < seq.features.size(); ++k)
        {
            const double psi = angle_diff(seq.features[k](2), traj.points[k].theta);
            sq_sum += psi * psi;
            ++count;
        }
    }
    const double std_deg = rad2deg(std::sqrt(sq_sum / count));
    CHECK(std_deg == Catch::Approx(sigma).epsilon(0.02));
    CHECK(count >= 100000);
}

TEST_CASE("network pack/unpack round trip")
{
    Rng rng(3);
    NetworkArch arch;
    Network net = init_network(arch, rng);
    const Eigen::VectorXd flat = pack_network(net);
    REQUIRE(flat.size() == param_count(arch));

    Network other = init_network(arch, rng); // different weights
    unpack_network(other, flat);
    CHECK(pack_network(other) == flat);

    Eigen::VectorXd wrong(flat.size() + 1);
    CHECK_THROWS_AS(unpack_network(other, wrong), std::invalid_argument);
}

TEST_CASE("track_step is pure, wrapped, and zero for a dead network")
{
    NetworkArch arch;
    Rng rng(4);
    Network net = init_network(arch, rng);

    TrackState a = make_track_state(arch);
    TrackState b = make_track_state(arch);
    const auto out_a = track_step(net, a, {0.3, -0.2}, 1.5);
    const auto out_b = track_step(net, b, {0.3, -0.2}, 1.5);
    CHECK(out_a.theta_hat == out_b.theta_hat);
    CHECK(out_a.alpha_hat == out_b.alpha_hat);
    CHECK(out_a.theta_hat >= 0.0);
    CHECK(out_a.theta_hat < two_pi);
    CHECK(a.lstm.h == b.lstm.h);

    Network dead = net;
    unpack_network(dead, Eigen::VectorXd::Zero(param_count(arch)));
    TrackState s = make_track_state(arch);
    for (int i = 0; i < 5; ++i)
        CHECK(track_step(dead, s, {static_cast<double>(i), 1.0}, 2.0).theta_hat == 0.0);
}

TEST_CASE("weights file round trip")
{
    TempDir tmp;
    Rng rng(5);
    NetworkArch arch;
    TrainedModel model{init_network(arch, rng), TrainConfig{}, {{0.5, 0.3}, {0.2, 0.1}}};
    model.config.train_snr_db = 7.0;
    const std::string path = (tmp.path / "w.btw").string();
    save_weights(model, path);

    const auto loaded = load_weights(path);
    CHECK(loaded.net.arch == arch);
    CHECK(pack_network(loaded.net) == pack_network(model.net));
    CHECK(loaded.config.train_snr_db == 7.0);
    REQUIRE(loaded.log.size() == 2);
    CHECK(loaded.log[1].angle_loss == 0.2);
}

TEST_CASE("one training epoch produces a finite loss and a loadable model")
{
    std::vector<Trajectory> data;
    for (int i = 0; i < 8; ++i)
        data.push_back(ramp_trajectory(30, 0.3 * i, 0.01));

    TrainConfig config;
    config.epochs = 1;
    config.batch_size = 4;
    config.train_snr_db = 10.0;
    config.seed = 7;
    const auto model = train(data, NetworkArch{}, config, {8, 0.5});
    REQUIRE(model.log.size() == 1);
    CHECK(std::isfinite(model.log[0].angle_loss));
    CHECK(std::isfinite(model.log[0].alpha_loss));

    TempDir tmp;
    save_weights(model, (tmp.path / "m.btw").string());
    const auto loaded = load_weights((tmp.path / "m.btw").string());
    CHECK(pack_network(loaded.net) == pack_network(model.net));
}

TEST_CASE("training is deterministic and thread-count invariant")
{
    std::vector<Trajectory> data;
    for (int i = 0; i < 6; ++i)
        data.push_back(ramp_trajectory(25, 0.4 * i, 0.015));

    TrainConfig config;
    config.epochs = 3;
    config.batch_size = 4;
    config.seed = 11;

    const auto a = train(data, NetworkArch{}, config, {8, 0.5});
    const auto b = train(data, NetworkArch{}, config, {8, 0.5});
    REQUIRE(pack_network(a.net) == pack_network(b.net));

    TrainConfig threaded = config;
    threaded.n_threads = 2;
    const auto c = train(data, NetworkArch{}, threaded, {8, 0.5});
    REQUIRE(pack_network(a.net) == pack_network(c.net));

    TrainConfig other_seed = config;
    other_seed.seed = 12;
    const auto d = train(data, NetworkArch{}, other_seed, {8, 0.5});
    REQUIRE(pack_network(a.net) != pack_network(d.net));
}

TEST_CASE("training on constant-angle noiseless sequences reaches small loss")
{
    // Sanity oracle: 50 constant-theta sequences, clean observations. The
    // network only has to learn to copy its angle feedback input.
    std::vector<Trajectory> data;
    Rng rng(13);
    std::uniform_real_distribution<double> theta_dist(0.0, two_pi);
    for (int i = 0; i < 50; ++i)
        data.push_back(ramp_trajectory(30, theta_dist(rng), 0.0));

    TrainConfig config;
    config.sigma_psi_deg = 0.0;
    config.train_snr_db = 200.0; // effectively noiseless
    config.epochs = 50;
    config.batch_size = 8;
    config.adam.lr = 2e-2;
    config.early_stop_patience = 50; // run the full budget
    config.seed = 17;

    const auto model = train(data, NetworkArch{}, config, {8, 0.5});
    CHECK(model.log.back().angle_loss < 1e-3);
}

TEST_CASE("trained model beats the untrained one on a held-out slow trajectory")
{
    std::vector<Trajectory> data;
    Rng rng(19);
    std::uniform_real_distribution<double> theta_dist(0.0, two_pi);
    for (int i = 0; i < 40; ++i)
        data.push_back(ramp_trajectory(40, theta_dist(rng), 0.004));

    TrainConfig config;
    config.sigma_psi_deg = 2.0;
    config.train_snr_db = 200.0;
    config.epochs = 60;
    config.batch_size = 8;
    config.adam.lr = 1e-2;
    config.early_stop_patience = 60;
    config.seed = 23;
    const NetworkArch arch;
    const auto model = train(data, arch, config, {8, 0.5});

    Rng init_rng = derive_rng(999, 0);
    const Network untrained = init_network(arch, init_rng);

    const auto held_out = ramp_trajectory(60, 1.234, 0.004);
    const auto obs = noiseless_obs();
    auto run = [&](const Network& net)
    {
        TrackState state = make_track_state(arch);
        double feedback = held_out.points[0].theta;
        double loss = 0.0;
        Rng noise_rng(1);
        for (std::size_t n = 1; n < held_out.points.size(); ++n)
        {
            const auto y = observe(held_out.points[n], feedback, obs, noise_rng);
            const auto out = track_step(net, state, y, feedback);
            loss += cosine_loss(held_out.points[n].theta - out.theta_hat);
            feedback = out.theta_hat;
        }
        return loss / static_cast<double>(held_out.points.size() - 1);
    };

    const double trained_loss = run(model.net);
    const double untrained_loss = run(untrained);
    CHECK(trained_loss * 10.0 <= untrained_loss);
}

TEST_CASE("training loss decreases and stays near-monotone on the default task")
{
    std::vector<Trajectory> data;
    for (int i = 0; i < 24; ++i)
        data.push_back(generate_trajectory(
            []
            {
                TrajectoryConfig c;
                c.path_length_m = 5.0;
                return c;
            }(),
            100 + i));

    TrainConfig config;
    config.epochs = 30;
    config.batch_size = 8;
    config.train_snr_db = 10.0;
    config.seed = 29;
    config.early_stop_patience = 30;
    const auto model = train(data, NetworkArch{}, config, {8, 0.5});

    const auto& log = model.log;
    REQUIRE(log.size() >= 10);
    for (std::size_t e = 1; e < log.size(); ++e)
        REQUIRE(log[e].angle_loss <= 1.05 * log[e - 1].angle_loss);
    CHECK(log.back().angle_loss * 2.0 <= log.front().angle_loss);
}

TEST_CASE("nan inputs abort training with a diagnostic")
{
    auto bad = ramp_trajectory(20, 1.0, 0.01);
    bad.points[5].theta = std::numeric_limits<double>::quiet_NaN();
    std::vector<Trajectory> data{bad};
    TrainConfig config;
    config.epochs = 2;
    CHECK_THROWS_AS(train(data, NetworkArch{}, config, {8, 0.5}), TrainingDivergedError);
}

TEST_CASE("invalid training configs are rejected")
{
    std::vector<Trajectory> data{ramp_trajectory(10, 0.0, 0.01)};
    TrainConfig config;
    config.epochs = 0;
    CHECK_THROWS_AS(train(data, NetworkArch{}, config, {8, 0.5}), std::invalid_argument);
    TrainConfig negative;
    negative.sigma_psi_deg = -1.0;
    CHECK_THROWS_AS(train(data, NetworkArch{}, negative, {8, 0.5}), std::invalid_argument);
}
