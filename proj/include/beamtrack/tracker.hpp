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
// Recurrent angle tracker: a linear projection into an LSTM followed by two
// linear layers. Input per step is [Re(y), Im(y), previous angle estimate];
// output is [theta_hat, alpha_re_hat, alpha_im_hat]. Training follows the
// noisy-true-angle scheme: the beam is pointed at the true previous angle
// plus independent Gaussian pointing noise, never at the model's own output.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "beamtrack/angles.hpp"
#include "beamtrack/channel.hpp"
#include "beamtrack/io_util.hpp"
#include "beamtrack/nn.hpp"
#include "beamtrack/parallel.hpp"
#include "beamtrack/trajectory.hpp"

namespace beamtrack {

struct TrainingDivergedError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct NetworkArch
{
    int input_dim = 3;
    int fc1_units = 20;
    int lstm_units = 40;
    int fc2_units = 20;
    int output_dim = 3;

    bool operator==(const NetworkArch&) const = default;

    void validate() const
    {
        if (input_dim < 1 || fc1_units < 1 || lstm_units < 1 || fc2_units < 1 || output_dim < 1)
            throw std::invalid_argument("NetworkArch: all dimensions must be >= 1");
    }
};

inline void to_json(nlohmann::json& j, const NetworkArch& a)
{
    j = nlohmann::json{{"input_dim", a.input_dim},
                       {"fc1_units", a.fc1_units},
                       {"lstm_units", a.lstm_units},
                       {"fc2_units", a.fc2_units},
                       {"output_dim", a.output_dim}};
}

inline void from_json(const nlohmann::json& j, NetworkArch& a)
{
    a.input_dim = j.value("input_dim", a.input_dim);
    a.fc1_units = j.value("fc1_units", a.fc1_units);
    a.lstm_units = j.value("lstm_units", a.lstm_units);
    a.fc2_units = j.value("fc2_units", a.fc2_units);
    a.output_dim = j.value("output_dim", a.output_dim);
}

// All layers are linear maps; the only nonlinearities sit inside the LSTM.
struct Network
{
    NetworkArch arch;
    DenseLayer fc1;
    LstmCell lstm;
    DenseLayer fc2;
    DenseLayer head;
};

inline Network init_network(const NetworkArch& arch, Rng& rng)
{
    arch.validate();
    Network net;
    net.arch = arch;
    net.fc1 = make_dense(arch.fc1_units, arch.input_dim, rng);
    net.lstm = make_lstm(arch.fc1_units, arch.lstm_units, rng);
    net.fc2 = make_dense(arch.fc2_units, arch.lstm_units, rng);
    net.head = make_dense(arch.output_dim, arch.fc2_units, rng);
    return net;
}

inline Eigen::Index param_count(const NetworkArch& a)
{
    const Eigen::Index lstm_cols = a.fc1_units + a.lstm_units;
    return static_cast<Eigen::Index>(a.fc1_units) * a.input_dim + a.fc1_units +
           4 * (static_cast<Eigen::Index>(a.lstm_units) * lstm_cols) + 4 * a.lstm_units +
           static_cast<Eigen::Index>(a.fc2_units) * a.lstm_units + a.fc2_units +
           static_cast<Eigen::Index>(a.output_dim) * a.fc2_units + a.output_dim;
}

namespace detail {

// Canonical parameter order (column-major matrices):
// fc1.w, fc1.b, lstm.w_i, lstm.w_f, lstm.w_g, lstm.w_o,
// lstm.b_i, lstm.b_f, lstm.b_g, lstm.b_o, fc2.w, fc2.b, head.w, head.b
template <typename MatLike>
void copy_out(Eigen::VectorXd& flat, Eigen::Index& off, const MatLike& m)
{
    std::copy(m.data(), m.data() + m.size(), flat.data() + off);
    off += m.size();
}

template <typename MatLike>
void copy_in(const Eigen::VectorXd& flat, Eigen::Index& off, MatLike& m)
{
    std::copy(flat.data() + off, flat.data() + off + m.size(), m.data());
    off += m.size();
}

template <typename NetLike, typename Fn>
void for_each_block(NetLike& net, Fn&& fn)
{
    fn(net.fc1.w);
    fn(net.fc1.b);
    fn(net.lstm.w_i);
    fn(net.lstm.w_f);
    fn(net.lstm.w_g);
    fn(net.lstm.w_o);
    fn(net.lstm.b_i);
    fn(net.lstm.b_f);
    fn(net.lstm.b_g);
    fn(net.lstm.b_o);
    fn(net.fc2.w);
    fn(net.fc2.b);
    fn(net.head.w);
    fn(net.head.b);
}

} // namespace detail

inline Eigen::VectorXd pack_network(const Network& net)
{
    Eigen::VectorXd flat(param_count(net.arch));
    Eigen::Index off = 0;
    detail::for_each_block(net, [&](const auto& m) { detail::copy_out(flat, off, m); });
    return flat;
}

inline void unpack_network(Network& net, const Eigen::VectorXd& flat)
{
    if (flat.size() != param_count(net.arch))
        throw std::invalid_argument("unpack_network: parameter count mismatch");
    Eigen::Index off = 0;
    detail::for_each_block(net, [&](auto& m) { detail::copy_in(flat, off, m); });
}

struct NetworkGrad
{
    DenseGrad fc1;
    LstmGrad lstm;
    DenseGrad fc2;
    DenseGrad head;

    explicit NetworkGrad(const Network& net)
        : fc1(net.fc1), lstm(net.lstm), fc2(net.fc2), head(net.head)
    {
    }
};

inline Eigen::VectorXd pack_grad(const NetworkArch& arch, const NetworkGrad& grad)
{
    Eigen::VectorXd flat(param_count(arch));
    Eigen::Index off = 0;
    detail::for_each_block(grad, [&](const auto& m) { detail::copy_out(flat, off, m); });
    return flat;
}

// ---------- training data ----------

struct TrainConfig
{
    double sigma_psi_deg = 5.0; // pointing-noise std for training features
    double train_snr_db = 7.0;
    int epochs = 100;
    int batch_size = 32;
    AdamConfig adam;
    double w_alpha = 0.1; // weight of the squared-error gain head
    double clip_norm = 5.0;
    int early_stop_patience = 10;
    double early_stop_rel = 1e-4;
    std::uint64_t seed = 1;
    unsigned n_threads = 1;

    void validate() const
    {
        if (!(sigma_psi_deg >= 0.0))
            throw std::invalid_argument("TrainConfig: sigma_psi_deg must be >= 0");
        if (epochs < 1)
            throw std::invalid_argument("TrainConfig: epochs must be >= 1");
        if (batch_size < 1)
            throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
        if (!(w_alpha >= 0.0))
            throw std::invalid_argument("TrainConfig: w_alpha must be >= 0");
    }
};

inline void to_json(nlohmann::json& j, const TrainConfig& c)
{
    j = nlohmann::json{{"sigma_psi_deg", c.sigma_psi_deg},
                       {"train_snr_db", c.train_snr_db},
                       {"epochs", c.epochs},
                       {"batch_size", c.batch_size},
                       {"lr", c.adam.lr},
                       {"beta1", c.adam.beta1},
                       {"beta2", c.adam.beta2},
                       {"adam_eps", c.adam.eps},
                       {"w_alpha", c.w_alpha},
                       {"clip_norm", c.clip_norm},
                       {"early_stop_patience", c.early_stop_patience},
                       {"early_stop_rel", c.early_stop_rel},
                       {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, TrainConfig& c)
{
    c.sigma_psi_deg = j.value("sigma_psi_deg", c.sigma_psi_deg);
    c.train_snr_db = j.value("train_snr_db", c.train_snr_db);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.adam.lr = j.value("lr", c.adam.lr);
    c.adam.beta1 = j.value("beta1", c.adam.beta1);
    c.adam.beta2 = j.value("beta2", c.adam.beta2);
    c.adam.eps = j.value("adam_eps", c.adam.eps);
    c.w_alpha = j.value("w_alpha", c.w_alpha);
    c.clip_norm = j.value("clip_norm", c.clip_norm);
    c.early_stop_patience = j.value("early_stop_patience", c.early_stop_patience);
    c.early_stop_rel = j.value("early_stop_rel", c.early_stop_rel);
    c.seed = j.value("seed", c.seed);
}

struct TrainingSequence
{
    std::vector<Eigen::Vector3d> features; // [Re(y_trn), Im(y_trn), theta_trn_prev]
    std::vector<Eigen::Vector3d> labels;   // [theta, alpha_re, alpha_im]
};

// Features for step n use the beam pointed at theta[n-1] plus fresh pointing
// noise; the pointing noise draws are independent across n.
inline TrainingSequence make_training_sequence(const Trajectory& traj, double sigma_psi_deg,
                                               const ObservationParams& obs, Rng& rng)
{
    if (traj.points.size() < 2)
        throw std::invalid_argument("make_training_sequence: trajectory too short");
    const double sigma = deg2rad(sigma_psi_deg);
    TrainingSequence seq;
    seq.features.reserve(traj.points.size() - 1);
    seq.labels.reserve(traj.points.size() - 1);
    for (std::size_t n = 1; n < traj.points.size(); ++n)
    {
        const double theta_trn = wrap_two_pi(traj.points[n - 1].theta + draw_normal(rng, sigma));
        const std::complex<double> y = observe(traj.points[n], theta_trn, obs, rng);
        seq.features.emplace_back(y.real(), y.imag(), theta_trn);
        seq.labels.emplace_back(traj.points[n].theta, traj.points[n].alpha.real(),
                                traj.points[n].alpha.imag());
    }
    return seq;
}

// ---------- forward / backward over one sequence ----------

struct SequenceLoss
{
    double angle_sum = 0.0; // sum of cosine losses
    double alpha_sum = 0.0; // sum of squared gain errors (unweighted)
    std::size_t steps = 0;
};

// Accumulates parameter gradients of sum_n [E_theta + w_alpha * |alpha_err|^2]
// over the sequence into grad. Returns the unweighted loss sums.
inline SequenceLoss sequence_grad(const Network& net, const TrainingSequence& seq, double w_alpha,
                                  NetworkGrad& grad)
{
    const std::size_t steps = seq.features.size();
    if (steps == 0)
        throw std::invalid_argument("sequence_grad: empty sequence");

    std::vector<Eigen::VectorXd> u(steps), h(steps), v(steps), out(steps);
    std::vector<LstmCache> caches(steps);
    LstmState state = make_lstm_state(net.arch.lstm_units);
    SequenceLoss loss;
    loss.steps = steps;

    for (std::size_t t = 0; t < steps; ++t)
    {
        u[t] = dense_forward(net.fc1, seq.features[t]);
        state = lstm_step_cached(net.lstm, state, u[t], caches[t]);
        h[t] = state.h;
        v[t] = dense_forward(net.fc2, h[t]);
        out[t] = dense_forward(net.head, v[t]);

        const double delta = seq.labels[t](0) - out[t](0);
        loss.angle_sum += cosine_loss(delta);
        const double e_re = out[t](1) - seq.labels[t](1);
        const double e_im = out[t](2) - seq.labels[t](2);
        loss.alpha_sum += e_re * e_re + e_im * e_im;
    }

    Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(net.arch.lstm_units);
    Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(net.arch.lstm_units);
    Eigen::VectorXd du, dh_prev, dc_prev;
    for (std::size_t t = steps; t-- > 0;)
    {
        Eigen::VectorXd dout = Eigen::VectorXd::Zero(net.arch.output_dim);
        const double delta = seq.labels[t](0) - out[t](0);
        dout(0) = cosine_loss_grad(delta);
        dout(1) = 2.0 * w_alpha * (out[t](1) - seq.labels[t](1));
        dout(2) = 2.0 * w_alpha * (out[t](2) - seq.labels[t](2));

        const Eigen::VectorXd dv = dense_backward(net.head, v[t], dout, grad.head);
        const Eigen::VectorXd dh = dense_backward(net.fc2, h[t], dv, grad.fc2) + dh_next;
        lstm_backward_step(net.lstm, caches[t], dh, dc_next, grad.lstm, du, dh_prev, dc_prev);
        dense_backward(net.fc1, seq.features[t], du, grad.fc1);
        dh_next = dh_prev;
        dc_next = dc_prev;
    }
    return loss;
}

// ---------- training loop ----------

struct EpochStats
{
    double angle_loss = 0.0; // mean cosine loss per step
    double alpha_loss = 0.0; // mean squared gain error per step
};

struct TrainedModel
{
    Network net;
    TrainConfig config;
    std::vector<EpochStats> log;
};

namespace detail {

inline constexpr std::uint64_t kInitStream = 0xb7000001ULL << 16;
inline constexpr std::uint64_t kShuffleStream = 0xb7000002ULL << 16;

} // namespace detail

// Trains on the given trajectories. Deterministic for a fixed config: feature
// noise comes from per-sequence sub-streams and batch gradients are reduced in
// index order, so the result does not depend on n_threads.
inline TrainedModel train(std::span<const Trajectory> trajectories, const NetworkArch& arch,
                          const TrainConfig& config, const ArrayGeometry& geometry)
{
    config.validate();
    if (trajectories.empty())
        throw std::invalid_argument("train: empty dataset");
    const ObservationParams obs = ObservationParams::from_snr(geometry, config.train_snr_db);

    std::vector<TrainingSequence> sequences(trajectories.size());
    parallel_for(trajectories.size(), config.n_threads,
                 [&](std::size_t i)
                 {
                     Rng rng = derive_rng(config.seed, i);
                     sequences[i] =
                         make_training_sequence(trajectories[i], config.sigma_psi_deg, obs, rng);
                 });

    Rng init_rng = derive_rng(config.seed, detail::kInitStream);
    Network net = init_network(arch, init_rng);
    Eigen::VectorXd params = pack_network(net);
    AdamState adam = make_adam(params.size(), config.adam);

    std::vector<std::size_t> order(sequences.size());
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng = derive_rng(config.seed, detail::kShuffleStream);

    TrainedModel model{std::move(net), config, {}};
    double best = std::numeric_limits<double>::infinity();
    int stale_epochs = 0;

    std::vector<Eigen::VectorXd> slot_grads(config.batch_size);
    std::vector<SequenceLoss> slot_loss(config.batch_size);

    for (int epoch = 0; epoch < config.epochs; ++epoch)
    {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double angle_sum = 0.0, alpha_sum = 0.0;
        std::size_t step_sum = 0;

        for (std::size_t start = 0; start < order.size(); start += config.batch_size)
        {
            const std::size_t count = std::min<std::size_t>(config.batch_size, order.size() - start);
            parallel_for(count, config.n_threads,
                         [&](std::size_t s)
                         {
                             NetworkGrad grad(model.net);
                             slot_loss[s] = sequence_grad(model.net, sequences[order[start + s]],
                                                          config.w_alpha, grad);
                             slot_grads[s] = pack_grad(arch, grad);
                         });

            Eigen::VectorXd grad_flat = Eigen::VectorXd::Zero(params.size());
            std::size_t batch_steps = 0;
            for (std::size_t s = 0; s < count; ++s)
            {
                grad_flat += slot_grads[s];
                batch_steps += slot_loss[s].steps;
                angle_sum += slot_loss[s].angle_sum;
                alpha_sum += slot_loss[s].alpha_sum;
            }
            step_sum += batch_steps;

            grad_flat /= static_cast<double>(batch_steps);
            clip_gradient_norm(grad_flat, config.clip_norm);
            adam_step(params, grad_flat, adam);
            unpack_network(model.net, params);
        }

        EpochStats stats{angle_sum / static_cast<double>(step_sum),
                         alpha_sum / static_cast<double>(step_sum)};
        if (!std::isfinite(stats.angle_loss) || !std::isfinite(stats.alpha_loss))
            throw TrainingDivergedError("train: loss diverged at epoch " + std::to_string(epoch));
        model.log.push_back(stats);

        const double objective = stats.angle_loss + config.w_alpha * stats.alpha_loss;
        if (objective < best * (1.0 - config.early_stop_rel))
        {
            best = objective;
            stale_epochs = 0;
        }
        else if (++stale_epochs >= config.early_stop_patience)
        {
            break;
        }
    }
    return model;
}

// ---------- sequential inference ----------

struct TrackState
{
    LstmState lstm;
};

inline TrackState make_track_state(const NetworkArch& arch)
{
    return {make_lstm_state(arch.lstm_units)};
}

struct TrackOutput
{
    double theta_hat = 0.0; // wrapped into [0, 2*pi)
    std::complex<double> alpha_hat{0.0, 0.0};
};

// One recurrent step. Pure given (net, state, inputs); the LSTM state advances
// through the explicit TrackState only.
inline TrackOutput track_step(const Network& net, TrackState& state, std::complex<double> y,
                              double theta_prev)
{
    Eigen::Vector3d feature(y.real(), y.imag(), theta_prev);
    const Eigen::VectorXd u = dense_forward(net.fc1, feature);
    state.lstm = lstm_step(net.lstm, state.lstm, u);
    const Eigen::VectorXd v = dense_forward(net.fc2, state.lstm.h);
    const Eigen::VectorXd out = dense_forward(net.head, v);
    return {wrap_two_pi(out(0)), {out(1), out(2)}};
}

// ---------- weights file ----------

inline constexpr int kWeightsSchemaVersion = 1;

// One line of JSON (arch, config echo, loss curve), then the flat float64
// little-endian parameter blob in canonical order.
inline void save_weights(const TrainedModel& model, const std::string& path)
{
    nlohmann::json log = nlohmann::json::array();
    for (const auto& e : model.log)
        log.push_back({{"angle_loss", e.angle_loss}, {"alpha_loss", e.alpha_loss}});
    const nlohmann::json header{
        {"magic", "btwt"},
        {"schema", kWeightsSchemaVersion},
        {"arch", model.net.arch},
        {"param_count", param_count(model.net.arch)},
        {"param_order",
         "fc1.w,fc1.b,lstm.w_i,lstm.w_f,lstm.w_g,lstm.w_o,lstm.b_i,lstm.b_f,lstm.b_g,lstm.b_o,"
         "fc2.w,fc2.b,head.w,head.b"},
        {"matrix_layout", "column-major"},
        {"training", model.config},
        {"log", log}};

    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("save_weights: cannot open " + path);
    os << header.dump() << '\n';
    const Eigen::VectorXd flat = pack_network(model.net);
    write_f64_le(os, flat.data(), static_cast<std::size_t>(flat.size()));
    if (!os)
        throw std::runtime_error("save_weights: write failed for " + path);
}

inline TrainedModel load_weights(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("load_weights: cannot open " + path);
    std::string line;
    if (!std::getline(is, line))
        throw std::runtime_error("load_weights: missing header line");
    const nlohmann::json header = nlohmann::json::parse(line);
    if (header.value("magic", "") != "btwt")
        throw std::runtime_error("load_weights: bad magic");
    if (header.value("schema", -1) != kWeightsSchemaVersion)
        throw std::runtime_error("load_weights: unsupported schema version");

    TrainedModel model;
    const NetworkArch arch = header.at("arch").get<NetworkArch>();
    arch.validate();
    const Eigen::Index n = param_count(arch);
    if (header.at("param_count").get<Eigen::Index>() != n)
        throw std::runtime_error("load_weights: parameter count mismatch");

    Rng dummy(0);
    model.net = init_network(arch, dummy);
    model.config = header.value("training", TrainConfig{});
    if (header.contains("log"))
        for (const auto& e : header.at("log"))
            model.log.push_back({e.at("angle_loss").get<double>(), e.at("alpha_loss").get<double>()});

    Eigen::VectorXd flat(n);
    read_f64_le(is, flat.data(), static_cast<std::size_t>(n));
    unpack_network(model.net, flat);
    return model;
}

} // namespace beamtrack
