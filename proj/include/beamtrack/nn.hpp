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
// Minimal neural-network kernel: dense layers, an LSTM cell with exact
// backpropagation through time, and the Adam optimizer. Everything runs at
// float64 so gradient checks against finite differences are decisive.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "beamtrack/rng.hpp"

namespace beamtrack {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// ---------- dense layer ----------

struct DenseLayer
{
    Eigen::MatrixXd w; // out x in
    Eigen::VectorXd b; // out
};

struct DenseGrad
{
    Eigen::MatrixXd w;
    Eigen::VectorXd b;

    explicit DenseGrad(const DenseLayer& layer)
        : w(Eigen::MatrixXd::Zero(layer.w.rows(), layer.w.cols())),
          b(Eigen::VectorXd::Zero(layer.b.size()))
    {
    }
};

inline Eigen::VectorXd dense_forward(const DenseLayer& layer, const Eigen::VectorXd& x)
{
    if (x.size() != layer.w.cols())
        throw std::invalid_argument("dense_forward: input dimension mismatch");
    return layer.w * x + layer.b;
}

// Accumulates dw/db into grad and returns dx.
inline Eigen::VectorXd dense_backward(const DenseLayer& layer, const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& dy, DenseGrad& grad)
{
    if (x.size() != layer.w.cols() || dy.size() != layer.w.rows())
        throw std::invalid_argument("dense_backward: dimension mismatch");
    grad.w.noalias() += dy * x.transpose();
    grad.b += dy;
    return layer.w.transpose() * dy;
}

// ---------- LSTM cell ----------

struct LstmCell
{
    int input_size = 0;
    int hidden_size = 0;
    // Gate weights act on the concatenation [x; h_prev].
    Eigen::MatrixXd w_i, w_f, w_g, w_o; // hidden x (input + hidden)
    Eigen::VectorXd b_i, b_f, b_g, b_o; // hidden
};

struct LstmState
{
    Eigen::VectorXd h;
    Eigen::VectorXd c;
};

inline LstmState make_lstm_state(int hidden_size)
{
    return {Eigen::VectorXd::Zero(hidden_size), Eigen::VectorXd::Zero(hidden_size)};
}

struct LstmCache
{
    Eigen::VectorXd z; // [x; h_prev]
    Eigen::VectorXd i, f, g, o;
    Eigen::VectorXd c_prev, c, tanh_c;
};

inline LstmState lstm_step_cached(const LstmCell& cell, const LstmState& state,
                                  const Eigen::VectorXd& x, LstmCache& cache)
{
    if (x.size() != cell.input_size || state.h.size() != cell.hidden_size)
        throw std::invalid_argument("lstm_step: dimension mismatch");

    cache.z.resize(cell.input_size + cell.hidden_size);
    cache.z << x, state.h;
    cache.i = (cell.w_i * cache.z + cell.b_i).unaryExpr([](double v) { return sigmoid(v); });
    cache.f = (cell.w_f * cache.z + cell.b_f).unaryExpr([](double v) { return sigmoid(v); });
    cache.o = (cell.w_o * cache.z + cell.b_o).unaryExpr([](double v) { return sigmoid(v); });
    cache.g = (cell.w_g * cache.z + cell.b_g).array().tanh();
    cache.c_prev = state.c;
    cache.c = cache.f.cwiseProduct(state.c) + cache.i.cwiseProduct(cache.g);
    cache.tanh_c = cache.c.array().tanh();

    LstmState next;
    next.c = cache.c;
    next.h = cache.o.cwiseProduct(cache.tanh_c);
    return next;
}

inline LstmState lstm_step(const LstmCell& cell, const LstmState& state, const Eigen::VectorXd& x)
{
    LstmCache cache;
    return lstm_step_cached(cell, state, x, cache);
}

struct LstmGrad
{
    Eigen::MatrixXd w_i, w_f, w_g, w_o;
    Eigen::VectorXd b_i, b_f, b_g, b_o;

    explicit LstmGrad(const LstmCell& cell)
    {
        const auto rows = cell.hidden_size;
        const auto cols = cell.input_size + cell.hidden_size;
        w_i = Eigen::MatrixXd::Zero(rows, cols);
        w_f = Eigen::MatrixXd::Zero(rows, cols);
        w_g = Eigen::MatrixXd::Zero(rows, cols);
        w_o = Eigen::MatrixXd::Zero(rows, cols);
        b_i = Eigen::VectorXd::Zero(rows);
        b_f = Eigen::VectorXd::Zero(rows);
        b_g = Eigen::VectorXd::Zero(rows);
        b_o = Eigen::VectorXd::Zero(rows);
    }
};

// One BPTT step. dh/dc are the gradients flowing into this step's outputs;
// returns the gradients for the inputs and the previous state.
inline void lstm_backward_step(const LstmCell& cell, const LstmCache& cache,
                               const Eigen::VectorXd& dh, const Eigen::VectorXd& dc_in,
                               LstmGrad& grad, Eigen::VectorXd& dx, Eigen::VectorXd& dh_prev,
                               Eigen::VectorXd& dc_prev)
{
    const Eigen::ArrayXd tanh_c = cache.tanh_c.array();
    const Eigen::ArrayXd dc =
        dc_in.array() + dh.array() * cache.o.array() * (1.0 - tanh_c * tanh_c);

    const Eigen::ArrayXd da_o =
        dh.array() * tanh_c * cache.o.array() * (1.0 - cache.o.array());
    const Eigen::ArrayXd da_f =
        dc * cache.c_prev.array() * cache.f.array() * (1.0 - cache.f.array());
    const Eigen::ArrayXd da_i = dc * cache.g.array() * cache.i.array() * (1.0 - cache.i.array());
    const Eigen::ArrayXd da_g = dc * cache.i.array() * (1.0 - cache.g.array() * cache.g.array());

    const Eigen::VectorXd va_i = da_i.matrix();
    const Eigen::VectorXd va_f = da_f.matrix();
    const Eigen::VectorXd va_g = da_g.matrix();
    const Eigen::VectorXd va_o = da_o.matrix();

    grad.w_i.noalias() += va_i * cache.z.transpose();
    grad.w_f.noalias() += va_f * cache.z.transpose();
    grad.w_g.noalias() += va_g * cache.z.transpose();
    grad.w_o.noalias() += va_o * cache.z.transpose();
    grad.b_i += va_i;
    grad.b_f += va_f;
    grad.b_g += va_g;
    grad.b_o += va_o;

    const Eigen::VectorXd dz = cell.w_i.transpose() * va_i + cell.w_f.transpose() * va_f +
                               cell.w_g.transpose() * va_g + cell.w_o.transpose() * va_o;
    dx = dz.head(cell.input_size);
    dh_prev = dz.tail(cell.hidden_size);
    dc_prev = (dc * cache.f.array()).matrix();
}

// Full-sequence forward pass; outputs[t] is h after consuming xs[t].
inline std::vector<Eigen::VectorXd> lstm_forward_sequence(const LstmCell& cell,
                                                          const LstmState& initial,
                                                          const std::vector<Eigen::VectorXd>& xs,
                                                          std::vector<LstmCache>& caches)
{
    if (xs.empty())
        throw std::invalid_argument("lstm_forward_sequence: empty sequence");
    caches.resize(xs.size());
    std::vector<Eigen::VectorXd> outputs(xs.size());
    LstmState state = initial;
    for (std::size_t t = 0; t < xs.size(); ++t)
    {
        state = lstm_step_cached(cell, state, xs[t], caches[t]);
        outputs[t] = state.h;
    }
    return outputs;
}

// Full BPTT given per-step output gradients dhs[t]; returns input gradients.
inline std::vector<Eigen::VectorXd> lstm_backward_sequence(const LstmCell& cell,
                                                           const std::vector<LstmCache>& caches,
                                                           const std::vector<Eigen::VectorXd>& dhs,
                                                           LstmGrad& grad)
{
    if (caches.size() != dhs.size() || caches.empty())
        throw std::invalid_argument("lstm_backward_sequence: length mismatch");
    std::vector<Eigen::VectorXd> dxs(caches.size());
    Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(cell.hidden_size);
    Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(cell.hidden_size);
    Eigen::VectorXd dx, dh_prev, dc_prev;
    for (std::size_t t = caches.size(); t-- > 0;)
    {
        const Eigen::VectorXd dh = dhs[t] + dh_next;
        lstm_backward_step(cell, caches[t], dh, dc_next, grad, dx, dh_prev, dc_prev);
        dxs[t] = dx;
        dh_next = dh_prev;
        dc_next = dc_prev;
    }
    return dxs;
}

// ---------- initialization ----------

inline Eigen::MatrixXd glorot_uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng)
{
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r)
            m(r, c) = dist(rng);
    return m;
}

inline DenseLayer make_dense(int out, int in, Rng& rng)
{
    return {glorot_uniform(out, in, rng), Eigen::VectorXd::Zero(out)};
}

// Forget-gate bias starts at 1 so early training does not erase the cell state.
inline LstmCell make_lstm(int input_size, int hidden_size, Rng& rng)
{
    LstmCell cell;
    cell.input_size = input_size;
    cell.hidden_size = hidden_size;
    const int cols = input_size + hidden_size;
    cell.w_i = glorot_uniform(hidden_size, cols, rng);
    cell.w_f = glorot_uniform(hidden_size, cols, rng);
    cell.w_g = glorot_uniform(hidden_size, cols, rng);
    cell.w_o = glorot_uniform(hidden_size, cols, rng);
    cell.b_i = Eigen::VectorXd::Zero(hidden_size);
    cell.b_f = Eigen::VectorXd::Ones(hidden_size);
    cell.b_g = Eigen::VectorXd::Zero(hidden_size);
    cell.b_o = Eigen::VectorXd::Zero(hidden_size);
    return cell;
}

// ---------- Adam ----------

struct AdamConfig
{
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState
{
    Eigen::VectorXd m;
    Eigen::VectorXd v;
    long t = 0;
    AdamConfig hyper;
};

inline AdamState make_adam(Eigen::Index n_params, const AdamConfig& config = {})
{
    return {Eigen::VectorXd::Zero(n_params), Eigen::VectorXd::Zero(n_params), 0, config};
}

// Bias-corrected Adam update on a flat parameter vector.
inline void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamState& state)
{
    if (params.size() != grad.size() || params.size() != state.m.size())
        throw std::invalid_argument("adam_step: shape mismatch");
    const AdamConfig& h = state.hyper;
    state.t += 1;
    state.m = h.beta1 * state.m + (1.0 - h.beta1) * grad;
    state.v = h.beta2 * state.v + (1.0 - h.beta2) * grad.cwiseProduct(grad);
    const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.t));
    const Eigen::ArrayXd m_hat = state.m.array() / bc1;
    const Eigen::ArrayXd v_hat = state.v.array() / bc2;
    params.array() -= h.lr * m_hat / (v_hat.sqrt() + h.eps);
}

// Scales grad down to max_norm when its L2 norm exceeds it; returns the pre-clip norm.
inline double clip_gradient_norm(Eigen::VectorXd& grad, double max_norm)
{
    const double norm = grad.norm();
    if (norm > max_norm && norm > 0.0)
        grad *= max_norm / norm;
    return norm;
}

} // namespace beamtrack
