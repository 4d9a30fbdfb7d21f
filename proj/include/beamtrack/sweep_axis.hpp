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

#include <stdexcept>
#include <string>

namespace beamtrack {

enum class SweepAxis
{
    TestSnrDb,
    NR,
    SamplesPerMeter,
    TrainSnrDb,
};

inline std::string axis_name(SweepAxis axis)
{
    switch (axis)
    {
    case SweepAxis::TestSnrDb:
        return "test_snr_db";
    case SweepAxis::NR:
        return "n_r";
    case SweepAxis::SamplesPerMeter:
        return "samples_per_meter";
    case SweepAxis::TrainSnrDb:
        return "train_snr_db";
    }
    throw std::invalid_argument("axis_name: invalid axis");
}

inline SweepAxis parse_axis(const std::string& name)
{
    if (name == "test_snr_db")
        return SweepAxis::TestSnrDb;
    if (name == "n_r")
        return SweepAxis::NR;
    if (name == "samples_per_meter")
        return SweepAxis::SamplesPerMeter;
    if (name == "train_snr_db")
        return SweepAxis::TrainSnrDb;
    throw std::invalid_argument("parse_axis: unknown axis '" + name + "'");
}

} // namespace beamtrack
