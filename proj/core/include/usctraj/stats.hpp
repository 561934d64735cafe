// Copyright 2026 The usctraj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "usctraj/mcwf.hpp"

namespace usctraj {

enum class RatioMode {
    per_bin,            // channel count / all masked counts in the same bin
    per_channel_total,  // channel count / total count of that channel
    absolute,           // raw count
};

RatioMode parse_ratio_mode(const std::string& s);
std::string to_string(RatioMode m);

using ChannelMask = std::array<bool, 4>;
inline constexpr ChannelMask local_channels = {true, true, true, false};
inline constexpr ChannelMask qubit_channels = {false, true, true, false};
inline constexpr ChannelMask every_channel = {true, true, true, true};

class JumpHistogram {
public:
    JumpHistogram() = default;
    JumpHistogram(double bin_width, std::size_t bins, ChannelMask mask);

    std::size_t bins() const { return counts_[0].size(); }
    double bin_width() const { return width_; }
    double bin_start(std::size_t i) const { return i * width_; }
    double bin_end(std::size_t i) const { return (i + 1) * width_; }
    std::vector<double> bin_edges() const;
    const ChannelMask& mask() const { return mask_; }

    std::uint64_t count(Channel c, std::size_t bin) const { return counts_[static_cast<int>(c)][bin]; }
    std::uint64_t bin_total(std::size_t bin) const;
    std::uint64_t channel_total(Channel c) const;
    std::uint64_t total() const;
    double value(Channel c, std::size_t bin, RatioMode mode) const;

    // Number of records scanned, of records whose first jump matched the trigger, and of counted events.
    std::uint64_t trajectory_count = 0;
    std::uint64_t triggered_count = 0;
    std::uint64_t qualifying_count = 0;
    bool empty() const { return total() == 0; }

    // Adds an event at time t if its channel is masked in and t falls inside the bins.
    bool add(Channel c, double t);
    JumpHistogram& merge(const JumpHistogram& other);
    JumpHistogram coarsen(std::size_t factor) const;
    bool operator==(const JumpHistogram& other) const;

private:
    double width_ = 1.0;
    ChannelMask mask_ = every_channel;
    std::array<std::vector<std::uint64_t>, 4> counts_;
};

JumpHistogram merge(const JumpHistogram& a, const JumpHistogram& b);

// First jump of each record. t_max = 0 uses the longest record duration.
JumpHistogram first_jump_histogram(const std::vector<TrajectoryRecord>& records, double bin_width,
                                   ChannelMask mask = local_channels, double t_max = 0.0);

// Delay from a trigger first jump to the second jump, by second-jump channel. window = 0 uses the
// longest post-trigger record span.
JumpHistogram conditional_second_jump_histogram(const std::vector<TrajectoryRecord>& records, Channel trigger,
                                                double bin_width, ChannelMask mask = qubit_channels,
                                                double window = 0.0);

// Drops each jump independently with probability f, modelling a detector of efficiency 1 - f.
std::vector<TrajectoryRecord> thin_jumps(const std::vector<TrajectoryRecord>& records, double f,
                                         std::uint64_t seed);

// Columns: bin_start, bin_end, then one value per masked channel. Lines of `preamble` are written first
// with a leading '#'.
void write_tsv(std::ostream& out, const JumpHistogram& h, RatioMode mode, const std::string& preamble = "");

}  // namespace usctraj
