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

#include "usctraj/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "usctraj/errors.hpp"

namespace usctraj {

RatioMode parse_ratio_mode(const std::string& s) {
    if (s == "per_bin") return RatioMode::per_bin;
    if (s == "per_channel_total") return RatioMode::per_channel_total;
    if (s == "absolute") return RatioMode::absolute;
    throw config_error("unknown histogram normalization '" + s + "' (expected per_bin, per_channel_total or absolute)");
}

std::string to_string(RatioMode m) {
    switch (m) {
        case RatioMode::per_bin: return "per_bin";
        case RatioMode::per_channel_total: return "per_channel_total";
        case RatioMode::absolute: return "absolute";
    }
    return "per_bin";
}

JumpHistogram::JumpHistogram(double bin_width, std::size_t bins, ChannelMask mask) : width_(bin_width), mask_(mask) {
    if (!(bin_width > 0.0)) throw config_error("bin width must be positive");
    for (auto& c : counts_) c.assign(bins, 0);
}

std::vector<double> JumpHistogram::bin_edges() const {
    std::vector<double> e(bins() + 1);
    for (std::size_t i = 0; i <= bins(); ++i) e[i] = i * width_;
    return e;
}

std::uint64_t JumpHistogram::bin_total(std::size_t bin) const {
    std::uint64_t s = 0;
    for (int m = 0; m < channel_count; ++m) {
        if (mask_[m]) s += counts_[m][bin];
    }
    return s;
}

std::uint64_t JumpHistogram::channel_total(Channel c) const {
    std::uint64_t s = 0;
    for (std::uint64_t v : counts_[static_cast<int>(c)]) s += v;
    return s;
}

std::uint64_t JumpHistogram::total() const {
    std::uint64_t s = 0;
    for (int m = 0; m < channel_count; ++m) {
        if (mask_[m]) s += channel_total(static_cast<Channel>(m));
    }
    return s;
}

double JumpHistogram::value(Channel c, std::size_t bin, RatioMode mode) const {
    const double n = static_cast<double>(count(c, bin));
    switch (mode) {
        case RatioMode::absolute: return n;
        case RatioMode::per_bin: {
            const std::uint64_t t = bin_total(bin);
            return t == 0 ? 0.0 : n / static_cast<double>(t);
        }
        case RatioMode::per_channel_total: {
            const std::uint64_t t = channel_total(c);
            return t == 0 ? 0.0 : n / static_cast<double>(t);
        }
    }
    return n;
}

bool JumpHistogram::add(Channel c, double t) {
    const int m = static_cast<int>(c);
    if (!mask_[m] || t < 0.0) return false;
    auto bin = static_cast<std::size_t>(std::floor(t / width_));
    if (bin == bins() && t <= bins() * width_ * (1.0 + 1e-12)) bin = bins() - 1;
    if (bin >= bins()) return false;
    ++counts_[m][bin];
    ++qualifying_count;
    return true;
}

JumpHistogram& JumpHistogram::merge(const JumpHistogram& other) {
    if (other.bins() != bins() || other.width_ != width_ || other.mask_ != mask_) {
        throw dimension_mismatch("histograms with different binning cannot be merged");
    }
    for (int m = 0; m < channel_count; ++m) {
        for (std::size_t i = 0; i < bins(); ++i) counts_[m][i] += other.counts_[m][i];
    }
    trajectory_count += other.trajectory_count;
    triggered_count += other.triggered_count;
    qualifying_count += other.qualifying_count;
    return *this;
}

JumpHistogram merge(const JumpHistogram& a, const JumpHistogram& b) {
    JumpHistogram out = a;
    out.merge(b);
    return out;
}

JumpHistogram JumpHistogram::coarsen(std::size_t factor) const {
    if (factor == 0) throw config_error("coarsening factor must be positive");
    const std::size_t nb = (bins() + factor - 1) / factor;
    JumpHistogram out(width_ * factor, nb, mask_);
    for (int m = 0; m < channel_count; ++m) {
        for (std::size_t i = 0; i < bins(); ++i) out.counts_[m][i / factor] += counts_[m][i];
    }
    out.trajectory_count = trajectory_count;
    out.triggered_count = triggered_count;
    out.qualifying_count = qualifying_count;
    return out;
}

bool JumpHistogram::operator==(const JumpHistogram& o) const {
    return width_ == o.width_ && mask_ == o.mask_ && counts_ == o.counts_ && trajectory_count == o.trajectory_count &&
           triggered_count == o.triggered_count && qualifying_count == o.qualifying_count;
}

namespace {

std::size_t bins_for(double span, double width) {
    if (!(width > 0.0)) throw config_error("bin width must be positive");
    const double r = span / width;
    auto n = static_cast<std::size_t>(std::ceil(r - 1e-9));
    return std::max<std::size_t>(n, 1);
}

}  // namespace

JumpHistogram first_jump_histogram(const std::vector<TrajectoryRecord>& records, double bin_width, ChannelMask mask,
                                   double t_max) {
    if (records.empty()) throw config_error("first_jump_histogram needs at least one record");
    if (t_max <= 0.0) {
        for (const TrajectoryRecord& r : records) t_max = std::max(t_max, r.final_time);
    }
    JumpHistogram h(bin_width, bins_for(t_max, bin_width), mask);
    for (const TrajectoryRecord& r : records) {
        ++h.trajectory_count;
        if (!r.jumps.empty()) h.add(r.jumps.front().channel, r.jumps.front().time);
    }
    return h;
}

JumpHistogram conditional_second_jump_histogram(const std::vector<TrajectoryRecord>& records, Channel trigger,
                                                double bin_width, ChannelMask mask, double window) {
    if (records.empty()) throw config_error("conditional_second_jump_histogram needs at least one record");
    if (window <= 0.0) {
        for (const TrajectoryRecord& r : records) {
            if (!r.jumps.empty() && r.jumps.front().channel == trigger) {
                window = std::max(window, r.final_time - r.jumps.front().time);
            }
        }
        if (window <= 0.0) window = bin_width;
    }
    JumpHistogram h(bin_width, bins_for(window, bin_width), mask);
    for (const TrajectoryRecord& r : records) {
        ++h.trajectory_count;
        if (r.jumps.empty() || r.jumps.front().channel != trigger) continue;
        ++h.triggered_count;
        if (r.jumps.size() < 2) continue;
        h.add(r.jumps[1].channel, r.jumps[1].time - r.jumps[0].time);
    }
    return h;
}

std::vector<TrajectoryRecord> thin_jumps(const std::vector<TrajectoryRecord>& records, double f, std::uint64_t seed) {
    if (f < 0.0 || f >= 1.0) throw config_error("discard fraction must lie in [0, 1)");
    std::vector<TrajectoryRecord> out;
    out.reserve(records.size());
    for (const TrajectoryRecord& r : records) {
        TrajectoryRecord t;
        t.params = r.params;
        t.seed = r.seed;
        t.index = r.index;
        t.final_time = r.final_time;
        RngStream rng(seed, r.index);
        for (const JumpEvent& e : r.jumps) {
            if (rng.uniform() >= f) t.jumps.push_back(e);
        }
        out.push_back(std::move(t));
    }
    return out;
}

void write_tsv(std::ostream& out, const JumpHistogram& h, RatioMode mode, const std::string& preamble) {
    std::istringstream pre(preamble);
    for (std::string line; std::getline(pre, line);) out << "# " << line << '\n';
    out << "# trajectories=" << h.trajectory_count << " triggered=" << h.triggered_count
        << " counted=" << h.qualifying_count << " normalization=" << to_string(mode)
        << (h.empty() ? " empty=true" : "") << '\n';
    out << "bin_start\tbin_end";
    for (Channel c : all_channels) {
        if (h.mask()[static_cast<int>(c)]) out << '\t' << to_string(c);
    }
    out << '\n';
    char buf[64];
    for (std::size_t i = 0; i < h.bins(); ++i) {
        std::snprintf(buf, sizeof buf, "%.10g\t%.10g", h.bin_start(i), h.bin_end(i));
        out << buf;
        for (Channel c : all_channels) {
            if (!h.mask()[static_cast<int>(c)]) continue;
            if (mode == RatioMode::absolute) {
                out << '\t' << h.count(c, i);
            } else {
                std::snprintf(buf, sizeof buf, "\t%.10g", h.value(c, i, mode));
                out << buf;
            }
        }
        out << '\n';
    }
}

}  // namespace usctraj
