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

namespace usctraj {

// Philox4x32-10 counter-based generator. One stream per (master seed, trajectory index);
// the stream position is a 64-bit block counter, so draws never depend on scheduling.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

    // Uniform double in [0, 1) with 53 random bits.
    double uniform();
    // Uniform double in (0, 1].
    double uniform_open_low() { return 1.0 - uniform(); }
    // Standard normal (Box-Muller, both variates used).
    double normal();

    std::uint32_t next_u32();
    std::uint64_t blocks_used() const { return block_; }

    using block_type = std::array<std::uint32_t, 4>;
    static block_type philox(block_type counter, std::array<std::uint32_t, 2> key);

private:
    void refill();

    std::array<std::uint32_t, 2> key_{};
    std::uint64_t stream_ = 0;
    std::uint64_t block_ = 0;
    block_type buffer_{};
    int used_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace usctraj
