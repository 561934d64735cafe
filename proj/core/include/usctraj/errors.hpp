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

#include <stdexcept>
#include <string>

namespace usctraj {

class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input: bad labels, invalid truncation, dimension mismatch.
class config_error : public error {
public:
    using error::error;
};

class invalid_truncation : public config_error {
public:
    using config_error::config_error;
};

class dimension_mismatch : public config_error {
public:
    using config_error::config_error;
};

class singular_denominator : public config_error {
public:
    using config_error::config_error;
};

class non_hermitian : public config_error {
public:
    using config_error::config_error;
};

// Failures detected while integrating.
class numerical_error : public error {
public:
    using error::error;
};

class timestep_too_large : public numerical_error {
public:
    using numerical_error::numerical_error;
};

class numerical_inconsistency : public numerical_error {
public:
    using numerical_error::numerical_error;
};

class integrator_instability : public numerical_error {
public:
    using numerical_error::numerical_error;
};

class calibration_failure : public numerical_error {
public:
    using numerical_error::numerical_error;
};

}  // namespace usctraj
