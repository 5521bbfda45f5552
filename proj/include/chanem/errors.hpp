// SPDX-License-Identifier: Apache-2.0
//
// chanem - bandwidth-scalable baseband channel emulation library
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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chanem {

// Base class for every error thrown by this library.
class error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class too_many_taps : public error {
  public:
    using error::error;
};

class delay_out_of_range : public error {
  public:
    using error::error;
};

class invalid_grid : public error {
  public:
    using error::error;
};

class empty_sequence : public error {
  public:
    using error::error;
};

class uncovered_signal_start : public error {
  public:
    using error::error;
};

class non_positive_input : public error {
  public:
    using error::error;
};

class band_too_narrow : public error {
  public:
    using error::error;
};

class zero_response : public error {
  public:
    using error::error;
};

class degenerate_cir : public error {
  public:
    using error::error;
};

class overlap_conflict : public error {
  public:
    using error::error;
};

class grid_mismatch : public error {
  public:
    using error::error;
};

class non_uniform_sampling : public error {
  public:
    using error::error;
};

class gapped_input : public error {
  public:
    using error::error;
};

class invariant_violation : public error {
  public:
    using error::error;
};

class io_error : public error {
  public:
    using error::error;
};

// Parse failure with a line locus (1-based; 0 means unknown).
class parse_error : public error {
  public:
    parse_error(const std::string &what, std::size_t line = 0)
        : error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}

    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

} // namespace chanem
