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

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "chanem/errors.hpp"

namespace chanem {

using cdouble = std::complex<double>;

inline constexpr double speed_of_light = 299792458.0;

// Default cap on simultaneously active taps, matching common real-time
// emulator hardware budgets.
inline constexpr std::size_t default_max_active_taps = 10;

inline double db_from_amplitude(double a) { return 20.0 * std::log10(a); }
inline double db_from_power(double p) { return 10.0 * std::log10(p); }
inline double amplitude_from_db(double db) { return std::pow(10.0, db / 20.0); }

// Complex baseband sample block with its physical placement.
struct complex_signal {
    std::vector<cdouble> samples;
    double sample_rate = 0.0;      // Hz
    double center_frequency = 0.0; // Hz, RF center the baseband is referred to
    double start_time = 0.0;       // s, absolute time of samples[0]
};

// One discrete propagation path.
struct tap {
    double delay = 0.0;            // s
    cdouble amplitude{0.0, 0.0};   // linear complex gain
};

// Channel state at one instant.
struct channel_snapshot {
    double timestamp = 0.0;        // s
    std::vector<tap> taps;
};

// Time-ordered snapshot trace plus free-form annotations.
struct snapshot_sequence {
    std::vector<channel_snapshot> snapshots;
    std::map<std::string, std::string> metadata;
};

// Uniform frequency axis: start, start+step, ..., start+(count-1)*step.
struct frequency_grid {
    double start = 0.0;            // Hz
    double step = 0.0;             // Hz
    std::size_t count = 0;

    double frequency(std::size_t i) const { return start + static_cast<double>(i) * step; }

    void validate() const {
        if (count == 0)
            throw invalid_grid("frequency grid has zero points");
        if (!(step > 0.0) || !std::isfinite(step))
            throw invalid_grid("frequency grid step must be positive and finite");
        if (!std::isfinite(start))
            throw invalid_grid("frequency grid start must be finite");
    }
};

// Sampled complex transfer function on a uniform grid.  An empty `valid`
// mask means every point is valid.
struct frequency_response {
    double start_frequency = 0.0;  // Hz
    double frequency_step = 0.0;   // Hz
    std::vector<cdouble> values;
    std::vector<bool> valid;

    double frequency(std::size_t i) const {
        return start_frequency + static_cast<double>(i) * frequency_step;
    }

    bool is_valid(std::size_t i) const { return valid.empty() ? true : valid[i]; }

    frequency_grid grid() const { return {start_frequency, frequency_step, values.size()}; }
};

// Sampled complex impulse response on a uniform delay axis.
struct impulse_response {
    double delay_step = 0.0;       // s
    std::vector<cdouble> values;
    double delay_offset = 0.0;     // s, delay of values[0]
};

// One measurement band.  Only the central `usable_fraction` of the
// instantaneous bandwidth is trusted after hardware edge rolloff.
struct sub_band {
    double center_frequency = 0.0; // Hz
    double bandwidth = 0.0;        // Hz
    double usable_fraction = 1.0;

    double usable_width() const { return bandwidth * usable_fraction; }
    double usable_low() const { return center_frequency - usable_width() / 2.0; }
    double usable_high() const { return center_frequency + usable_width() / 2.0; }
};

// Single-tap equalizer: complex gain plus a pure delay correction.
struct equalizer_coeffs {
    cdouble gain{1.0, 0.0};
    double delay = 0.0;            // s
};

// Canonicalize a snapshot in place: optionally snap delays to a quantum
// grid, sort by delay, merge duplicates coherently, drop exact zeros, and
// enforce the tap budget.
inline channel_snapshot normalize_snapshot(channel_snapshot snap,
                                           std::size_t max_active_taps = default_max_active_taps,
                                           double delay_quantum = 0.0) {
    if (delay_quantum < 0.0 || !std::isfinite(delay_quantum))
        throw non_positive_input("delay quantum must be non-negative and finite");
    for (auto &t : snap.taps) {
        if (!std::isfinite(t.delay) || t.delay < 0.0)
            throw delay_out_of_range("tap delay must be non-negative and finite");
        if (delay_quantum > 0.0)
            t.delay = static_cast<double>(std::llround(t.delay / delay_quantum)) * delay_quantum;
    }
    std::stable_sort(snap.taps.begin(), snap.taps.end(),
                     [](const tap &a, const tap &b) { return a.delay < b.delay; });

    std::vector<tap> merged;
    merged.reserve(snap.taps.size());
    for (const auto &t : snap.taps) {
        if (!merged.empty() && merged.back().delay == t.delay)
            merged.back().amplitude += t.amplitude;
        else
            merged.push_back(t);
    }
    merged.erase(std::remove_if(merged.begin(), merged.end(),
                                [](const tap &t) { return t.amplitude == cdouble{0.0, 0.0}; }),
                 merged.end());

    if (merged.size() > max_active_taps)
        throw too_many_taps("snapshot has " + std::to_string(merged.size()) +
                            " active taps, budget is " + std::to_string(max_active_taps));
    snap.taps = std::move(merged);
    return snap;
}

} // namespace chanem
