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
#include <cstddef>
#include <numbers>
#include <utility>
#include <vector>

#include "chanem/detail/fft.hpp"
#include "chanem/tdl.hpp"
#include "chanem/types.hpp"

namespace chanem {

enum class window_shape {
    rectangular,
    hann,
    kaiser,
};

// Analysis window of length n.  Hann is periodic (DFT-even); Kaiser takes
// its shape from beta.
inline std::vector<double> make_window(window_shape shape, std::size_t n, double beta = 8.0) {
    if (n == 0)
        throw empty_sequence("window length must be positive");
    std::vector<double> w(n, 1.0);
    switch (shape) {
    case window_shape::rectangular:
        break;
    case window_shape::hann:
        for (std::size_t i = 0; i < n; ++i)
            w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                        static_cast<double>(n));
        break;
    case window_shape::kaiser: {
        const double denom = detail::bessel_i0(beta);
        const double half = (static_cast<double>(n) - 1.0) / 2.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = half > 0.0 ? (static_cast<double>(i) - half) / half : 0.0;
            w[i] = detail::bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / denom;
        }
        break;
    }
    }
    return w;
}

// What to do with invalid points when transforming a gappy response.
enum class gap_policy {
    fail,   // refuse
    linear, // interpolate linearly between valid neighbours
    zero,   // substitute zero
};

// Fill invalid points by linear interpolation between the nearest valid
// neighbours; edge gaps copy the nearest valid value.
inline frequency_response fill_gaps_linear(const frequency_response &in) {
    if (in.valid.empty())
        return in;
    frequency_response out = in;
    const std::size_t n = in.values.size();
    std::size_t first_valid = n;
    for (std::size_t i = 0; i < n; ++i)
        if (in.valid[i]) {
            first_valid = i;
            break;
        }
    if (first_valid == n)
        throw zero_response("response has no valid points");

    std::size_t prev = first_valid;
    for (std::size_t i = 0; i < first_valid; ++i)
        out.values[i] = in.values[first_valid];
    for (std::size_t i = first_valid + 1; i < n; ++i) {
        if (!in.valid[i])
            continue;
        if (i > prev + 1) {
            const double span = static_cast<double>(i - prev);
            for (std::size_t j = prev + 1; j < i; ++j) {
                const double u = static_cast<double>(j - prev) / span;
                out.values[j] = (1.0 - u) * in.values[prev] + u * in.values[i];
            }
        }
        prev = i;
    }
    for (std::size_t i = prev + 1; i < n; ++i)
        out.values[i] = in.values[prev];
    out.valid.assign(n, true);
    return out;
}

// Windowed inverse transform of a sampled response.  The window is
// normalized by its coherent gain, so a flat response of unit magnitude
// maps to a unit-peak impulse at bin zero for any window shape.
inline impulse_response tf_to_cir(const frequency_response &tf,
                                  window_shape window = window_shape::rectangular,
                                  double kaiser_beta = 8.0,
                                  gap_policy gaps = gap_policy::fail) {
    tf.grid().validate();
    frequency_response in = tf;
    if (!tf.valid.empty() &&
        std::find(tf.valid.begin(), tf.valid.end(), false) != tf.valid.end()) {
        switch (gaps) {
        case gap_policy::fail:
            throw gapped_input("response contains invalid points");
        case gap_policy::linear:
            in = fill_gaps_linear(tf);
            break;
        case gap_policy::zero:
            for (std::size_t i = 0; i < in.values.size(); ++i)
                if (!in.is_valid(i))
                    in.values[i] = cdouble{0.0, 0.0};
            in.valid.assign(in.values.size(), true);
            break;
        }
    }

    const std::size_t n = in.values.size();
    const auto w = make_window(window, n, kaiser_beta);
    double wsum = 0.0;
    for (auto v : w)
        wsum += v;

    std::vector<cdouble> work(n);
    for (std::size_t i = 0; i < n; ++i)
        work[i] = in.values[i] * w[i];
    auto h = detail::dft(std::move(work), +1);

    impulse_response out;
    out.delay_step = 1.0 / (static_cast<double>(n) * in.frequency_step);
    out.delay_offset = 0.0;
    out.values.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        out.values[i] = h[i] / wsum;
    return out;
}

// Forward transform of an impulse response back to a sampled transfer
// function.  Exact inverse of tf_to_cir with a rectangular window.
inline frequency_response cir_to_tf(const impulse_response &cir, double start_frequency = 0.0) {
    if (cir.values.empty())
        throw empty_sequence("impulse response is empty");
    if (!(cir.delay_step > 0.0))
        throw non_positive_input("delay step must be positive");

    const std::size_t n = cir.values.size();
    auto v = detail::dft(cir.values, -1);
    frequency_response out;
    out.start_frequency = start_frequency;
    out.frequency_step = 1.0 / (static_cast<double>(n) * cir.delay_step);
    out.values = std::move(v);
    return out;
}

// Delay-Doppler map: rows are Doppler bins (two-sided, ascending), columns
// are delay bins.
struct spreading_map {
    double delay_offset = 0.0;  // s, delay of column 0
    double delay_step = 0.0;    // s
    double doppler_start = 0.0; // Hz, Doppler of row 0
    double doppler_step = 0.0;  // Hz
    std::vector<std::vector<cdouble>> values;
};

// Transform a time series of impulse responses into a delay-Doppler
// spreading function.  Snapshots must be uniformly spaced and share one
// delay grid.  Each delay bin is windowed over time (window normalized by
// coherent gain) and transformed with a unitary 1/sqrt(M) DFT; rows are
// reordered to an ascending two-sided Doppler axis.
inline spreading_map
spreading_function(const std::vector<std::pair<double, impulse_response>> &series,
                   window_shape doppler_window = window_shape::rectangular,
                   double kaiser_beta = 8.0) {
    const std::size_t m = series.size();
    if (m < 2)
        throw empty_sequence("spreading function needs at least two snapshots");

    const double dt = series[1].first - series[0].first;
    if (!(dt > 0.0))
        throw non_uniform_sampling("snapshot timestamps must increase");
    for (std::size_t i = 1; i < m; ++i) {
        const double step = series[i].first - series[i - 1].first;
        if (std::abs(step - dt) > 1e-6 * dt)
            throw non_uniform_sampling("snapshot spacing varies beyond tolerance");
    }

    const auto &ref = series.front().second;
    const std::size_t n = ref.values.size();
    if (n == 0)
        throw empty_sequence("impulse responses are empty");
    for (const auto &[ts, cir] : series) {
        (void)ts;
        if (cir.values.size() != n || std::abs(cir.delay_step - ref.delay_step) > 1e-9 * ref.delay_step ||
            std::abs(cir.delay_offset - ref.delay_offset) > 1e-12)
            throw grid_mismatch("impulse responses do not share one delay grid");
    }

    auto w = make_window(doppler_window, m, kaiser_beta);
    double wsum = 0.0;
    for (auto v : w)
        wsum += v;
    const double coherent = wsum / static_cast<double>(m);
    for (auto &v : w)
        v /= coherent;

    const double unitary = 1.0 / std::sqrt(static_cast<double>(m));
    const std::size_t half = m / 2;

    spreading_map map;
    map.delay_offset = ref.delay_offset;
    map.delay_step = ref.delay_step;
    map.doppler_step = 1.0 / (static_cast<double>(m) * dt);
    map.doppler_start = -static_cast<double>(half) * map.doppler_step;
    map.values.assign(m, std::vector<cdouble>(n, cdouble{0.0, 0.0}));

    std::vector<cdouble> column(m);
    for (std::size_t d = 0; d < n; ++d) {
        for (std::size_t i = 0; i < m; ++i)
            column[i] = series[i].second.values[d] * w[i];
        auto spec = detail::dft(column, -1);
        // fftshift: row r holds Doppler (r - floor(M/2)) * step.
        for (std::size_t r = 0; r < m; ++r) {
            const std::size_t src = (r + m - half) % m;
            map.values[r][d] = spec[src] * unitary;
        }
    }
    return map;
}

// Per-snapshot total tap power in dB.
inline std::vector<std::pair<double, double>> total_power_trace(const snapshot_sequence &seq) {
    if (seq.snapshots.empty())
        throw empty_sequence("snapshot sequence is empty");
    std::vector<std::pair<double, double>> out;
    out.reserve(seq.snapshots.size());
    for (const auto &s : seq.snapshots) {
        double p = 0.0;
        for (const auto &t : s.taps)
            p += std::norm(t.amplitude);
        out.emplace_back(s.timestamp, db_from_power(p));
    }
    return out;
}

// Total power of a sampled impulse response in dB.
inline double total_power_db(const impulse_response &cir) {
    if (cir.values.empty())
        throw empty_sequence("impulse response is empty");
    double p = 0.0;
    for (const auto &v : cir.values)
        p += std::norm(v);
    return db_from_power(p);
}

// Ratio estimate of a transfer function from input/output spectra sampled
// on the same grid.  Bins where the input magnitude falls below threshold
// (relative to its peak) are marked invalid rather than divided.
inline frequency_response estimate_tf(const frequency_response &input,
                                      const frequency_response &output,
                                      double threshold = 1e-6) {
    input.grid().validate();
    output.grid().validate();
    if (input.values.size() != output.values.size() ||
        std::abs(input.start_frequency - output.start_frequency) > 1e-6 ||
        std::abs(input.frequency_step - output.frequency_step) > 1e-9)
        throw grid_mismatch("input and output grids differ");

    double peak = 0.0;
    for (const auto &v : input.values)
        peak = std::max(peak, std::abs(v));
    if (!(peak > 0.0))
        throw zero_response("input spectrum is identically zero");

    frequency_response out;
    out.start_frequency = input.start_frequency;
    out.frequency_step = input.frequency_step;
    out.values.resize(input.values.size());
    out.valid.assign(input.values.size(), true);
    for (std::size_t i = 0; i < input.values.size(); ++i) {
        const bool ok = input.is_valid(i) && output.is_valid(i) &&
                        std::abs(input.values[i]) >= threshold * peak;
        if (ok) {
            out.values[i] = output.values[i] / input.values[i];
        } else {
            out.values[i] = cdouble{0.0, 0.0};
            out.valid[i] = false;
        }
    }
    return out;
}

} // namespace chanem
