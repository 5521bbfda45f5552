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

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "chanem/detail/fft.hpp"
#include "chanem/types.hpp"

namespace chanem {

// Parametric stand-in for the analog front-end chain: converters, filters,
// amplifiers and interconnect between the digital emulator core and the
// antenna port.  Defaults reproduce a measured wideband up/down conversion
// chain: flat-ish 1.5 GHz passband with raised-cosine edges, a slow gain
// ripple, one gain step where two amplifier ranges meet, and a bulk group
// delay through the full loop.
struct chain_config {
    double passband_center = 750e6;    // Hz
    double passband_width = 1.5e9;     // Hz, full width between outer edges
    double rolloff_exponent = 8.0;     // edge transition half-width = width/2 / this
    double ripple_amplitude_db = 3.0;  // dB peak-to-peak
    double ripple_period = 50e6;       // Hz
    double group_delay = 2.2e-6;       // s
    double gain_step_frequency = 500e6; // Hz, gain_step_db added above this
    double gain_step_db = 3.0;         // dB
    double base_gain_db = 0.0;         // dB
};

// Complex chain response at a single frequency.
inline cdouble chain_point(const chain_config &c, double f) {
    if (!(c.passband_width > 0.0))
        throw non_positive_input("chain passband width must be positive");
    if (!(c.ripple_period > 0.0))
        throw non_positive_input("chain ripple period must be positive");
    if (!(c.rolloff_exponent > 0.0))
        throw non_positive_input("chain rolloff exponent must be positive");

    const double half = c.passband_width / 2.0;
    const double x = std::abs(f - c.passband_center) / half;
    const double t = std::isinf(c.rolloff_exponent) ? 0.0 : 1.0 / c.rolloff_exponent;

    // Raised-cosine edged rectangle in normalized offset x: unity out to
    // 1 - t, cosine rolloff across [1 - t, 1 + t], zero beyond.
    double shape;
    if (x <= 1.0 - t)
        shape = 1.0;
    else if (t > 0.0 && x < 1.0 + t)
        shape = 0.5 * (1.0 + std::cos(std::numbers::pi * (x - (1.0 - t)) / (2.0 * t)));
    else
        shape = (x <= 1.0) ? 1.0 : 0.0;

    double gain_db = c.base_gain_db +
                     0.5 * c.ripple_amplitude_db *
                         std::sin(2.0 * std::numbers::pi * f / c.ripple_period);
    if (f > c.gain_step_frequency)
        gain_db += c.gain_step_db;

    const double mag = amplitude_from_db(gain_db) * shape;
    const double phase = -2.0 * std::numbers::pi * f * c.group_delay;
    return std::polar(mag, phase);
}

// Chain response sampled on a frequency grid.
inline frequency_response chain_response(const chain_config &c, const frequency_grid &grid) {
    grid.validate();
    frequency_response out;
    out.start_frequency = grid.start;
    out.frequency_step = grid.step;
    out.values.resize(grid.count);
    for (std::size_t i = 0; i < grid.count; ++i)
        out.values[i] = chain_point(c, grid.frequency(i));
    return out;
}

// Pass a baseband block through the chain model.  The block is transformed
// on a power-of-two grid long enough to hold the bulk group delay, shaped
// per-bin at the absolute frequency each bin maps to, and truncated back to
// the input length.
inline complex_signal apply_chain(const chain_config &c, const complex_signal &in) {
    if (!(in.sample_rate > 0.0))
        throw non_positive_input("sample rate must be positive");
    if (in.samples.empty())
        throw empty_sequence("cannot filter an empty signal");

    const std::size_t n = in.samples.size();
    const std::size_t delay_samples =
        static_cast<std::size_t>(std::ceil(c.group_delay * in.sample_rate - 1e-9));
    const std::size_t padded = detail::next_pow2(n + delay_samples);

    std::vector<cdouble> work(in.samples);
    work.resize(padded, cdouble{0.0, 0.0});
    detail::fft_pow2(work, -1);
    for (std::size_t k = 0; k < padded; ++k) {
        const double bin = (k <= padded / 2) ? static_cast<double>(k)
                                             : static_cast<double>(k) - static_cast<double>(padded);
        const double f = bin * in.sample_rate / static_cast<double>(padded) + in.center_frequency;
        work[k] *= chain_point(c, f);
    }
    detail::fft_pow2(work, +1);

    complex_signal out = in;
    out.samples.assign(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(n));
    for (auto &s : out.samples)
        s /= static_cast<double>(padded);
    return out;
}

// Far-field boundary 2 D^2 / lambda for an aperture of size D at carrier f.
inline double rayleigh_distance(double aperture, double frequency) {
    if (!(aperture > 0.0) || !(frequency > 0.0))
        throw non_positive_input("aperture and frequency must be positive");
    const double lambda = speed_of_light / frequency;
    return 2.0 * aperture * aperture / lambda;
}

} // namespace chanem
