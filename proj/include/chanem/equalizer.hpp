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
#include <vector>

#include "chanem/detail/fft.hpp"
#include "chanem/types.hpp"

namespace chanem {

// How the equalizer's bulk delay is estimated from a measured response.
enum class delay_estimate_mode {
    phase_slope, // least-squares slope of the unwrapped in-band phase
    cir_peak,    // position of the strongest impulse-response bin
};

// Fit a one-tap equalizer (complex gain + pure delay) to a measured
// response over [band_low, band_high].  The gain magnitude inverts the
// mean in-band magnitude (geometric mean optionally), the delay cancels
// the mean in-band group delay, and the gain phase cancels the residual
// phase at the band reference.
inline equalizer_coeffs calibrate_one_tap(const frequency_response &measured,
                                          double band_low, double band_high,
                                          bool geometric_mean = false,
                                          delay_estimate_mode mode = delay_estimate_mode::phase_slope) {
    measured.grid().validate();
    if (!(band_high > band_low))
        throw band_too_narrow("calibration band is empty");

    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < measured.values.size(); ++i) {
        const double f = measured.frequency(i);
        if (f >= band_low - 1e-9 && f <= band_high + 1e-9) {
            if (!measured.is_valid(i))
                throw gapped_input("calibration band contains invalid points");
            idx.push_back(i);
        }
    }
    if (idx.size() < 8)
        throw band_too_narrow("calibration band covers fewer than 8 grid points");

    // Magnitude: arithmetic or geometric mean of in-band |H|.
    double mean_mag;
    if (geometric_mean) {
        double acc = 0.0;
        for (auto i : idx) {
            const double m = std::abs(measured.values[i]);
            if (m <= 0.0)
                throw zero_response("response magnitude is zero inside the band");
            acc += std::log(m);
        }
        mean_mag = std::exp(acc / static_cast<double>(idx.size()));
    } else {
        double acc = 0.0;
        for (auto i : idx)
            acc += std::abs(measured.values[i]);
        mean_mag = acc / static_cast<double>(idx.size());
    }
    if (!(mean_mag > 0.0))
        throw zero_response("response magnitude is zero inside the band");

    // Unwrap the in-band phase by accumulating +-2 pi corrections.
    std::vector<double> phase(idx.size());
    double offset = 0.0;
    for (std::size_t j = 0; j < idx.size(); ++j) {
        const double raw = std::arg(measured.values[idx[j]]);
        if (j > 0) {
            double prev = phase[j - 1];
            double cur = raw + offset;
            while (cur - prev > std::numbers::pi) {
                offset -= 2.0 * std::numbers::pi;
                cur -= 2.0 * std::numbers::pi;
            }
            while (cur - prev < -std::numbers::pi) {
                offset += 2.0 * std::numbers::pi;
                cur += 2.0 * std::numbers::pi;
            }
        }
        phase[j] = std::arg(measured.values[idx[j]]) + offset;
    }

    // Centered least-squares line phi(f) ~ slope * f + intercept.
    double fm = 0.0, pm = 0.0;
    for (std::size_t j = 0; j < idx.size(); ++j) {
        fm += measured.frequency(idx[j]);
        pm += phase[j];
    }
    fm /= static_cast<double>(idx.size());
    pm /= static_cast<double>(idx.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t j = 0; j < idx.size(); ++j) {
        const double df = measured.frequency(idx[j]) - fm;
        sxy += df * (phase[j] - pm);
        sxx += df * df;
    }
    if (!(sxx > 0.0))
        throw band_too_narrow("calibration band has no frequency extent");
    const double slope = sxy / sxx;

    double delay = -slope / (2.0 * std::numbers::pi);
    if (mode == delay_estimate_mode::cir_peak) {
        // Impulse response over the calibration points only; the peak bin
        // gives a delay estimate quantized to 1/(n_band * step).
        std::vector<cdouble> band(idx.size());
        for (std::size_t j = 0; j < idx.size(); ++j)
            band[j] = measured.values[idx[j]];
        auto cir = detail::dft(band, +1);
        std::size_t peak = 0;
        double best = -1.0;
        for (std::size_t j = 0; j < cir.size(); ++j) {
            const double m = std::abs(cir[j]);
            if (m > best) {
                best = m;
                peak = j;
            }
        }
        delay = static_cast<double>(peak) /
                (static_cast<double>(idx.size()) * measured.frequency_step);
    }

    // Residual phase at the band mean once the delay ramp is removed.
    const double intercept = pm + 2.0 * std::numbers::pi * fm * delay;
    equalizer_coeffs eq;
    eq.gain = std::polar(1.0 / mean_mag, -intercept);
    eq.delay = delay;
    return eq;
}

// Apply the correction to a sampled response:
// H_eq(f) = gain * exp(+j 2 pi f delay) * H(f).
inline frequency_response apply_equalizer(const equalizer_coeffs &eq,
                                          const frequency_response &in) {
    frequency_response out = in;
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] *= eq.gain * std::polar(1.0, 2.0 * std::numbers::pi * out.frequency(i) * eq.delay);
    return out;
}

// Apply the correction to a baseband block.  Bin k of the padded transform
// sits at absolute frequency f_k = center + k' fs / N, so the ramp uses the
// same absolute-frequency convention as the grid overload.
inline complex_signal apply_equalizer(const equalizer_coeffs &eq, const complex_signal &in) {
    if (!(in.sample_rate > 0.0))
        throw non_positive_input("sample rate must be positive");
    if (in.samples.empty())
        throw empty_sequence("cannot equalize an empty signal");

    const std::size_t n = in.samples.size();
    const std::size_t head =
        static_cast<std::size_t>(std::ceil(std::abs(eq.delay) * in.sample_rate - 1e-9));
    const std::size_t padded = detail::next_pow2(n + head);

    std::vector<cdouble> work(in.samples);
    work.resize(padded, cdouble{0.0, 0.0});
    detail::fft_pow2(work, -1);
    const cdouble g = eq.gain * std::polar(1.0, 2.0 * std::numbers::pi * in.center_frequency * eq.delay);
    for (std::size_t k = 0; k < padded; ++k) {
        const double bin = (k <= padded / 2) ? static_cast<double>(k)
                                             : static_cast<double>(k) - static_cast<double>(padded);
        const double f = bin * in.sample_rate / static_cast<double>(padded);
        work[k] *= g * std::polar(1.0, 2.0 * std::numbers::pi * f * eq.delay);
    }
    detail::fft_pow2(work, +1);

    complex_signal out = in;
    out.samples.assign(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(n));
    for (auto &s : out.samples)
        s /= static_cast<double>(padded);
    return out;
}

// Peak-to-strongest-sidelobe ratio of an impulse response, in dB.  Bins
// within guard_bins of the peak are excluded from the sidelobe search; the
// result is capped so an ideal response stays finite.
inline double dynamic_range_metric(const impulse_response &cir, std::size_t guard_bins = 3,
                                   double cap_db = 200.0) {
    if (cir.values.size() < 2)
        throw degenerate_cir("impulse response needs at least two bins");

    std::size_t peak = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < cir.values.size(); ++i) {
        const double m = std::abs(cir.values[i]);
        if (m > best) {
            best = m;
            peak = i;
        }
    }
    if (!(best > 0.0))
        throw degenerate_cir("impulse response is identically zero");

    double side = 0.0;
    bool found = false;
    for (std::size_t i = 0; i < cir.values.size(); ++i) {
        const std::size_t dist = (i > peak) ? i - peak : peak - i;
        if (dist <= guard_bins)
            continue;
        side = std::max(side, std::abs(cir.values[i]));
        found = true;
    }
    if (!found)
        throw degenerate_cir("guard window swallows every off-peak bin");
    if (!(side > 0.0))
        return cap_db;
    return std::min(cap_db, db_from_amplitude(best / side));
}

} // namespace chanem
