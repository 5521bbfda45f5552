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
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "chanem/types.hpp"

namespace chanem {

namespace detail {

// Modified Bessel function of the first kind, order zero (power series).
inline double bessel_i0(double x) {
    double sum = 1.0, term = 1.0;
    const double q = x * x / 4.0;
    for (int k = 1; k < 64; ++k) {
        term *= q / static_cast<double>(k * k);
        sum += term;
        if (term < sum * 1e-17)
            break;
    }
    return sum;
}

inline double sinc(double x) {
    if (std::abs(x) < 1e-12)
        return 1.0;
    const double px = std::numbers::pi * x;
    return std::sin(px) / px;
}

// Kaiser-windowed sinc interpolation kernel centered on fractional sample
// position u, covering integer offsets [lo, lo+order].  Coefficients are
// normalized to unit DC gain.
inline std::vector<double> fractional_kernel(double frac, int order, double beta,
                                             int &lo) {
    const int half = order / 2;
    lo = -half + 1;
    std::vector<double> c(static_cast<std::size_t>(order));
    const double denom = bessel_i0(beta);
    const double span = static_cast<double>(half);
    double sum = 0.0;
    for (int j = 0; j < order; ++j) {
        const double d = frac - static_cast<double>(lo + j);
        const double r = d / span;
        double w = 0.0;
        if (std::abs(r) <= 1.0)
            w = bessel_i0(beta * std::sqrt(1.0 - r * r)) / denom;
        c[static_cast<std::size_t>(j)] = sinc(d) * w;
        sum += c[static_cast<std::size_t>(j)];
    }
    for (auto &v : c)
        v /= sum;
    return c;
}

} // namespace detail

// How the line reacts when the active snapshot changes mid-block.
enum class update_policy {
    hard_switch,      // new taps take effect instantly at the boundary
    linear_crossfade, // old and new outputs are blended across the interval
};

// How non-integer tap delays are realized on the sample grid.
enum class fractional_delay_mode {
    nearest_sample, // round to the closest tap cell
    windowed_sinc,  // Kaiser-windowed sinc interpolation
};

struct tdl_config {
    std::size_t max_active_taps = default_max_active_taps;
    double delay_quantum = 0.0;          // s, 0 disables snapping
    update_policy update = update_policy::hard_switch;
    fractional_delay_mode fractional = fractional_delay_mode::nearest_sample;
    int sinc_order = 64;                 // taps in the interpolation kernel
    double sinc_beta = 8.0;              // Kaiser shape parameter
    double crossfade_window = 0.0;       // s, <= 0 blends across the whole interval
    double max_delay_span = std::numeric_limits<double>::infinity(); // s
};

namespace detail {

inline void check_taps(const std::vector<tap> &taps, const tdl_config &cfg,
                       double sample_rate) {
    for (const auto &t : taps) {
        if (!std::isfinite(t.delay) || t.delay < 0.0)
            throw delay_out_of_range("tap delay must be non-negative and finite");
        if (t.delay > cfg.max_delay_span)
            throw delay_out_of_range("tap delay exceeds configured span");
    }
    (void)sample_rate;
}

// Static convolution of one snapshot with a sample block.  Output index n
// holds sum_k a_k x[n - d_k].  Taps are visited in delay order so the
// accumulation order, and therefore the output bytes, are deterministic.
inline std::vector<cdouble> convolve_taps(const std::vector<cdouble> &x,
                                          double sample_rate,
                                          const std::vector<tap> &taps,
                                          const tdl_config &cfg) {
    double max_delay = 0.0;
    for (const auto &t : taps)
        max_delay = std::max(max_delay, t.delay);

    const std::size_t tail =
        static_cast<std::size_t>(std::ceil(max_delay * sample_rate - 1e-9));
    const std::size_t extra =
        (cfg.fractional == fractional_delay_mode::windowed_sinc)
            ? static_cast<std::size_t>(cfg.sinc_order / 2)
            : 0;
    std::vector<cdouble> y(x.size() + tail + extra, cdouble{0.0, 0.0});

    for (const auto &t : taps) {
        const double pos = t.delay * sample_rate;
        if (cfg.fractional == fractional_delay_mode::nearest_sample) {
            const auto d = static_cast<std::int64_t>(std::llround(pos));
            for (std::size_t n = 0; n < x.size(); ++n)
                y[n + static_cast<std::size_t>(d)] += t.amplitude * x[n];
        } else {
            const auto base = static_cast<std::int64_t>(std::floor(pos));
            const double frac = pos - static_cast<double>(base);
            if (std::abs(frac) < 1e-12) {
                for (std::size_t n = 0; n < x.size(); ++n)
                    y[n + static_cast<std::size_t>(base)] += t.amplitude * x[n];
                continue;
            }
            int lo = 0;
            const auto kern = fractional_kernel(frac, cfg.sinc_order, cfg.sinc_beta, lo);
            for (int j = 0; j < cfg.sinc_order; ++j) {
                const std::int64_t d = base + static_cast<std::int64_t>(lo + j);
                const cdouble g = t.amplitude * kern[static_cast<std::size_t>(j)];
                for (std::size_t n = 0; n < x.size(); ++n) {
                    const std::int64_t m = static_cast<std::int64_t>(n) + d;
                    if (m >= 0 && m < static_cast<std::int64_t>(y.size()))
                        y[static_cast<std::size_t>(m)] += g * x[n];
                }
            }
        }
    }
    return y;
}

} // namespace detail

// Convolve a sample block with a single static snapshot.  The output is
// long enough to hold the full tail of the largest delay.
inline complex_signal convolve_snapshot(const complex_signal &in,
                                        const channel_snapshot &snap,
                                        const tdl_config &cfg = {}) {
    if (!(in.sample_rate > 0.0))
        throw non_positive_input("sample rate must be positive");
    if (in.samples.empty())
        throw empty_sequence("cannot emulate an empty signal");

    auto norm = normalize_snapshot(snap, cfg.max_active_taps, cfg.delay_quantum);
    detail::check_taps(norm.taps, cfg, in.sample_rate);

    complex_signal out = in;
    out.samples = detail::convolve_taps(in.samples, in.sample_rate, norm.taps, cfg);
    return out;
}

// Time-variant emulation: each output sample sees the snapshot active at
// its own absolute time.  The snapshot active at time t is the one with the
// largest timestamp <= t; the last snapshot stays active past the end of
// the trace.  With linear_crossfade the outputs of the outgoing and
// incoming snapshots are blended linearly over the crossfade window
// following each switch instant (the full inter-snapshot interval when the
// window is unset).
inline complex_signal emulate_time_variant(const complex_signal &in,
                                           const snapshot_sequence &seq,
                                           const tdl_config &cfg = {}) {
    if (!(in.sample_rate > 0.0))
        throw non_positive_input("sample rate must be positive");
    if (in.samples.empty())
        throw empty_sequence("cannot emulate an empty signal");
    if (seq.snapshots.empty())
        throw empty_sequence("snapshot sequence is empty");
    for (std::size_t i = 1; i < seq.snapshots.size(); ++i)
        if (!(seq.snapshots[i].timestamp > seq.snapshots[i - 1].timestamp))
            throw invariant_violation("snapshot timestamps must be strictly increasing");
    if (in.start_time < seq.snapshots.front().timestamp - 1e-12)
        throw uncovered_signal_start("signal begins before the first snapshot");

    std::vector<channel_snapshot> norm;
    norm.reserve(seq.snapshots.size());
    for (const auto &s : seq.snapshots) {
        norm.push_back(normalize_snapshot(s, cfg.max_active_taps, cfg.delay_quantum));
        detail::check_taps(norm.back().taps, cfg, in.sample_rate);
    }

    // Per-snapshot static outputs are computed lazily; most traces activate
    // only a few snapshots within one block.
    std::vector<std::vector<cdouble>> cache(norm.size());
    auto rendered = [&](std::size_t i) -> const std::vector<cdouble> & {
        if (cache[i].empty() && !in.samples.empty())
            cache[i] = detail::convolve_taps(in.samples, in.sample_rate, norm[i].taps, cfg);
        return cache[i];
    };

    auto active_index = [&](double t) -> std::size_t {
        std::size_t idx = 0;
        for (std::size_t i = 0; i < norm.size(); ++i) {
            if (norm[i].timestamp <= t + 1e-12)
                idx = i;
            else
                break;
        }
        return idx;
    };

    double max_delay = 0.0;
    for (const auto &s : norm)
        for (const auto &t : s.taps)
            max_delay = std::max(max_delay, t.delay);
    const std::size_t tail =
        static_cast<std::size_t>(std::ceil(max_delay * in.sample_rate - 1e-9));
    const std::size_t extra =
        (cfg.fractional == fractional_delay_mode::windowed_sinc)
            ? static_cast<std::size_t>(cfg.sinc_order / 2)
            : 0;
    const std::size_t out_len = in.samples.size() + tail + extra;

    complex_signal out = in;
    out.samples.assign(out_len, cdouble{0.0, 0.0});

    for (std::size_t m = 0; m < out_len; ++m) {
        const double t = in.start_time + static_cast<double>(m) / in.sample_rate;
        const std::size_t idx = active_index(t);

        double w = 1.0;
        if (cfg.update == update_policy::linear_crossfade && idx > 0) {
            const double t_switch = norm[idx].timestamp;
            double window = cfg.crossfade_window;
            if (!(window > 0.0)) {
                window = (idx + 1 < norm.size())
                             ? norm[idx + 1].timestamp - t_switch
                             : t_switch - norm[idx - 1].timestamp;
            }
            const double u = (t - t_switch) / window;
            w = std::clamp(u, 0.0, 1.0);
        }

        cdouble v{0.0, 0.0};
        if (w >= 1.0) {
            const auto &cur = rendered(idx);
            if (m < cur.size())
                v = cur[m];
        } else {
            const auto &cur = rendered(idx);
            const auto &prev = rendered(idx - 1);
            const cdouble a = (m < prev.size()) ? prev[m] : cdouble{0.0, 0.0};
            const cdouble b = (m < cur.size()) ? cur[m] : cdouble{0.0, 0.0};
            v = (1.0 - w) * a + w * b;
        }
        out.samples[m] = v;
    }
    return out;
}

// Closed-form transfer function of one snapshot:
// H(f) = sum_k a_k exp(-j 2 pi f d_k).
inline frequency_response channel_frequency_response(const channel_snapshot &snap,
                                                     const frequency_grid &grid) {
    grid.validate();
    for (const auto &t : snap.taps)
        if (!std::isfinite(t.delay) || t.delay < 0.0)
            throw delay_out_of_range("tap delay must be non-negative and finite");

    frequency_response out;
    out.start_frequency = grid.start;
    out.frequency_step = grid.step;
    out.values.resize(grid.count);
    for (std::size_t i = 0; i < grid.count; ++i) {
        const double f = grid.frequency(i);
        cdouble acc{0.0, 0.0};
        for (const auto &t : snap.taps)
            acc += t.amplitude * std::polar(1.0, -2.0 * std::numbers::pi * f * t.delay);
        out.values[i] = acc;
    }
    return out;
}

} // namespace chanem
