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
#include <optional>
#include <utility>
#include <vector>

#include "chanem/equalizer.hpp"
#include "chanem/tdl.hpp"
#include "chanem/types.hpp"

namespace chanem {

// Tiling of a wide target band into narrower instantaneous-bandwidth
// captures.
struct sub_band_plan {
    double total_center = 0.0;    // Hz
    double total_bandwidth = 0.0; // Hz
    std::vector<sub_band> subbands;
};

// Tile [center - total/2, center + total/2] with bands whose usable
// portions abut exactly: adjacent centers are spaced by the usable width.
// The last band may overhang the target edge; its usable region still
// starts where the previous one ends.
inline sub_band_plan plan_subbands(double total_center, double total_bandwidth,
                                   double subband_bandwidth, double usable_fraction) {
    if (!(total_bandwidth > 0.0) || !(subband_bandwidth > 0.0))
        throw non_positive_input("bandwidths must be positive");
    if (!(usable_fraction > 0.0) || usable_fraction > 1.0)
        throw non_positive_input("usable fraction must lie in (0, 1]");

    const double u = subband_bandwidth * usable_fraction;
    std::size_t count = static_cast<std::size_t>(std::ceil(total_bandwidth / u - 1e-9));
    if (count == 0)
        count = 1;

    sub_band_plan plan;
    plan.total_center = total_center;
    plan.total_bandwidth = total_bandwidth;
    const double low = total_center - total_bandwidth / 2.0;
    for (std::size_t i = 0; i < count; ++i) {
        sub_band b;
        b.center_frequency = low + (static_cast<double>(i) + 0.5) * u;
        b.bandwidth = subband_bandwidth;
        b.usable_fraction = usable_fraction;
        plan.subbands.push_back(b);
    }
    return plan;
}

// Re-reference a snapshot from one band center to another.  A tap of delay
// d picks up the phase a band shift of df imposes on it:
// a_k' = a_k exp(-j 2 pi df d_k).  Delays are unchanged, so the projected
// snapshot reproduces the original transfer function on the new band.
inline channel_snapshot project_channel(const channel_snapshot &snap,
                                        double from_center, double to_center) {
    const double df = to_center - from_center;
    channel_snapshot out = snap;
    for (auto &t : out.taps) {
        if (!std::isfinite(t.delay))
            throw delay_out_of_range("tap delay must be finite");
        t.amplitude *= std::polar(1.0, -2.0 * std::numbers::pi * df * t.delay);
    }
    return out;
}

// Render the usable slice of one band from a snapshot whose amplitudes are
// referenced to reference_center.  The returned grid covers exactly the
// usable interval [center - u/2, center + u/2) in absolute frequency, so
// slices from one plan land on a common lattice.
inline std::pair<sub_band, frequency_response>
render_subband_piece(const channel_snapshot &snap, const sub_band &band,
                     double reference_center, double step) {
    if (!(step > 0.0))
        throw invalid_grid("grid step must be positive");
    auto projected = project_channel(snap, reference_center, band.center_frequency);

    const double u = band.usable_width();
    const std::size_t count = static_cast<std::size_t>(std::llround(u / step));
    if (count < 2)
        throw band_too_narrow("usable width spans fewer than two grid points");

    // The projected snapshot models the band-local baseband; evaluate it on
    // offsets from the band center, then label points with absolute
    // frequency.
    frequency_grid local{-u / 2.0, step, count};
    auto resp = channel_frequency_response(projected, local);
    resp.start_frequency = band.center_frequency - u / 2.0;
    return {band, resp};
}

namespace detail {

inline bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

} // namespace detail

// Fuse per-band slices into one wide response.  Slices must sit on one
// lattice (each step an integer multiple of the finest), their usable
// intervals must cover the union without holes, and where two slices both
// claim a frequency their values must agree within overlap_tolerance
// (relative).  Each point is owned by the band whose usable interval
// contains it, ties resolved toward the lower band (half-open ownership).
// Optional per-band equalizers are applied to each slice before fusing.
inline frequency_response
stitch(const std::vector<std::pair<sub_band, frequency_response>> &pieces,
       const std::vector<equalizer_coeffs> *per_band_eq = nullptr,
       double overlap_tolerance = 1e-6) {
    if (pieces.empty())
        throw empty_sequence("no sub-band pieces to stitch");
    if (per_band_eq && per_band_eq->size() != pieces.size())
        throw invariant_violation("equalizer list does not match piece count");

    for (std::size_t i = 1; i < pieces.size(); ++i)
        if (!(pieces[i].first.center_frequency > pieces[i - 1].first.center_frequency))
            throw invariant_violation("pieces must be ordered by center frequency");

    double step = pieces.front().second.frequency_step;
    for (const auto &p : pieces) {
        p.second.grid().validate();
        step = std::min(step, p.second.frequency_step);
    }
    const double align_tol = step * 1e-9;
    for (const auto &p : pieces) {
        const double ratio = p.second.frequency_step / step;
        if (!detail::close(ratio, std::round(ratio), 1e-9) || std::round(ratio) < 1.0)
            throw grid_mismatch("piece grid steps are not integer multiples of the finest step");
    }

    // Common lattice anchored on the first piece.
    const double anchor = pieces.front().second.start_frequency;
    for (const auto &p : pieces) {
        const double off = (p.second.start_frequency - anchor) / step;
        if (!detail::close(off, std::round(off), 1e-6))
            throw grid_mismatch("piece grids do not share a common lattice");
    }

    auto equalized = [&](std::size_t pi) {
        if (!per_band_eq)
            return pieces[pi].second;
        return apply_equalizer((*per_band_eq)[pi], pieces[pi].second);
    };
    std::vector<frequency_response> resp;
    resp.reserve(pieces.size());
    for (std::size_t i = 0; i < pieces.size(); ++i)
        resp.push_back(equalized(i));

    double lo = pieces.front().second.start_frequency;
    double hi = lo;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        const auto &r = pieces[i].second;
        const double plo = r.start_frequency;
        const double phi = r.frequency(r.values.size() - 1);
        if (i > 0 && plo > hi + step + align_tol)
            throw gapped_input("pieces leave an uncovered gap in the stitched band");
        lo = std::min(lo, plo);
        hi = std::max(hi, phi);
    }

    const auto total = static_cast<std::size_t>(std::llround((hi - lo) / step)) + 1;
    frequency_response out;
    out.start_frequency = lo;
    out.frequency_step = step;
    out.values.assign(total, cdouble{0.0, 0.0});
    out.valid.assign(total, false);

    // Ownership intervals: half-open [usable_low, usable_high) except the
    // last band, which keeps its upper edge.
    for (std::size_t k = 0; k < total; ++k) {
        const double f = lo + static_cast<double>(k) * step;
        std::optional<cdouble> owner;
        std::vector<cdouble> candidates;
        for (std::size_t pi = 0; pi < pieces.size(); ++pi) {
            const auto &r = resp[pi];
            const double off = (f - r.start_frequency) / r.frequency_step;
            const double ri = std::round(off);
            if (!detail::close(off, ri, 1e-6) || ri < -0.5)
                continue;
            const auto ii = static_cast<std::size_t>(ri);
            if (ii >= r.values.size() || !r.is_valid(ii))
                continue;

            const auto &b = pieces[pi].first;
            const bool last = (pi + 1 == pieces.size());
            const bool owns = f >= b.usable_low() - align_tol &&
                              (last ? f <= b.usable_high() + align_tol
                                    : f < b.usable_high() - align_tol);
            if (owns && !owner)
                owner = r.values[ii];
            candidates.push_back(r.values[ii]);
        }
        if (candidates.empty())
            continue;
        const cdouble chosen = owner ? *owner : candidates.front();
        for (const auto &v : candidates) {
            const double scale = std::max(std::abs(chosen), 1e-300);
            if (std::abs(chosen - v) > overlap_tolerance * scale)
                throw overlap_conflict("overlapping pieces disagree at " +
                                       std::to_string(f) + " Hz");
        }
        out.values[k] = chosen;
        out.valid[k] = true;
    }
    return out;
}

} // namespace chanem
