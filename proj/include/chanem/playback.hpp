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
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "chanem/types.hpp"

namespace chanem {

// One synthetic point scatterer: excess delay over the direct path, gain
// re free space at the scatterer's range, and a fixed Doppler shift.
struct scatterer_spec {
    double delay_offset = 0.0;     // s
    double relative_power_db = 0.0;
    double doppler = 0.0;          // Hz
};

// Street-crossing drive-by geometry: a vehicle approaches a receiver
// mounted above the crossing.  Defaults model a 60 GHz V2I pass at 14 m/s
// under a receiver elevated 5 m, sampled as 301 snapshots over 53.5 ms.
struct scenario_config {
    double speed = 14.0;             // m/s toward the crossing
    double carrier = 60e9;           // Hz
    double receiver_height = 5.0;    // m
    double tx_height = 1.5;          // m, roof-top antenna
    double initial_distance = 8.0;   // m, horizontal range at the first snapshot
    std::size_t num_snapshots = 301;
    double duration = 53.5e-3;       // s
    std::vector<scatterer_spec> scatterers = {
        {2e-9, -8.0, 1800.0},
        {25e-9, -10.0, -600.0},
    };
    double noise_floor_db = -std::numeric_limits<double>::infinity();
    double start_time = 0.0;         // s, timestamp of the first snapshot
};

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_double(const std::string &tok, std::size_t line) {
    const char *b = tok.data();
    const char *e = b + tok.size();
    double v = 0.0;
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc{} || p != e)
        throw parse_error("malformed number '" + tok + "'", line);
    return v;
}

inline std::vector<std::string> split(const std::string &s, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = s.find(sep, pos);
        if (next == std::string::npos) {
            out.push_back(s.substr(pos));
            break;
        }
        out.push_back(s.substr(pos, next - pos));
        pos = next + 1;
    }
    return out;
}

inline void put_u32(std::ostream &os, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i)
        b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 4);
}

inline void put_f64(std::ostream &os, double d) {
    const auto v = std::bit_cast<std::uint64_t>(d);
    char b[8];
    for (int i = 0; i < 8; ++i)
        b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 8);
}

inline std::uint32_t get_u32(std::istream &is) {
    char b[4];
    if (!is.read(b, 4))
        throw parse_error("truncated binary trace");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
}

inline double get_f64(std::istream &is) {
    char b[8];
    if (!is.read(b, 8))
        throw parse_error("truncated binary trace");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return std::bit_cast<double>(v);
}

inline void check_raw_snapshot(double prev_ts, double ts, std::size_t ntaps,
                               std::size_t max_taps, bool first) {
    if (!first && !(ts > prev_ts))
        throw invariant_violation("trace timestamps must be strictly increasing");
    if (ntaps > max_taps)
        throw invariant_violation("trace record carries " + std::to_string(ntaps) +
                                  " taps, budget is " + std::to_string(max_taps));
}

} // namespace detail

enum class trace_format {
    text,
    binary,
};

inline constexpr const char *trace_text_magic = "CHEM";
inline constexpr const char *trace_binary_magic = "CHEM1";

// Write a snapshot trace.  Text records are one snapshot per line
// (timestamp then delay/re/im triples, full double precision); the binary
// variant packs the same fields as little-endian doubles and carries no
// metadata.
inline void save_trace(const snapshot_sequence &seq, const std::string &path,
                       trace_format format = trace_format::text) {
    if (format == trace_format::binary) {
        std::ofstream os(path, std::ios::binary);
        if (!os)
            throw io_error("cannot open '" + path + "' for writing");
        os.write(trace_binary_magic, 5);
        detail::put_u32(os, static_cast<std::uint32_t>(seq.snapshots.size()));
        for (const auto &s : seq.snapshots) {
            detail::put_f64(os, s.timestamp);
            detail::put_u32(os, static_cast<std::uint32_t>(s.taps.size()));
            for (const auto &t : s.taps) {
                detail::put_f64(os, t.delay);
                detail::put_f64(os, t.amplitude.real());
                detail::put_f64(os, t.amplitude.imag());
            }
        }
        if (!os)
            throw io_error("write failed for '" + path + "'");
        return;
    }

    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw io_error("cannot open '" + path + "' for writing");
    os << trace_text_magic << ",version=1";
    for (const auto &[k, v] : seq.metadata) {
        if (k.empty() || k.find_first_of(",=\n") != std::string::npos ||
            v.find_first_of(",\n") != std::string::npos)
            throw io_error("metadata key/value contains a reserved character");
        os << ',' << k << '=' << v;
    }
    os << '\n';
    for (const auto &s : seq.snapshots) {
        os << detail::fmt_double(s.timestamp);
        for (const auto &t : s.taps)
            os << ',' << detail::fmt_double(t.delay) << ',' << detail::fmt_double(t.amplitude.real())
               << ',' << detail::fmt_double(t.amplitude.imag());
        os << '\n';
    }
    if (!os)
        throw io_error("write failed for '" + path + "'");
}

// Read a trace written by save_trace, auto-detecting text vs binary.  Raw
// records are validated (monotonic timestamps, tap budget) before each
// snapshot is normalized.
inline snapshot_sequence load_trace(const std::string &path,
                                    std::size_t max_active_taps = default_max_active_taps) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw io_error("cannot open '" + path + "' for reading");

    char magic[5] = {};
    is.read(magic, 5);
    if (is.gcount() < 5)
        throw parse_error("file too short for a trace header");

    snapshot_sequence seq;
    if (std::string(magic, 5) == trace_binary_magic) {
        const std::uint32_t count = detail::get_u32(is);
        double prev_ts = 0.0;
        for (std::uint32_t i = 0; i < count; ++i) {
            channel_snapshot snap;
            snap.timestamp = detail::get_f64(is);
            const std::uint32_t ntaps = detail::get_u32(is);
            detail::check_raw_snapshot(prev_ts, snap.timestamp, ntaps, max_active_taps, i == 0);
            prev_ts = snap.timestamp;
            for (std::uint32_t k = 0; k < ntaps; ++k) {
                tap t;
                t.delay = detail::get_f64(is);
                const double re = detail::get_f64(is);
                const double im = detail::get_f64(is);
                t.amplitude = {re, im};
                snap.taps.push_back(t);
            }
            seq.snapshots.push_back(normalize_snapshot(std::move(snap), max_active_taps));
        }
        return seq;
    }

    is.seekg(0);
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(is, line))
        throw parse_error("missing trace header", 1);
    ++lineno;
    if (!line.empty() && line.back() == '\r')
        line.pop_back();

    auto fields = detail::split(line, ',');
    if (fields.empty() || fields[0] != trace_text_magic)
        throw parse_error("bad trace magic", lineno);
    bool version_seen = false;
    for (std::size_t i = 1; i < fields.size(); ++i) {
        const auto eq = fields[i].find('=');
        if (eq == std::string::npos)
            throw parse_error("header field '" + fields[i] + "' is not key=value", lineno);
        const std::string key = fields[i].substr(0, eq);
        const std::string val = fields[i].substr(eq + 1);
        if (key == "version") {
            if (val != "1")
                throw parse_error("unsupported trace version '" + val + "'", lineno);
            version_seen = true;
        } else {
            seq.metadata[key] = val;
        }
    }
    if (!version_seen)
        throw parse_error("trace header lacks a version field", lineno);

    double prev_ts = 0.0;
    bool first = true;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        auto toks = detail::split(line, ',');
        if (toks.size() % 3 != 1)
            throw parse_error("record field count " + std::to_string(toks.size()) +
                                  " is not 1 + 3*taps",
                              lineno);
        channel_snapshot snap;
        snap.timestamp = detail::parse_double(toks[0], lineno);
        const std::size_t ntaps = (toks.size() - 1) / 3;
        detail::check_raw_snapshot(prev_ts, snap.timestamp, ntaps, max_active_taps, first);
        prev_ts = snap.timestamp;
        first = false;
        for (std::size_t k = 0; k < ntaps; ++k) {
            tap t;
            t.delay = detail::parse_double(toks[1 + 3 * k], lineno);
            const double re = detail::parse_double(toks[2 + 3 * k], lineno);
            const double im = detail::parse_double(toks[3 + 3 * k], lineno);
            t.amplitude = {re, im};
            snap.taps.push_back(t);
        }
        seq.snapshots.push_back(normalize_snapshot(std::move(snap), max_active_taps));
    }
    return seq;
}

// Reduce a dense impulse response to its k strongest delay bins.  Ties
// resolve toward smaller delay; zero bins are never selected, so the
// result can hold fewer than k taps.
inline channel_snapshot sparsify(const impulse_response &cir, std::size_t k,
                                 double timestamp = 0.0) {
    if (k == 0)
        throw non_positive_input("sparsify needs k >= 1");
    if (cir.values.empty())
        throw empty_sequence("impulse response is empty");
    if (!(cir.delay_step > 0.0))
        throw non_positive_input("delay step must be positive");

    std::vector<std::size_t> order(cir.values.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double ma = std::abs(cir.values[a]);
        const double mb = std::abs(cir.values[b]);
        if (ma != mb)
            return ma > mb;
        return a < b;
    });

    std::vector<std::size_t> chosen;
    for (std::size_t i = 0; i < order.size() && chosen.size() < k; ++i) {
        if (std::abs(cir.values[order[i]]) > 0.0)
            chosen.push_back(order[i]);
    }
    std::sort(chosen.begin(), chosen.end());

    channel_snapshot snap;
    snap.timestamp = timestamp;
    for (auto i : chosen)
        snap.taps.push_back({cir.delay_offset + static_cast<double>(i) * cir.delay_step,
                             cir.values[i]});
    return normalize_snapshot(std::move(snap), k);
}

// Synthesize a drive-by trace: line-of-sight path, single ground bounce
// via image geometry with reflection coefficient -1, plus the configured
// point scatterers.  Path amplitudes carry free-space 1/range scaling; the
// LOS and ground phases follow the carrier delay exactly, so their Doppler
// trajectories emerge from the geometry.  Scatterer phases rotate at the
// configured Doppler from a seeded random initial phase.
inline snapshot_sequence synth_v2i_trace(const scenario_config &cfg,
                                         std::size_t max_active_taps = default_max_active_taps,
                                         std::uint64_t seed = 0) {
    if (cfg.speed < 0.0)
        throw non_positive_input("speed must be non-negative");
    if (!(cfg.carrier > 0.0))
        throw non_positive_input("carrier must be positive");
    if (cfg.num_snapshots < 2)
        throw non_positive_input("scenario needs at least two snapshots");
    if (!(cfg.duration > 0.0))
        throw non_positive_input("duration must be positive");
    if (!(cfg.receiver_height > 0.0) || !(cfg.tx_height > 0.0))
        throw non_positive_input("antenna heights must be positive");
    if (cfg.scatterers.size() + 2 > max_active_taps)
        throw too_many_taps("scenario needs " + std::to_string(cfg.scatterers.size() + 2) +
                            " taps, budget is " + std::to_string(max_active_taps));
    for (const auto &s : cfg.scatterers)
        if (s.delay_offset <= 0.0)
            throw delay_out_of_range("scatterer delay offset must be positive");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 2.0 * std::numbers::pi);
    std::vector<double> phi(cfg.scatterers.size());
    for (auto &p : phi)
        p = uni(rng);

    const double dt = cfg.duration / static_cast<double>(cfg.num_snapshots - 1);
    const double dh = cfg.receiver_height - cfg.tx_height;
    const double sh = cfg.receiver_height + cfg.tx_height;

    snapshot_sequence seq;
    seq.metadata["scenario"] = "v2i-crossing";
    seq.metadata["speed_mps"] = detail::fmt_double(cfg.speed);
    seq.metadata["carrier_hz"] = detail::fmt_double(cfg.carrier);
    seq.metadata["receiver_height_m"] = detail::fmt_double(cfg.receiver_height);
    seq.metadata["tx_height_m"] = detail::fmt_double(cfg.tx_height);
    seq.metadata["initial_distance_m"] = detail::fmt_double(cfg.initial_distance);
    seq.metadata["duration_s"] = detail::fmt_double(cfg.duration);

    for (std::size_t i = 0; i < cfg.num_snapshots; ++i) {
        const double elapsed = static_cast<double>(i) * dt;
        const double x = cfg.initial_distance - cfg.speed * elapsed;

        channel_snapshot snap;
        snap.timestamp = cfg.start_time + elapsed;

        const double r_los = std::hypot(x, dh);
        const double tau_los = r_los / speed_of_light;
        snap.taps.push_back(
            {tau_los, std::polar(1.0 / r_los, -2.0 * std::numbers::pi * cfg.carrier * tau_los)});

        const double r_gnd = std::hypot(x, sh);
        const double tau_gnd = r_gnd / speed_of_light;
        snap.taps.push_back(
            {tau_gnd, -std::polar(1.0 / r_gnd, -2.0 * std::numbers::pi * cfg.carrier * tau_gnd)});

        for (std::size_t s = 0; s < cfg.scatterers.size(); ++s) {
            const auto &sc = cfg.scatterers[s];
            const double range = r_los + speed_of_light * sc.delay_offset;
            const double mag = amplitude_from_db(sc.relative_power_db) / range;
            const double phase = phi[s] + 2.0 * std::numbers::pi * sc.doppler * elapsed;
            snap.taps.push_back({tau_los + sc.delay_offset, std::polar(mag, phase)});
        }

        if (std::isfinite(cfg.noise_floor_db)) {
            double peak = 0.0;
            for (const auto &t : snap.taps)
                peak = std::max(peak, std::abs(t.amplitude));
            const double floor = peak * amplitude_from_db(cfg.noise_floor_db);
            snap.taps.erase(std::remove_if(snap.taps.begin(), snap.taps.end(),
                                           [&](const tap &t) {
                                               return std::abs(t.amplitude) < floor;
                                           }),
                            snap.taps.end());
        }

        seq.snapshots.push_back(normalize_snapshot(std::move(snap), max_active_taps));
    }
    return seq;
}

} // namespace chanem
