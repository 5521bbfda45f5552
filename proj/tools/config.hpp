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

#include <fstream>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "chanem/chanem.hpp"

namespace chanem_cli {

using json = nlohmann::json;

// Configuration problems exit with a distinct status from data problems.
class config_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline json load_json(const std::string &path) {
    std::ifstream is(path);
    if (!is)
        throw config_error("cannot open config file '" + path + "'");
    try {
        return json::parse(is);
    } catch (const json::parse_error &e) {
        throw config_error("config '" + path + "': " + e.what());
    }
}

// Unknown keys are rejected so typos fail loudly instead of silently
// keeping a default.
inline void check_keys(const json &j, const std::string &section,
                       std::initializer_list<const char *> allowed) {
    if (!j.is_object())
        throw config_error("section '" + section + "' must be an object");
    for (const auto &item : j.items()) {
        bool ok = false;
        for (const char *k : allowed)
            if (item.key() == k)
                ok = true;
        if (!ok)
            throw config_error("unknown key '" + item.key() + "' in section '" + section + "'");
    }
}

inline double get_num(const json &j, const std::string &section, const char *key,
                      std::optional<double> def = std::nullopt) {
    if (!j.contains(key)) {
        if (def)
            return *def;
        throw config_error("section '" + section + "' is missing required key '" + key + "'");
    }
    if (!j[key].is_number())
        throw config_error("key '" + std::string(key) + "' in section '" + section +
                           "' must be a number");
    return j[key].get<double>();
}

inline std::size_t get_count(const json &j, const std::string &section, const char *key,
                             std::optional<std::size_t> def = std::nullopt) {
    if (!j.contains(key)) {
        if (def)
            return *def;
        throw config_error("section '" + section + "' is missing required key '" + key + "'");
    }
    if (!j[key].is_number_unsigned())
        throw config_error("key '" + std::string(key) + "' in section '" + section +
                           "' must be a non-negative integer");
    return j[key].get<std::size_t>();
}

inline std::string get_str(const json &j, const std::string &section, const char *key,
                           std::optional<std::string> def = std::nullopt) {
    if (!j.contains(key)) {
        if (def)
            return *def;
        throw config_error("section '" + section + "' is missing required key '" + key + "'");
    }
    if (!j[key].is_string())
        throw config_error("key '" + std::string(key) + "' in section '" + section +
                           "' must be a string");
    return j[key].get<std::string>();
}

inline chanem::chain_config parse_chain(const json &j) {
    check_keys(j, "chain",
               {"passband_center_hz", "passband_width_hz", "rolloff_exponent",
                "ripple_amplitude_db", "ripple_period_hz", "group_delay_s",
                "gain_step_frequency_hz", "gain_step_db", "base_gain_db"});
    chanem::chain_config c;
    c.passband_center = get_num(j, "chain", "passband_center_hz", c.passband_center);
    c.passband_width = get_num(j, "chain", "passband_width_hz", c.passband_width);
    c.rolloff_exponent = get_num(j, "chain", "rolloff_exponent", c.rolloff_exponent);
    c.ripple_amplitude_db = get_num(j, "chain", "ripple_amplitude_db", c.ripple_amplitude_db);
    c.ripple_period = get_num(j, "chain", "ripple_period_hz", c.ripple_period);
    c.group_delay = get_num(j, "chain", "group_delay_s", c.group_delay);
    c.gain_step_frequency = get_num(j, "chain", "gain_step_frequency_hz", c.gain_step_frequency);
    c.gain_step_db = get_num(j, "chain", "gain_step_db", c.gain_step_db);
    c.base_gain_db = get_num(j, "chain", "base_gain_db", c.base_gain_db);
    return c;
}

inline chanem::frequency_grid parse_grid(const json &j) {
    check_keys(j, "grid", {"start_hz", "step_hz", "count"});
    chanem::frequency_grid g;
    g.start = get_num(j, "grid", "start_hz");
    g.step = get_num(j, "grid", "step_hz");
    g.count = get_count(j, "grid", "count");
    try {
        g.validate();
    } catch (const chanem::error &e) {
        throw config_error(std::string("grid: ") + e.what());
    }
    return g;
}

inline chanem::tdl_config parse_tdl(const json &j) {
    check_keys(j, "tdl",
               {"max_active_taps", "delay_quantum_s", "update_policy", "fractional_delay",
                "sinc_order", "sinc_beta", "crossfade_window_s", "max_delay_span_s"});
    chanem::tdl_config c;
    c.max_active_taps = get_count(j, "tdl", "max_active_taps", c.max_active_taps);
    c.delay_quantum = get_num(j, "tdl", "delay_quantum_s", c.delay_quantum);
    const auto update = get_str(j, "tdl", "update_policy", std::string("hard-switch"));
    if (update == "hard-switch")
        c.update = chanem::update_policy::hard_switch;
    else if (update == "linear-crossfade")
        c.update = chanem::update_policy::linear_crossfade;
    else
        throw config_error("unknown update_policy '" + update + "'");
    const auto frac = get_str(j, "tdl", "fractional_delay", std::string("nearest-sample"));
    if (frac == "nearest-sample")
        c.fractional = chanem::fractional_delay_mode::nearest_sample;
    else if (frac == "windowed-sinc")
        c.fractional = chanem::fractional_delay_mode::windowed_sinc;
    else
        throw config_error("unknown fractional_delay '" + frac + "'");
    c.sinc_order = static_cast<int>(get_count(j, "tdl", "sinc_order",
                                              static_cast<std::size_t>(c.sinc_order)));
    c.sinc_beta = get_num(j, "tdl", "sinc_beta", c.sinc_beta);
    c.crossfade_window = get_num(j, "tdl", "crossfade_window_s", c.crossfade_window);
    c.max_delay_span = get_num(j, "tdl", "max_delay_span_s", c.max_delay_span);
    return c;
}

struct subband_spec {
    double total_center = 0.0;
    double total_bandwidth = 0.0;
    double subband_bandwidth = 0.0;
    double usable_fraction = 1.0;
};

inline subband_spec parse_subbands(const json &j) {
    check_keys(j, "subbands",
               {"total_center_hz", "total_bandwidth_hz", "subband_bandwidth_hz",
                "usable_fraction"});
    subband_spec s;
    s.total_center = get_num(j, "subbands", "total_center_hz");
    s.total_bandwidth = get_num(j, "subbands", "total_bandwidth_hz");
    s.subband_bandwidth = get_num(j, "subbands", "subband_bandwidth_hz");
    s.usable_fraction = get_num(j, "subbands", "usable_fraction", 1.0);
    return s;
}

struct equalizer_spec {
    bool explicit_coeffs = false;
    chanem::equalizer_coeffs coeffs;
    bool calibrate = false;
    double band_low = 0.0;
    double band_high = 0.0;
    bool geometric_mean = false;
};

inline equalizer_spec parse_equalizer(const json &j) {
    check_keys(j, "equalizer",
               {"gain_real", "gain_imag", "delay_s", "calibrate_band_hz", "geometric_mean"});
    equalizer_spec s;
    if (j.contains("calibrate_band_hz")) {
        const auto &band = j["calibrate_band_hz"];
        if (!band.is_array() || band.size() != 2 || !band[0].is_number() || !band[1].is_number())
            throw config_error("calibrate_band_hz must be [low_hz, high_hz]");
        s.calibrate = true;
        s.band_low = band[0].get<double>();
        s.band_high = band[1].get<double>();
        if (j.contains("geometric_mean")) {
            if (!j["geometric_mean"].is_boolean())
                throw config_error("geometric_mean must be a boolean");
            s.geometric_mean = j["geometric_mean"].get<bool>();
        }
        if (j.contains("gain_real") || j.contains("gain_imag") || j.contains("delay_s"))
            throw config_error("equalizer takes either explicit coefficients or a "
                               "calibration band, not both");
        return s;
    }
    s.explicit_coeffs = true;
    s.coeffs.gain = {get_num(j, "equalizer", "gain_real", 1.0),
                     get_num(j, "equalizer", "gain_imag", 0.0)};
    s.coeffs.delay = get_num(j, "equalizer", "delay_s", 0.0);
    return s;
}

struct trace_spec {
    std::string file;
    bool two_tap = false;
    double tau = 0.0;
    chanem::cdouble amplitude{1.0, 0.0};
};

inline trace_spec parse_trace(const json &j) {
    check_keys(j, "trace", {"file", "two_tap"});
    trace_spec s;
    if (j.contains("file") && j.contains("two_tap"))
        throw config_error("trace takes either a file or an inline two_tap spec, not both");
    if (j.contains("file")) {
        s.file = get_str(j, "trace", "file");
        return s;
    }
    if (!j.contains("two_tap"))
        throw config_error("trace needs a 'file' or 'two_tap' entry");
    const auto &t = j["two_tap"];
    check_keys(t, "trace.two_tap", {"tau_s", "amplitude", "amplitude_imag"});
    s.two_tap = true;
    s.tau = get_num(t, "trace.two_tap", "tau_s");
    s.amplitude = {get_num(t, "trace.two_tap", "amplitude", 1.0),
                   get_num(t, "trace.two_tap", "amplitude_imag", 0.0)};
    if (!(s.tau > 0.0))
        throw config_error("two_tap tau_s must be positive");
    return s;
}

inline chanem::scenario_config parse_scenario(const json &j) {
    check_keys(j, "scenario",
               {"speed_mps", "carrier_hz", "receiver_height_m", "tx_height_m",
                "initial_distance_m", "num_snapshots", "duration_s", "scatterers",
                "noise_floor_db", "start_time_s"});
    chanem::scenario_config c;
    c.speed = get_num(j, "scenario", "speed_mps", c.speed);
    c.carrier = get_num(j, "scenario", "carrier_hz", c.carrier);
    c.receiver_height = get_num(j, "scenario", "receiver_height_m", c.receiver_height);
    c.tx_height = get_num(j, "scenario", "tx_height_m", c.tx_height);
    c.initial_distance = get_num(j, "scenario", "initial_distance_m", c.initial_distance);
    c.num_snapshots = get_count(j, "scenario", "num_snapshots", c.num_snapshots);
    c.duration = get_num(j, "scenario", "duration_s", c.duration);
    c.noise_floor_db = get_num(j, "scenario", "noise_floor_db", c.noise_floor_db);
    c.start_time = get_num(j, "scenario", "start_time_s", c.start_time);
    if (j.contains("scatterers")) {
        if (!j["scatterers"].is_array())
            throw config_error("scenario.scatterers must be an array");
        c.scatterers.clear();
        for (const auto &sj : j["scatterers"]) {
            check_keys(sj, "scenario.scatterers[]",
                       {"delay_offset_s", "relative_power_db", "doppler_hz"});
            chanem::scatterer_spec sc;
            sc.delay_offset = get_num(sj, "scenario.scatterers[]", "delay_offset_s");
            sc.relative_power_db = get_num(sj, "scenario.scatterers[]", "relative_power_db");
            sc.doppler = get_num(sj, "scenario.scatterers[]", "doppler_hz");
            c.scatterers.push_back(sc);
        }
    }
    return c;
}

struct analysis_spec {
    double center = 0.0;
    double bandwidth = 1e8;
    std::size_t points = 128;
    chanem::window_shape window = chanem::window_shape::rectangular;
    chanem::window_shape doppler_window = chanem::window_shape::rectangular;
    double kaiser_beta = 8.0;
    chanem::gap_policy gaps = chanem::gap_policy::fail;
    std::size_t snapshot_index = 0;
};

inline chanem::window_shape parse_window(const std::string &name) {
    if (name == "rectangular")
        return chanem::window_shape::rectangular;
    if (name == "hann")
        return chanem::window_shape::hann;
    if (name == "kaiser")
        return chanem::window_shape::kaiser;
    throw config_error("unknown window '" + name + "'");
}

inline analysis_spec parse_analysis(const json &j) {
    check_keys(j, "analysis",
               {"center_hz", "bandwidth_hz", "points", "window", "doppler_window",
                "kaiser_beta", "gap_fill", "snapshot_index"});
    analysis_spec s;
    s.center = get_num(j, "analysis", "center_hz", s.center);
    s.bandwidth = get_num(j, "analysis", "bandwidth_hz", s.bandwidth);
    s.points = get_count(j, "analysis", "points", s.points);
    s.window = parse_window(get_str(j, "analysis", "window", std::string("rectangular")));
    s.doppler_window =
        parse_window(get_str(j, "analysis", "doppler_window", std::string("rectangular")));
    s.kaiser_beta = get_num(j, "analysis", "kaiser_beta", s.kaiser_beta);
    const auto gaps = get_str(j, "analysis", "gap_fill", std::string("fail"));
    if (gaps == "fail")
        s.gaps = chanem::gap_policy::fail;
    else if (gaps == "linear")
        s.gaps = chanem::gap_policy::linear;
    else if (gaps == "zero")
        s.gaps = chanem::gap_policy::zero;
    else
        throw config_error("unknown gap_fill '" + gaps + "'");
    s.snapshot_index = get_count(j, "analysis", "snapshot_index", s.snapshot_index);
    if (s.points < 2)
        throw config_error("analysis.points must be at least 2");
    if (!(s.bandwidth > 0.0))
        throw config_error("analysis.bandwidth_hz must be positive");
    return s;
}

} // namespace chanem_cli
