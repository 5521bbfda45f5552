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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chanem/chanem.hpp"
#include "config.hpp"

namespace {

using chanem_cli::config_error;
using chanem_cli::json;
using chanem::detail::fmt_double;

constexpr int exit_config = 2;
constexpr int exit_data = 3;

// Outputs land under their final name only after a complete write.
class atomic_file {
  public:
    explicit atomic_file(std::string path) : final_(std::move(path)), tmp_(final_ + ".tmp") {}

    const std::string &tmp_path() const { return tmp_; }

    void commit() {
        std::error_code ec;
        std::filesystem::rename(tmp_, final_, ec);
        if (ec)
            throw chanem::io_error("cannot move '" + tmp_ + "' to '" + final_ + "': " +
                                   ec.message());
    }

    ~atomic_file() {
        std::error_code ec;
        std::filesystem::remove(tmp_, ec);
    }

  private:
    std::string final_;
    std::string tmp_;
};

void check_top_level(const json &j) {
    chanem_cli::check_keys(j, "config",
                           {"chain", "grid", "tdl", "subbands", "equalizer", "trace",
                            "scenario", "analysis"});
}

chanem::snapshot_sequence trace_from_config(const json &j, std::size_t max_taps) {
    if (!j.contains("trace"))
        throw config_error("this command needs a 'trace' section");
    const auto spec = chanem_cli::parse_trace(j["trace"]);
    if (spec.two_tap) {
        chanem::channel_snapshot snap;
        snap.timestamp = 0.0;
        snap.taps = {{0.0, {1.0, 0.0}}, {spec.tau, spec.amplitude}};
        chanem::snapshot_sequence seq;
        seq.snapshots.push_back(chanem::normalize_snapshot(snap, max_taps));
        return seq;
    }
    return chanem::load_trace(spec.file, max_taps);
}

chanem::equalizer_coeffs
resolve_equalizer(const chanem_cli::equalizer_spec &spec, const chanem::frequency_response &measured) {
    if (spec.explicit_coeffs)
        return spec.coeffs;
    return chanem::calibrate_one_tap(measured, spec.band_low, spec.band_high,
                                     spec.geometric_mean);
}

double peak_to_peak_db(const std::vector<double> &mags_db) {
    double lo = mags_db.front(), hi = mags_db.front();
    for (double v : mags_db) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return hi - lo;
}

void cmd_sweep(const std::string &config_path, const std::string &output_path) {
    const auto j = chanem_cli::load_json(config_path);
    check_top_level(j);
    const auto chain = j.contains("chain") ? chanem_cli::parse_chain(j["chain"])
                                           : chanem::chain_config{};
    if (!j.contains("grid"))
        throw config_error("sweep needs a 'grid' section");
    const auto grid = chanem_cli::parse_grid(j["grid"]);

    std::optional<chanem_cli::equalizer_spec> eq_spec;
    if (j.contains("equalizer"))
        eq_spec = chanem_cli::parse_equalizer(j["equalizer"]);

    atomic_file out(output_path);
    std::ofstream os(out.tmp_path(), std::ios::binary);
    if (!os)
        throw chanem::io_error("cannot open '" + out.tmp_path() + "' for writing");

    std::vector<double> summary_mags;
    auto in_summary_band = [&](double f) {
        if (eq_spec && eq_spec->calibrate)
            return f >= eq_spec->band_low - 1e-9 && f <= eq_spec->band_high + 1e-9;
        return true;
    };

    if (j.contains("subbands")) {
        const auto sb = chanem_cli::parse_subbands(j["subbands"]);
        auto plan = chanem::plan_subbands(sb.total_center, sb.total_bandwidth,
                                          sb.subband_bandwidth, sb.usable_fraction);
        const double u = plan.subbands.front().usable_width();
        const double ratio = u / grid.step;
        if (std::abs(ratio - std::round(ratio)) > 1e-9 || std::llround(ratio) < 2)
            throw config_error("subband usable width must be a multiple of grid step_hz");
        const auto per_band = static_cast<std::size_t>(std::llround(ratio));

        std::vector<std::pair<chanem::sub_band, chanem::frequency_response>> pieces;
        std::vector<chanem::equalizer_coeffs> eqs;
        for (const auto &band : plan.subbands) {
            chanem::frequency_response piece;
            piece.start_frequency = band.usable_low();
            piece.frequency_step = grid.step;
            piece.values.resize(per_band);
            for (std::size_t k = 0; k < per_band; ++k)
                piece.values[k] = chanem::chain_point(chain, piece.frequency(k));
            if (eq_spec) {
                if (eq_spec->calibrate) {
                    const double lo = std::max(eq_spec->band_low, piece.frequency(0));
                    const double hi =
                        std::min(eq_spec->band_high, piece.frequency(per_band - 1));
                    eqs.push_back(chanem::calibrate_one_tap(piece, lo, hi,
                                                            eq_spec->geometric_mean));
                } else {
                    eqs.push_back(eq_spec->coeffs);
                }
            }
            pieces.emplace_back(band, piece);
        }
        auto stitched = chanem::stitch(pieces, eq_spec ? &eqs : nullptr);

        auto owner_of = [&](double f) {
            for (std::size_t pi = 0; pi < plan.subbands.size(); ++pi) {
                const auto &b = plan.subbands[pi];
                const bool last = (pi + 1 == plan.subbands.size());
                if (f >= b.usable_low() - 1e-6 &&
                    (last ? f <= b.usable_high() + 1e-6 : f < b.usable_high() - 1e-6))
                    return pi;
            }
            return plan.subbands.size();
        };

        os << "frequency_hz,mag_db,phase_rad,subband_index\n";
        for (std::size_t i = 0; i < stitched.values.size(); ++i) {
            if (!stitched.is_valid(i))
                continue;
            const double f = stitched.frequency(i);
            const double mag = chanem::db_from_amplitude(std::abs(stitched.values[i]));
            os << fmt_double(f) << ',' << fmt_double(mag) << ','
               << fmt_double(std::arg(stitched.values[i])) << ',' << owner_of(f) << '\n';
            if (in_summary_band(f))
                summary_mags.push_back(mag);
        }
    } else {
        auto resp = chanem::chain_response(chain, grid);
        if (eq_spec)
            resp = chanem::apply_equalizer(resolve_equalizer(*eq_spec, resp), resp);
        os << "frequency_hz,mag_db,phase_rad\n";
        for (std::size_t i = 0; i < resp.values.size(); ++i) {
            const double f = resp.frequency(i);
            const double mag = chanem::db_from_amplitude(std::abs(resp.values[i]));
            os << fmt_double(f) << ',' << fmt_double(mag) << ','
               << fmt_double(std::arg(resp.values[i])) << '\n';
            if (in_summary_band(f))
                summary_mags.push_back(mag);
        }
    }
    if (!os)
        throw chanem::io_error("write failed for '" + out.tmp_path() + "'");
    os.close();
    out.commit();

    if (!summary_mags.empty())
        std::cout << "inband_pp_db=" << fmt_double(peak_to_peak_db(summary_mags)) << '\n';
}

void cmd_emulate(const std::string &config_path, const std::string &input_path,
                 const std::string &output_path) {
    const auto j = chanem_cli::load_json(config_path);
    check_top_level(j);
    const auto tdl = j.contains("tdl") ? chanem_cli::parse_tdl(j["tdl"]) : chanem::tdl_config{};
    const auto seq = trace_from_config(j, tdl.max_active_taps);

    auto sig = chanem::load_signal(input_path);
    if (j.contains("chain"))
        sig = chanem::apply_chain(chanem_cli::parse_chain(j["chain"]), sig);
    if (j.contains("equalizer")) {
        const auto eq_spec = chanem_cli::parse_equalizer(j["equalizer"]);
        chanem::equalizer_coeffs coeffs;
        if (eq_spec.explicit_coeffs) {
            coeffs = eq_spec.coeffs;
        } else {
            if (!j.contains("chain") || !j.contains("grid"))
                throw config_error("equalizer calibration during emulation needs 'chain' "
                                   "and 'grid' sections");
            const auto resp = chanem::chain_response(chanem_cli::parse_chain(j["chain"]),
                                                     chanem_cli::parse_grid(j["grid"]));
            coeffs = chanem::calibrate_one_tap(resp, eq_spec.band_low, eq_spec.band_high,
                                               eq_spec.geometric_mean);
        }
        sig = chanem::apply_equalizer(coeffs, sig);
    }

    const auto out_sig = chanem::emulate_time_variant(sig, seq, tdl);
    atomic_file out(output_path);
    chanem::save_signal(out_sig, out.tmp_path());
    out.commit();
    std::cout << "samples_out=" << out_sig.samples.size() << '\n';
}

chanem::frequency_grid analysis_grid(const chanem_cli::analysis_spec &spec) {
    chanem::frequency_grid g;
    g.step = spec.bandwidth / static_cast<double>(spec.points);
    g.start = spec.center - spec.bandwidth / 2.0;
    g.count = spec.points;
    return g;
}

void cmd_analyze(const std::string &config_path, const std::string &input_path,
                 const std::string &output_path, const std::string &mode) {
    const auto j = chanem_cli::load_json(config_path);
    check_top_level(j);
    const auto tdl = j.contains("tdl") ? chanem_cli::parse_tdl(j["tdl"]) : chanem::tdl_config{};
    auto spec = j.contains("analysis") ? chanem_cli::parse_analysis(j["analysis"])
                                       : chanem_cli::analysis_spec{};
    const bool window_given = j.contains("analysis") && j["analysis"].contains("window");
    const auto seq = chanem::load_trace(input_path, tdl.max_active_taps);
    if (seq.snapshots.empty())
        throw chanem::empty_sequence("trace '" + input_path + "' holds no snapshots");

    atomic_file out(output_path);
    std::ofstream os(out.tmp_path(), std::ios::binary);
    if (!os)
        throw chanem::io_error("cannot open '" + out.tmp_path() + "' for writing");
    const auto grid = analysis_grid(spec);

    std::string summary;
    if (mode == "tf" || mode == "cir") {
        if (spec.snapshot_index >= seq.snapshots.size())
            throw config_error("analysis.snapshot_index is beyond the trace length");
        const auto &snap = seq.snapshots[spec.snapshot_index];
        const auto tf = chanem::channel_frequency_response(snap, grid);
        if (mode == "tf") {
            os << "frequency_hz,re,im,mag_db,phase_rad\n";
            for (std::size_t i = 0; i < tf.values.size(); ++i)
                os << fmt_double(tf.frequency(i)) << ',' << fmt_double(tf.values[i].real())
                   << ',' << fmt_double(tf.values[i].imag()) << ','
                   << fmt_double(chanem::db_from_amplitude(std::abs(tf.values[i]))) << ','
                   << fmt_double(std::arg(tf.values[i])) << '\n';
        } else {
            // Display path defaults to a Hann window unless the config
            // picked one explicitly.
            const auto window = window_given ? spec.window : chanem::window_shape::hann;
            const auto cir = chanem::tf_to_cir(tf, window, spec.kaiser_beta, spec.gaps);
            os << "delay_s,re,im,mag_db\n";
            for (std::size_t i = 0; i < cir.values.size(); ++i) {
                const double d =
                    cir.delay_offset + static_cast<double>(i) * cir.delay_step;
                os << fmt_double(d) << ',' << fmt_double(cir.values[i].real()) << ','
                   << fmt_double(cir.values[i].imag()) << ','
                   << fmt_double(chanem::db_from_amplitude(std::abs(cir.values[i]))) << '\n';
            }
        }
    } else if (mode == "power") {
        const auto trace = chanem::total_power_trace(seq);
        os << "time_s,power_db\n";
        for (const auto &[t, p] : trace)
            os << fmt_double(t) << ',' << fmt_double(p) << '\n';
    } else if (mode == "spreading") {
        std::vector<std::pair<double, chanem::impulse_response>> series;
        series.reserve(seq.snapshots.size());
        for (const auto &snap : seq.snapshots) {
            const auto tf = chanem::channel_frequency_response(snap, grid);
            series.emplace_back(snap.timestamp,
                                chanem::tf_to_cir(tf, spec.window, spec.kaiser_beta));
        }
        const auto map =
            chanem::spreading_function(series, spec.doppler_window, spec.kaiser_beta);

        os << "doppler_hz\\delay_ns";
        for (std::size_t d = 0; d < map.values.front().size(); ++d)
            os << ','
               << fmt_double((map.delay_offset + static_cast<double>(d) * map.delay_step) *
                             1e9);
        os << '\n';
        double best = -1.0;
        double best_doppler = 0.0;
        for (std::size_t r = 0; r < map.values.size(); ++r) {
            const double nu = map.doppler_start + static_cast<double>(r) * map.doppler_step;
            os << fmt_double(nu);
            for (const auto &v : map.values[r]) {
                const double m = std::abs(v);
                os << ',' << fmt_double(m);
                if (m > best) {
                    best = m;
                    best_doppler = nu;
                }
            }
            os << '\n';
        }
        summary = "argmax_doppler_hz=" + fmt_double(best_doppler) +
                  " doppler_step_hz=" + fmt_double(map.doppler_step);
    } else {
        throw config_error("unknown analyze mode '" + mode + "'");
    }

    if (!os)
        throw chanem::io_error("write failed for '" + out.tmp_path() + "'");
    os.close();
    out.commit();
    if (!summary.empty())
        std::cout << summary << '\n';
}

void cmd_synth(const std::string &config_path, const std::string &output_path,
               std::uint64_t seed, const std::string &format) {
    const auto j = chanem_cli::load_json(config_path);
    check_top_level(j);
    const auto tdl = j.contains("tdl") ? chanem_cli::parse_tdl(j["tdl"]) : chanem::tdl_config{};
    const auto scenario = j.contains("scenario") ? chanem_cli::parse_scenario(j["scenario"])
                                                 : chanem::scenario_config{};

    chanem::trace_format fmt;
    if (format == "text")
        fmt = chanem::trace_format::text;
    else if (format == "binary")
        fmt = chanem::trace_format::binary;
    else
        throw config_error("unknown trace format '" + format + "'");

    const auto seq = chanem::synth_v2i_trace(scenario, tdl.max_active_taps, seed);
    atomic_file out(output_path);
    chanem::save_trace(seq, out.tmp_path(), fmt);
    out.commit();
    std::cout << "snapshots=" << seq.snapshots.size() << '\n';
}

void cmd_validate(const std::string &input_path) {
    const auto seq = chanem::load_trace(input_path);
    std::size_t max_taps = 0;
    for (const auto &s : seq.snapshots)
        max_taps = std::max(max_taps, s.taps.size());
    std::cout << "snapshots=" << seq.snapshots.size() << " max_taps=" << max_taps;
    if (!seq.snapshots.empty())
        std::cout << " first_timestamp_s=" << fmt_double(seq.snapshots.front().timestamp)
                  << " span_s="
                  << fmt_double(seq.snapshots.back().timestamp -
                                seq.snapshots.front().timestamp);
    std::cout << '\n';
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"chanem: bandwidth-scalable baseband channel emulation toolkit"};
    app.require_subcommand(1);

    std::string config_path, input_path, output_path;
    std::string mode = "tf";
    std::string format = "text";
    std::uint64_t seed = 0;

    auto *sweep = app.add_subcommand("sweep", "Frequency sweep of the hardware chain model");
    sweep->add_option("--config", config_path, "JSON config file")->required();
    sweep->add_option("--output", output_path, "CSV output path")->required();

    auto *emulate = app.add_subcommand("emulate", "Run a signal through the emulator");
    emulate->add_option("--config", config_path, "JSON config file")->required();
    emulate->add_option("--input", input_path, "Input signal file")->required();
    emulate->add_option("--output", output_path, "Output signal file")->required();

    auto *analyze = app.add_subcommand("analyze", "Analyze a snapshot trace");
    analyze->add_option("--config", config_path, "JSON config file")->required();
    analyze->add_option("--input", input_path, "Trace file")->required();
    analyze->add_option("--output", output_path, "CSV output path")->required();
    analyze->add_option("--mode", mode, "tf | cir | spreading | power");

    auto *synth = app.add_subcommand("synth", "Synthesize a drive-by scenario trace");
    synth->add_option("--config", config_path, "JSON config file")->required();
    synth->add_option("--output", output_path, "Trace output path")->required();
    synth->add_option("--seed", seed, "Random seed for scatterer phases");
    synth->add_option("--format", format, "text | binary");

    auto *validate = app.add_subcommand("validate", "Check a trace file and print a summary");
    validate->add_option("--input", input_path, "Trace file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep->parsed())
            cmd_sweep(config_path, output_path);
        else if (emulate->parsed())
            cmd_emulate(config_path, input_path, output_path);
        else if (analyze->parsed())
            cmd_analyze(config_path, input_path, output_path, mode);
        else if (synth->parsed())
            cmd_synth(config_path, output_path, seed, format);
        else if (validate->parsed())
            cmd_validate(input_path);
    } catch (const config_error &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const chanem::error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_data;
    } catch (const std::exception &e) {
        std::cerr << "unexpected error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
