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

#include <catch2/catch_amalgamated.hpp>

#include "chanem/tdl.hpp"
#include "test_util.hpp"

using namespace chanem;

namespace {

complex_signal impulse(std::size_t n, std::size_t pos, double fs) {
    complex_signal sig;
    sig.sample_rate = fs;
    sig.samples.assign(n, cdouble{0.0, 0.0});
    sig.samples[pos] = {1.0, 0.0};
    return sig;
}

complex_signal random_signal(std::mt19937_64 &rng, std::size_t n, double fs) {
    complex_signal sig;
    sig.sample_rate = fs;
    sig.samples = testutil::random_complex(rng, n);
    return sig;
}

} // namespace

TEST_CASE("single zero-delay unit tap is the identity") {
    std::mt19937_64 rng(3);
    auto sig = random_signal(rng, 128, 20e6);
    channel_snapshot snap;
    snap.taps = {{0.0, {1.0, 0.0}}};
    const auto out = convolve_snapshot(sig, snap);
    REQUIRE(out.samples.size() == sig.samples.size());
    for (std::size_t i = 0; i < out.samples.size(); ++i)
        CHECK(out.samples[i] == sig.samples[i]);
}

TEST_CASE("an echo half a microsecond later lands ten samples on at 20 MS/s") {
    auto sig = impulse(32, 0, 20e6);
    channel_snapshot snap;
    snap.taps = {{0.0, {1.0, 0.0}}, {500e-9, {0.5, 0.0}}};
    const auto out = convolve_snapshot(sig, snap);
    REQUIRE(out.samples.size() == 32 + 10);
    CHECK(out.samples[0] == cdouble{1.0, 0.0});
    CHECK(out.samples[10] == cdouble{0.5, 0.0});
    for (std::size_t i = 0; i < out.samples.size(); ++i)
        if (i != 0 && i != 10)
            CHECK(std::abs(out.samples[i]) == 0.0);
}

TEST_CASE("nearest-sample mode rounds to the closest tap cell") {
    auto sig = impulse(4, 0, 1e6);
    channel_snapshot snap;
    snap.taps = {{7.4e-6, {1.0, 0.0}}};
    auto out = convolve_snapshot(sig, snap);
    CHECK(std::abs(out.samples[7]) == 1.0);

    snap.taps = {{7.6e-6, {1.0, 0.0}}};
    out = convolve_snapshot(sig, snap);
    CHECK(std::abs(out.samples[8]) == 1.0);
}

TEST_CASE("tail length survives float-noise in the delay product") {
    // 5e-7 * 1.2e8 is 60 up to rounding; the tail must be exactly 60.
    auto sig = impulse(16, 0, 1.2e8);
    channel_snapshot snap;
    snap.taps = {{0.0, {1.0, 0.0}}, {5e-7, {1.0, 0.0}}};
    const auto out = convolve_snapshot(sig, snap);
    CHECK(out.samples.size() == 16 + 60);
    CHECK(std::abs(out.samples[60]) == 1.0);
}

TEST_CASE("convolution is linear in the input") {
    std::mt19937_64 rng(5);
    auto x = random_signal(rng, 64, 50e6);
    auto y = random_signal(rng, 64, 50e6);
    channel_snapshot snap;
    snap.taps = {{0.0, {0.3, -0.4}}, {100e-9, {0.0, 0.9}}, {340e-9, {-0.2, 0.1}}};

    const cdouble a{1.7, -0.3};
    complex_signal mix = x;
    for (std::size_t i = 0; i < mix.samples.size(); ++i)
        mix.samples[i] = a * x.samples[i] + y.samples[i];

    const auto out_mix = convolve_snapshot(mix, snap);
    const auto out_x = convolve_snapshot(x, snap);
    const auto out_y = convolve_snapshot(y, snap);
    REQUIRE(out_mix.samples.size() == out_x.samples.size());
    for (std::size_t i = 0; i < out_mix.samples.size(); ++i)
        CHECK(std::abs(out_mix.samples[i] - (a * out_x.samples[i] + out_y.samples[i])) < 1e-12);
}

TEST_CASE("windowed-sinc mode passes integer delays through exactly") {
    std::mt19937_64 rng(9);
    auto sig = random_signal(rng, 64, 1e6);
    channel_snapshot snap;
    snap.taps = {{12e-6, {0.8, 0.1}}};

    tdl_config nearest;
    tdl_config sinc;
    sinc.fractional = fractional_delay_mode::windowed_sinc;
    const auto out_n = convolve_snapshot(sig, snap, nearest);
    const auto out_s = convolve_snapshot(sig, snap, sinc);
    REQUIRE(out_s.samples.size() >= out_n.samples.size());
    for (std::size_t i = 0; i < out_n.samples.size(); ++i)
        CHECK(std::abs(out_s.samples[i] - out_n.samples[i]) < 1e-15);
    for (std::size_t i = out_n.samples.size(); i < out_s.samples.size(); ++i)
        CHECK(std::abs(out_s.samples[i]) == 0.0);
}

TEST_CASE("windowed-sinc mode interpolates a half-sample delay") {
    const double fs = 1e6;
    const double f0 = 0.1 * fs;
    const std::size_t n = 256;
    complex_signal sig;
    sig.sample_rate = fs;
    sig.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        sig.samples[i] =
            std::polar(1.0, 2.0 * std::numbers::pi * f0 * static_cast<double>(i) / fs);

    channel_snapshot snap;
    snap.taps = {{10.5 / fs, {1.0, 0.0}}};
    tdl_config cfg;
    cfg.fractional = fractional_delay_mode::windowed_sinc;
    const auto out = convolve_snapshot(sig, snap, cfg);

    // Compare against the exactly delayed tone away from the block edges.
    double worst = 0.0;
    for (std::size_t i = 64; i < 192; ++i) {
        const auto want =
            std::polar(1.0, 2.0 * std::numbers::pi * f0 * (static_cast<double>(i) - 10.5) / fs);
        worst = std::max(worst, std::abs(out.samples[i] - want));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("windowed-sinc kernel preserves DC exactly") {
    const double fs = 1e6;
    complex_signal sig;
    sig.sample_rate = fs;
    sig.samples.assign(200, cdouble{1.0, 0.0});
    channel_snapshot snap;
    snap.taps = {{3.25 / fs, {1.0, 0.0}}};
    tdl_config cfg;
    cfg.fractional = fractional_delay_mode::windowed_sinc;
    const auto out = convolve_snapshot(sig, snap, cfg);
    for (std::size_t i = 64; i < 150; ++i)
        CHECK_THAT(std::abs(out.samples[i]), Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("single-snapshot sequence reproduces the static convolution exactly") {
    std::mt19937_64 rng(17);
    auto sig = random_signal(rng, 96, 20e6);
    channel_snapshot snap;
    snap.timestamp = 0.0;
    snap.taps = {{0.0, {1.0, 0.2}}, {250e-9, {-0.3, 0.4}}};
    snapshot_sequence seq;
    seq.snapshots = {snap};

    const auto statico = convolve_snapshot(sig, snap);
    const auto dynamic = emulate_time_variant(sig, seq);
    REQUIRE(statico.samples.size() == dynamic.samples.size());
    for (std::size_t i = 0; i < statico.samples.size(); ++i)
        CHECK(statico.samples[i] == dynamic.samples[i]);
}

TEST_CASE("hard switch changes taps exactly at the snapshot boundary") {
    std::mt19937_64 rng(21);
    const double fs = 1e6;
    auto sig = random_signal(rng, 100, fs);
    sig.start_time = 0.0;

    snapshot_sequence seq;
    channel_snapshot a, b;
    a.timestamp = 0.0;
    a.taps = {{0.0, {1.0, 0.0}}};
    b.timestamp = 50.0 / fs;
    b.taps = {{0.0, {2.0, 0.0}}};
    seq.snapshots = {a, b};

    const auto out = emulate_time_variant(sig, seq);
    for (std::size_t i = 0; i < 50; ++i)
        CHECK(out.samples[i] == sig.samples[i]);
    for (std::size_t i = 50; i < 100; ++i)
        CHECK(out.samples[i] == 2.0 * sig.samples[i]);
}

TEST_CASE("the last snapshot stays active past the end of the trace") {
    const double fs = 1e6;
    complex_signal sig;
    sig.sample_rate = fs;
    sig.start_time = 10.0; // long after both snapshots
    sig.samples.assign(8, cdouble{1.0, 0.0});

    snapshot_sequence seq;
    channel_snapshot a, b;
    a.timestamp = 0.0;
    a.taps = {{0.0, {1.0, 0.0}}};
    b.timestamp = 1.0;
    b.taps = {{0.0, {3.0, 0.0}}};
    seq.snapshots = {a, b};

    const auto out = emulate_time_variant(sig, seq);
    for (const auto &s : out.samples)
        CHECK(s == cdouble{3.0, 0.0});
}

TEST_CASE("linear crossfade ramps between snapshot outputs") {
    const double fs = 1e6;
    complex_signal sig;
    sig.sample_rate = fs;
    sig.start_time = 0.0;
    sig.samples.assign(100, cdouble{1.0, 0.0});

    snapshot_sequence seq;
    channel_snapshot a, b;
    a.timestamp = 0.0;
    a.taps = {{0.0, {1.0, 0.0}}};
    b.timestamp = 40.0 / fs;
    b.taps = {{0.0, {2.0, 0.0}}};
    seq.snapshots = {a, b};

    tdl_config cfg;
    cfg.update = update_policy::linear_crossfade;
    cfg.crossfade_window = 20.0 / fs;
    const auto out = emulate_time_variant(sig, seq, cfg);

    for (std::size_t i = 0; i < 40; ++i)
        CHECK_THAT(out.samples[i].real(), Catch::Matchers::WithinAbs(1.0, 1e-12));
    for (std::size_t i = 40; i < 60; ++i) {
        const double w = (static_cast<double>(i) - 40.0) / 20.0;
        CHECK_THAT(out.samples[i].real(), Catch::Matchers::WithinAbs(1.0 + w, 1e-9));
    }
    for (std::size_t i = 60; i < 100; ++i)
        CHECK_THAT(out.samples[i].real(), Catch::Matchers::WithinAbs(2.0, 1e-12));
}

TEST_CASE("crossfade without a window spans the whole snapshot interval") {
    const double fs = 1e6;
    complex_signal sig;
    sig.sample_rate = fs;
    sig.samples.assign(80, cdouble{1.0, 0.0});

    snapshot_sequence seq;
    channel_snapshot a, b, c;
    a.timestamp = 0.0;
    a.taps = {{0.0, {1.0, 0.0}}};
    b.timestamp = 20.0 / fs;
    b.taps = {{0.0, {2.0, 0.0}}};
    c.timestamp = 60.0 / fs;
    c.taps = {{0.0, {2.0, 0.0}}};
    seq.snapshots = {a, b, c};

    tdl_config cfg;
    cfg.update = update_policy::linear_crossfade;
    const auto out = emulate_time_variant(sig, seq, cfg);
    // The fade toward snapshot b runs across its full 40-sample interval.
    for (std::size_t i = 20; i < 60; ++i) {
        const double w = (static_cast<double>(i) - 20.0) / 40.0;
        CHECK_THAT(out.samples[i].real(), Catch::Matchers::WithinAbs(1.0 + w, 1e-9));
    }
}

TEST_CASE("emulation input validation") {
    complex_signal sig;
    sig.sample_rate = 1e6;
    sig.samples = {{1.0, 0.0}};
    snapshot_sequence seq;
    CHECK_THROWS_AS(emulate_time_variant(sig, seq), empty_sequence);

    channel_snapshot snap;
    snap.timestamp = 1.0;
    snap.taps = {{0.0, {1.0, 0.0}}};
    seq.snapshots = {snap};
    sig.start_time = 0.0;
    CHECK_THROWS_AS(emulate_time_variant(sig, seq), uncovered_signal_start);

    sig.start_time = 2.0;
    channel_snapshot again = snap;
    again.timestamp = 1.0;
    seq.snapshots.push_back(again);
    CHECK_THROWS_AS(emulate_time_variant(sig, seq), invariant_violation);

    seq.snapshots.pop_back();
    sig.samples.clear();
    CHECK_THROWS_AS(emulate_time_variant(sig, seq), empty_sequence);
    sig.samples = {{1.0, 0.0}};
    sig.sample_rate = 0.0;
    CHECK_THROWS_AS(emulate_time_variant(sig, seq), non_positive_input);
}

TEST_CASE("tap budget and delay guards apply to emulation") {
    complex_signal sig;
    sig.sample_rate = 1e6;
    sig.samples = {{1.0, 0.0}};

    channel_snapshot snap;
    for (int i = 0; i < 11; ++i)
        snap.taps.push_back({static_cast<double>(i) * 1e-6, {1.0, 0.0}});
    CHECK_THROWS_AS(convolve_snapshot(sig, snap), too_many_taps);

    snap.taps = {{-1e-6, {1.0, 0.0}}};
    CHECK_THROWS_AS(convolve_snapshot(sig, snap), delay_out_of_range);

    snap.taps = {{5e-6, {1.0, 0.0}}};
    tdl_config cfg;
    cfg.max_delay_span = 1e-6;
    CHECK_THROWS_AS(convolve_snapshot(sig, snap, cfg), delay_out_of_range);
}

TEST_CASE("delay quantum snaps taps onto the emulator grid") {
    auto sig = impulse(4, 0, 1e6);
    channel_snapshot snap;
    snap.taps = {{3.2e-6, {1.0, 0.0}}, {2.8e-6, {1.0, 0.0}}};
    tdl_config cfg;
    cfg.delay_quantum = 1e-6;
    const auto out = convolve_snapshot(sig, snap, cfg);
    // Both taps snap to 3 us and merge into one cell.
    CHECK(out.samples.size() == 4 + 3);
    CHECK(out.samples[3] == cdouble{2.0, 0.0});
}

TEST_CASE("closed-form response of the two-tap channel has 2 MHz-period nulls") {
    channel_snapshot snap;
    snap.taps = {{0.0, {1.0, 0.0}}, {500e-9, {1.0, 0.0}}};
    frequency_grid g{0.0, 1e6, 8};
    const auto tf = channel_frequency_response(snap, g);

    for (std::size_t i = 0; i < tf.values.size(); ++i) {
        const double f = g.frequency(i);
        const double want = 2.0 * std::abs(std::cos(std::numbers::pi * f * 500e-9));
        CHECK_THAT(std::abs(tf.values[i]), Catch::Matchers::WithinAbs(want, 1e-9));
    }
    // Odd megahertz are nulls, even megahertz full reinforcement.
    CHECK(std::abs(tf.values[1]) < 1e-9);
    CHECK(std::abs(tf.values[3]) < 1e-9);
    CHECK(std::abs(tf.values[5]) < 1e-9);
    CHECK_THAT(std::abs(tf.values[0]), Catch::Matchers::WithinAbs(2.0, 1e-12));
    CHECK_THAT(std::abs(tf.values[2]), Catch::Matchers::WithinAbs(2.0, 1e-12));
}

TEST_CASE("closed-form response validates inputs") {
    channel_snapshot snap;
    snap.taps = {{-1.0, {1.0, 0.0}}};
    CHECK_THROWS_AS(channel_frequency_response(snap, frequency_grid{0.0, 1e6, 4}),
                    delay_out_of_range);
    snap.taps = {{0.0, {1.0, 0.0}}};
    CHECK_THROWS_AS(channel_frequency_response(snap, frequency_grid{0.0, 1e6, 0}), invalid_grid);
}
