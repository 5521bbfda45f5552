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

#include <fstream>

#include <catch2/catch_amalgamated.hpp>

#include "chanem/analysis.hpp"
#include "chanem/playback.hpp"
#include "chanem/tdl.hpp"
#include "test_util.hpp"

using namespace chanem;

namespace {

snapshot_sequence random_sequence(std::mt19937_64 &rng, std::size_t count,
                                  std::size_t taps_per_snapshot) {
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    snapshot_sequence seq;
    double ts = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        ts += 1e-4 + static_cast<double>(rng() % 1000) * 1e-7;
        channel_snapshot snap;
        snap.timestamp = ts;
        for (std::size_t k = 0; k < taps_per_snapshot; ++k)
            snap.taps.push_back({static_cast<double>(k) * 10e-9 +
                                     static_cast<double>(rng() % 100) * 1e-11,
                                 {amp(rng), amp(rng)}});
        seq.snapshots.push_back(normalize_snapshot(std::move(snap)));
    }
    return seq;
}

bool sequences_equal(const snapshot_sequence &a, const snapshot_sequence &b,
                     bool compare_metadata = true) {
    if (a.snapshots.size() != b.snapshots.size())
        return false;
    if (compare_metadata && a.metadata != b.metadata)
        return false;
    for (std::size_t i = 0; i < a.snapshots.size(); ++i) {
        if (a.snapshots[i].timestamp != b.snapshots[i].timestamp)
            return false;
        if (a.snapshots[i].taps.size() != b.snapshots[i].taps.size())
            return false;
        for (std::size_t k = 0; k < a.snapshots[i].taps.size(); ++k) {
            if (a.snapshots[i].taps[k].delay != b.snapshots[i].taps[k].delay)
                return false;
            if (a.snapshots[i].taps[k].amplitude != b.snapshots[i].taps[k].amplitude)
                return false;
        }
    }
    return true;
}

} // namespace

TEST_CASE("sparsify recovers an exactly sparse response") {
    impulse_response cir;
    cir.delay_step = 10e-9;
    cir.delay_offset = 0.0;
    cir.values.assign(64, cdouble{0.0, 0.0});
    cir.values[3] = {0.9, 0.1};
    cir.values[17] = {-0.4, 0.0};
    cir.values[25] = {0.0, 0.7};
    cir.values[40] = {0.2, -0.2};

    const auto snap = sparsify(cir, 4);
    REQUIRE(snap.taps.size() == 4);
    CHECK(snap.taps[0].delay == 3 * cir.delay_step);
    CHECK(snap.taps[0].amplitude == cdouble{0.9, 0.1});
    CHECK(snap.taps[1].delay == 17 * cir.delay_step);
    CHECK(snap.taps[2].delay == 25 * cir.delay_step);
    CHECK(snap.taps[3].delay == 40 * cir.delay_step);

    // Asking for more taps than nonzero bins returns just the nonzero ones.
    CHECK(sparsify(cir, 10).taps.size() == 4);
}

TEST_CASE("sparsify picks the strongest bin for k = 1") {
    impulse_response cir;
    cir.delay_step = 1e-9;
    cir.values = {{0.5, 0.0}, {0.0, 0.0}, {1.0, 0.0}};
    const auto snap = sparsify(cir, 1);
    REQUIRE(snap.taps.size() == 1);
    CHECK(snap.taps[0].delay == 2e-9);
    CHECK(snap.taps[0].amplitude == cdouble{1.0, 0.0});
}

TEST_CASE("sparsify matches the brute-force best-k selection on dense data") {
    std::mt19937_64 rng(67);
    for (int rep = 0; rep < 50; ++rep) {
        impulse_response cir;
        cir.delay_step = 2e-9;
        cir.values = testutil::random_complex(rng, 48);

        const std::size_t k = 4;
        const auto snap = sparsify(cir, k);
        REQUIRE(snap.taps.size() == k);
        double captured = 0.0;
        for (const auto &t : snap.taps)
            captured += std::norm(t.amplitude);

        std::vector<double> mags;
        for (const auto &v : cir.values)
            mags.push_back(std::norm(v));
        std::sort(mags.rbegin(), mags.rend());
        double best = mags[0] + mags[1] + mags[2] + mags[3];
        CHECK_THAT(captured, Catch::Matchers::WithinRel(best, 1e-12));
    }
}

TEST_CASE("sparsify residual energy shrinks as k grows") {
    std::mt19937_64 rng(71);
    impulse_response cir;
    cir.delay_step = 1e-9;
    cir.values = testutil::random_complex(rng, 32);
    double total = 0.0;
    for (const auto &v : cir.values)
        total += std::norm(v);

    double prev_residual = total;
    for (std::size_t k = 1; k <= 8; ++k) {
        const auto snap = sparsify(cir, k);
        double captured = 0.0;
        for (const auto &t : snap.taps)
            captured += std::norm(t.amplitude);
        const double residual = total - captured;
        CHECK(residual <= prev_residual + 1e-12);
        prev_residual = residual;
    }
}

TEST_CASE("sparsify is idempotent for fixed k") {
    std::mt19937_64 rng(73);
    impulse_response cir;
    cir.delay_step = 4e-9;
    cir.values = testutil::random_complex(rng, 40);

    const std::size_t k = 4;
    const auto first = sparsify(cir, k);

    // Re-render the sparse snapshot onto the same delay grid and sparsify
    // again; the taps must survive unchanged.
    impulse_response rendered;
    rendered.delay_step = cir.delay_step;
    rendered.values.assign(cir.values.size(), cdouble{0.0, 0.0});
    for (const auto &t : first.taps) {
        const auto idx = static_cast<std::size_t>(std::llround(t.delay / cir.delay_step));
        rendered.values[idx] = t.amplitude;
    }
    const auto second = sparsify(rendered, k);
    REQUIRE(second.taps.size() == first.taps.size());
    for (std::size_t i = 0; i < first.taps.size(); ++i) {
        CHECK(second.taps[i].delay == first.taps[i].delay);
        CHECK(second.taps[i].amplitude == first.taps[i].amplitude);
    }
}

TEST_CASE("sparsify validates its arguments") {
    impulse_response cir;
    cir.delay_step = 1e-9;
    cir.values = {{1.0, 0.0}};
    CHECK_THROWS_AS(sparsify(cir, 0), non_positive_input);
    cir.values.clear();
    CHECK_THROWS_AS(sparsify(cir, 1), empty_sequence);
    cir.values = {{1.0, 0.0}};
    cir.delay_step = 0.0;
    CHECK_THROWS_AS(sparsify(cir, 1), non_positive_input);
}

TEST_CASE("text trace round-trip is lossless") {
    std::mt19937_64 rng(79);
    testutil::temp_dir dir("trace_text");

    auto seq = random_sequence(rng, 100, 5);
    seq.metadata["campaign"] = "unit";
    seq.metadata["note"] = "free text without reserved chars";

    const auto path = dir.path("trace.csv");
    save_trace(seq, path);
    const auto loaded = load_trace(path);
    CHECK(sequences_equal(seq, loaded));
}

TEST_CASE("binary trace round-trip is lossless apart from metadata") {
    std::mt19937_64 rng(83);
    testutil::temp_dir dir("trace_bin");

    auto seq = random_sequence(rng, 100, 10);
    seq.metadata["dropped"] = "binary carries no metadata";

    const auto path = dir.path("trace.bin");
    save_trace(seq, path, trace_format::binary);
    const auto loaded = load_trace(path);
    CHECK(sequences_equal(seq, loaded, false));
    CHECK(loaded.metadata.empty());
}

TEST_CASE("trace formats are auto-detected and empty traces round-trip") {
    testutil::temp_dir dir("trace_auto");
    snapshot_sequence empty;

    save_trace(empty, dir.path("a.csv"));
    save_trace(empty, dir.path("a.bin"), trace_format::binary);
    CHECK(load_trace(dir.path("a.csv")).snapshots.empty());
    CHECK(load_trace(dir.path("a.bin")).snapshots.empty());
}

TEST_CASE("boundary tap count survives the round trip") {
    std::mt19937_64 rng(89);
    testutil::temp_dir dir("trace_boundary");
    const auto seq = random_sequence(rng, 5, 10);
    for (const auto &s : seq.snapshots)
        REQUIRE(s.taps.size() == 10);
    save_trace(seq, dir.path("t.csv"));
    CHECK(sequences_equal(seq, load_trace(dir.path("t.csv"))));
}

TEST_CASE("trace loading rejects malformed files") {
    testutil::temp_dir dir("trace_bad");

    CHECK_THROWS_AS(load_trace(dir.path("missing.csv")), io_error);

    auto write = [&](const std::string &name, const std::string &content) {
        std::ofstream os(dir.path(name), std::ios::binary);
        os << content;
        return dir.path(name);
    };

    CHECK_THROWS_AS(load_trace(write("short.csv", "CH")), parse_error);
    CHECK_THROWS_AS(load_trace(write("magic.csv", "NOPE,version=1\n0,0,1,0\n")), parse_error);
    CHECK_THROWS_AS(load_trace(write("ver.csv", "CHEM,version=2\n0,0,1,0\n")), parse_error);
    CHECK_THROWS_AS(load_trace(write("nover.csv", "CHEM,author=x\n0,0,1,0\n")), parse_error);

    try {
        load_trace(write("num.csv", "CHEM,version=1\n0,0,1,0\n1,0,zzz,0\n"));
        FAIL("expected parse_error");
    } catch (const parse_error &e) {
        CHECK(e.line() == 3);
    }

    CHECK_THROWS_AS(load_trace(write("fields.csv", "CHEM,version=1\n0,0,1\n")), parse_error);

    // Eleven taps in one record exceed the default budget.
    std::string eleven = "CHEM,version=1\n0";
    for (int i = 0; i < 11; ++i)
        eleven += "," + std::to_string(i) + "e-9,1,0";
    eleven += "\n";
    CHECK_THROWS_AS(load_trace(write("eleven.csv", eleven)), invariant_violation);

    CHECK_THROWS_AS(load_trace(write("order.csv", "CHEM,version=1\n2,0,1,0\n1,0,1,0\n")),
                    invariant_violation);

    CHECK_THROWS_AS(load_trace(write("trunc.bin", std::string("CHEM1\x05", 6))), parse_error);
}

TEST_CASE("loader normalizes taps within each record") {
    testutil::temp_dir dir("trace_norm");
    std::ofstream os(dir.path("t.csv"), std::ios::binary);
    os << "CHEM,version=1\n";
    os << "0,5e-9,0.5,0,1e-9,1,0,5e-9,0.25,0\n";
    os.close();

    const auto seq = load_trace(dir.path("t.csv"));
    REQUIRE(seq.snapshots.size() == 1);
    REQUIRE(seq.snapshots[0].taps.size() == 2);
    CHECK(seq.snapshots[0].taps[0].delay == 1e-9);
    CHECK(seq.snapshots[0].taps[1].delay == 5e-9);
    CHECK(seq.snapshots[0].taps[1].amplitude == cdouble{0.75, 0.0});
}

TEST_CASE("metadata with reserved characters is rejected at save time") {
    testutil::temp_dir dir("trace_meta");
    snapshot_sequence seq;
    seq.metadata["bad,key"] = "x";
    CHECK_THROWS_AS(save_trace(seq, dir.path("m.csv")), io_error);
    seq.metadata.clear();
    seq.metadata["key"] = "bad\nvalue";
    CHECK_THROWS_AS(save_trace(seq, dir.path("m.csv")), io_error);
}

TEST_CASE("synthetic drive-by trace matches the configured sampling") {
    scenario_config cfg;
    cfg.start_time = 2.42;
    const auto seq = synth_v2i_trace(cfg);

    REQUIRE(seq.snapshots.size() == 301);
    CHECK(seq.snapshots.front().timestamp == 2.42);
    CHECK_THAT(seq.snapshots.back().timestamp - seq.snapshots.front().timestamp,
               Catch::Matchers::WithinAbs(53.5e-3, 1e-12));
    const double dt = seq.snapshots[1].timestamp - seq.snapshots[0].timestamp;
    CHECK_THAT(dt, Catch::Matchers::WithinRel(53.5e-3 / 300.0, 1e-9));

    for (const auto &s : seq.snapshots) {
        REQUIRE(s.taps.size() == 4);
        for (std::size_t k = 1; k < s.taps.size(); ++k)
            CHECK(s.taps[k].delay > s.taps[k - 1].delay);
    }
}

TEST_CASE("drive-by line of sight shortens while the vehicle approaches") {
    const auto seq = synth_v2i_trace(scenario_config{});
    double prev = std::numeric_limits<double>::infinity();
    for (const auto &s : seq.snapshots) {
        const double los_delay = s.taps.front().delay;
        CHECK(los_delay < prev);
        prev = los_delay;
    }
}

TEST_CASE("drive-by geometry fixes tap delays and magnitudes") {
    scenario_config cfg;
    const auto seq = synth_v2i_trace(cfg);
    const auto &snap = seq.snapshots.front();

    const double x = cfg.initial_distance;
    const double r_los = std::hypot(x, cfg.receiver_height - cfg.tx_height);
    const double r_gnd = std::hypot(x, cfg.receiver_height + cfg.tx_height);

    CHECK_THAT(snap.taps[0].delay, Catch::Matchers::WithinRel(r_los / 299792458.0, 1e-12));
    CHECK_THAT(std::abs(snap.taps[0].amplitude),
               Catch::Matchers::WithinRel(1.0 / r_los, 1e-12));

    // Ground bounce: image geometry and a -1 reflection coefficient.
    double gnd_delay = 0.0;
    cdouble gnd_amp;
    for (const auto &t : snap.taps)
        if (std::abs(t.delay - r_gnd / 299792458.0) < 1e-15) {
            gnd_delay = t.delay;
            gnd_amp = t.amplitude;
        }
    REQUIRE(gnd_delay > 0.0);
    CHECK_THAT(std::abs(gnd_amp), Catch::Matchers::WithinRel(1.0 / r_gnd, 1e-12));
    const auto expected =
        -std::polar(1.0 / r_gnd, -2.0 * std::numbers::pi * cfg.carrier * gnd_delay);
    CHECK(testutil::rel_err(gnd_amp, expected) < 1e-12);

    // Scatterers sit at the configured excess delay with free-space decay
    // over their longer path.
    const auto &sc = cfg.scatterers[0];
    bool found = false;
    for (const auto &t : snap.taps)
        if (std::abs(t.delay - (snap.taps[0].delay + sc.delay_offset)) < 1e-15) {
            const double want =
                amplitude_from_db(sc.relative_power_db) /
                (r_los + 299792458.0 * sc.delay_offset);
            CHECK_THAT(std::abs(t.amplitude), Catch::Matchers::WithinRel(want, 1e-12));
            found = true;
        }
    CHECK(found);
}

TEST_CASE("drive-by LOS Doppler stays below the kinematic ceiling") {
    scenario_config cfg;
    const auto seq = synth_v2i_trace(cfg);
    const double dt = seq.snapshots[1].timestamp - seq.snapshots[0].timestamp;
    const double nu_max = cfg.speed * cfg.carrier / 299792458.0;

    const auto &a = seq.snapshots[0].taps.front().amplitude;
    const auto &b = seq.snapshots[1].taps.front().amplitude;
    const double measured = std::arg(b / a) / (2.0 * std::numbers::pi * dt);

    const double x = cfg.initial_distance;
    const double r = std::hypot(x, cfg.receiver_height - cfg.tx_height);
    const double expected = nu_max * (x / r);
    CHECK(measured < nu_max);
    CHECK_THAT(measured, Catch::Matchers::WithinRel(expected, 1e-2));
}

TEST_CASE("a parked transmitter with no scatterers yields a frozen channel") {
    scenario_config cfg;
    cfg.speed = 0.0;
    cfg.scatterers.clear();
    cfg.num_snapshots = 16;
    const auto seq = synth_v2i_trace(cfg);
    const auto &first = seq.snapshots.front();
    for (const auto &s : seq.snapshots) {
        REQUIRE(s.taps.size() == first.taps.size());
        for (std::size_t k = 0; k < s.taps.size(); ++k) {
            CHECK(s.taps[k].delay == first.taps[k].delay);
            CHECK(s.taps[k].amplitude == first.taps[k].amplitude);
        }
    }

    // And its spreading function concentrates at zero Doppler.
    frequency_grid grid{-50e6, 1e6, 100};
    std::vector<std::pair<double, impulse_response>> series;
    for (const auto &s : seq.snapshots)
        series.emplace_back(s.timestamp,
                            tf_to_cir(channel_frequency_response(s, grid)));
    const auto map = spreading_function(series);
    double best = -1.0;
    std::size_t best_row = 0;
    for (std::size_t r = 0; r < map.values.size(); ++r)
        for (const auto &v : map.values[r])
            if (std::abs(v) > best) {
                best = std::abs(v);
                best_row = r;
            }
    CHECK_THAT(map.doppler_start + static_cast<double>(best_row) * map.doppler_step,
               Catch::Matchers::WithinAbs(0.0, 1e-9));
}

TEST_CASE("noise floor culls weak paths") {
    scenario_config cfg;
    cfg.noise_floor_db = -9.0;
    const auto seq = synth_v2i_trace(cfg);
    // The -10 dB scatterer at 25 ns excess delay falls below -9 dB re the
    // LOS peak after its longer free-space path; the rest survive.
    for (const auto &s : seq.snapshots)
        CHECK(s.taps.size() == 3);
}

TEST_CASE("scatterer phases are seeded deterministically") {
    scenario_config cfg;
    const auto a = synth_v2i_trace(cfg, default_max_active_taps, 7);
    const auto b = synth_v2i_trace(cfg, default_max_active_taps, 7);
    const auto c = synth_v2i_trace(cfg, default_max_active_taps, 8);
    CHECK(sequences_equal(a, b));
    CHECK_FALSE(sequences_equal(a, c));
}

TEST_CASE("scenario validation") {
    scenario_config cfg;
    cfg.num_snapshots = 1;
    CHECK_THROWS_AS(synth_v2i_trace(cfg), non_positive_input);

    cfg = scenario_config{};
    cfg.speed = -1.0;
    CHECK_THROWS_AS(synth_v2i_trace(cfg), non_positive_input);

    cfg = scenario_config{};
    cfg.carrier = 0.0;
    CHECK_THROWS_AS(synth_v2i_trace(cfg), non_positive_input);

    cfg = scenario_config{};
    cfg.duration = 0.0;
    CHECK_THROWS_AS(synth_v2i_trace(cfg), non_positive_input);

    cfg = scenario_config{};
    cfg.scatterers[0].delay_offset = 0.0;
    CHECK_THROWS_AS(synth_v2i_trace(cfg), delay_out_of_range);

    cfg = scenario_config{};
    cfg.scatterers.resize(9, {1e-9, -10.0, 100.0});
    CHECK_THROWS_AS(synth_v2i_trace(cfg), too_many_taps);
    CHECK_NOTHROW(synth_v2i_trace(cfg, 11));
}

TEST_CASE("synthetic trace round-trips through the text format") {
    testutil::temp_dir dir("trace_synth");
    const auto seq = synth_v2i_trace(scenario_config{});
    save_trace(seq, dir.path("v2i.csv"));
    const auto loaded = load_trace(dir.path("v2i.csv"));
    CHECK(sequences_equal(seq, loaded));
}
