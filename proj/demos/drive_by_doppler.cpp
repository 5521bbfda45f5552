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

// Drive-by scenario demo: synthesize the default street-crossing trace,
// form the delay-Doppler spreading function over a 100 MHz analysis band,
// and report where its energy concentrates.

#include <cstdio>
#include <utility>
#include <vector>

#include "chanem/chanem.hpp"

int main() {
    chanem::scenario_config cfg;
    const auto seq = chanem::synth_v2i_trace(cfg);
    std::printf("synthesized %zu snapshots over %.1f ms\n", seq.snapshots.size(),
                (seq.snapshots.back().timestamp - seq.snapshots.front().timestamp) * 1e3);

    chanem::frequency_grid grid{-50e6, 100e6 / 128.0, 128};
    std::vector<std::pair<double, chanem::impulse_response>> series;
    for (const auto &snap : seq.snapshots) {
        const auto tf = chanem::channel_frequency_response(snap, grid);
        series.emplace_back(snap.timestamp, chanem::tf_to_cir(tf));
    }
    const auto map = chanem::spreading_function(series);

    double best = -1.0, best_doppler = 0.0, best_delay = 0.0;
    for (std::size_t r = 0; r < map.values.size(); ++r)
        for (std::size_t d = 0; d < map.values[r].size(); ++d)
            if (std::abs(map.values[r][d]) > best) {
                best = std::abs(map.values[r][d]);
                best_doppler = map.doppler_start + static_cast<double>(r) * map.doppler_step;
                best_delay = map.delay_offset + static_cast<double>(d) * map.delay_step;
            }

    const double nu_max = cfg.speed * cfg.carrier / chanem::speed_of_light;
    std::printf("spreading peak at %.1f Hz Doppler, %.1f ns delay\n", best_doppler,
                best_delay * 1e9);
    std::printf("kinematic Doppler ceiling v*fc/c = %.1f Hz\n", nu_max);
    std::printf("Doppler resolution %.1f Hz, span +-%.1f Hz\n", map.doppler_step,
                -map.doppler_start);
    return 0;
}
