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

#include <bit>
#include <cstdint>
#include <fstream>
#include <string>

#include "chanem/playback.hpp"
#include "chanem/types.hpp"

namespace chanem {

// Raw sample file: one text header line
//   CSIG,version=1,sample_rate_hz=<v>,center_hz=<v>,n=<count>
// followed by n interleaved little-endian float32 I/Q pairs.
inline void save_signal(const complex_signal &sig, const std::string &path) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw io_error("cannot open '" + path + "' for writing");
    os << "CSIG,version=1,sample_rate_hz=" << detail::fmt_double(sig.sample_rate)
       << ",center_hz=" << detail::fmt_double(sig.center_frequency) << ",n="
       << sig.samples.size() << '\n';
    for (const auto &s : sig.samples) {
        const auto re = std::bit_cast<std::uint32_t>(static_cast<float>(s.real()));
        const auto im = std::bit_cast<std::uint32_t>(static_cast<float>(s.imag()));
        char b[8];
        for (int i = 0; i < 4; ++i)
            b[i] = static_cast<char>((re >> (8 * i)) & 0xff);
        for (int i = 0; i < 4; ++i)
            b[4 + i] = static_cast<char>((im >> (8 * i)) & 0xff);
        os.write(b, 8);
    }
    if (!os)
        throw io_error("write failed for '" + path + "'");
}

inline complex_signal load_signal(const std::string &path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw io_error("cannot open '" + path + "' for reading");
    std::string line;
    if (!std::getline(is, line))
        throw parse_error("missing signal header", 1);
    if (!line.empty() && line.back() == '\r')
        line.pop_back();

    auto fields = detail::split(line, ',');
    if (fields.empty() || fields[0] != "CSIG")
        throw parse_error("bad signal magic", 1);

    complex_signal sig;
    bool version_ok = false;
    bool have_rate = false, have_center = false, have_n = false;
    std::size_t n = 0;
    for (std::size_t i = 1; i < fields.size(); ++i) {
        const auto eq = fields[i].find('=');
        if (eq == std::string::npos)
            throw parse_error("header field '" + fields[i] + "' is not key=value", 1);
        const std::string key = fields[i].substr(0, eq);
        const std::string val = fields[i].substr(eq + 1);
        if (key == "version") {
            if (val != "1")
                throw parse_error("unsupported signal version '" + val + "'", 1);
            version_ok = true;
        } else if (key == "sample_rate_hz") {
            sig.sample_rate = detail::parse_double(val, 1);
            have_rate = true;
        } else if (key == "center_hz") {
            sig.center_frequency = detail::parse_double(val, 1);
            have_center = true;
        } else if (key == "n") {
            n = static_cast<std::size_t>(detail::parse_double(val, 1));
            have_n = true;
        } else {
            throw parse_error("unknown signal header field '" + key + "'", 1);
        }
    }
    if (!version_ok || !have_rate || !have_center || !have_n)
        throw parse_error("signal header is missing required fields", 1);

    sig.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        char b[8];
        if (!is.read(b, 8))
            throw parse_error("signal payload shorter than header count");
        std::uint32_t re = 0, im = 0;
        for (int j = 0; j < 4; ++j)
            re |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[j])) << (8 * j);
        for (int j = 0; j < 4; ++j)
            im |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[4 + j])) << (8 * j);
        sig.samples[i] = {static_cast<double>(std::bit_cast<float>(re)),
                          static_cast<double>(std::bit_cast<float>(im))};
    }
    char extra;
    if (is.read(&extra, 1))
        throw parse_error("signal payload longer than header count");
    return sig;
}

} // namespace chanem
