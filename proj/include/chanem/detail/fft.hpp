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

#include <cstddef>
#include <numbers>
#include <vector>

#include "chanem/types.hpp"

namespace chanem::detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n)
        p <<= 1;
    return p;
}

// In-place iterative radix-2 transform, no normalization.
// sign = -1 gives the forward DFT convention, +1 the inverse (unscaled).
inline void fft_pow2(std::vector<cdouble> &x, int sign) {
    const std::size_t n = x.size();
    if (n <= 1)
        return;
    if (!is_pow2(n))
        throw invariant_violation("radix-2 transform requires power-of-two length");

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1)
            j ^= bit;
        j ^= bit;
        if (i < j)
            std::swap(x[i], x[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = static_cast<double>(sign) * 2.0 * std::numbers::pi /
                           static_cast<double>(len);
        std::vector<cdouble> tw(len / 2);
        for (std::size_t k = 0; k < len / 2; ++k)
            tw[k] = std::polar(1.0, ang * static_cast<double>(k));
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cdouble u = x[i + k];
                const cdouble v = x[i + k + len / 2] * tw[k];
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
            }
        }
    }
}

// Direct O(n^2) DFT for arbitrary lengths, no normalization.  Twiddles are
// taken from one exact-angle table indexed by (k*m) mod n so that algebraic
// identities (conjugate symmetry, exact inversion) hold to rounding error.
inline std::vector<cdouble> dft_direct(const std::vector<cdouble> &x, int sign) {
    const std::size_t n = x.size();
    std::vector<cdouble> tw(n), out(n);
    for (std::size_t k = 0; k < n; ++k)
        tw[k] = std::polar(1.0, static_cast<double>(sign) * 2.0 * std::numbers::pi *
                                    static_cast<double>(k) / static_cast<double>(n));
    for (std::size_t k = 0; k < n; ++k) {
        cdouble acc{0.0, 0.0};
        for (std::size_t m = 0; m < n; ++m)
            acc += x[m] * tw[(k * m) % n];
        out[k] = acc;
    }
    return out;
}

// Unnormalized DFT of any length; fast path for powers of two.
inline std::vector<cdouble> dft(std::vector<cdouble> x, int sign) {
    if (is_pow2(x.size())) {
        fft_pow2(x, sign);
        return x;
    }
    return dft_direct(x, sign);
}

} // namespace chanem::detail
