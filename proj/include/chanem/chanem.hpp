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

#include "chanem/analysis.hpp"
#include "chanem/chain_model.hpp"
#include "chanem/equalizer.hpp"
#include "chanem/errors.hpp"
#include "chanem/playback.hpp"
#include "chanem/signal_io.hpp"
#include "chanem/subband.hpp"
#include "chanem/tdl.hpp"
#include "chanem/types.hpp"
