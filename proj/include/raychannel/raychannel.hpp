// SPDX-License-Identifier: Apache-2.0
//
// raychannel - deterministic multipath radio simulation and LOS/NLOS scenario
// classification toolkit
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

#include "raychannel/channel.hpp"
#include "raychannel/datagen.hpp"
#include "raychannel/features.hpp"
#include "raychannel/forest.hpp"
#include "raychannel/geometry.hpp"
#include "raychannel/gridmap.hpp"
#include "raychannel/parallel.hpp"
#include "raychannel/rng.hpp"
#include "raychannel/scene.hpp"
#include "raychannel/scene_io.hpp"
#include "raychannel/tracer.hpp"
#include "raychannel/version.hpp"
