// Copyright 2026 The cosalbench authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "cosal/baseline.hpp"
#include "cosal/builder.hpp"
#include "cosal/calibration.hpp"
#include "cosal/error.hpp"
#include "cosal/grid.hpp"
#include "cosal/image_io.hpp"
#include "cosal/manifest.hpp"
#include "cosal/metrics.hpp"
#include "cosal/numeric.hpp"
#include "cosal/parallel.hpp"
#include "cosal/rng.hpp"
#include "cosal/sampler.hpp"
#include "cosal/synth.hpp"
#include "cosal/uncertainty.hpp"
#include "cosal/version.hpp"
