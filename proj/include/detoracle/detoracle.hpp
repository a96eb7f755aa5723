// Copyright 2026 The detoracle Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Umbrella header for the oracle engine and the scene generator.

#pragma once

#include "detoracle/assignment.hpp"
#include "detoracle/config.hpp"
#include "detoracle/error.hpp"
#include "detoracle/filters.hpp"
#include "detoracle/geometry.hpp"
#include "detoracle/matching.hpp"
#include "detoracle/model.hpp"
#include "detoracle/pipeline.hpp"
#include "detoracle/random.hpp"
#include "detoracle/recording_io.hpp"
#include "detoracle/report.hpp"
#include "detoracle/synth.hpp"
#include "detoracle/temporal.hpp"
#include "detoracle/verdict.hpp"
