// Copyright 2026 The tdsm Authors
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

#ifndef TDSM_TDSM_HPP_
#define TDSM_TDSM_HPP_

#include "tdsm/constructions.hpp"
#include "tdsm/engines.hpp"
#include "tdsm/experiments.hpp"
#include "tdsm/model.hpp"
#include "tdsm/rng.hpp"
#include "tdsm/sat.hpp"
#include "tdsm/stability.hpp"

#endif  // TDSM_TDSM_HPP_
