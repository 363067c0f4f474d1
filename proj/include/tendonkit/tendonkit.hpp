// Copyright 2026 The tendonkit Authors
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

#ifndef TENDONKIT_TENDONKIT_HPP_
#define TENDONKIT_TENDONKIT_HPP_

#include "tendonkit/controller.hpp"
#include "tendonkit/dynamics.hpp"
#include "tendonkit/effective_mass.hpp"
#include "tendonkit/errors.hpp"
#include "tendonkit/kinematics.hpp"
#include "tendonkit/model.hpp"
#include "tendonkit/scenario.hpp"
#include "tendonkit/sim.hpp"
#include "tendonkit/tension.hpp"
#include "tendonkit/text_format.hpp"
#include "tendonkit/trace.hpp"
#include "tendonkit/trajectory.hpp"

#endif  // TENDONKIT_TENDONKIT_HPP_
