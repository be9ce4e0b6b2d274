// Copyright 2026 The qloss Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Umbrella header for the qloss library.

#ifndef QLOSS_QLOSS_HPP_
#define QLOSS_QLOSS_HPP_

#include "qloss/experiments.hpp"
#include "qloss/fock.hpp"
#include "qloss/io.hpp"
#include "qloss/loss_model.hpp"
#include "qloss/metrics.hpp"
#include "qloss/numerics.hpp"
#include "qloss/parallel.hpp"
#include "qloss/selftest.hpp"

#endif  // QLOSS_QLOSS_HPP_
