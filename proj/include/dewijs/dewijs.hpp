// Copyright 2026 The dewijs Authors
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

#pragma once

#include "dewijs/bessel.hpp"
#include "dewijs/continuum.hpp"
#include "dewijs/contrast.hpp"
#include "dewijs/error.hpp"
#include "dewijs/geometry.hpp"
#include "dewijs/kernels.hpp"
#include "dewijs/kriging.hpp"
#include "dewijs/lattice.hpp"
#include "dewijs/potential_kernel.hpp"
#include "dewijs/quadrature.hpp"
#include "dewijs/rng.hpp"
