// Copyright 2026 The kxfer Authors
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

#ifndef KXFER_KXFER_HPP_
#define KXFER_KXFER_HPP_

// Everything except image_io.hpp, which needs libpng at link time.

#include "kxfer/backtrack.hpp"
#include "kxfer/bench.hpp"
#include "kxfer/bhkm.hpp"
#include "kxfer/error.hpp"
#include "kxfer/kft_io.hpp"
#include "kxfer/kmeans.hpp"
#include "kxfer/library.hpp"
#include "kxfer/match.hpp"
#include "kxfer/overlay.hpp"
#include "kxfer/pq.hpp"
#include "kxfer/similarity.hpp"
#include "kxfer/synthetic.hpp"
#include "kxfer/tensor.hpp"
#include "kxfer/transfer.hpp"
#include "kxfer/version.hpp"
#include "kxfer/wavelet.hpp"

#endif  // KXFER_KXFER_HPP_
