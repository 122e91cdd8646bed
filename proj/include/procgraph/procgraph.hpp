// Copyright 2026 The procgraph Authors.
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


#pragma once

#include "procgraph/core.hpp"
#include "procgraph/generators.hpp"
#include "procgraph/graph.hpp"
#include "procgraph/graph_io.hpp"
#include "procgraph/mcts.hpp"
#include "procgraph/pipeline.hpp"
#include "procgraph/metrics.hpp"
#include "procgraph/prior.hpp"
#include "procgraph/quantize.hpp"
#include "procgraph/raster.hpp"
#include "procgraph/tokenizer.hpp"
