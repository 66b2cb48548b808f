// Copyright (c) 2026 the masa authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "masa/adaptation.hpp"
#include "masa/common.hpp"
#include "masa/correspondence_io.hpp"
#include "masa/encoder.hpp"
#include "masa/feature_map.hpp"
#include "masa/fusion.hpp"
#include "masa/image.hpp"
#include "masa/image_io.hpp"
#include "masa/matching.hpp"
#include "masa/metrics.hpp"
#include "masa/parallel.hpp"
#include "masa/pipeline.hpp"
#include "masa/resample.hpp"
#include "masa/rng.hpp"
#include "masa/visualize.hpp"
#include "masa/weights_io.hpp"
