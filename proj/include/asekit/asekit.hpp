// Copyright 2026 the asekit developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

//! Umbrella header for the asekit toolkit: simulation and entropy
//! certification of randomness generated by direct detection of amplified
//! spontaneous emission.

#include "detection_chain.hpp"
#include "entropy_quant.hpp"
#include "experiment.hpp"
#include "extractor.hpp"
#include "io.hpp"
#include "photon_statistics.hpp"
#include "rng.hpp"
#include "sampling.hpp"
#include "stats.hpp"
#include "version.hpp"
