#pragma once

// Umbrella header: segment-level diarization confidence scoring, spectral
// clustering over precomputed speaker embeddings, and coverage / covered-DER
// evaluation with global threshold selection.

#include "diaconf/commands.hpp"
#include "diaconf/confidence.hpp"
#include "diaconf/core.hpp"
#include "diaconf/csv.hpp"
#include "diaconf/manifest.hpp"
#include "diaconf/metrics.hpp"
#include "diaconf/rttm.hpp"
#include "diaconf/selection.hpp"
#include "diaconf/spectral.hpp"
#include "diaconf/synth.hpp"
#include "diaconf/timeline.hpp"
