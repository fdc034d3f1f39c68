#pragma once

#include "semaug/batching.hpp"
#include "semaug/checkpoint.hpp"
#include "semaug/contrastive.hpp"
#include "semaug/dataset.hpp"
#include "semaug/error.hpp"
#include "semaug/frame_sampler.hpp"
#include "semaug/gradcheck.hpp"
#include "semaug/kmeans.hpp"
#include "semaug/linalg.hpp"
#include "semaug/prompt.hpp"
#include "semaug/resampler.hpp"
#include "semaug/retrieval.hpp"
#include "semaug/rouge.hpp"
#include "semaug/samples.hpp"
#include "semaug/synth.hpp"
#include "semaug/trainer.hpp"
