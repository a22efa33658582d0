#pragma once

#include "autodiff/adam.hpp"
#include "autodiff/graph.hpp"
#include "autodiff/loss.hpp"
#include "autodiff/trainer.hpp"
#include "calibration/acs.hpp"
#include "calibration/espirit.hpp"
#include "calibration/sensitivities.hpp"
#include "calibration/spirit.hpp"
#include "core/array.hpp"
#include "core/fft.hpp"
#include "core/linalg.hpp"
#include "core/ops.hpp"
#include "core/random.hpp"
#include "data/coil_compress.hpp"
#include "data/container.hpp"
#include "data/mask.hpp"
#include "data/model_io.hpp"
#include "data/phantom.hpp"
#include "data/zero_filled.hpp"
#include "metrics/evaluate.hpp"
#include "metrics/metrics.hpp"
#include "pipeline/config.hpp"
#include "pipeline/experiment.hpp"
#include "pipeline/slice.hpp"
#include "recon/comnet.hpp"
#include "recon/l1spirit.hpp"
#include "recon/wavelet.hpp"
