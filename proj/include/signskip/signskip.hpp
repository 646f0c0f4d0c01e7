#ifndef SIGNSKIP_SIGNSKIP_HPP
#define SIGNSKIP_SIGNSKIP_HPP

#include "signskip/bench.hpp"
#include "signskip/calibration.hpp"
#include "signskip/digest.hpp"
#include "signskip/error.hpp"
#include "signskip/metrics.hpp"
#include "signskip/mlp_engine.hpp"
#include "signskip/model_io.hpp"
#include "signskip/predictor.hpp"
#include "signskip/rng.hpp"
#include "signskip/signpack.hpp"
#include "signskip/sparse_linear.hpp"
#include "signskip/tensor.hpp"

#endif  // SIGNSKIP_SIGNSKIP_HPP
