#pragma once

#include "fstnet/autograd.hpp"
#include "fstnet/check.hpp"
#include "fstnet/data.hpp"
#include "fstnet/fft.hpp"
#include "fstnet/image.hpp"
#include "fstnet/linalg.hpp"
#include "fstnet/metrics.hpp"
#include "fstnet/model.hpp"
#include "fstnet/ops.hpp"
#include "fstnet/optim.hpp"
#include "fstnet/png_io.hpp"
#include "fstnet/rng.hpp"
#include "fstnet/serialize.hpp"
#include "fstnet/spectrum.hpp"
#include "fstnet/tensor.hpp"
#include "fstnet/train.hpp"
