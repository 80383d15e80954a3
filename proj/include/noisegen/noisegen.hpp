#ifndef NOISEGEN_NOISEGEN_HPP
#define NOISEGEN_NOISEGEN_HPP

#include "noisegen/colorspace.hpp"
#include "noisegen/commands.hpp"
#include "noisegen/image.hpp"
#include "noisegen/image_io.hpp"
#include "noisegen/model_fit.hpp"
#include "noisegen/noise_metric.hpp"
#include "noisegen/patch_selection.hpp"
#include "noisegen/pipeline.hpp"
#include "noisegen/regen.hpp"
#include "noisegen/sidecar.hpp"

#endif
