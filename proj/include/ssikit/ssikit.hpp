#pragma once

#include "ssikit/clustering.hpp"
#include "ssikit/consistency.hpp"
#include "ssikit/hankel.hpp"
#include "ssikit/io.hpp"
#include "ssikit/linalg.hpp"
#include "ssikit/mdof.hpp"
#include "ssikit/modal.hpp"
#include "ssikit/outliers.hpp"
#include "ssikit/pipeline.hpp"
#include "ssikit/projections.hpp"
#include "ssikit/record.hpp"
#include "ssikit/rng.hpp"
#include "ssikit/robust.hpp"
#include "ssikit/spectrum.hpp"
