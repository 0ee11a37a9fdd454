#pragma once

#include "ball.hpp"
#include "cloudio.hpp"
#include "config.hpp"
#include "dataset.hpp"
#include "episodic.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "igi.hpp"
#include "laplace.hpp"
#include "model.hpp"
#include "neighbors.hpp"
#include "pipeline.hpp"
#include "pool.hpp"
#include "random.hpp"
#include "synth.hpp"
