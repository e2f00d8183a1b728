#pragma once

#include "admm.hpp"
#include "cover.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "io.hpp"
#include "nview.hpp"
#include "parallel.hpp"
#include "registration.hpp"
#include "rng.hpp"
#include "synth.hpp"
