#pragma once

#include "subphase/core.hpp"
#include "subphase/diagnostics.hpp"
#include "subphase/erasure.hpp"
#include "subphase/exact.hpp"
#include "subphase/experiments.hpp"
#include "subphase/frames.hpp"
#include "subphase/grassmann.hpp"
#include "subphase/liftrec.hpp"
#include "subphase/symmat.hpp"
#include "subphase/system_io.hpp"
