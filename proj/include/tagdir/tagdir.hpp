#pragma once

#include "tagdir/error.hpp"
#include "tagdir/rng.hpp"
#include "tagdir/graph.hpp"
#include "tagdir/tags.hpp"
#include "tagdir/orient.hpp"
#include "tagdir/metrics.hpp"
#include "tagdir/data.hpp"
#include "tagdir/bif.hpp"
#include "tagdir/discovery.hpp"
#include "tagdir/harness.hpp"
