#ifndef NASHNET_NASHNET_HPP
#define NASHNET_NASHNET_HPP

#include "nashnet/bundled.hpp"
#include "nashnet/catalog.hpp"
#include "nashnet/convex.hpp"
#include "nashnet/digraph.hpp"
#include "nashnet/engine.hpp"
#include "nashnet/error.hpp"
#include "nashnet/expr.hpp"
#include "nashnet/metrics.hpp"
#include "nashnet/saddle.hpp"
#include "nashnet/scenario.hpp"
#include "nashnet/scenario_io.hpp"
#include "nashnet/schedule.hpp"
#include "nashnet/stepsize.hpp"
#include "nashnet/vec.hpp"

#endif // NASHNET_NASHNET_HPP
