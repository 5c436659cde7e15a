#pragma once

#include "coupling/archive.hpp"
#include "coupling/classfile.hpp"
#include "coupling/compare.hpp"
#include "coupling/error.hpp"
#include "coupling/filter.hpp"
#include "coupling/graph_io.hpp"
#include "coupling/io.hpp"
#include "coupling/metrics.hpp"
#include "coupling/model.hpp"
#include "coupling/simulator.hpp"
#include "coupling/static_graph.hpp"
#include "coupling/trace.hpp"
