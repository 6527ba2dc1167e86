#pragma once

#include "cimflow/crossbar_gen.hpp"
#include "cimflow/error.hpp"
#include "cimflow/flow_graph.hpp"
#include "cimflow/ift_engine.hpp"
#include "cimflow/mask.hpp"
#include "cimflow/netlist.hpp"
#include "cimflow/refined_analysis.hpp"
#include "cimflow/security_config.hpp"
#include "cimflow/verilog_parser.hpp"
