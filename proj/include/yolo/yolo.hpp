// Everything except the WebSocket transport (yolo/bridge_server.hpp), which
// pulls in Boost.

#pragma once

#include "yolo/core.hpp"
#include "yolo/trajectory.hpp"
#include "yolo/geometry.hpp"
#include "yolo/shapes.hpp"
#include "yolo/knn.hpp"
#include "yolo/hal.hpp"
#include "yolo/behavior.hpp"
#include "yolo/planner.hpp"
#include "yolo/simulator.hpp"
#include "yolo/bridge.hpp"
