#pragma once

#include "cuspidal/classify.hpp"
#include "cuspidal/config.hpp"
#include "cuspidal/error.hpp"
#include "cuspidal/export.hpp"
#include "cuspidal/ik.hpp"
#include "cuspidal/model.hpp"
#include "cuspidal/path.hpp"
#include "cuspidal/polynomial.hpp"
#include "cuspidal/robot_io.hpp"
#include "cuspidal/singular.hpp"
#include "cuspidal/svg.hpp"
#include "cuspidal/topo.hpp"
