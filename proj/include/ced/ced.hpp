#pragma once

#include "ced/baseline.hpp"
#include "ced/cloud.hpp"
#include "ced/detector.hpp"
#include "ced/error.hpp"
#include "ced/evaluation.hpp"
#include "ced/io.hpp"
#include "ced/report.hpp"
#include "ced/scene.hpp"
#include "ced/spatial_index.hpp"
