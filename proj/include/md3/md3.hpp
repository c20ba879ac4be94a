#pragma once

#include "md3/error.hpp"
#include "md3/random.hpp"
#include "md3/data.hpp"
#include "md3/stats.hpp"
#include "md3/log.hpp"
#include "md3/linear.hpp"
#include "md3/tree.hpp"
#include "md3/ensemble.hpp"
#include "md3/classifier.hpp"
#include "md3/margin.hpp"
#include "md3/synthetic.hpp"
#include "md3/induction.hpp"
#include "md3/detectors.hpp"
#include "md3/harness.hpp"
#include "md3/experiments.hpp"
#include "md3/serialize.hpp"
