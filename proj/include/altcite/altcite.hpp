#pragma once

#include "altcite/classic.hpp"
#include "altcite/common.hpp"
#include "altcite/csv.hpp"
#include "altcite/dataset.hpp"
#include "altcite/experiments.hpp"
#include "altcite/generator.hpp"
#include "altcite/linear.hpp"
#include "altcite/metrics.hpp"
#include "altcite/neural.hpp"
#include "altcite/preprocess.hpp"
#include "altcite/schema.hpp"
#include "altcite/tree.hpp"
#include "altcite/tuning.hpp"
