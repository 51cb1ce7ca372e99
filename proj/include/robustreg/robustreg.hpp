#pragma once

#include "robustreg/composite.hpp"
#include "robustreg/csv.hpp"
#include "robustreg/dispatch.hpp"
#include "robustreg/gauss.hpp"
#include "robustreg/linalg.hpp"
#include "robustreg/loss.hpp"
#include "robustreg/mestim.hpp"
#include "robustreg/rng.hpp"
#include "robustreg/sample_data.hpp"
#include "robustreg/scale.hpp"
#include "robustreg/simulate.hpp"
#include "robustreg/subset.hpp"
#include "robustreg/types.hpp"
