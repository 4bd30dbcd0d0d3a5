#pragma once
// Umbrella header: the whole library.

#include "pathexplain/activation.hpp"
#include "pathexplain/attribution.hpp"
#include "pathexplain/benchlab.hpp"
#include "pathexplain/common.hpp"
#include "pathexplain/interaction.hpp"
#include "pathexplain/io.hpp"
#include "pathexplain/linalg.hpp"
#include "pathexplain/model_io.hpp"
#include "pathexplain/network.hpp"
#include "pathexplain/rivals.hpp"
#include "pathexplain/train.hpp"
