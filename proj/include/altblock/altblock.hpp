#pragma once

#include "altblock/alternatives.hpp"
#include "altblock/core_model.hpp"
#include "altblock/errors.hpp"
#include "altblock/evaluation.hpp"
#include "altblock/factorization.hpp"
#include "altblock/io.hpp"
#include "altblock/meta_analysis.hpp"
#include "altblock/solver.hpp"
#include "altblock/synth.hpp"
