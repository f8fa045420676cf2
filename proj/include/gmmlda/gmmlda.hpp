#pragma once

#include "gmmlda/corpus.hpp"
#include "gmmlda/eval.hpp"
#include "gmmlda/io.hpp"
#include "gmmlda/model.hpp"
#include "gmmlda/permutation.hpp"
#include "gmmlda/rng.hpp"
#include "gmmlda/runner.hpp"
#include "gmmlda/sampler.hpp"
#include "gmmlda/supervised.hpp"
