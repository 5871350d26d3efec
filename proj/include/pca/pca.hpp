#pragma once

#include "pca/contours.hpp"
#include "pca/distribution.hpp"
#include "pca/dynamics.hpp"
#include "pca/exact.hpp"
#include "pca/gibbs.hpp"
#include "pca/kernel.hpp"
#include "pca/lattice.hpp"
#include "pca/model_file.hpp"
#include "pca/montecarlo.hpp"
#include "pca/spin.hpp"
#include "pca/util.hpp"
#include "pca/verify.hpp"
