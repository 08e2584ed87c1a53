#pragma once

#include "oscillat/error.hpp"
#include "oscillat/lattice.hpp"
#include "oscillat/spectral.hpp"
#include "oscillat/coefficients.hpp"
#include "oscillat/cell.hpp"
#include "oscillat/mesh.hpp"
#include "oscillat/dirichlet.hpp"
#include "oscillat/evolution.hpp"
#include "oscillat/rates.hpp"
#include "oscillat/config.hpp"
#include "oscillat/study.hpp"
