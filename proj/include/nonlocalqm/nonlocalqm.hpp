#pragma once

#include "nonlocalqm/error.hpp"
#include "nonlocalqm/grid.hpp"
#include "nonlocalqm/eigensolver.hpp"
#include "nonlocalqm/operator_matrix.hpp"
#include "nonlocalqm/potential.hpp"
#include "nonlocalqm/bandlimit.hpp"
#include "nonlocalqm/hamiltonian.hpp"
#include "nonlocalqm/spectra.hpp"
#include "nonlocalqm/evolution.hpp"
#include "nonlocalqm/smoothing.hpp"
#include "nonlocalqm/deformed_algebra.hpp"
#include "nonlocalqm/classical.hpp"
