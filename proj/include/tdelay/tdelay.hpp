#pragma once

#include "cluster.hpp"
#include "dense.hpp"
#include "error.hpp"
#include "hamiltonian.hpp"
#include "lattice.hpp"
#include "optimize.hpp"
#include "parallel.hpp"
#include "peak.hpp"
#include "phase.hpp"
#include "sweep.hpp"
#include "topology.hpp"
#include "units.hpp"
#include "version.hpp"
#include "wavepacket.hpp"
#include "well.hpp"
