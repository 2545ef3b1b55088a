#pragma once

#include "wardrop/costs.hpp"
#include "wardrop/degeneracy.hpp"
#include "wardrop/dense.hpp"
#include "wardrop/homotopy.hpp"
#include "wardrop/instances.hpp"
#include "wardrop/io.hpp"
#include "wardrop/linalg.hpp"
#include "wardrop/network.hpp"
#include "wardrop/oracle.hpp"
#include "wardrop/rational.hpp"
