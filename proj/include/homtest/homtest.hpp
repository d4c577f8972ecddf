#pragma once

// Umbrella header: list-homomorphism property testing toolkit.

#include "homtest/errors.hpp"
#include "homtest/rng.hpp"
#include "homtest/graph.hpp"
#include "homtest/instance.hpp"
#include "homtest/oracle.hpp"
#include "homtest/json_io.hpp"
#include "homtest/solver.hpp"
#include "homtest/minimality.hpp"
#include "homtest/algebra.hpp"
#include "homtest/testers.hpp"
#include "homtest/relational.hpp"
#include "homtest/relational_io.hpp"
#include "homtest/reductions.hpp"
#include "homtest/harness.hpp"
