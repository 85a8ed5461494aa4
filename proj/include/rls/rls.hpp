#ifndef RLS_RLS_HPP
#define RLS_RLS_HPP

#include "rls/rng.hpp"
#include "rls/instance.hpp"
#include "rls/linalg.hpp"
#include "rls/solvers.hpp"
#include "rls/theory.hpp"
#include "rls/bench.hpp"
#include "rls/config.hpp"

#endif
