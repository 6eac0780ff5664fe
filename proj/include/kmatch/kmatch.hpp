#ifndef KMATCH_KMATCH_HPP
#define KMATCH_KMATCH_HPP

#include "dynamic_matcher.hpp"
#include "errors.hpp"
#include "exact_matching.hpp"
#include "field_hash.hpp"
#include "gf2.hpp"
#include "graph.hpp"
#include "harness.hpp"
#include "insert_matcher.hpp"
#include "l0_sampler.hpp"
#include "partition.hpp"
#include "seed.hpp"
#include "stream.hpp"

#endif  // KMATCH_KMATCH_HPP
