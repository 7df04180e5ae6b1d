#ifndef BAYES_PRIMER_BAYES_PRIMER_HPP_
#define BAYES_PRIMER_BAYES_PRIMER_HPP_

// Umbrella header for the whole toolkit.

#include "bayes_primer/conjugate.hpp"
#include "bayes_primer/discrete.hpp"
#include "bayes_primer/distributions.hpp"
#include "bayes_primer/draws.hpp"
#include "bayes_primer/errors.hpp"
#include "bayes_primer/eval.hpp"
#include "bayes_primer/io/csv.hpp"
#include "bayes_primer/io/emit.hpp"
#include "bayes_primer/io/model_data.hpp"
#include "bayes_primer/mcmc.hpp"
#include "bayes_primer/model/ast.hpp"
#include "bayes_primer/model/graph.hpp"
#include "bayes_primer/model/parser.hpp"
#include "bayes_primer/model/sampler.hpp"
#include "bayes_primer/models.hpp"
#include "bayes_primer/rng.hpp"
#include "bayes_primer/special.hpp"

#endif  // BAYES_PRIMER_BAYES_PRIMER_HPP_
