#ifndef BAYES_PRIMER_ERRORS_HPP_
#define BAYES_PRIMER_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace bayes_primer {

// Invalid parameter values or preconditions (caller error).
class invalid_argument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Problems with user-supplied data: impossible observations, malformed
// files, missing columns.  CLI maps these to exit code 2.
class data_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failures: non-convergence, degenerate chains, indefinite
// Hessians.  CLI maps these to exit code 3.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bayes_primer

#endif  // BAYES_PRIMER_ERRORS_HPP_
