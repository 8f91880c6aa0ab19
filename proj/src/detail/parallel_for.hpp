#pragma once

#include "shrinknet/eb_em.hpp"
#include "shrinknet/error.hpp"

#include <exception>
#include <string>
#include <vector>

namespace shrinknet::detail {

// Runs body(i) for i in [0, count). Failures are collected per index and the
// first one in index order is rethrown, so the outcome does not depend on the
// thread schedule. `label(i)` prefixes numerical errors with task context.
template <typename Body, typename Label>
void parallel_for(Index count, Execution exec, Body&& body, Label&& label) {
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(count));
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (Index i = 0; i < count; ++i) {
      try {
        body(i);
      } catch (...) {
        failures[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  } else {
    for (Index i = 0; i < count; ++i) {
      try {
        body(i);
      } catch (...) {
        failures[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  }
  for (std::size_t i = 0; i < failures.size(); ++i) {
    if (!failures[i]) continue;
    try {
      std::rethrow_exception(failures[i]);
    } catch (const NumericalError& e) {
      throw NumericalError(label(static_cast<Index>(i)) + ": " + e.what());
    }
  }
}

}  // namespace shrinknet::detail
