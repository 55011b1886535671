#pragma once

// Internal helper: OpenMP loop over independent indices. Exceptions thrown by
// the body are captured and the first one (lowest index) is rethrown after
// the parallel region, so results match the serial loop exactly.

#include <cstddef>
#include <exception>
#include <vector>

namespace surgekit::detail {

template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  std::vector<std::exception_ptr> errors(n);
  const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace surgekit::detail
