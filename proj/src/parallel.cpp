#include "gck/parallel.hpp"

#include <omp.h>

#include "gck/error.hpp"

namespace gck {

void set_workers(int workers) {
    if (workers > 0) omp_set_num_threads(workers);
}

int max_workers() { return omp_get_max_threads(); }

void Deadline::check(const std::string& what) const {
    if (expired()) throw TimeoutError(what + " exceeded its time budget");
}

}  // namespace gck
