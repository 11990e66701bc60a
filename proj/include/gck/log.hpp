#pragma once

#include <spdlog/spdlog.h>

namespace gck {

// Routes library logging to stderr at the level named by GCK_LOG
// (trace, debug, info, warn, error, critical, off). Default: warn.
void init_logging();

}  // namespace gck
