#include "gck/log.hpp"

#include <cstdlib>

#include <spdlog/sinks/stdout_color_sinks.h>

namespace gck {

void init_logging() {
    auto logger = spdlog::stderr_color_mt("gck");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
    auto level = spdlog::level::warn;
    if (const char* env = std::getenv("GCK_LOG")) {
        level = spdlog::level::from_str(env);
    }
    spdlog::set_level(level);
}

}  // namespace gck
