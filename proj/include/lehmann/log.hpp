#pragma once

#include <cstdlib>
#include <string>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

namespace lehmann {

// Routes library logging to stderr at the level named by LEHMANN_LOG
// (trace, debug, info, warn, error, critical, off; default warn).
inline void init_logging_from_env() {
  auto logger = std::make_shared<spdlog::logger>(
      "lehmann", std::make_shared<spdlog::sinks::stderr_sink_mt>());
  logger->set_pattern("[%l] %v");
  auto level = spdlog::level::warn;
  if (const char* env = std::getenv("LEHMANN_LOG"); env && *env) {
    level = spdlog::level::from_str(env);
  }
  logger->set_level(level);
  spdlog::set_default_logger(std::move(logger));
}

}  // namespace lehmann
